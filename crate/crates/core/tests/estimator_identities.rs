use lvr_core::{
    simulate_chain, simulate_excursions, simulate_ladder, BlockTimeLaw, ModelParams, RunOptions,
};

const KAPPA: f64 = 0.582_597_157_939_010_7;
const OMEGA: f64 = 0.589_419_448_438_612_5;

#[test]
fn worker_count_does_not_change_a_single_bit() {
    let params = ModelParams::unit(1.3f64).unwrap();
    let law = BlockTimeLaw::uniform(0.0, 2.0).unwrap();
    let base = RunOptions {
        chunk_size: 10_000,
        ..RunOptions::with_seed(4)
    };
    let a = simulate_excursions(&params, &law, 100_000, &base.deterministic()).unwrap();
    let b = simulate_excursions(
        &params,
        &law,
        100_000,
        &RunOptions {
            workers: Some(3),
            ..base
        },
    )
    .unwrap();
    assert_eq!(a, b);
    assert_eq!(
        a.finalize::<f64>().unwrap(),
        b.finalize::<f64>().unwrap()
    );
}

#[test]
fn split_runs_merge_to_the_whole() {
    let params = ModelParams::unit(0.8f64).unwrap();
    let law = BlockTimeLaw::exponential();
    let whole = simulate_excursions(&params, &law, 30_000, &RunOptions::with_seed(1)).unwrap();
    let mut parts = simulate_excursions(&params, &law, 10_000, &RunOptions::with_seed(2)).unwrap();
    let other = simulate_excursions(&params, &law, 20_000, &RunOptions::with_seed(3)).unwrap();
    parts.merge(&other).unwrap();
    let mut reversed = other.clone();
    reversed
        .merge(&simulate_excursions(&params, &law, 10_000, &RunOptions::with_seed(2)).unwrap())
        .unwrap();
    assert_eq!(parts, reversed);
    assert_eq!(parts.count(), whole.count());
}

#[test]
fn poisson_overshoots_are_exponential() {
    let params = ModelParams::unit(1.0f64).unwrap();
    let rep = simulate_excursions(&params, &BlockTimeLaw::exponential(), 4_000_000, &RunOptions::with_seed(5))
        .unwrap()
        .finalize::<f64>()
        .unwrap();
    let m1 = std::f64::consts::FRAC_1_SQRT_2;
    for e in [rep.r1, rep.o1, rep.l1] {
        let e = e.unwrap();
        assert!(e.within(m1, 4.0), "{e}");
    }
    for e in [rep.r2, rep.o2, rep.l2] {
        let e = e.unwrap();
        assert!(e.within(1.0, 4.0), "{e}");
    }
    assert_eq!(rep.p_trade.value, 1.0 / rep.e_tau.value);
    assert_eq!(rep.arb_bar.value, rep.p_trade.value * rep.lvr_bar.value);
}

#[test]
fn constant_law_overshoots_reach_their_limits() {
    let params = ModelParams::unit(5.0f64).unwrap();
    let rep = simulate_excursions(&params, &BlockTimeLaw::constant(), 4_000_000, &RunOptions::with_seed(6))
        .unwrap()
        .finalize::<f64>()
        .unwrap();
    for e in [rep.r1.unwrap(), rep.o1.unwrap()] {
        assert!(e.within(KAPPA, 4.0), "{e}");
    }
    for e in [rep.r2.unwrap(), rep.o2.unwrap()] {
        assert!(e.within(OMEGA, 4.0), "{e}");
    }
}

#[test]
fn wald_residuals_vanish_including_the_degenerate_strip() {
    for rho in [1e-9, 2.0] {
        let params = ModelParams::unit(rho).unwrap();
        for law in [BlockTimeLaw::constant(), BlockTimeLaw::exponential()] {
            let acc = simulate_excursions(&params, &law, 1_000_000, &RunOptions::with_seed(7)).unwrap();
            let w = acc.wald_diagnostics::<f64>().unwrap();
            assert!(w.residual_1.within(0.0, 4.0), "{law} rho {rho}: {}", w.residual_1);
            assert!(w.residual_2.within(0.0, 4.0), "{law} rho {rho}: {}", w.residual_2);
        }
    }
}

#[test]
fn plug_in_identities_and_decomposition() {
    let law = BlockTimeLaw::uniform(0.0, 2.0).unwrap();
    let params = ModelParams::normalized(1.5f64, 0.3, 2.0).unwrap();
    let opts = RunOptions::with_seed(8);
    let mut acc = simulate_excursions(&params, &law, 1_000_000, &opts).unwrap();
    simulate_ladder(&mut acc, &law, 1_000_000, &opts).unwrap();
    for c in acc.identity_checks().unwrap() {
        assert!(c.holds(4.0), "{}: {} vs {} (se {})", c.name, c.lhs, c.rhs, c.se);
    }
    let chain = simulate_chain(&params, &law, 5_000_000, &opts).unwrap();
    let d = acc.decomposition_check(&chain).unwrap();
    assert!(d.holds(4.0), "{} vs {} (se {})", d.lhs, d.rhs, d.se);
}

#[test]
fn moment_bounds_hold_for_every_law() {
    let bound1 = (2.0 / std::f64::consts::PI).sqrt();
    for law in [
        BlockTimeLaw::constant(),
        BlockTimeLaw::exponential(),
        BlockTimeLaw::uniform(0.0, 2.0).unwrap(),
    ] {
        let rep = simulate_excursions(&ModelParams::unit(1.0f64).unwrap(), &law, 500_000, &RunOptions::with_seed(9))
            .unwrap()
            .finalize::<f64>()
            .unwrap();
        for e in [rep.r1.unwrap(), rep.o1.unwrap()] {
            assert!(e.value <= bound1 + 4.0 * e.se, "{law}: {e}");
        }
        for e in [rep.r2.unwrap(), rep.o2.unwrap()] {
            assert!(e.value <= law.u2() + 4.0 * e.se, "{law}: {e}");
        }
    }
}
