use lvr_core::analytic::{
    c_mu, constant_closed_form, general_asymptotic, kappa, omega, poisson_closed_form,
    zeta_half, OvershootMoments,
};
use lvr_core::{expected_tau_from_moments, lvr_from_moments, BlockTimeLaw, ModelParams, RunOptions};
use proptest::prelude::*;

#[test]
fn omega_is_quarter_plus_kappa_squared() {
    let k = kappa::<f64>();
    assert_eq!(omega::<f64>(), 0.25 + k * k);
    assert_eq!(kappa::<f64>(), zeta_half::<f64>() / (2.0 * std::f64::consts::PI).sqrt());
}

#[test]
fn abstract_denominator() {
    // σ_b²/(2 + 1.7164·rho_b)
    let slope = (2.0 * std::f64::consts::PI).sqrt() / zeta_half::<f64>();
    assert!((slope - 1.7164).abs() < 1e-4);
    let r = constant_closed_form(&ModelParams::unit(3.0f64).unwrap());
    assert!((r.arb_bar - 1.0 / (2.0 + slope * 3.0)).abs() < 1e-15);
}

#[test]
fn exponential_c_mu_makes_the_general_form_exact() {
    let c = 1.0 - zeta_half::<f64>() / std::f64::consts::PI.sqrt();
    assert!((c - 0.176083).abs() < 5e-7);
    let p = ModelParams::normalized(40.0f64, 0.7, 2.0).unwrap();
    let g = general_asymptotic(&p, &BlockTimeLaw::exponential(), c).unwrap();
    assert!((g.lvr_bar - 2.0 * 0.49 / 2.0).abs() < 1e-14);
}

#[test]
fn c_mu_series_for_the_exponential_law() {
    let est = c_mu(&BlockTimeLaw::<f64>::exponential(), 10_000, 0, &RunOptions::default()).unwrap();
    // independent evaluation: Γ ratios through ln Γ
    let lg = |x: f64| ln_gamma_stirling(x);
    let direct: f64 = (1..=10_000)
        .map(|n| {
            let nf = n as f64;
            let ratio = (lg(nf + 0.5) - lg(nf)).exp() / nf.sqrt();
            (1.0 - ratio) / (2.0 * std::f64::consts::PI.sqrt() * nf.sqrt())
        })
        .sum();
    assert!((est.value - direct).abs() < 1e-9, "{} vs {direct}", est.value);
    assert!(est.terms.iter().all(|t| *t >= 0.0));
}

/// Stirling series for ln Γ, shifted up for small arguments.
fn ln_gamma_stirling(mut x: f64) -> f64 {
    let mut shift = 0.0;
    while x < 10.0 {
        shift -= x.ln();
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    shift + (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)))
}

proptest! {
    #[test]
    fn closed_forms_factor_exactly(rho in 0.0f64..50.0, sb in 0.01f64..3.0, ell in 0.1f64..10.0) {
        let p = ModelParams::normalized(rho, sb, ell).unwrap();
        let c = constant_closed_form(&p);
        prop_assert_eq!(c.arb_bar, c.p_trade * c.lvr_bar);
        let q = poisson_closed_form(&p);
        prop_assert_eq!(q.arb_bar, q.p_trade * q.lvr_bar);
    }

    #[test]
    fn arb_and_p_trade_decrease_in_rho(rho in 0.3f64..50.0, step in 0.01f64..5.0) {
        let a = ModelParams::unit(rho).unwrap();
        let b = ModelParams::unit(rho + step).unwrap();
        for (x, y) in [
            (poisson_closed_form(&a), poisson_closed_form(&b)),
            (constant_closed_form(&a), constant_closed_form(&b)),
        ] {
            prop_assert!(y.arb_bar < x.arb_bar);
            prop_assert!(y.p_trade < x.p_trade);
        }
    }

    #[test]
    fn dirac_is_optimal(rho in 10.0f64..100.0, c in 1e-6f64..1.0) {
        let p = ModelParams::unit(rho).unwrap();
        let dirac = general_asymptotic(&p, &BlockTimeLaw::constant(), 0.0).unwrap();
        let other = general_asymptotic(&p, &BlockTimeLaw::exponential(), c).unwrap();
        prop_assert!(other.lvr_bar > dirac.lvr_bar);
        prop_assert!(other.arb_bar > dirac.arb_bar);
    }

    #[test]
    fn moment_identities_reduce(rho in 0.0f64..20.0, h1 in 0.1f64..2.0, h2 in 0.1f64..2.0, r2 in 0.1f64..2.0) {
        let m = OvershootMoments { h1, h2, r1: 0.0, r2, o1: 0.0, o2: r2 };
        if rho > 0.0 {
            let t = expected_tau_from_moments(&m, rho).unwrap();
            prop_assert!((t - (h2 + h1 * rho)).abs() <= 1e-12 * (1.0 + t));
            let l = lvr_from_moments(&m, rho, 1.5, 0.5).unwrap();
            prop_assert!((l - 1.5 * 0.25 * h2 / 2.0).abs() <= 1e-14);
        }
    }
}

#[test]
fn general_and_constant_forms_meet_far_out() {
    let mut prev = f64::INFINITY;
    for rho in [10.0f64, 30.0, 100.0, 300.0] {
        let p = ModelParams::unit(rho).unwrap();
        let g = general_asymptotic(&p, &BlockTimeLaw::constant(), 0.0).unwrap();
        let gap = (g.arb_bar / constant_closed_form(&p).arb_bar - 1.0).abs();
        assert!(gap < prev);
        prev = gap;
    }
    assert!(prev < 0.01);
}
