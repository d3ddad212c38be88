//! Acceptance criteria, one PASS/FAIL line each.
//!
//! `LVR_ACCEPTANCE_SCALE` multiplies every sample count (default 1).

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use lvr_core::analytic::{c_mu, compare_c_mu};
use lvr_core::experiments::{
    distribution_sweep, figure1_reproduction, table2_reproduction, SweepConfig,
};
use lvr_core::{
    ladder_moments, simulate_chain, simulate_excursions, simulate_ladder, BlockTimeLaw, LawKind,
    LadderMoments, ModelParams, Report, RunOptions,
};

const K: f64 = 4.0;
const ZETA_HALF: f64 = 1.460_354_508_809_586_8;

const TABLE2: [(f64, f64, f64, f64); 9] = [
    (0.5, 5.138, 5.657, 0.493),
    (0.7, 2.568, 2.823, 0.248),
    (0.8, 1.722, 1.882, 0.158),
    (0.9, 1.108, 1.179, 0.070),
    (1.0, 0.654, 0.668, 0.014),
    (2.0, -0.076, -0.093, -0.017),
    (3.0, 0.003, 0.011, 0.009),
    (4.0, 0.005, 0.005, 0.000),
    (5.0, 0.003, 0.008, 0.005),
];

const FIGURE1: [(f64, f64); 5] = [
    (0.5, -4.820),
    (1.0, -8.120),
    (2.0, -11.141),
    (5.0, -14.276),
    (10.0, -15.766),
];

struct Ctx {
    scale: f64,
    ladders: Vec<(LawKind, LadderMoments<f64>)>,
}

impl Ctx {
    fn n(&self, base: u64) -> u64 {
        ((base as f64 * self.scale).round() as u64).max(1_000)
    }
}

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn no_leftover(seed: u64) -> RunOptions {
    let mut o = RunOptions::with_seed(seed);
    o.walk = o.walk.without_leftover();
    o
}

fn finalize(params: &ModelParams<f64>, law: &BlockTimeLaw<f64>, n: u64, opts: &RunOptions) -> Report {
    simulate_excursions(params, law, n, opts)
        .and_then(|a| a.finalize())
        .expect("simulation")
}

fn poisson_exactness(ctx: &mut Ctx) -> Verdict {
    let n = ctx.n(10_000_000);
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for rho in [0.5, 1.0, 2.0, 5.0] {
        let r = finalize(&ModelParams::unit(rho).unwrap(), &BlockTimeLaw::exponential(), n, &no_leftover(101));
        let zt = r.e_tau.z(1.0 + rho / 2f64.sqrt()).abs();
        let zl = r.lvr_bar.z(0.5).abs();
        ok &= zt <= K && zl <= K;
        worst = worst.max(zt).max(zl);
    }
    verdict(ok, format!("{n} excursions per rho, worst |z| = {worst:.2}"))
}

fn table2(ctx: &mut Ctx) -> Verdict {
    let cfg = SweepConfig {
        paths: ctx.n(100_000_000),
        seed: 102,
        ..SweepConfig::table2()
    };
    let rows = table2_reproduction(&cfg).expect("table 2");
    let mut ok = true;
    let mut lines = Vec::new();
    for (row, (rho, p_paper, lvr_paper, arb_paper)) in rows.iter().zip(TABLE2) {
        assert_eq!(row.rho_b, rho);
        let d_arb = row.delta_arb_pct();
        let within = (d_arb - arb_paper).abs() <= 0.1;
        let signs = rho > 0.9
            || (row.delta_expected_tau_pct().signum() == p_paper.signum()
                && row.delta_lvr_pct().signum() == lvr_paper.signum());
        ok &= within && signs;
        lines.push(format!(
            "      rho {rho:>3}: dE[tau] {:+.3} ({p_paper:+.3})  dLVR {:+.3} ({lvr_paper:+.3})  dARB {:+.3} ({arb_paper:+.3}){}",
            row.delta_expected_tau_pct(),
            row.delta_lvr_pct(),
            d_arb,
            if within && signs { "" } else { "  <-" }
        ));
    }
    verdict(
        ok,
        format!("{} paths per row, |dARB - paper| <= 0.1 pp\n{}", cfg.paths, lines.join("\n")),
    )
}

fn figure1(ctx: &mut Ctx) -> Verdict {
    let cfg = SweepConfig {
        paths: ctx.n(10_000_000),
        rho_grid: FIGURE1.iter().map(|r| r.0).collect(),
        seed: 103,
        ..SweepConfig::figure1()
    };
    let rows = figure1_reproduction(&cfg).expect("figure 1");
    let mut ok = true;
    let mut parts = Vec::new();
    for (row, (_, paper)) in rows.iter().zip(FIGURE1) {
        let d = row.delta_arb_pct();
        ok &= (d - paper).abs() <= 0.3;
        parts.push(format!("{}: {d:.3} ({paper})", row.rho_b));
    }
    verdict(ok, format!("{} paths, {}", cfg.paths, parts.join(", ")))
}

fn ladder_runs(ctx: &mut Ctx) {
    if !ctx.ladders.is_empty() {
        return;
    }
    let n = ctx.n(10_000_000);
    for law in [
        BlockTimeLaw::constant(),
        BlockTimeLaw::exponential(),
        BlockTimeLaw::uniform(0.0, 2.0).unwrap(),
    ] {
        let m = ladder_moments(&law, n, &RunOptions::with_seed(104)).expect("ladder");
        ctx.ladders.push((law.kind(), m));
    }
}

fn ladder_h1(ctx: &mut Ctx) -> Verdict {
    ladder_runs(ctx);
    let ok = ctx.ladders.iter().all(|(_, m)| m.h1.within(FRAC_1_SQRT_2, K));
    let parts: Vec<String> = ctx
        .ladders
        .iter()
        .map(|(k, m)| format!("{k} {} (z {:+.2})", m.h1, m.h1.z(FRAC_1_SQRT_2)))
        .collect();
    verdict(ok, parts.join(", "))
}

fn ladder_h2(ctx: &mut Ctx) -> Verdict {
    ladder_runs(ctx);
    let target = ZETA_HALF / PI.sqrt();
    let c = &ctx.ladders[0].1;
    let e = &ctx.ladders[1].1;
    verdict(
        c.h2.within(target, K) && e.h2.within(1.0, K),
        format!(
            "constant {} vs {target:.6} (z {:+.2}), exponential {} vs 1 (z {:+.2})",
            c.h2,
            c.h2.z(target),
            e.h2,
            e.h2.z(1.0)
        ),
    )
}

fn overshoot_constants(ctx: &mut Ctx) -> Verdict {
    let kappa = ZETA_HALF / (2.0 * PI).sqrt();
    let omega = 0.25 + kappa * kappa;
    let n = ctx.n(10_000_000);
    let law = BlockTimeLaw::constant();
    let opts = RunOptions::with_seed(106);
    let far = finalize(&ModelParams::unit(8.0).unwrap(), &law, n, &opts);
    let near = finalize(&ModelParams::unit(1.0).unwrap(), &law, n, &opts);
    let pick = |r: &Report| [r.r1.unwrap(), r.o1.unwrap(), r.r2.unwrap(), r.o2.unwrap()];
    let targets = [kappa, kappa, omega, omega];
    let (f, c) = (pick(&far), pick(&near));
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, name) in ["r1", "o1", "r2", "o2"].iter().enumerate() {
        let z = f[i].z(targets[i]);
        let shrinks = (f[i].value - targets[i]).abs() < (c[i].value - targets[i]).abs();
        ok &= z.abs() <= K && shrinks;
        parts.push(format!(
            "{name} {:.5} (z {z:+.2}, |dev| {:.1e} < {:.1e})",
            f[i].value,
            (f[i].value - targets[i]).abs(),
            (c[i].value - targets[i]).abs()
        ));
    }
    verdict(ok, format!("rho 8 vs 1, {n} excursions: {}", parts.join(", ")))
}

struct SuiteRun {
    law: String,
    u2: f64,
    rho: f64,
    acc: lvr_core::MomentAccumulator,
    report: Report,
    chain: lvr_core::ChainAggregate,
}

fn suite_runs(ctx: &Ctx) -> Vec<SuiteRun> {
    let n = ctx.n(1_000_000);
    let laws = [
        BlockTimeLaw::constant(),
        BlockTimeLaw::exponential(),
        BlockTimeLaw::uniform(0.0, 2.0).unwrap(),
        BlockTimeLaw::empirical(vec![6.0, 9.0, 12.0, 12.0, 15.0, 30.0]).unwrap(),
    ];
    let mut out = Vec::new();
    for (i, law) in laws.iter().enumerate() {
        for (j, rho) in [0.5, 1.0, 2.0, 5.0].into_iter().enumerate() {
            let params = ModelParams::unit(rho).unwrap();
            let opts = RunOptions::with_seed(107 + (i * 4 + j) as u64);
            let mut acc = simulate_excursions(&params, law, n, &opts).expect("excursions");
            simulate_ladder(&mut acc, law, n, &opts).expect("ladder");
            let report = acc.finalize().expect("finalize");
            let chain = simulate_chain(&params, law, 10 * n, &opts).expect("chain");
            out.push(SuiteRun {
                law: law.to_string(),
                u2: law.u2(),
                rho,
                acc,
                report,
                chain,
            });
        }
    }
    out
}

fn wald(runs: &[SuiteRun]) -> Verdict {
    let mut worst: f64 = 0.0;
    let mut bad = Vec::new();
    for r in runs {
        let z1 = r.report.wald_residual_1.z(0.0).abs();
        let z2 = r.report.wald_residual_2.z(0.0).abs();
        worst = worst.max(z1).max(z2);
        if z1 > K || z2 > K {
            bad.push(format!("{} rho {}", r.law, r.rho));
        }
    }
    verdict(
        bad.is_empty(),
        format!("{} runs, worst |z| = {worst:.2} {}", runs.len(), bad.join("; ")),
    )
}

fn consistency(runs: &[SuiteRun]) -> Verdict {
    let mut worst: f64 = 0.0;
    let mut bad = Vec::new();
    let mut checks = 0;
    for r in runs {
        let mut all = r.acc.identity_checks().expect("identities");
        all.push(r.acc.decomposition_check(&r.chain).expect("decomposition"));
        for c in all {
            checks += 1;
            worst = worst.max(c.z().abs());
            if !c.holds(K) {
                bad.push(format!("{} rho {}: {} z {:+.2}", r.law, r.rho, c.name, c.z()));
            }
        }
    }
    verdict(
        bad.is_empty(),
        format!("{checks} checks, worst |z| = {worst:.2} {}", bad.join("; ")),
    )
}

fn moment_bounds(runs: &[SuiteRun]) -> Verdict {
    let b1 = (2.0 / PI).sqrt();
    let mut bad = Vec::new();
    for r in runs {
        let rep = &r.report;
        for (name, e, bound) in [
            ("r1", rep.r1, b1),
            ("o1", rep.o1, b1),
            ("r2", rep.r2, r.u2),
            ("o2", rep.o2, r.u2),
        ] {
            let e = e.expect("right exits");
            if e.value > bound + K * e.se {
                bad.push(format!("{} rho {} {name} {e} > {bound:.4}", r.law, r.rho));
            }
        }
    }
    verdict(bad.is_empty(), format!("{} runs {}", runs.len(), bad.join("; ")))
}

fn c_mu_contract(ctx: &mut Ctx) -> Verdict {
    ladder_runs(ctx);
    let opts = RunOptions::default();
    let dirac = c_mu(&BlockTimeLaw::<f64>::constant(), 10_000, 1_000, &opts).expect("c_mu");
    let expo = c_mu(&BlockTimeLaw::<f64>::exponential(), 10_000, 0, &opts).expect("c_mu");
    let cmp = compare_c_mu(&expo, &ctx.ladders[1].1.h2);
    let dirac_ok = dirac.value == 0.0 && dirac.error_bound == 0.0;
    let exp_ok = expo.value >= 0.0 && expo.terms.iter().all(|t| *t >= 0.0);
    let flag_ok = cmp.flagged == (cmp.discrepancy.abs() > cmp.combined_error);
    verdict(
        dirac_ok && exp_ok && flag_ok,
        format!(
            "constant 0 ± 0: {dirac_ok}; exponential series {:.6} ± {:.1e}, ladder {:.6} ± {:.1e}, \
             discrepancy {:+.4} {}",
            cmp.series,
            cmp.series_error,
            cmp.oracle,
            cmp.oracle_se,
            cmp.discrepancy,
            if cmp.flagged { "FLAGGED" } else { "consistent" }
        ),
    )
}

fn dirac_optimality(ctx: &mut Ctx) -> Verdict {
    let cfg = SweepConfig {
        laws: vec![
            BlockTimeLaw::constant(),
            BlockTimeLaw::exponential(),
            BlockTimeLaw::uniform(0.0, 2.0).unwrap(),
        ],
        rho_grid: vec![10.0],
        paths: ctx.n(10_000_000),
        seed: 111,
        ..SweepConfig::default()
    };
    let rep = distribution_sweep(&cfg).expect("sweep").remove(0);
    let get = |k: LawKind| rep.rows.iter().find(|r| r.law == k).expect("row");
    let (c, e) = (get(LawKind::Constant), get(LawKind::Exponential));
    let strict_min = rep.rows[0].law == LawKind::Constant;
    let sep = (e.lvr.value - c.lvr.value) / c.lvr.combined_se(&e.lvr);
    let parts: Vec<String> = rep
        .rows
        .iter()
        .map(|r| format!("{} {:.5}", r.law, r.lvr.value))
        .collect();
    verdict(
        strict_min && sep > K,
        format!("{} (constant vs exponential {sep:.1} SE)", parts.join(" < ")),
    )
}

fn run_cli(dir: &Path, args: &[&str]) -> (Vec<u8>, Vec<String>) {
    let status = Command::new(env!("CARGO_BIN_EXE_lvr"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("run lvr");
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let out = args
        .iter()
        .position(|a| *a == "--out")
        .map(|i| args[i + 1])
        .expect("--out");
    let csv = std::fs::read(dir.join(out)).expect("csv");
    let manifest: serde_json::Value = serde_json::from_slice(
        &std::fs::read(dir.join(format!("{out}.manifest.json"))).expect("manifest"),
    )
    .expect("manifest json");
    let digests = manifest["outputs"]
        .as_array()
        .expect("outputs")
        .iter()
        .map(|o| o["sha256"].as_str().unwrap().to_string())
        .collect();
    (csv, digests)
}

fn determinism(_: &mut Ctx) -> Verdict {
    let dir = tempfile::tempdir().expect("tempdir");
    let invocations: [&[&str]; 3] = [
        &["simulate", "--dist", "uniform", "--rho", "1.5", "--paths", "2e5", "--seed", "42", "--deterministic", "--out", "s.csv"],
        &["table2", "--paths", "2e4", "--seed", "7", "--deterministic", "--out", "t.csv"],
        &["ladder", "--dist", "poisson", "--n", "1e5", "--seed", "3", "--deterministic", "--out", "l.csv"],
    ];
    let mut ok = true;
    for args in invocations {
        let a = run_cli(dir.path(), args);
        let b = run_cli(dir.path(), args);
        ok &= a == b;
    }
    verdict(ok, "simulate, table2, ladder run twice: identical CSV bytes and manifest digests")
}

fn main() -> ExitCode {
    let scale = std::env::var("LVR_ACCEPTANCE_SCALE")
        .ok()
        .and_then(|s| s.parse::<f64>().ok())
        .filter(|s| *s > 0.0)
        .unwrap_or(1.0);
    let mut ctx = Ctx {
        scale,
        ladders: Vec::new(),
    };
    println!("acceptance (sample scale {scale})");
    let mut failed = Vec::new();
    let mut report = |id: u32, title: &str, t: Instant, v: Verdict| {
        println!(
            "criterion {id:>2} {} {title} [{:.0}s]: {}",
            if v.pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            v.detail
        );
        if !v.pass {
            failed.push(id);
        }
    };

    type Step = fn(&mut Ctx) -> Verdict;
    let first: [(u32, &str, Step); 6] = [
        (1, "Poisson exactness", poisson_exactness),
        (2, "Table 2 reproduction", table2),
        (3, "Figure 1 reproduction", figure1),
        (4, "ladder mean universality", ladder_h1),
        (5, "ladder second moment", ladder_h2),
        (6, "overshoot limits", overshoot_constants),
    ];
    for (id, title, f) in first {
        let t = Instant::now();
        report(id, title, t, f(&mut ctx));
    }

    let t = Instant::now();
    let runs = suite_runs(&ctx);
    report(7, "Wald identities", t, wald(&runs));
    let t = Instant::now();
    report(8, "plug-in identities and decomposition", t, consistency(&runs));
    let t = Instant::now();
    report(9, "overshoot moment bounds", t, moment_bounds(&runs));

    let rest: [(u32, &str, Step); 3] = [
        (10, "C_mu contract", c_mu_contract),
        (11, "Dirac optimality", dirac_optimality),
        (12, "determinism", determinism),
    ];
    for (id, title, f) in rest {
        let t = Instant::now();
        report(id, title, t, f(&mut ctx));
    }

    if failed.is_empty() {
        println!("acceptance: all 12 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {failed:?}");
        ExitCode::FAILURE
    }
}
