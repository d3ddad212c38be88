use std::path::Path;
use std::time::Instant;

use lvr_core::analytic::{
    c_mu, compare_c_mu, constant_closed_form, gaussian_ladder_h2, general_asymptotic,
    poisson_closed_form, CMuMethod,
};
use lvr_core::experiments::{
    distribution_sweep, figure1_reproduction, overshoot_convergence_study, rows_to_csv,
    sweep_csv, table2_reproduction, theory_for, ResultRow, SweepConfig,
};
use lvr_core::{ladder_moments, simulate_excursions, simulate_ladder, BlockTimeLaw, Estimate, LawKind, TheoryReport};
use serde_json::{json, Value};

use crate::args::{Command, Dist, Format, RegimeArg};
use crate::error::CliError;
use crate::manifest::{write_output, OutputDigest};
use crate::settings::Settings;

type Outputs = Result<Vec<OutputDigest>, CliError>;

pub fn dispatch(command: &Command, s: &Settings) -> Outputs {
    match command {
        Command::Theory { .. } => theory(s),
        Command::Simulate { .. } => simulate(s),
        Command::Table2 { .. } => table2(s),
        Command::Figure1 { .. } => figure1(s),
        Command::Ladder { .. } => ladder(s),
        Command::Cmu { .. } => cmu(s),
        Command::Overshoot { .. } => overshoot(s),
        Command::Sweep { .. } => sweep(s),
    }
}

fn emit(s: &Settings, csv: String, json: Value) -> Outputs {
    let Some(path) = &s.out else {
        return Ok(Vec::new());
    };
    let bytes = match s.format {
        Format::Csv => csv.into_bytes(),
        Format::Json => {
            let mut t = serde_json::to_string_pretty(&json).expect("json value");
            t.push('\n');
            t.into_bytes()
        }
    };
    Ok(vec![write_output(path, &bytes)?])
}

fn est_json(e: &Estimate<f64>) -> Value {
    json!({ "value": e.value, "se": e.se })
}

fn row_json(r: &ResultRow) -> Value {
    json!({
        "law": r.law.to_string(),
        "rho_b": r.rho_b,
        "n_paths": r.n_paths,
        "p_trade_mc": r.p_trade.value,
        "p_trade_se": r.p_trade.se,
        "p_trade_theory": r.p_trade_theory,
        "delta_p_trade_pct": r.delta_p_trade_pct(),
        "lvr_mc": r.lvr.value,
        "lvr_se": r.lvr.se,
        "lvr_theory": r.lvr_theory,
        "delta_lvr_pct": r.delta_lvr_pct(),
        "arb_mc": r.arb.value,
        "arb_se": r.arb.se,
        "arb_theory": r.arb_theory,
        "delta_arb_pct": r.delta_arb_pct(),
    })
}

fn tolerance(s: &Settings) -> f64 {
    4.0 * s.tolerance_multiplier
}

fn need_paths(s: &Settings, what: &str) -> Result<(), CliError> {
    if s.paths < 2 {
        Err(CliError::usage(format!(
            "--paths must be at least 2 for {what}, got {}",
            s.paths
        )))
    } else {
        Ok(())
    }
}

fn sweep_config(s: &Settings, laws: Vec<BlockTimeLaw<f64>>) -> SweepConfig {
    SweepConfig {
        laws,
        rho_grid: s.grid.clone(),
        paths: s.paths,
        ell: s.ell,
        sigma_b: s.sigma_b,
        seed: s.seed,
        workers: s.effective_workers(),
        tolerance_multiplier: s.tolerance_multiplier,
        output: None,
    }
}

/// `C_μ` implied by the ladder moments: `h2 − |ζ(1/2)|/√π`.
fn default_c_mu(law: &BlockTimeLaw<f64>, s: &Settings) -> Result<f64, CliError> {
    if law.is_dirac() {
        return Ok(0.0);
    }
    if law.kind() == LawKind::Exponential {
        return Ok(1.0 - gaussian_ladder_h2::<f64>());
    }
    need_paths(s, "estimating C_mu from ladder moments")?;
    let m = ladder_moments(law, s.paths, &s.run_options())?;
    let c = m.h2.value - gaussian_ladder_h2::<f64>();
    eprintln!(
        "note: C_mu = {c:.6} ± {:.6} from {} ladder samples",
        m.h2.se, s.paths
    );
    Ok(c.max(0.0))
}

fn theory_json(law: &BlockTimeLaw<f64>, rho: f64, r: &TheoryReport<f64>) -> Value {
    json!({
        "law": law.to_string(),
        "rho_b": rho,
        "regime": r.regime.to_string(),
        "p_trade": r.p_trade,
        "lvr_bar": r.lvr_bar,
        "arb_bar": r.arb_bar,
        "constants": {
            "h1": r.constants.h1,
            "h2": r.constants.h2,
            "kappa": r.constants.kappa,
            "omega": r.constants.omega,
            "c_mu": r.constants.c_mu,
        },
        "error_order": r.error_order.to_string(),
        "warnings": r.warnings.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
    })
}

fn theory(s: &Settings) -> Outputs {
    let params = s.params()?;
    let law = s.law()?;
    let regime = match s.regime {
        RegimeArg::Auto => match s.dist {
            Dist::Constant => RegimeArg::Constant,
            Dist::Poisson => RegimeArg::Poisson,
            _ => RegimeArg::General,
        },
        r => r,
    };
    let report = match regime {
        RegimeArg::Poisson => poisson_closed_form(&params),
        RegimeArg::Constant => constant_closed_form(&params),
        _ => {
            let c = match s.c_mu {
                Some(c) => c,
                None => default_c_mu(&law, s)?,
            };
            general_asymptotic(&params, &law, c)?
        }
    };
    let j = theory_json(&law, params.rho_b(), &report);
    if s.format == Format::Json && s.out.is_none() {
        println!("{}", serde_json::to_string_pretty(&j).expect("json value"));
    } else {
        println!("law          {law}");
        println!("rho_b        {}", params.rho_b());
        println!("regime       {}", report.regime);
        println!("p_trade      {:.12}", report.p_trade);
        println!("lvr_bar      {:.12}", report.lvr_bar);
        println!("arb_bar      {:.12}", report.arb_bar);
        let k = &report.constants;
        print!("constants    h1 = {:.9}, h2 = {:.9}", k.h1, k.h2);
        if let (Some(kap), Some(om)) = (k.kappa, k.omega) {
            print!(", kappa = {kap:.9}, omega = {om:.9}");
        }
        if let Some(c) = k.c_mu {
            print!(", c_mu = {c:.9}");
        }
        println!();
        println!("error order  {}", report.error_order);
        for w in &report.warnings {
            println!("warning: {w}");
        }
    }
    let csv = format!(
        "law,rho_b,regime,p_trade,lvr_bar,arb_bar\n{},{:.12e},{},{:.12e},{:.12e},{:.12e}\n",
        law.kind(),
        params.rho_b(),
        report.regime,
        report.p_trade,
        report.lvr_bar,
        report.arb_bar
    );
    emit(s, csv, j)
}

fn print_estimate(name: &str, e: &Estimate<f64>, theory: Option<f64>, k: f64) {
    match theory.filter(|t| t.is_finite()) {
        Some(t) => println!(
            "{name:<10} {:.9} ± {:.3e}   theory {:.9}   dev {:+.4}%   {}",
            e.value,
            e.se,
            t,
            (e.value - t) / t * 100.0,
            if e.within(t, k) { "ok" } else { "OUTSIDE" }
        ),
        None => println!("{name:<10} {:.9} ± {:.3e}", e.value, e.se),
    }
}

fn simulate(s: &Settings) -> Outputs {
    need_paths(s, "simulate")?;
    let params = s.params()?;
    let law = s.law()?;
    let start = Instant::now();
    let mut acc = simulate_excursions(&params, &law, s.paths, &s.run_options())?;
    let rep = acc.finalize::<f64>()?;
    let theory = theory_for(&law, &params);
    let row = ResultRow::from_report(
        law.kind(),
        params.rho_b(),
        &rep,
        theory.as_ref(),
        start.elapsed().as_secs_f64(),
    );
    let k = tolerance(s);
    println!(
        "law {law}, rho_b {}, {} excursions ({} right exits), {:.1}s",
        params.rho_b(),
        rep.n_excursions,
        rep.right_exits,
        row.wall_time_s
    );
    print_estimate("p_trade", &rep.p_trade, theory.as_ref().map(|t| t.p_trade), k);
    print_estimate("lvr_bar", &rep.lvr_bar, theory.as_ref().map(|t| t.lvr_bar), k);
    print_estimate("arb_bar", &rep.arb_bar, theory.as_ref().map(|t| t.arb_bar), k);
    print_estimate("E[tau]", &rep.e_tau, None, k);
    print_estimate("p", &rep.p, None, k);
    for (name, e) in [
        ("l1", rep.l1),
        ("l2", rep.l2),
        ("r1", rep.r1),
        ("r2", rep.r2),
        ("o1", rep.o1),
        ("o2", rep.o2),
        ("h1", rep.h1),
        ("h2", rep.h2),
    ] {
        if let Some(e) = e {
            print_estimate(name, &e, None, k);
        }
    }
    print_estimate("E[S]", &rep.wald_residual_1, None, k);
    print_estimate("E[S²-τ]", &rep.wald_residual_2, None, k);
    if acc.has_leftover() && acc.right_count() >= 2 {
        simulate_ladder(&mut acc, &law, (s.paths / 4).max(2), &s.run_options())?;
        for c in acc.identity_checks()? {
            println!(
                "identity {:<12} lhs {:.9} rhs {:.9} z {:+.2} {}",
                c.name,
                c.lhs,
                c.rhs,
                c.z(),
                if c.holds(k) { "ok" } else { "VIOLATED" }
            );
        }
    }
    emit(s, rows_to_csv(std::slice::from_ref(&row)), json!([row_json(&row)]))
}

fn print_rows(rows: &[ResultRow]) {
    println!(
        "{:>6} {:>10} {:>11} {:>11} {:>11} {:>9}",
        "rho_b", "paths", "dP_trade%", "dLVR%", "dARB%", "se(ARB)%"
    );
    for r in rows {
        println!(
            "{:>6} {:>10} {:>11.4} {:>11.4} {:>11.4} {:>9.4}",
            r.rho_b,
            r.n_paths,
            r.delta_p_trade_pct(),
            r.delta_lvr_pct(),
            r.delta_arb_pct(),
            ResultRow::delta_se_pct(&r.arb, r.arb_theory)
        );
    }
}

fn rows_out(s: &Settings, rows: &[ResultRow]) -> Outputs {
    emit(
        s,
        rows_to_csv(rows),
        Value::Array(rows.iter().map(row_json).collect()),
    )
}

fn table2(s: &Settings) -> Outputs {
    let rows = table2_reproduction(&sweep_config(s, vec![BlockTimeLaw::constant()]))?;
    print_rows(&rows);
    rows_out(s, &rows)
}

fn figure1(s: &Settings) -> Outputs {
    let rows = figure1_reproduction(&sweep_config(s, vec![BlockTimeLaw::constant()]))?;
    println!("{:>6} {:>13} {:>13} {:>10} {:>8}", "rho_b", "arb_constant", "arb_poisson", "diff%", "se%");
    for r in &rows {
        println!(
            "{:>6} {:>13.9} {:>13.9} {:>10.4} {:>8.4}",
            r.rho_b,
            r.arb.value,
            r.arb_theory,
            r.delta_arb_pct(),
            ResultRow::delta_se_pct(&r.arb, r.arb_theory)
        );
    }
    let mut outputs = rows_out(s, &rows)?;
    if let Some(path) = &s.chart {
        outputs.push(write_chart(path, &rows)?);
    }
    Ok(outputs)
}

#[cfg(feature = "chart")]
fn write_chart(path: &Path, rows: &[ResultRow]) -> Result<OutputDigest, CliError> {
    let svg = crate::chart::figure1_svg(rows)?;
    write_output(path, svg.as_bytes())
}

#[cfg(not(feature = "chart"))]
fn write_chart(_: &Path, _: &[ResultRow]) -> Result<OutputDigest, CliError> {
    Err(CliError::usage("built without the `chart` feature"))
}

fn ladder(s: &Settings) -> Outputs {
    need_paths(s, "ladder")?;
    let law = s.law()?;
    let m = ladder_moments(&law, s.paths, &s.run_options())?;
    let k = tolerance(s);
    println!("law {law}, {} ladder samples", m.n);
    print_estimate("h1", &m.h1, Some(std::f64::consts::FRAC_1_SQRT_2), k);
    let h2_target = match law.kind() {
        LawKind::Constant => Some(gaussian_ladder_h2::<f64>()),
        LawKind::Exponential => Some(1.0),
        _ => None,
    };
    print_estimate("h2", &m.h2, h2_target, k);
    if h2_target.is_none() {
        println!(
            "c_mu       {:.9} ± {:.3e}   (h2 - |zeta(1/2)|/sqrt(pi))",
            m.h2.value - gaussian_ladder_h2::<f64>(),
            m.h2.se
        );
    }
    let csv = format!(
        "law,n,h1,h1_se,h2,h2_se\n{},{},{:.12e},{:.12e},{:.12e},{:.12e}\n",
        law.kind(),
        m.n,
        m.h1.value,
        m.h1.se,
        m.h2.value,
        m.h2.se
    );
    let j = json!({
        "law": law.to_string(),
        "n": m.n,
        "h1": est_json(&m.h1),
        "h2": est_json(&m.h2),
    });
    emit(s, csv, j)
}

fn cmu(s: &Settings) -> Outputs {
    let law = s.law()?;
    let opts = s.run_options();
    let est = c_mu(&law, s.truncation, s.inner_budget, &opts)?;
    let method = match est.method {
        CMuMethod::Exact => "exact",
        CMuMethod::Analytic => "analytic",
        CMuMethod::MonteCarlo => "monte-carlo",
    };
    println!("law          {law}");
    println!("c_mu         {}", est.value);
    println!("error bound  {}", est.error_bound);
    println!(
        "terms        {} ({method}), tail bound {:.3e}, mc se {:.3e}",
        est.truncation, est.tail_bound, est.mc_se
    );
    if est.nonconvergent {
        println!("warning: series terms do not decay like n^(-3/2); the sum may not have converged");
    }
    let cmp = if law.is_dirac() || s.oracle_n < 2 {
        None
    } else {
        let m = ladder_moments(&law, s.oracle_n, &opts)?;
        Some(compare_c_mu(&est, &m.h2))
    };
    if let Some(c) = &cmp {
        println!(
            "ladder value {:.9} ± {:.3e}   (h2 - |zeta(1/2)|/sqrt(pi), {} samples)",
            c.oracle, c.oracle_se, s.oracle_n
        );
        println!(
            "discrepancy  {:+.9}   combined error {:.3e}",
            c.discrepancy, c.combined_error
        );
        if c.flagged {
            println!("FLAG: series and ladder values disagree beyond their combined error");
        }
    }
    let opt = |x: Option<f64>| x.map_or(String::new(), |v| format!("{v:.12e}"));
    let csv = format!(
        "law,method,truncation,value,error_bound,tail_bound,mc_se,nonconvergent,ladder_value,ladder_se,flagged\n\
         {},{method},{},{:.12e},{:.12e},{:.12e},{:.12e},{},{},{},{}\n",
        law.kind(),
        est.truncation,
        est.value,
        est.error_bound,
        est.tail_bound,
        est.mc_se,
        est.nonconvergent,
        opt(cmp.as_ref().map(|c| c.oracle)),
        opt(cmp.as_ref().map(|c| c.oracle_se)),
        cmp.as_ref().is_some_and(|c| c.flagged),
    );
    let j = json!({
        "law": law.to_string(),
        "method": method,
        "truncation": est.truncation,
        "value": est.value,
        "error_bound": est.error_bound,
        "tail_bound": est.tail_bound,
        "mc_se": est.mc_se,
        "nonconvergent": est.nonconvergent,
        "ladder_value": cmp.as_ref().map(|c| c.oracle),
        "ladder_se": cmp.as_ref().map(|c| c.oracle_se),
        "flagged": cmp.as_ref().is_some_and(|c| c.flagged),
    });
    emit(s, csv, j)
}

fn overshoot(s: &Settings) -> Outputs {
    let study = overshoot_convergence_study(&sweep_config(s, vec![BlockTimeLaw::constant()]))?;
    println!(
        "{:>6} {:>12} {:>12} {:>12} {:>12}",
        "rho_b", "|r1-kappa|", "|o1-kappa|", "|r2-omega|", "|o2-omega|"
    );
    for r in &study.rows {
        let d = r.deviations();
        println!(
            "{:>6} {:>12.3e} {:>12.3e} {:>12.3e} {:>12.3e}",
            r.rho_b, d[0], d[1], d[2], d[3]
        );
    }
    for (name, fit) in ["r1", "o1", "r2", "o2"].iter().zip(&study.fits) {
        if let Some(f) = fit {
            println!("decay fit {name}: ln|dev| = {:.3} {:+.3}·rho_b", f.intercept, f.slope);
        }
    }
    println!(
        "monotone shrinkage within noise: {}",
        if study.monotone { "yes" } else { "no" }
    );
    let j = Value::Array(
        study
            .rows
            .iter()
            .map(|r| {
                json!({
                    "rho_b": r.rho_b,
                    "r1": est_json(&r.r1),
                    "o1": est_json(&r.o1),
                    "r2": est_json(&r.r2),
                    "o2": est_json(&r.o2),
                })
            })
            .collect(),
    );
    emit(s, study.to_csv(), j)
}

fn sweep(s: &Settings) -> Outputs {
    let laws = s
        .laws
        .iter()
        .map(|d| s.law_for(*d))
        .collect::<Result<Vec<_>, _>>()?;
    let reports = distribution_sweep(&sweep_config(s, laws))?;
    for rep in &reports {
        println!("rho_b = {}", rep.rho_b);
        for r in &rep.rows {
            println!(
                "  {:<18} lvr_bar {:.9} ± {:.3e}   arb_bar {:.9} ± {:.3e}",
                r.law.to_string(),
                r.lvr.value,
                r.lvr.se,
                r.arb.value,
                r.arb.se
            );
        }
        match rep.constant_is_minimal {
            Some(true) => println!("  constant law has the smallest lvr_bar"),
            Some(false) => println!("  constant law does NOT have the smallest lvr_bar"),
            None => {}
        }
    }
    let j = Value::Array(
        reports
            .iter()
            .flat_map(|r| r.rows.iter().map(row_json))
            .collect(),
    );
    emit(s, sweep_csv(&reports), j)
}
