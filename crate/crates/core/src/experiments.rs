//! Reproduction pipelines: theory-versus-simulation deviation tables, the
//! constant-versus-Poisson comparison, the overshoot convergence study and
//! the cross-law sweep.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::analytic::{
    constant_closed_form, kappa, omega, poisson_closed_form, TheoryReport,
};
use crate::error::{LvrError, Result};
use crate::estimators::{simulate_excursions, EstimateReport, RunOptions};
use crate::law::{BlockTimeLaw, LawKind};
use crate::params::ModelParams;
use crate::stats::Estimate;

pub const TABLE2_GRID: [f64; 9] = [0.5, 0.7, 0.8, 0.9, 1.0, 2.0, 3.0, 4.0, 5.0];
pub const FIGURE1_GRID: [f64; 11] = [0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0];
pub const DEFAULT_PATHS: u64 = 10_000_000;
pub const MIN_PATHS: u64 = 1_000;

pub const CSV_HEADER: &str = "rho_b,n_paths,p_trade_mc,p_trade_se,p_trade_theory,delta_p_trade_pct,\
lvr_mc,lvr_se,lvr_theory,delta_lvr_pct,arb_mc,arb_se,arb_theory,delta_arb_pct";

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub laws: Vec<BlockTimeLaw<f64>>,
    pub rho_grid: Vec<f64>,
    pub paths: u64,
    pub ell: f64,
    pub sigma_b: f64,
    pub seed: u64,
    pub workers: Option<usize>,
    pub tolerance_multiplier: f64,
    pub output: Option<PathBuf>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            laws: vec![BlockTimeLaw::constant()],
            rho_grid: TABLE2_GRID.to_vec(),
            paths: DEFAULT_PATHS,
            ell: 1.0,
            sigma_b: 1.0,
            seed: 0,
            workers: None,
            tolerance_multiplier: 1.0,
            output: None,
        }
    }
}

impl SweepConfig {
    pub fn table2() -> Self {
        Self::default()
    }

    pub fn figure1() -> Self {
        SweepConfig {
            rho_grid: FIGURE1_GRID.to_vec(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rho_grid.is_empty() {
            return Err(LvrError::InvalidConfig("rho_b grid is empty".into()));
        }
        if let Some(bad) = self.rho_grid.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
            return Err(LvrError::param("rho_b", *bad, "grid values must be finite and >= 0"));
        }
        if self.rho_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(LvrError::InvalidConfig(
                "rho_b grid must be strictly increasing".into(),
            ));
        }
        if self.paths < MIN_PATHS {
            return Err(LvrError::param(
                "paths",
                self.paths as f64,
                "at least 1000 paths per grid point",
            ));
        }
        if self.laws.is_empty() {
            return Err(LvrError::InvalidConfig("no block-time law given".into()));
        }
        if self.tolerance_multiplier.is_nan() || self.tolerance_multiplier <= 0.0 {
            return Err(LvrError::param(
                "tolerance_multiplier",
                self.tolerance_multiplier,
                "must be > 0",
            ));
        }
        ModelParams::normalized(1.0, self.sigma_b, self.ell)?;
        Ok(())
    }

    fn params(&self, rho: f64) -> Result<ModelParams<f64>> {
        ModelParams::normalized(rho, self.sigma_b, self.ell)
    }

    fn run_options(&self) -> RunOptions {
        let mut opts = RunOptions::with_seed(self.seed);
        opts.workers = self.workers;
        opts
    }
}

/// Relative deviation in percent, theory in the denominator.
pub fn deviation_pct(mc: f64, theory: f64) -> f64 {
    (mc - theory) / theory * 100.0
}

/// One grid point: simulation next to theory.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub law: LawKind,
    pub rho_b: f64,
    pub n_paths: u64,
    pub p_trade: Estimate<f64>,
    pub p_trade_theory: f64,
    pub lvr: Estimate<f64>,
    pub lvr_theory: f64,
    pub arb: Estimate<f64>,
    pub arb_theory: f64,
    pub wall_time_s: f64,
}

impl ResultRow {
    pub fn from_report(
        law: LawKind,
        rho_b: f64,
        report: &EstimateReport<f64>,
        theory: Option<&TheoryReport<f64>>,
        wall_time_s: f64,
    ) -> Self {
        let (p, l, a) = theory.map_or((f64::NAN, f64::NAN, f64::NAN), |t| {
            (t.p_trade, t.lvr_bar, t.arb_bar)
        });
        ResultRow {
            law,
            rho_b,
            n_paths: report.n_excursions,
            p_trade: report.p_trade,
            p_trade_theory: p,
            lvr: report.lvr_bar,
            lvr_theory: l,
            arb: report.arb_bar,
            arb_theory: a,
            wall_time_s,
        }
    }

    pub fn delta_p_trade_pct(&self) -> f64 {
        deviation_pct(self.p_trade.value, self.p_trade_theory)
    }

    pub fn delta_lvr_pct(&self) -> f64 {
        deviation_pct(self.lvr.value, self.lvr_theory)
    }

    pub fn delta_arb_pct(&self) -> f64 {
        deviation_pct(self.arb.value, self.arb_theory)
    }

    /// Deviation of the mean cycle length, `(E[τ]_mc − E[τ]_theory)/E[τ]_theory`.
    pub fn delta_expected_tau_pct(&self) -> f64 {
        (self.p_trade_theory / self.p_trade.value - 1.0) * 100.0
    }

    /// Standard error of a deviation column, in percentage points.
    pub fn delta_se_pct(est: &Estimate<f64>, theory: f64) -> f64 {
        est.se / theory.abs() * 100.0
    }

    pub fn csv_line(&self) -> String {
        let f = |x: f64| format!("{x:.12e}");
        [
            f(self.rho_b),
            self.n_paths.to_string(),
            f(self.p_trade.value),
            f(self.p_trade.se),
            f(self.p_trade_theory),
            f(self.delta_p_trade_pct()),
            f(self.lvr.value),
            f(self.lvr.se),
            f(self.lvr_theory),
            f(self.delta_lvr_pct()),
            f(self.arb.value),
            f(self.arb.se),
            f(self.arb_theory),
            f(self.delta_arb_pct()),
        ]
        .join(",")
    }
}

pub fn rows_to_csv(rows: &[ResultRow]) -> String {
    let mut out = String::with_capacity(256 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    out
}

/// Writes through a temporary file in the same directory and renames it.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| LvrError::Io(e.error))?;
    Ok(())
}

pub fn write_rows_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
    write_atomic(path, rows_to_csv(rows).as_bytes())
}

/// Closed form for the laws that have one.
pub fn theory_for(law: &BlockTimeLaw<f64>, params: &ModelParams<f64>) -> Option<TheoryReport<f64>> {
    match law.kind() {
        LawKind::Constant => Some(constant_closed_form(params)),
        LawKind::Exponential => Some(poisson_closed_form(params)),
        _ => None,
    }
}

fn simulate_point(
    config: &SweepConfig,
    law: &BlockTimeLaw<f64>,
    rho: f64,
    theory: impl Fn(&ModelParams<f64>) -> Option<TheoryReport<f64>>,
) -> Result<ResultRow> {
    let params = config.params(rho)?;
    let mut opts = config.run_options();
    opts.walk = opts.walk.without_leftover();
    let start = Instant::now();
    let acc = simulate_excursions(&params, law, config.paths, &opts)?;
    let report = acc.finalize::<f64>()?;
    let t = theory(&params);
    Ok(ResultRow::from_report(
        law.kind(),
        rho,
        &report,
        t.as_ref(),
        start.elapsed().as_secs_f64(),
    ))
}

fn maybe_write(config: &SweepConfig, rows: &[ResultRow]) -> Result<()> {
    match &config.output {
        Some(path) => write_rows_csv(path, rows),
        None => Ok(()),
    }
}

/// Constant law against its closed form, one row per grid point.
pub fn table2_reproduction(config: &SweepConfig) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let law = BlockTimeLaw::constant();
    let rows = config
        .rho_grid
        .iter()
        .map(|&rho| simulate_point(config, &law, rho, |p| Some(constant_closed_form(p))))
        .collect::<Result<Vec<_>>>()?;
    maybe_write(config, &rows)?;
    Ok(rows)
}

/// Constant-law simulation against the Poisson closed form; the ARB deviation
/// column is the constant-block improvement.
pub fn figure1_reproduction(config: &SweepConfig) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let law = BlockTimeLaw::constant();
    let rows = config
        .rho_grid
        .iter()
        .map(|&rho| simulate_point(config, &law, rho, |p| Some(poisson_closed_form(p))))
        .collect::<Result<Vec<_>>>()?;
    maybe_write(config, &rows)?;
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq)]
pub struct OvershootRow {
    pub rho_b: f64,
    pub r1: Estimate<f64>,
    pub o1: Estimate<f64>,
    pub r2: Estimate<f64>,
    pub o2: Estimate<f64>,
}

impl OvershootRow {
    /// `|r̂1 − κ|, |ô1 − κ|, |r̂2 − ω|, |ô2 − ω|`.
    pub fn deviations(&self) -> [f64; 4] {
        let (k, w) = (kappa::<f64>(), omega::<f64>());
        [
            (self.r1.value - k).abs(),
            (self.o1.value - k).abs(),
            (self.r2.value - w).abs(),
            (self.o2.value - w).abs(),
        ]
    }

    pub fn ses(&self) -> [f64; 4] {
        [self.r1.se, self.o1.se, self.r2.se, self.o2.se]
    }
}

/// Least-squares fit `ln|dev| ≈ intercept + slope·rho_b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OvershootStudy {
    pub rows: Vec<OvershootRow>,
    /// One fit per moment, in the order of [`OvershootRow::deviations`].
    pub fits: [Option<DecayFit>; 4],
    /// Each deviation is no larger than its predecessor's plus 4 combined SE.
    pub monotone: bool,
}

fn log_linear_fit(xs: &[f64], devs: &[f64]) -> Option<DecayFit> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(devs)
        .filter(|(_, d)| **d > 0.0)
        .map(|(x, d)| (*x, d.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some(DecayFit {
        slope,
        intercept: my - slope * mx,
        points: pts.len(),
    })
}

/// Right and leftover overshoot moments of the constant-law walk along the
/// grid, with their approach to `κ` and `ω`.
pub fn overshoot_convergence_study(config: &SweepConfig) -> Result<OvershootStudy> {
    config.validate()?;
    let law = BlockTimeLaw::constant();
    let opts = config.run_options();
    let mut rows = Vec::with_capacity(config.rho_grid.len());
    for &rho in &config.rho_grid {
        let acc = simulate_excursions(&config.params(rho)?, &law, config.paths, &opts)?;
        let rep = acc.finalize::<f64>()?;
        let need = |e: Option<Estimate<f64>>| {
            e.ok_or(LvrError::InsufficientSamples {
                count: rep.right_exits,
                needed: 2,
            })
        };
        rows.push(OvershootRow {
            rho_b: rho,
            r1: need(rep.r1)?,
            o1: need(rep.o1)?,
            r2: need(rep.r2)?,
            o2: need(rep.o2)?,
        });
    }
    let mut monotone = true;
    for w in rows.windows(2) {
        let (a, b) = (w[0].deviations(), w[1].deviations());
        let (sa, sb) = (w[0].ses(), w[1].ses());
        for i in 0..4 {
            if b[i] > a[i] + 4.0 * (sa[i].powi(2) + sb[i].powi(2)).sqrt() {
                monotone = false;
            }
        }
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.rho_b).collect();
    let fits = std::array::from_fn(|i| {
        let devs: Vec<f64> = rows.iter().map(|r| r.deviations()[i]).collect();
        log_linear_fit(&xs, &devs)
    });
    Ok(OvershootStudy {
        rows,
        fits,
        monotone,
    })
}

impl OvershootStudy {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rho_b,r1,r1_se,o1,o1_se,r2,r2_se,o2,o2_se,dev_r1,dev_o1,dev_r2,dev_o2\n");
        for r in &self.rows {
            let d = r.deviations();
            let _ = writeln!(
                out,
                "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
                r.rho_b, r.r1.value, r.r1.se, r.o1.value, r.o1.se, r.r2.value, r.r2.se,
                r.o2.value, r.o2.se, d[0], d[1], d[2], d[3]
            );
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub rho_b: f64,
    /// Sorted by simulated `lvr_bar`, smallest first.
    pub rows: Vec<ResultRow>,
    /// With two or more laws including the constant one: whether it has the
    /// smallest simulated `lvr_bar` within 4 combined SE.
    pub constant_is_minimal: Option<bool>,
}

/// All sweep reports under one header.
pub fn sweep_csv(reports: &[SweepReport]) -> String {
    let mut out = format!("law,{CSV_HEADER}\n");
    for rep in reports {
        for r in &rep.rows {
            let _ = writeln!(out, "{},{}", r.law, r.csv_line());
        }
    }
    out
}

/// Simulates every law at each grid point; one report per grid point.
pub fn distribution_sweep(config: &SweepConfig) -> Result<Vec<SweepReport>> {
    config.validate()?;
    let mut reports = Vec::with_capacity(config.rho_grid.len());
    for &rho in &config.rho_grid {
        let mut rows = config
            .laws
            .iter()
            .map(|law| simulate_point(config, law, rho, |p| theory_for(law, p)))
            .collect::<Result<Vec<_>>>()?;
        rows.sort_by(|a, b| a.lvr.value.total_cmp(&b.lvr.value));
        let constant_is_minimal = if rows.len() < 2 {
            None
        } else {
            rows.iter().find(|r| r.law == LawKind::Constant).map(|c| {
                rows.iter()
                    .filter(|r| r.law != LawKind::Constant)
                    .all(|r| c.lvr.value <= r.lvr.value + 4.0 * c.lvr.combined_se(&r.lvr))
            })
        };
        reports.push(SweepReport {
            rho_b: rho,
            rows,
            constant_is_minimal,
        });
    }
    if let Some(path) = &config.output {
        write_atomic(path, sweep_csv(&reports).as_bytes())?;
    }
    Ok(reports)
}
