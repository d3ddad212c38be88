//! Closed-form and asymptotic formulas for the trade probability, the loss
//! per arbitrage and the loss per block.

use std::fmt;

use rayon::prelude::*;

use crate::error::{LvrError, Result};
use crate::estimators::RunOptions;
use crate::law::{BlockTimeLaw, LawKind};
use crate::params::ModelParams;
use crate::rng::RngStream;
use crate::scalar::Scalar;
use crate::stats::Estimate;

/// `|ζ(1/2)|` to double precision.
const ZETA_HALF_ABS: f64 = 1.460_354_508_809_586_8;

/// `|ζ(1/2)|`.
pub fn zeta_half<T: Scalar>() -> T {
    T::of(ZETA_HALF_ABS)
}

/// Limiting mean overshoot of the Gaussian walk, `|ζ(1/2)|/√(2π)`.
pub fn kappa<T: Scalar>() -> T {
    zeta_half::<T>() / (T::of(2.0) * T::PI()).sqrt()
}

/// Limiting second overshoot moment, `1/4 + κ²`.
pub fn omega<T: Scalar>() -> T {
    let k = kappa::<T>();
    T::of(0.25) + k * k
}

/// Ladder-height mean of any unit-variance symmetric walk, `1/√2`.
pub fn ladder_h1<T: Scalar>() -> T {
    T::FRAC_1_SQRT_2()
}

/// Ladder-height second moment of the Gaussian walk, `|ζ(1/2)|/√π`.
pub fn gaussian_ladder_h2<T: Scalar>() -> T {
    zeta_half::<T>() / T::PI().sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Regime {
    PoissonExact,
    ConstantAsymptotic,
    GeneralAsymptotic,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::PoissonExact => "poisson-exact",
            Regime::ConstantAsymptotic => "constant-asymptotic",
            Regime::GeneralAsymptotic => "general-asymptotic",
        })
    }
}

/// Order of the neglected remainder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ErrorOrder {
    Zero,
    ExpInRho,
    SigmaOverGamma,
}

impl fmt::Display for ErrorOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorOrder::Zero => "zero",
            ErrorOrder::ExpInRho => "exp(-c rho_b)",
            ErrorOrder::SigmaOverGamma => "O(sigma_b/gamma)",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TheoryWarning {
    /// `rho_b` is below the range where the approximation is reliable.
    BelowAsymptoticRange { rho_b: f64, threshold: f64 },
    /// The formula gave a trade probability above 1; it was capped.
    TradeProbabilityCapped { uncapped: f64 },
    /// A Dirac law was paired with a positive `C_μ`.
    DiracWithPositiveCMu { c_mu: f64 },
}

impl fmt::Display for TheoryWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TheoryWarning::BelowAsymptoticRange { rho_b, threshold } => write!(
                f,
                "rho_b = {rho_b} is below {threshold}; the asymptotic formula degrades here"
            ),
            TheoryWarning::TradeProbabilityCapped { uncapped } => {
                write!(f, "P_trade formula gave {uncapped}, capped at 1")
            }
            TheoryWarning::DiracWithPositiveCMu { c_mu } => {
                write!(f, "C_mu = {c_mu} supplied for a Dirac law, whose C_mu is 0")
            }
        }
    }
}

/// Constants entering a theory report.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TheoryConstants<T> {
    pub h1: T,
    pub h2: T,
    pub kappa: Option<T>,
    pub omega: Option<T>,
    pub c_mu: Option<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TheoryReport<T> {
    pub p_trade: T,
    pub lvr_bar: T,
    pub arb_bar: T,
    pub regime: Regime,
    pub constants: TheoryConstants<T>,
    pub error_order: ErrorOrder,
    pub warnings: Vec<TheoryWarning>,
}

fn lvr_scale<T: Scalar>(params: &ModelParams<T>) -> T {
    params.ell() * params.sigma_b() * params.sigma_b()
}

fn capped<T: Scalar>(p: T, warnings: &mut Vec<TheoryWarning>) -> T {
    if p > T::one() {
        warnings.push(TheoryWarning::TradeProbabilityCapped {
            uncapped: p.to_f64_lossless(),
        });
        T::one()
    } else {
        p
    }
}

/// Exact results for exponential block times (Poisson arrivals).
pub fn poisson_closed_form<T: Scalar>(params: &ModelParams<T>) -> TheoryReport<T> {
    let two = T::of(2.0);
    let p_trade = T::one() / (T::one() + params.rho_b() / T::SQRT_2());
    let lvr_bar = lvr_scale(params) / two;
    TheoryReport {
        p_trade,
        lvr_bar,
        arb_bar: p_trade * lvr_bar,
        regime: Regime::PoissonExact,
        constants: TheoryConstants {
            h1: ladder_h1(),
            h2: T::one(),
            kappa: None,
            omega: None,
            c_mu: None,
        },
        error_order: ErrorOrder::Zero,
        warnings: Vec::new(),
    }
}

/// Below this `rho_b` the constant-block closed form is visibly off.
pub const CONSTANT_FORM_MIN_RHO: f64 = 0.5;

/// Constant block times; exponentially accurate in `rho_b`.
pub fn constant_closed_form<T: Scalar>(params: &ModelParams<T>) -> TheoryReport<T> {
    let rho = params.rho_b();
    let mut warnings = Vec::new();
    if rho.to_f64_lossless() < CONSTANT_FORM_MIN_RHO {
        warnings.push(TheoryWarning::BelowAsymptoticRange {
            rho_b: rho.to_f64_lossless(),
            threshold: CONSTANT_FORM_MIN_RHO,
        });
    }
    let h2 = gaussian_ladder_h2::<T>();
    let p_trade = capped(T::one() / (rho / T::SQRT_2() + h2), &mut warnings);
    let lvr_bar = lvr_scale(params) * h2 / T::of(2.0);
    TheoryReport {
        p_trade,
        lvr_bar,
        arb_bar: p_trade * lvr_bar,
        regime: Regime::ConstantAsymptotic,
        constants: TheoryConstants {
            h1: ladder_h1(),
            h2,
            kappa: Some(kappa()),
            omega: Some(omega()),
            c_mu: Some(T::zero()),
        },
        error_order: ErrorOrder::ExpInRho,
        warnings,
    }
}

/// Below this `rho_b` the general first-order asymptotics are unreliable.
pub const GENERAL_FORM_MIN_RHO: f64 = 10.0;

/// First-order asymptotics for an arbitrary law with constant `C_μ`.
///
/// Uses `|ζ(1/2)|/√π` as the Dirac baseline, the value consistent with the
/// exact Poisson loss and with the constant-block closed form.
pub fn general_asymptotic<T: Scalar>(
    params: &ModelParams<T>,
    law: &BlockTimeLaw<T>,
    c_mu: T,
) -> Result<TheoryReport<T>> {
    if c_mu.is_nan() || c_mu < T::zero() {
        return Err(LvrError::NegativeCMu(c_mu.to_f64_lossless()));
    }
    let rho = params.rho_b();
    let mut warnings = Vec::new();
    if rho.to_f64_lossless() < GENERAL_FORM_MIN_RHO {
        warnings.push(TheoryWarning::BelowAsymptoticRange {
            rho_b: rho.to_f64_lossless(),
            threshold: GENERAL_FORM_MIN_RHO,
        });
    }
    if law.is_dirac() && c_mu > T::zero() {
        warnings.push(TheoryWarning::DiracWithPositiveCMu {
            c_mu: c_mu.to_f64_lossless(),
        });
    }
    let h2 = gaussian_ladder_h2::<T>() + c_mu;
    let p_trade = capped(T::SQRT_2() / rho, &mut warnings);
    let lvr_bar = lvr_scale(params) / T::of(2.0) * h2;
    let sb = params.sigma_b();
    let arb_bar = params.ell() * sb * sb * sb / (T::SQRT_2() * params.gamma()) * h2;
    Ok(TheoryReport {
        p_trade,
        lvr_bar,
        arb_bar: if arb_bar.is_finite() {
            arb_bar
        } else {
            p_trade * lvr_bar
        },
        regime: Regime::GeneralAsymptotic,
        constants: TheoryConstants {
            h1: ladder_h1(),
            h2,
            kappa: None,
            omega: None,
            c_mu: Some(c_mu),
        },
        error_order: ErrorOrder::SigmaOverGamma,
        warnings,
    })
}

/// Ladder and overshoot moments entering the strip identities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OvershootMoments<T> {
    pub h1: T,
    pub h2: T,
    pub r1: T,
    pub r2: T,
    pub o1: T,
    pub o2: T,
}

impl<T: Scalar> OvershootMoments<T> {
    /// Exponential block times: `H`, `R`, `O` are all `Exp(√2)`.
    pub fn poisson() -> Self {
        let m1 = T::FRAC_1_SQRT_2();
        OvershootMoments {
            h1: m1,
            h2: T::one(),
            r1: m1,
            r2: T::one(),
            o1: m1,
            o2: T::one(),
        }
    }

    /// Constant block times in the wide-strip limit.
    pub fn constant_limit() -> Self {
        OvershootMoments {
            h1: ladder_h1(),
            h2: gaussian_ladder_h2(),
            r1: kappa(),
            r2: omega(),
            o1: kappa(),
            o2: omega(),
        }
    }

    fn denominator(&self, rho_b: T) -> Result<T> {
        let d = rho_b + self.r1 + self.o1;
        if d > T::zero() {
            Ok(d)
        } else {
            Err(LvrError::ZeroDenominator(d.to_f64_lossless()))
        }
    }
}

/// `E[τ] = h2 + h1·(ρ² + 2ρ·r1 + r2 − o2)/(ρ + r1 + o1)`.
pub fn expected_tau_from_moments<T: Scalar>(m: &OvershootMoments<T>, rho_b: T) -> Result<T> {
    let den = m.denominator(rho_b)?;
    let num = rho_b * rho_b + T::of(2.0) * rho_b * m.r1 + m.r2 - m.o2;
    Ok(m.h2 + m.h1 * num / den)
}

/// `LVR = ℓσ_b²·[h2/2 + h1(r2 − o2)/(2(ρ + r1 + o1))]`.
pub fn lvr_from_moments<T: Scalar>(
    m: &OvershootMoments<T>,
    rho_b: T,
    ell: T,
    sigma_b: T,
) -> Result<T> {
    let den = m.denominator(rho_b)?;
    let two = T::of(2.0);
    Ok(ell * sigma_b * sigma_b * (m.h2 / two + m.h1 * (m.r2 - m.o2) / (two * den)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CMuMethod {
    /// Every term vanishes (Dirac law).
    Exact,
    /// `E[√ΣU]` known in closed form.
    Analytic,
    /// `E[√ΣU]` estimated by simulation.
    MonteCarlo,
}

/// Truncated `C_μ` series with its error budget.
#[derive(Clone, Debug, PartialEq)]
pub struct CMuEstimate<T> {
    /// Partial sum up to `truncation` terms.
    pub value: T,
    /// Tail estimate plus 4 Monte-Carlo standard errors.
    pub error_bound: T,
    pub tail_bound: T,
    pub mc_se: T,
    pub truncation: u64,
    pub method: CMuMethod,
    /// Individual series terms `n = 1..=truncation`.
    pub terms: Vec<T>,
    /// Last-decade terms do not decay like `n^{-3/2}`.
    pub nonconvergent: bool,
}

/// Default number of series terms.
pub const DEFAULT_CMU_TRUNCATION: u64 = 10_000;
/// Default number of simulated `U` paths per term.
pub const DEFAULT_CMU_INNER_BUDGET: u64 = 100_000;

/// `C_μ = −(1/√2)·Σ_n n^{-1/2}(E[S_n^-/√n] − 1/√(2π))` with
/// `E[S_n^-/√n] = E[√(U_1+…+U_n)]/√(2πn)`.
///
/// Each term equals `(1/(2√π))·n^{-1/2}·(1 − E[√ΣU]/√n)` and is nonnegative
/// by Jensen. The tail beyond `truncation` is bounded with the
/// `1 − E[√ΣU]/√n ≈ Var(μ)/(8n)` expansion.
pub fn c_mu<T: Scalar>(
    law: &BlockTimeLaw<T>,
    truncation: u64,
    inner_budget: u64,
    opts: &RunOptions,
) -> Result<CMuEstimate<T>> {
    if truncation == 0 {
        return Err(LvrError::param("truncation_n", 0.0, "must be at least 1"));
    }
    let n_max = truncation as usize;
    let coef = 1.0 / (2.0 * std::f64::consts::PI.sqrt());
    let var = law.variance().to_f64_lossless();
    let tail_coef = var / (16.0 * std::f64::consts::PI.sqrt());
    let tail_bound = 2.0 * tail_coef / (truncation as f64).sqrt();
    let decade_start = (n_max / 10).max(1);
    let predicted_decade: f64 = (decade_start..=n_max)
        .map(|n| tail_coef * (n as f64).powf(-1.5))
        .sum();

    if law.is_dirac() {
        return Ok(CMuEstimate {
            value: T::zero(),
            error_bound: T::zero(),
            tail_bound: T::zero(),
            mc_se: T::zero(),
            truncation,
            method: CMuMethod::Exact,
            terms: vec![T::zero(); n_max],
            nonconvergent: false,
        });
    }

    let (terms, mc_se, decade_se, method) = match law.kind() {
        LawKind::Exponential => {
            // Γ(n + 1/2)/Γ(n) by the ratio recurrence from Γ(3/2) = √π/2
            let mut g = std::f64::consts::PI.sqrt() / 2.0;
            let mut terms = Vec::with_capacity(n_max);
            for n in 1..=n_max {
                let nf = n as f64;
                terms.push(coef / nf.sqrt() * (1.0 - g / nf.sqrt()));
                g *= (nf + 0.5) / nf;
            }
            (terms, 0.0, 0.0, CMuMethod::Analytic)
        }
        _ => {
            if inner_budget < 2 {
                return Err(LvrError::param(
                    "inner_budget",
                    inner_budget as f64,
                    "must be at least 2",
                ));
            }
            let (terms, se, dse) = c_mu_monte_carlo(law, n_max, inner_budget, decade_start, opts)?;
            (terms, se, dse, CMuMethod::MonteCarlo)
        }
    };

    let value: f64 = terms.iter().sum();
    let observed_decade: f64 = terms[decade_start - 1..].iter().sum();
    let nonconvergent =
        observed_decade > 2.0 * predicted_decade + 4.0 * decade_se + f64::EPSILON;
    Ok(CMuEstimate {
        value: T::of(value),
        error_bound: T::of(tail_bound + 4.0 * mc_se),
        tail_bound: T::of(tail_bound),
        mc_se: T::of(mc_se),
        truncation,
        method,
        terms: terms.into_iter().map(T::of).collect(),
        nonconvergent,
    })
}

/// Simulates `budget` paths of cumulative block times and reuses each path's
/// running sums across all `n`.
fn c_mu_monte_carlo<T: Scalar>(
    law: &BlockTimeLaw<T>,
    n_max: usize,
    budget: u64,
    decade_start: usize,
    opts: &RunOptions,
) -> Result<(Vec<f64>, f64, f64)> {
    let coef = 1.0 / (2.0 * std::f64::consts::PI.sqrt());
    let weights: Vec<f64> = (1..=n_max).map(|n| coef / n as f64).collect();
    let chunk = 256u64;
    let chunks = budget.div_ceil(chunk);

    #[derive(Clone)]
    struct Part {
        sqrt_sums: Vec<f64>,
        y: f64,
        y2: f64,
        d: f64,
        d2: f64,
    }
    let empty = Part {
        sqrt_sums: vec![0.0; n_max],
        y: 0.0,
        y2: 0.0,
        d: 0.0,
        d2: 0.0,
    };
    let job = || {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = RngStream::new(opts.seed, (1 << 60) | c);
                let mut part = empty.clone();
                for _ in 0..chunk.min(budget - c * chunk) {
                    let mut cum = 0.0f64;
                    let (mut y, mut d) = (0.0, 0.0);
                    for (n, &w) in weights.iter().enumerate().take(n_max) {
                        cum += law.sample_time(&mut rng).to_f64_lossless();
                        let r = cum.sqrt();
                        part.sqrt_sums[n] += r;
                        // term_n = coef/√n · (1 − r/√n) = coef/√n − w_n·r
                        let t = coef / ((n + 1) as f64).sqrt() - w * r;
                        y += t;
                        if n + 1 >= decade_start {
                            d += t;
                        }
                    }
                    part.y += y;
                    part.y2 += y * y;
                    part.d += d;
                    part.d2 += d * d;
                }
                part
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold(empty.clone(), |mut a, b| {
                for (x, y) in a.sqrt_sums.iter_mut().zip(&b.sqrt_sums) {
                    *x += y;
                }
                a.y += b.y;
                a.y2 += b.y2;
                a.d += b.d;
                a.d2 += b.d2;
                a
            })
    };
    let total = match opts.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| LvrError::InvalidConfig(e.to_string()))?
            .install(job),
        None => job(),
    };
    let b = budget as f64;
    let terms = total
        .sqrt_sums
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let n = (i + 1) as f64;
            coef / n.sqrt() * (1.0 - s / b / n.sqrt())
        })
        .collect();
    let se = |s: f64, s2: f64| (((s2 - s * s / b) / (b - 1.0)).max(0.0) / b).sqrt();
    Ok((terms, se(total.y, total.y2), se(total.d, total.d2)))
}

/// Series value of `C_μ` next to the ladder-moment oracle `h2 − |ζ(1/2)|/√π`.
#[derive(Clone, Debug, PartialEq)]
pub struct CMuComparison {
    pub series: f64,
    pub series_error: f64,
    pub oracle: f64,
    pub oracle_se: f64,
    /// `series − oracle`.
    pub discrepancy: f64,
    /// Series error bound plus 4 oracle standard errors.
    pub combined_error: f64,
    /// The two values disagree beyond `combined_error`.
    pub flagged: bool,
}

pub fn compare_c_mu<T: Scalar>(series: &CMuEstimate<T>, ladder_h2: &Estimate<T>) -> CMuComparison {
    let oracle = ladder_h2.value.to_f64_lossless() - gaussian_ladder_h2::<f64>();
    let oracle_se = ladder_h2.se.to_f64_lossless();
    let s = series.value.to_f64_lossless();
    let combined_error = series.error_bound.to_f64_lossless() + 4.0 * oracle_se;
    let discrepancy = s - oracle;
    CMuComparison {
        series: s,
        series_error: series.error_bound.to_f64_lossless(),
        oracle,
        oracle_se,
        discrepancy,
        combined_error,
        flagged: discrepancy.abs() > combined_error,
    }
}
