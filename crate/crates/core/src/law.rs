//! Block-time laws `μ`, always normalized to unit mean.
//!
//! A law is built once from raw (unnormalized) parameters; the constructor
//! divides by the raw mean so that every downstream module can rely on
//! `E[μ] = 1`, which in turn makes every normalized increment unit-variance.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::path::Path;
use std::sync::Arc;

use rand::Rng;
use statrs::function::erf::erf;

use crate::error::{LvrError, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LawKind {
    Constant,
    Exponential,
    UniformInterval,
    EmpiricalTable,
}

impl fmt::Display for LawKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LawKind::Constant => "constant",
            LawKind::Exponential => "exponential",
            LawKind::UniformInterval => "uniform-interval",
            LawKind::EmpiricalTable => "empirical-table",
        })
    }
}

/// Raw law description in the user's own time units (any positive mean).
#[derive(Clone, Debug, PartialEq)]
pub enum RawLaw<T> {
    Constant { value: T },
    Exponential { rate: T },
    UniformInterval { low: T, high: T },
    EmpiricalTable { samples: Vec<T> },
}

impl<T: Scalar> RawLaw<T> {
    pub fn kind(&self) -> LawKind {
        match self {
            RawLaw::Constant { .. } => LawKind::Constant,
            RawLaw::Exponential { .. } => LawKind::Exponential,
            RawLaw::UniformInterval { .. } => LawKind::UniformInterval,
            RawLaw::EmpiricalTable { .. } => LawKind::EmpiricalTable,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Shape<T> {
    Constant,
    Exponential,
    /// Uniform on `[low, high]` with `(low + high) / 2 = 1`.
    Uniform { low: T, high: T },
    /// Resampled with replacement; entries already divided by their mean.
    Empirical { samples: Arc<[T]> },
}

/// A unit-mean block-time distribution together with its second moment `u2`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockTimeLaw<T> {
    shape: Shape<T>,
    u2: T,
    fingerprint: u64,
}

/// Builds a unit-mean law from raw parameters.
///
/// Built-in kinds get `u2` analytically; an empirical table uses the sample
/// second moment of the rescaled entries.
pub fn make_block_law<T: Scalar>(raw: RawLaw<T>) -> Result<BlockTimeLaw<T>> {
    match raw {
        RawLaw::Constant { value } => {
            check_positive("value", value)?;
            Ok(BlockTimeLaw::constant())
        }
        RawLaw::Exponential { rate } => {
            check_positive("rate", rate)?;
            Ok(BlockTimeLaw::exponential())
        }
        RawLaw::UniformInterval { low, high } => {
            if !low.is_finite() || low < T::zero() {
                return Err(LvrError::param(
                    "low",
                    low.to_f64_lossless(),
                    "lower support bound must be finite and nonnegative",
                ));
            }
            if !high.is_finite() || high <= T::zero() || high < low {
                return Err(LvrError::param(
                    "high",
                    high.to_f64_lossless(),
                    "upper support bound must be positive and not below the lower bound",
                ));
            }
            let mean = (low + high) / T::of(2.0);
            let (a, b) = (low / mean, high / mean);
            if b == a {
                return Ok(BlockTimeLaw::constant());
            }
            Ok(BlockTimeLaw::stamped(
                Shape::Uniform { low: a, high: b },
                (a * a + a * b + b * b) / T::of(3.0),
            ))
        }
        RawLaw::EmpiricalTable { samples } => {
            if samples.is_empty() {
                return Err(LvrError::EmptyTable);
            }
            let mut sum = 0.0f64;
            let mut sum_sq = 0.0f64;
            for &x in &samples {
                let v = x.to_f64_lossless();
                if !v.is_finite() || v < 0.0 {
                    return Err(LvrError::InvalidLaw(format!(
                        "empirical entry {v} is not a finite nonnegative number"
                    )));
                }
                sum += v;
                sum_sq += v * v;
            }
            if sum <= 0.0 {
                return Err(LvrError::InvalidLaw(
                    "empirical table has zero mean".to_string(),
                ));
            }
            let n = samples.len() as f64;
            let mean = sum / n;
            let u2 = (sum_sq / n) / (mean * mean);
            if !u2.is_finite() {
                return Err(LvrError::InvalidLaw(
                    "empirical second moment is not finite".to_string(),
                ));
            }
            let rescaled: Arc<[T]> = samples
                .iter()
                .map(|&x| T::of(x.to_f64_lossless() / mean))
                .collect();
            Ok(BlockTimeLaw::stamped(
                Shape::Empirical { samples: rescaled },
                T::of(u2),
            ))
        }
    }
}

fn check_positive<T: Scalar>(name: &'static str, v: T) -> Result<()> {
    if v.is_finite() && v > T::zero() {
        Ok(())
    } else {
        Err(LvrError::param(
            name,
            v.to_f64_lossless(),
            "must be finite and strictly positive",
        ))
    }
}

impl<T: Scalar> BlockTimeLaw<T> {
    /// Dirac mass at 1.
    pub fn constant() -> Self {
        BlockTimeLaw::stamped(Shape::Constant, T::one())
    }

    /// Standard exponential (Poisson block arrivals).
    pub fn exponential() -> Self {
        BlockTimeLaw::stamped(Shape::Exponential, T::of(2.0))
    }

    /// Uniform on `[low, high]` rescaled to unit mean.
    pub fn uniform(low: T, high: T) -> Result<Self> {
        make_block_law(RawLaw::UniformInterval { low, high })
    }

    pub fn empirical(samples: Vec<T>) -> Result<Self> {
        make_block_law(RawLaw::EmpiricalTable { samples })
    }

    pub fn kind(&self) -> LawKind {
        match self.shape {
            Shape::Constant => LawKind::Constant,
            Shape::Exponential => LawKind::Exponential,
            Shape::Uniform { .. } => LawKind::UniformInterval,
            Shape::Empirical { .. } => LawKind::EmpiricalTable,
        }
    }

    /// Second moment `E[μ²]`; at least 1, with equality only for a Dirac law.
    pub fn u2(&self) -> T {
        self.u2
    }

    pub fn variance(&self) -> T {
        self.u2 - T::one()
    }

    pub fn is_dirac(&self) -> bool {
        match &self.shape {
            Shape::Constant => true,
            Shape::Empirical { samples } => samples.iter().all(|&x| x == samples[0]),
            _ => false,
        }
    }

    /// Support bounds after normalization (`high` is `None` when unbounded).
    pub fn support(&self) -> (T, Option<T>) {
        match &self.shape {
            Shape::Constant => (T::one(), Some(T::one())),
            Shape::Exponential => (T::zero(), None),
            Shape::Uniform { low, high } => (*low, Some(*high)),
            Shape::Empirical { samples } => {
                let lo = samples.iter().copied().fold(T::infinity(), T::min);
                let hi = samples.iter().copied().fold(T::neg_infinity(), T::max);
                (lo, Some(hi))
            }
        }
    }

    /// Draws one normalized block length `U ~ μ`.
    #[inline]
    pub fn sample_time<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        match &self.shape {
            Shape::Constant => T::one(),
            Shape::Exponential => T::sample_exp1(rng),
            Shape::Uniform { low, high } => *low + (*high - *low) * T::sample_unit(rng),
            Shape::Empirical { samples } => samples[rng.random_range(0..samples.len())],
        }
    }

    /// `P(|N(0, μ)| ≤ x)`: CDF of the folded normal variance mixture that
    /// dominates both boundary overshoots.
    pub fn folded_increment_cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let given_time = |u: f64| {
            if u <= 0.0 {
                1.0
            } else {
                erf(x / (2.0 * u).sqrt())
            }
        };
        match &self.shape {
            Shape::Constant => given_time(1.0),
            Shape::Exponential => 1.0 - (-std::f64::consts::SQRT_2 * x).exp(),
            Shape::Uniform { low, high } => {
                let (a, b) = (low.to_f64_lossless(), high.to_f64_lossless());
                simpson(given_time, a, b, 2048) / (b - a)
            }
            Shape::Empirical { samples } => {
                samples
                    .iter()
                    .map(|u| given_time(u.to_f64_lossless()))
                    .sum::<f64>()
                    / samples.len() as f64
            }
        }
    }

    /// Identity used to tag accumulators built from this law.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    fn stamped(shape: Shape<T>, u2: T) -> Self {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        u2.to_f64_lossless().to_bits().hash(&mut h);
        match &shape {
            Shape::Constant => 0u8.hash(&mut h),
            Shape::Exponential => 1u8.hash(&mut h),
            Shape::Uniform { low, high } => {
                2u8.hash(&mut h);
                low.to_f64_lossless().to_bits().hash(&mut h);
                high.to_f64_lossless().to_bits().hash(&mut h);
            }
            Shape::Empirical { samples } => {
                3u8.hash(&mut h);
                samples.len().hash(&mut h);
                for s in samples.iter() {
                    s.to_f64_lossless().to_bits().hash(&mut h);
                }
            }
        }
        BlockTimeLaw {
            shape,
            u2,
            fingerprint: h.finish(),
        }
    }
}

impl<T: Scalar> fmt::Display for BlockTimeLaw<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.shape {
            Shape::Uniform { low, high } => write!(f, "uniform[{low}, {high}]"),
            Shape::Empirical { samples } => write!(f, "empirical({} entries)", samples.len()),
            _ => write!(f, "{}", self.kind()),
        }
    }
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Parses an empirical block-time table: one nonnegative decimal per line.
/// Blank lines are ignored.
pub fn parse_empirical_table(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| {
            LvrError::InvalidLaw(format!("line {}: `{line}` is not a number", lineno + 1))
        })?;
        if !v.is_finite() || v < 0.0 {
            return Err(LvrError::InvalidLaw(format!(
                "line {}: {v} is not a finite nonnegative number",
                lineno + 1
            )));
        }
        out.push(v);
    }
    if out.is_empty() {
        return Err(LvrError::EmptyTable);
    }
    Ok(out)
}

pub fn read_empirical_table(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    parse_empirical_table(&text)
}
