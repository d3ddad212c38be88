//! Exact mergeable sums and delta-method standard errors.
//!
//! Samples are quantized to a fixed-point grid of `2^-32` before summation,
//! so sums are plain integer additions: merging is associative and
//! commutative bit-for-bit, independent of how a stream was partitioned.

use std::fmt;

use crate::scalar::Scalar;

const FIXED_SCALE: f64 = 4_294_967_296.0;
const I64_SAFE: f64 = 9.2e18;

#[inline]
fn quantize(x: f64) -> i128 {
    debug_assert!(x.is_finite(), "non-finite sample {x}");
    let y = x * FIXED_SCALE;
    if y.abs() < I64_SAFE {
        y as i64 as i128
    } else {
        y as i128
    }
}

/// A fixed-point sum with resolution `2^-32`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct ExactSum(i128);

impl ExactSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        self.0 += quantize(x);
    }

    #[inline]
    pub fn merge(&mut self, other: &ExactSum) {
        self.0 += other.0;
    }

    pub fn value(&self) -> f64 {
        self.0 as f64 / FIXED_SCALE
    }

    pub fn raw(&self) -> i128 {
        self.0
    }
}

/// Count, sums and upper-triangular cross-product sums of a `K`-vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MomentSums<const K: usize> {
    count: u64,
    sum: [ExactSum; K],
    cross: [[ExactSum; K]; K],
}

impl<const K: usize> Default for MomentSums<K> {
    fn default() -> Self {
        MomentSums {
            count: 0,
            sum: [ExactSum::default(); K],
            cross: [[ExactSum::default(); K]; K],
        }
    }
}

impl<const K: usize> MomentSums<K> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one observation. Zero components are skipped, which matters for
    /// the mostly-sparse excursion vectors.
    #[inline]
    pub fn push(&mut self, v: &[f64; K]) {
        self.count += 1;
        let mut idx = [0usize; K];
        let mut nz = 0;
        for (i, &x) in v.iter().enumerate() {
            if x != 0.0 {
                idx[nz] = i;
                nz += 1;
            }
        }
        for a in 0..nz {
            let i = idx[a];
            let xi = v[i];
            self.sum[i].add(xi);
            for &j in &idx[a..nz] {
                self.cross[i][j].add(xi * v[j]);
            }
        }
    }

    pub fn merge(&mut self, other: &Self) {
        self.count += other.count;
        for i in 0..K {
            self.sum[i].merge(&other.sum[i]);
            for j in i..K {
                self.cross[i][j].merge(&other.cross[i][j]);
            }
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn sum(&self, i: usize) -> f64 {
        self.sum[i].value()
    }

    pub fn cross_sum(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        self.cross[a][b].value()
    }

    pub fn means(&self) -> [f64; K] {
        let n = self.count as f64;
        std::array::from_fn(|i| self.sum[i].value() / n)
    }

    /// Unbiased sample covariance matrix.
    pub fn covariance(&self) -> [[f64; K]; K] {
        let n = self.count as f64;
        let m = self.means();
        let mut c = [[0.0; K]; K];
        for i in 0..K {
            for j in i..K {
                let v = (self.cross[i][j].value() - n * m[i] * m[j]) / (n - 1.0);
                c[i][j] = v;
                c[j][i] = v;
            }
        }
        c
    }

    pub fn mean_se(&self, i: usize) -> f64 {
        let c = self.covariance();
        (c[i][i].max(0.0) / self.count as f64).sqrt()
    }
}

fn gradient<const K: usize>(f: &impl Fn(&[f64; K]) -> f64, at: &[f64; K]) -> [f64; K] {
    std::array::from_fn(|i| {
        let h = 1e-6 * at[i].abs().max(1e-3);
        let mut hi = *at;
        let mut lo = *at;
        hi[i] += h;
        lo[i] -= h;
        (f(&hi) - f(&lo)) / (2.0 * h)
    })
}

fn quad_form<const K: usize>(g: &[f64; K], c: &[[f64; K]; K]) -> f64 {
    let mut v = 0.0;
    for i in 0..K {
        if g[i] == 0.0 {
            continue;
        }
        for j in 0..K {
            v += g[i] * c[i][j] * g[j];
        }
    }
    v
}

/// Delta-method standard error of `f(means)`.
pub fn delta_se<const K: usize>(sums: &MomentSums<K>, f: impl Fn(&[f64; K]) -> f64) -> f64 {
    let m = sums.means();
    let g = gradient(&f, &m);
    (quad_form(&g, &sums.covariance()).max(0.0) / sums.count() as f64).sqrt()
}

/// Delta-method standard error of `f(means_a, means_b)` for two independent
/// samples.
pub fn delta_se2<const K: usize, const J: usize>(
    a: &MomentSums<K>,
    b: &MomentSums<J>,
    f: impl Fn(&[f64; K], &[f64; J]) -> f64,
) -> f64 {
    let (ma, mb) = (a.means(), b.means());
    let ga = gradient(&|x: &[f64; K]| f(x, &mb), &ma);
    let gb = gradient(&|y: &[f64; J]| f(&ma, y), &mb);
    let va = quad_form(&ga, &a.covariance()) / a.count() as f64;
    let vb = quad_form(&gb, &b.covariance()) / b.count() as f64;
    (va.max(0.0) + vb.max(0.0)).sqrt()
}

/// A point estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub se: T,
}

impl<T: Scalar> Estimate<T> {
    pub fn new(value: T, se: T) -> Self {
        Estimate { value, se }
    }

    pub(crate) fn from_f64(value: f64, se: f64) -> Self {
        Estimate {
            value: T::of(value),
            se: T::of(se),
        }
    }

    /// `|value − target| ≤ k·se`.
    pub fn within(&self, target: T, k: T) -> bool {
        (self.value - target).abs() <= k * self.se
    }

    /// Standardized distance to `target`.
    pub fn z(&self, target: T) -> T {
        (self.value - target) / self.se
    }

    /// Combined standard error with an independent estimate.
    pub fn combined_se(&self, other: &Estimate<T>) -> T {
        (self.se * self.se + other.se * other.se).sqrt()
    }
}

impl<T: Scalar> fmt::Display for Estimate<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = f.precision().unwrap_or(6);
        write!(f, "{:.p$} ± {:.p$}", self.value, self.se, p = p)
    }
}
