//! Excursion-by-excursion simulation of the normalized price walk.
//!
//! Increments are `X = Z·√U` with `Z ~ N(0, 1)` and `U ~ μ`; normals come
//! from the ziggurat sampler in `rand_distr` (no inverse-CDF evaluation).
//! The no-arbitrage strip is the closed interval `[0, rho_b]`; an arbitrage
//! fires on strict exit and the walk restarts at 0 after either side.

use crate::error::{LvrError, Result};
use crate::law::BlockTimeLaw;
use crate::params::{ChainState, ModelParams};
use crate::scalar::Scalar;
use crate::stats::{ExactSum, MomentSums};
use rand::Rng;

pub const DEFAULT_ITERATION_CAP: u64 = 1_000_000_000;

/// Level above which the unconstrained walk is folded down by half of it.
pub const DEFAULT_FOLD_LEVEL: f64 = 40.0;

/// Knobs shared by every walk routine.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WalkConfig {
    /// Maximum steps per excursion or per ladder passage.
    pub iteration_cap: u64,
    /// Far-field fold for the unconstrained first passage below zero.
    ///
    /// The walk's first-passage time below 0 has infinite mean, but the
    /// undershoot seen from a level `y` converges geometrically fast in `y`
    /// to its stationary law. Whenever the unconstrained walk exceeds this
    /// level it is shifted down by half of it, bounding the expected cost
    /// while changing the undershoot law by `O(exp(-c·fold/2))`.
    pub fold_level: f64,
    /// Continue right exits below zero to record the leftover companion `O`.
    pub sample_leftover: bool,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            iteration_cap: DEFAULT_ITERATION_CAP,
            fold_level: DEFAULT_FOLD_LEVEL,
            sample_leftover: true,
        }
    }
}

impl WalkConfig {
    pub fn without_leftover(mut self) -> Self {
        self.sample_leftover = false;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExitSide {
    Left,
    Right,
}

/// One arbitrage cycle, from a reset at 0 to the first strict strip exit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExcursionOutcome<T> {
    /// Blocks until the arbitrage, at least 1.
    pub tau: u64,
    pub side: ExitSide,
    /// Distance beyond the exited boundary (normalized units).
    pub overshoot: T,
    /// Signed partial sum at exit.
    pub s_tau: T,
    /// `(ell/2)·(sigma_b·overshoot)²`.
    pub loss_usd: T,
    /// For right exits with leftover sampling on: `-S` at the first time the
    /// continued, unconstrained walk drops below 0.
    pub leftover: Option<T>,
    /// Fingerprint of the `(params, law)` pair that produced this record.
    pub tag: u64,
}

pub(crate) fn run_tag<T: Scalar>(params: &ModelParams<T>, law: &BlockTimeLaw<T>) -> u64 {
    params.fingerprint() ^ law.fingerprint().rotate_left(17)
}

/// Draws one normalized log-return `Z·√U`.
#[inline]
pub fn sample_increment<T: Scalar, R: Rng + ?Sized>(law: &BlockTimeLaw<T>, rng: &mut R) -> T {
    let z = T::sample_standard_normal(rng);
    if law.is_dirac() {
        z
    } else {
        z * law.sample_time(rng).sqrt()
    }
}

/// Runs the unconstrained walk from `start` until it goes strictly below 0
/// and returns the undershoot `-S`.
fn undershoot_below_zero<T: Scalar, R: Rng + ?Sized>(
    start: T,
    law: &BlockTimeLaw<T>,
    config: &WalkConfig,
    rng: &mut R,
    phase: &'static str,
) -> Result<T> {
    let fold = T::of(config.fold_level);
    let shift = fold / T::of(2.0);
    let dirac = law.is_dirac();
    let mut s = start;
    while s > fold {
        s -= shift;
    }
    let mut steps = 0u64;
    loop {
        if steps >= config.iteration_cap {
            return Err(LvrError::IterationCapExceeded {
                cap: config.iteration_cap,
                phase,
            });
        }
        steps += 1;
        let z = T::sample_standard_normal(rng);
        s += if dirac { z } else { z * law.sample_time(rng).sqrt() };
        if s < T::zero() {
            return Ok(-s);
        }
        if s > fold {
            s -= shift;
        }
    }
}

/// Simulates one excursion `S_0 = 0, S_n = S_{n-1} + X_n` until `S_n ∉ [0, rho_b]`.
pub fn run_excursion<T: Scalar, R: Rng + ?Sized>(
    params: &ModelParams<T>,
    law: &BlockTimeLaw<T>,
    config: &WalkConfig,
    rng: &mut R,
) -> Result<ExcursionOutcome<T>> {
    run_excursion_tagged(params, law, config, run_tag(params, law), rng)
}

#[inline]
pub(crate) fn run_excursion_tagged<T: Scalar, R: Rng + ?Sized>(
    params: &ModelParams<T>,
    law: &BlockTimeLaw<T>,
    config: &WalkConfig,
    tag: u64,
    rng: &mut R,
) -> Result<ExcursionOutcome<T>> {
    let rho = params.rho_b();
    let dirac = law.is_dirac();
    let mut s = T::zero();
    let mut tau = 0u64;
    loop {
        if tau >= config.iteration_cap {
            return Err(LvrError::IterationCapExceeded {
                cap: config.iteration_cap,
                phase: "simulating a strip excursion",
            });
        }
        tau += 1;
        let z = T::sample_standard_normal(rng);
        s += if dirac { z } else { z * law.sample_time(rng).sqrt() };
        if s < T::zero() {
            let overshoot = -s;
            return Ok(ExcursionOutcome {
                tau,
                side: ExitSide::Left,
                overshoot,
                s_tau: s,
                loss_usd: params.loss_usd(overshoot),
                leftover: None,
                tag,
            });
        }
        if s > rho {
            let overshoot = s - rho;
            let leftover = if config.sample_leftover {
                Some(undershoot_below_zero(
                    s,
                    law,
                    config,
                    rng,
                    "continuing a right exit below zero",
                )?)
            } else {
                None
            };
            return Ok(ExcursionOutcome {
                tau,
                side: ExitSide::Right,
                overshoot,
                s_tau: s,
                loss_usd: params.loss_usd(overshoot),
                leftover,
                tag,
            });
        }
    }
}

/// Samples one ladder height `H = -S_{τ₀}` with `τ₀ = inf{k : S_k < 0}`.
pub fn ladder_first_passage<T: Scalar, R: Rng + ?Sized>(
    law: &BlockTimeLaw<T>,
    config: &WalkConfig,
    rng: &mut R,
) -> Result<T> {
    undershoot_below_zero(T::zero(), law, config, rng, "sampling a ladder height")
}

/// Block-level totals from running the chain itself.
///
/// Completed cycles are also kept as `(τ_i, loss_i)` pairs so the per-block
/// loss gets a regenerative (ratio-estimator) standard error.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ChainAggregate {
    pub blocks: u64,
    pub arbitrages: u64,
    total_loss: ExactSum,
    cycles: MomentSums<2>,
}

impl ChainAggregate {
    pub fn total_loss_usd(&self) -> f64 {
        self.total_loss.value()
    }

    pub fn merge(&mut self, other: &ChainAggregate) {
        self.blocks += other.blocks;
        self.arbitrages += other.arbitrages;
        self.total_loss.merge(&other.total_loss);
        self.cycles.merge(&other.cycles);
    }

    /// Loss per block with its regenerative standard error.
    pub fn arb_per_block(&self) -> (f64, f64) {
        let n = self.blocks as f64;
        let arb = self.total_loss.value() / n;
        let k = self.cycles.count() as f64;
        if k < 2.0 {
            return (arb, f64::NAN);
        }
        // Var of (loss_i − arb·τ_i) over completed cycles
        let (st, sl) = (self.cycles.sum(0), self.cycles.sum(1));
        let (stt, sll, stl) = (
            self.cycles.cross_sum(0, 0),
            self.cycles.cross_sum(1, 1),
            self.cycles.cross_sum(0, 1),
        );
        let mean_d = (sl - arb * st) / k;
        let sum_d2 = sll - 2.0 * arb * stl + arb * arb * stt;
        let var_d = ((sum_d2 - k * mean_d * mean_d) / (k - 1.0)).max(0.0);
        let mean_tau = st / k;
        (arb, (var_d / k).sqrt() / mean_tau)
    }

    pub fn arbitrage_frequency(&self) -> f64 {
        self.arbitrages as f64 / self.blocks as f64
    }
}

/// Runs the block chain for `n_blocks` blocks from `M_0 = 0`.
pub fn run_chain<T: Scalar, R: Rng + ?Sized>(
    params: &ModelParams<T>,
    law: &BlockTimeLaw<T>,
    n_blocks: u64,
    rng: &mut R,
) -> Result<ChainAggregate> {
    if n_blocks == 0 {
        return Err(LvrError::param("n_blocks", 0.0, "must be at least 1"));
    }
    let mut state = ChainState::<T>::default();
    let mut agg = ChainAggregate::default();
    let mut since_reset = 0u64;
    for _ in 0..n_blocks {
        let x = sample_increment(law, rng);
        since_reset += 1;
        if state.step(params, x).is_some() {
            let loss = state.lvr_last.to_f64_lossless();
            agg.arbitrages += 1;
            agg.total_loss.add(loss);
            agg.cycles.push(&[since_reset as f64, loss]);
            since_reset = 0;
        }
    }
    agg.blocks = n_blocks;
    Ok(agg)
}
