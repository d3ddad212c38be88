//! Monte-Carlo estimators for the arbitrage cycle: trade probability, loss
//! per arbitrage, loss per block, overshoot and ladder moments, the Wald
//! residuals, and the plug-in identities that tie them together.

use rayon::prelude::*;

use crate::error::{LvrError, Result};
use crate::law::BlockTimeLaw;
use crate::params::ModelParams;
use crate::rng::RngStream;
use crate::scalar::Scalar;
use crate::stats::{delta_se, delta_se2, Estimate, MomentSums};
use crate::walk::{
    ladder_first_passage, run_chain, run_excursion_tagged, run_tag, ChainAggregate,
    ExcursionOutcome, ExitSide, WalkConfig,
};

// Per-excursion observation vector.
const RIGHT: usize = 0;
const R1: usize = 1;
const R2: usize = 2;
const O1: usize = 3;
const O2: usize = 4;
const L1: usize = 5;
const L2: usize = 6;
const TAU: usize = 7;
const S1: usize = 8;
const S2: usize = 9;
const LOSS: usize = 10;
const NX: usize = 11;

type ExcursionSums = MomentSums<NX>;
type LadderSums = MomentSums<2>;

/// Mergeable sums over excursions and ladder samples for one parameter set.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentAccumulator {
    tag: u64,
    rho_b: f64,
    sigma_b: f64,
    ell: f64,
    right_count: u64,
    leftover_count: u64,
    excursions: ExcursionSums,
    ladder: LadderSums,
}

impl MomentAccumulator {
    pub fn new<T: Scalar>(params: &ModelParams<T>, law: &BlockTimeLaw<T>) -> Self {
        MomentAccumulator {
            tag: run_tag(params, law),
            rho_b: params.rho_b().to_f64_lossless(),
            sigma_b: params.sigma_b().to_f64_lossless(),
            ell: params.ell().to_f64_lossless(),
            right_count: 0,
            leftover_count: 0,
            excursions: ExcursionSums::new(),
            ladder: LadderSums::new(),
        }
    }

    pub fn tag(&self) -> u64 {
        self.tag
    }

    pub fn rho_b(&self) -> f64 {
        self.rho_b
    }

    pub fn count(&self) -> u64 {
        self.excursions.count()
    }

    pub fn right_count(&self) -> u64 {
        self.right_count
    }

    pub fn ladder_count(&self) -> u64 {
        self.ladder.count()
    }

    /// Every right exit carries its leftover companion.
    pub fn has_leftover(&self) -> bool {
        self.right_count > 0 && self.leftover_count == self.right_count
    }

    pub fn sum_left_overshoot(&self) -> f64 {
        self.excursions.sum(L1)
    }

    pub fn sum_right_overshoot(&self) -> f64 {
        self.excursions.sum(R1)
    }

    pub fn sum_tau(&self) -> f64 {
        self.excursions.sum(TAU)
    }

    pub fn sum_loss(&self) -> f64 {
        self.excursions.sum(LOSS)
    }

    /// Adds one excursion; rejects records produced by other parameters.
    pub fn accumulate<T: Scalar>(&mut self, e: &ExcursionOutcome<T>) -> Result<()> {
        if e.tag != self.tag {
            return Err(LvrError::ParameterMismatch);
        }
        self.push(e);
        Ok(())
    }

    #[inline]
    fn push<T: Scalar>(&mut self, e: &ExcursionOutcome<T>) {
        let mut v = [0.0f64; NX];
        let d = e.overshoot.to_f64_lossless();
        let s = e.s_tau.to_f64_lossless();
        match e.side {
            ExitSide::Left => {
                v[L1] = d;
                v[L2] = d * d;
            }
            ExitSide::Right => {
                self.right_count += 1;
                v[RIGHT] = 1.0;
                v[R1] = d;
                v[R2] = d * d;
                if let Some(o) = e.leftover {
                    self.leftover_count += 1;
                    let o = o.to_f64_lossless();
                    v[O1] = o;
                    v[O2] = o * o;
                }
            }
        }
        v[TAU] = e.tau as f64;
        v[S1] = s;
        v[S2] = s * s;
        v[LOSS] = e.loss_usd.to_f64_lossless();
        self.excursions.push(&v);
    }

    /// Adds one independent ladder-height sample.
    pub fn accumulate_ladder<T: Scalar>(&mut self, h: T) {
        let h = h.to_f64_lossless();
        self.ladder.push(&[h, h * h]);
    }

    /// Merges another accumulator built for the same parameters.
    pub fn merge(&mut self, other: &MomentAccumulator) -> Result<()> {
        if other.tag != self.tag {
            return Err(LvrError::ParameterMismatch);
        }
        self.right_count += other.right_count;
        self.leftover_count += other.leftover_count;
        self.excursions.merge(&other.excursions);
        self.ladder.merge(&other.ladder);
        Ok(())
    }

    fn require(&self, needed: u64) -> Result<()> {
        if self.count() < needed {
            Err(LvrError::InsufficientSamples {
                count: self.count(),
                needed,
            })
        } else {
            Ok(())
        }
    }

    fn ladder_moments(&self) -> Option<LadderMoments<f64>> {
        (self.ladder.count() >= 2).then(|| LadderMoments::from_sums(&self.ladder))
    }

    /// Turns the sums into estimates with delta-method standard errors.
    pub fn finalize<T: Scalar>(&self) -> Result<EstimateReport<T>> {
        self.require(2)?;
        let x = &self.excursions;
        let m = x.means();
        let est = |f: &dyn Fn(&[f64; NX]) -> f64| Estimate::<T>::from_f64(f(&m), delta_se(x, f));

        let e_tau = Estimate::<T>::from_f64(m[TAU], x.mean_se(TAU));
        let lvr_bar = Estimate::<T>::from_f64(m[LOSS], x.mean_se(LOSS));
        let p_trade_value = T::one() / e_tau.value;
        let p_trade = Estimate::new(p_trade_value, e_tau.se * p_trade_value * p_trade_value);
        let arb_value = p_trade.value * lvr_bar.value;
        let arb_se = delta_se(x, |v| v[LOSS] / v[TAU]);
        let arb_bar = Estimate::new(arb_value, T::of(arb_se));

        let right = self.right_count;
        let left = self.count() - right;
        let ratio = |num: usize, den: fn(&[f64; NX]) -> f64| {
            est(&move |v: &[f64; NX]| v[num] / den(v))
        };
        let (r1, r2) = if right >= 2 {
            (
                Some(ratio(R1, |v| v[RIGHT])),
                Some(ratio(R2, |v| v[RIGHT])),
            )
        } else {
            (None, None)
        };
        let (l1, l2) = if left >= 2 {
            (
                Some(ratio(L1, |v| 1.0 - v[RIGHT])),
                Some(ratio(L2, |v| 1.0 - v[RIGHT])),
            )
        } else {
            (None, None)
        };
        let (o1, o2) = if right >= 2 && self.has_leftover() {
            (
                Some(ratio(O1, |v| v[RIGHT])),
                Some(ratio(O2, |v| v[RIGHT])),
            )
        } else {
            (None, None)
        };

        // With leftovers each excursion yields one exact ladder height:
        // H = L on a left exit and O on a right exit.
        let (h1, h2) = if self.has_leftover() {
            (
                Some(est(&|v| v[L1] + v[O1])),
                Some(est(&|v| v[L2] + v[O2])),
            )
        } else if let Some(lad) = self.ladder_moments() {
            (Some(lad.h1.cast()), Some(lad.h2.cast()))
        } else {
            (None, None)
        };

        let wald = self.wald_diagnostics::<T>()?;
        Ok(EstimateReport {
            p_trade,
            lvr_bar,
            arb_bar,
            p: Estimate::from_f64(m[RIGHT], x.mean_se(RIGHT)),
            l1,
            l2,
            r1,
            r2,
            o1,
            o2,
            h1,
            h2,
            e_tau,
            wald_residual_1: wald.residual_1,
            wald_residual_2: wald.residual_2,
            n_excursions: self.count(),
            right_exits: right,
        })
    }

    /// `mean(S_τ)` and `mean(S_τ²) − mean(τ)`, both zero in expectation.
    pub fn wald_diagnostics<T: Scalar>(&self) -> Result<WaldDiagnostics<T>> {
        self.require(2)?;
        let x = &self.excursions;
        let m = x.means();
        Ok(WaldDiagnostics {
            residual_1: Estimate::from_f64(m[S1], x.mean_se(S1)),
            residual_2: Estimate::from_f64(m[S2] - m[TAU], delta_se(x, |v| v[S2] - v[TAU])),
        })
    }

    /// Plug-in identities relating the excursion moments to independently
    /// sampled ladder moments. Requires leftovers and ladder samples.
    pub fn identity_checks(&self) -> Result<Vec<IdentityCheck>> {
        self.require(2)?;
        if !self.has_leftover() || self.right_count < 2 {
            return Err(LvrError::InvalidConfig(
                "identity checks need right exits with leftover samples".into(),
            ));
        }
        if self.ladder.count() < 2 {
            return Err(LvrError::InsufficientSamples {
                count: self.ladder.count(),
                needed: 2,
            });
        }
        let rho = self.rho_b;
        let scale = self.ell * self.sigma_b * self.sigma_b;
        let x = &self.excursions;
        let lad = &self.ladder;

        fn moments(v: &[f64; NX]) -> (f64, f64, f64, f64, f64) {
            let p = v[RIGHT];
            (p, v[R1] / p, v[R2] / p, v[O1] / p, v[O2] / p)
        }

        let check = |name: &'static str,
                     lhs: &dyn Fn(&[f64; NX], &[f64; 2]) -> f64,
                     rhs: &dyn Fn(&[f64; NX], &[f64; 2]) -> f64| {
            let (mx, ml) = (x.means(), lad.means());
            IdentityCheck {
                name,
                lhs: lhs(&mx, &ml),
                rhs: rhs(&mx, &ml),
                se: delta_se2(x, lad, |a, b| lhs(a, b) - rhs(a, b)),
            }
        };

        Ok(vec![
            check(
                "ladder mean: l1(1-p) + o1 p = h1",
                &|v, _| v[L1] + v[O1],
                &|_, h| h[0],
            ),
            check(
                "ladder second moment: l2(1-p) + o2 p = h2",
                &|v, _| v[L2] + v[O2],
                &|_, h| h[1],
            ),
            check(
                "right-exit probability: p = h1 / (rho + r1 + o1)",
                &|v, _| v[RIGHT],
                &move |v, h| {
                    let (_, r1, _, o1, _) = moments(v);
                    h[0] / (rho + r1 + o1)
                },
            ),
            check(
                "expected cycle length from ladder and overshoot moments",
                &|v, _| v[TAU],
                &move |v, h| {
                    let (_, r1, r2, o1, o2) = moments(v);
                    h[1] + h[0] * (rho * rho + 2.0 * rho * r1 + r2 - o2) / (rho + r1 + o1)
                },
            ),
            check(
                "loss per arbitrage from ladder and overshoot moments",
                &|v, _| v[LOSS],
                &move |v, h| {
                    let (_, r1, r2, o1, o2) = moments(v);
                    scale * (h[1] / 2.0 + h[0] * (r2 - o2) / (2.0 * (rho + r1 + o1)))
                },
            ),
        ])
    }

    /// Block-level loss per block against `P_trade × LVR` from excursions.
    pub fn decomposition_check(&self, chain: &ChainAggregate) -> Result<IdentityCheck> {
        self.require(2)?;
        let (arb_chain, se_chain) = chain.arb_per_block();
        let m = self.excursions.means();
        let se_exc = delta_se(&self.excursions, |v| v[LOSS] / v[TAU]);
        Ok(IdentityCheck {
            name: "loss per block = P_trade x LVR",
            lhs: arb_chain,
            rhs: m[LOSS] / m[TAU],
            se: (se_chain * se_chain + se_exc * se_exc).sqrt(),
        })
    }
}

/// Wald residuals with standard errors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WaldDiagnostics<T> {
    pub residual_1: Estimate<T>,
    pub residual_2: Estimate<T>,
}

/// One statistical identity `lhs = rhs` with the standard error of `lhs − rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub se: f64,
}

impl IdentityCheck {
    pub fn z(&self) -> f64 {
        (self.lhs - self.rhs) / self.se
    }

    pub fn holds(&self, k: f64) -> bool {
        (self.lhs - self.rhs).abs() <= k * self.se
    }
}

/// Excursion-level estimates. Conditional moments are `None` when the
/// corresponding exits (or leftover/ladder samples) were not observed.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimateReport<T> {
    pub p_trade: Estimate<T>,
    pub lvr_bar: Estimate<T>,
    pub arb_bar: Estimate<T>,
    pub p: Estimate<T>,
    pub l1: Option<Estimate<T>>,
    pub l2: Option<Estimate<T>>,
    pub r1: Option<Estimate<T>>,
    pub r2: Option<Estimate<T>>,
    pub o1: Option<Estimate<T>>,
    pub o2: Option<Estimate<T>>,
    pub h1: Option<Estimate<T>>,
    pub h2: Option<Estimate<T>>,
    pub e_tau: Estimate<T>,
    pub wald_residual_1: Estimate<T>,
    pub wald_residual_2: Estimate<T>,
    pub n_excursions: u64,
    pub right_exits: u64,
}

/// Sample moments of the ladder height.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LadderMoments<T> {
    pub h1: Estimate<T>,
    pub h2: Estimate<T>,
    pub n: u64,
}

impl LadderMoments<f64> {
    fn from_sums(s: &LadderSums) -> Self {
        LadderMoments {
            h1: Estimate::new(s.means()[0], s.mean_se(0)),
            h2: Estimate::new(s.means()[1], s.mean_se(1)),
            n: s.count(),
        }
    }
}

impl<T: Scalar> Estimate<T> {
    fn cast<U: Scalar>(self) -> Estimate<U> {
        Estimate::new(U::of(self.value.to_f64_lossless()), U::of(self.se.to_f64_lossless()))
    }
}

/// Sample moments of `n` ladder heights drawn sequentially from `rng`.
pub fn estimate_ladder_moments<T: Scalar, R: rand::Rng + ?Sized>(
    law: &BlockTimeLaw<T>,
    n: u64,
    config: &WalkConfig,
    rng: &mut R,
) -> Result<LadderMoments<T>> {
    if n < 2 {
        return Err(LvrError::InsufficientSamples { count: n, needed: 2 });
    }
    let mut sums = LadderSums::new();
    for _ in 0..n {
        let h = ladder_first_passage(law, config, rng)?.to_f64_lossless();
        sums.push(&[h, h * h]);
    }
    let m = LadderMoments::from_sums(&sums);
    Ok(LadderMoments {
        h1: m.h1.cast(),
        h2: m.h2.cast(),
        n,
    })
}

/// Seeding and parallelism for the batch runners.
///
/// Work is cut into fixed-size chunks, chunk `i` drawing from stream `i`
/// of the seed. Because accumulator merges are exact, results are
/// bit-identical for any worker count.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOptions {
    pub seed: u64,
    /// Thread count; `None` uses the global rayon pool.
    pub workers: Option<usize>,
    pub walk: WalkConfig,
    pub chunk_size: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            seed: 0,
            workers: None,
            walk: WalkConfig::default(),
            chunk_size: 1 << 16,
        }
    }
}

impl RunOptions {
    pub fn with_seed(seed: u64) -> Self {
        RunOptions {
            seed,
            ..Self::default()
        }
    }

    pub fn deterministic(mut self) -> Self {
        self.workers = Some(1);
        self
    }
}

// Stream-id domains keep the three samplers independent under one seed.
const LADDER_STREAMS: u64 = 1 << 62;
const CHAIN_STREAMS: u64 = 1 << 61;

fn chunked<A, F>(n: u64, opts: &RunOptions, empty: A, run: F) -> Result<A>
where
    A: Send,
    F: Fn(u64, u64) -> Result<A> + Sync + Send,
    A: Clone + Sync,
    A: Mergeable,
{
    let chunk = opts.chunk_size.max(1);
    let chunks = n.div_ceil(chunk);
    let job = || {
        (0..chunks)
            .into_par_iter()
            .map(|c| run(c, chunk.min(n - c * chunk)))
            .try_reduce(|| empty.clone(), |mut a, b| {
                a.merge_with(&b)?;
                Ok(a)
            })
    };
    match opts.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| LvrError::InvalidConfig(e.to_string()))?
            .install(job),
        None => job(),
    }
}

trait Mergeable {
    fn merge_with(&mut self, other: &Self) -> Result<()>;
}

impl Mergeable for MomentAccumulator {
    fn merge_with(&mut self, other: &Self) -> Result<()> {
        self.merge(other)
    }
}

impl Mergeable for ChainAggregate {
    fn merge_with(&mut self, other: &Self) -> Result<()> {
        self.merge(other);
        Ok(())
    }
}

/// Runs `n` excursions in parallel chunks and returns the merged sums.
pub fn simulate_excursions<T: Scalar>(
    params: &ModelParams<T>,
    law: &BlockTimeLaw<T>,
    n: u64,
    opts: &RunOptions,
) -> Result<MomentAccumulator> {
    let tag = run_tag(params, law);
    let empty = MomentAccumulator::new(params, law);
    chunked(n, opts, empty.clone(), |c, len| {
        let mut rng = RngStream::new(opts.seed, c);
        let mut acc = empty.clone();
        for _ in 0..len {
            let e = run_excursion_tagged(params, law, &opts.walk, tag, &mut rng)?;
            acc.push(&e);
        }
        Ok(acc)
    })
}

/// Adds `n` independent ladder heights to an accumulator.
pub fn simulate_ladder<T: Scalar>(
    acc: &mut MomentAccumulator,
    law: &BlockTimeLaw<T>,
    n: u64,
    opts: &RunOptions,
) -> Result<()> {
    let mut empty = acc.clone();
    empty.right_count = 0;
    empty.leftover_count = 0;
    empty.excursions = ExcursionSums::new();
    empty.ladder = LadderSums::new();
    let extra = chunked(n, opts, empty.clone(), |c, len| {
        let mut rng = RngStream::new(opts.seed, LADDER_STREAMS | c);
        let mut part = empty.clone();
        for _ in 0..len {
            part.accumulate_ladder(ladder_first_passage(law, &opts.walk, &mut rng)?);
        }
        Ok(part)
    })?;
    acc.merge(&extra)
}

/// Parallel ladder moments for a law (no excursions).
pub fn ladder_moments<T: Scalar>(
    law: &BlockTimeLaw<T>,
    n: u64,
    opts: &RunOptions,
) -> Result<LadderMoments<T>> {
    if n < 2 {
        return Err(LvrError::InsufficientSamples { count: n, needed: 2 });
    }
    let params = ModelParams::<T>::unit(T::one())?;
    let mut acc = MomentAccumulator::new(&params, law);
    simulate_ladder(&mut acc, law, n, opts)?;
    let m = acc.ladder_moments().expect("n >= 2");
    Ok(LadderMoments {
        h1: m.h1.cast(),
        h2: m.h2.cast(),
        n,
    })
}

/// Runs independent chains of `chunk_size` blocks in parallel.
pub fn simulate_chain<T: Scalar>(
    params: &ModelParams<T>,
    law: &BlockTimeLaw<T>,
    n_blocks: u64,
    opts: &RunOptions,
) -> Result<ChainAggregate> {
    let opts = RunOptions {
        chunk_size: opts.chunk_size.max(1 << 20),
        ..*opts
    };
    chunked(n_blocks, &opts, ChainAggregate::default(), |c, len| {
        let mut rng = RngStream::new(opts.seed, CHAIN_STREAMS | c);
        run_chain(params, law, len, &mut rng)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk::{run_excursion, ExitSide};

    fn left(tau: u64, d: f64) -> ExcursionOutcome<f64> {
        ExcursionOutcome {
            tau,
            side: ExitSide::Left,
            overshoot: d,
            s_tau: -d,
            loss_usd: d * d / 2.0,
            leftover: None,
            tag: 0,
        }
    }

    #[test]
    fn single_left_exit_update() {
        let params = ModelParams::unit(1.0f64).unwrap();
        let law = BlockTimeLaw::constant();
        let mut acc = MomentAccumulator::new(&params, &law);
        let mut e = left(1, 0.5);
        e.tag = acc.tag();
        acc.accumulate(&e).unwrap();
        assert_eq!(acc.count(), 1);
        assert_eq!(acc.right_count(), 0);
        assert_eq!(acc.sum_left_overshoot(), 0.5);
    }

    #[test]
    fn mismatched_tag_is_rejected() {
        let law = BlockTimeLaw::constant();
        let a = MomentAccumulator::new(&ModelParams::unit(1.0f64).unwrap(), &law);
        let mut b = MomentAccumulator::new(&ModelParams::unit(2.0f64).unwrap(), &law);
        assert!(matches!(b.accumulate(&left(1, 0.1)), Err(LvrError::ParameterMismatch)));
        assert!(matches!(b.merge(&a), Err(LvrError::ParameterMismatch)));
    }

    #[test]
    fn finalize_needs_two_samples() {
        let params = ModelParams::unit(1.0f64).unwrap();
        let law = BlockTimeLaw::constant();
        let mut acc = MomentAccumulator::new(&params, &law);
        assert!(matches!(
            acc.finalize::<f64>(),
            Err(LvrError::InsufficientSamples { count: 0, .. })
        ));
        assert!(acc.wald_diagnostics::<f64>().is_err());
        let mut e = left(1, 0.5);
        e.tag = acc.tag();
        acc.accumulate(&e).unwrap();
        assert!(acc.finalize::<f64>().is_err());
        acc.accumulate(&e).unwrap();
        assert!(acc.finalize::<f64>().is_ok());
    }

    #[test]
    fn report_identities_hold_as_computed() {
        let params = ModelParams::unit(1.0f64).unwrap();
        let law = BlockTimeLaw::exponential();
        let acc = simulate_excursions(&params, &law, 20_000, &RunOptions::with_seed(3)).unwrap();
        let r = acc.finalize::<f64>().unwrap();
        assert_eq!(r.p_trade.value, 1.0 / r.e_tau.value);
        assert_eq!(r.arb_bar.value, r.p_trade.value * r.lvr_bar.value);
        assert_eq!(r.n_excursions, 20_000);
        assert!(r.o1.is_some() && r.h1.is_some());
    }

    #[test]
    fn merge_of_streams_matches_single_run() {
        let params = ModelParams::unit(1.5f64).unwrap();
        let law = BlockTimeLaw::uniform(0.0, 2.0).unwrap();
        let cfg = WalkConfig::default();
        let mut whole = MomentAccumulator::new(&params, &law);
        let mut a = whole.clone();
        let mut b = whole.clone();
        let mut rng_a = RngStream::new(5, 0);
        let mut rng_b = RngStream::new(5, 1);
        let xs: Vec<_> = (0..3000)
            .map(|_| run_excursion(&params, &law, &cfg, &mut rng_a).unwrap())
            .collect();
        let ys: Vec<_> = (0..2000)
            .map(|_| run_excursion(&params, &law, &cfg, &mut rng_b).unwrap())
            .collect();
        for e in &xs {
            a.accumulate(e).unwrap();
        }
        for e in &ys {
            b.accumulate(e).unwrap();
        }
        for e in ys.iter().chain(xs.iter()) {
            whole.accumulate(e).unwrap();
        }
        let mut merged = b.clone();
        merged.merge(&a).unwrap();
        assert_eq!(merged, whole);
        assert_eq!(merged.finalize::<f64>().unwrap(), whole.finalize::<f64>().unwrap());
    }

    #[test]
    fn parallel_result_is_independent_of_workers() {
        let params = ModelParams::unit(0.7f64).unwrap();
        let law = BlockTimeLaw::exponential();
        let base = RunOptions {
            chunk_size: 1000,
            ..RunOptions::with_seed(21)
        };
        let one = simulate_excursions(&params, &law, 10_500, &base.deterministic()).unwrap();
        let many = simulate_excursions(
            &params,
            &law,
            10_500,
            &RunOptions {
                workers: Some(3),
                ..base
            },
        )
        .unwrap();
        assert_eq!(one, many);
        assert_eq!(one.count(), 10_500);
    }

    #[test]
    fn ladder_needs_two_samples() {
        let law = BlockTimeLaw::<f64>::constant();
        let mut rng = RngStream::new(0, 0);
        assert!(estimate_ladder_moments(&law, 1, &WalkConfig::default(), &mut rng).is_err());
        let m = estimate_ladder_moments(&law, 1000, &WalkConfig::default(), &mut rng).unwrap();
        assert_eq!(m.n, 1000);
        assert!(m.h1.value > 0.0);
    }
}
