//! Loss-versus-rebalancing (LVR) of AMM liquidity providers under arbitrary
//! block-time laws.
//!
//! The log-price, observed at block boundaries and measured in units of the
//! per-block volatility `sigma_b`, is a driftless random walk with
//! increments `N(0, U)`, `U ~ μ`, `E[μ] = 1`. An arbitrage fires whenever the
//! walk leaves the no-arbitrage strip `[0, rho_b]` and costs the LP
//! `(ell/2)(sigma_b·overshoot)²`. This crate provides
//!
//! * [`law`] and [`params`]: block-time laws and the model normalization,
//! * [`walk`]: the excursion, chain and ladder-height samplers,
//! * [`estimators`]: mergeable accumulators and Monte-Carlo estimates,
//! * [`analytic`]: closed forms for Poisson and constant block times, the
//!   general asymptotic regime and the `C_μ` series,
//! * [`experiments`]: reproduction pipelines and their CSV output.
//!
//! Every numeric type is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the common `f64` instantiation.

pub mod analytic;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod law;
pub mod params;
pub mod rng;
pub mod scalar;
pub mod stats;
pub mod walk;

pub use analytic::{
    c_mu, constant_closed_form, expected_tau_from_moments, general_asymptotic,
    lvr_from_moments, poisson_closed_form, zeta_half, CMuEstimate, ErrorOrder, Regime,
    TheoryReport,
};
pub use error::{LvrError, Result};
pub use estimators::{
    estimate_ladder_moments, ladder_moments, simulate_chain, simulate_excursions,
    simulate_ladder, EstimateReport, IdentityCheck, LadderMoments, MomentAccumulator,
    RunOptions, WaldDiagnostics,
};
pub use law::{make_block_law, BlockTimeLaw, LawKind, RawLaw};
pub use params::{derive_params, ChainState, ModelParams};
pub use rng::RngStream;
pub use scalar::Scalar;
pub use stats::Estimate;
pub use walk::{
    ladder_first_passage, run_chain, run_excursion, sample_increment, ChainAggregate,
    ExcursionOutcome, ExitSide, WalkConfig,
};

pub type Law = BlockTimeLaw<f64>;
pub type Params = ModelParams<f64>;
pub type Outcome = ExcursionOutcome<f64>;
pub type Report = EstimateReport<f64>;
pub type Theory = TheoryReport<f64>;

pub type Law32 = BlockTimeLaw<f32>;
pub type Params32 = ModelParams<f32>;
pub type Outcome32 = ExcursionOutcome<f32>;
pub type Report32 = EstimateReport<f32>;
pub type Theory32 = TheoryReport<f32>;
