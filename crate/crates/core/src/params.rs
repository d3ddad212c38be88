//! Market and AMM parameters with the per-block normalization.

use crate::error::{LvrError, Result};
use crate::scalar::Scalar;

/// Volatility, block time, spread and liquidity plus the two derived
/// normalized quantities `sigma_b = sigma·√t` and `rho_b = gamma / sigma_b`.
///
/// The derived values are stored so each carries exactly one rounding.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams<T> {
    sigma: T,
    t: T,
    gamma: T,
    ell: T,
    sigma_b: T,
    rho_b: T,
    fingerprint: u64,
}

/// Builds parameters from raw market inputs; all must be strictly positive.
pub fn derive_params<T: Scalar>(sigma: T, t: T, gamma: T, ell: T) -> Result<ModelParams<T>> {
    positive("sigma", sigma)?;
    positive("t", t)?;
    positive("gamma", gamma)?;
    positive("ell", ell)?;
    let sigma_b = sigma * t.sqrt();
    Ok(ModelParams {
        sigma,
        t,
        gamma,
        ell,
        sigma_b,
        rho_b: gamma / sigma_b,
        fingerprint: 0,
    }
    .stamped())
}

fn positive<T: Scalar>(name: &'static str, v: T) -> Result<()> {
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

impl<T: Scalar> ModelParams<T> {
    /// Parameters given directly in per-block units: `t = 1`, `sigma = sigma_b`,
    /// `gamma = rho_b·sigma_b`. A zero-width strip (`rho_b = 0`) is accepted
    /// here so that the degenerate limit can be evaluated.
    pub fn normalized(rho_b: T, sigma_b: T, ell: T) -> Result<Self> {
        if !rho_b.is_finite() || rho_b < T::zero() {
            return Err(LvrError::param(
                "rho_b",
                rho_b.to_f64_lossless(),
                "must be finite and nonnegative",
            ));
        }
        positive("sigma_b", sigma_b)?;
        positive("ell", ell)?;
        Ok(ModelParams {
            sigma: sigma_b,
            t: T::one(),
            gamma: rho_b * sigma_b,
            ell,
            sigma_b,
            rho_b,
            fingerprint: 0,
        }
        .stamped())
    }

    fn stamped(mut self) -> Self {
        use std::hash::{Hash, Hasher};
        let mut h = std::collections::hash_map::DefaultHasher::new();
        for v in [self.sigma, self.t, self.gamma, self.ell, self.sigma_b, self.rho_b] {
            v.to_f64_lossless().to_bits().hash(&mut h);
        }
        self.fingerprint = h.finish();
        self
    }

    /// `rho_b` with unit volatility and unit liquidity.
    pub fn unit(rho_b: T) -> Result<Self> {
        Self::normalized(rho_b, T::one(), T::one())
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn t(&self) -> T {
        self.t
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn ell(&self) -> T {
        self.ell
    }

    pub fn sigma_b(&self) -> T {
        self.sigma_b
    }

    pub fn rho_b(&self) -> T {
        self.rho_b
    }

    /// USD cost of an arbitrage with normalized overshoot `d`.
    #[inline]
    pub fn loss_usd(&self, overshoot: T) -> T {
        let dev = self.sigma_b * overshoot;
        self.ell / T::of(2.0) * dev * dev
    }

    /// Identity used to tag accumulators built from these parameters.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }
}

/// Block-boundary state `(M_n, LVR_n, ARB_n)` of the chain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainState<T> {
    /// Position inside `[0, rho_b]` in normalized units.
    pub m: T,
    /// Loss incurred in the last block (USD).
    pub lvr_last: T,
    /// Cumulative loss (USD).
    pub arb_cum: T,
}

impl<T: Scalar> Default for ChainState<T> {
    fn default() -> Self {
        ChainState {
            m: T::zero(),
            lvr_last: T::zero(),
            arb_cum: T::zero(),
        }
    }
}

impl<T: Scalar> ChainState<T> {
    /// Advances one block with normalized increment `x`. Returns the exit
    /// overshoot when an arbitrage fires.
    #[inline]
    pub fn step(&mut self, params: &ModelParams<T>, x: T) -> Option<T> {
        let next = self.m + x;
        let rho = params.rho_b();
        if next < T::zero() || next > rho {
            let overshoot = if next < T::zero() { -next } else { next - rho };
            self.lvr_last = params.loss_usd(overshoot);
            self.arb_cum += self.lvr_last;
            self.m = T::zero();
            Some(overshoot)
        } else {
            self.m = next;
            self.lvr_last = T::zero();
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_values_by_substitution() {
        let p = derive_params(0.05f64, 4.0, 0.2, 1.0).unwrap();
        assert!((p.sigma_b() - 0.1).abs() < 1e-15);
        assert!((p.rho_b() - 2.0).abs() < 1e-14);

        let p = derive_params(1.0f64, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(p.sigma_b(), 1.0);
        assert_eq!(p.rho_b(), 1.0);

        let p = derive_params(0.02f64, 0.25, 0.05, 10.0).unwrap();
        assert!((p.sigma_b() - 0.01).abs() < 1e-15);
        assert!((p.rho_b() - 5.0).abs() < 1e-12);
        assert_eq!(p.rho_b(), p.gamma() / p.sigma_b());
    }

    #[test]
    fn rejects_nonpositive_inputs() {
        assert!(derive_params(0.0f64, 1.0, 1.0, 1.0).is_err());
        assert!(derive_params(1.0f64, -1.0, 1.0, 1.0).is_err());
        assert!(derive_params(1.0f64, 1.0, 0.0, 1.0).is_err());
        assert!(derive_params(1.0f64, 1.0, 1.0, f64::NAN).is_err());
        assert!(ModelParams::normalized(-0.1f64, 1.0, 1.0).is_err());
        assert!(ModelParams::normalized(0.0f64, 1.0, 1.0).is_ok());
    }

    #[test]
    fn chain_state_step_rules() {
        let p = ModelParams::normalized(1.0f64, 2.0, 3.0).unwrap();
        let mut s = ChainState::default();
        assert_eq!(s.step(&p, 0.4), None);
        assert_eq!(s.m, 0.4);
        // exits right by 0.5 normalized -> (3/2)·(2·0.5)² = 1.5
        assert_eq!(s.step(&p, 1.1), Some(0.5));
        assert_eq!(s.m, 0.0);
        assert!((s.lvr_last - 1.5).abs() < 1e-15);
        assert!((s.arb_cum - 1.5).abs() < 1e-15);
        // the closed interval keeps boundary values
        assert_eq!(s.step(&p, 1.0), None);
        assert_eq!(s.lvr_last, 0.0);
    }
}
