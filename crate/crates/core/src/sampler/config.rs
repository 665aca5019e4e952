//! Run-length, seeding and adaptation settings.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::GroupParams;

/// Blocks held fixed at their initial values.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrozenBlocks {
    pub labels: bool,
    pub trajectories: bool,
    pub delta: bool,
    pub weights: bool,
    pub recruitment: bool,
    pub survival: bool,
    pub capture: bool,
}

impl FrozenBlocks {
    /// Every parameter block frozen; only labels and trajectories move.
    pub fn parameters() -> Self {
        Self {
            delta: true,
            weights: true,
            recruitment: true,
            survival: true,
            capture: true,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McmcConfig {
    pub chains: usize,
    pub iters: usize,
    pub burnin: usize,
    pub thin: usize,
    pub seed: u64,
    /// Acceptance rate the burn-in adaptation steers towards.
    pub target_accept: f64,
    /// Initial random-walk scale on the logit scale.
    pub initial_step: f64,
    /// Robbins-Monro gain exponent in `(0.5, 1]`.
    pub adapt_decay: f64,
    pub frozen: FrozenBlocks,
    /// Starting parameters; drawn from the priors when absent.
    pub init: Option<GroupParams>,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            chains: 2,
            iters: 20_000,
            burnin: 5_000,
            thin: 2,
            seed: 1,
            target_accept: 0.35,
            initial_step: 0.5,
            adapt_decay: 0.6,
            frozen: FrozenBlocks::default(),
            init: None,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.chains == 0 {
            return Err(Error::invalid("at least one chain is required"));
        }
        if self.burnin >= self.iters {
            return Err(Error::invalid(format!(
                "burn-in ({}) must be smaller than the number of iterations ({})",
                self.burnin, self.iters
            )));
        }
        if self.thin == 0 {
            return Err(Error::invalid("thin must be at least 1"));
        }
        if (self.iters - self.burnin) / self.thin == 0 {
            return Err(Error::invalid("no draws would be retained; lower thin or burn-in"));
        }
        if !(self.target_accept > 0.0 && self.target_accept < 1.0) {
            return Err(Error::invalid("target acceptance must lie in (0, 1)"));
        }
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return Err(Error::invalid("initial step must be positive"));
        }
        if !(self.adapt_decay > 0.5 && self.adapt_decay <= 1.0) {
            return Err(Error::invalid("adaptation decay must lie in (0.5, 1]"));
        }
        let f = &self.frozen;
        let moving = !(f.survival && f.capture && f.delta && f.weights);
        if (f.labels || f.trajectories) && moving {
            // Survival, capture, delta and weight moves sum the latent state
            // out and are only valid when it is redrawn afterwards.
            return Err(Error::invalid(
                "freezing labels or trajectories requires freezing survival, capture, delta and weights",
            ));
        }
        Ok(())
    }

    /// Retained draws per chain.
    pub fn draws_per_chain(&self) -> usize {
        (self.iters - self.burnin) / self.thin
    }

    /// Whether zero-based iteration `it` is kept.
    pub fn retains(&self, it: usize) -> bool {
        it >= self.burnin && (it - self.burnin + 1).is_multiple_of(self.thin)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn retained_count_matches_formula() {
        for &(iters, burnin, thin) in &[(100, 10, 1), (100, 10, 2), (101, 10, 3), (20_000, 5_000, 2)] {
            let cfg = McmcConfig { iters, burnin, thin, ..McmcConfig::default() };
            let kept = (0..iters).filter(|&it| cfg.retains(it)).count();
            assert_eq!(kept, cfg.draws_per_chain());
            assert_eq!(kept, (iters - burnin) / thin);
        }
    }

    #[test]
    fn rejects_bad_lengths() {
        let cfg = McmcConfig { iters: 10, burnin: 10, ..McmcConfig::default() };
        assert!(cfg.validate().is_err());
        let cfg = McmcConfig { thin: 0, ..McmcConfig::default() };
        assert!(cfg.validate().is_err());
        McmcConfig::default().validate().unwrap();
    }
}
