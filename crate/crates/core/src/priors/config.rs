//! Hyperparameters of the fitted model.

use serde::{Deserialize, Serialize};

use super::chain::OrderedChainSpec;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriorConfig {
    /// Variance of the Normal prior on each capture intercept.
    pub mu_var: f64,
    /// Variance of the Normal prior on each occasion effect.
    pub tau_var: f64,
    /// Beta shapes for the part-time absence probability.
    pub delta: (f64, f64),
    /// Symmetric Dirichlet concentration for the mixture weights.
    pub dirichlet: f64,
    /// Overrides the default ordered survival prior.
    pub survival_chain: Option<OrderedChainSpec>,
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self { mu_var: 10.0, tau_var: 0.25, delta: (1.0, 1.0), dirichlet: 1.0, survival_chain: None }
    }
}

impl PriorConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = |x: f64| x > 0.0 && x.is_finite();
        if !pos(self.mu_var) || !pos(self.tau_var) {
            return Err(Error::invalid("prior variances must be positive"));
        }
        if !pos(self.delta.0) || !pos(self.delta.1) {
            return Err(Error::invalid("delta prior shapes must be positive"));
        }
        if !pos(self.dirichlet) {
            return Err(Error::invalid("Dirichlet concentration must be positive"));
        }
        if let Some(chain) = &self.survival_chain {
            OrderedChainSpec::new(chain.first, chain.links.clone())?;
        }
        Ok(())
    }

    /// Survival prior for `classes` ordered classes.
    pub fn survival_chain(&self, classes: usize) -> Result<OrderedChainSpec> {
        match &self.survival_chain {
            Some(chain) if chain.len() == classes => Ok(chain.clone()),
            Some(chain) => Err(Error::invalid(format!(
                "survival prior has {} components but the model has {classes} survival classes",
                chain.len()
            ))),
            None => Ok(OrderedChainSpec::survival_default(classes)),
        }
    }
}
