//! Retained posterior draws.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::AbundanceDraw;

/// Alive window of one entered row in one draw (inclusive occasions).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    pub row: u32,
    pub entry: u16,
    pub exit: u16,
    pub label: u8,
}

/// Draws of one chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainDraws {
    pub chain: usize,
    /// Zero-based iteration of each retained draw.
    pub iters: Vec<usize>,
    /// Flattened parameters, one vector per draw.
    pub params: Vec<Vec<f64>>,
    pub abundance: Vec<AbundanceDraw>,
    /// Windows of every entered row, one list per draw.
    pub trajectories: Vec<Vec<Trajectory>>,
    /// Labels of the observed rows, one vector per draw.
    pub labels: Vec<Vec<u8>>,
    /// `ln p(y_i | theta)` for the observed rows followed by the shared zero row.
    pub pointwise: Vec<Vec<f64>>,
    /// Post-burn-in acceptance rate per Metropolis block.
    pub acceptance: Vec<(String, f64)>,
}

impl ChainDraws {
    pub fn new(chain: usize) -> Self {
        Self {
            chain,
            iters: Vec::new(),
            params: Vec::new(),
            abundance: Vec::new(),
            trajectories: Vec::new(),
            labels: Vec::new(),
            pointwise: Vec::new(),
            acceptance: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.iters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iters.is_empty()
    }
}

/// Posterior draws of a multi-chain fit, merged in chain order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrawStore {
    pub names: Vec<String>,
    pub group_names: Vec<String>,
    pub n_observed: usize,
    pub n_augmented: usize,
    pub occasions: usize,
    pub chains: Vec<ChainDraws>,
}

/// Derived scalar traces available next to the model parameters.
pub const N_SUPER: &str = "N_super";

impl DrawStore {
    pub fn groups(&self) -> usize {
        self.group_names.len()
    }

    pub fn total_rows(&self) -> usize {
        self.n_observed + self.n_augmented
    }

    pub fn draws_per_chain(&self) -> usize {
        self.chains.iter().map(ChainDraws::len).min().unwrap_or(0)
    }

    pub fn total_draws(&self) -> usize {
        self.chains.iter().map(ChainDraws::len).sum()
    }

    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Per-chain traces of a parameter or of a derived quantity
    /// (`N_super`, `N[t]`, `N_super[g]`, `psi[g]`).
    pub fn trace(&self, name: &str) -> Result<Vec<Vec<f64>>> {
        if let Some(j) = self.param_index(name) {
            return Ok(self.chains.iter().map(|c| c.params.iter().map(|p| p[j]).collect()).collect());
        }
        let per_draw = |f: &dyn Fn(&AbundanceDraw) -> f64| -> Vec<Vec<f64>> {
            self.chains.iter().map(|c| c.abundance.iter().map(f).collect()).collect()
        };
        if name == N_SUPER {
            return Ok(per_draw(&|a| a.n_super as f64));
        }
        let inner = |prefix: &str| name.strip_prefix(prefix).and_then(|r| r.strip_suffix(']'));
        if let Some(t) = inner("N[").and_then(|s| s.parse::<usize>().ok()) {
            if t >= 1 && t <= self.occasions {
                return Ok(per_draw(&|a| a.n_t[t - 1] as f64));
            }
        }
        if let Some(g) = inner("N_super[").and_then(|s| self.group_names.iter().position(|n| n == s)) {
            return Ok(per_draw(&|a| a.n_group[g] as f64));
        }
        if let Some(g) = inner("psi[").and_then(|s| self.group_names.iter().position(|n| n == s)) {
            return Ok(per_draw(&|a| a.psi[g]));
        }
        Err(Error::invalid(format!("unknown parameter `{name}`")))
    }

    /// All chains of a trace concatenated in chain order.
    pub fn pooled(&self, name: &str) -> Result<Vec<f64>> {
        Ok(self.trace(name)?.into_iter().flatten().collect())
    }

    /// Names of the derived abundance traces.
    pub fn derived_names(&self) -> Vec<String> {
        let mut out = vec![N_SUPER.to_string()];
        out.extend((1..=self.occasions).map(|t| format!("N[{t}]")));
        out.extend(self.group_names.iter().map(|g| format!("N_super[{g}]")));
        out.extend(self.group_names.iter().map(|g| format!("psi[{g}]")));
        out
    }

    /// Pointwise log-likelihood matrix (draws x (D + 1)) and column weights
    /// (1 for observed rows, `M - D` for the shared zero row).
    pub fn pointwise(&self) -> (Vec<&[f64]>, Vec<f64>) {
        let rows: Vec<&[f64]> =
            self.chains.iter().flat_map(|c| c.pointwise.iter().map(Vec::as_slice)).collect();
        let mut weights = vec![1.0; self.n_observed];
        if self.n_augmented > 0 {
            weights.push(self.n_augmented as f64);
        }
        (rows, weights)
    }

    /// Membership probabilities of the observed rows: per-draw label frequencies.
    pub fn membership(&self) -> Vec<Vec<f64>> {
        let g = self.groups();
        let mut counts = vec![vec![0usize; g]; self.n_observed];
        let mut total = 0usize;
        for chain in &self.chains {
            for labels in &chain.labels {
                total += 1;
                for (i, &c) in labels.iter().enumerate() {
                    counts[i][c as usize] += 1;
                }
            }
        }
        counts
            .into_iter()
            .map(|row| row.into_iter().map(|c| c as f64 / total.max(1) as f64).collect())
            .collect()
    }
}
