//! Full parameter state of a mixture model.

use serde::{Deserialize, Serialize};

use super::likelihood::capture_prob;
use super::spec::Layout;
use crate::error::{Error, Result};

/// Parameter values stored per class (see [`Layout`]).
///
/// * `rho[k][t]`: recruitment probability of class `k` at occasion `t`.
/// * `phi[k]`: per-unit survival. One value when constant in time, otherwise
///   `T - 1` values where entry `t - 1` governs the transition into occasion `t`.
/// * `mu[k]` + `tau[k'][t]`: capture probability on the logit scale.
/// * `delta`: probability a part-time individual is absent while alive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupParams {
    pub weights: Vec<f64>,
    pub rho: Vec<Vec<f64>>,
    pub phi: Vec<Vec<f64>>,
    pub mu: Vec<f64>,
    pub tau: Vec<Vec<f64>>,
    pub delta: f64,
}

impl GroupParams {
    /// Neutral starting values: uniform weights, `rho = 0.1`, `phi = 0.5` (ordered
    /// chains spread evenly), `p = 0.5`, `delta = 0.5` when thinning is present.
    pub fn neutral(layout: &Layout, occasions: usize) -> Self {
        let phi_len = if layout.phi_time { occasions.saturating_sub(1) } else { 1 };
        let phi = (0..layout.phi_classes)
            .map(|k| vec![(k + 1) as f64 / (layout.phi_classes + 1) as f64; phi_len])
            .collect();
        Self {
            weights: vec![1.0 / layout.groups as f64; layout.groups],
            rho: vec![vec![0.1; occasions]; layout.rho_classes],
            phi,
            mu: vec![0.0; layout.mu_classes],
            tau: vec![vec![0.0; occasions]; layout.tau_classes],
            delta: if layout.has_thinning() { 0.5 } else { 0.0 },
        }
    }

    pub fn occasions(&self) -> usize {
        self.rho.first().map_or(0, Vec::len)
    }

    /// Per-unit (uncompounded) survival for group `g` on the transition into occasion `t >= 1`.
    pub fn survival_base(&self, layout: &Layout, g: usize, t: usize) -> f64 {
        let row = &self.phi[layout.phi_class[g]];
        if layout.phi_time {
            row[t - 1]
        } else {
            row[0]
        }
    }

    pub fn recruitment(&self, layout: &Layout, g: usize, t: usize) -> f64 {
        self.rho[layout.rho_class[g]][t]
    }

    /// Occasion effect on the logit scale (0 when capture is constant in time).
    pub fn tau_at(&self, layout: &Layout, g: usize, t: usize) -> f64 {
        layout.tau_class[g].map_or(0.0, |k| self.tau[k][t])
    }

    /// Capture probability of group `g` at occasion `t`, including thinning.
    pub fn capture(&self, layout: &Layout, g: usize, t: usize) -> f64 {
        capture_prob(self.mu[layout.mu_class[g]], self.tau_at(layout, g, t), self.delta, layout.thinned[g])
    }

    /// Capture probability given presence (no thinning).
    pub fn capture_present(&self, layout: &Layout, g: usize, t: usize) -> f64 {
        capture_prob(self.mu[layout.mu_class[g]], self.tau_at(layout, g, t), 0.0, false)
    }

    /// Checks shapes, domains and the identifiability constraints.
    pub fn validate(&self, layout: &Layout, occasions: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::invalid(msg));
        if self.weights.len() != layout.groups {
            return bad(format!("expected {} weights, got {}", layout.groups, self.weights.len()));
        }
        if self.weights.iter().any(|&w| !(0.0..=1.0).contains(&w)) {
            return bad("weights must lie in [0, 1]".into());
        }
        let wsum: f64 = self.weights.iter().sum();
        if (wsum - 1.0).abs() > 1e-9 {
            return bad(format!("weights sum to {wsum}, expected 1"));
        }
        if self.rho.len() != layout.rho_classes || self.rho.iter().any(|r| r.len() != occasions) {
            return bad(format!("recruitment must be {} x {occasions}", layout.rho_classes));
        }
        if self.rho.iter().flatten().any(|&r| !(0.0..=1.0).contains(&r)) {
            return bad("recruitment probabilities must lie in [0, 1]".into());
        }
        let phi_len = if layout.phi_time { occasions.saturating_sub(1) } else { 1 };
        if self.phi.len() != layout.phi_classes || self.phi.iter().any(|r| r.len() != phi_len) {
            return bad(format!("survival must be {} x {phi_len}", layout.phi_classes));
        }
        if self.phi.iter().flatten().any(|&p| !(0.0..=1.0).contains(&p)) {
            return bad("survival probabilities must lie in [0, 1]".into());
        }
        if self.mu.len() != layout.mu_classes || self.mu.iter().any(|m| !m.is_finite()) {
            return bad(format!("expected {} finite capture intercepts", layout.mu_classes));
        }
        if self.tau.len() != layout.tau_classes || self.tau.iter().any(|r| r.len() != occasions) {
            return bad(format!("occasion effects must be {} x {occasions}", layout.tau_classes));
        }
        for (k, row) in self.tau.iter().enumerate() {
            let s: f64 = row.iter().sum();
            if s.abs() > 1e-8 {
                return bad(format!("occasion effects of class {k} sum to {s}, expected 0"));
            }
        }
        if layout.has_thinning() {
            if !(0.0..1.0).contains(&self.delta) {
                return bad(format!("delta must lie in [0, 1), got {}", self.delta));
            }
        } else if self.delta != 0.0 {
            return bad("delta is only defined for models with a part-time group".into());
        }
        Ok(())
    }

    /// Column names matching [`GroupParams::flatten`].
    pub fn names(layout: &Layout, group_names: &[String], occasions: usize, rpt: bool) -> Vec<String> {
        let class_name = |classes: usize, k: usize| -> String {
            if classes == 1 {
                String::new()
            } else {
                group_names[k].clone()
            }
        };
        let mut out = Vec::new();
        for g in group_names {
            out.push(format!("w[{g}]"));
        }
        for k in 0..layout.rho_classes {
            for t in 0..occasions {
                let c = class_name(layout.rho_classes, k);
                out.push(if c.is_empty() {
                    format!("rho[{}]", t + 1)
                } else {
                    format!("rho[{c},{}]", t + 1)
                });
            }
        }
        let phi_len = if layout.phi_time { occasions.saturating_sub(1) } else { 1 };
        for k in 0..layout.phi_classes {
            let c = if rpt { ["T", "NT"][k].to_string() } else { class_name(layout.phi_classes, k) };
            for j in 0..phi_len {
                let name = match (c.is_empty(), layout.phi_time) {
                    (true, false) => "phi".to_string(),
                    (false, false) => format!("phi[{c}]"),
                    (true, true) => format!("phi[{}]", j + 2),
                    (false, true) => format!("phi[{c},{}]", j + 2),
                };
                out.push(name);
            }
        }
        for k in 0..layout.mu_classes {
            let c = class_name(layout.mu_classes, k);
            out.push(if c.is_empty() { "mu".into() } else { format!("mu[{c}]") });
        }
        for k in 0..layout.tau_classes {
            let c = class_name(layout.tau_classes, k);
            for t in 0..occasions {
                out.push(if c.is_empty() {
                    format!("tau[{}]", t + 1)
                } else {
                    format!("tau[{c},{}]", t + 1)
                });
            }
        }
        if layout.has_thinning() {
            out.push("delta".into());
        }
        out
    }

    /// Flattens all values in the order of [`GroupParams::names`].
    pub fn flatten(&self, layout: &Layout) -> Vec<f64> {
        let mut out = Vec::new();
        out.extend_from_slice(&self.weights);
        for row in &self.rho {
            out.extend_from_slice(row);
        }
        for row in &self.phi {
            out.extend_from_slice(row);
        }
        out.extend_from_slice(&self.mu);
        for row in &self.tau {
            out.extend_from_slice(row);
        }
        if layout.has_thinning() {
            out.push(self.delta);
        }
        out
    }
}

/// Recentres a vector so it sums to zero.
pub fn recentre(values: &mut [f64]) {
    if values.is_empty() {
        return;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    for v in values.iter_mut() {
        *v -= mean;
    }
}
