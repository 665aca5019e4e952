//! Parameter updates given the latent state: conjugate draws for weights and
//! recruitment, adaptive random-walk Metropolis for the occasion effects.
//!
//! Capture terms see alive cells only, with presence integrated out, so
//! thinned groups are detected with probability `(1 - delta) p`.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::state::{sample_beta, sample_dirichlet, FitContext};
use crate::error::{Error, Result};
use crate::model::{CaptureData, GroupParams, LatentState, Layout};

/// `ln(1 + e^x)` without overflow.
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// `ln logistic(x)`.
pub fn ln_logistic(x: f64) -> f64 {
    -softplus(-x)
}

/// Sufficient statistics of the latent state, indexed `[g * T + t]`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Tallies {
    pub groups: usize,
    pub occasions: usize,
    /// Not yet entered before `t`.
    pub at_risk: Vec<usize>,
    /// Entering at `t`.
    pub recruits: Vec<usize>,
    /// Alive at `t - 1` and at `t`.
    pub survived: Vec<usize>,
    /// Alive at `t - 1`, departed at `t`.
    pub departed: Vec<usize>,
    /// Alive at `t`.
    pub exposed: Vec<usize>,
    /// Alive and captured at `t`.
    pub captured: Vec<usize>,
    pub label_counts: Vec<usize>,
}

impl Tallies {
    pub fn compute(latent: &LatentState, data: &CaptureData, groups: usize) -> Result<Self> {
        let n = latent.occasions();
        let cells = groups * n;
        let mut t = Tallies {
            groups,
            occasions: n,
            at_risk: vec![0; cells],
            recruits: vec![0; cells],
            survived: vec![0; cells],
            departed: vec![0; cells],
            exposed: vec![0; cells],
            captured: vec![0; cells],
            label_counts: vec![0; groups],
        };
        for i in 0..latent.rows() {
            let g = latent.labels[i];
            if g >= groups {
                return Err(Error::invariant(format!("row {} carries label {g} of {groups}", i + 1)));
            }
            t.label_counts[g] += 1;
            let z = latent.z_row(i);
            let r = latent.r_row(i);
            let y = data.history(i);
            let base = g * n;
            for s in 0..n {
                let c = base + s;
                if r[s] == 1 {
                    t.at_risk[c] += 1;
                    t.recruits[c] += z[s] as usize;
                }
                if s > 0 && z[s - 1] == 1 {
                    if z[s] == 1 {
                        t.survived[c] += 1;
                    } else {
                        t.departed[c] += 1;
                    }
                }
                if z[s] == 1 {
                    t.exposed[c] += 1;
                    t.captured[c] += y[s] as usize;
                } else if y[s] == 1 {
                    return Err(Error::invariant(format!(
                        "row {} captured at occasion {} while not alive",
                        i + 1,
                        s + 1
                    )));
                }
            }
        }
        if t.recruits.iter().zip(&t.at_risk).any(|(r, a)| r > a) {
            return Err(Error::invariant("more recruits than individuals at risk"));
        }
        Ok(t)
    }
}

/// Robbins-Monro tuned random-walk scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepAdapter {
    pub log_step: f64,
    pub proposed: u64,
    pub accepted: u64,
}

impl StepAdapter {
    pub fn new(step: f64) -> Self {
        Self { log_step: step.ln(), proposed: 0, accepted: 0 }
    }

    pub fn step(&self) -> f64 {
        self.log_step.exp()
    }

    /// Records an outcome; nudges the scale while `iteration` is in burn-in.
    pub fn record(&mut self, accepted: bool, adapt: Option<(usize, f64, f64)>) {
        match adapt {
            Some((iteration, target, decay)) => {
                let gain = 1.0 / ((iteration + 1) as f64).powf(decay);
                let signal = if accepted { 1.0 } else { 0.0 } - target;
                self.log_step = (self.log_step + gain * signal).clamp(-12.0, 3.0);
            }
            None => {
                self.proposed += 1;
                self.accepted += accepted as u64;
            }
        }
    }

    /// Post-burn-in acceptance rate.
    pub fn rate(&self) -> f64 {
        if self.proposed == 0 {
            f64::NAN
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }
}

/// One adapter per Metropolis component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Steps {
    /// `[class][time index]`.
    pub survival: Vec<Vec<StepAdapter>>,
    pub mu: Vec<StepAdapter>,
    /// `[class][free coordinate]`.
    pub tau: Vec<Vec<StepAdapter>>,
    pub delta: StepAdapter,
    /// One per adjacent pair of mixture weights.
    pub weights: Vec<StepAdapter>,
}

impl Steps {
    pub fn new(layout: &Layout, phi_len: usize, occasions: usize, step: f64) -> Self {
        let a = StepAdapter::new(step);
        Self {
            survival: vec![vec![a.clone(); phi_len]; layout.phi_classes],
            mu: vec![a.clone(); layout.mu_classes],
            tau: vec![vec![a.clone(); occasions.saturating_sub(1)]; layout.tau_classes],
            delta: a.clone(),
            weights: vec![a; weight_pairs(layout.groups).len()],
        }
    }

    /// `(block name, post-burn-in acceptance rate)` pairs.
    pub fn acceptance(&self) -> Vec<(String, f64)> {
        let mean = |v: &mut dyn Iterator<Item = &StepAdapter>| {
            let (mut p, mut a) = (0u64, 0u64);
            for s in v {
                p += s.proposed;
                a += s.accepted;
            }
            if p == 0 {
                f64::NAN
            } else {
                a as f64 / p as f64
            }
        };
        vec![
            ("survival".into(), mean(&mut self.survival.iter().flatten())),
            ("mu".into(), mean(&mut self.mu.iter())),
            ("tau".into(), mean(&mut self.tau.iter().flatten())),
            ("delta".into(), mean(&mut std::iter::once(&self.delta))),
            ("weights".into(), mean(&mut self.weights.iter())),
        ]
    }
}

/// Pairs `(g, g + 1 mod G)` whose shares the weight moves trade; one pair for `G = 2`.
pub fn weight_pairs(groups: usize) -> Vec<(usize, usize)> {
    match groups {
        0 | 1 => Vec::new(),
        2 => vec![(0, 1)],
        g => (0..g).map(|a| (a, (a + 1) % g)).collect(),
    }
}

/// Adaptation arguments for the current iteration, `None` after burn-in.
pub type Adapt = Option<(usize, f64, f64)>;

pub(crate) fn metropolis(log_ratio: f64, rng: &mut impl Rng) -> bool {
    if log_ratio.is_nan() {
        return false;
    }
    log_ratio >= 0.0 || rng.random::<f64>().ln() < log_ratio
}

/// `w | c ~ Dirichlet(alpha + n_g)`.
pub fn update_weights(label_counts: &[usize], alpha: f64, rng: &mut impl Rng) -> Vec<f64> {
    let shapes: Vec<f64> = label_counts.iter().map(|&n| alpha + n as f64).collect();
    sample_dirichlet(&shapes, rng)
}

/// Conjugate `rho_kt ~ Beta(1/T + recruits, 2 - t/T + at_risk - recruits)`.
pub fn update_recruitment(ctx: &FitContext, tallies: &Tallies, params: &mut GroupParams, rng: &mut impl Rng) {
    let layout = &ctx.layout;
    let n = ctx.occasions();
    for k in 0..layout.rho_classes {
        for t in 0..n {
            let (mut risk, mut rec) = (0usize, 0usize);
            for g in (0..layout.groups).filter(|&g| layout.rho_class[g] == k) {
                risk += tallies.at_risk[g * n + t];
                rec += tallies.recruits[g * n + t];
            }
            let (a, b) = ctx.recruitment_prior(t);
            params.rho[k][t] = sample_beta(a + rec as f64, b + (risk - rec) as f64, rng);
        }
    }
}

/// Bernoulli log-likelihood of `captured` out of `exposed` with detection
/// `(1 - delta) logistic(x)`; `ln_delta` is `None` for groups that are always present.
fn capture_term(exposed: usize, captured: usize, x: f64, ln_delta: Option<(f64, f64)>) -> f64 {
    if exposed == 0 {
        return 0.0;
    }
    let missed = exposed - captured;
    match ln_delta {
        None => captured as f64 * ln_logistic(x) + missed as f64 * ln_logistic(-x),
        // ln(1 - (1 - d) s(x)) = softplus(x + ln d) - softplus(x)
        Some((ln_d, ln_1md)) => {
            let hit = if captured > 0 { captured as f64 * (ln_1md + ln_logistic(x)) } else { 0.0 };
            let miss = if missed > 0 { missed as f64 * (softplus(x + ln_d) - softplus(x)) } else { 0.0 };
            hit + miss
        }
    }
}

fn thinning(layout: &Layout, g: usize, delta: f64) -> Option<(f64, f64)> {
    layout.thinned[g].then(|| (delta.ln(), (-delta).ln_1p()))
}

/// Log-likelihood terms at occasions `t` and `T - 1` for occasion-effect class `k`.
fn capture_loglik_tau_pair(
    ctx: &FitContext,
    tallies: &Tallies,
    params: &GroupParams,
    k: usize,
    t: usize,
    tau_t: f64,
    tau_last: f64,
) -> f64 {
    let layout = &ctx.layout;
    let n = ctx.occasions();
    let last = n - 1;
    let mut acc = 0.0;
    for g in (0..layout.groups).filter(|&g| layout.tau_class[g] == Some(k)) {
        let mu = params.mu[layout.mu_class[g]];
        let thin = thinning(layout, g, params.delta);
        let a = g * n + t;
        let b = g * n + last;
        acc += capture_term(tallies.exposed[a], tallies.captured[a], mu + tau_t, thin);
        acc += capture_term(tallies.exposed[b], tallies.captured[b], mu + tau_last, thin);
    }
    acc
}

/// Random-walk Metropolis on the free occasion effects.
///
/// A move of free coordinate `t` by `e` moves the last effect by `-e`, and the
/// last effect is then reset to minus the sum of the others so the vector sums to zero.
pub fn update_tau_mh(
    ctx: &FitContext,
    tallies: &Tallies,
    params: &mut GroupParams,
    steps: &mut Steps,
    adapt: Adapt,
    rng: &mut impl Rng,
) {
    let n = ctx.occasions();
    if n < 2 {
        return;
    }
    let tau_var = ctx.priors.tau_var;
    let last = n - 1;
    for k in 0..ctx.layout.tau_classes {
        for t in 0..last {
            let (tau_t, tau_last) = (params.tau[k][t], params.tau[k][last]);
            let step = &mut steps.tau[k][t];
            let z: f64 = StandardNormal.sample(rng);
            let e = step.step() * z;
            let (new_t, new_last) = (tau_t + e, tau_last - e);
            let prior = |a: f64, b: f64| -(a * a + b * b) / (2.0 * tau_var);
            let log_ratio = capture_loglik_tau_pair(ctx, tallies, params, k, t, new_t, new_last)
                + prior(new_t, new_last)
                - capture_loglik_tau_pair(ctx, tallies, params, k, t, tau_t, tau_last)
                - prior(tau_t, tau_last);
            let accepted = metropolis(log_ratio, rng);
            if accepted {
                params.tau[k][t] = new_t;
                let row = &mut params.tau[k];
                row[last] = -row[..last].iter().sum::<f64>();
            }
            step.record(accepted, adapt);
        }
    }
}

/// `P(v = 1 | z = 1, y = 0) = (1 - delta)(1 - p) / [(1 - delta)(1 - p) + delta]`.
pub fn presence_prob(delta: f64, p: f64) -> f64 {
    let a = (1.0 - delta) * (1.0 - p);
    a / (a + delta)
}

/// Draws presence on alive cells of thinned groups from its full conditional.
pub fn impute_presence(ctx: &FitContext, latent: &mut LatentState, params: &GroupParams, rng: &mut impl Rng) {
    let layout = &ctx.layout;
    if !layout.has_thinning() {
        return;
    }
    let n = ctx.occasions();
    let probs: Vec<f64> = (0..layout.groups * n)
        .map(|c| presence_prob(params.delta, params.capture_present(layout, c / n, c % n)))
        .collect();
    for i in 0..latent.rows() {
        let g = latent.labels[i];
        if !layout.thinned[g] {
            continue;
        }
        let y = ctx.data.history(i);
        for t in 0..n {
            if latent.z_row(i)[t] == 1 && y[t] == 0 {
                latent.v_row_mut(i)[t] = (rng.random::<f64>() < probs[g * n + t]) as u8;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softplus_is_stable() {
        assert!((softplus(0.0) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(softplus(800.0), 800.0);
        assert!(softplus(-800.0) >= 0.0);
        assert!((ln_logistic(2.0) - crate::model::likelihood::logistic(2.0).ln()).abs() < 1e-15);
    }

    #[test]
    fn presence_formula() {
        assert!((presence_prob(0.7, 0.19) - 0.2577).abs() < 1e-4);
        assert_eq!(presence_prob(0.0, 0.5), 1.0);
    }

    #[test]
    fn adapter_moves_towards_target() {
        let mut a = StepAdapter::new(1.0);
        for i in 0..200 {
            a.record(false, Some((i, 0.35, 0.6)));
        }
        assert!(a.step() < 1.0);
        assert_eq!(a.proposed, 0);
        a.record(true, None);
        assert_eq!(a.rate(), 1.0);
    }

    #[test]
    fn dirichlet_concentrates() {
        let mut rng = crate::sampler::state::chain_rng(2, 0);
        let mut mean = 0.0;
        let reps = 2000;
        for _ in 0..reps {
            let w = update_weights(&[695, 0, 0], 1.0, &mut rng);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            mean += w[0] / reps as f64;
        }
        assert!((mean - 696.0 / 698.0).abs() < 1e-3, "{mean}");
    }
}
