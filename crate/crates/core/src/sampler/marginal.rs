//! Metropolis moves for mixture weights, survival, capture intercepts and
//! `delta` against the likelihood with labels, trajectories and presence
//! summed out.
//!
//! These moves run right before the latent sweep, which redraws labels and
//! trajectories jointly, so dropping the latent state here is harmless.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::state::FitContext;
use super::updates::{ln_logistic, metropolis, weight_pairs, Adapt, StepAdapter, Steps};
use crate::model::likelihood::{forward_filter, logistic, logit, GroupKernel, LOG_ZERO};
use crate::model::GroupParams;

/// Per-row, per-group `ln P(y_i | g)` for the observed rows and the shared zero row.
#[derive(Debug, Default, Clone)]
pub struct MarginalCache {
    groups: usize,
    ll: Vec<f64>,
    proposal: Vec<f64>,
    row_weights: Vec<f64>,
    alphas: Vec<f64>,
    terms: Vec<f64>,
}

impl MarginalCache {
    pub fn new(ctx: &FitContext) -> Self {
        let d = ctx.data.n_observed();
        let mut row_weights = vec![1.0; d];
        if ctx.data.n_augmented() > 0 {
            row_weights.push(ctx.data.n_augmented() as f64);
        }
        Self { groups: ctx.layout.groups, row_weights, ..Self::default() }
    }

    fn rows(&self) -> usize {
        self.row_weights.len()
    }

    fn fill(
        ctx: &FitContext,
        params: &GroupParams,
        g: usize,
        groups: usize,
        out: &mut [f64],
        alphas: &mut Vec<f64>,
    ) {
        let kernel = GroupKernel::from_params(params, &ctx.layout, &ctx.grid, g);
        for (i, slot) in out.chunks_mut(groups).enumerate() {
            slot[g] = forward_filter(ctx.data.history(i), &kernel, alphas);
        }
    }

    /// Recomputes every group under `params`.
    pub fn refresh(&mut self, ctx: &FitContext, params: &GroupParams) {
        self.ll.resize(self.rows() * self.groups, 0.0);
        for g in 0..self.groups {
            Self::fill(ctx, params, g, self.groups, &mut self.ll, &mut self.alphas);
        }
    }

    fn total(&mut self, ll: &[f64], weights: &[f64]) -> f64 {
        let ln_w: Vec<f64> = weights.iter().map(|w| w.ln()).collect();
        let mut acc = 0.0;
        for (row, &rw) in ll.chunks(self.groups).zip(&self.row_weights) {
            self.terms.clear();
            let mut max = f64::NEG_INFINITY;
            for (&l, &lw) in row.iter().zip(&ln_w) {
                let v = if l > LOG_ZERO { lw + l } else { f64::NEG_INFINITY };
                max = max.max(v);
                self.terms.push(v);
            }
            if max == f64::NEG_INFINITY {
                return f64::NEG_INFINITY;
            }
            let s: f64 = self.terms.iter().map(|v| (v - max).exp()).sum();
            acc += rw * (max + s.ln());
        }
        acc
    }

    /// Marginal log-likelihood at the cached parameters.
    pub fn current(&mut self, weights: &[f64]) -> f64 {
        let ll = std::mem::take(&mut self.ll);
        let out = self.total(&ll, weights);
        self.ll = ll;
        out
    }

    /// Marginal log-likelihood under `params`, recomputing only the groups in `affected`.
    fn propose(&mut self, ctx: &FitContext, params: &GroupParams, affected: &[usize]) -> f64 {
        let mut prop = std::mem::take(&mut self.proposal);
        prop.clear();
        prop.extend_from_slice(&self.ll);
        for &g in affected {
            Self::fill(ctx, params, g, self.groups, &mut prop, &mut self.alphas);
        }
        let out = self.total(&prop, &params.weights);
        self.proposal = prop;
        out
    }

    fn accept(&mut self) {
        std::mem::swap(&mut self.ll, &mut self.proposal);
    }
}

/// One random-walk step on a logit- or identity-scale coordinate.
struct Move<'a> {
    ctx: &'a FitContext,
    affected: Vec<usize>,
}

impl Move<'_> {
    /// `set` writes a proposed value into a parameter copy; `ln_prior` is on the
    /// proposal scale, Jacobian included.
    #[allow(clippy::too_many_arguments)]
    fn run(
        &self,
        cache: &mut MarginalCache,
        params: &mut GroupParams,
        current_ll: &mut f64,
        x: f64,
        set: impl Fn(&mut GroupParams, f64) -> bool,
        ln_prior: impl Fn(&GroupParams) -> f64,
        step: &mut StepAdapter,
        adapt: Adapt,
        rng: &mut impl Rng,
    ) {
        let z: f64 = StandardNormal.sample(rng);
        let x_new = x + step.step() * z;
        let mut cand = params.clone();
        if !set(&mut cand, x_new) {
            step.record(false, adapt);
            return;
        }
        let prior_new = ln_prior(&cand);
        if !prior_new.is_finite() {
            step.record(false, adapt);
            return;
        }
        let ll_new = cache.propose(self.ctx, &cand, &self.affected);
        let accepted = metropolis(ll_new + prior_new - *current_ll - ln_prior(params), rng);
        if accepted {
            *params = cand;
            *current_ll = ll_new;
            cache.accept();
        }
        step.record(accepted, adapt);
    }
}

fn open_unit(x: f64) -> Option<f64> {
    let p = logistic(x);
    (p > 0.0 && p < 1.0).then_some(p)
}

/// Which blocks the marginal sweep moves.
#[derive(Debug, Clone, Copy)]
pub struct MarginalBlocks {
    pub weights: bool,
    pub survival: bool,
    pub mu: bool,
    pub delta: bool,
}

/// Weight moves per sweep and pair. They reuse cached group likelihoods, so
/// several are nearly free.
const WEIGHT_ROUNDS: usize = 5;

/// Moves share between two weights on the logit scale of `w_a / (w_a + w_b)`
/// under the symmetric Dirichlet prior.
fn weight_moves(
    cache: &mut MarginalCache,
    params: &mut GroupParams,
    current_ll: &mut f64,
    alpha: f64,
    steps: &mut [StepAdapter],
    adapt: Adapt,
    rng: &mut impl Rng,
) {
    let pairs = weight_pairs(params.weights.len());
    for _ in 0..WEIGHT_ROUNDS {
        for (&(a, b), step) in pairs.iter().zip(steps.iter_mut()) {
            let w = &params.weights;
            let total = w[a] + w[b];
            if !(w[a] > 0.0 && w[b] > 0.0) {
                continue;
            }
            let z: f64 = StandardNormal.sample(rng);
            let u = match open_unit(logit(w[a] / total) + step.step() * z) {
                Some(u) => u,
                None => {
                    step.record(false, adapt);
                    continue;
                }
            };
            let mut cand = w.clone();
            cand[a] = total * u;
            cand[b] = total * (1.0 - u);
            if !(cand[a] > 0.0 && cand[b] > 0.0) {
                step.record(false, adapt);
                continue;
            }
            let ll_new = cache.current(&cand);
            // Beta(alpha, alpha) on the share times the logit Jacobian.
            let prior = alpha * (cand[a].ln() + cand[b].ln() - w[a].ln() - w[b].ln());
            let accepted = metropolis(ll_new - *current_ll + prior, rng);
            if accepted {
                params.weights = cand;
                *current_ll = ll_new;
            }
            step.record(accepted, adapt);
        }
    }
}

/// Updates weights, survival on `logit(phi)` under the ordered prior, capture intercepts
/// under `N(0, mu_var)` and `logit(delta)` under its Beta prior.
pub fn marginal_sweep(
    ctx: &FitContext,
    cache: &mut MarginalCache,
    params: &mut GroupParams,
    steps: &mut Steps,
    blocks: MarginalBlocks,
    adapt: Adapt,
    rng: &mut impl Rng,
) {
    let layout = &ctx.layout;
    cache.refresh(ctx, params);
    let mut ll = cache.current(&params.weights);
    if blocks.weights {
        weight_moves(cache, params, &mut ll, ctx.priors.dirichlet, &mut steps.weights, adapt, rng);
    }
    // Jacobian of the logit map: p (1 - p).
    let jac = |p: f64| p.ln() + (-p).ln_1p();

    if blocks.survival {
        for j in 0..ctx.phi_len() {
            for k in 0..layout.phi_classes {
                let mv = Move {
                    ctx,
                    affected: (0..layout.groups).filter(|&g| layout.phi_class[g] == k).collect(),
                };
                let x = logit(params.phi[k][j]);
                let prior = |p: &GroupParams| {
                    let u: Vec<f64> = p.phi.iter().map(|row| row[j]).collect();
                    ctx.survival_prior.ln_density(&u) + jac(p.phi[k][j])
                };
                let set = |p: &mut GroupParams, x: f64| match open_unit(x) {
                    Some(v) => {
                        p.phi[k][j] = v;
                        true
                    }
                    None => false,
                };
                mv.run(cache, params, &mut ll, x, set, prior, &mut steps.survival[k][j], adapt, rng);
            }
        }
    }

    if blocks.mu {
        let mu_var = ctx.priors.mu_var;
        for k in 0..layout.mu_classes {
            let mv =
                Move { ctx, affected: (0..layout.groups).filter(|&g| layout.mu_class[g] == k).collect() };
            let x = params.mu[k];
            let set = |p: &mut GroupParams, x: f64| {
                p.mu[k] = x;
                true
            };
            let prior = |p: &GroupParams| -p.mu[k] * p.mu[k] / (2.0 * mu_var);
            mv.run(cache, params, &mut ll, x, set, prior, &mut steps.mu[k], adapt, rng);
        }
    }

    if blocks.delta && layout.has_thinning() {
        let (a, b) = ctx.priors.delta;
        let mv = Move { ctx, affected: (0..layout.groups).filter(|&g| layout.thinned[g]).collect() };
        let x = logit(params.delta);
        let set = |p: &mut GroupParams, x: f64| match open_unit(x) {
            Some(v) => {
                p.delta = v;
                true
            }
            None => false,
        };
        // Beta prior times the Jacobian, on the logit scale.
        let prior = |p: &GroupParams| {
            let x = logit(p.delta);
            a * ln_logistic(x) + b * ln_logistic(-x)
        };
        mv.run(cache, params, &mut ll, x, set, prior, &mut steps.delta, adapt, rng);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CaptureData, ModelSpec, TimeGrid, TimeUnit};
    use crate::priors::PriorConfig;
    use crate::sampler::run::pointwise_loglik;
    use crate::sampler::state::{chain_rng, draw_from_prior};

    #[test]
    fn cache_matches_pointwise_sum() {
        let rows = vec![vec![1, 0, 1, 0], vec![0, 1, 1, 1], vec![0, 0, 0, 1]];
        let data = CaptureData::from_rows(rows).unwrap().augment(7);
        let grid = TimeGrid::new(vec![0.0, 1.0, 2.5, 3.0], TimeUnit::Month).unwrap();
        let ctx = FitContext::new(data, grid, ModelSpec::rpt(), PriorConfig::default()).unwrap();
        let mut rng = chain_rng(4, 0);
        for _ in 0..20 {
            let params = draw_from_prior(&ctx, &mut rng);
            let mut cache = MarginalCache::new(&ctx);
            cache.refresh(&ctx, &params);
            let direct: f64 = pointwise_loglik(&ctx, &params)
                .iter()
                .enumerate()
                .map(|(i, l)| if i == 3 { 7.0 * l } else { *l })
                .sum();
            let cached = cache.current(&params.weights);
            assert!((direct - cached).abs() < 1e-10 * direct.abs().max(1.0), "{direct} {cached}");
        }
    }
}
