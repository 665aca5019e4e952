//! Sweep scheduling and multi-chain execution.

use rayon::prelude::*;

use super::config::McmcConfig;
use super::latent::{sweep_latent, LatentScratch};
use super::marginal::{marginal_sweep, MarginalBlocks, MarginalCache};
use super::state::{init_state, ChainState, FitContext};
use super::store::{ChainDraws, DrawStore, Trajectory};
use super::updates::{
    impute_presence, update_recruitment, update_tau_mh, update_weights, Adapt, Steps, Tallies,
};
use crate::error::{Error, Result};
use crate::model::likelihood::{forward_filter, inclusion_prob, log_sum_exp, GroupKernel, LOG_ZERO};
use crate::model::{derived_counts, GroupParams};

/// Sampler that owns one chain's state and tuning.
pub struct ChainRunner<'a> {
    ctx: &'a FitContext,
    mcmc: &'a McmcConfig,
    pub state: ChainState,
    pub steps: Steps,
    scratch: LatentScratch,
    cache: MarginalCache,
}

impl<'a> ChainRunner<'a> {
    pub fn new(ctx: &'a FitContext, mcmc: &'a McmcConfig, chain: usize) -> Result<Self> {
        mcmc.validate()?;
        let state = init_state(ctx, mcmc, chain)?;
        let steps = Steps::new(&ctx.layout, ctx.phi_len(), ctx.occasions(), mcmc.initial_step);
        Ok(Self {
            ctx,
            mcmc,
            state,
            steps,
            scratch: LatentScratch::default(),
            cache: MarginalCache::new(ctx),
        })
    }

    /// One full sweep: weights, survival, intercepts and `delta` with the latent state
    /// summed out, then labels and trajectories, weights, recruitment, occasion
    /// effects and presence.
    pub fn sweep(&mut self) -> Result<()> {
        let ctx = self.ctx;
        let frozen = &self.mcmc.frozen;
        let it = self.state.iter;
        let adapt: Adapt =
            (it < self.mcmc.burnin).then_some((it, self.mcmc.target_accept, self.mcmc.adapt_decay));

        let blocks = MarginalBlocks {
            weights: !frozen.weights,
            survival: !frozen.survival,
            mu: !frozen.capture,
            delta: !frozen.delta,
        };
        if blocks.weights || blocks.survival || blocks.mu || blocks.delta {
            let st = &mut self.state;
            marginal_sweep(ctx, &mut self.cache, &mut st.params, &mut self.steps, blocks, adapt, &mut st.rng);
        }
        if !frozen.trajectories {
            let kernels = GroupKernel::all(&self.state.params, &ctx.layout, &ctx.grid);
            sweep_latent(ctx, &mut self.state, &kernels, frozen.labels, &mut self.scratch)?;
        }
        let st = &mut self.state;
        let tallies = Tallies::compute(&st.latent, &ctx.data, ctx.layout.groups)?;
        if !frozen.weights {
            st.params.weights = update_weights(&tallies.label_counts, ctx.priors.dirichlet, &mut st.rng);
        }
        if !frozen.recruitment {
            update_recruitment(ctx, &tallies, &mut st.params, &mut st.rng);
        }
        if !frozen.capture {
            update_tau_mh(ctx, &tallies, &mut st.params, &mut self.steps, adapt, &mut st.rng);
        }
        impute_presence(ctx, &mut st.latent, &st.params, &mut st.rng);
        self.check()?;
        self.state.iter += 1;
        Ok(())
    }

    fn check(&self) -> Result<()> {
        let layout = &self.ctx.layout;
        let dump = || serde_json::to_string(&self.state.params).unwrap_or_default();
        self.state.latent.check(|g| layout.thinned[g]).map_err(|e| {
            Error::invariant(format!("iteration {}: {e}; parameters: {}", self.state.iter, dump()))
        })?;
        self.state.params.validate(layout, self.ctx.occasions()).map_err(|e| {
            Error::invariant(format!("iteration {}: {e}; parameters: {}", self.state.iter, dump()))
        })?;
        Ok(())
    }

    /// Appends the current state to `out`.
    pub fn record(&self, out: &mut ChainDraws) {
        let ctx = self.ctx;
        let st = &self.state;
        let layout = &ctx.layout;
        out.iters.push(st.iter - 1);
        out.params.push(st.params.flatten(layout));
        let mut abundance = derived_counts(&st.latent, layout.groups);
        abundance.psi =
            (0..layout.groups).map(|g| inclusion_prob(&st.params.rho[layout.rho_class[g]])).collect();
        out.abundance.push(abundance);
        let trajectories = (0..st.latent.rows())
            .filter_map(|i| {
                st.latent.presence_window(i).map(|(entry, exit)| Trajectory {
                    row: i as u32,
                    entry: entry as u16,
                    exit: exit as u16,
                    label: st.latent.labels[i] as u8,
                })
            })
            .collect();
        out.trajectories.push(trajectories);
        let d = ctx.data.n_observed();
        out.labels.push(st.latent.labels[..d].iter().map(|&g| g as u8).collect());
        out.pointwise.push(pointwise_loglik(ctx, &st.params));
    }
}

/// `ln p(y_i | theta)` marginalised over label and trajectory, for each
/// observed row and then once for the all-zero row (when augmented).
pub fn pointwise_loglik(ctx: &FitContext, params: &GroupParams) -> Vec<f64> {
    let kernels = GroupKernel::all(params, &ctx.layout, &ctx.grid);
    let d = ctx.data.n_observed();
    let rows = if ctx.data.total() > d { d + 1 } else { d };
    let mut buf = Vec::new();
    let mut terms = Vec::with_capacity(kernels.len());
    (0..rows)
        .map(|i| {
            let y = ctx.data.history(i);
            terms.clear();
            for (k, &w) in kernels.iter().zip(&params.weights) {
                let ll = forward_filter(y, k, &mut buf);
                terms.push(if w > 0.0 && ll > LOG_ZERO { w.ln() + ll } else { f64::NEG_INFINITY });
            }
            log_sum_exp(&terms)
        })
        .collect()
}

/// Runs one chain to completion.
pub fn run_chain(ctx: &FitContext, mcmc: &McmcConfig, chain: usize) -> Result<ChainDraws> {
    let mut runner = ChainRunner::new(ctx, mcmc, chain)?;
    let mut out = ChainDraws::new(chain);
    for it in 0..mcmc.iters {
        runner.sweep()?;
        if mcmc.retains(it) {
            runner.record(&mut out);
        }
    }
    out.acceptance = runner.steps.acceptance();
    Ok(out)
}

/// Runs all chains in parallel and merges them in chain order.
pub fn run_fit(ctx: &FitContext, mcmc: &McmcConfig) -> Result<DrawStore> {
    mcmc.validate()?;
    let chains =
        (0..mcmc.chains).into_par_iter().map(|c| run_chain(ctx, mcmc, c)).collect::<Result<Vec<_>>>()?;
    Ok(DrawStore {
        names: GroupParams::names(&ctx.layout, &ctx.spec.group_names(), ctx.occasions(), ctx.spec.rpt),
        group_names: ctx.spec.group_names(),
        n_observed: ctx.data.n_observed(),
        n_augmented: ctx.data.n_augmented(),
        occasions: ctx.occasions(),
        chains,
    })
}
