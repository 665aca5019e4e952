//! Metropolis-within-Gibbs sampler for the augmented mixture model.

pub mod config;
pub mod latent;
pub mod marginal;
pub mod run;
pub mod state;
pub mod store;
pub mod updates;

pub use config::{FrozenBlocks, McmcConfig};
pub use latent::{backward_sample, ffbs_individual, sample_label};
pub use marginal::{marginal_sweep, MarginalBlocks, MarginalCache};
pub use run::{pointwise_loglik, run_chain, run_fit, ChainRunner};
pub use state::{chain_rng, draw_from_prior, init_state, ChainState, FitContext};
pub use store::{ChainDraws, DrawStore, Trajectory, N_SUPER};
pub use updates::{
    impute_presence, presence_prob, update_recruitment, update_tau_mh, update_weights, StepAdapter, Steps,
    Tallies,
};
