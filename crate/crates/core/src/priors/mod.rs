//! Beta-family distributions, ordered-chain priors and the model prior configuration.

pub mod beta;
pub mod chain;
pub mod config;
pub mod special;

pub use beta::{dorazio_params, BetaKind, BetaSpec};
pub use chain::{
    rbeta_chain_moments, restricted_link_for_moments, tbeta_marginal_pdf, ChainLink, OrderedChainSpec,
};
pub use config::PriorConfig;
