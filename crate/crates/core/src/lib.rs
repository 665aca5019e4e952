//! Bayesian Jolly-Seber capture-recapture with finite mixtures and
//! parameter-expanded data augmentation.
//!
//! The crate covers the generative model, an exact-likelihood Metropolis-within-Gibbs
//! sampler, a scenario simulator and posterior post-processing (WAIC, R-hat,
//! overlap index, multi-class AUC).

// Negated comparisons double as NaN guards throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod commands;
pub mod error;
pub mod inference;
pub mod io;
pub mod model;
pub mod priors;
pub mod sampler;
pub mod simulate;

pub use error::{Error, Result};
