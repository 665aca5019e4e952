//! Domain types, the latent entry/survival process and exact likelihoods.

pub mod data;
pub mod enumerate;
pub mod latent;
pub mod likelihood;
pub mod params;
pub mod spec;
pub mod time;

pub use data::CaptureData;
pub use latent::{derived_counts, AbundanceDraw, LatentState};
pub use likelihood::{
    capture_prob, compound_survival, expected_nsuper, forward_filter, forward_loglik, inclusion_prob,
    mixture_loglik, transition_matrix, GroupKernel, LOG_ZERO,
};
pub use params::GroupParams;
pub use spec::{Effect, Layout, ModelSpec};
pub use time::{Calendar, TimeGrid, TimeUnit};
