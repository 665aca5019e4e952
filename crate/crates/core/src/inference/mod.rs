//! Post-processing of posterior draws.

pub mod classify;
pub mod metrics;
pub mod overlap;
pub mod rhat;
pub mod summary;
pub mod waic;

pub use classify::{map_classify, mauc, rank_auc, Mauc};
pub use metrics::{experiment_metrics, MetricsRow, MetricsTable, ReplicaResult};
pub use overlap::{overlap_index, quantile_sorted, silverman_bandwidth};
pub use rhat::{rhat, Rhat};
pub use summary::{
    abundance_summary, fit_summary, param_summary, period_sizes, summarise, AbundanceSummary, FitSummary,
    Interval, ParamSummary, PeriodSummary,
};
pub use waic::{waic, Waic};
