//! Simulation-study metrics aggregated over replicas.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::overlap::quantile_sorted;
use crate::error::{Error, Result};

/// What one fit of one replica contributes to the metric table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicaResult {
    /// Number of occasions of the scenario.
    pub scenario: usize,
    pub replica: usize,
    pub model: String,
    pub truth_n_super: f64,
    pub median: f64,
    pub lower: f64,
    pub upper: f64,
    pub waic: f64,
    pub ov: Option<f64>,
    pub mauc: Option<f64>,
    pub map_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub model: String,
    pub scenario: usize,
    pub replicas: usize,
    pub expected_n_super: f64,
    pub mae: f64,
    pub mae_rel: f64,
    pub coverage: f64,
    pub ciw_rel: f64,
    pub median_waic: f64,
    pub best_waic_share: f64,
    pub ov: Option<f64>,
    pub mauc: Option<f64>,
    pub map_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsTable {
    pub rows: Vec<MetricsRow>,
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    Some(quantile_sorted(values, 0.5))
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Aggregates replica results by scenario and model.
///
/// `expected` maps a scenario to its expected super-population size, which
/// scales MAE and interval width. Rows come out ordered by scenario, then by
/// first appearance of the model.
pub fn experiment_metrics(
    results: &[ReplicaResult],
    expected: &BTreeMap<usize, f64>,
) -> Result<MetricsTable> {
    let mut model_order: Vec<&str> = Vec::new();
    for r in results {
        if !model_order.contains(&r.model.as_str()) {
            model_order.push(&r.model);
        }
    }
    // Winner per (scenario, replica); ties go to the earlier model.
    let mut best: BTreeMap<(usize, usize), (f64, &str)> = BTreeMap::new();
    for r in results {
        let e = best.entry((r.scenario, r.replica)).or_insert((r.waic, &r.model));
        if r.waic < e.0 {
            *e = (r.waic, &r.model);
        }
    }
    let scenarios: Vec<usize> = {
        let mut s: Vec<usize> = results.iter().map(|r| r.scenario).collect();
        s.sort_unstable();
        s.dedup();
        s
    };
    let mut rows = Vec::new();
    for &sc in &scenarios {
        let e = *expected
            .get(&sc)
            .ok_or_else(|| Error::invalid(format!("no expected N_super for scenario T={sc}")))?;
        if !(e > 0.0) {
            return Err(Error::invalid(format!("expected N_super for T={sc} must be positive")));
        }
        for &model in &model_order {
            let reps: Vec<&ReplicaResult> =
                results.iter().filter(|r| r.scenario == sc && r.model == model).collect();
            if reps.is_empty() {
                continue;
            }
            let n = reps.len() as f64;
            let mae = reps.iter().map(|r| (r.median - r.truth_n_super).abs()).sum::<f64>() / n;
            let coverage =
                reps.iter().filter(|r| r.lower <= r.truth_n_super && r.truth_n_super <= r.upper).count()
                    as f64
                    / n;
            let ciw = reps.iter().map(|r| r.upper - r.lower).sum::<f64>() / n;
            let mut waics: Vec<f64> = reps.iter().map(|r| r.waic).collect();
            let wins =
                reps.iter().filter(|r| best.get(&(sc, r.replica)).is_some_and(|b| b.1 == model)).count()
                    as f64;
            let mut ov: Vec<f64> = reps.iter().filter_map(|r| r.ov).collect();
            let mut mauc: Vec<f64> = reps.iter().filter_map(|r| r.mauc).collect();
            let acc: Vec<f64> = reps.iter().filter_map(|r| r.map_accuracy).collect();
            rows.push(MetricsRow {
                model: model.to_string(),
                scenario: sc,
                replicas: reps.len(),
                expected_n_super: e,
                mae,
                mae_rel: mae / e,
                coverage,
                ciw_rel: ciw / e,
                median_waic: median(&mut waics).unwrap_or(f64::NAN),
                best_waic_share: wins / n,
                ov: median(&mut ov),
                mauc: median(&mut mauc),
                map_accuracy: mean(&acc),
            });
        }
    }
    Ok(MetricsTable { rows })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl MetricsTable {
    pub const HEADER: &'static str =
        "model,T,replicas,E_N_super,MAE,MAE_rel,coverage,CIW_rel,median_WAIC,best_WAIC_share,OV,mAUC,MAP_accuracy";

    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "{}", Self::HEADER)?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.model,
                r.scenario,
                r.replicas,
                r.expected_n_super,
                r.mae,
                r.mae_rel,
                r.coverage,
                r.ciw_rel,
                r.median_waic,
                r.best_waic_share,
                opt(r.ov),
                opt(r.mauc),
                opt(r.map_accuracy)
            )?;
        }
        Ok(())
    }
}
