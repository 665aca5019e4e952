//! Posterior summaries of parameters, abundance and membership.

use serde::{Deserialize, Serialize};

use super::classify::map_classify;
use super::overlap::quantile_sorted;
use super::rhat::rhat;
use super::waic::{waic, Waic};
use crate::error::{Error, Result};
use crate::model::Calendar;
use crate::sampler::{DrawStore, Trajectory};

/// Mean, median and equal-tailed 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub mean: f64,
    pub sd: f64,
    pub median: f64,
    pub lower: f64,
    pub upper: f64,
}

pub fn summarise(values: &[f64]) -> Result<Interval> {
    if values.is_empty() {
        return Err(Error::invalid("cannot summarise an empty sample"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = if values.len() > 1 {
        (values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(Interval {
        mean,
        sd,
        median: quantile_sorted(&sorted, 0.5),
        lower: quantile_sorted(&sorted, 0.025),
        upper: quantile_sorted(&sorted, 0.975),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSummary {
    pub name: String,
    #[serde(flatten)]
    pub interval: Interval,
    pub rhat: Option<f64>,
    /// The trace never moved (R-hat set to 1 by convention).
    pub constant: bool,
}

/// Summary of one named trace, with split R-hat when there are enough draws.
pub fn param_summary(store: &DrawStore, name: &str) -> Result<ParamSummary> {
    let chains = store.trace(name)?;
    let pooled: Vec<f64> = chains.iter().flatten().copied().collect();
    let interval = summarise(&pooled)?;
    let (r, constant) = match rhat(&chains) {
        Ok(r) => (Some(r.value), r.constant),
        Err(_) => (None, false),
    };
    Ok(ParamSummary { name: name.to_string(), interval, rhat: r, constant })
}

/// Individuals alive in each period, split by label: `[period * G + g]`.
pub fn period_sizes(trajectories: &[Trajectory], calendar: &Calendar, groups: usize) -> Result<Vec<usize>> {
    let periods = calendar.periods();
    let mut out = vec![0usize; periods * groups];
    let mut seen = vec![false; periods];
    for tr in trajectories {
        let (entry, exit) = (tr.entry as usize, tr.exit as usize);
        if exit >= calendar.period_of.len() {
            return Err(Error::invalid(format!("occasion {} is outside the calendar", exit + 1)));
        }
        seen.fill(false);
        for t in entry..=exit {
            seen[calendar.period_of[t]] = true;
        }
        for (p, &s) in seen.iter().enumerate() {
            if s {
                out[p * groups + tr.label as usize] += 1;
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodSummary {
    pub period: String,
    pub total: Interval,
    pub by_group: Vec<Interval>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbundanceSummary {
    pub n_super: Interval,
    pub n_t: Vec<Interval>,
    pub n_group: Vec<Interval>,
    pub periods: Vec<PeriodSummary>,
    /// Mean share of each group among entered but never captured rows.
    pub uncaught_share: Vec<f64>,
}

pub fn abundance_summary(store: &DrawStore, calendar: &Calendar) -> Result<AbundanceSummary> {
    calendar.validate(store.occasions)?;
    let groups = store.groups();
    let periods = calendar.periods();
    let mut per_period: Vec<Vec<f64>> = vec![Vec::new(); periods * groups];
    let mut period_totals: Vec<Vec<f64>> = vec![Vec::new(); periods];
    let mut share_sum = vec![0.0; groups];
    let mut share_draws = 0usize;
    for chain in &store.chains {
        for trs in &chain.trajectories {
            let sizes = period_sizes(trs, calendar, groups)?;
            for p in 0..periods {
                let mut tot = 0;
                for g in 0..groups {
                    let v = sizes[p * groups + g];
                    per_period[p * groups + g].push(v as f64);
                    tot += v;
                }
                period_totals[p].push(tot as f64);
            }
            let mut uncaught = vec![0usize; groups];
            for tr in trs.iter().filter(|tr| tr.row as usize >= store.n_observed) {
                uncaught[tr.label as usize] += 1;
            }
            let total: usize = uncaught.iter().sum();
            if total > 0 {
                share_draws += 1;
                for g in 0..groups {
                    share_sum[g] += uncaught[g] as f64 / total as f64;
                }
            }
        }
    }
    let n_super = summarise(&store.pooled(crate::sampler::N_SUPER)?)?;
    let n_t = (1..=store.occasions)
        .map(|t| summarise(&store.pooled(&format!("N[{t}]"))?))
        .collect::<Result<Vec<_>>>()?;
    let n_group = store
        .group_names
        .iter()
        .map(|g| summarise(&store.pooled(&format!("N_super[{g}]"))?))
        .collect::<Result<Vec<_>>>()?;
    let periods = (0..periods)
        .map(|p| {
            Ok(PeriodSummary {
                period: calendar.labels[p].clone(),
                total: summarise(&period_totals[p])?,
                by_group: (0..groups)
                    .map(|g| summarise(&per_period[p * groups + g]))
                    .collect::<Result<Vec<_>>>()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let uncaught_share =
        share_sum.iter().map(|s| if share_draws > 0 { s / share_draws as f64 } else { 0.0 }).collect();
    Ok(AbundanceSummary { n_super, n_t, n_group, periods, uncaught_share })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub model: String,
    #[serde(rename = "N_super")]
    pub n_super: Interval,
    pub chains: usize,
    pub draws_per_chain: usize,
    pub group_names: Vec<String>,
    pub params: Vec<ParamSummary>,
    pub derived: Vec<ParamSummary>,
    pub abundance: AbundanceSummary,
    pub waic: Waic,
    /// Observed rows x groups.
    pub membership: Vec<Vec<f64>>,
    pub map_labels: Vec<usize>,
    /// Post-burn-in Metropolis acceptance per chain.
    pub acceptance: Vec<Vec<(String, f64)>>,
}

impl FitSummary {
    pub fn param(&self, name: &str) -> Option<&ParamSummary> {
        self.params.iter().chain(&self.derived).find(|p| p.name == name)
    }

    /// Largest finite R-hat over the listed traces.
    pub fn max_rhat(&self, names: &[&str]) -> Option<f64> {
        names
            .iter()
            .filter_map(|n| self.param(n).and_then(|p| p.rhat))
            .fold(None, |acc, r| Some(acc.map_or(r, |a: f64| a.max(r))))
    }
}

pub fn fit_summary(store: &DrawStore, calendar: &Calendar, model: &str) -> Result<FitSummary> {
    let params = store.names.iter().map(|n| param_summary(store, n)).collect::<Result<Vec<_>>>()?;
    let derived =
        store.derived_names().iter().map(|n| param_summary(store, n)).collect::<Result<Vec<_>>>()?;
    let (rows, weights) = store.pointwise();
    let waic = waic(&rows, Some(&weights))?;
    let membership = store.membership();
    let map_labels = map_classify(&membership);
    let abundance = abundance_summary(store, calendar)?;
    Ok(FitSummary {
        model: model.to_string(),
        n_super: abundance.n_super,
        chains: store.chains.len(),
        draws_per_chain: store.draws_per_chain(),
        group_names: store.group_names.clone(),
        params,
        derived,
        abundance,
        waic,
        membership,
        map_labels,
        acceptance: store.chains.iter().map(|c| c.acceptance.clone()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tr(row: u32, entry: u16, exit: u16, label: u8) -> Trajectory {
        Trajectory { row, entry, exit, label }
    }

    #[test]
    fn interval_ordering() {
        let v: Vec<f64> = (0..1000).map(|i| ((i * 37) % 1000) as f64).collect();
        let s = summarise(&v).unwrap();
        assert!(s.lower <= s.median && s.median <= s.upper);
        assert!((s.median - 499.5).abs() < 1e-12);
    }

    #[test]
    fn hand_counted_periods() {
        let cal = Calendar::from_occasion_labels(&["a", "a", "b", "b"].map(String::from));
        let trs = [tr(0, 0, 1, 0), tr(1, 1, 2, 1), tr(2, 3, 3, 1), tr(3, 0, 3, 0)];
        let sizes = period_sizes(&trs, &cal, 2).unwrap();
        // period a: rows 0, 3 (label 0) and row 1 (label 1); period b: row 3, rows 1, 2.
        assert_eq!(sizes, vec![2, 1, 1, 2]);
        let single = Calendar::single(4);
        assert_eq!(period_sizes(&trs, &single, 2).unwrap(), vec![2, 2]);
        assert!(period_sizes(&[tr(0, 0, 5, 0)], &single, 2).is_err());
    }
}
