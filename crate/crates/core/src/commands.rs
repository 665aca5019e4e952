//! The workflows behind the command-line front end. Each one reads its inputs,
//! writes a fixed set of files plus `config.toml` and `manifest.json` into the
//! output directory, and returns the manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::inference::{
    experiment_metrics, fit_summary, map_classify, mauc, overlap_index, rhat, summarise, FitSummary,
    ReplicaResult,
};
use crate::io::output::{classification_csv, read_draws, read_membership};
use crate::io::{
    json_bytes, read_capture_csv, read_occasions_csv, write_capture_csv, write_fit_outputs,
    write_occasions_csv, Manifest, Occasions, OutputDir, RunConfig, WaicRecord,
};
use crate::model::{Calendar, CaptureData, ModelSpec, TimeGrid};
use crate::priors::PriorConfig;
use crate::sampler::{self, DrawStore, FitContext, McmcConfig};
use crate::simulate::{augment, simulate_population, LagMode, ScenarioConfig, SimTruth, OCCASIONS_PER_YEAR};

fn scenario_for(cfg: &RunConfig, occasions: usize, seed: u64) -> Result<ScenarioConfig> {
    let mut sc = match &cfg.simulate.scenario {
        Some(sc) => sc.clone(),
        None => ScenarioConfig::rpt_scenario(occasions, seed)?,
    };
    sc.seed = seed;
    sc.validate()?;
    Ok(sc)
}

/// Occasion table of a simulated study; published-lag scenarios report by year.
pub fn scenario_occasions(sc: &ScenarioConfig, truth: &SimTruth) -> Occasions {
    let mut day_offsets = vec![0.0];
    for lag in &truth.day_lags {
        day_offsets.push(day_offsets.last().copied().unwrap_or(0.0) + lag);
    }
    let calendar = match sc.lags {
        LagMode::Published => {
            let labels: Vec<String> =
                (0..sc.occasions).map(|t| format!("year{}", t / OCCASIONS_PER_YEAR + 1)).collect();
            Calendar::from_occasion_labels(&labels)
        }
        _ => Calendar::single(sc.occasions),
    };
    Occasions { day_offsets, calendar }
}

fn grid_for(occ: &Occasions, cfg: &RunConfig) -> Result<TimeGrid> {
    if occ.len() == 1 {
        Ok(TimeGrid::single_occasion(cfg.unit))
    } else {
        occ.grid(cfg.unit)
    }
}

#[derive(Serialize)]
struct TruthRecord<'a> {
    expected_n_super: f64,
    scenario: &'a ScenarioConfig,
    truth: &'a SimTruth,
}

fn labels_csv(ids: &[String], labels: &[usize], names: &[String]) -> Vec<u8> {
    let mut out = String::from("id,group\n");
    for (id, &g) in ids.iter().zip(labels) {
        out.push_str(&format!("{id},{}\n", names[g]));
    }
    out.into_bytes()
}

/// `simulate`: one data set from the configured scenario.
pub fn simulate_command(cfg: &RunConfig) -> Result<Manifest> {
    let sc = scenario_for(cfg, cfg.simulate.occasions, cfg.seed)?;
    let (data, truth, _) = simulate_population(&sc)?;
    let occ = scenario_occasions(&sc, &truth);
    let mut dir = OutputDir::create(&cfg.out)?;
    let mut buf = Vec::new();
    write_capture_csv(&data, &mut buf).map_err(|e| Error::io(dir.path().join("capture.csv"), e))?;
    dir.write("capture.csv", &buf)?;
    buf.clear();
    write_occasions_csv(&occ, &mut buf).map_err(|e| Error::io(dir.path().join("occasions.csv"), e))?;
    dir.write("occasions.csv", &buf)?;
    let record = TruthRecord { expected_n_super: sc.expected_n_super(), scenario: &sc, truth: &truth };
    dir.write("truth.json", &json_bytes(&record)?)?;
    dir.write("truth_labels.csv", &labels_csv(data.ids(), &truth.observed_labels(), &sc.spec.group_names()))?;
    dir.finish("simulate", cfg, &[])
}

/// Fits `spec` to observed data and summarises the posterior.
#[allow(clippy::too_many_arguments)]
pub fn fit_data(
    data: &CaptureData,
    grid: TimeGrid,
    calendar: &Calendar,
    spec: ModelSpec,
    label: &str,
    priors: PriorConfig,
    mcmc: &McmcConfig,
    n_augment: usize,
) -> Result<(DrawStore, FitSummary)> {
    calendar.validate(data.n_occasions())?;
    let ctx = FitContext::new(augment(data, n_augment), grid, spec, priors)?;
    let store = sampler::run_fit(&ctx, mcmc)?;
    let summary = fit_summary(&store, calendar, label)?;
    Ok((store, summary))
}

fn load_inputs(cfg: &RunConfig) -> Result<(CaptureData, Occasions, Vec<PathBuf>)> {
    let data_path = cfg.data.as_ref().ok_or_else(|| Error::invalid("no capture data given (--data)"))?;
    let data = read_capture_csv(data_path)?;
    let mut inputs = vec![data_path.clone()];
    let mut occ = match &cfg.occasions {
        Some(path) => {
            inputs.push(path.clone());
            read_occasions_csv(path)?
        }
        None => Occasions {
            day_offsets: (0..data.n_occasions()).map(|t| t as f64 * cfg.unit.days()).collect(),
            calendar: Calendar::single(data.n_occasions()),
        },
    };
    if occ.len() != data.n_occasions() {
        return Err(Error::invalid(format!(
            "the occasion table has {} rows but the capture matrix has {} occasions",
            occ.len(),
            data.n_occasions()
        )));
    }
    if let Some(labels) = &cfg.calendar {
        occ.calendar = Calendar::from_occasion_labels(labels);
        occ.calendar.validate(data.n_occasions())?;
    }
    Ok((data, occ, inputs))
}

/// `fit`: posterior draws and summaries for one model.
pub fn fit_command(cfg: &RunConfig) -> Result<Manifest> {
    let (data, occ, inputs) = load_inputs(cfg)?;
    let spec = cfg.model.spec()?;
    let label = cfg.model.label()?;
    let grid = grid_for(&occ, cfg)?;
    let (store, summary) =
        fit_data(&data, grid, &occ.calendar, spec, &label, cfg.priors.clone(), &cfg.mcmc, cfg.augment)?;
    let mut dir = OutputDir::create(&cfg.out)?;
    write_fit_outputs(&mut dir, &store, &summary, data.ids())?;
    dir.finish("fit", cfg, &inputs)
}

/// Fit directories under `paths`: each path itself if it holds `waic.json`,
/// otherwise its immediate subdirectories that do.
fn fit_dirs(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.join("waic.json").is_file() {
            out.push(p.clone());
            continue;
        }
        let mut subs: Vec<PathBuf> = fs::read_dir(p)
            .map_err(|e| Error::io(p, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|s| s.join("waic.json").is_file())
            .collect();
        subs.sort();
        out.extend(subs);
    }
    if out.is_empty() {
        return Err(Error::invalid("no fit directories (with waic.json) found"));
    }
    Ok(out)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// `compare`: WAIC table over fitted models, best first.
pub fn compare_command(cfg: &RunConfig, fits: &[PathBuf]) -> Result<Manifest> {
    let dirs = fit_dirs(fits)?;
    let mut rows = Vec::new();
    let mut inputs = Vec::new();
    for d in &dirs {
        let w: WaicRecord = read_json(&d.join("waic.json"))?;
        let summary: serde_json::Value = read_json(&d.join("summary.json"))?;
        let n = &summary["N_super"];
        let get = |k: &str| n[k].as_f64().unwrap_or(f64::NAN);
        rows.push((w, d.display().to_string(), get("median"), get("lower"), get("upper")));
        inputs.push(d.join("waic.json"));
        inputs.push(d.join("summary.json"));
    }
    rows.sort_by(|a, b| a.0.waic.total_cmp(&b.0.waic).then_with(|| a.1.cmp(&b.1)));
    let best = rows[0].0.waic;
    let mut text =
        String::from("model,fit,waic,lppd,p_waic,delta_waic,N_super_median,N_super_lower,N_super_upper\n");
    for (w, fit, med, lo, hi) in &rows {
        text.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            w.model,
            fit,
            w.waic,
            w.lppd,
            w.p_waic,
            w.waic - best,
            med,
            lo,
            hi
        ));
    }
    let mut dir = OutputDir::create(&cfg.out)?;
    dir.write("compare.csv", text.as_bytes())?;
    dir.finish("compare", cfg, &inputs)
}

#[derive(Debug, Serialize)]
struct ClassifyRecord {
    individuals: usize,
    mauc: f64,
    skipped_pairs: Vec<(String, String)>,
    map_accuracy: f64,
}

/// `classify`: MAP groups from a fit, scored against known labels when given.
pub fn classify_command(cfg: &RunConfig, fit: &Path, truth: Option<&Path>) -> Result<Manifest> {
    let membership_path = fit.join("membership.csv");
    let (groups, ids, rows) = read_membership(&membership_path)?;
    let map = map_classify(&rows);
    let mut dir = OutputDir::create(&cfg.out)?;
    dir.write("classification.csv", &classification_csv(&ids, &groups, &rows, &map)?)?;
    let mut inputs = vec![membership_path];
    if let Some(truth_path) = truth {
        let mut rdr = csv::Reader::from_path(truth_path)?;
        let mut known = BTreeMap::new();
        for rec in rdr.records() {
            let rec = rec?;
            known.insert(rec[0].to_string(), rec[1].to_string());
        }
        let labels = ids
            .iter()
            .map(|id| {
                let name = known.get(id).ok_or_else(|| {
                    Error::invalid(format!("{}: no label for id `{id}`", truth_path.display()))
                })?;
                groups.iter().position(|g| g == name).ok_or_else(|| {
                    Error::invalid(format!("label `{name}` of `{id}` is not a group of the fit"))
                })
            })
            .collect::<Result<Vec<usize>>>()?;
        let m = mauc(&rows, &labels)?;
        let hits = map.iter().zip(&labels).filter(|(a, b)| a == b).count();
        let record = ClassifyRecord {
            individuals: ids.len(),
            mauc: m.value,
            skipped_pairs: m
                .skipped_pairs
                .iter()
                .map(|&(a, b)| (groups[a].clone(), groups[b].clone()))
                .collect(),
            map_accuracy: hits as f64 / ids.len() as f64,
        };
        dir.write("classify.json", &json_bytes(&record)?)?;
        inputs.push(truth_path.to_path_buf());
    }
    dir.finish("classify", cfg, &inputs)
}

/// `diagnose`: R-hat per trace, survival overlap and wide traces.
pub fn diagnose_command(cfg: &RunConfig, fit: &Path) -> Result<Manifest> {
    let traces = read_draws(fit)?;
    let mut diag = String::from("parameter,mean,sd,median,lower,upper,rhat,constant\n");
    for (name, chains) in &traces {
        let pooled: Vec<f64> = chains.iter().flatten().copied().collect();
        let s = summarise(&pooled)?;
        let (r, constant) = match rhat(chains) {
            Ok(r) => (r.value.to_string(), r.constant),
            Err(_) => (String::new(), false),
        };
        let quoted = if name.contains(',') { format!("\"{name}\"") } else { name.clone() };
        diag.push_str(&format!(
            "{quoted},{},{},{},{},{},{r},{constant}\n",
            s.mean, s.sd, s.median, s.lower, s.upper
        ));
    }
    // Overlap between every pair of time-constant survival posteriors.
    let phis: Vec<&(String, Vec<Vec<f64>>)> =
        traces.iter().filter(|(n, _)| n.starts_with("phi") && !n.contains(',')).collect();
    let mut ov = String::from("a,b,ov\n");
    for i in 0..phis.len() {
        for j in i + 1..phis.len() {
            let a: Vec<f64> = phis[i].1.iter().flatten().copied().collect();
            let b: Vec<f64> = phis[j].1.iter().flatten().copied().collect();
            ov.push_str(&format!("{},{},{}\n", phis[i].0, phis[j].0, overlap_index(&a, &b)?));
        }
    }
    let params: Vec<&(String, Vec<Vec<f64>>)> =
        traces.iter().filter(|(n, _)| crate::io::block_of(n) != "abundance").collect();
    let mut wide = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["chain".to_string(), "draw".to_string()];
    header.extend(params.iter().map(|(n, _)| n.clone()));
    wide.write_record(&header)?;
    if let Some((_, first)) = params.first() {
        for (c, chain) in first.iter().enumerate() {
            for s in 0..chain.len() {
                let mut rec = vec![c.to_string(), (s + 1).to_string()];
                rec.extend(params.iter().map(|(_, ch)| ch[c][s].to_string()));
                wide.write_record(&rec)?;
            }
        }
    }
    let wide = wide.into_inner().map_err(|e| Error::invalid(format!("csv buffer: {e}")))?;
    let mut dir = OutputDir::create(&cfg.out)?;
    dir.write("diagnostics.csv", diag.as_bytes())?;
    dir.write("overlap.csv", ov.as_bytes())?;
    dir.write("traces.csv", &wide)?;
    let mut inputs: Vec<PathBuf> = fs::read_dir(fit)
        .map_err(|e| Error::io(fit, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with("draws_")))
        .collect();
    inputs.sort();
    dir.finish("diagnose", cfg, &inputs)
}

/// Seeds of replica `r` of the `T`-occasion scenario: (simulation, fit).
pub fn replica_seeds(seed: u64, occasions: usize, replica: usize) -> (u64, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((occasions as u64) << 32) | replica as u64);
    (rng.next_u64(), rng.next_u64())
}

/// Scores one fit of one simulated replica.
pub fn score_replica(
    occasions: usize,
    replica: usize,
    truth: &SimTruth,
    true_groups: &[String],
    store: &DrawStore,
    summary: &FitSummary,
) -> Result<ReplicaResult> {
    let phis: Vec<&String> =
        store.names.iter().filter(|n| n.starts_with("phi[") && !n.contains(',')).collect();
    let ov = if phis.len() == 2 {
        Some(overlap_index(&store.pooled(phis[0])?, &store.pooled(phis[1])?)?)
    } else {
        None
    };
    let (m, acc) = if summary.group_names == true_groups && true_groups.len() > 1 {
        let labels = truth.observed_labels();
        let m = mauc(&summary.membership, &labels)?;
        let hits = summary.map_labels.iter().zip(&labels).filter(|(a, b)| a == b).count();
        (Some(m.value), Some(hits as f64 / labels.len() as f64))
    } else {
        (None, None)
    };
    Ok(ReplicaResult {
        scenario: occasions,
        replica,
        model: summary.model.clone(),
        truth_n_super: truth.n_super as f64,
        median: summary.n_super.median,
        lower: summary.n_super.lower,
        upper: summary.n_super.upper,
        waic: summary.waic.waic,
        ov,
        mauc: m,
        map_accuracy: acc,
    })
}

fn replicas_csv(results: &[ReplicaResult]) -> Vec<u8> {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut out =
        String::from("T,replica,model,truth_N_super,median,lower,upper,waic,OV,mAUC,MAP_accuracy\n");
    for r in results {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.scenario,
            r.replica,
            r.model,
            r.truth_n_super,
            r.median,
            r.lower,
            r.upper,
            r.waic,
            opt(r.ov),
            opt(r.mauc),
            opt(r.map_accuracy)
        ));
    }
    out.into_bytes()
}

/// `experiment`: scenarios x replicas x models, reduced to a metrics table.
pub fn experiment_command(cfg: &RunConfig) -> Result<Manifest> {
    let ex = &cfg.experiment;
    if ex.replicas == 0 || ex.scenarios.is_empty() || ex.models.is_empty() {
        return Err(Error::invalid("experiment needs scenarios, models and at least one replica"));
    }
    let models: Vec<(String, ModelSpec)> = ex
        .models
        .iter()
        .map(|m| Ok((m.trim().to_ascii_uppercase(), m.parse::<ModelSpec>()?)))
        .collect::<Result<_>>()?;
    let mut expected = BTreeMap::new();
    for &t in &ex.scenarios {
        expected.insert(t, scenario_for(cfg, t, 0)?.expected_n_super());
    }
    let n_models = models.len();
    let replicas = ex.replicas;
    let jobs: Vec<(usize, usize, usize)> = ex
        .scenarios
        .iter()
        .flat_map(|&t| (0..replicas).flat_map(move |r| (0..n_models).map(move |m| (t, r, m))))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(t, r, m)| {
            let (sim_seed, fit_seed) = replica_seeds(cfg.seed, t, r);
            let sc = scenario_for(cfg, t, sim_seed)?;
            let (data, truth, grid) = simulate_population(&sc)?;
            let occ = scenario_occasions(&sc, &truth);
            let (label, spec) = &models[m];
            let mcmc = McmcConfig { seed: fit_seed, ..cfg.mcmc.clone() };
            let (store, summary) = fit_data(
                &data,
                grid,
                &occ.calendar,
                spec.clone(),
                label,
                cfg.priors.clone(),
                &mcmc,
                cfg.augment,
            )?;
            score_replica(t, r, &truth, &sc.spec.group_names(), &store, &summary)
        })
        .collect::<Result<Vec<_>>>()?;
    let table = experiment_metrics(&results, &expected)?;
    let mut dir = OutputDir::create(&cfg.out)?;
    for r in &results {
        dir.write(&format!("jobs/T{}_rep{}_{}.json", r.scenario, r.replica, r.model), &json_bytes(r)?)?;
    }
    dir.write("replicas.csv", &replicas_csv(&results))?;
    let mut buf = Vec::new();
    table.write_csv(&mut buf).map_err(|e| Error::io(dir.path().join("metrics.csv"), e))?;
    dir.write("metrics.csv", &buf)?;
    dir.finish("experiment", cfg, &[])
}
