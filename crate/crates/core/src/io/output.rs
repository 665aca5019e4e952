//! Result files. Every writer is deterministic: same inputs, same bytes.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::RunConfig;
use crate::error::{Error, Result};
use crate::inference::FitSummary;
use crate::sampler::{DrawStore, McmcConfig};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Serialises to pretty JSON with a trailing newline.
pub fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileRecord {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainSeed {
    pub chain: usize,
    pub seed: u64,
    pub stream: u64,
}

/// Everything needed to rerun a command and check its outputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_sha256: String,
    pub config: RunConfig,
    pub seed: u64,
    pub chain_seeds: Vec<ChainSeed>,
    pub inputs: Vec<FileRecord>,
    pub outputs: Vec<FileRecord>,
}

/// Collects the files of one run and writes the manifest last.
pub struct OutputDir {
    dir: PathBuf,
    outputs: Vec<FileRecord>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(Self { dir: dir.to_path_buf(), outputs: Vec::new() })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.outputs.push(FileRecord { file: name.to_string(), sha256: sha256_hex(bytes) });
        Ok(())
    }

    /// Writes `config.toml` and `manifest.json`.
    pub fn finish(mut self, command: &str, config: &RunConfig, inputs: &[PathBuf]) -> Result<Manifest> {
        let toml = config.to_toml()?;
        self.write("config.toml", toml.as_bytes())?;
        let inputs = inputs
            .iter()
            .map(|p| {
                let bytes = fs::read(p).map_err(|e| Error::io(p, e))?;
                Ok(FileRecord { file: p.display().to_string(), sha256: sha256_hex(&bytes) })
            })
            .collect::<Result<Vec<_>>>()?;
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config_sha256: sha256_hex(toml.as_bytes()),
            config: config.clone(),
            seed: config.seed,
            chain_seeds: chain_seeds(&config.mcmc),
            inputs,
            outputs: self.outputs.clone(),
        };
        let bytes = json_bytes(&manifest)?;
        let path = self.dir.join("manifest.json");
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        Ok(manifest)
    }
}

pub fn chain_seeds(mcmc: &McmcConfig) -> Vec<ChainSeed> {
    (0..mcmc.chains).map(|c| ChainSeed { chain: c, seed: mcmc.seed, stream: c as u64 }).collect()
}

/// Parameter block of a trace name: the part before `[`, or `abundance`
/// for derived traces.
pub fn block_of(name: &str) -> &str {
    let head = name.split('[').next().unwrap_or(name);
    match head {
        "N" | "N_super" | "psi" => "abundance",
        other => other,
    }
}

fn csv_bytes(rows: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    rows(&mut w)?;
    w.into_inner().map_err(|e| Error::invalid(format!("csv buffer: {e}")))
}

/// One long-format CSV (`chain,iter,parameter,value`) per parameter block,
/// keyed by file name.
pub fn draws_csvs(store: &DrawStore) -> Result<BTreeMap<String, Vec<u8>>> {
    let mut names: Vec<String> = store.names.clone();
    names.extend(store.derived_names());
    let mut blocks: Vec<(&str, Vec<&String>)> = Vec::new();
    for n in &names {
        let b = block_of(n);
        match blocks.iter_mut().find(|(k, _)| *k == b) {
            Some((_, v)) => v.push(n),
            None => blocks.push((b, vec![n])),
        }
    }
    let mut out = BTreeMap::new();
    for (block, members) in blocks {
        let traces = members.iter().map(|n| store.trace(n)).collect::<Result<Vec<_>>>()?;
        let bytes = csv_bytes(|w| {
            w.write_record(["chain", "iter", "parameter", "value"])?;
            for (c, chain) in store.chains.iter().enumerate() {
                for (s, &it) in chain.iters.iter().enumerate() {
                    for (n, tr) in members.iter().zip(&traces) {
                        w.write_record([
                            c.to_string(),
                            (it + 1).to_string(),
                            n.to_string(),
                            tr[c][s].to_string(),
                        ])?;
                    }
                }
            }
            Ok(())
        })?;
        out.insert(format!("draws_{block}.csv"), bytes);
    }
    Ok(out)
}

/// `id,<group>...` with one row per observed individual.
pub fn membership_csv(ids: &[String], summary: &FitSummary) -> Result<Vec<u8>> {
    csv_bytes(|w| {
        let mut header = vec!["id".to_string()];
        header.extend(summary.group_names.iter().cloned());
        w.write_record(&header)?;
        for (id, row) in ids.iter().zip(&summary.membership) {
            let mut rec = vec![id.clone()];
            rec.extend(row.iter().map(|p| p.to_string()));
            w.write_record(&rec)?;
        }
        Ok(())
    })
}

/// `id,group,probability` with the MAP group of each individual.
pub fn classification_csv(
    ids: &[String],
    groups: &[String],
    membership: &[Vec<f64>],
    map: &[usize],
) -> Result<Vec<u8>> {
    csv_bytes(|w| {
        w.write_record(["id", "group", "probability"])?;
        for ((id, row), &g) in ids.iter().zip(membership).zip(map) {
            w.write_record([id.clone(), groups[g].clone(), row[g].to_string()])?;
        }
        Ok(())
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct WaicRecord {
    pub model: String,
    pub waic: f64,
    pub lppd: f64,
    pub p_waic: f64,
    /// Observed rows, each with weight 1.
    pub observed_rows: usize,
    /// Weight of the shared all-zero row.
    pub zero_rows: usize,
}

/// Writes the standard file set of a fit.
pub fn write_fit_outputs(
    dir: &mut OutputDir,
    store: &DrawStore,
    summary: &FitSummary,
    ids: &[String],
) -> Result<()> {
    for (name, bytes) in draws_csvs(store)? {
        dir.write(&name, &bytes)?;
    }
    dir.write("summary.json", &json_bytes(summary)?)?;
    dir.write("membership.csv", &membership_csv(ids, summary)?)?;
    let waic = WaicRecord {
        model: summary.model.clone(),
        waic: summary.waic.waic,
        lppd: summary.waic.lppd,
        p_waic: summary.waic.p_waic,
        observed_rows: store.n_observed,
        zero_rows: store.n_augmented,
    };
    dir.write("waic.json", &json_bytes(&waic)?)?;
    Ok(())
}

/// Per-chain traces read back from `draws_*.csv` files, in first-seen order.
pub fn read_draws(dir: &Path) -> Result<Vec<(String, Vec<Vec<f64>>)>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("draws_") && n.ends_with(".csv"))
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::invalid(format!("{}: no draws_*.csv files", dir.display())));
    }
    let mut traces: Vec<(String, Vec<Vec<f64>>)> = Vec::new();
    for path in files {
        let mut rdr = csv::Reader::from_path(&path)?;
        for rec in rdr.records() {
            let rec = rec?;
            let bad = || Error::invalid(format!("{}: malformed draw row {:?}", path.display(), rec));
            let chain: usize = rec.get(0).and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let name = rec.get(2).ok_or_else(bad)?;
            let value: f64 = rec.get(3).and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let idx = match traces.iter().position(|(n, _)| n == name) {
                Some(i) => i,
                None => {
                    traces.push((name.to_string(), Vec::new()));
                    traces.len() - 1
                }
            };
            let chains = &mut traces[idx].1;
            if chains.len() <= chain {
                chains.resize(chain + 1, Vec::new());
            }
            chains[chain].push(value);
        }
    }
    Ok(traces)
}

/// Group names, individual ids and probability rows.
pub type Membership = (Vec<String>, Vec<String>, Vec<Vec<f64>>);

/// Group names and membership rows read back from `membership.csv`.
pub fn read_membership(path: &Path) -> Result<Membership> {
    let mut rdr = csv::Reader::from_path(path)?;
    let groups: Vec<String> = rdr.headers()?.iter().skip(1).map(String::from).collect();
    let (mut ids, mut rows) = (Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec = rec?;
        ids.push(rec[0].to_string());
        let row = rec
            .iter()
            .skip(1)
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
        rows.push(row);
    }
    Ok((groups, ids, rows))
}
