//! Declarative run configuration (TOML) with command-line overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelSpec, TimeUnit};
use crate::priors::PriorConfig;
use crate::sampler::McmcConfig;
use crate::simulate::ScenarioConfig;

/// A named model (`rpt`, `m1`..`m10`) or an explicit structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelChoice {
    Named(String),
    Custom(ModelSpec),
}

impl Default for ModelChoice {
    fn default() -> Self {
        ModelChoice::Named("rpt".into())
    }
}

impl ModelChoice {
    pub fn spec(&self) -> Result<ModelSpec> {
        match self {
            ModelChoice::Named(name) => name.parse(),
            ModelChoice::Custom(spec) => {
                spec.validate()?;
                Ok(spec.clone())
            }
        }
    }

    /// Short label used in file names and tables.
    pub fn label(&self) -> Result<String> {
        Ok(match self {
            ModelChoice::Named(name) => name.trim().to_ascii_uppercase(),
            ModelChoice::Custom(spec) => spec.notation(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    /// Occasions of the reference scenario; ignored when `scenario` is given.
    pub occasions: usize,
    pub scenario: Option<ScenarioConfig>,
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self { occasions: 10, scenario: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    /// Occasion counts of the reference scenarios to run.
    pub scenarios: Vec<usize>,
    pub models: Vec<String>,
    pub replicas: usize,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self { scenarios: vec![10], models: vec!["rpt".into(), "m1".into()], replicas: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// All-zero rows appended before fitting.
    pub augment: usize,
    pub unit: TimeUnit,
    pub data: Option<PathBuf>,
    pub occasions: Option<PathBuf>,
    /// Reporting period per occasion; overrides the occasion table.
    pub calendar: Option<Vec<String>>,
    /// Output directory. Not part of the recorded configuration.
    #[serde(skip_serializing)]
    pub out: PathBuf,
    /// Worker threads. Results do not depend on it.
    #[serde(skip_serializing)]
    pub jobs: Option<usize>,
    pub model: ModelChoice,
    pub priors: PriorConfig,
    pub mcmc: McmcConfig,
    pub simulate: SimulateSection,
    pub experiment: ExperimentSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            augment: 500,
            unit: TimeUnit::Month,
            data: None,
            occasions: None,
            calendar: None,
            out: PathBuf::from("out"),
            jobs: None,
            model: ModelChoice::default(),
            priors: PriorConfig::default(),
            mcmc: McmcConfig::default(),
            simulate: SimulateSection::default(),
            experiment: ExperimentSection::default(),
        }
    }
}

/// Values given on the command line; `None` keeps the file value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub data: Option<PathBuf>,
    pub occasions: Option<PathBuf>,
    pub model: Option<String>,
    pub chains: Option<usize>,
    pub iters: Option<usize>,
    pub burnin: Option<usize>,
    pub thin: Option<usize>,
    pub seed: Option<u64>,
    pub augment: Option<usize>,
    pub unit: Option<TimeUnit>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    /// Reads a TOML config, or the `config` object of a run manifest (`.json`).
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        if path.extension().is_some_and(|e| e == "json") {
            let manifest: serde_json::Value = serde_json::from_str(&text)?;
            let config = manifest
                .get("config")
                .ok_or_else(|| Error::invalid(format!("{}: no `config` object", path.display())))?;
            Ok(serde_json::from_value(config.clone())?)
        } else {
            Self::from_toml(&text)
        }
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = &o.data {
            self.data = Some(v.clone());
        }
        if let Some(v) = &o.occasions {
            self.occasions = Some(v.clone());
        }
        if let Some(v) = &o.model {
            self.model = ModelChoice::Named(v.clone());
        }
        if let Some(v) = o.chains {
            self.mcmc.chains = v;
        }
        if let Some(v) = o.iters {
            self.mcmc.iters = v;
        }
        if let Some(v) = o.burnin {
            self.mcmc.burnin = v;
        }
        if let Some(v) = o.thin {
            self.mcmc.thin = v;
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.augment {
            self.augment = v;
        }
        if let Some(v) = o.unit {
            self.unit = v;
        }
        if let Some(v) = &o.out {
            self.out = v.clone();
        }
        if o.jobs.is_some() {
            self.jobs = o.jobs;
        }
        // One seed drives everything.
        self.mcmc.seed = self.seed;
    }

    pub fn validate(&self) -> Result<()> {
        self.priors.validate()?;
        self.mcmc.validate()?;
        self.model.spec()?;
        if self.jobs == Some(0) {
            return Err(Error::invalid("--jobs must be at least 1"));
        }
        for path in [&self.data, &self.occasions].into_iter().flatten() {
            if !path.exists() {
                return Err(Error::invalid(format!("{} does not exist", path.display())));
            }
        }
        Ok(())
    }

    /// The configuration as recorded next to the outputs.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::invalid(format!("cannot serialise config: {e}")))
    }
}
