//! Pseudo-population generator for RPT and generic mixture models.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::likelihood::{
    compound_survival, expected_nsuper, inclusion_prob, ALIVE, DEPARTED, NOT_ENTERED,
};
use crate::model::params::recentre;
use crate::model::{CaptureData, GroupParams, ModelSpec, TimeGrid, TimeUnit};

/// Within-year day lags between consecutive occasions of the reference design.
pub const WITHIN_YEAR_DAY_LAGS: [f64; 9] = [20.0, 1.0, 12.0, 15.0, 56.0, 9.0, 9.0, 12.0, 10.0];

/// Day lag between the last occasion of a year and the first of the next.
pub const YEAR_GAP_DAYS: f64 = 240.0;

pub const OCCASIONS_PER_YEAR: usize = 10;

/// Day lags of the reference design for `T` occasions (`T` a positive multiple of 10).
pub fn scenario_day_lags(occasions: usize) -> Result<Vec<f64>> {
    if occasions == 0 || !occasions.is_multiple_of(OCCASIONS_PER_YEAR) {
        return Err(Error::invalid(format!(
            "the reference design needs a positive multiple of {OCCASIONS_PER_YEAR} occasions, got {occasions}"
        )));
    }
    let years = occasions / OCCASIONS_PER_YEAR;
    let mut lags = Vec::with_capacity(occasions - 1);
    for y in 0..years {
        if y > 0 {
            lags.push(YEAR_GAP_DAYS);
        }
        lags.extend_from_slice(&WITHIN_YEAR_DAY_LAGS);
    }
    Ok(lags)
}

/// Reference time grid in months.
pub fn gen_scenario_timegrid(occasions: usize) -> Result<TimeGrid> {
    TimeGrid::from_day_lags(&scenario_day_lags(occasions)?, TimeUnit::Month)
}

/// How inter-occasion lags are produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum LagMode {
    /// The fixed published sequence, repeated per year.
    Published,
    /// Fresh within-year lags from a geometric law shifted to start at one day,
    /// with the fixed yearly gap.
    Geometric { p: f64 },
    /// Explicit day lags (length `T - 1`).
    Custom { day_lags: Vec<f64> },
}

/// How part-time captures are generated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PresenceMode {
    /// Draw presence `v ~ Bern(1 - delta)` then `y ~ Bern(p v)`.
    #[default]
    Explicit,
    /// Draw `y ~ Bern((1 - delta) p)` directly.
    Collapsed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub spec: ModelSpec,
    pub occasions: usize,
    /// Size of the simulated universe.
    pub m_star: usize,
    pub lags: LagMode,
    pub unit: TimeUnit,
    /// Generating parameters. `tau` is ignored when `tau_var` is set.
    pub params: GroupParams,
    /// When set, occasion effects are drawn from `N(0, tau_var)` and recentred.
    pub tau_var: Option<f64>,
    #[serde(default)]
    pub presence: PresenceMode,
    pub seed: u64,
}

/// Recruitment row of the reference resident or part-time group.
fn yearly_pulse(occasions: usize, first: f64, pulse: f64, base: f64) -> Vec<f64> {
    (0..occasions)
        .map(|t| {
            if t == 0 {
                first
            } else if t % OCCASIONS_PER_YEAR == 0 {
                pulse
            } else {
                base
            }
        })
        .collect()
}

/// Reference RPT parameters for `T` occasions; `tau` is zero.
pub fn rpt_truth(occasions: usize) -> GroupParams {
    GroupParams {
        weights: vec![0.2, 0.45, 0.35],
        rho: vec![
            yearly_pulse(occasions, 0.4, 0.02, 0.0025),
            yearly_pulse(occasions, 0.4, 0.04, 0.005),
            vec![0.02; occasions],
        ],
        phi: vec![vec![0.01], vec![0.997]],
        mu: vec![0.0],
        tau: vec![vec![0.0; occasions]],
        delta: 0.7,
    }
}

impl ScenarioConfig {
    /// The reference RPT scenario with `T` occasions.
    pub fn rpt_scenario(occasions: usize, seed: u64) -> Result<Self> {
        scenario_day_lags(occasions)?;
        Ok(Self {
            spec: ModelSpec::rpt(),
            occasions,
            m_star: 500,
            lags: LagMode::Published,
            unit: TimeUnit::Month,
            params: rpt_truth(occasions),
            tau_var: Some(0.25),
            presence: PresenceMode::Explicit,
            seed,
        })
    }

    /// `M* sum_g w_g psi_g` under the generating parameters.
    pub fn expected_n_super(&self) -> f64 {
        let layout = self.spec.layout();
        let psi: Vec<f64> =
            (0..layout.groups).map(|g| inclusion_prob(&self.params.rho[layout.rho_class[g]])).collect();
        expected_nsuper(self.m_star as f64, &self.params.weights, &psi)
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if self.m_star == 0 {
            return Err(Error::invalid("m_star must be positive"));
        }
        if let Some(v) = self.tau_var {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid("tau_var must be positive"));
            }
        }
        match &self.lags {
            LagMode::Published => {
                scenario_day_lags(self.occasions)?;
            }
            LagMode::Geometric { p } => {
                if !(*p > 0.0 && *p <= 1.0) {
                    return Err(Error::invalid(format!(
                        "geometric lag probability must be in (0, 1], got {p}"
                    )));
                }
                scenario_day_lags(self.occasions)?;
            }
            LagMode::Custom { day_lags } => {
                if day_lags.len() + 1 != self.occasions {
                    return Err(Error::invalid(format!(
                        "{} custom lags for {} occasions",
                        day_lags.len(),
                        self.occasions
                    )));
                }
            }
        }
        let layout = self.spec.layout();
        let mut probe = self.params.clone();
        if self.tau_var.is_some() {
            probe.tau = vec![vec![0.0; self.occasions]; layout.tau_classes];
        }
        probe.validate(&layout, self.occasions)
    }
}

/// Everything the generator drew, including the unobserved rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimTruth {
    pub params: GroupParams,
    pub day_lags: Vec<f64>,
    /// Zero-based labels for all `M*` rows.
    pub labels: Vec<usize>,
    /// Latent states (0 not entered, 1 alive, 2 departed), row-major `M* x T`.
    pub states: Vec<u8>,
    /// Presence indicators, row-major `M* x T`.
    pub presence: Vec<u8>,
    /// Universe row of each observed capture history, in output order.
    pub observed_rows: Vec<usize>,
    pub n_super: usize,
    pub n_t: Vec<usize>,
    pub n_group: Vec<usize>,
}

impl SimTruth {
    pub fn occasions(&self) -> usize {
        self.n_t.len()
    }

    /// True labels of the observed individuals.
    pub fn observed_labels(&self) -> Vec<usize> {
        self.observed_rows.iter().map(|&i| self.labels[i]).collect()
    }

    pub fn state_row(&self, i: usize) -> &[u8] {
        let n = self.occasions();
        &self.states[i * n..(i + 1) * n]
    }
}

fn draw_day_lags(config: &ScenarioConfig, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    match &config.lags {
        LagMode::Published => scenario_day_lags(config.occasions),
        LagMode::Custom { day_lags } => Ok(day_lags.clone()),
        LagMode::Geometric { p } => {
            let geo = Geometric::new(*p).map_err(|e| Error::invalid(e.to_string()))?;
            let mut lags = scenario_day_lags(config.occasions)?;
            for (j, lag) in lags.iter_mut().enumerate() {
                // Every tenth lag is the yearly gap.
                if (j + 1) % OCCASIONS_PER_YEAR != 0 {
                    *lag = (geo.sample(rng) + 1) as f64;
                }
            }
            Ok(lags)
        }
    }
}

fn categorical(weights: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.random::<f64>() * weights.iter().sum::<f64>();
    let mut acc = 0.0;
    for (g, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return g;
        }
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// Simulates a population and returns the observed histories, the truth and the grid.
pub fn simulate_population(config: &ScenarioConfig) -> Result<(CaptureData, SimTruth, TimeGrid)> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.occasions;
    let day_lags = draw_day_lags(config, &mut rng)?;
    let grid = TimeGrid::from_day_lags(&day_lags, config.unit)?;
    let layout = config.spec.layout();

    let mut params = config.params.clone();
    if let Some(var) = config.tau_var {
        let normal = Normal::new(0.0, var.sqrt()).map_err(|e| Error::invalid(e.to_string()))?;
        params.tau = (0..layout.tau_classes)
            .map(|_| {
                let mut row: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
                recentre(&mut row);
                row
            })
            .collect();
    }
    params.validate(&layout, n)?;

    let m = config.m_star;
    let mut labels = Vec::with_capacity(m);
    let mut states = vec![NOT_ENTERED; m * n];
    let mut presence = vec![0u8; m * n];
    let mut captures = vec![0u8; m * n];
    for i in 0..m {
        let g = categorical(&params.weights, &mut rng);
        labels.push(g);
        let row = i * n;
        let mut state = NOT_ENTERED;
        for t in 0..n {
            state = match state {
                NOT_ENTERED => {
                    if rng.random::<f64>() < params.recruitment(&layout, g, t) {
                        ALIVE
                    } else {
                        NOT_ENTERED
                    }
                }
                ALIVE => {
                    let phi = compound_survival(params.survival_base(&layout, g, t), grid.lag(t));
                    if rng.random::<f64>() < phi {
                        ALIVE
                    } else {
                        DEPARTED
                    }
                }
                _ => DEPARTED,
            };
            states[row + t] = state;
            if state != ALIVE {
                continue;
            }
            let p = params.capture_present(&layout, g, t);
            let thinned = layout.thinned[g];
            let (present, p_eff) = match (thinned, config.presence) {
                (false, _) => (true, p),
                (true, PresenceMode::Explicit) => (rng.random::<f64>() >= params.delta, p),
                (true, PresenceMode::Collapsed) => (true, (1.0 - params.delta) * p),
            };
            presence[row + t] = present as u8;
            if present && rng.random::<f64>() < p_eff {
                captures[row + t] = 1;
            }
        }
    }

    let mut observed_rows = Vec::new();
    let mut rows = Vec::new();
    for i in 0..m {
        let y = &captures[i * n..(i + 1) * n];
        if y.contains(&1) {
            observed_rows.push(i);
            rows.push(y.to_vec());
        }
    }
    if rows.is_empty() {
        return Err(Error::invalid(
            "the scenario produced no captured individual; check recruitment and capture parameters",
        ));
    }
    let ids = observed_rows.iter().map(|i| format!("ind{:04}", i + 1)).collect();
    let data = CaptureData::new(ids, rows)?;

    let mut n_t = vec![0usize; n];
    let mut n_group = vec![0usize; layout.groups];
    let mut n_super = 0;
    for i in 0..m {
        let s = &states[i * n..(i + 1) * n];
        for (t, &st) in s.iter().enumerate() {
            n_t[t] += (st == ALIVE) as usize;
        }
        if s.contains(&ALIVE) {
            n_super += 1;
            n_group[labels[i]] += 1;
        }
    }
    let truth = SimTruth { params, day_lags, labels, states, presence, observed_rows, n_super, n_t, n_group };
    Ok((data, truth, grid))
}

/// Appends `n_zero` all-zero rows.
pub fn augment(observed: &CaptureData, n_zero: usize) -> CaptureData {
    observed.augment(n_zero)
}
