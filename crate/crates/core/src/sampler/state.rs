//! Fit context, chain state and initialisation.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Gamma, Normal};

use super::config::McmcConfig;
use crate::error::{Error, Result};
use crate::model::likelihood::{ALIVE, DEPARTED, NOT_ENTERED, PROB_EPS};
use crate::model::params::recentre;
use crate::model::{CaptureData, GroupParams, LatentState, Layout, ModelSpec, TimeGrid};
use crate::priors::{dorazio_params, OrderedChainSpec, PriorConfig};

/// Immutable inputs shared by all chains of a fit.
#[derive(Debug, Clone)]
pub struct FitContext {
    pub data: CaptureData,
    pub grid: TimeGrid,
    pub spec: ModelSpec,
    pub layout: Layout,
    pub priors: PriorConfig,
    pub survival_prior: OrderedChainSpec,
}

impl FitContext {
    pub fn new(data: CaptureData, grid: TimeGrid, spec: ModelSpec, priors: PriorConfig) -> Result<Self> {
        spec.validate()?;
        priors.validate()?;
        if data.n_occasions() != grid.len() {
            return Err(Error::invalid(format!(
                "capture matrix has {} occasions but the time grid has {}",
                data.n_occasions(),
                grid.len()
            )));
        }
        let layout = spec.layout();
        let survival_prior = priors.survival_chain(layout.phi_classes)?;
        Ok(Self { data, grid, spec, layout, priors, survival_prior })
    }

    pub fn occasions(&self) -> usize {
        self.grid.len()
    }

    /// Number of survival values per class.
    pub fn phi_len(&self) -> usize {
        if self.layout.phi_time {
            self.occasions().saturating_sub(1)
        } else {
            1
        }
    }

    /// Dorazio shapes for zero-based occasion `t`.
    pub fn recruitment_prior(&self, t: usize) -> (f64, f64) {
        dorazio_params(t + 1, self.occasions()).expect("occasion in range")
    }
}

/// Parameters, latent state and random stream of one chain.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub params: GroupParams,
    pub latent: LatentState,
    pub iter: usize,
    pub rng: ChaCha8Rng,
}

/// Private stream for chain `chain` under a run seed.
pub fn chain_rng(seed: u64, chain: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain as u64);
    rng
}

pub(crate) fn clamp_open(x: f64) -> f64 {
    x.clamp(PROB_EPS, 1.0 - PROB_EPS)
}

pub(crate) fn sample_beta(a: f64, b: f64, rng: &mut impl Rng) -> f64 {
    let d = Beta::new(a, b).expect("positive Beta shapes");
    clamp_open(d.sample(rng))
}

/// Normalised Gamma draws with shapes `alpha`.
pub(crate) fn sample_dirichlet(alpha: &[f64], rng: &mut impl Rng) -> Vec<f64> {
    let mut draws: Vec<f64> =
        alpha.iter().map(|&a| Gamma::new(a, 1.0).expect("positive shape").sample(rng)).collect();
    let total: f64 = draws.iter().sum();
    if total > 0.0 && total.is_finite() {
        for d in draws.iter_mut() {
            *d /= total;
        }
    } else {
        // All draws underflowed: fall back to the largest shape.
        let best = alpha.iter().enumerate().fold(0, |b, (g, &a)| if a > alpha[b] { g } else { b });
        draws.fill(0.0);
        draws[best] = 1.0;
    }
    draws
}

pub(crate) fn sample_categorical(weights: &[f64], rng: &mut impl Rng) -> usize {
    let total: f64 = weights.iter().sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (g, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return g;
        }
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// One draw of every parameter block from its prior.
pub fn draw_from_prior(ctx: &FitContext, rng: &mut impl Rng) -> GroupParams {
    let layout = &ctx.layout;
    let n = ctx.occasions();
    let weights = sample_dirichlet(&vec![ctx.priors.dirichlet; layout.groups], rng);
    let rho = (0..layout.rho_classes)
        .map(|_| {
            (0..n)
                .map(|t| {
                    let (a, b) = ctx.recruitment_prior(t);
                    sample_beta(a, b, rng)
                })
                .collect()
        })
        .collect();
    let mut phi = vec![Vec::with_capacity(ctx.phi_len()); layout.phi_classes];
    for _ in 0..ctx.phi_len() {
        let u = ctx.survival_prior.sample(rng);
        for (k, v) in u.into_iter().enumerate() {
            phi[k].push(v);
        }
    }
    let mu_sd = ctx.priors.mu_var.sqrt();
    let mu =
        (0..layout.mu_classes).map(|_| Normal::new(0.0, mu_sd).expect("finite sd").sample(rng)).collect();
    let tau_normal = Normal::new(0.0, ctx.priors.tau_var.sqrt()).expect("finite sd");
    let tau = (0..layout.tau_classes)
        .map(|_| {
            let mut row: Vec<f64> = (0..n).map(|_| tau_normal.sample(rng)).collect();
            recentre(&mut row);
            row
        })
        .collect();
    let delta =
        if layout.has_thinning() { sample_beta(ctx.priors.delta.0, ctx.priors.delta.1, rng) } else { 0.0 };
    GroupParams { weights, rho, phi, mu, tau, delta }
}

/// Starting state for chain `chain`.
///
/// Observed rows are alive from first to last capture; augmented rows are
/// never entered with probability 1/2, otherwise alive on a random window.
/// Labels come from the starting weights.
pub fn init_state(ctx: &FitContext, mcmc: &McmcConfig, chain: usize) -> Result<ChainState> {
    let mut rng = chain_rng(mcmc.seed, chain);
    let params = match &mcmc.init {
        Some(p) => {
            p.validate(&ctx.layout, ctx.occasions())?;
            p.clone()
        }
        None => draw_from_prior(ctx, &mut rng),
    };
    let n = ctx.occasions();
    let m = ctx.data.total();
    let d = ctx.data.n_observed();
    let mut latent = LatentState::empty(m, n);
    let mut path = vec![NOT_ENTERED; n];
    for i in 0..m {
        let (entry, exit) = if i < d {
            let y = ctx.data.history(i);
            let first = y.iter().position(|&v| v == 1).expect("observed rows have a capture");
            let last = y.iter().rposition(|&v| v == 1).expect("observed rows have a capture");
            (first, last)
        } else if rng.random::<f64>() < 0.5 {
            (n, n)
        } else {
            let entry = rng.random_range(0..n);
            (entry, rng.random_range(entry..n))
        };
        for (t, s) in path.iter_mut().enumerate() {
            *s = if t < entry {
                NOT_ENTERED
            } else if t <= exit {
                ALIVE
            } else {
                DEPARTED
            };
        }
        latent.set_path(i, &path);
        latent.labels[i] = sample_categorical(&params.weights, &mut rng);
    }
    Ok(ChainState { params, latent, iter: 0, rng })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TimeUnit;

    fn toy_context() -> FitContext {
        let data =
            CaptureData::from_rows(vec![vec![0, 1, 0, 0, 1, 0], vec![1, 0, 0, 0, 0, 0]]).unwrap().augment(20);
        let grid = TimeGrid::new((0..6).map(|t| t as f64 * 30.0).collect(), TimeUnit::Month).unwrap();
        FitContext::new(data, grid, ModelSpec::rpt(), PriorConfig::default()).unwrap()
    }

    #[test]
    fn observed_windows_cover_captures() {
        let ctx = toy_context();
        let st = init_state(&ctx, &McmcConfig::default(), 0).unwrap();
        assert_eq!(st.latent.z_row(0), &[0, 1, 1, 1, 1, 0]);
        assert_eq!(st.latent.z_row(1), &[1, 0, 0, 0, 0, 0]);
        st.latent.check(|g| ctx.layout.thinned[g]).unwrap();
        st.params.validate(&ctx.layout, 6).unwrap();
    }

    #[test]
    fn same_seed_same_state() {
        let ctx = toy_context();
        let cfg = McmcConfig::default();
        let a = init_state(&ctx, &cfg, 1).unwrap();
        let b = init_state(&ctx, &cfg, 1).unwrap();
        assert_eq!(a.params, b.params);
        assert_eq!(a.latent, b.latent);
        let c = init_state(&ctx, &cfg, 0).unwrap();
        assert_ne!(a.params, c.params);
    }

    #[test]
    fn prior_draws_respect_order() {
        let ctx = toy_context();
        let mut rng = chain_rng(3, 0);
        for _ in 0..500 {
            let p = draw_from_prior(&ctx, &mut rng);
            assert!(p.phi[0][0] < p.phi[1][0]);
            p.validate(&ctx.layout, 6).unwrap();
        }
    }

    #[test]
    fn mismatched_grid_is_rejected() {
        let data = CaptureData::from_rows(vec![vec![1, 0, 1]]).unwrap();
        let grid = TimeGrid::new(vec![0.0, 1.0], TimeUnit::Day).unwrap();
        assert!(FitContext::new(data, grid, ModelSpec::homogeneous(), PriorConfig::default()).is_err());
    }
}
