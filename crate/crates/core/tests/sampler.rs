//! Sampler checks against exact answers: enumerated posteriors, conjugate
//! full conditionals and a two-dimensional quadrature.

use std::collections::BTreeMap;

use jsmix::model::enumerate::enumerated_posterior;
use jsmix::model::likelihood::logistic;
use jsmix::model::{CaptureData, GroupKernel, GroupParams, ModelSpec, TimeGrid, TimeUnit};
use jsmix::priors::PriorConfig;
use jsmix::sampler::{
    run_fit, update_recruitment, update_weights, ChainRunner, FitContext, FrozenBlocks, McmcConfig, Tallies,
};
use jsmix::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn chi2_p(observed: &BTreeMap<String, usize>, expected: &BTreeMap<String, f64>, n: usize) -> f64 {
    let mut stat = 0.0;
    for (k, p) in expected {
        let e = p * n as f64;
        let o = *observed.get(k).unwrap_or(&0) as f64;
        stat += (o - e).powi(2) / e;
    }
    assert!(observed.keys().all(|k| expected.contains_key(k)), "draw outside the support");
    1.0 - ChiSquared::new((expected.len() - 1) as f64).unwrap().cdf(stat)
}

fn tiny_rpt() -> (FitContext, GroupParams) {
    let rows = vec![vec![1, 0, 0], vec![0, 1, 1], vec![1, 0, 1]];
    let data = CaptureData::from_rows(rows).unwrap().augment(2);
    let grid = TimeGrid::new(vec![0.0, 1.0, 3.0], TimeUnit::Month).unwrap();
    let ctx = FitContext::new(data, grid, ModelSpec::rpt(), PriorConfig::default()).unwrap();
    let params = GroupParams {
        weights: vec![0.3, 0.45, 0.25],
        rho: vec![vec![0.4, 0.2, 0.3], vec![0.5, 0.1, 0.2], vec![0.2, 0.3, 0.4]],
        phi: vec![vec![0.2], vec![0.9]],
        mu: vec![0.3],
        tau: vec![vec![0.2, -0.5, 0.3]],
        delta: 0.6,
    };
    params.validate(&ctx.layout, 3).unwrap();
    (ctx, params)
}

#[test]
fn frozen_tiny_model_matches_enumeration() {
    let (ctx, params) = tiny_rpt();
    let kernels = GroupKernel::all(&params, &ctx.layout, &ctx.grid);
    let mcmc = McmcConfig {
        chains: 1,
        iters: 30_001,
        burnin: 1,
        thin: 1,
        seed: 8,
        frozen: FrozenBlocks::parameters(),
        init: Some(params.clone()),
        ..McmcConfig::default()
    };
    let mut runner = ChainRunner::new(&ctx, &mcmc, 0).unwrap();
    let draws = 30_000;
    // Observed row 0 and the first all-zero row.
    for row in [0, 3] {
        let y = ctx.data.history(row).to_vec();
        let mut expected = BTreeMap::new();
        let mut total = 0.0;
        for (g, k) in kernels.iter().enumerate() {
            let ll = jsmix::model::forward_loglik(&y, k).exp();
            for (path, p) in enumerated_posterior(&y, k) {
                let w = params.weights[g] * ll * p;
                expected.insert(format!("{g}:{path:?}"), w);
                total += w;
            }
        }
        for v in expected.values_mut() {
            *v /= total;
        }
        let mut observed = BTreeMap::new();
        for _ in 0..draws {
            runner.sweep().unwrap();
            let key = format!("{}:{:?}", runner.state.latent.labels[row], runner.state.latent.path(row));
            *observed.entry(key).or_insert(0usize) += 1;
        }
        let p = chi2_p(&observed, &expected, draws);
        assert!(p > 0.01, "row {row}: p = {p}");
    }
}

#[test]
fn frozen_latent_state_needs_frozen_parameters() {
    let mcmc = McmcConfig {
        frozen: FrozenBlocks { labels: true, ..FrozenBlocks::default() },
        ..McmcConfig::default()
    };
    assert!(matches!(mcmc.validate(), Err(Error::InvalidInput(_))));
}

#[test]
fn recruitment_is_conjugate() {
    let data = CaptureData::from_rows(vec![vec![1; 10]]).unwrap();
    let grid = TimeGrid::new((0..10).map(f64::from).collect(), TimeUnit::Month).unwrap();
    let ctx = FitContext::new(data, grid, ModelSpec::homogeneous(), PriorConfig::default()).unwrap();
    let mut tallies = Tallies {
        groups: 1,
        occasions: 10,
        at_risk: vec![0; 10],
        recruits: vec![0; 10],
        ..Tallies::default()
    };
    tallies.at_risk[0] = 100;
    tallies.recruits[0] = 40;
    let mut params = GroupParams::neutral(&ctx.layout, 10);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 200_000;
    let (mut s0, mut s5) = (0.0, 0.0);
    for _ in 0..n {
        update_recruitment(&ctx, &tallies, &mut params, &mut rng);
        s0 += params.rho[0][0];
        s5 += params.rho[0][5];
    }
    // Beta(40.1, 61.9) at the first occasion, the prior Beta(0.1, 1.4) at the sixth.
    let (m0, m5): (f64, f64) = (40.1 / 102.0, 0.1 / 1.5);
    let sd0 = (m0 * (1.0 - m0) / 103.0).sqrt();
    let sd5 = (m5 * (1.0 - m5) / 2.5).sqrt();
    let se = |sd: f64| 4.0 * sd / (n as f64).sqrt();
    assert!((s0 / n as f64 - m0).abs() < se(sd0), "{}", s0 / n as f64);
    assert!((s5 / n as f64 - m5).abs() < se(sd5), "{}", s5 / n as f64);
}

#[test]
fn weights_are_conjugate() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let counts = [3, 0, 7];
    let n = 100_000;
    let mut sums = [0.0; 3];
    for _ in 0..n {
        let w = update_weights(&counts, 1.0, &mut rng);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for (s, v) in sums.iter_mut().zip(&w) {
            *s += v;
        }
    }
    for (g, want) in [4.0 / 13.0, 1.0 / 13.0, 8.0 / 13.0].iter().enumerate() {
        let sd = (want * (1.0 - want) / 14.0f64).sqrt();
        assert!((sums[g] / n as f64 - want).abs() < 4.0 * sd / (n as f64).sqrt());
    }
}

/// Batch-means standard error of the mean.
fn batch_se(x: &[f64]) -> f64 {
    let b = 50;
    let len = x.len() / b;
    let means: Vec<f64> =
        (0..b).map(|k| x[k * len..(k + 1) * len].iter().sum::<f64>() / len as f64).collect();
    let m = means.iter().sum::<f64>() / b as f64;
    (means.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (b - 1) as f64 / b as f64).sqrt()
}

#[test]
fn single_occasion_posterior_matches_quadrature() {
    // D captured of M rows, one occasion: y_i ~ Bern(rho p), rho ~ U(0,1),
    // logit p ~ N(0, 10).
    let (d, m) = (30usize, 100usize);
    let data = CaptureData::from_rows(vec![vec![1]; d]).unwrap().augment(m - d);
    let grid = TimeGrid::single_occasion(TimeUnit::Month);
    let ctx = FitContext::new(data, grid, ModelSpec::homogeneous(), PriorConfig::default()).unwrap();
    let mcmc =
        McmcConfig { chains: 2, iters: 40_000, burnin: 2_000, thin: 1, seed: 12, ..McmcConfig::default() };
    let store = run_fit(&ctx, &mcmc).unwrap();

    let (nr, nm) = (800, 1600);
    let (mut z, mut e_rho, mut e_mu, mut e_n) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..nr {
        let rho = (i as f64 + 0.5) / nr as f64;
        for j in 0..nm {
            let mu = -12.0 + 24.0 * (j as f64 + 0.5) / nm as f64;
            let p = logistic(mu);
            let q = rho * p;
            let lw = d as f64 * q.ln() + (m - d) as f64 * (-q).ln_1p() - mu * mu / 20.0;
            let w = (lw + 60.0).exp();
            z += w;
            e_rho += w * rho;
            e_mu += w * mu;
            e_n += w * (d as f64 + (m - d) as f64 * rho * (1.0 - p) / (1.0 - q));
        }
    }
    let want = [("rho[1]", e_rho / z), ("mu", e_mu / z), ("N_super", e_n / z)];
    for (name, w) in want {
        let draws = store.pooled(name).unwrap();
        let got = draws.iter().sum::<f64>() / draws.len() as f64;
        let se = batch_se(&draws);
        assert!((got - w).abs() < 4.0 * se + 1e-3 * w.abs(), "{name}: {got} vs {w} (se {se})");
    }
}

#[test]
fn zero_delta_makes_part_timers_look_resident() {
    let (ctx, mut params) = tiny_rpt();
    params.delta = 0.0;
    params.rho[1] = params.rho[0].clone();
    let kernels = GroupKernel::all(&params, &ctx.layout, &ctx.grid);
    assert_eq!(kernels[0], kernels[1]);
    for i in 0..ctx.data.total() {
        let y = ctx.data.history(i);
        let (a, b) =
            (jsmix::model::forward_loglik(y, &kernels[0]), jsmix::model::forward_loglik(y, &kernels[1]));
        assert_eq!(a, b);
    }
}

#[test]
fn chains_are_reproducible_and_distinct() {
    let (ctx, _) = tiny_rpt();
    let mcmc = McmcConfig { chains: 2, iters: 300, burnin: 100, seed: 3, ..McmcConfig::default() };
    let a = run_fit(&ctx, &mcmc).unwrap();
    let b = run_fit(&ctx, &mcmc).unwrap();
    assert_eq!(a.trace("N_super").unwrap(), b.trace("N_super").unwrap());
    assert_eq!(a.trace("phi[NT]").unwrap(), b.trace("phi[NT]").unwrap());
    let t = a.trace("phi[NT]").unwrap();
    assert_ne!(t[0], t[1]);
}

#[test]
fn adapted_acceptance_lands_near_target() {
    let (ctx, _) = tiny_rpt();
    let mcmc = McmcConfig { chains: 1, iters: 6000, burnin: 3000, seed: 21, ..McmcConfig::default() };
    let store = run_fit(&ctx, &mcmc).unwrap();
    for (block, rate) in &store.chains[0].acceptance {
        if rate.is_finite() {
            assert!((0.15..=0.5).contains(rate), "{block}: {rate}");
        }
    }
}

#[test]
fn invariant_errors_map_to_exit_code_three() {
    assert_eq!(Error::invariant("x").exit_code(), 3);
    assert_eq!(Error::invalid("x").exit_code(), 2);
}

#[test]
fn weights_alone_match_simplex_quadrature() {
    let (ctx, params) = tiny_rpt();
    let kernels = GroupKernel::all(&params, &ctx.layout, &ctx.grid);
    let lik: Vec<Vec<f64>> = (0..ctx.data.total())
        .map(|i| kernels.iter().map(|k| jsmix::model::forward_loglik(ctx.data.history(i), k).exp()).collect())
        .collect();
    let mcmc = McmcConfig {
        chains: 2,
        iters: 40_000,
        burnin: 2_000,
        thin: 1,
        seed: 31,
        frozen: FrozenBlocks {
            delta: true,
            recruitment: true,
            survival: true,
            capture: true,
            ..FrozenBlocks::default()
        },
        init: Some(params),
        ..McmcConfig::default()
    };
    let store = run_fit(&ctx, &mcmc).unwrap();

    // Flat Dirichlet times the mixture likelihood on a simplex grid.
    let n = 600;
    let (mut z, mut e) = (0.0, [0.0; 3]);
    for a in 0..n {
        for b in 0..n - a {
            let w = [(a as f64 + 1.0 / 3.0) / n as f64, (b as f64 + 1.0 / 3.0) / n as f64];
            let w = [w[0], w[1], 1.0 - w[0] - w[1]];
            if w[2] <= 0.0 {
                continue;
            }
            let l: f64 = lik.iter().map(|r| r.iter().zip(&w).map(|(x, y)| x * y).sum::<f64>()).product();
            z += l;
            for g in 0..3 {
                e[g] += l * w[g];
            }
        }
    }
    for (g, name) in ["w[R]", "w[P]", "w[T]"].iter().enumerate() {
        let want = e[g] / z;
        let draws = store.pooled(name).unwrap();
        let got = draws.iter().sum::<f64>() / draws.len() as f64;
        let se = batch_se(&draws);
        assert!((got - want).abs() < 4.0 * se + 2e-3, "{name}: {got} vs {want} (se {se})");
    }
}
