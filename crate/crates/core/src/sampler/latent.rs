//! Blocked label and trajectory updates: `c_i` from the trajectory-marginal
//! conditional, then the trajectory by forward filtering, backward sampling.

use rand::Rng;

use super::state::{ChainState, FitContext};
use crate::error::{Error, Result};
use crate::model::likelihood::{forward_filter, GroupKernel, ALIVE, DEPARTED, LOG_ZERO, NOT_ENTERED};

fn pick3(w: [f64; 3], u: f64) -> u8 {
    let total = w[0] + w[1] + w[2];
    let x = u * total;
    if x < w[0] {
        NOT_ENTERED
    } else if x < w[0] + w[1] || w[2] == 0.0 {
        ALIVE
    } else {
        DEPARTED
    }
}

/// Backward sampling from filtered probabilities produced by [`forward_filter`].
pub fn backward_sample(alphas: &[f64], kernel: &GroupKernel, rng: &mut impl Rng, states: &mut [u8]) {
    let n = states.len();
    let last = 3 * (n - 1);
    states[n - 1] = pick3([alphas[last], alphas[last + 1], alphas[last + 2]], rng.random());
    for t in (0..n - 1).rev() {
        let r = kernel.recruit[t + 1];
        let s = kernel.survive[t + 1];
        let a = &alphas[3 * t..3 * t + 3];
        let w = match states[t + 1] {
            NOT_ENTERED => [a[0] * (1.0 - r), 0.0, 0.0],
            ALIVE => [a[0] * r, a[1] * s, 0.0],
            _ => [0.0, a[1] * (1.0 - s), a[2]],
        };
        states[t] = pick3(w, rng.random());
    }
}

/// Exact draw of the latent path given a history and one group's kernel.
pub fn ffbs_individual(history: &[u8], kernel: &GroupKernel, rng: &mut impl Rng) -> Result<Vec<u8>> {
    let mut alphas = Vec::with_capacity(3 * history.len());
    if forward_filter(history, kernel, &mut alphas) <= LOG_ZERO {
        return Err(Error::invariant("capture history has zero probability under its group"));
    }
    let mut states = vec![NOT_ENTERED; history.len()];
    backward_sample(&alphas, kernel, rng, &mut states);
    Ok(states)
}

/// Posterior label probabilities `w_g P(y | g) / sum`. `None` if every term is zero.
pub fn label_probs(logliks: &[f64], weights: &[f64], out: &mut Vec<f64>) -> Option<()> {
    out.clear();
    let mut max = f64::NEG_INFINITY;
    for (&ll, &w) in logliks.iter().zip(weights) {
        let v = if w > 0.0 && ll > LOG_ZERO { w.ln() + ll } else { f64::NEG_INFINITY };
        max = max.max(v);
        out.push(v);
    }
    if max == f64::NEG_INFINITY {
        return None;
    }
    let mut total = 0.0;
    for v in out.iter_mut() {
        *v = (*v - max).exp();
        total += *v;
    }
    for v in out.iter_mut() {
        *v /= total;
    }
    Some(())
}

/// Draws a label from `w_g exp(loglik_g)`.
pub fn sample_label(
    history: &[u8],
    weights: &[f64],
    kernels: &[GroupKernel],
    rng: &mut impl Rng,
) -> Result<usize> {
    let mut buf = Vec::new();
    let logliks: Vec<f64> = kernels.iter().map(|k| forward_filter(history, k, &mut buf)).collect();
    let mut probs = Vec::new();
    label_probs(&logliks, weights, &mut probs)
        .ok_or_else(|| Error::invariant("capture history has zero probability under every group"))?;
    Ok(super::state::sample_categorical(&probs, rng))
}

/// Reusable buffers for the latent sweep.
#[derive(Debug, Default, Clone)]
pub struct LatentScratch {
    alphas: Vec<Vec<f64>>,
    zero_alphas: Vec<Vec<f64>>,
    logliks: Vec<f64>,
    zero_logliks: Vec<f64>,
    probs: Vec<f64>,
    zero_probs: Vec<f64>,
    states: Vec<u8>,
}

/// Resamples labels (unless frozen) and every trajectory.
///
/// All augmented rows share the all-zero history, so their forward pass is
/// computed once per group.
pub fn sweep_latent(
    ctx: &FitContext,
    state: &mut ChainState,
    kernels: &[GroupKernel],
    freeze_labels: bool,
    scratch: &mut LatentScratch,
) -> Result<()> {
    let g_count = kernels.len();
    let n = ctx.occasions();
    let d = ctx.data.n_observed();
    let m = ctx.data.total();
    scratch.alphas.resize(g_count, Vec::new());
    scratch.zero_alphas.resize(g_count, Vec::new());
    scratch.states.resize(n, NOT_ENTERED);
    let weights = &state.params.weights;

    if m > d {
        let zero = ctx.data.history(d);
        scratch.zero_logliks.clear();
        for (g, k) in kernels.iter().enumerate() {
            let ll = forward_filter(zero, k, &mut scratch.zero_alphas[g]);
            scratch.zero_logliks.push(ll);
        }
        if !freeze_labels {
            label_probs(&scratch.zero_logliks, weights, &mut scratch.zero_probs).ok_or_else(|| {
                Error::invariant("the all-zero history has zero probability under every group")
            })?;
        }
    }

    for i in 0..m {
        let observed = i < d;
        if observed {
            let y = ctx.data.history(i);
            scratch.logliks.clear();
            for (g, k) in kernels.iter().enumerate() {
                let ll = forward_filter(y, k, &mut scratch.alphas[g]);
                scratch.logliks.push(ll);
            }
        }
        let (logliks, alphas, probs) = if observed {
            (&scratch.logliks, &scratch.alphas, &mut scratch.probs)
        } else {
            (&scratch.zero_logliks, &scratch.zero_alphas, &mut scratch.zero_probs)
        };
        let label = if freeze_labels {
            state.latent.labels[i]
        } else {
            if observed {
                label_probs(logliks, weights, probs).ok_or_else(|| {
                    Error::invariant(format!(
                        "iteration {}: history of row {} ({}) has zero probability under every group",
                        state.iter,
                        i + 1,
                        ctx.data.ids()[i]
                    ))
                })?;
            }
            super::state::sample_categorical(probs, &mut state.rng)
        };
        if logliks[label] <= LOG_ZERO {
            return Err(Error::invariant(format!(
                "iteration {}: row {} has zero probability under its frozen label {}",
                state.iter,
                i + 1,
                label
            )));
        }
        state.latent.labels[i] = label;
        backward_sample(&alphas[label], &kernels[label], &mut state.rng, &mut scratch.states);
        state.latent.set_path(i, &scratch.states);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::state::chain_rng;

    #[test]
    fn capture_forces_alive() {
        let k = GroupKernel::new(vec![0.3, 0.2, 0.2, 0.2], vec![1.0, 0.6, 0.6, 0.6], vec![0.5; 4]);
        let mut rng = chain_rng(1, 0);
        for _ in 0..2000 {
            let s = ffbs_individual(&[0, 1, 0, 1], &k, &mut rng).unwrap();
            assert_eq!(s[1], ALIVE);
            assert_eq!(s[2], ALIVE);
            assert_eq!(s[3], ALIVE);
        }
    }

    #[test]
    fn no_recruitment_means_never_entered() {
        let k = GroupKernel::new(vec![0.0; 3], vec![1.0, 0.5, 0.5], vec![0.5; 3]);
        let mut rng = chain_rng(1, 0);
        for _ in 0..100 {
            assert_eq!(ffbs_individual(&[0, 0, 0], &k, &mut rng).unwrap(), vec![0, 0, 0]);
        }
        assert!(ffbs_individual(&[0, 1, 0], &k, &mut rng).is_err());
    }

    #[test]
    fn label_bayes_rule() {
        let mut probs = Vec::new();
        label_probs(&[3.0f64.ln(), 0.0], &[0.5, 0.5], &mut probs).unwrap();
        assert!((probs[0] - 0.75).abs() < 1e-15);
        label_probs(&[-2.0, -2.0, -2.0], &[0.2, 0.5, 0.3], &mut probs).unwrap();
        assert!((probs[1] - 0.5).abs() < 1e-15);
        assert!(label_probs(&[LOG_ZERO, LOG_ZERO], &[0.5, 0.5], &mut probs).is_none());
    }

    #[test]
    fn degenerate_weights_pin_label() {
        let a = GroupKernel::new(vec![0.3, 0.2], vec![1.0, 0.5], vec![0.4, 0.4]);
        let b = GroupKernel::new(vec![0.5, 0.2], vec![1.0, 0.9], vec![0.8, 0.8]);
        let kernels = vec![a, b.clone(), b];
        let mut rng = chain_rng(9, 0);
        for _ in 0..200 {
            assert_eq!(sample_label(&[1, 0], &[1.0, 0.0, 0.0], &kernels, &mut rng).unwrap(), 0);
        }
    }
}
