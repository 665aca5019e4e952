//! Brute-force reference computations over every latent path, used to check
//! the forward filter and the trajectory sampler on short histories.

use super::likelihood::{GroupKernel, ALIVE, DEPARTED, NOT_ENTERED};

/// Every admissible path of length `n`: some not-entered occasions, then
/// optionally an alive run followed by departure.
pub fn admissible_paths(n: usize) -> Vec<Vec<u8>> {
    let mut out = vec![vec![NOT_ENTERED; n]];
    for entry in 0..n {
        for exit in entry + 1..=n {
            let mut p = vec![NOT_ENTERED; n];
            p[entry..exit].fill(ALIVE);
            p[exit..].fill(DEPARTED);
            out.push(p);
        }
    }
    out
}

/// Joint probability `P(path, y)` under one group's kernel.
pub fn path_joint_prob(path: &[u8], history: &[u8], kernel: &GroupKernel) -> f64 {
    let mut prob = 1.0;
    let mut prev = NOT_ENTERED;
    for (t, (&s, &y)) in path.iter().zip(history).enumerate() {
        let step = if t == 0 {
            match s {
                NOT_ENTERED => 1.0 - kernel.recruit[0],
                ALIVE => kernel.recruit[0],
                _ => 0.0,
            }
        } else {
            kernel.transition(t)[prev as usize][s as usize]
        };
        let emit = match (s, y) {
            (ALIVE, 1) => kernel.capture[t],
            (ALIVE, _) => 1.0 - kernel.capture[t],
            (_, 1) => 0.0,
            _ => 1.0,
        };
        prob *= step * emit;
        prev = s;
    }
    prob
}

/// `ln P(y)` by summing over every admissible path.
pub fn enumerated_loglik(history: &[u8], kernel: &GroupKernel) -> f64 {
    admissible_paths(history.len()).iter().map(|p| path_joint_prob(p, history, kernel)).sum::<f64>().ln()
}

/// Posterior over paths given `y`, restricted to paths of positive probability.
pub fn enumerated_posterior(history: &[u8], kernel: &GroupKernel) -> Vec<(Vec<u8>, f64)> {
    let joint: Vec<(Vec<u8>, f64)> = admissible_paths(history.len())
        .into_iter()
        .map(|p| {
            let w = path_joint_prob(&p, history, kernel);
            (p, w)
        })
        .filter(|(_, w)| *w > 0.0)
        .collect();
    let total: f64 = joint.iter().map(|(_, w)| w).sum();
    joint.into_iter().map(|(p, w)| (p, w / total)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_count() {
        // All-not-entered plus one path per (entry, exit) pair.
        for n in 1..7 {
            assert_eq!(admissible_paths(n).len(), 1 + n * (n + 1) / 2);
        }
    }

    #[test]
    fn probabilities_sum_to_one_over_histories() {
        let k = GroupKernel::new(vec![0.3, 0.2, 0.5], vec![1.0, 0.8, 0.6], vec![0.4, 0.7, 0.2]);
        let mut total = 0.0;
        for code in 0..8u8 {
            let y: Vec<u8> = (0..3).map(|t| (code >> t) & 1).collect();
            total += enumerated_loglik(&y, &k).exp();
        }
        assert!((total - 1.0).abs() < 1e-14, "{total}");
    }

    #[test]
    fn posterior_respects_captures() {
        let k = GroupKernel::new(vec![0.3, 0.2, 0.5, 0.1], vec![1.0, 0.8, 0.6, 0.9], vec![0.4; 4]);
        let post = enumerated_posterior(&[0, 1, 0, 0], &k);
        assert!(post.iter().all(|(p, _)| p[1] == ALIVE));
        let sum: f64 = post.iter().map(|(_, w)| w).sum();
        assert!((sum - 1.0).abs() < 1e-14);
    }
}
