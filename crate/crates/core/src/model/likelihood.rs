//! Exact individual likelihoods via the forward algorithm on the
//! three-state entry/alive/departed chain.
//!
//! States: `0` not yet entered, `1` alive (in the population), `2` departed
//! (absorbing). At the first occasion an individual enters with probability
//! `rho_1`; afterwards the transition matrix at occasion `t` is
//!
//! ```text
//!        0          1        2
//! 0 | 1 - rho_t   rho_t      0
//! 1 |    0        phi_t   1 - phi_t
//! 2 |    0          0        1
//! ```
//!
//! with `phi_t = phi^(l_t)` compounded over the lag. Captures are only
//! possible in state 1.

use super::params::GroupParams;
use super::spec::Layout;
use super::time::TimeGrid;

/// Log-likelihood assigned to impossible histories.
pub const LOG_ZERO: f64 = -1.0e300;

/// Probabilities are clamped to `[PROB_EPS, 1 - PROB_EPS]` before taking logs
/// in sufficient-statistic likelihoods.
pub const PROB_EPS: f64 = 1e-12;

pub const NOT_ENTERED: u8 = 0;
pub const ALIVE: u8 = 1;
pub const DEPARTED: u8 = 2;

pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

pub fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_EPS, 1.0 - PROB_EPS)
}

/// `ln(p)` with clamping.
pub fn ln_clamped(p: f64) -> f64 {
    clamp_prob(p).ln()
}

/// Survival over `lag` time units: `phi_base^lag`, and exactly 1 for a zero lag.
pub fn compound_survival(phi_base: f64, lag: f64) -> f64 {
    if lag == 0.0 {
        1.0
    } else {
        phi_base.powf(lag)
    }
}

/// `ln(1 - phi_base^lag)` without cancellation for survivals close to one.
pub fn ln_one_minus_compound(phi_base: f64, lag: f64) -> f64 {
    if lag == 0.0 || phi_base >= 1.0 {
        return LOG_ZERO;
    }
    if phi_base <= 0.0 {
        return 0.0;
    }
    let q = -(lag * phi_base.ln()).exp_m1();
    ln_clamped(q)
}

/// `logit^-1(mu + tau)`, thinned by `1 - delta` for part-time individuals.
pub fn capture_prob(mu: f64, tau: f64, delta: f64, part_time: bool) -> f64 {
    let p = logistic(mu + tau);
    if part_time {
        (1.0 - delta) * p
    } else {
        p
    }
}

/// Row-stochastic 3x3 transition matrix over (not entered, alive, departed).
pub fn transition_matrix(rho: f64, phi: f64) -> [[f64; 3]; 3] {
    [[1.0 - rho, rho, 0.0], [0.0, phi, 1.0 - phi], [0.0, 0.0, 1.0]]
}

/// Inclusion probability `1 - prod_t (1 - rho_t)`.
pub fn inclusion_prob(rho: &[f64]) -> f64 {
    1.0 - rho.iter().map(|r| 1.0 - r).product::<f64>()
}

/// Expected super-population size `M * sum_g w_g psi_g`.
pub fn expected_nsuper(m: f64, weights: &[f64], psi: &[f64]) -> f64 {
    m * weights.iter().zip(psi).map(|(w, p)| w * p).sum::<f64>()
}

pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max <= LOG_ZERO {
        return max.max(LOG_ZERO);
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Per-occasion probabilities governing one mixture group.
///
/// `survive[0]` is unused (no transition into the first occasion).
#[derive(Debug, Clone, PartialEq)]
pub struct GroupKernel {
    pub recruit: Vec<f64>,
    pub survive: Vec<f64>,
    pub capture: Vec<f64>,
}

impl GroupKernel {
    pub fn new(recruit: Vec<f64>, survive: Vec<f64>, capture: Vec<f64>) -> Self {
        debug_assert_eq!(recruit.len(), survive.len());
        debug_assert_eq!(recruit.len(), capture.len());
        Self { recruit, survive, capture }
    }

    /// Kernel of group `g` with compounded survival and thinned capture.
    pub fn from_params(params: &GroupParams, layout: &Layout, grid: &TimeGrid, g: usize) -> Self {
        let n = grid.len();
        let recruit = (0..n).map(|t| params.recruitment(layout, g, t)).collect();
        let survive = (0..n)
            .map(|t| {
                if t == 0 {
                    1.0
                } else {
                    compound_survival(params.survival_base(layout, g, t), grid.lag(t))
                }
            })
            .collect();
        let capture = (0..n).map(|t| params.capture(layout, g, t)).collect();
        Self::new(recruit, survive, capture)
    }

    pub fn all(params: &GroupParams, layout: &Layout, grid: &TimeGrid) -> Vec<Self> {
        (0..layout.groups).map(|g| Self::from_params(params, layout, grid, g)).collect()
    }

    pub fn len(&self) -> usize {
        self.recruit.len()
    }

    pub fn is_empty(&self) -> bool {
        self.recruit.is_empty()
    }

    pub fn transition(&self, t: usize) -> [[f64; 3]; 3] {
        transition_matrix(self.recruit[t], self.survive[t])
    }

    #[inline]
    fn emission(&self, t: usize, y: u8) -> [f64; 3] {
        let p = self.capture[t];
        if y == 1 {
            [0.0, p, 0.0]
        } else {
            [1.0, 1.0 - p, 1.0]
        }
    }
}

/// Normalised forward filter. On return `alphas[3t..3t+3]` holds
/// `P(state_t | y_1..y_t)`; the return value is `ln P(y)` or [`LOG_ZERO`].
pub fn forward_filter(history: &[u8], kernel: &GroupKernel, alphas: &mut Vec<f64>) -> f64 {
    let n = history.len();
    debug_assert_eq!(n, kernel.len());
    alphas.clear();
    alphas.resize(3 * n, 0.0);
    let mut loglik = 0.0;
    let mut prev = [0.0f64; 3];
    for t in 0..n {
        let e = kernel.emission(t, history[t]);
        let mut cur = if t == 0 {
            let r = kernel.recruit[0];
            [(1.0 - r) * e[0], r * e[1], 0.0]
        } else {
            let r = kernel.recruit[t];
            let s = kernel.survive[t];
            [
                prev[0] * (1.0 - r) * e[0],
                (prev[0] * r + prev[1] * s) * e[1],
                (prev[1] * (1.0 - s) + prev[2]) * e[2],
            ]
        };
        let c = cur[0] + cur[1] + cur[2];
        if !(c > 0.0) {
            return LOG_ZERO;
        }
        for v in cur.iter_mut() {
            *v /= c;
        }
        loglik += c.ln();
        alphas[3 * t..3 * t + 3].copy_from_slice(&cur);
        prev = cur;
    }
    loglik
}

/// `ln P(y_i | theta_g)` marginalised over the latent trajectory.
pub fn forward_loglik(history: &[u8], kernel: &GroupKernel) -> f64 {
    let mut buf = Vec::with_capacity(3 * history.len());
    forward_filter(history, kernel, &mut buf)
}

/// `ln sum_g w_g P(y_i | theta_g)`.
pub fn mixture_loglik(history: &[u8], weights: &[f64], kernels: &[GroupKernel]) -> f64 {
    let terms: Vec<f64> = weights
        .iter()
        .zip(kernels)
        .map(|(&w, k)| {
            if w <= 0.0 {
                f64::NEG_INFINITY
            } else {
                let ll = forward_loglik(history, k);
                if ll <= LOG_ZERO {
                    f64::NEG_INFINITY
                } else {
                    w.ln() + ll
                }
            }
        })
        .collect();
    log_sum_exp(&terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn survival_compounding() {
        assert_eq!(compound_survival(0.01, 1.0), 0.01);
        assert_eq!(compound_survival(0.3, 0.0), 1.0);
        assert!((compound_survival(0.997, 48.0) - 0.866).abs() < 1e-3);
        let weekly = compound_survival(0.34, 30.4375 / 7.0);
        assert!((weekly - 0.01).abs() < 0.003, "{weekly}");
    }

    #[test]
    fn capture_probabilities() {
        assert_eq!(capture_prob(0.0, 0.0, 0.9, false), 0.5);
        assert!((capture_prob(0.0, 0.0, 0.7, true) - 0.15).abs() < 1e-15);
        let mu = logit(0.19);
        assert!((capture_prob(mu, 0.0, 0.74, true) - 0.0494).abs() < 1e-12);
    }

    #[test]
    fn transitions_are_stochastic() {
        let a = transition_matrix(0.0, 1.0);
        assert_eq!(a, [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        let b = transition_matrix(0.4, 0.997);
        assert_eq!(b[0], [0.6, 0.4, 0.0]);
        assert_eq!(b[1][1], 0.997);
        assert!((b[1][2] - 0.003).abs() < 1e-15);
        assert_eq!(b[2], [0.0, 0.0, 1.0]);
    }

    #[test]
    fn single_occasion_likelihoods() {
        let k = GroupKernel::new(vec![0.5], vec![1.0], vec![0.5]);
        assert!((forward_loglik(&[1], &k) - 0.25f64.ln()).abs() < 1e-15);
        let never = GroupKernel::new(vec![0.0], vec![1.0], vec![0.5]);
        assert_eq!(forward_loglik(&[0], &never), 0.0);
        assert_eq!(forward_loglik(&[1], &never), LOG_ZERO);
    }

    #[test]
    fn inclusion_probability() {
        assert_eq!(inclusion_prob(&[0.0; 5]), 0.0);
        assert_eq!(inclusion_prob(&[0.1, 1.0, 0.3]), 1.0);
        let mut resident = vec![0.4];
        resident.extend([0.0025; 9]);
        assert!((inclusion_prob(&resident) - 0.4134).abs() < 1e-4);
    }

    #[test]
    fn expected_size_with_full_inclusion() {
        assert_eq!(expected_nsuper(500.0, &[0.2, 0.45, 0.35], &[1.0; 3]), 500.0);
    }

    #[test]
    fn degenerate_mixture() {
        let a = GroupKernel::new(vec![0.3, 0.1, 0.2], vec![1.0, 0.8, 0.6], vec![0.4, 0.5, 0.6]);
        let b = GroupKernel::new(vec![0.1, 0.5, 0.2], vec![1.0, 0.2, 0.9], vec![0.7, 0.2, 0.3]);
        let y = [0, 1, 1];
        let kernels = vec![a.clone(), b.clone(), b];
        let single = forward_loglik(&y, &a);
        assert!((mixture_loglik(&y, &[1.0, 0.0, 0.0], &kernels) - single).abs() < 1e-14);
        let same = vec![a.clone(), a.clone(), a];
        assert!((mixture_loglik(&y, &[0.2, 0.5, 0.3], &same) - single).abs() < 1e-14);
    }
}
