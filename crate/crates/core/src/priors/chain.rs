//! Ordered priors `u_1 < u_2 < ... < u_G` built from conditionally specified
//! Beta-type links: `u_1 ~ Beta(a_1, b_1)` and `u_g | u_{g-1}` truncated or
//! restricted Beta on `(u_{g-1}, 1)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::beta::{BetaKind, BetaSpec};
use super::special::{beta_reg, ln_beta};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainLink {
    pub alpha: f64,
    pub beta: f64,
    pub kind: BetaKind,
}

/// An ordered chain prior. A chain with no links is a single plain Beta.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderedChainSpec {
    pub first: (f64, f64),
    pub links: Vec<ChainLink>,
}

impl OrderedChainSpec {
    pub fn new(first: (f64, f64), links: Vec<ChainLink>) -> Result<Self> {
        let ok = |a: f64, b: f64| a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite();
        if !ok(first.0, first.1) || links.iter().any(|l| !ok(l.alpha, l.beta)) {
            return Err(Error::invalid("ordered-chain shapes must be positive"));
        }
        if links.iter().any(|l| l.kind == BetaKind::Plain) {
            return Err(Error::invalid("chain links must be truncated or restricted"));
        }
        Ok(Self { first, links })
    }

    /// `u_1 ~ U(0,1)`, `u_j | u_{j-1} ~ U(u_{j-1}, 1)`.
    pub fn uniform(len: usize) -> Self {
        let link = ChainLink { alpha: 1.0, beta: 1.0, kind: BetaKind::Truncated };
        Self { first: (1.0, 1.0), links: vec![link; len.saturating_sub(1)] }
    }

    /// `u_1 ~ Beta(1, 2)`, `u_2 | u_1 ~ tBeta(1, 1; u_1, 1)`; marginally `u_2 ~ Beta(2, 1)`.
    pub fn two_class_default() -> Self {
        Self {
            first: (1.0, 2.0),
            links: vec![ChainLink { alpha: 1.0, beta: 1.0, kind: BetaKind::Truncated }],
        }
    }

    /// Default survival prior for `n` ordered classes: uniform for one class,
    /// the Beta(1,2)/tBeta(1,1) pair for two, a uniform chain beyond.
    pub fn survival_default(n: usize) -> Self {
        match n {
            0 | 1 => Self::uniform(1),
            2 => Self::two_class_default(),
            _ => Self::uniform(n),
        }
    }

    pub fn len(&self) -> usize {
        self.links.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn link_spec(&self, g: usize, lower: f64) -> Option<BetaSpec> {
        let link = self.links[g - 1];
        BetaSpec::new(link.alpha, link.beta, lower, 1.0, link.kind).ok()
    }

    /// Joint log-density; `-inf` when the ordering is violated.
    pub fn ln_density(&self, u: &[f64]) -> f64 {
        if u.len() != self.len() {
            return f64::NEG_INFINITY;
        }
        let first = BetaSpec {
            alpha: self.first.0,
            beta: self.first.1,
            lower: 0.0,
            upper: 1.0,
            kind: BetaKind::Plain,
        };
        let mut acc = first.ln_pdf(u[0]);
        for g in 1..u.len() {
            if !(u[g] > u[g - 1]) || !(u[g - 1] >= 0.0 && u[g - 1] < 1.0) {
                return f64::NEG_INFINITY;
            }
            match self.link_spec(g, u[g - 1]) {
                Some(spec) => acc += spec.ln_pdf(u[g]),
                None => return f64::NEG_INFINITY,
            }
        }
        acc
    }

    /// Strictly increasing draw from the chain.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let first = BetaSpec::plain(self.first.0, self.first.1).expect("validated shapes");
        let mut out = Vec::with_capacity(self.len());
        out.push(first.sample(rng));
        for g in 1..self.len() {
            let lower = out[g - 1];
            let next = match self.link_spec(g, lower) {
                Some(spec) => spec.sample(rng),
                None => lower.next_up(),
            };
            out.push(next);
        }
        out
    }
}

/// Marginal means and variances of each component of a restricted-Beta chain,
/// by the law of total expectation and variance.
pub fn rbeta_chain_moments(chain: &OrderedChainSpec) -> Result<(Vec<f64>, Vec<f64>)> {
    if chain.links.iter().any(|l| l.kind != BetaKind::Restricted) {
        return Err(Error::invalid("closed-form chain moments need restricted links"));
    }
    let (a1, b1) = chain.first;
    let s1 = a1 + b1;
    let mut means = vec![a1 / s1];
    let mut vars = vec![a1 * b1 / (s1 * s1 * (s1 + 1.0))];
    for link in &chain.links {
        let (a, b) = (link.alpha, link.beta);
        let s = a + b;
        let prev_mean = *means.last().expect("non-empty");
        let prev_var = *vars.last().expect("non-empty");
        means.push(a / s + prev_mean * b / s);
        let var = prev_var * (b * b) / (s * s) * (1.0 + a / (b * (s + 1.0)))
            + (1.0 - prev_mean).powi(2) * a * b / (s * s * (s + 1.0));
        vars.push(var);
    }
    Ok((means, vars))
}

/// Shapes of a restricted link `rBeta(a, b; u_{g-1}, 1)` whose induced marginal
/// has the requested mean and variance, given the previous component's moments.
pub fn restricted_link_for_moments(prev_mean: f64, prev_var: f64, mean: f64, var: f64) -> Result<ChainLink> {
    if !(prev_mean < mean && mean < 1.0) {
        return Err(Error::invalid("target mean must lie between the previous mean and 1"));
    }
    // q = a / (a + b) is fixed by the mean; the variance then fixes a + b.
    let q = (mean - prev_mean) / (1.0 - prev_mean);
    let floor = prev_var * (1.0 - q).powi(2);
    if !(var > floor) {
        return Err(Error::invalid(format!("target variance must exceed {floor}")));
    }
    let total = q * (1.0 - q) * (prev_var + (1.0 - prev_mean).powi(2)) / (var - floor) - 1.0;
    if !(total > 0.0) {
        return Err(Error::invalid("target moments are not attainable by a restricted Beta link"));
    }
    Ok(ChainLink { alpha: q * total, beta: (1.0 - q) * total, kind: BetaKind::Restricted })
}

/// Marginal density of `u_2` when `u_1 ~ Beta(a1, b1)` and
/// `u_2 | u_1 ~ tBeta(1, b2; u_1, 1)`:
/// `B(a1, b1 - b2) / B(a1, b1) * b2 (1 - u2)^(b2 - 1) * F_Beta(a1, b1 - b2)(u2)`.
pub fn tbeta_marginal_pdf(u2: f64, a1: f64, b1: f64, b2: f64) -> Result<f64> {
    if !(b1 > b2) {
        return Err(Error::invalid(format!(
            "the truncated-Beta marginal needs beta_1 > beta_2 (got {b1} <= {b2}); the Beta function diverges otherwise"
        )));
    }
    if !(a1 > 0.0 && b2 > 0.0) {
        return Err(Error::invalid("shapes must be positive"));
    }
    if !(u2 > 0.0 && u2 < 1.0) {
        return Ok(0.0);
    }
    let ln_ratio = ln_beta(a1, b1 - b2) - ln_beta(a1, b1);
    let ln_core = ln_ratio + b2.ln() + (b2 - 1.0) * (-u2).ln_1p();
    Ok(ln_core.exp() * beta_reg(u2, a1, b1 - b2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::priors::special::beta_ln_pdf;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn mirrored_marginal_is_beta() {
        for &k in &[0.5, 1.0, 2.0] {
            for i in 1..100 {
                let x = i as f64 / 100.0;
                let got = tbeta_marginal_pdf(x, k, k + 1.0, k).unwrap();
                let want = beta_ln_pdf(x, k + 1.0, k).exp();
                assert!((got - want).abs() < 1e-10 * want.max(1.0), "k={k} x={x}");
            }
        }
        assert!((tbeta_marginal_pdf(0.5, 1.0, 2.0, 1.0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn marginal_requires_ordered_shapes() {
        assert!(tbeta_marginal_pdf(0.5, 1.0, 1.0, 1.0).is_err());
        assert!(tbeta_marginal_pdf(0.5, 1.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn convenient_setting_moments() {
        let chain = OrderedChainSpec::new(
            (1.0, 2.0),
            vec![ChainLink { alpha: 1.0, beta: 1.0, kind: BetaKind::Restricted }],
        )
        .unwrap();
        let (m, v) = rbeta_chain_moments(&chain).unwrap();
        assert!((m[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((m[1] - 2.0 / 3.0).abs() < 1e-15);
        // Beta(2, 1) variance.
        assert!((v[1] - 2.0 / 36.0).abs() < 1e-15);
    }

    #[test]
    fn moment_matched_link() {
        let link = restricted_link_for_moments(0.2, 0.02, 0.4, 0.04).unwrap();
        // Printed to three decimals as (0.826, 2.478).
        assert!((link.alpha - 19.0 / 23.0).abs() < 1e-12);
        assert!((link.beta - 57.0 / 23.0).abs() < 1e-12);
        let chain = OrderedChainSpec::new((1.4, 5.6), vec![link]).unwrap();
        let (m, v) = rbeta_chain_moments(&chain).unwrap();
        assert!((m[0] - 0.2).abs() < 1e-12);
        assert!((v[0] - 0.02).abs() < 1e-12);
        assert!((m[1] - 0.4).abs() < 1e-12);
        assert!((v[1] - 0.04).abs() < 1e-12);

        let rounded = OrderedChainSpec::new(
            (1.4, 5.6),
            vec![ChainLink { alpha: 0.826, beta: 2.478, kind: BetaKind::Restricted }],
        )
        .unwrap();
        let (m, v) = rbeta_chain_moments(&rounded).unwrap();
        assert!((m[1] - 0.4).abs() < 1e-12);
        assert!((v[1] - 0.04).abs() < 1e-5);
        assert!(restricted_link_for_moments(0.2, 0.02, 0.4, 0.005).is_err());
    }

    #[test]
    fn uniform_chain_is_increasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let chain = OrderedChainSpec::uniform(2);
        for _ in 0..10_000 {
            let u = chain.sample(&mut rng);
            assert!(u[1] > u[0]);
            assert!(chain.ln_density(&u).is_finite());
        }
        assert_eq!(chain.ln_density(&[0.6, 0.4]), f64::NEG_INFINITY);
    }

    #[test]
    fn density_of_uniform_chain() {
        let chain = OrderedChainSpec::uniform(3);
        let got = chain.ln_density(&[0.2, 0.5, 0.9]);
        let want = -(0.8f64.ln()) - (0.5f64.ln());
        assert!((got - want).abs() < 1e-14);
    }
}
