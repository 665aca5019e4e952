//! Beta, truncated Beta and restricted (four-parameter) Beta distributions.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::special::{beta_ln_pdf, beta_reg, beta_reg_inv, beta_reg_upper, ln_beta};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BetaKind {
    /// `Beta(alpha, beta)` on `(0, 1)`.
    Plain,
    /// Beta density renormalised over `(lower, upper)`.
    Truncated,
    /// Beta shifted and scaled onto `(lower, upper)`.
    Restricted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaSpec {
    pub alpha: f64,
    pub beta: f64,
    pub lower: f64,
    pub upper: f64,
    pub kind: BetaKind,
}

impl BetaSpec {
    pub fn plain(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(alpha, beta, 0.0, 1.0, BetaKind::Plain)
    }

    pub fn truncated(alpha: f64, beta: f64, lower: f64, upper: f64) -> Result<Self> {
        Self::new(alpha, beta, lower, upper, BetaKind::Truncated)
    }

    pub fn restricted(alpha: f64, beta: f64, lower: f64, upper: f64) -> Result<Self> {
        Self::new(alpha, beta, lower, upper, BetaKind::Restricted)
    }

    pub fn new(alpha: f64, beta: f64, lower: f64, upper: f64, kind: BetaKind) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite() && beta > 0.0 && beta.is_finite()) {
            return Err(Error::invalid(format!("Beta shapes must be positive, got ({alpha}, {beta})")));
        }
        if !(0.0..1.0).contains(&lower) || !(upper > lower && upper <= 1.0) {
            return Err(Error::invalid(format!("invalid Beta support ({lower}, {upper})")));
        }
        if kind == BetaKind::Plain && (lower != 0.0 || upper != 1.0) {
            return Err(Error::invalid("a plain Beta lives on (0, 1)"));
        }
        Ok(Self { alpha, beta, lower, upper, kind })
    }

    pub fn in_support(&self, x: f64) -> bool {
        x > self.lower && x < self.upper
    }

    /// Probability mass of the parent Beta inside `(lower, upper)`.
    fn truncated_mass(&self) -> f64 {
        let (a, b) = (self.alpha, self.beta);
        if beta_reg(self.lower, a, b) > 0.5 {
            beta_reg_upper(self.lower, a, b) - beta_reg_upper(self.upper, a, b)
        } else {
            beta_reg(self.upper, a, b) - beta_reg(self.lower, a, b)
        }
    }

    /// Log-density; `-inf` outside the support.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        match self.kind {
            BetaKind::Plain => beta_ln_pdf(x, self.alpha, self.beta),
            _ if !self.in_support(x) => f64::NEG_INFINITY,
            BetaKind::Truncated => {
                let mass = self.truncated_mass();
                if mass <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                beta_ln_pdf(x, self.alpha, self.beta) - mass.ln()
            }
            BetaKind::Restricted => {
                let width = self.upper - self.lower;
                beta_ln_pdf((x - self.lower) / width, self.alpha, self.beta) - width.ln()
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.lower {
            return 0.0;
        }
        if x >= self.upper {
            return 1.0;
        }
        let (a, b) = (self.alpha, self.beta);
        match self.kind {
            BetaKind::Plain => beta_reg(x, a, b),
            BetaKind::Truncated => {
                let mass = self.truncated_mass();
                if beta_reg(self.lower, a, b) > 0.5 {
                    (beta_reg_upper(self.lower, a, b) - beta_reg_upper(x, a, b)) / mass
                } else {
                    (beta_reg(x, a, b) - beta_reg(self.lower, a, b)) / mass
                }
            }
            BetaKind::Restricted => beta_reg((x - self.lower) / (self.upper - self.lower), a, b),
        }
    }

    pub fn mean(&self) -> f64 {
        let m = self.alpha / (self.alpha + self.beta);
        match self.kind {
            BetaKind::Plain => m,
            BetaKind::Restricted => self.lower + (self.upper - self.lower) * m,
            BetaKind::Truncated => self.raw_moment(1),
        }
    }

    pub fn variance(&self) -> f64 {
        let s = self.alpha + self.beta;
        let v = self.alpha * self.beta / (s * s * (s + 1.0));
        match self.kind {
            BetaKind::Plain => v,
            BetaKind::Restricted => (self.upper - self.lower).powi(2) * v,
            BetaKind::Truncated => {
                let m = self.raw_moment(1);
                self.raw_moment(2) - m * m
            }
        }
    }

    /// Raw moment of the truncated law:
    /// `B(a + k, b) / B(a, b) * [I_u(a + k, b) - I_l(a + k, b)] / mass`.
    fn raw_moment(&self, order: i32) -> f64 {
        let (a, b) = (self.alpha, self.beta);
        let ak = a + order as f64;
        let ratio = (ln_beta(ak, b) - ln_beta(a, b)).exp();
        let inner = if beta_reg(self.lower, ak, b) > 0.5 {
            beta_reg_upper(self.lower, ak, b) - beta_reg_upper(self.upper, ak, b)
        } else {
            beta_reg(self.upper, ak, b) - beta_reg(self.lower, ak, b)
        };
        ratio * inner / self.truncated_mass()
    }

    /// Draws one value. Truncated draws use the inverse CDF on the retained
    /// quantile range, working in whichever tail keeps precision.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let (a, b) = (self.alpha, self.beta);
        let u: f64 = rng.random::<f64>();
        let x = match self.kind {
            BetaKind::Plain => beta_reg_inv(u, a, b),
            BetaKind::Restricted => self.lower + (self.upper - self.lower) * beta_reg_inv(u, a, b),
            BetaKind::Truncated => {
                if beta_reg(self.lower, a, b) > 0.5 {
                    // Upper-tail form: S(x) = I_{1-x}(b, a) uniform on (S(upper), S(lower)).
                    let s_lo = beta_reg_upper(self.lower, a, b);
                    let s_hi = beta_reg_upper(self.upper, a, b);
                    let s = s_hi + u * (s_lo - s_hi);
                    1.0 - beta_reg_inv(s, b, a)
                } else {
                    let f_lo = beta_reg(self.lower, a, b);
                    let f_hi = beta_reg(self.upper, a, b);
                    beta_reg_inv(f_lo + u * (f_hi - f_lo), a, b)
                }
            }
        };
        self.clamp_inside(x)
    }

    fn clamp_inside(&self, x: f64) -> f64 {
        if x <= self.lower {
            self.lower.next_up()
        } else if x >= self.upper {
            self.upper.next_down()
        } else {
            x
        }
    }
}

/// Shapes of the objective recruitment prior `Beta(1/T, 2 - t/T)` for occasion `t` in `1..=T`.
pub fn dorazio_params(t: usize, occasions: usize) -> Result<(f64, f64)> {
    if t == 0 || t > occasions {
        return Err(Error::invalid(format!("occasion {t} outside 1..={occasions}")));
    }
    let big_t = occasions as f64;
    Ok((1.0 / big_t, 2.0 - t as f64 / big_t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dorazio_shapes() {
        assert_eq!(dorazio_params(10, 10).unwrap(), (0.1, 1.0));
        assert_eq!(dorazio_params(1, 10).unwrap(), (0.1, 1.9));
        assert_eq!(dorazio_params(5, 10).unwrap(), (0.1, 1.5));
        assert!(dorazio_params(0, 10).is_err());
        assert!(dorazio_params(11, 10).is_err());
    }

    #[test]
    fn truncated_uniform() {
        let s = BetaSpec::truncated(1.0, 1.0, 0.3, 1.0).unwrap();
        assert!((s.ln_pdf(0.5) - (1.0f64 / 0.7).ln()).abs() < 1e-14);
        assert!((s.ln_pdf(0.9) - (1.0f64 / 0.7).ln()).abs() < 1e-14);
        assert_eq!(s.ln_pdf(0.2), f64::NEG_INFINITY);
        assert_eq!(s.ln_pdf(1.2), f64::NEG_INFINITY);
    }

    #[test]
    fn restricted_degenerates_to_plain() {
        let r = BetaSpec::restricted(2.0, 3.0, 0.0, 1.0).unwrap();
        let p = BetaSpec::plain(2.0, 3.0).unwrap();
        for &x in &[0.1, 0.4, 0.8] {
            assert!((r.ln_pdf(x) - p.ln_pdf(x)).abs() < 1e-14);
        }
    }

    #[test]
    fn restricted_mean() {
        for &(l, b) in &[(0.2, 2.0), (0.6, 0.5), (0.0, 3.0)] {
            let r = BetaSpec::restricted(1.0, b, l, 1.0).unwrap();
            assert!((r.mean() - (l + (1.0 - l) / (1.0 + b))).abs() < 1e-14);
        }
    }

    #[test]
    fn truncated_numeric_mean_of_uniform() {
        let s = BetaSpec::truncated(1.0, 1.0, 0.4, 1.0).unwrap();
        assert!((s.mean() - 0.7).abs() < 1e-8);
        assert!((s.variance() - 0.36 / 12.0).abs() < 1e-8);
    }

    #[test]
    fn samples_stay_in_support_even_near_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for &lower in &[0.0, 0.5, 0.99, 0.999999, 1.0 - 1e-12] {
            let s = BetaSpec::truncated(2.0, 5.0, lower, 1.0).unwrap();
            let r = BetaSpec::restricted(0.3, 0.3, lower, 1.0).unwrap();
            for _ in 0..2000 {
                let x = s.sample(&mut rng);
                assert!(s.in_support(x), "truncated lower={lower} x={x}");
                let y = r.sample(&mut rng);
                assert!(r.in_support(y), "restricted lower={lower} y={y}");
            }
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(BetaSpec::plain(0.0, 1.0).is_err());
        assert!(BetaSpec::truncated(1.0, 1.0, 0.5, 0.5).is_err());
        assert!(BetaSpec::new(1.0, 1.0, 0.2, 1.0, BetaKind::Plain).is_err());
    }
}
