//! Beta-function special functions: log-density, regularised incomplete beta
//! (continued fraction) and its inverse.

use statrs::function::gamma::ln_gamma;

const CF_MAX_ITERS: usize = 2000;
const CF_EPS: f64 = 1e-15;
const CF_FPMIN: f64 = 1e-300;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Remainder of Stirling's series, `ln Gamma(x) - [(x - 1/2) ln x - x + ln sqrt(2 pi)]`, for `x >= 10`.
fn stirling_remainder(x: f64) -> f64 {
    const COEF: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
    ];
    let inv2 = 1.0 / (x * x);
    let mut acc = 0.0;
    for c in COEF.iter().rev() {
        acc = acc * inv2 + c;
    }
    acc / x
}

/// `ln B(a, b)`, keeping the large-argument cancellation out of the gamma terms.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    let (p, q) = if a < b { (a, b) } else { (b, a) };
    let r = p / (p + q);
    if p >= 10.0 {
        let corr = stirling_remainder(p) + stirling_remainder(q) - stirling_remainder(p + q);
        -0.5 * q.ln() + LN_SQRT_2PI + corr + (p - 0.5) * r.ln() + q * (-r).ln_1p()
    } else if q >= 10.0 {
        let corr = stirling_remainder(q) - stirling_remainder(p + q);
        ln_gamma(p) + corr + p - p * (p + q).ln() + (q - 0.5) * (-r).ln_1p()
    } else {
        ln_gamma(p) + ln_gamma(q) - ln_gamma(p + q)
    }
}

/// Log-density of `Beta(a, b)` at `x`; `-inf` outside `(0, 1)`.
pub fn beta_ln_pdf(x: f64, a: f64, b: f64) -> f64 {
    if !(x > 0.0 && x < 1.0) {
        if x == 0.0 && a == 1.0 {
            return -ln_beta(a, b);
        }
        if x == 1.0 && b == 1.0 {
            return -ln_beta(a, b);
        }
        return f64::NEG_INFINITY;
    }
    (a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - ln_beta(a, b)
}

/// Regularised incomplete beta `I_x(a, b)`, i.e. the `Beta(a, b)` CDF.
pub fn beta_reg(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = a * x.ln() + b * (-x).ln_1p() - ln_beta(a, b);
    if x < (a + 1.0) / (a + b + 2.0) {
        (ln_front.exp() * continued_fraction(x, a, b) / a).min(1.0)
    } else {
        (1.0 - ln_front.exp() * continued_fraction(1.0 - x, b, a) / b).max(0.0)
    }
}

/// Upper tail `1 - I_x(a, b)` without cancellation.
pub fn beta_reg_upper(x: f64, a: f64, b: f64) -> f64 {
    beta_reg(1.0 - x, b, a)
}

/// Lentz evaluation of the incomplete-beta continued fraction.
fn continued_fraction(x: f64, a: f64, b: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < CF_FPMIN {
        d = CF_FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=CF_MAX_ITERS {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < CF_FPMIN {
            d = CF_FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < CF_FPMIN {
            c = CF_FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < CF_FPMIN {
            d = CF_FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < CF_FPMIN {
            c = CF_FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < CF_EPS {
            break;
        }
    }
    h
}

/// Solves `I_x(a, b) = p` for `x` by safeguarded Newton iteration.
pub fn beta_reg_inv(p: f64, a: f64, b: f64) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    // Start from the mean, pulled inside the bracket.
    let mut x = (a / (a + b)).clamp(1e-8, 1.0 - 1e-8);
    let lnb = ln_beta(a, b);
    for _ in 0..300 {
        let f = beta_reg(x, a, b) - p;
        if f == 0.0 {
            return x;
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let ln_pdf = (a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - lnb;
        let pdf = ln_pdf.exp();
        let mut next = if pdf.is_finite() && pdf > 0.0 { x - f / pdf } else { f64::NAN };
        if !(next > lo && next < hi) {
            // Bisect, geometrically near 0 so tiny quantiles resolve quickly.
            next = if lo == 0.0 && hi < 1e-3 {
                hi * 1e-3
            } else if lo > 0.0 && hi / lo > 1e3 {
                (lo * hi).sqrt()
            } else {
                0.5 * (lo + hi)
            };
        }
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
            return next;
        }
        x = next;
    }
    x
}
