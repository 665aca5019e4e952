//! Overlap index of two samples via Gaussian kernel density estimates.

use crate::error::{Error, Result};

pub const GRID_POINTS: usize = 512;

/// Kernel support beyond which contributions are ignored, in bandwidths.
const KERNEL_CUTOFF: f64 = 8.0;

/// Type-7 quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Silverman's rule of thumb, `0.9 min(sd, IQR / 1.34) n^(-1/5)`, with the
/// usual fallbacks for degenerate samples.
pub fn silverman_bandwidth(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    let sd = if sorted.len() > 1 {
        (sorted.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    let mut lo = sd.min(iqr / 1.34);
    if lo <= 0.0 {
        lo = if sd > 0.0 {
            sd
        } else if sorted[0] != 0.0 {
            sorted[0].abs()
        } else {
            1.0
        };
    }
    0.9 * lo * n.powf(-0.2)
}

fn sorted_copy(x: &[f64]) -> Result<Vec<f64>> {
    if x.is_empty() {
        return Err(Error::invalid("overlap index needs non-empty samples"));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("overlap index needs finite samples"));
    }
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    Ok(s)
}

fn kde(sorted: &[f64], bw: f64, grid: &[f64]) -> Vec<f64> {
    let norm = 1.0 / (sorted.len() as f64 * bw * (2.0 * std::f64::consts::PI).sqrt());
    grid.iter()
        .map(|&g| {
            let lo = sorted.partition_point(|&x| x < g - KERNEL_CUTOFF * bw);
            let hi = sorted.partition_point(|&x| x <= g + KERNEL_CUTOFF * bw);
            let s: f64 = sorted[lo..hi]
                .iter()
                .map(|&x| {
                    let u = (g - x) / bw;
                    (-0.5 * u * u).exp()
                })
                .sum();
            s * norm
        })
        .collect()
}

/// `OV = integral of min(f_a, f_b)`, each density estimated with its own
/// Silverman bandwidth on a shared 512-point grid (trapezoid rule).
pub fn overlap_index(a: &[f64], b: &[f64]) -> Result<f64> {
    let sa = sorted_copy(a)?;
    let sb = sorted_copy(b)?;
    let (ba, bb) = (silverman_bandwidth(&sa), silverman_bandwidth(&sb));
    let pad = 3.0 * ba.max(bb);
    let lo = sa[0].min(sb[0]) - pad;
    let hi = sa[sa.len() - 1].max(sb[sb.len() - 1]) + pad;
    let step = (hi - lo) / (GRID_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..GRID_POINTS).map(|k| lo + k as f64 * step).collect();
    let fa = kde(&sa, ba, &grid);
    let fb = kde(&sb, bb, &grid);
    let m: Vec<f64> = fa.iter().zip(&fb).map(|(x, y)| x.min(*y)).collect();
    let integral = step * (m.iter().sum::<f64>() - 0.5 * (m[0] + m[GRID_POINTS - 1]));
    Ok(integral.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn type7_quantiles() {
        let s = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&s, 0.0), 1.0);
        assert_eq!(quantile_sorted(&s, 1.0), 4.0);
        assert!((quantile_sorted(&s, 0.5) - 2.5).abs() < 1e-15);
        assert!((quantile_sorted(&s, 0.25) - 1.75).abs() < 1e-15);
    }

    #[test]
    fn identical_and_disjoint() {
        let a: Vec<f64> = (0..2000).map(|i| (i as f64 * 0.618).fract()).collect();
        assert!(overlap_index(&a, &a).unwrap() > 0.99);
        let b: Vec<f64> = a.iter().map(|x| x + 50.0).collect();
        assert!(overlap_index(&a, &b).unwrap() < 1e-6);
    }

    #[test]
    fn rejects_empty() {
        assert!(overlap_index(&[], &[1.0]).is_err());
    }
}
