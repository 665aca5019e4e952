//! Widely applicable information criterion from pointwise log-likelihoods.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waic {
    pub waic: f64,
    pub lppd: f64,
    pub p_waic: f64,
}

/// WAIC over `draws x units` log-likelihoods.
///
/// `unit_weights` repeats a column that stands for several identical units
/// (e.g. the shared all-zero history); `None` weights every column by one.
/// `p_waic` uses the sample variance across draws.
pub fn waic(draws: &[&[f64]], unit_weights: Option<&[f64]>) -> Result<Waic> {
    let s = draws.len();
    if s < 2 {
        return Err(Error::invalid("WAIC needs at least two draws"));
    }
    let units = draws[0].len();
    if draws.iter().any(|d| d.len() != units) {
        return Err(Error::invalid("ragged pointwise log-likelihood matrix"));
    }
    if let Some(w) = unit_weights {
        if w.len() != units {
            return Err(Error::invalid(format!("{} unit weights for {units} units", w.len())));
        }
    }
    let (mut lppd, mut p_waic) = (0.0, 0.0);
    for i in 0..units {
        let w = unit_weights.map_or(1.0, |w| w[i]);
        let max = draws.iter().map(|d| d[i]).fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(Error::invalid(format!("unit {} has a non-finite log-likelihood", i + 1)));
        }
        let sum_exp: f64 = draws.iter().map(|d| (d[i] - max).exp()).sum();
        lppd += w * (max + (sum_exp / s as f64).ln());
        let mean = draws.iter().map(|d| d[i]).sum::<f64>() / s as f64;
        let var = draws.iter().map(|d| (d[i] - mean).powi(2)).sum::<f64>() / (s - 1) as f64;
        p_waic += w * var;
    }
    Ok(Waic { waic: -2.0 * (lppd - p_waic), lppd, p_waic })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_draws() {
        let a = [-1.0, -2.5, -0.3];
        let w = waic(&[&a, &a, &a], None).unwrap();
        assert_eq!(w.p_waic, 0.0);
        assert!((w.waic - 2.0 * 3.8).abs() < 1e-12);
    }

    #[test]
    fn hand_computed_pair() {
        let (x, y) = (0.5f64.ln(), 0.25f64.ln());
        let w = waic(&[&[x], &[y]], None).unwrap();
        assert!((w.lppd - 0.375f64.ln()).abs() < 1e-15);
        let mean = (x + y) / 2.0;
        let var = (x - mean).powi(2) + (y - mean).powi(2);
        assert!((w.p_waic - var).abs() < 1e-15);
    }

    #[test]
    fn weights_repeat_columns() {
        let a = [-1.0, -0.2];
        let b = [-1.5, -0.1];
        let weighted = waic(&[&a, &b], Some(&[1.0, 3.0])).unwrap();
        let a4 = [-1.0, -0.2, -0.2, -0.2];
        let b4 = [-1.5, -0.1, -0.1, -0.1];
        let expanded = waic(&[&a4, &b4], None).unwrap();
        assert!((weighted.waic - expanded.waic).abs() < 1e-12);
    }

    #[test]
    fn single_draw_is_an_error() {
        assert!(waic(&[&[-1.0]], None).is_err());
    }
}
