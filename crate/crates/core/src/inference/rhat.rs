//! Split-chain potential scale reduction factor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rhat {
    pub value: f64,
    /// Every draw in every chain was identical; `value` is 1 by convention.
    pub constant: bool,
}

/// Gelman-Rubin statistic on chains split in half (a trailing odd draw is dropped).
pub fn rhat(chains: &[Vec<f64>]) -> Result<Rhat> {
    if chains.is_empty() {
        return Err(Error::invalid("R-hat needs at least one chain"));
    }
    let n = chains.iter().map(Vec::len).min().unwrap_or(0) / 2;
    if n < 2 {
        return Err(Error::invalid("R-hat needs at least four draws per chain"));
    }
    let halves: Vec<&[f64]> = chains.iter().flat_map(|c| [&c[..n], &c[n..2 * n]]).collect();
    let m = halves.len() as f64;
    let nf = n as f64;
    let means: Vec<f64> = halves.iter().map(|h| h.iter().sum::<f64>() / nf).collect();
    let grand = means.iter().sum::<f64>() / m;
    let b = nf / (m - 1.0) * means.iter().map(|x| (x - grand).powi(2)).sum::<f64>();
    let w = halves
        .iter()
        .zip(&means)
        .map(|(h, mean)| h.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0))
        .sum::<f64>()
        / m;
    if w == 0.0 {
        return Ok(if b == 0.0 {
            Rhat { value: 1.0, constant: true }
        } else {
            Rhat { value: f64::INFINITY, constant: false }
        });
    }
    let var_plus = (nf - 1.0) / nf * w + b / nf;
    Ok(Rhat { value: (var_plus / w).sqrt(), constant: false })
}
