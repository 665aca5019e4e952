//! MAP allocation and the Hand-Till multi-class AUC.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Argmax per row; ties go to the lowest group index.
pub fn map_classify(membership: &[Vec<f64>]) -> Vec<usize> {
    membership
        .iter()
        .map(|row| {
            let mut best = 0;
            for (g, &p) in row.iter().enumerate() {
                if p > row[best] {
                    best = g;
                }
            }
            best
        })
        .collect()
}

/// Mid-ranks (1-based) of `values`.
fn mid_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Rank AUC: probability that a random positive outscores a random negative (ties count half).
pub fn rank_auc(scores: &[f64], positive: &[bool]) -> Option<f64> {
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let ranks = mid_ranks(scores);
    let sum: f64 = ranks.iter().zip(positive).filter(|(_, &p)| p).map(|(r, _)| r).sum();
    let (np, nn) = (n_pos as f64, n_neg as f64);
    Some((sum - np * (np + 1.0) / 2.0) / (np * nn))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mauc {
    pub value: f64,
    /// Class pairs left out because one class has no true member.
    pub skipped_pairs: Vec<(usize, usize)>,
}

/// Hand-Till mAUC: mean over class pairs of `[A(i|j) + A(j|i)] / 2`.
pub fn mauc(membership: &[Vec<f64>], truth: &[usize]) -> Result<Mauc> {
    if membership.len() != truth.len() {
        return Err(Error::invalid(format!(
            "{} membership rows for {} labels",
            membership.len(),
            truth.len()
        )));
    }
    let g = membership.first().map_or(0, Vec::len);
    if g < 2 {
        return Err(Error::invalid("mAUC needs at least two classes"));
    }
    if let Some(&bad) = truth.iter().find(|&&c| c >= g) {
        return Err(Error::invalid(format!("label {bad} outside 0..{g}")));
    }
    let mut total = 0.0;
    let mut pairs = 0usize;
    let mut skipped = Vec::new();
    for i in 0..g {
        for j in i + 1..g {
            let idx: Vec<usize> = (0..truth.len()).filter(|&k| truth[k] == i || truth[k] == j).collect();
            let is_i: Vec<bool> = idx.iter().map(|&k| truth[k] == i).collect();
            let is_j: Vec<bool> = is_i.iter().map(|b| !b).collect();
            let score_i: Vec<f64> = idx.iter().map(|&k| membership[k][i]).collect();
            let score_j: Vec<f64> = idx.iter().map(|&k| membership[k][j]).collect();
            match (rank_auc(&score_i, &is_i), rank_auc(&score_j, &is_j)) {
                (Some(a), Some(b)) => {
                    total += (a + b) / 2.0;
                    pairs += 1;
                }
                _ => skipped.push((i, j)),
            }
        }
    }
    if pairs == 0 {
        return Err(Error::invalid("mAUC undefined: fewer than two classes present in the truth"));
    }
    Ok(Mauc { value: total / pairs as f64, skipped_pairs: skipped })
}
