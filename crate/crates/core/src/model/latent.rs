//! Latent trajectories, labels and the abundance counts derived from them.

use serde::{Deserialize, Serialize};

use super::likelihood::{ALIVE, NOT_ENTERED};
use crate::error::{Error, Result};

/// Per-individual latent state over the augmented matrix (row-major `M x T`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatentState {
    rows: usize,
    occasions: usize,
    /// Alive indicators.
    pub z: Vec<u8>,
    /// Recruitable indicators.
    pub r: Vec<u8>,
    /// Presence indicators; equal to `z` outside thinned groups.
    pub v: Vec<u8>,
    /// Zero-based group labels.
    pub labels: Vec<usize>,
}

impl LatentState {
    /// All rows never entered, all labels 0.
    pub fn empty(rows: usize, occasions: usize) -> Self {
        let mut r = vec![0u8; rows * occasions];
        for i in 0..rows {
            r[i * occasions..(i + 1) * occasions].fill(1);
        }
        Self {
            rows,
            occasions,
            z: vec![0; rows * occasions],
            r,
            v: vec![0; rows * occasions],
            labels: vec![0; rows],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn occasions(&self) -> usize {
        self.occasions
    }

    pub fn z_row(&self, i: usize) -> &[u8] {
        &self.z[i * self.occasions..(i + 1) * self.occasions]
    }

    pub fn r_row(&self, i: usize) -> &[u8] {
        &self.r[i * self.occasions..(i + 1) * self.occasions]
    }

    pub fn v_row(&self, i: usize) -> &[u8] {
        &self.v[i * self.occasions..(i + 1) * self.occasions]
    }

    pub fn v_row_mut(&mut self, i: usize) -> &mut [u8] {
        &mut self.v[i * self.occasions..(i + 1) * self.occasions]
    }

    /// Writes row `i` from a state path (0 not entered, 1 alive, 2 departed).
    /// Presence is reset to `z`.
    pub fn set_path(&mut self, i: usize, states: &[u8]) {
        let n = self.occasions;
        debug_assert_eq!(states.len(), n);
        let base = i * n;
        for t in 0..n {
            let alive = (states[t] == ALIVE) as u8;
            self.z[base + t] = alive;
            self.v[base + t] = alive;
            self.r[base + t] = (t == 0 || states[t - 1] == NOT_ENTERED) as u8;
        }
    }

    /// Recovers the state path of row `i`.
    pub fn path(&self, i: usize) -> Vec<u8> {
        let z = self.z_row(i);
        let mut entered = false;
        z.iter()
            .map(|&alive| {
                if alive == 1 {
                    entered = true;
                    1
                } else if entered {
                    2
                } else {
                    0
                }
            })
            .collect()
    }

    /// First and last occasion alive, if the row ever entered.
    pub fn presence_window(&self, i: usize) -> Option<(usize, usize)> {
        let z = self.z_row(i);
        let first = z.iter().position(|&a| a == 1)?;
        let last = z.iter().rposition(|&a| a == 1)?;
        Some((first, last))
    }

    /// Checks `r_1 = 1`, `r_t = min(r_{t-1}, 1 - z_{t-1})`, no re-entry and
    /// `v <= z` (with `v = z` on rows not listed in `thinned_rows`).
    pub fn check(&self, thinned: impl Fn(usize) -> bool) -> Result<()> {
        let n = self.occasions;
        for i in 0..self.rows {
            let z = self.z_row(i);
            let r = self.r_row(i);
            let v = self.v_row(i);
            if n > 0 && r[0] != 1 {
                return Err(Error::invariant(format!("row {i}: r_1 must be 1")));
            }
            for t in 1..n {
                let expect = r[t - 1].min(1 - z[t - 1]);
                if r[t] != expect {
                    return Err(Error::invariant(format!(
                        "row {i}: recruitability recurrence broken at t={}",
                        t + 1
                    )));
                }
            }
            let mut seen_exit = false;
            for t in 0..n {
                if z[t] == 1 && seen_exit {
                    return Err(Error::invariant(format!("row {i}: re-entry at t={}", t + 1)));
                }
                if t > 0 && z[t - 1] == 1 && z[t] == 0 {
                    seen_exit = true;
                }
            }
            let thin = thinned(self.labels[i]);
            for t in 0..n {
                if v[t] > z[t] || (!thin && v[t] != z[t]) {
                    return Err(Error::invariant(format!("row {i}: presence inconsistent at t={}", t + 1)));
                }
            }
        }
        Ok(())
    }
}

/// Abundance quantities for one posterior draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbundanceDraw {
    pub n_t: Vec<usize>,
    pub n_super: usize,
    pub n_group: Vec<usize>,
    pub psi: Vec<f64>,
}

/// Counts `N_t`, `N_super` and per-group super-population sizes.
/// `psi` is left empty; callers fill it from the recruitment parameters.
pub fn derived_counts(latent: &LatentState, groups: usize) -> AbundanceDraw {
    let n = latent.occasions();
    let mut n_t = vec![0usize; n];
    let mut n_super = 0;
    let mut n_group = vec![0usize; groups];
    for i in 0..latent.rows() {
        let z = latent.z_row(i);
        let mut any = false;
        for (t, &alive) in z.iter().enumerate() {
            if alive == 1 {
                n_t[t] += 1;
                any = true;
            }
        }
        if any {
            n_super += 1;
            n_group[latent.labels[i]] += 1;
        }
    }
    AbundanceDraw { n_t, n_super, n_group, psi: Vec::new() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_zero_and_all_one() {
        let l = LatentState::empty(4, 3);
        let a = derived_counts(&l, 2);
        assert_eq!(a.n_super, 0);
        assert_eq!(a.n_t, vec![0, 0, 0]);

        let mut full = LatentState::empty(4, 3);
        for i in 0..4 {
            full.set_path(i, &[1, 1, 1]);
        }
        let a = derived_counts(&full, 2);
        assert_eq!(a.n_super, 4);
        assert_eq!(a.n_t, vec![4, 4, 4]);
        assert_eq!(a.n_group, vec![4, 0]);
    }

    #[test]
    fn hand_count() {
        let mut l = LatentState::empty(4, 4);
        l.set_path(0, &[0, 1, 1, 2]);
        l.set_path(1, &[1, 2, 2, 2]);
        l.set_path(3, &[0, 0, 0, 1]);
        l.labels = vec![1, 0, 1, 1];
        let a = derived_counts(&l, 2);
        assert_eq!(a.n_t, vec![1, 1, 1, 1]);
        assert_eq!(a.n_super, 3);
        assert_eq!(a.n_group, vec![1, 2]);
        assert_eq!(l.path(0), vec![0, 1, 1, 2]);
        assert_eq!(l.r_row(0), &[1, 1, 0, 0]);
        assert_eq!(l.presence_window(0), Some((1, 2)));
        assert_eq!(l.presence_window(2), None);
        l.check(|_| false).unwrap();
    }

    #[test]
    fn detects_re_entry() {
        let mut l = LatentState::empty(1, 3);
        l.z = vec![1, 0, 1];
        l.v = l.z.clone();
        l.r = vec![1, 0, 0];
        assert!(l.check(|_| false).is_err());
    }
}
