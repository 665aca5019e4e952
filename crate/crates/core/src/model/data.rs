//! Observed capture histories and their all-zero augmentation.

use crate::error::{Error, Result};

/// A `D x T` binary detection matrix padded with `M - D` all-zero rows.
///
/// Augmented rows are not materialised: `history(i)` for `i >= D` returns a
/// shared zero row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaptureData {
    ids: Vec<String>,
    cells: Vec<u8>,
    occasions: usize,
    augmented: usize,
    zero_row: Vec<u8>,
}

impl CaptureData {
    /// Validates and wraps observed histories. Every row must contain a capture.
    pub fn new(ids: Vec<String>, rows: Vec<Vec<u8>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::invalid("capture matrix has no rows"));
        }
        if ids.len() != rows.len() {
            return Err(Error::invalid(format!("{} ids for {} capture rows", ids.len(), rows.len())));
        }
        let occasions = rows[0].len();
        if occasions == 0 {
            return Err(Error::invalid("capture matrix has no occasions"));
        }
        let mut cells = Vec::with_capacity(rows.len() * occasions);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != occasions {
                return Err(Error::invalid(format!(
                    "row {} (id {}) has {} occasions, expected {}",
                    i + 1,
                    ids[i],
                    row.len(),
                    occasions
                )));
            }
            if let Some(t) = row.iter().position(|&y| y > 1) {
                return Err(Error::invalid(format!(
                    "row {} (id {}), occasion {}: cell value {} is not binary",
                    i + 1,
                    ids[i],
                    t + 1,
                    row[t]
                )));
            }
            if row.iter().all(|&y| y == 0) {
                return Err(Error::invalid(format!("row {} (id {}) has no captures", i + 1, ids[i])));
            }
            cells.extend_from_slice(row);
        }
        Ok(Self { ids, cells, occasions, augmented: 0, zero_row: vec![0; occasions] })
    }

    /// Observed rows with generated ids `1..=D`.
    pub fn from_rows(rows: Vec<Vec<u8>>) -> Result<Self> {
        let ids = (1..=rows.len()).map(|i| i.to_string()).collect();
        Self::new(ids, rows)
    }

    /// Appends `n_zero` all-zero histories. The observed block is untouched.
    pub fn augment(&self, n_zero: usize) -> Self {
        let mut out = self.clone();
        out.augmented += n_zero;
        out
    }

    /// Number of observed individuals `D`.
    pub fn n_observed(&self) -> usize {
        self.ids.len()
    }

    pub fn n_augmented(&self) -> usize {
        self.augmented
    }

    /// Augmented size `M = D + (M - D)`.
    pub fn total(&self) -> usize {
        self.n_observed() + self.augmented
    }

    pub fn n_occasions(&self) -> usize {
        self.occasions
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn history(&self, i: usize) -> &[u8] {
        if i < self.n_observed() {
            &self.cells[i * self.occasions..(i + 1) * self.occasions]
        } else {
            &self.zero_row
        }
    }

    pub fn observed_rows(&self) -> impl Iterator<Item = &[u8]> {
        self.cells.chunks(self.occasions)
    }

    /// Per-occasion number of captures among observed rows.
    pub fn captures_per_occasion(&self) -> Vec<usize> {
        let mut out = vec![0; self.occasions];
        for row in self.observed_rows() {
            for (t, &y) in row.iter().enumerate() {
                out[t] += y as usize;
            }
        }
        out
    }
}
