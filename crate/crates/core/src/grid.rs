//! Grid-sampled real defining functions with sup- and Lipschitz-seminorm
//! accessors.

use crate::error::{Error, Result};

/// A uniform grid sampling of a real function over an axis-aligned box.
///
/// Values are stored row-major: the last axis varies fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct DefiningGrid {
    mins: Vec<f64>,
    maxs: Vec<f64>,
    counts: Vec<usize>,
    values: Vec<f64>,
}

impl DefiningGrid {
    pub fn new(mins: Vec<f64>, maxs: Vec<f64>, counts: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if mins.len() != maxs.len() || mins.len() != counts.len() || mins.is_empty() {
            return Err(Error::InvalidGrid {
                reason: "axis descriptions must be non-empty and of equal length".into(),
            });
        }
        for (axis, ((lo, hi), n)) in mins.iter().zip(&maxs).zip(&counts).enumerate() {
            if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidGrid {
                    reason: format!("axis {axis}: need finite min < max, got [{lo}, {hi}]"),
                });
            }
            if *n < 2 {
                return Err(Error::InvalidGrid {
                    reason: format!("axis {axis}: need at least 2 samples, got {n}"),
                });
            }
        }
        let total: usize = counts.iter().try_fold(1usize, |acc, &n| acc.checked_mul(n)).ok_or(
            Error::InvalidGrid {
                reason: "sample count overflow".into(),
            },
        )?;
        if values.len() != total {
            return Err(Error::InvalidGrid {
                reason: format!("expected {total} values, got {}", values.len()),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid {
                reason: "non-finite sample value".into(),
            });
        }
        Ok(DefiningGrid {
            mins,
            maxs,
            counts,
            values,
        })
    }

    /// Samples `f` on a uniform grid over the box.
    pub fn sample<F: Fn(&[f64]) -> f64>(
        mins: Vec<f64>,
        maxs: Vec<f64>,
        counts: Vec<usize>,
        f: F,
    ) -> Result<Self> {
        let dim = mins.len();
        let total: usize = counts.iter().product();
        let mut values = Vec::with_capacity(total);
        let mut coords = vec![0.0; dim];
        let mut idx = vec![0usize; dim];
        for _ in 0..total {
            for (k, &i) in idx.iter().enumerate() {
                let h = (maxs[k] - mins[k]) / (counts[k] - 1) as f64;
                coords[k] = mins[k] + h * i as f64;
            }
            values.push(f(&coords));
            // increment multi-index, last axis fastest
            for k in (0..dim).rev() {
                idx[k] += 1;
                if idx[k] < counts[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        DefiningGrid::new(mins, maxs, counts, values)
    }

    pub fn dim(&self) -> usize {
        self.mins.len()
    }

    pub fn mins(&self) -> &[f64] {
        &self.mins
    }

    pub fn maxs(&self) -> &[f64] {
        &self.maxs
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        (self.maxs[axis] - self.mins[axis]) / (self.counts[axis] - 1) as f64
    }

    pub fn same_layout(&self, other: &DefiningGrid) -> bool {
        self.counts == other.counts
            && self
                .mins
                .iter()
                .zip(&other.mins)
                .all(|(a, b)| (a - b).abs() < 1e-12)
            && self
                .maxs
                .iter()
                .zip(&other.maxs)
                .all(|(a, b)| (a - b).abs() < 1e-12)
    }

    /// Sup-norm of the samples.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Lipschitz seminorm estimate: max over adjacent node pairs of
    /// |Δvalue| / spacing.
    pub fn lipschitz_seminorm(&self) -> f64 {
        let dim = self.dim();
        // stride of each axis in the row-major layout
        let mut strides = vec![1usize; dim];
        for k in (0..dim.saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.counts[k + 1];
        }
        let mut best: f64 = 0.0;
        let total = self.values.len();
        let mut idx = vec![0usize; dim];
        for flat in 0..total {
            for (k, &stride) in strides.iter().enumerate() {
                if idx[k] + 1 < self.counts[k] {
                    let d = (self.values[flat + stride] - self.values[flat]).abs();
                    best = best.max(d / self.spacing(k));
                }
            }
            for k in (0..dim).rev() {
                idx[k] += 1;
                if idx[k] < self.counts[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        best
    }

    /// Pointwise difference of two grids with identical layout.
    pub fn difference(&self, other: &DefiningGrid) -> Result<DefiningGrid> {
        if !self.same_layout(other) {
            return Err(Error::GridMismatch {
                reason: "bounding boxes or sample counts differ".into(),
            });
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        DefiningGrid::new(
            self.mins.clone(),
            self.maxs.clone(),
            self.counts.clone(),
            values,
        )
    }
}

/// Lipschitz-topology distance: sup-norm of the difference plus the Lipschitz
/// seminorm of the difference over adjacent node pairs.
pub fn lipschitz_distance(g1: &DefiningGrid, g2: &DefiningGrid) -> Result<f64> {
    let d = g1.difference(g2)?;
    Ok(d.sup_norm() + d.lipschitz_seminorm())
}
