//! Factorized kernel density estimation over unit-space configurations.
//!
//! Each dimension gets its own one-dimensional kernel: a Gaussian for
//! continuous coordinates and an Aitchison-Aitken kernel for categorical ones.
//! The joint density is the average over data rows of the per-dimension kernel
//! products.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::configspace::{ConfigurationSpace, DimKind};
use crate::error::{Error, Result};

/// Rejections allowed before a truncated Gaussian draw is clamped to `[0, 1]`.
const MAX_REJECTIONS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityParams {
    /// Floor for continuous bandwidths (unit space).
    pub min_bandwidth: f64,
    /// Multiplier applied to every bandwidth when sampling.
    pub bandwidth_factor: f64,
}

impl Default for DensityParams {
    fn default() -> Self {
        Self {
            min_bandwidth: 1e-3,
            bandwidth_factor: 3.0,
        }
    }
}

impl DensityParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.min_bandwidth > 0.0 && self.min_bandwidth.is_finite()) {
            return Err(Error::invalid("min_bandwidth", "must be a positive number"));
        }
        if !(self.bandwidth_factor >= 1.0 && self.bandwidth_factor.is_finite()) {
            return Err(Error::invalid("bandwidth_factor", "must be >= 1"));
        }
        Ok(())
    }
}

/// Largest legal Aitchison-Aitken smoothing for `c` categories.
fn max_lambda(c: usize) -> f64 {
    (c as f64 - 1.0) / c as f64
}

/// Scott's rule bandwidths for `rows` (all of equal length `kinds.len()`).
///
/// Continuous: `max(min_bandwidth, sd * n^(-1/(d+4)))` with the population
/// standard deviation. Categorical: the same rule on the category codes,
/// clamped to `[min_bandwidth, (c-1)/c]`.
pub fn scott_bandwidths(rows: &[&[f64]], kinds: &[DimKind], min_bandwidth: f64) -> Vec<f64> {
    let n = rows.len() as f64;
    let d = kinds.len() as f64;
    let factor = n.powf(-1.0 / (d + 4.0));
    kinds
        .iter()
        .enumerate()
        .map(|(j, kind)| match kind {
            DimKind::Continuous => {
                let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n;
                let var = rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
                (var.sqrt() * factor).max(min_bandwidth)
            }
            DimKind::Categorical(c) => {
                let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n;
                let var = rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
                (var.sqrt() * factor).clamp(min_bandwidth, max_lambda(*c))
            }
        })
        .collect()
}

/// A fitted factorized KDE. Immutable once built.
#[derive(Debug, Clone)]
pub struct KdeModel {
    kinds: Vec<DimKind>,
    /// Row-major `n x d`.
    data: Vec<f64>,
    n: usize,
    bandwidths: Vec<f64>,
    inv_bandwidths: Vec<f64>,
    /// Product of the Gaussian normalizers over continuous dims.
    gauss_norm: f64,
}

impl KdeModel {
    /// Fits a model on unit-space rows with Scott's rule bandwidths.
    pub fn fit(space: &ConfigurationSpace, rows: &[&[f64]], min_bandwidth: f64) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Contract("KDE needs at least one data point".into()));
        }
        if !(min_bandwidth > 0.0) {
            return Err(Error::invalid("min_bandwidth", "must be positive"));
        }
        let kinds = space.dim_kinds();
        let bandwidths = scott_bandwidths(rows, &kinds, min_bandwidth);
        Self::build(space, rows, bandwidths)
    }

    /// Builds a model with explicitly given bandwidths.
    pub fn with_bandwidths(
        space: &ConfigurationSpace,
        rows: &[&[f64]],
        bandwidths: Vec<f64>,
    ) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Contract("KDE needs at least one data point".into()));
        }
        Self::build(space, rows, bandwidths)
    }

    fn build(space: &ConfigurationSpace, rows: &[&[f64]], bandwidths: Vec<f64>) -> Result<Self> {
        let kinds = space.dim_kinds();
        if bandwidths.len() != kinds.len() {
            return Err(Error::Contract(format!(
                "{} bandwidths for {} dimensions",
                bandwidths.len(),
                kinds.len()
            )));
        }
        for (j, (kind, &h)) in kinds.iter().zip(&bandwidths).enumerate() {
            let ok = match kind {
                DimKind::Continuous => h > 0.0 && h.is_finite(),
                DimKind::Categorical(c) => (0.0..=max_lambda(*c)).contains(&h),
            };
            if !ok {
                return Err(Error::invalid(
                    format!("bandwidth[{j}]"),
                    format!("{h} is not legal for {kind:?}"),
                ));
            }
        }
        let mut data = Vec::with_capacity(rows.len() * kinds.len());
        for row in rows {
            space.check_unit(row)?;
            data.extend_from_slice(row);
        }
        let inv_bandwidths = bandwidths.iter().map(|h| 1.0 / h).collect();
        let gauss_norm = kinds
            .iter()
            .zip(&bandwidths)
            .filter(|(k, _)| **k == DimKind::Continuous)
            .map(|(_, h)| 1.0 / (h * (2.0 * PI).sqrt()))
            .product();
        Ok(Self {
            kinds,
            data,
            n: rows.len(),
            bandwidths,
            inv_bandwidths,
            gauss_norm,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn bandwidths(&self) -> &[f64] {
        &self.bandwidths
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.kinds.len();
        &self.data[i * d..(i + 1) * d]
    }

    /// Density at a unit-space point.
    pub fn pdf(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.kinds.len());
        let d = self.kinds.len();
        let mut total = 0.0;
        for row in self.data.chunks_exact(d) {
            let mut quad = 0.0;
            let mut cat = 1.0;
            for j in 0..d {
                match self.kinds[j] {
                    DimKind::Continuous => {
                        let z = (x[j] - row[j]) * self.inv_bandwidths[j];
                        quad += z * z;
                    }
                    DimKind::Categorical(c) => {
                        let lambda = self.bandwidths[j];
                        cat *= if x[j] == row[j] {
                            1.0 - lambda
                        } else {
                            lambda / (c as f64 - 1.0)
                        };
                    }
                }
            }
            if cat > 0.0 {
                total += cat * (-0.5 * quad).exp();
            }
        }
        self.gauss_norm * total / self.n as f64
    }

    /// Draws a unit-space point from the model with every bandwidth widened
    /// by `bandwidth_factor`. Continuous draws are truncated to `[0, 1]` by
    /// rejection, falling back to clamping.
    pub fn sample<R: Rng + ?Sized>(&self, bandwidth_factor: f64, rng: &mut R) -> Vec<f64> {
        let row = self.row(rng.random_range(0..self.n));
        self.kinds
            .iter()
            .enumerate()
            .map(|(j, kind)| match kind {
                DimKind::Continuous => {
                    let sd = bandwidth_factor * self.bandwidths[j];
                    let mut v = f64::NAN;
                    for _ in 0..MAX_REJECTIONS {
                        let z: f64 = rng.sample(StandardNormal);
                        v = row[j] + sd * z;
                        if (0.0..=1.0).contains(&v) {
                            return v;
                        }
                    }
                    v.clamp(0.0, 1.0)
                }
                DimKind::Categorical(c) => {
                    let lambda = (bandwidth_factor * self.bandwidths[j]).clamp(0.0, max_lambda(*c));
                    let current = row[j] as usize;
                    if rng.random::<f64>() < 1.0 - lambda {
                        current as f64
                    } else {
                        let other = rng.random_range(0..c - 1);
                        (if other >= current { other + 1 } else { other }) as f64
                    }
                }
            })
            .collect()
    }
}
