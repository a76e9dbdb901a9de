//! Prewhitening and linear conservation laws.
//!
//! An affine transform gives the trajectory zero mean and unit covariance.
//! Eigenvalues of the raw covariance that vanish (|lambda| < eps_p * max
//! lambda) expose linear conserved quantities H_i(x) = e_i . x; those
//! directions are removed before the nonlinear analysis. A no-reduction
//! variant keeps all directions, damping the division by sqrt(lambda) + eps_n.

use crate::error::{Error, Result};
use crate::linalg::{self, SymmetricEigen};
use crate::points::Points;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Default vanishing-eigenvalue cutoff; the one tunable of the method.
pub const DEFAULT_EPS_P: f64 = 0.001;
/// Default damping for the no-reduction transform.
pub const DEFAULT_EPS_N: f64 = 0.001;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WhitenModel {
    pub mean: Vec<f64>,
    /// Covariance eigenvalues, descending.
    pub eigvals: Vec<f64>,
    /// Orthonormal eigenvectors; `eigvecs[k]` pairs with `eigvals[k]`.
    pub eigvecs: Vec<Vec<f64>>,
    /// Indices (into the descending order) with non-vanishing eigenvalues.
    pub kept: Vec<usize>,
    /// Indices flagged as vanishing.
    pub removed: Vec<usize>,
    pub eps_p: f64,
    pub eps_n: f64,
    pub reduce: bool,
}

/// A removed eigenpair: the direction defines H(x) = e . x.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearLaw {
    pub eigvec: Vec<f64>,
    pub eigval: f64,
}

pub fn fit_whiten(points: &Points, eps_p: f64, reduce: bool) -> Result<WhitenModel> {
    fit_whiten_full(points, eps_p, DEFAULT_EPS_N, reduce)
}

pub fn fit_whiten_full(
    points: &Points,
    eps_p: f64,
    eps_n: f64,
    reduce: bool,
) -> Result<WhitenModel> {
    if !(eps_p > 0.0 && eps_p < 1.0) {
        return Err(Error::InvalidConfig(format!("eps_p must be in (0, 1), got {eps_p}")));
    }
    let dim = points.dim();
    points.require_rows(dim + 1)?;

    let mean = points.mean();
    let cov = points.covariance();
    let SymmetricEigen { values, vectors } = linalg::eigh(&cov, dim);

    let max = values[0];
    if !(max > 0.0) {
        return Err(Error::InvalidConfig(
            "degenerate data: covariance has no positive eigenvalue".into(),
        ));
    }
    // |lambda| guards against small negative values from rounding.
    let (kept, removed): (Vec<usize>, Vec<usize>) =
        (0..dim).partition(|&i| values[i].abs() >= eps_p * max);

    Ok(WhitenModel { mean, eigvals: values, eigvecs: vectors, kept, removed, eps_p, eps_n, reduce })
}

impl WhitenModel {
    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    /// Dimension of transformed vectors.
    pub fn output_dim(&self) -> usize {
        if self.reduce { self.kept.len() } else { self.input_dim() }
    }

    /// Number of vanishing directions, i.e. linear conservation laws.
    pub fn linear_law_count(&self) -> usize {
        self.removed.len()
    }

    /// Transform a raw state into whitened coordinates.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch { expected: self.input_dim(), got: x.len() });
        }
        let centered: Vec<f64> = x.iter().zip(&self.mean).map(|(a, m)| a - m).collect();
        let out = if self.reduce {
            self.kept
                .iter()
                .map(|&k| {
                    linalg::dot(&self.eigvecs[k], &centered) / self.eigvals[k].max(0.0).sqrt()
                })
                .collect()
        } else {
            (0..self.input_dim())
                .map(|k| {
                    let scale = self.eigvals[k].max(0.0).sqrt() + self.eps_n;
                    linalg::dot(&self.eigvecs[k], &centered) / scale
                })
                .collect()
        };
        Ok(out)
    }

    pub fn apply_points(&self, points: &Points) -> Result<Points> {
        let mut out = Points::with_capacity(self.output_dim(), points.len());
        for row in points.rows() {
            out.push(&self.apply(row)?);
        }
        Ok(out)
    }

    /// Map whitened coordinates back to the original space (kept subspace
    /// only in reduce mode).
    pub fn invert(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.output_dim() {
            return Err(Error::DimensionMismatch { expected: self.output_dim(), got: y.len() });
        }
        let mut x = self.mean.clone();
        if self.reduce {
            for (&k, &yk) in self.kept.iter().zip(y) {
                let s = self.eigvals[k].max(0.0).sqrt();
                for (xi, &e) in x.iter_mut().zip(&self.eigvecs[k]) {
                    *xi += yk * s * e;
                }
            }
        } else {
            for (k, &yk) in y.iter().enumerate() {
                let s = self.eigvals[k].max(0.0).sqrt() + self.eps_n;
                for (xi, &e) in x.iter_mut().zip(&self.eigvecs[k]) {
                    *xi += yk * s * e;
                }
            }
        }
        Ok(x)
    }

    /// The removed eigenpairs: each defines a linear conserved quantity.
    pub fn linear_conserved_report(&self) -> Vec<LinearLaw> {
        self.removed
            .iter()
            .map(|&k| LinearLaw { eigvec: self.eigvecs[k].clone(), eigval: self.eigvals[k] })
            .collect()
    }
}

/// Covariance eigenvalues of the points after adding iid N(0, sigma^2 I)
/// noise, one row per requested sigma. Isotropic noise commutes with the
/// data covariance, so each eigenvalue should shift by about sigma^2.
pub fn noise_eigenvalue_scan<R: Rng>(
    points: &Points,
    sigmas: &[f64],
    rng: &mut R,
) -> Vec<(f64, Vec<f64>)> {
    let dim = points.dim();
    let mut out = Vec::with_capacity(sigmas.len());
    for &sigma in sigmas {
        let eig = if sigma == 0.0 {
            linalg::eigh(&points.covariance(), dim).values
        } else {
            let mut noisy = Points::with_capacity(dim, points.len());
            let mut row = vec![0.0; dim];
            for p in points.rows() {
                for (r, &v) in row.iter_mut().zip(p) {
                    let n: f64 = rng.sample(StandardNormal);
                    *r = v + sigma * n;
                }
                noisy.push(&row);
            }
            linalg::eigh(&noisy.covariance(), dim).values
        };
        out.push((sigma, eig));
    }
    out
}
