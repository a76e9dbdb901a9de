//! Dense row-major point set: n rows (samples) by `dim` columns (components).

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Points {
    dim: usize,
    data: Vec<f64>,
}

impl Points {
    pub fn new(dim: usize) -> Self {
        Points { dim, data: Vec::new() }
    }

    pub fn with_capacity(dim: usize, rows: usize) -> Self {
        Points { dim, data: Vec::with_capacity(dim * rows) }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let dim = rows.first().map_or(0, Vec::len);
        let mut p = Points::with_capacity(dim, rows.len());
        for r in rows {
            p.push(r);
        }
        p
    }

    pub fn from_flat(dim: usize, data: Vec<f64>) -> Self {
        assert!(dim > 0 && data.len() % dim == 0, "flat data must be a whole number of rows");
        Points { dim, data }
    }

    pub fn push(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.dim);
        self.data.extend_from_slice(row);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        if self.dim == 0 { 0 } else { self.data.len() / self.dim }
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Rows selected by index, in the given order.
    pub fn select(&self, indices: &[usize]) -> Points {
        let mut out = Points::with_capacity(self.dim, indices.len());
        for &i in indices {
            out.push(self.row(i));
        }
        out
    }

    /// Every `stride`-th row starting at `offset`.
    pub fn strided(&self, offset: usize, stride: usize) -> Points {
        assert!(stride > 0);
        let mut out = Points::new(self.dim);
        let mut i = offset;
        while i < self.len() {
            out.push(self.row(i));
            i += stride;
        }
        out
    }

    /// Column-wise mean.
    pub fn mean(&self) -> Vec<f64> {
        let n = self.len();
        let mut m = vec![0.0; self.dim];
        for row in self.rows() {
            for (mi, &x) in m.iter_mut().zip(row) {
                *mi += x;
            }
        }
        if n > 0 {
            let inv = 1.0 / n as f64;
            for mi in &mut m {
                *mi *= inv;
            }
        }
        m
    }

    /// Population covariance (1/n) about the sample mean, row-major dim x dim.
    pub fn covariance(&self) -> Vec<f64> {
        let n = self.len();
        let d = self.dim;
        let mean = self.mean();
        let mut cov = vec![0.0; d * d];
        let mut centered = vec![0.0; d];
        for row in self.rows() {
            for (c, (&x, &m)) in centered.iter_mut().zip(row.iter().zip(&mean)) {
                *c = x - m;
            }
            for i in 0..d {
                let ci = centered[i];
                let dst = &mut cov[i * d..(i + 1) * d];
                for (j, &cj) in centered.iter().enumerate() {
                    dst[j] += ci * cj;
                }
            }
        }
        if n > 0 {
            let inv = 1.0 / n as f64;
            for c in &mut cov {
                *c *= inv;
            }
        }
        cov
    }

    pub fn require_rows(&self, min_rows: usize) -> Result<()> {
        if self.len() < min_rows {
            return Err(Error::InsufficientData { rows: self.len(), dim: self.dim });
        }
        Ok(())
    }
}
