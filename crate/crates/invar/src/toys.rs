//! Synthetic manifolds for calibration studies: circles and ellipses with
//! optional measurement noise. These are analyzed without prewhitening, so
//! the effect of anisotropy on the diagram can be seen directly.

use crate::points::Points;
use crate::rng::{self, tag};
use rand::Rng;
use rand_distr::StandardNormal;

/// `n` points spread uniformly in the angle parameter over an ellipse with
/// semi-axes (a, b).
pub fn ellipse_points(n: usize, a: f64, b: f64) -> Points {
    let mut p = Points::with_capacity(2, n);
    for i in 0..n {
        let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
        p.push(&[a * t.cos(), b * t.sin()]);
    }
    p
}

pub fn circle_points(n: usize, radius: f64) -> Points {
    ellipse_points(n, radius, radius)
}

/// Add iid N(0, sigma^2) measurement noise to every component.
pub fn with_noise(points: &Points, sigma: f64, seed: u64) -> Points {
    if sigma == 0.0 {
        return points.clone();
    }
    let mut rng = rng::stream(seed, &[tag::TOY]);
    let mut out = Points::with_capacity(points.dim(), points.len());
    let mut row = vec![0.0; points.dim()];
    for p in points.rows() {
        for (dst, &v) in row.iter_mut().zip(p) {
            let n: f64 = rng.sample(StandardNormal);
            *dst = v + sigma * n;
        }
        out.push(&row);
    }
    out
}
