//! The three comparison dimensionality estimators: global PCA, an
//! autoencoder with a reconstruction-error threshold, and the fractal
//! (pair-counting) method.

use crate::error::{Error, Result};
use crate::linalg;
use crate::points::Points;
use crate::preprocess;
use crate::pullnet::{train_pull, TrainConfig};
use crate::rng::{self, tag};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

/// Manifold dimension as seen by global PCA: the number of non-vanishing
/// covariance eigenvalues, with the same cutoff the preprocessing uses.
/// Linear in the data, so it can only ever find linear conservation laws.
pub fn global_pca_dim(points: &Points, eps_p: f64) -> Result<usize> {
    let model = preprocess::fit_whiten(points, eps_p, true)?;
    Ok(model.kept.len())
}

/// Reconstruction-error curve over bottleneck widths.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AutoencoderVerdict {
    /// Smallest bottleneck with test error below threshold, or the full
    /// dimension when none qualifies.
    pub dim: usize,
    pub met_threshold: bool,
    pub threshold: f64,
    /// (bottleneck width, best test reconstruction error) per tried width.
    pub curve: Vec<(usize, f64)>,
}

/// Train mirrored autoencoders (the pull-network stack with a width-s
/// middle layer) for each bottleneck in `s_range`; several restarts per
/// width keep the curve monotone against unlucky initializations.
pub fn autoencoder_dim(
    points: &Points,
    s_range: &[usize],
    threshold: f64,
    cfg: &TrainConfig,
    restarts: usize,
) -> Result<AutoencoderVerdict> {
    if s_range.is_empty() {
        return Err(Error::InvalidConfig("empty bottleneck range".into()));
    }
    if cfg.hidden.len() != 2 {
        return Err(Error::InvalidConfig(
            "autoencoder expects exactly two hidden widths around the bottleneck".into(),
        ));
    }
    let dim = points.dim();
    let mut curve = Vec::with_capacity(s_range.len());
    for (si, &s) in s_range.iter().enumerate() {
        if s < 1 || s > dim {
            return Err(Error::InvalidConfig(format!(
                "bottleneck {s} outside [1, {dim}]"
            )));
        }
        let mut best = f64::INFINITY;
        for r in 0..restarts.max(1) {
            let train_cfg = TrainConfig {
                hidden: vec![cfg.hidden[0], s, cfg.hidden[1]],
                // Plain reconstruction: zero walk noise makes the denoising
                // loop an autoencoder objective.
                noise_scale: 0.0,
                seed: rng::derive_seed(cfg.seed, &[tag::TOY, si as u64, r as u64]),
                ..cfg.clone()
            };
            let net = train_pull(points, &train_cfg)?;
            best = best.min(net.test_loss);
        }
        curve.push((s, best));
    }
    let hit = curve.iter().find(|&&(_, err)| err < threshold);
    Ok(match hit {
        Some(&(s, _)) => AutoencoderVerdict { dim: s, met_threshold: true, threshold, curve },
        None => AutoencoderVerdict { dim, met_threshold: false, threshold, curve },
    })
}

/// Pair-count curve and its fitted slope.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FractalCurve {
    /// log10 of the distance grid.
    pub log_l: Vec<f64>,
    /// log10 of the cumulative pair count at each distance.
    pub log_pairs: Vec<f64>,
    /// Inclusive index range of the fitted window.
    pub fit_window: (usize, usize),
    pub slope: f64,
    /// True when the window was selected automatically.
    pub auto_window: bool,
    pub n_points_used: usize,
    /// Leading distances with zero pairs that were dropped.
    pub truncated_bins: usize,
}

/// Number of pair-count grid levels.
const FRACTAL_BINS: usize = 32;
/// A window's local slopes may vary by this relative spread.
const SLOPE_SPREAD: f64 = 0.2;

/// Estimate intrinsic dimension from the scaling of the number of point
/// pairs closer than L. Pair counting is quadratic, so the cloud is first
/// subsampled to `max_points`.
pub fn fractal_dim(
    points: &Points,
    window: Option<(f64, f64)>,
    max_points: usize,
    seed: u64,
) -> Result<FractalCurve> {
    if points.len() < 2 {
        return Err(Error::InsufficientData { rows: points.len(), dim: points.dim() });
    }
    let used = if points.len() > max_points {
        let mut idx: Vec<usize> = (0..points.len()).collect();
        idx.shuffle(&mut rng::stream(seed, &[tag::SUBSAMPLE]));
        idx.truncate(max_points);
        points.select(&idx)
    } else {
        points.clone()
    };

    let n = used.len();
    let mut distances = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        let a = used.row(i);
        for j in (i + 1)..n {
            let d: f64 = a
                .iter()
                .zip(used.row(j))
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt();
            distances.push(d);
        }
    }
    distances.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
    let first_nonzero = distances.iter().position(|&d| d > 0.0).ok_or_else(|| {
        Error::InvalidConfig("all points coincide; no pair-count curve".into())
    })?;
    // Span from a low quantile of nonzero distances to the maximum.
    let lo_idx = first_nonzero + (distances.len() - first_nonzero) / 1000;
    let d_lo = distances[lo_idx];
    let d_hi = *distances.last().expect("nonempty");

    let grid: Vec<f64> = (0..FRACTAL_BINS)
        .map(|k| {
            d_lo * (d_hi / d_lo).powf(k as f64 / (FRACTAL_BINS - 1) as f64)
        })
        .collect();

    let mut log_l = Vec::with_capacity(FRACTAL_BINS);
    let mut log_pairs = Vec::with_capacity(FRACTAL_BINS);
    let mut truncated = 0usize;
    for &l in &grid {
        let count = distances.partition_point(|&d| d <= l);
        if count == 0 {
            truncated += 1;
            continue;
        }
        log_l.push(l.log10());
        log_pairs.push((count as f64).log10());
    }
    if log_l.len() < 3 {
        return Err(Error::EmptyResult("pair-count curve has fewer than 3 levels".into()));
    }

    let (window_idx, auto) = match window {
        Some((lo, hi)) => {
            let lo10 = lo.log10();
            let hi10 = hi.log10();
            let first = log_l.partition_point(|&v| v < lo10);
            let last = log_l.partition_point(|&v| v <= hi10).saturating_sub(1);
            if last <= first {
                return Err(Error::InvalidConfig(format!(
                    "fit window [{lo}, {hi}] covers fewer than two grid levels"
                )));
            }
            ((first, last), false)
        }
        None => (auto_window(&log_l, &log_pairs), true),
    };

    let (a, b) = window_idx;
    let (slope, _) = linalg::linear_fit(&log_l[a..=b], &log_pairs[a..=b]);
    Ok(FractalCurve {
        log_l,
        log_pairs,
        fit_window: window_idx,
        slope,
        auto_window: auto,
        n_points_used: n,
        truncated_bins: truncated,
    })
}

/// Longest run of grid intervals whose local slopes agree to within
/// `SLOPE_SPREAD` of their mean; near-longest runs are tie-broken by
/// flatness, so a slowly curving tail does not crowd out a genuinely
/// constant stretch.
fn auto_window(log_l: &[f64], log_pairs: &[f64]) -> (usize, usize) {
    let m = log_l.len() - 1;
    let raw: Vec<f64> = (0..m)
        .map(|k| (log_pairs[k + 1] - log_pairs[k]) / (log_l[k + 1] - log_l[k]))
        .collect();
    // Neighbor-averaged slopes: single-bin count fluctuations otherwise
    // break runs at small distances.
    let local: Vec<f64> = (0..m)
        .map(|k| {
            let a = k.saturating_sub(1);
            let b = (k + 1).min(m - 1);
            raw[a..=b].iter().sum::<f64>() / (b - a + 1) as f64
        })
        .collect();

    let mut runs: Vec<(usize, usize, f64)> = Vec::new();
    for i in 0..m {
        let mut lo = local[i];
        let mut hi = local[i];
        for j in i..m {
            lo = lo.min(local[j]);
            hi = hi.max(local[j]);
            let mean = 0.5 * (lo + hi);
            if mean <= 0.0 || (hi - lo) > SLOPE_SPREAD * mean {
                break;
            }
            runs.push((i, j + 1, (hi - lo) / mean));
        }
    }
    let longest = runs.iter().map(|r| r.1 - r.0).max().unwrap_or(1);
    runs.iter()
        .filter(|r| r.1 - r.0 + 2 >= longest)
        .min_by(|a, b| a.2.partial_cmp(&b.2).expect("finite spread"))
        .map(|r| (r.0, r.1))
        .unwrap_or((0, 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn uniform_cloud<F: FnMut(f64, f64) -> Vec<f64>>(
        n: usize,
        seed: u64,
        mut embed: F,
    ) -> Points {
        let mut r = rng::stream(seed, &[tag::TOY]);
        let rows: Vec<Vec<f64>> =
            (0..n).map(|_| embed(r.gen::<f64>(), r.gen::<f64>())).collect();
        Points::from_rows(&rows)
    }

    #[test]
    fn segment_has_dimension_one() {
        let p = uniform_cloud(1000, 3, |u, _| vec![u]);
        let c = fractal_dim(&p, None, 1000, 0).unwrap();
        assert!(c.auto_window);
        assert!((c.slope - 1.0).abs() < 0.05, "slope {}", c.slope);
        for w in c.log_pairs.windows(2) {
            assert!(w[1] >= w[0]);
        }
        assert!(c.slope >= 0.0);
    }

    #[test]
    fn circle_has_dimension_one_at_mid_scales() {
        let p = uniform_cloud(1000, 5, |u, _| {
            let t = 2.0 * std::f64::consts::PI * u;
            vec![t.cos(), t.sin()]
        });
        let c = fractal_dim(&p, None, 1000, 0).unwrap();
        assert!((c.slope - 1.0).abs() < 0.1, "slope {}", c.slope);
    }

    #[test]
    fn square_has_dimension_two() {
        let p = uniform_cloud(1000, 7, |u, v| vec![u, v]);
        let c = fractal_dim(&p, None, 1000, 0).unwrap();
        assert!((c.slope - 2.0).abs() < 0.1, "slope {}", c.slope);
    }

    #[test]
    fn slope_is_invariant_under_rescaling() {
        let p = uniform_cloud(600, 9, |u, v| vec![u, v]);
        let mut scaled = Points::new(2);
        for row in p.rows() {
            scaled.push(&[row[0] * 1e3, row[1] * 1e3]);
        }
        let a = fractal_dim(&p, None, 1000, 1).unwrap();
        let b = fractal_dim(&scaled, None, 1000, 1).unwrap();
        assert!((a.slope - b.slope).abs() < 1e-9);
        // The distance axis shifts by exactly three decades.
        assert!((b.log_l[0] - a.log_l[0] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn manual_window_is_respected() {
        let p = uniform_cloud(800, 11, |u, _| vec![u]);
        let c = fractal_dim(&p, Some((0.01, 0.2)), 1000, 0).unwrap();
        assert!(!c.auto_window);
        assert!((c.slope - 1.0).abs() < 0.1, "slope {}", c.slope);
    }

    #[test]
    fn coincident_points_are_rejected() {
        let p = Points::from_rows(&vec![vec![1.0, 1.0]; 10]);
        assert!(fractal_dim(&p, None, 1000, 0).is_err());
    }

    #[test]
    fn hyperplane_pca_dimension() {
        // Data on x3 = 0 in R^3: global PCA sees two dimensions.
        let p = uniform_cloud(500, 13, |u, v| vec![u - 0.5, v - 0.5, 0.0]);
        assert_eq!(global_pca_dim(&p, preprocess::DEFAULT_EPS_P).unwrap(), 2);
    }

    #[test]
    fn circle_defeats_global_pca() {
        // A one-dimensional circle spans two equal principal components.
        let p = uniform_cloud(500, 15, |u, _| {
            let t = 2.0 * std::f64::consts::PI * u;
            vec![t.cos(), t.sin()]
        });
        assert_eq!(global_pca_dim(&p, preprocess::DEFAULT_EPS_P).unwrap(), 2);
    }

    #[test]
    fn line_segment_autoencodes_to_one_dimension() {
        // A straight segment embedded in R^3 needs a width-1 bottleneck.
        let p = uniform_cloud(1500, 17, |u, _| {
            vec![2.0 * u - 1.0, 1.2 * u - 0.6, -0.7 * u + 0.35]
        });
        let cfg = TrainConfig {
            hidden: vec![64, 64],
            steps: 1200,
            batch: 128,
            seed: 3,
            ..TrainConfig::default()
        };
        let v = autoencoder_dim(&p, &[1, 2], 1e-3, &cfg, 1).unwrap();
        assert!(v.met_threshold);
        assert_eq!(v.dim, 1);
        assert_eq!(v.curve.len(), 2);
        // Monotone within tolerance.
        assert!(v.curve[1].1 <= v.curve[0].1 * 1.1 + 1e-6);
    }

    #[test]
    fn unreachable_threshold_returns_full_dimension_with_flag() {
        let p = uniform_cloud(400, 19, |u, v| vec![u, v, u * v]);
        let cfg = TrainConfig {
            hidden: vec![8, 8],
            steps: 30,
            batch: 32,
            seed: 1,
            ..TrainConfig::default()
        };
        let v = autoencoder_dim(&p, &[1], 1e-12, &cfg, 1).unwrap();
        assert!(!v.met_threshold);
        assert_eq!(v.dim, 3);
    }
}
