//! Explained-ratio diagrams, the n_eff order parameter and detection rules.
//!
//! For each noise scale L: train a pull network, gather a walk-pull sample
//! cloud, and record the fraction of variance along each local principal
//! component. Ratios that dip an order of magnitude below the 1/N baseline
//! flag conservation laws; the smooth count n_eff(L) = sum c(pi N w_i)
//! (c = cos below pi/2, zero above) turns the same diagram into an order
//! parameter for parameter scans.

use crate::error::{Error, Result};
use crate::linalg;
use crate::points::Points;
use crate::preprocess::{self, WhitenModel};
use crate::pullnet::{train_pull, TrainConfig};
use crate::rng;
use crate::sampler::{sample_cloud, SampleMode};
use crate::{dynamics::Trajectory, preprocess::DEFAULT_EPS_P};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// A component explaining less than this fraction of 1/N at any scale is
/// evidence for a conservation law.
pub const DETECTION_FRACTION: f64 = 0.1;

/// Thirteen logarithmically spaced scales from 10^-2.5 to 10^0.5; the grid
/// contains 0.01, 0.1 and 1 exactly.
pub fn default_noise_grid() -> Vec<f64> {
    log_grid(-2.5, 0.5, 13)
}

/// `count` scales evenly spaced in log10 between 10^lo and 10^hi.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2);
    (0..count)
        .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (count - 1) as f64))
        .collect()
}

/// Explained ratios of a sample cloud: covariance eigenvalues about the
/// sample mean, clamped at zero, divided by their sum, descending. A cloud
/// collapsed to a point yields all zeros.
pub fn local_pca_ratios(samples: &Points) -> Vec<f64> {
    let dim = samples.dim();
    let eig = linalg::eigh(&samples.covariance(), dim);
    let vals: Vec<f64> = eig.values.iter().map(|&v| v.max(0.0)).collect();
    let sum: f64 = vals.iter().sum();
    if sum <= 0.0 {
        return vec![0.0; dim];
    }
    vals.iter().map(|v| v / sum).collect()
}

/// c(x) = cos x below pi/2, zero beyond.
#[inline]
fn cutoff_cos(x: f64) -> f64 {
    if x < std::f64::consts::FRAC_PI_2 {
        x.cos()
    } else {
        0.0
    }
}

/// n_eff = sum_i c(pi N w_i); each ratio contributes 1 when it vanishes and
/// nothing once it reaches the 1/N baseline regime.
pub fn n_eff_of_ratios(ratios: &[f64], dim: usize) -> f64 {
    let n = dim as f64;
    ratios.iter().map(|&w| cutoff_cos(std::f64::consts::PI * n * w)).sum()
}

/// One column of the diagram: everything measured at a single noise scale.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErdColumn {
    pub noise_scale: f64,
    /// Descending explained ratios.
    pub ratios: Vec<f64>,
    pub n_eff: f64,
    pub train_loss: f64,
    pub test_loss: f64,
}

/// Explained ratios over the full grid of noise scales.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExplainedRatioDiagram {
    pub dim: usize,
    /// Successful columns, ascending in noise scale.
    pub columns: Vec<ErdColumn>,
    /// Scales whose column failed, with the error text.
    pub failures: Vec<(f64, String)>,
}

impl ExplainedRatioDiagram {
    /// Assemble a diagram from externally produced columns.
    pub fn from_columns(dim: usize, mut columns: Vec<ErdColumn>) -> Self {
        columns.sort_by(|a, b| {
            a.noise_scale.partial_cmp(&b.noise_scale).expect("finite scales")
        });
        ExplainedRatioDiagram { dim, columns, failures: Vec::new() }
    }

    pub fn n_eff_curve(&self) -> Vec<(f64, f64)> {
        self.columns.iter().map(|c| (c.noise_scale, c.n_eff)).collect()
    }

    pub fn max_n_eff(&self) -> Option<(f64, f64)> {
        self.columns
            .iter()
            .map(|c| (c.noise_scale, c.n_eff))
            .max_by(|a, b| a.1.partial_cmp(&b.1).expect("finite n_eff"))
    }

    /// min over scales of the i-th largest ratio.
    pub fn min_ratio(&self, component: usize) -> Option<f64> {
        self.columns
            .iter()
            .map(|c| c.ratios[component])
            .min_by(|a, b| a.partial_cmp(b).expect("finite ratios"))
    }
}

/// How the sample cloud behind each column is produced.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ErdConfig {
    pub train: TrainConfig,
    /// Walk-pull steps per cloud.
    pub samples: usize,
    pub mode: SampleMode,
    /// Starting point index into the whitened trajectory; defaults to the
    /// midpoint.
    pub start_index: Option<usize>,
}

impl Default for ErdConfig {
    fn default() -> Self {
        ErdConfig {
            train: TrainConfig::default(),
            samples: 1000,
            mode: SampleMode::Jump,
            start_index: None,
        }
    }
}

/// One diagram column from an already trained network.
pub fn column_from_network(
    network: &crate::pullnet::PullNetwork,
    points: &Points,
    cfg: &ErdConfig,
    cloud_seed: u64,
) -> Result<ErdColumn> {
    let start = cfg.start_index.unwrap_or(points.len() / 2).min(points.len() - 1);
    let cloud =
        sample_cloud(network, points.row(start), cfg.samples, cfg.mode, cloud_seed)?;
    if cloud.samples.len() <= points.dim() {
        return Err(Error::InsufficientData {
            rows: cloud.samples.len(),
            dim: points.dim(),
        });
    }
    let ratios = local_pca_ratios(&cloud.samples);
    let n_eff = n_eff_of_ratios(&ratios, points.dim());
    Ok(ErdColumn {
        noise_scale: network.noise_scale,
        ratios,
        n_eff,
        train_loss: network.train_loss,
        test_loss: network.test_loss,
    })
}

/// Train and sample one column at the given noise scale.
pub fn erd_column(points: &Points, noise_scale: f64, cfg: &ErdConfig, column_seed: u64) -> Result<ErdColumn> {
    let train_cfg = TrainConfig {
        noise_scale,
        seed: column_seed,
        ..cfg.train.clone()
    };
    let network = train_pull(points, &train_cfg)?;
    column_from_network(
        &network,
        points,
        cfg,
        rng::derive_seed(column_seed, &[rng::tag::CHAIN]),
    )
}

/// Build the diagram over a scale grid from whitened points. Columns run
/// independently (and in parallel); a failed column is recorded and the
/// rest継continue.
pub fn build_erd_from_points(
    points: &Points,
    grid: &[f64],
    cfg: &ErdConfig,
) -> ExplainedRatioDiagram {
    let mut scales: Vec<f64> = grid.to_vec();
    scales.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));

    let results: Vec<(f64, Result<ErdColumn>)> = scales
        .par_iter()
        .enumerate()
        .map(|(i, &l)| {
            let seed = rng::derive_seed(cfg.train.seed, &[rng::tag::SCAN, i as u64]);
            (l, erd_column(points, l, cfg, seed))
        })
        .collect();

    let mut columns = Vec::new();
    let mut failures = Vec::new();
    for (l, r) in results {
        match r {
            Ok(c) => columns.push(c),
            Err(e) => failures.push((l, e.to_string())),
        }
    }
    ExplainedRatioDiagram { dim: points.dim(), columns, failures }
}

/// Whiten a trajectory (stripping linear laws when `reduce`) and build its
/// diagram.
pub fn build_erd(
    trajectory: &Trajectory,
    grid: &[f64],
    cfg: &ErdConfig,
    eps_p: f64,
    reduce: bool,
) -> Result<(WhitenModel, ExplainedRatioDiagram)> {
    let model = preprocess::fit_whiten(&trajectory.points, eps_p, reduce)?;
    let whitened = model.apply_points(&trajectory.points)?;
    Ok((model, build_erd_from_points(&whitened, grid, cfg)))
}

/// Detection verdict from one diagram.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectionResult {
    pub dim: usize,
    pub n_linear: usize,
    /// Components whose ratio dips below `threshold` at some scale.
    pub threshold_count: usize,
    pub threshold: f64,
    pub n_eff_max: f64,
    pub n_eff_argmax_scale: f64,
    /// n_linear + threshold_count.
    pub total_by_threshold: usize,
    /// n_linear + round(n_eff_max).
    pub total_by_rounding: usize,
}

/// Apply both detection rules: the 0.1/N ratio threshold and the rounded
/// maximum of n_eff(L).
pub fn detect(erd: &ExplainedRatioDiagram, n_linear: usize) -> Result<DetectionResult> {
    if erd.columns.len() < 3 {
        return Err(Error::EmptyResult(format!(
            "need at least 3 diagram columns, have {}",
            erd.columns.len()
        )));
    }
    let threshold = DETECTION_FRACTION / erd.dim as f64;
    let threshold_count = (0..erd.dim)
        .filter(|&i| erd.min_ratio(i).map(|m| m < threshold).unwrap_or(false))
        .count();
    let (scale, n_eff_max) = erd.max_n_eff().expect("at least one column");
    Ok(DetectionResult {
        dim: erd.dim,
        n_linear,
        threshold_count,
        threshold,
        n_eff_max,
        n_eff_argmax_scale: scale,
        total_by_threshold: n_linear + threshold_count,
        total_by_rounding: n_linear + n_eff_max.round().max(0.0) as usize,
    })
}

/// Phase-transition readout from the n_eff(L) curve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Transitions {
    /// First grid scale where n_eff rises to half its maximum.
    pub l_a: Option<f64>,
    /// First grid scale past the peak where n_eff falls below half max.
    pub l_b: Option<f64>,
    /// Steepest descent of n_eff per decade of L past the peak.
    pub max_fall_slope: Option<f64>,
}

pub fn transitions(erd: &ExplainedRatioDiagram) -> Transitions {
    let curve = erd.n_eff_curve();
    if curve.is_empty() {
        return Transitions { l_a: None, l_b: None, max_fall_slope: None };
    }
    let max = curve.iter().map(|&(_, v)| v).fold(f64::MIN, f64::max);
    let half = max / 2.0;
    let peak = curve
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.partial_cmp(&b.1 .1).expect("finite"))
        .map(|(i, _)| i)
        .unwrap_or(0);

    let l_a = curve.iter().find(|&&(_, v)| v >= half).map(|&(l, _)| l);
    let l_b = curve[peak..].iter().find(|&&(_, v)| v < half).map(|&(l, _)| l);

    let mut max_fall: Option<f64> = None;
    for w in curve[peak..].windows(2) {
        let dlog = w[1].0.log10() - w[0].0.log10();
        if dlog > 0.0 {
            let slope = (w[0].1 - w[1].1) / dlog;
            max_fall = Some(max_fall.map_or(slope, |m: f64| m.max(slope)));
        }
    }
    Transitions { l_a, l_b, max_fall_slope: max_fall }
}

/// n_eff at a fixed noise scale, averaged over several starting points on
/// the trajectory; one training, one cloud per start.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NeffEstimate {
    pub noise_scale: f64,
    pub per_start: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    pub train_loss: f64,
    pub test_loss: f64,
}

pub fn neff_at_scale(
    points: &Points,
    noise_scale: f64,
    cfg: &ErdConfig,
    n_starts: usize,
) -> Result<NeffEstimate> {
    let train_cfg = TrainConfig { noise_scale, ..cfg.train.clone() };
    let network = train_pull(points, &train_cfg)?;
    let dim = points.dim();
    // Starting points spread over the middle of the trajectory.
    let starts: Vec<usize> = (0..n_starts)
        .map(|k| points.len() * (k + 1) / (n_starts + 1))
        .map(|i| i.min(points.len() - 1))
        .collect();
    let mut per_start = Vec::with_capacity(n_starts);
    for (slot, &idx) in starts.iter().enumerate() {
        let seed = rng::derive_seed(cfg.train.seed, &[rng::tag::CHAIN, slot as u64]);
        let cloud = sample_cloud(&network, points.row(idx), cfg.samples, cfg.mode, seed)?;
        let ratios = local_pca_ratios(&cloud.samples);
        per_start.push(n_eff_of_ratios(&ratios, dim));
    }
    let mean = per_start.iter().sum::<f64>() / per_start.len() as f64;
    let std = (per_start.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
        / per_start.len() as f64)
        .sqrt();
    Ok(NeffEstimate {
        noise_scale,
        per_start,
        mean,
        std,
        train_loss: network.train_loss,
        test_loss: network.test_loss,
    })
}

/// Full-pipeline detection for a raw trajectory with default settings.
pub fn analyze_trajectory(
    trajectory: &Trajectory,
    grid: &[f64],
    cfg: &ErdConfig,
) -> Result<(WhitenModel, ExplainedRatioDiagram, DetectionResult)> {
    let (model, erd) = build_erd(trajectory, grid, cfg, DEFAULT_EPS_P, true)?;
    let detection = detect(&erd, model.linear_law_count())?;
    Ok((model, erd, detection))
}
