//! Walk-pull Monte Carlo sampling of the permissible state manifold.
//!
//! From a chosen starting point, repeatedly perturb with isotropic Gaussian
//! noise and pull back with the trained network. In `Jump` mode every
//! perturbation leaves from the starting point, so the pulled-back samples
//! characterize the local tangent space there; in `Chain` mode each step
//! leaves from the previous sample, which random-walks along the manifold
//! and mixes its global structure into the cloud. Jump is the default:
//! fixed-scale scans need the cloud to stay local.

use crate::erd;
use crate::error::{Error, Result};
use crate::nn::InferBuffers;
use crate::points::Points;
use crate::pullnet::{walk_in_place, PullNetwork};
use crate::rng::{self, tag};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Whitened data has unit scale; a sample this far out means the pull map
/// is broken.
pub const RUNAWAY_NORM: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleMode {
    #[default]
    Jump,
    Chain,
}

/// Pulled-back samples around one starting point.
#[derive(Debug, Clone)]
pub struct SampleCloud {
    pub origin: Vec<f64>,
    pub noise_scale: f64,
    pub seed: u64,
    pub mode: SampleMode,
    pub samples: Points,
}

/// Run `n_steps` walk-pull steps from `start`, recording every pulled-back
/// point.
pub fn walk_pull_chain<R: Rng>(
    network: &PullNetwork,
    start: &[f64],
    n_steps: usize,
    mode: SampleMode,
    rng: &mut R,
) -> Result<Points> {
    let dim = network.dim();
    if start.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: start.len() });
    }
    let mut samples = Points::with_capacity(dim, n_steps);
    let mut scratch = InferBuffers::new();
    let mut pulled = Vec::with_capacity(dim);
    let mut current = start.to_vec();
    for step in 0..n_steps {
        let mut noisy = current.clone();
        walk_in_place(&mut noisy, network.noise_scale, rng);
        network.net.forward_one(&noisy, &mut scratch, &mut pulled);
        let norm = pulled.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        if !norm.is_finite() || norm > RUNAWAY_NORM {
            return Err(Error::RunawayChain { step, norm, limit: RUNAWAY_NORM });
        }
        samples.push(&pulled);
        if mode == SampleMode::Chain {
            current.copy_from_slice(&pulled);
        }
    }
    Ok(samples)
}

/// Seeded convenience wrapper recording provenance.
pub fn sample_cloud(
    network: &PullNetwork,
    start: &[f64],
    n_steps: usize,
    mode: SampleMode,
    seed: u64,
) -> Result<SampleCloud> {
    let mut rng = rng::stream(seed, &[tag::CHAIN]);
    let samples = walk_pull_chain(network, start, n_steps, mode, &mut rng)?;
    Ok(SampleCloud {
        origin: start.to_vec(),
        noise_scale: network.noise_scale,
        seed,
        mode,
        samples,
    })
}

/// Per-starting-point effective counts over a grid of trained networks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilityResult {
    /// Trajectory indices of the tested starting points.
    pub start_indices: Vec<usize>,
    /// max over noise scales of n_eff(x, L), one entry per starting point.
    pub n_eff: Vec<f64>,
    /// Histogram of the rounded counts.
    pub counts: BTreeMap<i64, usize>,
}

impl StabilityResult {
    pub fn mean(&self) -> f64 {
        self.n_eff.iter().sum::<f64>() / self.n_eff.len().max(1) as f64
    }

    pub fn std(&self) -> f64 {
        let m = self.mean();
        (self.n_eff.iter().map(|v| (v - m) * (v - m)).sum::<f64>()
            / self.n_eff.len().max(1) as f64)
            .sqrt()
    }

    /// How many starting points round to `target`.
    pub fn matching(&self, target: i64) -> usize {
        self.counts.get(&target).copied().unwrap_or(0)
    }
}

/// Evaluate n_eff(x) = max_L n_eff(x, L) at `n_points` random starting
/// points on the trajectory, using one trained network per noise scale.
pub fn stability_sweep(
    networks: &[PullNetwork],
    points: &Points,
    n_points: usize,
    chain_len: usize,
    mode: SampleMode,
    seed: u64,
) -> Result<StabilityResult> {
    if networks.is_empty() {
        return Err(Error::EmptyResult("no trained networks supplied".into()));
    }
    let dim = points.dim();
    for net in networks {
        if net.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: net.dim() });
        }
    }
    let mut pick = rng::stream(seed, &[tag::STABILITY]);
    let start_indices: Vec<usize> =
        (0..n_points).map(|_| pick.gen_range(0..points.len())).collect();

    let n_eff: Vec<f64> = start_indices
        .par_iter()
        .enumerate()
        .map(|(slot, &idx)| {
            let start = points.row(idx);
            let mut best = 0.0f64;
            for (li, net) in networks.iter().enumerate() {
                let mut rng =
                    rng::stream(seed, &[tag::STABILITY, slot as u64, li as u64]);
                let samples =
                    match walk_pull_chain(net, start, chain_len, mode, &mut rng) {
                        Ok(s) => s,
                        Err(_) => continue,
                    };
                let ratios = erd::local_pca_ratios(&samples);
                best = best.max(erd::n_eff_of_ratios(&ratios, dim));
            }
            best
        })
        .collect();

    let mut counts = BTreeMap::new();
    for &v in &n_eff {
        *counts.entry(v.round() as i64).or_insert(0) += 1;
    }
    Ok(StabilityResult { start_indices, n_eff, counts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Activation, Mlp};
    use crate::pullnet::{pull, train_pull, TrainConfig};

    fn circle_points(n: usize, radius: f64) -> Points {
        let mut p = Points::with_capacity(2, n);
        for i in 0..n {
            let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            p.push(&[radius * t.cos(), radius * t.sin()]);
        }
        p
    }

    fn constant_network(dim: usize, bias: f64, noise_scale: f64) -> PullNetwork {
        let mut net = Mlp::zeroed(&[dim, 8, dim], Activation::Tanh);
        for b in net.biases.last_mut().unwrap().iter_mut() {
            *b = bias;
        }
        PullNetwork { net, noise_scale, seed: 0, train_loss: 0.0, test_loss: 0.0 }
    }

    #[test]
    fn zero_noise_jumps_all_equal_the_pulled_start() {
        let net = constant_network(2, 0.25, 0.0);
        let cloud = sample_cloud(&net, &[1.0, -1.0], 50, SampleMode::Jump, 3).unwrap();
        let expect = pull(&net, &[1.0, -1.0]).unwrap();
        for s in cloud.samples.rows() {
            assert_eq!(s, expect.as_slice());
        }
    }

    #[test]
    fn identical_seed_reproduces_the_cloud() {
        let net = constant_network(2, 0.25, 0.5);
        let a = sample_cloud(&net, &[0.0, 0.0], 20, SampleMode::Chain, 11).unwrap();
        let b = sample_cloud(&net, &[0.0, 0.0], 20, SampleMode::Chain, 11).unwrap();
        assert_eq!(a.samples, b.samples);
    }

    #[test]
    fn runaway_pull_map_is_an_error() {
        let net = constant_network(2, 5e3, 0.1);
        match sample_cloud(&net, &[0.0, 0.0], 10, SampleMode::Jump, 1) {
            Err(Error::RunawayChain { step: 0, norm, .. }) => assert!(norm > RUNAWAY_NORM),
            other => panic!("expected runaway, got {other:?}"),
        }
    }

    #[test]
    fn degenerate_cloud_collapses_every_direction() {
        // A constant pull map sends everything to one point: every PCA
        // ratio is zero and n_eff saturates at the full dimension.
        let net = constant_network(3, 0.5, 0.2);
        let cloud = sample_cloud(&net, &[0.1, 0.2, 0.3], 40, SampleMode::Jump, 5).unwrap();
        let ratios = erd::local_pca_ratios(&cloud.samples);
        assert_eq!(ratios, vec![0.0, 0.0, 0.0]);
        assert_eq!(erd::n_eff_of_ratios(&ratios, 3), 3.0);
    }

    #[test]
    fn circle_cloud_stays_on_the_circle_and_spreads() {
        let radius = 1.0;
        let points = circle_points(2000, radius);
        let cfg = TrainConfig {
            steps: 4000,
            batch: 128,
            noise_scale: 0.1,
            seed: 4,
            ..TrainConfig::default()
        };
        let net = train_pull(&points, &cfg).unwrap();
        let start = [radius, 0.0];

        for mode in [SampleMode::Jump, SampleMode::Chain] {
            let cloud = sample_cloud(&net, &start, 1000, mode, 9).unwrap();
            let mut spread_min = f64::MAX;
            let mut spread_max = f64::MIN;
            for s in cloud.samples.rows() {
                let r = (s[0] * s[0] + s[1] * s[1]).sqrt();
                assert!((r - radius).abs() < 0.05 * radius, "{mode:?}: radius {r}");
                let angle = s[1].atan2(s[0]);
                spread_min = spread_min.min(angle);
                spread_max = spread_max.max(angle);
            }
            assert!(
                spread_max - spread_min > 0.1,
                "{mode:?}: angular spread {}",
                spread_max - spread_min
            );
        }

        // Jump-mode samples from an independently trained second network
        // still look like manifold points to the first: mean squared
        // residual within a few test losses.
        let cfg2 = TrainConfig { seed: 77, ..cfg };
        let net2 = train_pull(&points, &cfg2).unwrap();
        let cloud = sample_cloud(&net, &start, 500, SampleMode::Jump, 13).unwrap();
        let mut residual = 0.0;
        for s in cloud.samples.rows() {
            let p = pull(&net2, s).unwrap();
            residual += s.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        }
        residual /= cloud.samples.len() as f64;
        assert!(
            residual <= 4.0 * net2.test_loss,
            "cross residual {residual} vs 4 x {}",
            net2.test_loss
        );
    }
}
