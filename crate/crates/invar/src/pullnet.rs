//! The pull network and its denoising training loop.
//!
//! A feedforward map R^N -> R^N is trained, one network per noise scale, to
//! send Gaussian-perturbed trajectory points back to their clean originals.
//! The best it can do is learn the orthogonal projection onto the
//! permissible state manifold, which is exactly what the sampler needs.

use crate::error::{Error, Result};
use crate::nn::{Activation, Adam, BatchBuffers, Gradients, InferBuffers, Mlp};
use crate::points::Points;
use crate::rng::{self, tag};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Hidden widths used throughout: two layers of 256.
pub const DEFAULT_HIDDEN: [usize; 2] = [256, 256];

/// Final losses are means; a capped subsample estimates them on very long
/// trajectories without changing anything statistically.
const LOSS_EVAL_CAP: usize = 65_536;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub learning_rate: f64,
    pub steps: usize,
    pub batch: usize,
    /// Per-component standard deviation of the walk noise (covariance L^2 I).
    pub noise_scale: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            hidden: DEFAULT_HIDDEN.to_vec(),
            activation: Activation::Tanh,
            learning_rate: 1e-3,
            steps: 5000,
            batch: 1024,
            noise_scale: 0.1,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn with_noise_scale(&self, noise_scale: f64) -> Self {
        TrainConfig { noise_scale, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidConfig("learning_rate must be positive".into()));
        }
        if self.steps == 0 || self.batch == 0 {
            return Err(Error::InvalidConfig("steps and batch must be at least 1".into()));
        }
        if !(self.noise_scale >= 0.0) {
            return Err(Error::InvalidConfig("noise_scale must be non-negative".into()));
        }
        Ok(())
    }
}

/// A trained pull map together with the scale it was trained for.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PullNetwork {
    pub net: Mlp,
    pub noise_scale: f64,
    pub seed: u64,
    pub train_loss: f64,
    pub test_loss: f64,
}

impl PullNetwork {
    pub fn dim(&self) -> usize {
        self.net.input_dim()
    }
}

/// Walk step: y = x + n with n ~ N(0, L^2 I).
pub fn walk<R: Rng>(x: &[f64], noise_scale: f64, rng: &mut R) -> Vec<f64> {
    let mut y = x.to_vec();
    walk_in_place(&mut y, noise_scale, rng);
    y
}

pub fn walk_in_place<R: Rng>(x: &mut [f64], noise_scale: f64, rng: &mut R) {
    if noise_scale == 0.0 {
        return;
    }
    for v in x.iter_mut() {
        let n: f64 = rng.sample(StandardNormal);
        *v += noise_scale * n;
    }
}

/// Pull step: deterministic forward pass through the trained network.
pub fn pull(network: &PullNetwork, y: &[f64]) -> Result<Vec<f64>> {
    if y.len() != network.dim() {
        return Err(Error::DimensionMismatch { expected: network.dim(), got: y.len() });
    }
    let mut scratch = InferBuffers::new();
    let mut out = Vec::new();
    network.net.forward_one(y, &mut scratch, &mut out);
    Ok(out)
}

/// Train a pull network on whitened trajectory points.
///
/// Odd-index points train, even-index points test. Every optimizer step
/// draws a fresh minibatch and fresh noise; the returned losses are means
/// over the full splits with independent noise.
pub fn train_pull(points: &Points, cfg: &TrainConfig) -> Result<PullNetwork> {
    cfg.validate()?;
    if points.len() < 2 {
        return Err(Error::InsufficientData { rows: points.len(), dim: points.dim() });
    }
    let dim = points.dim();
    let train_idx: Vec<usize> = (0..points.len()).filter(|i| i % 2 == 1).collect();
    let test_idx: Vec<usize> = (0..points.len()).filter(|i| i % 2 == 0).collect();

    let mut widths = Vec::with_capacity(cfg.hidden.len() + 2);
    widths.push(dim);
    widths.extend_from_slice(&cfg.hidden);
    widths.push(dim);

    let mut init_rng = rng::stream(cfg.seed, &[tag::NET_INIT]);
    let mut net = Mlp::init(&widths, cfg.activation, &mut init_rng);
    let mut adam = Adam::new(&net, cfg.learning_rate);

    let batch = cfg.batch.min(train_idx.len());
    let mut batch_rng = rng::stream(cfg.seed, &[tag::NET_BATCH]);
    let mut noise_rng = rng::stream(cfg.seed, &[tag::NET_NOISE]);

    let mut clean = vec![0.0; batch * dim];
    let mut noisy = vec![0.0; batch * dim];
    let mut dout = vec![0.0; batch * dim];
    let mut bufs = BatchBuffers::new();
    let mut grads = Gradients::zeros_like(&net);

    for step in 0..cfg.steps {
        for (slot, row) in clean.chunks_exact_mut(dim).enumerate() {
            let pick = train_idx[batch_rng.gen_range(0..train_idx.len())];
            row.copy_from_slice(points.row(pick));
            let _ = slot;
        }
        noisy.copy_from_slice(&clean);
        walk_in_place(&mut noisy, cfg.noise_scale, &mut noise_rng);

        net.forward_batch(&noisy, batch, &mut bufs);
        let loss = crate::nn::squared_error_loss(
            net.output(&bufs, batch),
            &clean,
            batch,
            Some(&mut dout),
        );
        if !loss.is_finite() {
            return Err(Error::Divergence { step, loss });
        }
        grads.zero();
        net.backward_batch(batch, &dout, &mut bufs, &mut grads);
        adam.step(&mut net, &grads);
    }

    let mut eval_rng = rng::stream(cfg.seed, &[tag::NET_EVAL]);
    let train_loss =
        evaluate_loss(&net, points, &train_idx, cfg.noise_scale, &mut eval_rng);
    let test_loss = evaluate_loss(&net, points, &test_idx, cfg.noise_scale, &mut eval_rng);

    Ok(PullNetwork {
        net,
        noise_scale: cfg.noise_scale,
        seed: cfg.seed,
        train_loss,
        test_loss,
    })
}

/// Mean denoising loss per component over a split with fresh noise.
///
/// Training minimizes the summed squared error per sample; the reported
/// figure divides by the dimension so losses are comparable across systems.
fn evaluate_loss<R: Rng>(
    net: &Mlp,
    points: &Points,
    indices: &[usize],
    noise_scale: f64,
    rng: &mut R,
) -> f64 {
    let dim = points.dim();
    let picked: Vec<usize> = if indices.len() > LOSS_EVAL_CAP {
        let mut idx = indices.to_vec();
        idx.shuffle(rng);
        idx.truncate(LOSS_EVAL_CAP);
        idx
    } else {
        indices.to_vec()
    };

    let mut bufs = BatchBuffers::new();
    let chunk = 1024usize;
    let mut clean = vec![0.0; chunk * dim];
    let mut noisy = vec![0.0; chunk * dim];
    let mut total = 0.0;
    let mut seen = 0usize;
    for block in picked.chunks(chunk) {
        let rows = block.len();
        for (slot, &i) in block.iter().enumerate() {
            clean[slot * dim..(slot + 1) * dim].copy_from_slice(points.row(i));
        }
        noisy[..rows * dim].copy_from_slice(&clean[..rows * dim]);
        walk_in_place(&mut noisy[..rows * dim], noise_scale, rng);
        net.forward_batch(&noisy[..rows * dim], rows, &mut bufs);
        let loss = crate::nn::squared_error_loss(
            net.output(&bufs, rows),
            &clean[..rows * dim],
            rows,
            None,
        );
        total += loss * rows as f64;
        seen += rows;
    }
    total / (seen.max(1) * dim) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn circle_points(n: usize, radius: f64) -> Points {
        let mut p = Points::with_capacity(2, n);
        for i in 0..n {
            let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            p.push(&[radius * t.cos(), radius * t.sin()]);
        }
        p
    }

    #[test]
    fn walk_zero_scale_is_identity() {
        let mut r = rng::stream(3, &[tag::NET_NOISE]);
        let x = [0.5, -1.5, 2.0];
        assert_eq!(walk(&x, 0.0, &mut r), x.to_vec());
    }

    #[test]
    fn walk_mean_square_displacement() {
        // ||y - x||^2 / N averages L^2 with chi-square spread.
        let mut r = rng::stream(3, &[tag::NET_NOISE, 1]);
        let x = vec![0.0; 4];
        let l = 0.1;
        let draws = 10_000;
        let mut acc = 0.0;
        for _ in 0..draws {
            let y = walk(&x, l, &mut r);
            acc += y.iter().map(|v| v * v).sum::<f64>() / 4.0;
        }
        let mean = acc / draws as f64;
        let tol = 3.0 * l * l * (2.0 / (draws as f64 * 4.0)).sqrt();
        assert!((mean - l * l).abs() < tol, "mean {mean} vs {}", l * l);
    }

    #[test]
    fn walk_is_seed_reproducible() {
        let x = [1.0, 2.0];
        let a = walk(&x, 0.3, &mut rng::stream(9, &[tag::NET_NOISE]));
        let b = walk(&x, 0.3, &mut rng::stream(9, &[tag::NET_NOISE]));
        assert_eq!(a, b);
    }

    #[test]
    fn training_is_bitwise_reproducible() {
        let points = circle_points(64, 1.0);
        let cfg = TrainConfig {
            hidden: vec![16, 16],
            steps: 50,
            batch: 16,
            noise_scale: 0.1,
            seed: 123,
            ..TrainConfig::default()
        };
        let a = train_pull(&points, &cfg).unwrap();
        let b = train_pull(&points, &cfg).unwrap();
        assert_eq!(a.net.weights, b.net.weights);
        assert_eq!(a.net.biases, b.net.biases);
        assert_eq!(a.train_loss, b.train_loss);
    }

    #[test]
    fn zero_noise_training_regresses_the_identity() {
        let points = circle_points(256, 1.0);
        let cfg = TrainConfig {
            hidden: vec![32, 32],
            steps: 800,
            batch: 64,
            noise_scale: 0.0,
            seed: 7,
            ..TrainConfig::default()
        };
        let trained = train_pull(&points, &cfg).unwrap();
        let bound = trained.train_loss.sqrt().max(1e-3) * 3.0;
        for i in (1..points.len()).step_by(37) {
            let x = points.row(i);
            let px = pull(&trained, x).unwrap();
            let err: f64 =
                x.iter().zip(&px).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            assert!(err < bound, "|P(x) - x| = {err} vs bound {bound}");
        }
    }

    #[test]
    fn divergent_training_reports_the_step() {
        // A corrupt (non-finite) sample poisons the loss; the loop must
        // stop with the step index instead of training on garbage.
        let mut points = circle_points(64, 1.0);
        points.push(&[f64::NAN, 0.0]);
        points.push(&[f64::NAN, 0.0]);
        let cfg = TrainConfig {
            hidden: vec![16],
            steps: 2000,
            batch: 64,
            noise_scale: 0.1,
            seed: 1,
            ..TrainConfig::default()
        };
        match train_pull(&points, &cfg) {
            Err(Error::Divergence { step, .. }) => assert!(step < 10),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn untrained_zero_network_outputs_bias() {
        let net = PullNetwork {
            net: Mlp::zeroed(&[2, 8, 2], Activation::Tanh),
            noise_scale: 0.1,
            seed: 0,
            train_loss: f64::NAN,
            test_loss: f64::NAN,
        };
        assert_eq!(pull(&net, &[3.0, -4.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(pull(&net, &[0.1, 0.2]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let net = PullNetwork {
            net: Mlp::zeroed(&[2, 4, 2], Activation::Tanh),
            noise_scale: 0.1,
            seed: 0,
            train_loss: 0.0,
            test_loss: 0.0,
        };
        assert!(matches!(
            pull(&net, &[1.0, 2.0, 3.0]),
            Err(Error::DimensionMismatch { expected: 2, got: 3 })
        ));
    }

    #[test]
    fn trained_circle_projects_outward_points_onto_the_circle() {
        // Whitened-scale circle (radius sqrt 2); pulls a point at radius
        // 1.1 * r back to within 0.02 * r of the circle.
        let radius = std::f64::consts::SQRT_2;
        let points = circle_points(2000, radius);
        let cfg = TrainConfig {
            steps: 1500,
            batch: 128,
            noise_scale: 0.1,
            seed: 42,
            ..TrainConfig::default()
        };
        let trained = train_pull(&points, &cfg).unwrap();
        for angle in [0.3_f64, 1.7, 3.9, 5.6] {
            let y = [1.1 * radius * angle.cos(), 1.1 * radius * angle.sin()];
            let p = pull(&trained, &y).unwrap();
            let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
            assert!((r - radius).abs() < 0.02 * radius, "pulled radius {r} vs {radius}");
        }
        // On-manifold points move by at most a few loss lengths.
        let bound = 3.0 * trained.train_loss.sqrt();
        for i in (0..points.len()).step_by(191) {
            let x = points.row(i);
            let p = pull(&trained, x).unwrap();
            let err: f64 =
                x.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            assert!(err < bound, "residual {err} vs {bound}");
        }
    }
}
