//! The walk-pull sampler on a circle: train the pull network, perturb
//! points off the manifold, and watch them land back on it.
//!
//!     cargo run --release -p invar --example circle_walk_pull

use invar::pullnet::{pull, train_pull, TrainConfig};
use invar::sampler::{sample_cloud, SampleMode};
use invar::toys;

fn main() -> invar::Result<()> {
    let points = toys::circle_points(2000, 1.0);
    let cfg = TrainConfig {
        batch: 128,
        noise_scale: 0.1,
        seed: 5,
        ..TrainConfig::default()
    };
    let network = train_pull(&points, &cfg)?;
    println!(
        "trained at L = {}: train loss {:.2e}, test loss {:.2e}",
        network.noise_scale, network.train_loss, network.test_loss
    );

    println!("\npulling radial probes back to the circle:");
    for r in [0.8, 0.9, 1.1, 1.2] {
        let probe = [r * 0.6f64.cos(), r * 0.6f64.sin()];
        let pulled = pull(&network, &probe)?;
        let pulled_r = (pulled[0] * pulled[0] + pulled[1] * pulled[1]).sqrt();
        println!("  |y| = {r:.2}  ->  |P(y)| = {pulled_r:.4}");
    }

    for mode in [SampleMode::Jump, SampleMode::Chain] {
        let cloud = sample_cloud(&network, points.row(0), 1000, mode, 9)?;
        let radii: Vec<f64> =
            cloud.samples.rows().map(|s| (s[0] * s[0] + s[1] * s[1]).sqrt()).collect();
        let mean_r = radii.iter().sum::<f64>() / radii.len() as f64;
        let angles: Vec<f64> = cloud.samples.rows().map(|s| s[1].atan2(s[0])).collect();
        let spread =
            angles.iter().cloned().fold(f64::MIN, f64::max) - angles.iter().cloned().fold(f64::MAX, f64::min);
        println!(
            "\n{mode:?} cloud: 1000 samples, mean radius {mean_r:.4}, angular spread {spread:.2} rad"
        );
    }
    Ok(())
}
