//! Phase-transition structure on synthetic manifolds, without whitening.
//!
//!     cargo run --release -p invar --example toy_transitions
//!
//! Left transition: on a noisy circle the n_eff(L) curve rises at the data
//! noise scale. Right transition: flattening the ellipse makes the fall of
//! n_eff(L) at the curvature scale progressively less sharp.

use invar::erd::{self, ErdConfig};
use invar::pullnet::TrainConfig;
use invar::sampler::SampleMode;
use invar::toys;

fn toy_cfg(seed: u64) -> ErdConfig {
    ErdConfig {
        train: TrainConfig { batch: 64, steps: 4000, seed, ..TrainConfig::default() },
        samples: 1000,
        mode: SampleMode::Jump,
        start_index: Some(0),
    }
}

fn main() {
    println!("noisy circle: first transition tracks the noise scale");
    for (i, &noise) in [1e-3, 1e-2].iter().enumerate() {
        let clean = toys::circle_points(2000, 1.0);
        let data = toys::with_noise(&clean, noise, 100 + i as u64);
        let grid = erd::log_grid(-3.5, 0.0, 15);
        let diagram = erd::build_erd_from_points(&data, &grid, &toy_cfg(11 + i as u64));
        let t = erd::transitions(&diagram);
        let curve: Vec<String> =
            diagram.n_eff_curve().iter().map(|(_, v)| format!("{v:.2}")).collect();
        println!(
            "  data noise {noise:.0e}: L_a = {:?} (ratio {:.2}); n_eff curve: {}",
            t.l_a,
            t.l_a.map_or(f64::NAN, |l| l / noise),
            curve.join(" ")
        );
    }

    println!("\nellipse: the fall past the peak flattens as b shrinks");
    for (i, &b) in [1.0, 0.5, 0.1].iter().enumerate() {
        let clean = toys::ellipse_points(2000, 1.0, b);
        let data = toys::with_noise(&clean, 1e-3, 200 + i as u64);
        let grid = erd::log_grid(-2.0, 0.5, 11);
        let diagram = erd::build_erd_from_points(&data, &grid, &toy_cfg(21 + i as u64));
        let t = erd::transitions(&diagram);
        let curve: Vec<String> =
            diagram.n_eff_curve().iter().map(|(_, v)| format!("{v:.2}")).collect();
        println!(
            "  b = {b:3}: max fall slope {:.2?}; n_eff curve: {}",
            t.max_fall_slope,
            curve.join(" ")
        );
    }
}
