//! The three comparison estimators side by side on the harmonic oscillator
//! and the Kepler problem (whitened coordinates throughout).
//!
//!     cargo run --release -p invar --example baselines_compare

use invar::baselines;
use invar::dynamics::{self, System};
use invar::preprocess::{self, DEFAULT_EPS_P};
use invar::pullnet::TrainConfig;

fn main() -> invar::Result<()> {
    for system in [System::Harmonic, System::kepler()] {
        let trajectory = dynamics::default_trajectory(&system, 10)?;
        let n = system.dim();
        let truth_dim = n - system.ground_truth_laws();
        println!("{} (manifold dimension {truth_dim} in {n}):", system.name());

        let pca = baselines::global_pca_dim(&trajectory.points, DEFAULT_EPS_P)?;
        println!("  global PCA      : {pca}  (sees only linear structure)");

        let model = preprocess::fit_whiten(&trajectory.points, DEFAULT_EPS_P, true)?;
        let white = model.apply_points(&trajectory.points)?;

        let fractal = baselines::fractal_dim(&white, None, 1000, 3)?;
        println!(
            "  fractal slope   : {:.2} (auto window over {} levels)",
            fractal.slope,
            fractal.fit_window.1 - fractal.fit_window.0 + 1
        );

        let cfg = TrainConfig { batch: 128, seed: 5, ..TrainConfig::default() };
        let s_range: Vec<usize> = (1..=white.dim().min(3)).collect();
        let ae = baselines::autoencoder_dim(&white, &s_range, 1e-3, &cfg, 2)?;
        let curve: Vec<String> =
            ae.curve.iter().map(|(s, e)| format!("s={s}: {e:.2e}")).collect();
        println!(
            "  autoencoder     : {} (threshold {:.0e} met: {}) [{}]",
            ae.dim,
            ae.threshold,
            ae.met_threshold,
            curve.join(", ")
        );
    }
    Ok(())
}
