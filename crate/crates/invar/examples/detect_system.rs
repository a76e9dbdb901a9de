//! End-to-end conservation-law counting for one system.
//!
//!     cargo run --release -p invar --example detect_system -- kepler
//!
//! Simulates the headline trajectory, whitens it, trains one pull network
//! per noise scale, and prints the explained-ratio diagram, the n_eff
//! curve and both detection criteria next to the ground truth.

use invar::dynamics::{self, System};
use invar::erd::{self, ErdConfig};
use invar::pullnet::TrainConfig;

fn main() -> invar::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "harmonic".into());
    let system = System::from_name(&name)
        .ok_or_else(|| invar::Error::InvalidConfig(format!("unknown system `{name}`")))?;

    let t0 = std::time::Instant::now();
    let trajectory = dynamics::default_trajectory(&system, 1)?;
    println!(
        "{}: {} points, energy drift {:.2e}",
        system.name(),
        trajectory.points.len(),
        trajectory.energy_drift()
    );

    let cfg = ErdConfig {
        train: TrainConfig { batch: 128, seed: 7, ..TrainConfig::default() },
        ..ErdConfig::default()
    };
    let grid = erd::default_noise_grid();
    let (whiten, diagram, detection) = erd::analyze_trajectory(&trajectory, &grid, &cfg)?;

    println!(
        "linear laws: {} (dimension {} -> {})",
        whiten.linear_law_count(),
        system.dim(),
        whiten.output_dim()
    );
    println!("\n    L        n_eff   smallest ratios");
    for c in &diagram.columns {
        let tail: Vec<String> =
            c.ratios.iter().rev().take(3).rev().map(|w| format!("{w:.4}")).collect();
        println!("  {:8.4}  {:6.3}   {}", c.noise_scale, c.n_eff, tail.join("  "));
    }
    for (l, err) in &diagram.failures {
        println!("  {l:8.4}  FAILED: {err}");
    }
    println!(
        "\ntotal detected: threshold rule {} | rounded n_eff {} | ground truth {}",
        detection.total_by_threshold,
        detection.total_by_rounding,
        system.ground_truth_laws()
    );
    println!("({:.0}s)", t0.elapsed().as_secs_f64());
    Ok(())
}
