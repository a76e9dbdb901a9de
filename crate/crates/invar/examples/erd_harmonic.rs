//! Full detection pipeline on the harmonic oscillator: simulate, whiten,
//! train a pull network per noise scale, and print the explained-ratio
//! diagram with both detection criteria.
//!
//!     cargo run --release -p invar --example erd_harmonic

use invar::dynamics::{self, System};
use invar::erd::{self, ErdConfig};
use invar::pullnet::TrainConfig;

fn main() -> invar::Result<()> {
    let system = System::Harmonic;
    let trajectory = dynamics::default_trajectory(&system, 1)?;
    println!(
        "simulated {} points, dt {}, energy drift {:.2e}",
        trajectory.points.len(),
        trajectory.dt,
        trajectory.energy_drift()
    );

    let cfg = ErdConfig {
        train: TrainConfig { batch: 128, seed: 7, ..TrainConfig::default() },
        ..ErdConfig::default()
    };
    let grid = erd::default_noise_grid();
    let t0 = std::time::Instant::now();
    let (whiten, diagram, detection) = erd::analyze_trajectory(&trajectory, &grid, &cfg)?;
    println!(
        "whitened to {} dims ({} linear laws), {} columns in {:.0}s",
        whiten.output_dim(),
        whiten.linear_law_count(),
        diagram.columns.len(),
        t0.elapsed().as_secs_f64()
    );

    println!("\n    L        w_1      w_2      n_eff   train/test loss");
    for c in &diagram.columns {
        println!(
            "  {:8.4}  {:7.4}  {:7.4}  {:6.3}  {:.2e}/{:.2e}",
            c.noise_scale, c.ratios[0], c.ratios[1], c.n_eff, c.train_loss, c.test_loss
        );
    }
    for (l, err) in &diagram.failures {
        println!("  {l:8.4}  FAILED: {err}");
    }

    println!(
        "\nthreshold rule: {} law(s); rounded max n_eff: {} law(s) at L = {:.3}",
        detection.total_by_threshold, detection.total_by_rounding, detection.n_eff_argmax_scale
    );
    let t = erd::transitions(&diagram);
    println!("transitions: L_a = {:?}, L_b = {:?}", t.l_a, t.l_b);
    Ok(())
}
