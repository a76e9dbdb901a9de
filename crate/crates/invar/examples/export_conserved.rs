//! Gauge-fixed export for symbolic regression, plus conservation-quality
//! checks of the closed-form invariants along their own trajectories.
//!
//!     cargo run --release -p invar --example export_conserved

use invar::dynamics::{self, System};
use invar::export;
use invar::linalg;

fn main() -> invar::Result<()> {
    // Conservation quality of every ground-truth formula.
    for system in [
        System::Harmonic,
        System::kepler(),
        System::Pendulum,
        System::Mirror,
        System::three_body(),
    ] {
        let trajectory = dynamics::default_trajectory(&system, 10)?;
        println!("{}:", system.name());
        for (name, formula) in export::ground_truth_formulas(&system) {
            let stats = export::evaluate_candidate(&formula, &trajectory)?;
            println!(
                "  {name:20} mean {:+.6e}  std {:.2e}  std/|mean| {:.2e}",
                stats.mean,
                stats.std,
                stats.relative_spread()
            );
        }
    }

    // Export two harmonic trajectories pinned to the values 1 and 2 and
    // fit target ~ c x^2 + d xdot^2 + e on the written file: the fit must
    // recover c = d (the energy up to an affine gauge).
    let a = dynamics::simulate(&System::Harmonic, &[2f64.sqrt(), 0.0], 0.01, 1000)?;
    let b = dynamics::simulate(&System::Harmonic, &[2.0, 0.0], 0.01, 1000)?;
    let c = dynamics::simulate(&System::Harmonic, &[3f64.sqrt(), 0.0], 0.01, 1000)?;
    let dir = std::path::PathBuf::from("out/export_demo");
    let files = export::export_gauge_fixed(&a, &b, Some(&c), &dir, "harmonic", (1.0, 2.0))?;
    println!("\nwrote {}", files.train_path.display());

    let rows = export::read_table(&files.train_path)?;
    let x2: Vec<f64> = rows.iter().map(|r| r[0] * r[0]).collect();
    let v2: Vec<f64> = rows.iter().map(|r| r[1] * r[1]).collect();
    let ones = vec![1.0; rows.len()];
    let target: Vec<f64> = rows.iter().map(|r| r[2]).collect();
    let coef = linalg::least_squares(&[x2, v2, ones], &target);
    println!(
        "fit on the exported table: target = {:.4} x^2 + {:.4} xdot^2 + {:.4}  (c/d = {:.4})",
        coef[0],
        coef[1],
        coef[2],
        coef[0] / coef[1]
    );

    // The fitted affine gauge evaluated on the held-out third trajectory.
    let h3 = 1.5; // energy of the third trajectory
    let predicted = coef[0] * 2.0 * h3; // c (x^2 + xdot^2) = 2 c H
    println!(
        "held-out trajectory: fitted value {:.4} + {:.4} (H = {h3})",
        predicted, coef[2]
    );
    Ok(())
}
