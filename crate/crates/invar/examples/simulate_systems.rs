//! Integrate all five systems at their headline settings and report
//! conservation quality: energy drift, and for the three-body problem the
//! constancy of the center-of-mass quantities.
//!
//!     cargo run --release -p invar --example simulate_systems

use invar::dynamics::{self, System};

fn main() -> invar::Result<()> {
    for system in [
        System::Harmonic,
        System::kepler(),
        System::Pendulum,
        System::Mirror,
        System::three_body(),
    ] {
        let t0 = std::time::Instant::now();
        let traj = dynamics::default_trajectory(&system, 1)?;
        println!(
            "{:10}  N={:2}  steps={:8}  dt={:6}  T={:8.1}  energy drift {:.2e}  ({:.1}s)",
            system.name(),
            system.dim(),
            system.default_steps(),
            traj.dt,
            traj.duration(),
            traj.energy_drift(),
            t0.elapsed().as_secs_f64()
        );
        if let System::ThreeBody { .. } = system {
            let start = dynamics::three_body_com(traj.points.row(0));
            let mut worst = 0.0f64;
            for row in traj.points.rows() {
                let com = dynamics::three_body_com(row);
                for c in 0..4 {
                    worst = worst.max((com[c] - start[c]).abs());
                }
            }
            let scale = traj.points.rows().map(|x| x[0].abs()).fold(1.0, f64::max);
            println!(
                "            center-of-mass drift {:.2e} (relative {:.2e})",
                worst,
                worst / scale
            );
        }
    }
    Ok(())
}
