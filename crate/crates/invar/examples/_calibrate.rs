//! Scratch calibration runs (not part of the documented examples).

use invar::dynamics::{self, hierarchical_triple, HierarchicalTriple, System};
use invar::erd::{self, ErdConfig};
use invar::preprocess;
use invar::pullnet::TrainConfig;

fn binary_energy_series(traj: &invar::dynamics::Trajectory, mass: f64) -> (Vec<f64>, Vec<f64>) {
    let mut es = Vec::new();
    let mut ls = Vec::new();
    for x in traj.points.rows() {
        let (rx, ry) = (x[0] - x[2], x[1] - x[3]);
        let (vx, vy) = (x[6] - x[8], x[7] - x[9]);
        let r = (rx * rx + ry * ry).sqrt();
        es.push(0.5 * (vx * vx + vy * vy) - 2.0 * mass / r);
        ls.push(rx * vy - ry * vx);
    }
    (es, ls)
}

fn std_of(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64).sqrt()
}

fn mini_erd(points: &invar::Points, scales: &[f64], seed: u64) -> Vec<(f64, f64)> {
    let cfg = ErdConfig {
        train: TrainConfig { batch: 128, seed, ..TrainConfig::default() },
        ..ErdConfig::default()
    };
    let d = erd::build_erd_from_points(points, scales, &cfg);
    d.n_eff_curve()
}

fn main() {
    let mode = std::env::args().nth(1).unwrap_or_default();
    match mode.as_str() {
        "triple-survey" => {
            // Cheap dynamical survey: drift, escape, invariant wander.
            let mass = dynamics::THREE_BODY_MASS;
            for (tag, geom) in [
                ("current", HierarchicalTriple { a_inner: 80.0, e_inner: 0.35, a_outer: 320.0, e_outer: 0.10, phase: 1.0 }),
                ("C",       HierarchicalTriple { a_inner: 100.0, e_inner: 0.35, a_outer: 380.0, e_outer: 0.25, phase: 1.0 }),
                ("C2",      HierarchicalTriple { a_inner: 100.0, e_inner: 0.35, a_outer: 380.0, e_outer: 0.35, phase: 1.0 }),
                ("C3",      HierarchicalTriple { a_inner: 100.0, e_inner: 0.35, a_outer: 380.0, e_outer: 0.45, phase: 1.0 }),
                ("C4",      HierarchicalTriple { a_inner: 120.0, e_inner: 0.30, a_outer: 400.0, e_outer: 0.35, phase: 1.0 }),
                ("C5",      HierarchicalTriple { a_inner: 120.0, e_inner: 0.30, a_outer: 420.0, e_outer: 0.45, phase: 1.0 }),
            ] {
                let x0 = hierarchical_triple(mass, &geom);
                let sys = System::ThreeBody { mass };
                match dynamics::simulate_strided(&sys, &x0, 1e-3, 200_000, 20) {
                    Ok(traj) => {
                        let drift = traj.energy_drift();
                        let max_sep = traj
                            .points
                            .rows()
                            .map(|x| {
                                let d13 = ((x[0] - x[4]).powi(2) + (x[1] - x[5]).powi(2)).sqrt();
                                let d23 = ((x[2] - x[4]).powi(2) + (x[3] - x[5]).powi(2)).sqrt();
                                d13.max(d23)
                            })
                            .fold(0.0, f64::max);
                        let (es, ls) = binary_energy_series(&traj, mass);
                        let n = es.len();
                        let e_all = std_of(&es) / es[0].abs();
                        let e_early = std_of(&es[..n / 5]) / es[0].abs();
                        let l_all = std_of(&ls) / ls[0].abs();
                        let l_early = std_of(&ls[..n / 5]) / ls[0].abs();
                        // Apsidal angle of the inner binary: unwrapped drift
                        // in cycles tells how fast orientation mixes.
                        let mut cycles_early = 0.0;
                        let mut prev = f64::NAN;
                        let mut total = 0.0;
                        for (i, x) in traj.points.rows().enumerate() {
                            let (rx, ry) = (x[0] - x[2], x[1] - x[3]);
                            let (vx, vy) = (x[6] - x[8], x[7] - x[9]);
                            let l = rx * vy - ry * vx;
                            let r = (rx * rx + ry * ry).sqrt();
                            let mu = 2.0 * mass;
                            let ex = vy * l / mu - rx / r;
                            let ey = -vx * l / mu - ry / r;
                            let ang = ey.atan2(ex);
                            if prev.is_finite() {
                                let mut d = ang - prev;
                                while d > std::f64::consts::PI { d -= 2.0 * std::f64::consts::PI; }
                                while d < -std::f64::consts::PI { d += 2.0 * std::f64::consts::PI; }
                                total += d;
                            }
                            prev = ang;
                            if i == n / 5 {
                                cycles_early = total / (2.0 * std::f64::consts::PI);
                            }
                        }
                        let cycles = total / (2.0 * std::f64::consts::PI);
                        println!(
                            "{tag:8} drift {drift:.1e}  max_sep {max_sep:6.0}  eb early/full {e_early:.3}/{e_all:.3}  lb {l_early:.3}/{l_all:.3}  apsidal cycles early/full {cycles_early:+.2}/{cycles:+.2}"
                        );
                    }
                    Err(e) => println!("{tag:8} FAILED: {e}"),
                }
            }
        }
        "triple-erd" => {
            // Args: a_in e_in a_out e_out
            let a: Vec<f64> = std::env::args().skip(2).map(|s| s.parse().unwrap()).collect();
            let geom = HierarchicalTriple {
                a_inner: a[0], e_inner: a[1], a_outer: a[2], e_outer: a[3], phase: 1.0,
            };
            let mass = dynamics::THREE_BODY_MASS;
            let x0 = hierarchical_triple(mass, &geom);
            let sys = System::ThreeBody { mass };
            let traj = dynamics::simulate_strided(&sys, &x0, 1e-3, 200_000, 1).unwrap();
            let model = preprocess::fit_whiten(&traj.points, 0.001, true).unwrap();
            println!("linear laws {}", model.linear_law_count());
            let white = model.apply_points(&traj.points).unwrap();
            for (l, v) in mini_erd(&white, &[0.0562, 0.1, 0.178, 0.316, 0.562], 3) {
                println!("  L {l:.3}  n_eff {v:.3}");
            }
        }

        "triple-windows" => {
            // Args: a_in e_in a_out e_out  (windows fixed)
            let a: Vec<f64> = std::env::args().skip(2).map(|s| s.parse().unwrap()).collect();
            let geom = HierarchicalTriple {
                a_inner: a[0], e_inner: a[1], a_outer: a[2], e_outer: a[3], phase: 1.0,
            };
            let mass = dynamics::THREE_BODY_MASS;
            let x0 = hierarchical_triple(mass, &geom);
            let sys = System::ThreeBody { mass };
            let traj = dynamics::simulate_strided(&sys, &x0, 1e-3, 200_000, 1).unwrap();
            let settings = invar::scan::ScanSettings {
                erd: ErdConfig {
                    train: TrainConfig { batch: 128, seed: 9, ..TrainConfig::default() },
                    ..ErdConfig::default()
                },
                ..Default::default()
            };
            let windows = [(0.0, 12.0), (0.0, 40.0), (0.0, 100.0), (0.0, 200.0)];
            let result = invar::scan::time_window_scan(&traj, &windows, &settings).unwrap();
            for e in &result.entries {
                println!(
                    "  window {:?}: n_linear {} n_eff {:.2} +- {:.2} -> count {}  {:?}",
                    e.coords, e.n_linear, e.n_eff_mean, e.n_eff_std, e.rounded_total, e.error
                );
            }
        }
        "mirror" => {
            for v0 in [1.0f64, 1.3, 1.5, 1.8] {
                let c = v0 / std::f64::consts::SQRT_2;
                let sys = System::Mirror;
                let traj = dynamics::simulate(&sys, &[0.3, 0.3, c, c], 1e-3, 100_000).unwrap();
                let model = preprocess::fit_whiten(&traj.points, 0.001, true).unwrap();
                let white = model.apply_points(&traj.points).unwrap();
                let curve = mini_erd(&white, &[0.1, 0.178, 0.316], 5);
                let s: Vec<String> =
                    curve.iter().map(|(l, v)| format!("{l:.2}:{v:.2}")).collect();
                println!("v0 {v0}: H {:.3}  {}", sys.hamiltonian(&[0.3, 0.3, c, c]), s.join("  "));
            }
        }
        other => eprintln!("unknown mode {other}"),
    }
}
