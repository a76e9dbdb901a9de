//! Parameter scans using n_eff as an order parameter.
//!
//! Each axis value gets its own trajectory and pipeline run at a fixed
//! noise scale (training a network per value is what makes scans costly, so
//! n_eff is averaged over several starting points of one trained network
//! rather than over retrainings).

use crate::dynamics::{self, System, Trajectory};
use crate::erd::{self, ErdConfig, NeffEstimate};
use crate::error::{Error, Result};
use crate::points::Points;
use crate::preprocess;
use crate::rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Scans fix the noise scale here instead of maximizing over a grid.
pub const SCAN_NOISE_SCALE: f64 = 0.1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanSettings {
    pub noise_scale: f64,
    pub erd: ErdConfig,
    /// Starting points averaged per axis value.
    pub n_starts: usize,
    pub eps_p: f64,
    /// Upper bound on stored trajectory points; longer runs are strided.
    pub max_stored_points: usize,
    /// Multiplier on the default step counts (1.0 = headline runs).
    pub time_factor: f64,
}

impl Default for ScanSettings {
    fn default() -> Self {
        ScanSettings {
            noise_scale: SCAN_NOISE_SCALE,
            erd: ErdConfig::default(),
            n_starts: 3,
            eps_p: preprocess::DEFAULT_EPS_P,
            max_stored_points: 200_000,
            time_factor: 1.0,
        }
    }
}

/// What is swept. Axis values map to initial conditions or system
/// parameters; everything else comes from the settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "axis", rename_all = "snake_case")]
pub enum ScanAxis {
    /// Release both pendulum arms from theta1 = theta2 = theta0 at rest.
    PendulumTheta0 { degrees: Vec<f64> },
    /// Launch the mirror from a fixed position with speed v0 split evenly.
    MirrorV0 {
        values: Vec<f64>,
        #[serde(default)]
        rho0: f64,
        #[serde(default)]
        z0: f64,
    },
    /// Perturbed force law r^-(2+eps) integrated for a number of orbits.
    KeplerBreakdown { eps: Vec<f64>, orbits: Vec<f64> },
}

impl ScanAxis {
    pub fn coord_names(&self) -> Vec<&'static str> {
        match self {
            ScanAxis::PendulumTheta0 { .. } => vec!["theta0_deg"],
            ScanAxis::MirrorV0 { .. } => vec!["v0"],
            ScanAxis::KeplerBreakdown { .. } => vec!["eps", "orbits"],
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            ScanAxis::PendulumTheta0 { degrees } => degrees.is_empty(),
            ScanAxis::MirrorV0 { values, .. } => values.is_empty(),
            ScanAxis::KeplerBreakdown { eps, orbits } => {
                eps.is_empty() || orbits.is_empty()
            }
        }
    }
}

/// One pipeline run at one axis point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanEntry {
    pub coords: Vec<f64>,
    pub n_eff_mean: f64,
    pub n_eff_std: f64,
    pub n_linear: usize,
    /// n_linear + rounded mean n_eff.
    pub rounded_total: i64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanResult {
    pub coord_names: Vec<String>,
    pub noise_scale: f64,
    pub entries: Vec<ScanEntry>,
    /// Axis midpoints where the rounded count changes (1D scans only).
    pub transitions: Vec<f64>,
}

impl ScanResult {
    /// Axis values where the interpolated mean n_eff crosses `level`
    /// (1D scans).
    pub fn crossings(&self, level: f64) -> Vec<f64> {
        let ok: Vec<&ScanEntry> =
            self.entries.iter().filter(|e| e.error.is_none()).collect();
        let mut out = Vec::new();
        for w in ok.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (ya, yb) = (a.n_eff_mean, b.n_eff_mean);
            if (ya - level) * (yb - level) < 0.0 {
                let t = (level - ya) / (yb - ya);
                out.push(a.coords[0] + t * (b.coords[0] - a.coords[0]));
            }
        }
        out
    }
}

/// n_eff of a raw trajectory at one noise scale: whiten (stripping linear
/// laws), train once, average the local count over several starting points.
pub fn neff_of_trajectory(
    points: &Points,
    settings: &ScanSettings,
    seed: u64,
) -> Result<(usize, NeffEstimate)> {
    let model = preprocess::fit_whiten(points, settings.eps_p, true)?;
    let whitened = model.apply_points(points)?;
    let cfg = ErdConfig {
        train: crate::pullnet::TrainConfig { seed, ..settings.erd.train.clone() },
        ..settings.erd.clone()
    };
    let estimate =
        erd::neff_at_scale(&whitened, settings.noise_scale, &cfg, settings.n_starts)?;
    Ok((model.linear_law_count(), estimate))
}

fn entry_from(
    coords: Vec<f64>,
    outcome: Result<(usize, NeffEstimate)>,
) -> ScanEntry {
    match outcome {
        Ok((n_linear, est)) => ScanEntry {
            coords,
            n_eff_mean: est.mean,
            n_eff_std: est.std,
            n_linear,
            rounded_total: n_linear as i64 + est.mean.round() as i64,
            error: None,
        },
        Err(e) => ScanEntry {
            coords,
            n_eff_mean: f64::NAN,
            n_eff_std: f64::NAN,
            n_linear: 0,
            rounded_total: -1,
            error: Some(e.to_string()),
        },
    }
}

/// Period of the default eccentric orbit for the unperturbed force law;
/// orbit counts are converted to integration time with this.
pub fn kepler_orbit_period(x0: &[f64]) -> f64 {
    let r = (x0[0] * x0[0] + x0[1] * x0[1]).sqrt();
    let v2 = x0[2] * x0[2] + x0[3] * x0[3];
    let energy = 0.5 * v2 - 1.0 / r;
    let a = -0.5 / energy;
    2.0 * std::f64::consts::PI * a.powf(1.5)
}

fn strided_run(
    system: &System,
    x0: &[f64],
    dt: f64,
    steps: usize,
    max_stored: usize,
) -> Result<Trajectory> {
    let stride = (steps / max_stored).max(1);
    dynamics::simulate_strided(system, x0, dt, steps, stride)
}

/// Sweep the axis; per-value failures are recorded and the scan continues.
pub fn run_scan(axis: &ScanAxis, settings: &ScanSettings) -> Result<ScanResult> {
    if axis.is_empty() {
        return Err(Error::InvalidConfig("scan axis has no values".into()));
    }
    let base_seed = settings.erd.train.seed;
    let jobs: Vec<(Vec<f64>, System, Vec<f64>, f64, usize)> = match axis {
        ScanAxis::PendulumTheta0 { degrees } => {
            let mut sorted = degrees.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite axis"));
            sorted
                .iter()
                .map(|&deg| {
                    let theta = deg.to_radians();
                    let sys = System::Pendulum;
                    let steps =
                        (sys.default_steps() as f64 * settings.time_factor) as usize;
                    (vec![deg], sys, vec![theta, theta, 0.0, 0.0], sys.default_dt(), steps)
                })
                .collect()
        }
        ScanAxis::MirrorV0 { values, rho0, z0 } => {
            let mut sorted = values.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite axis"));
            sorted
                .iter()
                .map(|&v0| {
                    let sys = System::Mirror;
                    let c = v0 / std::f64::consts::SQRT_2;
                    let steps =
                        (sys.default_steps() as f64 * settings.time_factor) as usize;
                    (vec![v0], sys, vec![*rho0, *z0, c, c], sys.default_dt(), steps)
                })
                .collect()
        }
        ScanAxis::KeplerBreakdown { eps, orbits } => {
            let x0 = System::kepler().default_initial_state();
            let period = kepler_orbit_period(&x0);
            let mut jobs = Vec::new();
            for &e in eps {
                for &k in orbits {
                    let sys = System::Kepler { eps: e };
                    let dt = sys.default_dt();
                    let steps = ((k * period / dt).ceil() as usize).max(1);
                    jobs.push((vec![e, k], sys, x0.clone(), dt, steps));
                }
            }
            jobs
        }
    };

    let entries: Vec<ScanEntry> = jobs
        .par_iter()
        .enumerate()
        .map(|(i, (coords, sys, x0, dt, steps))| {
            let seed = rng::derive_seed(base_seed, &[rng::tag::SCAN, i as u64]);
            let outcome = strided_run(sys, x0, *dt, *steps, settings.max_stored_points)
                .and_then(|traj| neff_of_trajectory(&traj.points, settings, seed));
            entry_from(coords.clone(), outcome)
        })
        .collect();

    let transitions = if axis.coord_names().len() == 1 {
        let ok: Vec<&ScanEntry> = entries.iter().filter(|e| e.error.is_none()).collect();
        ok.windows(2)
            .filter(|w| w[0].rounded_total != w[1].rounded_total)
            .map(|w| 0.5 * (w[0].coords[0] + w[1].coords[0]))
            .collect()
    } else {
        Vec::new()
    };

    Ok(ScanResult {
        coord_names: axis.coord_names().iter().map(|s| s.to_string()).collect(),
        noise_scale: settings.noise_scale,
        entries,
        transitions,
    })
}

/// Run the pipeline on successive time windows of one trajectory. Windows
/// with too few points are skipped with a note.
pub fn time_window_scan(
    trajectory: &Trajectory,
    windows: &[(f64, f64)],
    settings: &ScanSettings,
) -> Result<ScanResult> {
    if windows.is_empty() {
        return Err(Error::InvalidConfig("no time windows".into()));
    }
    let base_seed = settings.erd.train.seed;
    let entries: Vec<ScanEntry> = windows
        .par_iter()
        .enumerate()
        .map(|(i, &(t0, t1))| {
            let seed = rng::derive_seed(base_seed, &[rng::tag::SCAN, 1000 + i as u64]);
            let points = trajectory.window(t0, t1);
            let outcome = if points.len() < points.dim() + 2 {
                Err(Error::InsufficientData { rows: points.len(), dim: points.dim() })
            } else {
                neff_of_trajectory(&points, settings, seed)
            };
            entry_from(vec![t0, t1], outcome)
        })
        .collect();
    Ok(ScanResult {
        coord_names: vec!["t0".into(), "t1".into()],
        noise_scale: settings.noise_scale,
        entries,
        transitions: Vec::new(),
    })
}

/// For each force perturbation, orbit count at which the interpolated
/// n_eff falls through `level` (log-interpolated in orbits).
pub fn breakdown_contour(result: &ScanResult, level: f64) -> Vec<(f64, f64)> {
    let mut by_eps: std::collections::BTreeMap<u64, Vec<(f64, f64, f64)>> =
        std::collections::BTreeMap::new();
    for e in result.entries.iter().filter(|e| e.error.is_none()) {
        by_eps
            .entry(e.coords[0].to_bits())
            .or_default()
            .push((e.coords[0], e.coords[1], e.n_eff_mean));
    }
    let mut contour = Vec::new();
    for rows in by_eps.values() {
        let mut rows = rows.clone();
        rows.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite orbits"));
        for w in rows.windows(2) {
            let (ya, yb) = (w[0].2, w[1].2);
            if (ya - level) * (yb - level) < 0.0 {
                let t = (level - ya) / (yb - ya);
                let log_orbits = w[0].1.log10() + t * (w[1].1.log10() - w[0].1.log10());
                contour.push((w[0].0, 10f64.powf(log_orbits)));
                break;
            }
        }
    }
    contour
}

/// Log-log slope of a breakdown contour.
pub fn contour_slope(contour: &[(f64, f64)]) -> Option<f64> {
    if contour.len() < 2 {
        return None;
    }
    let x: Vec<f64> = contour.iter().map(|&(e, _)| e.log10()).collect();
    let y: Vec<f64> = contour.iter().map(|&(_, k)| k.log10()).collect();
    Some(crate::linalg::linear_fit(&x, &y).0)
}

#[derive(Debug, Clone, Copy)]
pub struct MaximizeOptions {
    /// Stop once the bracket is narrower than this.
    pub tolerance: f64,
    pub max_evals: usize,
    /// Smallest peak-to-floor spread treated as a real maximum.
    pub flat_spread: f64,
}

impl Default for MaximizeOptions {
    fn default() -> Self {
        MaximizeOptions { tolerance: 1.0, max_evals: 12, flat_spread: 0.3 }
    }
}

/// Golden-section refinement of a noisy response curve. The evaluator is
/// expected to average internally; evaluations are cached per abscissa.
pub fn maximize_neff<F>(
    mut eval: F,
    bracket: (f64, f64),
    opts: &MaximizeOptions,
) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut lo, mut hi) = bracket;
    if !(hi > lo) {
        return Err(Error::InvalidConfig("empty bracket".into()));
    }
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut evals: Vec<(f64, f64)> = Vec::new();
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = eval(x1)?;
    let mut f2 = eval(x2)?;
    evals.push((x1, f1));
    evals.push((x2, f2));

    while evals.len() < opts.max_evals && (hi - lo) > opts.tolerance {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = eval(x2)?;
            evals.push((x2, f2));
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = eval(x1)?;
            evals.push((x1, f1));
        }
    }

    let best = evals
        .iter()
        .copied()
        .max_by(|a, b| a.1.partial_cmp(&b.1).expect("finite n_eff"))
        .expect("at least two evaluations");
    let floor = evals.iter().map(|&(_, v)| v).fold(f64::MAX, f64::min);
    if best.1 - floor < opts.flat_spread {
        return Err(Error::NoMaxFound {
            lo: bracket.0,
            hi: bracket.1,
            spread: best.1 - floor,
        });
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_axis_is_rejected() {
        let axis = ScanAxis::PendulumTheta0 { degrees: vec![] };
        assert!(run_scan(&axis, &ScanSettings::default()).is_err());
    }

    #[test]
    fn kepler_period_matches_the_default_orbit() {
        // Default orbit (1,0,0,1.2): a = 1/0.56, T = 2 pi a^1.5.
        let t = kepler_orbit_period(&System::kepler().default_initial_state());
        let a: f64 = 1.0 / 0.56;
        assert!((t - 2.0 * std::f64::consts::PI * a.powf(1.5)).abs() < 1e-12);
    }

    #[test]
    fn golden_section_finds_a_noisy_peak() {
        // Deterministic pseudo-noise on a bump peaked at 65.
        let mut calls = 0u64;
        let eval = |x: f64| -> Result<f64> {
            calls += 1;
            let noise = ((calls * 2654435761) % 1000) as f64 / 1000.0 * 0.1;
            Ok(2.0 + (-(x - 65.0) * (x - 65.0) / 50.0).exp() + noise)
        };
        let opts = MaximizeOptions { tolerance: 2.0, max_evals: 14, flat_spread: 0.3 };
        let (x, v) = maximize_neff(eval, (40.0, 90.0), &opts).unwrap();
        assert!((x - 65.0).abs() < 5.0, "peak at {x}");
        assert!(v > 2.5);
    }

    #[test]
    fn flat_response_reports_no_max() {
        let eval = |_x: f64| -> Result<f64> { Ok(1.02) };
        let opts = MaximizeOptions::default();
        match maximize_neff(eval, (0.0, 10.0), &opts) {
            Err(Error::NoMaxFound { spread, .. }) => assert!(spread < 0.3),
            other => panic!("expected NoMaxFound, got {other:?}"),
        }
    }

    #[test]
    fn contour_interpolates_in_log_orbits() {
        let result = ScanResult {
            coord_names: vec!["eps".into(), "orbits".into()],
            noise_scale: 0.1,
            entries: vec![
                entry_from(
                    vec![0.01, 10.0],
                    Ok((0, NeffEstimate {
                        noise_scale: 0.1,
                        per_start: vec![3.0],
                        mean: 3.0,
                        std: 0.0,
                        train_loss: 0.0,
                        test_loss: 0.0,
                    })),
                ),
                entry_from(
                    vec![0.01, 1000.0],
                    Ok((0, NeffEstimate {
                        noise_scale: 0.1,
                        per_start: vec![2.0],
                        mean: 2.0,
                        std: 0.0,
                        train_loss: 0.0,
                        test_loss: 0.0,
                    })),
                ),
            ],
            transitions: vec![],
        };
        let c = breakdown_contour(&result, 2.5);
        assert_eq!(c.len(), 1);
        // Halfway in log10(orbits) between 10 and 1000 is 100.
        assert!((c[0].1 - 100.0).abs() < 1e-9);
    }

    #[test]
    fn failed_window_is_noted_and_scan_continues() {
        let traj = dynamics::simulate(&System::Harmonic, &[1.0, 0.0], 0.01, 2000).unwrap();
        let settings = ScanSettings {
            erd: ErdConfig {
                train: crate::pullnet::TrainConfig {
                    hidden: vec![16, 16],
                    steps: 60,
                    batch: 32,
                    ..Default::default()
                },
                samples: 50,
                ..Default::default()
            },
            n_starts: 2,
            ..Default::default()
        };
        // Second window lies outside the trajectory: no points.
        let result =
            time_window_scan(&traj, &[(0.0, 20.0), (100.0, 101.0)], &settings).unwrap();
        assert_eq!(result.entries.len(), 2);
        assert!(result.entries[0].error.is_none());
        assert!(result.entries[1].error.is_some());
    }
}
