//! Gauge-fixed dataset export for external symbolic regression, and a
//! conservation-quality evaluator for candidate formulas.
//!
//! Any function of a conserved quantity is itself conserved, so the
//! regression target is pinned by assigning fixed values (1 and 2 by
//! default) to states from two different trajectories of the same system.

pub mod expr;

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};

/// Text formatting with 17 significant digits: parses back bit-for-bit.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaugeFixedManifest {
    pub columns: Vec<String>,
    pub system: String,
    pub targets: (f64, f64),
    pub rows_a: usize,
    pub rows_b: usize,
    pub rows_eval: usize,
    pub dt: f64,
    pub x0_a: Vec<f64>,
    pub x0_b: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct GaugeFixedFiles {
    pub train_path: PathBuf,
    pub eval_path: Option<PathBuf>,
    pub manifest_path: PathBuf,
}

/// Write the training table (state columns then target) and, when a third
/// trajectory is given, a sibling evaluation table without targets.
pub fn export_gauge_fixed(
    traj_a: &Trajectory,
    traj_b: &Trajectory,
    traj_eval: Option<&Trajectory>,
    dir: &Path,
    stem: &str,
    targets: (f64, f64),
) -> Result<GaugeFixedFiles> {
    if traj_a.system != traj_b.system {
        return Err(Error::MixedSystems {
            a: format!("{:?}", traj_a.system),
            b: format!("{:?}", traj_b.system),
        });
    }
    if let Some(c) = traj_eval {
        if c.system != traj_a.system {
            return Err(Error::MixedSystems {
                a: format!("{:?}", traj_a.system),
                b: format!("{:?}", c.system),
            });
        }
    }
    if traj_a.x0 == traj_b.x0 && traj_a.dt == traj_b.dt {
        return Err(Error::DegenerateGauge(
            "both trajectories are identical; targets are not distinguishable".into(),
        ));
    }

    std::fs::create_dir_all(dir)?;
    let train_path = dir.join(format!("{stem}.txt"));
    {
        let mut w = std::io::BufWriter::new(std::fs::File::create(&train_path)?);
        for (traj, target) in [(traj_a, targets.0), (traj_b, targets.1)] {
            for row in traj.points.rows() {
                for v in row {
                    write!(w, "{} ", format_f64(*v))?;
                }
                writeln!(w, "{}", format_f64(target))?;
            }
        }
    }

    let eval_path = match traj_eval {
        Some(c) => {
            let path = dir.join(format!("{stem}_eval.txt"));
            let mut w = std::io::BufWriter::new(std::fs::File::create(&path)?);
            for row in c.points.rows() {
                let cols: Vec<String> = row.iter().map(|v| format_f64(*v)).collect();
                writeln!(w, "{}", cols.join(" "))?;
            }
            Some(path)
        }
        None => None,
    };

    let mut columns = traj_a.system.component_names();
    columns.push("target".into());
    let manifest = GaugeFixedManifest {
        columns,
        system: traj_a.system.name().to_string(),
        targets,
        rows_a: traj_a.points.len(),
        rows_b: traj_b.points.len(),
        rows_eval: traj_eval.map_or(0, |c| c.points.len()),
        dt: traj_a.dt,
        x0_a: traj_a.x0.clone(),
        x0_b: traj_b.x0.clone(),
    };
    let manifest_path = dir.join(format!("{stem}_manifest.json"));
    std::fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)?;

    Ok(GaugeFixedFiles { train_path, eval_path, manifest_path })
}

/// Parse a gauge-fixed table back into rows.
pub fn read_table(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> =
            line.split_whitespace().map(str::parse).collect();
        rows.push(row.map_err(|e| Error::Parse {
            path: path.display().to_string(),
            message: format!("line {}: {e}", lineno + 1),
        })?);
    }
    Ok(rows)
}

/// Conservation quality of a formula along a trajectory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CandidateStats {
    pub mean: f64,
    pub std: f64,
    /// Rows dropped for non-finite values (domain errors).
    pub excluded: usize,
    pub n: usize,
}

impl CandidateStats {
    /// std / |mean|, the dimensionless conservation metric.
    pub fn relative_spread(&self) -> f64 {
        self.std / self.mean.abs()
    }
}

/// Evaluate a formula (over the system's component names) along the
/// trajectory and report its mean and standard deviation.
pub fn evaluate_candidate(formula: &str, trajectory: &Trajectory) -> Result<CandidateStats> {
    let names = trajectory.system.component_names();
    let expr = expr::parse(formula, &names)?;
    let mut values = Vec::with_capacity(trajectory.points.len());
    let mut excluded = 0usize;
    for row in trajectory.points.rows() {
        let v = expr.eval(row);
        if v.is_finite() {
            values.push(v);
        } else {
            excluded += 1;
        }
    }
    if values.is_empty() {
        return Err(Error::EmptyResult(format!(
            "formula `{formula}` produced no finite values ({excluded} rows excluded)"
        )));
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    Ok(CandidateStats { mean, std: var.sqrt(), excluded, n })
}

/// Ground-truth conserved-quantity formulas for each system, written in
/// the component names of `System::component_names`.
pub fn ground_truth_formulas(system: &crate::dynamics::System) -> Vec<(&'static str, String)> {
    use crate::dynamics::System;
    match system {
        System::Harmonic => vec![("energy", "0.5*(x^2 + xdot^2)".to_string())],
        System::Kepler { .. } => vec![
            ("energy", "0.5*(xdot^2 + ydot^2) - 1/sqrt(x^2 + y^2)".to_string()),
            ("angular_momentum", "x*ydot - y*xdot".to_string()),
            (
                // Direction of the orbit's major axis. The conserved vector
                // is (ydot*L - x/r, -xdot*L - y/r) with L = x*ydot - y*xdot.
                "major_axis_angle",
                "atan2(-xdot*(x*ydot - y*xdot) - y/sqrt(x^2+y^2), \
                 ydot*(x*ydot - y*xdot) - x/sqrt(x^2+y^2))"
                    .to_string(),
            ),
        ],
        System::Pendulum => vec![
            (
                "energy",
                "-20*cos(theta1) - 10*cos(theta2) + theta1dot^2 + 0.5*theta2dot^2 \
                 + theta1dot*theta2dot*cos(theta1 - theta2)"
                    .to_string(),
            ),
            (
                "small_angle_energy",
                "10*theta1^2 + 5*theta2^2 + theta1dot^2 + 0.5*theta2dot^2 \
                 + theta1dot*theta2dot"
                    .to_string(),
            ),
        ],
        System::Mirror => vec![(
            "energy",
            "0.5*(rhodot^2 + zdot^2) + 0.5*(rho^2 + z^2/5 + rho^2*z^2)".to_string(),
        )],
        System::ThreeBody { mass } => {
            let m = format_f64(*mass);
            vec![
                (
                    "energy",
                    format!(
                        "{m}/2*(x1dot^2+y1dot^2+x2dot^2+y2dot^2+x3dot^2+y3dot^2) \
                         - {m}^2*(1/sqrt((x1-x2)^2+(y1-y2)^2) \
                         + 1/sqrt((x1-x3)^2+(y1-y3)^2) \
                         + 1/sqrt((x2-x3)^2+(y2-y3)^2))"
                    ),
                ),
                ("com_x", "(x1 + x2 + x3)/3".to_string()),
                ("com_y", "(y1 + y2 + y3)/3".to_string()),
                ("com_xdot", "(x1dot + x2dot + x3dot)/3".to_string()),
                ("com_ydot", "(y1dot + y2dot + y3dot)/3".to_string()),
                (
                    "angular_momentum",
                    "x1*y1dot - y1*x1dot + x2*y2dot - y2*x2dot + x3*y3dot - y3*x3dot"
                        .to_string(),
                ),
            ]
        }
    }
}
