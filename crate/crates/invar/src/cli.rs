//! Command implementations behind the binary: each one runs part of the
//! pipeline from a `RunConfig` and writes its artifacts plus a manifest,
//! returning every path written.

use crate::baselines;
use crate::config::{write_manifest, RunConfig};
use crate::dynamics::System;
use crate::erd;
use crate::error::{Error, Result};
use crate::export;
use crate::io;
use crate::preprocess;
use crate::pullnet::{train_pull, TrainConfig};
use crate::rng;
use crate::sampler;
use crate::scan::{self, ScanAxis};
use rayon::prelude::*;
use std::path::{Path, PathBuf};

pub fn cmd_simulate(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let trajectory = cfg.trajectory()?;
    let stem = trajectory.system.name().to_string();
    let (csv, sidecar) = io::write_trajectory(&trajectory, &cfg.out_dir, &stem, cfg.seed)?;
    let manifest = write_manifest(cfg, "simulate", &cfg.out_dir)?;
    Ok(vec![csv, sidecar, manifest])
}

pub fn cmd_analyze(cfg: &RunConfig, trajectory_path: Option<&Path>) -> Result<Vec<PathBuf>> {
    let trajectory = match trajectory_path {
        Some(p) => io::read_trajectory(p)?,
        None => cfg.trajectory()?,
    };
    let grid = cfg.erd.noise_grid();
    let erd_cfg = cfg.erd_config();
    let (whiten, diagram) =
        erd::build_erd(&trajectory, &grid, &erd_cfg, cfg.preprocess.eps_p, cfg.preprocess.reduce)?;
    let detection = erd::detect(&diagram, whiten.linear_law_count())?;

    std::fs::create_dir_all(&cfg.out_dir)?;
    let stem = trajectory.system.name().to_string();
    let whiten_path = cfg.out_dir.join(format!("{stem}_whiten.json"));
    io::write_json(&whiten, &whiten_path)?;
    let erd_path = cfg.out_dir.join(format!("{stem}_erd.csv"));
    io::write_erd_csv(&diagram, &erd_path)?;
    let report = io::DetectionReport {
        detection,
        grid,
        failures: diagram.failures.clone(),
        config_hash: io::config_hash(cfg)?,
    };
    let detection_path = cfg.out_dir.join(format!("{stem}_detection.json"));
    io::write_json(&report, &detection_path)?;
    let manifest = write_manifest(cfg, "analyze", &cfg.out_dir)?;
    Ok(vec![whiten_path, erd_path, detection_path, manifest])
}

pub fn cmd_scan(cfg: &RunConfig, axis_name: &str) -> Result<Vec<PathBuf>> {
    let settings = cfg.scan_settings();
    let result = match axis_name {
        "pendulum_theta0" => scan::run_scan(
            &ScanAxis::PendulumTheta0 { degrees: cfg.scan.values.clone() },
            &settings,
        )?,
        "mirror_v0" => scan::run_scan(
            &ScanAxis::MirrorV0 {
                values: cfg.scan.values.clone(),
                rho0: cfg.scan.rho0,
                z0: cfg.scan.z0,
            },
            &settings,
        )?,
        "kepler_breakdown" => scan::run_scan(
            &ScanAxis::KeplerBreakdown {
                eps: cfg.scan.eps.clone(),
                orbits: cfg.scan.orbits.clone(),
            },
            &settings,
        )?,
        "threebody_windows" => {
            if cfg.scan.windows.is_empty() {
                return Err(Error::InvalidConfig("scan.windows is empty".into()));
            }
            let mut tb = cfg.clone();
            tb.system.name = "threebody".into();
            let trajectory = tb.trajectory()?;
            scan::time_window_scan(&trajectory, &cfg.scan.windows, &settings)?
        }
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown axis `{other}` (pendulum_theta0, mirror_v0, kepler_breakdown, \
                 threebody_windows)"
            )))
        }
    };

    std::fs::create_dir_all(&cfg.out_dir)?;
    let csv = cfg.out_dir.join(format!("scan_{axis_name}.csv"));
    io::write_scan_csv(&result, &csv)?;
    let json = cfg.out_dir.join(format!("scan_{axis_name}.json"));
    io::write_json(&result, &json)?;
    let manifest = write_manifest(cfg, &format!("scan {axis_name}"), &cfg.out_dir)?;
    Ok(vec![csv, json, manifest])
}

pub fn cmd_baseline(cfg: &RunConfig, method: &str) -> Result<Vec<PathBuf>> {
    let trajectory = cfg.trajectory()?;
    let stem = format!("baseline_{}_{}", method, trajectory.system.name());
    std::fs::create_dir_all(&cfg.out_dir)?;
    let json_path = cfg.out_dir.join(format!("{stem}.json"));
    let csv_path = cfg.out_dir.join(format!("{stem}.csv"));

    match method {
        "pca" => {
            let model = preprocess::fit_whiten(
                &trajectory.points,
                cfg.preprocess.eps_p,
                true,
            )?;
            #[derive(serde::Serialize)]
            struct PcaVerdict {
                dim: usize,
                linear_laws: usize,
                eigvals: Vec<f64>,
            }
            io::write_json(
                &PcaVerdict {
                    dim: model.kept.len(),
                    linear_laws: model.removed.len(),
                    eigvals: model.eigvals.clone(),
                },
                &json_path,
            )?;
            let mut w = String::from("i,eigval\n");
            for (i, v) in model.eigvals.iter().enumerate() {
                w.push_str(&format!("{},{}\n", i + 1, export::format_f64(*v)));
            }
            std::fs::write(&csv_path, w)?;
        }
        "autoencoder" => {
            let model =
                preprocess::fit_whiten(&trajectory.points, cfg.preprocess.eps_p, true)?;
            let white = model.apply_points(&trajectory.points)?;
            let s_range: Vec<usize> = if cfg.baseline.s_range.is_empty() {
                (1..=white.dim()).collect()
            } else {
                cfg.baseline.s_range.clone()
            };
            let verdict = baselines::autoencoder_dim(
                &white,
                &s_range,
                cfg.baseline.threshold,
                &cfg.train_config(),
                cfg.baseline.restarts,
            )?;
            io::write_json(&verdict, &json_path)?;
            let mut w = String::from("bottleneck,test_error\n");
            for (s, e) in &verdict.curve {
                w.push_str(&format!("{s},{}\n", export::format_f64(*e)));
            }
            std::fs::write(&csv_path, w)?;
        }
        "fractal" => {
            let model =
                preprocess::fit_whiten(&trajectory.points, cfg.preprocess.eps_p, true)?;
            let white = model.apply_points(&trajectory.points)?;
            let curve = baselines::fractal_dim(
                &white,
                cfg.baseline.window,
                cfg.baseline.max_points,
                rng::derive_seed(cfg.seed, &[rng::tag::SUBSAMPLE]),
            )?;
            io::write_json(&curve, &json_path)?;
            let mut w = String::from("log10_L,log10_pairs\n");
            for (l, n) in curve.log_l.iter().zip(&curve.log_pairs) {
                w.push_str(&format!(
                    "{},{}\n",
                    export::format_f64(*l),
                    export::format_f64(*n)
                ));
            }
            std::fs::write(&csv_path, w)?;
        }
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown method `{other}` (pca, autoencoder, fractal)"
            )))
        }
    }
    let manifest = write_manifest(cfg, &format!("baseline {method}"), &cfg.out_dir)?;
    Ok(vec![csv_path, json_path, manifest])
}

/// Scale a state's velocity block (or, for a system started at rest, its
/// coordinates) so the two gauge trajectories carry different energies.
fn scaled_state(system: &System, x0: &[f64], factor: f64) -> Vec<f64> {
    let k = system.dim() / 2;
    let mut out = x0.to_vec();
    if x0[k..].iter().all(|&v| v == 0.0) {
        for v in &mut out[..k] {
            *v *= factor;
        }
    } else {
        for v in &mut out[k..] {
            *v *= factor;
        }
    }
    out
}

pub fn cmd_export(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let system = cfg.system()?;
    let base = cfg.initial_state(&system)?;
    let x0_a = cfg.export.x0_a.clone().unwrap_or_else(|| base.clone());
    let x0_b =
        cfg.export.x0_b.clone().unwrap_or_else(|| scaled_state(&system, &base, 1.2));
    let x0_c =
        cfg.export.x0_c.clone().unwrap_or_else(|| scaled_state(&system, &base, 1.1));

    let dt = cfg.system.dt.unwrap_or_else(|| system.default_dt());
    let steps = cfg.system.steps.unwrap_or_else(|| system.default_steps());
    let stride = cfg.system.store_every;
    let a = crate::dynamics::simulate_strided(&system, &x0_a, dt, steps, stride)?;
    let b = crate::dynamics::simulate_strided(&system, &x0_b, dt, steps, stride)?;
    let c = crate::dynamics::simulate_strided(&system, &x0_c, dt, steps, stride)?;

    let files = export::export_gauge_fixed(
        &a,
        &b,
        Some(&c),
        &cfg.out_dir,
        &format!("gauge_{}", system.name()),
        (cfg.export.target_a, cfg.export.target_b),
    )?;
    let manifest = write_manifest(cfg, "export", &cfg.out_dir)?;
    let mut out = vec![files.train_path, files.manifest_path, manifest];
    if let Some(p) = files.eval_path {
        out.push(p);
    }
    Ok(out)
}

pub fn cmd_stability(cfg: &RunConfig, n_points: usize) -> Result<Vec<PathBuf>> {
    let trajectory = cfg.trajectory()?;
    let model =
        preprocess::fit_whiten(&trajectory.points, cfg.preprocess.eps_p, true)?;
    let white = model.apply_points(&trajectory.points)?;
    let grid = cfg.erd.noise_grid();
    let base_train = cfg.train_config();

    let networks: Vec<_> = grid
        .par_iter()
        .enumerate()
        .map(|(i, &l)| {
            let train = TrainConfig {
                noise_scale: l,
                seed: rng::derive_seed(cfg.seed, &[rng::tag::SCAN, i as u64]),
                ..base_train.clone()
            };
            train_pull(&white, &train)
        })
        .collect::<Result<Vec<_>>>()?;

    let result = sampler::stability_sweep(
        &networks,
        &white,
        n_points,
        cfg.sampler.samples,
        cfg.sampler.mode,
        cfg.seed,
    )?;

    std::fs::create_dir_all(&cfg.out_dir)?;
    let stem = format!("stability_{}", trajectory.system.name());
    let csv = cfg.out_dir.join(format!("{stem}.csv"));
    io::write_stability_csv(&result, &csv)?;
    let json = cfg.out_dir.join(format!("{stem}.json"));
    #[derive(serde::Serialize)]
    struct StabilityReport<'a> {
        n_linear: usize,
        ground_truth: usize,
        #[serde(flatten)]
        result: &'a sampler::StabilityResult,
    }
    io::write_json(
        &StabilityReport {
            n_linear: model.linear_law_count(),
            ground_truth: trajectory.system.ground_truth_laws(),
            result: &result,
        },
        &json,
    )?;
    let manifest = write_manifest(cfg, "stability", &cfg.out_dir)?;
    Ok(vec![csv, json, manifest])
}
