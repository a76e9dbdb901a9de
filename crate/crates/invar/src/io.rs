//! On-disk formats: CSV tables with JSON sidecars. Floats are written with
//! 17 significant digits so every file re-parses bit-for-bit.

use crate::dynamics::{System, Trajectory};
use crate::erd::{DetectionResult, ExplainedRatioDiagram};
use crate::error::{Error, Result};
use crate::export::format_f64;
use crate::points::Points;
use crate::pullnet::PullNetwork;
use crate::sampler::{SampleCloud, StabilityResult};
use crate::scan::ScanResult;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};

/// Provenance sidecar for a trajectory file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectorySidecar {
    pub system: System,
    pub x0: Vec<f64>,
    pub dt: f64,
    pub store_every: usize,
    pub seed: u64,
}

/// Write `t,x0,...,x{N-1}` rows plus the JSON sidecar; returns both paths.
pub fn write_trajectory(
    trajectory: &Trajectory,
    dir: &Path,
    stem: &str,
    seed: u64,
) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{stem}.csv"));
    let mut w = std::io::BufWriter::new(std::fs::File::create(&csv_path)?);
    let dim = trajectory.points.dim();
    let header: Vec<String> =
        std::iter::once("t".to_string()).chain((0..dim).map(|i| format!("x{i}"))).collect();
    writeln!(w, "{}", header.join(","))?;
    for (i, row) in trajectory.points.rows().enumerate() {
        write!(w, "{}", format_f64(trajectory.times[i]))?;
        for v in row {
            write!(w, ",{}", format_f64(*v))?;
        }
        writeln!(w)?;
    }
    drop(w);

    let sidecar = TrajectorySidecar {
        system: trajectory.system,
        x0: trajectory.x0.clone(),
        dt: trajectory.dt,
        store_every: trajectory.store_every,
        seed,
    };
    let json_path = dir.join(format!("{stem}.json"));
    std::fs::write(&json_path, serde_json::to_string_pretty(&sidecar)?)?;
    Ok((csv_path, json_path))
}

/// Read a trajectory CSV and its JSON sidecar back.
pub fn read_trajectory(csv_path: &Path) -> Result<Trajectory> {
    let sidecar_path = csv_path.with_extension("json");
    let sidecar: TrajectorySidecar =
        serde_json::from_str(&std::fs::read_to_string(&sidecar_path).map_err(|e| {
            Error::Parse {
                path: sidecar_path.display().to_string(),
                message: format!("missing sidecar: {e}"),
            }
        })?)?;
    let text = std::fs::read_to_string(csv_path)?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Parse {
        path: csv_path.display().to_string(),
        message: "empty file".into(),
    })?;
    let dim = header.split(',').count() - 1;
    let mut times = Vec::new();
    let mut points = Points::new(dim);
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: std::result::Result<Vec<f64>, _> =
            line.split(',').map(str::parse).collect();
        let fields = fields.map_err(|e| Error::Parse {
            path: csv_path.display().to_string(),
            message: format!("line {}: {e}", lineno + 2),
        })?;
        if fields.len() != dim + 1 {
            return Err(Error::Parse {
                path: csv_path.display().to_string(),
                message: format!("line {}: expected {} fields", lineno + 2, dim + 1),
            });
        }
        times.push(fields[0]);
        points.push(&fields[1..]);
    }
    if points.is_empty() {
        return Err(Error::Parse {
            path: csv_path.display().to_string(),
            message: "no data rows".into(),
        });
    }
    Ok(Trajectory {
        system: sidecar.system,
        x0: sidecar.x0,
        dt: sidecar.dt,
        store_every: sidecar.store_every,
        times,
        points,
    })
}

/// `L,i,omega,n_eff_at_L` rows, one per ratio per scale.
pub fn write_erd_csv(erd: &ExplainedRatioDiagram, path: &Path) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "L,i,omega,n_eff_at_L")?;
    for c in &erd.columns {
        for (i, &omega) in c.ratios.iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{}",
                format_f64(c.noise_scale),
                i + 1,
                format_f64(omega),
                format_f64(c.n_eff)
            )?;
        }
    }
    Ok(())
}

/// Detection verdict with its grid and a hash of the producing config.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectionReport {
    pub detection: DetectionResult,
    pub grid: Vec<f64>,
    pub failures: Vec<(f64, String)>,
    pub config_hash: String,
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

/// Sample cloud rows plus metadata sidecar.
pub fn write_cloud(cloud: &SampleCloud, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{stem}.csv"));
    let mut w = std::io::BufWriter::new(std::fs::File::create(&csv_path)?);
    let header: Vec<String> = (0..cloud.samples.dim()).map(|i| format!("x{i}")).collect();
    writeln!(w, "{}", header.join(","))?;
    for row in cloud.samples.rows() {
        let cols: Vec<String> = row.iter().map(|v| format_f64(*v)).collect();
        writeln!(w, "{}", cols.join(","))?;
    }
    drop(w);

    #[derive(Serialize)]
    struct CloudMeta<'a> {
        origin: &'a [f64],
        noise_scale: f64,
        seed: u64,
        chain_length: usize,
        mode: crate::sampler::SampleMode,
    }
    let meta_path = dir.join(format!("{stem}.json"));
    write_json(
        &CloudMeta {
            origin: &cloud.origin,
            noise_scale: cloud.noise_scale,
            seed: cloud.seed,
            chain_length: cloud.samples.len(),
            mode: cloud.mode,
        },
        &meta_path,
    )?;
    Ok((csv_path, meta_path))
}

/// Scan table. One-dimensional axes use the `axis_value` header; grids
/// write one column per coordinate.
pub fn write_scan_csv(result: &ScanResult, path: &Path) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    if result.coord_names.len() == 1 {
        writeln!(w, "axis_value,n_eff_mean,n_eff_std,rounded")?;
    } else {
        writeln!(w, "{},n_eff_mean,n_eff_std,rounded", result.coord_names.join(","))?;
    }
    for e in &result.entries {
        if e.error.is_some() {
            continue;
        }
        let coords: Vec<String> = e.coords.iter().map(|v| format_f64(*v)).collect();
        writeln!(
            w,
            "{},{},{},{}",
            coords.join(","),
            format_f64(e.n_eff_mean),
            format_f64(e.n_eff_std),
            e.rounded_total
        )?;
    }
    Ok(())
}

/// Stability histogram: `rounded_count,occurrences`.
pub fn write_stability_csv(result: &StabilityResult, path: &Path) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "rounded_count,occurrences")?;
    for (k, n) in &result.counts {
        writeln!(w, "{k},{n}")?;
    }
    Ok(())
}

/// Network checkpoint (JSON with shapes, weights, scale, seed, losses).
pub fn write_checkpoint(network: &PullNetwork, path: &Path) -> Result<()> {
    write_json(network, path)
}

pub fn read_checkpoint(path: &Path) -> Result<PullNetwork> {
    read_json(path)
}

/// FNV-1a over the canonical JSON of any serializable config.
pub fn config_hash<T: Serialize>(value: &T) -> Result<String> {
    let json = serde_json::to_string(value)?;
    let mut hash: u64 = 0xcbf29ce484222325;
    for b in json.bytes() {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    Ok(format!("{hash:016x}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics;

    #[test]
    fn trajectory_round_trips_exactly() {
        let traj =
            dynamics::simulate(&System::kepler(), &[1.0, 0.0, 0.0, 1.2], 0.01, 100).unwrap();
        let dir = std::env::temp_dir().join("invar_io_traj");
        let (csv, _) = write_trajectory(&traj, &dir, "orbit", 42).unwrap();
        let back = read_trajectory(&csv).unwrap();
        assert_eq!(back.points, traj.points);
        assert_eq!(back.times, traj.times);
        assert_eq!(back.system, traj.system);
        assert_eq!(back.dt, traj.dt);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn checkpoint_round_trips() {
        use crate::pullnet::{train_pull, TrainConfig};
        let mut p = Points::new(2);
        for i in 0..64 {
            let t = i as f64 * 0.1;
            p.push(&[t.cos(), t.sin()]);
        }
        let cfg = TrainConfig {
            hidden: vec![8],
            steps: 20,
            batch: 16,
            noise_scale: 0.1,
            seed: 5,
            ..TrainConfig::default()
        };
        let net = train_pull(&p, &cfg).unwrap();
        let dir = std::env::temp_dir().join("invar_io_ckpt");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("net.json");
        write_checkpoint(&net, &path).unwrap();
        let back = read_checkpoint(&path).unwrap();
        assert_eq!(back.net.weights, net.net.weights);
        assert_eq!(back.noise_scale, net.noise_scale);
        assert_eq!(back.test_loss, net.test_loss);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn config_hash_is_stable_and_sensitive() {
        let a = config_hash(&vec![1, 2, 3]).unwrap();
        let b = config_hash(&vec![1, 2, 3]).unwrap();
        let c = config_hash(&vec![1, 2, 4]).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn malformed_csv_is_a_parse_error() {
        let dir = std::env::temp_dir().join("invar_io_bad");
        std::fs::create_dir_all(&dir).unwrap();
        let csv = dir.join("bad.csv");
        std::fs::write(&csv, "t,x0\n0.0,1.0\nnot,a,number\n").unwrap();
        std::fs::write(
            dir.join("bad.json"),
            serde_json::to_string(&TrajectorySidecar {
                system: System::Harmonic,
                x0: vec![1.0, 0.0],
                dt: 0.01,
                store_every: 1,
                seed: 0,
            })
            .unwrap(),
        )
        .unwrap();
        assert!(matches!(read_trajectory(&csv), Err(Error::Parse { .. })));
        std::fs::remove_dir_all(&dir).ok();
    }
}
