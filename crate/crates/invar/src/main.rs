use clap::{Parser, Subcommand};
use invar::cli;
use invar::config::RunConfig;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "invar",
    version,
    about = "Count conserved quantities of dynamical systems from trajectory data"
)]
struct Args {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// System to run on (harmonic, kepler, pendulum, mirror, threebody).
    #[arg(long, global = true)]
    system: Option<String>,

    /// Root seed for all randomness.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// System parameter override, e.g. --param eps=0.01 (repeatable).
    #[arg(long = "param", value_name = "KEY=VALUE", global = true)]
    params: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a trajectory and write it with its provenance sidecar.
    Simulate,
    /// Run the full detection pipeline and write the explained-ratio
    /// diagram plus the detection verdict.
    Analyze {
        /// Previously written trajectory CSV (the sidecar must sit next to
        /// it); simulated from the config when omitted.
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
    /// Sweep a parameter axis at a fixed noise scale.
    Scan {
        /// pendulum_theta0, mirror_v0, kepler_breakdown or threebody_windows.
        #[arg(long)]
        axis: String,
        /// Axis values: comma list (5,10,65) or lo:hi:count (5:175:18).
        #[arg(long)]
        values: Option<String>,
    },
    /// Run a comparison dimensionality estimator.
    Baseline {
        /// pca, autoencoder or fractal.
        #[arg(long)]
        method: String,
    },
    /// Write gauge-fixed tables for external symbolic regression.
    Export,
    /// Starting-point stability histogram of the detected count.
    Stability {
        /// Number of random starting points.
        #[arg(long, default_value_t = 100)]
        points: usize,
    },
}

fn parse_values(spec: &str) -> Result<Vec<f64>, String> {
    if let Some((lo, rest)) = spec.split_once(':') {
        let (hi, count) = rest.split_once(':').ok_or("expected lo:hi:count")?;
        let lo: f64 = lo.parse().map_err(|_| format!("bad number `{lo}`"))?;
        let hi: f64 = hi.parse().map_err(|_| format!("bad number `{hi}`"))?;
        let count: usize = count.parse().map_err(|_| format!("bad count `{count}`"))?;
        if count < 2 {
            return Err("count must be at least 2".into());
        }
        Ok((0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect())
    } else {
        spec.split(',')
            .map(|v| v.trim().parse().map_err(|_| format!("bad number `{v}`")))
            .collect()
    }
}

fn run(args: Args) -> invar::Result<Vec<PathBuf>> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.apply_env()?;
    if let Some(system) = &args.system {
        cfg.system.name = system.clone();
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(jobs) = args.jobs {
        cfg.jobs = jobs;
    }
    if let Some(out) = &args.out {
        cfg.out_dir = out.clone();
    }
    for p in &args.params {
        let (k, v) = p.split_once('=').ok_or_else(|| {
            invar::Error::InvalidConfig(format!("--param needs KEY=VALUE, got `{p}`"))
        })?;
        cfg.apply_param(k, v)?;
    }
    cfg.validate()?;

    if cfg.jobs > 0 {
        // Ignore the error if a pool already exists (e.g. repeated calls in
        // tests); the run is deterministic either way.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build_global();
    }

    match &args.command {
        Command::Simulate => cli::cmd_simulate(&cfg),
        Command::Analyze { trajectory } => cli::cmd_analyze(&cfg, trajectory.as_deref()),
        Command::Scan { axis, values } => {
            if let Some(spec) = values {
                cfg.scan.values = parse_values(spec).map_err(invar::Error::InvalidConfig)?;
            }
            cli::cmd_scan(&cfg, axis)
        }
        Command::Baseline { method } => cli::cmd_baseline(&cfg, method),
        Command::Export => cli::cmd_export(&cfg),
        Command::Stability { points } => cli::cmd_stability(&cfg, *points),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
