//! Run configuration: one TOML file, overridable by flags and environment.
//! Every output directory receives a manifest embedding the full resolved
//! configuration, the seed and the tool version, which is enough to
//! reproduce the run bit for bit.

use crate::dynamics::{self, HierarchicalTriple, System, Trajectory};
use crate::erd::ErdConfig;
use crate::error::{Error, Result};
use crate::nn::Activation;
use crate::pullnet::TrainConfig;
use crate::sampler::SampleMode;
use crate::scan::ScanSettings;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Root seed; every stochastic subtask derives its own stream.
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Worker threads (0 = one per core).
    pub jobs: usize,
    pub system: SystemSection,
    pub preprocess: PreprocessSection,
    pub pullnet: PullnetSection,
    pub sampler: SamplerSection,
    pub erd: ErdSection,
    pub scan: ScanSection,
    pub export: ExportSection,
    pub baseline: BaselineSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            out_dir: PathBuf::from("out"),
            jobs: 0,
            system: SystemSection::default(),
            preprocess: PreprocessSection::default(),
            pullnet: PullnetSection::default(),
            sampler: SamplerSection::default(),
            erd: ErdSection::default(),
            scan: ScanSection::default(),
            export: ExportSection::default(),
            baseline: BaselineSection::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemSection {
    pub name: String,
    /// Kepler force-law perturbation.
    pub eps: f64,
    /// Three-body mass.
    pub mass: f64,
    /// Initial state override.
    pub x0: Option<Vec<f64>>,
    pub dt: Option<f64>,
    pub steps: Option<usize>,
    pub store_every: usize,
    /// Geometry override for the default hierarchical triple.
    pub triple: Option<HierarchicalTriple>,
}

impl Default for SystemSection {
    fn default() -> Self {
        SystemSection {
            name: "harmonic".into(),
            eps: 0.0,
            mass: dynamics::THREE_BODY_MASS,
            x0: None,
            dt: None,
            steps: None,
            store_every: 1,
            triple: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PreprocessSection {
    pub eps_p: f64,
    pub eps_n: f64,
    pub reduce: bool,
}

impl Default for PreprocessSection {
    fn default() -> Self {
        PreprocessSection {
            eps_p: crate::preprocess::DEFAULT_EPS_P,
            eps_n: crate::preprocess::DEFAULT_EPS_N,
            reduce: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PullnetSection {
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub learning_rate: f64,
    pub steps: usize,
    pub batch: usize,
}

impl Default for PullnetSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        PullnetSection {
            hidden: t.hidden,
            activation: t.activation,
            learning_rate: t.learning_rate,
            steps: t.steps,
            batch: t.batch,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplerSection {
    /// Walk-pull steps per cloud.
    pub samples: usize,
    pub mode: SampleMode,
    pub start_index: Option<usize>,
}

impl Default for SamplerSection {
    fn default() -> Self {
        SamplerSection { samples: 1000, mode: SampleMode::Jump, start_index: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ErdSection {
    /// Explicit grid; when absent the log-spaced one below is used.
    pub grid: Option<Vec<f64>>,
    pub grid_lo_exp: f64,
    pub grid_hi_exp: f64,
    pub grid_points: usize,
}

impl Default for ErdSection {
    fn default() -> Self {
        ErdSection { grid: None, grid_lo_exp: -2.5, grid_hi_exp: 0.5, grid_points: 13 }
    }
}

impl ErdSection {
    pub fn noise_grid(&self) -> Vec<f64> {
        match &self.grid {
            Some(g) => g.clone(),
            None => crate::erd::log_grid(self.grid_lo_exp, self.grid_hi_exp, self.grid_points),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanSection {
    /// 1D axis values (degrees for the pendulum, speeds for the mirror).
    pub values: Vec<f64>,
    /// Mirror scan launch position.
    pub rho0: f64,
    pub z0: f64,
    /// Kepler breakdown grid.
    pub eps: Vec<f64>,
    pub orbits: Vec<f64>,
    /// Cumulative time windows (t0, t1).
    pub windows: Vec<(f64, f64)>,
    pub noise_scale: f64,
    pub n_starts: usize,
    pub time_factor: f64,
    pub max_stored_points: usize,
}

impl Default for ScanSection {
    fn default() -> Self {
        ScanSection {
            values: Vec::new(),
            rho0: 0.0,
            z0: 0.0,
            eps: Vec::new(),
            orbits: Vec::new(),
            windows: Vec::new(),
            noise_scale: crate::scan::SCAN_NOISE_SCALE,
            n_starts: 3,
            time_factor: 1.0,
            max_stored_points: 200_000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExportSection {
    pub target_a: f64,
    pub target_b: f64,
    pub x0_a: Option<Vec<f64>>,
    pub x0_b: Option<Vec<f64>>,
    pub x0_c: Option<Vec<f64>>,
}

impl Default for ExportSection {
    fn default() -> Self {
        ExportSection { target_a: 1.0, target_b: 2.0, x0_a: None, x0_b: None, x0_c: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BaselineSection {
    /// Bottleneck widths to try; empty means 1..=N.
    pub s_range: Vec<usize>,
    pub threshold: f64,
    pub restarts: usize,
    /// Pair-count subsample size.
    pub max_points: usize,
    /// Manual fit window for the pair-count slope.
    pub window: Option<(f64, f64)>,
}

impl Default for BaselineSection {
    fn default() -> Self {
        BaselineSection {
            s_range: Vec::new(),
            threshold: 1e-3,
            restarts: 2,
            max_points: 1000,
            window: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let cfg: RunConfig = toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Environment overrides (INVAR_SEED, INVAR_OUT, INVAR_JOBS) sit between
    /// the config file and explicit flags.
    pub fn apply_env(&mut self) -> Result<()> {
        if let Ok(v) = std::env::var("INVAR_SEED") {
            self.seed = v.parse().map_err(|_| {
                Error::InvalidConfig(format!("INVAR_SEED is not an integer: {v}"))
            })?;
        }
        if let Ok(v) = std::env::var("INVAR_OUT") {
            self.out_dir = PathBuf::from(v);
        }
        if let Ok(v) = std::env::var("INVAR_JOBS") {
            self.jobs = v.parse().map_err(|_| {
                Error::InvalidConfig(format!("INVAR_JOBS is not an integer: {v}"))
            })?;
        }
        Ok(())
    }

    /// Apply a `--param key=value` override.
    pub fn apply_param(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |k: &str, v: &str| {
            Error::InvalidConfig(format!("cannot parse --param {k}={v}"))
        };
        match key {
            "eps" => self.system.eps = value.parse().map_err(|_| bad(key, value))?,
            "mass" => self.system.mass = value.parse().map_err(|_| bad(key, value))?,
            "dt" => self.system.dt = Some(value.parse().map_err(|_| bad(key, value))?),
            "steps" => {
                self.system.steps = Some(value.parse().map_err(|_| bad(key, value))?)
            }
            "store_every" => {
                self.system.store_every = value.parse().map_err(|_| bad(key, value))?
            }
            "noise_scale" => {
                self.scan.noise_scale = value.parse().map_err(|_| bad(key, value))?
            }
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown --param key `{other}` (known: eps, mass, dt, steps, \
                     store_every, noise_scale)"
                )))
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if System::from_name(&self.system.name).is_none() {
            return Err(Error::InvalidConfig(format!(
                "unknown system `{}` (harmonic, kepler, pendulum, mirror, threebody)",
                self.system.name
            )));
        }
        if !(self.preprocess.eps_p > 0.0 && self.preprocess.eps_p < 1.0) {
            return Err(Error::InvalidConfig("preprocess.eps_p must be in (0, 1)".into()));
        }
        if self.preprocess.eps_n < 0.0 {
            return Err(Error::InvalidConfig("preprocess.eps_n must be >= 0".into()));
        }
        if self.pullnet.steps == 0 || self.pullnet.batch == 0 {
            return Err(Error::InvalidConfig("pullnet.steps and batch must be >= 1".into()));
        }
        if !(self.pullnet.learning_rate > 0.0) {
            return Err(Error::InvalidConfig("pullnet.learning_rate must be > 0".into()));
        }
        if self.pullnet.hidden.is_empty() {
            return Err(Error::InvalidConfig("pullnet.hidden must be non-empty".into()));
        }
        if self.sampler.samples == 0 {
            return Err(Error::InvalidConfig("sampler.samples must be >= 1".into()));
        }
        if self.erd.grid_points < 2 {
            return Err(Error::InvalidConfig("erd.grid_points must be >= 2".into()));
        }
        if let Some(grid) = &self.erd.grid {
            if grid.iter().any(|&l| !(l > 0.0)) {
                return Err(Error::InvalidConfig("erd.grid scales must be positive".into()));
            }
        }
        if self.scan.n_starts == 0 {
            return Err(Error::InvalidConfig("scan.n_starts must be >= 1".into()));
        }
        if !(self.scan.time_factor > 0.0) {
            return Err(Error::InvalidConfig("scan.time_factor must be > 0".into()));
        }
        if self.scan.max_stored_points < 16 {
            return Err(Error::InvalidConfig("scan.max_stored_points too small".into()));
        }
        if self.export.target_a == self.export.target_b {
            return Err(Error::InvalidConfig("export targets must differ".into()));
        }
        if self.baseline.max_points < 2 {
            return Err(Error::InvalidConfig("baseline.max_points must be >= 2".into()));
        }
        Ok(())
    }

    /// The configured dynamical system.
    pub fn system(&self) -> Result<System> {
        let mut sys = System::from_name(&self.system.name)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown system {}", self.system.name)))?;
        match &mut sys {
            System::Kepler { eps } => *eps = self.system.eps,
            System::ThreeBody { mass } => *mass = self.system.mass,
            _ => {}
        }
        Ok(sys)
    }

    /// Initial state: explicit override, configured triple geometry, or the
    /// system default.
    pub fn initial_state(&self, system: &System) -> Result<Vec<f64>> {
        if let Some(x0) = &self.system.x0 {
            if x0.len() != system.dim() {
                return Err(Error::DimensionMismatch { expected: system.dim(), got: x0.len() });
            }
            return Ok(x0.clone());
        }
        if let (System::ThreeBody { mass }, Some(geom)) = (system, &self.system.triple) {
            return Ok(dynamics::hierarchical_triple(*mass, geom));
        }
        Ok(system.default_initial_state())
    }

    /// Simulate the configured trajectory.
    pub fn trajectory(&self) -> Result<Trajectory> {
        let system = self.system()?;
        let x0 = self.initial_state(&system)?;
        let dt = self.system.dt.unwrap_or_else(|| system.default_dt());
        let steps = self.system.steps.unwrap_or_else(|| system.default_steps());
        dynamics::simulate_strided(&system, &x0, dt, steps, self.system.store_every)
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            hidden: self.pullnet.hidden.clone(),
            activation: self.pullnet.activation,
            learning_rate: self.pullnet.learning_rate,
            steps: self.pullnet.steps,
            batch: self.pullnet.batch,
            noise_scale: crate::scan::SCAN_NOISE_SCALE,
            seed: self.seed,
        }
    }

    pub fn erd_config(&self) -> ErdConfig {
        ErdConfig {
            train: self.train_config(),
            samples: self.sampler.samples,
            mode: self.sampler.mode,
            start_index: self.sampler.start_index,
        }
    }

    pub fn scan_settings(&self) -> ScanSettings {
        ScanSettings {
            noise_scale: self.scan.noise_scale,
            erd: self.erd_config(),
            n_starts: self.scan.n_starts,
            eps_p: self.preprocess.eps_p,
            max_stored_points: self.scan.max_stored_points,
            time_factor: self.scan.time_factor,
        }
    }
}

/// Written into every output directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub config_hash: String,
    pub config: RunConfig,
}

pub fn write_manifest(config: &RunConfig, command: &str, dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        seed: config.seed,
        config_hash: crate::io::config_hash(config)?,
        config: config.clone(),
    };
    let path = dir.join("manifest.json");
    crate::io::write_json(&manifest, &path)?;
    Ok(path)
}
