//! Trajectory generation: the five test systems and a fixed-step RK4 scheme.

mod systems;

pub use systems::{
    hierarchical_triple, CloseEncounter, HierarchicalTriple, System, PENDULUM_GRAVITY,
    SINGULARITY_RADIUS, THREE_BODY_MASS,
};

use crate::error::{Error, Result};
use crate::points::Points;


/// A time-ordered sampling of one solution of a system.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub system: System,
    pub x0: Vec<f64>,
    /// Integration step size.
    pub dt: f64,
    /// Every `store_every`-th integration step is kept.
    pub store_every: usize,
    pub times: Vec<f64>,
    pub points: Points,
}

impl Trajectory {
    /// Total energy drift relative to the starting point,
    /// max_i |H(x_i) - H(x_0)| / max(1, |H(x_0)|).
    pub fn energy_drift(&self) -> f64 {
        let h0 = self.system.hamiltonian(self.points.row(0));
        let scale = h0.abs().max(1.0);
        self.points
            .rows()
            .map(|x| (self.system.hamiltonian(x) - h0).abs() / scale)
            .fold(0.0, f64::max)
    }

    /// Stored points whose time lies in [t0, t1].
    pub fn window(&self, t0: f64, t1: f64) -> Points {
        let mut out = Points::new(self.points.dim());
        for (i, &t) in self.times.iter().enumerate() {
            if t >= t0 && t <= t1 {
                out.push(self.points.row(i));
            }
        }
        out
    }

    pub fn duration(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }
}

/// One classic RK4 update. `dt = 0` is the identity.
pub fn rk4_step(system: &System, x: &[f64], t: f64, dt: f64) -> Result<Vec<f64>> {
    let n = system.dim();
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x.len() });
    }
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut stage = vec![0.0; n];

    let sing = |e: CloseEncounter| Error::IntegrationSingularity {
        step: 0,
        time: t,
        pair: e.pair,
        radius: e.radius,
    };

    system.eom(x, &mut k1).map_err(sing)?;
    for i in 0..n {
        stage[i] = x[i] + 0.5 * dt * k1[i];
    }
    system.eom(&stage, &mut k2).map_err(sing)?;
    for i in 0..n {
        stage[i] = x[i] + 0.5 * dt * k2[i];
    }
    system.eom(&stage, &mut k3).map_err(sing)?;
    for i in 0..n {
        stage[i] = x[i] + dt * k3[i];
    }
    system.eom(&stage, &mut k4).map_err(sing)?;

    let mut next = vec![0.0; n];
    for i in 0..n {
        next[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    if next.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteState { step: 0, time: t });
    }
    Ok(next)
}

/// Integrate `n_steps` steps from `x0`, keeping every point.
pub fn simulate(system: &System, x0: &[f64], dt: f64, n_steps: usize) -> Result<Trajectory> {
    simulate_strided(system, x0, dt, n_steps, 1)
}

/// Integrate `n_steps` steps, storing every `store_every`-th point
/// (including the initial one). Storage thinning keeps long parameter scans
/// within memory without changing the dynamics.
pub fn simulate_strided(
    system: &System,
    x0: &[f64],
    dt: f64,
    n_steps: usize,
    store_every: usize,
) -> Result<Trajectory> {
    if n_steps < 1 {
        return Err(Error::InvalidConfig("n_steps must be at least 1".into()));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidConfig("dt must be positive".into()));
    }
    if store_every < 1 {
        return Err(Error::InvalidConfig("store_every must be at least 1".into()));
    }
    let n = system.dim();
    if x0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x0.len() });
    }

    let stored = n_steps / store_every + 1;
    let mut points = Points::with_capacity(n, stored);
    let mut times = Vec::with_capacity(stored);
    let mut x = x0.to_vec();
    points.push(&x);
    times.push(0.0);

    for step in 1..=n_steps {
        let t = (step - 1) as f64 * dt;
        x = rk4_step(system, &x, t, dt).map_err(|e| match e {
            Error::IntegrationSingularity { time, pair, radius, .. } => {
                Error::IntegrationSingularity { step, time, pair, radius }
            }
            Error::NonFiniteState { time, .. } => Error::NonFiniteState { step, time },
            other => other,
        })?;
        system.wrap_in_place(&mut x);
        if step % store_every == 0 {
            points.push(&x);
            times.push(step as f64 * dt);
        }
    }

    Ok(Trajectory {
        system: *system,
        x0: x0.to_vec(),
        dt,
        store_every,
        times,
        points,
    })
}

/// Headline-run trajectory for a system: default initial conditions, step
/// size and step count, stored with the given stride.
pub fn default_trajectory(system: &System, store_every: usize) -> Result<Trajectory> {
    simulate_strided(
        system,
        &system.default_initial_state(),
        system.default_dt(),
        system.default_steps(),
        store_every,
    )
}

/// Linear-drift-free check quantities for tests: center-of-mass coordinates
/// and velocities of the three-body system.
pub fn three_body_com(x: &[f64]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for c in 0..2 {
        out[c] = (x[c] + x[2 + c] + x[4 + c]) / 3.0;
        out[2 + c] = (x[6 + c] + x[8 + c] + x[10 + c]) / 3.0;
    }
    out
}
