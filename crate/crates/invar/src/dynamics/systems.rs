//! The five test systems: equations of motion and energy functions.
//!
//! State layout is always generalized coordinates first, then velocities,
//! so N = 2kd. All systems are autonomous. Natural units, G = 1.

use serde::{Deserialize, Serialize};

/// Pendulum constants: unit masses and lengths, g = 10 reproduces the
/// energy coefficients -20 cos(theta1) - 10 cos(theta2) + ...
pub const PENDULUM_GRAVITY: f64 = 10.0;

/// Default three-body mass.
pub const THREE_BODY_MASS: f64 = 5.0e6;

/// Abort integration when any pairwise separation falls below this.
pub const SINGULARITY_RADIUS: f64 = 1e-6;

/// A pairwise close encounter the integrator cannot step across.
#[derive(Debug, Clone, Copy)]
pub struct CloseEncounter {
    pub pair: (usize, usize),
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum System {
    Harmonic,
    Kepler {
        /// Force-law exponent perturbation: |F| = r^-(2 + eps).
        #[serde(default)]
        eps: f64,
    },
    Pendulum,
    Mirror,
    ThreeBody {
        #[serde(default = "default_mass")]
        mass: f64,
    },
}

fn default_mass() -> f64 {
    THREE_BODY_MASS
}

impl System {
    pub fn kepler() -> Self {
        System::Kepler { eps: 0.0 }
    }

    pub fn three_body() -> Self {
        System::ThreeBody { mass: THREE_BODY_MASS }
    }

    pub fn name(&self) -> &'static str {
        match self {
            System::Harmonic => "harmonic",
            System::Kepler { .. } => "kepler",
            System::Pendulum => "pendulum",
            System::Mirror => "mirror",
            System::ThreeBody { .. } => "threebody",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "harmonic" => Some(System::Harmonic),
            "kepler" => Some(System::kepler()),
            "pendulum" => Some(System::Pendulum),
            "mirror" => Some(System::Mirror),
            "threebody" => Some(System::three_body()),
            _ => None,
        }
    }

    /// Phase-space dimension N = 2kd.
    pub fn dim(&self) -> usize {
        match self {
            System::Harmonic => 2,
            System::ThreeBody { .. } => 12,
            _ => 4,
        }
    }

    /// Ground-truth number of conservation laws.
    pub fn ground_truth_laws(&self) -> usize {
        match self {
            System::Kepler { .. } => 3,
            System::ThreeBody { .. } => 6,
            _ => 1,
        }
    }

    /// Integration step size used for the headline runs.
    pub fn default_dt(&self) -> f64 {
        match self {
            System::Harmonic | System::Kepler { .. } => 1e-2,
            _ => 1e-3,
        }
    }

    /// Number of integration steps used for the headline runs.
    pub fn default_steps(&self) -> usize {
        match self {
            System::Harmonic => 1_000,
            System::Kepler { .. } | System::Mirror => 100_000,
            System::Pendulum => 1_000_000,
            System::ThreeBody { .. } => 200_000,
        }
    }

    /// Documented default initial conditions (all overridable in config).
    pub fn default_initial_state(&self) -> Vec<f64> {
        match self {
            System::Harmonic => vec![1.0, 0.0],
            // Eccentric orbit; a circular one satisfies accidental linear
            // relations (xdot = -y, ydot = x) and would lose two dimensions.
            System::Kepler { .. } => vec![1.0, 0.0, 0.0, 1.2],
            // 120 degrees on both arms, at rest: chaotic regime.
            System::Pendulum => {
                let theta = 2.0 * std::f64::consts::FRAC_PI_3;
                vec![theta, theta, 0.0, 0.0]
            }
            System::Mirror => {
                vec![0.3, 0.3, std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2]
            }
            System::ThreeBody { mass } => {
                hierarchical_triple(*mass, &HierarchicalTriple::default())
            }
        }
    }

    /// Component names in state order, for file headers and formulas.
    pub fn component_names(&self) -> Vec<String> {
        match self {
            System::Harmonic => vec!["x".into(), "xdot".into()],
            System::Kepler { .. } => {
                vec!["x".into(), "y".into(), "xdot".into(), "ydot".into()]
            }
            System::Pendulum => vec![
                "theta1".into(),
                "theta2".into(),
                "theta1dot".into(),
                "theta2dot".into(),
            ],
            System::Mirror => vec!["rho".into(), "z".into(), "rhodot".into(), "zdot".into()],
            System::ThreeBody { .. } => {
                let mut names: Vec<String> =
                    (1..=3).flat_map(|i| [format!("x{i}"), format!("y{i}")]).collect();
                names.extend((1..=3).flat_map(|i| [format!("x{i}dot"), format!("y{i}dot")]));
                names
            }
        }
    }

    /// Right-hand side dx/dt = f(x). Fails on a close encounter or a
    /// non-finite state.
    pub fn eom(&self, x: &[f64], dxdt: &mut [f64]) -> Result<(), CloseEncounter> {
        debug_assert_eq!(x.len(), self.dim());
        debug_assert_eq!(dxdt.len(), self.dim());
        match self {
            System::Harmonic => {
                dxdt[0] = x[1];
                dxdt[1] = -x[0];
            }
            System::Kepler { eps } => {
                let r2 = x[0] * x[0] + x[1] * x[1];
                let r = r2.sqrt();
                if r < SINGULARITY_RADIUS {
                    return Err(CloseEncounter { pair: (0, 1), radius: r });
                }
                // |F| = r^-(2+eps), directed at the center.
                let f_over_r = r.powf(-(3.0 + eps));
                dxdt[0] = x[2];
                dxdt[1] = x[3];
                dxdt[2] = -x[0] * f_over_r;
                dxdt[3] = -x[1] * f_over_r;
            }
            System::Pendulum => {
                let (t1, t2, w1, w2) = (x[0], x[1], x[2], x[3]);
                let g = PENDULUM_GRAVITY;
                let d = t1 - t2;
                let (sd, cd) = d.sin_cos();
                let denom = 3.0 - (2.0 * d).cos();
                dxdt[0] = w1;
                dxdt[1] = w2;
                dxdt[2] = (-3.0 * g * t1.sin() - g * (t1 - 2.0 * t2).sin()
                    - 2.0 * sd * (w2 * w2 + w1 * w1 * cd))
                    / denom;
                dxdt[3] =
                    2.0 * sd * (2.0 * w1 * w1 + 2.0 * g * t1.cos() + w2 * w2 * cd) / denom;
            }
            System::Mirror => {
                let (rho, z) = (x[0], x[1]);
                dxdt[0] = x[2];
                dxdt[1] = x[3];
                dxdt[2] = -rho * (1.0 + z * z);
                dxdt[3] = -z / 5.0 - rho * rho * z;
            }
            System::ThreeBody { mass } => {
                dxdt[..6].copy_from_slice(&x[6..12]);
                dxdt[6..].fill(0.0);
                for i in 0..3 {
                    for j in (i + 1)..3 {
                        let dx = x[2 * i] - x[2 * j];
                        let dy = x[2 * i + 1] - x[2 * j + 1];
                        let r2 = dx * dx + dy * dy;
                        let r = r2.sqrt();
                        if r < SINGULARITY_RADIUS {
                            return Err(CloseEncounter { pair: (i, j), radius: r });
                        }
                        let f = mass / (r2 * r);
                        dxdt[6 + 2 * i] -= f * dx;
                        dxdt[6 + 2 * i + 1] -= f * dy;
                        dxdt[6 + 2 * j] += f * dx;
                        dxdt[6 + 2 * j + 1] += f * dy;
                    }
                }
            }
        }
        Ok(())
    }

    /// Total energy. For the perturbed Kepler force the potential generalizes
    /// to -r^-(1+eps)/(1+eps), which reduces to -1/r at eps = 0.
    pub fn hamiltonian(&self, x: &[f64]) -> f64 {
        match self {
            System::Harmonic => 0.5 * (x[0] * x[0] + x[1] * x[1]),
            System::Kepler { eps } => {
                let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
                let kinetic = 0.5 * (x[2] * x[2] + x[3] * x[3]);
                kinetic - r.powf(-(1.0 + eps)) / (1.0 + eps)
            }
            System::Pendulum => {
                let (t1, t2, w1, w2) = (x[0], x[1], x[2], x[3]);
                -20.0 * t1.cos() - 10.0 * t2.cos()
                    + w1 * w1
                    + 0.5 * w2 * w2
                    + w1 * w2 * (t1 - t2).cos()
            }
            System::Mirror => {
                let (rho, z, rd, zd) = (x[0], x[1], x[2], x[3]);
                0.5 * (rd * rd + zd * zd)
                    + 0.5 * (rho * rho + z * z / 5.0 + rho * rho * z * z)
            }
            System::ThreeBody { mass } => {
                let mut kinetic = 0.0;
                for i in 0..3 {
                    let vx = x[6 + 2 * i];
                    let vy = x[6 + 2 * i + 1];
                    kinetic += 0.5 * mass * (vx * vx + vy * vy);
                }
                let mut potential = 0.0;
                for i in 0..3 {
                    for j in (i + 1)..3 {
                        let dx = x[2 * i] - x[2 * j];
                        let dy = x[2 * i + 1] - x[2 * j + 1];
                        potential -= mass * mass / (dx * dx + dy * dy).sqrt();
                    }
                }
                kinetic + potential
            }
        }
    }

    /// Per-coordinate inertia relating velocity to conjugate momentum
    /// (p = m v). Unit for all systems except the three-body masses.
    pub fn inertia(&self) -> f64 {
        match self {
            System::ThreeBody { mass } => *mass,
            _ => 1.0,
        }
    }

    /// Velocities are canonical momenta (up to the constant inertia) for all
    /// systems except the pendulum, whose angular velocities are not
    /// conjugate to the angles.
    pub fn velocities_are_canonical(&self) -> bool {
        !matches!(self, System::Pendulum)
    }

    /// Fold circular coordinates back into (-pi, pi]. The pendulum energy
    /// and equations of motion are periodic in both angles, so this is
    /// exact; without it an over-the-top trajectory winds across many
    /// periods and the covariance no longer reflects the state manifold.
    pub fn wrap_in_place(&self, x: &mut [f64]) {
        if let System::Pendulum = self {
            for angle in &mut x[..2] {
                if angle.abs() > std::f64::consts::PI {
                    *angle -= 2.0 * std::f64::consts::PI * (*angle / (2.0 * std::f64::consts::PI)).round();
                }
            }
        }
    }
}

/// Geometry of the default hierarchical triple: a tight eccentric binary
/// (bodies 1, 2) orbited by a distant third body, total momentum zero,
/// center of mass at the origin. Both orbits start at apocenter.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HierarchicalTriple {
    pub a_inner: f64,
    pub e_inner: f64,
    pub a_outer: f64,
    pub e_outer: f64,
    /// Angle between the inner and outer apsidal lines at t = 0.
    pub phase: f64,
}

impl Default for HierarchicalTriple {
    fn default() -> Self {
        HierarchicalTriple {
            a_inner: 80.0,
            e_inner: 0.35,
            a_outer: 320.0,
            e_outer: 0.10,
            phase: 1.0,
        }
    }
}

/// Build the 12-component state for the triple. G = 1 throughout.
pub fn hierarchical_triple(mass: f64, geom: &HierarchicalTriple) -> Vec<f64> {
    let (sin_p, cos_p) = geom.phase.sin_cos();

    // Inner pair: relative orbit at apocenter, tangential relative velocity.
    let mu_in = 2.0 * mass;
    let r_in = geom.a_inner * (1.0 + geom.e_inner);
    let v_in = (mu_in * (2.0 / r_in - 1.0 / geom.a_inner)).sqrt();
    let rel_in = [r_in * cos_p, r_in * sin_p];
    let vel_in = [-v_in * sin_p, v_in * cos_p];

    // Outer orbit: third body relative to the binary barycenter.
    let mu_out = 3.0 * mass;
    let r_out = geom.a_outer * (1.0 + geom.e_outer);
    let v_out = (mu_out * (2.0 / r_out - 1.0 / geom.a_outer)).sqrt();
    let rel_out = [r_out, 0.0];
    let vel_out = [0.0, v_out];

    // Mass fractions: binary barycenter carries 2m, third body m.
    let mut state = vec![0.0; 12];
    let (bx, by) = (-rel_out[0] / 3.0, -rel_out[1] / 3.0);
    let (bvx, bvy) = (-vel_out[0] / 3.0, -vel_out[1] / 3.0);
    let (tx, ty) = (2.0 * rel_out[0] / 3.0, 2.0 * rel_out[1] / 3.0);
    let (tvx, tvy) = (2.0 * vel_out[0] / 3.0, 2.0 * vel_out[1] / 3.0);

    // Bodies 1 and 2 split the inner relative orbit evenly.
    state[0] = bx + rel_in[0] / 2.0;
    state[1] = by + rel_in[1] / 2.0;
    state[2] = bx - rel_in[0] / 2.0;
    state[3] = by - rel_in[1] / 2.0;
    state[4] = tx;
    state[5] = ty;
    state[6] = bvx + vel_in[0] / 2.0;
    state[7] = bvy + vel_in[1] / 2.0;
    state[8] = bvx - vel_in[0] / 2.0;
    state[9] = bvy - vel_in[1] / 2.0;
    state[10] = tvx;
    state[11] = tvy;
    state
}
