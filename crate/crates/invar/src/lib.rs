//! Counting conserved quantities of dynamical systems from trajectory data.
//!
//! The pipeline: simulate (or load) a trajectory, prewhiten it and strip
//! linear conservation laws, train a pull network per noise scale, sample
//! the permissible state manifold with walk-pull Monte Carlo, and read the
//! manifold codimension off the explained-ratio diagram. Parameter scans
//! use the smooth count `n_eff` as an order parameter to locate phase
//! transitions, approximate conservation laws and periodic orbits.

pub mod baselines;
pub mod cli;
pub mod config;
pub mod dynamics;
pub mod erd;
pub mod error;
pub mod export;
pub mod io;
pub mod nn;
pub mod pullnet;
pub mod linalg;
pub mod points;
pub mod preprocess;
pub mod sampler;
pub mod rng;
pub mod scan;
pub mod toys;

pub use error::{Error, Result};
pub use points::Points;
