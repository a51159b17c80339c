//! Discrete-element elastodynamics on structured polyhedral lattices.
//!
//! A solid is discretized into rigid polyhedral particles linked across shared
//! interfaces. Link forces and torques derive from a discrete Hamiltonian whose
//! potential reproduces linear elasticity (Young modulus `E`, Poisson ratio
//! `nu` anywhere in (-1, 0.5)), so the assembled system is a constrained
//! Hamiltonian dynamics. Time integration uses the RATTLE scheme with the
//! rotation constraint solved per particle through a quaternion fixed-point
//! iteration, which preserves linear and angular momentum exactly and keeps
//! the energy bounded over long runs.
//!
//! Modules:
//! - [`mesh`]: lattice generators (boxes, mapped shells) and per-link geometry
//! - [`state`]: kinematic state arrays and checkpoints
//! - [`mechanics`]: interface kinematics, forces, torques, potential energies
//! - [`integrator`]: RATTLE stepping, rotation solve, CFL margins
//! - [`diagnostics`]: energies, momenta, probes, convergence measurements
//! - [`scenario`]: JSON-configured runs, canned demos, CSV/VTK output

pub mod diagnostics;
pub mod error;
pub mod integrator;
pub mod math;
pub mod mechanics;
pub mod mesh;
pub mod scenario;
pub mod state;

pub use error::Error;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
