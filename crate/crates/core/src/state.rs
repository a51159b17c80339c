//! Evolving kinematic state in the staggered form used by the time stepper.
//!
//! Rotations are stored as full 3x3 matrices relative to the initial
//! orientation (`q = Id` at rest), because the update is a matrix product
//! `q <- q (Id + dt Z)`. Momenta live at half steps: `t_half` is the linear
//! momentum T^{n-1/2} and `z_half` the incremental rotation matrix Z^{n-1/2}
//! expressed in the particle's principal frame.

use crate::error::Error;
use crate::math::{skew, unskew};
use crate::mesh::{Mesh, ParticleGeom};
use crate::Result;
use nalgebra::{Matrix3, Vector3};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticleState {
    /// Center of mass (m).
    pub x: Vector3<f64>,
    /// Rotation relative to the initial orientation.
    pub q: Matrix3<f64>,
    /// Linear momentum at the preceding half step (kg m/s).
    pub t_half: Vector3<f64>,
    /// Principal-frame angular update matrix at the preceding half step (1/s).
    pub z_half: Matrix3<f64>,
}

pub type StateArray = Vec<ParticleState>;

/// Rotation mapping the particle's principal body frame to the world frame.
#[inline]
pub fn solver_rotation(geom: &ParticleGeom, state: &ParticleState) -> Matrix3<f64> {
    state.q * geom.axes
}

/// All particles at rest in the reference configuration.
pub fn init_rest(mesh: &Mesh) -> StateArray {
    mesh.particles
        .iter()
        .map(|p| ParticleState {
            x: p.x0,
            q: Matrix3::identity(),
            t_half: Vector3::zeros(),
            z_half: Matrix3::zeros(),
        })
        .collect()
}

/// Sets per-particle velocity and angular velocity (world frame).
///
/// `z_half` becomes the principal-frame form Qs^T j(Omega) Qs, so the stored
/// matrix is exactly skew and round-trips through [`angular_velocity`].
pub fn set_initial_velocity(
    mesh: &Mesh,
    states: &mut StateArray,
    mut velocity: impl FnMut(usize) -> (Vector3<f64>, Vector3<f64>),
) {
    for (geom, state) in mesh.particles.iter().zip(states.iter_mut()) {
        let (v, omega) = velocity(geom.id);
        let qs = solver_rotation(geom, state);
        state.t_half = geom.mass * v;
        state.z_half = qs.transpose() * skew(&omega) * qs;
    }
}

/// World-frame angular velocity recovered from the skew part of `z_half`.
pub fn angular_velocity(geom: &ParticleGeom, state: &ParticleState) -> Vector3<f64> {
    let qs = solver_rotation(geom, state);
    let w = 0.5 * (state.z_half - state.z_half.transpose());
    unskew(&(qs * w * qs.transpose()))
}

/// World-frame spin angular momentum R_I Omega_I of one particle, in the
/// discrete form j^-1(Qs (D Z - Z^T D) Qs^T) that the stepper transports
/// exactly between steps.
pub fn spin_momentum(geom: &ParticleGeom, state: &ParticleState) -> Vector3<f64> {
    let qs = solver_rotation(geom, state);
    let d = Matrix3::from_diagonal(&geom.d);
    let m = d * state.z_half - state.z_half.transpose() * d;
    unskew(&(qs * m * qs.transpose()))
}

/// Whole-step kinematic quantities derived from a state with skew `z_half`.
#[derive(Debug, Clone)]
pub struct DerivedKinematics {
    pub velocity: Vector3<f64>,
    pub omega: Vector3<f64>,
    /// Rotational momentum matrix P = j(Omega) Qs D.
    pub momentum_matrix: Matrix3<f64>,
    /// World-frame inertia R = Qs R0 Qs^T.
    pub world_inertia: Matrix3<f64>,
}

impl DerivedKinematics {
    pub fn new(geom: &ParticleGeom, state: &ParticleState) -> Self {
        let qs = solver_rotation(geom, state);
        let omega = angular_velocity(geom, state);
        let d = Matrix3::from_diagonal(&geom.d);
        let r0 = Matrix3::from_diagonal(&geom.inertia);
        DerivedKinematics {
            velocity: state.t_half / geom.mass,
            omega,
            momentum_matrix: skew(&omega) * qs * d,
            world_inertia: qs * r0 * qs.transpose(),
        }
    }
}

/// Writes states as CSV with 17 significant digits; the format round-trips
/// exactly (write -> read -> write is byte-identical).
pub fn write_checkpoint(states: &StateArray, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str("x0,x1,x2,q00,q01,q02,q10,q11,q12,q20,q21,q22,");
    out.push_str("t0,t1,t2,z00,z01,z02,z10,z11,z12,z20,z21,z22\n");
    for s in states {
        let mut fields: Vec<String> = Vec::with_capacity(24);
        for k in 0..3 {
            fields.push(format!("{:.16e}", s.x[k]));
        }
        for r in 0..3 {
            for c in 0..3 {
                fields.push(format!("{:.16e}", s.q[(r, c)]));
            }
        }
        for k in 0..3 {
            fields.push(format!("{:.16e}", s.t_half[k]));
        }
        for r in 0..3 {
            for c in 0..3 {
                fields.push(format!("{:.16e}", s.z_half[(r, c)]));
            }
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    file.write_all(out.as_bytes())
        .map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn read_checkpoint(path: &Path) -> Result<StateArray> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let reader = BufReader::new(file);
    let mut states = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path.display().to_string(), e))?;
        if lineno == 0 || line.trim().is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("checkpoint line {}: {e}", lineno + 1)))
            })
            .collect::<Result<_>>()?;
        if vals.len() != 24 {
            return Err(Error::Config(format!(
                "checkpoint line {}: expected 24 fields, got {}",
                lineno + 1,
                vals.len()
            )));
        }
        let mut q = Matrix3::zeros();
        let mut z = Matrix3::zeros();
        for r in 0..3 {
            for c in 0..3 {
                q[(r, c)] = vals[3 + 3 * r + c];
                z[(r, c)] = vals[15 + 3 * r + c];
            }
        }
        states.push(ParticleState {
            x: Vector3::new(vals[0], vals[1], vals[2]),
            q,
            t_half: Vector3::new(vals[12], vals[13], vals[14]),
            z_half: z,
        });
    }
    Ok(states)
}
