//! Output writers: CSV series, legacy ASCII VTK snapshots, summary JSON.
//!
//! All floating-point series are written with 17 significant digits so runs
//! are byte-reproducible and values round-trip exactly.

use crate::diagnostics::{EnergyReport, ProbeRecord};
use crate::error::Error;
use crate::mechanics::volumetric_strain;
use crate::mesh::Mesh;
use crate::state::{angular_velocity, StateArray};
use crate::Result;
use nalgebra::Vector3;
use std::fmt::Write as _;
use std::path::Path;

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path.display().to_string(), e))
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_energy_csv(reports: &[EnergyReport], path: &Path) -> Result<()> {
    let mut out = String::from("t,kinetic_trans,kinetic_rot,u_link,u_vol,u_flex,total\n");
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt(r.time),
            fmt(r.kinetic_trans),
            fmt(r.kinetic_rot),
            fmt(r.u_link),
            fmt(r.u_vol),
            fmt(r.u_flex),
            fmt(r.total)
        );
    }
    write_file(path, &out)
}

pub fn write_momentum_csv(
    rows: &[(f64, Vector3<f64>, Vector3<f64>)],
    path: &Path,
) -> Result<()> {
    let mut out = String::from("t,px,py,pz,lx,ly,lz\n");
    for (t, p, l) in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt(*t),
            fmt(p.x),
            fmt(p.y),
            fmt(p.z),
            fmt(l.x),
            fmt(l.y),
            fmt(l.z)
        );
    }
    write_file(path, &out)
}

pub fn write_probe_csv(probe: &ProbeRecord, path: &Path) -> Result<()> {
    let mut out = String::from("t,ux,uy,uz,rx,ry,rz\n");
    for ((t, d), r) in probe.times.iter().zip(&probe.displacement).zip(&probe.rotation) {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt(*t),
            fmt(d.x),
            fmt(d.y),
            fmt(d.z),
            fmt(r.x),
            fmt(r.y),
            fmt(r.z)
        );
    }
    write_file(path, &out)
}

/// Legacy ASCII VTK unstructured grid of the deformed particles.
///
/// Every particle contributes its 8 corners moved rigidly by (X, Q); cells
/// are hexahedra with per-cell volumetric strain and angular speed. The
/// point count and connectivity are identical across frames.
pub fn write_vtk_snapshot(mesh: &Mesh, states: &StateArray, path: &Path) -> Result<()> {
    let n = mesh.n_particles();
    let eps = volumetric_strain(mesh, states)?;
    let mut out = String::with_capacity(64 * 8 * n);
    out.push_str("# vtk DataFile Version 3.0\n");
    out.push_str("deformed particle lattice\n");
    out.push_str("ASCII\n");
    out.push_str("DATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(out, "POINTS {} double", 8 * n);
    for (geom, s) in mesh.particles.iter().zip(states) {
        for corner in &geom.corners {
            let p = s.x + s.q * (corner - geom.x0);
            let _ = writeln!(out, "{:.9e} {:.9e} {:.9e}", p.x, p.y, p.z);
        }
    }
    let _ = writeln!(out, "CELLS {} {}", n, 9 * n);
    for c in 0..n {
        let base = 8 * c;
        let _ = writeln!(
            out,
            "8 {} {} {} {} {} {} {} {}",
            base,
            base + 1,
            base + 2,
            base + 3,
            base + 4,
            base + 5,
            base + 6,
            base + 7
        );
    }
    let _ = writeln!(out, "CELL_TYPES {n}");
    for _ in 0..n {
        out.push_str("12\n");
    }
    let _ = writeln!(out, "CELL_DATA {n}");
    out.push_str("SCALARS volumetric_strain double 1\nLOOKUP_TABLE default\n");
    for e in &eps {
        let _ = writeln!(out, "{e:.9e}");
    }
    out.push_str("SCALARS angular_speed double 1\nLOOKUP_TABLE default\n");
    for (geom, s) in mesh.particles.iter().zip(states) {
        let _ = writeln!(out, "{:.9e}", angular_velocity(geom, s).norm());
    }
    write_file(path, &out)
}

/// End-of-run summary written as `summary.json`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Summary {
    pub n_particles: usize,
    pub n_steps: usize,
    pub dt: f64,
    pub final_energy: EnergyReport,
    pub initial_linear_momentum: [f64; 3],
    pub initial_angular_momentum: [f64; 3],
    pub linear_momentum_drift: f64,
    pub angular_momentum_drift: f64,
    pub max_cfl_margin: f64,
    pub max_iterations: usize,
    pub wall_time_s: f64,
}

pub fn write_summary(summary: &Summary, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(summary)
        .map_err(|e| Error::Config(format!("summary serialization: {e}")))?;
    write_file(path, &text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_box_lattice, MaterialParams};
    use crate::state::init_rest;

    #[test]
    fn vtk_snapshot_structure() {
        let mesh = build_box_lattice(
            [2.0, 1.0, 1.0],
            [2, 1, 1],
            MaterialParams::new(1.0, 0.25, 1.0).unwrap(),
        )
        .unwrap();
        let mut states = init_rest(&mesh);
        let dir = std::env::temp_dir().join("polydem_vtk_test");
        std::fs::create_dir_all(&dir).unwrap();
        let p0 = dir.join("rest.vtk");
        write_vtk_snapshot(&mesh, &states, &p0).unwrap();
        let text = std::fs::read_to_string(&p0).unwrap();
        assert!(text.contains("POINTS 16 double"));
        assert!(text.contains("CELLS 2 18"));
        assert!(text.contains("CELL_TYPES 2"));

        // Rigid translation: identical connectivity, shifted points.
        for s in states.iter_mut() {
            s.x += Vector3::new(1.0, 0.0, 0.0);
        }
        let p1 = dir.join("moved.vtk");
        write_vtk_snapshot(&mesh, &states, &p1).unwrap();
        let t1 = std::fs::read_to_string(&p1).unwrap();
        let conn0: Vec<&str> = text.lines().skip_while(|l| !l.starts_with("CELLS")).collect();
        let conn1: Vec<&str> = t1.lines().skip_while(|l| !l.starts_with("CELLS")).collect();
        assert_eq!(conn0, conn1);
    }
}
