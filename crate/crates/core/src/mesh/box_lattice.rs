//! Structured rectangular-box lattices.

use super::{FreeFace, MaterialParams, Mesh, ParticleGeom};
use crate::error::Error;
use crate::mesh::face::link_geometry;
use crate::Result;
use nalgebra::{Matrix3, Vector3};

/// Options for [`build_box_lattice_with`].
#[derive(Debug, Clone, Copy, Default)]
pub struct BoxOptions {
    /// Axes along which the slab is a slice of an infinite stack: boundary
    /// faces normal to these axes are not registered as stress-free, which
    /// reproduces plane-strain conditions for one-cell-thick slabs.
    pub plane_strain_axes: [bool; 3],
}

/// Uniform lattice of `counts` rectangular boxes filling `extent`, all
/// boundary faces stress-free.
pub fn build_box_lattice(
    extent: [f64; 3],
    counts: [usize; 3],
    material: MaterialParams,
) -> Result<Mesh> {
    build_box_lattice_with(extent, counts, material, BoxOptions::default())
}

pub fn build_box_lattice_with(
    extent: [f64; 3],
    counts: [usize; 3],
    material: MaterialParams,
    options: BoxOptions,
) -> Result<Mesh> {
    for k in 0..3 {
        if counts[k] == 0 {
            return Err(Error::Config(format!("counts must be >= 1 per axis, got {counts:?}")));
        }
        if !(extent[k] > 0.0) {
            return Err(Error::Config(format!("extents must be > 0, got {extent:?}")));
        }
    }
    let [nx, ny, nz] = counts;
    let dx = Vector3::new(
        extent[0] / nx as f64,
        extent[1] / ny as f64,
        extent[2] / nz as f64,
    );
    let volume = dx.x * dx.y * dx.z;
    let mass = material.density * volume;
    let inertia = Vector3::new(
        mass * (dx.y * dx.y + dx.z * dx.z) / 12.0,
        mass * (dx.x * dx.x + dx.z * dx.z) / 12.0,
        mass * (dx.x * dx.x + dx.y * dx.y) / 12.0,
    );
    let d = mass / 12.0 * Vector3::new(dx.x * dx.x, dx.y * dx.y, dx.z * dx.z);
    let face_area = [dx.y * dx.z, dx.x * dx.z, dx.x * dx.y];

    let id_of = |i: usize, j: usize, k: usize| i + nx * (j + ny * k);
    let mut particles = Vec::with_capacity(nx * ny * nz);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let center = Vector3::new(
                    (i as f64 + 0.5) * dx.x,
                    (j as f64 + 0.5) * dx.y,
                    (k as f64 + 0.5) * dx.z,
                );
                let mut free_faces = Vec::new();
                let at_boundary = [
                    [i == 0, i == nx - 1],
                    [j == 0, j == ny - 1],
                    [k == 0, k == nz - 1],
                ];
                for axis in 0..3 {
                    if options.plane_strain_axes[axis] {
                        continue;
                    }
                    for (side, &hit) in at_boundary[axis].iter().enumerate() {
                        if hit {
                            let mut normal = Vector3::zeros();
                            normal[axis] = if side == 0 { -1.0 } else { 1.0 };
                            free_faces.push(FreeFace {
                                normal,
                                area: face_area[axis],
                                distance: 0.5 * dx[axis],
                            });
                        }
                    }
                }
                let free_volume = free_faces.iter().map(FreeFace::pyramid_volume).sum();
                let h = 0.5 * dx;
                let corners = [
                    center + Vector3::new(-h.x, -h.y, -h.z),
                    center + Vector3::new(h.x, -h.y, -h.z),
                    center + Vector3::new(h.x, h.y, -h.z),
                    center + Vector3::new(-h.x, h.y, -h.z),
                    center + Vector3::new(-h.x, -h.y, h.z),
                    center + Vector3::new(h.x, -h.y, h.z),
                    center + Vector3::new(h.x, h.y, h.z),
                    center + Vector3::new(-h.x, h.y, h.z),
                ];
                particles.push(ParticleGeom {
                    id: id_of(i, j, k),
                    x0: center,
                    volume,
                    mass,
                    inertia,
                    axes: Matrix3::identity(),
                    d,
                    free_volume,
                    free_faces,
                    corners,
                });
            }
        }
    }

    let mut links = Vec::new();
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let a = id_of(i, j, k);
                for axis in 0..3 {
                    let (ii, jj, kk) = match axis {
                        0 => (i + 1, j, k),
                        1 => (i, j + 1, k),
                        _ => (i, j, k + 1),
                    };
                    if ii >= nx || jj >= ny || kk >= nz {
                        continue;
                    }
                    let b = id_of(ii, jj, kk);
                    let face = box_face_corners(&particles[a].x0, axis, &dx);
                    links.push(link_geometry(
                        a,
                        b,
                        &particles[a].x0,
                        &particles[b].x0,
                        &face,
                        &material,
                    )?);
                }
            }
        }
    }
    Mesh::assemble(particles, links, material)
}

/// Corners of the +axis face of the cell centered at `center`.
fn box_face_corners(center: &Vector3<f64>, axis: usize, dx: &Vector3<f64>) -> Vec<Vector3<f64>> {
    let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
    let mut base = *center;
    base[axis] += 0.5 * dx[axis];
    let corner = |su: f64, sv: f64| {
        let mut p = base;
        p[u] += su * 0.5 * dx[u];
        p[v] += sv * 0.5 * dx[v];
        p
    };
    vec![corner(-1.0, -1.0), corner(1.0, -1.0), corner(1.0, 1.0), corner(-1.0, 1.0)]
}
