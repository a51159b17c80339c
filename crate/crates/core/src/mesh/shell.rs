//! Mapped hexahedral shells: cylinders and hemispheres with a polar cutout.
//!
//! Cells come from a structured parametric grid, periodic in the angular
//! direction. Volume, centroid and inertia of each (possibly warped) cell are
//! computed exactly for its straight-edge polyhedron by splitting it into 24
//! tetrahedra: each face fans into 4 triangles about its centroid, and every
//! triangle is joined to the cell midpoint.

use super::{FreeFace, MaterialParams, Mesh, ParticleGeom};
use crate::error::Error;
use crate::mesh::face::{face_plane, link_geometry};
use crate::Result;
use nalgebra::{Matrix3, Vector3};
use std::f64::consts::PI;

/// Faces of a hexahedron in VTK corner ordering, outward-oriented:
/// -ax2, +ax2, -ax1, +ax1, -ax0, +ax0.
const HEX_FACES: [[usize; 4]; 6] = [
    [0, 3, 2, 1],
    [4, 5, 6, 7],
    [0, 1, 5, 4],
    [3, 7, 6, 2],
    [0, 4, 7, 3],
    [1, 2, 6, 5],
];

/// Index of the +axis face in [`HEX_FACES`] for each grid axis.
const PLUS_FACE: [usize; 3] = [5, 3, 1];
const MINUS_FACE: [usize; 3] = [4, 2, 0];

/// One-element-thick (or layered) cylindrical shell.
///
/// `counts = [n_theta, n_z, n_r]`: elements around the perimeter, along the
/// height and through the thickness. Periodic in the angle. The inner and
/// outer surfaces and both height ends are stress-free.
pub fn build_cylinder_shell(
    radius: f64,
    height: f64,
    thickness: f64,
    counts: [usize; 3],
    material: MaterialParams,
) -> Result<Mesh> {
    let [nt, nz, nr] = counts;
    if !(radius > 0.0 && height > 0.0 && thickness > 0.0) {
        return Err(Error::Config(format!(
            "cylinder radius/height/thickness must be > 0, got ({radius}, {height}, {thickness})"
        )));
    }
    if thickness >= 2.0 * radius {
        return Err(Error::Config("cylinder thickness must be below the diameter".into()));
    }
    if nt < 3 || nz == 0 || nr == 0 {
        return Err(Error::Config(format!(
            "cylinder counts must satisfy n_theta >= 3, n_z >= 1, n_r >= 1, got {counts:?}"
        )));
    }
    let r_in = radius - 0.5 * thickness;
    build_mapped_mesh([nt, nz, nr], material, |i, j, k| {
        let theta = 2.0 * PI * i as f64 / nt as f64;
        let z = height * j as f64 / nz as f64;
        let rho = r_in + thickness * k as f64 / nr as f64;
        Vector3::new(rho * theta.cos(), rho * theta.sin(), z)
    })
}

/// Hemispherical shell with a circular cutout at the pole.
///
/// `counts = [n_lat, n_lon, n_r]`. Longitude is periodic; the cutout ring,
/// the equator ring and both spherical surfaces are stress-free. The grid
/// runs from the equator up to the cutout.
pub fn build_hemisphere_shell(
    radius: f64,
    thickness: f64,
    cutout_deg: f64,
    counts: [usize; 3],
    material: MaterialParams,
) -> Result<Mesh> {
    let [nlat, nlon, nr] = counts;
    if !(radius > 0.0 && thickness > 0.0) {
        return Err(Error::Config(format!(
            "hemisphere radius/thickness must be > 0, got ({radius}, {thickness})"
        )));
    }
    if !(cutout_deg > 0.0 && cutout_deg < 90.0) {
        return Err(Error::Config(format!(
            "hemisphere cutout angle must lie in (0, 90) degrees, got {cutout_deg}"
        )));
    }
    if nlon < 3 || nlat == 0 || nr == 0 {
        return Err(Error::Config(format!(
            "hemisphere counts must satisfy n_lat >= 1, n_lon >= 3, n_r >= 1, got {counts:?}"
        )));
    }
    let phi_cut = cutout_deg.to_radians();
    let r_in = radius - 0.5 * thickness;
    // Polar angle decreases with the grid's second axis so the (lon, lat, r)
    // frame stays right-handed.
    build_mapped_mesh([nlon, nlat, nr], material, |i, j, k| {
        let lambda = 2.0 * PI * i as f64 / nlon as f64;
        let phi = PI / 2.0 - (PI / 2.0 - phi_cut) * j as f64 / nlat as f64;
        let rho = r_in + thickness * k as f64 / nr as f64;
        Vector3::new(
            rho * phi.sin() * lambda.cos(),
            rho * phi.sin() * lambda.sin(),
            rho * phi.cos(),
        )
    })
}

/// Assembles a structured hexahedral mesh from a vertex mapping; the first
/// grid axis is periodic.
fn build_mapped_mesh(
    n: [usize; 3],
    material: MaterialParams,
    vertex: impl Fn(usize, usize, usize) -> Vector3<f64>,
) -> Result<Mesh> {
    let [n0, n1, n2] = n;
    let v1 = n1 + 1;
    let v2 = n2 + 1;
    let mut verts = Vec::with_capacity(n0 * v1 * v2);
    for k in 0..v2 {
        for j in 0..v1 {
            for i in 0..n0 {
                verts.push(vertex(i, j, k));
            }
        }
    }
    let vert_at =
        |i: usize, j: usize, k: usize| -> Vector3<f64> { verts[(i % n0) + n0 * (j + v1 * k)] };
    let cell_corners = |i: usize, j: usize, k: usize| -> [Vector3<f64>; 8] {
        [
            vert_at(i, j, k),
            vert_at(i + 1, j, k),
            vert_at(i + 1, j + 1, k),
            vert_at(i, j + 1, k),
            vert_at(i, j, k + 1),
            vert_at(i + 1, j, k + 1),
            vert_at(i + 1, j + 1, k + 1),
            vert_at(i, j + 1, k + 1),
        ]
    };
    let id_of = |i: usize, j: usize, k: usize| i + n0 * (j + n1 * k);

    let mut particles = Vec::with_capacity(n0 * n1 * n2);
    for k in 0..n2 {
        for j in 0..n1 {
            for i in 0..n0 {
                let id = id_of(i, j, k);
                let corners = cell_corners(i, j, k);
                let body = hex_body_properties(&corners)
                    .map_err(|e| Error::Mesh(format!("cell {id}: {e}")))?;

                let mut free_faces = Vec::new();
                let boundary: [(usize, bool); 4] = [
                    (MINUS_FACE[1], j == 0),
                    (PLUS_FACE[1], j == n1 - 1),
                    (MINUS_FACE[2], k == 0),
                    (PLUS_FACE[2], k == n2 - 1),
                ];
                for (face_idx, hit) in boundary {
                    if !hit {
                        continue;
                    }
                    let quad: Vec<Vector3<f64>> =
                        HEX_FACES[face_idx].iter().map(|&c| corners[c]).collect();
                    let plane = face_plane(&quad)?;
                    let distance = (plane.centroid - body.centroid).dot(&plane.normal);
                    if distance <= 0.0 {
                        return Err(Error::Mesh(format!(
                            "cell {id}: boundary face not outward of the centroid"
                        )));
                    }
                    free_faces.push(FreeFace {
                        normal: plane.normal,
                        area: plane.area,
                        distance,
                    });
                }
                let free_volume = free_faces.iter().map(FreeFace::pyramid_volume).sum();
                particles.push(ParticleGeom {
                    id,
                    x0: body.centroid,
                    volume: body.volume,
                    mass: material.density * body.volume,
                    inertia: material.density * body.inertia_moments,
                    axes: body.axes,
                    d: material.density * body.d_moments,
                    free_volume,
                    free_faces,
                    corners,
                });
            }
        }
    }

    let mut links = Vec::new();
    for k in 0..n2 {
        for j in 0..n1 {
            for i in 0..n0 {
                let a = id_of(i, j, k);
                let corners = cell_corners(i, j, k);
                // +axis0 wraps; +axis1 / +axis2 stop at the boundary.
                let neighbors: [(usize, Option<usize>); 3] = [
                    (0, if n0 > 1 { Some(id_of((i + 1) % n0, j, k)) } else { None }),
                    (1, if j + 1 < n1 { Some(id_of(i, j + 1, k)) } else { None }),
                    (2, if k + 1 < n2 { Some(id_of(i, j, k + 1)) } else { None }),
                ];
                for (axis, nb) in neighbors {
                    let Some(b) = nb else { continue };
                    if b == a {
                        continue; // single periodic cell, no self-link
                    }
                    let quad: Vec<Vector3<f64>> =
                        HEX_FACES[PLUS_FACE[axis]].iter().map(|&c| corners[c]).collect();
                    links.push(link_geometry(
                        a,
                        b,
                        &particles[a].x0,
                        &particles[b].x0,
                        &quad,
                        &material,
                    )?);
                }
            }
        }
    }
    Mesh::assemble(particles, links, material)
}

struct HexBody {
    volume: f64,
    centroid: Vector3<f64>,
    /// Principal moments (per unit density), ascending.
    inertia_moments: Vector3<f64>,
    /// d_i = (I1+I2+I3)/2 - I_i per unit density.
    d_moments: Vector3<f64>,
    axes: Matrix3<f64>,
}

/// Volume, centroid and principal inertia of a straight-edge hexahedron.
fn hex_body_properties(corners: &[Vector3<f64>; 8]) -> std::result::Result<HexBody, String> {
    let body_mid: Vector3<f64> = corners.iter().sum::<Vector3<f64>>() / 8.0;
    let mut volume = 0.0;
    let mut first_moment = Vector3::zeros();
    let mut second_moment = Matrix3::zeros();
    for face in &HEX_FACES {
        let quad: Vec<Vector3<f64>> = face.iter().map(|&c| corners[c]).collect();
        let face_mid = quad.iter().sum::<Vector3<f64>>() / 4.0;
        for e in 0..4 {
            let p1 = quad[e];
            let p2 = quad[(e + 1) % 4];
            // Tet (p1, p2, face_mid, body_mid); positive when the face winds
            // outward around the body midpoint.
            let vol = (p2 - p1).cross(&(face_mid - p1)).dot(&(p1 - body_mid)) / 6.0;
            if vol <= 0.0 {
                return Err(format!("non-positive Jacobian (tet volume {vol:.3e})"));
            }
            volume += vol;
            let vs = [p1, p2, face_mid, body_mid];
            let s: Vector3<f64> = vs.iter().sum();
            first_moment += vol / 4.0 * s;
            let mut m = s * s.transpose();
            for v in &vs {
                m += v * v.transpose();
            }
            second_moment += vol / 20.0 * m;
        }
    }
    let centroid = first_moment / volume;
    let m2c = second_moment - volume * centroid * centroid.transpose();
    let inertia = Matrix3::identity() * m2c.trace() - m2c;

    let eig = nalgebra::SymmetricEigen::new(inertia);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let moments = Vector3::new(
        eig.eigenvalues[order[0]],
        eig.eigenvalues[order[1]],
        eig.eigenvalues[order[2]],
    );
    let mut e0: Vector3<f64> = eig.eigenvectors.column(order[0]).into();
    let mut e1: Vector3<f64> = eig.eigenvectors.column(order[1]).into();
    fix_sign(&mut e0);
    fix_sign(&mut e1);
    let e2 = e0.cross(&e1);
    let axes = Matrix3::from_columns(&[e0, e1, e2]);

    let half = 0.5 * (moments.x + moments.y + moments.z);
    let d = Vector3::new(half - moments.x, half - moments.y, half - moments.z);
    if d.min() <= 0.0 {
        return Err(format!("degenerate inertia, d = {:?}", d));
    }
    Ok(HexBody {
        volume,
        centroid,
        inertia_moments: moments,
        d_moments: d,
        axes,
    })
}

/// Flips `v` so its largest-magnitude component is positive.
fn fix_sign(v: &mut Vector3<f64>) {
    let a = [v.x.abs(), v.y.abs(), v.z.abs()];
    let mut best = 0;
    for k in 1..3 {
        if a[k] > a[best] {
            best = k;
        }
    }
    if v[best] < 0.0 {
        *v = -*v;
    }
}
