//! Interface geometry: polygon areas, centroids, second moments, triads and
//! flexion coefficients.

use super::{Link, MaterialParams};
use crate::error::Error;
use crate::Result;
use nalgebra::Vector3;

/// Flexion/torsion coefficients of a link from the interface second moments.
///
/// They solve the linear system
///   alpha_n + alpha_s = E Is / S,
///   alpha_n + alpha_t = E It / S,
///   alpha_s + alpha_t = E (Is + It) / (2 (1+nu) S),
/// chosen so a one-element-thick chain reproduces the exact flexion and
/// torsion of a beam.
pub fn flexion_coefficients(
    moment_s: f64,
    moment_t: f64,
    area: f64,
    young: f64,
    poisson: f64,
) -> (f64, f64, f64) {
    let c = young / (4.0 * (1.0 + poisson) * area);
    let alpha_n = c * (1.0 + 2.0 * poisson) * (moment_s + moment_t);
    let alpha_s = c * ((3.0 + 2.0 * poisson) * moment_s - (1.0 + 2.0 * poisson) * moment_t);
    let alpha_t = c * ((3.0 + 2.0 * poisson) * moment_t - (1.0 + 2.0 * poisson) * moment_s);
    (alpha_n, alpha_s, alpha_t)
}

/// Planar polygon data extracted from a (possibly slightly warped) face.
pub(crate) struct FacePlane {
    /// Unit normal of the least-squares plane (orientation as given by the
    /// corner ordering).
    pub normal: Vector3<f64>,
    pub area: f64,
    pub centroid: Vector3<f64>,
    /// Projected corners, coplanar.
    pub points: Vec<Vector3<f64>>,
}

/// Projects the corners onto their best-fit plane and computes area and
/// centroid. Corners must be ordered around the polygon boundary.
pub(crate) fn face_plane(corners: &[Vector3<f64>]) -> Result<FacePlane> {
    assert!(corners.len() >= 3);
    let n = corners.len();
    let mid = corners.iter().sum::<Vector3<f64>>() / n as f64;
    // Newell area vector; for a quad this is half the diagonal cross product.
    let mut area_vec = Vector3::zeros();
    for k in 0..n {
        let a = corners[k] - mid;
        let b = corners[(k + 1) % n] - mid;
        area_vec += a.cross(&b);
    }
    area_vec *= 0.5;
    let norm = area_vec.norm();
    if norm <= 1e-14 * (corners[0] - mid).norm_squared().max(1e-300) {
        return Err(Error::Mesh("zero-area interface face".into()));
    }
    let normal = area_vec / norm;
    let points: Vec<Vector3<f64>> = corners
        .iter()
        .map(|p| p - (p - mid).dot(&normal) * normal)
        .collect();
    // Area and centroid from a triangle fan around the in-plane midpoint.
    let mut area = 0.0;
    let mut centroid = Vector3::zeros();
    for k in 0..n {
        let a = points[k] - mid;
        let b = points[(k + 1) % n] - mid;
        let tri = 0.5 * a.cross(&b).dot(&normal);
        area += tri;
        centroid += tri * (mid + (a + b) / 3.0);
    }
    if area.abs() <= 0.0 {
        return Err(Error::Mesh("zero-area interface face".into()));
    }
    centroid /= area;
    Ok(FacePlane { normal, area: area.abs(), centroid, points })
}

/// Second moments of the polygon about two in-plane axes through `origin`:
/// returns (int (x.u)^2 dA, int (x.u)(x.v) dA, int (x.v)^2 dA).
fn polygon_second_moments(
    face: &FacePlane,
    origin: &Vector3<f64>,
    u: &Vector3<f64>,
    v: &Vector3<f64>,
) -> (f64, f64, f64) {
    let n = face.points.len();
    let mid = face.points.iter().sum::<Vector3<f64>>() / n as f64;
    let (mut muu, mut muv, mut mvv) = (0.0, 0.0, 0.0);
    for k in 0..n {
        let q1 = mid;
        let q2 = face.points[k];
        let q3 = face.points[(k + 1) % n];
        let tri = 0.5 * (q2 - q1).cross(&(q3 - q1)).dot(&face.normal);
        // Simplex quadrature: int x x^T dA = A/12 (sum a_i a_i^T + s s^T).
        let a = [q1 - origin, q2 - origin, q3 - origin];
        let us: Vec<f64> = a.iter().map(|p| p.dot(u)).collect();
        let vs: Vec<f64> = a.iter().map(|p| p.dot(v)).collect();
        let (su, sv): (f64, f64) = (us.iter().sum(), vs.iter().sum());
        let w = tri / 12.0;
        muu += w * (us.iter().map(|x| x * x).sum::<f64>() + su * su);
        muv += w * (us.iter().zip(&vs).map(|(x, y)| x * y).sum::<f64>() + su * sv);
        mvv += w * (vs.iter().map(|x| x * x).sum::<f64>() + sv * sv);
    }
    (muu, muv, mvv)
}

/// Global axis least aligned with `n` (ties broken in x < y < z order).
fn least_aligned_axis(n: &Vector3<f64>) -> Vector3<f64> {
    let a = [n.x.abs(), n.y.abs(), n.z.abs()];
    let mut best = 0;
    for k in 1..3 {
        if a[k] < a[best] {
            best = k;
        }
    }
    let mut axis = Vector3::zeros();
    axis[best] = 1.0;
    axis
}

/// Builds the full link between particles `i` and `j` from their initial
/// centers of mass and the ordered corners of the shared face.
///
/// The face is projected on its least-squares plane before measuring area,
/// centroid and second moments. The tangent reference s0 follows the face
/// principal axes when they are unambiguous (larger-moment direction first),
/// and otherwise the deterministic rule s0 = normalize(n0 x a) with `a` the
/// global axis least aligned with n0.
pub fn link_geometry(
    i: usize,
    j: usize,
    xi: &Vector3<f64>,
    xj: &Vector3<f64>,
    face_corners: &[Vector3<f64>],
    material: &MaterialParams,
) -> Result<Link> {
    let d0 = (xj - xi).norm();
    if d0 <= 1e-300 {
        return Err(Error::Mesh(format!("coincident particle centers on link ({i}, {j})")));
    }
    let n0 = (xj - xi) / d0;
    let face = face_plane(face_corners)?;
    let centroid = face.centroid;

    // In-plane scratch basis for the moment matrix.
    let u = {
        let a = least_aligned_axis(&face.normal);
        (face.normal.cross(&a)).normalize()
    };
    let v = face.normal.cross(&u);
    let (muu, muv, mvv) = polygon_second_moments(&face, &centroid, &u, &v);

    // Principal directions of the 2x2 moment matrix [[muu, muv], [muv, mvv]].
    let tr = muu + mvv;
    let det = muu * mvv - muv * muv;
    let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
    let lam_max = tr / 2.0 + disc;

    let default_s = {
        let a = least_aligned_axis(&n0);
        let raw = n0.cross(&a);
        (raw - raw.dot(&n0) * n0).normalize()
    };
    let s_raw = if disc > 1e-9 * tr.max(1e-300) {
        // Eigenvector of the larger moment: direction of largest spread.
        let (c0, c1) = if muv.abs() > 1e-30 * tr {
            (muv, lam_max - muu)
        } else if muu >= mvv {
            (1.0, 0.0)
        } else {
            (0.0, 1.0)
        };
        c0 * u + c1 * v
    } else {
        default_s
    };
    // Orthogonalize against the center normal and fix the sign deterministically.
    let mut s = s_raw - s_raw.dot(&n0) * n0;
    let sn = s.norm();
    if sn < 1e-12 {
        s = default_s;
    } else {
        s /= sn;
    }
    let flip = s.dot(&default_s);
    if flip < -1e-12 || (flip.abs() <= 1e-12 && largest_component_negative(&s)) {
        s = -s;
    }
    let t = n0.cross(&s);

    let (moment_s, _, moment_t) = polygon_second_moments(&face, &centroid, &s, &t);
    let (alpha_n, alpha_s, alpha_t) =
        flexion_coefficients(moment_s, moment_t, face.area, material.young, material.poisson);

    Ok(Link {
        i,
        j,
        area: face.area,
        d0,
        n0,
        s0: s,
        t0: t,
        lever_i: centroid - xi,
        lever_j: centroid - xj,
        moment_s,
        moment_t,
        alpha_n,
        alpha_s,
        alpha_t,
    })
}

fn largest_component_negative(v: &Vector3<f64>) -> bool {
    let a = [v.x.abs(), v.y.abs(), v.z.abs()];
    let mut best = 0;
    for k in 1..3 {
        if a[k] > a[best] {
            best = k;
        }
    }
    v[best] < 0.0
}
