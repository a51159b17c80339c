//! Conserved quantities, probes, arrival picking and convergence fits.

use crate::error::Error;
use crate::math::{log_log_slope, unskew};
use crate::mechanics::potential_energy;
use crate::mesh::Mesh;
use crate::state::{spin_momentum, StateArray};
use crate::Result;
use nalgebra::{Matrix3, Vector3};

/// Energy split at one instant. `total` is the sum of the five parts.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct EnergyReport {
    pub time: f64,
    pub kinetic_trans: f64,
    pub kinetic_rot: f64,
    /// Link stretch energy U_t.
    pub u_link: f64,
    /// Volumetric energy U_d.
    pub u_vol: f64,
    /// Flexion/torsion energy U_f (zero at rest).
    pub u_flex: f64,
    pub total: f64,
}

impl EnergyReport {
    pub fn potential(&self) -> f64 {
        self.u_link + self.u_vol + self.u_flex
    }
}

/// Energy of a state snapshot, evaluated with the stored half-step momenta.
/// The rotational part is the Hamiltonian form tr(P D^-1 P^T)/2 = tr(Z D Z^T)/2.
///
/// During a run prefer the per-step report from the integrator, whose momenta
/// are centered on integer steps.
pub fn total_energy(mesh: &Mesh, states: &StateArray, t: f64) -> Result<EnergyReport> {
    let (u_link, u_vol, u_flex, _) = potential_energy(mesh, states)?;
    let mut kinetic_trans = 0.0;
    let mut kinetic_rot = 0.0;
    for (geom, s) in mesh.particles.iter().zip(states) {
        kinetic_trans += s.t_half.norm_squared() / (2.0 * geom.mass);
        let zd = s.z_half * Matrix3::from_diagonal(&geom.d);
        kinetic_rot += 0.5 * (zd * s.z_half.transpose()).trace();
    }
    Ok(EnergyReport {
        time: t,
        kinetic_trans,
        kinetic_rot,
        u_link,
        u_vol,
        u_flex,
        total: kinetic_trans + kinetic_rot + u_link + u_vol + u_flex,
    })
}

/// Total linear momentum and angular momentum about the world origin,
/// in the discrete half-step form that the stepper conserves exactly.
pub fn momenta(mesh: &Mesh, states: &StateArray) -> (Vector3<f64>, Vector3<f64>) {
    let mut linear = Vector3::zeros();
    let mut angular = Vector3::zeros();
    for (geom, s) in mesh.particles.iter().zip(states) {
        linear += s.t_half;
        angular += s.x.cross(&s.t_half) + spin_momentum(geom, s);
    }
    (linear, angular)
}

/// Axis-angle vector of a rotation matrix; the angle lies in [0, pi].
pub fn rotation_vector(q: &Matrix3<f64>) -> Vector3<f64> {
    let cos = ((q.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
    let v = unskew(&(0.5 * (q - q.transpose()))); // sin(theta) * axis
    let sin = v.norm();
    let theta = sin.atan2(cos);
    if sin > 1e-7 {
        return (theta / sin) * v;
    }
    if cos > 0.0 {
        // Small angle: v is already theta * axis to second order.
        return v;
    }
    // Angle near pi: axis from the dominant diagonal of (Q + Id)/2.
    let mut k = 0;
    for c in 1..3 {
        if q[(c, c)] > q[(k, k)] {
            k = c;
        }
    }
    let mut axis = Vector3::zeros();
    axis[k] = ((q[(k, k)] + 1.0) / 2.0).max(0.0).sqrt();
    for c in 0..3 {
        if c != k {
            axis[c] = (q[(k, c)] + q[(c, k)]) / (4.0 * axis[k]);
        }
    }
    let axis = axis.normalize();
    let axis = if axis.dot(&v) < 0.0 { -axis } else { axis };
    theta * axis
}

/// Displacement and rotation time series of one particle.
#[derive(Debug, Clone)]
pub struct ProbeRecord {
    pub particle: usize,
    pub times: Vec<f64>,
    pub displacement: Vec<Vector3<f64>>,
    pub rotation: Vec<Vector3<f64>>,
}

impl ProbeRecord {
    pub fn new(particle: usize) -> Self {
        ProbeRecord {
            particle,
            times: Vec::new(),
            displacement: Vec::new(),
            rotation: Vec::new(),
        }
    }

    pub fn sample(&mut self, mesh: &Mesh, states: &StateArray, t: f64) {
        let s = &states[self.particle];
        self.times.push(t);
        self.displacement.push(s.x - mesh.particles[self.particle].x0);
        self.rotation.push(rotation_vector(&s.q));
    }

    /// First time the displacement magnitude exceeds the given fraction of
    /// its maximum.
    pub fn arrival_time(&self, threshold_fraction: f64) -> Result<f64> {
        let mags: Vec<f64> = self.displacement.iter().map(|d| d.norm()).collect();
        arrival_time(&self.times, &mags, threshold_fraction)
    }
}

/// First threshold crossing of `|values|` at `threshold_fraction * max|values|`,
/// linearly interpolated between samples.
pub fn arrival_time(times: &[f64], values: &[f64], threshold_fraction: f64) -> Result<f64> {
    if times.len() != values.len() || times.len() < 2 {
        return Err(Error::Measurement("arrival_time needs two aligned samples".into()));
    }
    let peak = values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if peak <= 0.0 {
        return Err(Error::Measurement("record contains no signal".into()));
    }
    let threshold = threshold_fraction * peak;
    let mut prev = values[0].abs();
    if prev >= threshold {
        return Ok(times[0]);
    }
    for k in 1..times.len() {
        let cur = values[k].abs();
        if cur >= threshold {
            let frac = (threshold - prev) / (cur - prev);
            return Ok(times[k - 1] + frac * (times[k] - times[k - 1]));
        }
        prev = cur;
    }
    Err(Error::Measurement("threshold never crossed".into()))
}

/// Least-squares slope of log(error) against log(h) over (h, error) pairs.
pub fn convergence_slope(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.len() < 3 {
        return Err(Error::Measurement(format!(
            "convergence fit needs at least 3 pairs, got {}",
            pairs.len()
        )));
    }
    if pairs.iter().any(|&(h, e)| h <= 0.0 || e <= 0.0) {
        return Err(Error::Measurement("convergence fit requires positive values".into()));
    }
    Ok(log_log_slope(pairs))
}

/// Max over sufficiently interior particles of |theta_I - curl xi / 2| for an
/// imposed smooth displacement field with analytic curl `half_curl` (the
/// caller passes curl xi / 2 evaluated at a point).
///
/// `skip_layers` drops particles within that graph distance of any particle
/// owning a free face, where the one-sided stencils perturb the relation.
pub fn curl_consistency(
    mesh: &Mesh,
    states: &StateArray,
    half_curl: impl Fn(&Vector3<f64>) -> Vector3<f64>,
    skip_layers: usize,
) -> f64 {
    let depth = boundary_distance(mesh);
    let mut worst = 0.0_f64;
    for (geom, s) in mesh.particles.iter().zip(states) {
        if depth[geom.id] <= skip_layers {
            continue;
        }
        let theta = rotation_vector(&s.q);
        let err = (theta - half_curl(&geom.x0)).norm();
        worst = worst.max(err);
    }
    worst
}

/// Graph distance (in links) from each particle to the nearest particle with
/// a free face; particles with free faces have distance 0.
pub fn boundary_distance(mesh: &Mesh) -> Vec<usize> {
    let n = mesh.n_particles();
    let mut dist = vec![usize::MAX; n];
    let mut queue = std::collections::VecDeque::new();
    for p in &mesh.particles {
        if !p.free_faces.is_empty() {
            dist[p.id] = 0;
            queue.push_back(p.id);
        }
    }
    while let Some(p) = queue.pop_front() {
        for &l in &mesh.adjacency[p] {
            let link = &mesh.links[l];
            let q = if link.i == p { link.j } else { link.i };
            if dist[q] == usize::MAX {
                dist[q] = dist[p] + 1;
                queue.push_back(q);
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::rotation_about;
    use crate::mesh::{build_box_lattice, MaterialParams};
    use crate::state::{init_rest, set_initial_velocity};
    use approx::assert_relative_eq;

    fn mesh2() -> Mesh {
        build_box_lattice([2.0, 1.0, 1.0], [2, 1, 1], MaterialParams::new(1.0, 0.25, 2.0).unwrap())
            .unwrap()
    }

    #[test]
    fn rest_energy_and_momenta_vanish() {
        let mesh = mesh2();
        let states = init_rest(&mesh);
        let e = total_energy(&mesh, &states, 0.0).unwrap();
        assert_eq!(e.total, 0.0);
        let (p, l) = momenta(&mesh, &states);
        assert_eq!(p, Vector3::zeros());
        assert_eq!(l, Vector3::zeros());
    }

    #[test]
    fn kinetic_energy_of_uniform_motion() {
        let mesh = mesh2();
        let mut states = init_rest(&mesh);
        set_initial_velocity(&mesh, &mut states, |_| {
            (Vector3::new(1.0, 0.0, 0.0), Vector3::zeros())
        });
        let e = total_energy(&mesh, &states, 0.0).unwrap();
        // Each particle: m = 2, v = 1 -> 1 J.
        assert_relative_eq!(e.kinetic_trans, 2.0, epsilon = 1e-14);
        let (p, _) = momenta(&mesh, &states);
        assert_relative_eq!(p, Vector3::new(4.0, 0.0, 0.0), epsilon = 1e-14);
    }

    #[test]
    fn rotational_energy_matches_inertia_form() {
        let mesh = mesh2();
        let mut states = init_rest(&mesh);
        let omega = Vector3::new(0.4, -0.2, 0.9);
        set_initial_velocity(&mesh, &mut states, |_| (Vector3::zeros(), omega));
        let e = total_energy(&mesh, &states, 0.0).unwrap();
        let expected: f64 = mesh
            .particles
            .iter()
            .map(|p| {
                0.5 * (p.inertia.x * omega.x * omega.x
                    + p.inertia.y * omega.y * omega.y
                    + p.inertia.z * omega.z * omega.z)
            })
            .sum();
        assert_relative_eq!(e.kinetic_rot, expected, max_relative = 1e-12);
    }

    #[test]
    fn rotation_vector_basics() {
        assert_eq!(rotation_vector(&Matrix3::identity()), Vector3::zeros());
        let r = rotation_about(&Vector3::z(), 0.1);
        assert_relative_eq!(rotation_vector(&r), Vector3::new(0.0, 0.0, 0.1), epsilon = 1e-12);
        // Near pi.
        let axis = Vector3::new(1.0, 0.5, -0.2).normalize();
        let r = rotation_about(&axis, std::f64::consts::PI - 1e-9);
        let v = rotation_vector(&r);
        assert_relative_eq!(v.norm(), std::f64::consts::PI - 1e-9, epsilon = 1e-7);
        assert_relative_eq!(v.normalize(), axis, epsilon = 1e-6);
    }

    #[test]
    fn rotation_vector_round_trip() {
        for &angle in &[1e-9, 1e-5, 0.3, 1.9, 3.0, 3.14159] {
            let axis = Vector3::new(-0.3, 0.8, 0.52).normalize();
            let v = rotation_vector(&rotation_about(&axis, angle));
            assert_relative_eq!(v, angle * axis, max_relative = 1e-9, epsilon = 1e-10);
        }
    }

    #[test]
    fn small_rotation_composition_is_additive() {
        let a = Vector3::new(1e-3, -2e-3, 0.5e-3);
        let b = Vector3::new(-0.4e-3, 1e-3, 2e-3);
        let q = rotation_about(&a.normalize(), a.norm()) * rotation_about(&b.normalize(), b.norm());
        let v = rotation_vector(&q);
        // Second-order accurate: the defect is the commutator term, O(|a||b|).
        assert!((v - (a + b)).norm() <= 2.0 * a.norm() * b.norm());
    }

    #[test]
    fn arrival_on_synthetic_ramp() {
        let times: Vec<f64> = (0..=20).map(|k| 0.1 * k as f64).collect();
        let values: Vec<f64> = times.iter().map(|&t| 0.5 * t).collect();
        // max = 1.0 at t = 2; threshold 0.5 crossed at t = 1.
        let t = arrival_time(&times, &values, 0.5).unwrap();
        assert_relative_eq!(t, 1.0, epsilon = 1e-12);
        let zeros = vec![0.0; times.len()];
        assert!(arrival_time(&times, &zeros, 0.5).is_err());
    }

    #[test]
    fn convergence_slope_recovers_powers() {
        let quad: Vec<(f64, f64)> = [0.4, 0.2, 0.1, 0.05].iter().map(|&h| (h, 7.0 * h * h)).collect();
        assert_relative_eq!(convergence_slope(&quad).unwrap(), 2.0, epsilon = 1e-12);
        let lin: Vec<(f64, f64)> = [0.4, 0.2, 0.1].iter().map(|&h| (h, 0.3 * h)).collect();
        assert_relative_eq!(convergence_slope(&lin).unwrap(), 1.0, epsilon = 1e-12);
        assert!(convergence_slope(&lin[..2]).is_err());
        assert!(convergence_slope(&[(0.1, 1.0), (0.2, -1.0), (0.4, 1.0)]).is_err());
    }

    #[test]
    fn curl_consistency_detects_rigid_fields() {
        let mesh = build_box_lattice(
            [1.0, 1.0, 1.0],
            [6, 6, 6],
            MaterialParams::new(1.0, 0.25, 1.0).unwrap(),
        )
        .unwrap();
        // Uniform translation: theta = 0, curl = 0.
        let mut states = init_rest(&mesh);
        for s in states.iter_mut() {
            s.x += Vector3::new(0.2, -0.1, 0.05);
        }
        let d = curl_consistency(&mesh, &states, |_| Vector3::zeros(), 0);
        assert_relative_eq!(d, 0.0, epsilon = 1e-14);
        // Global infinitesimal rotation: theta = theta0 = curl/2 exactly.
        let theta0 = Vector3::new(0.0, 0.0, 1e-4);
        let center = Vector3::new(0.5, 0.5, 0.5);
        let mut states = init_rest(&mesh);
        let rot = rotation_about(&Vector3::z(), theta0.z);
        for (p, s) in mesh.particles.iter().zip(states.iter_mut()) {
            s.x = center + rot * (p.x0 - center);
            s.q = rot;
        }
        let d = curl_consistency(&mesh, &states, |_| theta0, 0);
        assert!(d <= 1e-11, "rigid rotation discrepancy {d}");
    }

    #[test]
    fn boundary_distance_layers() {
        let mesh = build_box_lattice(
            [1.0, 1.0, 1.0],
            [5, 5, 5],
            MaterialParams::new(1.0, 0.25, 1.0).unwrap(),
        )
        .unwrap();
        let d = boundary_distance(&mesh);
        // Center cell of a 5^3 lattice is two layers in.
        let center = 2 + 5 * (2 + 5 * 2);
        assert_eq!(d[center], 2);
        let surface = mesh.particles.iter().filter(|p| !p.free_faces.is_empty()).count();
        assert_eq!(d.iter().filter(|&&x| x == 0).count(), surface);
    }
}
