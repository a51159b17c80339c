//! Interface kinematics, link forces and torques, external loads and the
//! potential energy terms.
//!
//! Forces and torques are the exact gradients of the discrete potential
//!   U = U_t + U_d + U_f
//! with U_t the link stretch energy, U_d the volumetric energy with the
//! free-surface corrected cell volumes, and U_f the flexion/torsion energy.
//! The torque uses the gradient-consistent form (lever x stretch force plus
//! lever x volumetric direction), which is what keeps the long-run energy
//! bounded under the symplectic stepper.

use crate::error::Error;
use crate::mesh::{Link, MaterialParams, Mesh};
use crate::state::{ParticleState, StateArray};
use crate::Result;
use nalgebra::Vector3;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Kinematic quantities of one link evaluated at the current state.
///
/// Both sides of the link share this value: the j-side quantities are exact
/// negations (du_ji = -du, n_ji = -n), so action-reaction holds bitwise.
#[derive(Debug, Clone, Copy)]
pub struct LinkKinematics {
    /// Interface displacement du_ij (m).
    pub du: Vector3<f64>,
    /// Current center distance (m).
    pub dist: f64,
    /// Current unit normal, i -> j.
    pub n: Vector3<f64>,
    /// du . n, the normal interface stretch (m).
    pub du_n: f64,
}

/// Interface displacement and current normal for one link.
pub fn interface_displacement(
    state_i: &ParticleState,
    state_j: &ParticleState,
    link: &Link,
) -> Result<LinkKinematics> {
    let r = state_j.x - state_i.x;
    let dist = r.norm();
    if dist <= 1e-12 * link.d0 {
        return Err(Error::SingularConfiguration { i: link.i, j: link.j, d: dist });
    }
    let n = r / dist;
    let du = r + state_j.q * link.lever_j - state_i.q * link.lever_i;
    Ok(LinkKinematics { du, dist, n, du_n: du.dot(&n) })
}

/// Per-particle volumetric strain from the normal interface stretches,
/// with the free-volume corrected denominator.
pub fn volumetric_strain(mesh: &Mesh, states: &StateArray) -> Result<Vec<f64>> {
    let kin = link_kinematics(mesh, states)?;
    Ok(volumetric_strain_from(mesh, &kin))
}

/// Below this many work items the fork-join overhead dominates; the serial
/// path evaluates identical expressions in the same order, so results are
/// bitwise equal either way.
pub(crate) const PARALLEL_THRESHOLD: usize = 4096;

fn link_kinematics(mesh: &Mesh, states: &StateArray) -> Result<Vec<LinkKinematics>> {
    let eval = |l: &Link| interface_displacement(&states[l.i], &states[l.j], l);
    if mesh.links.len() >= PARALLEL_THRESHOLD {
        mesh.links.par_iter().map(eval).collect()
    } else {
        mesh.links.iter().map(eval).collect()
    }
}

fn volumetric_strain_from(mesh: &Mesh, kin: &[LinkKinematics]) -> Vec<f64> {
    let eval = |p: usize| {
        let mut eps = 0.0;
        for &l in &mesh.adjacency[p] {
            // du . n is invariant under swapping the link orientation.
            eps += 0.5 * mesh.links[l].area * kin[l].du_n;
        }
        eps / mesh.corrected_volume[p]
    };
    let n = mesh.n_particles();
    if n >= PARALLEL_THRESHOLD {
        (0..n).into_par_iter().map(eval).collect()
    } else {
        (0..n).map(eval).collect()
    }
}

/// Force exerted on particle i through the link (`-f` acts on j).
pub fn link_force(
    link: &Link,
    kin: &LinkKinematics,
    eps_v_link: f64,
    material: &MaterialParams,
) -> Vector3<f64> {
    let c_link = material.link_modulus() * link.area / link.d0;
    let c_vol = material.lame_lambda() * link.area * eps_v_link;
    c_link * kin.du + c_vol * (kin.n + (kin.du - kin.du_n * kin.n) / kin.dist)
}

/// Torques exerted on both particles of a link, split into the lever part
/// M^t and the flexion/torsion part M^f.
#[derive(Debug, Clone, Copy)]
pub struct LinkTorques {
    pub lever_i: Vector3<f64>,
    pub flexion_i: Vector3<f64>,
    pub lever_j: Vector3<f64>,
    pub flexion_j: Vector3<f64>,
}

impl LinkTorques {
    pub fn total_i(&self) -> Vector3<f64> {
        self.lever_i + self.flexion_i
    }
    pub fn total_j(&self) -> Vector3<f64> {
        self.lever_j + self.flexion_j
    }
}

pub fn link_torques(
    link: &Link,
    state_i: &ParticleState,
    state_j: &ParticleState,
    kin: &LinkKinematics,
    eps_v_link: f64,
    material: &MaterialParams,
) -> LinkTorques {
    let c_link = material.link_modulus() * link.area / link.d0;
    let c_vol = material.lame_lambda() * link.area * eps_v_link;
    let arm_i = state_i.q * link.lever_i;
    let arm_j = state_j.q * link.lever_j;
    let lever_i = arm_i.cross(&(c_link * kin.du + c_vol * kin.n));
    // j side sees du and n negated.
    let lever_j = arm_j.cross(&(-(c_link * kin.du) - c_vol * kin.n));

    let c_flex = link.area / link.d0;
    let ni = state_i.q * link.n0;
    let nj = state_j.q * link.n0;
    let si = state_i.q * link.s0;
    let sj = state_j.q * link.s0;
    let ti = state_i.q * link.t0;
    let tj = state_j.q * link.t0;
    let flexion_i = c_flex
        * (link.alpha_n * ni.cross(&nj) + link.alpha_s * si.cross(&sj) + link.alpha_t * ti.cross(&tj));
    LinkTorques { lever_i, flexion_i, lever_j, flexion_j: -flexion_i }
}

/// Scalar time profile of an external load.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    Constant { value: f64 },
    /// Linear ramp from 0 to `value` over `t_ramp`, constant afterwards.
    Ramp { value: f64, t_ramp: f64 },
    Ricker { f0: f64, t0: f64, amplitude: f64 },
}

impl Profile {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Profile::Constant { value } => value,
            Profile::Ramp { value, t_ramp } => {
                if t <= 0.0 {
                    0.0
                } else if t >= t_ramp {
                    value
                } else {
                    value * t / t_ramp
                }
            }
            Profile::Ricker { f0, t0, amplitude } => ricker(t, f0, t0, amplitude),
        }
    }
}

/// Ricker wavelet: second derivative of a Gaussian, peak `a` at `t0`.
pub fn ricker(t: f64, f0: f64, t0: f64, a: f64) -> f64 {
    let arg = PI * PI * f0 * f0 * (t - t0) * (t - t0);
    a * (1.0 - 2.0 * arg) * (-arg).exp()
}

#[derive(Debug, Clone)]
pub struct PointForce {
    pub particle: usize,
    pub direction: Vector3<f64>,
    pub profile: Profile,
}

#[derive(Debug, Clone)]
pub struct EndMoment {
    pub particle: usize,
    pub axis: Vector3<f64>,
    pub profile: Profile,
}

/// External loads, clamped particles and quasi-static damping.
#[derive(Debug, Clone)]
pub struct LoadSet {
    pub point_forces: Vec<PointForce>,
    pub end_moments: Vec<EndMoment>,
    /// Per-particle flag; fixed particles keep X = X0, Q = Id for the run.
    pub fixed: Vec<bool>,
    /// Momentum decay rate gamma (1/s); quasi-statics only.
    pub damping: f64,
}

impl LoadSet {
    pub fn free(n_particles: usize) -> Self {
        LoadSet {
            point_forces: Vec::new(),
            end_moments: Vec::new(),
            fixed: vec![false; n_particles],
            damping: 0.0,
        }
    }
}

/// Assembled per-particle loads and the potential energy pieces, all
/// evaluated at one configuration.
#[derive(Debug, Clone)]
pub struct Assembled {
    pub force: Vec<Vector3<f64>>,
    pub moment: Vec<Vector3<f64>>,
    pub eps_v: Vec<f64>,
    /// Link stretch energy U_t (J).
    pub u_link: f64,
    /// Volumetric energy U_d (J).
    pub u_vol: f64,
    /// Flexion/torsion energy U_f, offset to vanish at rest (J).
    pub u_flex: f64,
}

impl Assembled {
    pub fn potential(&self) -> f64 {
        self.u_link + self.u_vol + self.u_flex
    }
}

struct LinkContribution {
    f_i: Vector3<f64>,
    m_i: Vector3<f64>,
    m_j: Vector3<f64>,
    u_link: f64,
    u_flex: f64,
}

/// Internal link loads plus external point forces and end moments at time `t`.
///
/// Evaluation is pure in (mesh, states, t); links are processed in parallel
/// and per-particle sums run over the fixed adjacency order, so results are
/// bit-identical for any worker count.
pub fn assemble(mesh: &Mesh, states: &StateArray, loads: &LoadSet, t: f64) -> Result<Assembled> {
    let kin = link_kinematics(mesh, states)?;
    let eps_v = volumetric_strain_from(mesh, &kin);
    let material = &mesh.material;

    let eval_link = |(link, k): (&Link, &LinkKinematics)| {
        let eps_link = 0.5 * (eps_v[link.i] + eps_v[link.j]);
        let f_i = link_force(link, k, eps_link, material);
        let torques = link_torques(link, &states[link.i], &states[link.j], k, eps_link, material);
        let si = states[link.i].q;
        let sj = states[link.j].q;
        let c_flex = link.area / link.d0;
        let u_flex = c_flex
            * (link.alpha_n * (1.0 - (sj * link.n0).dot(&(si * link.n0)))
                + link.alpha_s * (1.0 - (sj * link.s0).dot(&(si * link.s0)))
                + link.alpha_t * (1.0 - (sj * link.t0).dot(&(si * link.t0))));
        let u_link = 0.5 * material.link_modulus() * link.area / link.d0 * k.du.norm_squared();
        LinkContribution {
            f_i,
            m_i: torques.total_i(),
            m_j: torques.total_j(),
            u_link,
            u_flex,
        }
    };
    let contributions: Vec<LinkContribution> = if mesh.links.len() >= PARALLEL_THRESHOLD {
        mesh.links.par_iter().zip(&kin).map(eval_link).collect()
    } else {
        mesh.links.iter().zip(&kin).map(eval_link).collect()
    };

    let n = mesh.n_particles();
    let sum_force = |p: usize| {
        let mut f = Vector3::zeros();
        for &l in &mesh.adjacency[p] {
            if mesh.links[l].i == p {
                f += contributions[l].f_i;
            } else {
                f -= contributions[l].f_i;
            }
        }
        f
    };
    let sum_moment = |p: usize| {
        let mut m = Vector3::zeros();
        for &l in &mesh.adjacency[p] {
            if mesh.links[l].i == p {
                m += contributions[l].m_i;
            } else {
                m += contributions[l].m_j;
            }
        }
        m
    };
    let (mut force, mut moment): (Vec<Vector3<f64>>, Vec<Vector3<f64>>) =
        if n >= PARALLEL_THRESHOLD {
            (
                (0..n).into_par_iter().map(sum_force).collect(),
                (0..n).into_par_iter().map(sum_moment).collect(),
            )
        } else {
            ((0..n).map(sum_force).collect(), (0..n).map(sum_moment).collect())
        };

    for pf in &loads.point_forces {
        force[pf.particle] += pf.direction * pf.profile.value(t);
    }
    for em in &loads.end_moments {
        moment[em.particle] += em.axis * em.profile.value(t);
    }
    for (p, &fx) in loads.fixed.iter().enumerate() {
        if fx {
            force[p] = Vector3::zeros();
            moment[p] = Vector3::zeros();
        }
    }

    let u_link: f64 = contributions.iter().map(|c| c.u_link).sum();
    let u_flex: f64 = contributions.iter().map(|c| c.u_flex).sum();
    let lambda = material.lame_lambda();
    let u_vol: f64 = (0..n)
        .map(|p| 0.5 * lambda * mesh.corrected_volume[p] * eps_v[p] * eps_v[p])
        .sum();

    Ok(Assembled { force, moment, eps_v, u_link, u_vol, u_flex })
}

/// Potential energy terms (U_t, U_d, U_f, total); U_f is reported relative
/// to its rest value.
pub fn potential_energy(mesh: &Mesh, states: &StateArray) -> Result<(f64, f64, f64, f64)> {
    let loads = LoadSet::free(mesh.n_particles());
    let a = assemble(mesh, states, &loads, 0.0)?;
    Ok((a.u_link, a.u_vol, a.u_flex, a.potential()))
}

/// Sum of assembled internal torques about the world origin; zero for any
/// configuration because the potential is rotation-invariant.
pub fn total_moment_about_origin(assembled: &Assembled, states: &StateArray) -> Vector3<f64> {
    let mut m = Vector3::zeros();
    for (s, (f, mm)) in states
        .iter()
        .zip(assembled.force.iter().zip(&assembled.moment))
    {
        m += s.x.cross(f) + mm;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::rotation_about;
    use crate::mesh::{build_box_lattice, MaterialParams};
    use crate::state::init_rest;
    use approx::assert_relative_eq;

    fn two_cubes(e: f64, nu: f64) -> Mesh {
        build_box_lattice([2.0, 1.0, 1.0], [2, 1, 1], MaterialParams::new(e, nu, 1.0).unwrap())
            .unwrap()
    }

    #[test]
    fn rest_state_has_no_kinematics() {
        let mesh = two_cubes(1.0, 0.25);
        let states = init_rest(&mesh);
        let l = &mesh.links[0];
        let k = interface_displacement(&states[0], &states[1], l).unwrap();
        assert_relative_eq!(k.du, Vector3::zeros(), epsilon = 1e-15);
        assert_relative_eq!(k.dist, l.d0, epsilon = 1e-15);
        assert_relative_eq!(k.n, l.n0, epsilon = 1e-15);
    }

    #[test]
    fn pure_stretch_displacement() {
        let mesh = two_cubes(1.0, 0.25);
        let mut states = init_rest(&mesh);
        let delta = 0.01;
        states[1].x += delta * Vector3::x();
        let k = interface_displacement(&states[0], &states[1], &mesh.links[0]).unwrap();
        assert_relative_eq!(k.du, delta * Vector3::x(), epsilon = 1e-15);
    }

    #[test]
    fn rigid_motion_produces_no_displacement() {
        let mesh = two_cubes(1.0, 0.25);
        let mut states = init_rest(&mesh);
        let r = rotation_about(&Vector3::new(1.0, 1.0, -0.4).normalize(), 0.8);
        let shift = Vector3::new(0.3, -0.2, 1.1);
        for s in states.iter_mut() {
            s.x = r * s.x + shift;
            s.q = r * s.q;
        }
        let k = interface_displacement(&states[0], &states[1], &mesh.links[0]).unwrap();
        assert_relative_eq!(k.du, Vector3::zeros(), epsilon = 1e-14);
        let a = assemble(&mesh, &states, &LoadSet::free(2), 0.0).unwrap();
        for f in &a.force {
            assert_relative_eq!(*f, Vector3::zeros(), epsilon = 1e-14);
        }
        for m in &a.moment {
            assert_relative_eq!(*m, Vector3::zeros(), epsilon = 1e-14);
        }
        let (ut, ud, uf, _) = potential_energy(&mesh, &states).unwrap();
        assert_relative_eq!(ut, 0.0, epsilon = 1e-14);
        assert_relative_eq!(ud, 0.0, epsilon = 1e-14);
        assert_relative_eq!(uf, 0.0, epsilon = 1e-13);
    }

    #[test]
    fn coincident_centers_is_singular() {
        let mesh = two_cubes(1.0, 0.25);
        let mut states = init_rest(&mesh);
        states[1].x = states[0].x;
        assert!(interface_displacement(&states[0], &states[1], &mesh.links[0]).is_err());
    }

    #[test]
    fn uniform_dilation_volumetric_strain() {
        // Interior particle of a 3x3x3 unit lattice under uniform dilation.
        let mesh = build_box_lattice(
            [3.0, 3.0, 3.0],
            [3, 3, 3],
            MaterialParams::new(1.0, 0.25, 1.0).unwrap(),
        )
        .unwrap();
        let mut states = init_rest(&mesh);
        let center = Vector3::new(1.5, 1.5, 1.5);
        let e = 1e-3;
        for s in states.iter_mut() {
            s.x = center + (1.0 + e) * (s.x - center);
        }
        let eps = volumetric_strain(&mesh, &states).unwrap();
        let interior = mesh.particles.iter().find(|p| p.free_faces.is_empty()).unwrap();
        assert_relative_eq!(eps[interior.id], 3.0 * e, max_relative = 1e-12);
    }

    #[test]
    fn bar_cell_free_surface_denominator() {
        // Middle cell of a 3-cube bar: 4 lateral free faces, V^l = 2/3,
        // denominator 1 + 1.5 * 2/3 = 2 at nu = 0.25.
        let mesh = build_box_lattice(
            [3.0, 1.0, 1.0],
            [3, 1, 1],
            MaterialParams::new(1.0, 0.25, 1.0).unwrap(),
        )
        .unwrap();
        assert_relative_eq!(mesh.particles[1].free_volume, 2.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(mesh.corrected_volume[1], 2.0, epsilon = 1e-15);
        let mut states = init_rest(&mesh);
        let e = 1e-3;
        states[0].x -= e * Vector3::x();
        states[2].x += e * Vector3::x();
        let eps = volumetric_strain(&mesh, &states).unwrap();
        // Both axial links stretch by e: eps^v = 2 * (1/2) * e / 2 = e/2,
        // the trace of uniaxial stress at nu = 0.25.
        assert_relative_eq!(eps[1], e / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn link_force_example_values() {
        let mesh = two_cubes(1.0, 0.25);
        let l = &mesh.links[0];
        let kin = LinkKinematics {
            du: Vector3::new(0.01, 0.0, 0.0),
            dist: 1.0,
            n: Vector3::x(),
            du_n: 0.01,
        };
        let f = link_force(l, &kin, 0.005, &mesh.material);
        assert_relative_eq!(f, Vector3::new(0.01, 0.0, 0.0), max_relative = 1e-12);
    }

    #[test]
    fn relative_bend_torque_matches_beam_stiffness() {
        let mesh = two_cubes(1.0, 0.25);
        let l = &mesh.links[0];
        let mut states = init_rest(&mesh);
        let theta = 0.05;
        states[1].q = rotation_about(&l.t0, theta);
        let kin = interface_displacement(&states[0], &states[1], l).unwrap();
        let torques = link_torques(l, &states[0], &states[1], &kin, 0.0, &mesh.material);
        // n and s pairs each contribute: |M^f| = (S/D0)(alpha_n + alpha_s) sin(theta)
        // = E Is sin(theta) / D0.
        let expected = mesh.material.young * l.moment_s * theta.sin() / l.d0;
        assert_relative_eq!(torques.flexion_i.dot(&l.t0), expected, max_relative = 1e-12);
        assert_relative_eq!(torques.flexion_j, -torques.flexion_i, epsilon = 0.0);
    }

    #[test]
    fn global_rotation_kills_flexion_torque() {
        let mesh = two_cubes(1.0, 0.25);
        let l = &mesh.links[0];
        let mut states = init_rest(&mesh);
        let r = rotation_about(&Vector3::new(0.2, 1.0, 0.5).normalize(), 1.2);
        for s in states.iter_mut() {
            s.x = r * s.x;
            s.q = r * s.q;
        }
        let kin = interface_displacement(&states[0], &states[1], l).unwrap();
        let torques = link_torques(l, &states[0], &states[1], &kin, 0.0, &mesh.material);
        assert_relative_eq!(torques.flexion_i, Vector3::zeros(), epsilon = 1e-14);
    }

    #[test]
    fn assemble_rest_and_point_force() {
        let mesh = two_cubes(1.0, 0.25);
        let states = init_rest(&mesh);
        let mut loads = LoadSet::free(2);
        let a = assemble(&mesh, &states, &loads, 0.0).unwrap();
        assert_relative_eq!(a.force[0], Vector3::zeros(), epsilon = 0.0);
        assert_relative_eq!(a.moment[1], Vector3::zeros(), epsilon = 0.0);

        loads.point_forces.push(PointForce {
            particle: 1,
            direction: Vector3::new(0.0, 2.0, 0.0),
            profile: Profile::Constant { value: 3.0 },
        });
        let a = assemble(&mesh, &states, &loads, 0.0).unwrap();
        assert_relative_eq!(a.force[1], Vector3::new(0.0, 6.0, 0.0), epsilon = 0.0);
        assert_relative_eq!(a.force[0], Vector3::zeros(), epsilon = 0.0);
    }

    #[test]
    fn internal_forces_sum_to_zero() {
        let mesh = build_box_lattice(
            [2.0, 2.0, 1.0],
            [2, 2, 1],
            MaterialParams::new(5.0, 0.3, 1.0).unwrap(),
        )
        .unwrap();
        let mut states = init_rest(&mesh);
        for (k, s) in states.iter_mut().enumerate() {
            let a = 0.02 * (k as f64 + 1.0);
            s.x += Vector3::new(a, -0.5 * a, 0.3 * a);
            s.q = rotation_about(&Vector3::new(0.1, 0.9, 0.3).normalize(), a);
        }
        let a = assemble(&mesh, &states, &LoadSet::free(4), 0.0).unwrap();
        let total: Vector3<f64> = a.force.iter().sum();
        assert_relative_eq!(total, Vector3::zeros(), epsilon = 1e-14);
        // Rotation invariance of U makes the total moment about the origin vanish.
        let m = total_moment_about_origin(&a, &states);
        assert_relative_eq!(m, Vector3::zeros(), epsilon = 1e-13);
    }

    #[test]
    fn stretch_energy_example() {
        let mesh = two_cubes(1.0, 0.0);
        let mut states = init_rest(&mesh);
        states[1].x += 0.01 * Vector3::x();
        let (ut, ud, _, _) = potential_energy(&mesh, &states).unwrap();
        assert_relative_eq!(ut, 5e-5, max_relative = 1e-12);
        assert_relative_eq!(ud, 0.0, epsilon = 1e-300);
    }

    #[test]
    fn ricker_examples() {
        assert_relative_eq!(ricker(0.3, 14.5, 0.3, 2.5), 2.5, epsilon = 1e-15);
        let f0 = 14.5;
        let zero_offset = 1.0 / (PI * f0 * 2.0_f64.sqrt());
        assert_relative_eq!(ricker(0.3 + zero_offset, f0, 0.3, 2.5), 0.0, epsilon = 1e-12);
        assert!(ricker(0.3 + 100.0 / f0, f0, 0.3, 1.0).abs() < 1e-300);
    }

    #[test]
    fn gradient_consistency_translation_spot_check() {
        let mesh = build_box_lattice(
            [2.0, 2.0, 2.0],
            [2, 2, 2],
            MaterialParams::new(3.0, 0.3, 1.0).unwrap(),
        )
        .unwrap();
        let mut states = init_rest(&mesh);
        for (k, s) in states.iter_mut().enumerate() {
            let a = 0.003 * (k as f64 - 3.0);
            s.x += Vector3::new(a, a * a, -0.5 * a);
            s.q = rotation_about(&Vector3::new(1.0, 0.2 * k as f64, -0.3).normalize(), 2.0 * a);
        }
        let loads = LoadSet::free(8);
        let a = assemble(&mesh, &states, &loads, 0.0).unwrap();
        let p = 3;
        let dir = Vector3::new(0.6, -0.7, 0.27).normalize();
        let h = 1e-6;
        let mut plus = states.clone();
        plus[p].x += 0.5 * h * dir;
        let mut minus = states.clone();
        minus[p].x -= 0.5 * h * dir;
        let up = assemble(&mesh, &plus, &loads, 0.0).unwrap().potential();
        let um = assemble(&mesh, &minus, &loads, 0.0).unwrap().potential();
        let fd = (up - um) / h;
        assert_relative_eq!(fd, -a.force[p].dot(&dir), max_relative = 1e-7);

        // Rotation direction: dU matches -moment . dtheta.
        let axis = Vector3::new(0.2, 0.5, -0.9).normalize();
        let mut qplus = states.clone();
        qplus[p].q = rotation_about(&axis, 0.5 * h) * qplus[p].q;
        let mut qminus = states.clone();
        qminus[p].q = rotation_about(&axis, -0.5 * h) * qminus[p].q;
        let up = assemble(&mesh, &qplus, &loads, 0.0).unwrap().potential();
        let um = assemble(&mesh, &qminus, &loads, 0.0).unwrap().potential();
        let fd = (up - um) / h;
        assert_relative_eq!(fd, -a.moment[p].dot(&axis), max_relative = 1e-7);
    }
}
