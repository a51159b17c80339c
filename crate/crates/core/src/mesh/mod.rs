//! Particle lattices and per-link interface geometry.
//!
//! A mesh is an immutable set of rigid polyhedral particles plus the links
//! across their shared interfaces. Everything the force evaluation needs is
//! precomputed here: interface areas and triads, lever arms, interface second
//! moments, flexion/torsion coefficients, and the free volumes that correct
//! the volumetric strain of boundary particles.

mod box_lattice;
mod face;
mod shell;

pub use box_lattice::{build_box_lattice, build_box_lattice_with, BoxOptions};
pub use face::{flexion_coefficients, link_geometry};
pub use shell::{build_cylinder_shell, build_hemisphere_shell};

use crate::error::Error;
use crate::Result;
use nalgebra::{Matrix3, Vector3};

/// Continuum constants shared by every link of a body.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    /// Young modulus (Pa).
    pub young: f64,
    /// Poisson ratio, anywhere in (-1, 0.5).
    pub poisson: f64,
    /// Density (kg/m^3).
    pub density: f64,
}

impl MaterialParams {
    pub fn new(young: f64, poisson: f64, density: f64) -> Result<Self> {
        if !(young > 0.0) {
            return Err(Error::Config(format!("Young modulus must be > 0, got {young}")));
        }
        if !(density > 0.0) {
            return Err(Error::Config(format!("density must be > 0, got {density}")));
        }
        if !(poisson > -1.0 && poisson < 0.5) {
            return Err(Error::Config(format!(
                "Poisson ratio must lie in (-1, 0.5), got {poisson}"
            )));
        }
        Ok(Self { young, poisson, density })
    }

    /// First Lame coefficient \lambda = E nu / ((1+nu)(1-2nu)).
    #[inline]
    pub fn lame_lambda(&self) -> f64 {
        self.young * self.poisson / ((1.0 + self.poisson) * (1.0 - 2.0 * self.poisson))
    }

    /// Link stiffness prefactor E / (1+nu) (twice the shear modulus).
    #[inline]
    pub fn link_modulus(&self) -> f64 {
        self.young / (1.0 + self.poisson)
    }

    /// Compressional wave speed sqrt((lambda + 2 mu) / rho).
    pub fn p_wave_speed(&self) -> f64 {
        let m = self.young * (1.0 - self.poisson)
            / ((1.0 + self.poisson) * (1.0 - 2.0 * self.poisson));
        (m / self.density).sqrt()
    }

    /// Shear wave speed sqrt(mu / rho) with mu = E / (2(1+nu)).
    pub fn s_wave_speed(&self) -> f64 {
        (self.young / (2.0 * (1.0 + self.poisson) * self.density)).sqrt()
    }

    /// Coefficient 3 nu / (1 - 2 nu) weighting the free volume in the
    /// corrected cell volume.
    #[inline]
    pub fn free_volume_weight(&self) -> f64 {
        3.0 * self.poisson / (1.0 - 2.0 * self.poisson)
    }
}

/// One stress-free boundary face of a particle.
#[derive(Debug, Clone, Copy)]
pub struct FreeFace {
    /// Outward unit normal of the face plane.
    pub normal: Vector3<f64>,
    /// Face area (m^2).
    pub area: f64,
    /// Distance from the particle center of mass to the face plane (m).
    pub distance: f64,
}

impl FreeFace {
    /// Volume of the pyramid with this face as basis and the particle
    /// center as apex.
    #[inline]
    pub fn pyramid_volume(&self) -> f64 {
        self.area * self.distance / 3.0
    }
}

/// Immutable per-particle geometry and inertia.
#[derive(Debug, Clone)]
pub struct ParticleGeom {
    pub id: usize,
    /// Initial center of mass (m).
    pub x0: Vector3<f64>,
    /// Volume (m^3).
    pub volume: f64,
    /// Mass = density * volume (kg).
    pub mass: f64,
    /// Principal moments of inertia I1..I3 (kg m^2).
    pub inertia: Vector3<f64>,
    /// Columns are the initial principal axes e1, e2, e3 (world frame,
    /// right-handed). Identity for axis-aligned boxes.
    pub axes: Matrix3<f64>,
    /// d_i = (I1 + I2 + I3)/2 - I_i, all positive for three-dimensional
    /// bodies; diagonal of the D matrix used by the rotation update.
    pub d: Vector3<f64>,
    /// Sum of pyramid volumes over the stress-free faces (m^3).
    pub free_volume: f64,
    pub free_faces: Vec<FreeFace>,
    /// Initial corner positions, VTK hexahedron ordering; used for snapshots.
    pub corners: [Vector3<f64>; 8],
}

/// Precomputed interface geometry between two linked particles.
#[derive(Debug, Clone)]
pub struct Link {
    pub i: usize,
    pub j: usize,
    /// Interface area S (m^2).
    pub area: f64,
    /// Initial center-to-center distance D0 (m).
    pub d0: f64,
    /// Initial unit normal, pointing from particle i to particle j.
    pub n0: Vector3<f64>,
    /// Interface tangent references; (n0, s0, t0) is right-handed orthonormal.
    pub s0: Vector3<f64>,
    pub t0: Vector3<f64>,
    /// Lever arms from each initial center of mass to the interface centroid.
    pub lever_i: Vector3<f64>,
    pub lever_j: Vector3<f64>,
    /// Interface second moments about the s and t axes through the centroid (m^4).
    pub moment_s: f64,
    pub moment_t: f64,
    /// Flexion/torsion coefficients (N m^... E * m^2 scale).
    pub alpha_n: f64,
    pub alpha_s: f64,
    pub alpha_t: f64,
}

/// A complete immutable lattice: particles, links and adjacency.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub particles: Vec<ParticleGeom>,
    pub links: Vec<Link>,
    /// Link indices incident to each particle, in construction order.
    pub adjacency: Vec<Vec<usize>>,
    pub material: MaterialParams,
    /// Corrected volume V + 3 nu/(1-2 nu) V^l entering the volumetric strain.
    pub corrected_volume: Vec<f64>,
}

impl Mesh {
    /// Assembles adjacency and corrected volumes; validates the corrected
    /// volume stays well-conditioned (> 0.05 V, relevant for nu < 0).
    pub(crate) fn assemble(
        particles: Vec<ParticleGeom>,
        links: Vec<Link>,
        material: MaterialParams,
    ) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); particles.len()];
        for (l, link) in links.iter().enumerate() {
            adjacency[link.i].push(l);
            adjacency[link.j].push(l);
        }
        let w = material.free_volume_weight();
        let mut corrected_volume = Vec::with_capacity(particles.len());
        for p in &particles {
            let v = p.volume + w * p.free_volume;
            if v <= 0.05 * p.volume {
                return Err(Error::Mesh(format!(
                    "corrected volume of particle {} is {:.3e} (< 0.05 V = {:.3e}); \
                     free-surface correction ill-conditioned for nu = {}",
                    p.id,
                    v,
                    0.05 * p.volume,
                    material.poisson
                )));
            }
            corrected_volume.push(v);
        }
        Ok(Self { particles, links, adjacency, material, corrected_volume })
    }

    pub fn n_particles(&self) -> usize {
        self.particles.len()
    }

    /// Smallest center-to-center link distance (m).
    pub fn min_link_distance(&self) -> f64 {
        self.links.iter().map(|l| l.d0).fold(f64::INFINITY, f64::min)
    }

    pub fn total_mass(&self) -> f64 {
        self.particles.iter().map(|p| p.mass).sum()
    }
}
