//! JSON scenario configuration and its resolution into meshes and load sets.

use crate::error::Error;
use crate::mechanics::{EndMoment, LoadSet, PointForce, Profile};
use crate::mesh::{
    build_box_lattice_with, build_cylinder_shell, build_hemisphere_shell, BoxOptions,
    MaterialParams, Mesh,
};
use crate::Result;
use nalgebra::Vector3;
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub geometry: GeometryConfig,
    pub material: MaterialConfig,
    #[serde(default)]
    pub loads: LoadsConfig,
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeometryConfig {
    Box {
        extent: [f64; 3],
        counts: [usize; 3],
        /// Axes treated as slices of an infinite stack (no stress-free
        /// faces); used by two-dimensional plane-strain setups.
        #[serde(default)]
        plane_strain_axes: Vec<Axis>,
    },
    Cylinder {
        radius: f64,
        height: f64,
        thickness: f64,
        /// [n_theta, n_z, n_r]
        counts: [usize; 3],
    },
    Hemisphere {
        radius: f64,
        thickness: f64,
        cutout_deg: f64,
        /// [n_lat, n_lon, n_r]
        counts: [usize; 3],
    },
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialConfig {
    pub young: f64,
    pub poisson: f64,
    pub density: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadsConfig {
    #[serde(default)]
    pub point_forces: Vec<PointForceConfig>,
    #[serde(default)]
    pub end_moments: Vec<EndMomentConfig>,
    /// Equal and opposite constant forces on two particle groups, directed
    /// along the line joining their centroids (a toward b).
    #[serde(default)]
    pub pinch_pairs: Vec<PinchPairConfig>,
    #[serde(default)]
    pub fixed: Vec<Selector>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointForceConfig {
    pub particles: Selector,
    pub direction: [f64; 3],
    pub profile: ProfileConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndMomentConfig {
    pub particles: Selector,
    pub axis: [f64; 3],
    pub profile: ProfileConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PinchPairConfig {
    pub a: Selector,
    pub b: Selector,
    /// Force magnitude applied to every particle of each group (N).
    pub force: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileConfig {
    Constant { value: f64 },
    Ramp { value: f64, t_ramp: f64 },
    Ricker { f0: f64, t0: f64, amplitude: f64 },
}

impl ProfileConfig {
    pub fn to_profile(self) -> Result<Profile> {
        Ok(match self {
            ProfileConfig::Constant { value } => Profile::Constant { value },
            ProfileConfig::Ramp { value, t_ramp } => {
                if !(t_ramp >= 0.0) {
                    return Err(Error::Config("profile.t_ramp must be >= 0".into()));
                }
                Profile::Ramp { value, t_ramp }
            }
            ProfileConfig::Ricker { f0, t0, amplitude } => {
                if !(f0 > 0.0) {
                    return Err(Error::Config(format!("ricker profile needs f0 > 0, got {f0}")));
                }
                Profile::Ricker { f0, t0, amplitude }
            }
        })
    }
}

/// Particle selection, either explicit ids or an axis-aligned box predicate
/// on initial centers of mass.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Selector {
    #[serde(default)]
    pub ids: Option<Vec<usize>>,
    #[serde(rename = "box", default)]
    pub box_region: Option<BoxRegion>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxRegion {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Selector {
    /// Sorted, deduplicated particle ids; errors when nothing matches.
    pub fn resolve(&self, mesh: &Mesh, context: &str) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        if let Some(ids) = &self.ids {
            for &id in ids {
                if id >= mesh.n_particles() {
                    return Err(Error::Config(format!(
                        "{context}: particle id {id} out of range (mesh has {})",
                        mesh.n_particles()
                    )));
                }
                out.push(id);
            }
        }
        if let Some(region) = &self.box_region {
            for p in &mesh.particles {
                let inside = (0..3).all(|k| p.x0[k] >= region.min[k] && p.x0[k] <= region.max[k]);
                if inside {
                    out.push(p.id);
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        if out.is_empty() {
            return Err(Error::Config(format!("{context}: selector matches no particles")));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    /// Explicit time step; when absent, `cfl_factor` scales the wave-speed
    /// based suggestion.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_cfl_factor")]
    pub cfl_factor: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    pub n_steps: usize,
    #[serde(default)]
    pub damping: f64,
    #[serde(default)]
    pub cfl_guard: bool,
}

fn default_cfl_factor() -> f64 {
    0.25
}
fn default_tol() -> f64 {
    1e-12
}
fn default_max_iter() -> usize {
    100
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub probes: Vec<Selector>,
    #[serde(default = "default_probe_stride")]
    pub probe_stride: usize,
    /// 0 disables VTK snapshots.
    #[serde(default)]
    pub snapshot_stride: usize,
}

fn default_probe_stride() -> usize {
    10
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { probes: Vec::new(), probe_stride: default_probe_stride(), snapshot_stride: 0 }
    }
}

/// Parses and validates a JSON scenario document.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let config: ScenarioConfig =
        serde_json::from_str(text).map_err(|e| Error::Config(format!("scenario JSON: {e}")))?;
    // Material ranges are validated eagerly so errors name the right block.
    MaterialParams::new(
        config.material.young,
        config.material.poisson,
        config.material.density,
    )
    .map_err(|e| Error::Config(format!("material: {e}")))?;
    if config.solver.n_steps == 0 {
        return Err(Error::Config("solver.n_steps must be >= 1".into()));
    }
    if let Some(dt) = config.solver.dt {
        if !(dt > 0.0) {
            return Err(Error::Config(format!("solver.dt must be > 0, got {dt}")));
        }
    }
    if !(config.solver.cfl_factor > 0.0 && config.solver.cfl_factor <= 1.0) {
        return Err(Error::Config(format!(
            "solver.cfl_factor must lie in (0, 1], got {}",
            config.solver.cfl_factor
        )));
    }
    if config.output.probe_stride == 0 {
        return Err(Error::Config("output.probe_stride must be >= 1".into()));
    }
    Ok(config)
}

/// Builds the mesh described by the geometry and material blocks.
pub fn build_mesh(config: &ScenarioConfig) -> Result<Mesh> {
    let material = MaterialParams::new(
        config.material.young,
        config.material.poisson,
        config.material.density,
    )?;
    match &config.geometry {
        GeometryConfig::Box { extent, counts, plane_strain_axes } => {
            let mut options = BoxOptions::default();
            for axis in plane_strain_axes {
                options.plane_strain_axes[*axis as usize] = true;
            }
            build_box_lattice_with(*extent, *counts, material, options)
        }
        GeometryConfig::Cylinder { radius, height, thickness, counts } => {
            build_cylinder_shell(*radius, *height, *thickness, *counts, material)
        }
        GeometryConfig::Hemisphere { radius, thickness, cutout_deg, counts } => {
            build_hemisphere_shell(*radius, *thickness, *cutout_deg, *counts, material)
        }
    }
}

/// Resolves the loads block against a mesh.
pub fn build_loads(config: &ScenarioConfig, mesh: &Mesh) -> Result<LoadSet> {
    let mut loads = LoadSet::free(mesh.n_particles());
    loads.damping = config.solver.damping;
    for (k, pf) in config.loads.point_forces.iter().enumerate() {
        let ids = pf.particles.resolve(mesh, &format!("loads.point_forces[{k}].particles"))?;
        let direction = Vector3::from(pf.direction);
        let profile = pf.profile.to_profile()?;
        for id in ids {
            loads.point_forces.push(PointForce { particle: id, direction, profile });
        }
    }
    for (k, em) in config.loads.end_moments.iter().enumerate() {
        let ids = em.particles.resolve(mesh, &format!("loads.end_moments[{k}].particles"))?;
        let axis = Vector3::from(em.axis);
        let profile = em.profile.to_profile()?;
        for id in ids {
            loads.end_moments.push(EndMoment { particle: id, axis, profile });
        }
    }
    for (k, pinch) in config.loads.pinch_pairs.iter().enumerate() {
        let a = pinch.a.resolve(mesh, &format!("loads.pinch_pairs[{k}].a"))?;
        let b = pinch.b.resolve(mesh, &format!("loads.pinch_pairs[{k}].b"))?;
        let centroid = |ids: &[usize]| -> Vector3<f64> {
            ids.iter().map(|&i| mesh.particles[i].x0).sum::<Vector3<f64>>() / ids.len() as f64
        };
        let dir = centroid(&b) - centroid(&a);
        let norm = dir.norm();
        if norm <= 1e-12 {
            return Err(Error::Config(format!(
                "loads.pinch_pairs[{k}]: groups share a centroid"
            )));
        }
        let dir = dir / norm;
        for &id in &a {
            loads.point_forces.push(PointForce {
                particle: id,
                direction: dir,
                profile: Profile::Constant { value: pinch.force },
            });
        }
        for &id in &b {
            loads.point_forces.push(PointForce {
                particle: id,
                direction: -dir,
                profile: Profile::Constant { value: pinch.force },
            });
        }
    }
    for (k, sel) in config.loads.fixed.iter().enumerate() {
        for id in sel.resolve(mesh, &format!("loads.fixed[{k}]"))? {
            loads.fixed[id] = true;
        }
    }
    Ok(loads)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "geometry": {"generator": "box", "extent": [1.0, 1.0, 1.0], "counts": [2, 2, 2]},
        "material": {"young": 1.0e9, "poisson": 0.3, "density": 1000.0},
        "solver": {"n_steps": 10}
    }"#;

    #[test]
    fn minimal_document_gets_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.solver.tol, 1e-12);
        assert_eq!(cfg.solver.max_iter, 100);
        assert_eq!(cfg.solver.cfl_factor, 0.25);
        assert_eq!(cfg.solver.damping, 0.0);
        assert_eq!(cfg.output.probe_stride, 10);
        let mesh = build_mesh(&cfg).unwrap();
        assert_eq!(mesh.n_particles(), 8);
        let loads = build_loads(&cfg, &mesh).unwrap();
        assert!(loads.point_forces.is_empty());
    }

    #[test]
    fn poisson_out_of_range_is_rejected() {
        let text = MINIMAL.replace("0.3", "0.6");
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("Poisson"), "{err}");
    }

    #[test]
    fn missing_geometry_is_rejected() {
        let text = r#"{
            "material": {"young": 1.0, "poisson": 0.0, "density": 1.0},
            "solver": {"n_steps": 1}
        }"#;
        let err = parse_config(text).unwrap_err().to_string();
        assert!(err.contains("geometry"), "{err}");
    }

    #[test]
    fn selector_resolution_and_failures() {
        let cfg = parse_config(MINIMAL).unwrap();
        let mesh = build_mesh(&cfg).unwrap();
        let sel = Selector {
            ids: None,
            box_region: Some(BoxRegion { min: [0.0, 0.0, 0.0], max: [0.3, 1.0, 1.0] }),
        };
        let ids = sel.resolve(&mesh, "test").unwrap();
        assert_eq!(ids.len(), 4); // the x = 0.25 layer
        let empty = Selector {
            ids: None,
            box_region: Some(BoxRegion { min: [5.0, 5.0, 5.0], max: [6.0, 6.0, 6.0] }),
        };
        assert!(empty.resolve(&mesh, "test").is_err());
        let out_of_range = Selector { ids: Some(vec![99]), box_region: None };
        assert!(out_of_range.resolve(&mesh, "test").is_err());
    }
}
