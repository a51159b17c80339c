//! Canned benchmark scenarios: oscillator, cantilever end moment, wave
//! speeds, wave self-convergence, pinched cylinder, hemisphere load.
//!
//! Each demo returns its measured quantities so tests can assert on them,
//! and optionally writes the standard output files.

use super::io::{write_energy_csv, write_probe_csv, write_vtk_snapshot};
use crate::diagnostics::{EnergyReport, ProbeRecord};
use crate::error::Error;
use crate::integrator::{rattle_step, suggest_dt, SolverParams};
use crate::math::linear_fit;
use crate::mechanics::{EndMoment, LoadSet, PointForce, Profile};
use crate::mesh::{
    build_box_lattice_with, build_cylinder_shell, build_hemisphere_shell, BoxOptions,
    MaterialParams, Mesh,
};
use crate::state::{init_rest, StateArray};
use crate::Result;
use nalgebra::{Matrix3, Vector3};
use std::f64::consts::PI;
use std::path::Path;

fn nearest_particle(mesh: &Mesh, target: &Vector3<f64>) -> usize {
    let mut best = 0;
    let mut dist = f64::INFINITY;
    for p in &mesh.particles {
        let d = (p.x0 - target).norm_squared();
        if d < dist {
            dist = d;
            best = p.id;
        }
    }
    best
}

/// Runs damped steps until the centered kinetic energy falls below
/// `ke_fraction` of the potential magnitude (checked every `check_every`
/// steps once `min_steps` have run); returns (steps, last stats).
fn settle(
    mesh: &Mesh,
    states: &mut StateArray,
    loads: &LoadSet,
    params: &SolverParams,
    ke_fraction: f64,
    min_steps: usize,
    max_steps: usize,
    check_every: usize,
) -> Result<(usize, EnergyReport)> {
    let mut last = None;
    for step in 0..max_steps {
        let t = step as f64 * params.dt;
        let stats = rattle_step(mesh, states, loads, params, t, step)?;
        let e = stats.energy;
        if step >= min_steps && step % check_every == 0 {
            let kinetic = e.kinetic_trans + e.kinetic_rot;
            let potential = e.potential().abs();
            if kinetic <= ke_fraction * potential.max(f64::MIN_POSITIVE) {
                return Ok((step + 1, e));
            }
        }
        last = Some(e);
    }
    Ok((max_steps, last.expect("max_steps must be > 0")))
}

// ---------------------------------------------------------------------------
// Two-particle oscillator
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub struct OscillatorOutcome {
    pub period_measured: f64,
    pub period_exact: f64,
    pub energy_deviation: f64,
    pub initial_energy: f64,
}

/// Axial oscillation of two linked unit cubes against the reduced-mass
/// analytic period.
pub fn oscillator(out_dir: Option<&Path>) -> Result<OscillatorOutcome> {
    let mesh = build_box_lattice_with(
        [2.0, 1.0, 1.0],
        [2, 1, 1],
        MaterialParams::new(1.0, 0.0, 1.0)?,
        BoxOptions::default(),
    )?;
    let mut states = init_rest(&mesh);
    let amp = 0.005;
    states[0].x -= amp * Vector3::x();
    states[1].x += amp * Vector3::x();
    let loads = LoadSet::free(2);
    let params = SolverParams { dt: 0.05, tol: 1e-14, max_iter: 100, cfl_guard: false };
    let n_steps = 20_000;

    let mut energy = Vec::new();
    let mut crossings = Vec::new();
    let mut prev = 2.0 * amp;
    for step in 0..n_steps {
        let stats = rattle_step(&mesh, &mut states, &loads, &params, step as f64 * params.dt, step)?;
        if step % 10 == 0 {
            energy.push(stats.energy);
        }
        let r = (states[1].x - states[0].x).x - 1.0;
        let t = (step + 1) as f64 * params.dt;
        if prev < 0.0 && r >= 0.0 {
            crossings.push(t - params.dt * r / (r - prev));
        }
        prev = r;
    }
    let period_measured = if crossings.len() >= 2 {
        (crossings[crossings.len() - 1] - crossings[0]) / (crossings.len() - 1) as f64
    } else {
        f64::NAN
    };
    let h0 = energy[0].total;
    let deviation = energy.iter().map(|e| (e.total - h0).abs()).fold(0.0, f64::max);
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
        write_energy_csv(&energy, &dir.join("energy.csv"))?;
    }
    Ok(OscillatorOutcome {
        period_measured,
        period_exact: 2.0 * PI / 2.0_f64.sqrt(),
        energy_deviation: deviation,
        initial_energy: h0,
    })
}

// ---------------------------------------------------------------------------
// Cantilever bent by an end moment
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub struct CantileverOutcome {
    pub n: usize,
    /// Accumulated tip deflection angle (rad), summed over the link
    /// relative rotations so full turns are not lost.
    pub tip_angle: f64,
    /// Discrete equilibrium value n asin(2 pi / n).
    pub expected: f64,
    pub steps: usize,
    pub kinetic_ratio: f64,
}

/// Clamped chain of n+1 cubes bent into a circle by the tip moment
/// 2 pi E I / L; damped until static.
pub fn cantilever(n: usize, out_dir: Option<&Path>) -> Result<CantileverOutcome> {
    if n < 4 {
        return Err(Error::Config("cantilever needs at least 4 elements".into()));
    }
    let a = 1.0 / n as f64;
    let material = MaterialParams::new(1.0, 0.25, 1.0)?;
    let mesh = build_box_lattice_with(
        [(n as f64 + 1.0) * a, a, a],
        [n + 1, 1, 1],
        material,
        BoxOptions::default(),
    )?;
    let inertia_moment = a.powi(4) / 12.0;
    let length = n as f64 * a;
    let m_max = 2.0 * PI * material.young * inertia_moment / length;

    let omega1 = 3.516 * (material.young * inertia_moment / (material.density * a * a)).sqrt()
        / (length * length);
    let dt = suggest_dt(&mesh, 0.25);
    let t_ramp = 2.0 * 2.0 * PI / omega1;

    let mut loads = LoadSet::free(n + 1);
    loads.fixed[0] = true;
    loads.damping = 2.0 * omega1;
    loads.end_moments.push(EndMoment {
        particle: n,
        axis: Vector3::z(),
        profile: Profile::Ramp { value: m_max, t_ramp },
    });
    let params = SolverParams { dt, tol: 1e-12, max_iter: 100, cfl_guard: false };

    let mut states = init_rest(&mesh);
    let min_steps = (1.5 * t_ramp / dt) as usize;
    let max_steps = 500 * n * n + min_steps;
    let (steps, last) =
        settle(&mesh, &mut states, &loads, &params, 1e-12, min_steps, max_steps, 1000)?;

    let mut tip_angle = 0.0;
    for k in 0..n {
        let rel = states[k].q.transpose() * states[k + 1].q;
        tip_angle += crate::diagnostics::rotation_vector(&rel).z;
    }
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
        write_vtk_snapshot(&mesh, &states, &dir.join("cantilever_final.vtk"))?;
    }
    Ok(CantileverOutcome {
        n,
        tip_angle,
        expected: n as f64 * (2.0 * PI / n as f64).asin(),
        steps,
        kinetic_ratio: (last.kinetic_trans + last.kinetic_rot) / last.potential().abs(),
    })
}

// ---------------------------------------------------------------------------
// Wave speeds in a plane-strain slab
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub struct WaveSpeedOutcome {
    pub p_speed: f64,
    pub s_speed: f64,
    pub p_expected: f64,
    pub s_expected: f64,
}

/// Compressional and shear arrival speeds in a 200 x 100 plane-strain slab
/// (h = 5 m) excited by a Ricker point force; probes sit on the axes of the
/// radiation pattern so each family is picked up cleanly.
pub fn wave_speed(out_dir: Option<&Path>) -> Result<WaveSpeedOutcome> {
    let h = 5.0;
    let material = MaterialParams::new(1.88e10, 0.25, 2200.0)?;
    let mesh = build_box_lattice_with(
        [1000.0, 500.0, h],
        [200, 100, 1],
        material,
        BoxOptions { plane_strain_axes: [false, false, true] },
    )?;
    let source = nearest_particle(&mesh, &Vector3::new(497.5, 247.5, 2.5));
    let src_pos = mesh.particles[source].x0;

    let mut loads = LoadSet::free(mesh.n_particles());
    loads.point_forces.push(PointForce {
        particle: source,
        direction: Vector3::x(),
        profile: Profile::Ricker { f0: 14.5, t0: 0.1, amplitude: 1e9 },
    });

    let p_offsets = [150.0, 200.0, 250.0, 300.0, 350.0];
    let s_offsets = [75.0, 100.0, 125.0, 150.0, 175.0];
    let mut p_probes: Vec<ProbeRecord> = p_offsets
        .iter()
        .map(|&d| ProbeRecord::new(nearest_particle(&mesh, &(src_pos + d * Vector3::x()))))
        .collect();
    let mut s_probes: Vec<ProbeRecord> = s_offsets
        .iter()
        .map(|&d| ProbeRecord::new(nearest_particle(&mesh, &(src_pos + d * Vector3::y()))))
        .collect();

    let dt = suggest_dt(&mesh, 0.25);
    let n_steps = (0.32 / dt).ceil() as usize;
    let params = SolverParams { dt, tol: 1e-12, max_iter: 100, cfl_guard: false };
    let mut states = init_rest(&mesh);
    for step in 0..n_steps {
        let t = step as f64 * dt;
        for probe in p_probes.iter_mut().chain(s_probes.iter_mut()) {
            probe.sample(&mesh, &states, t);
        }
        rattle_step(&mesh, &mut states, &loads, &params, t, step)?;
    }

    let fit_speed = |probes: &[ProbeRecord], offsets: &[f64]| -> Result<f64> {
        let mut ds = Vec::new();
        let mut ts = Vec::new();
        for (probe, &d) in probes.iter().zip(offsets) {
            ts.push(probe.arrival_time(0.3)?);
            ds.push(d);
        }
        let (_, slope) = linear_fit(&ds, &ts);
        Ok(1.0 / slope)
    };
    let p_speed = fit_speed(&p_probes, &p_offsets)?;
    let s_speed = fit_speed(&s_probes, &s_offsets)?;

    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
        for probe in p_probes.iter().chain(&s_probes) {
            write_probe_csv(probe, &dir.join(format!("probe_{}.csv", probe.particle)))?;
        }
    }
    Ok(WaveSpeedOutcome {
        p_speed,
        s_speed,
        p_expected: material.p_wave_speed(),
        s_expected: material.s_wave_speed(),
    })
}

// ---------------------------------------------------------------------------
// Spatial self-convergence of the wave scenario
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub struct WaveConvergenceOutcome {
    /// L-inf probe differences between successive resolutions.
    pub coarse_error: f64,
    pub fine_error: f64,
    /// Observed order log3(coarse/fine).
    pub slope: f64,
}

/// Self-convergence of the probe displacement at three resolutions refined
/// by 3 (refinement by 3 keeps cell centers, hence source and probe
/// locations, exactly coincident across levels).
pub fn wave_convergence(out_dir: Option<&Path>) -> Result<WaveConvergenceOutcome> {
    let material = MaterialParams::new(1.88e10, 0.25, 2200.0)?;
    let source_at = Vector3::new(27.0, 27.0, 3.0);
    let probe_at = Vector3::new(63.0, 27.0, 3.0);
    let dt0 = 4.0e-4;
    let steps0 = 625;

    let mut series: Vec<Vec<f64>> = Vec::new();
    let mut times: Vec<f64> = Vec::new();
    for level in 0..3u32 {
        let refine = 3usize.pow(level);
        let mesh = build_box_lattice_with(
            [108.0, 54.0, 6.0],
            [18 * refine, 9 * refine, 1],
            material,
            BoxOptions { plane_strain_axes: [false, false, true] },
        )?;
        let source = nearest_particle(&mesh, &source_at);
        let probe_id = nearest_particle(&mesh, &probe_at);
        let mut loads = LoadSet::free(mesh.n_particles());
        loads.point_forces.push(PointForce {
            particle: source,
            direction: Vector3::y(),
            profile: Profile::Ricker { f0: 14.5, t0: 0.1, amplitude: 1e9 },
        });
        let dt = dt0 / refine as f64;
        let params = SolverParams { dt, tol: 1e-12, max_iter: 100, cfl_guard: false };
        let mut states = init_rest(&mesh);
        let mut ys = Vec::with_capacity(steps0);
        for step in 0..steps0 * refine {
            if step % refine == 0 {
                ys.push(states[probe_id].x.y - mesh.particles[probe_id].x0.y);
                if level == 0 {
                    times.push(step as f64 * dt);
                }
            }
            rattle_step(&mesh, &mut states, &loads, &params, step as f64 * dt, step)?;
        }
        series.push(ys);
    }

    let linf = |a: &[f64], b: &[f64]| -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    };
    let coarse_error = linf(&series[0], &series[1]);
    let fine_error = linf(&series[1], &series[2]);
    let slope = (coarse_error / fine_error).ln() / 3.0_f64.ln();

    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
        let mut out = String::from("t,xi_y_h,xi_y_h3,xi_y_h9\n");
        for (k, t) in times.iter().enumerate() {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e}\n",
                t, series[0][k], series[1][k], series[2][k]
            ));
        }
        std::fs::write(dir.join("convergence.csv"), out)
            .map_err(|e| Error::io(dir.display().to_string(), e))?;
    }
    Ok(WaveConvergenceOutcome { coarse_error, fine_error, slope })
}

// ---------------------------------------------------------------------------
// Pinched cylinder: damped preload, release, conservative run
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct PinchedCylinderParams {
    /// [n_theta, n_z, n_r]
    pub counts: [usize; 3],
    pub pinch_force: f64,
    pub release_steps: usize,
    pub preload_max_steps: usize,
}

impl Default for PinchedCylinderParams {
    fn default() -> Self {
        PinchedCylinderParams {
            counts: [32, 12, 1],
            pinch_force: 1000.0,
            release_steps: 50_000,
            preload_max_steps: 150_000,
        }
    }
}

#[derive(Debug)]
pub struct PinchedCylinderOutcome {
    /// Energy at release (pure potential).
    pub initial_energy: f64,
    /// Largest |H(t) - H(0)| over the conservative run.
    pub max_energy_deviation: f64,
    /// Largest |U(t)| over the conservative run.
    pub max_potential: f64,
    /// Secular drift: |linear-fit slope of H(t)| times the run duration.
    pub secular_change: f64,
    /// Per-step energy reports of the conservative phase.
    pub energy: Vec<EnergyReport>,
    /// Peak radial deflection of the preloaded shape (m).
    pub preload_deflection: f64,
    pub preload_steps: usize,
}

/// Steel cylinder pinched by two diametrically opposite force rows, damped
/// to equilibrium, then released and run conservatively.
pub fn pinched_cylinder(
    p: PinchedCylinderParams,
    out_dir: Option<&Path>,
) -> Result<PinchedCylinderOutcome> {
    let material = MaterialParams::new(2.1e11, 0.25, 7800.0)?;
    let (radius, height, thickness) = (1.0, 2.0, 0.01);
    let mesh = build_cylinder_shell(radius, height, thickness, p.counts, material)?;
    let nt = p.counts[0];
    let rows = |i0: usize| -> Vec<usize> {
        (0..p.counts[1] * p.counts[2])
            .map(|jk| i0 + nt * jk)
            .collect()
    };
    let row_a = rows(0);
    let row_b = rows(nt / 2);

    let mut preload = LoadSet::free(mesh.n_particles());
    // Row a sits near theta = 0 (x = +R): push it inward, row b outward-facing
    // side gets the opposite force.
    for &id in &row_a {
        preload.point_forces.push(PointForce {
            particle: id,
            direction: -Vector3::x(),
            profile: Profile::Constant { value: p.pinch_force },
        });
    }
    for &id in &row_b {
        preload.point_forces.push(PointForce {
            particle: id,
            direction: Vector3::x(),
            profile: Profile::Constant { value: p.pinch_force },
        });
    }
    // Critical damping of the first ovalization mode of the ring.
    let ring_bending = material.young * thickness.powi(3) / 12.0;
    let omega2 = (ring_bending * 7.2 / (material.density * thickness * radius.powi(4))).sqrt();
    preload.damping = 2.0 * omega2;

    let dt = suggest_dt(&mesh, 0.25);
    let params = SolverParams { dt, tol: 1e-12, max_iter: 100, cfl_guard: false };
    let mut states = init_rest(&mesh);
    let (preload_steps, _) = settle(
        &mesh,
        &mut states,
        &preload,
        &params,
        1e-8,
        2000,
        p.preload_max_steps,
        500,
    )?;
    let preload_deflection = mesh
        .particles
        .iter()
        .zip(&states)
        .map(|(g, s)| (s.x - g.x0).norm())
        .fold(0.0, f64::max);

    // Release: drop the loads, zero the momenta, run conservatively.
    for s in states.iter_mut() {
        s.t_half = Vector3::zeros();
        s.z_half = Matrix3::zeros();
    }
    let free = LoadSet::free(mesh.n_particles());
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
        write_vtk_snapshot(&mesh, &states, &dir.join("release_shape.vtk"))?;
    }

    let mut energy = Vec::with_capacity(p.release_steps);
    for step in 0..p.release_steps {
        let stats = rattle_step(&mesh, &mut states, &free, &params, step as f64 * dt, step)?;
        energy.push(stats.energy);
    }
    let h0 = energy[0].total;
    let max_energy_deviation =
        energy.iter().map(|e| (e.total - h0).abs()).fold(0.0, f64::max);
    let max_potential = energy.iter().map(|e| e.potential().abs()).fold(0.0, f64::max);
    let ts: Vec<f64> = energy.iter().map(|e| e.time).collect();
    let hs: Vec<f64> = energy.iter().map(|e| e.total).collect();
    let (_, trend) = linear_fit(&ts, &hs);
    let secular_change = trend.abs() * (ts[ts.len() - 1] - ts[0]);

    if let Some(dir) = out_dir {
        let sampled: Vec<EnergyReport> = energy.iter().step_by(10).copied().collect();
        write_energy_csv(&sampled, &dir.join("energy.csv"))?;
        write_vtk_snapshot(&mesh, &states, &dir.join("final_shape.vtk"))?;
    }
    Ok(PinchedCylinderOutcome {
        initial_energy: h0,
        max_energy_deviation,
        max_potential,
        secular_change,
        energy,
        preload_deflection,
        preload_steps,
    })
}

// ---------------------------------------------------------------------------
// Hemisphere with cutout under alternating radial loads
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub struct HemisphereOutcome {
    /// (particle id, signed radial deflection toward the load) at the four
    /// loaded equator points.
    pub deflections: Vec<(usize, f64)>,
    pub kinetic_ratio: f64,
    pub steps: usize,
}

/// Hemispherical shell with an 18 degree polar cutout, four alternating
/// radial forces at 90 degree intervals on the equator, damped to the
/// static shape. Demonstration scenario; runtime-capped.
pub fn hemisphere(force: f64, max_steps: usize, out_dir: Option<&Path>) -> Result<HemisphereOutcome> {
    let material = MaterialParams::new(6.825e7, 0.3, 1000.0)?;
    let (radius, thickness) = (10.0, 0.04);
    let mesh = build_hemisphere_shell(radius, thickness, 18.0, [16, 64, 1], material)?;
    let nlon = 64;
    let loaded: Vec<usize> = [0usize, 16, 32, 48].iter().map(|&i| i).collect();

    let mut loads = LoadSet::free(mesh.n_particles());
    let mut directions = Vec::new();
    for (k, &id) in loaded.iter().enumerate() {
        debug_assert!(id < nlon); // equator row is the first latitude ring
        let p = mesh.particles[id].x0;
        let radial = Vector3::new(p.x, p.y, 0.0).normalize();
        // Alternating: inward at 0 and 180 degrees, outward at 90 and 270.
        let dir = if k % 2 == 0 { -radial } else { radial };
        directions.push(dir);
        loads.point_forces.push(PointForce {
            particle: id,
            direction: dir,
            profile: Profile::Ramp { value: force, t_ramp: 20.0 },
        });
    }
    let c0 = (material.young / material.density).sqrt();
    loads.damping = 2.0 * c0 * thickness / (radius * radius);

    let dt = suggest_dt(&mesh, 0.25);
    let params = SolverParams { dt, tol: 1e-10, max_iter: 100, cfl_guard: false };
    let mut states = init_rest(&mesh);
    let min_steps = (25.0 / dt) as usize;
    let (steps, last) = settle(
        &mesh,
        &mut states,
        &loads,
        &params,
        1e-8,
        min_steps.min(max_steps / 2),
        max_steps,
        2000,
    )?;

    let deflections = loaded
        .iter()
        .zip(&directions)
        .map(|(&id, dir)| {
            let u = states[id].x - mesh.particles[id].x0;
            (id, u.dot(dir))
        })
        .collect();
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
        write_vtk_snapshot(&mesh, &states, &dir.join("hemisphere_final.vtk"))?;
    }
    Ok(HemisphereOutcome {
        deflections,
        kinetic_ratio: (last.kinetic_trans + last.kinetic_rot) / last.potential().abs(),
        steps,
    })
}
