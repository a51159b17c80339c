//! Generic scenario runner: step loop, probe sampling, output files.

use super::config::{build_loads, build_mesh, ScenarioConfig};
use super::io::{
    write_energy_csv, write_momentum_csv, write_probe_csv, write_summary, write_vtk_snapshot,
    Summary,
};
use crate::diagnostics::{momenta, EnergyReport, ProbeRecord};
use crate::error::Error;
use crate::integrator::{energy_at, rattle_step, suggest_dt, SolverParams};
use crate::state::{init_rest, StateArray};
use crate::Result;
use nalgebra::Vector3;
use std::path::Path;
use std::time::Instant;

#[derive(Debug)]
pub struct RunResult {
    pub summary: Summary,
    pub energy: Vec<EnergyReport>,
    pub momentum: Vec<(f64, Vector3<f64>, Vector3<f64>)>,
    pub probes: Vec<ProbeRecord>,
    pub final_states: StateArray,
}

/// Runs a parsed scenario; writes CSV/VTK/summary files when `out_dir` is
/// given. Identical configs produce byte-identical outputs for any worker
/// count.
pub fn run_scenario(config: &ScenarioConfig, out_dir: Option<&Path>) -> Result<RunResult> {
    let start = Instant::now();
    let mesh = build_mesh(config)?;
    let loads = build_loads(config, &mesh)?;
    let dt = match config.solver.dt {
        Some(dt) => dt,
        None => {
            let dt = suggest_dt(&mesh, config.solver.cfl_factor);
            if !dt.is_finite() {
                return Err(Error::Config(
                    "solver.dt must be given explicitly for meshes without links".into(),
                ));
            }
            dt
        }
    };
    let params = SolverParams {
        dt,
        tol: config.solver.tol,
        max_iter: config.solver.max_iter,
        cfl_guard: config.solver.cfl_guard,
    };

    let mut states = init_rest(&mesh);
    let mut probes: Vec<ProbeRecord> = Vec::new();
    for (k, sel) in config.output.probes.iter().enumerate() {
        for id in sel.resolve(&mesh, &format!("output.probes[{k}]"))? {
            probes.push(ProbeRecord::new(id));
        }
    }

    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    }

    let stride = config.output.probe_stride;
    let n_steps = config.solver.n_steps;
    let mut energy = Vec::new();
    let mut momentum = Vec::new();
    let mut max_margin = 0.0_f64;
    let mut max_iterations = 0usize;
    let mut frame = 0usize;

    for step in 0..n_steps {
        let t = step as f64 * dt;
        if step % stride == 0 {
            for probe in probes.iter_mut() {
                probe.sample(&mesh, &states, t);
            }
            let (p, l) = momenta(&mesh, &states);
            momentum.push((t, p, l));
        }
        if config.output.snapshot_stride > 0 && step % config.output.snapshot_stride == 0 {
            if let Some(dir) = out_dir {
                write_vtk_snapshot(&mesh, &states, &dir.join(format!("frame_{frame:06}.vtk")))?;
            }
            frame += 1;
        }
        let stats = rattle_step(&mesh, &mut states, &loads, &params, t, step)?;
        if step % stride == 0 {
            energy.push(stats.energy);
        }
        max_margin = max_margin.max(stats.max_cfl_margin);
        max_iterations = max_iterations.max(stats.max_iterations);
    }

    let t_end = n_steps as f64 * dt;
    for probe in probes.iter_mut() {
        probe.sample(&mesh, &states, t_end);
    }
    let (p_end, l_end) = momenta(&mesh, &states);
    momentum.push((t_end, p_end, l_end));
    let final_energy = energy_at(&mesh, &states, &loads, dt, t_end)?;
    energy.push(final_energy);
    if config.output.snapshot_stride > 0 {
        if let Some(dir) = out_dir {
            write_vtk_snapshot(&mesh, &states, &dir.join(format!("frame_{frame:06}.vtk")))?;
        }
    }

    let (_, p0, l0) = momentum[0];
    let summary = Summary {
        n_particles: mesh.n_particles(),
        n_steps,
        dt,
        final_energy,
        initial_linear_momentum: p0.into(),
        initial_angular_momentum: l0.into(),
        linear_momentum_drift: (p_end - p0).norm(),
        angular_momentum_drift: (l_end - l0).norm(),
        max_cfl_margin: max_margin,
        max_iterations,
        wall_time_s: start.elapsed().as_secs_f64(),
    };

    if let Some(dir) = out_dir {
        write_energy_csv(&energy, &dir.join("energy.csv"))?;
        write_momentum_csv(&momentum, &dir.join("momentum.csv"))?;
        for probe in &probes {
            write_probe_csv(probe, &dir.join(format!("probe_{}.csv", probe.particle)))?;
        }
        write_summary(&summary, &dir.join("summary.json"))?;
    }

    Ok(RunResult { summary, energy, momentum, probes, final_states: states })
}
