//! Moving-least-squares MPM integrator with quadratic B-splines.
//!
//! One substep is clear-grid → P2G → grid update → G2P. Positions advance
//! with the freshly gathered velocity (symplectic Euler), so a stress-free
//! particle under gravity follows `v_n = v_0 + n Δt g`,
//! `x_n = x_{n-1} + Δt v_n` exactly up to rounding.

mod config;
mod grid;
mod kernel;
mod transfer;

pub use config::{BoundaryPolicy, SimConfig};
pub use grid::{Grid, GridNode, MASS_EPSILON};
pub use kernel::{affine_scale, bspline_stencil, OutsideInterior, Stencil, StencilNode, BSPLINE_DEGREE};
pub use transfer::{g2p, grid_update, p2g, substep, G2pStats};

use serde::{Deserialize, Serialize};

use crate::constitutive::{stored_energy, ResolvedMaterial};
use crate::error::SimError;
use crate::par::{self, Exec};
use crate::scene::{apply_impulse_and_anchors, Scene};
use crate::tensor3::{Mat3, Vec3};
use crate::trajectory::Trajectory;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Particle {
    pub x: Vec3,
    pub v: Vec3,
    /// Affine velocity matrix.
    pub c: Mat3,
    pub f_e: Mat3,
    pub f_n: Mat3,
    pub mass: f64,
    pub volume0: f64,
    /// Index into the material table.
    pub material: usize,
    /// Extra body acceleration for the current frame.
    pub ext_accel: Vec3,
    pub anchored: bool,
}

impl Particle {
    pub fn new(x: Vec3, mass: f64, volume0: f64, material: usize) -> Self {
        Particle {
            x,
            v: Vec3::ZERO,
            c: Mat3::ZERO,
            f_e: Mat3::IDENTITY,
            f_n: Mat3::IDENTITY,
            mass,
            volume0,
            material,
            ext_accel: Vec3::ZERO,
            anchored: false,
        }
    }

    pub fn momentum(&self) -> Vec3 {
        self.v * self.mass
    }
}

pub fn total_mass(particles: &[Particle]) -> f64 {
    particles.iter().map(|p| p.mass).sum()
}

pub fn total_momentum(particles: &[Particle]) -> Vec3 {
    particles.iter().fold(Vec3::ZERO, |acc, p| acc + p.momentum())
}

pub fn center_of_mass(particles: &[Particle]) -> Vec3 {
    particles.iter().fold(Vec3::ZERO, |acc, p| acc + p.x * p.mass) / total_mass(particles)
}

/// Kinetic and stored (both branches) energy, in joules.
pub fn energies(particles: &[Particle], materials: &[ResolvedMaterial], exec: Exec) -> Result<(f64, f64), SimError> {
    let per: Vec<Result<(f64, f64), SimError>> = par::map_indexed(exec, particles.len(), |i| {
        let p = &particles[i];
        let stored = stored_energy(&p.f_e, &p.f_n, &materials[p.material])
            .map_err(|source| SimError::Constitutive { particle: i, source })?;
        Ok((0.5 * p.mass * p.v.norm_squared(), stored * p.volume0))
    });
    let mut kinetic = 0.0;
    let mut elastic = 0.0;
    for r in per {
        let (k, e) = r?;
        kinetic += k;
        elastic += e;
    }
    Ok((kinetic, elastic))
}

/// Per-frame summary written to `diagnostics.csv`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FrameDiagnostics {
    pub frame: usize,
    pub time: f64,
    pub kinetic: f64,
    pub elastic: f64,
    pub total: f64,
    pub max_speed: f64,
    pub position_clamps: usize,
    pub return_map_clamps: usize,
}

/// Mutable simulation state for one run.
#[derive(Clone, Debug)]
pub struct Simulation {
    pub config: SimConfig,
    pub particles: Vec<Particle>,
    pub materials: Vec<ResolvedMaterial>,
    pub grid: Grid,
    pub exec: Exec,
}

impl Simulation {
    pub fn new(config: SimConfig, particles: Vec<Particle>, materials: Vec<ResolvedMaterial>) -> Result<Self, SimError> {
        config.validate()?;
        for (i, p) in particles.iter().enumerate() {
            if !(p.mass > 0.0 && p.volume0 > 0.0) {
                return Err(SimError::InvalidConfig(format!("particle {i} needs positive mass and volume")));
            }
            if p.material >= materials.len() {
                return Err(SimError::InvalidConfig(format!("particle {i} refers to missing material {}", p.material)));
            }
            if !config.contains_interior(p.x) {
                return Err(SimError::OutOfDomain { particle: i, position: p.x });
            }
        }
        Ok(Simulation { grid: Grid::new(config.grid_dims), config, particles, materials, exec: Exec::default() })
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn substep(&mut self) -> Result<G2pStats, SimError> {
        substep(&mut self.particles, &self.materials, &mut self.grid, &self.config, self.exec)
    }

    pub fn energies(&self) -> Result<(f64, f64), SimError> {
        energies(&self.particles, &self.materials, self.exec)
    }

    pub fn positions(&self) -> Vec<Vec3> {
        self.particles.iter().map(|p| p.x).collect()
    }

    fn diagnostics(&self, frame: usize, stats: G2pStats) -> Result<FrameDiagnostics, SimError> {
        let (kinetic, elastic) = self.energies()?;
        Ok(FrameDiagnostics {
            frame,
            time: frame as f64 * self.config.frame_dt(),
            kinetic,
            elastic,
            total: kinetic + elastic,
            max_speed: stats.max_speed,
            position_clamps: stats.position_clamps,
            return_map_clamps: stats.return_map_clamps,
        })
    }
}

#[derive(Clone, Debug)]
pub struct SimOutput {
    pub trajectory: Trajectory,
    /// One entry per snapshot, frame 0 included.
    pub diagnostics: Vec<FrameDiagnostics>,
}

/// Runs `frames` frames of `config.substeps_per_frame` substeps each and
/// returns `frames + 1` snapshots, the initial state first.
pub fn simulate(scene: &Scene, config: &SimConfig, frames: usize) -> Result<SimOutput, SimError> {
    simulate_with(scene, config, frames, Exec::default(), |_, _| {})
}

/// [`simulate`] with an explicit execution policy and a per-frame callback
/// receiving each new snapshot.
pub fn simulate_with(
    scene: &Scene,
    config: &SimConfig,
    frames: usize,
    exec: Exec,
    mut on_frame: impl FnMut(usize, &[Particle]),
) -> Result<SimOutput, SimError> {
    let materials = scene
        .materials
        .iter()
        .map(|m| m.resolve(config.dt))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|source| SimError::Constitutive { particle: 0, source })?;
    let mut sim = Simulation::new(*config, scene.particles.clone(), materials)?.with_exec(exec);

    let mut trajectory = Trajectory::new(config.frame_dt());
    trajectory.push(sim.positions());
    let mut diagnostics = vec![sim.diagnostics(0, G2pStats::default())?];
    on_frame(0, &sim.particles);

    for frame in 1..=frames {
        apply_impulse_and_anchors(&mut sim.particles, frame - 1, scene);
        let mut acc = G2pStats::default();
        for s in 0..config.substeps_per_frame {
            let st = sim.substep().map_err(|e| SimError::Aborted { frame, substep: s, source: Box::new(e) })?;
            acc.max_speed = acc.max_speed.max(st.max_speed);
            acc.position_clamps += st.position_clamps;
            acc.return_map_clamps += st.return_map_clamps;
        }
        trajectory.push(sim.positions());
        diagnostics.push(sim.diagnostics(frame, acc).map_err(|e| SimError::Aborted {
            frame,
            substep: config.substeps_per_frame,
            source: Box::new(e),
        })?);
        on_frame(frame, &sim.particles);
    }
    Ok(SimOutput { trajectory, diagnostics })
}
