//! Scene construction: point ingestion, optional interior fill, per-particle
//! mass and rest volume, material regions, anchors and impulses.

mod fill;
mod io;

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use fill::{internal_fill, interior_voxels, FillOutcome, FillSpec, VoxelGrid, FILL_RESOLUTION_RANGE};
pub use io::{load_particles, parse_csv, parse_ply, write_csv, write_ply};

use crate::constitutive::Material;
use crate::error::SceneError;
use crate::mpm::{Particle, SimConfig};
use crate::tensor3::Vec3;

/// Axis-aligned box, bounds inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Self {
        Aabb { min, max }
    }

    pub fn contains(&self, p: Vec3) -> bool {
        (0..3).all(|a| p[a] >= self.min[a] && p[a] <= self.max[a])
    }

    pub fn intersects(&self, lo: Vec3, hi: Vec3) -> bool {
        (0..3).all(|a| self.min[a] <= hi[a] && self.max[a] >= lo[a])
    }

    fn validate(&self, what: &str, config: &SimConfig) -> Result<(), SceneError> {
        if !(0..3).all(|a| self.min[a] <= self.max[a]) {
            return Err(SceneError::Invalid(format!("{what}: min {:?} exceeds max {:?}", self.min, self.max)));
        }
        if !self.intersects(Vec3::ZERO, config.domain_max()) {
            return Err(SceneError::Invalid(format!("{what} does not intersect the domain")));
        }
        Ok(())
    }
}

/// Extra acceleration for particles inside `region` during frames
/// `start_frame..=end_frame` (frame `f` spans snapshot `f` to `f + 1`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImpulseSpec {
    pub region: Aabb,
    pub acceleration: Vec3,
    pub start_frame: usize,
    pub end_frame: usize,
}

impl ImpulseSpec {
    pub fn is_active(&self, frame: usize) -> bool {
        (self.start_frame..=self.end_frame).contains(&frame)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionMaterial {
    pub region: Aabb,
    pub material: Material,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub particle_source: PathBuf,
    pub density: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fill: Option<FillSpec>,
    #[serde(default)]
    pub anchors: Vec<Aabb>,
    #[serde(default)]
    pub impulses: Vec<ImpulseSpec>,
    pub material: Material,
    /// Later regions override earlier ones.
    #[serde(default)]
    pub regions: Vec<RegionMaterial>,
}

impl SceneSpec {
    pub fn validate(&self, config: &SimConfig) -> Result<(), SceneError> {
        if !(self.density > 0.0 && self.density.is_finite()) {
            return Err(SceneError::Invalid(format!("density must be positive, got {}", self.density)));
        }
        if let Some(f) = &self.fill {
            f.validate()?;
        }
        for (i, a) in self.anchors.iter().enumerate() {
            a.validate(&format!("anchor {i}"), config)?;
        }
        for (i, imp) in self.impulses.iter().enumerate() {
            imp.region.validate(&format!("impulse {i}"), config)?;
            if imp.start_frame > imp.end_frame {
                return Err(SceneError::Invalid(format!("impulse {i}: start_frame > end_frame")));
            }
            if !imp.acceleration.is_finite() {
                return Err(SceneError::Invalid(format!("impulse {i}: non-finite acceleration")));
            }
        }
        for (i, r) in self.regions.iter().enumerate() {
            r.region.validate(&format!("material region {i}"), config)?;
            r.material.visco.validate()?;
        }
        self.material.visco.validate()?;
        Ok(())
    }

    /// Resolves `particle_source` against `base` when it is relative.
    pub fn resolve_paths(&mut self, base: &Path) {
        if self.particle_source.is_relative() {
            self.particle_source = base.join(&self.particle_source);
        }
    }
}

/// Simulation-ready particles with their material table and forcing.
#[derive(Clone, Debug)]
pub struct Scene {
    pub particles: Vec<Particle>,
    /// Index 0 is the default material, then one per region.
    pub materials: Vec<Material>,
    pub anchors: Vec<Aabb>,
    pub impulses: Vec<ImpulseSpec>,
}

/// Rest volume per particle: each occupied simulation cell's volume `Δx³`
/// split evenly among its particles. Mass is `ρ V`.
pub fn assign_mass_volume(points: &[Vec3], config: &SimConfig, rho: f64) -> Vec<(f64, f64)> {
    let cell_of = |p: Vec3| -> [i64; 3] { [0, 1, 2].map(|a| (p[a] / config.dx).floor() as i64) };
    let mut counts: HashMap<[i64; 3], u32> = HashMap::new();
    for &p in points {
        *counts.entry(cell_of(p)).or_default() += 1;
    }
    let cell_volume = config.dx.powi(3);
    points
        .iter()
        .map(|&p| {
            let v = cell_volume / counts[&cell_of(p)] as f64;
            (rho * v, v)
        })
        .collect()
}

/// Sets each particle's frame acceleration from the impulses active in
/// `frame`. Anchored particles are held by the G2P pass.
pub fn apply_impulse_and_anchors(particles: &mut [Particle], frame: usize, scene: &Scene) {
    if scene.impulses.is_empty() {
        return;
    }
    for p in particles.iter_mut() {
        p.ext_accel = scene
            .impulses
            .iter()
            .filter(|imp| imp.is_active(frame) && imp.region.contains(p.x))
            .fold(Vec3::ZERO, |acc, imp| acc + imp.acceleration);
    }
}

impl Scene {
    /// Builds particles from points with a single material.
    pub fn from_points(points: &[Vec3], density: f64, material: Material, config: &SimConfig) -> Result<Self, SceneError> {
        Self::assemble(points, density, vec![material], &[], Vec::new(), Vec::new(), config)
    }

    /// Loads, fills and assembles the scene described by `spec`.
    pub fn build(spec: &SceneSpec, config: &SimConfig) -> Result<Self, SceneError> {
        spec.validate(config)?;
        let mut points = load_particles(&spec.particle_source)?;
        if let Some(fill) = &spec.fill {
            points = internal_fill(&points, fill)?.points;
        }
        let mut materials = vec![spec.material];
        materials.extend(spec.regions.iter().map(|r| r.material));
        let regions: Vec<Aabb> = spec.regions.iter().map(|r| r.region).collect();
        Self::assemble(&points, spec.density, materials, &regions, spec.anchors.clone(), spec.impulses.clone(), config)
    }

    fn assemble(
        points: &[Vec3],
        density: f64,
        materials: Vec<Material>,
        regions: &[Aabb],
        anchors: Vec<Aabb>,
        impulses: Vec<ImpulseSpec>,
        config: &SimConfig,
    ) -> Result<Self, SceneError> {
        if points.is_empty() {
            return Err(SceneError::Empty);
        }
        if !(density > 0.0) {
            return Err(SceneError::Invalid(format!("density must be positive, got {density}")));
        }
        config.validate().map_err(|e| SceneError::Invalid(e.to_string()))?;
        if let Some(i) = points.iter().position(|&p| !config.contains_interior(p)) {
            return Err(SceneError::Invalid(format!("point {i} at {:?} lies outside the grid interior", points[i])));
        }
        let particles = points
            .iter()
            .zip(assign_mass_volume(points, config, density))
            .map(|(&x, (mass, volume))| {
                let material = regions.iter().rposition(|r| r.contains(x)).map_or(0, |r| r + 1);
                let mut p = Particle::new(x, mass, volume, material);
                p.anchored = anchors.iter().any(|a| a.contains(x));
                p
            })
            .collect();
        Ok(Scene { particles, materials, anchors, impulses })
    }

    pub fn set_velocity(&mut self, v: Vec3) {
        for p in &mut self.particles {
            if !p.anchored {
                p.v = v;
            }
        }
    }

    pub fn total_mass(&self) -> f64 {
        crate::mpm::total_mass(&self.particles)
    }
}

/// Regular lattice of points filling `[lo, hi]` with spacing `h`, offset by half a spacing.
pub fn lattice_points(lo: Vec3, hi: Vec3, h: f64) -> Vec<Vec3> {
    let n = [0, 1, 2].map(|a| ((hi[a] - lo[a]) / h).round().max(1.0) as usize);
    let mut out = Vec::with_capacity(n[0] * n[1] * n[2]);
    for i in 0..n[0] {
        for j in 0..n[1] {
            for k in 0..n[2] {
                out.push(lo + Vec3::new(i as f64 + 0.5, j as f64 + 0.5, k as f64 + 0.5) * h);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::ElasticParams;

    fn config() -> SimConfig {
        SimConfig::cube(16, 1.0, 1e-4, 10)
    }

    #[test]
    fn even_split_within_cell() {
        let c = config();
        let h = c.dx / 2.0;
        let origin = Vec3::splat(8.0 * c.dx);
        let pts = lattice_points(origin, origin + Vec3::splat(c.dx), h);
        assert_eq!(pts.len(), 8);
        for (m, v) in assign_mass_volume(&pts, &c, 1000.0) {
            assert_eq!(v, c.dx.powi(3) / 8.0);
            assert_eq!(m, 1000.0 * v);
        }
        let single = assign_mass_volume(&[origin + Vec3::splat(0.1 * c.dx)], &c, 2.0);
        assert_eq!(single[0].1, c.dx.powi(3));
    }

    #[test]
    fn volume_sums_to_occupied_cells() {
        let c = config();
        let pts = lattice_points(Vec3::splat(0.3), Vec3::splat(0.55), c.dx / 3.0);
        let total: f64 = assign_mass_volume(&pts, &c, 1.0).iter().map(|(_, v)| v).sum();
        let cells: std::collections::HashSet<[i64; 3]> =
            pts.iter().map(|p| [0, 1, 2].map(|a| (p[a] / c.dx).floor() as i64)).collect();
        let expected = cells.len() as f64 * c.dx.powi(3);
        assert!((total - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn anchors_regions_and_impulses() {
        let c = config();
        let pts = lattice_points(Vec3::splat(0.3), Vec3::splat(0.6), 0.05);
        let mat = Material::elastic_only(ElasticParams::new(1e4, 0.3).unwrap());
        let soft = Material::elastic_only(ElasticParams::new(1e3, 0.3).unwrap());
        let lower = Aabb::new(Vec3::ZERO, Vec3::new(1.0, 0.4, 1.0));
        let mut scene = Scene::assemble(
            &pts,
            1000.0,
            vec![mat, soft],
            &[lower],
            vec![lower],
            vec![ImpulseSpec { region: Aabb::new(Vec3::new(0.0, 0.5, 0.0), Vec3::splat(1.0)), acceleration: Vec3::new(1.0, 0.0, 0.0), start_frame: 1, end_frame: 2 }],
            &c,
        )
        .unwrap();
        for p in &scene.particles {
            assert_eq!(p.anchored, p.x.y <= 0.4);
            assert_eq!(p.material, usize::from(p.x.y <= 0.4));
        }
        let mut parts = scene.particles.clone();
        apply_impulse_and_anchors(&mut parts, 0, &scene);
        assert!(parts.iter().all(|p| p.ext_accel == Vec3::ZERO));
        apply_impulse_and_anchors(&mut parts, 1, &scene);
        assert!(parts.iter().all(|p| (p.ext_accel.x == 1.0) == (p.x.y >= 0.5)));
        scene.impulses.clear();
        let before = parts.clone();
        apply_impulse_and_anchors(&mut parts, 1, &scene);
        assert_eq!(before, parts);
    }

    #[test]
    fn rejects_points_outside_interior() {
        let c = config();
        let mat = Material::elastic_only(ElasticParams::new(1e4, 0.3).unwrap());
        assert!(Scene::from_points(&[Vec3::splat(0.01)], 1.0, mat, &c).is_err());
        assert!(matches!(Scene::from_points(&[], 1.0, mat, &c), Err(SceneError::Empty)));
    }
}
