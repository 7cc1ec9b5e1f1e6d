//! Interior filling of closed point shells.
//!
//! The bounding box is voxelized; voxels holding input points form the
//! shell. A 6-connected flood fill from a padding layer around the box marks
//! the exterior, and whatever is neither shell nor exterior is interior.
//! Each interior voxel receives `seed_per_voxel` jittered points.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::SceneError;
use crate::tensor3::Vec3;

pub const FILL_RESOLUTION_RANGE: std::ops::RangeInclusive<usize> = 8..=256;

/// Seeds stay this far inside their voxel so that re-voxelizing puts them back in it.
const JITTER_MARGIN: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FillSpec {
    pub voxel_resolution: [usize; 3],
    pub seed_per_voxel: usize,
    #[serde(default)]
    pub seed: u64,
}

impl FillSpec {
    pub fn validate(&self) -> Result<(), SceneError> {
        if !self.voxel_resolution.iter().all(|r| FILL_RESOLUTION_RANGE.contains(r)) {
            return Err(SceneError::Invalid(format!(
                "fill resolution {:?} outside [8, 256]",
                self.voxel_resolution
            )));
        }
        if self.seed_per_voxel == 0 {
            return Err(SceneError::Invalid("seed_per_voxel must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct FillOutcome {
    /// Input points followed by the seeded ones.
    pub points: Vec<Vec3>,
    pub seeded: usize,
    pub interior_voxels: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Cell {
    Unknown,
    Shell,
    Exterior,
}

/// Voxel occupancy of a point set over its own bounding box.
pub struct VoxelGrid {
    pub min: Vec3,
    pub size: Vec3,
    pub res: [usize; 3],
}

impl VoxelGrid {
    pub fn voxel_of(&self, p: Vec3) -> [usize; 3] {
        let mut idx = [0; 3];
        for a in 0..3 {
            let f = ((p[a] - self.min[a]) / self.size[a]).floor();
            idx[a] = (f.max(0.0) as usize).min(self.res[a] - 1);
        }
        idx
    }
}

fn bounding_box(points: &[Vec3]) -> (Vec3, Vec3) {
    points.iter().fold((Vec3::splat(f64::INFINITY), Vec3::splat(f64::NEG_INFINITY)), |(lo, hi), &p| {
        (lo.min(p), hi.max(p))
    })
}

/// Voxels enclosed by the shell, in x-major index order.
pub fn interior_voxels(points: &[Vec3], res: [usize; 3]) -> Result<(VoxelGrid, Vec<[usize; 3]>), SceneError> {
    if points.is_empty() {
        return Err(SceneError::Empty);
    }
    let (lo, hi) = bounding_box(points);
    let extent = hi - lo;
    if points.len() < 4 || (0..3).any(|a| !(extent[a] > 0.0)) {
        return Err(SceneError::Invalid("fill needs at least 4 non-coplanar points".into()));
    }
    let grid = VoxelGrid {
        min: lo,
        size: Vec3::new(extent.x / res[0] as f64, extent.y / res[1] as f64, extent.z / res[2] as f64),
        res,
    };

    // One layer of padding so the exterior is connected around the box.
    let pd = [res[0] + 2, res[1] + 2, res[2] + 2];
    let flat = |i: usize, j: usize, k: usize| (i * pd[1] + j) * pd[2] + k;
    let mut cells = vec![Cell::Unknown; pd[0] * pd[1] * pd[2]];
    for &p in points {
        let [i, j, k] = grid.voxel_of(p);
        cells[flat(i + 1, j + 1, k + 1)] = Cell::Shell;
    }

    let mut queue = VecDeque::from([[0usize, 0, 0]]);
    cells[0] = Cell::Exterior;
    while let Some([i, j, k]) = queue.pop_front() {
        let neighbors = [
            (i.wrapping_sub(1), j, k),
            (i + 1, j, k),
            (i, j.wrapping_sub(1), k),
            (i, j + 1, k),
            (i, j, k.wrapping_sub(1)),
            (i, j, k + 1),
        ];
        for (a, b, c) in neighbors {
            if a >= pd[0] || b >= pd[1] || c >= pd[2] {
                continue;
            }
            let n = flat(a, b, c);
            if cells[n] == Cell::Unknown {
                cells[n] = Cell::Exterior;
                queue.push_back([a, b, c]);
            }
        }
    }

    let mut interior = Vec::new();
    for i in 0..res[0] {
        for j in 0..res[1] {
            for k in 0..res[2] {
                if cells[flat(i + 1, j + 1, k + 1)] == Cell::Unknown {
                    interior.push([i, j, k]);
                }
            }
        }
    }
    Ok((grid, interior))
}

pub fn internal_fill(points: &[Vec3], fill: &FillSpec) -> Result<FillOutcome, SceneError> {
    fill.validate()?;
    let (grid, interior) = interior_voxels(points, fill.voxel_resolution)?;
    let mut out = points.to_vec();
    if interior.is_empty() {
        log::info!("internal fill: nothing to fill");
        return Ok(FillOutcome { points: out, seeded: 0, interior_voxels: 0 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(fill.seed);
    let span = 1.0 - 2.0 * JITTER_MARGIN;
    for &[i, j, k] in &interior {
        for _ in 0..fill.seed_per_voxel {
            let u: [f64; 3] = rng.gen();
            let local = Vec3::new(
                i as f64 + JITTER_MARGIN + span * u[0],
                j as f64 + JITTER_MARGIN + span * u[1],
                k as f64 + JITTER_MARGIN + span * u[2],
            );
            out.push(grid.min + local.component_mul(grid.size));
        }
    }
    let seeded = out.len() - points.len();
    Ok(FillOutcome { points: out, seeded, interior_voxels: interior.len() })
}
