use serde::{Deserialize, Serialize};

use crate::error::CalibrateError;
use crate::tensor3::Vec3;

/// Ordered position snapshots, `frame_dt` seconds apart.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub frame_dt: f64,
    pub frames: Vec<Vec<Vec3>>,
}

impl Trajectory {
    pub fn new(frame_dt: f64) -> Self {
        Trajectory { frame_dt, frames: Vec::new() }
    }

    pub fn push(&mut self, positions: Vec<Vec3>) {
        debug_assert!(self.frames.first().is_none_or(|f| f.len() == positions.len()));
        self.frames.push(positions);
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn particle_count(&self) -> usize {
        self.frames.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<(), CalibrateError> {
        if !(self.frame_dt > 0.0) {
            return Err(CalibrateError::ShapeMismatch(format!("frame_dt must be positive, got {}", self.frame_dt)));
        }
        let n = self.particle_count();
        if let Some(i) = self.frames.iter().position(|f| f.len() != n) {
            return Err(CalibrateError::ShapeMismatch(format!(
                "frame {i} has {} particles, frame 0 has {n}",
                self.frames[i].len()
            )));
        }
        Ok(())
    }

    pub fn center_of_mass(&self, frame: usize, masses: &[f64]) -> Vec3 {
        let total: f64 = masses.iter().sum();
        self.frames[frame].iter().zip(masses).fold(Vec3::ZERO, |acc, (&x, &m)| acc + x * m) / total
    }
}
