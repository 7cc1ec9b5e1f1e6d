use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::tensor3::Vec3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryPolicy {
    /// Boundary-band nodes lose all velocity.
    Sticky,
    /// Boundary-band nodes lose the velocity component normal to the wall.
    Slip,
}

fn default_gravity() -> Vec3 {
    Vec3::new(0.0, -9.8, 0.0)
}

fn default_true() -> bool {
    true
}

/// Grid geometry and time stepping. The domain is `[0, grid_dims·dx]` per axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub grid_dims: [usize; 3],
    pub dx: f64,
    pub dt: f64,
    pub substeps_per_frame: usize,
    #[serde(default = "default_gravity")]
    pub gravity: Vec3,
    pub boundary_margin: usize,
    pub boundary_policy: BoundaryPolicy,
    #[serde(default = "default_true")]
    pub deterministic: bool,
}

impl SimConfig {
    /// 50³ grid on a unit cube, 400 substeps of 1e-4 s per frame.
    pub fn full_scale() -> Self {
        SimConfig {
            grid_dims: [50; 3],
            dx: 1.0 / 50.0,
            dt: 1e-4,
            substeps_per_frame: 400,
            gravity: default_gravity(),
            boundary_margin: 3,
            boundary_policy: BoundaryPolicy::Sticky,
            deterministic: true,
        }
    }

    pub fn cube(n: usize, extent: f64, dt: f64, substeps_per_frame: usize) -> Self {
        SimConfig {
            grid_dims: [n; 3],
            dx: extent / n as f64,
            dt,
            substeps_per_frame,
            ..SimConfig::full_scale()
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::InvalidConfig(msg));
        if self.grid_dims.iter().any(|&n| n < 8) {
            return bad(format!("grid_dims must be >= 8 on every axis, got {:?}", self.grid_dims));
        }
        if !(self.dx > 0.0 && self.dx.is_finite()) {
            return bad(format!("dx must be positive, got {}", self.dx));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if self.substeps_per_frame == 0 {
            return bad("substeps_per_frame must be >= 1".into());
        }
        if self.boundary_margin < 2 {
            return bad(format!("boundary_margin must be >= 2, got {}", self.boundary_margin));
        }
        if self.grid_dims.iter().any(|&n| n <= 2 * self.boundary_margin) {
            return bad("boundary band leaves no interior".into());
        }
        if !self.gravity.is_finite() {
            return bad("gravity must be finite".into());
        }
        Ok(())
    }

    pub fn frame_dt(&self) -> f64 {
        self.dt * self.substeps_per_frame as f64
    }

    pub fn domain_max(&self) -> Vec3 {
        Vec3::new(
            self.grid_dims[0] as f64 * self.dx,
            self.grid_dims[1] as f64 * self.dx,
            self.grid_dims[2] as f64 * self.dx,
        )
    }

    /// Region particles may occupy: outside the boundary band on every axis.
    pub fn interior(&self) -> (Vec3, Vec3) {
        let m = self.boundary_margin as f64 * self.dx;
        let lo = Vec3::splat(m);
        let hi = self.domain_max() - Vec3::splat(m);
        (lo, hi)
    }

    pub fn contains_interior(&self, x: Vec3) -> bool {
        let (lo, hi) = self.interior();
        (0..3).all(|a| x[a] >= lo[a] && x[a] <= hi[a])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_scale_is_valid() {
        let c = SimConfig::full_scale();
        c.validate().unwrap();
        assert_eq!(c.grid_dims, [50, 50, 50]);
        assert!((c.frame_dt() - 0.04).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_configs() {
        let base = SimConfig::full_scale();
        for c in [
            SimConfig { grid_dims: [7, 50, 50], ..base },
            SimConfig { dt: 0.0, ..base },
            SimConfig { dx: -1.0, ..base },
            SimConfig { boundary_margin: 1, ..base },
            SimConfig { substeps_per_frame: 0, ..base },
        ] {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }
}
