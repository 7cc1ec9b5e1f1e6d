//! Viscoelastic material point method simulation and parameter calibration.
//!
//! Particles carry two deformation gradients: an elastic branch with a fixed
//! corotated energy and a viscous branch with a Hencky energy whose strain
//! relaxes through a per-substep return map. [`mpm::simulate`] advances a
//! [`scene::Scene`] on a regular grid; [`calibrate::calibrate`] fits material
//! parameters to a reference [`trajectory::Trajectory`].

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibrate;
pub mod constitutive;
pub mod dump;
pub mod error;
pub mod mpm;
pub mod par;
pub mod render;
pub mod scene;
pub mod tensor3;
pub mod trajectory;

pub use error::{CalibrateError, DomainError, SceneError, SimError};
pub use tensor3::{Mat3, Vec3};
