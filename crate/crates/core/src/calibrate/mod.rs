//! Parameter estimation by trajectory matching.
//!
//! The loss is the mean squared particle-position error against a reference
//! trajectory. Search happens in a scaled space (log10 for moduli and
//! viscosities) with a bounded Nelder–Mead simplex; every evaluation is a
//! full deterministic simulation of the same scene.

mod params;
pub mod simplex;

pub use params::{ParamEntry, ParamName, ParamVector};

use serde::{Deserialize, Serialize};

use crate::error::CalibrateError;
use crate::mpm::{simulate_with, SimConfig};
use crate::par::{self, Exec};
use crate::scene::Scene;
use crate::trajectory::Trajectory;
use simplex::SimplexOptions;

/// Mean over frames and particles of the squared position error.
pub fn trajectory_loss(sim: &Trajectory, reference: &Trajectory) -> Result<f64, CalibrateError> {
    if sim.len() != reference.len() {
        return Err(CalibrateError::ShapeMismatch(format!(
            "{} simulated frames vs {} reference frames",
            sim.len(),
            reference.len()
        )));
    }
    if sim.is_empty() {
        return Err(CalibrateError::ShapeMismatch("trajectories have no frames".into()));
    }
    if let Some(i) = (0..sim.len()).find(|&i| sim.frames[i].len() != reference.frames[i].len()) {
        return Err(CalibrateError::ShapeMismatch(format!(
            "frame {i}: {} simulated particles vs {} reference particles",
            sim.frames[i].len(),
            reference.frames[i].len()
        )));
    }
    let count: usize = sim.frames.iter().map(Vec::len).sum();
    if count == 0 {
        return Err(CalibrateError::ShapeMismatch("trajectories have no particles".into()));
    }
    let sum: f64 = sim
        .frames
        .iter()
        .zip(&reference.frames)
        .flat_map(|(a, b)| a.iter().zip(b).map(|(&p, &q)| (p - q).norm_squared()))
        .sum();
    Ok(sum / count as f64)
}

/// Central differences of `loss` in each entry's search scale.
pub fn finite_diff_grad<F>(loss: F, theta: &ParamVector, h: f64) -> Result<Vec<f64>, CalibrateError>
where
    F: Fn(&ParamVector) -> Result<f64, CalibrateError> + Sync,
{
    if !(h > 0.0) {
        return Err(CalibrateError::InvalidParams(format!("step h must be positive, got {h}")));
    }
    theta.validate()?;
    let x = theta.scaled();
    let (lo, hi) = theta.scaled_bounds();
    for (i, e) in theta.entries.iter().enumerate() {
        if x[i] - h < lo[i] || x[i] + h > hi[i] {
            return Err(CalibrateError::InvalidParams(format!(
                "{}: perturbation of {h} leaves the bounds",
                e.name.as_str()
            )));
        }
    }
    let n = x.len();
    let values = par::map_indexed(Exec::default(), 2 * n, |k| {
        let (i, sign) = (k / 2, if k % 2 == 0 { 1.0 } else { -1.0 });
        let mut xs = x.clone();
        xs[i] += sign * h;
        loss(&theta.with_scaled(&xs))
    });
    let mut grad = Vec::with_capacity(n);
    for i in 0..n {
        let wrap = |e: &CalibrateError| CalibrateError::Evaluation {
            entry: theta.entries[i].name.as_str().to_owned(),
            source: Box::new(clone_error(e)),
        };
        let plus = values[2 * i].as_ref().map_err(wrap)?;
        let minus = values[2 * i + 1].as_ref().map_err(wrap)?;
        grad.push((plus - minus) / (2.0 * h));
    }
    Ok(grad)
}

fn clone_error(e: &CalibrateError) -> CalibrateError {
    match e {
        CalibrateError::ShapeMismatch(s) => CalibrateError::ShapeMismatch(s.clone()),
        CalibrateError::InvalidParams(s) => CalibrateError::InvalidParams(s.clone()),
        CalibrateError::Domain(d) => CalibrateError::Domain(d.clone()),
        other => CalibrateError::InvalidParams(other.to_string()),
    }
}

#[derive(Clone, Debug)]
pub struct CalibrateOptions {
    /// Initial simplex edge, as a fraction of each entry's scaled range.
    pub step_fraction: f64,
    /// Cap on the initial edge for log-scaled entries, in decades.
    pub max_log_step: f64,
    pub xtol: f64,
    pub ftol: f64,
    pub restarts: usize,
    pub exec: Exec,
}

impl Default for CalibrateOptions {
    fn default() -> Self {
        CalibrateOptions {
            step_fraction: 0.1,
            max_log_step: 0.5,
            xtol: 1e-3,
            ftol: 1e-9,
            restarts: 1,
            exec: Exec::default(),
        }
    }
}

/// One simulation in the search, in evaluation order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossRecord {
    pub evaluation: usize,
    /// `+∞` when the trial simulation aborted.
    pub loss: f64,
    pub best: f64,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct CalibrationResult {
    pub theta: ParamVector,
    pub loss: f64,
    pub initial_loss: f64,
    pub history: Vec<LossRecord>,
}

/// Simulates `scene` with `theta` applied and scores it against `reference`.
pub fn evaluate(
    scene: &Scene,
    config: &SimConfig,
    reference: &Trajectory,
    theta: &ParamVector,
    exec: Exec,
) -> Result<f64, CalibrateError> {
    let mut trial = scene.clone();
    theta.apply(&mut trial.materials)?;
    let frames = reference.len().saturating_sub(1);
    let out = simulate_with(&trial, config, frames, exec, |_, _| {})?;
    trajectory_loss(&out.trajectory, reference)
}

fn check_reference(scene: &Scene, config: &SimConfig, reference: &Trajectory) -> Result<(), CalibrateError> {
    reference.validate()?;
    if reference.is_empty() {
        return Err(CalibrateError::ShapeMismatch("reference has no frames".into()));
    }
    if reference.particle_count() != scene.particles.len() {
        return Err(CalibrateError::ShapeMismatch(format!(
            "frame 0: reference has {} particles, scene has {}",
            reference.particle_count(),
            scene.particles.len()
        )));
    }
    // Dumps store the interval as f32.
    let dt = config.frame_dt();
    if ((reference.frame_dt - dt) / dt).abs() > 1e-6 {
        return Err(CalibrateError::ShapeMismatch(format!(
            "reference frame interval {} s differs from the configured {} s",
            reference.frame_dt, dt
        )));
    }
    Ok(())
}

/// Fits `theta0` to `reference` with at most `max(budget, 1)` simulations.
pub fn calibrate(
    scene: &Scene,
    config: &SimConfig,
    reference: &Trajectory,
    theta0: &ParamVector,
    budget: usize,
) -> Result<CalibrationResult, CalibrateError> {
    calibrate_with(scene, config, reference, theta0, budget, &CalibrateOptions::default())
}

pub fn calibrate_with(
    scene: &Scene,
    config: &SimConfig,
    reference: &Trajectory,
    theta0: &ParamVector,
    budget: usize,
    opts: &CalibrateOptions,
) -> Result<CalibrationResult, CalibrateError> {
    theta0.validate()?;
    check_reference(scene, config, reference)?;
    let mut probe = scene.materials.clone();
    theta0.apply(&mut probe)?;

    let (lower, upper) = theta0.scaled_bounds();
    let steps: Vec<f64> = theta0
        .entries
        .iter()
        .zip(lower.iter().zip(&upper))
        .map(|(e, (&lo, &hi))| {
            let s = opts.step_fraction * (hi - lo);
            if e.log_scale {
                s.min(opts.max_log_step)
            } else {
                s
            }
        })
        .collect();
    let objective = |x: &[f64]| -> f64 {
        match evaluate(scene, config, reference, &theta0.with_scaled(x), opts.exec) {
            Ok(l) => l,
            Err(e) => {
                log::debug!("trial point {x:?} failed: {e}");
                f64::INFINITY
            }
        }
    };
    let sopts = SimplexOptions { steps, xtol: opts.xtol, ftol: opts.ftol, restarts: opts.restarts, exec: opts.exec };
    let result = simplex::minimize(&objective, &theta0.scaled(), &lower, &upper, budget, &sopts);

    let mut best = f64::INFINITY;
    let history = result
        .evaluations
        .iter()
        .enumerate()
        .map(|(i, e)| {
            best = best.min(e.f);
            LossRecord { evaluation: i, loss: e.f, best, values: theta0.with_scaled(&e.x).entries.iter().map(|p| p.value).collect() }
        })
        .collect::<Vec<_>>();
    let initial_loss = history[0].loss;
    // Keep theta0 itself (not its scaled round trip) when nothing beat it.
    let theta = if result.f < initial_loss { theta0.with_scaled(&result.x) } else { theta0.clone() };
    let loss = result.f.min(initial_loss);
    log::info!("calibration: {} evaluations, loss {initial_loss:.6e} -> {loss:.6e}", history.len());
    Ok(CalibrationResult { theta, loss, initial_loss, history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor3::Vec3;

    fn traj(frames: Vec<Vec<Vec3>>) -> Trajectory {
        Trajectory { frame_dt: 0.1, frames }
    }

    #[test]
    fn loss_examples() {
        let a = traj(vec![vec![Vec3::new(0.1, 0.2, 0.3), Vec3::new(0.4, 0.5, 0.6)]; 3]);
        assert_eq!(trajectory_loss(&a, &a).unwrap(), 0.0);
        let d = 0.25;
        let b = traj(a.frames.iter().map(|f| f.iter().map(|&p| p + Vec3::new(d, 0.0, 0.0)).collect()).collect());
        assert!((trajectory_loss(&a, &b).unwrap() - d * d).abs() < 1e-15);
        let short = traj(a.frames[..2].to_vec());
        assert!(matches!(trajectory_loss(&a, &short), Err(CalibrateError::ShapeMismatch(_))));
    }

    #[test]
    fn gradient_stubs() {
        let theta = ParamVector::new(vec![
            ParamEntry::linear(ParamName::CoeffA, 0.3, -1.0, 1.0),
            ParamEntry::linear(ParamName::CoeffB, -0.2, -1.0, 1.0),
        ]);
        let g = finite_diff_grad(|_| Ok(7.0), &theta, 1e-3).unwrap();
        assert_eq!(g, vec![0.0, 0.0]);
        let quad = |t: &ParamVector| Ok(t.entries.iter().map(|e| e.value * e.value).sum());
        let g = finite_diff_grad(quad, &theta, 1e-4).unwrap();
        assert!((g[0] - 0.6).abs() < 1e-8 && (g[1] + 0.4).abs() < 1e-8, "{g:?}");
    }

    #[test]
    fn gradient_failure_names_entry() {
        let theta = ParamVector::new(vec![
            ParamEntry::linear(ParamName::CoeffA, 0.3, -1.0, 1.0),
            ParamEntry::log(ParamName::YoungsModulus, 1e4, 1.0, 1e8),
        ]);
        let fail = |t: &ParamVector| {
            if t.entries[1].value > 1e4 {
                Err(CalibrateError::InvalidParams("boom".into()))
            } else {
                Ok(0.0)
            }
        };
        match finite_diff_grad(fail, &theta, 1e-2) {
            Err(CalibrateError::Evaluation { entry, .. }) => assert_eq!(entry, "youngs_modulus"),
            other => panic!("{other:?}"),
        }
        assert!(finite_diff_grad(|_| Ok(0.0), &theta, 1.0).is_err());
    }
}
