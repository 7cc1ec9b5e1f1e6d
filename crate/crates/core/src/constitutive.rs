//! Two-branch constitutive model.
//!
//! The elastic branch is fixed corotated hyperelasticity on `F_E`. The
//! viscoelastic branch is a Hencky (log principal strain) spring on `F_N`
//! in series with a viscous damper; the damper acts through a closed-form
//! trial-and-correction return map on the principal log strains.
//!
//! Stresses are returned as Kirchhoff tensors `τ = J σ`, which is what the
//! grid force needs when multiplied by the rest volume.

use serde::{Deserialize, Serialize};

use crate::error::DomainError;
use crate::tensor3::{polar_rotation, svd3, Mat3, Vec3};

/// Clamp band for the singular values of `F_N` before taking logs.
pub const HENCKY_SIGMA_MIN: f64 = 0.05;
pub const HENCKY_SIGMA_MAX: f64 = 20.0;

/// Largest admissible Poisson ratio; closer to 0.5 the first Lamé parameter blows up.
pub const POISSON_MAX: f64 = 0.5 - 1e-4;

pub fn lame_from_young_poisson(e: f64, nu: f64) -> Result<(f64, f64), DomainError> {
    if !(e > 0.0 && e.is_finite()) {
        return Err(DomainError::InvalidParameter(format!("Young's modulus must be positive, got {e}")));
    }
    if !(nu > -1.0 && nu < POISSON_MAX) {
        return Err(DomainError::PoissonRatio { nu });
    }
    let lambda = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    let mu = e / (2.0 * (1.0 + nu));
    Ok((lambda, mu))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ElasticSpec {
    youngs_modulus: f64,
    poisson_ratio: f64,
}

/// Isotropic elastic moduli. The Lamé pair is always derived from `(E, ν)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ElasticSpec", into = "ElasticSpec")]
pub struct ElasticParams {
    youngs_e: f64,
    poisson_nu: f64,
    lame_lambda: f64,
    lame_mu: f64,
}

impl ElasticParams {
    pub fn new(youngs_e: f64, poisson_nu: f64) -> Result<Self, DomainError> {
        let (lame_lambda, lame_mu) = lame_from_young_poisson(youngs_e, poisson_nu)?;
        Ok(ElasticParams { youngs_e, poisson_nu, lame_lambda, lame_mu })
    }

    pub fn youngs(&self) -> f64 {
        self.youngs_e
    }

    pub fn poisson(&self) -> f64 {
        self.poisson_nu
    }

    pub fn lambda(&self) -> f64 {
        self.lame_lambda
    }

    pub fn mu(&self) -> f64 {
        self.lame_mu
    }

    pub fn with_youngs(&self, youngs_e: f64) -> Result<Self, DomainError> {
        ElasticParams::new(youngs_e, self.poisson_nu)
    }

    pub fn with_poisson(&self, poisson_nu: f64) -> Result<Self, DomainError> {
        ElasticParams::new(self.youngs_e, poisson_nu)
    }
}

impl TryFrom<ElasticSpec> for ElasticParams {
    type Error = DomainError;
    fn try_from(s: ElasticSpec) -> Result<Self, DomainError> {
        ElasticParams::new(s.youngs_modulus, s.poisson_ratio)
    }
}

impl From<ElasticParams> for ElasticSpec {
    fn from(p: ElasticParams) -> Self {
        ElasticSpec { youngs_modulus: p.youngs_e, poisson_ratio: p.poisson_nu }
    }
}

/// How the viscoelastic branch dissipates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Dissipation {
    /// Infinite viscosity: the branch is a pure Hencky spring.
    None,
    /// Deviatoric and dilational viscosities in Pa·s; the return-map
    /// coefficients are derived from them each substep.
    Viscous { nu_d: f64, nu_v: f64 },
    /// Return-map coefficients given directly.
    Direct { a: f64, b: f64 },
}

impl Dissipation {
    /// Equal deviatoric and dilational viscosity.
    pub fn tied(nu: f64) -> Self {
        Dissipation::Viscous { nu_d: nu, nu_v: nu }
    }
}

/// Viscoelastic branch parameters. Missing Lamé moduli follow the elastic branch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViscoParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lame_lambda_n: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lame_mu_n: Option<f64>,
    pub dissipation: Dissipation,
}

impl Default for ViscoParams {
    fn default() -> Self {
        ViscoParams { lame_lambda_n: None, lame_mu_n: None, dissipation: Dissipation::None }
    }
}

impl ViscoParams {
    pub fn validate(&self) -> Result<(), DomainError> {
        for (name, v) in [("lame_lambda_n", self.lame_lambda_n), ("lame_mu_n", self.lame_mu_n)] {
            if let Some(v) = v {
                if !v.is_finite() {
                    return Err(DomainError::InvalidParameter(format!("{name} must be finite, got {v}")));
                }
            }
        }
        if let Some(mu) = self.lame_mu_n {
            if mu < 0.0 {
                return Err(DomainError::InvalidParameter(format!("lame_mu_n must be >= 0, got {mu}")));
            }
        }
        match self.dissipation {
            Dissipation::None => Ok(()),
            Dissipation::Viscous { nu_d, nu_v } => {
                if nu_d > 0.0 && nu_v > 0.0 {
                    Ok(())
                } else {
                    Err(DomainError::InvalidParameter(format!(
                        "viscosities must be positive, got nu_d = {nu_d}, nu_v = {nu_v}"
                    )))
                }
            }
            Dissipation::Direct { a, b } => check_return_coefficients(a, b),
        }
    }
}

pub fn check_return_coefficients(a: f64, b: f64) -> Result<(), DomainError> {
    let trace_factor = a * (1.0 - 3.0 * b);
    if a > 0.0 && a <= 1.0 && trace_factor > 0.0 && trace_factor <= 1.0 {
        Ok(())
    } else {
        Err(DomainError::InvalidParameter(format!(
            "return-map coefficients need 0 < a <= 1 and 0 < a(1-3b) <= 1, got a = {a}, b = {b}"
        )))
    }
}

/// Full material description of one region.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Material {
    pub elastic: ElasticParams,
    #[serde(default)]
    pub visco: ViscoParams,
}

impl Material {
    pub fn elastic_only(elastic: ElasticParams) -> Self {
        Material { elastic, visco: ViscoParams::default() }
    }

    pub fn lambda_n(&self) -> f64 {
        self.visco.lame_lambda_n.unwrap_or(self.elastic.lambda())
    }

    pub fn mu_n(&self) -> f64 {
        self.visco.lame_mu_n.unwrap_or(self.elastic.mu())
    }

    /// Moduli and return-map coefficients for substep length `dt`.
    pub fn resolve(&self, dt: f64) -> Result<ResolvedMaterial, DomainError> {
        self.visco.validate()?;
        let (lambda_n, mu_n) = (self.lambda_n(), self.mu_n());
        let (a, b) = match self.visco.dissipation {
            Dissipation::None => (1.0, 0.0),
            Dissipation::Viscous { nu_d, nu_v } => derive_ab(lambda_n, mu_n, nu_d, nu_v, dt),
            Dissipation::Direct { a, b } => (a, b),
        };
        Ok(ResolvedMaterial {
            lambda: self.elastic.lambda(),
            mu: self.elastic.mu(),
            lambda_n,
            mu_n,
            a,
            b,
        })
    }
}

/// Per-substep constants consumed by the integrator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResolvedMaterial {
    pub lambda: f64,
    pub mu: f64,
    pub lambda_n: f64,
    pub mu_n: f64,
    pub a: f64,
    pub b: f64,
}

/// Closed-form return-map coefficients.
///
/// Solves `ε' = ε_tr − dt ∂ψ_V/∂τ(τ(ε'))` with
/// `ψ_V = |dev τ|²/(2ν_d) + (tr τ)²/(9ν_v)` and the Hencky law
/// `τ = 2μ_N ε + λ_N tr(ε) 1`. The deviatoric part scales by `a`, the
/// trace by `a(1 − 3b)`. Infinite viscosities give `(1, 0)`.
pub fn derive_ab(lambda_n: f64, mu_n: f64, nu_d: f64, nu_v: f64, dt: f64) -> (f64, f64) {
    if dt == 0.0 {
        return (1.0, 0.0);
    }
    let a = 1.0 / (1.0 + 2.0 * dt * mu_n / nu_d);
    let bulk3 = 2.0 * mu_n + 3.0 * lambda_n;
    let trace_factor = 1.0 / (1.0 + (2.0 * dt / (9.0 * nu_v)) * 3.0 * bulk3);
    let b = (1.0 - trace_factor / a) / 3.0;
    (a, b)
}

pub fn corotated_energy(f_e: &Mat3, lambda: f64, mu: f64) -> Result<f64, DomainError> {
    let j = f_e.det();
    if !(j > 0.0) {
        return Err(DomainError::InvertedElement { det: j });
    }
    let s = svd3(f_e).sigma;
    let dev = (s - Vec3::splat(1.0)).norm_squared();
    Ok(mu * dev + 0.5 * lambda * (j - 1.0).powi(2))
}

/// `τ_E = 2μ (F − R) Fᵀ + λ J (J − 1) I`
pub fn corotated_kirchhoff(f_e: &Mat3, lambda: f64, mu: f64) -> Result<Mat3, DomainError> {
    let r = polar_rotation(f_e)?;
    let j = f_e.det();
    Ok((*f_e - r) * f_e.transpose() * (2.0 * mu) + Mat3::scaled_identity(lambda * j * (j - 1.0)))
}

/// Clamps singular values into the Hencky band; the flag reports whether any moved.
pub fn clamp_singular_values(sigma: Vec3) -> (Vec3, bool) {
    let c = sigma.map(|s| s.clamp(HENCKY_SIGMA_MIN, HENCKY_SIGMA_MAX));
    (c, c != sigma)
}

fn principal_hencky_stress(eps: Vec3, lambda_n: f64, mu_n: f64) -> Vec3 {
    eps * (2.0 * mu_n) + Vec3::splat(lambda_n * eps.sum())
}

pub fn hencky_energy(f_n: &Mat3, lambda_n: f64, mu_n: f64) -> f64 {
    let (sigma, _) = clamp_singular_values(svd3(f_n).sigma);
    let eps = sigma.map(f64::ln);
    mu_n * eps.norm_squared() + 0.5 * lambda_n * eps.sum().powi(2)
}

/// `τ_N = U diag(2μ_N ε + λ_N tr(ε) 1) Uᵀ` with `ε = log Σ_N`.
pub fn hencky_kirchhoff(f_n: &Mat3, lambda_n: f64, mu_n: f64) -> Mat3 {
    if lambda_n == 0.0 && mu_n == 0.0 {
        return Mat3::ZERO;
    }
    let svd = svd3(f_n);
    let (sigma, _) = clamp_singular_values(svd.sigma);
    let tau = principal_hencky_stress(sigma.map(f64::ln), lambda_n, mu_n);
    svd.u * Mat3::from_diagonal(tau) * svd.u.transpose()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReturnMap {
    pub f_n: Mat3,
    pub clamped: bool,
}

/// Viscous correction of a trial `F_N`: `ε' = a (ε_tr − b tr(ε_tr) 1)` on the
/// principal log strains, keeping the singular bases.
pub fn viscous_return_map(f_n_trial: &Mat3, a: f64, b: f64) -> ReturnMap {
    if a == 1.0 && b == 0.0 {
        return ReturnMap { f_n: *f_n_trial, clamped: false };
    }
    let svd = svd3(f_n_trial);
    let (sigma, clamped) = clamp_singular_values(svd.sigma);
    let eps = sigma.map(f64::ln);
    let corrected = (eps - Vec3::splat(b * eps.sum())) * a;
    ReturnMap {
        f_n: svd.u * Mat3::from_diagonal(corrected.map(f64::exp)) * svd.v.transpose(),
        clamped,
    }
}

/// Kirchhoff stresses of both branches. The grid force uses their sum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StressPair {
    pub tau_e: Mat3,
    pub tau_n: Mat3,
}

impl StressPair {
    pub fn total(&self) -> Mat3 {
        self.tau_e + self.tau_n
    }
}

pub fn total_stress(f_e: &Mat3, f_n: &Mat3, m: &ResolvedMaterial) -> Result<StressPair, DomainError> {
    let j_n = f_n.det();
    if !(j_n > 0.0) {
        return Err(DomainError::InvertedElement { det: j_n });
    }
    Ok(StressPair {
        tau_e: corotated_kirchhoff(f_e, m.lambda, m.mu)?,
        tau_n: hencky_kirchhoff(f_n, m.lambda_n, m.mu_n),
    })
}

/// Stored energy density of both branches, J/m³.
pub fn stored_energy(f_e: &Mat3, f_n: &Mat3, m: &ResolvedMaterial) -> Result<f64, DomainError> {
    Ok(corotated_energy(f_e, m.lambda, m.mu)? + hencky_energy(f_n, m.lambda_n, m.mu_n))
}
