//! Independent reference computations for stress and viscous-flow checks.

use viscompm::tensor3::{Mat3, Vec3};

/// Kirchhoff stress `(∂ψ/∂F) Fᵀ` from central differences of `psi`.
pub fn fd_kirchhoff(psi: impl Fn(&Mat3) -> f64, f: &Mat3, h: f64) -> Mat3 {
    let mut p = Mat3::ZERO;
    for i in 0..3 {
        for j in 0..3 {
            let mut fp = *f;
            let mut fm = *f;
            fp.m[i][j] += h;
            fm.m[i][j] -= h;
            p.m[i][j] = (psi(&fp) - psi(&fm)) / (2.0 * h);
        }
    }
    p * f.transpose()
}

pub fn rel_err(a: &Mat3, b: &Mat3) -> f64 {
    (*a - *b).frobenius_norm() / b.frobenius_norm().max(1e-12)
}

/// `ψ_V(τ) = |dev τ|²/(2ν_d) + (tr τ)²/(9ν_v)` on principal stresses.
pub fn dissipation_potential(tau: Vec3, nu_d: f64, nu_v: f64) -> f64 {
    let mean = tau.sum() / 3.0;
    let dev = tau - Vec3::splat(mean);
    dev.norm_squared() / (2.0 * nu_d) + tau.sum().powi(2) / (9.0 * nu_v)
}

pub fn grad_potential(tau: Vec3, nu_d: f64, nu_v: f64) -> Vec3 {
    let h = 1e-3 * (1.0 + tau.max_abs());
    let mut g = Vec3::ZERO;
    for a in 0..3 {
        let mut tp = tau;
        let mut tm = tau;
        tp[a] += h;
        tm[a] -= h;
        g[a] = (dissipation_potential(tp, nu_d, nu_v) - dissipation_potential(tm, nu_d, nu_v)) / (2.0 * h);
    }
    g
}

/// Solves `ε = ε_tr − dt ∂ψ_V/∂τ(τ(ε))` by relaxed fixed-point iteration.
pub fn implicit_strain(eps_tr: Vec3, lambda_n: f64, mu_n: f64, nu_d: f64, nu_v: f64, dt: f64) -> Vec3 {
    let stress = |e: Vec3| e * (2.0 * mu_n) + Vec3::splat(lambda_n * e.sum());
    let stiff = dt * (2.0 * mu_n / nu_d).max((2.0 / (9.0 * nu_v)) * 3.0 * (2.0 * mu_n + 3.0 * lambda_n));
    let omega = 1.0 / (1.0 + stiff);
    let mut e = eps_tr;
    for _ in 0..200_000 {
        let next = eps_tr - grad_potential(stress(e), nu_d, nu_v) * dt;
        let relaxed = e * (1.0 - omega) + next * omega;
        if (relaxed - e).max_abs() < 1e-16 {
            return relaxed;
        }
        e = relaxed;
    }
    e
}
