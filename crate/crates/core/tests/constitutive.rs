mod common;

use common::oracles::{fd_kirchhoff, implicit_strain, rel_err};
use common::{random_deformation, random_rotation, rng, uniform_mat, uniform_vec};
use rand::Rng;
use viscompm::constitutive::{
    corotated_energy, corotated_kirchhoff, derive_ab, hencky_energy, hencky_kirchhoff, lame_from_young_poisson,
    viscous_return_map,
};
use viscompm::tensor3::{svd3, Mat3, Vec3};

#[test]
fn corotated_stress_matches_energy_gradient() {
    let mut r = rng(21);
    let (lambda, mu) = lame_from_young_poisson(1e4, 0.3).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let f = random_deformation(&mut r, 0.6, 1.5);
        let tau = corotated_kirchhoff(&f, lambda, mu).unwrap();
        let fd = fd_kirchhoff(|g| corotated_energy(g, lambda, mu).unwrap(), &f, 1e-5);
        worst = worst.max(rel_err(&tau, &fd));
    }
    assert!(worst <= 1e-4, "worst relative error {worst:e}");
}

#[test]
fn hencky_stress_matches_energy_gradient() {
    let mut r = rng(22);
    let (lambda, mu) = (3000.0, 2000.0);
    for _ in 0..200 {
        let f = random_deformation(&mut r, 0.6, 1.5);
        let tau = hencky_kirchhoff(&f, lambda, mu);
        let fd = fd_kirchhoff(|g| hencky_energy(g, lambda, mu), &f, 1e-5);
        assert!(rel_err(&tau, &fd) <= 1e-4, "{f:?}");
    }
}

#[test]
fn stresses_are_rotation_equivariant() {
    let mut r = rng(23);
    let (lambda, mu) = lame_from_young_poisson(5e4, 0.25).unwrap();
    for _ in 0..200 {
        let f = random_deformation(&mut r, 0.5, 1.8);
        let q = random_rotation(&mut r);
        let rotated = corotated_kirchhoff(&(q * f), lambda, mu).unwrap();
        let expected = q * corotated_kirchhoff(&f, lambda, mu).unwrap() * q.transpose();
        assert!(rel_err(&rotated, &expected) <= 1e-6);
        let rotated_n = hencky_kirchhoff(&(q * f), lambda, mu);
        let expected_n = q * hencky_kirchhoff(&f, lambda, mu) * q.transpose();
        assert!(rel_err(&rotated_n, &expected_n) <= 1e-6);
    }
}

#[test]
fn small_strain_limit_is_hooke() {
    let mut r = rng(24);
    let (lambda, mu) = lame_from_young_poisson(1e5, 0.3).unwrap();
    let h = 1e-4;
    for _ in 0..100 {
        let g = uniform_mat(&mut r, -1.0, 1.0);
        let f = Mat3::IDENTITY + g * h;
        let eps = (g + g.transpose()) * (0.5 * h);
        let hooke = eps * (2.0 * mu) + Mat3::scaled_identity(lambda * eps.trace());
        assert!(rel_err(&corotated_kirchhoff(&f, lambda, mu).unwrap(), &hooke) <= 1e-3);
        assert!(rel_err(&hencky_kirchhoff(&f, lambda, mu), &hooke) <= 1e-3);
    }
}

#[test]
fn derive_ab_satisfies_implicit_update() {
    let mut r = rng(25);
    for _ in 0..200 {
        let lambda_n = r.gen_range(0.0..5e4);
        let mu_n = r.gen_range(1e2..5e4);
        let nu_d = 10f64.powf(r.gen_range(-1.0..3.0));
        let nu_v = 10f64.powf(r.gen_range(-1.0..3.0));
        let dt = 10f64.powf(r.gen_range(-5.0..-3.0));
        let (a, b) = derive_ab(lambda_n, mu_n, nu_d, nu_v, dt);
        let eps_tr = uniform_vec(&mut r, -0.3, 0.3);
        let closed = (eps_tr - Vec3::splat(b * eps_tr.sum())) * a;
        let oracle = implicit_strain(eps_tr, lambda_n, mu_n, nu_d, nu_v, dt);
        assert!((closed - oracle).max_abs() <= 1e-8, "{closed:?} vs {oracle:?}");
    }
}

#[test]
fn return_map_acts_on_principal_strains() {
    let mut r = rng(26);
    for _ in 0..100 {
        let (a, b) = derive_ab(2e3, 3e3, 5.0, 8.0, 1e-3);
        let f = random_deformation(&mut r, 0.7, 1.4);
        let s = svd3(&f);
        let eps = s.sigma.map(f64::ln);
        let expected = (eps - Vec3::splat(b * eps.sum())) * a;
        let out = viscous_return_map(&f, a, b);
        let back = svd3(&out.f_n).sigma.map(f64::ln);
        assert!((back - expected).max_abs() < 1e-10);
        assert!(!out.clamped);
    }
}

#[test]
fn return_map_contracts_strain() {
    let mut r = rng(27);
    for _ in 0..1000 {
        let (a, b) = derive_ab(
            r.gen_range(0.0..1e4),
            r.gen_range(1.0..1e4),
            10f64.powf(r.gen_range(-2.0..2.0)),
            10f64.powf(r.gen_range(-2.0..2.0)),
            1e-4,
        );
        let eps_tr = uniform_vec(&mut r, -1.0, 1.0);
        let eps = (eps_tr - Vec3::splat(b * eps_tr.sum())) * a;
        assert!(eps.norm() <= eps_tr.norm() * (1.0 + 1e-12));
    }
}

#[test]
fn identity_coefficients_are_bitwise_noop() {
    let mut r = rng(28);
    assert_eq!(derive_ab(1e3, 1e3, f64::INFINITY, f64::INFINITY, 1e-4), (1.0, 0.0));
    for _ in 0..100 {
        let f = random_deformation(&mut r, 0.5, 2.0);
        let out = viscous_return_map(&f, 1.0, 0.0).f_n;
        assert!(out.m.iter().flatten().zip(f.m.iter().flatten()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}
