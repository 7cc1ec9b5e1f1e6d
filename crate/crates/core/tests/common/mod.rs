#![allow(dead_code)]

pub mod oracles;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use viscompm::constitutive::{Dissipation, ElasticParams, Material};
use viscompm::mpm::{Particle, SimConfig};
use viscompm::scene::{lattice_points, Scene};
use viscompm::{Mat3, Vec3};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_vec(r: &mut impl Rng, lo: f64, hi: f64) -> Vec3 {
    Vec3::new(r.gen_range(lo..hi), r.gen_range(lo..hi), r.gen_range(lo..hi))
}

pub fn uniform_mat(r: &mut impl Rng, lo: f64, hi: f64) -> Mat3 {
    let mut m = Mat3::ZERO;
    for row in &mut m.m {
        for v in row {
            *v = r.gen_range(lo..hi);
        }
    }
    m
}

/// Random rotation from a normalized quaternion.
pub fn random_rotation(r: &mut impl Rng) -> Mat3 {
    let mut q = [0.0f64; 4];
    loop {
        for c in &mut q {
            *c = r.gen_range(-1.0..1.0);
        }
        let n = q.iter().map(|c| c * c).sum::<f64>();
        if n > 1e-3 && n <= 1.0 {
            let n = n.sqrt();
            q.iter_mut().for_each(|c| *c /= n);
            break;
        }
    }
    let [w, x, y, z] = q;
    Mat3::from_rows([
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ])
}

/// Deformation gradient with singular values in `[lo, hi]` and random bases.
pub fn random_deformation(r: &mut impl Rng, lo: f64, hi: f64) -> Mat3 {
    let s = Vec3::new(r.gen_range(lo..hi), r.gen_range(lo..hi), r.gen_range(lo..hi));
    random_rotation(r) * Mat3::from_diagonal(s) * random_rotation(r)
}

pub fn material(e: f64, nu: f64, dissipation: Dissipation) -> Material {
    let mut m = Material::elastic_only(ElasticParams::new(e, nu).unwrap());
    m.visco.dissipation = dissipation;
    m
}

/// Random particles inside the grid interior with random state.
pub fn random_particles(r: &mut impl Rng, config: &SimConfig, n: usize) -> Vec<Particle> {
    let (lo, hi) = config.interior();
    (0..n)
        .map(|_| {
            let x = Vec3::new(r.gen_range(lo.x..hi.x), r.gen_range(lo.y..hi.y), r.gen_range(lo.z..hi.z));
            let mut p = Particle::new(x, r.gen_range(0.1..2.0), r.gen_range(1e-6..1e-5), 0);
            p.v = uniform_vec(r, -1.0, 1.0);
            p.c = uniform_mat(r, -5.0, 5.0);
            p.f_e = random_deformation(r, 0.8, 1.2);
            p.f_n = random_deformation(r, 0.8, 1.2);
            p
        })
        .collect()
}

/// `n³` particles on a lattice of spacing `h` with its low corner at `lo`.
pub fn cube_points(lo: Vec3, n: usize, h: f64) -> Vec<Vec3> {
    lattice_points(lo, lo + Vec3::splat(n as f64 * h), h)
}

/// 10³-particle cube at the center of a 32³ unit domain, with both
/// deformation gradients stretched 20% along x, in zero gravity.
pub fn stretched_cube(dissipation: Dissipation) -> (Scene, SimConfig) {
    let mut config = SimConfig::cube(32, 1.0, 1e-4, 100);
    config.gravity = Vec3::ZERO;
    let h = config.dx / 2.0;
    let pts = cube_points(Vec3::splat(0.5 - 5.0 * h), 10, h);
    let mut scene = Scene::from_points(&pts, 1000.0, material(1e4, 0.3, dissipation), &config).unwrap();
    let stretch = Mat3::from_diagonal(Vec3::new(1.2, 1.0, 1.0));
    for p in &mut scene.particles {
        p.f_e = stretch;
        p.f_n = stretch;
    }
    (scene, config)
}

/// 8³-particle viscoelastic cube thrown down onto the sticky floor of a
/// 32³ unit domain, 100 substeps of 1e-4 s per frame.
pub fn drop_scene(youngs: f64) -> (Scene, SimConfig) {
    let config = SimConfig::cube(32, 1.0, 1e-4, 100);
    let h = config.dx / 2.0;
    let pts = cube_points(Vec3::new(0.5 - 4.0 * h, 0.16, 0.5 - 4.0 * h), 8, h);
    let mut scene = Scene::from_points(&pts, 1000.0, material(youngs, 0.3, Dissipation::tied(10.0)), &config).unwrap();
    scene.set_velocity(Vec3::new(0.0, -1.5, 0.0));
    (scene, config)
}

/// Smaller, cheaper variant of [`drop_scene`]: 4³ particles on a 16³ grid.
pub fn small_drop_scene(youngs: f64) -> (Scene, SimConfig) {
    let config = SimConfig::cube(16, 1.0, 2e-4, 50);
    let h = config.dx / 2.0;
    let pts = cube_points(Vec3::new(0.5 - 2.0 * h, 0.3, 0.5 - 2.0 * h), 4, h);
    let mut scene = Scene::from_points(&pts, 1000.0, material(youngs, 0.3, Dissipation::tied(10.0)), &config).unwrap();
    scene.set_velocity(Vec3::new(0.0, -1.5, 0.0));
    (scene, config)
}

/// Points spread evenly over a sphere (Fibonacci lattice).
pub fn fibonacci_sphere(center: Vec3, radius: f64, n: usize) -> Vec<Vec3> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let y = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - y * y).sqrt();
            let phi = golden * i as f64;
            center + Vec3::new(r * phi.cos(), y, r * phi.sin()) * radius
        })
        .collect()
}

pub fn centroid(points: &[Vec3]) -> Vec3 {
    points.iter().fold(Vec3::ZERO, |a, &p| a + p) / points.len() as f64
}

/// Half the peak-to-peak range of `series[from..]`.
pub fn half_range(series: &[f64], from: usize) -> f64 {
    let tail = &series[from..];
    let max = tail.iter().cloned().fold(f64::MIN, f64::max);
    let min = tail.iter().cloned().fold(f64::MAX, f64::min);
    0.5 * (max - min)
}

/// Extent of a snapshot along `axis`.
pub fn extent(frame: &[Vec3], axis: usize) -> f64 {
    let max = frame.iter().map(|p| p[axis]).fold(f64::MIN, f64::max);
    let min = frame.iter().map(|p| p[axis]).fold(f64::MAX, f64::min);
    max - min
}
