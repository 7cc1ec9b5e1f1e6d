use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use viscompm::constitutive::{Dissipation, ElasticParams, Material, ViscoParams};
use viscompm::mpm::{SimConfig, Simulation};
use viscompm::par::Exec;
use viscompm::scene::{lattice_points, Scene};
use viscompm::Vec3;

/// Viscoelastic block of roughly `n` particles falling in a unit box.
fn setup(n: usize, grid: usize) -> Simulation {
    let config = SimConfig::cube(grid, 1.0, 1e-4, 1);
    let h = config.dx / 2.0;
    let side = (n as f64).cbrt().round();
    let lo = Vec3::new(0.5 - side * h / 2.0, 0.3, 0.5 - side * h / 2.0);
    let pts = lattice_points(lo, lo + Vec3::splat(side * h), h);
    let material = Material {
        elastic: ElasticParams::new(1e5, 0.3).unwrap(),
        visco: ViscoParams { dissipation: Dissipation::tied(10.0), ..Default::default() },
    };
    let scene = Scene::from_points(&pts, 1000.0, material, &config).unwrap();
    let materials = scene.materials.iter().map(|m| m.resolve(config.dt).unwrap()).collect();
    Simulation::new(config, scene.particles, materials).unwrap()
}

fn substep(c: &mut Criterion) {
    let mut group = c.benchmark_group("substep");
    group.sample_size(20);
    for (n, grid) in [(1000, 32), (8000, 50), (27000, 64)] {
        for (name, exec) in [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)] {
            let base = setup(n, grid).with_exec(exec);
            let label = format!("{}p_{grid}^3", base.particles.len());
            group.bench_with_input(BenchmarkId::new(name, label), &base, |b, base| {
                b.iter_batched_ref(
                    || base.clone(),
                    |sim| black_box(sim.substep().unwrap()),
                    criterion::BatchSize::LargeInput,
                )
            });
        }
    }
    group.finish();
}

criterion_group!(benches, substep);
criterion_main!(benches);
