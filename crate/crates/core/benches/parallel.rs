//! The default rayon pool against a one-thread pool on the data-parallel kernels.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use isolab::entropy::entropy_fields;
use isolab::experiments::jacobian_density;
use isolab::wente::{poisson_dirichlet, DiscField, PlaneGrid};
use isolab::zoo::{analytic, Params, Profile};
use isolab::Tolerances;

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    let default = rayon::ThreadPoolBuilder::new().build().unwrap();
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    vec![("parallel", default), ("sequential", single)]
}

fn kernels(c: &mut Criterion) {
    let tol = Tolerances::default();
    let torus = analytic("torus_of_revolution", &Params::new(), 256, 256, &tol).unwrap();
    let disc = PlaneGrid::unit(256).unwrap();
    let source = DiscField::from_fn(disc, |x, y| 1.0 + x * y);
    let (a, b) = (Profile::default_a(), Profile::default_b());

    let mut group = c.benchmark_group("kernels");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_with_input(BenchmarkId::new("entropy_fields_256", name), &pool, |bench, pool| {
            bench.iter(|| pool.install(|| entropy_fields(&torus, &tol).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("poisson_dirichlet_256", name), &pool, |bench, pool| {
            bench.iter(|| pool.install(|| poisson_dirichlet(&source, &tol).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("jacobian_density_256", name), &pool, |bench, pool| {
            bench.iter(|| pool.install(|| jacobian_density(4, &a, &b, disc, [0.0, 0.0]).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
