use std::hint::black_box;

use brokenline::calculus::{sqrt_laplacian_batch, CalculusContext, Execution, QuadratureScheme};
use brokenline::family::{geometric_centers, make_family, FamilyKind};
use brokenline::{Dimension, Grid, Spacing};
use criterion::{criterion_group, criterion_main, Criterion};

fn sqrt_batch(c: &mut Criterion) {
    let grid = Grid::new(Dimension::new(3.0).unwrap(), 50.0, 500, Spacing::default()).unwrap();
    let fam = make_family(FamilyKind::Dilate, &grid, &geometric_centers(4.0, 1.5, 4, |c| c / 2.0)).unwrap();
    let scheme = QuadratureScheme::default();

    let mut group = c.benchmark_group("sqrt_laplacian_batch");
    group.sample_size(10);
    for exec in [Execution::Sequential, Execution::Parallel] {
        let ctx = CalculusContext::new(&scheme).with_exec(exec);
        group.bench_function(format!("{exec:?}").to_lowercase(), |b| {
            b.iter(|| sqrt_laplacian_batch(black_box(&fam.members), &ctx).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, sqrt_batch);
criterion_main!(benches);
