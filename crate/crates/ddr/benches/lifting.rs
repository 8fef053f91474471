//! Lifting construction on the worker pool against a sequential build.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ddr::ddr::DdrSpace;
use ddr::lifting::{LiftOptions, Lifting};
use ddr::mesh::{build_family, Family, FamilySpec};

fn bench_lifting(c: &mut Criterion) {
    let mut group = c.benchmark_group("lifting build");
    group.sample_size(10);
    for (family, level) in [(Family::Triangular, 2), (Family::CartesianPolygonal, 2)] {
        let mesh = build_family(FamilySpec::new(family, 2, level)).unwrap();
        let space = DdrSpace::<f64>::new(&mesh, 1, 1).unwrap();
        for sequential in [false, true] {
            let label = if sequential { "sequential" } else { "parallel" };
            group.bench_with_input(BenchmarkId::new(label, format!("{family}-l{level}")), &sequential, |b, &sequential| {
                b.iter(|| Lifting::build(&space, LiftOptions { drop_correction: false, sequential }).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_lifting);
criterion_main!(benches);
