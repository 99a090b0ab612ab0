use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use ufh::{greedy_tiling, sparse_construct, CSequence, Cayley, FolnerFamily, FolnerKind, GroupSpec, Window};
use ufh_bench::{edge_sheet, z2};

fn ball_enumeration(c: &mut Criterion) {
    let mut g = c.benchmark_group("ball");
    g.bench_function("z2_r40", |b| {
        b.iter_batched(
            || Cayley::new(z2()),
            |mut cayley| cayley.ball(40).unwrap().len(),
            BatchSize::SmallInput,
        )
    });
    g.bench_function("heis_r8", |b| {
        b.iter_batched(
            || Cayley::new(GroupSpec::heisenberg3()),
            |mut cayley| cayley.ball(8).unwrap().len(),
            BatchSize::SmallInput,
        )
    });
    g.finish();
}

fn tiling(c: &mut Criterion) {
    c.bench_function("greedy_tiling_z2_r2_w40", |b| {
        b.iter_batched(
            || Cayley::new(z2()),
            |mut cayley| greedy_tiling(&mut cayley, 2, Window::new(40)).unwrap().centers.len(),
            BatchSize::SmallInput,
        )
    });
}

fn boundary_op(c: &mut Criterion) {
    let sheet = edge_sheet(15);
    c.bench_function("boundary_edge_sheet_r15", |b| {
        b.iter(|| sheet.boundary().unwrap().len())
    });
}

fn sparse_pipeline(c: &mut Criterion) {
    c.bench_function("sparse_z_supergeo_j2", |b| {
        b.iter_batched(
            || {
                let spec = GroupSpec::int_lattice(1).unwrap();
                let family =
                    FolnerFamily::new(spec.clone(), FolnerKind::SuperGeometricBalls).unwrap();
                (Cayley::new(spec), family)
            },
            |(mut cayley, family)| {
                sparse_construct(&mut cayley, &family, &CSequence::sigma_squared(), 2)
                    .unwrap()
                    .1
                    .j_computed
            },
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, ball_enumeration, tiling, boundary_op, sparse_pipeline);
criterion_main!(benches);
