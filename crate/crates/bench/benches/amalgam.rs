use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use cube_amalgam::fraisse::{run, RunConfig};
use cube_amalgam::{complete_bkl, find_embeddings, search_failure_witness, Face, Strategy};
use cube_amalgam_bench::{full_cube, partial_cube};

fn amalgamation(c: &mut Criterion) {
    let mut group = c.benchmark_group("complete_bkl");
    for (n, k) in [(2, 2), (3, 2), (3, 3)] {
        let (p, ids) = partial_cube(n, k, 11);
        group.bench_with_input(BenchmarkId::from_parameter(format!("n{n}k{k}")), &p, |b, p| {
            b.iter(|| complete_bkl(black_box(p), n, &mut ids.clone()).unwrap())
        });
    }
    group.finish();
}

fn embeddings(c: &mut Criterion) {
    let (cube, _) = full_cube(&Strategy::bkl(2), 2, 3);
    let a = cube.face(Face::singleton(0)).unwrap().reduct();
    let b = cube.face(cube.top()).unwrap().reduct();
    c.bench_function("find_embeddings/face_into_top", |bch| {
        bch.iter(|| find_embeddings(black_box(&a), black_box(&b), usize::MAX).unwrap())
    });
}

fn fraisse(c: &mut Criterion) {
    let mut group = c.benchmark_group("fraisse");
    group.sample_size(10);
    for (n, k) in [(2, 1), (3, 2)] {
        let config = RunConfig::new(Strategy::bkl(n).labeled(8), k, 3, 7);
        group.bench_with_input(BenchmarkId::from_parameter(format!("n{n}k{k}r3")), &config, |b, cfg| {
            b.iter(|| run(cfg.clone()).unwrap())
        });
    }
    group.finish();
}

fn witness(c: &mut Criterion) {
    c.bench_function("search_failure_witness/n2_cap6", |b| {
        b.iter(|| search_failure_witness(&Strategy::bkl(2), black_box(6)).unwrap())
    });
}

criterion_group!(benches, amalgamation, embeddings, fraisse, witness);
criterion_main!(benches);
