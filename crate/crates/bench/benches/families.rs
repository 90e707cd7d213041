use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use qip_bench::{mcn_instance, qrp_set};
use qip_core::cegar::{solve_qip, FirstMove, SolveOptions};
use qip_core::optimize::optimize;

fn qrandomparity(c: &mut Criterion) {
    let mut group = c.benchmark_group("qrp_solve");
    group.sample_size(10);
    for n in [8, 16, 32, 64] {
        let set = qrp_set(n, 4);
        for (name, fm) in [("relax", FirstMove::Relax), ("bounds", FirstMove::Bounds)] {
            let opts = SolveOptions {
                first_move: fm,
                ..SolveOptions::default()
            };
            group.bench_with_input(BenchmarkId::new(name, n), &set, |b, set| {
                b.iter(|| {
                    for inst in set {
                        solve_qip(inst, &opts);
                    }
                })
            });
        }
    }
    group.finish();
}

fn mcn(c: &mut Criterion) {
    let mut group = c.benchmark_group("mcn_optimize");
    group.sample_size(10);
    for v in [4, 6, 8] {
        let inst = mcn_instance(v, 0.3, 7);
        group.bench_with_input(BenchmarkId::from_parameter(v), &inst, |b, inst| {
            b.iter(|| optimize(inst, &SolveOptions::default()).expect("MCN has an objective"))
        });
    }
    group.finish();
}

criterion_group!(benches, qrandomparity, mcn);
criterion_main!(benches);
