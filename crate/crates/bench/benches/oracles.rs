use criterion::{criterion_group, criterion_main, Criterion};

use qip_bench::fuzz_set;
use qip_core::cegar::{solve_qip, SolveOptions};
use qip_core::oracle_bruteforce::minimax_feasible;

// The engine and the enumeration oracle on the same small random instances.
fn engine_vs_enumeration(c: &mut Criterion) {
    let set = fuzz_set(50);
    let opts = SolveOptions::default();
    c.bench_function("fuzz50_engine", |b| {
        b.iter(|| {
            for inst in &set {
                solve_qip(inst, &opts);
            }
        })
    });
    c.bench_function("fuzz50_minimax", |b| {
        b.iter(|| {
            for inst in &set {
                let _ = minimax_feasible(inst);
            }
        })
    });
}

criterion_group!(benches, engine_vs_enumeration);
criterion_main!(benches);
