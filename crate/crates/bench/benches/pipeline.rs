use criterion::{criterion_group, criterion_main, Criterion};

use dijkstra_bench::{corpus_file, signature, stateful_programs};
use dijkstra_core::corpus::FILES;
use dijkstra_core::dm::{load, Registry};
use dijkstra_core::eval::DEFAULT_FUEL;
use dijkstra_core::golden::{elaborate_file, translate_file};
use dijkstra_core::state::simulate_check;
use dijkstra_core::vc::{discharge, monad_law_vcs};
use dijkstra_core::Signature;

fn frontend(c: &mut Criterion) {
    c.bench_function("load corpus", |b| {
        b.iter(|| {
            let mut reg = Registry::default();
            for (_, src) in FILES {
                let f = load(src, &reg).unwrap();
                reg.add(&f);
            }
            reg
        })
    });
}

fn translations(c: &mut Criterion) {
    let sig = Signature::new();
    for n in ["st", "cont", "stexnC"] {
        let f = corpus_file(n);
        c.bench_function(&format!("translate {n}"), |b| b.iter(|| translate_file(&f)));
        c.bench_function(&format!("elaborate {n}"), |b| b.iter(|| elaborate_file(&sig, &f).unwrap()));
    }
}

fn laws(c: &mut Criterion) {
    let sig = signature();
    for eff in ["ST", "CONT", "STEXNC"] {
        let vcs = monad_law_vcs(&sig, eff).unwrap();
        c.bench_function(&format!("monad laws {eff}"), |b| {
            b.iter(|| vcs.iter().all(|vc| discharge(&sig, vc).is_valid()))
        });
    }
}

fn simulation(c: &mut Criterion) {
    let sig = signature();
    let progs = stateful_programs(1, 16, 6);
    c.bench_function("simulate 16 programs", |b| {
        b.iter(|| progs.iter().filter(|p| simulate_check(&sig, p, 3, DEFAULT_FUEL).ok()).count())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = frontend, translations, laws, simulation
}
criterion_main!(benches);
