use std::f64::consts::FRAC_PI_2;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use ctxkernel::harness::{
    build_active_circuit, run_a6, A6Plan, Family, NoiseTable, PairBasis, RunMode, Triple,
};
use ctxkernel::infostats::{permutation_test, RecordStatistic};
use ctxkernel::pipeline::records_for;
use ctxkernel::simcore::{sample_counts, Confusion, NoiseModel};

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    vec![
        ("default", rayon::ThreadPoolBuilder::new().build().unwrap()),
        (
            "1-thread",
            rayon::ThreadPoolBuilder::new()
                .num_threads(1)
                .build()
                .unwrap(),
        ),
    ]
}

fn noise() -> NoiseModel {
    NoiseModel {
        single_qubit_depolarizing: 0.001,
        two_qubit_depolarizing: 0.01,
        idle_dephasing: 0.002,
        readout: vec![Confusion::symmetric(0.01)],
    }
}

fn bench_sampling(c: &mut Criterion) {
    let circuit = build_active_circuit(FRAC_PI_2, Triple::from_index(3), PairBasis::XX);
    let noise = noise();
    let mut group = c.benchmark_group("sample_counts_20k_shots");
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            pool.install(|| b.iter(|| sample_counts(&circuit, 20_000, &noise, 1).unwrap()))
        });
    }
    group.finish();
}

fn bench_permutation(c: &mut Criterion) {
    let plan = A6Plan {
        thetas: vec![FRAC_PI_2],
        families: vec![Family::Active],
        noise_table: NoiseTable::uniform("n", noise()),
        ..A6Plan::default()
    };
    let run = run_a6(&plan, 1, RunMode::Sampled).unwrap();
    let records = records_for(&run, Family::Active, Some(FRAC_PI_2)).unwrap();
    let stat = RecordStatistic::LaneBalancedDelta {
        probe: ["A".into(), "B".into()],
    }
    .bind(&records)
    .unwrap();
    let mut group = c.benchmark_group("permutation_test_200_shuffles");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            pool.install(|| b.iter(|| permutation_test(&records.records, &stat, 200, 3).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_sampling, bench_permutation);
criterion_main!(benches);
