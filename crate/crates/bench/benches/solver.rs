//! Criterion benchmarks: objective evaluation, full solves across the C
//! grid, homotopy continuation, Gram construction, and format parsing.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use psvm::io;
use psvm::models::{ModelSpec, Objective, TrainData};
use psvm::solver::{solve, solve_homotopy, HomotopyConfig, SolverConfig};
use psvm::synth;
use psvm::{Dataset, GramDataset};

fn census_train() -> Dataset {
    synth::census_like(1605, 10, 123, 0.76, 404).0
}

fn bench_eval(c: &mut Criterion) {
    let d = census_train();
    let mut group = c.benchmark_group("eval");
    for (name, spec) in [
        ("csvm", ModelSpec::csvm(1.0)),
        ("lpsvm", ModelSpec::lpsvm(1.0)),
        ("lssvm", ModelSpec::lssvm(1.0)),
    ] {
        let obj = Objective::new(TrainData::Linear(&d), spec).unwrap();
        let w = vec![0.01; obj.dim()];
        group.bench_function(name, |b| b.iter(|| obj.eval(black_box(&w)).unwrap()));
    }
    group.finish();
}

fn bench_solve(c: &mut Criterion) {
    let d = census_train();
    let config = SolverConfig::default();
    let mut group = c.benchmark_group("solve_csvm");
    group.sample_size(10);
    for exp in [-2i32, 0, 2] {
        let c_value = 10f64.powi(exp);
        group.bench_with_input(BenchmarkId::from_parameter(c_value), &c_value, |b, &cv| {
            b.iter(|| {
                let obj = Objective::new(TrainData::Linear(&d), ModelSpec::csvm(cv)).unwrap();
                solve(&obj, &config).unwrap()
            })
        });
    }
    group.finish();
}

fn bench_homotopy(c: &mut Criterion) {
    let d = synth::planted_instance(200, 20, 0.2, 17);
    let spec = ModelSpec::csvm(1.0);
    let config = SolverConfig::default();
    let mut group = c.benchmark_group("continuation");
    group.sample_size(10);
    group.bench_function("direct_mu_0.5", |b| {
        b.iter(|| {
            let mut s = spec.clone();
            s.mu = 0.5;
            let obj = Objective::new(TrainData::Linear(&d), s).unwrap();
            solve(&obj, &config).unwrap()
        })
    });
    group.bench_function("homotopy_to_0.5", |b| {
        b.iter(|| {
            solve_homotopy(
                TrainData::Linear(&d),
                &spec,
                &config,
                &HomotopyConfig::new(5.0, 0.5),
            )
            .unwrap()
        })
    });
    group.finish();
}

fn bench_gram(c: &mut Criterion) {
    let d = synth::planted_instance(400, 30, 0.2, 23);
    c.bench_function("gram_rbf_400", |b| {
        b.iter(|| GramDataset::rbf(black_box(&d), 30.0).unwrap())
    });
}

fn bench_parse(c: &mut Criterion) {
    let d = census_train();
    let records: Vec<io::SvmLightRecord> = (0..d.n())
        .map(|i| io::SvmLightRecord {
            label: d.labels()[i],
            entries: d
                .row(i)
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(j, &v)| (j + 1, v))
                .collect(),
        })
        .collect();
    let text = io::serialize_svmlight(&records);
    c.bench_function("parse_svmlight_1605", |b| {
        b.iter(|| io::parse_svmlight(black_box(&text)).unwrap())
    });
}

criterion_group!(
    benches,
    bench_eval,
    bench_solve,
    bench_homotopy,
    bench_gram,
    bench_parse
);
criterion_main!(benches);
