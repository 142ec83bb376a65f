//! Criterion benchmarks for the pipeline stages: Hamiltonian assembly,
//! high-precision diagonalization, frequency classification, probability
//! evaluation at large arguments, and a shallow end-to-end alignment
//! search.

use criterion::{criterion_group, criterion_main, Criterion};
use pgt_core::*;
use rug::Integer;
use std::hint::black_box;

fn ssh8(g: &str) -> ChainSpec {
    let one = parse_coupling("1").unwrap();
    ChainSpec::ssh_uniform(2, one.clone(), one, parse_coupling(g).unwrap()).unwrap()
}

fn bench_build(c: &mut Criterion) {
    let spec = ssh8("sqrt(5)");
    c.bench_function("build_one_excitation_ssh8", |b| {
        b.iter(|| build_one_excitation(black_box(&spec)).unwrap())
    });
}

fn bench_decompose(c: &mut Criterion) {
    let spec = ChainSpec::xx_uniform(10, ExactValue::from_integer(1)).unwrap();
    let h = build_one_excitation(&spec).unwrap();
    c.bench_function("decompose_xx10_320bits", |b| {
        b.iter(|| decompose(black_box(&h), 320).unwrap())
    });
}

fn bench_classify(c: &mut Criterion) {
    let spec = ssh8("sqrt(2)");
    let h = build_one_excitation(&spec).unwrap();
    let sd = decompose(&h, 320).unwrap();
    let form = transfer_form(&spec, &sd);
    let freqs = form.frequencies();
    let height = Integer::from(1_000_000u64);
    c.bench_function("classify_frequencies_ssh8_sqrt2", |b| {
        b.iter(|| classify_frequencies(black_box(&freqs), &height, 320).unwrap())
    });
}

fn bench_evaluate(c: &mut Criterion) {
    let spec = ssh8("2");
    let h = build_one_excitation(&spec).unwrap();
    let sd = decompose(&h, 320).unwrap();
    let form = transfer_form(&spec, &sd);
    // A trillion-scale grid time: the regime the scaling law depends on.
    let t = GridStep::Pi.time(&Integer::from(907_540_049_735u64), 320);
    c.bench_function("evaluate_probability_q_1e12", |b| {
        b.iter(|| evaluate_probability(black_box(&form), black_box(&t), 320))
    });
}

fn bench_alignment(c: &mut Criterion) {
    let spec = ChainSpec::xx_uniform(5, ExactValue::from_integer(1)).unwrap();
    let h = build_one_excitation(&spec).unwrap();
    let sd = decompose(&h, 256).unwrap();
    let form = transfer_form(&spec, &sd);
    let analysis =
        classify_frequencies(&form.frequencies(), &Integer::from(1_000_000u64), 256).unwrap();
    let budget = SearchBudget {
        q_limit: Integer::from(1_000_000u64),
        precision_bits: 256,
        ..Default::default()
    };
    let mut group = c.benchmark_group("alignment");
    group.sample_size(10);
    group.bench_function("alignment_search_xx5_q1e6", |b| {
        b.iter(|| alignment_search(black_box(&form), &analysis, &budget))
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_build,
    bench_decompose,
    bench_classify,
    bench_evaluate,
    bench_alignment
);
criterion_main!(benches);
