use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fairslice::discrete::{brute_force_discrete_with, DiscreteInstance, FairnessCriterion};
use fairslice::exact_solver::{decide_ef_with, EfConstraint};
use fairslice::gadgets::verify_clause_gadget_property_with;
use fairslice::valuations::int;
use fairslice::{random, rat, Exec, SearchOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn opts(exec: Exec) -> SearchOptions {
    SearchOptions { exec, ..SearchOptions::default() }
}

fn decide(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let inst = random::piecewise_instance(&mut rng, 4, 3, 12);
    let constraint = EfConstraint::CutAt(rat(1, 97));
    let mut g = c.benchmark_group("decide_ef");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &e| {
            b.iter(|| decide_ef_with(black_box(&inst), &constraint, &opts(e)).unwrap())
        });
    }
    g.finish();
}

fn brute_force(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let rows = (0..4).map(|_| (0..14).map(|_| int(rng.gen_range(0..=3))).collect()).collect();
    let inst = DiscreteInstance::from_dense(rows).unwrap();
    let crit = [FairnessCriterion::Ef, FairnessCriterion::Eq, FairnessCriterion::PositiveValue];
    let mut g = c.benchmark_group("brute_force_discrete");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &e| {
            b.iter(|| brute_force_discrete_with(black_box(&inst), &crit, &opts(e)).unwrap())
        });
    }
    g.finish();
}

fn clause_gadget(c: &mut Criterion) {
    let mut g = c.benchmark_group("clause_gadget_property");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &e| {
            b.iter(|| verify_clause_gadget_property_with(e).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, decide, brute_force, clause_gadget);
criterion_main!(benches);
