//! Solver and filter throughput on the Tiger and Chain models.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use mcbrl_core::domains::chain::{chain_prior, ChainSpec, ChainVariant};
use mcbrl_core::domains::tiger::{tiger_prior, TigerSpec};
use mcbrl_core::domains::{build_chain, build_tiger};
use mcbrl_core::mcbrl::{build_bamdp, build_bapomdp, sample_hypotheses};
use mcbrl_core::model::{belief_update_momdp, MomdpModel};
use mcbrl_core::solver::{solve, SolveConfig};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn tiger_known() -> MomdpModel {
    let (_, pomdp) = build_tiger(&TigerSpec::symmetric(0.15));
    MomdpModel::from_flat_pomdp(&pomdp)
}

fn tiger_adaptive(k: usize) -> MomdpModel {
    let spec = TigerSpec::symmetric(0.15);
    let (skeleton, _) = build_tiger(&spec);
    let hyps = sample_hypotheses(&skeleton, &tiger_prior(&spec), k, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
    build_bapomdp(&skeleton, &hyps).unwrap().model
}

fn chain_adaptive(k: usize) -> MomdpModel {
    let spec = ChainSpec::new(ChainVariant::SemiTied);
    let (skeleton, _) = build_chain(&spec);
    let hyps = sample_hypotheses(&skeleton, &chain_prior(&spec, &skeleton), k, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
    build_bamdp(&skeleton, &hyps).unwrap().model
}

fn solver(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve");
    g.sample_size(10);
    let known = tiger_known();
    g.bench_function("tiger_known_gap_0.01", |b| {
        let cfg = SolveConfig {
            target_gap: Some(0.01),
            ..SolveConfig::default()
        };
        b.iter(|| solve(black_box(&known), &cfg))
    });
    let tiger = tiger_adaptive(100);
    g.bench_function("tiger_k100_200_backups", |b| {
        let cfg = SolveConfig {
            target_gap: Some(0.1),
            max_backups: Some(200),
            ..SolveConfig::default()
        };
        b.iter(|| solve(black_box(&tiger), &cfg))
    });
    let chain = chain_adaptive(100);
    g.bench_function("chain_semitied_k100_gap_5", |b| {
        let cfg = SolveConfig {
            target_gap: Some(5.0),
            ..SolveConfig::default()
        };
        b.iter(|| solve(black_box(&chain), &cfg))
    });
    g.finish();
}

fn filter(c: &mut Criterion) {
    let tiger = tiger_adaptive(100);
    let belief = tiger.initial_hidden_belief();
    c.bench_function("belief_update_tiger_k100", |b| {
        b.iter(|| belief_update_momdp(black_box(&tiger), 0, &belief, 0, 0, 0).unwrap())
    });
    let chain = chain_adaptive(1000);
    let belief = chain.initial_hidden_belief();
    c.bench_function("belief_update_chain_k1000", |b| {
        b.iter(|| belief_update_momdp(black_box(&chain), 0, &belief, 0, 0, 0).unwrap())
    });
}

criterion_group!(benches, solver, filter);
criterion_main!(benches);
