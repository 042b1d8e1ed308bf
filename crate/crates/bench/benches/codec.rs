use awtc_polar::adversary::apply_write;
use awtc_polar::*;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

fn profile(c: &mut Criterion) {
    let mut group = c.benchmark_group("bec_profile");
    for n in [10u32, 14, 18] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| bec_profile(black_box(0.3), n).unwrap())
        });
    }
    group.finish();
}

fn realize(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut group = c.benchmark_group("realize_profile");
    for n in [10u32, 14] {
        let mask = RealizationMask::new((0..1usize << n).map(|_| rng.random_bool(0.2)).collect()).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &mask, |b, mask| b.iter(|| realize_profile(mask)));
    }
    group.finish();
}

fn transform(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut group = c.benchmark_group("polar_transform");
    for n in [10u32, 16] {
        let u: Vec<bool> = (0..1usize << n).map(|_| rng.random()).collect();
        group.bench_with_input(BenchmarkId::from_parameter(n), &u, |b, u| b.iter(|| polar_transform(u).unwrap()));
    }
    group.finish();
}

fn decode(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut group = c.benchmark_group("sc_decode_block");
    group.sample_size(20);
    for n in [10u32, 12, 16] {
        let config = CodeConfig::new(n, 0.26, 0.2, 0.4, 1).unwrap();
        let p = build_partition(&config).unwrap();
        let pre = ChainState::random(p.chain_sink().len(), &mut rng);
        let block = encode_block(&MessageBlock::random(p.info().len(), &mut rng), &p, &pre, &mut rng).unwrap();
        let action = sample_action(p.block_len(), 0.2, 0.4, Strategy::Uniform, &mut rng).unwrap();
        let y = apply_write(&block.codeword, &action.write_set);
        group.bench_with_input(BenchmarkId::from_parameter(n), &y, |b, y| {
            b.iter(|| sc_decode_block(y, &p, &pre).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, profile, realize, transform, decode);
criterion_main!(benches);
