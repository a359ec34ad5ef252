use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use lowdeg::anf::{anf_from_truth_table, sample_poly};
use lowdeg::bias::bias_exact;
use lowdeg::gf2::{moebius_in_place, sample_uniform_matrix};
use lowdeg::ranklab::eval_rank;
use lowdeg::{stream, BitVector, Source};

fn matrix_rank(c: &mut Criterion) {
    let mut g = c.benchmark_group("rank");
    for n in [64usize, 256, 1024] {
        let m = sample_uniform_matrix(n, n, &mut stream(1));
        g.bench_with_input(BenchmarkId::from_parameter(n), &m, |b, m| {
            b.iter(|| black_box(m.rank()))
        });
    }
    g.finish();
}

fn mobius(c: &mut Criterion) {
    let mut g = c.benchmark_group("mobius");
    g.sample_size(10);
    for n in [12usize, 16, 20] {
        let table = BitVector::random(1 << n, &mut stream(2));
        g.bench_with_input(BenchmarkId::new("kernel", n), &table, |b, t| {
            b.iter(|| {
                let mut words = t.words().to_vec();
                moebius_in_place(&mut words, n);
                black_box(words)
            })
        });
        g.bench_with_input(BenchmarkId::new("to_polynomial", n), &table, |b, t| {
            b.iter(|| anf_from_truth_table(black_box(t)).unwrap())
        });
    }
    g.finish();
}

fn evaluation_rank(c: &mut Criterion) {
    let mut g = c.benchmark_group("eval_rank");
    g.sample_size(20);
    for (n, d, size) in [(12usize, 2usize, 200usize), (16, 3, 1000)] {
        let mut rng = stream(3);
        let set: Vec<BitVector> = (0..size).map(|_| BitVector::random(n, &mut rng)).collect();
        g.bench_with_input(
            BenchmarkId::new(format!("n{n}_d{d}"), size),
            &set,
            |b, s| b.iter(|| eval_rank(black_box(s), d).unwrap()),
        );
    }
    g.finish();
}

fn exact_bias(c: &mut Criterion) {
    let mut g = c.benchmark_group("bias_exact");
    for n in [10usize, 16] {
        let f = sample_poly(n, 3, &mut stream(4)).unwrap();
        let s = Source::uniform(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &(f, s), |b, (f, s)| {
            b.iter(|| bias_exact(black_box(f), s).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, matrix_rank, mobius, evaluation_rank, exact_bias);
criterion_main!(benches);
