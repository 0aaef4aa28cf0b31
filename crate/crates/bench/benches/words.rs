use std::hint::black_box;

use boundfix_core::{make_alpha, Automorphism, ReducedWord};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

// long positive word: alpha_n applied a few times to a1
fn long_word(f: &Automorphism, rounds: u32) -> ReducedWord {
    let mut w = f.image(0).clone();
    for _ in 0..rounds {
        w = f.apply(&w).unwrap();
    }
    w
}

fn words(c: &mut Criterion) {
    let mut g = c.benchmark_group("words");
    for n in [3, 5, 8] {
        let f = make_alpha(n).unwrap();
        let w = long_word(&f, 2);
        let inv = w.invert();
        g.bench_with_input(BenchmarkId::new("concat_cancel", n), &n, |b, _| {
            b.iter(|| black_box(&w).concat(black_box(&inv)).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("reduce", n), &n, |b, _| {
            let mut raw = w.letters().to_vec();
            raw.extend(inv.letters().iter().take(w.len() / 2));
            b.iter(|| ReducedWord::reduce(f.basis(), black_box(raw.clone())).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("apply", n), &n, |b, _| b.iter(|| f.apply(black_box(&w)).unwrap()));
        g.bench_with_input(BenchmarkId::new("power_4", n), &n, |b, _| b.iter(|| black_box(&f).power(4).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, words);
criterion_main!(benches);
