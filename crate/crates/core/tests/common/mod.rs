//! Generators and oracles shared by the property and acceptance suites.
#![allow(dead_code)]

use boundfix_core::automorphisms::{make_alpha, Automorphism};
use boundfix_core::traintrack::TransitionMatrix;
use boundfix_core::words::{Basis, Letter, ReducedWord};
use proptest::prelude::*;

pub fn letters(n: usize, max_len: usize) -> impl Strategy<Value = Vec<Letter>> {
    prop::collection::vec((0..n, any::<bool>()).prop_map(|(index, inverted)| Letter { index, inverted }), 0..=max_len)
}

pub fn positive_letters(n: usize, min: usize, max: usize) -> impl Strategy<Value = Vec<Letter>> {
    prop::collection::vec((0..n).prop_map(Letter::pos), min..=max)
}

pub fn word(b: &Basis, ls: Vec<Letter>) -> ReducedWord {
    ReducedWord::reduce(b, ls).unwrap()
}

/// Moves `(i, j, kind)`, applied to the identity table: kind 0 is
/// `a_i -> a_i a_j`, 1 is `a_i -> a_j a_i`, 2 and 3 use `a_j^{-1}`.
pub fn moves(n: usize, max: usize, kinds: u8) -> impl Strategy<Value = Vec<(usize, usize, u8)>> {
    prop::collection::vec((0..n, 1..n, 0..kinds), 1..=max)
}

pub fn from_moves(b: &Basis, mv: &[(usize, usize, u8)]) -> Automorphism {
    let n = b.rank();
    let mut img: Vec<ReducedWord> = (0..n).map(|i| ReducedWord::generator(b, i).unwrap()).collect();
    for &(i, off, kind) in mv {
        let j = (i + off) % n;
        let wj = if kind >= 2 { img[j].invert() } else { img[j].clone() };
        img[i] = if kind % 2 == 0 { img[i].concat(&wj).unwrap() } else { wj.concat(&img[i]).unwrap() };
    }
    Automorphism::new(b, img).unwrap()
}

pub fn basis_and<S: Strategy>(
    ns: std::ops::RangeInclusive<usize>,
    f: impl Fn(usize) -> S,
) -> impl Strategy<Value = (usize, S::Value)> {
    ns.prop_flat_map(move |n| (Just(n), f(n)))
}

// characteristic polynomial oracle

pub fn char_poly(m: &TransitionMatrix) -> Vec<i128> {
    let n = m.size();
    let a: Vec<Vec<i128>> = m.rows().iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut c = vec![0i128; n + 1];
    c[n] = 1;
    let mut mk = vec![vec![0i128; n]; n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = vec![vec![0i128; n]; n];
        for i in 0..n {
            for j in 0..n {
                next[i][j] = (0..n).map(|l| a[i][l] * mk[l][j]).sum::<i128>();
            }
            next[i][i] += c[n - k + 1];
        }
        mk = next;
        let tr: i128 = (0..n).map(|i| (0..n).map(|l| a[i][l] * mk[l][i]).sum::<i128>()).sum();
        c[n - k] = -tr / k as i128;
    }
    c
}

pub fn eval(c: &[i128], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x + k as f64)
}

/// Largest real root in `[lo, hi]`, located by a downward scan then bisection.
pub fn largest_root(c: &[i128], lo: f64, hi: f64) -> f64 {
    let steps = 4096;
    let h = (hi - lo) / steps as f64;
    let mut b = hi;
    let mut a = hi - h;
    while eval(c, a).signum() == eval(c, b).signum() && eval(c, a) != 0.0 {
        b = a;
        a -= h;
        assert!(a >= lo - h, "no root bracketed");
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if eval(c, mid).signum() == eval(c, b).signum() {
            b = mid;
        } else {
            a = mid;
        }
    }
    0.5 * (a + b)
}

/// `alpha_3^2 ∘ g` for positive `g`: the matrix of `alpha_3^2` is strictly
/// positive and that of `g` has no zero column, so the product is primitive.
pub fn primitive_from(mv: &[(usize, usize, u8)]) -> Automorphism {
    let a2 = make_alpha(3).unwrap().power(2).unwrap();
    let g = from_moves(a2.basis(), mv);
    a2.compose(&g).unwrap()
}

