use serde::Serialize;

use crate::automorphisms::Automorphism;
use crate::error::{Error, Result};

/// Entry `(i, j)` counts occurrences of `a_i^{±1}` in the image of `a_j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TransitionMatrix {
    rows: Vec<Vec<u64>>,
}

impl TransitionMatrix {
    pub fn from_rows(rows: Vec<Vec<u64>>) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "transition matrix must be square");
        Self { rows }
    }

    pub fn of(f: &Automorphism) -> Self {
        let n = f.rank();
        let mut rows = vec![vec![0u64; n]; n];
        for j in 0..n {
            for l in f.image(j).letters() {
                rows[l.index][j] += 1;
            }
        }
        Self { rows }
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.rows[i][j]
    }

    pub fn column_sums(&self) -> Vec<u64> {
        (0..self.size()).map(|j| self.rows.iter().map(|r| r[j]).sum()).collect()
    }

    pub fn trace(&self) -> u64 {
        (0..self.size()).map(|i| self.rows[i][i]).sum()
    }

    /// Saturating product; the entries used here stay far from `u64::MAX`.
    pub fn mul(&self, other: &TransitionMatrix) -> TransitionMatrix {
        let n = self.size();
        assert_eq!(n, other.size());
        let mut rows = vec![vec![0u64; n]; n];
        for (i, row) in rows.iter_mut().enumerate() {
            for k in 0..n {
                let a = self.rows[i][k];
                if a == 0 {
                    continue;
                }
                for j in 0..n {
                    row[j] = row[j].saturating_add(a.saturating_mul(other.rows[k][j]));
                }
            }
        }
        TransitionMatrix { rows }
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().flatten().all(|&x| x == 0)
    }

    fn pattern(&self) -> Vec<Vec<bool>> {
        self.rows.iter().map(|r| r.iter().map(|&x| x > 0).collect()).collect()
    }

    pub fn render(&self) -> String {
        self.rows
            .iter()
            .map(|r| r.iter().map(u64::to_string).collect::<Vec<_>>().join(" "))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

fn bool_mul(a: &[Vec<bool>], b: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).any(|k| a[i][k] && b[k][j])).collect())
        .collect()
}

/// `(n-1)^2 + 1`: a primitive `n×n` matrix has a positive power at or below this.
pub fn wielandt_bound(n: usize) -> usize {
    (n.saturating_sub(1)).pow(2) + 1
}

/// Smallest `k` with `M^k > 0`, if any (searched up to the Wielandt bound).
pub fn primitivity_exponent(m: &TransitionMatrix) -> Result<Option<usize>> {
    if m.is_zero() {
        return Err(Error::ZeroMatrix);
    }
    let base = m.pattern();
    let mut acc = base.clone();
    for k in 1..=wielandt_bound(m.size()) {
        if acc.iter().flatten().all(|&x| x) {
            return Ok(Some(k));
        }
        acc = bool_mul(&acc, &base);
    }
    Ok(None)
}

pub fn is_primitive(m: &TransitionMatrix) -> Result<bool> {
    Ok(primitivity_exponent(m)?.is_some())
}

/// `(I + M)^{n-1} > 0`.
pub fn is_irreducible(m: &TransitionMatrix) -> Result<bool> {
    if m.is_zero() {
        return Err(Error::ZeroMatrix);
    }
    let n = m.size();
    let mut base = m.pattern();
    for (i, row) in base.iter_mut().enumerate() {
        row[i] = true;
    }
    let mut acc = base.clone();
    for _ in 2..n {
        acc = bool_mul(&acc, &base);
    }
    Ok(acc.iter().flatten().all(|&x| x))
}

/// Perron–Frobenius eigenvalue and row eigenvector (`v M = λ v`, `Σ v = 1`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PfData {
    pub lambda: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

impl PfData {
    pub fn min_entry(&self) -> f64 {
        self.vector.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_entry(&self) -> f64 {
        self.vector.iter().copied().fold(0.0, f64::max)
    }
}

const MAX_PF_ITERATIONS: usize = 1_000_000;

pub fn pf_data(m: &TransitionMatrix, tol: f64) -> Result<PfData> {
    if !is_primitive(m)? {
        return Err(Error::NotPrimitive);
    }
    let n = m.size();
    let a: Vec<Vec<f64>> = m.rows.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect();
    let step = |v: &[f64]| -> Vec<f64> { (0..n).map(|j| (0..n).map(|i| v[i] * a[i][j]).sum()).collect() };
    let mut v = vec![1.0 / n as f64; n];
    let mut lambda = 0.0;
    let mut iterations = 0;
    loop {
        iterations += 1;
        let w = step(&v);
        let s: f64 = w.iter().sum();
        let next: Vec<f64> = w.iter().map(|x| x / s).collect();
        let delta = (s - lambda).abs();
        lambda = s;
        let moved = next.iter().zip(&v).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        v = next;
        if (delta < tol && moved < tol) || iterations >= MAX_PF_ITERATIONS {
            break;
        }
    }
    let vm = step(&v);
    let residual = vm.iter().zip(&v).map(|(x, y)| (x - lambda * y).abs()).fold(0.0, f64::max);
    Ok(PfData { lambda, vector: v, residual, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automorphisms::make_alpha;
    use crate::words::{Basis, ReducedWord};

    #[test]
    fn alpha3_matrix() {
        let m = TransitionMatrix::of(&make_alpha(3).unwrap());
        assert_eq!(m.rows(), &[vec![1, 1, 1], vec![1, 2, 1], vec![1, 0, 2]]);
        assert_eq!(m.column_sums(), vec![3, 3, 4]);
        assert_eq!(primitivity_exponent(&m).unwrap(), Some(2));
    }

    #[test]
    fn permutation_is_irreducible_not_primitive() {
        let b = Basis::standard(2).unwrap();
        let f = Automorphism::new(
            &b,
            vec![ReducedWord::parse(&b, "a2").unwrap(), ReducedWord::parse(&b, "a1").unwrap()],
        )
        .unwrap();
        let m = TransitionMatrix::of(&f);
        assert!(is_irreducible(&m).unwrap());
        assert!(!is_primitive(&m).unwrap());
        assert_eq!(pf_data(&m, 1e-12).unwrap_err(), Error::NotPrimitive);
    }

    #[test]
    fn zero_matrix_rejected() {
        let m = TransitionMatrix::from_rows(vec![vec![0, 0], vec![0, 0]]);
        assert_eq!(is_primitive(&m).unwrap_err(), Error::ZeroMatrix);
    }

    #[test]
    fn identity_rejected() {
        let f = Automorphism::identity(&Basis::standard(3).unwrap());
        let m = TransitionMatrix::of(&f);
        assert!(!is_primitive(&m).unwrap());
        assert!(pf_data(&m, 1e-12).is_err());
    }

    #[test]
    fn pf_growth() {
        for n in 3..=10 {
            let m = TransitionMatrix::of(&make_alpha(n).unwrap());
            let pf = pf_data(&m, 1e-12).unwrap();
            assert!(pf.lambda > 1.0);
            assert!(pf.residual < 1e-10);
            assert!(pf.vector.iter().all(|&x| x > 0.0));
        }
    }
}
