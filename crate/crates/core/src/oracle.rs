//! Deterministic reference computations for verification.
//!
//! `e^{beta A} u` is evaluated by a shifted, substepped Taylor series: with
//! `mu = trace(A) / n` and `s = ceil(|beta| ||A - mu I||_1)` substeps, every
//! substep applies a Taylor polynomial of an operator with 1-norm at most
//! one, summed until the terms stop contributing, and rescales by
//! `e^{beta mu / s}`.

use crate::error::{Error, Result};
use crate::spmat::{ChainDecomposition, SparseMatrix};

/// Largest dimension accepted by [`dense_expmv`].
pub const DENSE_LIMIT: usize = 5000;
/// Largest dimension accepted by [`strang_reference`].
pub const STRANG_LIMIT: usize = 2000;

const MAX_TERMS: usize = 100;

/// Row-major dense square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::Dimension(format!("row of length {} in {n}x{n} matrix", r.len())));
        }
        Ok(Self {
            n,
            data: rows.concat(),
        })
    }

    pub fn from_sparse(a: &SparseMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension("matrix must be square".into()));
        }
        let mut m = Self::zeros(a.n());
        for (i, j, v) in a.triplets() {
            m.data[i * a.n() + j] = v;
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = DenseMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                for (o, b) in out.data[i * n..(i + 1) * n].iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        out
    }
}

/// Anything that can be applied to a vector.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    /// `y = A x`.
    fn apply(&self, x: &[f64], y: &mut [f64]);
    fn norm1(&self) -> f64;
    fn trace(&self) -> f64;
}

impl LinearOperator for DenseMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.data[i * self.n..(i + 1) * self.n]
                .iter()
                .zip(x)
                .map(|(a, b)| a * b)
                .sum();
        }
    }

    fn norm1(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }
}

impl LinearOperator for SparseMatrix {
    fn dim(&self) -> usize {
        self.n()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec(x, y);
    }

    fn norm1(&self) -> f64 {
        SparseMatrix::norm1(self)
    }

    fn trace(&self) -> f64 {
        (0..self.n()).map(|i| self.get(i, i)).sum()
    }
}

fn inf_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `e^{beta A} u` without a size limit.
pub fn taylor_expmv<A: LinearOperator + ?Sized>(a: &A, u: &[f64], beta: f64) -> Result<Vec<f64>> {
    let n = a.dim();
    if u.len() != n {
        return Err(Error::Dimension(format!("vector has {} entries, matrix has {n} rows", u.len())));
    }
    if !beta.is_finite() {
        return Err(Error::InvalidValue(format!("beta = {beta}")));
    }
    if n == 0 || beta == 0.0 {
        return Ok(u.to_vec());
    }
    let mu = a.trace() / n as f64;
    // ||A - mu I||_1 <= ||A||_1 + |mu|
    let norm = a.norm1() + mu.abs();
    if !norm.is_finite() {
        return Err(Error::InvalidValue("matrix has non-finite entries".into()));
    }
    let substeps = (beta.abs() * norm).ceil().max(1.0);
    if substeps > 1e9 {
        return Err(Error::TooLarge {
            n: substeps as usize,
            limit: 1_000_000_000,
        });
    }
    let substeps = substeps as usize;
    let h = beta / substeps as f64;
    let growth = (h * mu).exp();

    let mut b = u.to_vec();
    let mut term = vec![0.0; n];
    let mut next = vec![0.0; n];
    for _ in 0..substeps {
        let mut f = b.clone();
        term.copy_from_slice(&b);
        let mut small = 0;
        for k in 1..=MAX_TERMS {
            a.apply(&term, &mut next);
            let c = h / k as f64;
            for j in 0..n {
                term[j] = c * (next[j] - mu * term[j]);
                f[j] += term[j];
            }
            // two consecutive negligible terms
            if inf_norm(&term) <= f64::EPSILON * 0.5 * inf_norm(&f) {
                small += 1;
                if small == 2 {
                    break;
                }
            } else {
                small = 0;
            }
        }
        for (bj, fj) in b.iter_mut().zip(&f) {
            *bj = growth * fj;
        }
    }
    Ok(b)
}

/// `e^{beta A} u` for matrices up to [`DENSE_LIMIT`] rows.
pub fn dense_expmv<A: LinearOperator + ?Sized>(a: &A, u: &[f64], beta: f64) -> Result<Vec<f64>> {
    if a.dim() > DENSE_LIMIT {
        return Err(Error::TooLarge {
            n: a.dim(),
            limit: DENSE_LIMIT,
        });
    }
    taylor_expmv(a, u, beta)
}

/// `-T = A - D`: the generator part of the decomposition, with `-rate` on
/// the diagonal.
pub fn generator(dec: &ChainDecomposition) -> SparseMatrix {
    let a = dec.reconstruct();
    let shift: Vec<(usize, usize, f64)> = dec.d().iter().enumerate().map(|(i, &d)| (i, i, -d)).collect();
    let entries = a.triplets().chain(shift);
    SparseMatrix::from_triplets(dec.n(), dec.n(), entries).expect("same pattern as A")
}

/// `(e^{dt D/2} e^{-dt T} e^{dt D/2})^N u` with `dt = beta / N`.
pub fn strang_reference(dec: &ChainDecomposition, u: &[f64], beta: f64, steps: usize) -> Result<Vec<f64>> {
    let n = dec.n();
    if n > STRANG_LIMIT {
        return Err(Error::TooLarge {
            n,
            limit: STRANG_LIMIT,
        });
    }
    if steps == 0 {
        return Err(Error::Config("step count must be >= 1".into()));
    }
    if u.len() != n {
        return Err(Error::Dimension(format!("vector has {} entries, matrix has {n} rows", u.len())));
    }
    let dt = beta / steps as f64;
    let half: Vec<f64> = dec.d().iter().map(|d| (0.5 * dt * d).exp()).collect();
    let q = generator(dec);
    let mut x = u.to_vec();
    for _ in 0..steps {
        for (xi, h) in x.iter_mut().zip(&half) {
            *xi *= h;
        }
        x = taylor_expmv(&q, &x, dt)?;
        for (xi, h) in x.iter_mut().zip(&half) {
            *xi *= h;
        }
    }
    Ok(x)
}

/// Leading term of the one-step Strang error
/// `e^{h D/2} e^{h B} e^{h D/2} u - e^{h (D + B)} u` with `B = -T`:
/// `h^3 ([B, [B, D]] / 12 - [D, [D, B]] / 24) u`.
pub fn strang_local_error_term(dec: &ChainDecomposition, u: &[f64], h: f64) -> Result<Vec<f64>> {
    let n = dec.n();
    if u.len() != n {
        return Err(Error::Dimension(format!("vector has {} entries, matrix has {n} rows", u.len())));
    }
    let q = generator(dec);
    let d = dec.d();
    let dmul = |x: &[f64]| -> Vec<f64> { x.iter().zip(d).map(|(a, b)| a * b).collect() };
    let bmul = |x: &[f64]| -> Vec<f64> {
        let mut y = vec![0.0; n];
        q.matvec(x, &mut y);
        y
    };
    // [B,[B,D]] = BBD - 2BDB + DBB ; [D,[D,B]] = DDB - 2DBD + BDD
    let bbd = bmul(&bmul(&dmul(u)));
    let bdb = bmul(&dmul(&bmul(u)));
    let dbb = dmul(&bmul(&bmul(u)));
    let ddb = dmul(&dmul(&bmul(u)));
    let dbd = dmul(&bmul(&dmul(u)));
    let bdd = bmul(&dmul(&dmul(u)));
    let h3 = h * h * h;
    Ok((0..n)
        .map(|k| {
            let outer = bbd[k] - 2.0 * bdb[k] + dbb[k];
            let inner = ddb[k] - 2.0 * dbd[k] + bdd[k];
            h3 * (outer / 12.0 - inner / 24.0)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    fn k2() -> SparseMatrix {
        SparseMatrix::from_dense(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
    }

    #[test]
    fn zero_matrix_is_identity() {
        let u = [1.0, -2.0, 3.5];
        assert_eq!(dense_expmv(&SparseMatrix::zeros(3), &u, 7.0).unwrap(), u.to_vec());
    }

    #[test]
    fn k2_hyperbolic() {
        let x = dense_expmv(&k2(), &[1.0, 0.0], 1.0).unwrap();
        assert!((x[0] - 1f64.cosh()).abs() < 1e-14);
        assert!((x[1] - 1f64.sinh()).abs() < 1e-14);
    }

    #[test]
    fn nilpotent_series_terminates() {
        let mut rows = vec![vec![0.0; 4]; 4];
        rows[0][1] = 1.0;
        rows[1][2] = 2.0;
        rows[2][3] = 3.0;
        let n = DenseMatrix::from_rows(&rows).unwrap();
        let x = dense_expmv(&n, &[0.0, 0.0, 0.0, 1.0], 1.0).unwrap();
        // e^N e_4 = e_4 + N e_4 + N^2 e_4 / 2 + N^3 e_4 / 6 = (1, 3, 3, 1)
        let expected = [1.0, 3.0, 3.0, 1.0];
        assert!(max_diff(&x, &expected) < 1e-14, "{x:?}");
    }

    #[test]
    fn diagonal_matches_scalar_exponentials() {
        let a = SparseMatrix::diagonal(&[-40.0, 0.5, 3.0]);
        let x = dense_expmv(&a, &[1.0, 1.0, 1.0], 2.0).unwrap();
        for (xi, d) in x.iter().zip([-40.0f64, 0.5, 3.0]) {
            let e = (2.0 * d).exp();
            assert!((xi - e).abs() <= 1e-13 * e, "{xi} vs {e}");
        }
    }

    #[test]
    fn semigroup() {
        let a = SparseMatrix::from_dense(&[
            vec![-1.0, 0.5, 0.0],
            vec![0.3, 0.2, -0.7],
            vec![0.0, 1.1, -0.4],
        ])
        .unwrap();
        let u = [0.3, -1.0, 2.0];
        let once = dense_expmv(&a, &u, 3.0).unwrap();
        let twice = dense_expmv(&a, &dense_expmv(&a, &u, 1.5).unwrap(), 1.5).unwrap();
        assert!(max_diff(&once, &twice) < 1e-12);
    }

    #[test]
    fn dense_and_sparse_agree() {
        let rows = vec![vec![0.1, -2.0, 0.3], vec![0.0, 1.0, 0.5], vec![4.0, 0.0, -1.0]];
        let s = SparseMatrix::from_dense(&rows).unwrap();
        let d = DenseMatrix::from_sparse(&s).unwrap();
        assert_eq!(d, DenseMatrix::from_rows(&rows).unwrap());
        let u = [1.0, 2.0, 3.0];
        assert_eq!(taylor_expmv(&s, &u, 0.7).unwrap(), taylor_expmv(&d, &u, 0.7).unwrap());
    }

    #[test]
    fn size_limits() {
        let big = SparseMatrix::zeros(DENSE_LIMIT + 1);
        assert!(matches!(
            dense_expmv(&big, &vec![0.0; DENSE_LIMIT + 1], 1.0),
            Err(Error::TooLarge { .. })
        ));
        let dec = ChainDecomposition::decompose(&SparseMatrix::zeros(STRANG_LIMIT + 1)).unwrap();
        assert!(strang_reference(&dec, &vec![0.0; STRANG_LIMIT + 1], 1.0, 2).is_err());
    }

    #[test]
    fn diagonal_strang_is_exact() {
        let dec = ChainDecomposition::decompose(&SparseMatrix::diagonal(&[0.5, -1.0])).unwrap();
        for steps in [1, 2, 8] {
            let x = strang_reference(&dec, &[1.0, 2.0], 2.0, steps).unwrap();
            assert!((x[0] - 1f64.exp()).abs() < 1e-14);
            assert!((x[1] - 2.0 * (-2f64).exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn generator_has_zero_row_sums() {
        let a = SparseMatrix::from_dense(&[vec![1.0, -2.0, 0.5], vec![3.0, 0.0, 0.0], vec![0.0, 0.0, 4.0]]).unwrap();
        let dec = ChainDecomposition::decompose(&a).unwrap();
        let q = generator(&dec);
        assert_eq!(q.get(0, 0), -2.5);
        assert_eq!(q.get(0, 1), -2.0);
        assert_eq!(q.get(2, 2), 0.0);
        // the signed generator's absolute row sums vanish
        for i in 0..3 {
            let (cols, vals) = q.row(i);
            let s: f64 = cols.iter().zip(vals).map(|(&j, v)| if j == i { *v } else { v.abs() }).sum();
            assert!(s.abs() < 1e-15);
        }
    }
}
