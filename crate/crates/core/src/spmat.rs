//! Compressed sparse row storage and the splitting `A = D - T` that turns a
//! general square matrix into a sign-carrying continuous-time Markov chain.
//!
//! Row `i` of the chain leaves state `i` at rate `L_ii = sum_{j != i} |a_ij|`
//! and jumps to `j` with probability `|a_ij| / L_ii`. Every jump across a
//! negative entry flips the sign of the path functional. The diagonal shift
//! `d_i = a_ii + L_ii` is what the functional integrates along the path.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square (or rectangular, for I/O) matrix in CSR form.
///
/// Column indices are strictly increasing within each row and no explicit
/// zeros are stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from coordinate entries. Duplicates are summed and
    /// entries that end up exactly zero are dropped.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        entries: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut entries: Vec<(usize, usize, f64)> = entries.into_iter().collect();
        for &(i, j, _) in &entries {
            if i >= nrows {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    dim: nrows,
                });
            }
            if j >= ncols {
                return Err(Error::IndexOutOfRange {
                    index: j,
                    dim: ncols,
                });
            }
        }
        // stable sort keeps duplicate summation order deterministic
        entries.sort_by_key(|&(i, j, _)| (i, j));

        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        let mut rows = Vec::with_capacity(entries.len());
        let mut k = 0;
        while k < entries.len() {
            let (i, j, mut v) = entries[k];
            k += 1;
            while k < entries.len() && entries[k].0 == i && entries[k].1 == j {
                v += entries[k].2;
                k += 1;
            }
            if v != 0.0 {
                rows.push(i);
                col_idx.push(j);
                values.push(v);
            }
        }
        for &i in &rows {
            row_ptr[i + 1] += 1;
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Builds from raw CSR arrays, validating the structural invariants.
    /// Explicit zeros are removed.
    pub fn from_csr(
        nrows: usize,
        ncols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_ptr.len() != nrows + 1 || row_ptr[0] != 0 {
            return Err(Error::Dimension(format!(
                "row_ptr must have {} entries starting at 0",
                nrows + 1
            )));
        }
        if col_idx.len() != values.len() || row_ptr[nrows] != col_idx.len() {
            return Err(Error::Dimension(
                "row_ptr[n], col_idx and values disagree on nnz".into(),
            ));
        }
        for i in 0..nrows {
            let (lo, hi) = (row_ptr[i], row_ptr[i + 1]);
            if hi < lo {
                return Err(Error::Dimension(format!("row_ptr decreases at row {i}")));
            }
            for k in lo..hi {
                if col_idx[k] >= ncols {
                    return Err(Error::IndexOutOfRange {
                        index: col_idx[k],
                        dim: ncols,
                    });
                }
                if k > lo && col_idx[k] <= col_idx[k - 1] {
                    return Err(Error::Dimension(format!(
                        "column indices not strictly increasing in row {i}"
                    )));
                }
            }
        }
        let m = Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        };
        if m.values.iter().any(|&v| v == 0.0) {
            return Self::from_triplets(nrows, ncols, m.triplets());
        }
        Ok(m)
    }

    /// Row-major dense input; zeros are not stored.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::Dimension("ragged dense rows".into()));
        }
        Self::from_triplets(
            nrows,
            ncols,
            rows.iter()
                .enumerate()
                .flat_map(|(i, r)| r.iter().enumerate().map(move |(j, &v)| (i, j, v))),
        )
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_ptr: vec![0; n + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_triplets(n, n, diag.iter().enumerate().map(|(i, &v)| (i, i, v)))
            .expect("diagonal indices are in range")
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// Dimension of a square matrix (the row count).
    #[inline]
    pub fn n(&self) -> usize {
        self.nrows
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map_or(0.0, |k| vals[k])
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            *yi = cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum();
        }
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        let mut colsum = vec![0.0; self.ncols];
        for (&j, &v) in self.col_idx.iter().zip(&self.values) {
            colsum[j] += v.abs();
        }
        colsum.into_iter().fold(0.0, f64::max)
    }

    pub fn transpose(&self) -> Self {
        let mut row_ptr = vec![0usize; self.ncols + 1];
        for &j in &self.col_idx {
            row_ptr[j + 1] += 1;
        }
        for j in 0..self.ncols {
            row_ptr[j + 1] += row_ptr[j];
        }
        let mut next = row_ptr.clone();
        let mut col_idx = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        // rows visited in increasing order, so the transposed rows come out sorted
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let slot = next[j];
                col_idx[slot] = i;
                values[slot] = v;
                next[j] += 1;
            }
        }
        Self {
            nrows: self.ncols,
            ncols: self.nrows,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn to_dense_rows(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, j, v) in self.triplets() {
            out[i][j] = v;
        }
        out
    }

    /// Multiplies row `i` by `scale[i]`.
    pub fn scale_rows(&self, scale: &[f64]) -> Result<Self> {
        if scale.len() != self.nrows {
            return Err(Error::Dimension(format!(
                "row scale has {} entries, matrix has {} rows",
                scale.len(),
                self.nrows
            )));
        }
        let mut out = self.clone();
        for i in 0..self.nrows {
            let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
            for v in &mut out.values[lo..hi] {
                *v *= scale[i];
            }
        }
        Ok(out)
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && self.triplets().all(|(i, j, v)| self.get(j, i) == v)
    }
}

/// Target state of an off-diagonal jump and whether crossing it flips the
/// path sign (`a_ij < 0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Jump {
    pub target: u32,
    pub negative: bool,
}

impl Jump {
    #[inline]
    pub fn sign(self) -> f64 {
        if self.negative {
            -1.0
        } else {
            1.0
        }
    }
}

/// Sampling-ready form of `A = D - T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainDecomposition {
    n: usize,
    d: Vec<f64>,
    rate: Vec<f64>,
    jump_ptr: Vec<usize>,
    jump_cdf: Vec<f64>,
    jumps: Vec<Jump>,
    jump_weight: Vec<f64>,
    d_max: f64,
    d_bar: f64,
}

impl ChainDecomposition {
    pub fn decompose(a: &SparseMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension(format!(
                "matrix must be square, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        let n = a.n();
        if n == 0 {
            return Err(Error::Dimension("empty matrix".into()));
        }
        if let Some((i, j, v)) = a.triplets().find(|t| !t.2.is_finite()) {
            return Err(Error::InvalidValue(format!("entry ({i}, {j}) is {v}")));
        }
        if n > u32::MAX as usize {
            return Err(Error::Dimension(format!("n = {n} exceeds u32 state space")));
        }

        let mut d = Vec::with_capacity(n);
        let mut rate = Vec::with_capacity(n);
        let mut jump_ptr = Vec::with_capacity(n + 1);
        jump_ptr.push(0);
        let mut jump_cdf = Vec::with_capacity(a.nnz());
        let mut jumps = Vec::with_capacity(a.nnz());
        let mut jump_weight = Vec::with_capacity(a.nnz());

        for i in 0..n {
            let (cols, vals) = a.row(i);
            let mut diag = 0.0;
            let mut r = 0.0;
            let start = jumps.len();
            for (&j, &v) in cols.iter().zip(vals) {
                if j == i {
                    diag = v;
                } else {
                    r += v.abs();
                    jumps.push(Jump {
                        target: j as u32,
                        negative: v < 0.0,
                    });
                    jump_weight.push(v.abs());
                }
            }
            let mut acc = 0.0;
            for w in &jump_weight[start..] {
                acc += w / r;
                jump_cdf.push(acc);
            }
            if let Some(last) = jump_cdf.last_mut().filter(|_| jumps.len() > start) {
                *last = 1.0;
            }
            d.push(diag + r);
            rate.push(r);
            jump_ptr.push(jumps.len());
        }

        let d_max = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let d_bar = d.iter().sum::<f64>() / n as f64;
        Ok(Self {
            n,
            d,
            rate,
            jump_ptr,
            jump_cdf,
            jumps,
            jump_weight,
            d_max,
            d_bar,
        })
    }

    /// Inverse of [`decompose`](Self::decompose): `a_ii = d_i - L_ii`,
    /// `a_ij = (-1)^sigma_ij |a_ij|`.
    pub fn reconstruct(&self) -> SparseMatrix {
        let mut entries = Vec::with_capacity(self.jumps.len() + self.n);
        for i in 0..self.n {
            entries.push((i, i, self.d[i] - self.rate[i]));
            let range = self.jump_ptr[i]..self.jump_ptr[i + 1];
            for (jump, &w) in self.jumps[range.clone()].iter().zip(&self.jump_weight[range]) {
                entries.push((i, jump.target as usize, jump.sign() * w));
            }
        }
        SparseMatrix::from_triplets(self.n, self.n, entries).expect("indices come from a valid matrix")
    }

    /// `beta = 1 / d_max`, an upper-bound surrogate for `1 / lambda_max`.
    pub fn spectral_scale(&self) -> Result<f64> {
        if self.d_max > 0.0 && self.d_max.is_finite() {
            Ok(1.0 / self.d_max)
        } else {
            Err(Error::DegenerateScale(self.d_max))
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn d(&self) -> &[f64] {
        &self.d
    }

    #[inline]
    pub fn rate(&self) -> &[f64] {
        &self.rate
    }

    pub fn d_max(&self) -> f64 {
        self.d_max
    }

    pub fn d_bar(&self) -> f64 {
        self.d_bar
    }

    pub fn max_rate(&self) -> f64 {
        self.rate.iter().copied().fold(0.0, f64::max)
    }

    pub fn jump_cdf(&self, i: usize) -> &[f64] {
        &self.jump_cdf[self.jump_ptr[i]..self.jump_ptr[i + 1]]
    }

    pub fn jumps(&self, i: usize) -> &[Jump] {
        &self.jumps[self.jump_ptr[i]..self.jump_ptr[i + 1]]
    }

    /// Jump probabilities `k_ij` of row `i`, aligned with [`jumps`](Self::jumps).
    pub fn jump_probabilities(&self, i: usize) -> impl Iterator<Item = f64> + '_ {
        let r = self.rate[i];
        self.jump_weight[self.jump_ptr[i]..self.jump_ptr[i + 1]]
            .iter()
            .map(move |w| w / r)
    }

    /// Picks the neighbour of `i` whose cumulative-probability bin contains
    /// `u` in `[0, 1)`. Row `i` must have a positive rate.
    #[inline]
    pub fn sample_jump(&self, i: usize, u: f64) -> Jump {
        let lo = self.jump_ptr[i];
        let cdf = &self.jump_cdf[lo..self.jump_ptr[i + 1]];
        // first bin with cdf > u; the clamped last entry makes this total
        let k = cdf.partition_point(|&c| c <= u);
        self.jumps[lo + k.min(cdf.len() - 1)]
    }
}
