//! Compressed sparse row storage for complex matrices.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<C64>,
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CsrMatrix { nrows, ncols, indptr: vec![0; nrows + 1], indices: Vec::new(), data: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            data: vec![C64::new(1.0, 0.0); n],
        }
    }

    /// Builds from (row, col, value) triplets. Duplicates are summed; exact
    /// zeros are kept so that sparsity patterns stay stable.
    pub fn from_triplets(nrows: usize, ncols: usize, mut trip: Vec<(usize, usize, C64)>) -> Self {
        trip.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(trip.len());
        let mut data: Vec<C64> = Vec::with_capacity(trip.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in trip {
            assert!(r < nrows && c < ncols, "triplet ({r},{c}) out of bounds");
            if last == Some((r, c)) {
                *data.last_mut().unwrap() += v;
                continue;
            }
            indices.push(c);
            data.push(v);
            indptr[r + 1] += 1;
            last = Some((r, c));
        }
        for r in 0..nrows {
            indptr[r + 1] += indptr[r];
        }
        CsrMatrix { nrows, ncols, indptr, indices, data }
    }

    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        let mut trip = Vec::new();
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let v = m[(r, c)];
                if v != ZERO {
                    trip.push((r, c, v));
                }
            }
        }
        Self::from_triplets(m.nrows(), m.ncols(), trip)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.iter() {
            m[(r, c)] += v;
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn indptr(&self) -> &[usize] {
        &self.indptr
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn row(&self, r: usize) -> (&[usize], &[C64]) {
        let (a, b) = (self.indptr[r], self.indptr[r + 1]);
        (&self.indices[a..b], &self.data[a..b])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            let (a, b) = (self.indptr[r], self.indptr[r + 1]);
            (a..b).map(move |k| (r, self.indices[k], self.data[k]))
        })
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let (idx, val) = self.row(r);
        match idx.binary_search(&c) {
            Ok(k) => val[k],
            Err(_) => ZERO,
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn adjoint(&self) -> Self {
        let trip = self.iter().map(|(r, c, v)| (c, r, v.conj())).collect();
        Self::from_triplets(self.ncols, self.nrows, trip)
    }

    pub fn add(&self, other: &CsrMatrix) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let trip = self.iter().chain(other.iter()).collect();
        Self::from_triplets(self.nrows, self.ncols, trip)
    }

    /// Sparse product `self * other`.
    pub fn matmul(&self, other: &CsrMatrix) -> Self {
        assert_eq!(self.ncols, other.nrows);
        let mut trip = Vec::new();
        let mut acc = vec![ZERO; other.ncols];
        let mut touched = vec![false; other.ncols];
        let mut cols = Vec::new();
        for r in 0..self.nrows {
            let (ai, av) = self.row(r);
            for (&k, &a) in ai.iter().zip(av) {
                let (bi, bv) = other.row(k);
                for (&c, &b) in bi.iter().zip(bv) {
                    if !touched[c] {
                        touched[c] = true;
                        cols.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            for &c in &cols {
                trip.push((r, c, acc[c]));
                acc[c] = ZERO;
                touched[c] = false;
            }
            cols.clear();
        }
        Self::from_triplets(self.nrows, other.ncols, trip)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &CsrMatrix) -> Self {
        let mut trip = Vec::with_capacity(self.nnz() * other.nnz());
        for (r1, c1, v1) in self.iter() {
            for (r2, c2, v2) in other.iter() {
                trip.push((r1 * other.nrows + r2, c1 * other.ncols + c2, v1 * v2));
            }
        }
        Self::from_triplets(self.nrows * other.nrows, self.ncols * other.ncols, trip)
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for (r, out) in y.iter_mut().enumerate() {
            let (a, b) = (self.indptr[r], self.indptr[r + 1]);
            let mut acc = ZERO;
            for k in a..b {
                acc += self.data[k] * x[self.indices[k]];
            }
            *out = acc;
        }
    }

    /// `Y = A X` for a row-major dense `X` with `ncols_x` columns.
    pub fn mul_dense_rowmajor(&self, x: &[C64], ncols_x: usize, y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.ncols * ncols_x);
        debug_assert_eq!(y.len(), self.nrows * ncols_x);
        for r in 0..self.nrows {
            let out = &mut y[r * ncols_x..(r + 1) * ncols_x];
            out.fill(ZERO);
            let (idx, val) = self.row(r);
            for (&k, &a) in idx.iter().zip(val) {
                let src = &x[k * ncols_x..(k + 1) * ncols_x];
                for (o, &s) in out.iter_mut().zip(src) {
                    *o += a * s;
                }
            }
        }
    }

    /// `Y += X A†` for a row-major dense `X` (`nrows_x` rows, `self.ncols` columns).
    pub fn add_dense_times_adjoint(&self, x: &[C64], nrows_x: usize, y: &mut [C64]) {
        let n = self.ncols;
        let m = self.nrows;
        debug_assert_eq!(x.len(), nrows_x * n);
        debug_assert_eq!(y.len(), nrows_x * m);
        for i in 0..nrows_x {
            let xrow = &x[i * n..(i + 1) * n];
            let yrow = &mut y[i * m..(i + 1) * m];
            for (j, yv) in yrow.iter_mut().enumerate() {
                let (idx, val) = self.row(j);
                let mut acc = ZERO;
                for (&q, &a) in idx.iter().zip(val) {
                    acc += xrow[q] * a.conj();
                }
                *yv += acc;
            }
        }
    }

    pub fn max_abs_diff(&self, other: &CsrMatrix) -> f64 {
        let d = self.add(&other.scale(C64::new(-1.0, 0.0)));
        d.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Gershgorin interval on the real axis for a Hermitian matrix.
    pub fn gershgorin_bounds(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for r in 0..self.nrows {
            let (idx, val) = self.row(r);
            let mut center = 0.0;
            let mut radius = 0.0;
            for (&c, v) in idx.iter().zip(val) {
                if c == r {
                    center = v.re;
                } else {
                    radius += v.norm();
                }
            }
            lo = lo.min(center - radius);
            hi = hi.max(center + radius);
        }
        if self.nrows == 0 {
            (0.0, 0.0)
        } else {
            (lo, hi)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sample() -> CsrMatrix {
        CsrMatrix::from_triplets(
            3,
            3,
            vec![(0, 1, c(1.0, 2.0)), (2, 0, c(-1.0, 0.5)), (1, 1, c(3.0, 0.0)), (0, 1, c(1.0, 0.0))],
        )
    }

    #[test]
    fn duplicates_are_summed() {
        let m = sample();
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.get(0, 1), c(2.0, 2.0));
    }

    #[test]
    fn dense_roundtrip_and_products_agree() {
        let a = sample();
        let b = a.adjoint().add(&CsrMatrix::identity(3));
        let (da, db) = (a.to_dense(), b.to_dense());
        assert_eq!(CsrMatrix::from_dense(&da), a);
        let prod = a.matmul(&b).to_dense();
        assert!(crate::fock::max_abs(&(prod - &da * &db)) < 1e-15);
        let kron = a.kron(&b).to_dense();
        assert!(crate::fock::max_abs(&(kron - da.kronecker(&db))) < 1e-15);
    }

    #[test]
    fn dense_kernels_match_reference() {
        let a = sample();
        let da = a.to_dense();
        let x: Vec<C64> = (0..6).map(|k| c(k as f64, 1.0 - k as f64)).collect();
        // X is 3x2 row-major
        let xm = DMatrix::from_row_slice(3, 2, &x);
        let mut y = vec![ZERO; 6];
        a.mul_dense_rowmajor(&x, 2, &mut y);
        let expect = &da * &xm;
        for r in 0..3 {
            for cc in 0..2 {
                assert!((y[r * 2 + cc] - expect[(r, cc)]).norm() < 1e-14);
            }
        }
        // X (2x3) times A†
        let x2m = DMatrix::from_row_slice(2, 3, &x);
        let mut y2 = vec![ZERO; 6];
        a.add_dense_times_adjoint(&x, 2, &mut y2);
        let expect2 = &x2m * da.adjoint();
        for r in 0..2 {
            for cc in 0..3 {
                assert!((y2[r * 3 + cc] - expect2[(r, cc)]).norm() < 1e-14);
            }
        }
    }
}
