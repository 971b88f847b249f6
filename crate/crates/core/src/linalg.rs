//! Sparse column-major matrices over a [`Scalar`].

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::haar::HaarSymbol;
use crate::scalar::Scalar;

/// Column-major sparse matrix. Every column is sorted by row and holds no
/// explicit zeros, so structural equality is value equality.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix<S> {
    rows: usize,
    cols: Vec<Vec<(usize, S)>>,
}

fn normalize<S: Scalar>(mut v: Vec<(usize, S)>) -> Vec<(usize, S)> {
    v.sort_by_key(|e| e.0);
    let mut out: Vec<(usize, S)> = Vec::with_capacity(v.len());
    for (r, x) in v {
        match out.last_mut() {
            Some(last) if last.0 == r => last.1.add_to(&x),
            _ => out.push((r, x)),
        }
    }
    out.retain(|e| !e.1.is_zero());
    out
}

/// Dense accumulator reused across columns.
struct Acc<S> {
    vals: Vec<S>,
    touched: Vec<usize>,
    mark: Vec<bool>,
}

impl<S: Scalar> Acc<S> {
    fn new(n: usize) -> Self {
        Acc { vals: vec![S::zero(); n], touched: Vec::new(), mark: vec![false; n] }
    }
    fn fma(&mut self, r: usize, a: &S, b: &S) {
        if !self.mark[r] {
            self.mark[r] = true;
            self.touched.push(r);
        }
        self.vals[r].fma(a, b);
    }
    fn drain(&mut self) -> Vec<(usize, S)> {
        self.touched.sort_unstable();
        let mut out = Vec::with_capacity(self.touched.len());
        for &r in &self.touched {
            self.mark[r] = false;
            let v = std::mem::replace(&mut self.vals[r], S::zero());
            if !v.is_zero() {
                out.push((r, v));
            }
        }
        self.touched.clear();
        out
    }
}

impl<S: Scalar> SparseMatrix<S> {
    pub fn zeros(rows: usize, ncols: usize) -> Self {
        SparseMatrix { rows, cols: vec![Vec::new(); ncols] }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix { rows: n, cols: (0..n).map(|i| vec![(i, S::one())]).collect() }
    }

    /// Duplicate entries are summed.
    pub fn from_triplets(rows: usize, ncols: usize, entries: impl IntoIterator<Item = (usize, usize, S)>) -> Self {
        let mut cols: Vec<Vec<(usize, S)>> = vec![Vec::new(); ncols];
        for (r, c, v) in entries {
            assert!(r < rows && c < ncols, "entry ({r},{c}) outside {rows}x{ncols}");
            cols[c].push((r, v));
        }
        SparseMatrix { rows, cols: cols.into_iter().map(normalize).collect() }
    }

    pub fn from_columns(rows: usize, cols: Vec<Vec<(usize, S)>>) -> Self {
        SparseMatrix { rows, cols: cols.into_iter().map(normalize).collect() }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }
    pub fn ncols(&self) -> usize {
        self.cols.len()
    }
    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }
    pub fn column(&self, c: usize) -> &[(usize, S)] {
        &self.cols[c]
    }
    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(Vec::is_empty)
    }
    pub fn near_zero(&self, tol: f64) -> bool {
        self.cols.iter().flatten().all(|e| e.1.near_zero(tol))
    }

    pub fn get(&self, r: usize, c: usize) -> S {
        match self.cols[c].binary_search_by_key(&r, |e| e.0) {
            Ok(k) => self.cols[c][k].1.clone(),
            Err(_) => S::zero(),
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, &S)> {
        self.cols.iter().enumerate().flat_map(|(c, col)| col.iter().map(move |(r, v)| (*r, c, v)))
    }

    fn check_shape(&self, o: &Self) -> Result<()> {
        if self.rows != o.rows || self.ncols() != o.ncols() {
            return Err(Error::InvalidParameter(format!(
                "shape mismatch {}x{} vs {}x{}",
                self.rows,
                self.ncols(),
                o.rows,
                o.ncols()
            )));
        }
        Ok(())
    }

    pub fn apply(&self, x: &[S]) -> Vec<S> {
        assert_eq!(x.len(), self.ncols());
        let mut y = vec![S::zero(); self.rows];
        for (c, col) in self.cols.iter().enumerate() {
            if x[c].is_zero() {
                continue;
            }
            for (r, v) in col {
                y[*r].fma(v, &x[c]);
            }
        }
        y
    }

    pub fn apply_transpose(&self, y: &[S]) -> Vec<S> {
        assert_eq!(y.len(), self.rows);
        self.cols
            .iter()
            .map(|col| {
                let mut acc = S::zero();
                for (r, v) in col {
                    if !y[*r].is_zero() {
                        acc.fma(v, &y[*r]);
                    }
                }
                acc
            })
            .collect()
    }

    pub fn apply_symbol(&self, f: &HaarSymbol<S>) -> HaarSymbol<S> {
        HaarSymbol { n: f.n, coeffs: self.apply(&f.coeffs) }
    }

    /// `self · o`
    pub fn matmul(&self, o: &Self) -> Result<Self> {
        if self.ncols() != o.rows {
            return Err(Error::InvalidParameter(format!("cannot multiply {}x{} by {}x{}", self.rows, self.ncols(), o.rows, o.ncols())));
        }
        let mut acc = Acc::new(self.rows);
        let cols = o
            .cols
            .iter()
            .map(|ocol| {
                for (k, w) in ocol {
                    for (r, v) in &self.cols[*k] {
                        acc.fma(*r, v, w);
                    }
                }
                acc.drain()
            })
            .collect();
        Ok(SparseMatrix { rows: self.rows, cols })
    }

    fn combine(&self, o: &Self, sign: &S) -> Result<Self> {
        self.check_shape(o)?;
        let mut acc = Acc::new(self.rows);
        let one = S::one();
        let cols = self
            .cols
            .iter()
            .zip(&o.cols)
            .map(|(a, b)| {
                for (r, v) in a {
                    acc.fma(*r, v, &one);
                }
                for (r, v) in b {
                    acc.fma(*r, v, sign);
                }
                acc.drain()
            })
            .collect();
        Ok(SparseMatrix { rows: self.rows, cols })
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.combine(o, &S::one())
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.combine(o, &-S::one())
    }

    pub fn scale(&self, s: &S) -> Self {
        if s.is_zero() {
            return Self::zeros(self.rows, self.ncols());
        }
        SparseMatrix {
            rows: self.rows,
            cols: self.cols.iter().map(|c| c.iter().map(|(r, v)| (*r, v.times(s))).collect()).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        let mut cols: Vec<Vec<(usize, S)>> = vec![Vec::new(); self.rows];
        for (c, col) in self.cols.iter().enumerate() {
            for (r, v) in col {
                cols[*r].push((c, v.clone()));
            }
        }
        SparseMatrix { rows: self.ncols(), cols }
    }

    /// Kronecker product; index `(i, j)` maps to `i · dim(o) + j`.
    pub fn kron(&self, o: &Self) -> Self {
        let rows = self.rows * o.rows;
        let mut cols = Vec::with_capacity(self.ncols() * o.ncols());
        for acol in &self.cols {
            for bcol in &o.cols {
                let mut col = Vec::with_capacity(acol.len() * bcol.len());
                for (ra, va) in acol {
                    for (rb, vb) in bcol {
                        col.push((ra * o.rows + rb, va.times(vb)));
                    }
                }
                col.retain(|e: &(usize, S)| !e.1.is_zero());
                cols.push(col);
            }
        }
        SparseMatrix { rows, cols }
    }

    /// Adds `s · out · winᵀ` for sparse vectors.
    pub fn add_outer(&mut self, s: &S, out: &[(usize, S)], win: &[(usize, S)]) {
        if s.is_zero() {
            return;
        }
        for (c, w) in win {
            let sw = s.times(w);
            let col = &mut self.cols[*c];
            for (r, o) in out {
                col.push((*r, sw.times(o)));
            }
        }
    }

    /// Restores the sorted, zero-free invariant after [`Self::add_outer`].
    pub fn compact(&mut self) {
        for col in self.cols.iter_mut() {
            *col = normalize(std::mem::take(col));
        }
    }

    pub fn convert<T: Scalar>(&self) -> SparseMatrix<T> {
        SparseMatrix {
            rows: self.rows,
            cols: self
                .cols
                .iter()
                .map(|c| {
                    c.iter()
                        .map(|(r, v)| {
                            let (a, b) = v.parts();
                            (*r, T::from_parts(&a, &b))
                        })
                        .filter(|e| !e.1.is_zero())
                        .collect()
                })
                .collect(),
        }
    }

    pub fn to_f64(&self) -> SparseMatrix<f64> {
        SparseMatrix {
            rows: self.rows,
            cols: self.cols.iter().map(|c| c.iter().map(|(r, v)| (*r, v.to_f64())).collect()).collect(),
        }
    }

    /// Row-major dense copy.
    pub fn to_dense_f64(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols()]; self.rows];
        for (r, c, v) in self.triplets() {
            d[r][c] = v.to_f64();
        }
        d
    }

    /// Coordinate-list text. Exact backends write `row col num den`, plus
    /// `sqrt2_num sqrt2_den` when some entry has an irrational part; the
    /// float backend writes `row col value`.
    pub fn to_coo(&self, n: u32) -> String {
        let mut s = String::new();
        let side = 1usize << n;
        let _ = writeln!(s, "# {}x{} basis index = ix*{side}+iy; ix 0 is the constant, h(l,k) is 2^l+k", self.rows, self.ncols());
        let irrational = S::EXACT && self.triplets().any(|(_, _, v)| !num_traits::Zero::is_zero(&v.parts().1));
        for (r, c, v) in self.triplets() {
            if S::EXACT {
                let (a, b) = v.parts();
                if irrational {
                    let _ = writeln!(s, "{r} {c} {} {} {} {}", a.numer(), a.denom(), b.numer(), b.denom());
                } else {
                    let _ = writeln!(s, "{r} {c} {} {}", a.numer(), a.denom());
                }
            } else {
                let _ = writeln!(s, "{r} {c} {:e}", v.to_f64());
            }
        }
        s
    }
}

/// Real linear map usable by iterative solvers.
pub trait LinearMap: Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn apply_f64(&self, x: &[f64]) -> Vec<f64>;
    fn apply_t_f64(&self, y: &[f64]) -> Vec<f64>;
}

impl LinearMap for SparseMatrix<f64> {
    fn nrows(&self) -> usize {
        self.rows
    }
    fn ncols(&self) -> usize {
        self.cols.len()
    }
    fn apply_f64(&self, x: &[f64]) -> Vec<f64> {
        self.apply(x)
    }
    fn apply_t_f64(&self, y: &[f64]) -> Vec<f64> {
        self.apply_transpose(y)
    }
}
