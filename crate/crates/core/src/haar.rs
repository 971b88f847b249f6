//! Tensor Haar analysis on the `2^N × 2^N` grid.
//!
//! One-variable basis at resolution `N`: the constant `𝟏` (index 0) and
//! `h_I` for every interval of level `< N` (index `2^l + k`). The product
//! basis index is `ix · 2^N + iy`. Cell `(cx, cy)` is stored at `cx · 2^N + cy`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::dyadic::{DyadicInterval, DyadicRectangle};
use crate::error::{Error, Result};
use crate::open_set::DyadicOpenSet;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Elem1 {
    Const,
    Haar(DyadicInterval),
}

pub fn idx1(e: Elem1) -> usize {
    match e {
        Elem1::Const => 0,
        Elem1::Haar(i) => (1usize << i.level()) + i.pos() as usize,
    }
}

pub fn elem1(i: usize) -> Elem1 {
    if i == 0 {
        Elem1::Const
    } else {
        let l = usize::BITS - 1 - i.leading_zeros();
        Elem1::Haar(DyadicInterval::at(l, (i - (1usize << l)) as u64))
    }
}

/// Index of `h_I` if it is a basis element at resolution `n`.
pub fn haar_idx(n: u32, i: &DyadicInterval) -> Option<usize> {
    if i.level() < n {
        Some(idx1(Elem1::Haar(*i)))
    } else {
        None
    }
}

pub fn dim1(n: u32) -> usize {
    1usize << n
}

pub fn dim2(n: u32) -> usize {
    1usize << (2 * n)
}

/// Haar intervals of the one-variable basis, coarse to fine.
pub fn haar_intervals(n: u32) -> impl Iterator<Item = DyadicInterval> {
    (1..dim1(n)).map(|i| match elem1(i) {
        Elem1::Haar(iv) => iv,
        Elem1::Const => unreachable!(),
    })
}

/// Haar rectangles `I × J` with both levels `< n`.
pub fn haar_rects(n: u32) -> impl Iterator<Item = DyadicRectangle> {
    haar_intervals(n).flat_map(move |x| haar_intervals(n).map(move |y| DyadicRectangle::new(x, y)))
}

/// Sparse one-variable coefficient vector.
pub type Sparse<S> = Vec<(usize, S)>;

/// Value of `h_outer` on a strict sub-interval `inner`.
pub fn haar_on<S: Scalar>(outer: &DyadicInterval, inner: &DyadicInterval) -> S {
    let v = S::sqrt2_pow(outer.level() as i32);
    if outer.side_of(inner) > 0 {
        v
    } else {
        -v
    }
}

/// `|I|^{-1/2}`
pub fn inv_sqrt_len<S: Scalar>(i: &DyadicInterval) -> S {
    S::sqrt2_pow(i.level() as i32)
}

/// Coefficients of `h_I`; empty when `I` is too deep for the basis.
pub fn haar1<S: Scalar>(n: u32, i: &DyadicInterval) -> Sparse<S> {
    match haar_idx(n, i) {
        Some(k) => vec![(k, S::one())],
        None => vec![],
    }
}

/// Coefficients of `1̃_I = 𝟏_I / |I|`: `𝟏 + Σ_{A ⊋ I} h_A(I) h_A`.
pub fn tilde1<S: Scalar>(n: u32, i: &DyadicInterval) -> Sparse<S> {
    debug_assert!(i.level() <= n);
    let mut out = vec![(0usize, S::one())];
    for a in i.ancestors() {
        out.push((idx1(Elem1::Haar(a)), haar_on::<S>(&a, i)));
    }
    out.sort_by_key(|p| p.0);
    out
}

pub fn sparse_to_dense<S: Scalar>(dim: usize, v: &Sparse<S>) -> Vec<S> {
    let mut out = vec![S::zero(); dim];
    for (k, c) in v {
        out[*k].add_to(c);
    }
    out
}

pub fn dense_to_sparse<S: Scalar>(v: &[S]) -> Sparse<S> {
    v.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(k, c)| (k, c.clone())).collect()
}

pub fn sparse_add<S: Scalar>(a: &Sparse<S>, b: &Sparse<S>, scale_b: &S) -> Sparse<S> {
    let mut m: std::collections::BTreeMap<usize, S> = a.iter().cloned().collect();
    for (k, c) in b {
        m.entry(*k).or_insert_with(S::zero).fma(c, scale_b);
    }
    m.into_iter().filter(|(_, c)| !c.is_zero()).collect()
}

pub fn sparse_scale<S: Scalar>(a: &Sparse<S>, s: &S) -> Sparse<S> {
    a.iter().map(|(k, c)| (*k, c.times(s))).filter(|(_, c)| !c.is_zero()).collect()
}

pub fn sparse_dot<S: Scalar>(a: &Sparse<S>, dense: &[S]) -> S {
    let mut acc = S::zero();
    for (k, c) in a {
        acc.fma(c, &dense[*k]);
    }
    acc
}

/// One-variable analysis of cell values (length `2^n`).
pub fn analyze_1d<S: Scalar>(vals: &[S], n: u32) -> Vec<S> {
    let side = dim1(n);
    assert_eq!(vals.len(), side);
    // block sums per level, finest first
    let mut levels: Vec<Vec<S>> = vec![vals.to_vec()];
    for _ in 0..n {
        let prev = levels.last().unwrap();
        let next: Vec<S> = prev.chunks(2).map(|c| c[0].plus(&c[1])).collect();
        levels.push(next);
    }
    // levels[n - l] holds block sums at level l
    let mut out = vec![S::zero(); side];
    out[0] = levels[n as usize][0].times(&S::sqrt2_pow(-2 * n as i32));
    for l in 0..n {
        let kids = &levels[(n - l - 1) as usize];
        let scale = S::sqrt2_pow(l as i32 - 2 * n as i32);
        for k in 0..(1usize << l) {
            let d = kids[2 * k + 1].minus(&kids[2 * k]);
            out[(1 << l) + k] = d.times(&scale);
        }
    }
    out
}

/// One-variable synthesis of basis coefficients into cell values.
pub fn synthesize_1d<S: Scalar>(coeffs: &[S], n: u32) -> Vec<S> {
    let side = dim1(n);
    assert_eq!(coeffs.len(), side);
    let mut out = vec![coeffs[0].clone(); side];
    for l in 0..n {
        let amp = S::sqrt2_pow(l as i32);
        for k in 0..(1usize << l) {
            let c = &coeffs[(1 << l) + k];
            if c.is_zero() {
                continue;
            }
            let v = c.times(&amp);
            let width = side >> l;
            let lo = k * width;
            for cell in lo..lo + width / 2 {
                out[cell] = out[cell].minus(&v);
            }
            for cell in lo + width / 2..lo + width {
                out[cell].add_to(&v);
            }
        }
    }
    out
}

/// Function on the one-variable grid of `2^n` cells.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction1D<S> {
    pub n: u32,
    pub values: Vec<S>,
}

impl<S: Scalar> GridFunction1D<S> {
    pub fn new(n: u32, values: Vec<S>) -> Result<Self> {
        if values.len() != dim1(n) {
            return Err(Error::InvalidParameter(format!("expected {} cells", dim1(n))));
        }
        Ok(GridFunction1D { n, values })
    }
    pub fn from_coeffs(n: u32, coeffs: &[S]) -> Self {
        GridFunction1D { n, values: synthesize_1d(coeffs, n) }
    }
    pub fn analyze(&self) -> Vec<S> {
        analyze_1d(&self.values, self.n)
    }
    pub fn indicator(n: u32, i: &DyadicInterval) -> Self {
        let mut values = vec![S::zero(); dim1(n)];
        for c in i.cell_range(n) {
            values[c] = S::one();
        }
        GridFunction1D { n, values }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BasisKind {
    /// `h_I ⊗ h_J`
    H,
    /// `1̃_I ⊗ 1̃_J`
    Tilde,
    /// `h_I ⊗ 1̃_J`
    HTilde,
    /// `1̃_I ⊗ h_J`
    TildeH,
}

/// Function on the `2^N × 2^N` grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction2D<S> {
    pub n: u32,
    pub values: Vec<S>,
}

impl<S: Scalar> GridFunction2D<S> {
    pub fn new(n: u32, values: Vec<S>) -> Result<Self> {
        if values.len() != dim2(n) {
            return Err(Error::InvalidParameter(format!("expected {} cells", dim2(n))));
        }
        Ok(GridFunction2D { n, values })
    }

    pub fn constant(n: u32, c: S) -> Self {
        GridFunction2D { n, values: vec![c; dim2(n)] }
    }

    pub fn indicator(u: &DyadicOpenSet) -> Self {
        let values = u.cells().iter().map(|&c| if c { S::one() } else { S::zero() }).collect();
        GridFunction2D { n: u.depth(), values }
    }

    pub fn from_fn(n: u32, f: impl Fn(usize, usize) -> S) -> Self {
        let side = dim1(n);
        let mut values = Vec::with_capacity(side * side);
        for cx in 0..side {
            for cy in 0..side {
                values.push(f(cx, cy));
            }
        }
        GridFunction2D { n, values }
    }

    /// Tensor product of two one-variable functions.
    pub fn tensor(x: &GridFunction1D<S>, y: &GridFunction1D<S>) -> Result<Self> {
        if x.n != y.n {
            return Err(Error::ResolutionMismatch(x.n, y.n));
        }
        Ok(Self::from_fn(x.n, |cx, cy| x.values[cx].times(&y.values[cy])))
    }

    pub fn basis_function(kind: BasisKind, r: &DyadicRectangle, n: u32) -> Result<Self> {
        let need_hx = matches!(kind, BasisKind::H | BasisKind::HTilde);
        let need_hy = matches!(kind, BasisKind::H | BasisKind::TildeH);
        for (iv, need_h) in [(&r.x, need_hx), (&r.y, need_hy)] {
            let max = if need_h { n.saturating_sub(1) } else { n };
            if iv.level() > max || (need_h && n == 0) {
                return Err(Error::LevelOverflow { level: iv.level(), depth: max });
            }
        }
        let one_var = |iv: &DyadicInterval, h: bool| -> GridFunction1D<S> {
            let mut values = vec![S::zero(); dim1(n)];
            let range = iv.cell_range(n);
            if h {
                let amp = S::sqrt2_pow(iv.level() as i32);
                let mid = range.start + range.len() / 2;
                for c in range.clone() {
                    values[c] = if c >= mid { amp.clone() } else { -amp.clone() };
                }
            } else {
                let amp = S::sqrt2_pow(2 * iv.level() as i32);
                for c in range {
                    values[c] = amp.clone();
                }
            }
            GridFunction1D { n, values }
        };
        Self::tensor(&one_var(&r.x, need_hx), &one_var(&r.y, need_hy))
    }

    fn same(&self, o: &Self) -> Result<()> {
        if self.n != o.n {
            Err(Error::ResolutionMismatch(self.n, o.n))
        } else {
            Ok(())
        }
    }

    pub fn inner_product(&self, o: &Self) -> Result<S> {
        self.same(o)?;
        let mut acc = S::zero();
        for (a, b) in self.values.iter().zip(&o.values) {
            acc.fma(a, b);
        }
        Ok(acc.times(&S::sqrt2_pow(-4 * self.n as i32)))
    }

    /// `∫|f|^p` for `p ∈ {2, 4}`, exact on the rational backend.
    pub fn lp_norm_pow(&self, p: u32) -> Result<S> {
        if p != 2 && p != 4 {
            return Err(Error::InvalidParameter(format!("p must be 2 or 4, got {p}")));
        }
        let mut acc = S::zero();
        for v in &self.values {
            let s = v.square();
            if p == 2 {
                acc.add_to(&s);
            } else {
                acc.fma(&s, &s);
            }
        }
        Ok(acc.times(&S::sqrt2_pow(-4 * self.n as i32)))
    }

    pub fn lp_norm(&self, p: u32) -> Result<f64> {
        Ok(self.lp_norm_pow(p)?.to_f64().powf(1.0 / p as f64))
    }

    pub fn pointwise_product(&self, o: &Self) -> Result<Self> {
        self.same(o)?;
        Ok(GridFunction2D { n: self.n, values: self.values.iter().zip(&o.values).map(|(a, b)| a.times(b)).collect() })
    }

    /// `(f, 1̃_R)`
    pub fn average_over(&self, r: &DyadicRectangle) -> Result<S> {
        r.check_depth(self.n)?;
        let side = dim1(self.n);
        let mut acc = S::zero();
        for cx in r.x.cell_range(self.n) {
            for cy in r.y.cell_range(self.n) {
                acc.add_to(&self.values[cx * side + cy]);
            }
        }
        let cells = (r.x.cell_range(self.n).len() * r.y.cell_range(self.n).len()) as i64;
        Ok(acc.times(&S::from_ratio(1, cells)))
    }

    pub fn analyze(&self) -> HaarSymbol<S> {
        let n = self.n;
        let side = dim1(n);
        let mut tmp = vec![S::zero(); side * side];
        for cx in 0..side {
            let row = analyze_1d(&self.values[cx * side..(cx + 1) * side], n);
            for (iy, v) in row.into_iter().enumerate() {
                tmp[cx * side + iy] = v;
            }
        }
        let mut coeffs = vec![S::zero(); side * side];
        let mut col = vec![S::zero(); side];
        for iy in 0..side {
            for cx in 0..side {
                col[cx] = tmp[cx * side + iy].clone();
            }
            for (ix, v) in analyze_1d(&col, n).into_iter().enumerate() {
                coeffs[ix * side + iy] = v;
            }
        }
        HaarSymbol { n, coeffs }
    }

    pub fn map(&self, f: impl Fn(&S) -> S) -> Self {
        GridFunction2D { n: self.n, values: self.values.iter().map(f).collect() }
    }
}

/// Expansion in the full product basis. Used both for symbols `b` and as the
/// coefficient-space representation of test functions and operator outputs.
#[derive(Clone, Debug, PartialEq)]
pub struct HaarSymbol<S> {
    pub n: u32,
    pub coeffs: Vec<S>,
}

#[derive(Serialize, Deserialize)]
struct CoeffJson {
    rect: String,
    num: String,
    den: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    sqrt2_num: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    sqrt2_den: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct SymbolJson {
    #[serde(rename = "N")]
    n: u32,
    coeffs: Vec<CoeffJson>,
}

fn elem_text(e: Elem1) -> String {
    match e {
        Elem1::Const => "c".to_string(),
        Elem1::Haar(i) => i.to_string(),
    }
}

fn parse_elem(s: &str) -> Result<Elem1> {
    if s.trim() == "c" {
        Ok(Elem1::Const)
    } else {
        Ok(Elem1::Haar(s.parse()?))
    }
}

impl<S: Scalar> HaarSymbol<S> {
    pub fn zeros(n: u32) -> Self {
        HaarSymbol { n, coeffs: vec![S::zero(); dim2(n)] }
    }

    pub fn from_coeffs(n: u32, coeffs: Vec<S>) -> Result<Self> {
        if coeffs.len() != dim2(n) {
            return Err(Error::InvalidParameter(format!("expected {} coefficients", dim2(n))));
        }
        Ok(HaarSymbol { n, coeffs })
    }

    pub fn side(&self) -> usize {
        dim1(self.n)
    }

    pub fn get(&self, ix: usize, iy: usize) -> &S {
        &self.coeffs[ix * self.side() + iy]
    }

    pub fn get_mut(&mut self, ix: usize, iy: usize) -> &mut S {
        let side = self.side();
        &mut self.coeffs[ix * side + iy]
    }

    pub fn get_elems(&self, x: Elem1, y: Elem1) -> &S {
        self.get(idx1(x), idx1(y))
    }

    /// `(b, h_I ⊗ h_J)`, zero when either interval is too deep for the basis.
    pub fn coef(&self, i: &DyadicInterval, j: &DyadicInterval) -> S {
        match (haar_idx(self.n, i), haar_idx(self.n, j)) {
            (Some(a), Some(b)) => self.get(a, b).clone(),
            _ => S::zero(),
        }
    }

    pub fn coef_rect(&self, r: &DyadicRectangle) -> S {
        self.coef(&r.x, &r.y)
    }

    pub fn set_rect(&mut self, r: &DyadicRectangle, v: S) -> Result<()> {
        match (haar_idx(self.n, &r.x), haar_idx(self.n, &r.y)) {
            (Some(a), Some(b)) => {
                *self.get_mut(a, b) = v;
                Ok(())
            }
            _ => Err(Error::LevelOverflow { level: r.x.level().max(r.y.level()), depth: self.n.saturating_sub(1) }),
        }
    }

    pub fn set_elems(&mut self, x: Elem1, y: Elem1, v: S) {
        *self.get_mut(idx1(x), idx1(y)) = v;
    }

    pub fn single(n: u32, r: &DyadicRectangle, v: S) -> Result<Self> {
        let mut b = Self::zeros(n);
        b.set_rect(r, v)?;
        Ok(b)
    }

    /// `σ_H(b)`: pure Haar rectangles with nonzero coefficient.
    pub fn haar_support(&self) -> Vec<DyadicRectangle> {
        haar_rects(self.n).filter(|r| !self.coef_rect(r).is_zero()).collect()
    }

    pub fn nonzero(&self) -> impl Iterator<Item = (usize, usize, &S)> {
        let side = self.side();
        self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(move |(k, c)| (k / side, k % side, c))
    }

    /// `x ⊗ y` from one-variable coefficient vectors.
    pub fn tensor_sparse(n: u32, x: &Sparse<S>, y: &Sparse<S>) -> Self {
        let mut out = Self::zeros(n);
        for (a, ca) in x {
            for (b, cb) in y {
                out.get_mut(*a, *b).fma(ca, cb);
            }
        }
        out
    }

    pub fn add_assign(&mut self, o: &Self) {
        for (a, b) in self.coeffs.iter_mut().zip(&o.coeffs) {
            a.add_to(b);
        }
    }

    pub fn axpy(&mut self, s: &S, o: &Self) {
        for (a, b) in self.coeffs.iter_mut().zip(&o.coeffs) {
            a.fma(s, b);
        }
    }

    /// Adds `s · (x ⊗ y)`.
    pub fn add_tensor(&mut self, s: &S, x: &Sparse<S>, y: &Sparse<S>) {
        if s.is_zero() {
            return;
        }
        for (a, ca) in x {
            let sa = s.times(ca);
            for (b, cb) in y {
                self.get_mut(*a, *b).fma(&sa, cb);
            }
        }
    }

    pub fn plus(&self, o: &Self) -> Self {
        let mut r = self.clone();
        r.add_assign(o);
        r
    }

    pub fn minus(&self, o: &Self) -> Self {
        HaarSymbol { n: self.n, coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.minus(b)).collect() }
    }

    pub fn scaled(&self, s: &S) -> Self {
        HaarSymbol { n: self.n, coeffs: self.coeffs.iter().map(|a| a.times(s)).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn near_zero(&self, tol: f64) -> bool {
        self.coeffs.iter().all(|c| c.near_zero(tol))
    }

    /// L² inner product (the basis is orthonormal).
    pub fn dot(&self, o: &Self) -> S {
        let mut acc = S::zero();
        for (a, b) in self.coeffs.iter().zip(&o.coeffs) {
            if !a.is_zero() && !b.is_zero() {
                acc.fma(a, b);
            }
        }
        acc
    }

    pub fn norm_sq(&self) -> S {
        self.dot(self)
    }

    /// Keep only coefficients selected by `keep(ix, iy)`.
    pub fn filtered(&self, keep: impl Fn(Elem1, Elem1) -> bool) -> Self {
        let side = self.side();
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| if keep(elem1(k / side), elem1(k % side)) { c.clone() } else { S::zero() })
            .collect();
        HaarSymbol { n: self.n, coeffs }
    }

    pub fn synthesize(&self) -> GridFunction2D<S> {
        let n = self.n;
        let side = dim1(n);
        // columns: fixed iy, transform over ix
        let mut tmp = vec![S::zero(); side * side];
        let mut col = vec![S::zero(); side];
        for iy in 0..side {
            for ix in 0..side {
                col[ix] = self.coeffs[ix * side + iy].clone();
            }
            for (cx, v) in synthesize_1d(&col, n).into_iter().enumerate() {
                tmp[cx * side + iy] = v;
            }
        }
        let mut values = vec![S::zero(); side * side];
        for cx in 0..side {
            let row = synthesize_1d(&tmp[cx * side..(cx + 1) * side], n);
            for (cy, v) in row.into_iter().enumerate() {
                values[cx * side + cy] = v;
            }
        }
        GridFunction2D { n, values }
    }

    pub fn convert<T: Scalar>(&self) -> HaarSymbol<T> {
        HaarSymbol {
            n: self.n,
            coeffs: self.coeffs.iter().map(|c| {
                let (a, b) = c.parts();
                T::from_parts(&a, &b)
            }).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let side = self.side();
        let mut coeffs = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let (a, b) = c.parts();
            let rect = format!("{}|{}", elem_text(elem1(k / side)), elem_text(elem1(k % side)));
            let (sn, sd) = if b.is_zero() { (None, None) } else { (Some(b.numer().to_string()), Some(b.denom().to_string())) };
            coeffs.push(CoeffJson { rect, num: a.numer().to_string(), den: a.denom().to_string(), sqrt2_num: sn, sqrt2_den: sd });
        }
        serde_json::to_string(&SymbolJson { n: self.n, coeffs }).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: SymbolJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        let mut out = Self::zeros(j.n);
        let big = |t: &str| -> Result<BigInt> { t.trim().parse().map_err(|_| Error::Parse(format!("integer '{t}'"))) };
        let rat = |n: &str, d: &str| -> Result<BigRational> {
            let d = big(d)?;
            if d.is_zero() {
                return Err(Error::Parse("zero denominator".into()));
            }
            Ok(BigRational::new(big(n)?, d))
        };
        for c in j.coeffs {
            let (ex, ey) = c.rect.split_once('|').ok_or_else(|| Error::Parse(format!("rect '{}'", c.rect)))?;
            let (ex, ey) = (parse_elem(ex)?, parse_elem(ey)?);
            for e in [ex, ey] {
                if let Elem1::Haar(i) = e {
                    if i.level() >= j.n {
                        return Err(Error::LevelOverflow { level: i.level(), depth: j.n - 1 });
                    }
                }
            }
            let a = rat(&c.num, &c.den)?;
            let b = match (&c.sqrt2_num, &c.sqrt2_den) {
                (Some(n), Some(d)) => rat(n, d)?,
                (None, None) => BigRational::zero(),
                _ => return Err(Error::Parse("sqrt2_num and sqrt2_den must appear together".into())),
            };
            out.set_elems(ex, ey, S::from_parts(&a, &b));
        }
        Ok(out)
    }
}

/// `1 / 2^k` as a rational.
pub fn pow2_inv(k: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << k as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::QSqrt2;
    use proptest::prelude::*;

    type Q = QSqrt2;

    fn rect(s: &str) -> DyadicRectangle {
        s.parse().unwrap()
    }

    /// Direct inner products against every basis function (quadratic oracle).
    fn brute_analyze(f: &GridFunction2D<Q>) -> HaarSymbol<Q> {
        let n = f.n;
        let side = dim1(n);
        let basis_1d = |i: usize| -> GridFunction1D<Q> {
            let mut c = vec![Q::zero(); side];
            c[i] = Q::one();
            // evaluate the basis function cell by cell from its definition
            let vals = match elem1(i) {
                Elem1::Const => vec![Q::one(); side],
                Elem1::Haar(iv) => (0..side)
                    .map(|cell| {
                        let r = iv.cell_range(n);
                        if !r.contains(&cell) {
                            Q::zero()
                        } else if cell >= r.start + r.len() / 2 {
                            Q::sqrt2_pow(iv.level() as i32)
                        } else {
                            -Q::sqrt2_pow(iv.level() as i32)
                        }
                    })
                    .collect(),
            };
            GridFunction1D { n, values: vals }
        };
        let mut out = HaarSymbol::zeros(n);
        for ix in 0..side {
            for iy in 0..side {
                let g = GridFunction2D::tensor(&basis_1d(ix), &basis_1d(iy)).unwrap();
                *out.get_mut(ix, iy) = f.inner_product(&g).unwrap();
            }
        }
        out
    }

    fn random_grid(n: u32, seed: u64) -> GridFunction2D<Q> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let values = (0..dim2(n)).map(|_| Q::from_ratio(rng.random_range(-20..=20), rng.random_range(1..=7))).collect();
        GridFunction2D::new(n, values).unwrap()
    }

    #[test]
    fn basis_function_values() {
        let h = GridFunction2D::<Q>::basis_function(BasisKind::H, &DyadicRectangle::root(), 1).unwrap();
        // +1 on the top-right and bottom-left quadrants, -1 on the mixed ones
        assert_eq!(h.values, vec![Q::one(), -Q::one(), -Q::one(), Q::one()]);
        assert_eq!(h.lp_norm_pow(2).unwrap(), Q::one());
        let t = GridFunction2D::<Q>::basis_function(BasisKind::Tilde, &rect("1:0|1:0"), 1).unwrap();
        assert_eq!(t.values, vec![Q::from_i64(4), Q::zero(), Q::zero(), Q::zero()]);
        assert!(GridFunction2D::<Q>::basis_function(BasisKind::H, &rect("2:0|0:0"), 2).is_err());
        for r in haar_rects(3) {
            let g = GridFunction2D::<Q>::basis_function(BasisKind::H, &r, 3).unwrap();
            assert_eq!(g.lp_norm_pow(2).unwrap(), Q::one(), "{r}");
        }
    }

    #[test]
    fn analyze_basis_and_constant() {
        let r = rect("1:1|2:2");
        let g = GridFunction2D::<Q>::basis_function(BasisKind::H, &r, 3).unwrap();
        let a = g.analyze();
        assert_eq!(a.haar_support(), vec![r]);
        assert_eq!(a.coef_rect(&r), Q::one());
        assert_eq!(a.nonzero().count(), 1);
        let one = GridFunction2D::<Q>::constant(3, Q::one()).analyze();
        assert_eq!(one.nonzero().map(|(x, y, c)| (x, y, c.clone())).collect::<Vec<_>>(), vec![(0, 0, Q::one())]);
    }

    #[test]
    fn analyze_matches_brute_inner_products() {
        let f = random_grid(3, 7);
        assert_eq!(f.analyze(), brute_analyze(&f));
    }

    #[test]
    fn inner_product_examples() {
        let n = 3;
        let rs: Vec<_> = haar_rects(n).take(12).collect();
        for a in &rs {
            for b in &rs {
                let ga = GridFunction2D::<Q>::basis_function(BasisKind::H, a, n).unwrap();
                let gb = GridFunction2D::<Q>::basis_function(BasisKind::H, b, n).unwrap();
                let want = if a == b { Q::one() } else { Q::zero() };
                assert_eq!(ga.inner_product(&gb).unwrap(), want);
            }
            let ga = GridFunction2D::<Q>::basis_function(BasisKind::H, a, n).unwrap();
            let gt = GridFunction2D::<Q>::basis_function(BasisKind::Tilde, a, n).unwrap();
            assert!(ga.inner_product(&gt).unwrap().is_zero());
        }
        let one = GridFunction2D::<Q>::constant(2, Q::one());
        assert_eq!(one.inner_product(&one).unwrap(), Q::one());
        assert!(one.inner_product(&GridFunction2D::constant(3, Q::one())).is_err());
    }

    #[test]
    fn pointwise_product_example() {
        // h_{[0,1)}(x) h_{[0,1/2)}(x) = -h_{[0,1/2)}(x), constant in y
        let n = 2;
        let a = GridFunction2D::<Q>::basis_function(BasisKind::HTilde, &rect("0:0|0:0"), n).unwrap();
        let b = GridFunction2D::<Q>::basis_function(BasisKind::HTilde, &rect("1:0|0:0"), n).unwrap();
        let p = a.pointwise_product(&b).unwrap();
        assert_eq!(p, b.map(|v| -v.clone()));
        let one = GridFunction2D::constant(n, Q::one());
        assert_eq!(one.pointwise_product(&b).unwrap(), b);
        assert!(GridFunction2D::constant(n, Q::zero()).pointwise_product(&b).unwrap().values.iter().all(|v| v.is_zero()));
    }

    #[test]
    fn average_examples() {
        let n = 2;
        let r = rect("1:1|1:0");
        let h = GridFunction2D::<Q>::basis_function(BasisKind::H, &r, n).unwrap();
        assert!(h.average_over(&r).unwrap().is_zero());
        let u = DyadicOpenSet::from_rects(n, &[rect("2:0|2:0"), rect("2:1|2:1"), rect("1:1|0:0")]).unwrap();
        let ind = GridFunction2D::<Q>::indicator(&u);
        let big = rect("1:0|0:0");
        assert_eq!(ind.average_over(&big).unwrap(), Q::from_ratio(2, 8));
        // ⟨h_Î ⊗ 𝟏⟩ over I × J equals s(I,Î)|Î|^{-1/2}
        for i in DyadicInterval::all(2).filter(|i| i.level() >= 1) {
            let p = i.parent().unwrap();
            let g = GridFunction2D::<Q>::basis_function(BasisKind::HTilde, &DyadicRectangle::new(p, DyadicInterval::ROOT), n).unwrap();
            for j in DyadicInterval::all(2) {
                let want = Q::from_i64(i.hat_sign().unwrap() as i64).times(&inv_sqrt_len(&p));
                assert_eq!(g.average_over(&DyadicRectangle::new(i, j)).unwrap(), want);
            }
        }
    }

    #[test]
    fn json_roundtrip_with_mixed_entries() {
        let mut b = HaarSymbol::<Q>::zeros(2);
        b.set_rect(&rect("1:1|0:0"), Q::from_ratio(-3, 64)).unwrap();
        b.set_elems(Elem1::Const, Elem1::Haar(DyadicInterval::at(1, 0)), Q::from_ratio(5, 2));
        b.set_elems(Elem1::Const, Elem1::Const, "1/3+2*r2".parse().unwrap());
        let s = b.to_json();
        assert!(s.contains("\"rect\":\"1:1|0:0\""));
        assert_eq!(HaarSymbol::<Q>::from_json(&s).unwrap(), b);
        assert!(HaarSymbol::<Q>::from_json(r#"{"N":1,"coeffs":[{"rect":"1:0|0:0","num":"1","den":"1"}]}"#).is_err());
    }

    #[test]
    fn float_backend_matches_rational() {
        let f = random_grid(3, 11);
        let ff = GridFunction2D::<f64> { n: 3, values: f.values.iter().map(|v| v.to_f64()).collect() };
        let a = f.analyze();
        let b = ff.analyze();
        for (x, y) in a.coeffs.iter().zip(&b.coeffs) {
            assert!((x.to_f64() - y).abs() <= 1e-10 * (1.0 + y.abs()));
        }
        let back = b.synthesize();
        for (x, y) in ff.values.iter().zip(&back.values) {
            assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn roundtrip_and_parseval(seed in any::<u64>(), n in 1u32..=4) {
            let f = random_grid(n, seed);
            let a = f.analyze();
            prop_assert_eq!(a.synthesize(), f.clone());
            prop_assert_eq!(a.norm_sq(), f.lp_norm_pow(2).unwrap());
        }

        #[test]
        fn tilde_coefficients_synthesize_to_indicator(l in 0u32..=3, k in any::<u64>()) {
            let n = 3;
            let i = DyadicInterval::at(l, k % (1 << l));
            let c = sparse_to_dense(dim1(n), &tilde1::<Q>(n, &i));
            let v = synthesize_1d(&c, n);
            for (cell, val) in v.iter().enumerate() {
                let want = if i.cell_range(n).contains(&cell) { Q::sqrt2_pow(2 * l as i32) } else { Q::zero() };
                prop_assert_eq!(val, &want);
            }
        }
    }
}
