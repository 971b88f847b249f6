//! Operator norms by power iteration, Schur-test matrices on the dyadic tree
//! and bi-tree, and the first-order recursion `a_n = b_n + d_n a_{n-1}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{LinearMap, SparseMatrix};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerOptions {
    /// relative change of the estimate between iterations
    pub tol: f64,
    pub max_iters: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for PowerOptions {
    fn default() -> Self {
        PowerOptions { tol: 1e-10, max_iters: 50_000, restarts: 3, seed: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    pub iterations: usize,
    /// `‖AᵀAv − σ²v‖ / σ²` at the returned vector
    pub residual: f64,
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn power_run(a: &dyn LinearMap, mut v: Vec<f64>, opts: &PowerOptions) -> Result<NormEstimate> {
    let nv = norm2(&v);
    if nv == 0.0 {
        return Ok(NormEstimate { value: 0.0, iterations: 0, residual: 0.0 });
    }
    v.iter_mut().for_each(|x| *x /= nv);
    let mut prev = f64::NAN;
    let mut residual = f64::INFINITY;
    for it in 1..=opts.max_iters {
        let w = a.apply_f64(&v);
        let sigma = norm2(&w);
        if sigma == 0.0 {
            return Ok(NormEstimate { value: 0.0, iterations: it, residual: 0.0 });
        }
        let z = a.apply_t_f64(&w);
        let lambda = sigma * sigma;
        residual = z.iter().zip(&v).map(|(zi, vi)| (zi - lambda * vi).powi(2)).sum::<f64>().sqrt() / lambda;
        if (sigma - prev).abs() <= opts.tol * sigma || residual <= opts.tol {
            return Ok(NormEstimate { value: sigma, iterations: it, residual });
        }
        prev = sigma;
        let nz = norm2(&z);
        v = z.into_iter().map(|x| x / nz).collect();
    }
    Err(Error::NonConvergence { iters: opts.max_iters, residual })
}

/// Largest singular value; the maximum over `restarts` seeded random starts.
pub fn operator_norm_with(a: &dyn LinearMap, opts: &PowerOptions) -> Result<NormEstimate> {
    if a.ncols() == 0 || a.nrows() == 0 {
        return Ok(NormEstimate { value: 0.0, iterations: 0, residual: 0.0 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<NormEstimate> = None;
    let mut total = 0;
    for _ in 0..opts.restarts.max(1) {
        let v: Vec<f64> = (0..a.ncols()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let est = power_run(a, v, opts)?;
        total += est.iterations;
        if best.is_none_or(|b| est.value > b.value) {
            best = Some(est);
        }
    }
    let mut best = best.expect("at least one run");
    best.iterations = total;
    Ok(best)
}

pub fn operator_norm(a: &dyn LinearMap, tol: f64, seed: u64) -> Result<NormEstimate> {
    operator_norm_with(a, &PowerOptions { tol, seed, ..PowerOptions::default() })
}

/// Node index on the dyadic tree truncated at `depth`: `2^l − 1 + k`.
pub fn tree_index(level: u32, pos: u64) -> usize {
    (1usize << level) - 1 + pos as usize
}

pub fn tree_size(depth: u32) -> usize {
    (1usize << (depth + 1)) - 1
}

/// `m(I, J) = (|J|/|I|)^c` for `J ⊆ I`, zero otherwise.
pub fn tree_matrix(depth: u32, exponent: f64) -> SparseMatrix<f64> {
    let size = tree_size(depth);
    let mut trip = Vec::new();
    for li in 0..=depth {
        for ki in 0..(1u64 << li) {
            let row = tree_index(li, ki);
            for lj in li..=depth {
                let w = 2f64.powf(-((lj - li) as f64) * exponent);
                let span = 1u64 << (lj - li);
                for kj in ki * span..(ki + 1) * span {
                    trip.push((row, tree_index(lj, kj), w));
                }
            }
        }
    }
    SparseMatrix::from_triplets(size, size, trip)
}

/// `M = L⊗L + Lᵀ⊗Lᵀ − Id` on the bi-tree, where `L` is the tree matrix;
/// applied without forming the Kronecker products.
#[derive(Clone, Debug)]
pub struct BiTreeOperator {
    tree: SparseMatrix<f64>,
    depth: u32,
    decay: f64,
    side: usize,
}

impl BiTreeOperator {
    pub fn new(depth: u32, exponent: f64) -> Self {
        let tree = tree_matrix(depth, exponent);
        BiTreeOperator { side: tree.nrows(), tree, depth, decay: 2f64.powf(-exponent) }
    }

    pub fn entry(&self, r: usize, c: usize) -> f64 {
        let (i, j) = (r / self.side, r % self.side);
        let (k, l) = (c / self.side, c % self.side);
        let down = self.tree.get(i, k) * self.tree.get(j, l);
        let up = self.tree.get(k, i) * self.tree.get(l, j);
        down + up - if r == c { 1.0 } else { 0.0 }
    }

    /// `Lx` by `(Lx)(I) = x_I + 2^{-c}((Lx)(I₋) + (Lx)(I₊))`, read with `stride`.
    fn down(&self, x: &[f64], off: usize, stride: usize, out: &mut [f64]) {
        for l in (0..=self.depth).rev() {
            for k in 0..1u64 << l {
                let i = tree_index(l, k);
                let mut v = x[off + i * stride];
                if l < self.depth {
                    v += self.decay * (out[tree_index(l + 1, 2 * k)] + out[tree_index(l + 1, 2 * k + 1)]);
                }
                out[i] = v;
            }
        }
    }

    /// `Lᵀx` by `(Lᵀx)(J) = x_J + 2^{-c}(Lᵀx)(Ĵ)`.
    fn up(&self, x: &[f64], off: usize, stride: usize, out: &mut [f64]) {
        for l in 0..=self.depth {
            for k in 0..1u64 << l {
                let i = tree_index(l, k);
                let mut v = x[off + i * stride];
                if l > 0 {
                    v += self.decay * out[tree_index(l - 1, k / 2)];
                }
                out[i] = v;
            }
        }
    }

    /// `(A⊗A)x` for `x` laid out as `x[i·side + j]`.
    fn kron_apply(&self, transpose: bool, x: &[f64]) -> Vec<f64> {
        let s = self.side;
        let step = |x: &[f64], off: usize, stride: usize, out: &mut [f64]| {
            if transpose {
                self.up(x, off, stride, out)
            } else {
                self.down(x, off, stride, out)
            }
        };
        let mut inner = vec![0.0; s * s];
        for i in 0..s {
            step(x, i * s, 1, &mut inner[i * s..(i + 1) * s]);
        }
        let mut out = vec![0.0; s * s];
        let mut col = vec![0.0; s];
        for j in 0..s {
            step(&inner, j, s, &mut col);
            for (i, v) in col.iter().enumerate() {
                out[i * s + j] = *v;
            }
        }
        out
    }
}

impl LinearMap for BiTreeOperator {
    fn nrows(&self) -> usize {
        self.side * self.side
    }
    fn ncols(&self) -> usize {
        self.side * self.side
    }
    fn apply_f64(&self, x: &[f64]) -> Vec<f64> {
        let a = self.kron_apply(false, x);
        let b = self.kron_apply(true, x);
        a.iter().zip(&b).zip(x).map(|((p, q), r)| p + q - r).collect()
    }
    fn apply_t_f64(&self, y: &[f64]) -> Vec<f64> {
        // symmetric
        self.apply_f64(y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchurKind {
    Tree,
    BiTree,
}

#[derive(Clone, Debug)]
pub enum SchurOperator {
    Tree(SparseMatrix<f64>),
    BiTree(BiTreeOperator),
}

impl LinearMap for SchurOperator {
    fn nrows(&self) -> usize {
        match self {
            SchurOperator::Tree(m) => m.nrows(),
            SchurOperator::BiTree(m) => LinearMap::nrows(m),
        }
    }
    fn ncols(&self) -> usize {
        match self {
            SchurOperator::Tree(m) => m.ncols(),
            SchurOperator::BiTree(m) => LinearMap::ncols(m),
        }
    }
    fn apply_f64(&self, x: &[f64]) -> Vec<f64> {
        match self {
            SchurOperator::Tree(m) => m.apply(x),
            SchurOperator::BiTree(m) => m.apply_f64(x),
        }
    }
    fn apply_t_f64(&self, y: &[f64]) -> Vec<f64> {
        match self {
            SchurOperator::Tree(m) => m.apply_transpose(y),
            SchurOperator::BiTree(m) => m.apply_t_f64(y),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SchurMatrix {
    pub kind: SchurKind,
    pub depth: u32,
    pub exponent: f64,
    pub operator: SchurOperator,
    /// set when the exponent is at most 1 and row sums grow with depth
    pub warning: Option<String>,
}

pub fn schur_matrix(kind: SchurKind, depth: u32, exponent: f64) -> Result<SchurMatrix> {
    if !exponent.is_finite() || exponent <= 0.0 {
        return Err(Error::InvalidParameter(format!("exponent must be positive and finite, got {exponent}")));
    }
    if depth > 12 {
        return Err(Error::InvalidParameter(format!("tree depth {depth} too large")));
    }
    let warning = (exponent <= 1.0).then(|| format!("exponent {exponent} <= 1: row sums grow without bound in the depth"));
    let operator = match kind {
        SchurKind::Tree => SchurOperator::Tree(tree_matrix(depth, exponent)),
        SchurKind::BiTree => SchurOperator::BiTree(BiTreeOperator::new(depth, exponent)),
    };
    Ok(SchurMatrix { kind, depth, exponent, operator, warning })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Resolved<S> {
    pub a: Vec<S>,
    pub norm_sq_a: S,
    pub norm_sq_b: S,
    /// `‖a‖₂ ≤ ‖b‖₂ / (1 − q)`, checked as `(1 − q)²‖a‖² ≤ ‖b‖²`
    pub bound_holds: bool,
}

/// Solves `b_n = a_n − d_n a_{n−1}` with `a_{−1} = 0`.
pub fn sequence_resolve<S: Scalar>(b: &[S], d: &[S], q: &S) -> Result<Resolved<S>> {
    if *q >= S::one() || *q < S::zero() {
        return Err(Error::InvalidParameter(format!("need 0 <= q < 1, got {q}")));
    }
    if b.len() != d.len() {
        return Err(Error::InvalidParameter(format!("sequence lengths differ: {} vs {}", b.len(), d.len())));
    }
    if let Some((k, dk)) = d.iter().enumerate().find(|(_, dk)| dk.abs() > *q) {
        return Err(Error::InvalidParameter(format!("|d_{k}| = {} exceeds q = {q}", dk.abs())));
    }
    let mut a: Vec<S> = Vec::with_capacity(b.len());
    for (bn, dn) in b.iter().zip(d) {
        let mut an = bn.clone();
        if let Some(prev) = a.last() {
            an.fma(dn, prev);
        }
        a.push(an);
    }
    let sq = |v: &[S]| v.iter().fold(S::zero(), |mut acc, x| {
        acc.fma(x, x);
        acc
    });
    let (norm_sq_a, norm_sq_b) = (sq(&a), sq(b));
    let gap = S::one().minus(q);
    let bound_holds = gap.square().times(&norm_sq_a) <= norm_sq_b;
    Ok(Resolved { a, norm_sq_a, norm_sq_b, bound_holds })
}
