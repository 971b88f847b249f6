//! Shifts, multiplication by a symbol and the repeated commutator
//! `[T₂, [T₁, M_b]]` as explicit matrices on the full product basis.

pub mod forms;
pub mod parts;

use crate::dyadic::{DyadicInterval, Parity};
use crate::haar::{dim1, elem1, haar_idx, haar_intervals, haar_on, idx1, tilde1, Elem1, HaarSymbol};
use crate::linalg::SparseMatrix;
use crate::scalar::Scalar;

pub use parts::{nine_parts, tested_operators, Line, Part, Slot, TestedOutput};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    Y,
}

/// Which generations a shift moves, and in which variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ShiftVariant {
    pub input_parity: Parity,
    pub var: Var,
}

impl ShiftVariant {
    pub const T1: ShiftVariant = ShiftVariant { input_parity: Parity::Even, var: Var::X };
    pub const T2: ShiftVariant = ShiftVariant { input_parity: Parity::Even, var: Var::Y };

    pub fn eo(var: Var) -> Self {
        ShiftVariant { input_parity: Parity::Even, var }
    }
    pub fn oe(var: Var) -> Self {
        ShiftVariant { input_parity: Parity::Odd, var }
    }
}

/// Does `h_I` have a nonzero image under the one-variable shift?
pub fn shift_acts(parity: Parity, n: u32, i: &DyadicInterval) -> bool {
    i.parity() == parity && i.level() + 2 <= n
}

/// `h_I ↦ h_{I₊} − h_{I₋}` on the acting parity.
pub fn shift_1d<S: Scalar>(parity: Parity, n: u32) -> SparseMatrix<S> {
    let d = dim1(n);
    let mut cols = vec![Vec::new(); d];
    for i in haar_intervals(n) {
        if shift_acts(parity, n, &i) {
            cols[idx1(Elem1::Haar(i))] = vec![(idx1(Elem1::Haar(i.minus())), -S::one()), (idx1(Elem1::Haar(i.plus())), S::one())];
        }
    }
    SparseMatrix::from_columns(d, cols)
}

pub fn shift<S: Scalar>(variant: ShiftVariant, n: u32) -> SparseMatrix<S> {
    let s = shift_1d::<S>(variant.input_parity, n);
    let id = SparseMatrix::identity(dim1(n));
    match variant.var {
        Var::X => s.kron(&id),
        Var::Y => id.kron(&s),
    }
}

pub fn adjoint_shift<S: Scalar>(variant: ShiftVariant, n: u32) -> SparseMatrix<S> {
    shift(variant, n).transpose()
}

/// Image of a sparse one-variable vector under the shift or its adjoint.
pub fn shift_sparse<S: Scalar>(parity: Parity, adjoint: bool, n: u32, v: &[(usize, S)]) -> Vec<(usize, S)> {
    let mut out: Vec<(usize, S)> = Vec::new();
    for (k, c) in v {
        let Elem1::Haar(i) = elem1(*k) else { continue };
        if !adjoint {
            if shift_acts(parity, n, &i) {
                out.push((idx1(Elem1::Haar(i.plus())), c.clone()));
                out.push((idx1(Elem1::Haar(i.minus())), -c.clone()));
            }
        } else if let Ok(p) = i.parent() {
            if shift_acts(parity, n, &p) {
                let s = S::from_i64(i.hat_sign().unwrap() as i64);
                out.push((idx1(Elem1::Haar(p)), c.times(&s)));
            }
        }
    }
    crate::haar::sparse_add(&Vec::new(), &out, &S::one())
}

/// The four one-variable pieces of multiplication by a basis element `u`:
/// `D_u f = Σ_K ⟨u⟩_K (f,h_K) h_K`, `π_u f = ⟨f⟩_I h_I`, `Z_u f = (f,h_I) 1̃_I`
/// for `u = h_I`, and the mean `E_𝟏 f = ⟨f⟩ 𝟏`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Piece {
    D,
    Pi,
    Z,
    E,
}

impl Piece {
    pub const ALL: [Piece; 4] = [Piece::D, Piece::Pi, Piece::Z, Piece::E];
}

pub fn piece_1d<S: Scalar>(piece: Piece, n: u32, u: Elem1) -> SparseMatrix<S> {
    let d = dim1(n);
    let mut m = SparseMatrix::zeros(d, d);
    match (piece, u) {
        (Piece::D, Elem1::Const) => {
            for k in 1..d {
                m.add_outer(&S::one(), &[(k, S::one())], &[(k, S::one())]);
            }
        }
        (Piece::D, Elem1::Haar(i)) => {
            for k in i.descendants(n - 1) {
                let e = [(idx1(Elem1::Haar(k)), S::one())];
                m.add_outer(&haar_on::<S>(&i, &k), &e, &e);
            }
        }
        (Piece::Pi, Elem1::Haar(i)) => m.add_outer(&S::one(), &[(idx1(u), S::one())], &tilde1::<S>(n, &i)),
        (Piece::Z, Elem1::Haar(i)) => m.add_outer(&S::one(), &tilde1::<S>(n, &i), &[(idx1(u), S::one())]),
        (Piece::E, Elem1::Const) => m.add_outer(&S::one(), &[(0, S::one())], &[(0, S::one())]),
        _ => {}
    }
    m.compact();
    m
}

/// Multiplication by a single basis element, from the product rule
/// `h_I h_K = h_I(K) h_K` (K ⊊ I), `h_K(I) h_I` (K ⊋ I), `1̃_I` (K = I).
pub fn mult_basis_1d<S: Scalar>(n: u32, u: Elem1) -> SparseMatrix<S> {
    let d = dim1(n);
    let Elem1::Haar(i) = u else { return SparseMatrix::identity(d) };
    let iu = idx1(u);
    let mut cols: Vec<Vec<(usize, S)>> = vec![Vec::new(); d];
    cols[0] = vec![(iu, S::one())];
    for k in haar_intervals(n) {
        let ik = idx1(Elem1::Haar(k));
        cols[ik] = if i.strictly_contains(&k) {
            vec![(ik, haar_on(&i, &k))]
        } else if k.strictly_contains(&i) {
            vec![(iu, haar_on(&k, &i))]
        } else if k == i {
            tilde1(n, &i)
        } else {
            Vec::new()
        };
    }
    SparseMatrix::from_columns(d, cols)
}

/// Multiplication by a one-variable function given by its coefficients.
pub fn mult_1d<S: Scalar>(n: u32, coeffs: &[S]) -> SparseMatrix<S> {
    let d = dim1(n);
    let mut acc = SparseMatrix::zeros(d, d);
    for (k, c) in coeffs.iter().enumerate() {
        if !c.is_zero() {
            acc = acc.add(&mult_basis_1d::<S>(n, elem1(k)).scale(c)).unwrap();
        }
    }
    acc
}

fn rows_of<S: Scalar>(b: &HaarSymbol<S>) -> Vec<(usize, Vec<S>)> {
    let side = b.side();
    (0..side)
        .filter_map(|ix| {
            let row = b.coeffs[ix * side..(ix + 1) * side].to_vec();
            row.iter().any(|c| !c.is_zero()).then_some((ix, row))
        })
        .collect()
}

/// `f ↦ b·f`, assembled as `Σ_ix M(e_ix) ⊗ M(b_ix)` where `b_ix` is the
/// y-function multiplying the x-basis element `ix`.
pub fn multiplication<S: Scalar>(b: &HaarSymbol<S>) -> SparseMatrix<S> {
    let n = b.n;
    let d = dim1(n) * dim1(n);
    let mut acc = SparseMatrix::zeros(d, d);
    for (ix, row) in rows_of(b) {
        let term = mult_basis_1d::<S>(n, elem1(ix)).kron(&mult_1d(n, &row));
        acc = acc.add(&term).unwrap();
    }
    acc
}

/// `Σ b_{uv} X_u ⊗ Y_v`. The sixteen pieces sum to the multiplication operator.
pub fn product_piece<S: Scalar>(b: &HaarSymbol<S>, px: Piece, py: Piece) -> SparseMatrix<S> {
    let n = b.n;
    let d = dim1(n) * dim1(n);
    let mut acc = SparseMatrix::zeros(d, d);
    for (ix, iy, c) in b.nonzero() {
        let t = piece_1d::<S>(px, n, elem1(ix)).kron(&piece_1d(py, n, elem1(iy)));
        acc = acc.add(&t.scale(c)).unwrap();
    }
    acc
}

/// `T₂T₁M − T₂MT₁ − T₁MT₂ + MT₁T₂`
pub fn repeated_commutator<S: Scalar>(m: &SparseMatrix<S>, t1: &SparseMatrix<S>, t2: &SparseMatrix<S>) -> SparseMatrix<S> {
    let t2t1 = t2.matmul(t1).unwrap();
    let a = t2t1.matmul(m).unwrap();
    let bm = t2.matmul(m).unwrap().matmul(t1).unwrap();
    let c = t1.matmul(m).unwrap().matmul(t2).unwrap();
    let d = m.matmul(&t1.matmul(t2).unwrap()).unwrap();
    a.sub(&bm).unwrap().sub(&c).unwrap().add(&d).unwrap()
}

/// Shift pair used to build a repeated commutator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Shifts {
    pub x: Parity,
    pub y: Parity,
    pub adjoint: bool,
}

impl Shifts {
    pub const PLAIN: Shifts = Shifts { x: Parity::Even, y: Parity::Even, adjoint: false };
    pub const STAR: Shifts = Shifts { x: Parity::Even, y: Parity::Even, adjoint: true };

    pub fn new(star: bool) -> Self {
        if star {
            Self::STAR
        } else {
            Self::PLAIN
        }
    }

    /// The four parity combinations of the plain shift.
    pub fn variants() -> [Shifts; 4] {
        let mut out = [Self::PLAIN; 4];
        for (k, (x, y)) in [(Parity::Even, Parity::Even), (Parity::Even, Parity::Odd), (Parity::Odd, Parity::Even), (Parity::Odd, Parity::Odd)]
            .into_iter()
            .enumerate()
        {
            out[k] = Shifts { x, y, adjoint: false };
        }
        out
    }

    pub fn matrices<S: Scalar>(&self, n: u32) -> (SparseMatrix<S>, SparseMatrix<S>) {
        let t1 = shift::<S>(ShiftVariant { input_parity: self.x, var: Var::X }, n);
        let t2 = shift::<S>(ShiftVariant { input_parity: self.y, var: Var::Y }, n);
        if self.adjoint {
            (t1.transpose(), t2.transpose())
        } else {
            (t1, t2)
        }
    }
}

/// `𝒯^b` (plain) or `𝒯^b_*` (adjoint shifts in both variables).
pub fn commutator_operator<S: Scalar>(b: &HaarSymbol<S>, shifts: Shifts) -> SparseMatrix<S> {
    let (t1, t2) = shifts.matrices::<S>(b.n);
    repeated_commutator(&multiplication(b), &t1, &t2)
}

/// The part of the multiplication operator not covered by the nine Haar⊗Haar
/// parts: every piece with a mean factor or a constant symbol factor. Its
/// repeated commutator vanishes identically.
pub fn mean_part<S: Scalar>(b: &HaarSymbol<S>, shifts: Shifts) -> SparseMatrix<S> {
    let n = b.n;
    let mut rest = multiplication(b);
    let haar_only = b.filtered(|x, y| x != Elem1::Const && y != Elem1::Const);
    for px in [Piece::D, Piece::Pi, Piece::Z] {
        for py in [Piece::D, Piece::Pi, Piece::Z] {
            rest = rest.sub(&product_piece(&haar_only, px, py)).unwrap();
        }
    }
    let (t1, t2) = shifts.matrices::<S>(n);
    repeated_commutator(&rest, &t1, &t2)
}

/// One-variable `f ↦ Σ_{I odd} (−1/|Î|^{1/2}) (b,h_Î)(f,h_Î) h_I`.
pub fn iterated_d_commutator_1d<S: Scalar>(n: u32, b: &[S]) -> SparseMatrix<S> {
    let d = dim1(n);
    let mut m = SparseMatrix::zeros(d, d);
    for i in haar_intervals(n) {
        if i.is_even() {
            continue;
        }
        let p = i.parent().unwrap();
        let ip = haar_idx(n, &p).unwrap();
        let c = -b[ip].times(&S::sqrt2_pow(p.level() as i32));
        m.add_outer(&c, &[(idx1(Elem1::Haar(i)), S::one())], &[(ip, S::one())]);
    }
    m.compact();
    m
}

/// The same operator in `x`, tensored with the identity in `y`.
pub fn iterated_d_commutator<S: Scalar>(n: u32, b: &[S]) -> SparseMatrix<S> {
    iterated_d_commutator_1d(n, b).kron(&SparseMatrix::identity(dim1(n)))
}
