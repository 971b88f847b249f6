//! Exact algebraic identities: the nine-part decomposition, the tested
//! operators, and the shift relations.

use dyadlab_core::haar::{haar_rects, idx1, sparse_to_dense, Elem1};
use dyadlab_core::operators::parts::{nine_parts_with, tested_operators};
use dyadlab_core::operators::{commutator_operator, mean_part, shift, ShiftVariant, Shifts, Var};
use dyadlab_core::{HaarSymbol, Parity, QSqrt2, Scalar, SparseMatrix};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::generate::{trial_seed, SymbolGenerator, SymbolKind};
use crate::linear::spectral_norm;
use crate::report::CheckOutcome;

type Q = QSqrt2;

/// Residual of `𝒯^b − (nine parts + mean part)` for one symbol.
pub fn decomposition_residual<S: Scalar>(b: &HaarSymbol<S>, shifts: Shifts) -> SparseMatrix<S> {
    let mut acc = mean_part(b, shifts);
    for (_, m) in nine_parts_with(b, shifts) {
        acc = acc.add(&m).expect("same shape");
    }
    commutator_operator(b, shifts).sub(&acc).expect("same shape")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityRow {
    pub depth: u32,
    pub seed: u64,
    pub adjoint: bool,
    pub residual_nnz: usize,
}

/// The nine-part identity for `per_depth` random full symbols at each depth,
/// in both shift conventions, exactly.
pub fn master_identity(depths: &[u32], per_depth: usize, seed: u64) -> (CheckOutcome, Vec<IdentityRow>) {
    let jobs: Vec<(u32, u64)> = depths.iter().flat_map(|&d| (0..per_depth as u64).map(move |k| (d, k))).collect();
    let rows: Vec<IdentityRow> = jobs
        .par_iter()
        .flat_map_iter(|&(d, k)| {
            let s = trial_seed(seed, d, k);
            let b: HaarSymbol<Q> = SymbolGenerator::new(SymbolKind::General, d).with_marginals(true).generate(s);
            [false, true].map(|adjoint| IdentityRow {
                depth: d,
                seed: s,
                adjoint,
                residual_nnz: decomposition_residual(&b, Shifts::new(adjoint)).nnz(),
            })
        })
        .collect();
    let mut out = CheckOutcome::new("master identity");
    for r in &rows {
        out.record(r.residual_nnz == 0, || format!("depth {} seed {} adjoint {}: {} residual entries", r.depth, r.seed, r.adjoint, r.residual_nnz));
    }
    (out, rows)
}

/// The applicable tested operators sum to `𝒯^b(h_{I''} ⊗ h_{J''})` at every
/// Haar rectangle, and the inapplicable ones vanish.
pub fn tested_identity(n: u32, symbols: usize, seed: u64) -> CheckOutcome {
    let side = 1usize << n;
    (0..symbols as u64)
        .into_par_iter()
        .map(|k| {
            let s = trial_seed(seed, n, k);
            let b: HaarSymbol<Q> = SymbolGenerator::new(SymbolKind::General, n).with_marginals(true).generate(s);
            let t = commutator_operator(&b, Shifts::PLAIN);
            let mut out = CheckOutcome::new("tested operators");
            for r in haar_rects(n) {
                let outs = tested_operators(&b, &r.x, &r.y);
                let mut acc = HaarSymbol::<Q>::zeros(n);
                let mut stray = None;
                for o in &outs {
                    if o.applicable {
                        acc.add_assign(&o.output);
                    } else if !o.output.is_zero() {
                        stray = Some(o.name);
                    }
                }
                let col = t.column(idx1(Elem1::Haar(r.x)) * side + idx1(Elem1::Haar(r.y)));
                let ok = stray.is_none() && acc.coeffs == sparse_to_dense(side * side, &col.to_vec());
                out.record(ok, || format!("seed {s} at {r}: stray {stray:?}"));
            }
            out
        })
        .reduce(|| CheckOutcome::new("tested operators"), CheckOutcome::merge)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftRow {
    pub depth: u32,
    pub square_zero: bool,
    pub adjoint_square_zero: bool,
    pub norm: f64,
}

/// `T² = 0`, `(T*)² = 0` exactly and `‖T‖` numerically, for both parities and
/// both variables.
pub fn shift_algebra(depths: &[u32]) -> Vec<ShiftRow> {
    depths
        .iter()
        .map(|&n| {
            let mut sq = true;
            let mut asq = true;
            let mut norm = 0.0f64;
            for parity in [Parity::Even, Parity::Odd] {
                for var in [Var::X, Var::Y] {
                    let t = shift::<Q>(ShiftVariant { input_parity: parity, var }, n);
                    let ta = t.transpose();
                    sq &= t.matmul(&t).unwrap().is_zero();
                    asq &= ta.matmul(&ta).unwrap().is_zero();
                    if parity == Parity::Even && var == Var::X {
                        norm = spectral_norm(&t.to_f64());
                    }
                }
            }
            ShiftRow { depth: n, square_zero: sq, adjoint_square_zero: asq, norm }
        })
        .collect()
}
