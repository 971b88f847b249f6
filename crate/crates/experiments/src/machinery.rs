//! Checks on the BMO machinery and the Schur-test matrices.

use std::collections::BTreeMap;

use dyadlab_core::bmo::{bmo_chf, bmo_rect, enlarge, ChfStrategy};
use dyadlab_core::norms::{operator_norm_with, schur_matrix, PowerOptions, SchurKind};
use dyadlab_core::{HaarSymbol, QSqrt2, Result};
use num_rational::Rational64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::generate::{trial_seed, SymbolGenerator, SymbolKind};
use crate::mainskip::small_open_set;
use crate::report::{CheckOutcome, GROWTH_GUARD};

type Q = QSqrt2;

/// `bmoChF ≥ bmoRect` for every symbol, exact enumeration at depth ≤ 2 and
/// the heuristic beyond.
pub fn chf_dominates_rect(depths: &[u32], trials: usize, seed: u64) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::new("ChF dominates rectangular");
    for &n in depths {
        let res: Vec<Result<(bool, String)>> = (0..trials as u64)
            .into_par_iter()
            .map(|k| {
                let s = trial_seed(seed, n, k);
                let b: HaarSymbol<Q> = SymbolGenerator::new(SymbolKind::General, n).generate(s);
                let strat = if n <= 2 { ChfStrategy::Exact } else { ChfStrategy::Heuristic { restarts: 4, seed: s } };
                let chf = bmo_chf(&b, strat)?;
                let rect = bmo_rect(&b);
                Ok((chf.value >= rect.value, format!("depth {n} seed {s}: {} < {}", chf.value, rect.value)))
            })
            .collect();
        for r in res {
            let (ok, msg) = r?;
            out.record(ok, || msg);
        }
    }
    Ok(out)
}

/// Exact and heuristic Chang–Fefferman norms agree at depth 2.
pub fn heuristic_matches_exact(trials: usize, seed: u64) -> Result<CheckOutcome> {
    let res: Vec<Result<(bool, String)>> = (0..trials as u64)
        .into_par_iter()
        .map(|k| {
            let s = trial_seed(seed, 2, k);
            let b: HaarSymbol<Q> = SymbolGenerator::new(SymbolKind::General, 2).generate(s);
            let ex = bmo_chf(&b, ChfStrategy::Exact)?;
            let he = bmo_chf(&b, ChfStrategy::Heuristic { restarts: 10, seed: s })?;
            Ok((ex.value == he.value, format!("seed {s}: exact {} heuristic {}", ex.value, he.value)))
        })
        .collect();
    let mut out = CheckOutcome::new("heuristic equals exact");
    for r in res {
        let (ok, msg) = r?;
        out.record(ok, || msg);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnlargeRow {
    pub depth: u32,
    pub max_ratio: f64,
    pub mean_ratio: f64,
}

/// `|U| / |U₀|` over single cells and small unions at each depth, with
/// threshold `lambda` for the strong maximal function.
pub fn enlarge_ratios(depths: &[u32], trials: usize, seed: u64, lambda: Rational64) -> Result<Vec<EnlargeRow>> {
    depths
        .iter()
        .map(|&n| {
            let ratios: Vec<f64> = (0..trials as u64)
                .map(|k| enlarge(&small_open_set(n, trial_seed(seed, n, k)), lambda).map(|e| e.ratio))
                .collect::<Result<_>>()?;
            let max = ratios.iter().copied().fold(0.0, f64::max);
            let mean = ratios.iter().sum::<f64>() / ratios.len().max(1) as f64;
            Ok(EnlargeRow { depth: n, max_ratio: max, mean_ratio: mean })
        })
        .collect()
}

pub fn enlarge_growth_ok(rows: &[EnlargeRow]) -> bool {
    rows.windows(2).all(|w| w[1].max_ratio <= GROWTH_GUARD * w[0].max_ratio)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchurRow {
    pub kind: String,
    pub depth: u32,
    pub exponent: f64,
    pub norm: f64,
    pub iterations: usize,
}

/// Norms of the tree and bi-tree matrices over a range of depths.
pub fn schur_norms(kind: SchurKind, depths: &[u32], exponent: f64) -> Result<Vec<SchurRow>> {
    let opts = PowerOptions { tol: 1e-12, max_iters: 100_000, restarts: 2, seed: 0 };
    depths
        .iter()
        .map(|&d| {
            let m = schur_matrix(kind, d, exponent)?;
            let e = operator_norm_with(&m.operator, &opts)?;
            Ok(SchurRow { kind: format!("{kind:?}"), depth: d, exponent, norm: e.value, iterations: e.iterations })
        })
        .collect()
}

/// Relative increase over the last depth step.
pub fn last_step_increase(rows: &[SchurRow]) -> Option<f64> {
    let k = rows.len();
    (k >= 2).then(|| rows[k - 1].norm / rows[k - 2].norm - 1.0)
}

/// Depth-wise maxima of `|U|/|U₀|` keyed by depth, for reports.
pub fn enlarge_table(rows: &[EnlargeRow]) -> BTreeMap<u32, f64> {
    rows.iter().map(|r| (r.depth, r.max_ratio)).collect()
}
