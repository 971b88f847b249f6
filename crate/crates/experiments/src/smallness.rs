//! Smallness propagation: the horizontal coefficient equality is checked on
//! every admissible `(U, R)`, and a rectangle whose vertical parent carries a
//! different coefficient is searched for.

use dyadlab_core::bmo::SmallnessContext;
use dyadlab_core::haar::haar_rects;
use dyadlab_core::{DyadicOpenSet, DyadicRectangle, QSqrt2, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::report::CheckOutcome;

type Q = QSqrt2;

/// Does the horizontal equality apply to `R` in `U`? Plain shifts need
/// `Î × J ⊆ U`, adjoint shifts the grandparent strip in `x`.
pub fn horizontally_admissible(u: &DyadicOpenSet, r: &DyadicRectangle, star: bool) -> bool {
    let up = if star { 2 } else { 1 };
    match r.x.ancestor(up) {
        Ok(a) => u.contains_rect(&DyadicRectangle::new(a, r.y)),
        Err(_) => false,
    }
}

/// `R̂̂ ⊆ U`.
pub fn two_deep(u: &DyadicOpenSet, r: &DyadicRectangle) -> bool {
    r.ancestor_at(2).is_ok_and(|a| u.contains_rect(&a))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerticalWitness {
    pub set: String,
    pub rect: DyadicRectangle,
    pub star: bool,
    /// coefficient at `R`
    pub at_rect: String,
    /// coefficient at `I × Ĵ`
    pub at_vertical_parent: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallnessOutcome {
    pub depth: u32,
    pub sets: usize,
    pub horizontal: CheckOutcome,
    pub witness: Option<VerticalWitness>,
}

/// Checks one open set; returns the horizontal outcome and the first
/// vertical witness (rectangles 2-deep in `U`).
pub fn examine(u: &DyadicOpenSet) -> Result<(CheckOutcome, Option<VerticalWitness>)> {
    let n = u.depth();
    let ctx = SmallnessContext::<Q>::new(u);
    let mut out = CheckOutcome::new("horizontal equality");
    let mut witness = None;
    for star in [false, true] {
        for r in haar_rects(n) {
            if horizontally_admissible(u, &r, star) {
                let here = ctx.report(&r, star)?.horizontal;
                let there = ctx.report(&r.r1()?, star)?.horizontal;
                out.record(here == there, || format!("{r} star={star} in {}: {here} vs {there}", u.to_json()));
            }
            if witness.is_none() && two_deep(u, &r) {
                let here = ctx.report(&r, star)?.horizontal;
                let there = ctx.report(&r.r2()?, star)?.horizontal;
                if here != there {
                    witness = Some(VerticalWitness { set: u.to_json(), rect: r, star, at_rect: here.to_string(), at_vertical_parent: there.to_string() });
                }
            }
        }
    }
    Ok((out, witness))
}

/// Every open set at depth `≤ 2`; at larger depth, unions of two rectangles
/// that overlap or share an edge, all of them at depth 3 and `sample` of them
/// at depth 4.
pub fn catalog(n: u32, sample: usize, seed: u64) -> Vec<DyadicOpenSet> {
    let cells = 1usize << (2 * n);
    if n <= 2 {
        return (0u64..1 << cells)
            .map(|m| DyadicOpenSet::from_cells(n, (0..cells).map(|k| m >> k & 1 == 1).collect()).expect("cell count"))
            .collect();
    }
    let rects: Vec<DyadicRectangle> = DyadicRectangle::all(n).collect();
    let touching = |a: &DyadicRectangle, b: &DyadicRectangle| {
        let span = |i: &dyadlab_core::DyadicInterval| {
            let r = i.cell_range(n);
            (r.start as i64, r.end as i64)
        };
        let ((ax0, ax1), (ay0, ay1), (bx0, bx1), (by0, by1)) = (span(&a.x), span(&a.y), span(&b.x), span(&b.y));
        let x_meet = ax0 <= bx1 && bx0 <= ax1;
        let y_meet = ay0 <= by1 && by0 <= ay1;
        x_meet && y_meet && !a.contains(b) && !b.contains(a)
    };
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for i in 0..rects.len() {
        for j in i + 1..rects.len() {
            if touching(&rects[i], &rects[j]) {
                pairs.push((i, j));
            }
        }
    }
    if n > 3 && pairs.len() > sample {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for k in 0..sample {
            let j = rng.random_range(k..pairs.len());
            pairs.swap(k, j);
        }
        pairs.truncate(sample);
    }
    let mut seen = std::collections::BTreeSet::new();
    pairs
        .into_iter()
        .map(|(i, j)| DyadicOpenSet::from_rects(n, &[rects[i], rects[j]]).expect("levels within depth"))
        .filter(|u| seen.insert(u.cells().to_vec()))
        .collect()
}

pub fn smallness_falsifier(n: u32, sample: usize, seed: u64) -> Result<SmallnessOutcome> {
    let sets = catalog(n, sample, seed);
    let results: Vec<Result<(CheckOutcome, Option<VerticalWitness>)>> = sets.par_iter().map(examine).collect();
    let mut horizontal = CheckOutcome::new("horizontal equality");
    let mut witness = None;
    for r in results {
        let (h, w) = r?;
        horizontal = horizontal.merge(h);
        if witness.is_none() {
            witness = w;
        }
    }
    Ok(SmallnessOutcome { depth: n, sets: sets.len(), horizontal, witness })
}
