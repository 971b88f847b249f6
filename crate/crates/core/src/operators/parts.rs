//! The nine Haar⊗Haar parts of the repeated commutator and the 25 operators
//! obtained by testing it on a single `h_{I''} ⊗ h_{J''}`.
//!
//! In one variable, with `A` the acting shift (or its adjoint),
//! `[A, π_{h_K}] = (A h_K) 1̃_Kᵀ − h_K (Aᵀ 1̃_K)ᵀ` and
//! `[A, Z_{h_K}] = (A 1̃_K) h_Kᵀ − 1̃_K (Aᵀ h_K)ᵀ`; each term is a [`Slot`]
//! given by an output vector and a window. A line of a part is a tensor of
//! two slots summed against the symbol coefficients.

use std::collections::HashMap;

use crate::dyadic::{DyadicInterval, Parity};
use crate::haar::{dim1, haar1, haar_idx, haar_intervals, tilde1, HaarSymbol, Sparse};
use crate::linalg::SparseMatrix;
use crate::scalar::Scalar;

use super::{shift_acts, shift_sparse, Shifts};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Slot {
    /// output `A h_K`, window `1̃_K`
    PiA,
    /// output `h_K`, window `Aᵀ 1̃_K`
    PiB,
    /// output `A 1̃_K`, window `h_K`
    ZA,
    /// output `1̃_K`, window `Aᵀ h_K`
    ZB,
    /// `[A, D_{h_K}]`: output `−|K|^{-1/2}(h_{K₊}+h_{K₋})`, window `h_K`
    /// (plain); output `h_K`, window `|K|^{-1/2}(h_{K₊}+h_{K₋})` (adjoint)
    D,
}

impl Slot {
    /// Slots whose window only sees test functions on the acting parity.
    pub fn restricts_parity(self) -> bool {
        matches!(self, Slot::PiB | Slot::ZB | Slot::D)
    }
}

/// `(output, window)` of a slot for the symbol interval `k`.
pub fn slot_vectors<S: Scalar>(slot: Slot, k: &DyadicInterval, parity: Parity, adjoint: bool, n: u32) -> (Sparse<S>, Sparse<S>) {
    let h = haar1::<S>(n, k);
    let t = tilde1::<S>(n, k);
    let apply = |v: &Sparse<S>| shift_sparse(parity, adjoint, n, v);
    let apply_t = |v: &Sparse<S>| shift_sparse(parity, !adjoint, n, v);
    match slot {
        Slot::PiA => (apply(&h), t),
        Slot::PiB => (h, apply_t(&t)),
        Slot::ZA => (apply(&t), h),
        Slot::ZB => (t, apply_t(&h)),
        Slot::D => {
            if !shift_acts(parity, n, k) {
                return (vec![], vec![]);
            }
            let c = S::sqrt2_pow(k.level() as i32);
            let mut kids: Sparse<S> = k
                .children()
                .iter()
                .map(|ch| (haar_idx(n, ch).unwrap(), c.clone()))
                .collect();
            kids.sort_by_key(|e| e.0);
            if adjoint {
                (h, kids)
            } else {
                (kids.into_iter().map(|(i, v)| (i, -v)).collect(), h)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Line {
    pub x: Slot,
    pub y: Slot,
    pub sign: i32,
}

const fn line(x: Slot, y: Slot, sign: i32) -> Line {
    Line { x, y, sign }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Part {
    DD,
    DPi,
    DZ,
    PiD,
    PiPi,
    PiZ,
    ZD,
    ZPi,
    ZZ,
}

impl Part {
    pub const ALL: [Part; 9] = [Part::DD, Part::DPi, Part::DZ, Part::PiD, Part::PiPi, Part::PiZ, Part::ZD, Part::ZPi, Part::ZZ];

    pub fn name(self) -> &'static str {
        match self {
            Part::DD => "DD",
            Part::DPi => "Dπ",
            Part::DZ => "DZ",
            Part::PiD => "πD",
            Part::PiPi => "ππ",
            Part::PiZ => "πZ",
            Part::ZD => "ZD",
            Part::ZPi => "Zπ",
            Part::ZZ => "ZZ",
        }
    }

    pub fn from_name(s: &str) -> Option<Part> {
        let t = s.replace("pi", "π").replace("Pi", "π");
        Part::ALL.into_iter().find(|p| p.name() == t)
    }

    pub fn lines(self) -> Vec<Line> {
        use Slot::*;
        let four = |a: Slot, b: Slot, x: Slot, y: Slot| vec![line(a, x, 1), line(a, y, -1), line(b, x, -1), line(b, y, 1)];
        match self {
            Part::PiPi => four(PiA, PiB, PiA, PiB),
            Part::PiZ => four(PiA, PiB, ZA, ZB),
            Part::ZPi => four(ZA, ZB, PiA, PiB),
            Part::ZZ => four(ZA, ZB, ZA, ZB),
            Part::DPi => vec![line(D, PiA, 1), line(D, PiB, -1)],
            Part::DZ => vec![line(D, ZA, 1), line(D, ZB, -1)],
            Part::PiD => vec![line(PiA, D, 1), line(PiB, D, -1)],
            Part::ZD => vec![line(ZA, D, 1), line(ZB, D, -1)],
            Part::DD => vec![line(D, D, 1)],
        }
    }
}

fn tensor<S: Scalar>(side: usize, a: &Sparse<S>, b: &Sparse<S>) -> Sparse<S> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for (i, x) in a {
        for (j, y) in b {
            out.push((i * side + j, x.times(y)));
        }
    }
    out
}

type SlotCache<S> = HashMap<(Slot, DyadicInterval, bool), (Sparse<S>, Sparse<S>)>;

fn cached<'a, S: Scalar>(
    cache: &'a mut SlotCache<S>,
    slot: Slot,
    k: DyadicInterval,
    in_x: bool,
    shifts: Shifts,
    n: u32,
) -> &'a (Sparse<S>, Sparse<S>) {
    let parity = if in_x { shifts.x } else { shifts.y };
    cache.entry((slot, k, in_x)).or_insert_with(|| slot_vectors(slot, &k, parity, shifts.adjoint, n))
}

/// `Σ_{K,L} sign·(b, h_K⊗h_L) (out_K ⊗ out_L)(win_K ⊗ win_L)ᵀ`
pub fn line_matrix<S: Scalar>(b: &HaarSymbol<S>, ln: Line, shifts: Shifts) -> SparseMatrix<S> {
    let n = b.n;
    let side = dim1(n);
    let d = side * side;
    let mut m = SparseMatrix::zeros(d, d);
    let mut cache = SlotCache::<S>::new();
    let sign = S::from_i64(ln.sign as i64);
    for r in b.haar_support() {
        let coef = b.coef_rect(&r).times(&sign);
        let (ox, wx) = cached(&mut cache, ln.x, r.x, true, shifts, n).clone();
        let (oy, wy) = cached(&mut cache, ln.y, r.y, false, shifts, n).clone();
        if ox.is_empty() || oy.is_empty() || wx.is_empty() || wy.is_empty() {
            continue;
        }
        m.add_outer(&coef, &tensor(side, &ox, &oy), &tensor(side, &wx, &wy));
    }
    m.compact();
    m
}

/// `line_matrix(b, ln, shifts) · f` without forming the matrix.
pub fn line_apply<S: Scalar>(b: &HaarSymbol<S>, ln: Line, shifts: Shifts, f: &HaarSymbol<S>) -> HaarSymbol<S> {
    let n = b.n;
    let mut out = HaarSymbol::<S>::zeros(n);
    let mut cache = SlotCache::<S>::new();
    let sign = S::from_i64(ln.sign as i64);
    for r in b.haar_support() {
        let (ox, wx) = cached(&mut cache, ln.x, r.x, true, shifts, n).clone();
        let (oy, wy) = cached(&mut cache, ln.y, r.y, false, shifts, n).clone();
        if ox.is_empty() || oy.is_empty() {
            continue;
        }
        let w = super::forms::pair(f, &wx, &wy);
        if !w.is_zero() {
            out.add_tensor(&b.coef_rect(&r).times(&sign).times(&w), &ox, &oy);
        }
    }
    out
}

pub fn part_apply<S: Scalar>(b: &HaarSymbol<S>, part: Part, shifts: Shifts, f: &HaarSymbol<S>) -> HaarSymbol<S> {
    let mut out = HaarSymbol::<S>::zeros(b.n);
    for ln in part.lines() {
        out.add_assign(&line_apply(b, ln, shifts, f));
    }
    out
}

pub fn part_matrix<S: Scalar>(b: &HaarSymbol<S>, part: Part, shifts: Shifts) -> SparseMatrix<S> {
    let d = b.coeffs.len();
    part.lines()
        .into_iter()
        .fold(SparseMatrix::zeros(d, d), |acc, ln| acc.add(&line_matrix(b, ln, shifts)).unwrap())
}

/// The nine parts with the plain (`star = false`) or adjoint shifts.
pub fn nine_parts<S: Scalar>(b: &HaarSymbol<S>, star: bool) -> Vec<(Part, SparseMatrix<S>)> {
    nine_parts_with(b, Shifts::new(star))
}

pub fn nine_parts_with<S: Scalar>(b: &HaarSymbol<S>, shifts: Shifts) -> Vec<(Part, SparseMatrix<S>)> {
    Part::ALL.into_iter().map(|p| (p, part_matrix(b, p, shifts))).collect()
}

/// Names of the 25 tested operators with their line.
pub const TESTED: [(&str, Line); 25] = {
    use Slot::*;
    [
        ("DZ2", line(D, ZB, -1)),
        ("DD", line(D, D, 1)),
        ("ZD2", line(ZB, D, -1)),
        ("ZZ4", line(ZB, ZB, 1)),
        ("ZD1", line(ZA, D, 1)),
        ("DZ1", line(D, ZA, 1)),
        ("ZZ2", line(ZA, ZB, -1)),
        ("ZZ3", line(ZB, ZA, -1)),
        ("ZZ1", line(ZA, ZA, 1)),
        ("πD2", line(PiB, D, -1)),
        ("πZ2", line(PiB, ZB, 1)),
        ("πD1", line(PiA, D, 1)),
        ("πZ1", line(PiB, ZA, -1)),
        ("πZ4", line(PiA, ZB, -1)),
        ("πZ3", line(PiA, ZA, 1)),
        ("Dπ2", line(D, PiB, -1)),
        ("Zπ4", line(ZB, PiB, 1)),
        ("Dπ1", line(D, PiA, 1)),
        ("Zπ2", line(ZA, PiB, -1)),
        ("Zπ3", line(ZB, PiA, -1)),
        ("Zπ1", line(ZA, PiA, 1)),
        ("ππ4", line(PiB, PiB, 1)),
        ("ππ3", line(PiB, PiA, -1)),
        ("ππ2", line(PiA, PiB, -1)),
        // printed with a leading minus; the sum identity requires +
        ("ππ1", line(PiA, PiA, 1)),
    ]
};

pub fn tested_line(name: &str) -> Option<Line> {
    TESTED.iter().find(|(n, _)| *n == name).map(|(_, l)| *l)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TestedOutput<S> {
    pub name: &'static str,
    pub line: Line,
    /// the parity restriction on `(I'', J'')` holds
    pub applicable: bool,
    pub output: HaarSymbol<S>,
}

/// Is the tested operator's parity restriction met by `(I'', J'')`?
pub fn tested_applicable(ln: Line, i2: &DyadicInterval, j2: &DyadicInterval, n: u32) -> bool {
    (!ln.x.restricts_parity() || shift_acts(Parity::Even, n, i2)) && (!ln.y.restricts_parity() || shift_acts(Parity::Even, n, j2))
}

/// `line(h_{I''} ⊗ h_{J''})`, summing only over symbol rectangles whose
/// windows see the test function.
pub fn line_on_haar<S: Scalar>(b: &HaarSymbol<S>, ln: Line, i2: &DyadicInterval, j2: &DyadicInterval, shifts: Shifts) -> HaarSymbol<S> {
    let n = b.n;
    let side = dim1(n);
    let (ti, tj) = (haar_idx(n, i2).expect("admissible"), haar_idx(n, j2).expect("admissible"));
    let mut out = HaarSymbol::<S>::zeros(n);
    let sign = S::from_i64(ln.sign as i64);
    let pick = |w: &Sparse<S>, t: usize| w.iter().find(|e| e.0 == t).map(|e| e.1.clone());
    let xs: Vec<(DyadicInterval, S, Sparse<S>)> = haar_intervals(n)
        .filter_map(|k| {
            let (o, w) = slot_vectors::<S>(ln.x, &k, shifts.x, shifts.adjoint, n);
            pick(&w, ti).map(|c| (k, c, o))
        })
        .collect();
    let ys: Vec<(DyadicInterval, S, Sparse<S>)> = haar_intervals(n)
        .filter_map(|l| {
            let (o, w) = slot_vectors::<S>(ln.y, &l, shifts.y, shifts.adjoint, n);
            pick(&w, tj).map(|c| (l, c, o))
        })
        .collect();
    for (k, cx, ox) in &xs {
        for (l, cy, oy) in &ys {
            let coef = b.coef(k, l);
            if coef.is_zero() {
                continue;
            }
            let s = coef.times(cx).times(cy).times(&sign);
            for (a, va) in ox {
                for (c, vc) in oy {
                    out.coeffs[a * side + c].fma(&s, &va.times(vc));
                }
            }
        }
    }
    out
}

/// All 25 tested operators on `h_{I''} ⊗ h_{J''}` with the plain shifts.
pub fn tested_operators<S: Scalar>(b: &HaarSymbol<S>, i2: &DyadicInterval, j2: &DyadicInterval) -> Vec<TestedOutput<S>> {
    TESTED
        .iter()
        .map(|(name, ln)| TestedOutput {
            name,
            line: *ln,
            applicable: tested_applicable(*ln, i2, j2, b.n),
            output: line_on_haar(b, *ln, i2, j2, Shifts::PLAIN),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::DyadicRectangle;
    use crate::haar::{haar_on, haar_rects, idx1, Elem1};
    use crate::operators::{commutator_operator, mean_part, tests::random_symbol};
    use crate::scalar::QSqrt2;

    type Q = QSqrt2;

    fn sum_parts(parts: &[(Part, SparseMatrix<Q>)]) -> SparseMatrix<Q> {
        let d = parts[0].1.nrows();
        parts.iter().fold(SparseMatrix::zeros(d, d), |a, (_, m)| a.add(m).unwrap())
    }

    #[test]
    fn nine_parts_sum_to_commutator() {
        for n in 1..=3 {
            for seed in 0..4 {
                let b = random_symbol(n, 100 + seed, true);
                for star in [false, true] {
                    let parts = nine_parts(&b, star);
                    let total = sum_parts(&parts).add(&mean_part(&b, Shifts::new(star))).unwrap();
                    assert_eq!(total, commutator_operator(&b, Shifts::new(star)), "n={n} seed={seed} star={star}");
                }
            }
        }
    }

    #[test]
    fn nine_parts_sum_for_all_shift_variants() {
        let b = random_symbol(3, 7, false);
        for sh in Shifts::variants() {
            let parts = nine_parts_with(&b, sh);
            assert_eq!(sum_parts(&parts), commutator_operator(&b, sh));
        }
    }

    #[test]
    fn zero_symbol_parts_vanish() {
        for (_, m) in nine_parts(&HaarSymbol::<Q>::zeros(2), false) {
            assert!(m.is_zero());
        }
    }

    #[test]
    fn dd_part_single_even_even() {
        // DD applied to h_R with b = c h_R: c (b,h_R)(f,h_R)/|R|^{1/2} on the grandchildren sums
        let n = 3;
        let r: DyadicRectangle = "0:0|0:0".parse().unwrap();
        let b = HaarSymbol::<Q>::single(n, &r, Q::from_ratio(3, 4)).unwrap();
        let dd = part_matrix(&b, Part::DD, Shifts::PLAIN);
        let col = dd.column(idx1(Elem1::Haar(r.x)) * 8 + idx1(Elem1::Haar(r.y)));
        let mut want: Vec<(usize, Q)> = Vec::new();
        for cx in r.x.children() {
            for cy in r.y.children() {
                want.push((idx1(Elem1::Haar(cx)) * 8 + idx1(Elem1::Haar(cy)), Q::from_ratio(3, 4)));
            }
        }
        want.sort_by_key(|e| e.0);
        assert_eq!(col, &want[..]);
        assert_eq!(dd.nnz(), 4);
    }

    #[test]
    fn tested_operators_sum_to_commutator() {
        let n = 3;
        for seed in 0..2 {
            let b = random_symbol(n, 300 + seed, true);
            let t = commutator_operator(&b, Shifts::PLAIN);
            for r in haar_rects(n) {
                let outs = tested_operators(&b, &r.x, &r.y);
                let mut acc = HaarSymbol::<Q>::zeros(n);
                for o in &outs {
                    if o.applicable {
                        acc.add_assign(&o.output);
                    } else {
                        assert!(o.output.is_zero(), "{} at {r}", o.name);
                    }
                }
                let col = t.column(idx1(Elem1::Haar(r.x)) * 8 + idx1(Elem1::Haar(r.y))).to_vec();
                assert_eq!(acc.coeffs, crate::haar::sparse_to_dense(64, &col), "{r}");
            }
        }
    }

    #[test]
    fn odd_odd_only_unrestricted_entries() {
        let n = 3;
        let b = random_symbol(n, 5, false);
        let i2: DyadicInterval = "1:0".parse().unwrap();
        let present: Vec<&str> = tested_operators(&b, &i2, &i2).into_iter().filter(|o| o.applicable).map(|o| o.name).collect();
        assert_eq!(present, vec!["ZZ1", "πZ3", "Zπ1", "ππ1"]);
        assert!(tested_operators(&HaarSymbol::<Q>::zeros(n), &i2, &i2).iter().all(|o| o.output.is_zero()));
    }

    /// Literal transcriptions of four displays, summed directly over `I, J`.
    #[test]
    fn tested_operators_match_displays() {
        let n = 4;
        let b = random_symbol(n, 9, false);
        let h = |i: &DyadicInterval| idx1(Elem1::Haar(*i));
        let t1h = |i: &DyadicInterval| vec![(h(&i.plus()), Q::one()), (h(&i.minus()), -Q::one())];
        let i2: DyadicInterval = "0:0".parse().unwrap();
        let j2: DyadicInterval = "2:1".parse().unwrap();
        let outs = tested_operators(&b, &i2, &j2);
        let get = |name: &str| outs.iter().find(|o| o.name == name).unwrap().output.clone();

        // ππ1: Σ_{I,J even strictly inside} b h_{I''}(I) h_{J''}(J) T₁h_I ⊗ T₂h_J
        let mut pp1 = HaarSymbol::<Q>::zeros(n);
        for i in i2.descendants(n - 2).filter(|i| i.is_even()) {
            for j in j2.descendants(n - 2).filter(|j| j.is_even()) {
                let c = b.coef(&i, &j).times(&haar_on(&i2, &i)).times(&haar_on(&j2, &j));
                pp1.add_tensor(&c, &t1h(&i), &t1h(&j));
            }
        }
        assert_eq!(get("ππ1"), pp1);

        // ππ4: ± Σ_{I ⊊ I''±, J ⊊ J''±} b h_{I''±}(I) h_{J''±}(J) h_I ⊗ h_J
        let mut pp4 = HaarSymbol::<Q>::zeros(n);
        for (ci, si) in [(i2.plus(), 1), (i2.minus(), -1)] {
            for (cj, sj) in [(j2.plus(), 1), (j2.minus(), -1)] {
                for i in ci.descendants(n - 1) {
                    for j in cj.descendants(n - 1) {
                        let c = b.coef(&i, &j).times(&haar_on(&ci, &i)).times(&haar_on(&cj, &j)).times(&Q::from_i64(si * sj));
                        pp4.add_tensor(&c, &vec![(h(&i), Q::one())], &vec![(h(&j), Q::one())]);
                    }
                }
            }
        }
        assert_eq!(get("ππ4"), pp4);

        // πZ3: [Σ_{I even ⊊ I''} b(I,J'') h_{I''}(I) T₁h_I] ⊗ T₂1̃_{J''}
        let t2t = super::super::shift_sparse(Parity::Even, false, n, &tilde1::<Q>(n, &j2));
        let mut pz3 = HaarSymbol::<Q>::zeros(n);
        for i in i2.descendants(n - 2).filter(|i| i.is_even()) {
            pz3.add_tensor(&b.coef(&i, &j2).times(&haar_on(&i2, &i)), &t1h(&i), &t2t);
        }
        assert_eq!(get("πZ3"), pz3);

        // Dπ2: (h_{I''₊}+h_{I''₋})/|I''|^{1/2} ⊗ [Σ_{J ⊊ J''₊} ... − Σ_{J ⊊ J''₋} ...]
        let mut dp2 = HaarSymbol::<Q>::zeros(n);
        let kids = vec![(h(&i2.minus()), Q::sqrt2_pow(0)), (h(&i2.plus()), Q::sqrt2_pow(0))];
        for (cj, sj) in [(j2.plus(), 1), (j2.minus(), -1)] {
            for j in cj.descendants(n - 1) {
                let c = b.coef(&i2, &j).times(&haar_on(&cj, &j)).times(&Q::from_i64(sj));
                dp2.add_tensor(&c, &kids, &vec![(h(&j), Q::one())]);
            }
        }
        assert_eq!(get("Dπ2"), dp2);
    }

    #[test]
    fn pipi1_routes_to_odd_odd() {
        let n = 4;
        let b = random_symbol(n, 12, false);
        for r in haar_rects(n) {
            let o = line_on_haar(&b, tested_line("ππ1").unwrap(), &r.x, &r.y, Shifts::PLAIN);
            for rr in o.haar_support() {
                assert!(!rr.x.is_even() && !rr.y.is_even());
            }
            assert_eq!(o.nonzero().count(), o.haar_support().len());
        }
    }

    #[test]
    fn line_apply_matches_matrix() {
        let n = 3;
        let b = random_symbol(n, 77, true);
        let f = random_symbol(n, 78, true);
        for star in [false, true] {
            for p in Part::ALL {
                for ln in p.lines() {
                    let m = line_matrix(&b, ln, Shifts::new(star));
                    assert_eq!(line_apply(&b, ln, Shifts::new(star), &f), m.apply_symbol(&f), "{} {star}", p.name());
                }
            }
        }
    }

    #[test]
    fn part_names_roundtrip() {
        for p in Part::ALL {
            assert_eq!(Part::from_name(p.name()), Some(p));
        }
        assert_eq!(Part::from_name("piZ"), Some(Part::PiZ));
        assert_eq!(Part::ALL.iter().map(|p| p.lines().len()).sum::<usize>(), 25);
    }
}
