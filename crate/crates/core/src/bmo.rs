//! Rectangular and Chang–Fefferman BMO norms, the strong dyadic maximal
//! function, enlargement of open sets, symbol restriction and the
//! smallness coefficients of an open set.

use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dyadic::{DyadicInterval, DyadicRectangle, Parity};
use crate::error::{Error, Result};
use crate::haar::{dim1, elem1, haar_rects, tilde1, Elem1, GridFunction2D, HaarSymbol, Sparse};
use crate::open_set::DyadicOpenSet;
use crate::operators::forms::pair;
use crate::operators::shift_sparse;
use crate::scalar::Scalar;

/// Largest depth the exact Chang–Fefferman enumeration accepts.
pub const CHF_EXACT_MAX_DEPTH: u32 = 2;

#[derive(Clone, Debug, PartialEq)]
pub struct RectBmo<S> {
    /// squared norm
    pub value: S,
    pub witness: DyadicRectangle,
}

/// `max_{R₀} |R₀|⁻¹ Σ_{R ⊆ R₀} (b, h_R)²` by summing over subtrees.
pub fn bmo_rect<S: Scalar>(b: &HaarSymbol<S>) -> RectBmo<S> {
    let n = b.n;
    let side = b.side();
    let mut best = RectBmo { value: S::zero(), witness: DyadicRectangle::root() };
    if n == 0 {
        return best;
    }
    // x-subtree sums for each fixed y, then y-subtree sums
    let mut sx = vec![S::zero(); side * side];
    for ix in (1..side).rev() {
        for iy in 1..side {
            let mut v = b.get(ix, iy).square();
            if 2 * ix < side {
                v.add_to(&sx[2 * ix * side + iy]);
                v.add_to(&sx[(2 * ix + 1) * side + iy]);
            }
            sx[ix * side + iy] = v;
        }
    }
    let mut s = sx;
    for ix in 1..side {
        for iy in (1..side).rev() {
            if 2 * iy < side {
                let (a, c) = (s[ix * side + 2 * iy].clone(), s[ix * side + 2 * iy + 1].clone());
                s[ix * side + iy].add_to(&a);
                s[ix * side + iy].add_to(&c);
            }
        }
    }
    for ix in 1..side {
        for iy in 1..side {
            let (Elem1::Haar(i), Elem1::Haar(j)) = (elem1(ix), elem1(iy)) else { unreachable!() };
            let v = s[ix * side + iy].times(&S::sqrt2_pow(2 * (i.level() + j.level()) as i32));
            if v > best.value {
                best = RectBmo { value: v, witness: DyadicRectangle::new(i, j) };
            }
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChfStrategy {
    Exact,
    Heuristic { restarts: usize, seed: u64 },
}

impl ChfStrategy {
    pub const HEURISTIC: ChfStrategy = ChfStrategy::Heuristic { restarts: 10, seed: 0 };
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChfBmo<S> {
    /// squared norm; a lower bound certified by `witness` for the heuristic
    pub value: S,
    pub witness: DyadicOpenSet,
    pub exact: bool,
}

/// `|U|⁻¹ Σ_{R ⊆ U} (b, h_R)²`; zero for empty `U`.
pub fn chf_ratio<S: Scalar>(b: &HaarSymbol<S>, u: &DyadicOpenSet) -> Result<S> {
    if u.depth() != b.n {
        return Err(Error::ResolutionMismatch(u.depth(), b.n));
    }
    if u.is_empty() {
        return Ok(S::zero());
    }
    let mut acc = S::zero();
    for r in haar_rects(b.n) {
        if u.contains_rect(&r) {
            let c = b.coef_rect(&r);
            acc.fma(&c, &c);
        }
    }
    Ok(acc.times(&S::from_ratio(1i64 << (2 * b.n), u.count() as i64)))
}

fn cell_mask(n: u32, r: &DyadicRectangle) -> u64 {
    let side = dim1(n);
    let mut m = 0u64;
    for cx in r.x.cell_range(n) {
        for cy in r.y.cell_range(n) {
            m |= 1 << (cx * side + cy);
        }
    }
    m
}

fn mask_set(n: u32, mask: u64) -> DyadicOpenSet {
    let cells = (0..dim1(n) * dim1(n)).map(|k| mask >> k & 1 == 1).collect();
    DyadicOpenSet::from_cells(n, cells).expect("cell count matches")
}

pub fn bmo_chf<S: Scalar>(b: &HaarSymbol<S>, strategy: ChfStrategy) -> Result<ChfBmo<S>> {
    match strategy {
        ChfStrategy::Exact => chf_exact(b),
        ChfStrategy::Heuristic { restarts, seed } => chf_heuristic(b, restarts, seed),
    }
}

fn chf_exact<S: Scalar>(b: &HaarSymbol<S>) -> Result<ChfBmo<S>> {
    let n = b.n;
    if n > CHF_EXACT_MAX_DEPTH {
        return Err(Error::ExactTooLarge { max: CHF_EXACT_MAX_DEPTH, got: n });
    }
    let weighted: Vec<(u64, S)> = haar_rects(n)
        .filter_map(|r| {
            let c = b.coef_rect(&r);
            (!c.is_zero()).then(|| (cell_mask(n, &r), c.square()))
        })
        .collect();
    let cells = dim1(n) * dim1(n);
    let full = (1u64 << cells) - 1;
    let area = S::from_i64(1i64 << (2 * n));
    let mut best = (S::zero(), full);
    for mask in 1..=full {
        let mut acc = S::zero();
        for (m, w) in &weighted {
            if m & !mask == 0 {
                acc.add_to(w);
            }
        }
        if acc.is_zero() {
            continue;
        }
        let v = acc.times(&area).times(&S::from_ratio(1, mask.count_ones() as i64));
        if v > best.0 {
            best = (v, mask);
        }
    }
    Ok(ChfBmo { value: best.0, witness: mask_set(n, best.1), exact: true })
}

/// Open set as a bitset over cells, with per-rectangle masks.
struct Bits {
    words: usize,
}

impl Bits {
    fn rect(&self, n: u32, r: &DyadicRectangle) -> Vec<u64> {
        let side = dim1(n);
        let mut v = vec![0u64; self.words];
        for cx in r.x.cell_range(n) {
            for cy in r.y.cell_range(n) {
                let k = cx * side + cy;
                v[k / 64] |= 1 << (k % 64);
            }
        }
        v
    }
}

struct Landscape {
    words: usize,
    masks: Vec<Vec<u64>>,
    weights: Vec<f64>,
}

impl Landscape {
    /// Ratio of the union of the chosen support rectangles.
    fn ratio(&self, chosen: &[bool]) -> f64 {
        let mut u = vec![0u64; self.words];
        for (m, _) in self.masks.iter().zip(chosen).filter(|(_, c)| **c) {
            for (a, b) in u.iter_mut().zip(m) {
                *a |= b;
            }
        }
        let count: u32 = u.iter().map(|w| w.count_ones()).sum();
        if count == 0 {
            return 0.0;
        }
        let mut acc = 0.0;
        for (m, w) in self.masks.iter().zip(&self.weights) {
            if m.iter().zip(&u).all(|(a, b)| a & !b == 0) {
                acc += w;
            }
        }
        acc / count as f64
    }

    fn climb(&self, mut chosen: Vec<bool>) -> (f64, Vec<bool>) {
        let mut cur = self.ratio(&chosen);
        loop {
            let mut best: Option<(f64, usize)> = None;
            for k in 0..chosen.len() {
                chosen[k] = !chosen[k];
                let v = self.ratio(&chosen);
                chosen[k] = !chosen[k];
                if v > cur * (1.0 + 1e-12) && best.is_none_or(|(bv, _)| v > bv) {
                    best = Some((v, k));
                }
            }
            match best {
                Some((v, k)) => {
                    chosen[k] = !chosen[k];
                    cur = v;
                }
                None => return (cur, chosen),
            }
        }
    }
}

/// Greedy seed from the best rectangle, hill climbing by adding or removing
/// one support rectangle, plus seeded random restarts.
fn chf_heuristic<S: Scalar>(b: &HaarSymbol<S>, restarts: usize, seed: u64) -> Result<ChfBmo<S>> {
    let n = b.n;
    let support: Vec<DyadicRectangle> = haar_rects(n).filter(|r| !b.coef_rect(r).is_zero()).collect();
    if support.is_empty() {
        return Ok(ChfBmo { value: S::zero(), witness: DyadicOpenSet::full(n), exact: false });
    }
    let bits = Bits { words: (dim1(n) * dim1(n)).div_ceil(64) };
    let land = Landscape {
        words: bits.words,
        masks: support.iter().map(|r| bits.rect(n, r)).collect(),
        weights: support.iter().map(|r| b.coef_rect(r).to_f64().powi(2) * (1u64 << (2 * n)) as f64).collect(),
    };
    let rect = bmo_rect(b).witness;
    let seed_set: Vec<bool> = support.iter().map(|r| rect.contains(r)).collect();
    let mut starts = vec![seed_set];
    for k in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(k as u64));
        let density: f64 = rng.random_range(0.05..0.5);
        let mut c: Vec<bool> = (0..support.len()).map(|_| rng.random_bool(density)).collect();
        if !c.iter().any(|x| *x) {
            let pick = rng.random_range(0..c.len());
            c[pick] = true;
        }
        starts.push(c);
    }
    let results: Vec<(f64, Vec<bool>)> = starts.into_par_iter().map(|c| land.climb(c)).collect();
    let mut best: Option<ChfBmo<S>> = None;
    for (_, chosen) in results {
        let rects: Vec<DyadicRectangle> = support.iter().zip(&chosen).filter(|(_, c)| **c).map(|(r, _)| *r).collect();
        let witness = DyadicOpenSet::from_rects(n, &rects)?;
        let value = chf_ratio(b, &witness)?;
        if best.as_ref().is_none_or(|bst| value > bst.value) {
            best = Some(ChfBmo { value, witness, exact: false });
        }
    }
    Ok(best.expect("at least the greedy seed"))
}

/// Averages of `|f|` over every rectangle, grouped by `(x level, y level)`.
fn rectangle_averages<S: Scalar>(f: &GridFunction2D<S>) -> Vec<Vec<S>> {
    let n = f.n;
    let side = dim1(n);
    let mut out = vec![Vec::new(); ((n + 1) * (n + 1)) as usize];
    // x-pooled sums at each x level: rows of length `side`
    let mut pooled: Vec<S> = f.values.iter().map(|v| v.abs()).collect();
    for lx in (0..=n).rev() {
        let nx = 1usize << lx;
        if lx < n {
            let prev = pooled;
            pooled = (0..nx * side)
                .map(|k| {
                    let (kx, cy) = (k / side, k % side);
                    prev[2 * kx * side + cy].plus(&prev[(2 * kx + 1) * side + cy])
                })
                .collect();
        }
        let mut cur = pooled.clone();
        for ly in (0..=n).rev() {
            let ny = 1usize << ly;
            if ly < n {
                let width = 2 * ny;
                cur = (0..nx * ny).map(|k| cur[(k / ny) * width + 2 * (k % ny)].plus(&cur[(k / ny) * width + 2 * (k % ny) + 1])).collect();
            }
            let scale = S::sqrt2_pow(-2 * (2 * n - lx - ly) as i32);
            out[(lx * (n + 1) + ly) as usize] = cur.iter().map(|v| v.times(&scale)).collect();
        }
    }
    out
}

/// `M_s f(x) = max_{R ∋ x} ⟨|f|⟩_R` over dyadic rectangles.
pub fn strong_maximal<S: Scalar>(f: &GridFunction2D<S>) -> GridFunction2D<S> {
    let n = f.n;
    let avg = rectangle_averages(f);
    GridFunction2D::from_fn(n, |cx, cy| {
        let mut best = S::zero();
        for lx in 0..=n {
            for ly in 0..=n {
                let (kx, ky) = (cx >> (n - lx), cy >> (n - ly));
                let v = &avg[(lx * (n + 1) + ly) as usize][kx * (1 << ly) + ky];
                if *v > best {
                    best = v.clone();
                }
            }
        }
        best
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Enlargement {
    pub set: DyadicOpenSet,
    pub base_count: usize,
    pub count: usize,
    /// `|U| / |U₀|`
    pub ratio: f64,
}

/// `U = {M_s 𝟏_{U₀} ≥ λ}`.
pub fn enlarge(u0: &DyadicOpenSet, lambda: Rational64) -> Result<Enlargement> {
    if u0.is_empty() {
        return Err(Error::InvalidParameter("cannot enlarge the empty set".into()));
    }
    if *lambda.numer() <= 0 || lambda > Rational64::from_integer(1) {
        return Err(Error::InvalidParameter(format!("threshold must lie in (0, 1], got {lambda}")));
    }
    let n = u0.depth();
    let side = dim1(n);
    let (num, den) = (*lambda.numer() as u128, *lambda.denom() as u128);
    let mut cells = vec![false; side * side];
    for r in DyadicRectangle::all(n) {
        let total = (r.x.cell_range(n).len() * r.y.cell_range(n).len()) as u128;
        if u0.count_in(&r) as u128 * den >= num * total {
            for cx in r.x.cell_range(n) {
                for cy in r.y.cell_range(n) {
                    cells[cx * side + cy] = true;
                }
            }
        }
    }
    let set = DyadicOpenSet::from_cells(n, cells)?;
    let (base_count, count) = (u0.count(), set.count());
    Ok(Enlargement { ratio: count as f64 / base_count as f64, set, base_count, count })
}

/// `b = α₀ + β` with `α₀` the Haar rectangles inside `U`.
pub fn restrict_symbol<S: Scalar>(b: &HaarSymbol<S>, u: &DyadicOpenSet) -> Result<(HaarSymbol<S>, HaarSymbol<S>)> {
    if u.depth() != b.n {
        return Err(Error::ResolutionMismatch(u.depth(), b.n));
    }
    let alpha = b.filtered(|x, y| match (x, y) {
        (Elem1::Haar(i), Elem1::Haar(j)) => u.contains_rect(&DyadicRectangle::new(i, j)),
        _ => false,
    });
    let beta = b.minus(&alpha);
    Ok((alpha, beta))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmallnessReport<S> {
    pub rect: DyadicRectangle,
    pub star: bool,
    /// `(𝟏_U, T₁1̃_I ⊗ 1̃_J)`
    pub horizontal: S,
    /// `(𝟏_U, 1̃_I ⊗ T₂1̃_J)`
    pub vertical: S,
    /// `(𝟏_U, T₁1̃_I ⊗ T₂1̃_J)`
    pub diagonal: S,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SmallnessClass {
    /// `|horizontal| ≤ ε₁`
    pub horizontal_small: bool,
    pub vertical_small: bool,
    /// `|diagonal| < ε₂`
    pub diagonal_small: bool,
}

impl<S: Scalar> SmallnessReport<S> {
    pub fn classify(&self, eps1: f64, eps2: f64) -> SmallnessClass {
        SmallnessClass {
            horizontal_small: self.horizontal.to_f64().abs() <= eps1,
            vertical_small: self.vertical.to_f64().abs() <= eps1,
            diagonal_small: self.diagonal.to_f64().abs() < eps2,
        }
    }
}

/// Haar coefficients of `𝟏_U`, reused across rectangles.
pub struct SmallnessContext<S> {
    pub set: DyadicOpenSet,
    coeffs: HaarSymbol<S>,
}

impl<S: Scalar> SmallnessContext<S> {
    pub fn new(u: &DyadicOpenSet) -> Self {
        SmallnessContext { set: u.clone(), coeffs: GridFunction2D::<S>::indicator(u).analyze() }
    }

    fn shifted(&self, i: &DyadicInterval, star: bool) -> Sparse<S> {
        let n = self.set.depth();
        shift_sparse(Parity::Even, star, n, &tilde1(n, i))
    }

    pub fn report(&self, r: &DyadicRectangle, star: bool) -> Result<SmallnessReport<S>> {
        let n = self.set.depth();
        r.check_depth(n)?;
        let (ti, tj) = (tilde1::<S>(n, &r.x), tilde1::<S>(n, &r.y));
        let (si, sj) = (self.shifted(&r.x, star), self.shifted(&r.y, star));
        Ok(SmallnessReport {
            rect: *r,
            star,
            horizontal: pair(&self.coeffs, &si, &tj),
            vertical: pair(&self.coeffs, &ti, &sj),
            diagonal: pair(&self.coeffs, &si, &sj),
        })
    }
}

pub fn smallness_coefficients<S: Scalar>(u: &DyadicOpenSet, r: &DyadicRectangle, star: bool) -> Result<SmallnessReport<S>> {
    SmallnessContext::new(u).report(r, star)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::GridFunction1D;
    use crate::operators::tests::random_symbol;
    use crate::scalar::QSqrt2;
    use proptest::prelude::*;
    use rand::Rng;

    type Q = QSqrt2;

    fn rect(s: &str) -> DyadicRectangle {
        s.parse().unwrap()
    }

    fn brute_rect_bmo(b: &HaarSymbol<Q>) -> Q {
        let mut best = Q::zero();
        for r0 in DyadicRectangle::all(b.n) {
            let mut acc = Q::zero();
            for r in haar_rects(b.n).filter(|r| r0.contains(r)) {
                acc.add_to(&b.coef_rect(&r).square());
            }
            let v = acc.times(&Q::sqrt2_pow(2 * r0.area_exponent() as i32));
            if v > best {
                best = v;
            }
        }
        best
    }

    #[test]
    fn rect_bmo_single_and_zero() {
        let n = 3;
        let r = rect("1:1|2:3");
        let b = HaarSymbol::single(n, &r, Q::one()).unwrap();
        let got = bmo_rect(&b);
        assert_eq!(got.value, Q::from_i64(8));
        assert_eq!(got.witness, r);
        assert_eq!(bmo_rect(&HaarSymbol::<Q>::zeros(n)).value, Q::zero());
    }

    #[test]
    fn rect_bmo_matches_enumeration() {
        for seed in 0..6 {
            let b = random_symbol(3, 70 + seed, true);
            assert_eq!(bmo_rect(&b).value, brute_rect_bmo(&b), "{seed}");
        }
    }

    #[test]
    fn chf_single_rectangle() {
        let b = HaarSymbol::single(2, &rect("1:0|0:0"), Q::from_i64(3)).unwrap();
        let e = bmo_chf(&b, ChfStrategy::Exact).unwrap();
        assert_eq!(e.value, bmo_rect(&b).value);
        assert_eq!(e.witness, DyadicOpenSet::from_rects(2, &[rect("1:0|0:0")]).unwrap());
        assert!(bmo_chf(&random_symbol(3, 1, false), ChfStrategy::Exact).is_err());
        let z = bmo_chf(&HaarSymbol::<Q>::zeros(2), ChfStrategy::Exact).unwrap();
        assert_eq!(z.value, Q::zero());
    }

    #[test]
    fn chf_exact_dominates_rect_and_is_certified() {
        for seed in 0..5 {
            let b = random_symbol(2, 300 + seed, true);
            let e = bmo_chf(&b, ChfStrategy::Exact).unwrap();
            assert!(e.value >= bmo_rect(&b).value);
            assert_eq!(chf_ratio(&b, &e.witness).unwrap(), e.value);
        }
    }

    #[test]
    fn chf_heuristic_matches_exact_small_depth() {
        let mut misses = 0;
        for seed in 0..120 {
            let b = random_symbol(2, 1000 + seed, seed % 3 != 0).convert::<f64>();
            let e = bmo_chf(&b, ChfStrategy::Exact).unwrap().value;
            let h = bmo_chf(&b, ChfStrategy::Heuristic { restarts: 10, seed }).unwrap().value;
            assert!(h <= e + 1e-12);
            if (h - e).abs() > 1e-9 * e.max(1.0) {
                misses += 1;
            }
        }
        assert_eq!(misses, 0);
    }

    #[test]
    fn maximal_function_examples() {
        let n = 2;
        let one = GridFunction2D::<Q>::constant(n, Q::one());
        assert_eq!(strong_maximal(&one), one);
        let quarter = DyadicOpenSet::from_rects(n, &[rect("1:0|1:0")]).unwrap();
        let m = strong_maximal(&GridFunction2D::<Q>::indicator(&quarter));
        let side = dim1(n);
        for cx in 2..4 {
            for cy in 2..4 {
                assert_eq!(m.values[cx * side + cy], Q::from_ratio(1, 4));
            }
        }
    }

    fn brute_maximal(f: &GridFunction2D<Q>) -> GridFunction2D<Q> {
        let n = f.n;
        let abs = f.map(|v| v.abs());
        GridFunction2D::from_fn(n, |cx, cy| {
            let cell = crate::open_set::cell_rect(n, cx, cy);
            DyadicRectangle::all(n)
                .filter(|r| r.contains(&cell))
                .map(|r| abs.average_over(&r).unwrap())
                .fold(Q::zero(), Q::max_of)
        })
    }

    #[test]
    fn maximal_function_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 0..=3 {
            let vals: Vec<Q> = (0..dim1(n) * dim1(n)).map(|_| Q::from_ratio(rng.random_range(-20..=20), 7)).collect();
            let f = GridFunction2D::new(n, vals).unwrap();
            let m = strong_maximal(&f);
            assert_eq!(m, brute_maximal(&f));
            assert!(m.values.iter().zip(&f.values).all(|(a, b)| *a >= b.abs()));
        }
    }

    #[test]
    fn enlarge_examples() {
        let sixteenth = Rational64::new(1, 16);
        let full = enlarge(&DyadicOpenSet::full(3), sixteenth).unwrap();
        assert_eq!(full.set, DyadicOpenSet::full(3));
        assert_eq!(full.ratio, 1.0);
        let corner = DyadicOpenSet::from_rects(2, &[crate::open_set::cell_rect(2, 0, 0)]).unwrap();
        let e = enlarge(&corner, sixteenth).unwrap();
        let m = strong_maximal(&GridFunction2D::<Q>::indicator(&corner));
        let want: Vec<bool> = m.values.iter().map(|v| *v >= Q::from_ratio(1, 16)).collect();
        assert_eq!(e.set.cells(), &want[..]);
        // every cell sees the whole square, where the average is exactly 1/16
        assert_eq!(e.count, 16);
        assert!(enlarge(&DyadicOpenSet::empty(2), sixteenth).is_err());
    }

    fn random_set(n: u32, seed: u64, p: f64) -> DyadicOpenSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cells: Vec<bool> = (0..dim1(n) * dim1(n)).map(|_| rng.random_bool(p)).collect();
        DyadicOpenSet::from_cells(n, cells).unwrap()
    }

    proptest! {
        #[test]
        fn enlarge_monotone_and_stable(seed in 0u64..10_000, p in 0.05f64..0.6) {
            let n = 4;
            let a = random_set(n, seed, p);
            prop_assume!(!a.is_empty());
            let extra = random_set(n, seed + 1, 0.1);
            let b = a.union(&extra).unwrap();
            let lam = Rational64::new(1, 16);
            let ea = enlarge(&a, lam).unwrap().set;
            let eb = enlarge(&b, lam).unwrap().set;
            prop_assert!(a.is_subset(&ea));
            prop_assert!(ea.is_subset(&eb));
            prop_assert!(ea.is_subset(&enlarge(&ea, lam).unwrap().set));
        }

        #[test]
        fn restriction_splits_symbol(seed in 0u64..500, p in 0.1f64..0.9) {
            let n = 3;
            let b = random_symbol(n, seed, true);
            let u = random_set(n, seed + 7, p);
            let (alpha, beta) = restrict_symbol(&b, &u).unwrap();
            prop_assert_eq!(alpha.plus(&beta), b);
            for r in beta.haar_support() {
                prop_assert!(u.rect_meets_complement(&r));
            }
            for r in alpha.haar_support() {
                prop_assert!(u.contains_rect(&r));
            }
        }
    }

    #[test]
    fn restriction_trivial_sets() {
        let b = random_symbol(3, 4, true);
        let (a, z) = restrict_symbol(&b, &DyadicOpenSet::full(3)).unwrap();
        assert_eq!(a, b.filtered(|x, y| matches!((x, y), (Elem1::Haar(_), Elem1::Haar(_)))));
        assert!(z.filtered(|x, y| matches!((x, y), (Elem1::Haar(_), Elem1::Haar(_)))).is_zero());
        let (a, _) = restrict_symbol(&b, &DyadicOpenSet::empty(3)).unwrap();
        assert!(a.is_zero());
    }

    /// `(𝟏_U, u ⊗ v)` on the grid from synthesized one-variable functions.
    fn grid_pair(u: &DyadicOpenSet, x: &[Q], y: &[Q]) -> Q {
        let n = u.depth();
        let (gx, gy) = (GridFunction1D::from_coeffs(n, x), GridFunction1D::from_coeffs(n, y));
        let f = GridFunction2D::tensor(&gx, &gy).unwrap();
        GridFunction2D::<Q>::indicator(u).inner_product(&f).unwrap()
    }

    #[test]
    fn smallness_matches_grid_evaluation() {
        let n = 3;
        let u = random_set(n, 17, 0.6);
        let ctx = SmallnessContext::<Q>::new(&u);
        let dense = |v: Sparse<Q>| crate::haar::sparse_to_dense(dim1(n), &v);
        for r in DyadicRectangle::all(n).step_by(5) {
            for star in [false, true] {
                let rep = ctx.report(&r, star).unwrap();
                let (ti, tj) = (tilde1::<Q>(n, &r.x), tilde1::<Q>(n, &r.y));
                let si = shift_sparse(Parity::Even, star, n, &ti);
                let sj = shift_sparse(Parity::Even, star, n, &tj);
                assert_eq!(rep.horizontal, grid_pair(&u, &dense(si.clone()), &dense(tj)));
                assert_eq!(rep.vertical, grid_pair(&u, &dense(ti), &dense(sj.clone())));
                assert_eq!(rep.diagonal, grid_pair(&u, &dense(si), &dense(sj)));
            }
        }
    }

    #[test]
    fn smallness_full_and_empty() {
        let n = 3;
        for r in DyadicRectangle::all(n) {
            for star in [false, true] {
                let full = smallness_coefficients::<Q>(&DyadicOpenSet::full(n), &r, star).unwrap();
                assert!(full.horizontal.is_zero() && full.vertical.is_zero() && full.diagonal.is_zero());
                let empty = smallness_coefficients::<Q>(&DyadicOpenSet::empty(n), &r, star).unwrap();
                assert!(empty.horizontal.is_zero() && empty.vertical.is_zero() && empty.diagonal.is_zero());
            }
        }
    }

    #[test]
    fn horizontal_equality_when_parent_inside() {
        let n = 3;
        for seed in 0..40 {
            let u = random_set(n, 900 + seed, 0.75);
            let ctx = SmallnessContext::<Q>::new(&u);
            for r in haar_rects(n).filter(|r| r.x.level() >= 1 && r.y.level() >= 1) {
                if u.contains_rect(&r) && u.contains_rect(&r.parent().unwrap()) {
                    let here = ctx.report(&r, false).unwrap().horizontal;
                    let up = ctx.report(&r.r1().unwrap(), false).unwrap().horizontal;
                    assert_eq!(here, up, "{r}");
                }
            }
        }
    }
}
