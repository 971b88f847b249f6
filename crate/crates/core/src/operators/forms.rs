//! Explicit sums built from the commutator: the `P` operators of a test
//! function `p ⊗ h_{J''}`, the four-line `ππ` form, the `x_{K,L}`
//! coefficients, and the one-variable form `A_f − B_f`.

use std::collections::BTreeMap;

use crate::dyadic::{DyadicInterval, Parity};
use crate::error::{Error, Result};
use crate::haar::{dim1, haar1, haar_idx, haar_intervals, haar_on, idx1, sparse_dot, tilde1, Elem1, HaarSymbol, Sparse};
use crate::linalg::SparseMatrix;
use crate::open_set::DyadicOpenSet;
use crate::scalar::Scalar;

use super::{mult_1d, shift_1d, shift_acts, shift_sparse};

fn t<S: Scalar>(n: u32, v: &Sparse<S>) -> Sparse<S> {
    shift_sparse(Parity::Even, false, n, v)
}
fn t_adj<S: Scalar>(n: u32, v: &Sparse<S>) -> Sparse<S> {
    shift_sparse(Parity::Even, true, n, v)
}

/// `(f, u ⊗ v)` for a coefficient vector `f`.
pub fn pair<S: Scalar>(f: &HaarSymbol<S>, u: &Sparse<S>, v: &Sparse<S>) -> S {
    let side = f.side();
    let mut acc = S::zero();
    for (a, x) in u {
        for (c, y) in v {
            let fv = &f.coeffs[a * side + c];
            if !fv.is_zero() {
                acc.fma(fv, &x.times(y));
            }
        }
    }
    acc
}

/// One-variable coefficients of `b_J = (b, · ⊗ h_J)`.
pub fn x_slice<S: Scalar>(b: &HaarSymbol<S>, j: &DyadicInterval) -> Vec<S> {
    let side = b.side();
    match haar_idx(b.n, j) {
        Some(iy) => (0..side).map(|ix| b.get(ix, iy).clone()).collect(),
        None => vec![S::zero(); side],
    }
}

/// `[T, M_u] p` in one variable.
pub fn commutator_1d_apply<S: Scalar>(n: u32, u: &[S], p: &[S]) -> Vec<S> {
    let s = shift_1d::<S>(Parity::Even, n);
    let m = mult_1d(n, u);
    let a = s.apply(&m.apply(p));
    let b = m.apply(&s.apply(p));
    a.iter().zip(&b).map(|(x, y)| x.minus(y)).collect()
}

/// `[T, M_u]` in one variable.
pub fn commutator_1d<S: Scalar>(n: u32, u: &[S]) -> SparseMatrix<S> {
    let s = shift_1d::<S>(Parity::Even, n);
    let m = mult_1d(n, u);
    s.matmul(&m).unwrap().sub(&m.matmul(&s).unwrap()).unwrap()
}

#[derive(Clone, Debug, PartialEq)]
pub struct POperators<S> {
    pub p1: HaarSymbol<S>,
    pub p2: HaarSymbol<S>,
    pub p3: HaarSymbol<S>,
    pub p4: HaarSymbol<S>,
    pub p5: HaarSymbol<S>,
    pub p_even: HaarSymbol<S>,
}

impl<S: Scalar> POperators<S> {
    pub fn sum(&self) -> HaarSymbol<S> {
        self.p1.plus(&self.p2).plus(&self.p3).plus(&self.p4).plus(&self.p5)
    }
}

/// The five operators of `𝒯^b(p ⊗ h_{J''})` and the even-`J` selection
/// `P_even` from `P₄ + P₅`. `p` is given by its one-variable coefficients.
pub fn p_operators<S: Scalar>(b: &HaarSymbol<S>, p: &[S], j2: &DyadicInterval) -> Result<POperators<S>> {
    let n = b.n;
    if haar_idx(n, j2).is_none() {
        return Err(Error::LevelOverflow { level: j2.level(), depth: n.saturating_sub(1) });
    }
    let comm = |j: &DyadicInterval| -> Sparse<S> {
        let c = commutator_1d_apply(n, &x_slice(b, j), p);
        crate::haar::dense_to_sparse(&c)
    };
    let one = S::one();
    let mut p1 = HaarSymbol::zeros(n);
    for j in j2.descendants(n - 1).filter(|j| j.is_even()) {
        let th = t(n, &haar1(n, &j));
        p1.add_tensor(&haar_on(j2, &j), &comm(&j), &th);
    }
    let mut p2 = HaarSymbol::zeros(n);
    p2.add_tensor(&one, &comm(j2), &t(n, &tilde1(n, j2)));

    let (mut p3, mut p4, mut p5, mut p_even) = (HaarSymbol::zeros(n), HaarSymbol::zeros(n), HaarSymbol::zeros(n), HaarSymbol::zeros(n));
    if shift_acts(Parity::Even, n, j2) {
        let (jm, jp) = (j2.minus(), j2.plus());
        let kids: Sparse<S> = [jm, jp].iter().map(|c| (idx1(Elem1::Haar(*c)), S::one())).collect();
        p3.add_tensor(&-S::sqrt2_pow(j2.level() as i32), &comm(j2), &kids);
        for (child, sign) in [(jp, -1i64), (jm, 1)] {
            let s = S::from_i64(sign);
            for j in child.descendants(n - 1) {
                let c = s.times(&haar_on(&child, &j));
                p4.add_tensor(&c, &comm(&j), &haar1(n, &j));
                if j.is_even() {
                    p_even.add_tensor(&c, &comm(&j), &haar1(n, &j));
                }
            }
            p5.add_tensor(&s, &comm(&child), &tilde1(n, &child));
            let evens: Sparse<S> = child
                .ancestors()
                .filter(|a| a.is_even())
                .map(|a| (idx1(Elem1::Haar(a)), haar_on(&a, &child)))
                .collect();
            p_even.add_tensor(&s, &comm(&child), &evens);
        }
    }
    Ok(POperators { p1, p2, p3, p4, p5, p_even })
}

/// The four lines `I, II, III, IV` of the `ππ` part applied to `f`
/// (`I − II − III + IV` is the whole part). Plain: outputs carry `T`, windows
/// `T*`; `star` swaps them.
pub fn pp_form<S: Scalar>(alpha0: &HaarSymbol<S>, f: &HaarSymbol<S>, star: bool) -> Result<[HaarSymbol<S>; 4]> {
    let n = alpha0.n;
    if f.n != n {
        return Err(Error::ResolutionMismatch(n, f.n));
    }
    let out_shift = |v: &Sparse<S>| if star { t_adj(n, v) } else { t(n, v) };
    let win_shift = |v: &Sparse<S>| if star { t(n, v) } else { t_adj(n, v) };
    let mut lines: [HaarSymbol<S>; 4] = std::array::from_fn(|_| HaarSymbol::zeros(n));
    for r in alpha0.haar_support() {
        let c = alpha0.coef_rect(&r);
        let (hi, hj) = (haar1::<S>(n, &r.x), haar1::<S>(n, &r.y));
        let (ti, tj) = (tilde1::<S>(n, &r.x), tilde1::<S>(n, &r.y));
        let (thi, thj) = (out_shift(&hi), out_shift(&hj));
        let (wti, wtj) = (win_shift(&ti), win_shift(&tj));
        lines[0].add_tensor(&c.times(&pair(f, &ti, &tj)), &thi, &thj);
        lines[1].add_tensor(&c.times(&pair(f, &wti, &tj)), &hi, &thj);
        lines[2].add_tensor(&c.times(&pair(f, &ti, &wtj)), &thi, &hj);
        lines[3].add_tensor(&c.times(&pair(f, &wti, &wtj)), &hi, &hj);
    }
    Ok(lines)
}

pub fn pp_combined<S: Scalar>(lines: &[HaarSymbol<S>; 4]) -> HaarSymbol<S> {
    lines[0].minus(&lines[1]).minus(&lines[2]).plus(&lines[3])
}

/// `x_{K,L}` for every Haar pair with `K̂ × L̂ ⊆ U`, the coefficient of
/// `h_K ⊗ h_L` in the plain `ππ` form with `f = 𝟏_U`. Windows carry `T*`.
pub fn paraproduct_commutator_coefficients<S: Scalar>(b: &HaarSymbol<S>, u: &DyadicOpenSet) -> Result<BTreeMap<(DyadicInterval, DyadicInterval), S>> {
    let n = b.n;
    if u.depth() != n {
        return Err(Error::ResolutionMismatch(n, u.depth()));
    }
    let f = crate::haar::GridFunction2D::<S>::indicator(u).analyze();
    let mut out = BTreeMap::new();
    for k in haar_intervals(n).filter(|k| k.level() >= 1) {
        for l in haar_intervals(n).filter(|l| l.level() >= 1) {
            let (kh, lh) = (k.parent()?, l.parent()?);
            if !u.contains_rect(&crate::dyadic::DyadicRectangle::new(kh, lh)) {
                continue;
            }
            out.insert((k, l), x_coefficient(b, &f, &k, &l));
        }
    }
    Ok(out)
}

/// The four summands of `x_{K,L}` against a general `f`.
pub fn x_coefficient<S: Scalar>(b: &HaarSymbol<S>, f: &HaarSymbol<S>, k: &DyadicInterval, l: &DyadicInterval) -> S {
    let n = b.n;
    let (kh, lh) = (k.parent().unwrap(), l.parent().unwrap());
    let sk = S::from_i64(k.hat_sign().unwrap() as i64);
    let sl = S::from_i64(l.hat_sign().unwrap() as i64);
    let (k_odd, l_odd) = (!k.is_even(), !l.is_even());
    let mut x = S::zero();
    if k_odd && l_odd {
        x.add_to(&sk.times(&sl).times(&b.coef(&kh, &lh)).times(&pair(f, &tilde1(n, &kh), &tilde1(n, &lh))));
    }
    if k_odd {
        let w = pair(f, &tilde1(n, &kh), &t_adj(n, &tilde1(n, l)));
        x = x.minus(&sk.times(&b.coef(&kh, l)).times(&w));
    }
    if l_odd {
        let w = pair(f, &t_adj(n, &tilde1(n, k)), &tilde1(n, &lh));
        x = x.minus(&sl.times(&b.coef(k, &lh)).times(&w));
    }
    let w = pair(f, &t_adj(n, &tilde1(n, k)), &t_adj(n, &tilde1(n, l)));
    x.add_to(&b.coef(k, l).times(&w));
    x
}

/// `A_f = Σ_{I⊆I₀} (b,h_I)⟨T*f⟩_I h_I` and `B_f = Σ_{I⊆I₀} (b,h_I)⟨f⟩_I T*h_I`.
pub fn one_pt_pi_form<S: Scalar>(alpha0: &[S], f: &[S], i0: &DyadicInterval, n: u32) -> Result<(Vec<S>, Vec<S>)> {
    let d = dim1(n);
    if alpha0.len() != d || f.len() != d {
        return Err(Error::InvalidParameter(format!("one-variable vectors must have length {d}")));
    }
    for (k, c) in alpha0.iter().enumerate() {
        let inside = match crate::haar::elem1(k) {
            Elem1::Const => false,
            Elem1::Haar(i) => i0.contains(&i),
        };
        if !c.is_zero() && !inside {
            return Err(Error::InvalidParameter(format!("symbol coefficient {k} lies outside {i0}")));
        }
    }
    let s = shift_1d::<S>(Parity::Even, n);
    let tf = s.apply_transpose(f);
    let mut a = vec![S::zero(); d];
    let mut b = vec![S::zero(); d];
    for i in haar_intervals(n).filter(|i| i0.contains(i)) {
        let k = idx1(Elem1::Haar(i));
        if alpha0[k].is_zero() {
            continue;
        }
        let win = tilde1::<S>(n, &i);
        a[k].fma(&alpha0[k], &sparse_dot(&win, &tf));
        let avg = sparse_dot(&win, f);
        for (j, v) in t_adj(n, &haar1(n, &i)) {
            b[j].fma(&alpha0[k].times(&avg), &v);
        }
    }
    Ok((a, b))
}

/// The uncle of `I₀`: `h` of the sibling for odd `I₀`, of the parent's
/// sibling for even `I₀`.
pub fn uncle_function<S: Scalar>(i0: &DyadicInterval, n: u32) -> Result<Vec<S>> {
    let u = if i0.is_even() { i0.parent()?.sibling()? } else { i0.sibling()? };
    let mut v = vec![S::zero(); dim1(n)];
    let k = haar_idx(n, &u).ok_or(Error::LevelOverflow { level: u.level(), depth: n.saturating_sub(1) })?;
    v[k] = S::one();
    Ok(v)
}

/// `c_I = ⟨T* 𝟏_{I₀}⟩_{Î}` for `Î ⊆ I₀`.
pub fn c_coefficient<S: Scalar>(i: &DyadicInterval, i0: &DyadicInterval, n: u32) -> Result<S> {
    let ih = i.parent()?;
    if !i0.contains(&ih) || i.level() >= n {
        return Err(Error::InvalidParameter(format!("need parent of {i} inside {i0} and {i} within depth {n}")));
    }
    let ind = tilde1::<S>(n, i0);
    let len = S::sqrt2_pow(-2 * i0.level() as i32);
    let ind: Sparse<S> = ind.into_iter().map(|(k, v)| (k, v.times(&len))).collect();
    let g = crate::haar::sparse_to_dense(dim1(n), &t_adj(n, &ind));
    Ok(sparse_dot(&tilde1(n, &ih), &g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::DyadicRectangle;
    use crate::haar::{haar_rects, GridFunction2D};
    use crate::operators::parts::{part_matrix, Part};
    use crate::operators::tests::random_symbol;
    use crate::operators::{commutator_operator, Shifts};
    use crate::scalar::QSqrt2;
    use rand::{Rng, SeedableRng};

    type Q = QSqrt2;

    fn rand_1d(n: u32, seed: u64) -> Vec<Q> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..dim1(n)).map(|_| Q::from_ratio(rng.random_range(-64..=64), 64)).collect()
    }

    fn embed(n: u32, p: &[Q], j: &DyadicInterval) -> HaarSymbol<Q> {
        HaarSymbol::tensor_sparse(n, &crate::haar::dense_to_sparse(p), &haar1(n, j))
    }

    #[test]
    fn p_operators_sum_and_orthogonality() {
        let n = 3;
        let b = random_symbol(n, 41, true);
        let t = commutator_operator(&b, Shifts::PLAIN);
        let p = rand_1d(n, 42);
        for j2 in haar_intervals(n) {
            let ops = p_operators(&b, &p, &j2).unwrap();
            let want = t.apply_symbol(&embed(n, &p, &j2));
            assert_eq!(ops.sum(), want, "{j2}");
            if j2.is_even() {
                let rest = want.minus(&ops.p_even);
                assert!(rest.dot(&ops.p_even).is_zero(), "{j2}");
                // the even selection is the even-y Haar projection of P₄ + P₅
                let proj = ops.p4.plus(&ops.p5).filtered(|_, y| matches!(y, Elem1::Haar(j) if j.is_even()));
                assert_eq!(ops.p_even, proj);
            } else {
                assert!(ops.p1.dot(&ops.p2).is_zero(), "{j2}");
                assert!(ops.p3.is_zero() && ops.p4.is_zero() && ops.p5.is_zero());
            }
        }
    }

    #[test]
    fn pp_form_matches_pipi_part() {
        let n = 3;
        for star in [false, true] {
            let b = random_symbol(n, 51, false);
            let f = random_symbol(n, 52, true);
            let lines = pp_form(&b, &f, star).unwrap();
            let part = part_matrix(&b, Part::PiPi, Shifts::new(star));
            assert_eq!(pp_combined(&lines), part.apply_symbol(&f));
        }
    }

    #[test]
    fn pp_form_single_even_even() {
        let n = 3;
        let r: DyadicRectangle = "0:0|2:1".parse().unwrap();
        let a = HaarSymbol::<Q>::single(n, &r, Q::from_ratio(5, 8)).unwrap();
        let u = crate::open_set::DyadicOpenSet::full(n);
        let f = GridFunction2D::<Q>::indicator(&u).analyze();
        let lines = pp_form(&a, &f, false).unwrap();
        let want = HaarSymbol::tensor_sparse(n, &t(n, &haar1(n, &r.x)), &t(n, &haar1(n, &r.y))).scaled(&Q::from_ratio(5, 8));
        assert_eq!(lines[0], want);
        // mean zero on the support kills line I
        let g = GridFunction2D::<Q>::basis_function(crate::haar::BasisKind::H, &"1:0|0:0".parse().unwrap(), n).unwrap().analyze();
        let b2 = HaarSymbol::<Q>::single(n, &"0:0|0:0".parse().unwrap(), Q::one()).unwrap();
        assert!(pp_form(&b2, &g, false).unwrap()[0].is_zero());
    }

    #[test]
    fn x_coefficients_match_pp_form() {
        let n = 3;
        let b = random_symbol(n, 61, false);
        let u = DyadicOpenSet::from_rects(n, &["1:0|0:0".parse().unwrap(), "0:0|2:3".parse().unwrap()]).unwrap();
        let f = GridFunction2D::<Q>::indicator(&u).analyze();
        let pp = pp_combined(&pp_form(&b, &f, false).unwrap());
        let xs = paraproduct_commutator_coefficients(&b, &u).unwrap();
        assert!(!xs.is_empty());
        for ((k, l), x) in &xs {
            assert_eq!(&pp.coef(k, l), x, "{k} {l}");
        }
        assert!(paraproduct_commutator_coefficients(&HaarSymbol::<Q>::zeros(n), &u).unwrap().values().all(|v| v.is_zero()));
    }

    #[test]
    fn x_first_summand_on_full_square() {
        let n = 3;
        let u = DyadicOpenSet::full(n);
        let f = GridFunction2D::<Q>::indicator(&u).analyze();
        for r in haar_rects(n).filter(|r| r.x.level() >= 1 && r.y.level() >= 1 && !r.x.is_even() && !r.y.is_even()) {
            let (kh, lh) = (r.x.parent().unwrap(), r.y.parent().unwrap());
            assert_eq!(pair(&f, &tilde1(n, &kh), &tilde1(n, &lh)), Q::one());
        }
    }

    #[test]
    fn uncle_kills_b_term() {
        for n in 2..=5 {
            for i0 in haar_intervals(n).filter(|i| !i.is_even()) {
                let f = uncle_function::<Q>(&i0, n).unwrap();
                let alpha: Vec<Q> = rand_1d(n, i0.pos() + 7)
                    .into_iter()
                    .enumerate()
                    .map(|(k, v)| match crate::haar::elem1(k) {
                        Elem1::Haar(i) if i0.contains(&i) => v,
                        _ => Q::zero(),
                    })
                    .collect();
                let (a, b) = one_pt_pi_form(&alpha, &f, &i0, n).unwrap();
                assert!(b.iter().all(|v| v.is_zero()), "{i0}");
                // T*h_{sibling} = s(sibling) h_{Î₀}, which is −|Î₀|^{-1/2} on I₀
                let s = shift_1d::<Q>(Parity::Even, n);
                let tf = s.apply_transpose(&f);
                let want = if i0.parent().unwrap().is_even() { -Q::sqrt2_pow(i0.level() as i32 - 1) } else { Q::zero() };
                for i in haar_intervals(n).filter(|i| i0.contains(i)) {
                    assert_eq!(sparse_dot(&tilde1(n, &i), &tf), want);
                    let k = idx1(Elem1::Haar(i));
                    assert_eq!(a[k], alpha[k].times(&want));
                }
            }
        }
    }

    #[test]
    fn one_pt_form_zero_symbol_and_domain() {
        let n = 3;
        let i0: DyadicInterval = "1:1".parse().unwrap();
        let (a, b) = one_pt_pi_form(&vec![Q::zero(); 8], &rand_1d(n, 1), &i0, n).unwrap();
        assert!(a.iter().chain(&b).all(|v| v.is_zero()));
        let mut bad = vec![Q::zero(); 8];
        bad[2] = Q::one();
        assert!(one_pt_pi_form(&bad, &rand_1d(n, 1), &i0, n).is_err());
    }

    #[test]
    fn c_coefficient_series() {
        // odd strict ancestors A of I₀ contribute s·2^{ℓ_A − ℓ₀ − 1/2}
        let n = 6;
        for i0 in DyadicInterval::all(n - 2) {
            let mut want = Q::zero();
            for a in i0.ancestors().filter(|a| !a.is_even()) {
                let sign = a.side_of(&i0) * a.hat_sign().unwrap() * a.parent().unwrap().side_of(&i0);
                let mag = Q::sqrt2_pow(2 * a.level() as i32 - 1 - 2 * i0.level() as i32);
                want.add_to(&mag.times(&Q::from_i64(sign as i64)));
            }
            for i in i0.descendants(n - 1) {
                if i0.contains(&i.parent().unwrap()) {
                    assert_eq!(c_coefficient::<Q>(&i, &i0, n).unwrap(), want, "{i} {i0}");
                }
            }
        }
    }

    #[test]
    fn commutator_1d_matches_apply() {
        let n = 3;
        let u = rand_1d(n, 3);
        let p = rand_1d(n, 4);
        assert_eq!(commutator_1d(n, &u).apply(&p), commutator_1d_apply(n, &u, &p));
    }
}
