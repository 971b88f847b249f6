//! Autocorrelation of a thin strip indicator on `[0,2]²` and the scaling of
//! its quadrant-restricted `L²` norms.
//!
//! With unitary Plancherel, `‖α‖₂ = ‖ψ‖₂` and `𝓕|α|²` is the autocorrelation
//! of `ψ`, so every norm below is a sum over autocorrelation values.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum Error {
    #[error("strip width {0} must lie in (0, 1/4]")]
    InvalidWidth(f64),
    #[error("grid step {h} does not resolve width {eps}: need h <= eps/8")]
    UnderResolved { eps: f64, h: f64 },
    #[error("grid level {0} too fine")]
    TooFine(u32),
    #[error("cannot take the logarithm of {0}")]
    NonPositive(f64),
    #[error("need at least 4 grid points, got {0}")]
    TooFewPoints(usize),
    #[error("grid is not geometric")]
    NotGeometric,
    #[error("step ratio {0} must be at least 1")]
    InvalidRatio(f64),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Finest accepted grid level.
pub const MAX_LEVEL: u32 = 14;

/// `ψ = 𝟏{ξ₁, ξ₂ ≥ 0, 1−ε ≤ ξ₁+ξ₂ < 1+ε}` sampled at cell centres of a grid
/// with step `h = 2^{-m}`. Each row is one run of cells.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripIndicator {
    pub eps: f64,
    pub m: u32,
    pub h: f64,
    /// cells per side of `[0,2]`
    pub side: usize,
    /// inclusive column range of each row, `None` when empty
    pub rows: Vec<Option<(i64, i64)>>,
}

impl StripIndicator {
    pub fn get(&self, i: usize, j: usize) -> bool {
        matches!(self.rows.get(i), Some(Some((a, b))) if (*a..=*b).contains(&(j as i64)))
    }

    pub fn cell_count(&self) -> u64 {
        self.rows.iter().flatten().map(|(a, b)| (b - a + 1) as u64).sum()
    }

    /// Discrete area `#cells · h²`.
    pub fn area(&self) -> f64 {
        self.cell_count() as f64 * self.h * self.h
    }

    /// Area of the continuum band.
    pub fn exact_area(&self) -> f64 {
        2.0 * self.eps
    }

    /// Row-major bitmap.
    pub fn bitmap(&self) -> Vec<bool> {
        let mut v = vec![false; self.side * self.side];
        for (i, r) in self.rows.iter().enumerate() {
            if let Some((a, b)) = r {
                for j in *a..=*b {
                    v[i * self.side + j as usize] = true;
                }
            }
        }
        v
    }
}

/// Grid level with `h ≤ ε / ratio`.
pub fn level_for(eps: f64, ratio: f64) -> Result<u32> {
    if !(ratio >= 1.0) {
        return Err(Error::InvalidRatio(ratio));
    }
    if !(eps > 0.0 && eps <= 0.25) {
        return Err(Error::InvalidWidth(eps));
    }
    let m = (ratio / eps).log2().ceil().max(0.0) as u32;
    if m > MAX_LEVEL {
        return Err(Error::TooFine(m));
    }
    Ok(m)
}

pub fn build_strip(eps: f64, m: u32) -> Result<StripIndicator> {
    if !(eps > 0.0 && eps <= 0.25) {
        return Err(Error::InvalidWidth(eps));
    }
    if m > MAX_LEVEL {
        return Err(Error::TooFine(m));
    }
    let h = (-(m as f64)).exp2();
    if h > eps / 8.0 {
        return Err(Error::UnderResolved { eps, h });
    }
    let side = 1usize << (m + 1);
    let scale = (1u64 << m) as f64;
    // centre (i + ½, j + ½)h lies on ξ₁ + ξ₂ = s h with s = i + j + 1
    let lo = (scale * (1.0 - eps)).ceil() as i64;
    let hi = (scale * (1.0 + eps)).ceil() as i64 - 1;
    let rows = (0..side as i64)
        .map(|i| {
            let a = (lo - 1 - i).max(0);
            let b = (hi - 1 - i).min(side as i64 - 1);
            (a <= b).then_some((a, b))
        })
        .collect();
    Ok(StripIndicator { eps, m, h, side, rows })
}

/// Correlation counts `C(s) = #{ξ : ψ(ξ) = ψ(ξ − s h) = 1}` on the lattice
/// of shifts. Nonzero counts have `|s₁ + s₂| ≤ reach`, so each `s₁` stores a
/// window of `s₂` around `−s₁`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Autocorrelation {
    pub h: f64,
    pub side: usize,
    pub reach: i64,
    counts: Vec<Vec<u64>>,
}

impl Autocorrelation {
    fn max_shift(&self) -> i64 {
        self.side as i64 - 1
    }

    pub fn count(&self, s1: i64, s2: i64) -> u64 {
        let r = self.max_shift();
        if s1.abs() > r || s2.abs() > r || (s1 + s2).abs() > self.reach {
            return 0;
        }
        self.counts[(s1 + r) as usize][(s1 + s2 + self.reach) as usize]
    }

    /// `acf(t)` at `t = s h`.
    pub fn value(&self, s1: i64, s2: i64) -> f64 {
        self.count(s1, s2) as f64 * self.h * self.h
    }

    /// All stored shifts with nonzero count.
    pub fn nonzero(&self) -> impl Iterator<Item = (i64, i64, u64)> + '_ {
        let r = self.max_shift();
        self.counts.iter().enumerate().flat_map(move |(a, row)| {
            let s1 = a as i64 - r;
            row.iter().enumerate().filter(|(_, c)| **c > 0).map(move |(k, c)| (s1, k as i64 - self.reach - s1, *c))
        })
    }
}

fn overlap(a: Option<(i64, i64)>, b: Option<(i64, i64)>, shift: i64) -> u64 {
    match (a, b) {
        (Some((a0, a1)), Some((b0, b1))) => {
            let lo = a0.max(b0 + shift);
            let hi = a1.min(b1 + shift);
            if hi >= lo {
                (hi - lo + 1) as u64
            } else {
                0
            }
        }
        _ => 0,
    }
}

pub fn autocorrelate(psi: &StripIndicator) -> Autocorrelation {
    let side = psi.side as i64;
    let r = side - 1;
    // cells have s = i + j + 1 in a range of `diag` values
    let sums: Vec<i64> = psi.rows.iter().enumerate().filter_map(|(i, x)| x.map(|(a, b)| [i as i64 + a, i as i64 + b])).flatten().collect();
    let reach = match (sums.iter().min(), sums.iter().max()) {
        (Some(lo), Some(hi)) => hi - lo,
        _ => 0,
    };
    let counts = (-r..=r)
        .into_par_iter()
        .map(|s1| {
            (-reach..=reach)
                .map(|d| {
                    let s2 = d - s1;
                    if s2.abs() > r {
                        return 0;
                    }
                    let (i0, i1) = (s1.max(0), (side - 1).min(side - 1 + s1));
                    (i0..=i1).map(|i| overlap(psi.rows[i as usize], psi.rows[(i - s1) as usize], s2)).sum()
                })
                .collect()
        })
        .collect();
    Autocorrelation { h: psi.h, side: psi.side, reach, counts }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadrantNorms {
    /// `‖P₊₊|α|²‖₂`, shifts with `t₁, t₂ > 0`
    pub n_pp: f64,
    /// `‖P₊₋|α|²‖₂`, shifts with `t₁ > 0 > t₂`
    pub n_pm: f64,
    /// `‖|α|²‖₂ = ‖α‖₄²`
    pub n_total: f64,
}

pub fn quadrant_norms(acf: &Autocorrelation) -> QuadrantNorms {
    let (mut pp, mut pm, mut tot) = (0.0, 0.0, 0.0);
    for (s1, s2, c) in acf.nonzero() {
        let v = (c as f64).powi(2);
        tot += v;
        if s1 > 0 && s2 > 0 {
            pp += v;
        } else if s1 > 0 && s2 < 0 {
            pm += v;
        }
    }
    // Σ (c h²)² h²
    let w = acf.h.powi(6);
    QuadrantNorms { n_pp: (pp * w).sqrt(), n_pm: (pm * w).sqrt(), n_total: (tot * w).sqrt() }
}

/// Largest `|t|` with `t₁, t₂ > 0` and `acf(t) ≠ 0`.
pub fn support_radius(acf: &Autocorrelation) -> f64 {
    acf.nonzero()
        .filter(|(a, b, _)| *a > 0 && *b > 0)
        .map(|(a, b, _)| ((a * a + b * b) as f64).sqrt() * acf.h)
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Least squares of `log q` on `log ε`.
pub fn slope_fit(eps: &[f64], q: &[f64]) -> Result<SlopeFit> {
    if eps.len() < 4 || eps.len() != q.len() {
        return Err(Error::TooFewPoints(eps.len().min(q.len())));
    }
    if let Some(bad) = eps.iter().chain(q).find(|v| !(**v > 0.0)) {
        return Err(Error::NonPositive(*bad));
    }
    let ratios: Vec<f64> = eps.windows(2).map(|w| w[1] / w[0]).collect();
    if ratios.iter().any(|r| (r / ratios[0] - 1.0).abs() > 1e-9 || (r - 1.0).abs() < 1e-12) {
        return Err(Error::NotGeometric);
    }
    let x: Vec<f64> = eps.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = q.iter().map(|v| v.ln()).collect();
    let k = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / k, y.iter().sum::<f64>() / k);
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(SlopeFit { slope, intercept: my - slope * mx, r2 })
}

/// `ε = 2^{-a}, …, 2^{-b}`.
pub fn eps_grid(a: u32, b: u32) -> Vec<f64> {
    (a..=b).map(|k| (-(k as f64)).exp2()).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsRow {
    pub eps: f64,
    pub h: f64,
    pub area: f64,
    /// `‖α‖₂`
    pub n2: f64,
    /// `‖α‖₄²`
    pub n4sq: f64,
    pub n_pp: f64,
    pub n_pm: f64,
    /// support radius of the positive quadrant over `ε`
    pub radius_over_eps: f64,
}

pub fn measure(eps: f64, h_ratio: f64) -> Result<EpsRow> {
    let psi = build_strip(eps, level_for(eps, h_ratio)?)?;
    let acf = autocorrelate(&psi);
    let q = quadrant_norms(&acf);
    Ok(EpsRow {
        eps,
        h: psi.h,
        area: psi.area(),
        n2: psi.area().sqrt(),
        n4sq: q.n_total,
        n_pp: q.n_pp,
        n_pm: q.n_pm,
        radius_over_eps: support_radius(&acf) / eps,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slopes {
    pub n2: SlopeFit,
    pub n_pp: SlopeFit,
    pub n_pm: SlopeFit,
    pub n4sq: SlopeFit,
    /// `‖α‖₄`
    pub n4: SlopeFit,
}

/// Target exponents in the order `‖α‖₂, ‖P₊₊|α|²‖₂, ‖P₊₋|α|²‖₂, ‖α‖₄², ‖α‖₄`.
pub const TARGETS: [f64; 5] = [0.5, 2.0, 1.5, 1.5, 0.75];

impl Slopes {
    pub fn as_array(&self) -> [f64; 5] {
        [self.n2.slope, self.n_pp.slope, self.n_pm.slope, self.n4sq.slope, self.n4.slope]
    }

    pub fn within(&self, tol: f64) -> bool {
        self.as_array().iter().zip(TARGETS).all(|(s, t)| (s - t).abs() <= tol)
    }
}

pub fn slopes(rows: &[EpsRow]) -> Result<Slopes> {
    let eps: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    let col = |f: fn(&EpsRow) -> f64| -> Vec<f64> { rows.iter().map(f).collect() };
    Ok(Slopes {
        n2: slope_fit(&eps, &col(|r| r.n2))?,
        n_pp: slope_fit(&eps, &col(|r| r.n_pp))?,
        n_pm: slope_fit(&eps, &col(|r| r.n_pm))?,
        n4sq: slope_fit(&eps, &col(|r| r.n4sq))?,
        n4: slope_fit(&eps, &col(|r| r.n4sq.sqrt()))?,
    })
}

pub fn counterexample_table(grid: &[f64], h_ratio: f64) -> Result<(Vec<EpsRow>, Slopes)> {
    let rows = grid.iter().map(|e| measure(*e, h_ratio)).collect::<Result<Vec<_>>>()?;
    let s = slopes(&rows)?;
    Ok((rows, s))
}

/// Quantities of `α̃ = ε^{-1/2} α`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizedRow {
    pub eps: f64,
    /// `‖α̃‖₂`
    pub n2: f64,
    /// `‖P₊₊|α̃|²‖₂`
    pub n_pp: f64,
    /// `‖α̃‖₄²`
    pub n4sq: f64,
    /// `‖P₊₊|α̃|²‖₂ / ‖α̃‖₂²`
    pub pp_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizedReport {
    pub rows: Vec<NormalizedRow>,
    pub pp_slope: SlopeFit,
    pub n4sq_slope: SlopeFit,
    /// `‖α̃‖₂ ∈ [0.9√2, 1.1√2]` on the whole grid
    pub n2_stable: bool,
    pub ratio_decreasing: bool,
}

pub fn normalized_variant_report(rows: &[EpsRow]) -> Result<NormalizedReport> {
    let rows: Vec<NormalizedRow> = rows
        .iter()
        .map(|r| {
            let n2 = r.n2 / r.eps.sqrt();
            let n_pp = r.n_pp / r.eps;
            NormalizedRow { eps: r.eps, n2, n_pp, n4sq: r.n4sq / r.eps, pp_ratio: n_pp / (n2 * n2) }
        })
        .collect();
    let eps: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    let pp_slope = slope_fit(&eps, &rows.iter().map(|r| r.n_pp).collect::<Vec<_>>())?;
    let n4sq_slope = slope_fit(&eps, &rows.iter().map(|r| r.n4sq).collect::<Vec<_>>())?;
    let s2 = std::f64::consts::SQRT_2;
    let n2_stable = rows.iter().all(|r| r.n2 >= 0.9 * s2 && r.n2 <= 1.1 * s2);
    // rows run from coarse to fine ε
    let mut by_eps = rows.clone();
    by_eps.sort_by(|a, b| b.eps.partial_cmp(&a.eps).unwrap());
    let ratio_decreasing = by_eps.windows(2).all(|w| w[1].pp_ratio < w[0].pp_ratio);
    Ok(NormalizedReport { rows, pp_slope, n4sq_slope, n2_stable, ratio_decreasing })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strip_area_and_membership() {
        let psi = build_strip(0.125, 7).unwrap();
        assert!((psi.area() / psi.exact_area() - 1.0).abs() < 0.02);
        // centre of cell (i, j) is ((i + ½)h, (j + ½)h)
        let h = psi.h;
        for (i, j) in [(0usize, 0usize), (60, 60), (63, 63), (10, 120), (200, 200)] {
            let s = (i + j + 1) as f64 * h;
            assert_eq!(psi.get(i, j), (1.0 - 0.125..1.125).contains(&s), "{i} {j}");
        }
        assert_eq!(psi.bitmap().iter().filter(|b| **b).count() as u64, psi.cell_count());
    }

    #[test]
    fn coarse_grid_rejected() {
        assert_eq!(build_strip(0.25, 4).unwrap_err(), Error::UnderResolved { eps: 0.25, h: 1.0 / 16.0 });
        assert!(build_strip(0.25, 5).is_ok());
        assert!(matches!(build_strip(0.3, 8), Err(Error::InvalidWidth(_))));
        assert!(matches!(level_for(1e-9, 16.0), Err(Error::TooFine(_))));
    }

    #[test]
    fn strip_stays_in_square() {
        let psi = build_strip(0.25, 6).unwrap();
        assert!(psi.rows.iter().flatten().all(|(a, b)| *a >= 0 && (*b as usize) < psi.side));
        assert_eq!(psi.rows.len(), psi.side);
    }

    #[test]
    fn zero_shift_is_squared_norm() {
        let psi = build_strip(0.125, 7).unwrap();
        let acf = autocorrelate(&psi);
        assert_eq!(acf.count(0, 0), psi.cell_count());
        assert!((acf.value(0, 0) - psi.area()).abs() < 1e-15);
    }

    #[test]
    fn slope_of_powers() {
        let e = eps_grid(3, 7);
        let q: Vec<f64> = e.iter().map(|x| 3.0 * x.powf(1.5)).collect();
        let f = slope_fit(&e, &q).unwrap();
        assert!((f.slope - 1.5).abs() < 1e-12 && (f.r2 - 1.0).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
        assert_eq!(slope_fit(&e[..3], &q[..3]).unwrap_err(), Error::TooFewPoints(3));
        assert!(matches!(slope_fit(&e, &[1.0, 0.0, 1.0, 1.0, 1.0]), Err(Error::NonPositive(_))));
        assert_eq!(slope_fit(&[1.0, 0.5, 0.2, 0.1], &[1.0; 4]).unwrap_err(), Error::NotGeometric);
    }

    #[test]
    fn empty_correlation_norms() {
        let acf = Autocorrelation { h: 0.5, side: 2, reach: 0, counts: vec![vec![0]; 3] };
        let q = quadrant_norms(&acf);
        assert_eq!((q.n_pp, q.n_pm, q.n_total), (0.0, 0.0, 0.0));
        assert_eq!(support_radius(&acf), 0.0);
    }
}
