//! The one-variable model: the uncle test function, the averages `c_I`, and
//! the measured constant of the one-parameter lower bound.

use dyadlab_core::haar::{dim1, haar_idx, haar_intervals};
use dyadlab_core::operators::forms::{c_coefficient, commutator_1d, one_pt_pi_form, uncle_function};
use dyadlab_core::{DyadicInterval, QSqrt2, Result, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::ZERO_NORM;
use crate::generate::trial_seed;
use crate::linear::spectral_norm;
use crate::report::{CheckOutcome, ConstantReport, TrialRow};

type Q = QSqrt2;

fn random_inside<S: Scalar>(n: u32, i0: &DyadicInterval, rng: &mut ChaCha8Rng) -> Vec<S> {
    let mut v = vec![S::zero(); dim1(n)];
    for i in haar_intervals(n).filter(|i| i0.contains(i)) {
        v[haar_idx(n, &i).unwrap()] = S::from_ratio(rng.random_range(-64..=64), 64);
    }
    v
}

/// With `f` the uncle of `I₀`, `B_f` vanishes for symbols inside `I₀`; `A_f`
/// is recorded nonzero for at least one symbol per interval.
pub fn check_uncle(max_depth: u32, seed: u64) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::new("uncle kills B_f");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for n in 2..=max_depth {
        for i0 in haar_intervals(n).filter(|i| i.level() >= if i.is_even() { 2 } else { 1 }) {
            let f = uncle_function::<Q>(&i0, n)?;
            let mut live = false;
            for _ in 0..3 {
                let b = random_inside::<Q>(n, &i0, &mut rng);
                let (a, bf) = one_pt_pi_form(&b, &f, &i0, n)?;
                live |= a.iter().any(|x| !x.is_zero());
                out.record(bf.iter().all(|x| x.is_zero()), || format!("B_f nonzero at {i0}, depth {n}"));
            }
            if i0.level() + 1 < n && !i0.is_even() {
                out.record(live, || format!("A_f vanished for every symbol at {i0}, depth {n}"));
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CLevel {
    /// level of `I₀`
    pub level: u32,
    pub min_abs: f64,
    pub max_abs: f64,
    pub in_window: bool,
    /// `I₀` has an odd strict ancestor on the grid.
    pub in_scope: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CWindow {
    pub depth: u32,
    pub levels: Vec<CLevel>,
    /// exact check over the in-scope configurations
    pub outcome: CheckOutcome,
}

/// `|c_I| ∈ [1/8, 1/√2]` for all `(I, I₀)` with `Î ⊆ I₀` on a grid of
/// resolution `n`. Intervals `I₀` without an odd strict ancestor on the grid
/// see `T* 𝟏_{I₀} = 0` and are reported separately.
pub fn c_window(n: u32) -> Result<CWindow> {
    let lo = Q::from_ratio(1, 64);
    let hi = Q::from_ratio(1, 2);
    let mut outcome = CheckOutcome::new("shift average window");
    let mut levels = Vec::new();
    for l0 in 0..n.saturating_sub(1) {
        let in_scope = l0 >= 2;
        let (mut mn, mut mx, mut ok) = (f64::INFINITY, 0.0f64, true);
        for k in 0..1u64 << l0 {
            let i0 = DyadicInterval::at(l0, k);
            for i in i0.descendants(n - 1).filter(|i| i.level() > l0) {
                let c = c_coefficient::<Q>(&i, &i0, n)?;
                let sq = c.square();
                let good = sq >= lo && sq <= hi;
                ok &= good;
                mn = mn.min(c.to_f64().abs());
                mx = mx.max(c.to_f64().abs());
                if in_scope {
                    outcome.record(good, || format!("c = {c} for I = {i}, I0 = {i0}, depth {n}"));
                }
            }
        }
        levels.push(CLevel { level: l0, min_abs: mn, max_abs: mx, in_window: ok, in_scope });
    }
    Ok(CWindow { depth: n, levels, outcome })
}

/// `max_{I₀} |I₀|⁻¹ Σ_{I⊆I₀} (b,h_I)² / ‖[T, M_b]‖²` for random one-variable
/// symbols with Haar levels below `depth` on a grid `pad` levels finer.
pub fn one_parameter_constant(depths: &[u32], trials: usize, seed: u64, pad: u32) -> ConstantReport {
    let jobs: Vec<(u32, u64)> = depths.iter().flat_map(|&d| (0..trials as u64).map(move |k| (d, trial_seed(seed, d, k)))).collect();
    let rows = jobs
        .par_iter()
        .map(|&(d, s)| {
            let n = d + pad;
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let mut b = vec![0.0f64; dim1(n)];
            for i in haar_intervals(d) {
                if rng.random_bool(0.7) {
                    b[haar_idx(n, &i).unwrap()] = rng.random_range(-64..=64) as f64 / 64.0;
                }
            }
            let t = spectral_norm(&commutator_1d(n, &b));
            let mut best = (0.0, String::from("-"));
            for i0 in haar_intervals(n) {
                let e: f64 = haar_intervals(n).filter(|i| i0.contains(i)).map(|i| b[haar_idx(n, &i).unwrap()].powi(2)).sum();
                let v = e * (1u64 << i0.level()) as f64;
                if v > best.0 {
                    best = (v, i0.to_string());
                }
            }
            let ratio = (t > ZERO_NORM && best.0 > 0.0).then(|| best.0 / (t * t));
            TrialRow { seed: s, depth: d, ratio, witness: best.1 }
        })
        .collect();
    ConstantReport::new("one-parameter", seed, rows)
}
