//! Measured ratios between symbol norms and commutator norms.

use dyadlab_core::bmo::{bmo_chf, bmo_rect, ChfStrategy};
use dyadlab_core::haar::haar_intervals;
use dyadlab_core::operators::forms::{commutator_1d, x_slice};
use dyadlab_core::operators::parts::{part_matrix, Part};
use dyadlab_core::operators::{commutator_operator, Shifts};
use dyadlab_core::{DyadicOpenSet, HaarSymbol, Scalar};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::generate::{trial_seed, SymbolGenerator, SymbolKind};
use crate::linear::spectral_norm;
use crate::report::{ConstantReport, TrialRow};

/// Below this an operator norm counts as zero.
pub const ZERO_NORM: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub trials: usize,
    pub seed: u64,
    /// Extra grid levels below the symbol's finest Haar level.
    pub pad: u32,
}

impl Default for TrialConfig {
    fn default() -> Self {
        TrialConfig { trials: 200, seed: 0, pad: 1 }
    }
}

impl TrialConfig {
    fn generator(&self, kind: SymbolKind, depth: u32) -> SymbolGenerator {
        SymbolGenerator::new(kind, depth).with_resolution(depth + self.pad)
    }
}

pub fn commutator_norm(b: &HaarSymbol<f64>, shifts: Shifts) -> f64 {
    spectral_norm(&commutator_operator(b, shifts))
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den > ZERO_NORM && num.is_finite()).then(|| num / den)
}

fn run_trials<F>(name: &str, depths: &[u32], cfg: &TrialConfig, f: F) -> ConstantReport
where
    F: Fn(u32, u64) -> TrialRow + Sync,
{
    let jobs: Vec<(u32, u64)> = depths.iter().flat_map(|&d| (0..cfg.trials as u64).map(move |k| (d, k))).collect();
    let rows = jobs.par_iter().map(|&(d, k)| f(d, trial_seed(cfg.seed, d, k))).collect();
    ConstantReport::new(name, cfg.seed, rows)
}

/// `max_{J''} |J''|⁻¹ Σ_{J ⊆ J''} ‖[T₁, b_J]‖²` and the maximizing `J''`.
pub fn slice_commutator_energy(b: &HaarSymbol<f64>) -> (f64, String) {
    let n = b.n;
    let per: Vec<(dyadlab_core::DyadicInterval, f64)> = haar_intervals(n)
        .map(|j| {
            let nm = spectral_norm(&commutator_1d(n, &x_slice(b, &j)));
            (j, nm * nm)
        })
        .collect();
    let mut best = (0.0, String::from("-"));
    for j2 in haar_intervals(n) {
        let s: f64 = per.iter().filter(|(j, _)| j2.contains(j)).map(|(_, e)| e).sum();
        let v = s * (1u64 << j2.level()) as f64;
        if v > best.0 {
            best = (v, j2.to_string());
        }
    }
    best
}

/// `‖b‖_{BMO_r} / ‖𝒯^b‖` and the strengthened slice ratio over random general
/// symbols. Trials with `𝒯^b = 0` are flagged.
pub fn verify_bmo_rec_bound(depths: &[u32], cfg: &TrialConfig) -> (ConstantReport, ConstantReport) {
    let jobs: Vec<(u32, u64)> = depths.iter().flat_map(|&d| (0..cfg.trials as u64).map(move |k| (d, trial_seed(cfg.seed, d, k)))).collect();
    let pairs: Vec<(TrialRow, TrialRow)> = jobs
        .par_iter()
        .map(|&(d, s)| {
            let b: HaarSymbol<f64> = cfg.generator(SymbolKind::General, d).generate(s);
            let t = commutator_norm(&b, Shifts::PLAIN);
            let rect = bmo_rect(&b);
            let (energy, j2) = slice_commutator_energy(&b);
            let live = !b.is_zero();
            (
                TrialRow { seed: s, depth: d, ratio: ratio(rect.value.sqrt(), t).filter(|_| live), witness: rect.witness.to_string() },
                TrialRow { seed: s, depth: d, ratio: ratio(energy, t * t).filter(|_| live), witness: j2 },
            )
        })
        .collect();
    let (a, b): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    (ConstantReport::new("bmo-rec", cfg.seed, a), ConstantReport::new("bmo-rec-slices", cfg.seed, b))
}

/// Minimal `C₁` with `C₂ = 0`: `|U₀|⁻¹ Σ_{R⊆U₀} (b,h_R)² / ‖𝒯^b‖²` at the
/// heuristic Chang–Fefferman witness `U₀`, over scale-skipping symbols.
pub fn verify_mainskip_constant(depths: &[u32], cfg: &TrialConfig) -> ConstantReport {
    run_trials("mainskip1", depths, cfg, |d, s| {
        let b: HaarSymbol<f64> = cfg.generator(SymbolKind::ScaleSkipping, d).generate(s);
        let t = commutator_norm(&b, Shifts::PLAIN);
        let chf = bmo_chf(&b, ChfStrategy::Heuristic { restarts: 10, seed: s }).expect("heuristic accepts any depth");
        TrialRow { seed: s, depth: d, ratio: ratio(chf.value, t * t).filter(|_| !b.is_zero()), witness: open_set_ref(&chf.witness) }
    })
}

/// `‖𝒯^b‖ / ‖b‖_{ChF}` with the heuristic norm (a lower bound, so the ratio
/// can only be overstated). Zero when the commutator vanishes; `None` when
/// only the symbol norm does.
pub fn upper_ratio(b: &HaarSymbol<f64>, seed: u64) -> (Option<f64>, DyadicOpenSet) {
    let t = commutator_norm(b, Shifts::PLAIN);
    let chf = bmo_chf(b, ChfStrategy::Heuristic { restarts: 10, seed }).expect("heuristic accepts any depth");
    let r = if t <= ZERO_NORM { Some(0.0) } else { ratio(t, chf.value.sqrt()) };
    (r, chf.witness)
}

pub fn verify_upper_bound(depths: &[u32], cfg: &TrialConfig) -> ConstantReport {
    run_trials("upper", depths, cfg, |d, s| {
        let b: HaarSymbol<f64> = cfg.generator(SymbolKind::General, d).generate(s);
        let (r, w) = upper_ratio(&b, s);
        TrialRow { seed: s, depth: d, ratio: r, witness: open_set_ref(&w) }
    })
}

/// `max_part ‖part(b, ·)‖ / ‖b‖_{BMO_r}` over the parts containing `D`, that
/// is, with at most one `1` in the signature.
pub fn verify_single_one_parts(depths: &[u32], cfg: &TrialConfig) -> ConstantReport {
    run_trials("single-one-parts", depths, cfg, |d, s| {
        let b: HaarSymbol<f64> = cfg.generator(SymbolKind::General, d).generate(s);
        let r = bmo_rect(&b).value.sqrt();
        let mut best = (0.0, "-");
        for p in Part::ALL.into_iter().filter(|p| crate::signature::ones(*p) <= 1) {
            let nm = spectral_norm(&part_matrix(&b, p, Shifts::PLAIN));
            if nm > best.0 {
                best = (nm, p.name());
            }
        }
        let v = if r > ZERO_NORM { Some(best.0 / r) } else { None };
        TrialRow { seed: s, depth: d, ratio: v, witness: best.1.to_string() }
    })
}

/// `‖b‖_{ChF} / max_v ‖𝒯_v^b‖` over the four parity variants of the shifts.
pub fn shift_variant_ratio(depths: &[u32], cfg: &TrialConfig) -> ConstantReport {
    run_trials("shift-variants", depths, cfg, |d, s| {
        let b: HaarSymbol<f64> = cfg.generator(SymbolKind::General, d).generate(s);
        let norms: Vec<f64> = Shifts::variants().iter().map(|sh| commutator_norm(&b, *sh)).collect();
        let m = norms.iter().copied().fold(0.0, f64::max);
        let chf = bmo_chf(&b, ChfStrategy::Heuristic { restarts: 10, seed: s }).expect("heuristic accepts any depth");
        let witness = norms.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>().join(";");
        TrialRow { seed: s, depth: d, ratio: ratio(chf.value.sqrt(), m).filter(|_| !b.is_zero()), witness }
    })
}

/// Cell count and a hash of the cell pattern.
pub fn open_set_ref(u: &DyadicOpenSet) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for c in u.cells() {
        h ^= *c as u64;
        h = h.wrapping_mul(0x100_0000_01b3);
    }
    format!("cells={} pattern={h:016x}", u.count())
}

/// `‖b‖_{BMO_r} / ‖𝒯^b‖` for one symbol.
pub fn bmo_rec_ratio<S: Scalar>(b: &HaarSymbol<S>) -> Option<f64> {
    let f: HaarSymbol<f64> = b.convert();
    ratio(bmo_rect(&f).value.sqrt(), commutator_norm(&f, Shifts::PLAIN)).filter(|_| !f.is_zero())
}
