//! Exact vanishing and orthogonality claims around the lower bound for
//! scale-skipping symbols, and the audit of which lines survive.

use std::collections::{BTreeMap, BTreeSet};

use dyadlab_core::bmo::{bmo_rect, enlarge, restrict_symbol};
use dyadlab_core::haar::{dense_to_sparse, dim1, haar1, haar_intervals, haar_rects, GridFunction2D};
use dyadlab_core::operators::forms::p_operators;
use dyadlab_core::operators::parts::{line_apply, line_matrix, Line, Part};
use dyadlab_core::operators::{commutator_operator, Shifts};
use dyadlab_core::{DyadicInterval, DyadicOpenSet, DyadicRectangle, HaarSymbol, QSqrt2, Result, Scalar};
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::generate::{trial_seed, SymbolGenerator, SymbolKind};
use crate::linear::spectral_norm;
use crate::report::CheckOutcome;

type Q = QSqrt2;

/// Default enlargement threshold.
pub const LAMBDA: (i64, i64) = (1, 16);

pub fn lambda() -> Rational64 {
    Rational64::new(LAMBDA.0, LAMBDA.1)
}

/// Lines that vanish on `𝟏_U`: all of `ZZ`, `πZ` lines 1–2, `Zπ` lines 1 and 3.
pub const VANISHING: [&str; 8] = ["ZZ1", "ZZ2", "ZZ3", "ZZ4", "πZ1", "πZ2", "Zπ1", "Zπ3"];

/// Lines of the non-`D` parts left over after the vanishing ones.
pub const EXPECTED_SURVIVORS: [&str; 8] = ["ππ1", "ππ2", "ππ3", "ππ4", "πZ3", "πZ4", "Zπ2", "Zπ4"];

/// Lines orthogonal to `ππ1` for scale-skipping symbols.
pub const PP1_PARTNERS: [&str; 7] = ["ππ2", "ππ3", "ππ4", "πZ3", "πZ4", "Zπ2", "Zπ4"];

/// Every line with its name: part name plus 1-based line number.
pub fn all_lines() -> Vec<(String, Part, Line)> {
    Part::ALL
        .into_iter()
        .flat_map(|p| p.lines().into_iter().enumerate().map(move |(k, ln)| (format!("{}{}", p.name(), k + 1), p, ln)))
        .collect()
}

pub fn line_named(name: &str) -> Option<Line> {
    all_lines().into_iter().find(|(n, _, _)| n == name).map(|(_, _, l)| l)
}

/// A union of one or two rectangles of at most two cells each.
pub fn small_open_set(n: u32, seed: u64) -> DyadicOpenSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.random_range(1..=2);
    let rects: Vec<DyadicRectangle> = (0..k)
        .map(|_| {
            let lx = rng.random_range(n.saturating_sub(1)..=n);
            let ly = rng.random_range((2 * n).saturating_sub(1 + lx).min(n)..=n);
            DyadicRectangle::new(DyadicInterval::at(lx, rng.random_range(0..1u64 << lx)), DyadicInterval::at(ly, rng.random_range(0..1u64 << ly)))
        })
        .collect();
    DyadicOpenSet::from_rects(n, &rects).expect("levels within depth")
}

/// The two frames in which the vanishing claims are read.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Frame {
    /// Plain shifts, symbol restricted to `U₀`.
    Plain,
    /// Adjoint shifts, symbol restricted to the enlarged `U`.
    Adjoint,
}

impl Frame {
    pub fn shifts(self) -> Shifts {
        Shifts::new(self == Frame::Adjoint)
    }
}

/// `(α₀, 𝟏_U)` for a frame, with `U` the enlargement of `u0`.
pub fn frame_data(b: &HaarSymbol<Q>, u0: &DyadicOpenSet, frame: Frame) -> Result<(HaarSymbol<Q>, HaarSymbol<Q>, DyadicOpenSet)> {
    let u = enlarge(u0, lambda())?.set;
    let (alpha, _) = restrict_symbol(b, if frame == Frame::Plain { u0 } else { &u })?;
    let f = GridFunction2D::<Q>::indicator(&u).analyze();
    Ok((alpha, f, u))
}

/// Vanishing lines on `(α₀, 𝟏_U)`.
pub fn check_vanishing(b: &HaarSymbol<Q>, u0: &DyadicOpenSet, frame: Frame) -> Result<CheckOutcome> {
    let (alpha, f, _) = frame_data(b, u0, frame)?;
    let mut out = CheckOutcome::new(format!("vanishing lines ({frame:?})"));
    for name in VANISHING {
        let ln = line_named(name).expect("known line");
        out.record(line_apply(&alpha, ln, frame.shifts(), &f).is_zero(), || format!("{name} nonzero for U0 with {} cells", u0.count()));
    }
    Ok(out)
}

/// `ππ1(α₀, 𝟏_U)` against its partners, plain shifts, `α₀ = b|_U`.
pub fn check_pp1_orthogonality(b: &HaarSymbol<Q>, u0: &DyadicOpenSet) -> Result<CheckOutcome> {
    let (alpha, f, _) = frame_data(b, u0, Frame::Adjoint)?;
    let sh = Shifts::PLAIN;
    let pp1 = line_apply(&alpha, line_named("ππ1").unwrap(), sh, &f);
    let mut out = CheckOutcome::new("ππ1 orthogonality");
    for name in PP1_PARTNERS {
        let other = line_apply(&alpha, line_named(name).unwrap(), sh, &f);
        out.record(pp1.dot(&other).is_zero(), || format!("ππ1 not orthogonal to {name}"));
    }
    Ok(out)
}

/// `P₁ ⊥ P₂` for odd `J''` and `P_even ⊥ (rest)` for even `J''`.
pub fn check_p_orthogonality(b: &HaarSymbol<Q>, p: &[Q]) -> Result<CheckOutcome> {
    let n = b.n;
    let t = commutator_operator(b, Shifts::PLAIN);
    let mut out = CheckOutcome::new("P orthogonality");
    for j2 in haar_intervals(n) {
        let ops = p_operators(b, p, &j2)?;
        if j2.is_even() {
            let whole = t.apply_symbol(&HaarSymbol::tensor_sparse(n, &dense_to_sparse(p), &haar1(n, &j2)));
            let rest = whole.minus(&ops.p_even);
            out.record(rest.dot(&ops.p_even).is_zero(), || format!("P_even not orthogonal at {j2}"));
        } else {
            out.record(ops.p1.dot(&ops.p2).is_zero(), || format!("P1 not orthogonal to P2 at {j2}"));
        }
    }
    Ok(out)
}

/// `(R', R'')` with `𝒯_*^{h_{R'}} h_{R''} ≠ 0`.
pub fn adjoint_interaction_table(n: u32) -> BTreeSet<(DyadicRectangle, DyadicRectangle)> {
    let rects: Vec<DyadicRectangle> = haar_rects(n).collect();
    rects
        .par_iter()
        .flat_map_iter(|r1| {
            let b = HaarSymbol::<Q>::single(n, r1, Q::one()).unwrap();
            let t = commutator_operator(&b, Shifts::STAR);
            let side = dim1(n);
            rects
                .iter()
                .filter(|r2| {
                    let ix = dyadlab_core::haar::haar_idx(n, &r2.x).unwrap();
                    let iy = dyadlab_core::haar::haar_idx(n, &r2.y).unwrap();
                    !t.column(ix * side + iy).is_empty()
                })
                .map(|r2| (*r1, *r2))
                .collect::<Vec<_>>()
        })
        .collect()
}

/// `𝒯^β_*(ρ) = 0` whenever `σ_H(ρ)` lies in `U₀` and `σ_H(β)` avoids `U`:
/// no interacting pair `(R', R'')` has `R'' ⊆ U₀` and `R' ⊄ U`.
pub fn check_one_deep(table: &BTreeSet<(DyadicRectangle, DyadicRectangle)>, u0: &DyadicOpenSet) -> Result<CheckOutcome> {
    let u = enlarge(u0, lambda())?.set;
    let mut out = CheckOutcome::new("one-deep annihilation");
    for (r1, r2) in table {
        if u0.contains_rect(r2) {
            out.record(u.contains_rect(r1), || format!("symbol {r1} outside U acts on {r2} inside U0"));
        }
    }
    if out.cases == 0 {
        out.cases = 1;
    }
    Ok(out)
}

/// The same claim on random combinations, evaluated exactly.
pub fn check_one_deep_combination(b: &HaarSymbol<Q>, rho: &HaarSymbol<Q>, u0: &DyadicOpenSet) -> Result<CheckOutcome> {
    let u = enlarge(u0, lambda())?.set;
    let (_, beta) = restrict_symbol(b, &u)?;
    let (rho0, _) = restrict_symbol(rho, u0)?;
    let out_vec = commutator_operator(&beta, Shifts::STAR).apply_symbol(&rho0);
    let mut out = CheckOutcome::new("one-deep combination");
    out.record(out_vec.is_zero(), || format!("nonzero for U0 with {} cells", u0.count()));
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatteryReport {
    pub outcomes: Vec<CheckOutcome>,
}

impl BatteryReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed())
    }
}

/// All exact claims at each depth over `trials` scale-skipping symbols and
/// small open sets.
pub fn battery(depths: &[u32], trials: usize, seed: u64) -> Result<BatteryReport> {
    let mut merged: BTreeMap<String, CheckOutcome> = BTreeMap::new();
    let mut add = |o: CheckOutcome| {
        let key = o.name.clone();
        let cur = merged.remove(&key).unwrap_or_else(|| CheckOutcome::new(key.clone()));
        merged.insert(key, cur.merge(o));
    };
    for &n in depths {
        let per_trial: Vec<Result<Vec<CheckOutcome>>> = (0..trials as u64)
            .into_par_iter()
            .map(|k| {
                let s = trial_seed(seed, n, k);
                let b: HaarSymbol<Q> = SymbolGenerator::new(SymbolKind::ScaleSkipping, n).generate(s);
                let general: HaarSymbol<Q> = SymbolGenerator::new(SymbolKind::General, n).with_marginals(true).generate(s ^ 1);
                let rho: HaarSymbol<Q> = SymbolGenerator::new(SymbolKind::General, n).with_density(1.0).generate(s ^ 2);
                let u0 = small_open_set(n, s ^ 3);
                let mut rng = ChaCha8Rng::seed_from_u64(s ^ 4);
                let p: Vec<Q> = (0..dim1(n)).map(|_| Q::from_ratio(rng.random_range(-64..=64), 64)).collect();
                Ok(vec![
                    check_vanishing(&b, &u0, Frame::Plain)?,
                    check_vanishing(&b, &u0, Frame::Adjoint)?,
                    check_pp1_orthogonality(&b, &u0)?,
                    check_p_orthogonality(&general, &p)?,
                    check_one_deep_combination(&general, &rho, &u0)?,
                ])
            })
            .collect();
        for r in per_trial {
            r?.into_iter().for_each(&mut add);
        }
        let table = adjoint_interaction_table(n);
        for k in 0..trials as u64 {
            add(check_one_deep(&table, &small_open_set(n, trial_seed(seed, n, k) ^ 5))?);
        }
        for r in DyadicRectangle::all(n) {
            add(check_one_deep(&table, &DyadicOpenSet::from_rects(n, &[r])?)?);
        }
    }
    Ok(BatteryReport { outcomes: merged.into_values().collect() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LineClass {
    Zero,
    /// Nonzero line of a part containing `D`.
    Bounded,
    Survivor,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineAudit {
    pub name: String,
    pub class: LineClass,
    /// `‖line(α₀, ·)‖ / ‖α₀‖_{BMO_r}` for bounded lines.
    pub constant: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurvivorReport {
    pub lines: Vec<LineAudit>,
    pub u_cells: usize,
}

impl SurvivorReport {
    pub fn survivors(&self) -> BTreeSet<String> {
        self.lines.iter().filter(|l| l.class == LineClass::Survivor).map(|l| l.name.clone()).collect()
    }

    /// Survivors outside the expected list.
    pub fn unexpected(&self) -> Vec<String> {
        self.survivors().into_iter().filter(|s| !EXPECTED_SURVIVORS.contains(&s.as_str())).collect()
    }
}

/// Every line of every part on `(α₀, 𝟏_U)` in the adjoint frame.
pub fn survivor_audit(b: &HaarSymbol<Q>, u0: &DyadicOpenSet) -> Result<SurvivorReport> {
    let (alpha, f, u) = frame_data(b, u0, Frame::Adjoint)?;
    let sh = Shifts::STAR;
    let alpha_f: HaarSymbol<f64> = alpha.convert();
    let rect = bmo_rect(&alpha_f).value.sqrt();
    let lines = all_lines()
        .into_iter()
        .map(|(name, part, ln)| {
            let zero = line_apply(&alpha, ln, sh, &f).is_zero();
            let has_d = crate::signature::ones(part) <= 1;
            let class = match (zero, has_d) {
                (true, _) => LineClass::Zero,
                (false, true) => LineClass::Bounded,
                (false, false) => LineClass::Survivor,
            };
            let constant = (class == LineClass::Bounded && rect > 0.0).then(|| spectral_norm(&line_matrix(&alpha_f, ln, sh)) / rect);
            LineAudit { name, class, constant }
        })
        .collect();
    Ok(SurvivorReport { lines, u_cells: u.count() })
}

/// Aggregate over random general symbols and small open sets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurvivorSummary {
    pub trials: usize,
    /// How often each line was nonzero.
    pub nonzero_counts: BTreeMap<String, usize>,
    pub unexpected: Vec<String>,
    /// Largest recorded constant per bounded line.
    pub bounded_constants: BTreeMap<String, f64>,
}

impl SurvivorSummary {
    /// The observed survivor set equals the expected one.
    pub fn matches_expectation(&self) -> bool {
        let seen: BTreeSet<&str> = self
            .nonzero_counts
            .keys()
            .map(|s| s.as_str())
            .filter(|s| !Part::ALL.iter().any(|p| crate::signature::ones(*p) <= 1 && s.starts_with(p.name())))
            .collect();
        self.unexpected.is_empty() && seen == EXPECTED_SURVIVORS.into_iter().collect()
    }
}

pub fn survivor_survey(depth: u32, pad: u32, trials: usize, seed: u64) -> Result<SurvivorSummary> {
    let n = depth + pad;
    let reports: Vec<Result<SurvivorReport>> = (0..trials as u64)
        .into_par_iter()
        .map(|k| {
            let s = trial_seed(seed, depth, k);
            let b: HaarSymbol<Q> = SymbolGenerator::new(SymbolKind::General, depth).with_resolution(n).generate(s);
            survivor_audit(&b, &small_open_set(n, s ^ 3))
        })
        .collect();
    let mut sum = SurvivorSummary { trials, nonzero_counts: BTreeMap::new(), unexpected: Vec::new(), bounded_constants: BTreeMap::new() };
    for r in reports {
        let r = r?;
        for l in &r.lines {
            if l.class != LineClass::Zero {
                *sum.nonzero_counts.entry(l.name.clone()).or_insert(0) += 1;
            }
            if let Some(c) = l.constant {
                let e = sum.bounded_constants.entry(l.name.clone()).or_insert(c);
                *e = e.max(c);
            }
        }
        for u in r.unexpected() {
            if !sum.unexpected.contains(&u) {
                sum.unexpected.push(u);
            }
        }
    }
    Ok(sum)
}

/// Random general symbols tried after the single-Haar search.
const RANDOM_INSTANCE_TRIALS: u64 = 400;

/// A concrete `(b, U₀)` on which the named line survives: the first
/// `b = h_R` with Haar levels below `depth` on a grid of resolution
/// `depth + pad`, against a one-rectangle `U₀`, in a deterministic scan;
/// failing that, the first seeded random general symbol that works.
pub fn survivor_instance(depth: u32, pad: u32, name: &str) -> Result<Option<(HaarSymbol<Q>, DyadicOpenSet)>> {
    let ln = line_named(name).ok_or_else(|| dyadlab_core::Error::InvalidParameter(format!("unknown line {name:?}")))?;
    let n = depth + pad;
    let rects: Vec<DyadicRectangle> = haar_rects(n).filter(|r| r.x.level() < depth && r.y.level() < depth).collect();
    let sets: Vec<DyadicRectangle> = DyadicRectangle::all(n).filter(|r| r.area_exponent() >= n).collect();
    for u0r in &sets {
        let u0 = DyadicOpenSet::from_rects(n, &[*u0r])?;
        let u = enlarge(&u0, lambda())?.set;
        let f = GridFunction2D::<Q>::indicator(&u).analyze();
        for r in &rects {
            if !u.contains_rect(r) {
                continue;
            }
            let b = HaarSymbol::single(n, r, Q::one())?;
            if !line_apply(&b, ln, Shifts::STAR, &f).is_zero() {
                return Ok(Some((b, u0)));
            }
        }
    }
    for k in 0..RANDOM_INSTANCE_TRIALS {
        let s = trial_seed(0, depth, k);
        let b: HaarSymbol<Q> = SymbolGenerator::new(SymbolKind::General, depth).with_resolution(n).generate(s);
        let u0 = small_open_set(n, s ^ 3);
        let (alpha, f, _) = frame_data(&b, &u0, Frame::Adjoint)?;
        if !line_apply(&alpha, ln, Shifts::STAR, &f).is_zero() {
            return Ok(Some((b, u0)));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_names() {
        let names: Vec<String> = all_lines().into_iter().map(|(n, _, _)| n).collect();
        assert_eq!(names.len(), 25);
        assert!(names.contains(&"πZ3".to_string()));
        for n in VANISHING.iter().chain(&EXPECTED_SURVIVORS).chain(&PP1_PARTNERS) {
            assert!(line_named(n).is_some(), "{n}");
        }
    }

    #[test]
    fn small_sets_are_small() {
        for s in 0..50 {
            let u = small_open_set(3, s);
            assert!((1..=4).contains(&u.count()));
        }
    }

    #[test]
    fn battery_at_depth_two() {
        let r = battery(&[2], 4, 1).unwrap();
        assert!(r.passed(), "{:?}", r.outcomes.iter().filter(|o| !o.passed()).collect::<Vec<_>>());
        assert!(r.outcomes.len() >= 6);
    }

    #[test]
    fn vanishing_detects_nonvanishing_line() {
        // ππ1 is not in the list; on the full square it is generically nonzero
        let n = 3;
        let b: HaarSymbol<Q> = SymbolGenerator::new(SymbolKind::General, n).with_density(1.0).generate(0);
        let u0 = DyadicOpenSet::full(n);
        let (alpha, f, _) = frame_data(&b, &u0, Frame::Adjoint).unwrap();
        assert!(!line_apply(&alpha, line_named("ππ1").unwrap(), Shifts::STAR, &f).is_zero());
    }

    #[test]
    fn one_deep_catches_a_planted_violation() {
        let n = 4;
        let table = adjoint_interaction_table(n);
        let r2: DyadicRectangle = "3:0|3:0".parse().unwrap();
        let u0 = DyadicOpenSet::from_rects(n, &[r2]).unwrap();
        let ok = check_one_deep(&table, &u0).unwrap();
        assert!(ok.passed() && ok.cases > 1);
        let far: DyadicRectangle = "1:1|1:1".parse().unwrap();
        assert!(!enlarge(&u0, lambda()).unwrap().set.contains_rect(&far));
        let mut bad = table.clone();
        bad.insert((far, r2));
        assert!(!check_one_deep(&bad, &u0).unwrap().passed());
    }

    #[test]
    fn pi_z3_survives_for_a_depth_three_symbol() {
        let (b, u0) = survivor_instance(3, 1, "πZ3").unwrap().expect("instance");
        println!("{} on {}", b.haar_support()[0], u0.to_json());
        let rep = survivor_audit(&b, &u0).unwrap();
        assert!(rep.survivors().contains("πZ3"));
        assert!(rep.lines.iter().filter(|l| l.name.starts_with("ZZ")).all(|l| l.class == LineClass::Zero));
    }
}
