//! One function per command. Each returns per-trial rows, a summary and the
//! list of asserted properties.

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use dyadlab_continuum as continuum;
use dyadlab_core::bmo::{bmo_chf, bmo_rect, enlarge, smallness_coefficients, ChfStrategy};
use dyadlab_core::norms::SchurKind;
use dyadlab_core::{DyadicOpenSet, HaarSymbol, QSqrt2, Scalar};
use dyadlab_experiments::algebra::{decomposition_residual, master_identity, shift_algebra, tested_identity};
use dyadlab_experiments::constants::{shift_variant_ratio, verify_bmo_rec_bound, verify_mainskip_constant, verify_single_one_parts, verify_upper_bound};
use dyadlab_experiments::extremal::{extremal_search, SearchConfig};
use dyadlab_experiments::generate::trial_seed;
use dyadlab_experiments::machinery::{chf_dominates_rect, enlarge_growth_ok, enlarge_ratios, heuristic_matches_exact, last_step_increase, schur_norms};
use dyadlab_experiments::mainskip::{battery, survivor_instance, survivor_survey, EXPECTED_SURVIVORS};
use dyadlab_experiments::one_param::{c_window, check_uncle, one_parameter_constant};
use dyadlab_experiments::report::GROWTH_GUARD;
use dyadlab_experiments::smallness::smallness_falsifier;
use dyadlab_experiments::{CheckOutcome, ConstantReport, SymbolGenerator, SymbolKind, TrialConfig};

use crate::config::{Backend, RunConfig, Strategy};

const SAMPLE_SYMBOL: &str = include_str!("../data/sample_symbol.json");

/// Random symbols per depth for the battery of exact identities.
const BATTERY_TRIALS: usize = 24;

/// Tolerance for float residuals and `‖T‖ = √2`.
const FLOAT_TOL: f64 = 1e-9;
const SHIFT_NORM_TOL: f64 = 1e-10;
const SLOPE_TOL: f64 = 0.15;
const SCHUR_PLATEAU: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    VerifyAlgebra,
    TestedOperators,
    Bmo,
    TheoremBmor,
    TheoremMainskip,
    Survivors,
    Smallness,
    Schur,
    OneParam,
    Extremal,
    Counterexample,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::VerifyAlgebra,
        Suite::TestedOperators,
        Suite::Bmo,
        Suite::TheoremBmor,
        Suite::TheoremMainskip,
        Suite::Survivors,
        Suite::Smallness,
        Suite::Schur,
        Suite::OneParam,
        Suite::Extremal,
        Suite::Counterexample,
    ];

    pub fn name(self) -> String {
        self.to_possible_value().map(|p| p.get_name().to_string()).unwrap_or_default()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub item: String,
    pub depth: Option<u32>,
    pub seed: Option<u64>,
    pub value: Option<f64>,
    pub witness: String,
}

impl Row {
    fn new(item: impl Into<String>, depth: Option<u32>, value: Option<f64>, witness: impl Into<String>) -> Self {
        Row { item: item.into(), depth, seed: None, value, witness: witness.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Assertion {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Assertion { name: name.into(), passed, detail: detail.into() }
    }

    fn from_check(o: &CheckOutcome) -> Self {
        let mut detail = format!("{} cases, {} failures", o.cases, o.failures);
        if let Some(f) = &o.first_failure {
            detail.push_str(&format!("; first: {f}"));
        }
        Assertion::new(o.name.clone(), o.passed(), detail)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub rows: Vec<Row>,
    pub summary: Map<String, Value>,
    pub assertions: Vec<Assertion>,
}

impl SuiteReport {
    fn new(suite: Suite) -> Self {
        SuiteReport { suite: suite.name(), rows: Vec::new(), summary: Map::new(), assertions: Vec::new() }
    }

    pub fn first_failure(&self) -> Option<&Assertion> {
        self.assertions.iter().find(|a| !a.passed)
    }

    pub fn passed(&self) -> bool {
        self.first_failure().is_none()
    }

    fn note(&mut self, key: &str, v: impl Serialize) {
        self.summary.insert(key.into(), serde_json::to_value(v).expect("serializable"));
    }

    fn check(&mut self, o: &CheckOutcome) {
        self.assertions.push(Assertion::from_check(o));
    }

    fn constant(&mut self, r: &ConstantReport) {
        self.rows.extend(r.rows.iter().map(|t| Row { item: r.name.clone(), depth: Some(t.depth), seed: Some(t.seed), value: t.ratio, witness: t.witness.clone() }));
        self.note(&r.name, json!({ "max_by_depth": r.max_by_depth, "flagged_by_depth": r.flagged_by_depth, "growth": r.growth() }));
    }

    /// Finite maxima and the depth-growth guard.
    fn guard(&mut self, r: &ConstantReport) {
        let growth: Vec<String> = r.growth().iter().map(|(a, b, g)| format!("{a}->{b}: {g:.4}")).collect();
        self.assertions.push(Assertion::new(format!("{} finite", r.name), r.all_finite(), format!("{:?}", r.max_by_depth)));
        self.assertions.push(Assertion::new(format!("{} growth <= {GROWTH_GUARD}", r.name), r.growth_within(GROWTH_GUARD), growth.join(", ")));
    }
}

pub fn run(suite: Suite, cfg: &RunConfig) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new(suite);
    match suite {
        Suite::VerifyAlgebra => verify_algebra(cfg, &mut rep)?,
        Suite::TestedOperators => tested_operators(cfg, &mut rep),
        Suite::Bmo => bmo(cfg, &mut rep)?,
        Suite::TheoremBmor => theorem_bmor(cfg, &mut rep),
        Suite::TheoremMainskip => theorem_mainskip(cfg, &mut rep)?,
        Suite::Survivors => survivors(cfg, &mut rep)?,
        Suite::Smallness => smallness(cfg, &mut rep)?,
        Suite::Schur => schur(cfg, &mut rep)?,
        Suite::OneParam => one_param(cfg, &mut rep)?,
        Suite::Extremal => extremal(cfg, &mut rep),
        Suite::Counterexample => counterexample(cfg, &mut rep)?,
    }
    Ok(rep)
}

fn trial_config(cfg: &RunConfig, default_trials: usize) -> TrialConfig {
    TrialConfig { trials: cfg.trials.unwrap_or(default_trials), seed: cfg.seed, pad: cfg.pad }
}

fn verify_algebra(cfg: &RunConfig, rep: &mut SuiteReport) -> Result<()> {
    let n = cfg.depth.unwrap_or(3);
    let per = cfg.trials.unwrap_or(20);
    let depths: Vec<u32> = (1..=n).collect();
    match cfg.backend {
        Backend::Rational => {
            let (out, rows) = master_identity(&depths, per, cfg.seed);
            for r in rows {
                let conv = if r.adjoint { "adjoint" } else { "plain" };
                rep.rows.push(Row { item: format!("residual-entries-{conv}"), depth: Some(r.depth), seed: Some(r.seed), value: Some(r.residual_nnz as f64), witness: String::new() });
            }
            rep.check(&out);
        }
        Backend::Float => {
            let mut out = CheckOutcome::new("master identity");
            for &d in &depths {
                for k in 0..per as u64 {
                    let s = trial_seed(cfg.seed, d, k);
                    let b: HaarSymbol<f64> = SymbolGenerator::new(SymbolKind::General, d).with_marginals(true).generate(s);
                    for adjoint in [false, true] {
                        let res = decomposition_residual(&b, dyadlab_core::operators::Shifts::new(adjoint));
                        let worst = res.triplets().map(|(_, _, v)| v.abs()).fold(0.0, f64::max);
                        let conv = if adjoint { "adjoint" } else { "plain" };
                        rep.rows.push(Row { item: format!("residual-max-{conv}"), depth: Some(d), seed: Some(s), value: Some(worst), witness: String::new() });
                        out.record(worst <= FLOAT_TOL, || format!("depth {d} seed {s} {conv}: residual {worst:e}"));
                    }
                }
            }
            rep.check(&out);
        }
    }
    let shifts = shift_algebra(&(2..=n.max(6)).collect::<Vec<_>>());
    let mut sq = CheckOutcome::new("T^2 = 0");
    let mut asq = CheckOutcome::new("(T*)^2 = 0");
    let mut norm = CheckOutcome::new("|T| = sqrt 2");
    for r in &shifts {
        rep.rows.push(Row::new("shift-norm", Some(r.depth), Some(r.norm), format!("square_zero={} adjoint_square_zero={}", r.square_zero, r.adjoint_square_zero)));
        sq.record(r.square_zero, || format!("depth {}", r.depth));
        asq.record(r.adjoint_square_zero, || format!("depth {}", r.depth));
        norm.record((r.norm - std::f64::consts::SQRT_2).abs() <= SHIFT_NORM_TOL, || format!("depth {}: {}", r.depth, r.norm));
    }
    for o in [&sq, &asq, &norm] {
        rep.check(o);
    }
    rep.note("symbols", depths.len() * per);
    Ok(())
}

fn tested_operators(cfg: &RunConfig, rep: &mut SuiteReport) {
    let n = cfg.depth.unwrap_or(3);
    let out = tested_identity(n, cfg.trials.unwrap_or(4), cfg.seed);
    rep.rows.push(Row::new("cases", Some(n), Some(out.cases as f64), out.first_failure.clone().unwrap_or_default()));
    rep.check(&out);
}

fn load_symbol<S: Scalar>(cfg: &RunConfig) -> Result<HaarSymbol<S>> {
    if let Some(p) = &cfg.symbol {
        let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        return HaarSymbol::from_json(&text).with_context(|| format!("parsing {}", p.display()));
    }
    match cfg.depth.unwrap_or(2) {
        2 => Ok(HaarSymbol::from_json(SAMPLE_SYMBOL)?),
        d => Ok(SymbolGenerator::new(SymbolKind::General, d).generate(cfg.seed)),
    }
}

fn evaluate_symbol<S: Scalar>(cfg: &RunConfig, rep: &mut SuiteReport) -> Result<()> {
    let b: HaarSymbol<S> = load_symbol(cfg)?;
    let strategy = match cfg.strategy {
        Strategy::Exact => ChfStrategy::Exact,
        Strategy::Heuristic => ChfStrategy::Heuristic { restarts: 10, seed: cfg.seed },
    };
    let rect = bmo_rect(&b);
    let chf = bmo_chf(&b, strategy)?;
    let grown = enlarge(&chf.witness, cfg.lambda()?)?;
    rep.rows.push(Row::new("rect-squared", Some(b.n), Some(rect.value.to_f64()), rect.witness.to_string()));
    rep.rows.push(Row::new("chf-squared", Some(b.n), Some(chf.value.to_f64()), chf.witness.to_json()));
    rep.rows.push(Row::new("enlarge-ratio", Some(b.n), Some(grown.ratio), grown.set.to_json()));
    rep.note("rect", json!({ "value": rect.value.to_string(), "witness": rect.witness.to_string() }));
    rep.note("chf", json!({ "value": chf.value.to_string(), "exact": chf.exact, "witness": chf.witness.to_json() }));
    rep.assertions.push(Assertion::new("ChF dominates rectangular on the symbol", chf.value >= rect.value, format!("{} vs {}", chf.value, rect.value)));
    Ok(())
}

fn bmo(cfg: &RunConfig, rep: &mut SuiteReport) -> Result<()> {
    match cfg.backend {
        Backend::Rational => evaluate_symbol::<QSqrt2>(cfg, rep)?,
        Backend::Float => evaluate_symbol::<f64>(cfg, rep)?,
    }
    let trials = cfg.trials.unwrap_or(100);
    rep.check(&chf_dominates_rect(&[2, 3], trials, cfg.seed)?);
    rep.check(&heuristic_matches_exact(trials, cfg.seed)?);
    Ok(())
}

fn theorem_bmor(cfg: &RunConfig, rep: &mut SuiteReport) {
    let depths: Vec<u32> = (2..=cfg.depth.unwrap_or(4)).collect();
    let tc = trial_config(cfg, 200);
    let (rec, slices) = verify_bmo_rec_bound(&depths, &tc);
    rep.constant(&rec);
    rep.constant(&slices);
    rep.guard(&rec);
    rep.constant(&verify_upper_bound(&depths, &tc));
    rep.constant(&shift_variant_ratio(&depths, &tc));
}

fn theorem_mainskip(cfg: &RunConfig, rep: &mut SuiteReport) -> Result<()> {
    let depths: Vec<u32> = (2..=cfg.depth.unwrap_or(4)).collect();
    for o in battery(&depths, BATTERY_TRIALS, cfg.seed)?.outcomes {
        rep.check(&o);
    }
    let tc = trial_config(cfg, 200);
    let c1 = verify_mainskip_constant(&depths, &tc);
    rep.constant(&c1);
    rep.guard(&c1);
    rep.constant(&verify_single_one_parts(&depths, &tc));
    let rows = enlarge_ratios(&depths, tc.trials, cfg.seed, cfg.lambda()?)?;
    for r in &rows {
        rep.rows.push(Row::new("enlarge-max", Some(r.depth), Some(r.max_ratio), format!("mean {:.4}", r.mean_ratio)));
    }
    let table: Vec<String> = rows.iter().map(|r| format!("{}: {}", r.depth, r.max_ratio)).collect();
    rep.assertions.push(Assertion::new(format!("enlarge growth <= {GROWTH_GUARD}"), enlarge_growth_ok(&rows), table.join(", ")));
    rep.note("lambda", &cfg.lambda);
    Ok(())
}

fn survivors(cfg: &RunConfig, rep: &mut SuiteReport) -> Result<()> {
    let d = cfg.depth.unwrap_or(3);
    let s = survivor_survey(d, cfg.pad, cfg.trials.unwrap_or(60), cfg.seed)?;
    for (name, count) in &s.nonzero_counts {
        rep.rows.push(Row::new("nonzero-count", Some(d), Some(*count as f64), name.clone()));
    }
    let mut bounded = Map::new();
    for (name, c) in &s.bounded_constants {
        rep.rows.push(Row::new("bounded-constant", Some(d), Some(*c), name.clone()));
        bounded.insert(name.clone(), json!({ "constant": c, "at_eps0": c * cfg.eps0 }));
    }
    rep.note("bounded_lines", bounded);
    rep.assertions.push(Assertion::new("survivors match", s.matches_expectation(), format!("nonzero {:?}, unexpected {:?}", s.nonzero_counts, s.unexpected)));
    let mut realized = CheckOutcome::new("every survivor realized");
    for name in EXPECTED_SURVIVORS {
        let inst = survivor_instance(d, cfg.pad, name)?;
        realized.record(inst.is_some(), || format!("no instance of {name} at depth {d}"));
        if let Some((b, u0)) = inst {
            rep.rows.push(Row::new("instance", Some(d), None, format!("{name} {} {}", b.to_json(), u0.to_json())));
        }
    }
    rep.check(&realized);
    Ok(())
}

fn smallness(cfg: &RunConfig, rep: &mut SuiteReport) -> Result<()> {
    let max = cfg.depth.unwrap_or(4);
    let sample = cfg.trials.unwrap_or(1000);
    let mut witness = None;
    for n in 2..=max {
        let out = smallness_falsifier(n, sample, cfg.seed)?;
        rep.rows.push(Row::new("sets", Some(n), Some(out.sets as f64), ""));
        rep.rows.push(Row::new("horizontal-cases", Some(n), Some(out.horizontal.cases as f64), out.horizontal.first_failure.clone().unwrap_or_default()));
        let mut a = Assertion::from_check(&out.horizontal);
        a.name = format!("horizontal equality at depth {n}");
        rep.assertions.push(a);
        if witness.is_none() {
            witness = out.witness.map(|w| (n, w));
        }
    }
    match &witness {
        Some((n, w)) => {
            let u = DyadicOpenSet::from_json(&w.set)?;
            let class = smallness_coefficients::<QSqrt2>(&u, &w.rect, w.star)?.classify(cfg.eps1, cfg.eps2);
            rep.rows.push(Row::new("vertical-witness", Some(*n), None, format!("{} star={} set={} at R {} at parent {}", w.rect, w.star, w.set, w.at_rect, w.at_vertical_parent)));
            rep.note("witness_class", json!({ "horizontal_small": class.horizontal_small, "vertical_small": class.vertical_small, "diagonal_small": class.diagonal_small }));
        }
        None => rep.rows.push(Row::new("vertical-witness", None, None, "none")),
    }
    rep.assertions.push(Assertion::new("vertical witness found", witness.is_some(), format!("searched depths 2..={max}")));
    Ok(())
}

fn schur(cfg: &RunConfig, rep: &mut SuiteReport) -> Result<()> {
    let max = cfg.depth.unwrap_or(8);
    if max < 5 {
        bail!("schur needs --depth of at least 5");
    }
    let depths: Vec<u32> = (4..=max).collect();
    for kind in [SchurKind::Tree, SchurKind::BiTree] {
        let rows = schur_norms(kind, &depths, 2.0)?;
        for r in &rows {
            rep.rows.push(Row::new(format!("{}-norm", r.kind), Some(r.depth), Some(r.norm), format!("{} iterations", r.iterations)));
        }
        let inc = last_step_increase(&rows).unwrap_or(f64::NAN);
        rep.assertions.push(Assertion::new(format!("{kind:?} last step < 5%"), inc < SCHUR_PLATEAU, format!("{:.4}%", 100.0 * inc)));
    }
    Ok(())
}

fn one_param(cfg: &RunConfig, rep: &mut SuiteReport) -> Result<()> {
    let n = cfg.depth.unwrap_or(6);
    rep.check(&check_uncle(n, cfg.seed)?);
    let mut window = CheckOutcome::new("shift average window");
    for m in 3..=n {
        let w = c_window(m)?;
        for l in &w.levels {
            rep.rows.push(Row::new("c-level", Some(m), Some(l.max_abs), format!("level {} min {} in_window {} in_scope {}", l.level, l.min_abs, l.in_window, l.in_scope)));
        }
        window = window.merge(w.outcome);
    }
    rep.check(&window);
    let c = one_parameter_constant(&(3..=n).collect::<Vec<_>>(), cfg.trials.unwrap_or(200), cfg.seed, cfg.pad);
    rep.constant(&c);
    Ok(())
}

fn extremal(cfg: &RunConfig, rep: &mut SuiteReport) {
    let d = cfg.depth.unwrap_or(3);
    let budget = cfg.trials.unwrap_or(2000);
    let mut monotone = CheckOutcome::new("incumbent never decreases");
    for kind in [SymbolKind::ScaleSkipping, SymbolKind::General] {
        let sc = SearchConfig { pad: cfg.pad, ..SearchConfig::new(d, kind, budget, cfg.seed) };
        let res = extremal_search(&sc);
        let label = format!("{kind:?}");
        for e in &res.leaderboard {
            rep.rows.push(Row::new(format!("leader-{label}"), Some(d), Some(e.ratio), e.symbol.clone()));
        }
        for (k, t) in res.traces.iter().enumerate() {
            monotone.record(t.windows(2).all(|w| w[1] >= w[0]), || format!("{label} restart {k}"));
        }
        rep.note(&label, json!({ "best": res.best(), "evaluations": res.evaluations, "kernel_hits": res.kernel_hits }));
    }
    rep.check(&monotone);
}

fn counterexample(cfg: &RunConfig, rep: &mut SuiteReport) -> Result<()> {
    let grid = continuum::eps_grid(cfg.eps_grid.first, cfg.eps_grid.last);
    let (rows, slopes) = continuum::counterexample_table(&grid, cfg.h_ratio)?;
    for r in &rows {
        for (item, v) in [("norm2", r.n2), ("norm4-squared", r.n4sq), ("pp", r.n_pp), ("pm", r.n_pm), ("support-radius-over-eps", r.radius_over_eps)] {
            rep.rows.push(Row::new(item, None, Some(v), format!("eps={} h={}", r.eps, r.h)));
        }
    }
    let names = ["norm2", "pp", "pm", "norm4-squared", "norm4"];
    for ((name, got), want) in names.iter().zip(slopes.as_array()).zip(continuum::TARGETS) {
        rep.rows.push(Row::new(format!("slope-{name}"), None, Some(got), format!("target {want}")));
        if *name != "norm4" {
            rep.assertions.push(Assertion::new(format!("slope {name} = {want} +- {SLOPE_TOL}"), (got - want).abs() <= SLOPE_TOL, format!("{got:.4}")));
        }
    }
    let nv = continuum::normalized_variant_report(&rows)?;
    for r in &nv.rows {
        rep.rows.push(Row::new("normalized-norm2", None, Some(r.n2), format!("eps={}", r.eps)));
        rep.rows.push(Row::new("normalized-pp", None, Some(r.n_pp), format!("eps={}", r.eps)));
    }
    rep.assertions.push(Assertion::new(format!("normalized pp slope = 1 +- {SLOPE_TOL}"), (nv.pp_slope.slope - 1.0).abs() <= SLOPE_TOL, format!("{:.4}", nv.pp_slope.slope)));
    rep.assertions.push(Assertion::new("normalized norm2 within 10% of sqrt 2", nv.n2_stable, String::new()));
    rep.note("slopes", slopes);
    rep.note("normalized", json!({ "pp_slope": nv.pp_slope, "norm4_squared_slope": nv.n4sq_slope, "ratio_decreasing": nv.ratio_decreasing }));
    rep.note("support_radius_over_eps", rows.iter().map(|r| r.radius_over_eps).fold(0.0, f64::max));
    Ok(())
}
