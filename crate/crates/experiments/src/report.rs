//! Per-trial rows and the summaries built from them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Allowed growth of a measured constant from one depth to the next.
pub const GROWTH_GUARD: f64 = 1.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub seed: u64,
    pub depth: u32,
    /// `None` when the trial was flagged (undefined ratio).
    pub ratio: Option<f64>,
    /// Free-form reference to the witness (rectangle, open set, part name).
    pub witness: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantReport {
    pub name: String,
    pub seed: u64,
    pub trials: usize,
    pub rows: Vec<TrialRow>,
    pub max_by_depth: BTreeMap<u32, f64>,
    pub flagged_by_depth: BTreeMap<u32, usize>,
}

impl ConstantReport {
    pub fn new(name: impl Into<String>, seed: u64, rows: Vec<TrialRow>) -> Self {
        let mut max_by_depth = BTreeMap::new();
        let mut flagged_by_depth = BTreeMap::new();
        for r in &rows {
            match r.ratio {
                Some(v) => {
                    let m = max_by_depth.entry(r.depth).or_insert(v);
                    if v > *m {
                        *m = v;
                    }
                }
                None => *flagged_by_depth.entry(r.depth).or_insert(0) += 1,
            }
        }
        ConstantReport { name: name.into(), seed, trials: rows.len(), rows, max_by_depth, flagged_by_depth }
    }

    pub fn max(&self) -> Option<f64> {
        self.max_by_depth.values().copied().reduce(f64::max)
    }

    pub fn flagged(&self) -> usize {
        self.flagged_by_depth.values().sum()
    }

    /// `max(d+1) / max(d)` for consecutive measured depths.
    pub fn growth(&self) -> Vec<(u32, u32, f64)> {
        let v: Vec<(u32, f64)> = self.max_by_depth.iter().map(|(d, m)| (*d, *m)).collect();
        v.windows(2).map(|w| (w[0].0, w[1].0, w[1].1 / w[0].1)).collect()
    }

    pub fn growth_within(&self, limit: f64) -> bool {
        self.growth().iter().all(|(_, _, g)| g.is_finite() && *g <= limit)
    }

    pub fn all_finite(&self) -> bool {
        !self.max_by_depth.is_empty() && self.max_by_depth.values().all(|v| v.is_finite())
    }

    /// Index of the row attaining the maximum at `depth`.
    pub fn argmax(&self, depth: u32) -> Option<usize> {
        self.rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.depth == depth && r.ratio.is_some())
            .max_by(|a, b| a.1.ratio.partial_cmp(&b.1.ratio).unwrap())
            .map(|(k, _)| k)
    }
}

/// Outcome of an exact check: how many cases ran and the first failure.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    pub first_failure: Option<String>,
}

impl CheckOutcome {
    pub fn new(name: impl Into<String>) -> Self {
        CheckOutcome { name: name.into(), ..Default::default() }
    }

    pub fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(what());
            }
        }
    }

    pub fn merge(mut self, o: CheckOutcome) -> Self {
        self.cases += o.cases;
        self.failures += o.failures;
        if self.first_failure.is_none() {
            self.first_failure = o.first_failure;
        }
        self
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(depth: u32, ratio: Option<f64>) -> TrialRow {
        TrialRow { seed: 0, depth, ratio, witness: String::new() }
    }

    #[test]
    fn maxima_and_flags() {
        let r = ConstantReport::new("x", 0, vec![row(2, Some(1.0)), row(2, Some(3.0)), row(3, None), row(3, Some(4.0))]);
        assert_eq!(r.max_by_depth[&2], 3.0);
        assert_eq!(r.flagged(), 1);
        assert_eq!(r.max(), Some(4.0));
        assert_eq!(r.argmax(2), Some(1));
        let g = r.growth();
        assert_eq!(g.len(), 1);
        assert!((g[0].2 - 4.0 / 3.0).abs() < 1e-15);
        assert!(r.growth_within(GROWTH_GUARD));
        assert!(!r.growth_within(1.2));
    }

    #[test]
    fn empty_report() {
        let r = ConstantReport::new("x", 0, vec![row(2, None)]);
        assert_eq!(r.max(), None);
        assert!(!r.all_finite());
        assert!(r.growth_within(1.0));
    }

    #[test]
    fn outcome_keeps_first_failure() {
        let mut a = CheckOutcome::new("a");
        a.record(true, || "no".into());
        a.record(false, || "first".into());
        a.record(false, || "second".into());
        assert_eq!((a.cases, a.failures), (3, 2));
        assert_eq!(a.first_failure.as_deref(), Some("first"));
        assert!(!a.passed());
        assert!(!CheckOutcome::new("e").passed());
    }
}
