//! Dyadic open sets: unions of bottom cells of the `2^N × 2^N` grid.

use serde::{Deserialize, Serialize};

use crate::dyadic::{DyadicInterval, DyadicRectangle};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DyadicOpenSet {
    n: u32,
    cells: Vec<bool>,
    /// summed-area table with one row/column of padding
    sat: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct OpenSetJson {
    #[serde(rename = "N")]
    n: u32,
    /// run lengths over row-major cells, alternating, starting with an empty run
    runs: Vec<usize>,
}

impl DyadicOpenSet {
    pub fn from_cells(n: u32, cells: Vec<bool>) -> Result<Self> {
        let side = 1usize << n;
        if cells.len() != side * side {
            return Err(Error::InvalidParameter(format!("expected {} cells, got {}", side * side, cells.len())));
        }
        let w = side + 1;
        let mut sat = vec![0u32; w * w];
        for cx in 0..side {
            for cy in 0..side {
                let v = cells[cx * side + cy] as u32;
                sat[(cx + 1) * w + cy + 1] = v + sat[cx * w + cy + 1] + sat[(cx + 1) * w + cy] - sat[cx * w + cy];
            }
        }
        Ok(DyadicOpenSet { n, cells, sat })
    }

    pub fn empty(n: u32) -> Self {
        Self::from_cells(n, vec![false; 1 << (2 * n)]).unwrap()
    }

    pub fn full(n: u32) -> Self {
        Self::from_cells(n, vec![true; 1 << (2 * n)]).unwrap()
    }

    pub fn from_rects(n: u32, rects: &[DyadicRectangle]) -> Result<Self> {
        let side = 1usize << n;
        let mut cells = vec![false; side * side];
        for r in rects {
            r.check_depth(n)?;
            for cx in r.x.cell_range(n) {
                for cy in r.y.cell_range(n) {
                    cells[cx * side + cy] = true;
                }
            }
        }
        Self::from_cells(n, cells)
    }

    pub fn depth(&self) -> u32 {
        self.n
    }
    pub fn side(&self) -> usize {
        1 << self.n
    }
    pub fn cells(&self) -> &[bool] {
        &self.cells
    }
    pub fn cell(&self, cx: usize, cy: usize) -> bool {
        self.cells[cx * self.side() + cy]
    }
    pub fn count(&self) -> usize {
        self.sat[self.sat.len() - 1] as usize
    }
    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }
    /// `|U|` as a float; the exact value is `count / 4^N`.
    pub fn measure(&self) -> f64 {
        self.count() as f64 / (1u64 << (2 * self.n)) as f64
    }

    /// Number of set cells inside `r`.
    pub fn count_in(&self, r: &DyadicRectangle) -> usize {
        let w = self.side() + 1;
        let xs = r.x.cell_range(self.n);
        let ys = r.y.cell_range(self.n);
        let s = |a: usize, b: usize| self.sat[a * w + b] as i64;
        (s(xs.end, ys.end) - s(xs.start, ys.end) - s(xs.end, ys.start) + s(xs.start, ys.start)) as usize
    }

    pub fn contains_rect(&self, r: &DyadicRectangle) -> bool {
        let cells = 1usize << (2 * self.n - r.x.level() - r.y.level());
        self.count_in(r) == cells
    }

    pub fn meets_rect(&self, r: &DyadicRectangle) -> bool {
        self.count_in(r) > 0
    }

    /// Does `r` meet the complement?
    pub fn rect_meets_complement(&self, r: &DyadicRectangle) -> bool {
        !self.contains_rect(r)
    }

    pub fn union(&self, o: &Self) -> Result<Self> {
        self.same_depth(o)?;
        Self::from_cells(self.n, self.cells.iter().zip(&o.cells).map(|(a, b)| *a || *b).collect())
    }
    pub fn difference(&self, o: &Self) -> Result<Self> {
        self.same_depth(o)?;
        Self::from_cells(self.n, self.cells.iter().zip(&o.cells).map(|(a, b)| *a && !*b).collect())
    }
    pub fn is_subset(&self, o: &Self) -> bool {
        self.n == o.n && self.cells.iter().zip(&o.cells).all(|(a, b)| !*a || *b)
    }
    fn same_depth(&self, o: &Self) -> Result<()> {
        if self.n != o.n {
            Err(Error::ResolutionMismatch(self.n, o.n))
        } else {
            Ok(())
        }
    }

    /// `𝒰 = {R ⊆ U}` over rectangles with both levels `<= max_level`.
    pub fn rects_inside(&self, max_level: u32) -> Vec<DyadicRectangle> {
        DyadicRectangle::all(max_level.min(self.n)).filter(|r| self.contains_rect(r)).collect()
    }

    pub fn to_json(&self) -> String {
        let mut runs = Vec::new();
        let mut cur = false;
        let mut len = 0usize;
        for &c in &self.cells {
            if c == cur {
                len += 1;
            } else {
                runs.push(len);
                cur = c;
                len = 1;
            }
        }
        runs.push(len);
        serde_json::to_string(&OpenSetJson { n: self.n, runs }).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: OpenSetJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        let mut cells = Vec::with_capacity(1 << (2 * j.n));
        let mut cur = false;
        for r in j.runs {
            cells.extend(std::iter::repeat(cur).take(r));
            cur = !cur;
        }
        Self::from_cells(j.n, cells)
    }
}

/// `Edge_m(U₀) = {R ∈ 𝒰₀ : p_{m-1}(R) ∈ 𝒰₀, p_m(R) ∩ U₀ᶜ ≠ ∅}`.
/// Rectangles whose `p_m` leaves the model count as meeting the complement.
pub fn edge_rectangles(u0: &DyadicOpenSet, m: u32) -> Result<Vec<DyadicRectangle>> {
    if m == 0 {
        return Err(Error::InvalidParameter("edge order m must be positive".into()));
    }
    let mut out = Vec::new();
    for r in DyadicRectangle::all(u0.depth()) {
        if !u0.contains_rect(&r) {
            continue;
        }
        let prev = match r.ancestor_at(m - 1) {
            Ok(p) => p,
            Err(_) => continue,
        };
        if !u0.contains_rect(&prev) {
            continue;
        }
        let meets = match r.ancestor_at(m) {
            Ok(p) => u0.rect_meets_complement(&p),
            Err(_) => true,
        };
        if meets {
            out.push(r);
        }
    }
    Ok(out)
}

/// Cell rectangle at the bottom level.
pub fn cell_rect(n: u32, cx: usize, cy: usize) -> DyadicRectangle {
    DyadicRectangle::new(DyadicInterval::at(n, cx as u64), DyadicInterval::at(n, cy as u64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_contains(u: &DyadicOpenSet, r: &DyadicRectangle) -> bool {
        let n = u.depth();
        r.x.cell_range(n).all(|cx| r.y.cell_range(n).all(|cy| u.cell(cx, cy)))
    }

    fn brute_edge(u: &DyadicOpenSet, m: u32) -> Vec<DyadicRectangle> {
        let n = u.depth();
        let inside = |r: &DyadicRectangle| brute_contains(u, r);
        DyadicRectangle::all(n)
            .filter(|r| {
                if !inside(r) {
                    return false;
                }
                let lx = r.x.level();
                let ly = r.y.level();
                if lx + 1 < m || ly + 1 < m {
                    return false;
                }
                let anc = |k: u32| {
                    DyadicRectangle::new(
                        DyadicInterval::at(lx - k, r.x.pos() >> k),
                        DyadicInterval::at(ly - k, r.y.pos() >> k),
                    )
                };
                if !inside(&anc(m - 1)) {
                    return false;
                }
                if lx < m || ly < m {
                    return true;
                }
                !inside(&anc(m))
            })
            .collect()
    }

    #[test]
    fn edge_full_square_matches_definition() {
        let u = DyadicOpenSet::full(2);
        let e = edge_rectangles(&u, 1).unwrap();
        assert_eq!(e, brute_edge(&u, 1));
        // only rectangles whose parent leaves the model
        assert!(e.iter().all(|r| r.x.level() == 0 || r.y.level() == 0));
        assert_eq!(e.len(), 7 + 7 - 1);
    }

    #[test]
    fn edge_single_cell_and_empty() {
        let u = DyadicOpenSet::from_rects(2, &[cell_rect(2, 1, 2)]).unwrap();
        for m in 1..=3 {
            assert_eq!(edge_rectangles(&u, m).unwrap(), brute_edge(&u, m));
        }
        assert_eq!(edge_rectangles(&u, 1).unwrap(), vec![cell_rect(2, 1, 2)]);
        assert!(edge_rectangles(&DyadicOpenSet::empty(2), 1).unwrap().is_empty());
    }

    #[test]
    fn edge_l_shape_matches_definition() {
        let a: DyadicRectangle = "1:0|0:0".parse().unwrap();
        let b: DyadicRectangle = "0:0|2:3".parse().unwrap();
        let u = DyadicOpenSet::from_rects(3, &[a, b]).unwrap();
        for m in 1..=3 {
            assert_eq!(edge_rectangles(&u, m).unwrap(), brute_edge(&u, m));
        }
    }

    #[test]
    fn containment_agrees_with_cells() {
        let a: DyadicRectangle = "1:1|2:0".parse().unwrap();
        let u = DyadicOpenSet::from_rects(3, &[a]).unwrap();
        for r in DyadicRectangle::all(3) {
            assert_eq!(u.contains_rect(&r), brute_contains(&u, &r), "{r}");
        }
        assert_eq!(u.count(), 8);
    }

    #[test]
    fn json_roundtrip() {
        let u = DyadicOpenSet::from_rects(3, &["1:1|2:0".parse().unwrap(), "3:0|3:7".parse().unwrap()]).unwrap();
        assert_eq!(DyadicOpenSet::from_json(&u.to_json()).unwrap(), u);
        let f = DyadicOpenSet::full(1);
        assert_eq!(f.to_json(), r#"{"N":1,"runs":[0,4]}"#);
    }
}
