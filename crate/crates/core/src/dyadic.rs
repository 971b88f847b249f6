//! Dyadic intervals of [0,1) and rectangles of [0,1)².
//!
//! Level `l` means length `2^{-l}`. The root is level 0 and counts as even.
//! The right half of `I` is `I₊`, the left half `I₋`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported level; positions fit in a u64.
pub const MAX_LEVEL: u32 = 62;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of_level(level: u32) -> Parity {
        if level % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ParityClass {
    EvenEven,
    EvenOdd,
    OddEven,
    OddOdd,
}

impl ParityClass {
    pub fn of(x: Parity, y: Parity) -> ParityClass {
        match (x, y) {
            (Parity::Even, Parity::Even) => ParityClass::EvenEven,
            (Parity::Even, Parity::Odd) => ParityClass::EvenOdd,
            (Parity::Odd, Parity::Even) => ParityClass::OddEven,
            (Parity::Odd, Parity::Odd) => ParityClass::OddOdd,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicInterval {
    level: u32,
    pos: u64,
}

impl DyadicInterval {
    pub const ROOT: DyadicInterval = DyadicInterval { level: 0, pos: 0 };

    pub fn new(level: u32, pos: u64) -> Result<Self> {
        if level > MAX_LEVEL || pos >= (1u64 << level) {
            return Err(Error::BadPosition { level, pos });
        }
        Ok(DyadicInterval { level, pos })
    }

    /// Panics on invalid input; for literals in code and tests.
    pub fn at(level: u32, pos: u64) -> Self {
        Self::new(level, pos).expect("valid dyadic interval")
    }

    pub fn level(&self) -> u32 {
        self.level
    }
    pub fn pos(&self) -> u64 {
        self.pos
    }
    pub fn parity(&self) -> Parity {
        Parity::of_level(self.level)
    }
    pub fn is_even(&self) -> bool {
        self.level % 2 == 0
    }

    pub fn check_depth(&self, depth: u32) -> Result<()> {
        if self.level > depth {
            Err(Error::LevelOverflow { level: self.level, depth })
        } else {
            Ok(())
        }
    }

    pub fn parent(&self) -> Result<Self> {
        if self.level == 0 {
            return Err(Error::NoParent(self.to_string()));
        }
        Ok(DyadicInterval { level: self.level - 1, pos: self.pos >> 1 })
    }

    pub fn sibling(&self) -> Result<Self> {
        if self.level == 0 {
            return Err(Error::NoSibling(self.to_string()));
        }
        Ok(DyadicInterval { level: self.level, pos: self.pos ^ 1 })
    }

    /// `s(I, Î)`: +1 when `I` is the right child of its parent.
    pub fn hat_sign(&self) -> Result<i32> {
        if self.level == 0 {
            return Err(Error::NoParent(self.to_string()));
        }
        Ok(if self.pos & 1 == 1 { 1 } else { -1 })
    }

    pub fn minus(&self) -> Self {
        DyadicInterval { level: self.level + 1, pos: self.pos << 1 }
    }
    pub fn plus(&self) -> Self {
        DyadicInterval { level: self.level + 1, pos: (self.pos << 1) | 1 }
    }
    pub fn children(&self) -> [Self; 2] {
        [self.minus(), self.plus()]
    }

    pub fn ancestor(&self, m: u32) -> Result<Self> {
        if m > self.level {
            return Err(Error::InsufficientDepth { need: m, got: self.to_string() });
        }
        Ok(DyadicInterval { level: self.level - m, pos: self.pos >> m })
    }

    /// Set inclusion `other ⊆ self`.
    pub fn contains(&self, other: &Self) -> bool {
        other.level >= self.level && (other.pos >> (other.level - self.level)) == self.pos
    }
    pub fn strictly_contains(&self, other: &Self) -> bool {
        other.level > self.level && self.contains(other)
    }
    pub fn intersects(&self, other: &Self) -> bool {
        self.contains(other) || other.contains(self)
    }

    /// Sign of `h_self` on a strict sub-interval: +1 on the right half.
    pub fn side_of(&self, inner: &Self) -> i32 {
        debug_assert!(self.strictly_contains(inner));
        let bit = (inner.pos >> (inner.level - self.level - 1)) & 1;
        if bit == 1 {
            1
        } else {
            -1
        }
    }

    /// Range of bottom cells at resolution `n` covered by this interval.
    pub fn cell_range(&self, n: u32) -> std::ops::Range<usize> {
        debug_assert!(self.level <= n);
        let shift = n - self.level;
        let lo = (self.pos << shift) as usize;
        lo..lo + (1usize << shift)
    }

    /// All intervals with level in `0..=max_level`, coarse to fine.
    pub fn all(max_level: u32) -> impl Iterator<Item = DyadicInterval> {
        (0..=max_level).flat_map(|l| (0..(1u64 << l)).map(move |k| DyadicInterval { level: l, pos: k }))
    }

    /// Strict descendants with level `<= max_level`.
    pub fn descendants(&self, max_level: u32) -> impl Iterator<Item = DyadicInterval> {
        let base = *self;
        ((base.level + 1)..=max_level).flat_map(move |l| {
            let shift = l - base.level;
            let lo = base.pos << shift;
            (lo..lo + (1u64 << shift)).map(move |k| DyadicInterval { level: l, pos: k })
        })
    }

    /// Strict ancestors, nearest first.
    pub fn ancestors(&self) -> impl Iterator<Item = DyadicInterval> {
        let base = *self;
        (1..=base.level).map(move |m| DyadicInterval { level: base.level - m, pos: base.pos >> m })
    }
}

impl fmt::Display for DyadicInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.level, self.pos)
    }
}

impl FromStr for DyadicInterval {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (l, k) = s.trim().split_once(':').ok_or_else(|| Error::Parse(format!("interval '{s}'")))?;
        let l: u32 = l.parse().map_err(|_| Error::Parse(format!("interval '{s}'")))?;
        let k: u64 = k.parse().map_err(|_| Error::Parse(format!("interval '{s}'")))?;
        DyadicInterval::new(l, k)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicRectangle {
    pub x: DyadicInterval,
    pub y: DyadicInterval,
}

impl DyadicRectangle {
    pub fn new(x: DyadicInterval, y: DyadicInterval) -> Self {
        DyadicRectangle { x, y }
    }
    pub fn root() -> Self {
        DyadicRectangle::new(DyadicInterval::ROOT, DyadicInterval::ROOT)
    }
    /// `-(log2 |R|)`
    pub fn area_exponent(&self) -> u32 {
        self.x.level + self.y.level
    }
    pub fn parity_class(&self) -> ParityClass {
        ParityClass::of(self.x.parity(), self.y.parity())
    }
    /// `R̂ = Î × Ĵ`
    pub fn parent(&self) -> Result<Self> {
        Ok(DyadicRectangle::new(self.x.parent()?, self.y.parent()?))
    }
    /// `R₁ = Î × J`
    pub fn r1(&self) -> Result<Self> {
        Ok(DyadicRectangle::new(self.x.parent()?, self.y))
    }
    /// `R₂ = I × Ĵ`
    pub fn r2(&self) -> Result<Self> {
        Ok(DyadicRectangle::new(self.x, self.y.parent()?))
    }
    /// `p_m(R)`
    pub fn ancestor_at(&self, m: u32) -> Result<Self> {
        if self.x.level < m || self.y.level < m {
            return Err(Error::InsufficientDepth { need: m, got: self.to_string() });
        }
        Ok(DyadicRectangle::new(self.x.ancestor(m)?, self.y.ancestor(m)?))
    }
    pub fn contains(&self, other: &Self) -> bool {
        self.x.contains(&other.x) && self.y.contains(&other.y)
    }
    pub fn check_depth(&self, depth: u32) -> Result<()> {
        self.x.check_depth(depth)?;
        self.y.check_depth(depth)
    }
    /// All rectangles with both levels in `0..=max_level`.
    pub fn all(max_level: u32) -> impl Iterator<Item = DyadicRectangle> {
        DyadicInterval::all(max_level).flat_map(move |x| DyadicInterval::all(max_level).map(move |y| DyadicRectangle::new(x, y)))
    }
}

impl fmt::Display for DyadicRectangle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}|{}", self.x, self.y)
    }
}

impl FromStr for DyadicRectangle {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s.split_once('|').ok_or_else(|| Error::Parse(format!("rectangle '{s}'")))?;
        Ok(DyadicRectangle::new(a.parse()?, b.parse()?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parent_examples() {
        assert_eq!(DyadicInterval::at(1, 0).parent().unwrap(), DyadicInterval::at(0, 0));
        assert_eq!(DyadicInterval::at(3, 5).parent().unwrap(), DyadicInterval::at(2, 2));
        assert!(DyadicInterval::at(0, 0).parent().is_err());
    }

    #[test]
    fn sibling_examples() {
        assert_eq!(DyadicInterval::at(1, 0).sibling().unwrap(), DyadicInterval::at(1, 1));
        assert_eq!(DyadicInterval::at(3, 5).sibling().unwrap(), DyadicInterval::at(3, 4));
        assert!(DyadicInterval::ROOT.sibling().is_err());
    }

    #[test]
    fn hat_sign_examples() {
        assert_eq!(DyadicInterval::at(1, 1).hat_sign().unwrap(), 1);
        assert_eq!(DyadicInterval::at(1, 0).hat_sign().unwrap(), -1);
        assert_eq!(DyadicInterval::at(2, 2).hat_sign().unwrap(), -1);
        assert!(DyadicInterval::ROOT.hat_sign().is_err());
    }

    #[test]
    fn ancestor_examples() {
        let r = DyadicRectangle::new(DyadicInterval::at(1, 0), DyadicInterval::at(1, 1));
        assert_eq!(r.ancestor_at(0).unwrap(), r);
        assert_eq!(r.ancestor_at(1).unwrap(), DyadicRectangle::root());
        let r3 = DyadicRectangle::new(DyadicInterval::at(3, 6), DyadicInterval::at(3, 1));
        let p2 = r3.ancestor_at(2).unwrap();
        assert_eq!((p2.x.level(), p2.y.level()), (1, 1));
        assert_eq!(p2, DyadicRectangle::new(DyadicInterval::at(1, 1), DyadicInterval::at(1, 0)));
        assert!(r.ancestor_at(2).is_err());
    }

    #[test]
    fn notation_roundtrip() {
        let r: DyadicRectangle = "2:3|1:0".parse().unwrap();
        assert_eq!(r.to_string(), "2:3|1:0");
        assert!("2:4|0:0".parse::<DyadicRectangle>().is_err());
        assert!("x".parse::<DyadicInterval>().is_err());
    }

    #[test]
    fn descendants_and_ancestors() {
        let i = DyadicInterval::at(1, 1);
        let d: Vec<_> = i.descendants(3).collect();
        assert_eq!(d.len(), 2 + 4);
        assert!(d.iter().all(|j| i.strictly_contains(j)));
        let a: Vec<_> = DyadicInterval::at(3, 5).ancestors().collect();
        assert_eq!(a, vec![DyadicInterval::at(2, 2), DyadicInterval::at(1, 1), DyadicInterval::ROOT]);
    }

    fn interval() -> impl Strategy<Value = DyadicInterval> {
        (1u32..20).prop_flat_map(|l| (Just(l), 0u64..(1u64 << l))).prop_map(|(l, k)| DyadicInterval::at(l, k))
    }

    proptest! {
        #[test]
        fn parent_of_children_is_self(l in 0u32..30, k in any::<u64>()) {
            let i = DyadicInterval::at(l, k % (1u64 << l));
            prop_assert_eq!(i.minus().parent().unwrap(), i);
            prop_assert_eq!(i.plus().parent().unwrap(), i);
        }

        #[test]
        fn hat_sign_matches_sibling_order(i in interval()) {
            let s = i.sibling().unwrap();
            prop_assert_eq!(i.hat_sign().unwrap() == 1, s.pos() < i.pos());
        }

        #[test]
        fn parent_flips_parity(i in interval()) {
            prop_assert_ne!(i.parent().unwrap().parity(), i.parity());
        }

        #[test]
        fn ancestor_contains(a in interval(), b in interval(), m in 0u32..5) {
            let r = DyadicRectangle::new(a, b);
            if let Ok(p) = r.ancestor_at(m) {
                prop_assert!(p.contains(&r));
            } else {
                prop_assert!(a.level() < m || b.level() < m);
            }
        }
    }
}
