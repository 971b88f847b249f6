//! Seeded random symbols.

use dyadlab_core::haar::haar_rects;
use dyadlab_core::{DyadicInterval, DyadicRectangle, HaarSymbol, Scalar};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SymbolKind {
    General,
    /// Only `(even, even)` rectangles.
    ScaleSkipping,
    /// Support inside one randomly chosen dyadic rectangle.
    RectangleLocalized,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum CoefficientLaw {
    /// `k / den` with `|k| ≤ den`.
    Rational { den: i64 },
    Gaussian,
}

impl CoefficientLaw {
    pub const DEFAULT: CoefficientLaw = CoefficientLaw::Rational { den: 64 };
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolGenerator {
    pub kind: SymbolKind,
    /// Haar levels used by the symbol are `< depth`.
    pub depth: u32,
    /// Grid resolution of the model, at least `depth`.
    pub resolution: u32,
    pub law: CoefficientLaw,
    /// Probability that an eligible coefficient is drawn nonzero.
    pub density: f64,
    /// Also fill the rows and columns carrying a constant factor.
    pub marginals: bool,
}

impl SymbolGenerator {
    pub fn new(kind: SymbolKind, depth: u32) -> Self {
        SymbolGenerator { kind, depth, resolution: depth, law: CoefficientLaw::DEFAULT, density: 0.7, marginals: false }
    }

    pub fn with_resolution(mut self, n: u32) -> Self {
        self.resolution = n.max(self.depth);
        self
    }

    pub fn with_law(mut self, law: CoefficientLaw) -> Self {
        self.law = law;
        self
    }

    pub fn with_density(mut self, p: f64) -> Self {
        self.density = p.clamp(0.0, 1.0);
        self
    }

    pub fn with_marginals(mut self, on: bool) -> Self {
        self.marginals = on;
        self
    }

    fn draw<S: Scalar>(&self, rng: &mut ChaCha8Rng) -> S {
        match self.law {
            CoefficientLaw::Rational { den } => {
                let den = den.max(1);
                S::from_ratio(rng.random_range(-den..=den), den)
            }
            CoefficientLaw::Gaussian => {
                let x: f64 = StandardNormal.sample(rng);
                S::from_rational(&BigRational::from_float(x).unwrap_or_default())
            }
        }
    }

    fn eligible(&self, r: &DyadicRectangle, frame: Option<&DyadicRectangle>) -> bool {
        let lv = r.x.level() < self.depth && r.y.level() < self.depth;
        lv && match self.kind {
            SymbolKind::General => true,
            SymbolKind::ScaleSkipping => r.x.is_even() && r.y.is_even(),
            SymbolKind::RectangleLocalized => frame.is_none_or(|f| f.contains(r)),
        }
    }

    /// Deterministic in `seed`.
    pub fn generate<S: Scalar>(&self, seed: u64) -> HaarSymbol<S> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.resolution.max(self.depth);
        let frame = (self.kind == SymbolKind::RectangleLocalized && self.depth > 0).then(|| {
            let lx = rng.random_range(0..self.depth);
            let ly = rng.random_range(0..self.depth);
            DyadicRectangle::new(
                DyadicInterval::at(lx, rng.random_range(0..1u64 << lx)),
                DyadicInterval::at(ly, rng.random_range(0..1u64 << ly)),
            )
        });
        let mut b = HaarSymbol::zeros(n);
        for r in haar_rects(n) {
            if self.eligible(&r, frame.as_ref()) && rng.random_bool(self.density) {
                b.set_rect(&r, self.draw(&mut rng)).expect("rectangle within resolution");
            }
        }
        if self.marginals && self.kind == SymbolKind::General {
            let side = b.side();
            let cut = 1usize << self.depth;
            for k in 0..cut.min(side) {
                for (ix, iy) in [(0, k), (k, 0)] {
                    if rng.random_bool(self.density) {
                        *b.get_mut(ix, iy) = self.draw(&mut rng);
                    }
                }
            }
        }
        b
    }
}

/// The `k`-th trial seed of a suite.
pub fn trial_seed(base: u64, depth: u32, trial: u64) -> u64 {
    let mut z = base ^ ((depth as u64) << 48) ^ trial.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
