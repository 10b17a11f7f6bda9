use std::collections::BTreeSet;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::geodesic::ClosedGeodesic;
use super::mobius::{cosh_distance, Classification, MobiusMap};
use super::word::{Letter, Word};
use crate::error::{invalid, Error, Result};

/// Cap on greedy reduction steps.
pub const REDUCTION_CAP: usize = 10_000;
/// Longest word used as a candidate side pairing during reduction.
const PAIRING_WORD_LEN: usize = 3;

/// Centre of the Dirichlet domain.
pub const DIRICHLET_CENTRE: C64 = C64::new(0.0, 1.0);

/// A cusped hyperbolic surface presented by a Fuchsian group whose cusp at
/// infinity is stabilized by `z ↦ z + cusp_width`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FuchsianSurface {
    generators: Vec<MobiusMap>,
    cusp_width: f64,
    #[serde(skip)]
    pairings: Vec<MobiusMap>,
}

impl FuchsianSurface {
    pub fn new(generators: Vec<MobiusMap>, cusp_width: f64) -> Result<Self> {
        if generators.is_empty() {
            return invalid("surface needs at least one generator");
        }
        if generators.len() > 26 {
            return invalid("at most 26 generators are supported");
        }
        if !(cusp_width > 0.0 && cusp_width.is_finite()) {
            return invalid(format!("cusp width {cusp_width} must be positive"));
        }
        for g in &generators {
            g.classify()?;
        }
        let mut surface = Self {
            generators,
            cusp_width,
            pairings: Vec::new(),
        };
        if surface.find_parabolic(4).is_none() {
            return invalid("no parabolic word of length <= 4: the surface has no cusp");
        }
        surface.pairings = (1..=PAIRING_WORD_LEN)
            .flat_map(|n| Word::reduced(surface.rank(), n))
            .map(|w| surface.word_matrix(&w))
            .collect();
        Ok(surface)
    }

    /// Once-punctured torus: the commutator subgroup of PSL(2,ℤ), free on
    /// two hyperbolic generators with parabolic commutator; cusp width 6.
    pub fn punctured_torus() -> Self {
        let a = MobiusMap {
            a: 1.0,
            b: 1.0,
            c: 1.0,
            d: 2.0,
        };
        let b = MobiusMap {
            a: 1.0,
            b: -1.0,
            c: -1.0,
            d: 2.0,
        };
        Self::new(vec![a, b], 6.0).expect("punctured torus generators are valid")
    }

    pub fn generators(&self) -> &[MobiusMap] {
        &self.generators
    }

    pub fn rank(&self) -> u8 {
        self.generators.len() as u8
    }

    pub fn cusp_width(&self) -> f64 {
        self.cusp_width
    }

    pub fn letter_matrix(&self, l: Letter) -> MobiusMap {
        let g = self.generators[l.generator as usize];
        if l.inverse {
            g.inverse()
        } else {
            g
        }
    }

    pub fn word_matrix(&self, w: &Word) -> MobiusMap {
        w.0.iter().fold(MobiusMap::identity(), |acc, &l| {
            acc.compose(&self.letter_matrix(l))
        })
    }

    /// Shortest parabolic reduced word, if any, up to `max_len` letters.
    pub fn find_parabolic(&self, max_len: usize) -> Option<Word> {
        (1..=max_len)
            .flat_map(|n| Word::reduced(self.rank(), n))
            .find(|w| {
                matches!(
                    self.word_matrix(w).classify(),
                    Ok(Classification::Parabolic)
                )
            })
    }

    /// One closed geodesic per primitive hyperbolic conjugacy class of
    /// cyclically reduced words with at most `max_word_len` letters; a class
    /// and its inverse are identified. Sorted by length, then word.
    pub fn enumerate_hyperbolic_classes(&self, max_word_len: usize) -> Result<Vec<ClosedGeodesic>> {
        if max_word_len == 0 {
            return invalid("max_word_len must be at least 1");
        }
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for n in 1..=max_word_len {
            for w in Word::cyclically_reduced(self.rank(), n) {
                if !w.is_primitive() {
                    continue;
                }
                let canon = w.canonical_class();
                if !seen.insert(canon.clone()) {
                    continue;
                }
                let m = self.word_matrix(&canon);
                if m.classify()? != Classification::Hyperbolic {
                    continue;
                }
                out.push(ClosedGeodesic::from_word(canon, m)?);
            }
        }
        out.sort_by(|a, b| {
            a.length
                .total_cmp(&b.length)
                .then_with(|| a.word.cmp(&b.word))
        });
        Ok(out)
    }

    /// Greedy descent into the Dirichlet domain centred at `i`. Returns the
    /// reduced point and the deck transformation carrying the input to it.
    pub fn reduce_to_fundamental_domain(&self, z: C64) -> Result<(C64, MobiusMap)> {
        if !(z.im > 0.0) || !z.re.is_finite() {
            return invalid(format!("point {z} is not in the upper half-plane"));
        }
        let mut point = z;
        let mut map = MobiusMap::identity();
        for _ in 0..REDUCTION_CAP {
            let current = cosh_distance(point, DIRICHLET_CENTRE);
            let best = self
                .pairings
                .iter()
                .map(|g| (g, cosh_distance(g.apply(point), DIRICHLET_CENTRE)))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            match best {
                Some((g, d)) if d < current * (1.0 - 1e-13) => {
                    point = g.apply(point);
                    map = g.compose(&map);
                }
                _ => return Ok((point, map)),
            }
        }
        Err(Error::ReductionFailure {
            iterations: REDUCTION_CAP,
            re: point.re,
            im: point.im,
        })
    }

    /// Representative of `z` of maximal height, translated so that its real
    /// part lies in `[0, cusp_width)`. The returned map carries `z` to it.
    pub fn lift_to_cusp(&self, z: C64) -> Result<(C64, MobiusMap)> {
        let (w, to_domain) = self.reduce_to_fundamental_domain(z)?;
        let (best, g) = std::iter::once(MobiusMap::identity())
            .chain(self.pairings.iter().copied())
            .map(|g| (g.apply(w), g))
            .max_by(|a, b| a.0.im.total_cmp(&b.0.im))
            .expect("candidate set is non-empty");
        let shift = -(best.re / self.cusp_width).floor() * self.cusp_width;
        let t = MobiusMap::translation(shift);
        let lifted = t.apply(best);
        Ok((lifted, t.compose(&g).compose(&to_domain)))
    }
}
