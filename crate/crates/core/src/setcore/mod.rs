//! Ground sets, packed subset masks, exact Jaccard distances, and seeded
//! fair-coin subset sampling.
//!
//! Everything here is exact integer arithmetic: distances are reduced
//! fractions compared by cross-multiplication, never floats. That is what
//! makes signature-injectivity checks elsewhere in the crate sound.

mod mask;
mod rational;

pub use mask::SubsetMask;
pub(crate) use rational::gcd_u64;
pub use rational::{Fraction, RationalDistance};

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::Limits;

/// The finite universe the subsets live in. `labels`, when present, name
/// the elements (used by the bag-of-words embedding front end).
#[derive(Clone, Debug)]
pub struct GroundSet {
    n: u32,
    labels: Option<Vec<String>>,
}

impl GroundSet {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("ground set must be non-empty".into()));
        }
        Ok(GroundSet { n, labels: None })
    }

    pub fn with_labels(labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidArgument("ground set must be non-empty".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for l in &labels {
            if l.is_empty() {
                return Err(Error::InvalidArgument("empty element label".into()));
            }
            if !seen.insert(l.as_str()) {
                return Err(Error::InvalidArgument(format!("duplicate label {l:?}")));
            }
        }
        Ok(GroundSet {
            n: labels.len() as u32,
            labels: Some(labels),
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }
}

/// Exact Jaccard distance |aΔb| / |a∪b|, with distance 0 when a = b
/// (covering a = b = ∅ where the quotient is otherwise undefined).
pub fn jaccard(a: &SubsetMask, b: &SubsetMask) -> Result<RationalDistance> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch {
            left: a.n(),
            right: b.n(),
        });
    }
    let sym = a.symmetric_difference(b).cardinality() as u64;
    let uni = a.union(b).cardinality() as u64;
    if uni == 0 {
        return Ok(RationalDistance::ZERO);
    }
    Ok(RationalDistance::reduced(sym, uni))
}

/// The deterministic seeded generator used throughout. The algorithm
/// (ChaCha with 8 rounds, seeded via `seed_from_u64`) is part of the
/// reproducibility contract and must not change silently.
pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Draw a subset including each element independently with probability 1/2.
///
/// The mask is filled one 64-bit word at a time from the generator's output
/// stream, least-significant word first, with the final word truncated to
/// the ground-set size; identical seeds therefore reproduce identical
/// sample streams bit for bit.
pub fn sample_binomial_subset<R: RngCore>(gs: &GroundSet, rng: &mut R) -> SubsetMask {
    let n = gs.n();
    let words = (n as usize).div_ceil(64);
    let drawn: Vec<u64> = (0..words).map(|_| rng.next_u64()).collect();
    SubsetMask::from_words(n, drawn)
}

/// All 2^n subsets in ascending integer-encoding order. The order is a
/// contract: every deterministic tie-break in the crate refers to it.
pub struct PowerSetIter {
    n: u32,
    next: u64,
    count: u64,
}

impl Iterator for PowerSetIter {
    type Item = SubsetMask;

    fn next(&mut self) -> Option<SubsetMask> {
        if self.next == self.count {
            return None;
        }
        let m = SubsetMask::from_u64(self.n, self.next);
        self.next += 1;
        Some(m)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.count - self.next) as usize;
        (left, Some(left))
    }
}

pub fn enumerate_power_set(gs: &GroundSet, limits: &Limits) -> Result<PowerSetIter> {
    let n = gs.n();
    if n > limits.enumeration || n > 63 {
        return Err(Error::ResourceLimit(format!(
            "power-set enumeration needs 2^{n} subsets; limit is n <= {}",
            limits.enumeration.min(63)
        )));
    }
    Ok(PowerSetIter {
        n,
        next: 0,
        count: 1u64 << n,
    })
}
