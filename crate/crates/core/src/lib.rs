//! Resolving sets for Jaccard spaces.
//!
//! The space under study is the power set of a finite ground set `X`,
//! metrized by the exact Jaccard distance |aΔb| / |a∪b|. A set of
//! "landmark" subsets `R` resolves the space when the vector of distances
//! to the landmarks identifies every subset uniquely; the minimum size of
//! such a set is the metric dimension of the space.
//!
//! The crate provides:
//!
//! * [`setcore`]: ground sets, packed subset masks, exact rational
//!   distances, seeded fair-coin subset sampling, power-set enumeration;
//! * [`resolve`]: resolving-set verification over the full space or
//!   restricted pair families, necessary-condition diagnostics, and the
//!   inner-product collision characterizations;
//! * [`construct`]: the deterministic triple `{∅, {x}, X∖{x}}` and the
//!   randomized constructions with their prescribed sizes;
//! * [`dimension`]: exact metric dimension by exhaustive search at tiny
//!   `n`, and the greedy entropy (information content) heuristic;
//! * [`bounds`]: exact and log-domain evaluation of the collision
//!   probabilities and union bounds that justify the constructions;
//! * [`cli`]: the `jacres` command-line surface, including the
//!   bag-of-words embedding front end.

pub mod bounds;
pub mod cli;
pub mod construct;
pub mod dimension;
pub mod error;
pub mod resolve;
pub mod setcore;

pub use error::{Error, Result};

/// Enumeration ceilings for the exponential-cost operations.
///
/// The full-space paths walk all 2^n subsets, the heuristic additionally
/// scans 2^n candidates per round, and the exhaustive dimension search
/// enumerates combinations of the 2^n subsets; each gets its own ceiling.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Full power-set enumeration and verification (2^n subsets).
    pub enumeration: u32,
    /// Greedy entropy heuristic (2^n subsets x 2^n candidates per round).
    pub ich: u32,
    /// Exhaustive minimum-resolving-set search (combinations of 2^n masks).
    pub exact: u32,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            enumeration: 24,
            ich: 14,
            exact: 5,
        }
    }
}

impl Limits {
    /// Raised ceilings for callers who accept the cost. Enumeration stays
    /// capped at 63 so subset encodings fit in a `u64`.
    pub fn unrestricted() -> Self {
        Limits {
            enumeration: 63,
            ich: 26,
            exact: 8,
        }
    }
}
