use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

pub(crate) fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// An exact Jaccard distance as a reduced fraction in [0, 1].
///
/// Equality and hashing are exact (the fraction is kept in lowest terms),
/// so distance vectors can be used directly as injectivity witnesses
/// without any float canonicalization. Comparisons cross-multiply in
/// `u128`, so they never round.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct RationalDistance {
    num: u64,
    den: u64,
}

impl RationalDistance {
    pub const ZERO: RationalDistance = RationalDistance { num: 0, den: 1 };
    pub const ONE: RationalDistance = RationalDistance { num: 1, den: 1 };

    /// Reduce `num/den`. Requires `den > 0` and `num <= den`.
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidArgument("zero denominator".into()));
        }
        if num > den {
            return Err(Error::InvalidArgument(format!(
                "distance {num}/{den} outside [0, 1]"
            )));
        }
        let g = gcd_u64(num, den);
        Ok(RationalDistance {
            num: num / g,
            den: den / g,
        })
    }

    /// Internal fast path for values already known to satisfy the invariants.
    pub(crate) fn reduced(num: u64, den: u64) -> Self {
        debug_assert!(den > 0 && num <= den);
        let g = gcd_u64(num, den);
        RationalDistance {
            num: num / g,
            den: den / g,
        }
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn is_one(&self) -> bool {
        self.num == self.den
    }
}

impl PartialOrd for RationalDistance {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RationalDistance {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = self.num as u128 * other.den as u128;
        let rhs = other.num as u128 * self.den as u128;
        lhs.cmp(&rhs)
    }
}

impl fmt::Display for RationalDistance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// A reduced non-negative fraction without the unit-interval restriction.
/// Used for summary statistics such as average landmark cardinality.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Fraction {
    num: u64,
    den: u64,
}

impl Fraction {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidArgument("zero denominator".into()));
        }
        let g = gcd_u64(num, den);
        Ok(Fraction {
            num: num / g,
            den: den / g,
        })
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}
