use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// A subset of a ground set of size `n`, stored as packed 64-bit words.
///
/// Bit `x` of the vector is set exactly when element `x` belongs to the
/// subset. Words beyond position `n - 1` are kept zero (canonical form),
/// which makes equality, hashing and the integer-encoding order plain
/// word comparisons.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct SubsetMask {
    n: u32,
    words: Vec<u64>,
}

fn word_count(n: u32) -> usize {
    (n as usize).div_ceil(64)
}

impl SubsetMask {
    pub fn empty(n: u32) -> Self {
        assert!(n >= 1, "ground set must be non-empty");
        SubsetMask {
            n,
            words: vec![0; word_count(n)],
        }
    }

    pub fn full(n: u32) -> Self {
        let mut m = SubsetMask::empty(n);
        for w in &mut m.words {
            *w = u64::MAX;
        }
        m.canonicalize();
        m
    }

    pub fn singleton(n: u32, x: u32) -> Result<Self> {
        let mut m = SubsetMask::empty(n);
        m.set(x)?;
        Ok(m)
    }

    pub fn from_indices(n: u32, indices: &[u32]) -> Result<Self> {
        let mut m = SubsetMask::empty(n);
        for &x in indices {
            m.set(x)?;
        }
        Ok(m)
    }

    /// Build a mask over `n <= 64` elements from its integer encoding.
    pub fn from_u64(n: u32, bits: u64) -> Self {
        assert!((1..=64).contains(&n));
        debug_assert!(n == 64 || bits < (1u64 << n), "encoding out of range");
        let mut m = SubsetMask::empty(n);
        m.words[0] = bits;
        m
    }

    /// The integer encoding, available when `n <= 64`.
    pub fn to_u64(&self) -> Option<u64> {
        if self.n <= 64 {
            Some(self.words[0])
        } else {
            None
        }
    }

    /// Build from raw words, truncating bits beyond `n - 1`.
    pub(crate) fn from_words(n: u32, words: Vec<u64>) -> Self {
        assert!(n >= 1 && words.len() == word_count(n));
        let mut m = SubsetMask { n, words };
        m.canonicalize();
        m
    }

    fn set(&mut self, x: u32) -> Result<()> {
        if x >= self.n {
            return Err(Error::InvalidArgument(format!(
                "element {x} outside ground set of size {}",
                self.n
            )));
        }
        self.words[(x / 64) as usize] |= 1u64 << (x % 64);
        Ok(())
    }

    fn canonicalize(&mut self) {
        let tail = self.n % 64;
        if tail != 0 {
            let last = self.words.len() - 1;
            self.words[last] &= (1u64 << tail) - 1;
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn contains(&self, x: u32) -> bool {
        x < self.n && (self.words[(x / 64) as usize] >> (x % 64)) & 1 == 1
    }

    pub fn cardinality(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn complement(&self) -> SubsetMask {
        let mut out = self.clone();
        for w in &mut out.words {
            *w = !*w;
        }
        out.canonicalize();
        out
    }

    pub fn union(&self, other: &SubsetMask) -> SubsetMask {
        self.zip_words(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &SubsetMask) -> SubsetMask {
        self.zip_words(other, |a, b| a & b)
    }

    pub fn symmetric_difference(&self, other: &SubsetMask) -> SubsetMask {
        self.zip_words(other, |a, b| a ^ b)
    }

    fn zip_words(&self, other: &SubsetMask, f: impl Fn(u64, u64) -> u64) -> SubsetMask {
        assert_eq!(self.n, other.n, "set algebra over mismatched ground sets");
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(&a, &b)| f(a, b))
            .collect();
        SubsetMask { n: self.n, words }
    }

    /// |self ∩ other| without allocating the intersection.
    pub fn intersection_size(&self, other: &SubsetMask) -> u32 {
        assert_eq!(self.n, other.n, "set algebra over mismatched ground sets");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(&a, &b)| (a & b).count_ones())
            .sum()
    }

    /// |self Δ other| without allocating.
    pub fn symmetric_difference_size(&self, other: &SubsetMask) -> u32 {
        assert_eq!(self.n, other.n, "set algebra over mismatched ground sets");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(&a, &b)| (a ^ b).count_ones())
            .sum()
    }

    /// |self ∪ other| without allocating.
    pub fn union_size(&self, other: &SubsetMask) -> u32 {
        assert_eq!(self.n, other.n, "set algebra over mismatched ground sets");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(&a, &b)| (a | b).count_ones())
            .sum()
    }

    pub fn elements(&self) -> impl Iterator<Item = u32> + '_ {
        let n = self.n;
        (0..n).filter(move |&x| self.contains(x))
    }

    /// Hex wire form: 64-bit words serialized least-significant word first,
    /// each word as 16 lowercase hex digits.
    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(self.words.len() * 16);
        for w in &self.words {
            s.push_str(&format!("{w:016x}"));
        }
        s
    }

    pub fn from_hex(n: u32, hex: &str) -> Result<Self> {
        let expect = word_count(n) * 16;
        if hex.len() != expect {
            return Err(Error::Parse(format!(
                "hex mask has {} digits, expected {expect} for n = {n}",
                hex.len()
            )));
        }
        let mut words = Vec::with_capacity(word_count(n));
        for chunk in hex.as_bytes().chunks(16) {
            let txt = std::str::from_utf8(chunk)
                .map_err(|_| Error::Parse("non-ascii hex mask".into()))?;
            let w = u64::from_str_radix(txt, 16)
                .map_err(|e| Error::Parse(format!("bad hex mask word: {e}")))?;
            words.push(w);
        }
        let mask = SubsetMask { n, words };
        let mut canonical = mask.clone();
        canonical.canonicalize();
        if canonical != mask {
            return Err(Error::Parse(format!(
                "hex mask has bits beyond position {}",
                n - 1
            )));
        }
        Ok(mask)
    }
}

impl PartialOrd for SubsetMask {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Integer-encoding order: the canonical order used everywhere for
/// deterministic tie-breaking. Most-significant word decides first.
impl Ord for SubsetMask {
    fn cmp(&self, other: &Self) -> Ordering {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.words.iter().rev().zip(other.words.iter().rev()) {
            match a.cmp(b) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }
}

/// Render as `{0, 3, 7}`; Display is for diagnostics, the wire form is hex.
impl fmt::Display for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        let mut first = true;
        for x in self.elements() {
            if !first {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
            first = false;
        }
        write!(f, "}}")
    }
}
