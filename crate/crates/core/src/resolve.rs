//! Resolving-set verification and collision diagnostics.
//!
//! A landmark list `R` resolves a family of subset pairs when no two
//! distinct members of the family share the whole vector of Jaccard
//! distances to `R`. Verification enumerates the family, fingerprints each
//! signature with a 128-bit digest, sorts, and scans for duplicated
//! digests; any reported witness is re-checked against full exact
//! signatures, with a complete exact re-scan as the fallback should the
//! digest ever lie.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::setcore::{jaccard, RationalDistance, SubsetMask};
use crate::Limits;

/// Which family of pairs a verification run covers.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Scope {
    /// Every pair of distinct subsets.
    AllPairs,
    /// Only pairs of equal cardinality.
    EqualSizeOnly,
    /// Only pairs of different cardinality.
    DifferentSizeOnly,
    /// Every pair of distinct subsets of cardinality at most `w`
    /// (enumerated by combinations, not via the full power set).
    SizeAtMost { w: u32 },
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scope::AllPairs => write!(f, "all_pairs"),
            Scope::EqualSizeOnly => write!(f, "equal_size_only"),
            Scope::DifferentSizeOnly => write!(f, "different_size_only"),
            Scope::SizeAtMost { w } => write!(f, "size_at_most_{w}"),
        }
    }
}

/// The distance vector d(a|R), one exact coordinate per landmark, in the
/// landmark list's order. Equality is componentwise exact equality.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Signature {
    coords: Vec<RationalDistance>,
}

impl Signature {
    pub fn coords(&self) -> &[RationalDistance] {
        &self.coords
    }
}

pub fn signature(a: &SubsetMask, landmarks: &[SubsetMask]) -> Result<Signature> {
    if landmarks.is_empty() {
        return Err(Error::InvalidArgument("empty landmark list".into()));
    }
    let coords = landmarks
        .iter()
        .map(|r| jaccard(a, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(Signature { coords })
}

/// Outcome of a verification run. When `resolving` is false the witness is
/// the canonically least colliding pair: among all in-scope pairs with
/// equal signatures, the one whose larger encoding is smallest, ties broken
/// by the smaller encoding. That makes reports reproducible and
/// independent of worker count.
#[derive(Clone, Debug)]
pub struct ResolutionReport {
    pub resolving: bool,
    pub witness: Option<(SubsetMask, SubsetMask)>,
    pub scope: Scope,
    pub pairs_checked: u64,
}

/// The separation/coverage facts that any resolving set must satisfy.
/// They are necessary, not sufficient. Both raw facts are exposed;
/// `passes` combines them: separation, plus coverage of all elements, or
/// of all but one element provided ∅ is a landmark.
#[derive(Clone, Debug)]
pub struct NecessaryConditionsReport {
    pub separates_points: bool,
    pub uncovered_elements: Vec<u32>,
    pub passes: bool,
}

pub fn check_necessary_conditions(landmarks: &[SubsetMask]) -> Result<NecessaryConditionsReport> {
    if landmarks.is_empty() {
        return Err(Error::InvalidArgument("empty landmark list".into()));
    }
    let n = landmarks[0].n();
    if landmarks.iter().any(|r| r.n() != n) {
        return Err(Error::DimensionMismatch {
            left: n,
            right: landmarks.iter().map(|r| r.n()).find(|&m| m != n).unwrap(),
        });
    }

    // Element x is separated from y iff their membership columns across the
    // landmark list differ; pack each column into words and look for
    // duplicates.
    let col_words = landmarks.len().div_ceil(64);
    let mut columns: Vec<Vec<u64>> = vec![vec![0u64; col_words]; n as usize];
    for (i, r) in landmarks.iter().enumerate() {
        for x in 0..n {
            if r.contains(x) {
                columns[x as usize][i / 64] |= 1u64 << (i % 64);
            }
        }
    }
    let mut sorted = columns.clone();
    sorted.sort_unstable();
    let separates_points = sorted.windows(2).all(|w| w[0] != w[1]);

    let mut covered = SubsetMask::empty(n);
    for r in landmarks {
        covered = covered.union(r);
    }
    let uncovered_elements: Vec<u32> = covered.complement().elements().collect();

    let has_empty = landmarks.iter().any(|r| r.is_empty());
    let passes = separates_points
        && (uncovered_elements.is_empty() || (uncovered_elements.len() == 1 && has_empty));

    Ok(NecessaryConditionsReport {
        separates_points,
        uncovered_elements,
        passes,
    })
}

/// Exact test for Jac(a,r) = Jac(b,r) without forming the fractions:
/// (|r|+|b|)·|a∩r| = (|r|+|a|)·|b∩r|. For r ≠ ∅ this is equivalent to the
/// distance collision; for r = ∅ it holds vacuously.
pub fn inner_product_collision_test(a: &SubsetMask, b: &SubsetMask, r: &SubsetMask) -> bool {
    assert_eq!(a.n(), b.n());
    assert_eq!(a.n(), r.n());
    let rs = r.cardinality() as u128;
    let asz = a.cardinality() as u128;
    let bsz = b.cardinality() as u128;
    let ar = a.intersection_size(r) as u128;
    let br = b.intersection_size(r) as u128;
    (rs + bsz) * ar == (rs + asz) * br
}

/// The integer identity forced when a and b collide with both r and its
/// complement: (|rᶜ|−|r|)·(|b∩r|−|a∩r|) = |rᶜ|·(|b|−|a|). Necessary under
/// the double collision, not equivalent to it.
pub fn double_collision_identity(a: &SubsetMask, b: &SubsetMask, r: &SubsetMask) -> bool {
    assert_eq!(a.n(), b.n());
    assert_eq!(a.n(), r.n());
    let n = a.n() as i128;
    let rs = r.cardinality() as i128;
    let rc = n - rs;
    let ar = a.intersection_size(r) as i128;
    let br = b.intersection_size(r) as i128;
    let asz = a.cardinality() as i128;
    let bsz = b.cardinality() as i128;
    (rc - rs) * (br - ar) == rc * (bsz - asz)
}

// ---------------------------------------------------------------------------
// Verification engine
// ---------------------------------------------------------------------------

const LANE1_SEED: u64 = 0x243f6a8885a308d3;
const LANE2_SEED: u64 = 0x13198a2e03707344;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

#[derive(Clone, Copy)]
struct Digest128 {
    h1: u64,
    h2: u64,
}

impl Digest128 {
    fn new() -> Self {
        Digest128 {
            h1: LANE1_SEED,
            h2: LANE2_SEED,
        }
    }

    #[inline]
    fn absorb(&mut self, num: u64, den: u64) {
        let v = (num << 32) | den;
        self.h1 = splitmix64(self.h1 ^ v);
        self.h2 = splitmix64(self.h2 ^ v.rotate_left(17));
    }

    fn finish(self) -> u128 {
        ((self.h1 as u128) << 64) | self.h2 as u128
    }
}

/// Enumerated item in a verification run: either a `u64` encoding (dense
/// path over a one-word ground set) or a full mask (combination path).
trait Item: Ord + Clone {
    fn card(&self) -> u32;
    fn into_mask(self, n: u32) -> SubsetMask;
}

impl Item for u64 {
    fn card(&self) -> u32 {
        self.count_ones()
    }
    fn into_mask(self, n: u32) -> SubsetMask {
        SubsetMask::from_u64(n, self)
    }
}

impl Item for SubsetMask {
    fn card(&self) -> u32 {
        self.cardinality()
    }
    fn into_mask(self, _n: u32) -> SubsetMask {
        self
    }
}

/// The least in-scope colliding pair inside one signature class, by
/// (larger element, then smaller element). `class` must be sorted
/// ascending by encoding.
fn class_candidate<K: Item>(class: &[K], scope: Scope) -> Option<(K, K)> {
    match scope {
        Scope::AllPairs | Scope::SizeAtMost { .. } => {
            if class.len() >= 2 {
                Some((class[0].clone(), class[1].clone()))
            } else {
                None
            }
        }
        Scope::EqualSizeOnly => {
            let mut firsts: Vec<(u32, usize)> = Vec::new();
            for (idx, k) in class.iter().enumerate() {
                let c = k.card();
                if let Some(&(_, fidx)) = firsts.iter().find(|&&(fc, _)| fc == c) {
                    return Some((class[fidx].clone(), k.clone()));
                }
                firsts.push((c, idx));
            }
            None
        }
        Scope::DifferentSizeOnly => {
            let mut firsts: Vec<(u32, usize)> = Vec::new();
            for (idx, k) in class.iter().enumerate() {
                let c = k.card();
                if let Some(&(_, fidx)) = firsts.iter().find(|&&(fc, _)| fc != c) {
                    return Some((class[fidx].clone(), k.clone()));
                }
                if !firsts.iter().any(|&(fc, _)| fc == c) {
                    firsts.push((c, idx));
                }
            }
            None
        }
    }
}

/// Order on candidate pairs: larger element first, then smaller. The
/// global winner under this order is the canonical witness.
fn keep_better<K: Item>(best: &mut Option<(K, K)>, cand: Option<(K, K)>) {
    if let Some((ca, cb)) = cand {
        let replace = match best {
            None => true,
            Some((ba, bb)) => (&cb, &ca) < (bb, ba),
        };
        if replace {
            *best = Some((ca, cb));
        }
    }
}

/// Scan sorted (digest, item) rows; returns the canonical candidate over
/// all duplicated-digest runs.
fn scan_sorted<K: Item>(rows: &[(u128, K)], scope: Scope) -> Option<(K, K)> {
    let mut best: Option<(K, K)> = None;
    let mut start = 0usize;
    while start < rows.len() {
        let mut end = start + 1;
        while end < rows.len() && rows[end].0 == rows[start].0 {
            end += 1;
        }
        if end - start >= 2 {
            let class: Vec<K> = rows[start..end].iter().map(|(_, k)| k.clone()).collect();
            keep_better(&mut best, class_candidate(&class, scope));
        }
        start = end;
    }
    best
}

/// Exact re-scan used if a digest-selected witness fails signature
/// re-verification (a 128-bit digest collision; effectively unreachable,
/// but correctness must not rest on that).
fn exact_rescan<K, I>(items: I, landmarks: &[SubsetMask], n: u32, scope: Scope) -> Option<(K, K)>
where
    K: Item,
    I: Iterator<Item = K>,
{
    use std::collections::HashMap;
    let mut classes: HashMap<Signature, Vec<K>> = HashMap::new();
    for k in items {
        let mask = k.clone().into_mask(n);
        let sig = signature(&mask, landmarks).expect("validated dimensions");
        classes.entry(sig).or_default().push(k);
    }
    let mut best: Option<(K, K)> = None;
    for class in classes.values_mut() {
        // Enumeration order is not the encoding order in general (the
        // combination walk goes by cardinality); candidate extraction
        // needs ascending encodings.
        class.sort_unstable();
        keep_better(&mut best, class_candidate(class, scope));
    }
    best
}

fn pairs_in(count: u128) -> u64 {
    let p = count * count.saturating_sub(1) / 2;
    u64::try_from(p).unwrap_or(u64::MAX)
}

/// Check whether `landmarks` resolves the requested family of pairs.
///
/// Full-space scopes enumerate all 2^n subsets and need `n` within the
/// enumeration limit; `SizeAtMost` walks combinations instead and works
/// for large ground sets as long as the combination count stays within
/// the same budget.
pub fn verify_resolving(
    landmarks: &[SubsetMask],
    scope: Scope,
    limits: &Limits,
) -> Result<ResolutionReport> {
    if landmarks.is_empty() {
        return Err(Error::InvalidArgument("empty landmark list".into()));
    }
    let n = landmarks[0].n();
    if let Some(bad) = landmarks.iter().find(|r| r.n() != n) {
        return Err(Error::DimensionMismatch {
            left: n,
            right: bad.n(),
        });
    }

    match scope {
        Scope::SizeAtMost { w } => verify_combinations(landmarks, n, w, scope, limits),
        _ => verify_dense(landmarks, n, scope, limits),
    }
}

fn verify_dense(
    landmarks: &[SubsetMask],
    n: u32,
    scope: Scope,
    limits: &Limits,
) -> Result<ResolutionReport> {
    if n > limits.enumeration || n > 63 {
        return Err(Error::ResourceLimit(format!(
            "verification scope {scope} enumerates 2^{n} subsets; limit is n <= {}",
            limits.enumeration.min(63)
        )));
    }
    let total = 1u64 << n;
    let r_bits: Vec<u64> = landmarks.iter().map(|r| r.to_u64().unwrap()).collect();

    // Reduced fractions for every (|aΔr|, |a∪r|) pair, packed num<<32|den.
    // uni = 0 only for the empty/empty case, encoded as 0/1.
    let width = (n + 1) as usize;
    let mut table = vec![0u64; width * width];
    for uni in 0..=n as u64 {
        for sym in 0..=uni {
            let d = if uni == 0 {
                RationalDistance::ZERO
            } else {
                RationalDistance::reduced(sym, uni)
            };
            table[(uni as usize) * width + sym as usize] = (d.num() << 32) | d.den();
        }
    }

    let mut rows: Vec<(u128, u64)> = (0..total)
        .into_par_iter()
        .map(|enc| {
            let mut d = Digest128::new();
            for &rb in &r_bits {
                let sym = (enc ^ rb).count_ones() as usize;
                let uni = (enc | rb).count_ones() as usize;
                let v = table[uni * width + sym];
                d.h1 = splitmix64(d.h1 ^ v);
                d.h2 = splitmix64(d.h2 ^ v.rotate_left(17));
            }
            (d.finish(), enc)
        })
        .collect();
    rows.par_sort_unstable();

    let candidate = scan_sorted(&rows, scope);
    let witness = confirm_witness(candidate, landmarks, n, || {
        exact_rescan(0..total, landmarks, n, scope)
    })?;

    Ok(ResolutionReport {
        resolving: witness.is_none(),
        witness,
        scope,
        pairs_checked: pairs_in(total as u128),
    })
}

fn verify_combinations(
    landmarks: &[SubsetMask],
    n: u32,
    w: u32,
    scope: Scope,
    limits: &Limits,
) -> Result<ResolutionReport> {
    if w > n {
        return Err(Error::InvalidArgument(format!(
            "size bound {w} exceeds ground-set size {n}"
        )));
    }
    let count = masks_up_to(n, w);
    if count > 1u128 << limits.enumeration.min(63) {
        return Err(Error::ResourceLimit(format!(
            "scope {scope} enumerates {count} subsets; limit is 2^{}",
            limits.enumeration.min(63)
        )));
    }

    let masks = enumerate_up_to(n, w);
    let mut rows: Vec<(u128, SubsetMask)> = masks
        .into_par_iter()
        .map(|m| {
            let mut d = Digest128::new();
            for r in landmarks {
                let sym = m.symmetric_difference_size(r) as u64;
                let uni = m.union_size(r) as u64;
                let dist = if uni == 0 {
                    RationalDistance::ZERO
                } else {
                    RationalDistance::reduced(sym, uni)
                };
                d.absorb(dist.num(), dist.den());
            }
            (d.finish(), m)
        })
        .collect();
    rows.par_sort_unstable();

    let candidate = scan_sorted(&rows, scope);
    let witness = confirm_witness(candidate, landmarks, n, || {
        exact_rescan(enumerate_up_to(n, w).into_iter(), landmarks, n, scope)
    })?;

    Ok(ResolutionReport {
        resolving: witness.is_none(),
        witness,
        scope,
        pairs_checked: pairs_in(count),
    })
}

/// Re-verify a digest-selected candidate with exact signatures; on
/// mismatch, fall back to the exact re-scan.
fn confirm_witness<K: Item>(
    candidate: Option<(K, K)>,
    landmarks: &[SubsetMask],
    n: u32,
    rescan: impl FnOnce() -> Option<(K, K)>,
) -> Result<Option<(SubsetMask, SubsetMask)>> {
    let Some((a, b)) = candidate else {
        return Ok(None);
    };
    let am = a.into_mask(n);
    let bm = b.into_mask(n);
    if signature(&am, landmarks)? == signature(&bm, landmarks)? {
        return Ok(Some((am, bm)));
    }
    // Digest collision: redo the scan with exact signatures.
    match rescan() {
        Some((a, b)) => Ok(Some((a.into_mask(n), b.into_mask(n)))),
        None => Ok(None),
    }
}

fn masks_up_to(n: u32, w: u32) -> u128 {
    let mut total = 0u128;
    let mut c = 1u128; // C(n, 0)
    for k in 0..=w {
        total = total.saturating_add(c);
        if k < w {
            c = c
                .saturating_mul((n - k) as u128)
                .checked_div((k + 1) as u128)
                .unwrap_or(u128::MAX);
        }
        if total == u128::MAX {
            break;
        }
    }
    total
}

/// All masks of cardinality <= w, by cardinality then lexicographic index
/// combinations. Order does not matter to the caller; rows are re-sorted.
fn enumerate_up_to(n: u32, w: u32) -> Vec<SubsetMask> {
    let mut out = Vec::new();
    out.push(SubsetMask::empty(n));
    for k in 1..=w {
        let mut idx: Vec<u32> = (0..k).collect();
        loop {
            out.push(SubsetMask::from_indices(n, &idx).expect("indices < n"));
            if !next_combination(&mut idx, n) {
                break;
            }
        }
    }
    out
}

/// Advance `idx` to the lexicographically next k-combination of 0..n.
pub(crate) fn next_combination(idx: &mut [u32], n: u32) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - (k - i) as u32 {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
