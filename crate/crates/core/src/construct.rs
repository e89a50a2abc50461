//! Resolving-set candidates with prescribed sizes.
//!
//! Two families: the deterministic triple `{∅, {x}, X∖{x}}`, which
//! separates every pair of subsets with different cardinalities, and
//! randomized fair-coin families: `triple + k` i.i.d. samples for the
//! whole space, or `k` sample/complement pairs for different-size (and
//! small-subset) resolution. The sample counts come from closed-form
//! functions of `n` (and a rational strength parameter ε), rounded up to
//! the least compliant integer.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::setcore::{sample_binomial_subset, seeded_rng, GroundSet, SubsetMask};

/// Strictly positive rational parameter, parsed exactly as `p/q` (or a
/// bare integer `p`). Kept exact so size formulas with algebraic boundary
/// cases round deterministically.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Epsilon {
    num: u64,
    den: u64,
}

impl Epsilon {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidArgument("zero denominator in epsilon".into()));
        }
        if num == 0 {
            return Err(Error::InvalidArgument("epsilon must be positive".into()));
        }
        let g = crate::setcore::gcd_u64(num, den);
        Ok(Epsilon {
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

    pub fn less_than_one(&self) -> bool {
        self.num < self.den
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Epsilon {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (p, q) = match s.split_once('/') {
            Some((p, q)) => (p, q),
            None => (s, "1"),
        };
        let num: u64 = p
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad rational {s:?}, expected p/q")))?;
        let den: u64 = q
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad rational {s:?}, expected p/q")))?;
        Epsilon::new(num, den)
    }
}

/// Which construction to build.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstructionKind {
    /// `{∅, {x}, X∖{x}}`: resolves every pair of different cardinality.
    Triple,
    /// Triple plus k fair-coin samples: targets the whole space.
    Theorem1,
    /// k fair-coin samples interleaved with their complements: targets
    /// pairs of different cardinality.
    Theorem2,
    /// Same set as `Theorem2`, verified only on subsets of size at most
    /// the bound `W` that comes with the construction.
    Corollary3,
}

impl fmt::Display for ConstructionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ConstructionKind::Triple => "triple",
            ConstructionKind::Theorem1 => "theorem1",
            ConstructionKind::Theorem2 => "theorem2",
            ConstructionKind::Corollary3 => "corollary3",
        };
        write!(f, "{s}")
    }
}

impl FromStr for ConstructionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "triple" => Ok(ConstructionKind::Triple),
            "theorem1" => Ok(ConstructionKind::Theorem1),
            "theorem2" => Ok(ConstructionKind::Theorem2),
            "corollary3" => Ok(ConstructionKind::Corollary3),
            _ => Err(Error::Parse(format!(
                "unknown construction kind {s:?} (triple|theorem1|theorem2|corollary3)"
            ))),
        }
    }
}

/// Everything needed to rebuild a construction bit for bit.
#[derive(Clone, Debug)]
pub struct ConstructionSpec {
    pub kind: ConstructionKind,
    pub n: u32,
    /// Strength parameter; required for `Theorem2`/`Corollary3`, where it
    /// must lie in (0, 1).
    pub epsilon: Option<Epsilon>,
    /// Pivot element for the triple; free by symmetry, fixed (default 0)
    /// for reproducibility.
    pub x_pivot: u32,
    pub seed: u64,
    /// Overrides the computed sample count (needed below the domain of the
    /// closed-form k).
    pub k_override: Option<u32>,
}

impl ConstructionSpec {
    pub fn new(kind: ConstructionKind, n: u32, seed: u64) -> Self {
        ConstructionSpec {
            kind,
            n,
            epsilon: None,
            x_pivot: 0,
            seed,
            k_override: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidArgument("ground set must be non-empty".into()));
        }
        match self.kind {
            ConstructionKind::Triple | ConstructionKind::Theorem1 => {
                if self.x_pivot >= self.n {
                    return Err(Error::InvalidArgument(format!(
                        "pivot {} outside ground set of size {}",
                        self.x_pivot, self.n
                    )));
                }
            }
            ConstructionKind::Theorem2 | ConstructionKind::Corollary3 => {
                let eps = self.epsilon.ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "construction {} requires --epsilon p/q",
                        self.kind
                    ))
                })?;
                if !eps.less_than_one() {
                    return Err(Error::InvalidArgument(format!(
                        "epsilon {eps} must lie in (0, 1)"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A built landmark list plus the provenance needed to reproduce and
/// verify it. Serializes to the documented JSON wire form.
#[derive(Clone, Debug)]
pub struct Construction {
    pub kind: ConstructionKind,
    pub n: u32,
    pub seed: u64,
    /// Number of random samples drawn (0 for the bare triple).
    pub k: u32,
    pub masks: Vec<SubsetMask>,
    /// Size bound that comes with `Corollary3`.
    pub w: Option<u32>,
    /// Repeated masks in the list (kept, not resampled: dropping them
    /// would bias the i.i.d. model the size formulas assume).
    pub duplicate_count: u32,
}

/// `{∅, {x}, X∖{x}}` in that order. Degenerate at n = 1 where the third
/// member collapses to ∅; the duplicate is returned as-is and shows up in
/// `Construction::duplicate_count` when built through a spec.
pub fn build_triple(gs: &GroundSet, x: u32) -> Result<Vec<SubsetMask>> {
    let n = gs.n();
    if x >= n {
        return Err(Error::InvalidArgument(format!(
            "pivot {x} outside ground set of size {n}"
        )));
    }
    let singleton = SubsetMask::singleton(n, x)?;
    Ok(vec![SubsetMask::empty(n), singleton.clone(), singleton.complement()])
}

/// Sample count for the whole-space construction:
/// ceil(2·ln(2e)·n / ln(n/2)), with ln(2e) = 1 + ln 2. Undefined for
/// n <= 2 where the denominator vanishes; use `k_override` there.
pub fn theorem1_k(n: u32) -> Result<u32> {
    if n <= 2 {
        return Err(Error::Domain(format!(
            "sample-count formula needs n >= 3 (ln(n/2) must be positive); \
             got n = {n}, pass k_override instead"
        )));
    }
    let ln_2e = 1.0 + std::f64::consts::LN_2;
    let k = (2.0 * ln_2e * n as f64 / (n as f64 / 2.0).ln()).ceil();
    Ok(k as u32)
}

fn isqrt_u128(v: u128) -> u128 {
    if v < 2 {
        return v;
    }
    let mut x = 1u128 << (128 - v.leading_zeros()).div_ceil(2);
    loop {
        let y = (x + v / x) / 2;
        if y >= x {
            return x;
        }
        x = y;
    }
}

/// Sample count for the different-size construction: ceil((4+ε)·√n).
/// Evaluated in exact integer arithmetic so boundary cases (where
/// (4+ε)·√n is an integer) round the same on every platform.
pub fn theorem2_k(n: u32, epsilon: &Epsilon) -> Result<u32> {
    if n == 0 {
        return Err(Error::InvalidArgument("ground set must be non-empty".into()));
    }
    // k = ceil(c·√n / q) with c = 4q + p: the least k with (kq)² >= c²n.
    let q = epsilon.den() as u128;
    let c = 4 * q + epsilon.num() as u128;
    let t = c
        .checked_mul(c)
        .and_then(|cc| cc.checked_mul(n as u128))
        .ok_or_else(|| {
            Error::InvalidArgument(format!("epsilon {epsilon} too large for exact rounding"))
        })?;
    let s = isqrt_u128(t);
    let m0 = if s * s == t { s } else { s + 1 }; // ceil(√t)
    let k = m0.div_ceil(q);
    u32::try_from(k).map_err(|_| Error::InvalidArgument("sample count overflows u32".into()))
}

/// Size bound paired with `Corollary3`: floor((1−ε)·ln(π)·√n / ln n).
pub fn corollary3_w(n: u32, epsilon: &Epsilon) -> Result<u32> {
    if n <= 1 {
        return Err(Error::Domain(format!(
            "size-bound formula needs n >= 2; got n = {n}"
        )));
    }
    if !epsilon.less_than_one() {
        return Err(Error::InvalidArgument(format!(
            "epsilon {epsilon} must lie in (0, 1)"
        )));
    }
    let one_minus = 1.0 - epsilon.to_f64();
    let w = (one_minus * std::f64::consts::PI.ln() * (n as f64).sqrt() / (n as f64).ln()).floor();
    Ok(w as u32)
}

impl Construction {
    pub fn build(spec: &ConstructionSpec) -> Result<Construction> {
        spec.validate()?;
        let gs = GroundSet::new(spec.n)?;
        let mut rng = seeded_rng(spec.seed);

        let (k, mut masks, w) = match spec.kind {
            ConstructionKind::Triple => (0u32, build_triple(&gs, spec.x_pivot)?, None),
            ConstructionKind::Theorem1 => {
                let k = match spec.k_override {
                    Some(k) => k,
                    None => theorem1_k(spec.n)?,
                };
                let mut masks = build_triple(&gs, spec.x_pivot)?;
                for _ in 0..k {
                    masks.push(sample_binomial_subset(&gs, &mut rng));
                }
                (k, masks, None)
            }
            ConstructionKind::Theorem2 | ConstructionKind::Corollary3 => {
                let eps = spec.epsilon.expect("validated");
                let k = match spec.k_override {
                    Some(k) => k,
                    None => theorem2_k(spec.n, &eps)?,
                };
                let mut masks = Vec::with_capacity(2 * k as usize);
                for _ in 0..k {
                    let r = sample_binomial_subset(&gs, &mut rng);
                    masks.push(r.clone());
                    masks.push(r.complement());
                }
                let w = if spec.kind == ConstructionKind::Corollary3 {
                    Some(corollary3_w(spec.n, &eps)?)
                } else {
                    None
                };
                (k, masks, w)
            }
        };

        let distinct: HashSet<&SubsetMask> = masks.iter().collect();
        let duplicate_count = (masks.len() - distinct.len()) as u32;
        masks.shrink_to_fit();

        Ok(Construction {
            kind: spec.kind,
            n: spec.n,
            seed: spec.seed,
            k,
            masks,
            w,
            duplicate_count,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ConstructionWire::from(self)).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Construction> {
        let wire: ConstructionWire =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("bad construction JSON: {e}")))?;
        wire.try_into()
    }
}

/// Wire form: masks as hex strings (64-bit words, least-significant word
/// first, 16 lowercase digits per word).
#[derive(Serialize, Deserialize)]
struct ConstructionWire {
    n: u32,
    kind: ConstructionKind,
    seed: u64,
    k: u32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    w: Option<u32>,
    masks: Vec<String>,
}

impl From<&Construction> for ConstructionWire {
    fn from(c: &Construction) -> Self {
        ConstructionWire {
            n: c.n,
            kind: c.kind,
            seed: c.seed,
            k: c.k,
            w: c.w,
            masks: c.masks.iter().map(|m| m.to_hex()).collect(),
        }
    }
}

impl TryFrom<ConstructionWire> for Construction {
    type Error = Error;

    fn try_from(wire: ConstructionWire) -> Result<Construction> {
        if wire.n == 0 {
            return Err(Error::Parse("construction with empty ground set".into()));
        }
        let masks = wire
            .masks
            .iter()
            .map(|h| SubsetMask::from_hex(wire.n, h))
            .collect::<Result<Vec<_>>>()?;
        if masks.is_empty() {
            return Err(Error::Parse("construction with no masks".into()));
        }
        let distinct: HashSet<&SubsetMask> = masks.iter().collect();
        let duplicate_count = (masks.len() - distinct.len()) as u32;
        Ok(Construction {
            kind: wire.kind,
            n: wire.n,
            seed: wire.seed,
            k: wire.k,
            masks,
            w: wire.w,
            duplicate_count,
        })
    }
}
