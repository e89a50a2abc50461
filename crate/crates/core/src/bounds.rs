//! Collision probabilities and union-bound evaluators.
//!
//! Everything here is a pure function of integer (and rational) inputs.
//! Sums of astronomically large binomial terms are evaluated in the log
//! domain (ln-factorial tables plus log-sum-exp in a fixed order, so
//! results are bitwise stable run to run); small cases double as exact
//! big-integer oracles in the tests. Union bounds are reported un-clamped:
//! values above 1 are how the vacuous regime shows itself.

use num::bigint::BigUint;
use num::rational::Ratio;
use num::BigRational;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Natural log of a non-negative quantity; `NEG_INFINITY` encodes zero.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct LogProb(f64);

impl LogProb {
    pub fn from_log(log_value: f64) -> Self {
        LogProb(log_value)
    }

    pub fn zero() -> Self {
        LogProb(f64::NEG_INFINITY)
    }

    pub fn log(&self) -> f64 {
        self.0
    }

    pub fn value(&self) -> f64 {
        self.0.exp()
    }
}

/// ln(0!), ln(1!), ..., ln(n!) by direct summation; exact to f64 rounding.
pub fn ln_factorials(n: u32) -> Vec<f64> {
    let mut t = Vec::with_capacity(n as usize + 1);
    t.push(0.0);
    let mut acc = 0.0f64;
    for i in 1..=n as u64 {
        acc += (i as f64).ln();
        t.push(acc);
    }
    t
}

fn ln_binomial(lnfac: &[f64], n: u32, k: u32) -> f64 {
    debug_assert!(k <= n);
    lnfac[n as usize] - lnfac[k as usize] - lnfac[(n - k) as usize]
}

/// ln of the trinomial n! / (a! b! (n-a-b)!).
fn ln_multinomial3(lnfac: &[f64], n: u32, a: u32, b: u32) -> f64 {
    debug_assert!(a + b <= n);
    lnfac[n as usize] - lnfac[a as usize] - lnfac[b as usize] - lnfac[(n - a - b) as usize]
}

/// log(Σ exp(x)) accumulated in slice order; -inf entries drop out.
pub fn logsumexp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let mut acc = 0.0f64;
    for &t in terms {
        acc += (t - max).exp();
    }
    max + acc.ln()
}

// ---------------------------------------------------------------------------
// Counting lower bound
// ---------------------------------------------------------------------------

/// Signature-counting lower bound on the size of any resolving set:
/// restricted to subsets of one cardinality c, coordinates take at most
/// c + 1 values, so C(n, c) <= (c + 1)^|R|. Returns the ceiling of the
/// best exponent over all cardinalities.
pub fn pigeonhole_lower_bound(n: u32) -> Result<u64> {
    let (_, best) = pigeonhole_max_term(n)?;
    Ok(best.ceil() as u64)
}

/// Argmax cardinality and the raw (un-ceiled) exponent ln C(n,i) / ln(i+1).
pub fn pigeonhole_max_term(n: u32) -> Result<(u32, f64)> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "counting bound needs n >= 2; got n = {n}"
        )));
    }
    let lnfac = ln_factorials(n);
    let mut best = (1u32, f64::NEG_INFINITY);
    for i in 1..n {
        let v = ln_binomial(&lnfac, n, i) / ((i + 1) as f64).ln();
        if v > best.1 {
            best = (i, v);
        }
    }
    Ok(best)
}

/// The single-term variant at cardinality ⌊n/2⌋ with denominator
/// ln(n/2 + 1); never exceeds the max-scanned exponent.
pub fn pigeonhole_half_term(n: u32) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "counting bound needs n >= 2; got n = {n}"
        )));
    }
    let lnfac = ln_factorials(n);
    Ok(ln_binomial(&lnfac, n, n / 2) / (n as f64 / 2.0 + 1.0).ln())
}

// ---------------------------------------------------------------------------
// Equal-size collision probability
// ---------------------------------------------------------------------------

fn big_binomial(n: u32, k: u32) -> BigUint {
    let mut out = BigUint::from(1u32);
    for t in 0..k.min(n - k) {
        out = out * BigUint::from((n - t) as u64) / BigUint::from((t + 1) as u64);
    }
    out
}

/// Probability that a fair-coin subset r hits two fixed disjoint i-element
/// blocks equally often, i.e. collides a pair of equal-size sets whose
/// two-sided difference has i elements per side. Exact value C(2i, i)/4^i.
///
/// Enumeration confirms the j = 0 configuration (both blocks missed)
/// belongs to the event, so the full central sum is used; any variant that
/// drops one configuration understates the probability.
pub fn equal_size_collision_prob(i: u32) -> Result<BigRational> {
    if i == 0 {
        return Err(Error::InvalidArgument(
            "difference blocks must be non-empty".into(),
        ));
    }
    let num = big_binomial(2 * i, i);
    let den = BigUint::from(4u32).pow(i);
    Ok(Ratio::new(num.into(), den.into()))
}

// ---------------------------------------------------------------------------
// Sigma1 / Sigma3: equal-size union bounds
// ---------------------------------------------------------------------------

fn sigma1_term(lnfac: &[f64], n: u32, k: u32, i: u32) -> f64 {
    let ln_coll = ln_binomial(lnfac, 2 * i, i) - 2.0 * i as f64 * std::f64::consts::LN_2;
    ln_multinomial3(lnfac, n, i, i) + k as f64 * ln_coll
}

/// Union bound on the probability that k fair-coin landmarks leave some
/// pair of equal-size subsets unresolved:
/// Σ_{i=1}^{⌊n/2⌋} multinomial(n; i, i, n-2i) · {C(2i,i)/4^i}^k.
pub fn sigma1_bound(n: u32, k: u32) -> Result<LogProb> {
    if n < 2 {
        return Err(Error::Domain(format!("need n >= 2; got n = {n}")));
    }
    let lnfac = ln_factorials(n);
    let terms: Vec<f64> = (1..=n / 2).map(|i| sigma1_term(&lnfac, n, k, i)).collect();
    Ok(LogProb::from_log(logsumexp(&terms)))
}

/// The same summand truncated to block sizes 1..=w, bounding failure over
/// subsets of cardinality at most w only.
pub fn sigma3_bound(n: u32, k: u32, w: u32) -> Result<LogProb> {
    if n < 2 {
        return Err(Error::Domain(format!("need n >= 2; got n = {n}")));
    }
    if w < 1 || w > n / 2 {
        return Err(Error::InvalidArgument(format!(
            "truncation {w} outside 1..={}",
            n / 2
        )));
    }
    let lnfac = ln_factorials(n);
    let terms: Vec<f64> = (1..=w).map(|i| sigma1_term(&lnfac, n, k, i)).collect();
    Ok(LogProb::from_log(logsumexp(&terms)))
}

// ---------------------------------------------------------------------------
// Rho: double-collision probability for different-size pairs
// ---------------------------------------------------------------------------

fn rho_check_params(i: u32, j: u32, n: u32) -> Result<()> {
    if i < 1 || i > n || j >= i || i + j > n {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= i <= n, 0 <= j < i, i + j <= n; got i={i} j={j} n={n}"
        )));
    }
    Ok(())
}

/// Walk the (a, b) grid of intersection sizes with the two difference
/// blocks, solving the collision identity for the unique compatible |r|
/// and handing each admissible (a, b, c) to `emit`.
///
/// The identity: with Δ_c(r) = |c| − 2|c∩r|, a double collision with a
/// landmark and its complement forces Δ_X(r)·(Δ_v(r) − Δ_u(r)) = (i−j)·n,
/// where i, j are the sizes of the two difference blocks.
fn rho_scan(i: u32, j: u32, n: u32, mut emit: impl FnMut(u32, u32, u32)) {
    let m = n - i - j;
    let rhs = (i - j) as i128 * n as i128;
    for a in 0..=i {
        for b in 0..=j {
            // d = Δ_v − Δ_u for these intersection sizes.
            let d = (j as i128 - 2 * b as i128) - (i as i128 - 2 * a as i128);
            if d == 0 || rhs % d != 0 {
                continue;
            }
            let t = rhs / d; // required value of n − 2|r|
            let num = n as i128 - t;
            if num < 0 || num % 2 != 0 {
                continue;
            }
            let s = num / 2; // |r|
            if s > n as i128 {
                continue;
            }
            let c = s - a as i128 - b as i128; // |r| outside both blocks
            if c < 0 || c > m as i128 {
                continue;
            }
            emit(a, b, c as u32);
        }
    }
}

/// Exact numerator of rho over the denominator 2^n, available while the
/// count fits (n <= 127: every admissible product of three binomials is
/// at most 2^n).
pub fn rho_exact_fraction(i: u32, j: u32, n: u32) -> Result<(u128, u32)> {
    rho_check_params(i, j, n)?;
    if n > 127 {
        return Err(Error::ResourceLimit(format!(
            "exact rho numerator needs n <= 127; got n = {n}"
        )));
    }
    let m = n - i - j;
    let bin_i = binomial_row_u128(i);
    let bin_j = binomial_row_u128(j);
    let bin_m = binomial_row_u128(m);
    let mut count = 0u128;
    rho_scan(i, j, n, |a, b, c| {
        count += bin_i[a as usize] * bin_j[b as usize] * bin_m[c as usize];
    });
    Ok((count, n))
}

fn binomial_row_u128(n: u32) -> Vec<u128> {
    let mut row = vec![0u128; n as usize + 1];
    row[0] = 1;
    for k in 1..=n as usize {
        row[k] = row[k - 1] * (n as u128 - k as u128 + 1) / k as u128;
    }
    row
}

/// The probability that one fair-coin landmark together with its
/// complement fails to separate a pair whose difference blocks have sizes
/// i > j. Exact integer counting for n <= 127, log-domain products above.
pub fn rho_exact(i: u32, j: u32, n: u32) -> Result<f64> {
    rho_check_params(i, j, n)?;
    if n <= 127 {
        let (count, shift) = rho_exact_fraction(i, j, n)?;
        return Ok(count as f64 * (-(shift as f64) * std::f64::consts::LN_2).exp());
    }
    let m = n - i - j;
    let lnfac = ln_factorials(n);
    let ln2 = std::f64::consts::LN_2;
    let mut terms = Vec::new();
    rho_scan(i, j, n, |a, b, c| {
        terms.push(
            ln_binomial(&lnfac, i, a) + ln_binomial(&lnfac, j, b) + ln_binomial(&lnfac, m, c)
                - n as f64 * ln2,
        );
    });
    Ok(logsumexp(&terms).exp())
}

/// The exponent τ = (i−j)/2 · √(n/(i+j)); bounded below by √n/2 over the
/// whole valid (i, j) range.
pub fn rho_tau(i: u32, j: u32, n: u32) -> Result<f64> {
    rho_check_params(i, j, n)?;
    Ok((i - j) as f64 / 2.0 * (n as f64 / (i + j) as f64).sqrt())
}

/// Two-sided concentration bound 4·e^{−τ} on rho.
pub fn rho_hoeffding_bound(i: u32, j: u32, n: u32) -> Result<f64> {
    Ok(4.0 * (-rho_tau(i, j, n)?).exp())
}

/// The uniform floor of the exponent: τ >= √n/2 for every valid (i, j),
/// so rho <= 4·e^{−√n/2} everywhere.
pub fn rho_uniform_bound(n: u32) -> f64 {
    4.0 * (-(n as f64).sqrt() / 2.0).exp()
}

// ---------------------------------------------------------------------------
// Sigma2: different-size union bound
// ---------------------------------------------------------------------------

/// Which rho goes into the Sigma2 sum.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RhoMode {
    /// True per-cell probability; the per-cell cost is O(i·j), limited to
    /// n <= 200 by default.
    Exact,
    /// The concentration bound; cheap at any n, termwise dominates Exact.
    Hoeffding,
}

/// Default ground-set ceiling for the exact-rho variant.
pub const SIGMA2_EXACT_LIMIT: u32 = 200;

/// Union bound on the probability that k landmark/complement pairs leave
/// some pair of different-size subsets unresolved:
/// Σ_i Σ_j multinomial(n; i, j, n-i-j) · rho(i, j, n)^k over 0 <= j < i,
/// i + j <= n.
pub fn sigma2_bound(n: u32, k: u32, mode: RhoMode) -> Result<LogProb> {
    if n < 2 {
        return Err(Error::Domain(format!("need n >= 2; got n = {n}")));
    }
    if mode == RhoMode::Exact && n > SIGMA2_EXACT_LIMIT {
        return Err(Error::ResourceLimit(format!(
            "exact-rho grid is O(n^4) work; limit n <= {SIGMA2_EXACT_LIMIT}, \
             got n = {n} (use the Hoeffding variant)"
        )));
    }
    let lnfac = ln_factorials(n);
    let mut cells = Vec::new();
    for i in 1..=n {
        for j in 0..i.min(n - i + 1) {
            if i + j <= n {
                cells.push((i, j));
            }
        }
    }
    let terms: Vec<f64> = cells
        .par_iter()
        .map(|&(i, j)| {
            let lm = ln_multinomial3(&lnfac, n, i, j);
            if k == 0 {
                return lm;
            }
            let ln_rho = match mode {
                RhoMode::Exact => {
                    let rho = rho_exact(i, j, n).expect("validated cell");
                    if rho == 0.0 {
                        return f64::NEG_INFINITY;
                    }
                    rho.ln()
                }
                RhoMode::Hoeffding => {
                    4.0f64.ln() - rho_tau(i, j, n).expect("validated cell")
                }
            };
            lm + k as f64 * ln_rho
        })
        .collect();
    Ok(LogProb::from_log(logsumexp(&terms)))
}

/// Bundle of every bound at one (n, k) point, as the CLI emits it. Union
/// bounds are raw log values; exponentials may exceed 1 and that is the
/// point (it shows where a bound goes vacuous).
#[derive(Clone, Debug)]
pub struct BoundReport {
    pub n: u32,
    pub k: u32,
    pub sigma1: LogProb,
    /// Present while the exact-rho grid is affordable (n within
    /// [`SIGMA2_EXACT_LIMIT`]).
    pub sigma2_exact: Option<LogProb>,
    pub sigma2_hoeffding: LogProb,
    pub w: Option<u32>,
    pub sigma3: Option<LogProb>,
    /// Per-cell collision probabilities (i, j, rho) on request.
    pub rho_table: Option<Vec<(u32, u32, f64)>>,
}

impl BoundReport {
    pub fn evaluate(n: u32, k: u32, w: Option<u32>, with_rho_table: bool) -> Result<Self> {
        let sigma1 = sigma1_bound(n, k)?;
        let sigma2_exact = if n <= SIGMA2_EXACT_LIMIT {
            Some(sigma2_bound(n, k, RhoMode::Exact)?)
        } else {
            None
        };
        let sigma2_hoeffding = sigma2_bound(n, k, RhoMode::Hoeffding)?;
        let sigma3 = match w {
            Some(w) => Some(sigma3_bound(n, k, w)?),
            None => None,
        };
        let rho_table = if with_rho_table {
            if n > SIGMA2_EXACT_LIMIT {
                return Err(Error::ResourceLimit(format!(
                    "rho table needs n <= {SIGMA2_EXACT_LIMIT}; got n = {n}"
                )));
            }
            let mut table = Vec::new();
            for i in 1..=n {
                for j in 0..i {
                    if i + j <= n {
                        table.push((i, j, rho_exact(i, j, n)?));
                    }
                }
            }
            Some(table)
        } else {
            None
        };
        Ok(BoundReport {
            n,
            k,
            sigma1,
            sigma2_exact,
            sigma2_hoeffding,
            w,
            sigma3,
            rho_table,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setcore::{jaccard, sample_binomial_subset, seeded_rng, GroundSet, SubsetMask};
    use num::ToPrimitive;

    #[test]
    fn pigeonhole_values() {
        // n = 14: the scan peaks at i = 4 with exponent ~4.29 -> bound 5.
        let (argmax, value) = pigeonhole_max_term(14).unwrap();
        assert_eq!(argmax, 4);
        assert!((value - 4.2928).abs() < 1e-3, "value {value}");
        assert_eq!(pigeonhole_lower_bound(14).unwrap(), 5);

        // n = 4: i = 1 gives ln4/ln2 = 2, beating i = 2 (ln6/ln3 ~ 1.63).
        assert_eq!(pigeonhole_lower_bound(4).unwrap(), 2);

        assert!(pigeonhole_lower_bound(1).is_err());
    }

    #[test]
    fn pigeonhole_half_term_never_beats_max() {
        for n in 2..=100 {
            let (_, max) = pigeonhole_max_term(n).unwrap();
            let half = pigeonhole_half_term(n).unwrap();
            assert!(half <= max + 1e-12, "n={n}: half {half} > max {max}");
        }
    }

    /// Enumeration oracle: r over all subsets of 2i elements split into two
    /// fixed i-blocks; count equal intersections.
    fn collision_prob_oracle(i: u32) -> BigRational {
        let bits = 2 * i;
        let mut hits = 0u64;
        for r in 0..(1u64 << bits) {
            let left = (r & ((1 << i) - 1)).count_ones();
            let right = (r >> i).count_ones();
            if left == right {
                hits += 1;
            }
        }
        Ratio::new(BigUint::from(hits).into(), BigUint::from(1u64 << bits).into())
    }

    #[test]
    fn collision_prob_matches_enumeration() {
        assert_eq!(
            equal_size_collision_prob(1).unwrap(),
            Ratio::new(1.into(), 2.into())
        );
        assert_eq!(
            equal_size_collision_prob(2).unwrap(),
            Ratio::new(3.into(), 8.into())
        );
        for i in 1..=6 {
            assert_eq!(
                equal_size_collision_prob(i).unwrap(),
                collision_prob_oracle(i),
                "i = {i}"
            );
        }
        assert!(equal_size_collision_prob(0).is_err());
    }

    #[test]
    fn collision_prob_monotone_and_asymptotic() {
        let mut prev = 1.0f64;
        for i in 1..=60 {
            let p = equal_size_collision_prob(i).unwrap().to_f64().unwrap();
            assert!(p < prev, "not decreasing at i = {i}");
            prev = p;
        }
        // ~ 1/sqrt(i*pi) for large i.
        let p50 = equal_size_collision_prob(50).unwrap().to_f64().unwrap();
        let approx = 1.0 / (50.0 * std::f64::consts::PI).sqrt();
        assert!((p50 / approx - 1.0).abs() < 0.01);
    }

    #[test]
    fn collision_prob_monte_carlo() {
        // Fixed equal-size pair with i elements on each side of the
        // difference; empirical collision frequency over random landmarks
        // (including r = ∅) within 4 standard errors of C(2i,i)/4^i.
        let n = 12u32;
        let gs = GroundSet::new(n).unwrap();
        let trials = 200_000u64;
        for (i, seed) in [(1u32, 11u64), (2, 22), (3, 33)] {
            // a = {0..i} ∪ shared, b = {i..2i} ∪ shared.
            let shared: Vec<u32> = (2 * i..2 * i + 2).collect();
            let mut ea: Vec<u32> = (0..i).collect();
            ea.extend(&shared);
            let mut eb: Vec<u32> = (i..2 * i).collect();
            eb.extend(&shared);
            let a = SubsetMask::from_indices(n, &ea).unwrap();
            let b = SubsetMask::from_indices(n, &eb).unwrap();

            let expect = equal_size_collision_prob(i).unwrap().to_f64().unwrap();
            let mut rng = seeded_rng(seed);
            let mut hits = 0u64;
            for _ in 0..trials {
                let r = sample_binomial_subset(&gs, &mut rng);
                if jaccard(&a, &r).unwrap() == jaccard(&b, &r).unwrap() {
                    hits += 1;
                }
            }
            let freq = hits as f64 / trials as f64;
            let se = (expect * (1.0 - expect) / trials as f64).sqrt();
            assert!(
                (freq - expect).abs() <= 4.0 * se,
                "i={i}: freq {freq} vs {expect} (se {se})"
            );
        }
    }

    #[test]
    fn sigma1_regimes() {
        // Construction regime: comfortably below 1.
        let s = sigma1_bound(20, 30).unwrap();
        assert!(s.value() < 1.0, "log {}", s.log());
        // k = 1 is vacuous.
        let v = sigma1_bound(20, 1).unwrap();
        assert!(v.value() > 1.0);

        // The i = 1 summand is exactly n(n-1)/2^k.
        let lnfac = ln_factorials(20);
        let t1 = sigma1_term(&lnfac, 20, 30, 1);
        let expect = (20.0f64 * 19.0).ln() - 30.0 * std::f64::consts::LN_2;
        assert!((t1 - expect).abs() < 1e-12, "{t1} vs {expect}");

        // For large k that term dominates the whole sum.
        let k = 200u32;
        let s200 = sigma1_bound(20, k).unwrap();
        let lead = (20.0f64 * 19.0).ln() - k as f64 * std::f64::consts::LN_2;
        assert!((s200.log() - lead).abs() < 1e-9, "{} vs {lead}", s200.log());
    }

    #[test]
    fn sigma1_matches_exact_rational_small() {
        // Exact u128 rational evaluation at n = 10, k = 5: terms share the
        // denominator 4^(k * nhalf); compare ln within 1e-9 relative.
        let (n, k) = (10u32, 5u32);
        let nhalf = n / 2;
        let mut num_total = 0u128;
        let den_pow = 2 * k as u128 * nhalf as u128; // exponent of 2
        for i in 1..=nhalf {
            let multi = multinomial_u128(n, i, i);
            let coll = binomial_u128(2 * i, i).pow(k);
            // term = multi * coll / 2^(2ik); scale to the common denominator.
            let scale = 1u128 << (2 * (nhalf - i) as u128 * k as u128);
            num_total += multi * coll * scale;
        }
        let exact_log =
            (num_total as f64).ln() - den_pow as f64 * std::f64::consts::LN_2;
        let log_domain = sigma1_bound(n, k).unwrap().log();
        assert!(
            ((log_domain - exact_log) / exact_log).abs() < 1e-9,
            "{log_domain} vs {exact_log}"
        );
    }

    fn binomial_u128(n: u32, k: u32) -> u128 {
        let mut out = 1u128;
        for t in 0..k.min(n - k) {
            out = out * (n - t) as u128 / (t + 1) as u128;
        }
        out
    }

    fn multinomial_u128(n: u32, a: u32, b: u32) -> u128 {
        binomial_u128(n, a) * binomial_u128(n - a, b)
    }

    /// 2^n enumeration oracle for rho with u as the first i elements and v
    /// as the next j.
    fn rho_brute_count(i: u32, j: u32, n: u32) -> u128 {
        let mut count = 0u128;
        for r in 0..(1u64 << n) {
            let s = r.count_ones() as i64;
            let a = (r & ((1 << i) - 1)).count_ones() as i64;
            let b = ((r >> i) & ((1 << j) - 1)).count_ones() as i64;
            let delta_x = n as i64 - 2 * s;
            let delta_u = i as i64 - 2 * a;
            let delta_v = j as i64 - 2 * b;
            if delta_x * (delta_v - delta_u) == (i - j) as i64 * n as i64 {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn rho_fraction_matches_brute_force() {
        for n in [8u32, 10] {
            for i in 1..=n {
                for j in 0..i {
                    if i + j > n {
                        continue;
                    }
                    let (count, shift) = rho_exact_fraction(i, j, n).unwrap();
                    assert_eq!(shift, n);
                    assert_eq!(
                        count,
                        rho_brute_count(i, j, n),
                        "mismatch at i={i} j={j} n={n}"
                    );
                }
            }
        }
    }

    #[test]
    fn rho_singleton_vs_empty_is_impossible() {
        for n in 1..=20 {
            let (count, _) = rho_exact_fraction(1, 0, n).unwrap();
            assert_eq!(count, 0, "n = {n}");
        }
    }

    #[test]
    fn rho_bounds_and_params() {
        // Uniform bound 4e^{-2} at n = 16.
        assert!((rho_uniform_bound(16) - 0.5413).abs() < 1e-3);
        // tau(2, 0, 16) = sqrt(8); bound ~ 0.2363.
        let tau = rho_tau(2, 0, 16).unwrap();
        assert!((tau - 8.0f64.sqrt()).abs() < 1e-12);
        assert!((rho_hoeffding_bound(2, 0, 16).unwrap() - 0.2363).abs() < 1e-3);

        for n in [8u32, 16, 32, 64, 100, 128, 200] {
            let uniform = rho_uniform_bound(n);
            for i in 1..=n {
                for j in 0..i {
                    if i + j > n {
                        continue;
                    }
                    let exact = rho_exact(i, j, n).unwrap();
                    let hoeff = rho_hoeffding_bound(i, j, n).unwrap();
                    assert!(
                        exact <= hoeff + 1e-12,
                        "rho {exact} > bound {hoeff} at i={i} j={j} n={n}"
                    );
                    // The exponent itself dips below √n/2 on near-diagonal
                    // cells (e.g. i = j + 1 = 2), but the probability still
                    // clears the uniform bound with room to spare.
                    assert!(
                        exact <= uniform,
                        "rho {exact} > uniform {uniform} at i={i} j={j} n={n}"
                    );
                }
            }
        }
        assert!(rho_tau(2, 1, 24).unwrap() < (24.0f64).sqrt() / 2.0);

        assert!(rho_exact(0, 0, 4).is_err());
        assert!(rho_exact(3, 3, 10).is_err());
        assert!(rho_exact(8, 7, 10).is_err());
    }

    #[test]
    fn rho_monte_carlo() {
        // Empirical frequency of the collision identity over seeded
        // samples within 4 standard errors of the computed probability.
        // The n = 130 case exercises the log-domain path (the integer
        // counting path stops at n = 127).
        let cases = [
            (3u32, 1u32, 12u32, 7u64),
            (5, 2, 30, 8),
            (4, 0, 20, 9),
            (12, 11, 130, 10),
        ];
        let trials = 1_000_000u64;
        for (i, j, n, seed) in cases {
            let p = rho_exact(i, j, n).unwrap();
            let gs = GroundSet::new(n).unwrap();
            let mut rng = seeded_rng(seed);
            let mut hits = 0u64;
            for _ in 0..trials {
                let r = sample_binomial_subset(&gs, &mut rng);
                let s = r.cardinality() as i64;
                let a = (0..i).filter(|&x| r.contains(x)).count() as i64;
                let b = (i..i + j).filter(|&x| r.contains(x)).count() as i64;
                let delta_x = n as i64 - 2 * s;
                let d = (j as i64 - 2 * b) - (i as i64 - 2 * a);
                if delta_x * d == (i - j) as i64 * n as i64 {
                    hits += 1;
                }
            }
            let freq = hits as f64 / trials as f64;
            let se = (p * (1.0 - p) / trials as f64).sqrt().max(1e-9);
            assert!(
                (freq - p).abs() <= 4.0 * se,
                "i={i} j={j} n={n}: freq {freq} vs {p} (se {se})"
            );
        }
    }

    #[test]
    fn sigma2_regimes() {
        let e: f64 = sigma2_bound(24, 21, RhoMode::Exact).unwrap().log();
        let h = sigma2_bound(24, 21, RhoMode::Hoeffding).unwrap().log();
        assert!(e <= h + 1e-12, "exact {e} > hoeffding {h}");

        // Hoeffding variant: finite at the construction point. It is NOT
        // monotone in k: the substituted per-cell bound exceeds 1 on
        // near-diagonal cells, so its powers grow.
        let h36 = sigma2_bound(64, 36, RhoMode::Hoeffding).unwrap().log();
        assert!(h36.is_finite());

        // The exact variant is termwise nonincreasing in k (rho <= 1).
        let e36 = sigma2_bound(64, 36, RhoMode::Exact).unwrap().log();
        let e72 = sigma2_bound(64, 72, RhoMode::Exact).unwrap().log();
        assert!(e72 < e36, "{e72} vs {e36}");

        // k = 0 degenerates to the count of ordered difference profiles,
        // at least 1.
        let k0 = sigma2_bound(6, 0, RhoMode::Exact).unwrap();
        assert!(k0.value() >= 1.0);

        assert!(matches!(
            sigma2_bound(1000, 50, RhoMode::Exact),
            Err(Error::ResourceLimit(_))
        ));
        assert!(sigma2_bound(1000, 50, RhoMode::Hoeffding).is_ok());
    }

    #[test]
    fn sigma3_truncation() {
        // Full-range truncation is bit-identical to the equal-size bound:
        // same terms, same order, same code path.
        let full = sigma3_bound(20, 10, 10).unwrap();
        let s1 = sigma1_bound(20, 10).unwrap();
        assert_eq!(full.log().to_bits(), s1.log().to_bits());

        // Nondecreasing in w.
        let mut prev = f64::NEG_INFINITY;
        for w in 1..=10 {
            let v = sigma3_bound(20, 10, w).unwrap().log();
            assert!(v >= prev);
            prev = v;
        }

        // Small-subset regime: tiny failure bound.
        let c3 = sigma3_bound(256, 66, 2).unwrap();
        assert!(c3.value() <= 1e-6, "value {}", c3.value());

        assert!(sigma3_bound(20, 10, 0).is_err());
        assert!(sigma3_bound(20, 10, 11).is_err());
    }

    #[test]
    fn logsumexp_edge_cases() {
        assert_eq!(logsumexp(&[]), f64::NEG_INFINITY);
        assert_eq!(logsumexp(&[f64::NEG_INFINITY]), f64::NEG_INFINITY);
        let v = logsumexp(&[0.0, f64::NEG_INFINITY, 0.0]);
        assert!((v - 2.0f64.ln()).abs() < 1e-15);
        assert_eq!(LogProb::zero().value(), 0.0);
    }
}
