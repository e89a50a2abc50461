//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line (visible with `cargo test --test acceptance -- --nocapture`).
//! Every tolerance is pinned here, in code.

use num::bigint::BigUint;
use num::rational::Ratio;
use num::{BigRational, ToPrimitive, Zero};

use jaccard_resolve::bounds::{
    equal_size_collision_prob, pigeonhole_lower_bound, rho_exact, rho_exact_fraction,
    rho_uniform_bound, sigma1_bound, sigma3_bound,
};
use jaccard_resolve::cli::{cmd_experiment, ExperimentConfig};
use jaccard_resolve::construct::{build_triple, theorem1_k, theorem2_k, Epsilon};
use jaccard_resolve::construct::ConstructionKind;
use jaccard_resolve::dimension::{
    exact_metric_dimension, ich_greedy, TABLE1_AVG_CARDINALITY, TABLE1_SIZES,
};
use jaccard_resolve::resolve::{
    double_collision_identity, inner_product_collision_test, verify_resolving, Scope,
};
use jaccard_resolve::setcore::{jaccard, GroundSet, SubsetMask};
use jaccard_resolve::Limits;

fn report(criterion: &str, ok: bool, detail: &str) {
    println!(
        "{}: criterion {criterion}: {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {criterion}: {detail}");
}

#[test]
fn criterion_01_table1_reproduction() {
    // n = 1..=12: heuristic sizes within ±1 of the published row, every
    // set verified resolving by exhaustive signature check, averages
    // within ±1.5 of the published bottom row.
    let limits = Limits::default();
    let mut detail = String::new();
    let mut ok = true;
    for n in 1..=12u32 {
        let r = ich_greedy(&GroundSet::new(n).unwrap(), &limits).unwrap();
        let want = TABLE1_SIZES[(n - 1) as usize];
        let avg_want = TABLE1_AVG_CARDINALITY[(n - 1) as usize];
        let avg = r.avg_landmark_cardinality.to_f64();
        let verified = verify_resolving(&r.landmarks, Scope::AllPairs, &limits)
            .unwrap()
            .resolving;
        let row_ok = r.size.abs_diff(want) <= 1 && (avg - avg_want).abs() <= 1.5 && verified;
        ok &= row_ok;
        detail.push_str(&format!("n={n}:{}({want}) ", r.size));
        if !row_ok {
            detail.push_str(&format!(
                "[size {} vs {want}±1, avg {avg:.2} vs {avg_want}±1.5, verified {verified}] ",
                r.size
            ));
        }
    }
    report("1 (table reproduction n=1..12)", ok, detail.trim());
}

#[test]
fn criterion_02_exact_dimension() {
    let limits = Limits::default();
    let expect = [1u32, 2, 2, 3];
    let mut got = Vec::new();
    for n in 1..=4u32 {
        got.push(
            exact_metric_dimension(&GroundSet::new(n).unwrap(), &limits)
                .unwrap()
                .beta,
        );
    }
    report(
        "2 (exact beta n=1..4)",
        got == expect,
        &format!("beta = {got:?}, expected {expect:?}"),
    );
}

#[test]
fn criterion_03_theorem1_desk_scale() {
    // n = 14, k from the closed form, 100 seeded trials, exhaustive
    // signature injectivity over all 2^14 subsets.
    let config = ExperimentConfig {
        kind: ConstructionKind::Theorem1,
        n: 14,
        seed: 140_001,
        trials: 100,
        epsilon: None,
        scope: None,
        k_override: None,
        limits: Limits::default(),
    };
    let s = cmd_experiment(&config).unwrap();
    assert_eq!(s.k, theorem1_k(14).unwrap());
    report(
        "3 (whole-space construction n=14)",
        s.successes >= 99,
        &format!("{}/{} trials resolving (k = {})", s.successes, s.trials, s.k),
    );
}

#[test]
fn criterion_04_theorem2_desk_scale() {
    // n = 24, eps = 1/10 (k = 21, 42 landmarks), 100 trials: no
    // different-cardinality signature collision over all 2^24 subsets.
    let eps: Epsilon = "1/10".parse().unwrap();
    assert_eq!(theorem2_k(24, &eps).unwrap(), 21);
    let config = ExperimentConfig {
        kind: ConstructionKind::Theorem2,
        n: 24,
        seed: 240_001,
        trials: 100,
        epsilon: Some(eps),
        scope: None,
        k_override: None,
        limits: Limits::default(),
    };
    let s = cmd_experiment(&config).unwrap();
    assert_eq!(s.set_size, 42);
    report(
        "4 (different-size construction n=24)",
        s.successes >= 99,
        &format!("{}/{} trials resolving (set size {})", s.successes, s.trials, s.set_size),
    );
}

#[test]
fn criterion_05_corollary3_small_subsets() {
    // n = 256, eps = 1/10, W = 2: 20/20 trials resolve all 32 897 subsets
    // of size at most 2.
    let config = ExperimentConfig {
        kind: ConstructionKind::Corollary3,
        n: 256,
        seed: 256_001,
        trials: 20,
        epsilon: Some("1/10".parse().unwrap()),
        scope: None,
        k_override: None,
        limits: Limits::default(),
    };
    let s = cmd_experiment(&config).unwrap();
    assert_eq!(s.scope, Scope::SizeAtMost { w: 2 });
    report(
        "5 (small-subset resolution n=256, W=2)",
        s.successes == 20,
        &format!("{}/20 trials resolving (k = {})", s.successes, s.k),
    );
}

#[test]
fn criterion_06_collision_probability_oracle() {
    // Exhaustive enumeration embedded in n = 10: the collision frequency
    // for difference blocks of size i equals C(2i,i)/4^i exactly as
    // rationals, for i = 1..=4.
    let n = 10u32;
    let mut ok = true;
    for i in 1..=4u32 {
        let mut hits = 0u64;
        for r in 0u64..(1 << n) {
            let left = (r & ((1 << i) - 1)).count_ones();
            let right = ((r >> i) & ((1 << i) - 1)).count_ones();
            if left == right {
                hits += 1;
            }
        }
        let measured: BigRational =
            Ratio::new(BigUint::from(hits).into(), BigUint::from(1u64 << n).into());
        ok &= measured == equal_size_collision_prob(i).unwrap();
    }
    // The published closed form subtracts 1 from the central binomial
    // (summing configurations from j = 1); enumeration shows the j = 0
    // configuration (both blocks missed) belongs to the event, so the
    // un-subtracted C(2i,i)/4^i is the correct value, and the later
    // union-bound summand uses the un-subtracted form anyway. The "-1"
    // variant understates each probability by exactly 1/4^i.
    report(
        "6 (collision probability oracle, i=1..4 in n=10)",
        ok,
        "exact match; '-1' variant documented as understating by 1/4^i",
    );
}

#[test]
fn criterion_07_rho_oracle_equivalence() {
    // rho equals 2^n brute-force enumeration exactly at n = 10 and 12,
    // and clears the uniform envelope 4·exp(-sqrt(n)/2) for n = 8..=64.
    let mut ok = true;
    for n in [10u32, 12] {
        for i in 1..=n {
            for j in 0..i {
                if i + j > n {
                    continue;
                }
                let (count, shift) = rho_exact_fraction(i, j, n).unwrap();
                let mut brute = 0u128;
                for r in 0u64..(1 << n) {
                    let s = r.count_ones() as i64;
                    let a = (r & ((1 << i) - 1)).count_ones() as i64;
                    let b = ((r >> i) & ((1 << j) - 1)).count_ones() as i64;
                    if (n as i64 - 2 * s)
                        * ((j as i64 - 2 * b) - (i as i64 - 2 * a))
                        == (i - j) as i64 * n as i64
                    {
                        brute += 1;
                    }
                }
                ok &= count == brute && shift == n;
            }
        }
    }
    let mut envelope_ok = true;
    for n in 8..=64u32 {
        let bound = rho_uniform_bound(n);
        for i in 1..=n {
            for j in 0..i {
                if i + j > n {
                    continue;
                }
                envelope_ok &= rho_exact(i, j, n).unwrap() <= bound;
            }
        }
    }
    report(
        "7 (rho oracle equivalence + uniform envelope)",
        ok && envelope_ok,
        &format!("brute-force match at n=10,12: {ok}; envelope n=8..64: {envelope_ok}"),
    );
}

#[test]
fn criterion_08_rho_singleton_empty_zero() {
    let mut ok = true;
    for n in 1..=20u32 {
        let (count, _) = rho_exact_fraction(1, 0, n).unwrap();
        ok &= count == 0;
    }
    report("8 (rho(1,0,n) = 0 for n=1..20)", ok, "exact zeros");
}

#[test]
fn criterion_09_inner_product_equivalence_n5() {
    // All 32^3 triples with r != ∅: the integer test holds iff the two
    // Jaccard distances are equal. Zero exceptions.
    let n = 5u32;
    let mut exceptions = 0u64;
    for ab in 0..(1u64 << n) {
        let a = SubsetMask::from_u64(n, ab);
        for bb in 0..(1u64 << n) {
            let b = SubsetMask::from_u64(n, bb);
            for rb in 1..(1u64 << n) {
                let r = SubsetMask::from_u64(n, rb);
                let collide = jaccard(&a, &r).unwrap() == jaccard(&b, &r).unwrap();
                if inner_product_collision_test(&a, &b, &r) != collide {
                    exceptions += 1;
                }
            }
        }
    }
    report(
        "9 (inner-product characterization at n=5)",
        exceptions == 0,
        &format!("{exceptions} exceptions over 31744 triples"),
    );
}

#[test]
fn criterion_10_double_collision_implication_n5() {
    // Whenever a pair collides with both r and its complement, the
    // integer identity holds. Zero exceptions.
    let n = 5u32;
    let mut exceptions = 0u64;
    let mut premises = 0u64;
    for ab in 0..(1u64 << n) {
        let a = SubsetMask::from_u64(n, ab);
        for bb in 0..(1u64 << n) {
            let b = SubsetMask::from_u64(n, bb);
            for rb in 0..(1u64 << n) {
                let r = SubsetMask::from_u64(n, rb);
                let rc = r.complement();
                let double = jaccard(&a, &r).unwrap() == jaccard(&b, &r).unwrap()
                    && jaccard(&a, &rc).unwrap() == jaccard(&b, &rc).unwrap();
                if double {
                    premises += 1;
                    if !double_collision_identity(&a, &b, &r) {
                        exceptions += 1;
                    }
                }
            }
        }
    }
    report(
        "10 (double-collision identity at n=5)",
        exceptions == 0 && premises > 0,
        &format!("{exceptions} exceptions over {premises} double collisions"),
    );
}

#[test]
fn criterion_11_triple_resolves_unequal_sizes() {
    // n = 2..=10, every pivot: {∅, {x}, X∖{x}} resolves every pair of
    // different cardinality (restricted-scope exhaustive check).
    let limits = Limits::default();
    let mut ok = true;
    for n in 2..=10u32 {
        let gs = GroundSet::new(n).unwrap();
        for x in 0..n {
            let t = build_triple(&gs, x).unwrap();
            ok &= verify_resolving(&t, Scope::DifferentSizeOnly, &limits)
                .unwrap()
                .resolving;
        }
    }
    report("11 (triple lemma n=2..10, all pivots)", ok, "all resolving");
}

// --- criterion 12 helpers: exact big-rational oracle for the equal-size
// union bound, independent of the log-domain path. ---

fn big_factorial(n: u32) -> BigUint {
    let mut out = BigUint::from(1u32);
    for t in 2..=n as u64 {
        out *= BigUint::from(t);
    }
    out
}

fn big_multinomial3(n: u32, a: u32, b: u32) -> BigUint {
    big_factorial(n) / (big_factorial(a) * big_factorial(b) * big_factorial(n - a - b))
}

fn big_binomial(n: u32, k: u32) -> BigUint {
    big_factorial(n) / (big_factorial(k) * big_factorial(n - k))
}

fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 53 {
        return x.to_f64().unwrap().ln();
    }
    let shift = bits - 53;
    let top: BigUint = x >> shift;
    top.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

fn sigma1_exact_log(n: u32, k: u32) -> f64 {
    let mut total: BigRational = BigRational::zero();
    for i in 1..=n / 2 {
        let num = big_multinomial3(n, i, i) * big_binomial(2 * i, i).pow(k);
        let den = BigUint::from(4u32).pow(i * k);
        total += BigRational::new(num.into(), den.into());
    }
    let num = total.numer().magnitude();
    let den = total.denom().magnitude();
    ln_biguint(num) - ln_biguint(den)
}

#[test]
fn criterion_12_bound_consistency() {
    let limits = Limits::default();
    let mut ok = true;
    let mut detail = Vec::new();

    // Counting lower bound never exceeds the certified dimension (n <= 4)
    // or the heuristic size (n <= 12).
    for n in 2..=4u32 {
        let beta = exact_metric_dimension(&GroundSet::new(n).unwrap(), &limits)
            .unwrap()
            .beta as u64;
        let lb = pigeonhole_lower_bound(n).unwrap();
        if lb > beta {
            ok = false;
            detail.push(format!("lb({n})={lb} > beta={beta}"));
        }
    }
    for n in 2..=12u32 {
        let size = ich_greedy(&GroundSet::new(n).unwrap(), &limits).unwrap().size as u64;
        let lb = pigeonhole_lower_bound(n).unwrap();
        if lb > size {
            ok = false;
            detail.push(format!("lb({n})={lb} > ich={size}"));
        }
    }

    // Whole-space union bound below 1 in the construction regime.
    let k20 = theorem1_k(20).unwrap();
    let s1 = sigma1_bound(20, k20).unwrap();
    if s1.value().is_nan() || s1.value() >= 1.0 {
        ok = false;
        detail.push(format!("sigma1(20,{k20})={}", s1.value()));
    }

    // Small-subset regime at the published construction point.
    let eps: Epsilon = "1/10".parse().unwrap();
    let k256 = theorem2_k(256, &eps).unwrap();
    let s3 = sigma3_bound(256, k256, 2).unwrap();
    if s3.value().is_nan() || s3.value() > 1e-6 {
        ok = false;
        detail.push(format!("sigma3(256,{k256},2)={}", s3.value()));
    }

    // Log-domain vs exact big-rational evaluation within 1e-9 relative.
    for (n, k) in [(5u32, 3u32), (10, 7), (16, 20), (20, k20), (20, 1)] {
        let exact = sigma1_exact_log(n, k);
        let log_domain = sigma1_bound(n, k).unwrap().log();
        let rel = ((log_domain - exact) / exact).abs();
        if rel > 1e-9 {
            ok = false;
            detail.push(format!("sigma1({n},{k}): rel err {rel:e}"));
        }
    }

    let detail = if detail.is_empty() {
        "all checks hold".to_string()
    } else {
        detail.join("; ")
    };
    report("12 (bound consistency)", ok, &detail);
}

#[test]
fn trend_success_rate_nondecreasing_in_k() {
    // Finite-n stand-in for the asymptotic claims: at fixed n the success
    // rate is non-decreasing across k in {k*/2, k*, 2k*}.
    let n = 10u32;
    let k_star = theorem1_k(n).unwrap();
    let mut rates = Vec::new();
    for k in [k_star / 2, k_star, 2 * k_star] {
        let config = ExperimentConfig {
            kind: ConstructionKind::Theorem1,
            n,
            seed: 777,
            trials: 60,
            epsilon: None,
            scope: None,
            k_override: Some(k),
            limits: Limits::default(),
        };
        let s = cmd_experiment(&config).unwrap();
        rates.push((k, s.successes));
    }
    let ok = rates.windows(2).all(|w| w[0].1 <= w[1].1);
    report(
        "trend (success non-decreasing in k)",
        ok,
        &format!("successes/60 at k={:?}", rates),
    );
}
