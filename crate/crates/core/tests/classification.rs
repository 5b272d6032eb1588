mod common;

use std::sync::Arc;

use common::{coeffs_i64, count_prime_field, example, extension_counts, model_is_good, primes_up_to, random_curves};
use kida_core::cache::TraceCache;
use kida_core::classify::{bulk_classify, classify_prime, cyclotomic_split_count, p2_membership, Classifier, QClass};
use kida_core::tate::{reduction_type, ReductionType};
use num_bigint::BigInt;
use num_traits::Zero;

#[test]
fn worked_example_local_data() {
    let e = example();
    assert_eq!(reduction_type(&e, 3).unwrap().reduction, ReductionType::Additive);
    assert!(reduction_type(&e, 11).unwrap().reduction.is_multiplicative());
    assert_eq!(count_prime_field(coeffs_i64(&e), 7), 10);
    let c7 = classify_prime(&e, 3, 7).unwrap();
    assert_eq!(c7.class, QClass::Q3);
    assert!(c7.in_script_q);
}

#[test]
fn classes_partition_the_primes() {
    for (seed, p) in [(1u64, 3u64), (2, 5), (3, 7)] {
        for m in random_curves(seed, 5, 15) {
            let a = coeffs_i64(&m);
            let rows = bulk_classify(&m, p, 600).unwrap();
            let expected: Vec<u64> = primes_up_to(600).into_iter().filter(|&l| l != p).collect();
            assert_eq!(rows.iter().map(|r| r.ell).collect::<Vec<_>>(), expected);
            for r in rows {
                // Primes above 3 are good for the minimal model iff they do
                // not divide this model's discriminant.
                if r.ell > 3 {
                    assert_eq!(r.class == QClass::Q1, !model_is_good(a, r.ell), "{m}, ell = {}", r.ell);
                }
                if r.class != QClass::Q1 && model_is_good(a, r.ell) {
                    let n = count_prime_field(a, r.ell);
                    assert_eq!(r.class == QClass::Q2, n % p == 0, "{m}, ell = {}", r.ell);
                    assert_eq!(r.a_ell, Some(r.ell as i64 + 1 - n as i64));
                }
                assert_eq!(r.in_script_q, r.class == QClass::Q3 && r.ell % p == 1);
            }
        }
    }
}

/// Divisibility by `p` of `#E(F_{ell^{f p^n}})` for some `n <= 3` is already
/// decided at `n = 0`.
#[test]
fn p2_membership_is_stable_in_the_cyclotomic_tower() {
    let curves = random_curves(2024, 100, 25);
    for m in &curves {
        let a = coeffs_i64(m);
        for ell in primes_up_to(200) {
            if !model_is_good(a, ell) {
                continue;
            }
            let counts = extension_counts(ell, ell as i64 + 1 - count_prime_field(a, ell) as i64, 625);
            for p in [3u64, 5] {
                for f in [1usize, p as usize] {
                    let divides = |k: usize| (&counts[k] % BigInt::from(p)).is_zero();
                    let any = (0..=3u32).any(|n| divides(f * (p as usize).pow(n)));
                    assert_eq!(any, divides(f), "{m}, p = {p}, ell = {ell}, f = {f}");
                    if ell != p && ell > 3 {
                        assert_eq!(p2_membership(m, p, ell, f as u32).unwrap(), divides(f));
                    }
                }
            }
        }
    }
}

#[test]
fn cyclotomic_splitting_matches_layer_count() {
    // The primes above ell in the n-th layer number p^n / (p-part of the
    // order of ell modulo p^{n+1}); m is where this stabilizes.
    for p in [3u64, 5, 7] {
        for ell in primes_up_to(3000).into_iter().filter(|&l| l != p) {
            let m = cyclotomic_split_count(ell, p).unwrap().m;
            let layer = |n: u32| {
                let modulus = p.pow(n + 1);
                let mut order = 1u64;
                let mut x = ell % modulus;
                while x != 1 {
                    x = x * (ell % modulus) % modulus;
                    order += 1;
                }
                let mut pp = 1;
                while order % p == 0 {
                    order /= p;
                    pp *= p;
                }
                p.pow(n) / pp
            };
            for n in 0..=4 {
                assert_eq!(layer(n), p.pow(m.min(n)), "p = {p}, ell = {ell}, n = {n}");
            }
        }
    }
}

#[test]
fn cache_round_trip_keeps_classification() {
    let dir = tempfile::tempdir().unwrap();
    let e = example();
    let plain = Classifier::new(&e, 3).unwrap().bulk_classify(5000).unwrap();
    for _ in 0..2 {
        let cache = TraceCache::open(dir.path(), &e).unwrap();
        let c = Classifier::new(&e, 3).unwrap().with_cache(Arc::new(cache));
        assert_eq!(c.bulk_classify(5000).unwrap(), plain);
    }
    let cache = TraceCache::open(dir.path(), &e).unwrap();
    assert!(cache.len() > 600);
}
