mod common;

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use pullback_heights::morphism::NormalizedLift;
use pullback_heights::padic::{
    canonical_mod, enumerate_proj_points, excess_divisor, excess_valuation, global_densities, local_density,
    nonarch_constant, reduce_mod,
};
use pullback_heights::radical::RootSum;
use pullback_heights::rational::{proj_space_size, rat, FactoredIdeal, Rational};
use pullback_heights::resultant::resultant_data_normalized;

use common::{big, corpus, flat_density, lift, TWO_BAD_PRIMES};

fn cached() -> &'static [(String, NormalizedLift)] {
    static CORPUS: OnceLock<Vec<(String, NormalizedLift)>> = OnceLock::new();
    CORPUS.get_or_init(corpus)
}

#[test]
fn adaptive_refinement_matches_flat_enumeration() {
    let mut checked = 0;
    for (name, f) in corpus() {
        let res = resultant_data_normalized(&f).unwrap();
        for p in res.bad_primes() {
            let r = res.valuation(p);
            if (p as f64).powi((r as i32) * (f.m() as i32 + 1)) > 1e6 {
                continue;
            }
            let table = local_density(&f, p).unwrap();
            let mut adaptive = table.weights.clone();
            adaptive.retain(|_, w| !w.is_zero());
            assert_eq!(adaptive, flat_density(&f, p, r), "{name} at {p}");
            checked += 1;
        }
    }
    assert!(checked >= 20, "only {checked} instances");
}

#[test]
fn tables_sum_to_one_and_excess_is_bounded_by_resultant() {
    for (name, f) in corpus() {
        let res = resultant_data_normalized(&f).unwrap();
        for p in [2u64, 3, 5, 7] {
            let table = local_density(&f, p).unwrap();
            assert!(table.total().is_one(), "{name} at {p}");
            assert!(table.max_excess() <= res.valuation(p), "{name} at {p}");
        }
    }
}

#[test]
fn good_reduction_means_zero_excess_mod_p() {
    for (name, f) in corpus() {
        let res = resultant_data_normalized(&f).unwrap();
        for p in [2u64, 3, 5, 7] {
            if res.valuation(p) > 0 {
                continue;
            }
            for pt in enumerate_proj_points(f.m(), p, 1).unwrap() {
                let x: Vec<BigInt> = pt.coords.iter().map(|&c| BigInt::from(c)).collect();
                assert_eq!(excess_valuation(&f, p, &x).unwrap(), 0, "{name} at {p}");
            }
        }
    }
}

#[test]
fn enumeration_size_matches_jordan_totient() {
    for (m, p, s) in [(1usize, 2u64, 3u32), (1, 3, 2), (2, 2, 2), (2, 5, 1), (3, 3, 1)] {
        let n = enumerate_proj_points(m, p, s).unwrap().count() as u64;
        assert_eq!(BigInt::from(n), proj_space_size(m as u32, p.pow(s)).into());
    }
}

#[test]
fn density_formula_identity_on_corpus() {
    let mut two_primes = 0;
    for (name, f) in corpus() {
        let n = nonarch_constant(&f).unwrap();
        let densities = global_densities(&f).unwrap();
        let total: Rational = densities.values().cloned().sum();
        assert!(total.is_one(), "{name}");
        let sum = pullback_heights::padic::density_formula_sum(&densities, f.m(), f.degree());
        assert_eq!(sum, n.c0, "{name}");
        if n.locals.len() == 2 {
            two_primes += 1;
        }
    }
    assert!(two_primes >= 2);
}

#[test]
fn joint_density_by_crt_enumeration() {
    for s in TWO_BAD_PRIMES {
        let f = lift(s);
        let res = resultant_data_normalized(&f).unwrap();
        let primes = res.bad_primes();
        let (p, q) = (primes[0], primes[1]);
        let densities = global_densities(&f).unwrap();
        let expected =
            densities.get(&FactoredIdeal::from_exponents([(p, 1), (q, 1)])).cloned().unwrap_or_else(Rational::zero);
        let (tp, tq) = (local_density(&f, p).unwrap(), local_density(&f, q).unwrap());
        assert_eq!(expected, tp.weight(1) * tq.weight(1), "{s}");
        if res.valuation(p) > 1 || res.valuation(q) > 1 {
            continue;
        }
        // every excess is 0 or 1, so it is read off mod pq
        let n = p * q;
        let (mut hits, mut total) = (0u64, 0u64);
        for a in 0..n {
            for b in 0..n {
                let x = big(&[a as i64, b as i64]);
                if x.iter().fold(BigInt::zero(), |g, c| g.gcd(c)).gcd(&BigInt::from(n)) != BigInt::one() {
                    continue;
                }
                total += 1;
                let y = f.evaluate_int(&x);
                if y.iter().all(|c| c.is_multiple_of(&BigInt::from(n))) {
                    hits += 1;
                }
            }
        }
        assert_eq!(expected, Rational::new(hits.into(), total.into()), "{s}");
    }
}

#[test]
fn strict_inequality_example() {
    let f = lift("rat:3z^2+1|1");
    let n = nonarch_constant(&f).unwrap();
    assert_eq!(n.c0, RootSum::rational(rat(3, 2)));
    assert_eq!(n.mu_product(), rat(1, 1));
}

proptest! {
    #[test]
    fn crt_reduction_is_consistent(a in -10_000i64..10_000, b in -10_000i64..10_000, c in 1i64..500) {
        prop_assume!(a != 0 || b != 0);
        let x = vec![rat(a, c), rat(b, 1)];
        for (p, q) in [(2u64, 3u64), (3, 5), (4, 9), (7, 8)] {
            let joint = reduce_mod(&x, p * q).unwrap();
            let lifted: Vec<BigInt> = joint.coords.iter().map(|&v| BigInt::from(v)).collect();
            prop_assert_eq!(canonical_mod(&lifted, p).unwrap(), reduce_mod(&x, p).unwrap());
            prop_assert_eq!(canonical_mod(&lifted, q).unwrap(), reduce_mod(&x, q).unwrap());
        }
    }

    #[test]
    fn excess_is_bounded_on_random_points(idx in 0usize..common::BUILDERS.len(), a in -100_000i64..100_000, b in -100_000i64..100_000) {
        let (_, f) = &cached()[idx];
        prop_assume!(a != 0 || b != 0);
        let g = a.gcd(&b);
        let res = resultant_data_normalized(f).unwrap();
        for p in [2u64, 3, 5] {
            prop_assert!(excess_valuation(f, p, &big(&[a / g, b / g])).unwrap() <= res.valuation(p));
        }
    }

}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn image_height_two_ways(idx in 0usize..1000, a in -5_000i64..5_000, b in -5_000i64..5_000, c in -5_000i64..5_000) {
        let all = cached();
        let (name, f) = &all[idx % all.len()];
        let x = if f.m() == 1 { big(&[a, b]) } else { big(&[a, b, c]) };
        let g = x.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
        prop_assume!(!g.is_zero());
        let x: Vec<BigInt> = x.iter().map(|c| c / &g).collect();
        let y = f.evaluate_int(&x);
        let direct = {
            let content = y.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
            y.iter().map(|c| c.abs()).max().unwrap() / content
        };
        let bad = resultant_data_normalized(f).unwrap().bad_primes();
        let ell = excess_divisor(f, &x, &bad).unwrap();
        let via_excess = Rational::from(y.iter().map(|c| c.abs()).max().unwrap()) / ell.norm();
        prop_assert_eq!(Rational::from(direct), via_excess, "{}", name);
    }
}
