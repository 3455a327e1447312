#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use pullback_heights::morphism::{Form, HomogeneousLift, NormalizedLift};
use pullback_heights::rational::{int, Multiindex, Rational};

/// Maps on P^1 given by builder strings; bad primes noted where present.
pub const BUILDERS: &[&str] = &[
    "identity:1",
    "power:1,2",
    "power:1,3",
    "chebyshev:2",
    "chebyshev:3",
    "rat:(z^2+1)|1",
    "rat:z^2-2|1",
    "rat:(z^3-3z)|1",
    "rat:(z^2+2)|(z^2+1)",
    "rat:(z^2+4)|(z^2+1)",
    "rat:(z^2-1)|(2z)",
    "rat:3z^2+1|1",
    "rat:2z^2+1|1",
    "rat:2z^3+1|1",
    "rat:5z^3+1|1",
    "rat:4z^2+1|1",
    "rat:z^4+1|2",
    "rat:(z^2+9)|(z^2+1)",
    "rat:(z^3+z)|(z^2+2)",
    "rat:(z^2+z+1)|(z^2-z+1)",
    "rat:(z+1)|(z-1)",
    "rat:(2z+1)|(z+3)",
    "rat:6z^2+1|1",
    "rat:(z^2+1)|(6z)",
    "rat:(z^2+3)|(2z)",
    "rat:(3z^2+1)|(2z)",
    "rat:(10z^2+1)|(z)",
];

/// Builders with two bad primes.
pub const TWO_BAD_PRIMES: &[&str] =
    &["rat:6z^2+1|1", "rat:(z^2+1)|(6z)", "rat:(z^2+3)|(2z)", "rat:(3z^2+1)|(2z)", "rat:(10z^2+1)|(z)"];

pub fn lift(s: &str) -> NormalizedLift {
    HomogeneousLift::parse_builder(s).unwrap().normalize().unwrap()
}

/// A lift on P^m from `(coefficient, exponents)` terms per form.
pub fn forms(m: usize, d: u32, terms: &[&[(i64, &[u32])]]) -> HomogeneousLift {
    let forms = terms
        .iter()
        .map(|form| {
            let mut out = Form::new();
            for (c, e) in form.iter() {
                *out.entry(Multiindex(e.to_vec())).or_insert_with(|| int(0)) += int(*c);
            }
            out
        })
        .collect();
    HomogeneousLift::new(m, d, forms).unwrap()
}

/// Maps on P^2.
pub fn plane_maps() -> Vec<(&'static str, NormalizedLift)> {
    vec![
        ("power:2,2", lift("power:2,2")),
        ("identity:2", lift("identity:2")),
        (
            "(X^2+2Z^2, Y^2, Z^2)",
            forms(2, 2, &[&[(1, &[2, 0, 0]), (2, &[0, 0, 2])], &[(1, &[0, 2, 0])], &[(1, &[0, 0, 2])]])
                .normalize()
                .unwrap(),
        ),
        (
            "(X^2+3YZ, Y^2+Z^2, 2Z^2)",
            forms(
                2,
                2,
                &[&[(1, &[2, 0, 0]), (3, &[0, 1, 1])], &[(1, &[0, 2, 0]), (1, &[0, 0, 2])], &[(2, &[0, 0, 2])]],
            )
            .normalize()
            .unwrap(),
        ),
        ("ternary quadrics", ternary_quadrics()),
        (
            "(X^2+XY, 3Y^2+XZ, 2Z^2)",
            forms(
                2,
                2,
                &[&[(1, &[2, 0, 0]), (1, &[1, 1, 0])], &[(3, &[0, 2, 0]), (1, &[1, 0, 1])], &[(2, &[0, 0, 2])]],
            )
            .normalize()
            .unwrap(),
        ),
    ]
}

/// Three ternary quadrics with `v_2(Res f) = 9`.
pub fn ternary_quadrics() -> NormalizedLift {
    let e: [&[u32]; 6] = [&[2, 0, 0], &[1, 1, 0], &[1, 0, 1], &[0, 2, 0], &[0, 1, 1], &[0, 0, 2]];
    let form = |c: [i64; 6]| -> Vec<(i64, &[u32])> { c.iter().zip(e).map(|(&c, e)| (c, e)).collect() };
    let (a, b, c) = (form([1, -1, 1, -1, 1, -1]), form([1, 1, 1, 1, -1, 1]), form([1, 1, 1, -1, -1, 1]));
    forms(2, 2, &[&a, &b, &c]).normalize().unwrap()
}

/// The full corpus as normalized lifts.
pub fn corpus() -> Vec<(String, NormalizedLift)> {
    let mut out: Vec<(String, NormalizedLift)> = BUILDERS.iter().map(|s| (s.to_string(), lift(s))).collect();
    out.extend(plane_maps().into_iter().map(|(n, f)| (n.to_string(), f)));
    out
}

pub fn big(xs: &[i64]) -> Vec<BigInt> {
    xs.iter().map(|&x| BigInt::from(x)).collect()
}

pub fn val(n: &BigInt, p: u64) -> u32 {
    let p = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    while !n.is_zero() && n.is_multiple_of(&p) {
        n /= &p;
        v += 1;
    }
    v
}

/// Distribution of `min(v_p(F(x)), r)` over all primitive tuples mod `p^r`.
pub fn flat_density(f: &NormalizedLift, p: u64, r: u32) -> BTreeMap<u32, Rational> {
    let q = p.pow(r);
    let n = f.m() + 1;
    let mut counts: BTreeMap<u32, u64> = BTreeMap::new();
    let mut total = 0u64;
    let mut x = vec![0u64; n];
    loop {
        if x.iter().any(|c| c % p != 0) {
            let xs: Vec<BigInt> = x.iter().map(|&c| BigInt::from(c)).collect();
            let v = f.evaluate_int(&xs).iter().filter(|y| !y.is_zero()).map(|y| val(y, p)).min().unwrap_or(r);
            *counts.entry(v.min(r)).or_default() += 1;
            total += 1;
        }
        let mut i = 0;
        while i < n {
            x[i] += 1;
            if x[i] < q {
                break;
            }
            x[i] = 0;
            i += 1;
        }
        if i == n {
            break;
        }
    }
    counts.into_iter().map(|(k, c)| (k, Rational::new(c.into(), total.into()))).collect()
}
