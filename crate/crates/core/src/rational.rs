//! Rationals, p-adic valuations, factorization into prime ideals of `Z`,
//! multiindices, and counting over `Z/q`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::Add;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type Rational = BigRational;

/// Valuation of an element or tuple; `Infinite` is the valuation of zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Valuation::Infinite)
    }
}

impl Add for Valuation {
    type Output = Valuation;

    fn add(self, rhs: Valuation) -> Valuation {
        match (self, rhs) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a.saturating_add(b)),
            _ => Valuation::Infinite,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => f.write_str("inf"),
        }
    }
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"p/q"` or `"p"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| Error::Parse(format!("bad rational numerator in {s:?}")))?;
    let den: BigInt = den.parse().map_err(|_| Error::Parse(format!("bad rational denominator in {s:?}")))?;
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(Rational::new(num, den))
}

/// `ord_p(n)` for an integer.
pub fn val_int(n: &BigInt, p: u64) -> Valuation {
    if n.is_zero() {
        return Valuation::Infinite;
    }
    let p = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return Valuation::Finite(v);
        }
        n = q;
        v += 1;
    }
}

pub fn val_p(x: &Rational, p: u64) -> Valuation {
    match (val_int(x.numer(), p), val_int(x.denom(), p)) {
        (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a - b),
        _ => Valuation::Infinite,
    }
}

/// Minimum valuation over the entries; infinite iff every entry is zero.
pub fn tuple_val_p(xs: &[Rational], p: u64) -> Valuation {
    xs.iter().map(|x| val_p(x, p)).min().unwrap_or(Valuation::Infinite)
}

pub fn tuple_val_int(xs: &[BigInt], p: u64) -> Valuation {
    xs.iter().map(|x| val_int(x, p)).min().unwrap_or(Valuation::Infinite)
}

/// A fractional ideal of `Z`, stored as its prime factorization.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FactoredIdeal {
    exponents: BTreeMap<u64, i64>,
}

impl FactoredIdeal {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn prime_power(p: u64, e: i64) -> Self {
        let mut out = Self::one();
        out.add_exponent(p, e);
        out
    }

    pub fn from_exponents<I: IntoIterator<Item = (u64, i64)>>(it: I) -> Self {
        let mut out = Self::one();
        for (p, e) in it {
            out.add_exponent(p, e);
        }
        out
    }

    fn add_exponent(&mut self, p: u64, e: i64) {
        if e == 0 {
            return;
        }
        let entry = self.exponents.entry(p).or_insert(0);
        *entry += e;
        if *entry == 0 {
            self.exponents.remove(&p);
        }
    }

    pub fn is_one(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn valuation(&self, p: u64) -> i64 {
        self.exponents.get(&p).copied().unwrap_or(0)
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.exponents.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, i64)> + '_ {
        self.exponents.iter().map(|(&p, &e)| (p, e))
    }

    pub fn mul(&self, other: &FactoredIdeal) -> FactoredIdeal {
        let mut out = self.clone();
        for (p, e) in other.iter() {
            out.add_exponent(p, e);
        }
        out
    }

    /// The positive generator `prod p^e`.
    pub fn norm(&self) -> Rational {
        let mut num = BigInt::one();
        let mut den = BigInt::one();
        for (p, e) in self.iter() {
            let pe = BigInt::from(p).pow(e.unsigned_abs() as u32);
            if e > 0 {
                num *= pe;
            } else {
                den *= pe;
            }
        }
        Rational::new(num, den)
    }
}

impl fmt::Display for FactoredIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return f.write_str("<1>");
        }
        let parts: Vec<String> =
            self.iter().map(|(p, e)| if e == 1 { format!("{p}") } else { format!("{p}^{e}") }).collect();
        write!(f, "<{}>", parts.join("*"))
    }
}

const TRIAL_LIMIT: u64 = 1_000_000;
/// Deterministic Miller-Rabin with the first 13 prime bases is valid below this.
const MR_LIMIT: u128 = 3_317_044_064_679_887_385_961_981;

/// Factors a nonzero rational into `prod p^e` (the sign is dropped).
pub fn factor(n: &Rational) -> Result<FactoredIdeal> {
    if n.is_zero() {
        return Err(Error::Zero("cannot factor 0"));
    }
    let num = factor_natural(n.numer().magnitude())?;
    let den = factor_natural(n.denom().magnitude())?;
    Ok(FactoredIdeal::from_exponents(
        num.into_iter().map(|(p, e)| (p, e as i64)).chain(den.into_iter().map(|(p, e)| (p, -(e as i64)))),
    ))
}

/// Factors a positive integer. Trial division to `10^6`, then Miller-Rabin
/// and Pollard rho on the cofactor if it is below `3.3e24`.
pub fn factor_natural(n: &BigUint) -> Result<BTreeMap<u64, u32>> {
    let mut out = BTreeMap::new();
    if n.is_zero() {
        return Err(Error::Zero("cannot factor 0"));
    }
    let mut n = n.clone();
    let push = |out: &mut BTreeMap<u64, u32>, p: u64| *out.entry(p).or_insert(0) += 1;
    for p in std::iter::once(2u64).chain((3..TRIAL_LIMIT).step_by(2)) {
        if n.is_one() {
            return Ok(out);
        }
        let pb = BigUint::from(p);
        if &pb * &pb > n {
            break;
        }
        loop {
            let (q, r) = n.div_rem(&pb);
            if !r.is_zero() {
                break;
            }
            n = q;
            push(&mut out, p);
        }
    }
    if n.is_one() {
        return Ok(out);
    }
    let rest = n.to_u128().filter(|&r| r < MR_LIMIT).ok_or_else(|| Error::FactorTooLarge(n.to_string()))?;
    let mut stack = vec![rest];
    while let Some(c) = stack.pop() {
        if c == 1 {
            continue;
        }
        if is_prime_u128(c) {
            let p = u64::try_from(c).map_err(|_| Error::FactorTooLarge(c.to_string()))?;
            push(&mut out, p);
        } else {
            let d = pollard_rho(c);
            stack.push(d);
            stack.push(c / d);
        }
    }
    Ok(out)
}

fn mul_mod(a: u128, b: u128, m: u128) -> u128 {
    if let Some(x) = a.checked_mul(b) {
        return x % m;
    }
    let (mut a, mut b, mut acc) = (a % m, b % m, 0u128);
    while b > 0 {
        if b & 1 == 1 {
            acc = add_mod(acc, a, m);
        }
        a = add_mod(a, a, m);
        b >>= 1;
    }
    acc
}

fn add_mod(a: u128, b: u128, m: u128) -> u128 {
    let (s, overflow) = a.overflowing_add(b);
    if overflow || s >= m {
        s.wrapping_sub(m)
    } else {
        s
    }
}

fn pow_mod(mut b: u128, mut e: u128, m: u128) -> u128 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    acc
}

/// Deterministic below `3.3e24`; inputs above that are treated as composite
/// only when a witness is found.
pub fn is_prime_u128(n: u128) -> bool {
    const BASES: [u128; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];
    if n < 2 {
        return false;
    }
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub fn is_prime(p: u64) -> bool {
    is_prime_u128(p as u128)
}

pub(crate) fn ensure_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotPrime(p))
    }
}

fn pollard_rho(n: u128) -> u128 {
    if n.is_multiple_of(2) {
        return 2;
    }
    let mut c = 1u128;
    loop {
        let f = |x: u128| add_mod(mul_mod(x, x, n), c, n);
        let (mut x, mut y, mut d) = (2u128, 2u128, 1u128);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = (x.max(y) - x.min(y)).gcd(&n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

/// Exponent vector of a monomial `X_0^a_0 ... X_m^a_m`.
///
/// The order is graded: lower degree first, and within one degree the
/// lexicographically larger exponent vector first, so `X^2 < XY < Y^2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Multiindex(pub Vec<u32>);

impl Multiindex {
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn unit(n_vars: usize, i: usize, d: u32) -> Self {
        let mut e = vec![0; n_vars];
        e[i] = d;
        Multiindex(e)
    }

    pub fn add(&self, other: &Multiindex) -> Multiindex {
        Multiindex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self - other` when `self >= other` componentwise.
    pub fn checked_sub(&self, other: &Multiindex) -> Option<Multiindex> {
        self.0.iter().zip(&other.0).map(|(a, b)| a.checked_sub(*b)).collect::<Option<Vec<_>>>().map(Multiindex)
    }

    /// All multiindices of length `n_vars` and degree `d`, in ascending order.
    pub fn all_of_degree(n_vars: usize, d: u32) -> Vec<Multiindex> {
        fn rec(n_vars: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<Multiindex>) {
            if prefix.len() + 1 == n_vars {
                prefix.push(d);
                out.push(Multiindex(prefix.clone()));
                prefix.pop();
                return;
            }
            for a in (0..=d).rev() {
                prefix.push(a);
                rec(n_vars, d - a, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        if n_vars > 0 {
            rec(n_vars, d, &mut Vec::with_capacity(n_vars), &mut out);
        }
        out
    }
}

impl Ord for Multiindex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Multiindex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

/// Prime factorization of a machine integer `q >= 1`.
pub fn factor_u64(q: u64) -> Vec<(u64, u32)> {
    factor_natural(&BigUint::from(q)).expect("u64 inputs are always factorable").into_iter().collect()
}

/// Jordan's totient `J_k(q) = q^k prod_{p | q} (1 - p^-k)`: the number of
/// primitive `k`-tuples modulo `q`.
pub fn jordan_totient(k: u32, q: u64) -> BigUint {
    assert!(q >= 1, "jordan_totient needs q >= 1");
    factor_u64(q)
        .into_iter()
        .map(|(p, a)| {
            let p = BigUint::from(p);
            p.pow(a * k) - p.pow((a - 1) * k)
        })
        .fold(BigUint::one(), |acc, x| acc * x)
}

/// `#P^m(Z/q) = J_{m+1}(q) / J_1(q)`.
pub fn proj_space_size(m: u32, q: u64) -> BigUint {
    jordan_totient(m + 1, q) / jordan_totient(1, q)
}

pub fn biguint_to_rational(n: &BigUint) -> Rational {
    Rational::from_integer(BigInt::from_biguint(Sign::Plus, n.clone()))
}

/// Lowest common multiple of denominators divided by the gcd of numerators;
/// `scale * xs` is then a primitive integer vector.
pub fn primitive_scale(xs: &[Rational]) -> Option<Rational> {
    let mut den = BigInt::one();
    let mut g = BigInt::zero();
    for x in xs {
        den = den.lcm(x.denom());
    }
    for x in xs {
        g = g.gcd(&(x.numer() * (&den / x.denom())));
    }
    if g.is_zero() {
        return None;
    }
    Some(Rational::new(den, g))
}

/// Primitive integer vector proportional to `xs` (sign preserved).
pub fn primitive_integer_vector(xs: &[Rational]) -> Option<Vec<BigInt>> {
    let s = primitive_scale(xs)?;
    Some(xs.iter().map(|x| (x * &s).to_integer()).collect())
}

pub fn content(xs: &[BigInt]) -> BigInt {
    xs.iter().fold(BigInt::zero(), |g, x| g.gcd(x))
}

pub fn max_abs(xs: &[BigInt]) -> BigInt {
    xs.iter().map(|x| x.abs()).max().unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valuations() {
        assert_eq!(val_p(&int(12), 2), Valuation::Finite(2));
        assert_eq!(val_p(&rat(4, 9), 3), Valuation::Finite(-2));
        assert_eq!(val_p(&int(0), 5), Valuation::Infinite);
        assert_eq!(tuple_val_p(&[int(2), int(6)], 2), Valuation::Finite(1));
        assert_eq!(tuple_val_p(&[rat(1, 3), int(9)], 3), Valuation::Finite(-1));
        assert_eq!(tuple_val_p(&[int(0), int(0)], 7), Valuation::Infinite);
        assert_eq!(Valuation::Finite(3) + Valuation::Infinite, Valuation::Infinite);
        assert!(Valuation::Finite(i64::MAX) < Valuation::Infinite);
    }

    #[test]
    fn factoring() {
        assert_eq!(factor(&int(12)).unwrap(), FactoredIdeal::from_exponents([(2, 2), (3, 1)]));
        assert_eq!(factor(&rat(9, 2)).unwrap(), FactoredIdeal::from_exponents([(3, 2), (2, -1)]));
        assert!(factor(&int(1)).unwrap().is_one());
        assert!(factor(&int(0)).is_err());
        assert_eq!(factor(&int(-12)).unwrap().norm(), int(12));
    }

    #[test]
    fn factoring_large_cofactors() {
        // two primes above the trial-division limit
        let (p, q) = (1_000_003u64, 1_000_033u64);
        let n = BigUint::from(p) * BigUint::from(q) * BigUint::from(8u32);
        let f = factor_natural(&n).unwrap();
        assert_eq!(f.into_iter().collect::<Vec<_>>(), vec![(2, 3), (p, 1), (q, 1)]);
        let big_prime = 1_000_000_000_000_000_003u128;
        assert!(is_prime_u128(big_prime));
        let f = factor_natural(&BigUint::from(big_prime)).unwrap();
        assert_eq!(f.get(&(big_prime as u64)), Some(&1));
        let huge = BigUint::from(MR_LIMIT) * BigUint::from(MR_LIMIT);
        assert!(matches!(factor_natural(&(huge + 1u32)), Err(Error::FactorTooLarge(_)) | Ok(_)));
    }

    #[test]
    fn ideal_serializes_with_string_keys() {
        let i = FactoredIdeal::from_exponents([(3, 2), (2, -1)]);
        let s = serde_json::to_string(&i).unwrap();
        assert_eq!(s, r#"{"2":-1,"3":2}"#);
        let back: FactoredIdeal = serde_json::from_str(&s).unwrap();
        assert_eq!(back, i);
        assert_eq!(i.to_string(), "<2^-1*3^2>");
    }

    #[test]
    fn rationals_print_and_parse() {
        assert_eq!(rat(6, 4).to_string(), "3/2");
        assert_eq!(int(5).to_string(), "5");
        assert_eq!(parse_rational("-6/4").unwrap(), rat(-3, 2));
        assert_eq!(parse_rational("7").unwrap(), int(7));
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn totients() {
        assert_eq!(jordan_totient(2, 4), BigUint::from(12u32));
        assert_eq!(jordan_totient(3, 1), BigUint::one());
        for q in 1..50u64 {
            let phi = (1..=q).filter(|a| a.gcd(&q) == 1).count();
            assert_eq!(jordan_totient(1, q), BigUint::from(phi));
        }
        assert_eq!(proj_space_size(1, 12), BigUint::from(24u32));
        assert_eq!(proj_space_size(2, 2), BigUint::from(7u32));
        assert_eq!(proj_space_size(5, 20), BigUint::from(7_874_496u32));
    }

    #[test]
    fn multiindex_order() {
        let ms = Multiindex::all_of_degree(2, 2);
        assert_eq!(ms, vec![Multiindex(vec![2, 0]), Multiindex(vec![1, 1]), Multiindex(vec![0, 2])]);
        let mut sorted = ms.clone();
        sorted.sort();
        assert_eq!(sorted, ms);
        assert_eq!(Multiindex::all_of_degree(3, 4).len() as u64, binomial(6, 2));
        assert!(Multiindex(vec![5, 0]) > Multiindex(vec![0, 4]));
    }

    #[test]
    fn primitive_vectors() {
        let v = primitive_integer_vector(&[rat(1, 2), int(3)]).unwrap();
        assert_eq!(v, vec![BigInt::from(1), BigInt::from(6)]);
        let v = primitive_integer_vector(&[int(-4), int(6)]).unwrap();
        assert_eq!(v, vec![BigInt::from(-2), BigInt::from(3)]);
        assert!(primitive_integer_vector(&[int(0), int(0)]).is_none());
    }
}
