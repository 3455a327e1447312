//! Exact sums `sum_k c_k prod_p p^(r_{k,p}/n)` with rational `c_k`.
//!
//! With `0 <= r < n` the products of `n`-th roots of distinct primes are
//! linearly independent over `Q`, so the reduced representation is unique
//! and equality is structural.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::rational::Rational;

/// Sorted `(prime, r)` pairs with `0 < r < index`.
type Radicand = Vec<(u64, u32)>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootSum {
    index: u32,
    terms: BTreeMap<Radicand, Rational>,
}

impl RootSum {
    pub fn zero() -> Self {
        Self { index: 1, terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::rational(Rational::one())
    }

    pub fn rational(c: Rational) -> Self {
        let mut out = Self::zero();
        out.push(Vec::new(), c);
        out
    }

    /// `c * p^(k/n)`.
    pub fn prime_power(c: Rational, p: u64, k: u64, n: u32) -> Self {
        let n = n.max(1);
        let (q, r) = k.div_rem(&(n as u64));
        let c = c * Rational::from_integer(BigInt::from(p).pow(q as u32));
        let rad = if r == 0 { Vec::new() } else { vec![(p, r as u32)] };
        let mut out = Self { index: n, terms: BTreeMap::new() };
        out.push(rad, c);
        out.reduce_index()
    }

    fn push(&mut self, rad: Radicand, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(rad).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn index(&self) -> u32 {
        self.index
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The value as a rational if no radical survives.
    pub fn as_rational(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&Vec::new()).cloned(),
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        let n = self.index as f64;
        self.terms
            .iter()
            .map(|(rad, c)| {
                let c = c.to_f64().unwrap_or(f64::NAN);
                rad.iter().fold(c, |acc, &(p, r)| acc * (p as f64).powf(r as f64 / n))
            })
            .sum()
    }

    fn with_index(&self, index: u32) -> Self {
        debug_assert_eq!(index % self.index, 0);
        let k = index / self.index;
        Self {
            index,
            terms: self
                .terms
                .iter()
                .map(|(rad, c)| (rad.iter().map(|&(p, r)| (p, r * k)).collect(), c.clone()))
                .collect(),
        }
    }

    /// Shrinks the index to the smallest one that still represents every
    /// term with integral exponents.
    fn reduce_index(mut self) -> Self {
        let g = self.terms.keys().flatten().fold(self.index, |g, &(_, r)| g.gcd(&r));
        if g > 1 {
            self.index /= g;
            self.terms = std::mem::take(&mut self.terms)
                .into_iter()
                .map(|(rad, c)| (rad.into_iter().map(|(p, r)| (p, r / g)).collect(), c))
                .collect();
        }
        if self.terms.is_empty() {
            self.index = 1;
        }
        self
    }
}

impl Add for &RootSum {
    type Output = RootSum;

    fn add(self, rhs: &RootSum) -> RootSum {
        let index = self.index.lcm(&rhs.index);
        let mut out = self.with_index(index);
        for (rad, c) in rhs.with_index(index).terms {
            out.push(rad, c);
        }
        out.reduce_index()
    }
}

impl Mul for &RootSum {
    type Output = RootSum;

    fn mul(self, rhs: &RootSum) -> RootSum {
        let index = self.index.lcm(&rhs.index);
        let (a, b) = (self.with_index(index), rhs.with_index(index));
        let mut out = RootSum { index, terms: BTreeMap::new() };
        for (ra, ca) in &a.terms {
            for (rb, cb) in &b.terms {
                let mut exps: BTreeMap<u64, u32> = ra.iter().copied().collect();
                for &(p, r) in rb {
                    *exps.entry(p).or_insert(0) += r;
                }
                let mut coeff = ca * cb;
                let mut rad = Vec::new();
                for (p, r) in exps {
                    let (q, r) = r.div_rem(&index);
                    if q > 0 {
                        coeff *= Rational::from_integer(BigInt::from(p).pow(q));
                    }
                    if r > 0 {
                        rad.push((p, r));
                    }
                }
                out.push(rad, coeff);
            }
        }
        out.reduce_index()
    }
}

impl std::iter::Sum for RootSum {
    fn sum<I: Iterator<Item = RootSum>>(iter: I) -> RootSum {
        iter.fold(RootSum::zero(), |acc, x| &acc + &x)
    }
}

impl std::iter::Product for RootSum {
    fn product<I: Iterator<Item = RootSum>>(iter: I) -> RootSum {
        iter.fold(RootSum::one(), |acc, x| &acc * &x)
    }
}

impl fmt::Display for RootSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(rad, c)| {
                if rad.is_empty() {
                    return c.to_string();
                }
                let roots: Vec<String> = rad.iter().map(|(p, r)| format!("{p}^({r}/{})", self.index)).collect();
                format!("{c}*{}", roots.join("*"))
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn reduces_integral_powers() {
        let x = RootSum::prime_power(rat(1, 3), 2, 2, 2);
        assert_eq!(x.as_rational(), Some(rat(2, 3)));
        let sum = &RootSum::rational(rat(2, 3)) + &x;
        assert_eq!(sum.as_rational(), Some(rat(4, 3)));
    }

    #[test]
    fn radicals_multiply_and_carry() {
        let r = RootSum::prime_power(int(1), 3, 1, 2);
        let sq = &r * &r;
        assert_eq!(sq.as_rational(), Some(int(3)));
        let cube_root = RootSum::prime_power(int(1), 2, 1, 3);
        let mixed = &r * &cube_root;
        assert_eq!(mixed.index(), 6);
        assert!((mixed.to_f64() - 3f64.sqrt() * 2f64.cbrt()).abs() < 1e-12);
        assert!(mixed.as_rational().is_none());
        let back = &(&mixed * &mixed) * &(&mixed * &mixed);
        // (3^(1/2) 2^(1/3))^4 = 9 * 2^(4/3)
        assert_eq!(back, RootSum::prime_power(int(9), 2, 4, 3));
    }

    #[test]
    fn independent_terms_do_not_merge() {
        let a = &RootSum::prime_power(int(1), 2, 1, 2) + &RootSum::prime_power(int(1), 3, 1, 2);
        assert_eq!(a.to_string(), "1*2^(1/2) + 1*3^(1/2)");
        let z = &a + &RootSum::prime_power(int(-1), 2, 1, 2);
        assert_eq!(z, RootSum::prime_power(int(1), 3, 1, 2));
    }
}
