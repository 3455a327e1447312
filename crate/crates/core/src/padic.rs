//! Reduction modulo `q`, excess valuations, local densities and the exact
//! nonarchimedean factors.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::morphism::NormalizedLift;
use crate::radical::RootSum;
use crate::rational::{
    biguint_to_rational, ensure_prime, factor_u64, primitive_integer_vector, proj_space_size, tuple_val_int,
    FactoredIdeal, Rational, Valuation,
};
use crate::resultant::{require_morphism, ResultantData};
use crate::{Error, Result};

/// Default cap on visited residue classes per prime.
pub const DEFAULT_CLASS_CAP: u64 = 10_000_000;

/// A point of `P^m(Z/q)` in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ProjPointModQ {
    pub q: u64,
    pub coords: Vec<u64>,
}

impl fmt::Display for ProjPointModQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(u64::to_string).collect();
        write!(f, "[{}]", parts.join(" : "))
    }
}

/// The reduction map `P^m(Q) -> P^m(Z/q)`.
pub fn reduce_mod(x: &[Rational], q: u64) -> Result<ProjPointModQ> {
    let v = primitive_integer_vector(x).ok_or(Error::Zero("reduce_mod needs a nonzero vector"))?;
    canonical_mod(&v, q)
}

/// Canonical form of an integer vector that is primitive at every prime of `q`.
pub fn canonical_mod(x: &[BigInt], q: u64) -> Result<ProjPointModQ> {
    if q < 2 {
        return Err(Error::InvalidArgument(format!("modulus must be at least 2, got {q}")));
    }
    let mut coords = vec![0u128; x.len()];
    let mut modulus: u128 = 1;
    for (p, a) in factor_u64(q) {
        let pa = (p as u128).pow(a);
        let local = canonical_prime_power(x, p as u128, pa)?;
        for (c, r) in coords.iter_mut().zip(local) {
            *c = crt_pair(*c, modulus, r, pa);
        }
        modulus *= pa;
    }
    Ok(ProjPointModQ { q, coords: coords.into_iter().map(|c| c as u64).collect() })
}

fn canonical_prime_power(x: &[BigInt], p: u128, pa: u128) -> Result<Vec<u128>> {
    let big = BigInt::from(pa);
    let r: Vec<u128> = x.iter().map(|xi| xi.mod_floor(&big).to_u128().expect("residue fits")).collect();
    let pivot = r
        .iter()
        .position(|&c| c % p != 0)
        .ok_or_else(|| Error::InvalidArgument(format!("vector is not primitive at {p}")))?;
    let inv = mod_inverse(r[pivot], pa);
    Ok(r.into_iter().map(|c| mul_mod(c, inv, pa)).collect())
}

fn mul_mod(a: u128, b: u128, m: u128) -> u128 {
    (BigUint::from(a) * BigUint::from(b) % BigUint::from(m)).to_u128().expect("reduced")
}

fn mod_inverse(a: u128, m: u128) -> u128 {
    let e = (a as i128).extended_gcd(&(m as i128));
    debug_assert_eq!(e.gcd, 1);
    e.x.rem_euclid(m as i128) as u128
}

/// The unique `c mod m1*m2` with `c = a mod m1` and `c = b mod m2`.
fn crt_pair(a: u128, m1: u128, b: u128, m2: u128) -> u128 {
    if m1 == 1 {
        return b;
    }
    let m = m1 * m2;
    let t = mul_mod((b + m2 - a % m2) % m2, mod_inverse(m1 % m2, m2), m2);
    (a + m1 * t) % m
}

/// Streams `P^m(Z/p^s)` in pivot form: coordinates before the pivot are
/// multiples of `p`, the pivot is `1`, later coordinates are arbitrary.
pub fn enumerate_proj_points(m: usize, p: u64, s: u32) -> Result<impl Iterator<Item = ProjPointModQ>> {
    ensure_prime(p)?;
    if s == 0 {
        return Err(Error::InvalidArgument("depth s must be at least 1".into()));
    }
    let q = p.checked_pow(s).ok_or_else(|| Error::ResourceCap(format!("{p}^{s} exceeds 64 bits")))?;
    let low = q / p;
    Ok((0..=m).flat_map(move |pivot| {
        let count = (low as u128).pow(pivot as u32) * (q as u128).pow((m - pivot) as u32);
        (0..count).map(move |mut idx| {
            let mut coords = vec![0u64; m + 1];
            for i in (0..=m).rev() {
                if i == pivot {
                    coords[i] = 1;
                } else if i > pivot {
                    coords[i] = (idx % q as u128) as u64;
                    idx /= q as u128;
                } else {
                    coords[i] = (idx % low as u128) as u64 * p;
                    idx /= low as u128;
                }
            }
            ProjPointModQ { q, coords }
        })
    }))
}

/// `epsilon_{f,p}(x) = v_p(F(x))` for `x` primitive at `p`.
pub fn excess_valuation(f: &NormalizedLift, p: u64, x: &[BigInt]) -> Result<u32> {
    ensure_prime(p)?;
    if x.len() != f.m() + 1 {
        return Err(Error::DimensionMismatch { expected: f.m() + 1, got: x.len() });
    }
    if tuple_val_int(x, p) != Valuation::Finite(0) {
        return Err(Error::InvalidArgument(format!("point is not primitive at {p}")));
    }
    match tuple_val_int(&f.evaluate_int(x), p) {
        Valuation::Finite(v) => Ok(v as u32),
        Valuation::Infinite => Err(Error::NotMorphism),
    }
}

/// `ell_f(x) = prod_p p^{epsilon_p(x)}` over the given primes, for a
/// primitive integer point.
pub fn excess_divisor(f: &NormalizedLift, x: &[BigInt], primes: &[u64]) -> Result<FactoredIdeal> {
    let fx = f.evaluate_int(x);
    let mut exps = Vec::new();
    for &p in primes {
        match tuple_val_int(&fx, p) {
            Valuation::Finite(v) => exps.push((p, v)),
            Valuation::Infinite => return Err(Error::NotMorphism),
        }
    }
    Ok(FactoredIdeal::from_exponents(exps))
}

fn val_i128(x: i128, p: i128) -> Option<u32> {
    if x == 0 {
        return None;
    }
    let (mut x, mut v) = (x, 0);
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    Some(v)
}

/// Excess valuation of an `i128` lift, using the machine fast path when
/// the evaluation fits.
fn excess_fast(f: &NormalizedLift, p: u64, x: &[i128]) -> Option<u32> {
    let small: Option<Vec<i64>> = x.iter().map(|&c| i64::try_from(c).ok()).collect();
    if let Some(vals) = small.and_then(|s| f.evaluate_small(&s)) {
        return vals.into_iter().filter_map(|v| val_i128(v, p as i128)).min();
    }
    let big: Vec<BigInt> = x.iter().map(|&c| BigInt::from(c)).collect();
    tuple_val_int(&f.evaluate_int(&big), p).finite().map(|v| v as u32)
}

/// The distribution `i -> delta_{f,p}(i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalDensityTable {
    pub p: u64,
    /// Deepest modulus exponent at which a class was resolved.
    pub depth: u32,
    pub weights: BTreeMap<u32, Rational>,
    /// Residue classes visited by the refinement.
    pub visited: u64,
}

impl LocalDensityTable {
    pub fn weight(&self, i: u32) -> Rational {
        self.weights.get(&i).cloned().unwrap_or_else(Rational::zero)
    }

    /// `||epsilon_{f,p}||`, the largest excess valuation attained.
    pub fn max_excess(&self) -> u32 {
        self.weights.keys().next_back().copied().unwrap_or(0)
    }

    pub fn total(&self) -> Rational {
        self.weights.values().sum()
    }
}

#[derive(Clone, Debug)]
pub struct DensityOptions {
    pub class_cap: u64,
}

impl Default for DensityOptions {
    fn default() -> Self {
        Self { class_cap: DEFAULT_CLASS_CAP }
    }
}

/// Local density table by adaptive refinement of residue classes.
pub fn local_density(f: &NormalizedLift, p: u64) -> Result<LocalDensityTable> {
    ensure_prime(p)?;
    let res = require_morphism(f)?;
    density_with_bound(f, p, res.valuation(p), &DensityOptions::default())
}

/// Refinement given `r = v_p(Res f)`, which bounds every excess valuation.
pub fn density_with_bound(f: &NormalizedLift, p: u64, r: u32, opts: &DensityOptions) -> Result<LocalDensityTable> {
    ensure_prime(p)?;
    let m = f.m();
    let top = proj_space_size(m as u32, p);
    if top > BigUint::from(opts.class_cap) {
        return Err(Error::ResourceCap(format!("P^{m}(F_{p}) has {top} points, above the cap of {}", opts.class_cap)));
    }
    let levels = r.max(1) as usize + 1;
    let visited = AtomicU64::new(0);
    let roots: Vec<Vec<i128>> =
        enumerate_proj_points(m, p, 1)?.map(|pt| pt.coords.into_iter().map(i128::from).collect()).collect();
    let counts = roots
        .into_par_iter()
        .try_fold(
            || vec![vec![0u64; levels]; levels],
            |mut acc, root| {
                refine_class(f, p, r, root, opts.class_cap, &visited, &mut acc)?;
                Ok::<_, Error>(acc)
            },
        )
        .try_reduce(
            || vec![vec![0u64; levels]; levels],
            |mut a, b| {
                for (ra, rb) in a.iter_mut().zip(b) {
                    for (x, y) in ra.iter_mut().zip(rb) {
                        *x += y;
                    }
                }
                Ok(a)
            },
        )?;
    let mut weights = BTreeMap::new();
    let mut depth = 0;
    for (k, row) in counts.iter().enumerate() {
        if row.iter().all(|&c| c == 0) {
            continue;
        }
        depth = k as u32;
        let size = biguint_to_rational(&proj_space_size(m as u32, p.pow(k as u32)));
        for (e, &c) in row.iter().enumerate() {
            if c > 0 {
                *weights.entry(e as u32).or_insert_with(Rational::zero) += Rational::from_integer(c.into()) / &size;
            }
        }
    }
    Ok(LocalDensityTable { p, depth, weights, visited: visited.into_inner() })
}

/// Depth-first refinement of one class of `P^m(F_p)`; `counts[k][e]`
/// collects classes resolved modulo `p^k` with excess `e`.
fn refine_class(
    f: &NormalizedLift,
    p: u64,
    r: u32,
    root: Vec<i128>,
    cap: u64,
    visited: &AtomicU64,
    counts: &mut [Vec<u64>],
) -> Result<()> {
    let m = root.len() - 1;
    let pivot = root.iter().position(|&c| c == 1).expect("pivot form");
    let mut stack = vec![(root, 1u32)];
    while let Some((x, k)) = stack.pop() {
        if visited.fetch_add(1, Ordering::Relaxed) >= cap {
            return Err(Error::ResourceCap(format!("more than {cap} residue classes at p = {p}")));
        }
        let e = excess_fast(f, p, &x).ok_or(Error::NotMorphism)?;
        if e > r {
            return Err(Error::NotMorphism);
        }
        if e < k || k >= r {
            counts[k as usize][e as usize] += 1;
            continue;
        }
        let pk = (p as i128)
            .checked_pow(k)
            .filter(|pk| pk.checked_mul(p as i128).is_some())
            .ok_or_else(|| Error::ResourceCap(format!("{p}^{} exceeds 128 bits", k + 1)))?;
        let children = (p as u128).pow(m as u32);
        for mut idx in 0..children {
            let mut child = x.clone();
            for (i, c) in child.iter_mut().enumerate() {
                if i != pivot {
                    *c += pk * (idx % p as u128) as i128;
                    idx /= p as u128;
                }
            }
            stack.push((child, k + 1));
        }
    }
    Ok(())
}

/// `c_{Q,p}(f) = sum_i delta(i) p^{(m+1) i / d}` kept symbolically.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactLocalFactor {
    pub p: u64,
    pub m: usize,
    pub d: u32,
    pub terms: Vec<(u32, Rational)>,
    pub float_value: f64,
}

impl ExactLocalFactor {
    pub fn from_table(table: &LocalDensityTable, m: usize, d: u32) -> Self {
        let terms: Vec<(u32, Rational)> = table.weights.iter().map(|(&i, w)| (i, w.clone())).collect();
        let mut out = Self { p: table.p, m, d, terms, float_value: 0.0 };
        out.float_value = out.exact().to_f64();
        out
    }

    pub fn exact(&self) -> RootSum {
        self.terms
            .iter()
            .map(|(i, w)| RootSum::prime_power(w.clone(), self.p, (self.m as u64 + 1) * *i as u64, self.d))
            .sum()
    }
}

/// `mu_p = sum_i p^{(m+1) floor(i/d)} delta(i)`.
pub fn local_mu(table: &LocalDensityTable, m: usize, d: u32) -> Rational {
    table
        .weights
        .iter()
        .map(|(&i, w)| w * Rational::from_integer(BigInt::from(table.p).pow((m as u32 + 1) * (i / d))))
        .sum()
}

pub fn local_factor(f: &NormalizedLift, p: u64) -> Result<(ExactLocalFactor, Rational)> {
    let table = local_density(f, p)?;
    Ok((ExactLocalFactor::from_table(&table, f.m(), f.degree()), local_mu(&table, f.m(), f.degree())))
}

/// Local data at one bad prime.
#[derive(Clone, Debug)]
pub struct LocalData {
    pub p: u64,
    /// `v_p(Res f)`, or the supplied bound on the excess valuation.
    pub res_valuation: u32,
    pub table: LocalDensityTable,
    pub factor: ExactLocalFactor,
    pub mu: Rational,
}

/// Serializable view of [`LocalData`].
#[derive(Clone, Debug, Serialize)]
pub struct LocalReport {
    pub p: u64,
    pub res_valuation: u32,
    pub depth: u32,
    pub visited: u64,
    pub delta: BTreeMap<u32, String>,
    pub c_local: LocalFactorJson,
    pub mu: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalFactorJson {
    pub terms: Vec<(u32, String)>,
    pub exact: String,
    pub float: f64,
}

impl LocalData {
    pub fn report(&self) -> LocalReport {
        LocalReport {
            p: self.p,
            res_valuation: self.res_valuation,
            depth: self.table.depth,
            visited: self.table.visited,
            delta: self.table.weights.iter().map(|(&i, w)| (i, w.to_string())).collect(),
            c_local: LocalFactorJson {
                terms: self.factor.terms.iter().map(|(i, w)| (*i, w.to_string())).collect(),
                exact: self.factor.exact().to_string(),
                float: self.factor.float_value,
            },
            mu: self.mu.to_string(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct NonarchConstant {
    pub locals: Vec<LocalData>,
    /// `c_{Q,0}(f)`.
    pub c0: RootSum,
    /// `(C_f^0)^d = prod_p p^{||epsilon_p||}`.
    pub c0d: BigUint,
    /// Absent when the primes were supplied with valuation bounds.
    pub resultant: Option<ResultantData>,
}

impl NonarchConstant {
    pub fn c0_float(&self) -> f64 {
        self.c0.to_f64()
    }

    pub fn mu_product(&self) -> Rational {
        self.locals.iter().map(|l| l.mu.clone()).product()
    }

    /// Sum of `||epsilon_p|| log p`.
    pub fn log_c0d(&self) -> f64 {
        self.locals.iter().map(|l| l.table.max_excess() as f64 * (l.p as f64).ln()).sum()
    }
}

pub fn nonarch_constant(f: &NormalizedLift) -> Result<NonarchConstant> {
    nonarch_constant_with(f, &DensityOptions::default())
}

pub fn nonarch_constant_with(f: &NormalizedLift, opts: &DensityOptions) -> Result<NonarchConstant> {
    let res = require_morphism(f)?;
    let bounds: Vec<(u64, u32)> = res.bad_primes().into_iter().map(|p| (p, res.valuation(p))).collect();
    let mut out = nonarch_constant_at(f, &bounds, opts)?;
    out.resultant = Some(res);
    Ok(out)
}

/// Local factors at the given primes, each with an upper bound for the
/// excess valuation. Every prime of bad reduction must be listed.
pub fn nonarch_constant_at(
    f: &NormalizedLift,
    bounds: &[(u64, u32)],
    opts: &DensityOptions,
) -> Result<NonarchConstant> {
    let locals = bounds
        .par_iter()
        .map(|&(p, r)| {
            let table = density_with_bound(f, p, r, opts)?;
            let factor = ExactLocalFactor::from_table(&table, f.m(), f.degree());
            let mu = local_mu(&table, f.m(), f.degree());
            Ok(LocalData { p, res_valuation: r, table, factor, mu })
        })
        .collect::<Result<Vec<_>>>()?;
    let c0 = locals.iter().map(|l| l.factor.exact()).product();
    let c0d = locals.iter().map(|l| BigUint::from(l.p).pow(l.table.max_excess())).fold(BigUint::one(), |a, b| a * b);
    Ok(NonarchConstant { locals, c0, c0d, resultant: None })
}

/// `delta_f(l) = prod_p delta_{f,p}(v_p(l))` over the support.
pub fn global_densities(f: &NormalizedLift) -> Result<BTreeMap<FactoredIdeal, Rational>> {
    Ok(global_densities_from(&nonarch_constant(f)?))
}

pub fn global_densities_from(c: &NonarchConstant) -> BTreeMap<FactoredIdeal, Rational> {
    let mut out = BTreeMap::from([(FactoredIdeal::one(), Rational::one())]);
    for l in &c.locals {
        let mut next = BTreeMap::new();
        for (ideal, w) in &out {
            for (&i, wi) in &l.table.weights {
                let ideal = ideal.mul(&FactoredIdeal::prime_power(l.p, i as i64));
                next.insert(ideal, w * wi);
            }
        }
        out = next;
    }
    out
}

/// `sum_l Nm(l)^{(m+1)/d} delta_f(l)` as an exact radical sum.
pub fn density_formula_sum(densities: &BTreeMap<FactoredIdeal, Rational>, m: usize, d: u32) -> RootSum {
    densities
        .iter()
        .map(|(ideal, w)| {
            ideal.iter().fold(RootSum::rational(w.clone()), |acc, (p, e)| {
                &acc * &RootSum::prime_power(Rational::one(), p, (m as u64 + 1) * e as u64, d)
            })
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morphism::HomogeneousLift;
    use crate::rational::{int, rat};

    fn s_lift() -> NormalizedLift {
        HomogeneousLift::parse_builder("rat:z^2-1|2z").unwrap().normalize().unwrap()
    }

    fn big(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn reduce_mod_examples() {
        let pt = reduce_mod(&[int(2), int(6)], 4).unwrap();
        assert_eq!(pt.coords, vec![1, 3]);
        let pt = reduce_mod(&[rat(1, 2), int(3)], 5).unwrap();
        assert_eq!(pt.coords, vec![1, 1]);
        assert_eq!(reduce_mod(&[int(7), int(7)], 7).unwrap().coords, vec![1, 1]);
        assert!(reduce_mod(&[int(0), int(0)], 3).is_err());
        // earlier coordinates are non-units
        assert_eq!(reduce_mod(&[int(3), int(2)], 9).unwrap().coords, vec![6, 1]);
    }

    #[test]
    fn reduce_mod_crt_matches_prime_powers() {
        let x = [int(10), int(7), int(-3)];
        let pt = reduce_mod(&x, 12).unwrap();
        let p4 = reduce_mod(&x, 4).unwrap();
        let p3 = reduce_mod(&x, 3).unwrap();
        for i in 0..3 {
            assert_eq!(pt.coords[i] % 4, p4.coords[i]);
            assert_eq!(pt.coords[i] % 3, p3.coords[i]);
        }
    }

    #[test]
    fn enumeration_counts() {
        let pts: Vec<_> = enumerate_proj_points(1, 2, 1).unwrap().map(|p| p.coords).collect();
        assert_eq!(pts, vec![vec![1, 0], vec![1, 1], vec![0, 1]]);
        assert_eq!(enumerate_proj_points(1, 3, 2).unwrap().count(), 12);
        assert_eq!(enumerate_proj_points(2, 2, 1).unwrap().count(), 7);
    }

    #[test]
    fn excess_valuation_examples() {
        assert_eq!(excess_valuation(&s_lift(), 2, &big(&[1, 1])).unwrap(), 1);
        let f = HomogeneousLift::parse_builder("rat:2z^2+z|z+2").unwrap().normalize().unwrap();
        assert_eq!(excess_valuation(&f, 2, &big(&[1, 1])).unwrap(), 0);
        assert!(excess_valuation(&s_lift(), 2, &big(&[2, 4])).is_err());
    }

    #[test]
    fn s_lift_local_data() {
        let t = local_density(&s_lift(), 2).unwrap();
        assert_eq!(t.weight(0), rat(2, 3));
        assert_eq!(t.weight(1), rat(1, 3));
        let (c, mu) = local_factor(&s_lift(), 2).unwrap();
        assert_eq!(c.exact().as_rational(), Some(rat(4, 3)));
        assert_eq!(mu, int(1));
        let n = nonarch_constant(&s_lift()).unwrap();
        assert_eq!(n.c0.as_rational(), Some(rat(4, 3)));
        assert_eq!(n.c0d, BigUint::from(2u32));
    }

    #[test]
    fn no_roots_mod_three() {
        let f = HomogeneousLift::parse_builder("rat:z^2+4|z^2+1").unwrap().normalize().unwrap();
        let n = nonarch_constant(&f).unwrap();
        let l3 = n.locals.iter().find(|l| l.p == 3).unwrap();
        assert_eq!(l3.res_valuation, 2);
        assert_eq!(l3.table.max_excess(), 0);
        assert_eq!(l3.factor.exact().as_rational(), Some(int(1)));
    }
}
