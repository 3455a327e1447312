//! Zeta values, the constant `c_Q(f)`, canonical heights and the limiting
//! constants of iterates.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};
use serde::Serialize;

use crate::arch::{
    arch_volume, error_constants, green_unchecked, limiting_arch_factor, radial_volume, ArchConfig, ArchEstimate,
    ErrorConstants, GreenValue, Threshold,
};
use crate::counting::ProjPointQ;
use crate::morphism::{HomogeneousLift, NormalizedLift};
use crate::padic::{nonarch_constant_at, nonarch_constant_with, DensityOptions, LocalReport, NonarchConstant};
use crate::radical::RootSum;
use crate::rational::{content, tuple_val_int, Rational};
use crate::resultant::require_morphism;
use crate::{Error, Result};

/// Bernoulli numbers `B_0..=B_n` (with `B_1 = +1/2`).
pub fn bernoulli(n: usize) -> Vec<Rational> {
    let mut out = Vec::with_capacity(n + 1);
    let mut a: Vec<Rational> = Vec::with_capacity(n + 1);
    for k in 0..=n {
        a.push(Rational::new(BigInt::one(), BigInt::from(k + 1)));
        for j in (1..=k).rev() {
            a[j - 1] = Rational::from_integer(BigInt::from(j)) * (&a[j - 1] - &a[j]);
        }
        out.push(a[0].clone());
    }
    out
}

/// `(zeta(s), error bound)` for an integer `s >= 2`.
pub fn zeta_int(s: u32) -> Result<(f64, f64)> {
    if s < 2 {
        return Err(Error::InvalidArgument(format!("zeta needs s >= 2, got {s}")));
    }
    if s.is_multiple_of(2) {
        // zeta(2k) = (-1)^{k+1} B_{2k} (2 pi)^{2k} / (2 (2k)!)
        let b = bernoulli(s as usize)[s as usize].abs().to_f64().unwrap_or(f64::NAN);
        let fact: f64 = (1..=s).map(f64::from).product();
        let v = b * (2.0 * PI).powi(s as i32) / (2.0 * fact);
        return Ok((v, 4.0 * f64::EPSILON * v));
    }
    // Euler-Maclaurin after N terms with two correction terms
    const N: u32 = 10_000;
    let sf = s as f64;
    let nf = N as f64;
    // Neumaier summation keeps the rounding error near a few ulps
    let (mut head, mut comp) = (0.0f64, 0.0f64);
    for n in (1..N).rev() {
        let t = (n as f64).powf(-sf);
        let sum = head + t;
        comp += if head.abs() >= t.abs() { (head - sum) + t } else { (t - sum) + head };
        head = sum;
    }
    let head = head + comp;
    let c1 = sf / 12.0 * nf.powf(-sf - 1.0);
    let c2 = sf * (sf + 1.0) * (sf + 2.0) / 720.0 * nf.powf(-sf - 3.0);
    let tail = nf.powf(1.0 - sf) / (sf - 1.0) + 0.5 * nf.powf(-sf) + c1 - c2;
    let next = sf * (sf + 1.0) * (sf + 2.0) * (sf + 3.0) * (sf + 4.0) / 30240.0 * nf.powf(-sf - 5.0);
    let value = head + tail;
    Ok((value, next + 8.0 * f64::EPSILON * value))
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstantConfig {
    pub arch: ArchConfig,
    pub class_cap: u64,
}

impl Default for ConstantConfig {
    fn default() -> Self {
        Self { arch: ArchConfig::default(), class_cap: crate::padic::DEFAULT_CLASS_CAP }
    }
}

impl ConstantConfig {
    fn density(&self) -> DensityOptions {
        DensityOptions { class_cap: self.class_cap }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Prefactor {
    pub description: String,
    pub zeta: f64,
    pub zeta_error: f64,
    pub value: f64,
}

impl Prefactor {
    pub fn new(m: usize) -> Result<Self> {
        let (z, ze) = zeta_int(m as u32 + 1)?;
        Ok(Self { description: format!("1/(2*zeta({}))", m + 1), zeta: z, zeta_error: ze, value: 0.5 / z })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NonarchReport {
    pub exact: String,
    pub float: f64,
    /// `prod_p mu_p(D_{f,p})`.
    pub mu: String,
    /// `(C_f^0)^d`.
    pub c0d: String,
    pub locals: Vec<LocalReport>,
}

impl NonarchReport {
    pub fn new(n: &NonarchConstant) -> Self {
        Self {
            exact: n.c0.to_string(),
            float: n.c0_float(),
            mu: n.mu_product().to_string(),
            c0d: n.c0d.to_string(),
            locals: n.locals.iter().map(|l| l.report()).collect(),
        }
    }
}

/// `H(f)^{(m+1)/d}` kept as base and exponent.
#[derive(Clone, Debug, Serialize)]
pub struct HeightDivisor {
    pub base: String,
    pub exponent: String,
    pub float: f64,
    pub log: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstantReport {
    pub m: usize,
    pub d: u32,
    pub prefactor: Prefactor,
    pub arch: ArchEstimate,
    pub nonarch: NonarchReport,
    pub height_divisor: HeightDivisor,
    pub c_value: f64,
    pub c_error: f64,
}

/// `c = c_inf c_0 / (2 zeta(m+1) H(f)^{(m+1)/d})`.
pub fn assemble_constant(f: &NormalizedLift, cfg: &ConstantConfig) -> Result<ConstantReport> {
    let nonarch = nonarch_constant_with(f, &cfg.density())?;
    let arch = arch_volume(f, &cfg.arch)?;
    assemble_parts(f, arch, &nonarch)
}

fn assemble_parts(f: &NormalizedLift, arch: ArchEstimate, nonarch: &NonarchConstant) -> Result<ConstantReport> {
    let m = f.m();
    let d = f.degree();
    let prefactor = Prefactor::new(m)?;
    let h = f.height();
    let expo = Rational::new(BigInt::from(m + 1), BigInt::from(d));
    let log = crate::arch::log_bigint(&h) * (m as f64 + 1.0) / d as f64;
    let height_divisor = HeightDivisor { base: h.to_string(), exponent: expo.to_string(), float: log.exp(), log };
    let c0 = nonarch.c0_float();
    let scale = prefactor.value * c0 * (-log).exp();
    let c_value = scale * arch.value;
    let c_error = scale * arch.error + c_value * prefactor.zeta_error / prefactor.zeta;
    Ok(ConstantReport { m, d, prefactor, arch, nonarch: NonarchReport::new(nonarch), height_divisor, c_value, c_error })
}

#[derive(Clone, Debug, Serialize)]
pub struct CanonicalHeightEstimate {
    pub value: f64,
    pub error: f64,
    pub iterations: u32,
    pub archimedean: GreenValue,
    /// `(p, G_p(x))` at each bad prime.
    pub finite: Vec<(u64, f64)>,
}

/// Bad primes and excess bounds of an endomorphism, reused across points.
#[derive(Clone, Debug)]
pub struct HeightContext {
    f: NormalizedLift,
    bounds: Vec<(u64, u32)>,
}

impl HeightContext {
    pub fn new(f: &NormalizedLift) -> Result<Self> {
        if f.m() != f.codomain() {
            return Err(Error::NotEndomorphism { m: f.m(), codomain: f.codomain() });
        }
        if f.degree() < 2 {
            return Err(Error::InvalidArgument("canonical heights need degree at least 2".into()));
        }
        let res = require_morphism(f)?;
        let bounds = res.bad_primes().into_iter().map(|p| (p, res.valuation(p))).collect();
        Ok(Self { f: f.clone(), bounds })
    }

    pub fn lift(&self) -> &NormalizedLift {
        &self.f
    }

    /// `h(P) = sum_v G_v(x)` for the primitive lift `x` of `P`.
    pub fn estimate(&self, point: &ProjPointQ, iters: u32) -> Result<CanonicalHeightEstimate> {
        let x = point.coords();
        if x.len() != self.f.m() + 1 {
            return Err(Error::DimensionMismatch { expected: self.f.m() + 1, got: x.len() });
        }
        let xf: Vec<f64> = x.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect();
        let arch = green_unchecked(&self.f, &xf, iters).ok_or(Error::Zero("point at infinity of precision"))?;
        let d = self.f.degree() as f64;
        let mut value = arch.value;
        let mut error = arch.gap;
        let mut finite = Vec::with_capacity(self.bounds.len());
        for &(p, r) in &self.bounds {
            let g = green_finite(&self.f, p, r, x, iters)?;
            let logp = (p as f64).ln();
            value += g;
            error += r as f64 * logp * d.powi(-(iters as i32)) / (d - 1.0);
            finite.push((p, g));
        }
        Ok(CanonicalHeightEstimate { value, error, iterations: iters, archimedean: arch, finite })
    }
}

pub fn canonical_height(f: &NormalizedLift, point: &ProjPointQ, iters: u32) -> Result<CanonicalHeightEstimate> {
    HeightContext::new(f)?.estimate(point, iters)
}

/// `G_p(x) = -log p * sum_k d^{-k-1} eps_p(y_k)` along the orbit of a
/// primitive `x`, tracked modulo a power of `p` large enough for `iters`
/// divisions by at most `p^r`.
fn green_finite(f: &NormalizedLift, p: u64, r: u32, x: &[BigInt], iters: u32) -> Result<f64> {
    if r == 0 {
        return Ok(0.0);
    }
    let pb = BigInt::from(p);
    let modulus = pb.pow(r * (iters + 1) + 1);
    let mut y: Vec<BigInt> = x.iter().map(|c| c.mod_floor(&modulus)).collect();
    let mut total = 0.0;
    let mut weight = 1.0;
    let d = f.degree() as f64;
    for _ in 0..iters {
        weight /= d;
        let z: Vec<BigInt> = f.evaluate_int(&y).into_iter().map(|c| c.mod_floor(&modulus)).collect();
        let eps = tuple_val_int(&z, p).finite().ok_or(Error::NotMorphism)? as u32;
        if eps > r {
            return Err(Error::NotMorphism);
        }
        total += weight * eps as f64;
        let scale = pb.pow(eps);
        y = z.into_iter().map(|c| c / &scale).collect();
    }
    Ok(-total * (p as f64).ln())
}

/// One entry `c_Q(f^i o g)` of the dynamical sequence.
#[derive(Clone, Debug, Serialize)]
pub struct ChatEntry {
    pub i: u32,
    pub degree: u32,
    pub c_value: f64,
    pub c_error: f64,
    pub arch: ArchEstimate,
    pub nonarch_exact: String,
    pub nonarch_float: f64,
    pub log_height: f64,
}

/// Limit of the local factors at one prime, from the deepest iterate.
#[derive(Clone, Debug, Serialize)]
pub struct LocalLimit {
    pub p: u64,
    pub exact: String,
    pub float: f64,
    /// The last two iterates gave the same exact factor.
    pub stabilized: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChatLimit {
    pub threshold: Threshold,
    pub arch: ArchEstimate,
    pub locals: Vec<LocalLimit>,
    pub nonarch_exact: String,
    pub nonarch_float: f64,
    pub value: f64,
    pub error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChatReport {
    pub entries: Vec<ChatEntry>,
    pub limit: ChatLimit,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChatConfig {
    pub constant: ConstantConfig,
    /// Largest iterate allowed.
    pub max_k: u32,
}

impl Default for ChatConfig {
    fn default() -> Self {
        Self { constant: ConstantConfig::default(), max_k: 5 }
    }
}

/// `[c_Q(f^i o g) : i = 0..=k]` and the limiting constant.
pub fn chat_sequence(f: &NormalizedLift, g: &NormalizedLift, k: u32, cfg: &ChatConfig) -> Result<ChatReport> {
    if f.m() != f.codomain() {
        return Err(Error::NotEndomorphism { m: f.m(), codomain: f.codomain() });
    }
    if f.degree() < 2 {
        return Err(Error::InvalidArgument("the dynamical map needs degree at least 2".into()));
    }
    if g.codomain() != f.m() {
        return Err(Error::DimensionMismatch { expected: f.m(), got: g.codomain() });
    }
    if k > cfg.max_k {
        return Err(Error::ResourceCap(format!("iterate {k} exceeds the cap {}", cfg.max_k)));
    }
    let res_f = require_morphism(f)?;
    let res_g = require_morphism(g)?;
    let mut primes: Vec<u64> = res_f.bad_primes();
    primes.extend(res_g.bad_primes());
    primes.sort_unstable();
    primes.dedup();
    let d = f.degree();
    let m = g.m();
    let prefactor = Prefactor::new(m)?;

    let mut raw = g.lift().clone();
    let mut bounds: Vec<(u64, u32)> = primes.iter().map(|&p| (p, res_g.valuation(p))).collect();
    let mut entries = Vec::new();
    let mut limits: Vec<Vec<RootSum>> = vec![Vec::new(); primes.len()];
    for i in 0..=k {
        let norm = raw.normalize()?;
        let nonarch = nonarch_constant_at(&norm, &bounds, &cfg.constant.density())?;
        let arch = radial_volume(&norm, &cfg.constant.arch);
        let report = assemble_parts(&norm, arch, &nonarch)?;
        // content of the raw composite, so that the factor tracks F^i o G itself
        let ints: Vec<BigInt> = raw.coefficients().map(|c| c.to_integer()).collect();
        let cont = content(&ints);
        let exp_den = norm.degree();
        for (j, local) in nonarch.locals.iter().enumerate() {
            let v = tuple_val_int(std::slice::from_ref(&cont), local.p).finite().unwrap_or(0).max(0) as u64;
            let shift = RootSum::prime_power(Rational::one(), local.p, v * (m as u64 + 1), exp_den);
            limits[j].push(&local.factor.exact() * &shift);
        }
        entries.push(ChatEntry {
            i,
            degree: norm.degree(),
            c_value: report.c_value,
            c_error: report.c_error,
            arch: report.arch,
            nonarch_exact: report.nonarch.exact,
            nonarch_float: report.nonarch.float,
            log_height: report.height_divisor.log * norm.degree() as f64 / (m as f64 + 1.0),
        });
        if i < k {
            raw = f.lift().compose(&raw)?;
            // eps_{F o H} <= d eps_H + eps_F
            for (b, &p) in bounds.iter_mut().zip(&primes) {
                b.1 = d * b.1 + res_f.valuation(p);
            }
        }
    }
    let locals: Vec<LocalLimit> = primes
        .iter()
        .zip(&limits)
        .map(|(&p, seq)| {
            let last = seq.last().cloned().unwrap_or_else(RootSum::one);
            let stabilized = seq.len() >= 2 && seq[seq.len() - 2] == last;
            LocalLimit { p, exact: last.to_string(), float: last.to_f64(), stabilized }
        })
        .collect();
    let nonarch: RootSum = limits.iter().map(|s| s.last().cloned().unwrap_or_else(RootSum::one)).product();
    let threshold = Threshold::Normalized;
    let arch = limiting_arch_factor(f, g, threshold, &cfg.constant.arch)?;
    let value = prefactor.value * arch.value * nonarch.to_f64();
    let error = prefactor.value * arch.error * nonarch.to_f64();
    Ok(ChatReport {
        entries,
        limit: ChatLimit {
            threshold,
            arch,
            locals,
            nonarch_exact: nonarch.to_string(),
            nonarch_float: nonarch.to_f64(),
            value,
            error,
        },
    })
}

/// Everything `constant` reports, plus the error constants.
#[derive(Clone, Debug, Serialize)]
pub struct FullReport {
    pub constant: ConstantReport,
    pub error_constants: ErrorConstants,
    pub bad_primes: Vec<u64>,
    pub res_ideal: String,
}

pub fn full_report(f: &NormalizedLift, cfg: &ConstantConfig) -> Result<FullReport> {
    let nonarch = nonarch_constant_with(f, &cfg.density())?;
    let arch = arch_volume(f, &cfg.arch)?;
    let c0d = nonarch.c0d.to_u128().unwrap_or(u128::MAX);
    let errs = error_constants(f, c0d)?;
    let res = nonarch.resultant.clone().expect("computed with resultant");
    let constant = assemble_parts(f, arch, &nonarch)?;
    Ok(FullReport {
        constant,
        error_constants: errs,
        bad_primes: res.bad_primes(),
        res_ideal: res.res_ideal.to_string(),
    })
}

/// Convenience: the lift of a builder string, normalized.
pub fn normalized(s: &str) -> Result<NormalizedLift> {
    HomogeneousLift::parse_builder(s)?.normalize()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn bernoulli_numbers() {
        let b = bernoulli(6);
        assert_eq!(b[2], rat(1, 6));
        assert_eq!(b[4], rat(-1, 30));
        assert_eq!(b[6], rat(1, 42));
    }

    #[test]
    fn zeta_values() {
        let (z2, _) = zeta_int(2).unwrap();
        assert!((z2 - PI * PI / 6.0).abs() < 1e-15);
        let (z4, _) = zeta_int(4).unwrap();
        assert!((z4 - PI.powi(4) / 90.0).abs() < 1e-14);
        let (z3, e3) = zeta_int(3).unwrap();
        assert!(e3 < 1e-12);
        assert!((z3 - 1.202_056_903_159_594_2).abs() < 1e-12);
        assert!(zeta_int(1).is_err());
    }

    #[test]
    fn identity_and_disk_constants() {
        let r = assemble_constant(&normalized("power:1,1").unwrap(), &ConstantConfig::default()).unwrap();
        assert!((r.c_value - 12.0 / (PI * PI)).abs() < 1e-6);
        let r = assemble_constant(&normalized("rat:z^2+1|1").unwrap(), &ConstantConfig::default()).unwrap();
        assert!((r.c_value - 3.0 / PI).abs() < 1e-6);
    }

    #[test]
    fn power_map_height() {
        let f = normalized("power:1,2").unwrap();
        let p = ProjPointQ::new(vec![BigInt::from(2), BigInt::from(1)]).unwrap();
        let h = canonical_height(&f, &p, 30).unwrap();
        assert_eq!(h.value, 2f64.ln());
    }

    #[test]
    fn s_map_height_functional_equation() {
        let f = normalized("rat:z^2-1|2z").unwrap();
        let ctx = HeightContext::new(&f).unwrap();
        let p = ProjPointQ::new(vec![BigInt::from(3), BigInt::from(5)]).unwrap();
        let fp = ProjPointQ::new(f.evaluate_int(p.coords())).unwrap();
        let a = ctx.estimate(&p, 60).unwrap();
        let b = ctx.estimate(&fp, 60).unwrap();
        assert!((b.value - 2.0 * a.value).abs() <= b.error + 2.0 * a.error + 1e-12, "{a:?} {b:?}");
    }
}
