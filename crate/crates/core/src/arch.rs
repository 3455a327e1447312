//! The real place: volumes of fundamental domains, the constants
//! `kappa`, `C_inf`, Green's functions and limiting volumes.

use std::f64::consts::PI;

use num_traits::{Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::morphism::{HomogeneousLift, NormalizedLift};
use crate::resultant::require_morphism;
use crate::{Error, Result};

pub const DEFAULT_SEED: u64 = 0x5EED;
pub const DEFAULT_SAMPLES: u64 = 1_000_000;
const BATCH: u64 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArchMethod {
    RadialQuadrature,
    SphereMonteCarlo,
    GreenMonteCarlo,
}

impl ArchMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            ArchMethod::RadialQuadrature => "radial-quadrature",
            ArchMethod::SphereMonteCarlo => "sphere-monte-carlo",
            ArchMethod::GreenMonteCarlo => "green-monte-carlo",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ArchEstimate {
    pub value: f64,
    /// Half-width: quadrature error bound or 3 sigma.
    pub error: f64,
    pub method: ArchMethod,
    pub samples_or_panels: u64,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ArchConfig {
    pub samples: u64,
    pub seed: u64,
    /// Absolute tolerance of the one-dimensional quadrature.
    pub tolerance: f64,
    pub green_iters: u32,
    /// Use Monte Carlo even when `m = 1`.
    pub force_monte_carlo: bool,
}

impl Default for ArchConfig {
    fn default() -> Self {
        Self {
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
            tolerance: 1e-8,
            green_iters: 60,
            force_monte_carlo: false,
        }
    }
}

/// Surface area of the unit sphere `S^m` in `R^{m+1}`.
pub fn sphere_area(m: usize) -> f64 {
    2.0 * PI.powf((m as f64 + 1.0) / 2.0) / gamma_half((m + 1) as u32)
}

/// `Gamma(k/2)` for `k >= 1`.
fn gamma_half(k: u32) -> f64 {
    let (mut g, mut x) = if k.is_multiple_of(2) { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    while x < k as f64 / 2.0 - 0.25 {
        g *= x;
        x += 1.0;
    }
    g
}

fn height_f64(f: &NormalizedLift) -> f64 {
    f.height().to_f64().unwrap_or(f64::INFINITY)
}

/// Volume of `{z : |F(z)| <= |F|}` through the radial identity.
pub fn arch_volume(f: &NormalizedLift, cfg: &ArchConfig) -> Result<ArchEstimate> {
    require_morphism(f)?;
    Ok(radial_volume(f, cfg))
}

/// [`arch_volume`] without the morphism check, for lifts already known to
/// be morphisms (such as composites of morphisms).
pub fn radial_volume(f: &NormalizedLift, cfg: &ArchConfig) -> ArchEstimate {
    let m = f.m();
    let d = f.degree() as f64;
    let h = height_f64(f);
    let expo = (m as f64 + 1.0) / d;
    let radial = move |u: &[f64]| (h / f.sup_norm_f64(u)).powf(expo);
    if m == 1 && !cfg.force_monte_carlo {
        let g = |t: f64| radial(&[t.cos(), t.sin()]);
        let (value, error, panels) = adaptive_gk(&g, 0.0, 2.0 * PI, cfg.tolerance);
        return ArchEstimate {
            value: value / 2.0,
            error: (error / 2.0).max(f64::EPSILON * value),
            method: ArchMethod::RadialQuadrature,
            samples_or_panels: panels,
            seed: None,
        };
    }
    let (mean, std) = sphere_monte_carlo(m, cfg.samples, cfg.seed, radial);
    let scale = sphere_area(m) / (m as f64 + 1.0);
    ArchEstimate {
        value: scale * mean,
        error: (3.0 * scale * std / (cfg.samples as f64).sqrt()).max(f64::EPSILON),
        method: ArchMethod::SphereMonteCarlo,
        samples_or_panels: cfg.samples,
        seed: Some(cfg.seed),
    }
}

/// Mean and sample standard deviation of `g` over uniform points of `S^m`.
/// Each batch of samples has its own ChaCha stream, so the result does not
/// depend on the thread schedule.
pub fn sphere_monte_carlo<G>(m: usize, samples: u64, seed: u64, g: G) -> (f64, f64)
where
    G: Fn(&[f64]) -> f64 + Sync,
{
    let batches = samples.div_ceil(BATCH);
    let partial: Vec<(f64, f64, u64)> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let n = BATCH.min(samples - b * BATCH);
            let mut u = vec![0.0; m + 1];
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..n {
                random_unit(&mut rng, &mut u);
                let v = g(&u);
                s += v;
                s2 += v * v;
            }
            (s, s2, n)
        })
        .collect();
    let (s, s2, n) = partial.into_iter().fold((0.0, 0.0, 0u64), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    let n = n as f64;
    let mean = s / n;
    let var = ((s2 - n * mean * mean) / (n - 1.0).max(1.0)).max(0.0);
    (mean, var.sqrt())
}

pub fn random_unit<R: Rng>(rng: &mut R, u: &mut [f64]) {
    loop {
        let mut norm = 0.0;
        for x in u.iter_mut() {
            *x = rng.sample(StandardNormal);
            norm += *x * *x;
        }
        if norm > 1e-300 {
            let norm = norm.sqrt();
            u.iter_mut().for_each(|x| *x /= norm);
            return;
        }
    }
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const K15_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const G7_WEIGHTS: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// One Gauss-Kronrod 7/15 panel: (Kronrod value, |Kronrod - Gauss|).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = K15_WEIGHTS[7] * fc;
    let mut g = G7_WEIGHTS[3] * fc;
    for i in 0..7 {
        let s = f(c - h * GK_NODES[i]) + f(c + h * GK_NODES[i]);
        k += K15_WEIGHTS[i] * s;
        if i % 2 == 1 {
            g += G7_WEIGHTS[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive bisection with a per-panel tolerance proportional to width.
/// Returns (integral, error bound, number of panels).
pub fn adaptive_gk<F: Fn(f64) -> f64 + Sync>(f: &F, a: f64, b: f64, tol: f64) -> (f64, f64, u64) {
    const START: usize = 64;
    let w = (b - a) / START as f64;
    let parts: Vec<(f64, f64, u64)> = (0..START)
        .into_par_iter()
        .map(|i| {
            let (lo, hi) = (a + w * i as f64, a + w * (i + 1) as f64);
            let mut stack = vec![(lo, hi, 0u32)];
            let (mut val, mut err, mut panels) = (0.0, 0.0, 0u64);
            while let Some((lo, hi, depth)) = stack.pop() {
                let (v, e) = gk15(f, lo, hi);
                let local_tol = tol * (hi - lo) / (b - a);
                if e <= local_tol || depth >= 40 {
                    val += v;
                    err += e;
                    panels += 1;
                } else {
                    let mid = 0.5 * (lo + hi);
                    stack.push((lo, mid, depth + 1));
                    stack.push((mid, hi, depth + 1));
                }
            }
            (val, err, panels)
        })
        .collect();
    parts.into_iter().fold((0.0, 0.0, 0), |x, y| (x.0 + y.0, x.1 + y.1, x.2 + y.2))
}

/// `kappa`, `C_inf` and `(C_f^0)^d`. Lower and upper brackets come from a
/// face grid of the cube and the Lipschitz bound of the forms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorConstants {
    /// `min_{|u|_2 = 1} |F(u)|^{1/d}`, attained at a located point.
    pub kappa_inf: f64,
    /// Guaranteed lower bound for `kappa_inf`.
    pub kappa_lower: f64,
    pub c_inf: f64,
    /// `|F|^{1/d} / kappa_lower`.
    pub c_inf_upper: f64,
    pub c0d: u128,
    pub argmin: Vec<f64>,
}

pub fn error_constants(f: &NormalizedLift, c0d: u128) -> Result<ErrorConstants> {
    require_morphism(f)?;
    let (kappa_d, kappa_d_lower, argmin) = kappa_power(f);
    if kappa_d <= 0.0 {
        return Err(Error::NotMorphism);
    }
    let d = f.degree() as f64;
    let scale = height_f64(f).powf(1.0 / d);
    let kappa_inf = kappa_d.powf(1.0 / d);
    let kappa_lower = kappa_d_lower.max(0.0).powf(1.0 / d).min(kappa_inf);
    Ok(ErrorConstants {
        kappa_inf,
        kappa_lower,
        c_inf: scale / kappa_inf,
        c_inf_upper: if kappa_lower > 0.0 { scale / kappa_lower } else { f64::INFINITY },
        c0d,
        argmin,
    })
}

/// `(min, guaranteed lower bound, argmin)` of `|F(u)|_inf` on the sphere.
fn kappa_power(f: &NormalizedLift) -> (f64, f64, Vec<f64>) {
    let m = f.m();
    let n = match m {
        1 => 20_000,
        2 => 600,
        3 => 80,
        4 => 24,
        _ => 10,
    };
    let spacing = 2.0 / n as f64;
    let lip = f.sphere_lipschitz();
    // every point of a face lies within spacing*sqrt(m)/2 of a grid node;
    // radial projection onto the sphere is 1-Lipschitz outside the ball
    let slack = lip * spacing * (m as f64).sqrt() / 2.0;
    let faces: Vec<(usize, f64)> = (0..=m).flat_map(|i| [(i, -1.0), (i, 1.0)]).collect();
    let per_face = (n as u64 + 1).pow(m as u32);
    let best = faces
        .par_iter()
        .map(|&(axis, sign)| {
            let mut c = vec![0.0; m + 1];
            let mut best = (f64::INFINITY, Vec::new());
            for mut idx in 0..per_face {
                let mut norm = 1.0;
                for (i, ci) in c.iter_mut().enumerate() {
                    if i == axis {
                        *ci = sign;
                    } else {
                        *ci = -1.0 + spacing * (idx % (n as u64 + 1)) as f64;
                        idx /= n as u64 + 1;
                        norm += *ci * *ci;
                    }
                }
                let norm = norm.sqrt();
                let u: Vec<f64> = c.iter().map(|x| x / norm).collect();
                let v = f.sup_norm_f64(&u);
                if v < best.0 {
                    best = (v, u);
                }
            }
            best
        })
        .reduce(|| (f64::INFINITY, Vec::new()), |a, b| if a.0 <= b.0 { a } else { b });
    let (grid_min, start) = best;
    let (refined, argmin) = pattern_search(f, start, spacing);
    (refined.min(grid_min), grid_min - slack, argmin)
}

/// Compass search on the sphere for the minimum of `|F(u)|_inf`.
fn pattern_search(f: &NormalizedLift, mut u: Vec<f64>, mut step: f64) -> (f64, Vec<f64>) {
    let m = u.len();
    let mut best = f.sup_norm_f64(&u);
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let mut dirs: Vec<Vec<f64>> = (0..m).map(|i| (0..m).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let mut trial = vec![0.0; m];
    let mut rounds = 0;
    while step > 1e-13 && rounds < 100_000 {
        rounds += 1;
        let mut improved = false;
        for dir in &dirs {
            for sign in [-1.0, 1.0] {
                let mut norm = 0.0;
                for i in 0..m {
                    trial[i] = u[i] + sign * step * dir[i];
                    norm += trial[i] * trial[i];
                }
                let norm = norm.sqrt();
                trial.iter_mut().for_each(|x| *x /= norm);
                let v = f.sup_norm_f64(&trial);
                if v < best {
                    best = v;
                    u.copy_from_slice(&trial);
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
            // fresh random directions help along ridges of the max
            for dir in dirs.iter_mut().skip(m.min(1)) {
                random_unit(&mut rng, dir);
            }
        }
    }
    (best, u)
}

/// Archimedean Green's function with its Cauchy gap.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GreenValue {
    pub value: f64,
    pub gap: f64,
}

/// `G_F(x) = lim log|F^n(x)| / d^n`, iterated on unit max-norm vectors.
pub fn green_arch(f: &NormalizedLift, x: &[f64], iters: u32) -> Result<GreenValue> {
    if f.m() != f.codomain() {
        return Err(Error::NotEndomorphism { m: f.m(), codomain: f.codomain() });
    }
    if x.len() != f.m() + 1 {
        return Err(Error::DimensionMismatch { expected: f.m() + 1, got: x.len() });
    }
    green_unchecked(f, x, iters).ok_or(Error::Zero("green_arch needs a nonzero finite vector"))
}

pub(crate) fn green_unchecked(f: &NormalizedLift, x: &[f64], iters: u32) -> Option<GreenValue> {
    let d = f.degree() as f64;
    let norm = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if !(norm > 0.0 && norm.is_finite()) {
        return None;
    }
    let mut y: Vec<f64> = x.iter().map(|v| v / norm).collect();
    let mut value = norm.ln();
    let mut weight = 1.0;
    let mut last = 0.0;
    let mut all_zero = true;
    for _ in 0..iters {
        weight /= d;
        let z = f.evaluate_f64(&y);
        let zn = z.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if zn.is_nan() || zn <= 0.0 {
            return None;
        }
        last = weight * zn.ln();
        all_zero &= last == 0.0;
        value += last;
        y = z.into_iter().map(|v| v / zn).collect();
        if last != 0.0 && last.abs() < 1e-18 * (1.0 + value.abs()) {
            break;
        }
    }
    // an orbit whose every increment vanishes (power maps) is exact
    let gap = if all_zero { 0.0 } else { last.abs().max(16.0 * f64::EPSILON * (1.0 + value.abs())) };
    Some(GreenValue { value, gap })
}

/// Threshold of the limiting domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Threshold {
    /// `G_F(G(z)) <= 0`.
    Normalized,
    /// `exp G_F(G(z)) <= |F^i o G|^{1/d^i}` with `i = exact_iters`.
    Canonical { exact_iters: u32 },
}

/// `log |F^i o G|^{1/d^i}` for `i = 0..=iters` by exact composition.
pub fn threshold_sequence(f: &NormalizedLift, g: &HomogeneousLift, iters: u32) -> Result<Vec<f64>> {
    let mut h = g.clone();
    let mut out = Vec::new();
    let d = f.degree() as f64;
    for i in 0..=iters {
        let coeff_max = h.coefficients().map(|c| c.abs()).max().ok_or(Error::Zero("empty lift"))?;
        out.push(log_rational(&coeff_max) / d.powi(i as i32));
        if i < iters {
            h = f.lift().compose(&h)?;
        }
    }
    Ok(out)
}

fn log_rational(x: &crate::rational::Rational) -> f64 {
    log_bigint(x.numer()) - log_bigint(x.denom())
}

pub(crate) fn log_bigint(x: &num_bigint::BigInt) -> f64 {
    let bits = x.bits();
    if bits < 1000 {
        return x.to_f64().unwrap_or(f64::NAN).abs().ln();
    }
    let shift = bits - 60;
    let top: num_bigint::BigInt = x.abs() >> shift;
    top.to_f64().unwrap_or(f64::NAN).ln() + shift as f64 * std::f64::consts::LN_2
}

/// Volume of `{z : exp G_F(G(z)) <= t}` by sphere-radial Monte Carlo.
pub fn limiting_arch_factor(
    f: &NormalizedLift,
    g: &NormalizedLift,
    threshold: Threshold,
    cfg: &ArchConfig,
) -> Result<ArchEstimate> {
    if f.m() != f.codomain() {
        return Err(Error::NotEndomorphism { m: f.m(), codomain: f.codomain() });
    }
    if f.degree() < 2 {
        return Err(Error::InvalidArgument("the dynamical map needs degree at least 2".into()));
    }
    if g.codomain() != f.m() {
        return Err(Error::DimensionMismatch { expected: f.m(), got: g.codomain() });
    }
    let (log_t, t_gap) = match threshold {
        Threshold::Normalized => (0.0, 0.0),
        Threshold::Canonical { exact_iters } => {
            let seq = threshold_sequence(f, g.lift(), exact_iters.max(1))?;
            let n = seq.len();
            (seq[n - 1], (seq[n - 1] - seq[n - 2]).abs())
        }
    };
    let m = g.m();
    let e = g.degree() as f64;
    let k = m as f64 + 1.0;
    let iters = cfg.green_iters;
    let radial = |u: &[f64]| {
        let y = g.evaluate_f64(u);
        let gv = green_unchecked(f, &y, iters).map_or(f64::NAN, |v| v.value);
        (k * (log_t - gv) / e).exp()
    };
    let (mean, std) = sphere_monte_carlo(m, cfg.samples, cfg.seed, radial);
    let scale = sphere_area(m) / k;
    let value = scale * mean;
    let stat = 3.0 * scale * std / (cfg.samples as f64).sqrt();
    Ok(ArchEstimate {
        value,
        error: (stat + value * (k * t_gap / e).exp_m1()).max(f64::EPSILON * value),
        method: ArchMethod::GreenMonteCarlo,
        samples_or_panels: cfg.samples,
        seed: Some(cfg.seed),
    })
}

/// `|T_d|^{1/d}` for the monic Chebyshev lift, a numeric probe of the
/// limiting height of Chebyshev maps.
pub fn chebyshev_height_root(d: u32) -> Result<f64> {
    let t = HomogeneousLift::chebyshev(d)?.normalize()?;
    Ok((log_bigint(&t.height()) / d as f64).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lift(s: &str) -> NormalizedLift {
        HomogeneousLift::parse_builder(s).unwrap().normalize().unwrap()
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(1) - 2.0 * PI).abs() < 1e-12);
        assert!((sphere_area(2) - 4.0 * PI).abs() < 1e-12);
        assert!((sphere_area(3) - 2.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn quadrature_volumes() {
        let cfg = ArchConfig::default();
        let v = arch_volume(&lift("power:1,2"), &cfg).unwrap();
        assert!((v.value - 4.0).abs() <= v.error.max(1e-9), "{v:?}");
        assert!(v.error < 1e-6);
        let v = arch_volume(&lift("rat:z^2+1|1"), &cfg).unwrap();
        assert!((v.value - PI).abs() < 1e-7, "{v:?}");
    }

    #[test]
    fn monte_carlo_cube() {
        let cfg = ArchConfig { samples: 200_000, ..Default::default() };
        let v = arch_volume(&lift("power:2,2"), &cfg).unwrap();
        assert!((v.value - 8.0).abs() <= v.error, "{v:?}");
        let again = arch_volume(&lift("power:2,2"), &cfg).unwrap();
        assert_eq!(v, again);
    }

    #[test]
    fn kappa_examples() {
        let c = error_constants(&lift("power:1,2"), 1).unwrap();
        assert!((c.kappa_inf - 0.5f64.sqrt()).abs() < 1e-9);
        assert!(c.kappa_lower <= c.kappa_inf);
        let c = error_constants(&lift("power:1,1"), 1).unwrap();
        assert!((c.c_inf - 2f64.sqrt()).abs() < 1e-9);
        let c = error_constants(&lift("rat:z^2+1|1"), 1).unwrap();
        assert!((c.c_inf - 1.0).abs() < 1e-9);
    }

    #[test]
    fn green_examples() {
        let g = green_arch(&lift("power:1,2"), &[2.0, 1.0], 60).unwrap();
        assert!((g.value - 2f64.ln()).abs() < 1e-14);
        let t2 = lift("chebyshev:2");
        let g = green_arch(&t2, &[3.0, 1.0], 60).unwrap();
        let want = ((3.0 + 5f64.sqrt()) / 2.0).ln();
        assert!((g.value - want).abs() <= g.gap.max(1e-12), "{g:?} vs {want}");
    }
}
