//! Enumeration of `P^m(Q)` by height and empirical counting functions.

use std::collections::HashSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::arch::error_constants;
use crate::constants::{assemble_constant, chat_sequence, ChatConfig, HeightContext};
use crate::morphism::{HomogeneousLift, NormalizedLift};
use crate::padic::nonarch_constant;
use crate::rational::{content, max_abs};
use crate::{Error, Result};

/// A point of `P^m(Q)` as a primitive integer vector whose last nonzero
/// coordinate is positive.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProjPointQ {
    coords: Vec<BigInt>,
}

impl ProjPointQ {
    pub fn new(mut coords: Vec<BigInt>) -> Result<Self> {
        let g = content(&coords);
        if g.is_zero() {
            return Err(Error::Zero("projective points need a nonzero coordinate"));
        }
        let last = coords.iter().rev().find(|c| !c.is_zero()).expect("nonzero");
        let g = if last.is_negative() { -g } else { g };
        coords.iter_mut().for_each(|c| *c = &*c / &g);
        Ok(Self { coords })
    }

    pub fn from_i64(coords: &[i64]) -> Result<Self> {
        Self::new(coords.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.coords
    }

    pub fn height(&self) -> BigInt {
        max_abs(&self.coords)
    }
}

impl fmt::Display for ProjPointQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(BigInt::to_string).collect();
        write!(f, "({})", parts.join(" : "))
    }
}

/// Enumeration blocks `(j, x_j)`: `x_j > 0` is the last nonzero coordinate.
fn blocks(m: usize, b: u64) -> Vec<(usize, i64)> {
    let mut out = vec![(0, 1)];
    for j in 1..=m {
        out.extend((1..=b as i64).map(|x| (j, x)));
    }
    out
}

/// Calls `visit` on each primitive vector of a block.
fn visit_block(m: usize, b: u64, (j, xj): (usize, i64), mut visit: impl FnMut(&[i64])) {
    let b = b as i64;
    let mut x = vec![0i64; m + 1];
    x[j] = xj;
    x[..j].iter_mut().for_each(|c| *c = -b);
    loop {
        let g = x[..j].iter().fold(xj, |g, &c| g.gcd(&c));
        if g == 1 {
            visit(&x);
        }
        let mut i = 0;
        while i < j {
            if x[i] < b {
                x[i] += 1;
                break;
            }
            x[i] = -b;
            i += 1;
        }
        if i == j {
            return;
        }
    }
}

/// Every `P` with `H(P) <= b`, each once.
pub fn enumerate_points(m: usize, b: u64) -> impl Iterator<Item = ProjPointQ> {
    blocks(m, b).into_iter().flat_map(move |blk| {
        let mut pts = Vec::new();
        visit_block(m, b, blk, |x| pts.push(ProjPointQ::from_i64(x).expect("primitive")));
        pts
    })
}

/// Parallel fold over all primitive vectors of height at most `b`.
fn fold_points<R, I, V, M>(m: usize, b: u64, init: I, visit: V, merge: M) -> R
where
    R: Send,
    I: Fn() -> R + Sync + Send,
    V: Fn(&mut R, &[i64]) + Sync + Send,
    M: Fn(R, R) -> R + Sync + Send,
{
    blocks(m, b)
        .into_par_iter()
        .fold(&init, |mut acc, blk| {
            visit_block(m, b, blk, |x| visit(&mut acc, x));
            acc
        })
        .reduce(&init, merge)
}

/// `H(f(P))` for a primitive integer `x`, exactly.
pub fn image_height(f: &NormalizedLift, x: &[i64]) -> BigInt {
    if let Some(v) = f.evaluate_small(x) {
        let g = v.iter().fold(0i128, |g, &c| g.gcd(&c));
        let mx = v.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0);
        return BigInt::from(mx / g.unsigned_abs());
    }
    let v = f.evaluate_int(&x.iter().map(|&c| BigInt::from(c)).collect::<Vec<_>>());
    max_abs(&v) / content(&v)
}

fn image_point(f: &NormalizedLift, x: &[i64]) -> ProjPointQ {
    let v = f.evaluate_int(&x.iter().map(|&c| BigInt::from(c)).collect::<Vec<_>>());
    ProjPointQ::new(v).expect("morphisms have no zeros on primitive vectors")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountRow {
    #[serde(rename = "X")]
    pub x: f64,
    pub count: u64,
    pub predicted: Option<f64>,
    /// `count / X^{exponent}`.
    pub ratio: f64,
    pub flagged_boundary: u64,
}

impl CountRow {
    fn new(x: f64, count: u64, exponent: f64, constant: Option<f64>, flagged: u64) -> Self {
        let scale = x.powf(exponent);
        Self {
            x,
            count,
            predicted: constant.map(|c| c * scale),
            ratio: count as f64 / scale,
            flagged_boundary: flagged,
        }
    }
}

/// Constants needed to bound pullback scans.
#[derive(Clone, Debug)]
pub struct PullbackContext {
    f: NormalizedLift,
    c0d: f64,
    c_inf_upper: f64,
    height: f64,
}

impl PullbackContext {
    pub fn new(f: &NormalizedLift) -> Result<Self> {
        let n = nonarch_constant(f)?;
        let c0d = n.c0d.to_f64().unwrap_or(f64::INFINITY);
        let errs = error_constants(f, n.c0d.to_u128().unwrap_or(u128::MAX))?;
        Ok(Self {
            f: f.clone(),
            c0d,
            c_inf_upper: errs.c_inf_upper,
            height: f.height().to_f64().unwrap_or(f64::INFINITY),
        })
    }

    /// `B` with `H(f(P)) <= X => H(P) <= B`.
    pub fn radius(&self, x: f64) -> u64 {
        let d = self.f.degree() as f64;
        let b = (x * self.c0d / self.height).powf(1.0 / d) * self.c_inf_upper;
        (b * (1.0 + 1e-9)).ceil().max(1.0) as u64
    }

    pub fn count(&self, x: f64) -> u64 {
        let limit = BigInt::from(x.floor() as u128);
        let f = &self.f;
        fold_points(
            f.m(),
            self.radius(x),
            || 0u64,
            |acc, p| {
                if image_height(f, p) <= limit {
                    *acc += 1;
                }
            },
            |a, b| a + b,
        )
    }

    pub fn count_image(&self, x: f64) -> u64 {
        let limit = BigInt::from(x.floor() as u128);
        let f = &self.f;
        let set = fold_points(
            f.m(),
            self.radius(x),
            HashSet::new,
            |acc, p| {
                if image_height(f, p) <= limit {
                    acc.insert(image_point(f, p));
                }
            },
            |mut a, b| {
                a.extend(b);
                a
            },
        );
        set.len() as u64
    }
}

pub fn pullback_radius(f: &NormalizedLift, x: f64) -> Result<u64> {
    Ok(PullbackContext::new(f)?.radius(x))
}

/// `#{P : H(f(P)) <= X}` with the predicted main term.
pub fn count_pullback(f: &NormalizedLift, x: f64) -> Result<CountRow> {
    let ctx = PullbackContext::new(f)?;
    let c = assemble_constant(f, &Default::default())?.c_value;
    Ok(CountRow::new(x, ctx.count(x), exponent(f), Some(c), 0))
}

/// `#{f(P) : H(f(P)) <= X}`; the prediction is `c / gamma` when `gamma` is given.
pub fn count_image(f: &NormalizedLift, x: f64, gamma: Option<u64>) -> Result<CountRow> {
    let ctx = PullbackContext::new(f)?;
    let pred = match gamma {
        Some(g) => Some(assemble_constant(f, &Default::default())?.c_value / g as f64),
        None => None,
    };
    Ok(CountRow::new(x, ctx.count_image(x), exponent(f), pred, 0))
}

fn exponent(f: &NormalizedLift) -> f64 {
    (f.m() as f64 + 1.0) / f.degree() as f64
}

/// Counting by canonical height, with the scan radius from the lower bound
/// `h_hat >= h + (d log kappa - sum ||eps_p|| log p) / (d - 1)`.
#[derive(Clone, Debug)]
pub struct CanonicalCounter {
    heights: HeightContext,
    /// `log(H(P) / exp h_hat(P))` is at most this.
    c_low: f64,
    iters: u32,
}

impl CanonicalCounter {
    pub fn new(f: &NormalizedLift, iters: u32) -> Result<Self> {
        let heights = HeightContext::new(f)?;
        let n = nonarch_constant(f)?;
        let errs = error_constants(f, n.c0d.to_u128().unwrap_or(u128::MAX))?;
        let d = f.degree() as f64;
        let c_low = ((-d * errs.kappa_lower.ln()).max(0.0) + n.log_c0d()) / (d - 1.0);
        Ok(Self { heights, c_low, iters })
    }

    pub fn radius(&self, x: f64) -> u64 {
        (x * (self.c_low + 1e-6).exp()).ceil() as u64
    }

    /// `(count, flagged)`: points with estimate `<= log X`, and those within
    /// their error of the threshold.
    pub fn count(&self, x: f64) -> Result<(u64, u64)> {
        let log_x = x.ln();
        let f = self.heights.lift();
        let (count, flagged, err) = fold_points(
            f.m(),
            self.radius(x),
            || (0u64, 0u64, None::<String>),
            |acc, p| {
                let pt = ProjPointQ::from_i64(p).expect("primitive");
                match self.heights.estimate(&pt, self.iters) {
                    Ok(h) => {
                        if h.value <= log_x {
                            acc.0 += 1;
                        }
                        if h.error > 0.0 && (h.value - log_x).abs() <= h.error {
                            acc.1 += 1;
                        }
                    }
                    Err(e) => acc.2 = Some(e.to_string()),
                }
            },
            |a, b| (a.0 + b.0, a.1 + b.1, a.2.or(b.2)),
        );
        match err {
            Some(e) => Err(Error::InvalidArgument(e)),
            None => Ok((count, flagged)),
        }
    }
}

/// `#{P : exp h_hat_f(P) <= X}`.
pub fn count_canonical(f: &NormalizedLift, x: f64, iters: u32) -> Result<CountRow> {
    let (count, flagged) = CanonicalCounter::new(f, iters)?.count(x)?;
    Ok(CountRow::new(x, count, f.m() as f64 + 1.0, None, flagged))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountMode {
    Pullback,
    Image,
    Canonical,
}

#[derive(Clone, Debug, Serialize)]
pub struct CountConfig {
    pub chat: ChatConfig,
    /// Iterate used for the limiting local factors in canonical mode.
    pub chat_k: u32,
    pub height_iters: u32,
    pub gamma: Option<u64>,
}

impl Default for CountConfig {
    fn default() -> Self {
        Self { chat: ChatConfig::default(), chat_k: 3, height_iters: 60, gamma: None }
    }
}

/// One row per `X`, with predictions from the assembled constants.
pub fn convergence_report(f: &NormalizedLift, xs: &[f64], mode: CountMode, cfg: &CountConfig) -> Result<Vec<CountRow>> {
    match mode {
        CountMode::Pullback | CountMode::Image => {
            let ctx = PullbackContext::new(f)?;
            let c = assemble_constant(f, &cfg.chat.constant)?.c_value;
            let e = exponent(f);
            Ok(xs
                .iter()
                .map(|&x| {
                    if mode == CountMode::Pullback {
                        CountRow::new(x, ctx.count(x), e, Some(c), 0)
                    } else {
                        CountRow::new(x, ctx.count_image(x), e, cfg.gamma.map(|g| c / g as f64), 0)
                    }
                })
                .collect())
        }
        CountMode::Canonical => {
            let counter = CanonicalCounter::new(f, cfg.height_iters)?;
            let id = HomogeneousLift::identity(f.m()).normalize()?;
            let chat = chat_sequence(f, &id, cfg.chat_k, &cfg.chat)?;
            xs.iter()
                .map(|&x| {
                    let (count, flagged) = counter.count(x)?;
                    Ok(CountRow::new(x, count, f.m() as f64 + 1.0, Some(chat.limit.value), flagged))
                })
                .collect()
        }
    }
}
