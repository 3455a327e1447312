//! Homogeneous lifts `F = (F_0, ..., F_M)` of morphisms `P^m -> P^M`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{parse_rational, primitive_scale, Multiindex, Rational};
use crate::{Error, Result};

/// One homogeneous form: a sparse map from exponent vectors to coefficients.
pub type Form = BTreeMap<Multiindex, Rational>;

type SmallForm = Vec<(Vec<u32>, i128)>;

/// A tuple of `M + 1` forms of common degree `d` in `m + 1` variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomogeneousLift {
    m: usize,
    codomain: usize,
    degree: u32,
    forms: Vec<Form>,
}

impl HomogeneousLift {
    /// Validates shape and degree and drops zero coefficients.
    pub fn new(m: usize, degree: u32, forms: Vec<Form>) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidLift("degree must be at least 1".into()));
        }
        if forms.is_empty() {
            return Err(Error::InvalidLift("a lift needs at least one form".into()));
        }
        let mut cleaned = Vec::with_capacity(forms.len());
        for (j, form) in forms.into_iter().enumerate() {
            let mut out = Form::new();
            for (alpha, c) in form {
                if alpha.len() != m + 1 {
                    return Err(Error::DimensionMismatch { expected: m + 1, got: alpha.len() });
                }
                if alpha.degree() != degree {
                    return Err(Error::InvalidLift(format!(
                        "form {j} has a term of degree {} (expected {degree})",
                        alpha.degree()
                    )));
                }
                if !c.is_zero() {
                    *out.entry(alpha).or_insert_with(Rational::zero) += c;
                }
            }
            out.retain(|_, c| !c.is_zero());
            cleaned.push(out);
        }
        if cleaned.iter().all(|f| f.is_empty()) {
            return Err(Error::Zero("every coefficient of the lift is zero"));
        }
        Ok(Self { m, codomain: cleaned.len() - 1, degree, forms: cleaned })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// The codomain dimension `M`.
    pub fn codomain(&self) -> usize {
        self.codomain
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn forms(&self) -> &[Form] {
        &self.forms
    }

    /// Coefficients in form-major, graded order.
    pub fn coefficients(&self) -> impl Iterator<Item = &Rational> {
        self.forms.iter().flat_map(|f| f.values())
    }

    pub fn is_endomorphism_shape(&self) -> bool {
        self.m == self.codomain
    }

    pub fn evaluate(&self, x: &[Rational]) -> Result<Vec<Rational>> {
        if x.len() != self.m + 1 {
            return Err(Error::DimensionMismatch { expected: self.m + 1, got: x.len() });
        }
        let d = self.degree as usize;
        let powers: Vec<Vec<Rational>> = x
            .iter()
            .map(|xi| {
                let mut p = Vec::with_capacity(d + 1);
                p.push(Rational::one());
                for k in 0..d {
                    let next = &p[k] * xi;
                    p.push(next);
                }
                p
            })
            .collect();
        Ok(self
            .forms
            .iter()
            .map(|form| {
                form.iter().fold(Rational::zero(), |acc, (alpha, c)| {
                    let mono = alpha.0.iter().enumerate().fold(c.clone(), |t, (i, &a)| t * &powers[i][a as usize]);
                    acc + mono
                })
            })
            .collect())
    }

    pub fn scale(&self, lambda: &Rational) -> Result<Self> {
        if lambda.is_zero() {
            return Err(Error::Zero("scaling a lift by 0"));
        }
        let forms = self.forms.iter().map(|f| f.iter().map(|(a, c)| (a.clone(), c * lambda)).collect()).collect();
        Ok(Self { forms, ..self.clone() })
    }

    /// `lambda F` with integer coefficients of content 1 whose first nonzero
    /// coefficient is positive.
    pub fn normalize(&self) -> Result<NormalizedLift> {
        let coeffs: Vec<Rational> = self.coefficients().cloned().collect();
        let mut lambda = primitive_scale(&coeffs).ok_or(Error::Zero("lift has no nonzero coefficient"))?;
        if coeffs.iter().find(|c| !c.is_zero()).is_some_and(|c| c.is_negative()) {
            lambda = -lambda;
        }
        NormalizedLift::from_integral(self.scale(&lambda)?)
    }

    /// `F o G`, i.e. `F_j(G_0, ..., G_m)`.
    pub fn compose(&self, inner: &HomogeneousLift) -> Result<HomogeneousLift> {
        if inner.codomain != self.m {
            return Err(Error::DimensionMismatch { expected: self.m, got: inner.codomain });
        }
        let n_vars = inner.m + 1;
        let d = self.degree as usize;
        let powers: Vec<Vec<Form>> = inner
            .forms
            .iter()
            .map(|g| {
                let mut p = vec![constant_form(n_vars)];
                for k in 0..d {
                    let next = poly_mul(&p[k], g);
                    p.push(next);
                }
                p
            })
            .collect();
        let forms = self
            .forms
            .iter()
            .map(|form| {
                let mut acc = Form::new();
                for (alpha, c) in form {
                    let mut term = constant_form(n_vars);
                    for (i, &a) in alpha.0.iter().enumerate() {
                        if a > 0 {
                            term = poly_mul(&term, &powers[i][a as usize]);
                        }
                    }
                    for (mono, t) in term {
                        *acc.entry(mono).or_insert_with(Rational::zero) += t * c;
                    }
                }
                acc.retain(|_, c| !c.is_zero());
                acc
            })
            .collect();
        HomogeneousLift::new(inner.m, self.degree * inner.degree, forms)
    }

    /// `F o F o ... o F` (`n >= 1` copies).
    pub fn iterate(&self, n: u32) -> Result<HomogeneousLift> {
        if n == 0 {
            return Ok(Self::power(self.m, 1));
        }
        let mut acc = self.clone();
        for _ in 1..n {
            acc = self.compose(&acc)?;
        }
        Ok(acc)
    }

    /// `(X_0^d, ..., X_m^d)`; `d = 1` is the identity lift.
    pub fn power(m: usize, d: u32) -> Self {
        let forms = (0..=m).map(|i| [(Multiindex::unit(m + 1, i, d), Rational::one())].into_iter().collect()).collect();
        Self::new(m, d.max(1), forms).expect("power map is well formed")
    }

    pub fn identity(m: usize) -> Self {
        Self::power(m, 1)
    }

    /// The lift `(t_d(X/Y) Y^d, Y^d)` of the Chebyshev polynomial defined by
    /// `t_d(z + 1/z) = z^d + z^-d`.
    pub fn chebyshev(d: u32) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidLift("Chebyshev degree must be at least 1".into()));
        }
        let mut prev: Vec<BigInt> = vec![BigInt::from(2)];
        let mut cur: Vec<BigInt> = vec![BigInt::zero(), BigInt::one()];
        for _ in 1..d {
            let mut next = vec![BigInt::zero(); cur.len() + 1];
            for (k, c) in cur.iter().enumerate() {
                next[k + 1] += c;
            }
            for (k, c) in prev.iter().enumerate() {
                next[k] -= c;
            }
            prev = std::mem::replace(&mut cur, next);
        }
        let num: Vec<Rational> = cur.into_iter().map(Rational::from_integer).collect();
        let mut den = vec![Rational::zero(); d as usize + 1];
        den[0] = Rational::one();
        Self::from_univariate(&num, &den)
    }

    /// Homogenizes `z -> P(z)/Q(z)` to `(Y^d P(X/Y), Y^d Q(X/Y))` with
    /// `d = max(deg P, deg Q)`. Coefficient vectors are indexed by power.
    pub fn from_univariate(num: &[Rational], den: &[Rational]) -> Result<Self> {
        let (p, q) = (trim(num), trim(den));
        let (dp, dq) = (p.len().checked_sub(1), q.len().checked_sub(1));
        let (dp, dq) = match (dp, dq) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::InvalidLift("numerator and denominator must be nonzero".into())),
        };
        let d = dp.max(dq);
        if d == 0 {
            return Err(Error::InvalidLift("constant rational function".into()));
        }
        if univariate_gcd(&p, &q).len() > 1 {
            return Err(Error::InvalidLift("numerator and denominator share a common factor".into()));
        }
        let homogenize = |coeffs: &[Rational]| -> Form {
            coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(k, c)| (Multiindex(vec![k as u32, (d - k) as u32]), c.clone()))
                .collect()
        };
        Self::new(1, d as u32, vec![homogenize(&p), homogenize(&q)])
    }

    /// Builder shorthand: `power:m,d`, `identity:m`, `chebyshev:d`, `rat:P(z)|Q(z)`, or an
    /// inline JSON document.
    pub fn parse_builder(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('{') {
            return Self::from_json(s);
        }
        let (kind, args) = s.split_once(':').ok_or_else(|| Error::Parse(format!("expected kind:params, got {s:?}")))?;
        let uint = |t: &str| -> Result<u64> {
            t.trim().parse().map_err(|_| Error::Parse(format!("expected a natural number, got {t:?}")))
        };
        match kind.trim() {
            "power" => {
                let (m, d) = args.split_once(',').ok_or_else(|| Error::Parse("power expects m,d".into()))?;
                let (m, d) = (uint(m)?, uint(d)?);
                if d == 0 {
                    return Err(Error::InvalidLift("degree must be at least 1".into()));
                }
                Ok(Self::power(m as usize, d as u32))
            }
            "identity" => Ok(Self::identity(uint(args)? as usize)),
            "chebyshev" => Self::chebyshev(uint(args)? as u32),
            "rat" => {
                let (p, q) = args.split_once('|').ok_or_else(|| Error::Parse("rat expects P(z)|Q(z)".into()))?;
                Self::from_univariate(&parse_univariate(p)?, &parse_univariate(q)?)
            }
            other => Err(Error::Parse(format!("unknown builder kind {other:?}"))),
        }
    }

    pub fn to_json_value(&self) -> LiftJson {
        LiftJson {
            m: self.m,
            codomain: self.codomain,
            d: self.degree,
            forms: self
                .forms
                .iter()
                .map(|f| f.iter().map(|(a, c)| TermJson { exps: a.0.clone(), coeff: c.to_string() }).collect())
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_json_value()).expect("lift serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: LiftJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        raw.try_into()
    }
}

/// Wire format: `{"m", "M", "d", "forms": [[{"exps", "coeff"}]]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LiftJson {
    pub m: usize,
    #[serde(rename = "M")]
    pub codomain: usize,
    pub d: u32,
    pub forms: Vec<Vec<TermJson>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermJson {
    pub exps: Vec<u32>,
    pub coeff: String,
}

impl TryFrom<LiftJson> for HomogeneousLift {
    type Error = Error;

    fn try_from(raw: LiftJson) -> Result<Self> {
        if raw.forms.len() != raw.codomain + 1 {
            return Err(Error::Parse(format!("M = {} but {} forms were given", raw.codomain, raw.forms.len())));
        }
        let forms = raw
            .forms
            .into_iter()
            .map(|terms| {
                let mut form = Form::new();
                for t in terms {
                    let c = parse_rational(&t.coeff)?;
                    *form.entry(Multiindex(t.exps)).or_insert_with(Rational::zero) += c;
                }
                Ok(form)
            })
            .collect::<Result<Vec<_>>>()?;
        HomogeneousLift::new(raw.m, raw.d, forms)
    }
}

/// An integral lift with coprime coefficients and positive leading
/// coefficient. Holds integer and float copies of the terms for fast
/// evaluation.
#[derive(Clone, Debug)]
pub struct NormalizedLift {
    lift: HomogeneousLift,
    int_terms: Vec<Vec<(Vec<u32>, BigInt)>>,
    small_terms: Option<Vec<SmallForm>>,
    float_terms: Vec<Vec<(Vec<u32>, f64)>>,
}

impl PartialEq for NormalizedLift {
    fn eq(&self, other: &Self) -> bool {
        self.lift == other.lift
    }
}

impl NormalizedLift {
    fn from_integral(lift: HomogeneousLift) -> Result<Self> {
        let int_terms: Vec<Vec<(Vec<u32>, BigInt)>> = lift
            .forms
            .iter()
            .map(|f| {
                f.iter()
                    .map(|(a, c)| {
                        debug_assert!(c.is_integer());
                        (a.0.clone(), c.to_integer())
                    })
                    .collect()
            })
            .collect();
        let small_terms = int_terms
            .iter()
            .map(|f| f.iter().map(|(a, c)| c.to_i128().map(|c| (a.clone(), c))).collect::<Option<Vec<_>>>())
            .collect::<Option<Vec<_>>>();
        let float_terms = int_terms
            .iter()
            .map(|f| f.iter().map(|(a, c)| (a.clone(), c.to_f64().unwrap_or(f64::INFINITY))).collect())
            .collect();
        Ok(Self { lift, int_terms, small_terms, float_terms })
    }

    pub fn lift(&self) -> &HomogeneousLift {
        &self.lift
    }

    pub fn into_lift(self) -> HomogeneousLift {
        self.lift
    }

    pub fn m(&self) -> usize {
        self.lift.m
    }

    pub fn codomain(&self) -> usize {
        self.lift.codomain
    }

    pub fn degree(&self) -> u32 {
        self.lift.degree
    }

    pub fn int_terms(&self) -> &[Vec<(Vec<u32>, BigInt)>] {
        &self.int_terms
    }

    /// `H(f)`: the largest absolute coefficient.
    pub fn height(&self) -> BigInt {
        self.int_terms.iter().flatten().map(|(_, c)| c.abs()).max().expect("normalized lifts are nonzero")
    }

    pub fn evaluate_int(&self, x: &[BigInt]) -> Vec<BigInt> {
        debug_assert_eq!(x.len(), self.m() + 1);
        let d = self.degree() as usize;
        let powers: Vec<Vec<BigInt>> = x
            .iter()
            .map(|xi| {
                let mut p = Vec::with_capacity(d + 1);
                p.push(BigInt::one());
                for k in 0..d {
                    let next = &p[k] * xi;
                    p.push(next);
                }
                p
            })
            .collect();
        self.int_terms
            .iter()
            .map(|form| {
                let mut acc = BigInt::zero();
                for (alpha, c) in form {
                    let mut t = c.clone();
                    for (i, &a) in alpha.iter().enumerate() {
                        if a > 0 {
                            t *= &powers[i][a as usize];
                        }
                    }
                    acc += t;
                }
                acc
            })
            .collect()
    }

    /// Exact evaluation in `i128`, or `None` on overflow.
    pub fn evaluate_small(&self, x: &[i64]) -> Option<Vec<i128>> {
        let terms = self.small_terms.as_ref()?;
        let d = self.degree() as usize;
        let mut powers = vec![[0i128; 0].to_vec(); x.len()];
        for (i, &xi) in x.iter().enumerate() {
            let mut p = Vec::with_capacity(d + 1);
            p.push(1i128);
            for k in 0..d {
                p.push(p[k].checked_mul(xi as i128)?);
            }
            powers[i] = p;
        }
        terms
            .iter()
            .map(|form| {
                let mut acc = 0i128;
                for (alpha, c) in form {
                    let mut t = *c;
                    for (i, &a) in alpha.iter().enumerate() {
                        if a > 0 {
                            t = t.checked_mul(powers[i][a as usize])?;
                        }
                    }
                    acc = acc.checked_add(t)?;
                }
                Some(acc)
            })
            .collect()
    }

    pub fn evaluate_f64(&self, x: &[f64]) -> Vec<f64> {
        let d = self.degree() as usize;
        let mut out = Vec::with_capacity(self.float_terms.len());
        let mut powers = vec![0.0; x.len() * (d + 1)];
        for (i, &xi) in x.iter().enumerate() {
            let row = &mut powers[i * (d + 1)..(i + 1) * (d + 1)];
            row[0] = 1.0;
            for k in 0..d {
                row[k + 1] = row[k] * xi;
            }
        }
        for form in &self.float_terms {
            let mut acc = 0.0;
            for (alpha, c) in form {
                let mut t = *c;
                for (i, &a) in alpha.iter().enumerate() {
                    if a > 0 {
                        t *= powers[i * (d + 1) + a as usize];
                    }
                }
                acc += t;
            }
            out.push(acc);
        }
        out
    }

    /// `max_j |F_j(x)|` in floating point.
    pub fn sup_norm_f64(&self, x: &[f64]) -> f64 {
        self.evaluate_f64(x).into_iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Lipschitz constant of `u -> F_j(u)` on the Euclidean unit ball,
    /// maximized over `j`: `d * max_j sum |F_{j,alpha}|`.
    pub fn sphere_lipschitz(&self) -> f64 {
        let d = self.degree() as f64;
        self.float_terms.iter().map(|f| f.iter().map(|(_, c)| c.abs()).sum::<f64>()).fold(0.0, f64::max) * d
    }

    /// Number of nonzero coefficients of each form.
    pub fn term_counts(&self) -> Vec<usize> {
        self.int_terms.iter().map(|f| f.len()).collect()
    }
}

pub fn height_of_map(f: &HomogeneousLift) -> Result<Rational> {
    Ok(Rational::from_integer(f.normalize()?.height()))
}

fn constant_form(n_vars: usize) -> Form {
    [(Multiindex(vec![0; n_vars]), Rational::one())].into_iter().collect()
}

fn poly_mul(a: &Form, b: &Form) -> Form {
    let mut out = Form::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            *out.entry(ea.add(eb)).or_insert_with(Rational::zero) += ca * cb;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn trim(c: &[Rational]) -> Vec<Rational> {
    let mut v = c.to_vec();
    while v.last().is_some_and(|x| x.is_zero()) {
        v.pop();
    }
    v
}

/// Monic gcd over `Q` of two coefficient vectors (index = power).
fn univariate_gcd(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let (mut a, mut b) = (trim(a), trim(b));
    while !b.is_empty() {
        let r = univariate_rem(&a, &b);
        a = b;
        b = r;
    }
    if let Some(lead) = a.last().cloned() {
        for c in &mut a {
            *c /= &lead;
        }
    }
    a
}

fn univariate_rem(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut r = a.to_vec();
    let lead = b.last().expect("nonzero divisor").clone();
    while r.len() >= b.len() {
        let shift = r.len() - b.len();
        let q = r.last().unwrap().clone() / &lead;
        for (k, c) in b.iter().enumerate() {
            r[k + shift] -= &q * c;
        }
        r.pop();
        r = trim(&r);
    }
    r
}

/// Parses an integer-coefficient polynomial in `z`, e.g. `"(z^2-1)"`,
/// `"2z"`, `"-3*z^3 + z - 7"`.
pub fn parse_univariate(s: &str) -> Result<Vec<Rational>> {
    let mut t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    while t.starts_with('(') && t.ends_with(')') {
        t = t[1..t.len() - 1].to_string();
    }
    if t.is_empty() {
        return Err(Error::Parse("empty polynomial".into()));
    }
    let bad = || Error::Parse(format!("cannot parse polynomial {s:?}"));
    let mut coeffs: Vec<Rational> = Vec::new();
    let bytes = t.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let mut sign = BigInt::one();
        if bytes[i] == b'+' || bytes[i] == b'-' {
            if bytes[i] == b'-' {
                sign = -sign;
            }
            i += 1;
        }
        let start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        let coeff: BigInt = if i > start { t[start..i].parse().map_err(|_| bad())? } else { BigInt::one() };
        let had_digits = i > start;
        if i < bytes.len() && bytes[i] == b'*' {
            i += 1;
        }
        let mut power = 0usize;
        if i < bytes.len() && bytes[i] == b'z' {
            i += 1;
            power = 1;
            if i < bytes.len() && bytes[i] == b'^' {
                i += 1;
                let ps = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                power = t[ps..i].parse().map_err(|_| bad())?;
            }
        } else if !had_digits {
            return Err(bad());
        }
        if i < bytes.len() && bytes[i] != b'+' && bytes[i] != b'-' {
            return Err(bad());
        }
        if coeffs.len() <= power {
            coeffs.resize(power + 1, Rational::zero());
        }
        coeffs[power] += Rational::from_integer(sign * coeff);
    }
    Ok(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn form(terms: &[(&[u32], Rational)]) -> Form {
        terms.iter().map(|(e, c)| (Multiindex(e.to_vec()), c.clone())).collect()
    }

    #[test]
    fn evaluation_examples() {
        let sq = HomogeneousLift::power(1, 2);
        assert_eq!(sq.evaluate(&[int(1), int(2)]).unwrap(), vec![int(1), int(4)]);
        let t2 = HomogeneousLift::chebyshev(2).unwrap();
        assert_eq!(t2.evaluate(&[int(3), int(1)]).unwrap(), vec![int(7), int(1)]);
        assert_eq!(t2.evaluate(&[int(0), int(0)]).unwrap(), vec![int(0), int(0)]);
        assert!(t2.evaluate(&[int(1)]).is_err());
    }

    #[test]
    fn chebyshev_and_univariate_builders() {
        let t2 = HomogeneousLift::chebyshev(2).unwrap();
        let expected = HomogeneousLift::new(
            1,
            2,
            vec![form(&[(&[2, 0], int(1)), (&[0, 2], int(-2))]), form(&[(&[0, 2], int(1))])],
        )
        .unwrap();
        assert_eq!(t2, expected);
        let s = HomogeneousLift::parse_builder("rat:(z^2-1)|(2z)").unwrap();
        let expected = HomogeneousLift::new(
            1,
            2,
            vec![form(&[(&[2, 0], int(1)), (&[0, 2], int(-1))]), form(&[(&[1, 1], int(2))])],
        )
        .unwrap();
        assert_eq!(s, expected);
        assert_eq!(HomogeneousLift::parse_builder("power:1,3").unwrap(), HomogeneousLift::power(1, 3));
        assert!(HomogeneousLift::parse_builder("rat:(z^2-1)|(z-1)").is_err());
        assert!(HomogeneousLift::parse_builder("rat:3|5").is_err());
        assert!(HomogeneousLift::parse_builder("bogus:1").is_err());
    }

    #[test]
    fn normalization_examples() {
        let f = HomogeneousLift::new(
            1,
            2,
            vec![form(&[(&[2, 0], rat(1, 2)), (&[0, 2], int(1))]), form(&[(&[2, 0], int(1))])],
        )
        .unwrap();
        let n = f.normalize().unwrap();
        let expected =
            HomogeneousLift::new(1, 2, vec![form(&[(&[2, 0], int(1)), (&[0, 2], int(2))]), form(&[(&[2, 0], int(2))])])
                .unwrap();
        assert_eq!(n.lift(), &expected);
        assert_eq!(n.lift().normalize().unwrap().lift(), &expected);

        let g = HomogeneousLift::new(1, 3, vec![form(&[(&[3, 0], int(-3))]), form(&[(&[0, 3], int(-6))])]).unwrap();
        let expected =
            HomogeneousLift::new(1, 3, vec![form(&[(&[3, 0], int(1))]), form(&[(&[0, 3], int(2))])]).unwrap();
        assert_eq!(g.normalize().unwrap().lift(), &expected);
    }

    #[test]
    fn heights() {
        assert_eq!(height_of_map(&HomogeneousLift::power(2, 3)).unwrap(), int(1));
        assert_eq!(height_of_map(&HomogeneousLift::chebyshev(2).unwrap()).unwrap(), int(2));
        let f = HomogeneousLift::power(1, 2).scale(&int(2)).unwrap();
        assert_eq!(height_of_map(&f).unwrap(), int(1));
    }

    #[test]
    fn composition_examples() {
        let t2 = HomogeneousLift::chebyshev(2).unwrap();
        assert_eq!(t2.compose(&t2).unwrap(), HomogeneousLift::chebyshev(4).unwrap());
        assert_eq!(t2.compose(&HomogeneousLift::identity(1)).unwrap(), t2);
        let p = HomogeneousLift::power(2, 2).compose(&HomogeneousLift::power(2, 3)).unwrap();
        assert_eq!(p, HomogeneousLift::power(2, 6));
        assert!(t2.compose(&HomogeneousLift::power(2, 2)).is_err());
    }

    #[test]
    fn json_round_trip() {
        let s = HomogeneousLift::parse_builder("rat:(z^2-1)|(2z)").unwrap();
        let json = s.to_json();
        assert!(json.contains(r#""M":1"#));
        assert_eq!(HomogeneousLift::from_json(&json).unwrap(), s);
        assert!(HomogeneousLift::from_json(r#"{"m":1,"M":1,"d":2,"forms":[[]]}"#).is_err());
        assert!(HomogeneousLift::from_json("not json").is_err());
    }

    #[test]
    fn polynomial_parser() {
        assert_eq!(parse_univariate("-3*z^3 + z - 7").unwrap(), vec![int(-7), int(1), int(0), int(-3)]);
        assert_eq!(parse_univariate("(2z)").unwrap(), vec![int(0), int(2)]);
        assert!(parse_univariate("z^").is_err());
        assert!(parse_univariate("x+1").is_err());
    }

    #[test]
    fn fast_evaluators_agree() {
        let f = HomogeneousLift::parse_builder("rat:3z^2+z-5|7z^2-2").unwrap().normalize().unwrap();
        for (a, b) in [(3i64, -7i64), (0, 1), (-12, 5)] {
            let exact = f.evaluate_int(&[BigInt::from(a), BigInt::from(b)]);
            let small = f.evaluate_small(&[a, b]).unwrap();
            let float = f.evaluate_f64(&[a as f64, b as f64]);
            for j in 0..2 {
                assert_eq!(exact[j], BigInt::from(small[j]));
                assert_eq!(exact[j].to_f64().unwrap(), float[j]);
            }
        }
    }
}
