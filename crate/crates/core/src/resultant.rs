//! Elimination theory: the Sylvester map `(G_0, ..., G_M) -> sum G_j F_j` in a
//! given degree, Macaulay's bound, the valuation of the resultant via the gcd
//! of maximal minors, pseudoinverses and the norm bound for `Res f`.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::morphism::{Form, HomogeneousLift, NormalizedLift};
use crate::rational::{binomial, ensure_prime, factor, FactoredIdeal, Multiindex, Rational};
use crate::{Error, Result};

pub mod snf;

/// `D_0 = (m+1)(d-1) + 1`: the Sylvester map of a morphism is surjective in
/// this degree.
pub fn macaulay_bound(m: usize, d: u32) -> u32 {
    assert!(d >= 1, "degree must be positive");
    (m as u32 + 1) * (d - 1) + 1
}

/// Matrix of the Sylvester map in degree `D` with respect to the monomial
/// bases. Rows are the monomials `X^gamma` with `|gamma| = D`; columns are
/// the pairs `(beta, j)` with `|beta| = D - d`, grouped by `j`.
#[derive(Clone, Debug)]
pub struct SylvesterMatrix {
    pub degree: u32,
    pub rows: Vec<Multiindex>,
    pub cols: Vec<(Multiindex, usize)>,
    pub entries: Vec<Vec<BigInt>>,
}

impl SylvesterMatrix {
    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn col_count(&self) -> usize {
        self.cols.len()
    }

    /// Determinant of the square submatrix on the given columns.
    pub fn maximal_minor(&self, cols: &[usize]) -> BigInt {
        assert_eq!(cols.len(), self.row_count(), "a maximal minor needs one column per row");
        let sub: Vec<Vec<BigInt>> =
            self.entries.iter().map(|row| cols.iter().map(|&c| row[c].clone()).collect()).collect();
        bareiss_determinant(sub)
    }
}

pub fn sylvester_matrix(f: &NormalizedLift, degree: u32) -> Result<SylvesterMatrix> {
    let d = f.degree();
    if degree < d {
        return Err(Error::InvalidArgument(format!("Sylvester degree {degree} is below the map degree {d}")));
    }
    let n_vars = f.m() + 1;
    let rows = Multiindex::all_of_degree(n_vars, degree);
    let betas = Multiindex::all_of_degree(n_vars, degree - d);
    let cols: Vec<(Multiindex, usize)> =
        (0..=f.codomain()).flat_map(|j| betas.iter().map(move |b| (b.clone(), j))).collect();
    let forms = f.lift().forms();
    let entries = rows
        .iter()
        .map(|gamma| {
            cols.iter()
                .map(|(beta, j)| {
                    gamma
                        .checked_sub(beta)
                        .and_then(|alpha| forms[*j].get(&alpha))
                        .map(|c| c.to_integer())
                        .unwrap_or_default()
                })
                .collect()
        })
        .collect();
    Ok(SylvesterMatrix { degree, rows, cols, entries })
}

/// The gcd of the maximal minors of the Sylvester-Macaulay matrix of a
/// normalized lift, and its factorization `Res f`.
#[derive(Clone, Debug, Serialize)]
pub struct ResultantData {
    pub macaulay_degree: u32,
    pub rows: usize,
    pub cols: usize,
    pub invariant_factors: Vec<BigUint>,
    /// Product of the invariant factors; zero when the matrix has rank
    /// below its row count.
    pub invariant_factor_product: BigUint,
    pub res_ideal: FactoredIdeal,
    pub is_morphism: bool,
}

impl ResultantData {
    /// `v_p(Res f)`.
    pub fn valuation(&self, p: u64) -> u32 {
        self.res_ideal.valuation(p) as u32
    }

    pub fn bad_primes(&self) -> Vec<u64> {
        self.res_ideal.primes().collect()
    }
}

pub fn resultant_data(f: &HomogeneousLift) -> Result<ResultantData> {
    resultant_data_normalized(&f.normalize()?)
}

pub fn resultant_data_normalized(f: &NormalizedLift) -> Result<ResultantData> {
    let d0 = macaulay_bound(f.m(), f.degree());
    let s = sylvester_matrix(f, d0)?;
    let (rows, cols) = (s.row_count(), s.col_count());
    let factors = snf::invariant_factors(s.entries);
    let full_rank = factors.len() == rows;
    let product = if full_rank { factors.iter().fold(BigUint::one(), |acc, x| acc * x) } else { BigUint::zero() };
    let res_ideal =
        if full_rank { factor(&Rational::from_integer(BigInt::from(product.clone())))? } else { FactoredIdeal::one() };
    Ok(ResultantData {
        macaulay_degree: d0,
        rows,
        cols,
        invariant_factors: factors,
        invariant_factor_product: product,
        res_ideal,
        is_morphism: full_rank,
    })
}

/// Resultant data, or [`Error::NotMorphism`].
pub fn require_morphism(f: &NormalizedLift) -> Result<ResultantData> {
    let data = resultant_data_normalized(f)?;
    if data.is_morphism {
        Ok(data)
    } else {
        Err(Error::NotMorphism)
    }
}

pub fn has_good_reduction(f: &HomogeneousLift, p: u64) -> Result<bool> {
    ensure_prime(p)?;
    let data = require_morphism(&f.normalize()?)?;
    Ok(data.valuation(p) == 0)
}

/// Forms `G_ij` of degree `e - d` with `sum_j G_ij F_j = X_i^e`.
#[derive(Clone, Debug, PartialEq)]
pub struct Pseudoinverse {
    pub degree: u32,
    pub entries: Vec<Vec<Form>>,
}

impl Pseudoinverse {
    /// Checks the defining identity exactly.
    pub fn satisfies(&self, f: &HomogeneousLift) -> bool {
        let n_vars = f.m() + 1;
        self.entries.iter().enumerate().all(|(i, row)| {
            let mut acc = Form::new();
            for (g, fj) in row.iter().zip(f.forms()) {
                for (eg, cg) in g {
                    for (ef, cf) in fj {
                        *acc.entry(eg.add(ef)).or_insert_with(Rational::zero) += cg * cf;
                    }
                }
            }
            acc.retain(|_, c| !c.is_zero());
            let target: Form = [(Multiindex::unit(n_vars, i, self.degree), Rational::one())].into_iter().collect();
            acc == target
        })
    }

    /// `v_p(G)`: minimum valuation over all coefficients.
    pub fn valuation(&self, p: u64) -> crate::rational::Valuation {
        let coeffs: Vec<Rational> = self.entries.iter().flatten().flat_map(|g| g.values().cloned()).collect();
        crate::rational::tuple_val_p(&coeffs, p)
    }
}

/// Solves `S(G_i) = X_i^e` over `Q` for every `i`; `None` if some `X_i^e` is
/// not in the image.
pub fn pseudoinverse(f: &NormalizedLift, e: u32) -> Result<Option<Pseudoinverse>> {
    let s = sylvester_matrix(f, e)?;
    let n_vars = f.m() + 1;
    let (rows, cols) = (s.row_count(), s.col_count());
    let targets: Vec<usize> = (0..n_vars)
        .map(|i| {
            let mono = Multiindex::unit(n_vars, i, e);
            s.rows.iter().position(|g| *g == mono).expect("pure powers are rows")
        })
        .collect();
    // augmented system [A | I_targets]
    let mut a: Vec<Vec<Rational>> = s
        .entries
        .iter()
        .enumerate()
        .map(|(r, row)| {
            let mut v: Vec<Rational> = row.iter().cloned().map(Rational::from_integer).collect();
            v.extend(targets.iter().map(|&t| if t == r { Rational::one() } else { Rational::zero() }));
            v
        })
        .collect();
    let pivots = rref(&mut a, cols);
    for row in a.iter().skip(pivots.len()) {
        if row[cols..].iter().any(|x| !x.is_zero()) {
            return Ok(None);
        }
    }
    debug_assert!(rows >= pivots.len());
    let entries = (0..n_vars)
        .map(|i| {
            let mut g = vec![Form::new(); f.codomain() + 1];
            for (r, &pc) in pivots.iter().enumerate() {
                let val = &a[r][cols + i];
                if !val.is_zero() {
                    let (beta, j) = &s.cols[pc];
                    g[*j].insert(beta.clone(), val.clone());
                }
            }
            g
        })
        .collect();
    Ok(Some(Pseudoinverse { degree: e, entries }))
}

/// Tries `e = d, d+1, ..., D_0` and returns the first pseudoinverse found.
pub fn find_pseudoinverse(f: &NormalizedLift) -> Result<Option<Pseudoinverse>> {
    for e in f.degree()..=macaulay_bound(f.m(), f.degree()) {
        if let Some(g) = pseudoinverse(f, e)? {
            return Ok(Some(g));
        }
    }
    Ok(None)
}

/// Reduced row echelon form over the first `ncols` columns; returns the
/// pivot columns.
fn rref(a: &mut [Vec<Rational>], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == a.len() {
            break;
        }
        let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for x in a[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let k = row[c].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    if !y.is_zero() {
                        *x -= &k * y;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Fraction-free determinant.
pub fn bareiss_determinant(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

/// `ceil(N^(b/2) H(f)^r)` with `r = C((m+1)d, m)`, `b = C(md, m)` and `N` the
/// product of the `ceil(r/b)` largest term counts.
pub fn resultant_norm_bound(f: &NormalizedLift) -> BigUint {
    let (m, d) = (f.m() as u64, f.degree() as u64);
    let r = binomial((m + 1) * d, m);
    let b = binomial(m * d, m);
    let s = r.div_ceil(b) as usize;
    let mut counts = f.term_counts();
    counts.sort_unstable_by(|a, b| b.cmp(a));
    let n: BigUint = counts.iter().take(s).fold(BigUint::one(), |acc, &c| acc * BigUint::from(c));
    let h = f.height().abs().to_biguint().expect("height is positive");
    // N^(b/2) H^r = sqrt(N^b H^(2r))
    let radicand = n.pow(b as u32) * h.pow(2 * r as u32);
    let root = radicand.sqrt();
    if &root * &root == radicand {
        root
    } else {
        root + 1u32
    }
}
