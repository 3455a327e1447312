//! Smith normal form over `Z`.
//!
//! Only the invariant factors are returned; the product of the first `k` of
//! them is the gcd of the `k x k` minors.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{Signed, Zero};

/// Nonzero invariant factors `d_1 | d_2 | ... | d_rank` of an integer matrix.
pub fn invariant_factors(mut a: Vec<Vec<BigInt>>) -> Vec<BigUint> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut diag = Vec::new();
    for t in 0..rows.min(cols) {
        // smallest nonzero entry of the trailing block becomes the pivot
        let Some((pi, pj)) = min_entry(&a, t..rows, t..cols) else {
            break;
        };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let mut dirty = false;
            for i in t + 1..rows {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = nearest_quotient(&a[i][t], &a[t][t]);
                let (top, rest) = a.split_at_mut(i);
                let pivot_row = &top[t];
                for (x, y) in rest[0][t..].iter_mut().zip(&pivot_row[t..]) {
                    if !y.is_zero() {
                        *x -= &q * y;
                    }
                }
                dirty |= !a[i][t].is_zero();
            }
            for j in t + 1..cols {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = nearest_quotient(&a[t][j], &a[t][t]);
                for row in a[t..].iter_mut() {
                    if !row[t].is_zero() {
                        let y = row[t].clone();
                        row[j] -= &q * y;
                    }
                }
                dirty |= !a[t][j].is_zero();
            }
            if dirty {
                // a remainder smaller than the pivot is left in row or column t
                let cand = (t + 1..rows)
                    .filter(|&i| !a[i][t].is_zero())
                    .map(|i| (i, t))
                    .chain((t + 1..cols).filter(|&j| !a[t][j].is_zero()).map(|j| (t, j)))
                    .min_by(|x, y| a[x.0][x.1].magnitude().cmp(a[y.0][y.1].magnitude()));
                if let Some((i, j)) = cand {
                    a.swap(t, i);
                    for row in a.iter_mut() {
                        row.swap(t, j);
                    }
                }
                continue;
            }
            // enforce d_t | every remaining entry
            let bad_row = (t + 1..rows).find(|&i| a[i][t + 1..].iter().any(|x| !x.is_multiple_of(&a[t][t])));
            match bad_row {
                Some(i) => {
                    let (top, rest) = a.split_at_mut(i);
                    for (x, y) in top[t][t..].iter_mut().zip(&rest[0][t..]) {
                        *x += y;
                    }
                }
                None => break,
            }
        }
        diag.push(a[t][t].abs().to_biguint().expect("absolute value"));
    }
    diag
}

fn min_entry(a: &[Vec<BigInt>], rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for i in rows {
        for j in cols.clone() {
            if a[i][j].is_zero() {
                continue;
            }
            if best.is_none_or(|(bi, bj)| a[i][j].magnitude() < a[bi][bj].magnitude()) {
                best = Some((i, j));
            }
        }
    }
    best
}

/// `q` with `|x - q*p| <= |p|/2`.
fn nearest_quotient(x: &BigInt, p: &BigInt) -> BigInt {
    let (q, r) = x.div_mod_floor(p);
    let twice: BigInt = &r * 2;
    if twice.magnitude() > p.magnitude() {
        if p.is_positive() {
            q + 1
        } else {
            q - 1
        }
    } else {
        q
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    fn u(xs: &[u64]) -> Vec<BigUint> {
        xs.iter().map(|&x| BigUint::from(x)).collect()
    }

    #[test]
    fn textbook_examples() {
        assert_eq!(invariant_factors(m(&[&[2, 4, 4], &[-6, 6, 12], &[10, -4, -16]])), u(&[2, 6, 12]));
        assert_eq!(
            invariant_factors(m(&[&[1, 0, 1, 0], &[0, 1, 0, 1], &[4, 0, 1, 0], &[0, 4, 0, 1]])),
            u(&[1, 1, 3, 3])
        );
        assert_eq!(invariant_factors(m(&[&[2, 0], &[0, 3]])), u(&[1, 6]));
        assert_eq!(invariant_factors(m(&[&[0, 0], &[0, 0]])), u(&[]));
        assert_eq!(invariant_factors(m(&[&[6, 4, 2]])), u(&[2]));
        assert_eq!(invariant_factors(m(&[&[1, 2], &[2, 4], &[3, 6]])), u(&[1]));
    }
}
