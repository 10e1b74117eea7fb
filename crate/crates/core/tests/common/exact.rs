//! Exact characteristic polynomial of integer quartic pencils.
//!
//! `det P(t)` is evaluated at integer points by fraction-free elimination and
//! interpolated in rational arithmetic, so zero and infinite multiplicities
//! are known without any rounding.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Bareiss determinant.
pub fn det(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !m[i][k].is_zero()) else {
                return BigInt::zero();
            };
            m.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * m[n - 1][n - 1].clone()
}

/// Coefficients `c_0..c_{4n}` of `det(t⁴A + t³B + t²C + tD + E)`.
pub fn char_poly(coefs: [&DMatrix<i64>; 5]) -> Vec<BigRational> {
    let n = coefs[0].nrows();
    let deg = 4 * n;
    let pts: Vec<i64> = (0..=deg as i64).map(|k| k - (deg as i64) / 2).collect();
    let vals: Vec<BigRational> = pts
        .iter()
        .map(|&t| {
            let m: Vec<Vec<BigInt>> = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            // Horner in t, leading coefficient A
                            let mut acc = BigInt::zero();
                            for c in coefs {
                                acc = acc * t + c[(i, j)];
                            }
                            acc
                        })
                        .collect()
                })
                .collect();
            BigRational::from_integer(det(m))
        })
        .collect();
    interpolate(&pts, &vals)
}

/// Monomial coefficients of the interpolating polynomial (Newton form).
fn interpolate(x: &[i64], y: &[BigRational]) -> Vec<BigRational> {
    let n = x.len();
    let xr: Vec<BigRational> = x.iter().map(|&v| BigRational::from_integer(v.into())).collect();
    let mut dd = y.to_vec();
    for k in 1..n {
        for i in (k..n).rev() {
            dd[i] = (&dd[i] - &dd[i - 1]) / (&xr[i] - &xr[i - k]);
        }
    }
    // expand Newton form
    let mut poly = vec![BigRational::zero(); n];
    for k in (0..n).rev() {
        // poly = poly * (t - x_k) + dd[k]
        let mut next = vec![BigRational::zero(); n];
        for (i, c) in poly.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if i + 1 < n {
                next[i + 1] += c;
            }
            next[i] -= c * &xr[k];
        }
        next[0] += &dd[k];
        poly = next;
    }
    poly
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactCounts {
    pub zeros: usize,
    pub infinite: usize,
    pub finite_nonzero: usize,
    /// `det P(λ) ≡ 0`.
    pub singular: bool,
}

pub fn counts(coefs: [&DMatrix<i64>; 5]) -> ExactCounts {
    let p = char_poly(coefs);
    let deg_bound = p.len() - 1;
    let Some(hi) = p.iter().rposition(|c| !c.is_zero()) else {
        return ExactCounts {
            zeros: 0,
            infinite: 0,
            finite_nonzero: 0,
            singular: true,
        };
    };
    let lo = p.iter().position(|c| !c.is_zero()).unwrap();
    ExactCounts {
        zeros: lo,
        infinite: deg_bound - hi,
        finite_nonzero: hi - lo,
        singular: false,
    }
}

#[cfg(test)]
mod tests {
    #![allow(unused_imports)]
    use super::*;

    #[test]
    fn scalar_counts() {
        let s = |v: i64| DMatrix::from_element(1, 1, v);
        let (z, o) = (s(0), s(1));
        let c = counts([&z, &z, &z, &o, &z]);
        assert_eq!((c.zeros, c.infinite), (1, 3));
        let c = counts([&o, &z, &z, &z, &z]);
        assert_eq!((c.zeros, c.infinite), (4, 0));
    }
}
