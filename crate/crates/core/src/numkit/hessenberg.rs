use std::sync::atomic::{AtomicU64, Ordering};

use super::{ensure_finite, qr, CMat, CVec, Givens, C64, EPS, ONE, ZERO};
use crate::{Error, Result};

/// `A = Q·T·Zᴴ`, `B = Q·H·Zᴴ` with `T` upper triangular and `H` upper
/// Hessenberg.
///
/// A single unitary cannot bring an arbitrary pair to this form, so the
/// reduction keeps separate left and right factors.
#[derive(Debug, Clone)]
pub struct TriHessPair {
    pub q: CMat,
    pub z: CMat,
    pub t: CMat,
    pub h: CMat,
}

pub fn tri_hess_reduce(a: &CMat, b: &CMat) -> Result<TriHessPair> {
    let n = a.nrows();
    if a.ncols() != n || b.shape() != (n, n) {
        return Err(Error::Dimension(format!(
            "tri_hess_reduce needs square matrices of equal size, got {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    ensure_finite(a)?;
    ensure_finite(b)?;

    let upper = (0..n).all(|j| (j + 1..n).all(|i| a[(i, j)] == ZERO));
    let (mut q, mut t, mut h) = if upper {
        (CMat::identity(n, n), a.clone(), b.clone())
    } else {
        let (q0, r) = qr(a);
        let h = q0.adjoint() * b;
        (q0, r, h)
    };
    let mut z = CMat::identity(n, n);

    for j in 0..n.saturating_sub(2) {
        for i in (j + 2..n).rev() {
            if h[(i, j)] == ZERO {
                continue;
            }
            let (g, r) = Givens::new(h[(i - 1, j)], h[(i, j)]);
            g.rows(&mut h, i - 1, i, j + 1..n);
            h[(i - 1, j)] = r;
            h[(i, j)] = ZERO;
            g.rows(&mut t, i - 1, i, i - 1..n);
            g.accumulate_adjoint(&mut q, i - 1, i);

            if t[(i, i - 1)] == ZERO {
                continue;
            }
            let (gc, r) = Givens::new(t[(i, i)], t[(i, i - 1)]);
            gc.cols(&mut t, i, i - 1, 0..i);
            t[(i, i)] = r;
            t[(i, i - 1)] = ZERO;
            gc.cols(&mut h, i, i - 1, 0..n);
            gc.cols(&mut z, i, i - 1, 0..n);
        }
    }
    Ok(TriHessPair { q, z, t, h })
}

/// LU factors of `λT + H` with adjacent-row pivoting.
///
/// Factorization and each solve cost O(n²); the running operation count is
/// exposed through [`ShiftedHessLu::flops`].
#[derive(Debug)]
pub struct ShiftedHessLu<'a> {
    pair: &'a TriHessPair,
    lu: CMat,
    swapped: Vec<bool>,
    rcond: f64,
    flops: AtomicU64,
}

impl<'a> ShiftedHessLu<'a> {
    pub fn new(pair: &'a TriHessPair, lambda: C64) -> Result<Self> {
        let n = pair.t.nrows();
        let mut m = CMat::zeros(n, n);
        let mut flops = 0u64;
        for j in 0..n {
            for i in 0..(j + 2).min(n) {
                m[(i, j)] = lambda * pair.t[(i, j)] + pair.h[(i, j)];
            }
            flops += (j + 2).min(n) as u64;
        }
        let norm1 = (0..n)
            .map(|j| (0..(j + 2).min(n)).map(|i| m[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max);

        let mut swapped = vec![false; n.saturating_sub(1)];
        for k in 0..n.saturating_sub(1) {
            if m[(k + 1, k)].norm() > m[(k, k)].norm() {
                for j in k..n {
                    let tmp = m[(k, j)];
                    m[(k, j)] = m[(k + 1, j)];
                    m[(k + 1, j)] = tmp;
                }
                swapped[k] = true;
            }
            let piv = m[(k, k)];
            let l = if piv == ZERO { ZERO } else { m[(k + 1, k)] / piv };
            if l != ZERO {
                for j in k + 1..n {
                    let u = m[(k, j)];
                    m[(k + 1, j)] -= l * u;
                }
            }
            m[(k + 1, k)] = l;
            flops += (n - k) as u64;
        }

        let mut lu = ShiftedHessLu {
            pair,
            lu: m,
            swapped,
            rcond: 0.0,
            flops: AtomicU64::new(flops),
        };
        if (0..n).any(|i| lu.lu[(i, i)] == ZERO) {
            return Err(Error::SingularShift { rcond: 0.0 });
        }
        if n > 0 && norm1 > 0.0 {
            let inv_norm = lu.inverse_norm1_estimate();
            lu.rcond = 1.0 / (norm1 * inv_norm);
            if !(lu.rcond >= EPS) {
                return Err(Error::SingularShift { rcond: lu.rcond });
            }
        } else {
            lu.rcond = 1.0;
        }
        Ok(lu)
    }

    /// Reciprocal 1-norm condition estimate of `λT + H`.
    pub fn rcond(&self) -> f64 {
        self.rcond
    }

    /// Complex multiply-adds performed so far.
    pub fn flops(&self) -> u64 {
        self.flops.load(Ordering::Relaxed)
    }

    fn count(&self, k: usize) {
        self.flops.fetch_add(k as u64, Ordering::Relaxed);
    }

    /// `(λT + H)⁻¹·b`.
    pub fn solve_core(&self, b: &CVec) -> CVec {
        let n = b.len();
        let mut y = b.clone();
        for k in 0..n.saturating_sub(1) {
            if self.swapped[k] {
                y.swap_rows(k, k + 1);
            }
            let l = self.lu[(k + 1, k)];
            let yk = y[k];
            y[k + 1] -= l * yk;
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..n {
                s -= self.lu[(i, j)] * y[j];
            }
            y[i] = s / self.lu[(i, i)];
        }
        self.count(n * (n + 3) / 2);
        y
    }

    /// `(λT + H)⁻ᴴ·b`.
    pub fn solve_core_adjoint(&self, b: &CVec) -> CVec {
        let n = b.len();
        let mut y = b.clone();
        for i in 0..n {
            let mut s = y[i];
            for j in 0..i {
                s -= self.lu[(j, i)].conj() * y[j];
            }
            y[i] = s / self.lu[(i, i)].conj();
        }
        for k in (0..n.saturating_sub(1)).rev() {
            let l = self.lu[(k + 1, k)].conj();
            let yk1 = y[k + 1];
            y[k] -= l * yk1;
            if self.swapped[k] {
                y.swap_rows(k, k + 1);
            }
        }
        self.count(n * (n + 3) / 2);
        y
    }

    /// `(λA + B)⁻¹·v = Z·(λT + H)⁻¹·(Qᴴv)`.
    pub fn solve(&self, v: &CVec) -> CVec {
        let n = v.len();
        let w = self.pair.q.adjoint() * v;
        let y = self.solve_core(&w);
        self.count(2 * n * n);
        &self.pair.z * y
    }

    /// `(λA + B)⁻ᴴ·v = Q·(λT + H)⁻ᴴ·(Zᴴv)`.
    pub fn solve_adjoint(&self, v: &CVec) -> CVec {
        let n = v.len();
        let w = self.pair.z.adjoint() * v;
        let y = self.solve_core_adjoint(&w);
        self.count(2 * n * n);
        &self.pair.q * y
    }

    /// Hager's estimate of `‖(λT + H)⁻¹‖₁` with Higham's safeguard vector.
    fn inverse_norm1_estimate(&self) -> f64 {
        let n = self.lu.nrows();
        let mut x = CVec::from_element(n, C64::new(1.0 / n as f64, 0.0));
        let mut est = 0.0;
        let mut last_j = usize::MAX;
        for _ in 0..5 {
            let y = self.solve_core(&x);
            let ny: f64 = y.iter().map(|v| v.norm()).sum();
            if ny <= est && last_j != usize::MAX {
                break;
            }
            est = ny;
            let xi = y.map(|v| if v == ZERO { ONE } else { v / v.norm() });
            let z = self.solve_core_adjoint(&xi);
            let (j, zmax) = z
                .iter()
                .enumerate()
                .map(|(i, v)| (i, v.norm()))
                .fold((0, -1.0), |acc, t| if t.1 > acc.1 { t } else { acc });
            let ztx = z.dotc(&x).re;
            if zmax <= ztx || j == last_j {
                break;
            }
            last_j = j;
            x.fill(ZERO);
            x[j] = ONE;
        }
        let alt = CVec::from_fn(n, |i, _| {
            let s = if i % 2 == 0 { 1.0 } else { -1.0 };
            C64::new(s * (1.0 + i as f64 / (n.max(2) - 1) as f64), 0.0)
        });
        let ya = self.solve_core(&alt);
        let alt_est = 2.0 * ya.iter().map(|v| v.norm()).sum::<f64>() / (3.0 * n as f64);
        est.max(alt_est)
    }
}

/// `(λA + B)⁻¹·v` through the reduced pair.
pub fn shifted_hess_solve(pair: &TriHessPair, lambda: C64, v: &CVec) -> Result<CVec> {
    if v.len() != pair.t.nrows() {
        return Err(Error::Dimension(format!(
            "right-hand side has length {}, expected {}",
            v.len(),
            pair.t.nrows()
        )));
    }
    Ok(ShiftedHessLu::new(pair, lambda)?.solve(v))
}
