//! Eigenvectors of a triangular pair by substitution.

use crate::numkit::{fro, CMat, CVec, C64, EPS, ZERO};

fn floor_denominator(d: C64, small: f64) -> C64 {
    let m = d.norm();
    if m >= small {
        d
    } else if m == 0.0 {
        C64::new(small, 0.0)
    } else {
        d * (small / m)
    }
}

const GROWTH_LIMIT: f64 = 1e150;

/// `(S/‖S‖_F, T/‖T‖_F)` for repeated substitutions on one Schur pair.
#[derive(Debug, Clone)]
pub struct ScaledTriangular {
    s: CMat,
    t: CMat,
    small: f64,
}

impl ScaledTriangular {
    pub fn new(s: &CMat, t: &CMat) -> Self {
        let sn = fro(s).max(f64::MIN_POSITIVE);
        let tn = fro(t).max(f64::MIN_POSITIVE);
        ScaledTriangular {
            s: s.unscale(sn),
            t: t.unscale(tn),
            small: EPS * (s.nrows().max(1) as f64),
        }
    }

    /// Normalized `(â, b̂)` at diagonal position `j`.
    fn pair(&self, j: usize) -> (C64, C64) {
        let a = self.s[(j, j)];
        let b = self.t[(j, j)];
        let h = a.norm().hypot(b.norm());
        if h == 0.0 {
            (ZERO, ZERO)
        } else {
            (a / h, b / h)
        }
    }

    /// `(b̂·Ŝ − â·T̂)·v = 0` with `v_j = 1`, `v_k = 0` for `k > j`.
    pub fn right(&self, j: usize) -> CVec {
        let n = self.s.nrows();
        let (a, b) = self.pair(j);
        let m = |r: usize, c: usize| b * self.s[(r, c)] - a * self.t[(r, c)];
        let mut v = CVec::zeros(n);
        v[j] = C64::new(1.0, 0.0);
        // column-oriented: rhs holds −Σ_{l>k} m(k,l)·v_l for the rows still open
        let mut rhs: Vec<C64> = (0..j).map(|k| -m(k, j)).collect();
        for k in (0..j).rev() {
            let vk = rhs[k] / floor_denominator(m(k, k), self.small);
            v[k] = vk;
            for (r, x) in rhs.iter_mut().enumerate().take(k) {
                *x -= m(r, k) * vk;
            }
            if vk.norm() > GROWTH_LIMIT {
                v.unscale_mut(GROWTH_LIMIT);
                for x in rhs.iter_mut() {
                    *x /= GROWTH_LIMIT;
                }
            }
        }
        v
    }

    /// Transpose convention: `ŵᵀ·(b̂·Ŝ − â·T̂) = 0` with `ŵ_j = 1`,
    /// `ŵ_k = 0` for `k < j`.
    pub fn left(&self, j: usize) -> CVec {
        let n = self.s.nrows();
        let (a, b) = self.pair(j);
        let m = |r: usize, c: usize| b * self.s[(r, c)] - a * self.t[(r, c)];
        let mut w = CVec::zeros(n);
        w[j] = C64::new(1.0, 0.0);
        for k in j + 1..n {
            let mut acc = ZERO;
            for l in j..k {
                acc += w[l] * m(l, k);
            }
            w[k] = -acc / floor_denominator(m(k, k), self.small);
            if w[k].norm() > GROWTH_LIMIT {
                w.unscale_mut(GROWTH_LIMIT);
            }
        }
        w
    }
}

/// Right eigenvector of the triangular pair `(S, T)` at position `j`.
pub fn right_triangular(s: &CMat, t: &CMat, j: usize) -> CVec {
    ScaledTriangular::new(s, t).right(j)
}

/// Left eigenvector (transpose convention) of `(S, T)` at position `j`.
pub fn left_triangular(s: &CMat, t: &CMat, j: usize) -> CVec {
    ScaledTriangular::new(s, t).left(j)
}
