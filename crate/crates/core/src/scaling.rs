//! Eigenvalue parameter scaling and two-sided power-of-2 balancing.

use serde::{Deserialize, Serialize};

use crate::numkit::{fro, normalized, CMat, C64};
use crate::pencil::QuarticPencil;
use crate::solver::EigenSolution;

/// Record of one scaling transformation.
///
/// Parameter scaling sets `gamma`/`theta` and leaves the diagonals empty;
/// balancing does the opposite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRecord {
    pub gamma: f64,
    pub theta: f64,
    /// `Δℓ`, powers of 2.
    pub dl: Option<Vec<f64>>,
    /// `Δr`, powers of 2.
    pub dr: Option<Vec<f64>>,
    /// Parameter scaling was requested but skipped because `A` or `E` is zero.
    pub skipped: bool,
}

impl ScalingRecord {
    pub fn identity() -> Self {
        ScalingRecord {
            gamma: 1.0,
            theta: 1.0,
            dl: None,
            dr: None,
            skipped: false,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.gamma == 1.0 && self.dl.is_none() && self.dr.is_none()
    }
}

/// `λ = γν`; coefficients become `(γ⁴θA, γ³θB, γ²θC, γθD, θE)`.
pub fn param_scale(q: &QuarticPencil) -> (QuarticPencil, ScalingRecord) {
    let [na, nb, nc, nd, ne] = q.coeffs().map(fro);
    if na == 0.0 || ne == 0.0 {
        let rec = ScalingRecord {
            skipped: true,
            ..ScalingRecord::identity()
        };
        let mut out = q.clone();
        out.provenance.scaling = Some(rec.clone());
        return (out, rec);
    }
    let gamma = (ne / na).powf(0.25);
    let theta = 4.0 / (ne + gamma * nd + gamma.powi(2) * nc + gamma.powi(3) * nb);
    let f = |m: &CMat, k: i32| m * C64::new(gamma.powi(k) * theta, 0.0);
    let mut out = QuarticPencil {
        n: q.n,
        a: f(&q.a, 4),
        b: f(&q.b, 3),
        c: f(&q.c, 2),
        d: f(&q.d, 1),
        e: f(&q.e, 0),
        provenance: q.provenance.clone(),
    };
    let rec = ScalingRecord {
        gamma,
        theta,
        ..ScalingRecord::identity()
    };
    out.provenance.scaling = Some(rec.clone());
    (out, rec)
}

/// `S = |A| + |B| + |C| + |D| + |E|` entrywise.
pub fn aggregate(q: &QuarticPencil) -> nalgebra::DMatrix<f64> {
    let n = q.n;
    let mut s = nalgebra::DMatrix::zeros(n, n);
    for m in q.coeffs() {
        s.zip_apply(m, |acc, z| *acc += z.norm());
    }
    s
}

/// Row and column sums of `Δℓ·S·Δr`.
pub fn scaled_sums(s: &nalgebra::DMatrix<f64>, dl: &[f64], dr: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = s.nrows();
    let mut rows = vec![0.0; n];
    let mut cols = vec![0.0; n];
    for j in 0..n {
        for i in 0..n {
            let v = dl[i] * s[(i, j)] * dr[j];
            rows[i] += v;
            cols[j] += v;
        }
    }
    (rows, cols)
}

/// Ratio of the largest to the smallest nonzero entry; 1 when there are none.
pub fn spread(v: &[f64]) -> f64 {
    let nz = v.iter().copied().filter(|&x| x > 0.0);
    let (lo, hi) = nz.fold((f64::INFINITY, 0.0f64), |(lo, hi), x| (lo.min(x), hi.max(x)));
    if hi == 0.0 {
        1.0
    } else {
        hi / lo
    }
}

fn pow2_near(x: f64) -> f64 {
    2f64.powi(x.log2().round() as i32)
}

fn geo_mean_nonzero(v: &[f64]) -> Option<f64> {
    let logs: Vec<f64> = v.iter().filter(|&&x| x > 0.0).map(|x| x.ln()).collect();
    if logs.is_empty() {
        None
    } else {
        Some((logs.iter().sum::<f64>() / logs.len() as f64).exp())
    }
}

/// Alternating row/column equilibration of the sums of `S`, with factors
/// rounded to powers of 2. Returns the iterate with the smallest spread,
/// which may be the identity.
pub fn balance(q: &QuarticPencil, max_iter: usize) -> (QuarticPencil, ScalingRecord) {
    let n = q.n;
    let s = aggregate(q);
    let mut dl = vec![1.0; n];
    let mut dr = vec![1.0; n];
    let measure = |dl: &[f64], dr: &[f64]| {
        let (r, c) = scaled_sums(&s, dl, dr);
        spread(&r).max(spread(&c))
    };
    let mut best = (measure(&dl, &dr), dl.clone(), dr.clone());

    for _ in 0..max_iter {
        let mut changed = false;
        let (rows, _) = scaled_sums(&s, &dl, &dr);
        if let Some(t) = geo_mean_nonzero(&rows) {
            for i in 0..n {
                if rows[i] > 0.0 {
                    let f = pow2_near(t / rows[i]);
                    changed |= f != 1.0;
                    dl[i] *= f;
                }
            }
        }
        let (_, cols) = scaled_sums(&s, &dl, &dr);
        if let Some(t) = geo_mean_nonzero(&cols) {
            for j in 0..n {
                if cols[j] > 0.0 {
                    let f = pow2_near(t / cols[j]);
                    changed |= f != 1.0;
                    dr[j] *= f;
                }
            }
        }
        let m = measure(&dl, &dr);
        if m < best.0 {
            best = (m, dl.clone(), dr.clone());
        }
        if !changed {
            break;
        }
    }

    let (_, dl, dr) = best;
    if dl.iter().chain(dr.iter()).all(|&x| x == 1.0) {
        let rec = ScalingRecord::identity();
        let mut out = q.clone();
        out.provenance.balancing = Some(rec.clone());
        return (out, rec);
    }
    let apply = |m: &CMat| CMat::from_fn(n, n, |i, j| m[(i, j)] * (dl[i] * dr[j]));
    let rec = ScalingRecord {
        dl: Some(dl.clone()),
        dr: Some(dr.clone()),
        ..ScalingRecord::identity()
    };
    let mut out = QuarticPencil {
        n,
        a: apply(&q.a),
        b: apply(&q.b),
        c: apply(&q.c),
        d: apply(&q.d),
        e: apply(&q.e),
        provenance: q.provenance.clone(),
    };
    out.provenance.balancing = Some(rec.clone());
    (out, rec)
}

/// Maps a solution of the transformed problem back: `α ← γα` on the
/// eigenvalues, `x ← Δr·x̂`, `y ← Δℓ·ŷ` on the vectors. Classes are kept.
pub fn descale(mut sol: EigenSolution, rec: &ScalingRecord) -> EigenSolution {
    if rec.is_identity() {
        return sol;
    }
    for p in sol.pairs.iter_mut() {
        if rec.gamma != 1.0 {
            let a = p.eig.alpha * rec.gamma;
            let s = a.norm().hypot(p.eig.beta);
            p.eig.alpha = a / s;
            p.eig.beta /= s;
        }
        if let Some(dr) = &rec.dr {
            for (xi, d) in p.right.iter_mut().zip(dr) {
                *xi *= *d;
            }
            p.right = normalized(&p.right);
        }
        if let (Some(dl), Some(y)) = (&rec.dl, p.left.as_mut()) {
            for (yi, d) in y.iter_mut().zip(dl) {
                *yi *= *d;
            }
            *y = normalized(y);
        }
    }
    sol
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(v: [f64; 5]) -> QuarticPencil {
        let m = |x: f64| CMat::from_element(1, 1, C64::new(x, 0.0));
        QuarticPencil::new(m(v[0]), m(v[1]), m(v[2]), m(v[3]), m(v[4])).unwrap()
    }

    #[test]
    fn gamma_theta_formula() {
        let (_, r) = param_scale(&scalar([16.0, 0.0, 0.0, 0.0, 1.0]));
        assert!((r.gamma - 0.5).abs() < 1e-15 && (r.theta - 4.0).abs() < 1e-15);
        let (_, r) = param_scale(&scalar([1.0, 0.0, 0.0, 0.0, 1.0]));
        assert!((r.gamma - 1.0).abs() < 1e-15 && (r.theta - 4.0).abs() < 1e-15);
    }

    #[test]
    fn zero_leading_coefficient_skips() {
        let (out, r) = param_scale(&scalar([0.0, 1.0, 0.0, 0.0, 1.0]));
        assert!(r.skipped && r.gamma == 1.0 && r.theta == 1.0);
        assert_eq!(out.b, scalar([0.0, 1.0, 0.0, 0.0, 1.0]).b);
    }

    #[test]
    fn equilibrated_is_fixed_point() {
        let ones = CMat::from_element(3, 3, C64::new(1.0, 0.0));
        let q = QuarticPencil::new(ones.clone(), ones.clone(), ones.clone(), ones.clone(), ones).unwrap();
        let (_, r) = balance(&q, 5);
        assert!(r.is_identity());
    }

    #[test]
    fn balancing_is_exactly_invertible() {
        let n = 4;
        let g = |k: usize| CMat::from_fn(n, n, |i, j| C64::new(((i + k) * (j + 1)) as f64 * 2f64.powi(3 * i as i32) + 0.1, 0.3 * j as f64));
        let q = QuarticPencil::new(g(0), g(1), g(2), g(3), g(4)).unwrap();
        let (b, r) = balance(&q, 5);
        let (dl, dr) = (r.dl.clone().unwrap(), r.dr.clone().unwrap());
        for (orig, scaled) in q.coeffs().iter().zip(b.coeffs()) {
            let back = CMat::from_fn(n, n, |i, j| scaled[(i, j)] / (dl[i] * dr[j]));
            assert_eq!(&back, *orig);
        }
        for d in dl.iter().chain(&dr) {
            assert_eq!(d.log2().fract(), 0.0);
        }
    }
}
