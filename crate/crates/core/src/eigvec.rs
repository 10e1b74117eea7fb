//! Quartic eigenvectors from eigenvectors of the linearization.
//!
//! Right vectors of the linearization have the block form
//! `z = (λx, λ²(λA+B)x, λ(λA+B)x, −Ex)` and left vectors (transpose
//! convention, `wᵀ(𝔸 − λ𝔹) = 0`) the form `w = (λ³y, λy, λ²y, y)` with
//! `yᵀP(λ) = 0`. Recovered left vectors are returned conjugated so that
//! `y*P(λ) = 0`.

use nalgebra::{Dyn, LU};
use serde::{Deserialize, Serialize};

use crate::deflate::{DeflationResult, RankProfile};
use crate::diagnostics::{eta, eta_left, NormCache};
use crate::numkit::{
    normalized, qr, svd, tri_hess_reduce, vec_norm, CMat, CVec, ShiftedHessLu, Svd, TriHessPair, C64, EPS, ZERO,
};
use crate::pencil::{EigClass, HomogeneousEig, QuarticPencil};
use crate::{Error, Result};

/// Per-problem factorizations shared by all eigenvalues.
#[derive(Debug, Clone)]
pub struct RecoveryContext {
    /// `(A, B) = (Q·T·Zᴴ, Q·H·Zᴴ)`, for solves with `λA + B`.
    pub tri_hess: TriHessPair,
    pub svd_e: Option<Svd>,
    /// SVD of `D`, for the least-squares variant at `λ = 0`.
    pub svd_d: Option<Svd>,
    pub lu_e: Option<LU<C64, Dyn, Dyn>>,
    pub norms: NormCache,
}

impl RecoveryContext {
    /// `e_regular` enables the `E⁻¹` candidate; `least_squares` the SVDs.
    pub fn new(q: &QuarticPencil, e_regular: bool, least_squares: bool) -> Result<Self> {
        Ok(RecoveryContext {
            tri_hess: tri_hess_reduce(&q.a, &q.b)?,
            svd_e: if least_squares { Some(svd(&q.e)?) } else { None },
            svd_d: if least_squares { Some(svd(&q.d)?) } else { None },
            lu_e: if e_regular { Some(LU::new(q.e.clone())) } else { None },
            norms: NormCache::new(q),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecoveryMethod {
    /// `z₁`.
    Block1,
    /// `(λA+B)⁻¹z₂`.
    Block2Solve,
    /// `(λA+B)⁻¹z₃`.
    Block3Solve,
    /// `E⁻¹(−z₄)`.
    ESolve,
    LeastSquares,
    /// Left vector taken from block `k` of `w`.
    LeftBlock(u8),
    /// Basis vector of a null space, for deflated eigenvalues.
    NullSpace,
}

#[derive(Debug, Clone)]
pub struct Recovered {
    pub x: CVec,
    pub method: RecoveryMethod,
    pub eta: f64,
    /// Recovery degenerate or every preferred candidate failed.
    pub flagged: bool,
}

fn blocks(z: &CVec, n: usize) -> Result<[CVec; 4]> {
    if z.len() != 4 * n {
        return Err(Error::Dimension(format!("expected a vector of length {}, got {}", 4 * n, z.len())));
    }
    Ok(std::array::from_fn(|k| z.rows(k * n, n).into_owned()))
}

fn usable(v: &CVec, total: f64, n: usize) -> bool {
    let nv = vec_norm(v);
    nv > 0.0 && nv > n as f64 * EPS * total && v.iter().all(|c| c.re.is_finite() && c.im.is_finite())
}

/// Best of the available candidates by `η`; ties keep the earlier one.
pub fn recover_right(z: &CVec, lam: &HomogeneousEig, ctx: &RecoveryContext, q: &QuarticPencil) -> Result<Recovered> {
    let n = q.n;
    let zb = blocks(z, n)?;
    let total = vec_norm(z);
    let lambda = lam
        .lambda()
        .filter(|_| lam.class == EigClass::Finite)
        .ok_or_else(|| Error::InvalidArgument("recover_right needs a finite nonzero eigenvalue".into()))?;

    let mut cands: Vec<(CVec, RecoveryMethod)> = Vec::with_capacity(4);
    if usable(&zb[0], total, n) {
        cands.push((zb[0].clone(), RecoveryMethod::Block1));
    }
    if let Ok(lu) = ShiftedHessLu::new(&ctx.tri_hess, lambda) {
        for (blk, m) in [(&zb[1], RecoveryMethod::Block2Solve), (&zb[2], RecoveryMethod::Block3Solve)] {
            if usable(blk, total, n) {
                let v = lu.solve(blk);
                if usable(&v, 0.0, n) {
                    cands.push((v, m));
                }
            }
        }
    }
    if let Some(lu) = &ctx.lu_e {
        if usable(&zb[3], total, n) {
            if let Some(v) = lu.solve(&(-&zb[3])) {
                if usable(&v, 0.0, n) {
                    cands.push((v, RecoveryMethod::ESolve));
                }
            }
        }
    }

    let mut best: Option<Recovered> = None;
    for (v, method) in cands {
        let x = normalized(&v);
        let e = eta(lam, &x, q, &ctx.norms)?;
        if best.as_ref().is_none_or(|b| e < b.eta) {
            best = Some(Recovered {
                x,
                method,
                eta: e,
                flagged: false,
            });
        }
    }
    match best {
        Some(b) => Ok(b),
        None => {
            let x = if vec_norm(&zb[0]) > 0.0 { normalized(&zb[0]) } else { normalized(z).rows(0, n).into_owned() };
            let x = if vec_norm(&x) > 0.0 { normalized(&x) } else { unit(n) };
            let e = eta(lam, &x, q, &ctx.norms)?;
            Ok(Recovered {
                x,
                method: RecoveryMethod::Block1,
                eta: e,
                flagged: true,
            })
        }
    }
}

fn unit(n: usize) -> CVec {
    let mut v = CVec::zeros(n);
    if n > 0 {
        v[0] = C64::new(1.0, 0.0);
    }
    v
}

/// `λ = 0`: `z = (x, 0, Bx, Dx)`.
#[derive(Debug, Clone)]
pub struct ZeroRecovery {
    pub x: CVec,
    /// `‖z − (z₁, 0, Bz₁, Dz₁)‖ / ‖z‖`.
    pub consistency: f64,
    pub degenerate: bool,
}

pub fn recover_right_zero(z: &CVec, q: &QuarticPencil) -> Result<ZeroRecovery> {
    let n = q.n;
    let zb = blocks(z, n)?;
    let total = vec_norm(z);
    let degenerate = !usable(&zb[0], total, n);
    let dev = vec_norm(&zb[1])
        .hypot(vec_norm(&(&zb[2] - &q.b * &zb[0])))
        .hypot(vec_norm(&(&zb[3] - &q.d * &zb[0])));
    let consistency = if total > 0.0 { dev / total } else { 0.0 };
    let x = if degenerate { unit(n) } else { normalized(&zb[0]) };
    Ok(ZeroRecovery {
        x,
        consistency,
        degenerate,
    })
}

/// `λ = ∞`: `x = z₁`.
pub fn recover_right_infinite(z: &CVec, q: &QuarticPencil) -> Result<(CVec, bool)> {
    let n = q.n;
    let zb = blocks(z, n)?;
    if usable(&zb[0], vec_norm(z), n) {
        Ok((normalized(&zb[0]), false))
    } else {
        Ok((unit(n), true))
    }
}

/// Left vector from the block of `w` with the smallest left backward error,
/// preferring larger blocks on ties. Zero and infinite eigenvalues use the
/// only informative block (`w₄` and `w₁`).
pub fn recover_left(w: &CVec, lam: &HomogeneousEig, q: &QuarticPencil, norms: &NormCache) -> Result<Recovered> {
    let n = q.n;
    if vec_norm(w) == 0.0 {
        return Err(Error::InvalidArgument("zero left vector".into()));
    }
    let wb = blocks(w, n)?;
    let total = vec_norm(w);
    let order: Vec<usize> = match lam.class {
        EigClass::Zero => vec![3],
        EigClass::Infinite => vec![0],
        EigClass::Finite => {
            let mut o = vec![0, 1, 2, 3];
            o.sort_by(|&i, &j| vec_norm(&wb[j]).total_cmp(&vec_norm(&wb[i])));
            o
        }
    };
    let mut best: Option<Recovered> = None;
    for k in order {
        if !usable(&wb[k], total, n) {
            continue;
        }
        let y = normalized(&wb[k].map(|c| c.conj()));
        let e = eta_left(lam, &y, q, norms)?;
        if best.as_ref().is_none_or(|b| e < b.eta) {
            best = Some(Recovered {
                x: y,
                method: RecoveryMethod::LeftBlock(k as u8 + 1),
                eta: e,
                flagged: false,
            });
        }
    }
    match best {
        Some(b) => Ok(b),
        None => {
            let y = unit(n);
            let e = eta_left(lam, &y, q, norms)?;
            Ok(Recovered {
                x: y,
                method: RecoveryMethod::LeftBlock(0),
                eta: e,
                flagged: true,
            })
        }
    }
}

/// Componentwise solve of `min ‖[s·I; M]x − [c; d]‖` with `M = UΣVᴴ`.
fn stacked_ls(s: C64, m: &Svd, c: &CVec, d: &CVec) -> CVec {
    let ch = m.v.adjoint() * c;
    let dh = m.u.adjoint() * d;
    let n = c.len();
    let u = CVec::from_fn(n, |i, _| {
        let sig = m.sigma.get(i).copied().unwrap_or(0.0);
        let den = s.norm_sqr() + sig * sig;
        if den == 0.0 {
            ZERO
        } else {
            (s.conj() * ch[i] + dh[i] * sig) / den
        }
    });
    &m.v * u
}

/// Least-squares recovery: `min ‖[λI; E]x − [z₁; −z₄]‖`, in the equivalent
/// `1/λ`-scaled form when `|λ| > 1`. For `λ = 0`,
/// `min ‖[I; D]x − [z₁; z₄]‖`. Returned unit-norm.
pub fn recover_right_ls(z: &CVec, lam: &HomogeneousEig, ctx: &RecoveryContext, q: &QuarticPencil) -> Result<CVec> {
    let n = q.n;
    let zb = blocks(z, n)?;
    let missing = || Error::InvalidArgument("least-squares recovery needs the SVD factors".into());
    let x = match lam.class {
        EigClass::Infinite => return Err(Error::InvalidArgument("least-squares recovery needs finite λ".into())),
        EigClass::Zero => stacked_ls(C64::new(1.0, 0.0), ctx.svd_d.as_ref().ok_or_else(missing)?, &zb[0], &zb[3]),
        EigClass::Finite => {
            let sv = ctx.svd_e.as_ref().ok_or_else(missing)?;
            let lambda = lam.alpha / lam.beta;
            let rhs = -&zb[3];
            if lambda.norm() > 1.0 {
                let inv = lambda.inv();
                let scaled = Svd {
                    u: sv.u.clone(),
                    sigma: sv.sigma.iter().map(|s| s * inv.norm()).collect(),
                    v: sv.v.clone(),
                };
                // ‖[I; E/λ]x − [z₁/λ; −z₄/λ]‖ with the phase of 1/λ moved into U
                let phase = inv / inv.norm();
                let u_ph = Svd {
                    u: scaled.u.map(|c| c * phase),
                    ..scaled
                };
                stacked_ls(C64::new(1.0, 0.0), &u_ph, &(&zb[0] * inv), &(&rhs * inv))
            } else {
                stacked_ls(lambda, sv, &zb[0], &rhs)
            }
        }
    };
    if vec_norm(&x) == 0.0 {
        return Ok(unit(n));
    }
    Ok(normalized(&x))
}

/// `z = Q·[z̃; 0]`.
pub fn lift_right(zt: &CVec, d: &DeflationResult) -> Result<CVec> {
    let m = d.pencil.size;
    if zt.len() != m {
        return Err(Error::Dimension(format!("expected length {m}, got {}", zt.len())));
    }
    Ok(d.q.columns(0, m) * zt)
}

/// `w = Pᵀ·[w̃; w̃₂]` with `w̃₂ᵀ = −w̃ᵀX(λ)Y(λ)⁻¹`, all in the transpose
/// convention. Fails when `Y(λ)` is numerically singular.
pub fn lift_left(wt: &CVec, lam: &HomogeneousEig, d: &DeflationResult) -> Result<CVec> {
    let m = d.pencil.size;
    if wt.len() != m {
        return Err(Error::Dimension(format!("expected length {m}, got {}", wt.len())));
    }
    if vec_norm(wt) == 0.0 {
        return Err(Error::InvalidArgument("zero left vector".into()));
    }
    let t = d.p.nrows() - m;
    let mut full = CVec::zeros(m + t);
    full.rows_mut(0, m).copy_from(wt);
    if t > 0 {
        let beta = C64::new(lam.beta, 0.0);
        let x = &d.x_a * beta - &d.x_b * lam.alpha;
        let y = &d.y_a * beta - &d.y_b * lam.alpha;
        let yt = y.transpose();
        let lu = LU::new(yt.clone());
        let rhs = -(x.transpose() * wt);
        let inv = lu.try_inverse().ok_or(Error::Deflation("trailing block Y(λ) is singular".into()))?;
        let norm1 = |a: &CMat| (0..a.ncols()).map(|j| a.column(j).iter().map(|c| c.norm()).sum::<f64>()).fold(0.0, f64::max);
        let rcond = 1.0 / (norm1(&yt) * norm1(&inv));
        if !(rcond >= EPS) {
            return Err(Error::Deflation(format!("trailing block Y(λ) is numerically singular (rcond {rcond:.2e})")));
        }
        full.rows_mut(m, t).copy_from(&(inv * rhs));
    }
    Ok(d.p.transpose() * full)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NullClass {
    /// Null spaces of `E`.
    Zero,
    /// Null spaces of `A`.
    Infinite,
}

/// Orthonormal bases with `coef·right = 0` and `left*·coef = 0`.
#[derive(Debug, Clone)]
pub struct NullBases {
    pub right: CMat,
    pub left: CMat,
}

pub fn nullspace_vectors(rp: &RankProfile, which: NullClass) -> NullBases {
    let f = match which {
        NullClass::Zero => &rp.qr_e,
        NullClass::Infinite => &rp.qr_a,
    };
    let n = rp.n;
    let k = n - f.rank;
    if k == 0 {
        return NullBases {
            right: CMat::zeros(n, 0),
            left: CMat::zeros(n, 0),
        };
    }
    // columns of Π R̂ᴴ span the row space; the trailing Q columns of its QR complete it
    let rows = f.r_hat_unpermuted().adjoint();
    let (qq, _) = qr(&rows);
    NullBases {
        right: qq.columns(f.rank, k).into_owned(),
        left: f.q_trailing(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deflate::analyze_ranks;
    use crate::numkit::{unitarity_defect, RankStrategy, ONE};

    fn scalar(c: [f64; 5]) -> QuarticPencil {
        let m = |v: f64| CMat::from_element(1, 1, C64::new(v, 0.0));
        QuarticPencil::new(m(c[0]), m(c[1]), m(c[2]), m(c[3]), m(c[4])).unwrap()
    }

    fn sample(n: usize, seed: u64) -> CMat {
        let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        CMat::from_fn(n, n, |_, _| C64::new(next(), next()))
    }

    fn quartic(n: usize) -> QuarticPencil {
        QuarticPencil::new(sample(n, 1), sample(n, 2), sample(n, 3), sample(n, 4), sample(n, 5)).unwrap()
    }

    fn assemble(q: &QuarticPencil, lambda: C64, x: &CVec) -> CVec {
        let ab = (&q.a * lambda + &q.b) * x;
        let mut z = CVec::zeros(4 * q.n);
        z.rows_mut(0, q.n).copy_from(&(x * lambda));
        z.rows_mut(q.n, q.n).copy_from(&(&ab * (lambda * lambda)));
        z.rows_mut(2 * q.n, q.n).copy_from(&(&ab * lambda));
        z.rows_mut(3 * q.n, q.n).copy_from(&(-(&q.e * x)));
        z
    }

    #[test]
    fn scalar_unit_root() {
        let q = scalar([1.0, 0.0, 0.0, 0.0, -1.0]);
        let ctx = RecoveryContext::new(&q, true, true).unwrap();
        let lam = HomogeneousEig::finite(ONE);
        let z = assemble(&q, ONE, &CVec::from_element(1, ONE));
        let r = recover_right(&z, &lam, &ctx, &q).unwrap();
        assert!((r.x[0].norm() - 1.0).abs() < 1e-15 && r.eta < 1e-15);
    }

    #[test]
    fn formula_inversion_recovers_x() {
        let n = 4;
        let q = quartic(n);
        let ctx = RecoveryContext::new(&q, true, true).unwrap();
        let x = normalized(&CVec::from_fn(n, |i, _| C64::new(1.0 + i as f64, -(i as f64))));
        let lambda = C64::new(0.7, -1.3);
        let z = assemble(&q, lambda, &x);
        let lam = HomogeneousEig::finite(lambda);
        let r = recover_right(&z, &lam, &ctx, &q).unwrap();
        let overlap = r.x.dotc(&x).norm();
        assert!((overlap - 1.0).abs() < 1e-12);
        let ls = recover_right_ls(&z, &lam, &ctx, &q).unwrap();
        assert!((ls.dotc(&x).norm() - 1.0).abs() < 1e-12);
        let big = C64::new(-3.0, 2.5);
        let z2 = assemble(&q, big, &x);
        let ls2 = recover_right_ls(&z2, &HomogeneousEig::finite(big), &ctx, &q).unwrap();
        assert!((ls2.dotc(&x).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ls_with_zero_e_is_first_block() {
        let n = 3;
        let mut q = quartic(n);
        q.e = CMat::zeros(n, n);
        let ctx = RecoveryContext::new(&q, false, true).unwrap();
        let mut z = CVec::from_fn(4 * n, |i, _| C64::new(i as f64 * 0.3 - 1.0, 0.2));
        z.rows_mut(3 * n, n).fill(C64::new(5.0, 0.0));
        let lambda = C64::new(2.0, 1.0);
        let x = recover_right_ls(&z, &HomogeneousEig::finite(lambda), &ctx, &q).unwrap();
        let want = normalized(&z.rows(0, n).into_owned());
        assert!((x.dotc(&want).norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_recovery_and_degeneracy() {
        let n = 3;
        let q = quartic(n);
        let x = normalized(&CVec::from_fn(n, |i, _| C64::new(i as f64 + 1.0, 0.0)));
        let mut z = CVec::zeros(4 * n);
        z.rows_mut(0, n).copy_from(&x);
        z.rows_mut(2 * n, n).copy_from(&(&q.b * &x));
        z.rows_mut(3 * n, n).copy_from(&(&q.d * &x));
        let r = recover_right_zero(&z, &q).unwrap();
        assert!(!r.degenerate && r.consistency < 1e-15);
        assert!((r.x.dotc(&x).norm() - 1.0).abs() < 1e-15);
        z.rows_mut(0, n).fill(ZERO);
        assert!(recover_right_zero(&z, &q).unwrap().degenerate);
    }

    #[test]
    fn left_blocks() {
        let q = scalar([1.0, 0.0, 0.0, 0.0, -16.0]);
        let nc = NormCache::new(&q);
        let l = C64::new(2.0, 0.0);
        let w = CVec::from_vec(vec![l * l * l, l, l * l, ONE]);
        let r = recover_left(&w, &HomogeneousEig::finite(l), &q, &nc).unwrap();
        assert!(r.eta < 1e-15);
        assert!(recover_left(&CVec::zeros(4), &HomogeneousEig::finite(l), &q, &nc).is_err());
    }

    #[test]
    fn planted_null_spaces() {
        let n = 5;
        let mut e = sample(n, 9);
        e.column_mut(2).fill(ZERO);
        e.column_mut(4).fill(ZERO);
        let mut q = quartic(n);
        q.e = e.clone();
        let rp = analyze_ranks(&q, &RankStrategy::default()).unwrap();
        let nb = nullspace_vectors(&rp, NullClass::Zero);
        assert_eq!(nb.right.ncols(), 2);
        assert!(unitarity_defect(&nb.right) < 1e-14);
        assert!((&e * &nb.right).iter().all(|c| c.norm() < 1e-14));
        for i in [0, 1, 3] {
            assert!(nb.right.row(i).iter().all(|c| c.norm() < 1e-14));
        }
        assert!((nb.left.adjoint() * &e).iter().all(|c| c.norm() < 1e-13));
        assert_eq!(nullspace_vectors(&rp, NullClass::Infinite).right.ncols(), 0);
    }
}
