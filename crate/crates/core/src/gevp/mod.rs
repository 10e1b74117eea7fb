//! Generalized eigensolver for the deflated linear pencil.
//!
//! The backend is an in-repo complex QZ. Left vectors follow the transpose
//! convention `wᵀ·(β𝔸 − α𝔹) = 0`, matching the convention used for the
//! quartic's left eigenvectors.

mod qz;
mod vectors;

pub use qz::{qz, GeneralizedSchur};
pub use vectors::{left_triangular, right_triangular, ScaledTriangular};

use rayon::prelude::*;

use crate::numkit::{fro, normalized, vec_norm, CVec, EPS};
use crate::pencil::{HomogeneousEig, LinearPencil};
use crate::Result;

pub const BACKEND_ID: &str = "qz/complex-single-shift";

#[derive(Debug, Clone)]
pub struct GevpSolution {
    pub eigs: Vec<HomogeneousEig>,
    /// Unit-norm `v` with `(β𝔸 − α𝔹)v ≈ 0`.
    pub right_vecs: Vec<CVec>,
    /// Unit-norm `w` with `wᵀ(β𝔸 − α𝔹) ≈ 0`; empty when not requested.
    pub left_vecs: Vec<CVec>,
    /// `‖(β𝔸 − α𝔹)v‖ / ((|α|‖𝔹‖_F + β‖𝔸‖_F)‖v‖)`.
    pub right_residuals: Vec<f64>,
    pub left_residuals: Vec<f64>,
    pub backend_id: &'static str,
}

impl GevpSolution {
    /// Residual bound `10³·n·ε` from the solver contract.
    pub fn tolerance(&self) -> f64 {
        1e3 * self.eigs.len().max(1) as f64 * EPS
    }

    pub fn residuals_within_tolerance(&self) -> bool {
        let tol = self.tolerance();
        self.right_residuals
            .iter()
            .chain(&self.left_residuals)
            .all(|&r| r <= tol)
    }
}

/// Eigenvalues and eigenvectors of `𝔸 − λ𝔹`.
pub fn solve_gevp(p: &LinearPencil, want_left: bool) -> Result<GevpSolution> {
    let n = p.size;
    let schur = qz(&p.aa, &p.bb)?;
    let na = fro(&p.aa);
    let nb = fro(&p.bb);
    let mut out = GevpSolution {
        eigs: Vec::with_capacity(n),
        right_vecs: Vec::with_capacity(n),
        left_vecs: Vec::new(),
        right_residuals: Vec::with_capacity(n),
        left_residuals: Vec::new(),
        backend_id: BACKEND_ID,
    };
    let qbar = schur.q.map(|z| z.conj());
    let tri = ScaledTriangular::new(&schur.s, &schur.t);
    let per_eig: Vec<_> = (0..n)
        .into_par_iter()
        .map(|j| {
            let eig = HomogeneousEig::new(schur.s[(j, j)], schur.t[(j, j)], n);
            let beta = crate::C64::new(eig.beta, 0.0);
            let denom = eig.alpha.norm() * nb + eig.beta * na;
            let v = normalized(&(schur.z.columns(0, j + 1) * tri.right(j).rows(0, j + 1)));
            let rr = relres(vec_norm(&(&p.aa * &v * beta - &p.bb * &v * eig.alpha)), denom);
            let left = want_left.then(|| {
                let w = normalized(&(qbar.columns(j, n - j) * tri.left(j).rows(j, n - j)));
                let r = p.aa.tr_mul(&w) * beta - p.bb.tr_mul(&w) * eig.alpha;
                (relres(vec_norm(&r), denom), w)
            });
            (eig, v, rr, left)
        })
        .collect();
    for (eig, v, rr, left) in per_eig {
        out.eigs.push(eig);
        out.right_vecs.push(v);
        out.right_residuals.push(rr);
        if let Some((lr, w)) = left {
            out.left_residuals.push(lr);
            out.left_vecs.push(w);
        }
    }
    Ok(out)
}

fn relres(num: f64, denom: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if denom == 0.0 {
        f64::INFINITY
    } else {
        num / denom
    }
}
