use serde::{Deserialize, Serialize};

use super::{ensure_finite, vec_norm, CMat, CVec, C64};
use crate::{Error, Result};

/// Full SVD `M = U·diag(σ)·Vᴴ` with square unitary `U`, `V`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMat,
    /// Non-increasing, length `min(rows, cols)`.
    pub sigma: Vec<f64>,
    pub v: CMat,
}

/// Backed by faer's divide-and-conquer SVD, which returns square unitary
/// factors directly.
pub fn svd(m: &CMat) -> Result<Svd> {
    ensure_finite(m)?;
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Ok(Svd {
            u: CMat::identity(rows, rows),
            sigma: vec![],
            v: CMat::identity(cols, cols),
        });
    }
    let s = to_faer(m).svd().map_err(|_| Error::SvdNoConvergence)?;
    let sigma = s.S().column_vector().iter().map(|z| z.re).collect();
    Ok(Svd {
        u: from_faer(s.U()),
        sigma,
        v: from_faer(s.V()),
    })
}

fn to_faer(m: &CMat) -> faer::Mat<faer::c64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| {
        let z = m[(i, j)];
        faer::c64::new(z.re, z.im)
    })
}

fn from_faer(m: faer::MatRef<'_, faer::c64>) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| {
        let z = m[(i, j)];
        C64::new(z.re, z.im)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    Svd,
    PowerIteration,
}

/// Largest dimension for which the spectral norm is taken from a full SVD.
pub const SVD_NORM_LIMIT: usize = 512;

/// `‖M‖₂`, exact up to SVD accuracy for small matrices and by power
/// iteration on `MᴴM` (relative change below 1e-10) otherwise.
pub fn spectral_norm(m: &CMat) -> (f64, NormMethod) {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 || m.iter().all(|z| *z == C64::new(0.0, 0.0)) {
        return (0.0, NormMethod::Svd);
    }
    if rows.max(cols) <= SVD_NORM_LIMIT {
        let s = nalgebra::SVD::new(m.clone(), false, false);
        return (s.singular_values.max(), NormMethod::Svd);
    }
    (power_norm(m, 2000, 1e-10), NormMethod::PowerIteration)
}

pub(crate) fn power_norm(m: &CMat, max_iter: usize, rtol: f64) -> f64 {
    let cols = m.ncols();
    // deterministic start touching every direction
    let mut x = CVec::from_fn(cols, |i, _| C64::new(1.0 + (i % 7) as f64 * 0.1, (i % 3) as f64 * 0.05));
    x.unscale_mut(vec_norm(&x));
    let mut est = 0.0;
    for _ in 0..max_iter {
        let y = m * &x;
        let z = m.adjoint() * &y;
        let nz = vec_norm(&z);
        if nz == 0.0 {
            return vec_norm(&y);
        }
        let new = nz.sqrt();
        x = z.unscale(nz);
        if (new - est).abs() <= rtol * new {
            return new;
        }
        est = new;
    }
    est
}
