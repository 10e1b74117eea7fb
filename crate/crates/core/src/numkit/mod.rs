//! Dense complex kernels: pivoted QR, complete orthogonal decomposition,
//! SVD, triangular-Hessenberg reduction and shifted Hessenberg solves.
//!
//! Everything works in complex arithmetic; real data is promoted on input.

mod givens;
mod hessenberg;
mod householder;
mod rrqr;
mod svd;
mod urv;

use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64 as C64;

pub use givens::{rot, Givens};
pub use hessenberg::{shifted_hess_solve, tri_hess_reduce, ShiftedHessLu, TriHessPair};
pub use householder::{qr, Reflector};
pub use rrqr::{rrqr, rrqr_forced, rrqr_relative, PivotedQr, RankStrategy, TruncationLog};
pub use svd::{spectral_norm, svd, NormMethod, Svd};
pub use urv::{compress_rows_trailing, compress_rows_trailing_relative, urv, urv_relative, ColumnCompression, UrvFactors};

pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const EPS: f64 = f64::EPSILON;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Frobenius norm.
pub fn fro(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_norm(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `‖QᴴQ − I‖_F`.
pub fn unitarity_defect(q: &CMat) -> f64 {
    let mut g = q.adjoint() * q;
    for i in 0..g.nrows().min(g.ncols()) {
        g[(i, i)] -= ONE;
    }
    fro(&g)
}

pub fn is_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn ensure_finite(m: &CMat) -> crate::Result<()> {
    if is_finite(m) {
        Ok(())
    } else {
        Err(crate::Error::NonFinite)
    }
}

/// Promote a real matrix to complex.
pub fn complexify(m: &DMatrix<f64>) -> CMat {
    m.map(|x| C64::new(x, 0.0))
}

/// Column permutation matrix `Π` with `(MΠ)[:, j] = M[:, perm[j]]`.
pub fn perm_matrix(perm: &[usize]) -> CMat {
    let n = perm.len();
    let mut p = CMat::zeros(n, n);
    for (j, &i) in perm.iter().enumerate() {
        p[(i, j)] = ONE;
    }
    p
}

/// Unit vector in the direction of `v`; zero vectors are returned unchanged.
pub fn normalized(v: &CVec) -> CVec {
    let nv = vec_norm(v);
    if nv > 0.0 {
        v.unscale(nv)
    } else {
        v.clone()
    }
}
