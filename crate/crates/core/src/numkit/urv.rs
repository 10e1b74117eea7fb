use super::{perm_matrix, qr, rrqr_relative, CMat, PivotedQr, RankStrategy, ZERO};
use crate::Result;

/// Complete orthogonal decomposition `M = U·[R 0; 0 0]·Vᴴ`.
#[derive(Debug, Clone)]
pub struct UrvFactors {
    pub u: CMat,
    /// `rank × rank`, lower triangular and nonsingular.
    pub r: CMat,
    pub v: CMat,
    pub rank: usize,
    pub qr: PivotedQr,
}

impl UrvFactors {
    /// `U·[R 0; 0 0]·Vᴴ`.
    pub fn reconstruct(&self) -> CMat {
        let (p, q) = (self.u.nrows(), self.v.nrows());
        let mut core = CMat::zeros(p, q);
        core.view_mut((0, 0), (self.rank, self.rank)).copy_from(&self.r);
        &self.u * core * self.v.adjoint()
    }
}

/// Pivoted QR followed by a QR of the retained rows' adjoint.
pub fn urv(m: &CMat, strategy: &RankStrategy) -> Result<UrvFactors> {
    urv_relative(m, strategy, 0.0)
}

/// [`urv`] with the rank decided against `max(‖M‖_F, reference)`.
pub fn urv_relative(m: &CMat, strategy: &RankStrategy, reference: f64) -> Result<UrvFactors> {
    let f = rrqr_relative(m, strategy, reference)?;
    let k = f.rank;
    let cols = m.ncols();
    let w_adj = f.r.rows(0, k).adjoint();
    let (z, s) = qr(&w_adj);
    let r = s.rows(0, k).adjoint();
    let v = perm_matrix(&f.perm) * z;
    debug_assert_eq!(v.nrows(), cols);
    Ok(UrvFactors {
        u: f.q.clone(),
        r,
        v,
        rank: k,
        qr: f,
    })
}

/// Right transformation `V` with `Uᴴ·N·V = [0 | [R; 0]]`: the trailing `rank`
/// columns carry the row space and the leading ones are exactly zero.
#[derive(Debug, Clone)]
pub struct ColumnCompression {
    pub u: CMat,
    pub v: CMat,
    pub rank: usize,
    /// `Uᴴ·N·V` with the truncated part set to exact zeros.
    pub compressed: CMat,
    pub urv: UrvFactors,
}

pub fn compress_rows_trailing(n: &CMat, strategy: &RankStrategy) -> Result<ColumnCompression> {
    compress_rows_trailing_relative(n, strategy, 0.0)
}

pub fn compress_rows_trailing_relative(n: &CMat, strategy: &RankStrategy, reference: f64) -> Result<ColumnCompression> {
    let f = urv_relative(n, strategy, reference)?;
    let (p, q) = n.shape();
    let k = f.rank;
    let mut v = CMat::zeros(q, q);
    v.columns_mut(0, q - k).copy_from(&f.v.columns(k, q - k));
    v.columns_mut(q - k, k).copy_from(&f.v.columns(0, k));
    let mut compressed = CMat::from_element(p, q, ZERO);
    compressed.view_mut((0, q - k), (k, k)).copy_from(&f.r);
    Ok(ColumnCompression {
        u: f.u.clone(),
        v,
        rank: k,
        compressed,
        urv: f,
    })
}
