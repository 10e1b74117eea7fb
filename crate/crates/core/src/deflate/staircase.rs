//! Generic reduction steps toward the upper-triangular Kronecker form.

use serde::{Deserialize, Serialize};

use crate::numkit::{compress_rows_trailing_relative, fro, rrqr_forced, rrqr_relative, CMat, RankStrategy, TruncationLog};
use crate::pencil::{BlockMap, LinearPencil};
use crate::Result;

/// Which eigenvalue a step removes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Zero,
    Infinite,
}

/// Outcome of one reduction step on an `m×m` pencil.
#[derive(Debug, Clone)]
pub struct StaircaseStep {
    /// Leading `(m − deflated)` block of `left·(𝔸 − λ𝔹)·right`.
    pub pencil: LinearPencil,
    pub left: CMat,
    pub right: CMat,
    pub deflated: usize,
    /// Rank evidence for the vanishing coefficient.
    pub evidence: Option<TruncationLog>,
    /// Rank evidence for the row block compressed by the URV step.
    pub compression: Option<TruncationLog>,
    /// `false` when the compressed rows were rank deficient, i.e. the pencil
    /// has common zero rows and is not regular. Nothing is deflated then.
    pub regular: bool,
    /// Frobenius norm of everything discarded by the split, relative to the
    /// pencil norm.
    pub discarded: f64,
}

/// One zero-eigenvalue step on `p`. With `known_block = Some(k)` the rank
/// decision on `𝔸` is skipped and exactly `k` rows are split off.
///
/// Infinite eigenvalues are handled by calling this on the swapped pencil
/// `(𝔹, 𝔸)`; see [`staircase_step_side`].
pub fn staircase_step(p: &LinearPencil, known_block: Option<usize>, strategy: &RankStrategy) -> Result<StaircaseStep> {
    staircase_step_side(p, known_block, strategy, Side::Zero)
}

pub fn staircase_step_side(
    p: &LinearPencil,
    known_block: Option<usize>,
    strategy: &RankStrategy,
    side: Side,
) -> Result<StaircaseStep> {
    let m = p.size;
    let van = match side {
        Side::Zero => &p.aa,
        Side::Infinite => &p.bb,
    };
    let f = match known_block {
        Some(k) => rrqr_forced(van, m.saturating_sub(k).min(m))?,
        None => rrqr_relative(van, strategy, pencil_norm(&p.aa, &p.bb))?,
    };
    let d = m - f.rank;
    let left = f.q.adjoint();
    let mut step = finish(p.block_map.n(), &p.aa, &p.bb, left, d, strategy, side)?;
    step.evidence = Some(f.log);
    Ok(step)
}

/// `‖(𝔸, 𝔹)‖_F`, the scale rank decisions inside a step are measured against.
pub(crate) fn pencil_norm(a: &CMat, b: &CMat) -> f64 {
    fro(a).hypot(fro(b))
}

/// Given `left` that zeroes the last `d` rows of the vanishing coefficient,
/// compress the same rows of the other coefficient to `[0 | B̆]` and split.
pub(crate) fn finish(
    n: usize,
    a: &CMat,
    b: &CMat,
    left: CMat,
    d: usize,
    strategy: &RankStrategy,
    side: Side,
) -> Result<StaircaseStep> {
    let m = a.nrows();
    if d == 0 {
        return apply(n, a, b, left, CMat::identity(m, m), 0, side);
    }
    let other = match side {
        Side::Zero => &left * b,
        Side::Infinite => &left * a,
    };
    let rows = other.rows(m - d, d).into_owned();
    let comp = compress_rows_trailing_relative(&rows, strategy, pencil_norm(a, b))?;
    if comp.rank < d {
        let mut s = apply(n, a, b, CMat::identity(m, m), CMat::identity(m, m), 0, side)?;
        s.regular = false;
        s.compression = Some(comp.urv.qr.log.clone());
        return Ok(s);
    }
    let mut left = left;
    let tail = comp.u.adjoint() * left.rows(m - d, d);
    left.rows_mut(m - d, d).copy_from(&tail);
    let mut s = apply(n, a, b, left, comp.v, d, side)?;
    s.compression = Some(comp.urv.qr.log);
    Ok(s)
}

/// Apply a given equivalence and split off the trailing `d` block.
pub(crate) fn apply(n: usize, a: &CMat, b: &CMat, left: CMat, right: CMat, d: usize, side: Side) -> Result<StaircaseStep> {
    let m = a.nrows();
    let ta = &left * a * &right;
    let tb = &left * b * &right;
    let k = m - d;
    let (van, other) = match side {
        Side::Zero => (&ta, &tb),
        Side::Infinite => (&tb, &ta),
    };
    let dropped = fro(&van.rows(k, d).into_owned()).hypot(fro(&other.view((k, 0), (d, k)).into_owned()));
    let scale = fro(a).hypot(fro(b));
    let discarded = if scale > 0.0 { dropped / scale } else { 0.0 };
    let pencil = LinearPencil::new(
        ta.view((0, 0), (k, k)).into_owned(),
        tb.view((0, 0), (k, k)).into_owned(),
        BlockMap::Deflated { n, from: m, size: k },
    )?;
    Ok(StaircaseStep {
        pencil,
        left,
        right,
        deflated: d,
        evidence: None,
        compression: None,
        regular: true,
        discarded,
    })
}
