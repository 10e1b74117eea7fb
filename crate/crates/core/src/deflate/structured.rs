//! Transformations that exploit the block layout of the linearization.
//!
//! Each builder returns the left (and where needed right) factor of one
//! step; splitting off the deflated rows is left to the staircase engine.

use crate::numkit::{CMat, PivotedQr, ONE};
use crate::pencil::{BlockMap, LinearPencil};
use crate::Result;

use super::{RankProfile, StaircaseStep};

fn eye(m: usize) -> CMat {
    CMat::identity(m, m)
}

/// `P = diag(Q_𝕄ᴴ, I)`, `Q = diag(Π_𝕄, I)`. Turns `𝔹` upper triangular
/// when `A` and `E` are both of full rank.
pub(crate) fn regular_transform(rp: &RankProfile) -> (CMat, CMat) {
    let n = rp.n;
    let mut p = eye(4 * n);
    p.view_mut((0, 0), (2 * n, 2 * n)).copy_from(&rp.q_m.adjoint());
    let mut q = eye(4 * n);
    q.view_mut((0, 0), (2 * n, 2 * n)).copy_from(&rp.pi_m);
    (p, q)
}

/// [`regular_transform`] applied using its block structure: `Q_𝕄ᴴ` on the
/// first `2n` rows, the permutation `Π_𝕄` on the first `2n` columns.
pub(crate) fn regular_step(lin: &LinearPencil, rp: &RankProfile) -> Result<StaircaseStep> {
    let n = rp.n;
    let (p, q) = regular_transform(rp);
    let qh = rp.q_m.adjoint();
    let perm: Vec<usize> = (0..2 * n)
        .map(|j| (0..2 * n).find(|&i| rp.pi_m[(i, j)] == ONE).expect("permutation"))
        .collect();
    let map = |m: &CMat| {
        let mut out = m.clone();
        let top = &qh * m.rows(0, 2 * n);
        out.rows_mut(0, 2 * n).copy_from(&top);
        let cols = out.columns(0, 2 * n).into_owned();
        for (j, &src) in perm.iter().enumerate() {
            out.set_column(j, &cols.column(src));
        }
        out
    };
    let pencil = LinearPencil::new(map(&lin.aa), map(&lin.bb), BlockMap::Deflated { n, from: 4 * n, size: 4 * n })?;
    Ok(StaircaseStep {
        pencil,
        left: p,
        right: q,
        deflated: 0,
        evidence: None,
        compression: None,
        regular: true,
        discarded: 0.0,
    })
}

/// `P₁ = diag(I, Q_Eᴴ, I, Q_Eᴴ)`, `Q₁ = diag(I, I, I, Q_E)`. The last
/// `n − r_E` rows of `P₁𝔸Q₁` carry only the truncated part of `R_E`, and
/// the matching rows of `P₁𝔹Q₁` are `[0 | −I]`.
pub(crate) fn zero_first(n: usize, qr_e: &PivotedQr) -> (CMat, CMat) {
    let qh = qr_e.q.adjoint();
    let mut p = eye(4 * n);
    p.view_mut((n, n), (n, n)).copy_from(&qh);
    p.view_mut((3 * n, 3 * n), (n, n)).copy_from(&qh);
    let mut q = eye(4 * n);
    q.view_mut((3 * n, 3 * n), (n, n)).copy_from(&qr_e.q);
    (p, q)
}

/// Left factor of the second zero step, acting on the `(3n + r_E)`-sized
/// pencil left by [`zero_first`]. Row blocks there are
/// `r0 | r1a r1b | r2 | r3a`; `r1b` and `r3a` restricted to the first block
/// column form `Ψ`. They are moved last and rotated by `Q_Ψᴴ`.
pub(crate) fn zero_second(n: usize, r_e: usize, qr_psi: &PivotedQr) -> CMat {
    let m = 3 * n + r_e;
    let mut left = CMat::zeros(m, m);
    let kept = (0..n + r_e).chain(2 * n..3 * n);
    for (i, old) in kept.enumerate() {
        left[(i, old)] = ONE;
    }
    let psi_rows: Vec<usize> = (n + r_e..2 * n).chain(3 * n..3 * n + r_e).collect();
    let qh = qr_psi.q.adjoint();
    let base = 2 * n + r_e;
    for i in 0..n {
        for (j, &old) in psi_rows.iter().enumerate() {
            left[(base + i, old)] = qh[(i, j)];
        }
    }
    left
}

/// Left factor of the first infinite step on an `m×m` pencil whose first
/// `n` rows still hold `[−A 0 0 0]` in `𝔹` (up to a right factor).
/// `Q_Aᴴ` is applied to those rows and its trailing `n − r_A` rows are moved
/// to the bottom.
pub(crate) fn infinite_first(n: usize, m: usize, qr_a: &PivotedQr) -> CMat {
    let r = qr_a.rank;
    let qh = qr_a.q.adjoint();
    let mut left = CMat::zeros(m, m);
    for i in 0..r {
        for j in 0..n {
            left[(i, j)] = qh[(i, j)];
        }
    }
    for (k, old) in (n..m).enumerate() {
        left[(r + k, old)] = ONE;
    }
    let base = r + (m - n);
    for i in r..n {
        for j in 0..n {
            left[(base + i - r, j)] = qh[(i, j)];
        }
    }
    left
}
