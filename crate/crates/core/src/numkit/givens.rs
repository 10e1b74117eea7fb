use super::{CMat, C64, ZERO};

/// Plane rotation `G = [c s; −s̄ c]` with real `c`.
#[derive(Debug, Clone, Copy)]
pub struct Givens {
    pub c: f64,
    pub s: C64,
}

impl Givens {
    /// Rotation with `G·[f; g] = [r; 0]`. Returns `(G, r)`.
    pub fn new(f: C64, g: C64) -> (Self, C64) {
        if g == ZERO {
            return (Givens { c: 1.0, s: ZERO }, f);
        }
        if f == ZERO {
            let ag = g.norm();
            return (
                Givens {
                    c: 0.0,
                    s: g.conj() / ag,
                },
                C64::new(ag, 0.0),
            );
        }
        let af = f.norm();
        let nrm = af.hypot(g.norm());
        let phase = f / af;
        let c = af / nrm;
        let s = phase * g.conj() / nrm;
        (Givens { c, s }, phase * nrm)
    }

    pub fn identity() -> Self {
        Givens { c: 1.0, s: ZERO }
    }

    /// Rows `i, j` ← `G·[row i; row j]` over columns `cols`.
    pub fn rows(&self, m: &mut CMat, i: usize, j: usize, cols: std::ops::Range<usize>) {
        let nr = m.nrows();
        let data = m.as_mut_slice();
        for k in cols {
            let base = k * nr;
            let (x, y) = rot(data[base + i], data[base + j], self.c, self.s);
            data[base + i] = x;
            data[base + j] = y;
        }
    }

    /// Columns `i, j` ← `rot(col i, col j)` over rows `rows`.
    pub fn cols(&self, m: &mut CMat, i: usize, j: usize, rows: std::ops::Range<usize>) {
        let nr = m.nrows();
        let data = m.as_mut_slice();
        let (bi, bj) = (i * nr, j * nr);
        for r in rows {
            let (x, y) = rot(data[bi + r], data[bj + r], self.c, self.s);
            data[bi + r] = x;
            data[bj + r] = y;
        }
    }

    /// Accumulate `M ← M·Gᴴ` on columns `i, j` (used for the left factor).
    pub fn accumulate_adjoint(&self, m: &mut CMat, i: usize, j: usize) {
        let g = Givens {
            c: self.c,
            s: self.s.conj(),
        };
        g.cols(m, i, j, 0..m.nrows());
    }

    pub fn as_matrix(&self) -> CMat {
        CMat::from_row_slice(
            2,
            2,
            &[
                C64::new(self.c, 0.0),
                self.s,
                -self.s.conj(),
                C64::new(self.c, 0.0),
            ],
        )
    }
}

/// `(x, y) ↦ (c·x + s·y, c·y − s̄·x)`.
#[inline]
pub fn rot(x: C64, y: C64, c: f64, s: C64) -> (C64, C64) {
    (x * c + s * y, y * c - s.conj() * x)
}
