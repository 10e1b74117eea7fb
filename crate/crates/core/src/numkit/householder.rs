use std::ops::Range;

use super::{CMat, C64, ONE, ZERO};

/// Hermitian reflector `H = I − τ·v·vᴴ` acting on indices `offset..offset + v.len()`.
#[derive(Debug, Clone)]
pub struct Reflector {
    pub v: Vec<C64>,
    pub tau: f64,
    pub offset: usize,
}

impl Reflector {
    /// Reflector with `H·x = β·e₁`; returns `(H, β)`. A zero `x` gives `H = I`.
    pub fn new(x: &[C64], offset: usize) -> (Self, C64) {
        let nx = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let mut v = x.to_vec();
        if nx == 0.0 || v.is_empty() {
            if let Some(v0) = v.first_mut() {
                *v0 = ONE;
            }
            return (Reflector { v, tau: 0.0, offset }, ZERO);
        }
        let a0 = x[0].norm();
        let phase = if a0 > 0.0 { x[0] / a0 } else { ONE };
        let beta = -phase * nx;
        v[0] = x[0] + phase * nx;
        let tau = 1.0 / (nx * (a0 + nx));
        (Reflector { v, tau, offset }, beta)
    }

    pub fn is_identity(&self) -> bool {
        self.tau == 0.0
    }

    /// `M ← H·M` restricted to columns `cols`.
    pub fn apply_left(&self, m: &mut CMat, cols: Range<usize>) {
        if self.is_identity() {
            return;
        }
        let nr = m.nrows();
        let off = self.offset;
        let data = m.as_mut_slice();
        for j in cols {
            let col = &mut data[j * nr + off..j * nr + off + self.v.len()];
            let mut w = ZERO;
            for (vk, ck) in self.v.iter().zip(col.iter()) {
                w += vk.conj() * ck;
            }
            w *= self.tau;
            if w == ZERO {
                continue;
            }
            for (vk, ck) in self.v.iter().zip(col.iter_mut()) {
                *ck -= vk * w;
            }
        }
    }

    /// `M ← M·H` restricted to rows `rows`.
    pub fn apply_right(&self, m: &mut CMat, rows: Range<usize>) {
        if self.is_identity() {
            return;
        }
        let nr = m.nrows();
        let off = self.offset;
        let data = m.as_mut_slice();
        let mut w = vec![ZERO; rows.len()];
        for (k, vk) in self.v.iter().enumerate() {
            let col = &data[(off + k) * nr..(off + k + 1) * nr];
            for (wi, r) in w.iter_mut().zip(rows.clone()) {
                *wi += col[r] * vk;
            }
        }
        for wi in w.iter_mut() {
            *wi *= self.tau;
        }
        for (k, vk) in self.v.iter().enumerate() {
            let vc = vk.conj();
            let col = &mut data[(off + k) * nr..(off + k + 1) * nr];
            for (wi, r) in w.iter().zip(rows.clone()) {
                col[r] -= wi * vc;
            }
        }
    }
}


/// Unpivoted Householder QR, `M = Q·R` with `Q` square unitary.
pub fn qr(m: &CMat) -> (CMat, CMat) {
    let (rows, cols) = m.shape();
    let mut r = m.clone();
    let mut refl = Vec::new();
    for i in 0..rows.min(cols) {
        let x: Vec<_> = r.view((i, i), (rows - i, 1)).iter().copied().collect();
        let (h, beta) = Reflector::new(&x, i);
        h.apply_left(&mut r, i + 1..cols);
        r[(i, i)] = beta;
        for k in i + 1..rows {
            r[(k, i)] = ZERO;
        }
        refl.push(h);
    }
    let mut q = CMat::identity(rows, rows);
    for h in refl.iter().rev() {
        h.apply_left(&mut q, h.offset..rows);
    }
    (q, r)
}
