//! Quartic, quadratic and linear pencils, and homogeneous eigenvalues.

use serde::{Deserialize, Serialize};

use crate::numkit::{ensure_finite, CMat, C64, EPS, ONE, ZERO};
use crate::scaling::ScalingRecord;
use crate::{Error, Result};

/// `λ⁴A + λ³B + λ²C + λD + E`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuarticPencil {
    pub n: usize,
    pub a: CMat,
    pub b: CMat,
    pub c: CMat,
    pub d: CMat,
    pub e: CMat,
    pub provenance: Provenance,
}

/// Transformations already applied to the coefficients.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Provenance {
    pub balancing: Option<ScalingRecord>,
    pub scaling: Option<ScalingRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coef {
    A,
    B,
    C,
    D,
    E,
}

impl QuarticPencil {
    pub fn new(a: CMat, b: CMat, c: CMat, d: CMat, e: CMat) -> Result<Self> {
        let n = a.nrows();
        for (name, m) in [("A", &a), ("B", &b), ("C", &c), ("D", &d), ("E", &e)] {
            if m.shape() != (n, n) {
                return Err(Error::Dimension(format!(
                    "coefficient {name} is {}x{}, expected {n}x{n}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            ensure_finite(m)?;
        }
        Ok(QuarticPencil {
            n,
            a,
            b,
            c,
            d,
            e,
            provenance: Provenance::default(),
        })
    }

    /// Coefficients from the leading one down: `[A, B, C, D, E]`.
    pub fn coeffs(&self) -> [&CMat; 5] {
        [&self.a, &self.b, &self.c, &self.d, &self.e]
    }

    pub fn coeff(&self, k: Coef) -> &CMat {
        match k {
            Coef::A => &self.a,
            Coef::B => &self.b,
            Coef::C => &self.c,
            Coef::D => &self.d,
            Coef::E => &self.e,
        }
    }

    /// `P(λ)`.
    pub fn eval(&self, lambda: C64) -> CMat {
        // Horner
        let mut p = self.a.clone();
        for m in [&self.b, &self.c, &self.d, &self.e] {
            p = p * lambda + m;
        }
        p
    }

    /// `α⁴A + α³βB + α²β²C + αβ³D + β⁴E`.
    pub fn eval_homogeneous(&self, alpha: C64, beta: f64) -> CMat {
        let w = homogeneous_weights(alpha, beta);
        let mut p = &self.a * w[0];
        for (m, wk) in [&self.b, &self.c, &self.d, &self.e].into_iter().zip(&w[1..]) {
            if *wk != ZERO {
                p += m * *wk;
            }
        }
        p
    }
}

/// `[α⁴, α³β, α²β², αβ³, β⁴]`.
pub fn homogeneous_weights(alpha: C64, beta: f64) -> [C64; 5] {
    let mut w = [ONE; 5];
    for k in 0..5 {
        let mut v = ONE;
        for _ in 0..4 - k {
            v *= alpha;
        }
        for _ in 0..k {
            v *= beta;
        }
        w[k] = v;
    }
    w
}

/// Second companion form of grade 2.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadPencil {
    /// `[[A, 0], [C, I]]`
    pub m: CMat,
    /// `[[B, 0], [D, 0]]`
    pub cc: CMat,
    /// `[[0, −I], [E, 0]]`
    pub k: CMat,
}

pub fn quadratify(q: &QuarticPencil) -> QuadPencil {
    let n = q.n;
    let mut m = CMat::zeros(2 * n, 2 * n);
    let mut cc = CMat::zeros(2 * n, 2 * n);
    let mut k = CMat::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(&q.a);
    m.view_mut((n, 0), (n, n)).copy_from(&q.c);
    cc.view_mut((0, 0), (n, n)).copy_from(&q.b);
    cc.view_mut((n, 0), (n, n)).copy_from(&q.d);
    k.view_mut((n, 0), (n, n)).copy_from(&q.e);
    for i in 0..n {
        m[(n + i, n + i)] = ONE;
        k[(i, n + i)] = -ONE;
    }
    QuadPencil { m, cc, k }
}

/// What occupies one `n×n` block of a linearization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Block {
    Coef { which: Coef, sign: i8 },
    Identity { sign: i8 },
    Zero,
}

/// Layout of a pencil in terms of the quartic coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockMap {
    /// The 4×4 block grid of the untransformed linearization.
    Grid {
        n: usize,
        aa: [[Block; 4]; 4],
        bb: [[Block; 4]; 4],
    },
    /// Leading block of `P·(𝔸 − λ𝔹)·Q` after deflation; the structure is not
    /// preserved beyond the transformations recorded in the deflation result.
    Deflated { n: usize, from: usize, size: usize },
}

impl BlockMap {
    /// Size of the underlying quartic.
    pub fn n(&self) -> usize {
        match *self {
            BlockMap::Grid { n, .. } | BlockMap::Deflated { n, .. } => n,
        }
    }
}

/// `𝔸 − λ𝔹`, eigenproblem `𝔸z = λ𝔹z`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearPencil {
    pub aa: CMat,
    pub bb: CMat,
    pub block_map: BlockMap,
    pub size: usize,
}

impl LinearPencil {
    pub fn new(aa: CMat, bb: CMat, block_map: BlockMap) -> Result<Self> {
        let size = aa.nrows();
        if aa.ncols() != size || bb.shape() != (size, size) {
            return Err(Error::Dimension(format!(
                "pencil matrices must be square and equal, got {:?} and {:?}",
                aa.shape(),
                bb.shape()
            )));
        }
        Ok(LinearPencil {
            aa,
            bb,
            block_map,
            size,
        })
    }
}

pub fn linearization_map(n: usize) -> BlockMap {
    use Block::*;
    let co = |which, sign| Coef { which, sign };
    let id = |sign| Identity { sign };
    BlockMap::Grid {
        n,
        aa: [
            [co(self::Coef::B, 1), Zero, id(-1), Zero],
            [co(self::Coef::D, 1), Zero, Zero, id(-1)],
            [Zero, id(-1), Zero, Zero],
            [co(self::Coef::E, 1), Zero, Zero, Zero],
        ],
        bb: [
            [co(self::Coef::A, -1), Zero, Zero, Zero],
            [co(self::Coef::C, -1), id(-1), Zero, Zero],
            [Zero, Zero, id(-1), Zero],
            [Zero, Zero, Zero, id(-1)],
        ],
    }
}

fn fill(dst: &mut CMat, map: &[[Block; 4]; 4], n: usize, q: &QuarticPencil) {
    for (bi, row) in map.iter().enumerate() {
        for (bj, blk) in row.iter().enumerate() {
            let mut view = dst.view_mut((bi * n, bj * n), (n, n));
            match *blk {
                Block::Zero => {}
                Block::Identity { sign } => {
                    for i in 0..n {
                        view[(i, i)] = C64::new(sign as f64, 0.0);
                    }
                }
                Block::Coef { which, sign } => {
                    let src = q.coeff(which);
                    if sign > 0 {
                        view.copy_from(src);
                    } else {
                        view.copy_from(&(-src));
                    }
                }
            }
        }
    }
}

/// The 4n×4n pencil
/// `𝔸 = [[B,0,−I,0],[D,0,0,−I],[0,−I,0,0],[E,0,0,0]]`,
/// `𝔹 = [[−A,0,0,0],[−C,−I,0,0],[0,0,−I,0],[0,0,0,−I]]`.
pub fn linearize(q: &QuarticPencil) -> LinearPencil {
    let n = q.n;
    let map = linearization_map(n);
    let mut aa = CMat::zeros(4 * n, 4 * n);
    let mut bb = CMat::zeros(4 * n, 4 * n);
    if let BlockMap::Grid { aa: ma, bb: mb, .. } = &map {
        fill(&mut aa, ma, n, q);
        fill(&mut bb, mb, n, q);
    }
    LinearPencil {
        aa,
        bb,
        block_map: map,
        size: 4 * n,
    }
}

/// `μ⁴E + μ³D + μ²C + μB + A`, eigenvalues `μ = 1/λ`.
pub fn reverse(q: &QuarticPencil) -> QuarticPencil {
    QuarticPencil {
        n: q.n,
        a: q.e.clone(),
        b: q.d.clone(),
        c: q.c.clone(),
        d: q.b.clone(),
        e: q.a.clone(),
        provenance: q.provenance.clone(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigClass {
    Zero,
    Finite,
    Infinite,
}

/// Eigenvalue `λ = α/β` with `β ≥ 0` real and `|α|² + β² = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomogeneousEig {
    pub alpha: C64,
    pub beta: f64,
    pub class: EigClass,
}

impl HomogeneousEig {
    /// Normalizes `(α, β)` and classifies with threshold `dim·ε`, where `dim`
    /// is the size of the pencil the pair came from.
    pub fn new(alpha: C64, beta: C64, dim: usize) -> Self {
        let (alpha, beta) = normalize_pair(alpha, beta);
        let tol = dim.max(1) as f64 * EPS;
        let class = if beta <= tol {
            EigClass::Infinite
        } else if alpha.norm() <= tol && beta > 0.5 {
            EigClass::Zero
        } else {
            EigClass::Finite
        };
        HomogeneousEig { alpha, beta, class }
    }

    pub fn zero() -> Self {
        HomogeneousEig {
            alpha: ZERO,
            beta: 1.0,
            class: EigClass::Zero,
        }
    }

    pub fn infinite() -> Self {
        HomogeneousEig {
            alpha: ONE,
            beta: 0.0,
            class: EigClass::Infinite,
        }
    }

    pub fn finite(lambda: C64) -> Self {
        let (alpha, beta) = normalize_pair(lambda, ONE);
        HomogeneousEig {
            alpha,
            beta,
            class: EigClass::Finite,
        }
    }

    /// `α/β`, or `None` for the infinite class.
    pub fn lambda(&self) -> Option<C64> {
        match self.class {
            EigClass::Infinite => None,
            _ => Some(self.alpha / self.beta),
        }
    }

    /// `|λ|`, infinite for the infinite class.
    pub fn modulus(&self) -> f64 {
        match self.class {
            EigClass::Infinite => f64::INFINITY,
            _ => self.alpha.norm() / self.beta,
        }
    }

    /// `1/λ` as a homogeneous pair: swaps `α` and `β` and the zero and
    /// infinite classes.
    pub fn reciprocal(&self) -> Self {
        let class = match self.class {
            EigClass::Zero => EigClass::Infinite,
            EigClass::Infinite => EigClass::Zero,
            EigClass::Finite => EigClass::Finite,
        };
        let (alpha, beta) = normalize_pair(C64::new(self.beta, 0.0), self.alpha);
        HomogeneousEig { alpha, beta, class }
    }
}

fn normalize_pair(alpha: C64, beta: C64) -> (C64, f64) {
    let bn = beta.norm();
    let (alpha, beta) = if bn > 0.0 {
        (alpha * (beta.conj() / bn), bn)
    } else {
        (alpha, 0.0)
    };
    let s = alpha.norm().hypot(beta);
    if s == 0.0 {
        return (ZERO, 0.0);
    }
    (alpha / s, beta / s)
}
