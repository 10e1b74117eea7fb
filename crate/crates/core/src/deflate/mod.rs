//! Removal of zero and infinite eigenvalues caused by singular `E` and `A`.
//!
//! The linearization is reduced by unitary equivalences toward an upper
//! triangular Kronecker-like form. The first steps use the block layout
//! (QR factors of `A`, `E` and the second-level matrices `Φ`, `Ψ`); anything
//! beyond falls back to generic staircase steps on the remaining pencil.

mod staircase;
mod structured;

use serde::{Deserialize, Serialize};

pub use staircase::{staircase_step, staircase_step_side, Side, StaircaseStep};

use crate::numkit::{rrqr, rrqr_relative, CMat, PivotedQr, RankStrategy, TruncationLog, ZERO};
use crate::pencil::{linearize, reverse, LinearPencil, QuarticPencil};
use crate::{Error, Result};

/// Numerical ranks of `A` and `E` and the structured factors derived from
/// them.
#[derive(Debug, Clone)]
pub struct RankProfile {
    pub n: usize,
    pub qr_a: PivotedQr,
    pub qr_e: PivotedQr,
    pub r_a: usize,
    pub r_e: usize,
    pub strategy: RankStrategy,
    /// `𝕄Π_𝕄 = Q_𝕄R_𝕄` with `Q_𝕄 = [0 Q_A; I 0]`, `Π_𝕄 = [0 Π_A; I 0]`,
    /// `R_𝕄 = [I CΠ_A; 0 R_A]`.
    pub q_m: CMat,
    pub pi_m: CMat,
    pub r_m: CMat,
    /// `𝕂Π_𝕂 = Q_𝕂R_𝕂` with `Q_𝕂 = diag(I, Q_E)`, `Π_𝕂 = [0 Π_E; I 0]`,
    /// `R_𝕂 = diag(−I, R_E)`.
    pub q_k: CMat,
    pub pi_k: CMat,
    pub r_k: CMat,
}

impl RankProfile {
    pub fn is_regular(&self) -> bool {
        self.r_a == self.n && self.r_e == self.n
    }
}

pub fn analyze_ranks(q: &QuarticPencil, strategy: &RankStrategy) -> Result<RankProfile> {
    let n = q.n;
    let qr_a = rrqr(&q.a, strategy)?;
    let qr_e = rrqr(&q.e, strategy)?;
    let eye = CMat::identity(n, n);
    let pa = qr_a.perm_matrix();
    let pe = qr_e.perm_matrix();

    let mut q_m = CMat::zeros(2 * n, 2 * n);
    q_m.view_mut((0, n), (n, n)).copy_from(&qr_a.q);
    q_m.view_mut((n, 0), (n, n)).copy_from(&eye);
    let mut pi_m = CMat::zeros(2 * n, 2 * n);
    pi_m.view_mut((0, n), (n, n)).copy_from(&pa);
    pi_m.view_mut((n, 0), (n, n)).copy_from(&eye);
    let mut r_m = CMat::zeros(2 * n, 2 * n);
    r_m.view_mut((0, 0), (n, n)).copy_from(&eye);
    r_m.view_mut((0, n), (n, n)).copy_from(&(&q.c * &pa));
    r_m.view_mut((n, n), (n, n)).copy_from(&qr_a.r_truncated());

    let mut q_k = CMat::zeros(2 * n, 2 * n);
    q_k.view_mut((0, 0), (n, n)).copy_from(&eye);
    q_k.view_mut((n, n), (n, n)).copy_from(&qr_e.q);
    let mut pi_k = CMat::zeros(2 * n, 2 * n);
    pi_k.view_mut((0, n), (n, n)).copy_from(&pe);
    pi_k.view_mut((n, 0), (n, n)).copy_from(&eye);
    let mut r_k = CMat::zeros(2 * n, 2 * n);
    r_k.view_mut((0, 0), (n, n)).copy_from(&(-&eye));
    r_k.view_mut((n, n), (n, n)).copy_from(&qr_e.r_truncated());

    Ok(RankProfile {
        n,
        r_a: qr_a.rank,
        r_e: qr_e.rank,
        qr_a,
        qr_e,
        strategy: *strategy,
        q_m,
        pi_m,
        r_m,
        q_k,
        pi_k,
        r_k,
    })
}

/// `Φ = [Q_{A,2}ᴴB; R̂_AΠ_Aᵀ]` and `Ψ = [Q_{E,2}ᴴD; R̂_EΠ_Eᵀ]`. Their null
/// spaces decide whether a second deflation step is needed on either side.
#[derive(Debug, Clone)]
pub struct SecondLevel {
    pub phi: CMat,
    pub psi: CMat,
    pub qr_phi: PivotedQr,
    pub qr_psi: PivotedQr,
    pub r_phi: usize,
    pub r_psi: usize,
}

fn stack(top: &CMat, bottom: &CMat) -> CMat {
    let mut m = CMat::zeros(top.nrows() + bottom.nrows(), top.ncols());
    m.rows_mut(0, top.nrows()).copy_from(top);
    m.rows_mut(top.nrows(), bottom.nrows()).copy_from(bottom);
    m
}

pub fn second_level(q: &QuarticPencil, rp: &RankProfile) -> Result<SecondLevel> {
    if rp.is_regular() {
        return Err(Error::InvalidArgument(
            "second-level ranks are only defined when A or E is singular".into(),
        ));
    }
    let phi = stack(&(rp.qr_a.q_trailing().adjoint() * &q.b), &rp.qr_a.r_hat_unpermuted());
    let psi = stack(&(rp.qr_e.q_trailing().adjoint() * &q.d), &rp.qr_e.r_hat_unpermuted());
    let qr_phi = rrqr(&phi, &rp.strategy)?;
    let qr_psi = rrqr(&psi, &rp.strategy)?;
    Ok(SecondLevel {
        r_phi: qr_phi.rank,
        r_psi: qr_psi.rank,
        phi,
        psi,
        qr_phi,
        qr_psi,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeflationCase {
    /// `A` and `E` nonsingular.
    Regular,
    /// Exactly one of `A`, `E` singular.
    OneSingular,
    /// Both singular, `Φ` and `Ψ` nonsingular.
    BothSingular,
    /// Both singular and `Φ` or `Ψ` singular.
    BothSingularDeep,
}

impl DeflationCase {
    pub fn label(&self) -> &'static str {
        match self {
            DeflationCase::Regular => "i",
            DeflationCase::OneSingular => "ii",
            DeflationCase::BothSingular => "iii",
            DeflationCase::BothSingularDeep => "iv",
        }
    }
}

pub fn classify_case(rp: &RankProfile, sl: Option<&SecondLevel>) -> DeflationCase {
    let n = rp.n;
    match (rp.r_a < n, rp.r_e < n) {
        (false, false) => DeflationCase::Regular,
        (true, true) => match sl {
            Some(s) if s.r_phi == n && s.r_psi == n => DeflationCase::BothSingular,
            _ => DeflationCase::BothSingularDeep,
        },
        _ => DeflationCase::OneSingular,
    }
}

/// The zero side is handled by structured steps, the infinite side only by
/// known-size steps, so the harder side is moved to `E` by reversal when
/// that pays off.
pub fn needs_reversal(rp: &RankProfile, sl: Option<&SecondLevel>) -> bool {
    let n = rp.n;
    match (rp.r_a < n, rp.r_e < n) {
        (true, false) => true,
        (true, true) => sl.is_some_and(|s| s.r_psi == n && s.r_phi < n),
        _ => false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepMethod {
    /// Case with nothing to deflate; only triangularizes `𝔹`.
    Triangularize,
    StructuredE,
    StructuredPsi,
    StructuredA,
    /// Staircase step with a block size known from the rank analysis.
    Forced,
    Generic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub side: Side,
    pub method: StepMethod,
    pub deflated: usize,
    pub size_after: usize,
    /// Discarded mass relative to the pencil norm.
    #[serde(with = "crate::serde_real")]
    pub discarded: f64,
    pub regular: bool,
    pub evidence: Option<TruncationLog>,
    pub compression: Option<TruncationLog>,
}

/// Result of deflating `lin`, the linearization of `working`.
///
/// `P·(𝔸₀ − λ𝔹₀)·Q = [𝔸_f − λ𝔹_f, X(λ); 0, Y(λ)]` with `X = X_a − λX_b`,
/// `Y = Y_a − λY_b` and the leading block being `pencil`.
#[derive(Debug, Clone)]
pub struct DeflationResult {
    pub pencil: LinearPencil,
    pub p: CMat,
    pub q: CMat,
    /// Counts for `working`; see [`DeflationResult::original_counts`].
    pub zeros: usize,
    pub infinities: usize,
    pub steps: Vec<StepRecord>,
    pub case: DeflationCase,
    pub reversed: bool,
    /// `false` when a step found the pencil to be singular.
    pub regular: bool,
    /// Numerical ranks of `𝔸_f` and `𝔹_f`.
    pub final_ranks: (usize, usize),
    pub x_a: CMat,
    pub x_b: CMat,
    pub y_a: CMat,
    pub y_b: CMat,
    /// The problem actually linearized: the input, or its reversal.
    pub working: QuarticPencil,
    pub profile: RankProfile,
    pub second: Option<SecondLevel>,
}

impl DeflationResult {
    /// `(zeros, infinities)` of the problem before any reversal.
    pub fn original_counts(&self) -> (usize, usize) {
        if self.reversed {
            (self.infinities, self.zeros)
        } else {
            (self.zeros, self.infinities)
        }
    }

    pub fn deflated(&self) -> usize {
        self.zeros + self.infinities
    }

    /// No deflation at all; the full linearization goes to the eigensolver.
    pub fn none(q: &QuarticPencil, strategy: &RankStrategy) -> Result<Self> {
        let rp = analyze_ranks(q, strategy)?;
        let lin = linearize(q);
        let m = lin.size;
        let ranks = (m, m);
        Ok(DeflationResult {
            p: CMat::identity(m, m),
            q: CMat::identity(m, m),
            zeros: 0,
            infinities: 0,
            steps: Vec::new(),
            case: classify_case(&rp, None),
            reversed: false,
            regular: true,
            final_ranks: ranks,
            x_a: CMat::zeros(m, 0),
            x_b: CMat::zeros(m, 0),
            y_a: CMat::zeros(0, 0),
            y_b: CMat::zeros(0, 0),
            pencil: lin,
            working: q.clone(),
            profile: rp,
            second: None,
        })
    }
}

struct Engine {
    p: CMat,
    q: CMat,
    cur: LinearPencil,
    steps: Vec<StepRecord>,
    zeros: usize,
    infs: usize,
    regular: bool,
    budget: usize,
}

impl Engine {
    fn commit(&mut self, s: StaircaseStep, side: Side, method: StepMethod) {
        let m = self.cur.size;
        if self.steps.is_empty() {
            // accumulators are still the identity
            self.p = s.left.clone();
            self.q = s.right.clone();
        } else {
            let pr = &s.left * self.p.rows(0, m);
            self.p.rows_mut(0, m).copy_from(&pr);
            let qc = self.q.columns(0, m) * &s.right;
            self.q.columns_mut(0, m).copy_from(&qc);
        }
        match side {
            Side::Zero => self.zeros += s.deflated,
            Side::Infinite => self.infs += s.deflated,
        }
        self.regular &= s.regular;
        self.steps.push(StepRecord {
            side,
            method,
            deflated: s.deflated,
            size_after: s.pencil.size,
            discarded: s.discarded,
            regular: s.regular,
            evidence: s.evidence,
            compression: s.compression,
        });
        self.cur = s.pencil;
    }

    fn active(&self) -> bool {
        self.regular && self.cur.size > 0 && self.steps.len() < self.budget
    }

    /// Staircase steps with rank decisions until nothing more splits off.
    fn generic(&mut self, side: Side, strategy: &RankStrategy) -> Result<()> {
        while self.active() {
            let s = staircase_step_side(&self.cur, None, strategy, side)?;
            if s.deflated == 0 && s.regular {
                break;
            }
            let d = s.deflated;
            self.commit(s, side, StepMethod::Generic);
            if d == 0 {
                break;
            }
        }
        Ok(())
    }

    fn forced(&mut self, side: Side, k: usize, strategy: &RankStrategy) -> Result<()> {
        if k == 0 || !self.active() || k > self.cur.size {
            return Ok(());
        }
        let s = staircase_step_side(&self.cur, Some(k), strategy, side)?;
        self.commit(s, side, StepMethod::Forced);
        Ok(())
    }
}

/// Deflate `lin = linearize(q)` using the rank analysis `rp` (and `sl`
/// unless `A` and `E` are both nonsingular).
pub fn deflate(
    lin: &LinearPencil,
    q: &QuarticPencil,
    rp: &RankProfile,
    sl: Option<&SecondLevel>,
) -> Result<DeflationResult> {
    let n = rp.n;
    let strategy = rp.strategy;
    if lin.size != 4 * n {
        return Err(Error::Dimension(format!(
            "expected a {0}×{0} linearization, got {1}",
            4 * n,
            lin.size
        )));
    }
    if !rp.is_regular() && sl.is_none() {
        return Err(Error::InvalidArgument("second-level ranks are required".into()));
    }
    let case = classify_case(rp, sl);
    let mut eng = Engine {
        p: CMat::identity(4 * n, 4 * n),
        q: CMat::identity(4 * n, 4 * n),
        cur: lin.clone(),
        steps: Vec::new(),
        zeros: 0,
        infs: 0,
        regular: true,
        budget: 4 * n,
    };

    if case == DeflationCase::Regular {
        let mut s = structured::regular_step(lin, rp)?;
        let bb = &mut s.pencil.bb;
        let mut lower = 0.0f64;
        for j in 0..bb.ncols() {
            for i in j + 1..bb.nrows() {
                lower = lower.hypot(bb[(i, j)].norm());
                bb[(i, j)] = ZERO;
            }
        }
        let scale = crate::numkit::fro(&lin.bb);
        s.discarded = if scale > 0.0 { lower / scale } else { 0.0 };
        eng.commit(s, Side::Zero, StepMethod::Triangularize);
    } else {
        let sl = sl.expect("checked above");
        let mut rows_intact = true;

        if rp.r_e < n {
            let (p1, q1) = structured::zero_first(n, &rp.qr_e);
            let s = staircase::apply(n, &lin.aa, &lin.bb, p1, q1, n - rp.r_e, Side::Zero)?;
            eng.commit(s, Side::Zero, StepMethod::StructuredE);
            if sl.r_psi < n {
                let left = structured::zero_second(n, rp.r_e, &sl.qr_psi);
                let mut s = staircase::finish(
                    n,
                    &eng.cur.aa,
                    &eng.cur.bb,
                    left,
                    n - sl.r_psi,
                    &strategy,
                    Side::Zero,
                )?;
                s.evidence = Some(sl.qr_psi.log.clone());
                eng.commit(s, Side::Zero, StepMethod::StructuredPsi);
                let before = eng.steps.len();
                eng.generic(Side::Zero, &strategy)?;
                rows_intact = eng.steps.len() == before;
            }
        }

        if rp.r_a < n && eng.active() {
            let k = n - rp.r_a;
            if rows_intact {
                let left = structured::infinite_first(n, eng.cur.size, &rp.qr_a);
                let mut s = staircase::finish(n, &eng.cur.aa, &eng.cur.bb, left, k, &strategy, Side::Infinite)?;
                s.evidence = Some(rp.qr_a.log.clone());
                eng.commit(s, Side::Infinite, StepMethod::StructuredA);
            } else {
                eng.forced(Side::Infinite, k, &strategy)?;
            }
            if sl.r_phi < n {
                eng.forced(Side::Infinite, n - sl.r_phi, &strategy)?;
                eng.generic(Side::Infinite, &strategy)?;
            }
        }
    }

    let m = eng.cur.size;
    let t = 4 * n - m;
    // only the trailing columns of P·𝔸₀·Q and P·𝔹₀·Q are needed
    let q_tail = eng.q.columns(m, t).into_owned();
    let ta = &eng.p * (&lin.aa * &q_tail);
    let tb = &eng.p * (&lin.bb * &q_tail);
    let final_ranks = if m == 0 {
        (0, 0)
    } else if t == 0 {
        // rank 𝔸 = 3n + rank E and rank 𝔹 = 3n + rank A by the block layout
        (3 * n + rp.r_e, 3 * n + rp.r_a)
    } else {
        let scale = staircase::pencil_norm(&eng.cur.aa, &eng.cur.bb);
        (
            rrqr_relative(&eng.cur.aa, &strategy, scale)?.rank,
            rrqr_relative(&eng.cur.bb, &strategy, scale)?.rank,
        )
    };
    Ok(DeflationResult {
        x_a: ta.rows(0, m).into_owned(),
        x_b: tb.rows(0, m).into_owned(),
        y_a: ta.rows(m, t).into_owned(),
        y_b: tb.rows(m, t).into_owned(),
        pencil: eng.cur,
        p: eng.p,
        q: eng.q,
        zeros: eng.zeros,
        infinities: eng.infs,
        steps: eng.steps,
        case,
        reversed: false,
        regular: eng.regular,
        final_ranks,
        working: q.clone(),
        profile: rp.clone(),
        second: sl.cloned(),
    })
}

/// Rank analysis, optional reversal, linearization and deflation.
pub fn deflate_auto(q: &QuarticPencil, strategy: &RankStrategy) -> Result<DeflationResult> {
    let rp = analyze_ranks(q, strategy)?;
    if rp.is_regular() {
        return deflate(&linearize(q), q, &rp, None);
    }
    let sl = second_level(q, &rp)?;
    if needs_reversal(&rp, Some(&sl)) {
        let qw = reverse(q);
        let rpw = analyze_ranks(&qw, strategy)?;
        let slw = second_level(&qw, &rpw)?;
        let mut res = deflate(&linearize(&qw), &qw, &rpw, Some(&slw))?;
        res.reversed = true;
        return Ok(res);
    }
    deflate(&linearize(q), q, &rp, Some(&sl))
}

