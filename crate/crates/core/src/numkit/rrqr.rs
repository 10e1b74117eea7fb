use serde::{Deserialize, Serialize};

use super::{ensure_finite, fro, CMat, Reflector, EPS, ZERO};
use crate::{Error, Result};

/// How the numerical rank is read off the diagonal of a pivoted `R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RankStrategy {
    /// Keep `|r_kk| > τ·‖M‖_F`; `None` means `τ = dim·ε` with `dim` the
    /// larger dimension of the factored matrix.
    NormThreshold { tau: Option<f64> },
    /// Truncate at the first `i` with `|r_{i+1}| ≤ ρ·|r_i|`.
    Dropoff { rho: f64 },
}

impl Default for RankStrategy {
    fn default() -> Self {
        RankStrategy::NormThreshold { tau: None }
    }
}

impl RankStrategy {
    pub fn dropoff() -> Self {
        RankStrategy::Dropoff { rho: EPS.sqrt() }
    }

    pub fn validate(&self) -> Result<()> {
        let v = match *self {
            RankStrategy::NormThreshold { tau: None } => return Ok(()),
            RankStrategy::NormThreshold { tau: Some(t) } => t,
            RankStrategy::Dropoff { rho } => rho,
        };
        if v > 0.0 && v < 1.0 {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "rank tolerance must lie in (0, 1), got {v}"
            )))
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RankStrategy::NormThreshold { .. } => "norm",
            RankStrategy::Dropoff { .. } => "dropoff",
        }
    }
}

/// Evidence behind a rank decision.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TruncationLog {
    /// `|r_ii|` for the whole factorization.
    pub diag: Vec<f64>,
    pub norm_fro: f64,
    /// Magnitudes at or below this value were treated as zero.
    pub threshold: f64,
    /// `|r_{k+1}| / |r_k|` at the cut, when there is one.
    #[serde(with = "crate::serde_real::opt")]
    pub gap_ratio: Option<f64>,
    pub strategy: String,
    /// Rank was imposed by the caller rather than decided.
    pub forced: bool,
}

/// Column-pivoted QR, `M·Π = Q·R`, with a rank decision.
#[derive(Debug, Clone)]
pub struct PivotedQr {
    /// Unitary, `rows × rows`.
    pub q: CMat,
    /// Untruncated upper trapezoidal factor, `rows × cols`.
    pub r: CMat,
    /// `(MΠ)[:, j] = M[:, perm[j]]`.
    pub perm: Vec<usize>,
    pub rank: usize,
    pub log: TruncationLog,
}

impl PivotedQr {
    /// Leading `rank` rows of `R`.
    pub fn r_hat(&self) -> CMat {
        self.r.rows(0, self.rank).into_owned()
    }

    /// `R̂·Πᵀ`, the rows of `QᴴM` that survive truncation, in original column order.
    pub fn r_hat_unpermuted(&self) -> CMat {
        let rh = self.r_hat();
        let mut out = CMat::zeros(rh.nrows(), rh.ncols());
        for (j, &pj) in self.perm.iter().enumerate() {
            out.set_column(pj, &rh.column(j));
        }
        out
    }

    /// `R` with the rows below `rank` set to zero.
    pub fn r_truncated(&self) -> CMat {
        let mut r = self.r.clone();
        let m = r.nrows();
        r.rows_mut(self.rank, m - self.rank).fill(ZERO);
        r
    }

    /// Columns `rank..` of `Q`.
    pub fn q_trailing(&self) -> CMat {
        let m = self.q.ncols();
        self.q.columns(self.rank, m - self.rank).into_owned()
    }

    pub fn perm_matrix(&self) -> CMat {
        super::perm_matrix(&self.perm)
    }
}

/// Pivoted QR with the rank read off by `strategy`.
pub fn rrqr(m: &CMat, strategy: &RankStrategy) -> Result<PivotedQr> {
    rrqr_relative(m, strategy, 0.0)
}

/// Like [`rrqr`], but thresholds are relative to `max(‖M‖_F, reference)`.
///
/// A block cut out of a larger pencil can be pure roundoff; judged against
/// its own norm it would look full rank.
pub fn rrqr_relative(m: &CMat, strategy: &RankStrategy, reference: f64) -> Result<PivotedQr> {
    strategy.validate()?;
    let mut f = factor(m)?;
    let scale = f.log.norm_fro.max(reference);
    let (rank, threshold, gap) = decide(&f.log.diag, scale, m.nrows().max(m.ncols()), strategy);
    f.rank = rank;
    f.log.threshold = threshold;
    f.log.gap_ratio = gap;
    f.log.strategy = strategy.name().to_string();
    Ok(f)
}

/// Pivoted QR with a rank fixed by the caller.
pub fn rrqr_forced(m: &CMat, rank: usize) -> Result<PivotedQr> {
    let mut f = factor(m)?;
    if rank > f.log.diag.len() {
        return Err(Error::InvalidArgument(format!(
            "forced rank {rank} exceeds min dimension {}",
            f.log.diag.len()
        )));
    }
    f.rank = rank;
    f.log.forced = true;
    f.log.strategy = "forced".into();
    f.log.gap_ratio = if rank > 0 && rank < f.log.diag.len() && f.log.diag[rank - 1] > 0.0 {
        Some(f.log.diag[rank] / f.log.diag[rank - 1])
    } else {
        None
    };
    Ok(f)
}

fn decide(diag: &[f64], normf: f64, dim: usize, strategy: &RankStrategy) -> (usize, f64, Option<f64>) {
    if diag.is_empty() || diag[0] == 0.0 {
        return (0, 0.0, None);
    }
    let floor = dim as f64 * EPS * normf;
    let gap_at = |k: usize| {
        if k > 0 && k < diag.len() && diag[k - 1] > 0.0 {
            Some(diag[k] / diag[k - 1])
        } else {
            None
        }
    };
    match *strategy {
        RankStrategy::NormThreshold { tau } => {
            let thr = tau.unwrap_or(dim as f64 * EPS) * normf;
            let k = diag.iter().take_while(|&&d| d > thr).count();
            (k, thr, gap_at(k))
        }
        RankStrategy::Dropoff { rho } => {
            if diag[0] <= floor {
                return (0, floor, None);
            }
            let mut k = diag.len();
            for i in 0..diag.len() - 1 {
                if diag[i + 1] <= rho * diag[i] || diag[i + 1] <= floor {
                    k = i + 1;
                    break;
                }
            }
            (k, floor.max(if k < diag.len() { rho * diag[k - 1] } else { 0.0 }), gap_at(k))
        }
    }
}

/// Businger–Golub pivoting with LAPACK-style norm downdating.
fn factor(m: &CMat) -> Result<PivotedQr> {
    ensure_finite(m)?;
    let (rows, cols) = m.shape();
    let kmax = rows.min(cols);
    let mut a = m.clone();
    let mut perm: Vec<usize> = (0..cols).collect();
    let mut vn1: Vec<f64> = (0..cols).map(|j| a.column(j).norm()).collect();
    let mut vn2 = vn1.clone();
    let tol3z = EPS.sqrt();
    let mut refl = Vec::with_capacity(kmax);

    for i in 0..kmax {
        let mut p = i;
        for j in i + 1..cols {
            if vn1[j] > vn1[p] {
                p = j;
            }
        }
        if p != i {
            a.swap_columns(i, p);
            perm.swap(i, p);
            vn1.swap(i, p);
            vn2.swap(i, p);
        }
        let x: Vec<_> = a.view((i, i), (rows - i, 1)).iter().copied().collect();
        let (h, beta) = Reflector::new(&x, i);
        h.apply_left(&mut a, i + 1..cols);
        a[(i, i)] = beta;
        for k in i + 1..rows {
            a[(k, i)] = ZERO;
        }
        refl.push(h);

        for j in i + 1..cols {
            if vn1[j] == 0.0 {
                continue;
            }
            let t = a[(i, j)].norm() / vn1[j];
            let temp = (1.0 - t * t).max(0.0);
            let r = vn1[j] / vn2[j];
            if temp * r * r <= tol3z {
                let nrm = a.view((i + 1, j), (rows - i - 1, 1)).norm();
                vn1[j] = nrm;
                vn2[j] = nrm;
            } else {
                vn1[j] *= temp.sqrt();
            }
        }
    }

    let mut q = CMat::identity(rows, rows);
    for h in refl.iter().rev() {
        h.apply_left(&mut q, h.offset..rows);
    }
    let diag = (0..kmax).map(|i| a[(i, i)].norm()).collect();
    Ok(PivotedQr {
        q,
        r: a,
        perm,
        rank: 0,
        log: TruncationLog {
            diag,
            norm_fro: fro(m),
            ..Default::default()
        },
    })
}
