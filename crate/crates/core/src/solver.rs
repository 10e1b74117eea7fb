//! End-to-end pipeline: balance, scale, deflate, solve the linear pencil,
//! recover quartic eigenvectors, undo the scalings and attach diagnostics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::deflate::{deflate_auto, DeflationCase, DeflationResult, StepRecord};
use crate::diagnostics::{summarize, NormCache, PairDiagnostics, SummaryReport};
use crate::eigvec::{
    lift_left, lift_right, nullspace_vectors, recover_left, recover_right, recover_right_infinite,
    recover_right_ls, recover_right_zero, NullClass, RecoveryContext, RecoveryMethod,
};
use crate::gevp::{solve_gevp, BACKEND_ID};
use crate::numkit::{CMat, CVec, RankStrategy, C64, EPS};
use crate::pencil::{EigClass, HomogeneousEig, QuarticPencil};
use crate::scaling::{balance, descale, param_scale, ScalingRecord};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigvecMode {
    #[default]
    MinResidual,
    LeastSquares,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub scale: bool,
    pub balance: bool,
    pub balance_iters: usize,
    pub rank_strategy: RankStrategy,
    pub deflate: bool,
    pub eigvec_mode: EigvecMode,
    pub want_left: bool,
    /// Worker threads for per-eigenvalue work; `None` uses the global pool.
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            scale: true,
            balance: true,
            balance_iters: 5,
            rank_strategy: RankStrategy::default(),
            deflate: true,
            eigvec_mode: EigvecMode::MinResidual,
            want_left: true,
            threads: None,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        self.rank_strategy.validate()?;
        if self.threads == Some(0) {
            return Err(Error::InvalidArgument("thread count must be positive".into()));
        }
        Ok(())
    }

    /// Rank tolerance as reported: `τ` or `ρ`, with `None` meaning the
    /// dimension-dependent default.
    pub fn tol(&self) -> Option<f64> {
        match self.rank_strategy {
            RankStrategy::NormThreshold { tau } => tau,
            RankStrategy::Dropoff { rho } => Some(rho),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairSource {
    /// Removed by deflation before the eigensolver.
    Deflated,
    Backend,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairFlag {
    /// Right vector fell back to a default because recovery failed.
    RecoveryFallback,
    /// Zero eigenvalue whose linearization vector does not match the
    /// expected block form.
    InconsistentBlocks,
    /// More deflated eigenvalues than null vectors; a basis vector is reused
    /// for a Jordan chain.
    SharedNullVector,
    LeftUnavailable,
}

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub eig: HomogeneousEig,
    /// Unit-norm, `P(λ)x ≈ 0`.
    pub right: CVec,
    /// Unit-norm, `y*P(λ) ≈ 0`.
    pub left: Option<CVec>,
    pub source: PairSource,
    pub method: RecoveryMethod,
    pub left_method: Option<RecoveryMethod>,
    pub flags: Vec<PairFlag>,
    pub diagnostics: Option<PairDiagnostics>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeflationSummary {
    pub enabled: bool,
    pub zeros: usize,
    pub infinities: usize,
    pub case: DeflationCase,
    pub reversed: bool,
    pub regular: bool,
    pub rank_a: usize,
    pub rank_e: usize,
    pub steps: Vec<StepRecord>,
    /// Size of the pencil handed to the eigensolver.
    pub pencil_size: usize,
}

#[derive(Debug, Clone)]
pub struct EigenSolution {
    pub n: usize,
    pub pairs: Vec<EigenPair>,
    pub deflation: DeflationSummary,
    pub balancing: ScalingRecord,
    pub scaling: ScalingRecord,
    pub norms: NormCache,
    pub summary: Option<SummaryReport>,
    pub backend: &'static str,
    pub config: SolveConfig,
    pub warnings: Vec<String>,
}

impl EigenSolution {
    /// A bare solution holding only pairs, for building inputs by hand.
    pub fn from_pairs(pairs: Vec<EigenPair>) -> Self {
        let n = pairs.first().map_or(0, |p| p.right.len());
        EigenSolution {
            n,
            pairs,
            deflation: DeflationSummary {
                enabled: false,
                zeros: 0,
                infinities: 0,
                case: DeflationCase::Regular,
                reversed: false,
                regular: true,
                rank_a: n,
                rank_e: n,
                steps: Vec::new(),
                pencil_size: 4 * n,
            },
            balancing: ScalingRecord::identity(),
            scaling: ScalingRecord::identity(),
            norms: NormCache {
                norms: [0.0; 5],
                method: crate::numkit::NormMethod::Svd,
            },
            summary: None,
            backend: BACKEND_ID,
            config: SolveConfig::default(),
            warnings: Vec::new(),
        }
    }
}

fn run_in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Solve `(λ⁴A + λ³B + λ²C + λD + E)x = 0`. Results are identical for a
/// given input and configuration regardless of the thread count.
pub fn solve(q: &QuarticPencil, cfg: &SolveConfig) -> Result<EigenSolution> {
    cfg.validate()?;
    let cfg = cfg.clone();
    run_in_pool(cfg.threads, || pipeline(q, &cfg))?
}

fn pipeline(q: &QuarticPencil, cfg: &SolveConfig) -> Result<EigenSolution> {
    let n = q.n;
    let (qb, bal) = if cfg.balance {
        balance(q, cfg.balance_iters)
    } else {
        (q.clone(), ScalingRecord::identity())
    };
    let (qs, sc) = if cfg.scale {
        param_scale(&qb)
    } else {
        (qb, ScalingRecord::identity())
    };
    let d = if cfg.deflate {
        deflate_auto(&qs, &cfg.rank_strategy)?
    } else {
        DeflationResult::none(&qs, &cfg.rank_strategy)?
    };
    let mut warnings = Vec::new();
    if !d.regular {
        warnings.push("deflation detected a singular pencil; results are unreliable".to_string());
    }
    if !cfg.deflate {
        warnings.push("deflation disabled; zero and infinite eigenvalues are classified by backend thresholds only".to_string());
    }

    let qw = &d.working;
    let gevp = solve_gevp(&d.pencil, cfg.want_left)?;
    let ls = cfg.eigvec_mode == EigvecMode::LeastSquares;
    let ctx = RecoveryContext::new(qw, d.profile.r_e == n, ls)?;

    let backend: Vec<Result<EigenPair>> = (0..gevp.eigs.len())
        .into_par_iter()
        .map(|j| {
            let left = if cfg.want_left { Some(&gevp.left_vecs[j]) } else { None };
            backend_pair(gevp.eigs[j], &gevp.right_vecs[j], left, &d, &ctx, ls)
        })
        .collect();
    let mut pairs = backend.into_iter().collect::<Result<Vec<_>>>()?;
    pairs.extend(deflated_pairs(&d, cfg.want_left, NullClass::Zero, d.zeros));
    pairs.extend(deflated_pairs(&d, cfg.want_left, NullClass::Infinite, d.infinities));
    if d.reversed {
        for p in pairs.iter_mut() {
            p.eig = p.eig.reciprocal();
        }
    }
    if pairs.len() != 4 * n {
        return Err(Error::Deflation(format!("expected {} eigenpairs, produced {}", 4 * n, pairs.len())));
    }

    let mut sol = EigenSolution::from_pairs(pairs);
    sol = descale(descale(sol, &sc), &bal);

    let norms = NormCache::new(q);
    let diags: Vec<Result<PairDiagnostics>> = sol
        .pairs
        .par_iter()
        .map(|p| PairDiagnostics::compute(&p.eig, &p.right, p.left.as_ref(), q, &norms))
        .collect();
    for (p, dg) in sol.pairs.iter_mut().zip(diags) {
        p.diagnostics = Some(dg?);
    }
    let all: Vec<PairDiagnostics> = sol.pairs.iter().filter_map(|p| p.diagnostics).collect();
    let summary = if all.is_empty() { None } else { Some(summarize(&all)?) };

    let (zeros, infinities) = d.original_counts();
    let (rank_a, rank_e) = if d.reversed {
        (d.profile.r_e, d.profile.r_a)
    } else {
        (d.profile.r_a, d.profile.r_e)
    };
    sol.n = n;
    sol.deflation = DeflationSummary {
        enabled: cfg.deflate,
        zeros,
        infinities,
        case: d.case,
        reversed: d.reversed,
        regular: d.regular,
        rank_a,
        rank_e,
        steps: d.steps.clone(),
        pencil_size: d.pencil.size,
    };
    sol.balancing = bal;
    sol.scaling = sc;
    sol.norms = norms;
    sol.summary = summary;
    sol.config = cfg.clone();
    sol.warnings = warnings;
    Ok(sol)
}

fn backend_pair(
    eig: HomogeneousEig,
    v: &CVec,
    w: Option<&CVec>,
    d: &DeflationResult,
    ctx: &RecoveryContext,
    ls: bool,
) -> Result<EigenPair> {
    let qw = &d.working;
    let z = lift_right(v, d)?;
    let mut flags = Vec::new();
    let (right, method) = match eig.class {
        EigClass::Finite => {
            if ls {
                (recover_right_ls(&z, &eig, ctx, qw)?, RecoveryMethod::LeastSquares)
            } else {
                let r = recover_right(&z, &eig, ctx, qw)?;
                if r.flagged {
                    flags.push(PairFlag::RecoveryFallback);
                }
                (r.x, r.method)
            }
        }
        EigClass::Zero => {
            let r = recover_right_zero(&z, qw)?;
            if r.degenerate {
                flags.push(PairFlag::RecoveryFallback);
            }
            let tol = 1e3 * z.len() as f64 * EPS;
            if r.consistency > tol.sqrt() {
                flags.push(PairFlag::InconsistentBlocks);
            }
            if ls {
                (recover_right_ls(&z, &eig, ctx, qw)?, RecoveryMethod::LeastSquares)
            } else {
                (r.x, RecoveryMethod::Block1)
            }
        }
        EigClass::Infinite => {
            let (x, bad) = recover_right_infinite(&z, qw)?;
            if bad {
                flags.push(PairFlag::RecoveryFallback);
            }
            (x, RecoveryMethod::Block1)
        }
    };
    let (left, left_method) = match w {
        None => (None, None),
        Some(wt) => match lift_left(wt, &eig, d).and_then(|wf| recover_left(&wf, &eig, qw, &ctx.norms)) {
            Ok(r) => {
                if r.flagged {
                    flags.push(PairFlag::RecoveryFallback);
                }
                (Some(r.x), Some(r.method))
            }
            Err(_) => {
                flags.push(PairFlag::LeftUnavailable);
                (None, None)
            }
        },
    };
    Ok(EigenPair {
        eig,
        right,
        left,
        source: PairSource::Backend,
        method,
        left_method,
        flags,
        diagnostics: None,
    })
}

fn deflated_pairs(d: &DeflationResult, want_left: bool, which: NullClass, count: usize) -> Vec<EigenPair> {
    if count == 0 {
        return Vec::new();
    }
    let n = d.profile.n;
    let basis = nullspace_vectors(&d.profile, which);
    let eig = match which {
        NullClass::Zero => HomogeneousEig::zero(),
        NullClass::Infinite => HomogeneousEig::infinite(),
    };
    let pick = |m: &CMat, j: usize| -> Option<CVec> {
        if m.ncols() == 0 {
            None
        } else {
            Some(m.column(j % m.ncols()).into_owned())
        }
    };
    (0..count)
        .map(|j| {
            let mut flags = Vec::new();
            if j >= basis.right.ncols() {
                flags.push(PairFlag::SharedNullVector);
            }
            let right = pick(&basis.right, j).unwrap_or_else(|| {
                flags.push(PairFlag::RecoveryFallback);
                let mut e = CVec::zeros(n);
                e[0] = C64::new(1.0, 0.0);
                e
            });
            let left = if want_left { pick(&basis.left, j) } else { None };
            if want_left && left.is_none() {
                flags.push(PairFlag::LeftUnavailable);
            }
            EigenPair {
                eig,
                right,
                left_method: left.as_ref().map(|_| RecoveryMethod::NullSpace),
                left,
                source: PairSource::Deflated,
                method: RecoveryMethod::NullSpace,
                flags,
                diagnostics: None,
            }
        })
        .collect()
}
