//! Backward errors of computed eigenpairs.
//!
//! `η` is the norm-wise backward error with spectral norms of the
//! coefficients; `ω` the component-wise one, defined for finite `λ` only.
//! Left quantities use the convention `y*·P(λ) = 0`.

use serde::{Deserialize, Serialize};

use crate::numkit::{spectral_norm, vec_norm, CVec, NormMethod, ZERO};
use crate::pencil::{homogeneous_weights, EigClass, HomogeneousEig, QuarticPencil};
use crate::{Error, Result};

/// `‖A‖₂ … ‖E‖₂`, computed once per problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormCache {
    pub norms: [f64; 5],
    pub method: NormMethod,
}

impl NormCache {
    pub fn new(q: &QuarticPencil) -> Self {
        let mut method = NormMethod::Svd;
        let mut norms = [0.0; 5];
        for (k, m) in q.coeffs().into_iter().enumerate() {
            let (v, how) = spectral_norm(m);
            norms[k] = v;
            if how == NormMethod::PowerIteration {
                method = how;
            }
        }
        NormCache { norms, method }
    }

    fn denominator(&self, lam: &HomogeneousEig) -> f64 {
        let a = lam.alpha.norm();
        let b = lam.beta;
        (0..5)
            .map(|k| a.powi(4 - k as i32) * b.powi(k as i32) * self.norms[k])
            .sum()
    }
}

/// `(α⁴A + α³βB + … + β⁴E)·x`.
pub fn residual(lam: &HomogeneousEig, x: &CVec, q: &QuarticPencil) -> CVec {
    let w = homogeneous_weights(lam.alpha, lam.beta);
    let mut r = CVec::zeros(q.n);
    for (k, m) in q.coeffs().into_iter().enumerate() {
        if w[k] != ZERO {
            r += (m * x) * w[k];
        }
    }
    r
}

/// `(α⁴A + … + β⁴E)ᴴ·y`, the adjoint of the left residual `y*·P`.
pub fn residual_left(lam: &HomogeneousEig, y: &CVec, q: &QuarticPencil) -> CVec {
    let w = homogeneous_weights(lam.alpha, lam.beta);
    let mut r = CVec::zeros(q.n);
    for (k, m) in q.coeffs().into_iter().enumerate() {
        if w[k] != ZERO {
            r += m.ad_mul(y) * w[k].conj();
        }
    }
    r
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

fn check_vector(x: &CVec) -> Result<f64> {
    let nx = vec_norm(x);
    if nx == 0.0 {
        return Err(Error::InvalidArgument("zero eigenvector".into()));
    }
    Ok(nx)
}

/// Norm-wise backward error of a right pair. For `λ = ∞` this reduces to
/// `‖Ax‖/(‖A‖‖x‖)`.
pub fn eta(lam: &HomogeneousEig, x: &CVec, q: &QuarticPencil, norms: &NormCache) -> Result<f64> {
    let nx = check_vector(x)?;
    let r = vec_norm(&residual(lam, x, q));
    Ok(ratio(r, norms.denominator(lam) * nx))
}

pub fn eta_left(lam: &HomogeneousEig, y: &CVec, q: &QuarticPencil, norms: &NormCache) -> Result<f64> {
    let ny = check_vector(y)?;
    let r = vec_norm(&residual_left(lam, y, q));
    Ok(ratio(r, norms.denominator(lam) * ny))
}

fn componentwise(r: &CVec, s: &[f64]) -> f64 {
    r.iter().zip(s).map(|(ri, &si)| ratio(ri.norm(), si)).fold(0.0, f64::max)
}

fn require_finite(lam: &HomogeneousEig) -> Result<()> {
    if lam.class == EigClass::Infinite {
        return Err(Error::InvalidArgument(
            "component-wise backward error is defined for finite eigenvalues only".into(),
        ));
    }
    Ok(())
}

/// `max_i |r_i| / s_i` with `s = Σ|λ|^{4−k}|A_k|·|x|`, evaluated in the
/// homogeneous scaling. `+∞` when some `s_i = 0` but `r_i ≠ 0`.
pub fn omega(lam: &HomogeneousEig, x: &CVec, q: &QuarticPencil) -> Result<f64> {
    require_finite(lam)?;
    check_vector(x)?;
    let w = homogeneous_weights(lam.alpha, lam.beta);
    let ax: Vec<f64> = x.iter().map(|z| z.norm()).collect();
    let mut s = vec![0.0; q.n];
    for (k, m) in q.coeffs().into_iter().enumerate() {
        let wk = w[k].norm();
        if wk == 0.0 {
            continue;
        }
        for j in 0..q.n {
            if ax[j] == 0.0 {
                continue;
            }
            for (i, si) in s.iter_mut().enumerate() {
                *si += wk * m[(i, j)].norm() * ax[j];
            }
        }
    }
    Ok(componentwise(&residual(lam, x, q), &s))
}

/// Column-wise analog of [`omega`] for `y*·P(λ)`.
pub fn omega_left(lam: &HomogeneousEig, y: &CVec, q: &QuarticPencil) -> Result<f64> {
    require_finite(lam)?;
    check_vector(y)?;
    let w = homogeneous_weights(lam.alpha, lam.beta);
    let ay: Vec<f64> = y.iter().map(|z| z.norm()).collect();
    let mut s = vec![0.0; q.n];
    for (k, m) in q.coeffs().into_iter().enumerate() {
        let wk = w[k].norm();
        if wk == 0.0 {
            continue;
        }
        for (j, sj) in s.iter_mut().enumerate() {
            let col: f64 = (0..q.n).map(|i| m[(i, j)].norm() * ay[i]).sum();
            *sj += wk * col;
        }
    }
    Ok(componentwise(&residual_left(lam, y, q), &s))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairDiagnostics {
    pub class: EigClass,
    #[serde(with = "crate::serde_real")]
    pub modulus: f64,
    #[serde(with = "crate::serde_real")]
    pub eta_right: f64,
    #[serde(with = "crate::serde_real::opt")]
    pub eta_left: Option<f64>,
    /// `None` for infinite eigenvalues.
    #[serde(with = "crate::serde_real::opt")]
    pub omega_right: Option<f64>,
    #[serde(with = "crate::serde_real::opt")]
    pub omega_left: Option<f64>,
}

impl PairDiagnostics {
    pub fn compute(
        lam: &HomogeneousEig,
        x: &CVec,
        y: Option<&CVec>,
        q: &QuarticPencil,
        norms: &NormCache,
    ) -> Result<Self> {
        let finite = lam.class != EigClass::Infinite;
        Ok(PairDiagnostics {
            class: lam.class,
            modulus: lam.modulus(),
            eta_right: eta(lam, x, q, norms)?,
            eta_left: y.map(|y| eta_left(lam, y, q, norms)).transpose()?,
            omega_right: if finite { Some(omega(lam, x, q)?) } else { None },
            omega_left: match (finite, y) {
                (true, Some(y)) => Some(omega_left(lam, y, q)?),
                _ => None,
            },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    #[serde(with = "crate::serde_real")]
    pub min: f64,
    #[serde(with = "crate::serde_real")]
    pub max: f64,
    #[serde(with = "crate::serde_real")]
    pub median: f64,
}

impl Stats {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Option<Stats> {
        let mut v: Vec<f64> = values.into_iter().collect();
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        let k = v.len();
        let median = if k % 2 == 1 { v[k / 2] } else { 0.5 * (v[k / 2 - 1] + v[k / 2]) };
        Some(Stats {
            min: v[0],
            max: v[k - 1],
            median,
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub zero: usize,
    pub finite: usize,
    pub infinite: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryReport {
    pub count: usize,
    pub classes: ClassCounts,
    pub eta_right: Stats,
    pub eta_left: Option<Stats>,
    pub omega_right: Option<Stats>,
    pub omega_left: Option<Stats>,
    /// Pair indices by nondecreasing `|λ|`, ties by index.
    pub order_by_modulus: Vec<usize>,
}

pub fn summarize(pairs: &[PairDiagnostics]) -> Result<SummaryReport> {
    if pairs.is_empty() {
        return Err(Error::InvalidArgument("nothing to summarize".into()));
    }
    let mut classes = ClassCounts::default();
    for p in pairs {
        match p.class {
            EigClass::Zero => classes.zero += 1,
            EigClass::Finite => classes.finite += 1,
            EigClass::Infinite => classes.infinite += 1,
        }
    }
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_by(|&i, &j| pairs[i].modulus.total_cmp(&pairs[j].modulus).then(i.cmp(&j)));
    Ok(SummaryReport {
        count: pairs.len(),
        classes,
        eta_right: Stats::of(pairs.iter().map(|p| p.eta_right)).expect("non-empty"),
        eta_left: Stats::of(pairs.iter().filter_map(|p| p.eta_left)),
        omega_right: Stats::of(pairs.iter().filter_map(|p| p.omega_right)),
        omega_left: Stats::of(pairs.iter().filter_map(|p| p.omega_left)),
        order_by_modulus: order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{CMat, C64, ONE};

    fn diag_quartic(d: [[f64; 5]; 2]) -> QuarticPencil {
        let m = |k: usize| CMat::from_diagonal(&CVec::from_vec(vec![C64::new(d[0][k], 0.0), C64::new(d[1][k], 0.0)]));
        QuarticPencil::new(m(0), m(1), m(2), m(3), m(4)).unwrap()
    }

    fn scalar(c: [f64; 5]) -> QuarticPencil {
        let m = |v: f64| CMat::from_element(1, 1, C64::new(v, 0.0));
        QuarticPencil::new(m(c[0]), m(c[1]), m(c[2]), m(c[3]), m(c[4])).unwrap()
    }

    #[test]
    fn scalar_root_has_zero_error() {
        let q = scalar([1.0, 0.0, 0.0, 0.0, -1.0]);
        let nc = NormCache::new(&q);
        let x = CVec::from_element(1, ONE);
        for lam in [ONE, -ONE, C64::new(0.0, 1.0)] {
            let l = HomogeneousEig::finite(lam);
            assert!(eta(&l, &x, &q, &nc).unwrap() < 1e-15);
            assert!(omega(&l, &x, &q).unwrap() < 1e-15);
        }
    }

    #[test]
    fn infinite_uses_only_a() {
        let q = diag_quartic([[0.0, 1.0, 1.0, 1.0, 1.0], [2.0, 3.0, 1.0, 1.0, 1.0]]);
        let nc = NormCache::new(&q);
        let x = CVec::from_vec(vec![ONE, ZERO]);
        assert_eq!(eta(&HomogeneousEig::infinite(), &x, &q, &nc).unwrap(), 0.0);
        let x2 = CVec::from_vec(vec![ZERO, ONE]);
        assert!((eta(&HomogeneousEig::infinite(), &x2, &q, &nc).unwrap() - 1.0).abs() < 1e-15);
        assert!(omega(&HomogeneousEig::infinite(), &x2, &q).is_err());
    }

    #[test]
    fn omega_on_diagonal_is_scalar_relative_residual() {
        let c0 = [1.0, 2.0, -1.0, 0.5, 3.0];
        let q = diag_quartic([c0, [1.0; 5]]);
        let lam = C64::new(0.3, 0.0);
        let x = CVec::from_vec(vec![ONE, ZERO]);
        let p: f64 = (0..5).map(|k| c0[k] * 0.3f64.powi(4 - k as i32)).sum();
        let s: f64 = (0..5).map(|k| c0[k].abs() * 0.3f64.powi(4 - k as i32)).sum();
        let w = omega(&HomogeneousEig::finite(lam), &x, &q).unwrap();
        assert!((w - p.abs() / s).abs() < 1e-14);
    }

    #[test]
    fn zero_over_zero_and_flag() {
        let q = diag_quartic([[0.0; 5], [1.0; 5]]);
        let x = CVec::from_vec(vec![ONE, ZERO]);
        let l = HomogeneousEig::finite(ONE);
        assert_eq!(omega(&l, &x, &q).unwrap(), 0.0);
        assert!(eta(&l, &CVec::zeros(2), &q, &NormCache::new(&q)).is_err());
    }

    #[test]
    fn huge_eigenvalue_does_not_overflow() {
        let q = scalar([1.0, 1.0, 1.0, 1.0, 1.0]);
        let nc = NormCache::new(&q);
        let x = CVec::from_element(1, ONE);
        let l = HomogeneousEig::finite(C64::new(1e150, 0.0));
        let e = eta(&l, &x, &q, &nc).unwrap();
        assert!(e.is_finite() && (e - 1.0).abs() < 1e-12);
    }

    #[test]
    fn summary_statistics() {
        let mk = |e: f64, m: f64| PairDiagnostics {
            class: EigClass::Finite,
            modulus: m,
            eta_right: e,
            eta_left: None,
            omega_right: Some(e),
            omega_left: None,
        };
        let s = summarize(&[mk(0.0, 2.0), mk(1.0, 1.0)]).unwrap();
        assert_eq!((s.eta_right.min, s.eta_right.max), (0.0, 1.0));
        assert_eq!(s.order_by_modulus, vec![1, 0]);
        let one = summarize(&[mk(0.25, 1.0)]).unwrap();
        assert_eq!(one.eta_right.min, one.eta_right.max);
        assert!(summarize(&[]).is_err());
    }
}
