//! Independent oracles and helpers shared by the integration tests.
#![allow(dead_code)]

pub mod exact;

use faer::Mat;
use nalgebra::DMatrix;
use quarteig::numkit::{CMat, CVec, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn randn_c(rng: &mut ChaCha8Rng, r: usize, c: usize) -> CMat {
    use rand_distr::{Distribution, StandardNormal};
    CMat::from_fn(r, c, |_, _| {
        let a: f64 = StandardNormal.sample(rng);
        let b: f64 = StandardNormal.sample(rng);
        C64::new(a, b)
    })
}

pub fn rand_int(rng: &mut ChaCha8Rng, r: usize, c: usize, lo: i64, hi: i64) -> DMatrix<i64> {
    DMatrix::from_fn(r, c, |_, _| rng.random_range(lo..=hi))
}

pub fn to_faer(m: &CMat) -> Mat<faer::c64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| {
        let z = m[(i, j)];
        faer::c64::new(z.re, z.im)
    })
}

/// Dense generalized eigenvalues of `A − λB` as normalized `(α, β)` with
/// `β ≥ 0`, from faer.
pub fn dense_gen_eig(a: &CMat, b: &CMat) -> Vec<(C64, f64)> {
    // faer's workspace sizing panics on 1x1 input; the scalar case is trivial
    if a.nrows() == 1 {
        return vec![normalize(a[(0, 0)], b[(0, 0)])];
    }
    let fa = to_faer(a);
    let fb = to_faer(b);
    let ev = fa.generalized_eigen(&fb).expect("faer generalized eigensolve");
    let sa = ev.S_a();
    let sb = ev.S_b();
    (0..a.nrows())
        .map(|i| {
            let al = sa[i];
            let be = sb[i];
            normalize(C64::new(al.re, al.im), C64::new(be.re, be.im))
        })
        .collect()
}

pub fn normalize(al: C64, be: C64) -> (C64, f64) {
    let bn = be.norm();
    let (al, bn) = if bn > 0.0 { (al * (be.conj() / bn), bn) } else { (al, 0.0) };
    let s = al.norm().hypot(bn);
    (al / s, bn / s)
}

/// Eigenvalues of a Hermitian matrix, nondecreasing, from faer.
pub fn hermitian_eigvals(m: &CMat) -> Vec<f64> {
    to_faer(m)
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .expect("faer self-adjoint eigensolve")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Cls {
    Zero,
    Finite,
    Infinite,
}

/// Classification with the same thresholds the library documents.
pub fn classify(al: C64, be: f64, dim: usize) -> Cls {
    let tol = dim as f64 * f64::EPSILON;
    if be <= tol {
        Cls::Infinite
    } else if al.norm() <= tol && be > 0.5 {
        Cls::Zero
    } else {
        Cls::Finite
    }
}

pub fn class_counts(v: &[Cls]) -> (usize, usize, usize) {
    let z = v.iter().filter(|c| **c == Cls::Zero).count();
    let i = v.iter().filter(|c| **c == Cls::Infinite).count();
    (z, v.len() - z - i, i)
}

/// Greedy matching of two finite multisets; returns the largest relative
/// deviation `|a − b| / max(1, |b|)` over matched pairs.
pub fn match_multisets(got: &[C64], want: &[C64]) -> f64 {
    assert_eq!(got.len(), want.len(), "multiset sizes differ");
    let mut used = vec![false; got.len()];
    let mut worst: f64 = 0.0;
    for w in want {
        let (k, d) = got
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, g)| (k, (g - w).norm() / w.norm().max(1.0)))
            .fold((usize::MAX, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        used[k] = true;
        worst = worst.max(d);
    }
    worst
}

/// Smallest pairwise relative distance in a finite set.
pub fn min_gap(v: &[C64]) -> f64 {
    let mut g = f64::INFINITY;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            g = g.min((v[i] - v[j]).norm() / v[i].norm().max(v[j].norm()).max(1.0));
        }
    }
    g
}

pub fn quartic(c: [CMat; 5]) -> quarteig::QuarticPencil {
    let [a, b, cc, d, e] = c;
    quarteig::QuarticPencil::new(a, b, cc, d, e).expect("valid quartic")
}

pub fn random_quartic(rng: &mut ChaCha8Rng, n: usize) -> quarteig::QuarticPencil {
    quartic(std::array::from_fn(|_| randn_c(rng, n, n)))
}

fn two_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values[0]
}

/// Homogeneous weights `α^k β^(4−k)` for `A, B, C, D, E`, evaluated
/// directly rather than through the library.
fn weights(alpha: C64, beta: f64) -> [C64; 5] {
    let b = C64::new(beta, 0.0);
    [alpha.powu(4), alpha.powu(3) * b, alpha.powu(2) * b * b, alpha * b.powu(3), b.powu(4)]
}

/// Norm-wise backward error from its definition, with its own spectral
/// norms and residual.
pub fn eta_oracle(alpha: C64, beta: f64, x: &CVec, q: &quarteig::QuarticPencil, left: bool) -> f64 {
    let w = weights(alpha, beta);
    let mut r = CVec::zeros(q.n);
    let mut den = 0.0;
    for (k, m) in q.coeffs().iter().enumerate() {
        let t = if left { m.adjoint() * x * w[k].conj() } else { *m * x * w[k] };
        r += t;
        den += w[k].norm() * two_norm(m);
    }
    r.norm() / (den * x.norm())
}

/// Right null vector of a nearly singular square matrix (smallest singular
/// direction).
pub fn null_vector(m: &CMat) -> CVec {
    let s = m.clone().svd(false, true);
    let vt = s.v_t.unwrap();
    let k = (0..s.singular_values.len())
        .min_by(|&i, &j| s.singular_values[i].total_cmp(&s.singular_values[j]))
        .unwrap();
    vt.row(k).adjoint()
}

/// Distance between the lines spanned by `u` and `v`: `‖û − e^{iφ}v̂‖` with
/// the phase aligned, which approximates the principal angle.
pub fn angle(u: &CVec, v: &CVec) -> f64 {
    let (u, v) = (u / C64::new(u.norm(), 0.0), v / C64::new(v.norm(), 0.0));
    let ip = v.dotc(&u);
    let ph = if ip.norm() > 0.0 { ip / ip.norm() } else { C64::new(1.0, 0.0) };
    (u - v * ph).norm()
}
