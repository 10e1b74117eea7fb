mod common;

use common::exact::char_poly;
use common::*;
use nalgebra::DMatrix;
use num_traits::ToPrimitive;
use quarteig::numkit::{complexify, CMat, C64};
use quarteig::pencil::{linearize, quadratify, reverse};
use quarteig::scaling::{aggregate, balance, param_scale, scaled_sums, spread};
use quarteig::solver::SolveConfig;
use quarteig::{solve, EigClass, QuarticPencil};

fn scalar(v: [f64; 5]) -> QuarticPencil {
    quartic(v.map(|x| CMat::from_element(1, 1, C64::new(x, 0.0))))
}

fn finite_eigs(q: &QuarticPencil) -> Vec<C64> {
    let l = linearize(q);
    dense_gen_eig(&l.aa, &l.bb)
        .into_iter()
        .filter(|(_, b)| *b > 1e-10)
        .map(|(a, b)| a / b)
        .collect()
}

fn unit_roots() -> Vec<C64> {
    vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, -1.0)]
}

#[test]
fn unit_quartic_linearization_and_quadratification() {
    let q = scalar([1.0, 0.0, 0.0, 0.0, -1.0]);
    assert!(match_multisets(&finite_eigs(&q), &unit_roots()) < 1e-13);

    // λ²𝕄 + λℂ + 𝕂 through its own companion form
    let qp = quadratify(&q);
    let m = qp.m.nrows();
    let mut big_a = CMat::zeros(2 * m, 2 * m);
    let mut big_b = CMat::zeros(2 * m, 2 * m);
    big_a.view_mut((0, m), (m, m)).fill_with_identity();
    big_a.view_mut((m, 0), (m, m)).copy_from(&(-&qp.k));
    big_a.view_mut((m, m), (m, m)).copy_from(&(-&qp.cc));
    big_b.view_mut((0, 0), (m, m)).fill_with_identity();
    big_b.view_mut((m, m), (m, m)).copy_from(&qp.m);
    let got: Vec<C64> = dense_gen_eig(&big_a, &big_b).into_iter().map(|(a, b)| a / b).collect();
    assert!(match_multisets(&got, &unit_roots()) < 1e-13);
    assert!(match_multisets(&finite_eigs(&reverse(&q)), &unit_roots()) < 1e-13);
}

#[test]
fn zero_leading_coefficient_gives_infinite_eigenvalues() {
    let mut r = rng(3);
    let n = 3;
    let mut c: [CMat; 5] = std::array::from_fn(|_| randn_c(&mut r, n, n));
    c[0] = CMat::zeros(n, n);
    let l = linearize(&quartic(c));
    let inf = dense_gen_eig(&l.aa, &l.bb).iter().filter(|(_, b)| *b < 1e-10).count();
    assert!(inf >= n, "{inf} infinite eigenvalues");
}

#[test]
fn reversal_maps_to_reciprocals() {
    // (λ − 2)⁴
    let q = scalar([1.0, -8.0, 24.0, -32.0, 16.0]);
    let rev = finite_eigs(&reverse(&q));
    assert_eq!(rev.len(), 4);
    // a quadruple root is only determined to about ε^(1/4)
    for z in rev {
        assert!((z - C64::new(0.5, 0.0)).norm() < 1e-3, "{z}");
    }
}

/// Roots of `Σ c_k t^k` from the companion matrix of the exact polynomial.
fn poly_roots(c: &[f64]) -> Vec<C64> {
    let d = c.len() - 1;
    let mut comp = CMat::zeros(d, d);
    for i in 1..d {
        comp[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    for i in 0..d {
        comp[(i, d - 1)] = C64::new(-c[i] / c[d], 0.0);
    }
    dense_gen_eig(&comp, &CMat::identity(d, d)).into_iter().map(|(a, b)| a / b).collect()
}

#[test]
fn linearization_matches_determinant_polynomial() {
    let mut r = rng(17);
    let mut checked = 0;
    for trial in 0..40 {
        let n = 2 + trial % 2;
        let ints: [DMatrix<i64>; 5] = std::array::from_fn(|_| rand_int(&mut r, n, n, -5, 5));
        let p = char_poly([&ints[0], &ints[1], &ints[2], &ints[3], &ints[4]]);
        let Some(hi) = p.iter().rposition(|c| *c != num_rational::BigRational::from_integer(0.into())) else {
            continue;
        };
        let lo = p.iter().position(|c| *c != num_rational::BigRational::from_integer(0.into())).unwrap();
        let coeffs: Vec<f64> = p[lo..=hi].iter().map(|c| c.to_f64().unwrap()).collect();
        let want = poly_roots(&coeffs);
        if want.len() < 2 || min_gap(&want) < 1e-4 {
            continue;
        }
        let q = quartic(std::array::from_fn(|k| complexify(&ints[k].map(|v| v as f64))));
        let got: Vec<C64> = finite_eigs(&q).into_iter().filter(|z| z.norm() > 1e-8).collect();
        assert!(match_multisets(&got, &want) < 1e-8, "trial {trial}");

        let rev: Vec<C64> = finite_eigs(&reverse(&q)).into_iter().filter(|z| z.norm() > 1e-8).collect();
        let recip: Vec<C64> = want.iter().map(|z| z.inv()).collect();
        assert!(match_multisets(&rev, &recip) < 1e-8, "trial {trial} reversed");
        checked += 1;
    }
    assert!(checked >= 20, "only {checked} well separated instances");
}

#[test]
fn scaled_unit_quartic_roots_survive_descaling() {
    for (a, e) in [(16.0, -1.0), (1e-6, -1e-6), (3.0, -3.0)] {
        let q = scalar([a, 0.0, 0.0, 0.0, e]);
        let (_, rec) = param_scale(&q);
        assert!(rec.gamma > 0.0 && rec.theta > 0.0);
        let sol = solve(&q, &SolveConfig::default()).unwrap();
        let got: Vec<C64> = sol.pairs.iter().filter_map(|p| p.eig.lambda()).collect();
        let r = (-e / a).powf(0.25);
        let want: Vec<C64> = unit_roots().into_iter().map(|z| z * r).collect();
        assert!(match_multisets(&got, &want) < 10.0 * f64::EPSILON * 4.0, "a={a}");
    }
}

#[test]
fn graded_rows_are_equilibrated() {
    let n = 10;
    let mut r = rng(23);
    let grade = CMat::from_diagonal(&nalgebra::DVector::from_fn(n, |i, _| C64::new(2f64.powi(i as i32 + 1), 0.0)));
    let q = quartic(std::array::from_fn(|_| &grade * randn_c(&mut r, n, n)));
    let ones = vec![1.0; n];
    let (rows0, _) = scaled_sums(&aggregate(&q), &ones, &ones);
    let (qb, _) = balance(&q, 5);
    let (rows1, _) = scaled_sums(&aggregate(&qb), &ones, &ones);
    let gain = spread(&rows0) / spread(&rows1);
    assert!(gain >= 2f64.powf(n as f64 / 2.0), "spread reduced only by {gain}");
}

#[test]
fn balancing_keeps_eigenvalues() {
    let mut r = rng(29);
    let mut checked = 0;
    for _ in 0..5 {
        let q = random_quartic(&mut r, 4);
        let (qb, _) = balance(&q, 5);
        let before = finite_eigs(&q);
        if min_gap(&before) < 1e-4 {
            continue;
        }
        assert!(match_multisets(&finite_eigs(&qb), &before) < 1e-8);
        checked += 1;
    }
    assert!(checked >= 3);
}

#[test]
fn scaling_and_classes_agree_with_direct_solve() {
    let mut r = rng(31);
    let mut checked = 0;
    for _ in 0..5 {
        let mut q = random_quartic(&mut r, 3);
        q.e.column_mut(1).fill(C64::new(0.0, 0.0));
        let plain = solve(&q, &SolveConfig { scale: false, balance: false, ..Default::default() }).unwrap();
        let scaled = solve(&q, &SolveConfig::default()).unwrap();
        let classes = |s: &quarteig::EigenSolution| {
            let mut v: Vec<EigClass> = s.pairs.iter().map(|p| p.eig.class).collect();
            v.sort();
            v
        };
        assert_eq!(classes(&plain), classes(&scaled));
        let fin = |s: &quarteig::EigenSolution| -> Vec<C64> {
            s.pairs.iter().filter(|p| p.eig.class == EigClass::Finite).filter_map(|p| p.eig.lambda()).collect()
        };
        let want = finite_eigs(&q).into_iter().filter(|z| z.norm() > 1e-8).collect::<Vec<_>>();
        if min_gap(&want) < 1e-4 {
            continue;
        }
        assert!(match_multisets(&fin(&scaled), &want) < 1e-8);
        assert!(match_multisets(&fin(&plain), &want) < 1e-8);
        checked += 1;
    }
    assert!(checked >= 3);
}
