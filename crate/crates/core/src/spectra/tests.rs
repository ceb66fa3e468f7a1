use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::bem::{BemOptions, BemPreconditioner};
use crate::discretize::{build_system, ElementType, Grid, ProblemId, ProblemSpec};
use crate::fmm::FmmConfig;
use crate::krylov::FnOperator;
use crate::special::Kernel;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    v
}

fn random_matrix(n: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DenseMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

/// Companion matrix of `prod (x - r_k)`.
fn companion(roots: &[Complex64]) -> DenseMatrix {
    let mut coeffs = vec![c(1.0, 0.0)];
    for r in roots {
        let mut next = vec![Complex64::default(); coeffs.len() + 1];
        for (k, a) in coeffs.iter().enumerate() {
            next[k + 1] += a;
            next[k] -= a * r;
        }
        coeffs = next;
    }
    let n = roots.len();
    DenseMatrix::from_fn(n, n, |i, j| {
        if j == n - 1 {
            -coeffs[i]
        } else if i == j + 1 {
            c(1.0, 0.0)
        } else {
            Complex64::default()
        }
    })
}

#[test]
fn small_spectra() {
    let d = DenseMatrix::from_fn(3, 3, |i, j| if i == j { c(1.0 + i as f64, 0.0) } else { c(0.0, 0.0) });
    let eig = sorted(dense_eigenvalues(&d).unwrap());
    for (k, l) in eig.iter().enumerate() {
        assert!((l - (k as f64 + 1.0)).norm() < 1e-14);
    }
    let rot = DenseMatrix::from_fn(2, 2, |i, j| match (i, j) {
        (0, 1) => c(-1.0, 0.0),
        (1, 0) => c(1.0, 0.0),
        _ => c(0.0, 0.0),
    });
    let eig = sorted(dense_eigenvalues(&rot).unwrap());
    assert!((eig[0] - c(0.0, -1.0)).norm() < 1e-14 && (eig[1] - c(0.0, 1.0)).norm() < 1e-14);
    assert!(dense_eigenvalues(&DenseMatrix::zeros(0, 0)).unwrap().is_empty());
    assert_eq!(dense_eigenvalues(&DenseMatrix::identity(1)).unwrap(), vec![c(1.0, 0.0)]);
}

#[test]
fn companion_matrix_roots() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let roots: Vec<Complex64> = (0..8).map(|_| c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))).collect();
        let eig = dense_eigenvalues(&companion(&roots)).unwrap();
        for r in &roots {
            let nearest = eig.iter().map(|l| (l - r).norm()).fold(f64::INFINITY, f64::min);
            assert!(nearest < 1e-8, "root {r} missed by {nearest:e}");
        }
    }
}

#[test]
fn hessenberg_is_similar() {
    let a = random_matrix(30, 2);
    let h = hessenberg(&a).unwrap();
    for i in 0..30usize {
        for j in 0..i.saturating_sub(1) {
            assert_eq!(h[(i, j)], Complex64::default());
        }
    }
    assert!((h.trace() - a.trace()).norm() < 1e-12 * a.norm());
    assert!((h.norm() - a.norm()).abs() < 1e-12 * a.norm());
}

#[test]
fn trace_and_backward_error() {
    let n = 60;
    let a = random_matrix(n, 7);
    let eig = dense_eigenvalues(&a).unwrap();
    assert_eq!(eig.len(), n);
    let sum: Complex64 = eig.iter().sum();
    assert!((sum - a.trace()).norm() <= 1e-6 * a.trace().norm().max(1.0));
    // Inverse iteration recovers an eigenvector for sampled eigenvalues.
    for &lambda in eig.iter().step_by(13) {
        let shifted = DenseMatrix::from_fn(n, n, |i, j| a[(i, j)] - if i == j { lambda * (1.0 + 1e-10) } else { c(0.0, 0.0) });
        let lu = shifted.lu().unwrap();
        let mut v = vec![c(1.0, 0.0); n];
        for _ in 0..3 {
            v = lu.solve(&v);
            let norm = crate::linalg::norm2(&v);
            v.iter_mut().for_each(|x| *x /= norm);
        }
        let av = a.matvec(&v);
        let res: f64 = av.iter().zip(&v).map(|(x, y)| (x - lambda * y).norm_sqr()).sum::<f64>().sqrt();
        assert!(res / a.norm() <= 1e-8, "backward error {:e}", res / a.norm());
    }
}

#[test]
fn real_symmetric_input_has_real_spectrum() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 40;
    let mut a = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = c(rng.gen_range(-1.0..1.0), 0.0);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    let eig = dense_eigenvalues(&a).unwrap();
    assert!(eig.iter().all(|l| l.im.abs() <= 1e-8 * a.norm()));
}

#[test]
fn report_metrics() {
    let r = spectrum_report(&[c(1.0, 0.0); 3]);
    assert_eq!((r.n_negative_real, r.min_abs, r.cluster_radius, r.median_abs), (0, 1.0, 0.0, 1.0));
    let r = spectrum_report(&[c(-1.0, 0.0), c(2.0, 0.0)]);
    assert_eq!(r.n_negative_real, 1);
    assert_eq!(r.median_abs, 1.5);
    assert_eq!(r.cluster_radius, 2.0);
    assert_eq!(r.max_abs, 2.0);
}

#[test]
fn materialize_operators() {
    let id = materialize(&FnOperator::new(5, |x: &[Complex64], y: &mut [Complex64]| y.copy_from_slice(x))).unwrap();
    assert_eq!(id, DenseMatrix::identity(5));
    let diag = materialize(&FnOperator::new(4, |x: &[Complex64], y: &mut [Complex64]| {
        for (i, (xi, yi)) in x.iter().zip(y.iter_mut()).enumerate() {
            *yi = xi * (i as f64 + 2.0);
        }
    }))
    .unwrap();
    assert_eq!(diag, DenseMatrix::from_fn(4, 4, |i, j| if i == j { c(i as f64 + 2.0, 0.0) } else { c(0.0, 0.0) }));
    let big = FnOperator::new(MAX_DENSE + 1, |_: &[Complex64], _: &mut [Complex64]| {});
    assert!(matches!(materialize(&big), Err(Error::Size { .. })));
}

#[test]
fn preconditioned_operator_is_deterministic() {
    let p = ProblemSpec::new(ProblemId::P2, 7.0).unwrap();
    let sys = build_system(&p, Grid::for_problem(&p, 1.0 / 8.0).unwrap(), ElementType::Q1).unwrap();
    let config = FmmConfig::direct(Kernel::Helmholtz2D { kappa: 7.0 });
    let pc = BemPreconditioner::for_system(&sys, &config, BemOptions::default()).unwrap();
    let op = PreconditionedOperator { a: &sys.matrix, m: &pc };
    let (m1, m2) = (materialize(&op).unwrap(), materialize(&op).unwrap());
    assert_eq!(m1, m2);
}

#[test]
fn indefiniteness_grows_with_wavenumber() {
    let counts: Vec<usize> = [5.0, 10.0, 20.0, 40.0]
        .iter()
        .map(|&k| {
            let p = ProblemSpec::new(ProblemId::P1, k).unwrap();
            let sys = build_system(&p, Grid::new(0.0, 1.0, 16).unwrap(), ElementType::Q1).unwrap();
            spectrum_report(&dense_eigenvalues(&sys.matrix.to_dense()).unwrap()).n_negative_real
        })
        .collect();
    assert!(counts.windows(2).all(|w| w[0] <= w[1]), "{counts:?}");
    assert!(counts[3] > counts[0]);
}
