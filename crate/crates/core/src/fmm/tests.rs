use super::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn cloud(n: usize, center: Point2, half: f64, rng: &mut ChaCha8Rng) -> Vec<Point2> {
    (0..n)
        .map(|_| {
            Point2::new(
                center.x + half * rng.gen_range(-1.0..1.0),
                center.y + half * rng.gen_range(-1.0..1.0),
            )
        })
        .collect()
}

fn charges(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    (0..n)
        .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

fn real_charges(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    (0..n).map(|_| c(rng.gen_range(-1.0..1.0), 0.0)).collect()
}

fn unit_normals(n: usize, rng: &mut ChaCha8Rng) -> Vec<Point2> {
    (0..n)
        .map(|_| {
            let a: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            Point2::new(a.cos(), a.sin())
        })
        .collect()
}

fn rel_err(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

fn direct(
    kernel: Kernel,
    x: &[Point2],
    n: Option<&[Point2]>,
    q: &[Complex64],
    y: &[Point2],
) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); y.len()];
    p2p(kernel, x, n, q, y, &mut out);
    out
}

/// Expansion values are analytic potentials for Laplace; map to the field.
fn field(kernel: Kernel, v: Vec<Complex64>) -> Vec<Complex64> {
    match kernel {
        Kernel::Laplace2D => v
            .into_iter()
            .map(|z| c(-z.re / (2.0 * std::f64::consts::PI), 0.0))
            .collect(),
        _ => v,
    }
}

fn kernels() -> [Kernel; 2] {
    [Kernel::helmholtz_2d(3.0).unwrap(), Kernel::Laplace2D]
}

#[test]
fn accuracy_to_order_examples() {
    assert_eq!(accuracy_to_order(1e-6).unwrap(), 6);
    assert_eq!(accuracy_to_order(1e-4).unwrap(), 4);
    assert_eq!(accuracy_to_order(1e-2).unwrap(), 2);
    assert_eq!(accuracy_to_order(0.5).unwrap(), 1);
    assert_eq!(accuracy_to_order(3e-5).unwrap(), 5);
    assert!(accuracy_to_order(0.9).is_err());
    assert!(accuracy_to_order(1e-13).is_err());
    let cfg = FmmConfig::new(Kernel::Laplace2D)
        .with_epsilon(1e-3)
        .unwrap();
    assert_eq!(cfg.order, 3);
    cfg.validate().unwrap();
}

#[test]
fn config_validation() {
    let k = Kernel::Laplace2D;
    assert!(FmmConfig::new(k).with_theta(0.0).validate().is_err());
    assert!(FmmConfig::new(k).with_theta(1.5).validate().is_err());
    assert!(FmmConfig::new(k).with_order(0).validate().is_err());
    assert!(FmmConfig::new(Kernel::Laplace3D).validate().is_err());
    FmmConfig::direct(Kernel::Laplace3D).validate().unwrap();
    let mut cfg = FmmConfig::new(k).with_epsilon(1e-6).unwrap();
    cfg.order = 4;
    assert!(cfg.validate().is_err());
}

#[test]
fn p2m_of_centered_unit_charge() {
    let k = Kernel::helmholtz_2d(2.0).unwrap();
    let ctr = Point2::new(0.3, -0.1);
    let e = p2m(k, 5, &[ctr], None, &[c(1.0, 0.0)], ctr).unwrap();
    assert_eq!(e.coeffs.len(), 11);
    assert!((e.coeff(0) - c(1.0, 0.0)).norm() < 1e-15);
    for m in (-5isize..=5).filter(|&m| m != 0) {
        assert!(e.coeff(m).norm() < 1e-15);
    }
    let z = p2m(k, 5, &[Point2::new(0.0, 0.0)], None, &[c(0.0, 0.0)], ctr).unwrap();
    assert!(z.coeffs.iter().all(|v| v.norm() == 0.0));
    let l = p2m(Kernel::Laplace2D, 4, &[ctr], None, &[c(1.0, 0.0)], ctr).unwrap();
    assert_eq!(l.coeffs.len(), 5);
}

#[test]
fn multipole_far_field_matches_direct() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let ctr = Point2::new(0.2, 0.1);
    let half = 0.5;
    let radius = half * std::f64::consts::SQRT_2;
    for k in kernels() {
        for dipole in [false, true] {
            let x = cloud(10, ctr, half, &mut rng);
            let n = unit_normals(10, &mut rng);
            let q = if k == Kernel::Laplace2D {
                real_charges(10, &mut rng)
            } else {
                charges(10, &mut rng)
            };
            let normals = dipole.then_some(n.as_slice());
            let e = p2m(k, 8, &x, normals, &q, ctr).unwrap();
            let probes: Vec<Point2> = (0..12)
                .map(|i| {
                    let a = i as f64 * 0.52;
                    ctr + Point2::new(a.cos(), a.sin()) * (4.0 * radius)
                })
                .collect();
            let approx = field(k, m2p(&e, &probes));
            let exact = direct(k, &x, normals, &q, &probes);
            // The normal derivative shifts the series by one order.
            let tol = if dipole { 1e-5 } else { 1e-6 };
            assert!(
                rel_err(&approx, &exact) < tol,
                "{k:?} dipole={dipole}: {}",
                rel_err(&approx, &exact)
            );
        }
    }
}

#[test]
fn m2m_preserves_far_field() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let half = 0.25;
    let child = Point2::new(0.25, 0.25);
    let parent = Point2::new(0.0, 0.0);
    let parent_radius = 2.0 * half * std::f64::consts::SQRT_2;
    for k in kernels() {
        let x = cloud(10, child, half, &mut rng);
        let q = if k == Kernel::Laplace2D {
            real_charges(10, &mut rng)
        } else {
            charges(10, &mut rng)
        };
        let e = p2m(k, 8, &x, None, &q, child).unwrap();
        let same = m2m(&e, child);
        assert!(rel_err(&same.coeffs, &e.coeffs) < 1e-14);
        let shifted = m2m(&e, parent);
        let probes: Vec<Point2> = (0..10)
            .map(|i| {
                let a = i as f64 * 0.7;
                parent + Point2::new(a.cos(), a.sin()) * (5.0 * parent_radius)
            })
            .collect();
        let before = field(k, m2p(&e, &probes));
        let after = field(k, m2p(&shifted, &probes));
        assert!(
            rel_err(&after, &before) < 1e-6,
            "{k:?}: {}",
            rel_err(&after, &before)
        );
        let zero = Expansion::zeros(ExpansionKind::Multipole, k, 8, child).unwrap();
        assert!(m2m(&zero, parent).coeffs.iter().all(|v| v.norm() == 0.0));
    }
}

#[test]
fn m2l_of_distant_source_matches_kernel() {
    for k in kernels() {
        let src = Point2::new(0.1, -0.05);
        let sc = Point2::new(0.0, 0.0);
        let tc = Point2::new(3.0, 1.0);
        for p in [4usize, 6, 8] {
            let e = p2m(k, p, &[src], None, &[c(1.0, 0.0)], sc).unwrap();
            let l = m2l(&e, tc);
            assert_eq!(l.kind, ExpansionKind::Local);
            let got = field(k, l2p(&l, &[tc]))[0];
            let want = direct(k, &[src], None, &[c(1.0, 0.0)], &[tc])[0];
            let err = (got - want).norm() / want.norm();
            assert!(err < 10f64.powi(1 - p as i32), "{k:?} p={p}: {err}");
        }
        let zero = Expansion::zeros(ExpansionKind::Multipole, k, 6, Point2::new(0.0, 0.0)).unwrap();
        assert!(m2l(&zero, Point2::new(5.0, 0.0))
            .coeffs
            .iter()
            .all(|v| v.norm() == 0.0));
    }
}

#[test]
fn l2l_preserves_local_field() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for k in kernels() {
        let x = cloud(8, Point2::new(6.0, 0.0), 0.5, &mut rng);
        let q = real_charges(8, &mut rng);
        let parent = Point2::new(0.0, 0.0);
        let child = Point2::new(0.25, -0.25);
        let local = m2l(
            &p2m(k, 8, &x, None, &q, Point2::new(6.0, 0.0)).unwrap(),
            parent,
        );
        assert!(rel_err(&l2l(&local, parent).coeffs, &local.coeffs) < 1e-14);
        let shifted = l2l(&local, child);
        let probes = cloud(10, child, 0.25, &mut rng);
        let before = l2p(&local, &probes);
        let after = l2p(&shifted, &probes);
        let (before, after) = match k {
            Kernel::Laplace2D => (field(k, before), field(k, after)),
            _ => (before, after),
        };
        assert!(
            rel_err(&after, &before) < 1e-8,
            "{k:?}: {}",
            rel_err(&after, &before)
        );
    }
}

#[test]
fn l2p_matches_term_by_term_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let kappa = 1.7;
    let k = Kernel::helmholtz_2d(kappa).unwrap();
    let p = 5;
    let mut local = Expansion::zeros(ExpansionKind::Local, k, p, Point2::new(0.5, 0.5)).unwrap();
    local.coeffs = charges(2 * p + 1, &mut rng);
    let y = Point2::new(0.7, 0.2);
    let rel = y - local.center;
    let (rho, phi) = (rel.norm(), rel.angle());
    let mut want = Complex64::default();
    for m in -(p as i32)..=(p as i32) {
        let jm = crate::special::bessel_j(m.unsigned_abs() as usize, kappa * rho).unwrap();
        let jm = if m < 0 && m % 2 != 0 { -jm } else { jm };
        want += local.coeff(m as isize) * jm * Complex64::from_polar(1.0, m as f64 * phi);
    }
    let got = l2p(&local, &[y])[0];
    assert!((got - want).norm() < 1e-13 * want.norm());

    let mut only0 = Expansion::zeros(ExpansionKind::Local, k, p, y).unwrap();
    only0.coeffs[p] = c(2.0, -1.0);
    assert!((l2p(&only0, &[y])[0] - c(2.0, -1.0)).norm() < 1e-15);
    let zero = Expansion::zeros(ExpansionKind::Local, k, p, y).unwrap();
    assert_eq!(
        l2p(&zero, &[y, Point2::new(0.0, 0.0)]),
        vec![Complex64::default(); 2]
    );
}

#[test]
fn p2p_examples() {
    let k = Kernel::helmholtz_2d(1.0).unwrap();
    let mut out = vec![Complex64::default()];
    p2p(
        k,
        &[Point2::new(0.0, 0.0)],
        None,
        &[c(1.0, 0.0)],
        &[Point2::new(1.0, 0.0)],
        &mut out,
    );
    assert!((out[0] - c(-0.022_064_241_1, 0.191_299_421_6)).norm() < 1e-9);
    let mut out = vec![Complex64::default()];
    p2p(
        k,
        &[Point2::new(0.4, 0.4)],
        None,
        &[c(1.0, 0.0)],
        &[Point2::new(0.4, 0.4)],
        &mut out,
    );
    assert_eq!(out[0], Complex64::default());
}

#[test]
fn p2p_matches_dense_matvec() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let k = Kernel::helmholtz_2d(4.0).unwrap();
    let x = cloud(50, Point2::new(0.5, 0.5), 0.5, &mut rng);
    let y = cloud(50, Point2::new(0.5, 0.5), 0.5, &mut rng);
    let q = charges(50, &mut rng);
    let got = direct(k, &x, None, &q, &y);
    for (j, &yj) in y.iter().enumerate() {
        let mut acc = Complex64::default();
        for (i, &xi) in x.iter().enumerate() {
            acc += q[i] * crate::special::greens(k, xi, yj).unwrap();
        }
        assert_eq!(got[j], acc);
    }
}

fn random_instance(n: usize, seed: u64) -> (Vec<Point2>, Vec<Complex64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (
        cloud(n, Point2::new(0.5, 0.5), 0.5, &mut rng),
        charges(n, &mut rng),
    )
}

#[test]
fn helmholtz_fmm_accuracy_by_order() {
    let (x, q) = random_instance(2000, 11);
    let k = Kernel::helmholtz_2d(10.0).unwrap();
    let exact = evaluate(&x, &q, &x, &FmmConfig::direct(k)).unwrap();
    let mut last = f64::INFINITY;
    for (p, bound) in [(2usize, 1e-1), (4, 1e-3), (6, 1e-5)] {
        let cfg = FmmConfig::new(k).with_order(p).with_theta(0.4);
        let got = evaluate(&x, &q, &x, &cfg).unwrap();
        let err = rel_err(&got, &exact);
        assert!(err <= bound, "p={p}: {err}");
        assert!(err < last);
        last = err;
    }
}

#[test]
fn convergence_in_order() {
    let (x, q) = random_instance(500, 12);
    for kappa in [1.0, 10.0] {
        let k = Kernel::helmholtz_2d(kappa).unwrap();
        let exact = evaluate(&x, &q, &x, &FmmConfig::direct(k)).unwrap();
        let mut last = f64::INFINITY;
        for p in [2usize, 4, 6, 8] {
            let cfg = FmmConfig::new(k).with_order(p).with_ncrit(32).with_theta(0.3);
            let op = FmmOperator::new(&x, None, &x, &cfg).unwrap();
            assert!(op.num_far_pairs() > 0);
            let err = rel_err(&op.apply(&q).unwrap(), &exact);
            assert!(
                err <= last && err < 10f64.powi(1 - p as i32),
                "kappa={kappa} p={p}: {err}"
            );
            last = err;
        }
    }
}

#[test]
fn laplace_and_dipole_pipelines() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let x = cloud(800, Point2::new(0.0, 0.0), 1.0, &mut rng);
    let y = cloud(600, Point2::new(0.2, 0.0), 1.0, &mut rng);
    let n = unit_normals(800, &mut rng);
    let q = charges(800, &mut rng);
    for k in [Kernel::Laplace2D, Kernel::helmholtz_2d(5.0).unwrap()] {
        for normals in [None, Some(n.as_slice())] {
            let exact = FmmOperator::new(&x, normals, &y, &FmmConfig::direct(k))
                .unwrap()
                .apply(&q)
                .unwrap();
            let cfg = FmmConfig::new(k).with_ncrit(16);
            let op = FmmOperator::new(&x, normals, &y, &cfg).unwrap();
            assert!(op.num_far_pairs() > 0);
            let err = rel_err(&op.apply(&q).unwrap(), &exact);
            assert!(err < 1e-5, "{k:?} dipole={}: {err}", normals.is_some());
        }
    }
}

#[test]
fn linearity_and_zero_charges() {
    let (x, q1) = random_instance(600, 14);
    let (_, q2) = random_instance(600, 15);
    let (a, b) = (c(0.3, -1.2), c(2.0, 0.5));
    let mix: Vec<Complex64> = q1.iter().zip(&q2).map(|(u, v)| a * u + b * v).collect();
    for k in kernels() {
        for backend in [Backend::Direct, Backend::Fmm] {
            let op =
                FmmOperator::new(&x, None, &x, &FmmConfig::new(k).with_backend(backend)).unwrap();
            let u1 = op.apply(&q1).unwrap();
            let u2 = op.apply(&q2).unwrap();
            let combo: Vec<Complex64> = u1.iter().zip(&u2).map(|(u, v)| a * u + b * v).collect();
            assert!(rel_err(&op.apply(&mix).unwrap(), &combo) < 1e-12);
            let zero = op.apply(&vec![Complex64::default(); 600]).unwrap();
            assert!(zero.iter().all(|v| v.norm() == 0.0));
        }
    }
}

#[test]
fn tiny_theta_reduces_to_direct() {
    let (x, q) = random_instance(700, 16);
    for k in kernels() {
        let exact = evaluate(&x, &q, &x, &FmmConfig::direct(k)).unwrap();
        let op = FmmOperator::new(&x, None, &x, &FmmConfig::new(k).with_theta(1e-9)).unwrap();
        assert_eq!(op.num_far_pairs(), 0);
        assert!(rel_err(&op.apply(&q).unwrap(), &exact) < 1e-12);
    }
}

#[test]
fn operator_shape_checks() {
    let k = Kernel::Laplace2D;
    let x = [Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)];
    let op = FmmOperator::new(&x, None, &x, &FmmConfig::new(k)).unwrap();
    assert!(matches!(
        op.apply(&[c(1.0, 0.0)]),
        Err(Error::Dimension { .. })
    ));
    assert!(FmmOperator::new(&x, Some(&x[..1]), &x, &FmmConfig::new(k)).is_err());
    let bad = [Point2::new(f64::NAN, 0.0)];
    assert!(FmmOperator::new(&bad, None, &x, &FmmConfig::new(k)).is_err());
    let empty = FmmOperator::new(&[], None, &x, &FmmConfig::new(k)).unwrap();
    assert_eq!(empty.apply(&[]).unwrap(), vec![Complex64::default(); 2]);
}

#[test]
fn direct_3d_sum() {
    let src = [Point3::new(0.0, 0.0, 0.0), Point3::new(0.0, 0.0, 2.0)];
    let tgt = [Point3::new(0.0, 0.0, 0.0)];
    let u = evaluate_direct_3d(
        Kernel::Laplace3D,
        &src,
        None,
        &[c(1.0, 0.0), c(1.0, 0.0)],
        &tgt,
    )
    .unwrap();
    assert!((u[0].re - 1.0 / (8.0 * std::f64::consts::PI)).abs() < 1e-15);
    assert!(evaluate_direct_3d(Kernel::Laplace2D, &src, None, &[c(1.0, 0.0); 2], &tgt).is_err());
}

#[test]
#[ignore = "timing measurement; run explicitly"]
fn complexity_smoke() {
    let k = Kernel::helmholtz_2d(10.0).unwrap();
    let mut times = Vec::new();
    for e in [14u32, 15, 16] {
        let (x, q) = random_instance(1 << e, 17);
        let start = std::time::Instant::now();
        evaluate(&x, &q, &x, &FmmConfig::new(k)).unwrap();
        times.push(start.elapsed().as_secs_f64());
    }
    for w in times.windows(2) {
        assert!(w[1] / w[0] <= 2.6, "{times:?}");
    }
}
