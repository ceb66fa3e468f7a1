use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::discretize::{build_system, ElementType, Grid, ProblemId, ProblemSpec};
use crate::fmm::{Backend, FmmConfig};
use crate::krylov::Preconditioner;
use crate::linalg::relative_error;
use crate::special::{greens, Kernel};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn helmholtz(kappa: f64) -> Kernel {
    Kernel::helmholtz_2d(kappa).unwrap()
}

/// Recursive 15-point Gauss bisection until halving changes a panel by
/// less than `1e-14` of the whole-interval estimate.
fn adaptive(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64) -> Complex64 {
    let rule = gauss_legendre(15).unwrap();
    let scale = rule.integrate(a, b, f).norm().max(1e-300);
    bisect(f, &rule, a, b, 1e-14 * scale, 20)
}

fn bisect(f: &dyn Fn(f64) -> Complex64, rule: &QuadratureRule, a: f64, b: f64, tol: f64, depth: usize) -> Complex64 {
    let whole = rule.integrate(a, b, f);
    let m = 0.5 * (a + b);
    let halves = rule.integrate(a, m, f) + rule.integrate(m, b, f);
    if (whole - halves).norm() <= tol || depth == 0 {
        halves
    } else {
        bisect(f, rule, a, m, tol, depth - 1) + bisect(f, rule, m, b, tol, depth - 1)
    }
}

#[test]
fn mesh_geometry() {
    let mesh = discretize_boundary(0.0, 1.0, 2).unwrap();
    assert_eq!(mesh.len(), 8);
    assert!(mesh.elements.iter().all(|e| e.width == 0.5));
    assert_eq!(mesh.elements[0].midpoint, Point2::new(0.25, 0.0));
    assert_eq!(mesh.elements[0].normal, Point2::new(0.0, -1.0));
    let quarter = [0.25, 0.75];
    for e in &mesh.elements {
        let m = e.midpoint;
        let on_x_edge = (m.x == 0.0 || m.x == 1.0) && quarter.contains(&m.y);
        let on_y_edge = (m.y == 0.0 || m.y == 1.0) && quarter.contains(&m.x);
        assert!(on_x_edge || on_y_edge, "{m:?}");
        let outside = m + e.normal * 1e-3;
        assert!(outside.x < 0.0 || outside.x > 1.0 || outside.y < 0.0 || outside.y > 1.0);
    }
    assert_eq!(discretize_boundary(-1.0, 1.0, 16).unwrap().perimeter(), 8.0);
    assert_eq!(discretize_boundary(0.0, 1.0, 64).unwrap().perimeter(), 4.0);
    assert!(discretize_boundary(0.0, 1.0, 1).is_err());
    // Elements chain end to start around the square.
    let mesh = discretize_boundary(0.0, 1.0, 5).unwrap();
    for (k, e) in mesh.elements.iter().enumerate() {
        let next = &mesh.elements[(k + 1) % mesh.len()];
        assert!((e.b - next.a).norm() < 1e-15);
    }
}

#[test]
fn gauss_legendre_rules() {
    let four = gauss_legendre(4).unwrap();
    let expected = [-0.861_136_311_594_052_6, -0.339_981_043_584_856_3, 0.339_981_043_584_856_3, 0.861_136_311_594_052_6];
    for (x, e) in four.nodes.iter().zip(expected) {
        assert!((x - e).abs() < 1e-15);
    }
    assert!((four.weights[0] - 0.347_854_845_137_453_9).abs() < 1e-15);
    for n in 1..=20 {
        let rule = gauss_legendre(n).unwrap();
        assert!((rule.weights.iter().sum::<f64>() - 2.0).abs() < 1e-13);
        for degree in 0..2 * n {
            let got: f64 = rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w * x.powi(degree as i32)).sum();
            let exact = if degree % 2 == 1 { 0.0 } else { 2.0 / (degree as f64 + 1.0) };
            assert!((got - exact).abs() < 1e-13, "n={n} degree={degree}");
        }
    }
    assert!(gauss_legendre(0).is_err());
}

#[test]
fn element_integral_special_cases() {
    let rule = gauss_legendre(4).unwrap();
    let e = BoundaryElement::new(Point2::new(0.0, 0.0), Point2::new(0.1, 0.0), Point2::new(0.0, -1.0));
    let dl = element_integral(&e, e.midpoint, Layer::Double, helmholtz(1.0), &rule).unwrap();
    assert_eq!(dl, Complex64::default());
    let sl = element_integral(&e, e.midpoint, Layer::Single, helmholtz(1.0), &rule).unwrap();
    assert!((sl - c(0.065_439_15, 0.025)).norm() < 1e-7, "{sl}");
    assert!(matches!(
        element_integral(&e, Point2::new(0.02, 0.0), Layer::Single, helmholtz(1.0), &rule),
        Err(crate::Error::Singular)
    ));
    // Endpoints and points off the element are regular.
    assert!(element_integral(&e, Point2::new(0.2, 0.0), Layer::Single, helmholtz(1.0), &rule).is_ok());
}

/// Worst relative error of the 4-point rule against the adaptive oracle, over
/// three kernels and three directions at `distance` widths from the centre.
fn worst_quadrature_error(distance: f64) -> f64 {
    let rule = gauss_legendre(4).unwrap();
    let e = BoundaryElement::new(Point2::new(0.0, 0.0), Point2::new(0.1, 0.0), Point2::new(0.0, -1.0));
    let d = 0.1 * distance;
    let diag = d * std::f64::consts::FRAC_1_SQRT_2;
    let mut worst = 0.0f64;
    for kernel in [helmholtz(1.0), helmholtz(15.0), Kernel::Laplace2D] {
        for p in [Point2::new(0.05, d), Point2::new(0.05 + d, 0.0), Point2::new(0.05 + diag, diag)] {
            for layer in [Layer::Single, Layer::Double] {
                if layer == Layer::Double && p.y == 0.0 {
                    continue;
                }
                let got = element_integral(&e, p, layer, kernel, &rule).unwrap();
                let f = |t: f64| {
                    let x = Point2::new(t, 0.0);
                    match layer {
                        Layer::Single => greens(kernel, x, p).unwrap(),
                        Layer::Double => crate::special::greens_normal_deriv(kernel, x, p, e.normal).unwrap(),
                    }
                };
                let oracle = adaptive(&f, 0.0, 0.1);
                worst = worst.max((got - oracle).norm() / oracle.norm());
            }
        }
    }
    worst
}

#[test]
fn off_diagonal_integrals_match_adaptive_quadrature() {
    for (distance, bound) in [(1.0, 5e-5), (2.0, 2e-7), (3.0, 2e-8), (5.0, 2e-8)] {
        let err = worst_quadrature_error(distance);
        assert!(err <= bound, "{distance} widths: {err:e}");
    }
}

/// `int G` over `[0, a]^2` with the singularity at the origin corner, by
/// recursive refinement towards the corner.
fn corner_square(kernel: Kernel, a: f64, depth: usize) -> Complex64 {
    let rule = gauss_legendre(20).unwrap();
    let square = |x0: f64, y0: f64, s: f64| -> Complex64 {
        rule.integrate(x0, x0 + s, |x| {
            rule.integrate(y0, y0 + s, |y| crate::special::greens(kernel, Point2::new(x, y), Point2::new(0.0, 0.0)).unwrap())
        })
    };
    let h = 0.5 * a;
    let rest = square(h, 0.0, h) + square(0.0, h, h) + square(h, h, h);
    if depth == 0 {
        rest
    } else {
        rest + corner_square(kernel, h, depth - 1)
    }
}

#[test]
fn cell_self_integral_matches_refined_quadrature() {
    for kernel in [Kernel::Laplace2D, helmholtz(1.0), helmholtz(40.0)] {
        for side in [0.03125, 0.1, 0.5] {
            let got = cell_self_integral(kernel, side).unwrap();
            let oracle = corner_square(kernel, 0.5 * side, 40) * 4.0;
            assert!((got - oracle).norm() <= 1e-10 * oracle.norm(), "{kernel:?} side {side}: {got} vs {oracle}");
        }
    }
    assert!(cell_self_integral(Kernel::Laplace2D, 0.0).is_err());
}

#[test]
fn gauss_identity_pins_double_layer_sign() {
    let mesh = discretize_boundary(0.0, 1.0, 64).unwrap();
    let rule = gauss_legendre(4).unwrap();
    for p in [Point2::new(0.5, 0.5), Point2::new(0.3, 0.6), Point2::new(0.8, 0.15)] {
        let sum: Complex64 =
            mesh.elements.iter().map(|e| element_integral(e, p, Layer::Double, Kernel::Laplace2D, &rule).unwrap()).sum();
        assert!((sum - c(-1.0, 0.0)).norm() < 1e-3, "{sum} at {p:?}");
    }
}

fn grid_points(n: usize, lo: f64, hi: f64) -> Vec<Point2> {
    let h = (hi - lo) / n as f64;
    let mut pts = Vec::new();
    for j in 1..n {
        for i in 1..n {
            pts.push(Point2::new(lo + i as f64 * h, lo + j as f64 * h));
        }
    }
    pts
}

#[test]
fn volume_to_boundary_cases() {
    let mesh = discretize_boundary(0.0, 1.0, 16).unwrap();
    let config = FmmConfig::new(helmholtz(5.0));
    let pts = grid_points(32, 0.0, 1.0);
    let zero = VolumeSources::uniform(pts.clone(), 1.0 / 1024.0, vec![Complex64::default(); pts.len()]).unwrap();
    assert!(volume_to_boundary(&zero, &mesh, &config).unwrap().iter().all(|v| v.norm() == 0.0));

    let single = VolumeSources::uniform(vec![Point2::new(0.4, 0.3)], 0.01, vec![c(1.0, 0.0)]).unwrap();
    let got = volume_to_boundary(&single, &mesh, &config).unwrap();
    let target = mesh.elements[3].midpoint;
    assert!((got[3] - greens(helmholtz(5.0), Point2::new(0.4, 0.3), target).unwrap() * 0.01).norm() < 1e-15);

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let values = (0..pts.len()).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let random = VolumeSources::uniform(pts, 1.0 / 1024.0, values).unwrap();
    let fast = volume_to_boundary(&random, &mesh, &config.with_order(6)).unwrap();
    let direct = volume_to_boundary(&random, &mesh, &FmmConfig::direct(helmholtz(5.0))).unwrap();
    assert!(relative_error(&fast, &direct) <= 1e-5, "{:e}", relative_error(&fast, &direct));
    assert!(VolumeSources::new(vec![Point2::new(0.5, 0.5)], vec![0.0], vec![c(1.0, 0.0)]).is_err());
}

fn manufactured(n: usize) -> (BoundaryMesh, VolumeSources, Vec<Complex64>, Vec<Point2>) {
    let p = ProblemSpec::new(ProblemId::P1, 15.0).unwrap();
    let mesh = discretize_boundary(0.0, 1.0, n).unwrap();
    let pts = grid_points(n, 0.0, 1.0);
    let density = pts.iter().map(|q| c(-p.source(q.x, q.y), 0.0)).collect();
    let h = 1.0 / n as f64;
    let sources = VolumeSources::uniform(pts.clone(), h * h, density).unwrap();
    let flux = mesh
        .elements
        .iter()
        .map(|e| {
            let (x, y) = (e.midpoint.x, e.midpoint.y);
            let ux = PI * (PI * x).cos() * (2.0 * PI * y).sin();
            let uy = 2.0 * PI * (PI * x).sin() * (2.0 * PI * y).cos();
            c(ux * e.normal.x + uy * e.normal.y, 0.0)
        })
        .collect();
    (mesh, sources, flux, pts)
}

#[test]
fn zero_data_gives_zero_flux_and_field() {
    let mesh = discretize_boundary(0.0, 1.0, 8).unwrap();
    let config = FmmConfig::new(helmholtz(3.0));
    let zeros = vec![Complex64::default(); mesh.len()];
    let solve = solve_boundary_flux(&mesh, &zeros, &zeros, &config, InnerSolverSettings::default()).unwrap();
    assert!(solve.converged && solve.flux.iter().all(|v| v.norm() == 0.0));
    let empty = VolumeSources::uniform(vec![], 1.0, vec![]).unwrap();
    let u = evaluate_interior(&mesh, &zeros, &zeros, &empty, &grid_points(8, 0.0, 1.0), &config).unwrap();
    assert!(u.iter().all(|v| v.norm() == 0.0));
}

#[test]
fn manufactured_flux_and_interior_field() {
    let settings = InnerSolverSettings { tol: 1e-10, restart: 60, max_iters: 600 };
    let mut errors = Vec::new();
    for n in [16, 32, 64] {
        let (mesh, sources, exact, pts) = manufactured(n);
        let config = FmmConfig::new(helmholtz(15.0)).with_order(10);
        let v = volume_to_boundary(&sources, &mesh, &config).unwrap();
        let zeros = vec![Complex64::default(); mesh.len()];
        let solve = solve_boundary_flux(&mesh, &zeros, &v, &config, settings).unwrap();
        assert!(solve.converged, "n={n}: {} iterations, residual {:e}", solve.iterations, solve.residual);
        let scale = exact.iter().map(|v: &Complex64| v.norm()).fold(0.0, f64::max);
        let err = solve.flux.iter().zip(&exact).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale;
        errors.push(err);
        if n == 64 {
            let u = evaluate_interior(&mesh, &solve.flux, &zeros, &sources, &pts, &config).unwrap();
            let truth: Vec<Complex64> = pts.iter().map(|q| c((PI * q.x).sin() * (2.0 * PI * q.y).sin(), 0.0)).collect();
            let rel = relative_error(&u, &truth);
            assert!(rel <= 0.05, "interior error {rel:e}");
        }
    }
    assert!(errors[0] > errors[1] && errors[1] > errors[2], "flux errors {errors:?}");
}

#[test]
fn double_layer_evaluation_matches_dense() {
    let mesh = discretize_boundary(0.0, 1.0, 16).unwrap();
    let kernel = helmholtz(7.0);
    let targets = grid_points(20, 0.0, 1.0);
    let u: Vec<Complex64> = mesh.elements.iter().map(|e| c(e.midpoint.x.cos(), e.midpoint.y)).collect();
    let zeros = vec![Complex64::default(); mesh.len()];
    let empty = VolumeSources::uniform(vec![], 1.0, vec![]).unwrap();
    let got = evaluate_interior(&mesh, &zeros, &u, &empty, &targets, &FmmConfig::new(kernel).with_order(10)).unwrap();
    let dense = dense_double_layer(&mesh, &targets, kernel).unwrap().matvec(&u);
    let expected: Vec<Complex64> = dense.iter().map(|v| -v).collect();
    assert!(relative_error(&got, &expected) < 1e-8, "{:e}", relative_error(&got, &expected));
}

#[test]
fn boundary_operators_match_dense_assembly() {
    let mesh = discretize_boundary(-1.0, 1.0, 12).unwrap();
    let kernel = helmholtz(4.0);
    let solver = BoundarySolver::new(mesh.clone(), &FmmConfig::direct(kernel), InnerSolverSettings::default()).unwrap();
    let x: Vec<Complex64> = (0..mesh.len()).map(|i| c((i as f64).sin(), 1.0 / (1.0 + i as f64))).collect();
    let mids = mesh.midpoints();
    let g = dense_single_layer(&mesh, &mids, kernel).unwrap().matvec(&x);
    let k = dense_double_layer(&mesh, &mids, kernel).unwrap().matvec(&x);
    assert!(relative_error(&solver.apply_single_layer(&x).unwrap(), &g) < 1e-13);
    assert!(relative_error(&solver.apply_double_layer(&x).unwrap(), &k) < 1e-13);
}

fn p1_system(n: usize, kappa: f64) -> crate::discretize::LinearSystem {
    let p = ProblemSpec::new(ProblemId::P1, kappa).unwrap();
    build_system(&p, Grid::new(0.0, 1.0, n).unwrap(), ElementType::Q1).unwrap()
}

#[test]
fn preconditioner_equals_dense_pipeline() {
    let sys = p1_system(16, 7.0);
    let kernel = helmholtz(7.0);
    let options = BemOptions { inner: InnerSolverSettings { tol: 1e-15, restart: 64, max_iters: 400 }, self_cells: true, mass_scaling: true };
    let pc = BemPreconditioner::for_system(&sys, &FmmConfig::direct(kernel), options).unwrap();
    let mass = crate::discretize::assemble(sys.layout.grid, ElementType::Q1).mass;
    let dense = DensePipeline::new(&sys.nodes, sys.layout.spacing(), (0.0, 1.0), 16, Some(&mass), kernel, true).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let r: Vec<Complex64> = (0..sys.dim()).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let got = pc.try_apply(&r).unwrap();
    let want = dense.apply(&r);
    assert!(relative_error(&got, &want) < 1e-12, "{:e}", relative_error(&got, &want));
    let lumped = BemPreconditioner::for_system(&sys, &FmmConfig::direct(kernel), BemOptions { mass_scaling: false, ..options }).unwrap();
    let dense = DensePipeline::new(&sys.nodes, sys.layout.spacing(), (0.0, 1.0), 16, None, kernel, true).unwrap();
    let (got, want) = (lumped.try_apply(&r).unwrap(), dense.apply(&r));
    assert!(relative_error(&got, &want) < 1e-12, "{:e}", relative_error(&got, &want));
}

#[test]
fn preconditioner_is_linear() {
    let sys = p1_system(16, 15.0);
    let options = BemOptions { inner: InnerSolverSettings { tol: 1e-14, restart: 64, max_iters: 400 }, self_cells: true, mass_scaling: true };
    let pc = BemPreconditioner::for_system(&sys, &FmmConfig::new(helmholtz(15.0)), options).unwrap();
    let n = sys.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut random = || -> Vec<Complex64> { (0..n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect() };
    let (r1, r2) = (random(), random());
    let (a, b) = (c(0.7, -1.3), c(-2.0, 0.25));
    let combo: Vec<Complex64> = r1.iter().zip(&r2).map(|(x, y)| a * x + b * y).collect();
    let (z1, z2) = (pc.try_apply(&r1).unwrap(), pc.try_apply(&r2).unwrap());
    let expected: Vec<Complex64> = z1.iter().zip(&z2).map(|(x, y)| a * x + b * y).collect();
    let got = pc.try_apply(&combo).unwrap();
    assert!(relative_error(&got, &expected) < 1e-10, "{:e}", relative_error(&got, &expected));
    let mut z = vec![c(1.0, 1.0); n];
    pc.apply(&vec![Complex64::default(); n], &mut z);
    assert!(z.iter().all(|v| v.norm() == 0.0));
    assert_eq!(pc.stats().applies, 4);
    assert_eq!(pc.stats().inner_failures, 0);
}

#[test]
fn preconditioner_approximates_the_fem_solution() {
    let sys = p1_system(32, 15.0);
    let direct = sys.solve_direct().unwrap();
    let config = FmmConfig::new(helmholtz(15.0)).with_epsilon(1e-6).unwrap();
    let pc = BemPreconditioner::for_system(&sys, &config, BemOptions::default()).unwrap();
    let z = pc.try_apply(&sys.rhs).unwrap();
    let rel = relative_error(&z, &direct);
    assert!(rel <= 0.15, "relative difference {rel:e}");
}

#[test]
fn preconditioner_rejects_outside_nodes() {
    let config = FmmConfig::new(helmholtz(1.0));
    let bad = [Point2::new(0.5, 0.5), Point2::new(1.0, 0.5)];
    assert!(BemPreconditioner::new(&bad, 0.5, (0.0, 1.0), 2, None, &config, BemOptions::default()).is_err());
    let _ = Backend::Direct;
}

