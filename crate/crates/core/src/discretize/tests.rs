use super::*;

fn re(v: Complex64) -> f64 {
    v.re
}

fn unit(n: usize) -> Grid {
    Grid::new(0.0, 1.0, n).unwrap()
}

#[test]
fn q1_element_row_sums() {
    let h = 0.125;
    let (k, m) = element_matrices(ElementType::Q1, h);
    for r in 0..4 {
        assert!(k[r].iter().sum::<f64>().abs() < 1e-15);
        assert!((m[r].iter().sum::<f64>() - h * h / 4.0).abs() < 1e-15);
    }
    assert!((k[0][0] - 2.0 / 3.0).abs() < 1e-15);
    assert!((m[0][0] - h * h / 9.0).abs() < 1e-15);
}

#[test]
fn q2_element_constants_are_in_the_kernel() {
    let h = 0.3;
    let (k, m) = element_matrices(ElementType::Q2, h);
    for row in &k {
        assert!(row.iter().sum::<f64>().abs() < 1e-13);
    }
    let total: f64 = m.iter().flatten().sum();
    assert!((total - h * h).abs() < 1e-14);
    let (k1, _) = line_matrices(ElementType::Q2, 1.0);
    let expected = [[7.0, -8.0, 1.0], [-8.0, 16.0, -8.0], [1.0, -8.0, 7.0]];
    for a in 0..3 {
        for b in 0..3 {
            assert!((k1[a][b] - expected[a][b] / 3.0).abs() < 1e-13);
        }
    }
}

#[test]
fn three_by_three_q1_matches_hand_assembly() {
    let h = 1.0 / 3.0;
    let fem = assemble_q1(unit(3));
    assert_eq!(fem.layout.num_interior(), 4);
    // Interior unknowns (1,1), (2,1), (1,2), (2,2): every pair shares at least one cell.
    let diagonal_pair = |i: usize, j: usize| i + j == 3;
    for i in 0..4 {
        for j in 0..4 {
            let (k, m) = (re(fem.stiffness.get(i, j)), re(fem.mass.get(i, j)));
            let (ek, em) = if i == j {
                (8.0 / 3.0, 4.0 * h * h / 9.0)
            } else if diagonal_pair(i, j) {
                (-1.0 / 3.0, h * h / 36.0)
            } else {
                (-1.0 / 3.0, h * h / 9.0)
            };
            assert!((k - ek).abs() < 1e-14, "K[{i}][{j}] = {k}");
            assert!((m - em).abs() < 1e-16, "M[{i}][{j}] = {m}");
        }
    }
}

#[test]
fn q2_interior_rows_annihilate_constants() {
    let fem = assemble_q2(unit(4));
    let l = &fem.layout;
    let ps = l.per_side;
    for (i, &k) in l.interior_nodes.iter().enumerate() {
        let (x, y) = (k % ps, k / ps);
        // Rows whose stencil avoids the boundary.
        if x >= 3 && y >= 3 && x + 3 < ps && y + 3 < ps {
            let s: Complex64 = fem.stiffness.row(i).map(|(_, v)| v).sum();
            assert!(s.norm() < 1e-12, "row {i} sums to {s}");
        }
    }
}

#[test]
fn operators_are_symmetric_with_definite_parts() {
    for element in [ElementType::Q1, ElementType::Q2] {
        let p = ProblemSpec::new(ProblemId::P1, 15.0).unwrap();
        let sys = build_system(&p, unit(6), element).unwrap();
        assert!(sys.matrix.is_symmetric());
        let fem = assemble(unit(6), element);
        assert!(fem.stiffness.is_symmetric() && fem.mass.is_symmetric());
        assert!(cholesky_succeeds(&fem.stiffness));
        assert!(cholesky_succeeds(&fem.mass));
    }
}

fn cholesky_succeeds(a: &CsrMatrix) -> bool {
    let d = a.to_dense();
    let n = d.rows;
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut s = d[(j, j)].re;
        for k in 0..j {
            s -= l[j * n + k] * l[j * n + k];
        }
        if s <= 0.0 {
            return false;
        }
        l[j * n + j] = s.sqrt();
        for i in j + 1..n {
            let mut t = d[(i, j)].re;
            for k in 0..j {
                t -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = t / l[j * n + j];
        }
    }
    true
}

#[test]
fn zero_data_laplace_system() {
    let p3 = ProblemSpec::new(ProblemId::P3, 0.0).unwrap();
    let sys = build_system(&p3, unit(8), ElementType::Q1).unwrap();
    assert!(cholesky_succeeds(&sys.matrix));
    assert_eq!(sys.matrix, assemble_q1(unit(8)).stiffness);
    // P1's source vanishes identically at kappa^2 = 5 pi^2.
    let p1 = ProblemSpec::new(ProblemId::P1, (5.0f64).sqrt() * std::f64::consts::PI).unwrap();
    let zero_data = build_system(&p1, unit(8), ElementType::Q1).unwrap();
    assert!(zero_data.rhs.iter().all(|v| v.norm() < 1e-14));
}

#[test]
fn unknown_counts() {
    let p1 = ProblemSpec::new(ProblemId::P1, 15.0).unwrap();
    let g = Grid::for_problem(&p1, 0.0625).unwrap();
    assert_eq!(build_system(&p1, g, ElementType::Q1).unwrap().dim(), 225);
    assert_eq!(build_system(&p1, g, ElementType::Q2).unwrap().dim(), 961);
    let p2 = ProblemSpec::new(ProblemId::P2, 5.0).unwrap();
    let g2 = Grid::for_problem(&p2, 0.0625).unwrap();
    assert_eq!(g2.n, 16);
    assert_eq!(g2.h(), 0.125);
    assert_eq!(build_system(&p2, g2, ElementType::Q1).unwrap().dim(), 225);
    assert!(build_system(&p2, g, ElementType::Q1).is_err());
    assert!(Grid::from_label(0.0, 1.0, 0.0).is_err());
    assert_eq!(g.coarsen().unwrap().n, 8);
}

fn l2_errors(p: &ProblemSpec, element: ElementType, ns: &[usize]) -> Vec<f64> {
    ns.iter()
        .map(|&n| {
            let sys = build_system(p, unit(n), element).unwrap();
            let u = sys.solve_direct().unwrap();
            sys.l2_error(&u).unwrap()
        })
        .collect()
}

#[test]
fn q1_converges_at_second_order() {
    let p = ProblemSpec::new(ProblemId::P1, 15.0).unwrap();
    let e = l2_errors(&p, ElementType::Q1, &[32, 64, 128]);
    for w in e.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.6..4.4).contains(&ratio), "errors {e:?}");
    }
}

#[test]
fn q2_converges_at_third_order() {
    let p = ProblemSpec::new(ProblemId::P1, 15.0).unwrap();
    let e = l2_errors(&p, ElementType::Q2, &[8, 16, 32]);
    for w in e.windows(2) {
        let rate = (w[0] / w[1]).log2();
        assert!((2.7..3.5).contains(&rate), "errors {e:?}");
    }
}

#[test]
fn boundary_lifting_recovers_inhomogeneous_data() {
    let p = ProblemSpec::p4(1.0).unwrap();
    let sys = build_system(&p, unit(32), ElementType::Q1).unwrap();
    let u = sys.solve_direct().unwrap();
    let exact = sys.exact().unwrap();
    let ips = sys.layout.interior_per_side();
    let max_adjacent = (0..sys.dim())
        .filter(|&i| {
            let (x, y) = (i % ips, i / ips);
            x == 0 || y == 0 || x + 1 == ips || y + 1 == ips
        })
        .map(|i| (u[i] - exact[i]).norm())
        .fold(0.0, f64::max);
    assert!(max_adjacent < 1e-4, "max error next to the boundary {max_adjacent}");
    let e = l2_errors(&p, ElementType::Q1, &[16, 32]);
    assert!(e[0] / e[1] > 3.5, "errors {e:?}");
}
