use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use toda_core::connection::{
    assemble_connection, assemble_raw, commutator_identity_defect, commutator_norm, curvature, exact_abelian,
    holonomy, marginal_connection, trace_invariants, AlgebraField, Basepoint, ConnectionForm, GridPath,
};
use toda_core::geometry::{Backend, ComplexMetricField, FieldC, Grid};
use toda_core::lie::{CartanSign, CartanType, LieData, Representation};
use toda_core::toda::{newton_solve, NewtonOptions, TodaForm, TodaProblem};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn perturbed(n: usize) -> ComplexMetricField {
    let grid = Grid::periodic(n, Backend::Spectral).unwrap();
    let lambda = grid.field_from_fn(|x, y| c(1.0 + 0.2 * (2.0 * PI * x).sin(), 0.1 * (2.0 * PI * y).cos()));
    let psi = grid.field_from_fn(|x, y| c(0.02 * (2.0 * PI * (x - y)).sin(), 0.01 * (2.0 * PI * y).cos()));
    ComplexMetricField::from_wbar_perturbation(grid, lambda, &psi).unwrap()
}

fn solved(lie: &LieData, metric: ComplexMetricField) -> Option<(TodaProblem, ConnectionForm)> {
    let n = metric.n();
    let q1 = FieldC::constant(n, c(0.2, 0.1));
    let q2 = FieldC::constant(n, c(0.25, -0.05));
    let problem = TodaProblem::new(lie.toda.clone(), metric, q1, q2, TodaForm::Unreduced, false).unwrap();
    let sol = newton_solve(&problem, None, &NewtonOptions::default()).ok()?;
    let conn = assemble_connection(lie, &problem, &sol, Basepoint::Both).unwrap();
    Some((problem, conn))
}

fn max_entry(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

fn random_logs(rng: &mut ChaCha8Rng, grid: &Grid, rank: usize, amp: f64) -> Vec<FieldC> {
    (0..rank)
        .map(|_| {
            let (a, b) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            grid.field_from_fn(|x, y| c(amp * a * (2.0 * PI * x).cos(), amp * b * (2.0 * PI * (x + y)).sin()))
        })
        .collect()
}

#[test]
fn exact_abelian_connection_is_flat_with_trivial_holonomy() {
    let lie = LieData::new(CartanType::A, 2).unwrap();
    let grid = Grid::periodic(32, Backend::Spectral).unwrap();
    let f = grid.field_from_fn(|x, y| c((2.0 * PI * x).sin() * (2.0 * PI * y).cos(), 0.3 * (4.0 * PI * y).sin()));
    let h = lie.basis.unit(lie.basis.cartan(0));
    let conn = exact_abelian(&lie, &grid, &f, &h);
    assert!(curvature(&lie, &grid, &conn).sup_norm() < 1e-11);
    for path in [GridPath::loop_x(32, 5), GridPath::loop_y(32, 9)] {
        let hol = holonomy(&lie, &grid, &conn, &path).unwrap();
        assert!(hol.converged);
        let id = DMatrix::<Complex64>::identity(3, 3);
        assert!(max_entry(&(hol.matrix - id)) < 1e-9);
    }
}

#[test]
fn solved_connection_is_flat_and_loop_holonomies_commute() {
    let lie = LieData::new(CartanType::A, 2).unwrap();
    let (problem, conn) = solved(&lie, perturbed(32)).unwrap();
    let grid = &problem.metric.grid;
    let f = curvature(&lie, grid, &conn);
    assert!(f.sup_norm() < 1e-7, "curvature {:.3e}", f.sup_norm());
    let hx = holonomy(&lie, grid, &conn, &GridPath::loop_x(32, 0)).unwrap();
    let hy = holonomy(&lie, grid, &conn, &GridPath::loop_y(32, 0)).unwrap();
    assert!(hx.converged && hy.converged);
    assert!(commutator_norm(&hx.matrix, &hy.matrix) < 1e-6);
    // sl_n holonomy has unit determinant.
    assert!((hx.determinant - 1.0).norm() < 1e-8);
}

#[test]
fn literal_sign_convention_is_not_flat() {
    let lie = LieData::with_options(CartanType::A, 2, CartanSign::Unsigned, 1.0).unwrap();
    let (problem, conn) = solved(&lie, perturbed(16)).unwrap();
    let f = curvature(&lie, &problem.metric.grid, &conn);
    assert!(f.sup_norm() > 1e-2, "curvature {:.3e}", f.sup_norm());
}

#[test]
fn curvature_grows_linearly_off_solution() {
    let lie = LieData::new(CartanType::A, 2).unwrap();
    let (problem, _) = solved(&lie, perturbed(16)).unwrap();
    let sol = newton_solve(&problem, None, &NewtonOptions::default()).unwrap();
    let grid = problem.metric.grid.clone();
    let xd = lie.basis.unit(lie.basis.highest());
    let dir = grid.field_from_fn(|x, y| c((2.0 * PI * x).cos(), (2.0 * PI * y).sin()));
    let norms: Vec<f64> = [1e-3, 2e-3, 4e-3]
        .iter()
        .map(|&eps| {
            let u: Vec<FieldC> = sol.u.iter().map(|f| f.add(&dir.scale(c(eps, 0.0)))).collect();
            let conn = assemble_raw(&lie, &problem.metric, &u, &[(problem.q1.clone(), xd.clone())], &problem.q2bar)
                .unwrap();
            curvature(&lie, &grid, &conn).sup_norm()
        })
        .collect();
    for w in norms.windows(2) {
        let ratio = w[1] / w[0];
        assert!((ratio - 2.0).abs() < 0.05, "{norms:?}");
    }
}

#[test]
fn commutator_identity_holds_pointwise() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (kind, rank) in [(CartanType::A, 1), (CartanType::A, 2), (CartanType::C, 2), (CartanType::G, 2)] {
        let lie = LieData::new(kind, rank).unwrap();
        let metric = perturbed(8);
        let logs = random_logs(&mut rng, &metric.grid, rank, 0.3);
        let q1 = metric.grid.field_from_fn(|x, _| c(0.3 + 0.1 * x, 0.2));
        let q2 = metric.grid.field_from_fn(|_, y| c(-0.1, 0.4 * y));
        let d = commutator_identity_defect(&lie, &metric, &logs, &q1, &q2).unwrap();
        assert!(d <= 1e-12, "{kind:?}{rank}: {d:.3e}");
    }
}

#[test]
fn zero_connection_has_identity_holonomy() {
    let lie = LieData::new(CartanType::G, 2).unwrap();
    let grid = Grid::periodic(8, Backend::Spectral).unwrap();
    let conn = ConnectionForm::zeros(&lie, 8);
    let hol = holonomy(&lie, &grid, &conn, &GridPath::loop_x(8, 0)).unwrap();
    assert_eq!(hol.matrix.nrows(), 14);
    assert!(max_entry(&(hol.matrix - DMatrix::identity(14, 14))) < 1e-15);
}

#[test]
fn constant_connection_holonomy_is_exponential() {
    let lie = LieData::new(CartanType::A, 2).unwrap();
    let grid = Grid::periodic(8, Backend::Spectral).unwrap();
    let mut d = vec![c(0.0, 0.0); lie.dim()];
    d[lie.basis.cartan(0)] = c(0.7, 0.2);
    d[lie.basis.cartan(1)] = c(-0.3, 0.1);
    d[lie.basis.simple(0)] = c(0.4, 0.0);
    let half: Vec<Complex64> = d.iter().map(|v| v * 0.5).collect();
    let a = AlgebraField::constant(8, &half);
    let conn = ConnectionForm { a_z: a.clone(), a_zb: a, rep: toda_core::lie::RepKind::Defining };
    let hol = holonomy(&lie, &grid, &conn, &GridPath::loop_x(8, 0)).unwrap();
    let rep = Representation::kind_for(&lie.basis, toda_core::lie::RepKind::Defining).unwrap();
    let expected = rep.matrix(&d).exp();
    assert!(max_entry(&(hol.matrix - expected)) < 1e-9);
}

#[test]
fn basepoint_shift_preserves_trace_invariants_and_reversal_inverts() {
    let lie = LieData::new(CartanType::A, 2).unwrap();
    let (problem, conn) = solved(&lie, perturbed(16)).unwrap();
    let grid = &problem.metric.grid;
    let loop0 = GridPath::loop_x(16, 0);
    let h0 = holonomy(&lie, grid, &conn, &loop0).unwrap().matrix;
    let shifted = loop0.translated(0, 5);
    let h1 = holonomy(&lie, grid, &conn, &shifted).unwrap().matrix;
    for (a, b) in trace_invariants(&h0).iter().zip(trace_invariants(&h1)) {
        assert!((a - b).norm() < 1e-7 * (1.0 + a.norm()), "{a} vs {b}");
    }
    let back = holonomy(&lie, grid, &conn, &loop0.reversed()).unwrap().matrix;
    assert!(max_entry(&(h0 * back - DMatrix::identity(3, 3))) < 1e-8);
}

#[test]
fn marginal_connection_antiholomorphic_part_is_independent_of_q() {
    let lie = LieData::new(CartanType::C, 2).unwrap();
    let metric = perturbed(8);
    let a = marginal_connection(&lie, &metric, &FieldC::constant(8, c(0.1, 0.0))).unwrap();
    let b = marginal_connection(&lie, &metric, &FieldC::constant(8, c(0.7, -0.4))).unwrap();
    assert_eq!(a.a_zb, b.a_zb);
    let diff = a.a_z.sub(&b.a_z);
    let top = lie.basis.highest();
    for (k, comp) in diff.comps.iter().enumerate() {
        if k != top {
            assert!(comp.sup_norm() == 0.0);
        }
    }
    assert!((diff.comps[top].sup_norm() - c(-0.6, 0.4).norm()).abs() < 1e-14);
}

#[test]
fn paths_parse() {
    assert_eq!(GridPath::parse("loop:x", 16).unwrap(), GridPath::loop_x(16, 0));
    assert_eq!(GridPath::parse("loop:y@3", 16).unwrap(), GridPath::loop_y(16, 3));
    let p = GridPath::parse("[[0,0],[4,0],[4,2],[0,2],[0,0]]", 16).unwrap();
    assert_eq!(p.points.len(), 5);
    assert!(GridPath::parse("[[0,0],[1,1]]", 16).is_err());
    assert!(GridPath::parse("loop:z", 16).is_err());
    assert!(GridPath::parse("[[0,0]]", 16).is_err());
}
