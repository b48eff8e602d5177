use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use toda_core::geometry::{
    bers_from_quadratic_perturbation, log_identity_defect, perturbation_identity_defect, Backend, ComplexMetricField,
    Deriv, FieldC, Grid, OneFormC, POINCARE_HALF_WIDTH,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// A smooth periodic function that is not band-limited.
fn bump(x: f64, y: f64) -> Complex64 {
    let s = (2.0 * PI * x).sin() + 0.5 * (2.0 * PI * y).cos();
    c(s.exp(), 0.3 * (2.0 * PI * (x - y)).sin())
}

fn perturbed_metric(n: usize, backend: Backend, amp: f64) -> ComplexMetricField {
    let grid = Grid::periodic(n, backend).unwrap();
    let lambda = grid.field_from_fn(|x, y| c(1.0 + 0.2 * (2.0 * PI * x).cos(), 0.1 * (2.0 * PI * y).sin()));
    let psi = grid.field_from_fn(|x, y| {
        c(amp * (2.0 * PI * (x + y)).sin(), amp * 0.5 * (2.0 * PI * x).cos()) / (2.0 * PI)
    });
    ComplexMetricField::from_wbar_perturbation(grid, lambda, &psi).unwrap()
}

#[test]
fn grid_rejects_bad_sizes() {
    assert!(Grid::periodic(6, Backend::Spectral).is_err());
    assert!(Grid::periodic(15, Backend::Spectral).is_err());
    assert!(Grid::periodic(16, Backend::Spectral).is_ok());
}

#[test]
fn derivatives_of_plane_waves() {
    for backend in [Backend::Spectral, Backend::Fd4] {
        let g = Grid::periodic(64, backend).unwrap();
        let f = g.field_from_fn(|x, y| c(0.0, 2.0 * PI * (x + 2.0 * y)).exp());
        let k = 2.0 * PI;
        // ∂_z = ½(∂_x − i∂_y) on exp(i(kx + 2ky)) gives ½(ik + 2k).
        let dz_exact = f.scale(0.5 * c(2.0 * k, k));
        let dzb_exact = f.scale(0.5 * c(-2.0 * k, k));
        let tol = if backend == Backend::Spectral { 1e-10 } else { 1e-3 };
        assert!(g.dz(&f).sub(&dz_exact).sup_norm() < tol * k, "{backend:?}");
        assert!(g.dzb(&f).sub(&dzb_exact).sup_norm() < tol * k, "{backend:?}");
        let lap = g.deriv(&f, Deriv::ZZb).scale(c(4.0, 0.0));
        let lap_exact = f.scale(c(-5.0 * k * k, 0.0));
        assert!(lap.sub(&lap_exact).sup_norm() < tol * k * k * 10.0, "{backend:?}");
        let zz = g.deriv(&f, Deriv::ZZ);
        assert!(zz.sub(&dz_exact.scale(0.5 * c(2.0 * k, k))).sup_norm() < tol * k * k * 10.0);
        let zbzb = g.deriv(&f, Deriv::ZbZb);
        assert!(zbzb.sub(&dzb_exact.scale(0.5 * c(-2.0 * k, k))).sup_norm() < tol * k * k * 10.0);
    }
}

#[test]
fn fd4_converges_at_fourth_order() {
    let errs: Vec<f64> = [16, 32, 64]
        .iter()
        .map(|&n| {
            let g = Grid::periodic(n, Backend::Fd4).unwrap();
            let f = g.field_from_fn(bump);
            let exact = g.with_backend(Backend::Spectral).unwrap().deriv(&f, Deriv::ZZb);
            g.deriv(&f, Deriv::ZZb).sub(&exact).sup_norm()
        })
        .collect();
    let rate1 = (errs[0] / errs[1]).log2();
    let rate2 = (errs[1] / errs[2]).log2();
    assert!(rate1 > 3.5 && rate2 > 3.5, "{errs:?}");
}

#[test]
fn flat_laplacian_of_plane_wave() {
    let metric = ComplexMetricField::flat(Grid::periodic(32, Backend::Spectral).unwrap()).unwrap();
    let f = metric.grid.field_from_fn(|x, _| c(0.0, 2.0 * PI * x).exp());
    let lap = metric.bers_laplacian(&f);
    let exact = f.scale(c(-4.0 * PI * PI, 0.0));
    assert!(lap.sub(&exact).sup_norm() < 1e-9);
    let constant = FieldC::constant(32, c(2.5, -1.0));
    assert!(metric.bers_laplacian(&constant).sup_norm() < 1e-12);
}

#[test]
fn expanded_and_composed_laplacians_agree() {
    let metric = perturbed_metric(32, Backend::Spectral, 0.3);
    let f = metric.grid.field_from_fn(|x, y| c((2.0 * PI * x).sin() * (2.0 * PI * y).cos(), (2.0 * PI * y).sin()));
    let a = metric.bers_laplacian(&f);
    let b = metric.bers_laplacian_composed(&f);
    assert!(a.sub(&b).sup_norm() < 1e-8 * a.sup_norm());
}

#[test]
fn poincare_patch_curvature() {
    let metric = ComplexMetricField::poincare_patch(64, POINCARE_HALF_WIDTH).unwrap();
    let mask = metric.interior_mask();
    let defect = metric.gauss_curvature_defect().unwrap();
    let lap = metric.laplacian_log_lambda().unwrap().map(|v| v - 2.0);
    assert!(lap.sup_norm_masked(&mask) < 1e-6, "{}", lap.sup_norm_masked(&mask));
    assert!(defect.sup_norm_masked(&mask) < 1e-6);

    let scaled = ComplexMetricField::conformal(metric.grid.clone(), metric.lambda.scale(c(3.0, 0.0))).unwrap();
    // Rescaling λ by 3 leaves Δ log λ alone but divides Δ_h by 3.
    let sd = scaled.gauss_curvature_defect().unwrap().map(|v| v - (1.0 / 3.0 - 1.0));
    assert!(sd.sup_norm_masked(&mask) < 1e-6);
}

#[test]
fn flat_curvature_defect_is_minus_one() {
    let metric = ComplexMetricField::flat(Grid::periodic(16, Backend::Spectral).unwrap()).unwrap();
    let d = metric.gauss_curvature_defect().unwrap();
    assert!(d.sub(&FieldC::constant(16, c(-1.0, 0.0))).sup_norm() < 1e-14);
}

#[test]
fn projections_split_forms() {
    let flat = ComplexMetricField::flat(Grid::periodic(16, Backend::Spectral).unwrap()).unwrap();
    let f = flat.grid.field_from_fn(bump);
    let w = OneFormC { dz: f.clone(), dzb: FieldC::zeros(16) };
    let (p1, p2) = flat.project_forms(&w);
    assert_eq!(p1, w);
    assert!(p2.sup_norm() == 0.0);
    let wb = OneFormC { dz: FieldC::zeros(16), dzb: FieldC::constant(16, c(1.0, 0.0)) };
    let (_, p2) = flat.project_forms(&wb);
    assert_eq!(p2, wb);

    let metric = perturbed_metric(16, Backend::Spectral, 0.2);
    let g = metric.grid.field_from_fn(|x, y| bump(y, x));
    let w = OneFormC { dz: f, dzb: g };
    let (p1, p2) = metric.project_forms(&w);
    assert!(p1.add(&p2).sub(&w).sup_norm() < 1e-12);
    assert!(p1.dzb.sup_norm() == 0.0);
    // Π₂ω is a multiple of dw̄ = p dz + m dz̄.
    for k in 0..256 {
        let ratio = p2.dz.data[k] * metric.m.data[k] - p2.dzb.data[k] * metric.p.data[k];
        assert!(ratio.norm() < 1e-12);
    }
}

#[test]
fn del_ops_reassemble_differential() {
    let metric = perturbed_metric(32, Backend::Spectral, 0.2);
    let f = metric.grid.field_from_fn(bump);
    let (d, db) = metric.del_ops(&f);
    let df = OneFormC { dz: metric.grid.dz(&f), dzb: metric.grid.dzb(&f) };
    assert!(d.add(&db).sub(&df).sup_norm() < 1e-12);
    let flat = ComplexMetricField::flat(Grid::periodic(32, Backend::Spectral).unwrap()).unwrap();
    let (d, _) = flat.del_ops(&f);
    assert_eq!(d.dz, flat.grid.dz(&f));
    let (d, db) = metric.del_ops(&FieldC::constant(32, c(1.0, 1.0)));
    assert!(d.sup_norm() < 1e-12 && db.sup_norm() < 1e-12);
}

#[test]
fn laplace_identity_converges_with_fd4() {
    let errs: Vec<f64> = [16, 32, 64]
        .iter()
        .map(|&n| {
            let metric = perturbed_metric(n, Backend::Fd4, 0.3);
            let f = metric.grid.field_from_fn(bump);
            metric.laplace_identity_defect(&f).sup_norm()
        })
        .collect();
    assert!((errs[0] / errs[1]).log2() > 3.5, "{errs:?}");
    assert!((errs[1] / errs[2]).log2() > 3.5, "{errs:?}");
}

#[test]
fn laplace_identity_spectral_is_tight() {
    let metric = perturbed_metric(32, Backend::Spectral, 0.3);
    let f = metric.grid.field_from_fn(|x, y| c((2.0 * PI * x).sin(), (2.0 * PI * (x + y)).cos()));
    assert!(metric.laplace_identity_defect(&f).sup_norm() < 1e-3);
}

#[test]
fn degenerate_charts_are_rejected() {
    let grid = Grid::periodic(8, Backend::Spectral).unwrap();
    let one = FieldC::constant(8, c(1.0, 0.0));
    let big_p = FieldC::constant(8, c(1.0, 0.0));
    assert!(ComplexMetricField::new(grid.clone(), one.clone(), big_p, one.clone()).is_err());
    assert!(ComplexMetricField::new(grid.clone(), one.clone(), FieldC::zeros(8), FieldC::zeros(8)).is_err());
    assert!(ComplexMetricField::new(grid.clone(), FieldC::zeros(8), FieldC::zeros(8), one.clone()).is_err());
    assert!(bers_from_quadratic_perturbation(&grid, &one, &one).is_err());
}

#[test]
fn zero_perturbation_is_identity() {
    let grid = Grid::periodic(16, Backend::Spectral).unwrap();
    let lambda0 = grid.field_from_fn(|x, _| c(2.0 + (2.0 * PI * x).cos(), 0.0));
    let metric = bers_from_quadratic_perturbation(&grid, &lambda0, &FieldC::zeros(16)).unwrap();
    assert_eq!(metric.lambda, lambda0);
    assert!(metric.mubar.sup_norm() == 0.0);
    let wbar = metric.wbar.as_ref().unwrap();
    for iy in 0..16 {
        for ix in 0..16 {
            let (x, y) = grid.coord(ix, iy);
            assert!((wbar.at(ix, iy) - c(x, -y)).norm() < 1e-14);
        }
    }
}

#[test]
fn constant_perturbation_is_linear() {
    let grid = Grid::periodic(16, Backend::Spectral).unwrap();
    let lambda0 = FieldC::constant(16, c(1.5, 0.0));
    let phi0 = FieldC::constant(16, c(0.3, 0.2));
    let metric = bers_from_quadratic_perturbation(&grid, &lambda0, &phi0).unwrap();
    let nu = c(0.3, 0.2) / 1.5;
    assert!(metric.lambda.sub(&lambda0).sup_norm() < 1e-14);
    let wbar = metric.wbar.as_ref().unwrap();
    for iy in 0..16 {
        for ix in 0..16 {
            let (x, y) = grid.coord(ix, iy);
            assert!((wbar.at(ix, iy) - (c(x, -y) + nu * c(x, y))).norm() < 1e-14);
        }
    }
    assert!(perturbation_identity_defect(&lambda0, &phi0, &metric).sup_norm() < 1e-14);
}

#[test]
fn variable_perturbation_satisfies_linear_relation() {
    let grid = Grid::periodic(32, Backend::Spectral).unwrap();
    let lambda0 = grid.field_from_fn(|x, y| c(2.0 + 0.5 * (2.0 * PI * x).cos() * (2.0 * PI * y).sin(), 0.0));
    let phi0 = grid.field_from_fn(|x, y| c(0.2 * (2.0 * PI * y).cos(), 0.1 * (2.0 * PI * x).sin()));
    let metric = bers_from_quadratic_perturbation(&grid, &lambda0, &phi0).unwrap();
    assert!(perturbation_identity_defect(&lambda0, &phi0, &metric).sup_norm() < 1e-12);
    // The derivatives come from an actual coordinate map w̄ = z̄ + c z + ψ.
    let cz = metric.p.mean();
    let psi = metric.wbar.as_ref().unwrap().sub(&grid.field_from_fn(|x, y| c(x, -y) + cz * c(x, y)));
    assert!(grid.dz(&psi).sub(&metric.p.map(|v| v - cz)).sup_norm() < 1e-12);
    assert!(grid.dzb(&psi).sub(&metric.m.map(|v| v - 1.0)).sup_norm() < 1e-12);
    assert!(grid.dz(&metric.m).sub(&grid.dzb(&metric.p)).sup_norm() < 1e-10);
}

#[test]
fn log_identity_holds_for_constant_phi() {
    let grid = Grid::periodic(32, Backend::Spectral).unwrap();
    let lambda0 = grid.field_from_fn(|x, y| c(2.0 + 0.5 * (2.0 * PI * x).cos() * (2.0 * PI * y).sin(), 0.0));
    let phi0 = FieldC::constant(32, c(0.2, 0.1));
    let metric = bers_from_quadratic_perturbation(&grid, &lambda0, &phi0).unwrap();
    let base = ComplexMetricField::conformal(grid.clone(), lambda0).unwrap();
    assert!(log_identity_defect(&base, &metric).unwrap().sup_norm() < 1e-10);
}

#[test]
fn log_identity_defect_tracks_antiholomorphic_derivative() {
    // For nonconstant φ₀ the identity picks up ∂_z̄ φ₀ / λ₀.
    let grid = Grid::periodic(32, Backend::Spectral).unwrap();
    let lambda0 = grid.field_from_fn(|x, _| c(2.0 + 0.3 * (2.0 * PI * x).cos(), 0.0));
    let phi0 = grid.field_from_fn(|x, y| c(0.1 * (2.0 * PI * y).cos(), 0.05 * (2.0 * PI * x).sin()));
    let metric = bers_from_quadratic_perturbation(&grid, &lambda0, &phi0).unwrap();
    let base = ComplexMetricField::conformal(grid.clone(), lambda0.clone()).unwrap();
    let defect = log_identity_defect(&base, &metric).unwrap();
    let predicted = grid.dzb(&phi0).div(&lambda0);
    assert!(defect.sub(&predicted).sup_norm() < 1e-10);
    assert!(defect.sup_norm() > 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn laplacian_is_linear(a in -2.0f64..2.0, b in -2.0f64..2.0, kx in 1i32..4, ky in 1i32..4) {
        let metric = perturbed_metric(16, Backend::Spectral, 0.2);
        let f = metric.grid.field_from_fn(|x, y| c(0.0, 2.0 * PI * (kx as f64 * x + ky as f64 * y)).exp());
        let g = metric.grid.field_from_fn(bump);
        let s = c(a, b);
        let lhs = metric.bers_laplacian(&f.scale(s).add(&g));
        let rhs = metric.bers_laplacian(&f).scale(s).add(&metric.bers_laplacian(&g));
        prop_assert!(lhs.sub(&rhs).sup_norm() < 1e-9 * (1.0 + rhs.sup_norm()));
        let k = metric.bers_laplacian(&FieldC::constant(16, s));
        prop_assert!(k.sup_norm() < 1e-10);
    }
}
