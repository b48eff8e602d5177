//! Complex Goldman pairing on variations of flat connections.
//!
//! A variation `Ȧ = Ȧ_z dz + Ȧ_z̄ dz̄` pairs with `Ḃ` through the density
//! `ν(Ȧ_z, Ḃ_z̄) − ν(Ȧ_z̄, Ḃ_z)` of `dz∧dz̄`; integrals use
//! `dz∧dz̄ = −2i dx∧dy` and the rectangle rule on the periodic chart.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::connection::{assemble_connection, AlgebraField, Basepoint, ConnectionForm};
use crate::error::{Error, Result};
use crate::geometry::{ComplexMetricField, FieldC};
use crate::lie::{LieData, HIGGS_SCALE};
use crate::toda::{newton_solve, u_minus_delta, NewtonOptions, TodaProblem};

/// `dz∧dz̄` in units of `dx∧dy`.
pub const DZ_WEDGE_DZB: Complex64 = Complex64 { re: 0.0, im: -2.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariationKind {
    Q1Direction,
    Q2Direction,
    CartanDirection,
    Raw,
}

/// A Lie-algebra valued 1-form tangent to the space of connections.
#[derive(Debug, Clone, PartialEq)]
pub struct Variation {
    pub a_z: AlgebraField,
    pub a_zb: AlgebraField,
    pub kind: VariationKind,
}

impl Variation {
    pub fn raw(a_z: AlgebraField, a_zb: AlgebraField) -> Self {
        Variation { a_z, a_zb, kind: VariationKind::Raw }
    }

    pub fn n(&self) -> usize {
        self.a_z.n
    }

    pub fn sup_norm(&self) -> f64 {
        self.a_z.sup_norm().max(self.a_zb.sup_norm())
    }

    pub fn is_finite(&self) -> bool {
        self.a_z.comps.iter().chain(&self.a_zb.comps).all(|f| f.is_finite())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairingReport {
    pub value: Complex64,
    /// Sup norm of the `dz∧dz̄` density.
    pub integrand_sup: f64,
    pub rule: String,
}

fn check_shapes(lie: &LieData, a: &Variation, b: &Variation) -> Result<()> {
    let dims = [a.a_z.dim(), a.a_zb.dim(), b.a_z.dim(), b.a_zb.dim()];
    if a.n() != b.n() || a.a_zb.n != a.n() || b.a_zb.n != b.n() {
        return Err(Error::Shape(format!("variations live on grids of size {} and {}", a.n(), b.n())));
    }
    if dims.iter().any(|&d| d != lie.dim()) {
        return Err(Error::Shape(format!("variation dimensions {dims:?} do not match the algebra ({})", lie.dim())));
    }
    Ok(())
}

/// Node-wise `ν(Ȧ∧Ḃ)` as a multiple of `dz∧dz̄`.
pub fn pairing_density(lie: &LieData, a: &Variation, b: &Variation) -> Result<FieldC> {
    check_shapes(lie, a, b)?;
    let n = a.n();
    let mut out = FieldC::zeros(n);
    for k in 0..n * n {
        let d1 = lie.killing_form(&a.a_z.at(k), &b.a_zb.at(k));
        let d2 = lie.killing_form(&a.a_zb.at(k), &b.a_z.at(k));
        out.data[k] = d1 - d2;
    }
    Ok(out)
}

/// `ω(Ȧ, Ḃ) = ∫ ν(Ȧ∧Ḃ)` over the chart.
pub fn pairing(lie: &LieData, metric: &ComplexMetricField, a: &Variation, b: &Variation) -> Result<PairingReport> {
    if a.n() != metric.n() {
        return Err(Error::Shape(format!("variation size {} does not match the chart size {}", a.n(), metric.n())));
    }
    let density = pairing_density(lie, a, b)?;
    let value = density.data.iter().sum::<Complex64>() * DZ_WEDGE_DZB * metric.grid.cell_area();
    Ok(PairingReport { value, integrand_sup: density.sup_norm(), rule: "rectangle".into() })
}

/// `q̇₁ x_δ ⊗ dz`.
pub fn variation_q1(lie: &LieData, q1_dot: &FieldC) -> Variation {
    let dim = lie.dim();
    let a_z = AlgebraField::from_scalar(q1_dot, &lie.basis.unit(lie.basis.highest()));
    Variation { a_z, a_zb: AlgebraField::zeros(q1_dot.n, dim), kind: VariationKind::Q1Direction }
}

/// Derivative of the `x_{−δ}` Higgs term along `q̄₂`:
/// `−κ λ^{1−d} U_{−δ} q̇̄₂ x_{−δ} ⊗ dw̄` with `U` held fixed.
pub fn variation_q2(lie: &LieData, metric: &ComplexMetricField, log_u: &[FieldC], q2bar_dot: &FieldC) -> Result<Variation> {
    if log_u.len() != lie.rank() || q2bar_dot.n != metric.n() {
        return Err(Error::Shape("variation_q2 needs one log-unknown per simple root on the chart grid".into()));
    }
    let td = &lie.toda;
    let weight = metric.log_lambda()?.map(|l| ((1.0 - td.d as f64) * l).exp());
    let coeff = weight.mul(&u_minus_delta(td, log_u)).mul(q2bar_dot).scale(Complex64::new(-HIGGS_SCALE, 0.0));
    let x = lie.basis.unit(lie.basis.neg_highest());
    Ok(Variation {
        a_z: AlgebraField::from_scalar(&coeff.mul(&metric.p), &x),
        a_zb: AlgebraField::from_scalar(&coeff.mul(&metric.m), &x),
        kind: VariationKind::Q2Direction,
    })
}

/// `Σ f_j h_j ⊗ dz`.
pub fn variation_cartan(lie: &LieData, coeffs: &[FieldC]) -> Result<Variation> {
    if coeffs.len() != lie.rank() {
        return Err(Error::Shape(format!("expected {} Cartan coefficients, got {}", lie.rank(), coeffs.len())));
    }
    let n = coeffs[0].n;
    let mut a_z = AlgebraField::zeros(n, lie.dim());
    for (j, f) in coeffs.iter().enumerate() {
        a_z.comps[lie.basis.cartan(j)] = f.clone();
    }
    Ok(Variation { a_z, a_zb: AlgebraField::zeros(n, lie.dim()), kind: VariationKind::CartanDirection })
}

/// `ν(x_δ, x_{−δ})` in the configured normalization.
pub fn delta_pairing(lie: &LieData) -> Complex64 {
    let cb = &lie.basis;
    lie.killing_form(&cb.unit(cb.highest()), &cb.unit(cb.neg_highest()))
}

/// `−κ U_{−δ} ν(x_δ, x_{−δ}) ∫ q̇₁ q̇̄₂ λ^{1−d} dz∧dz̄` on a conformal chart.
pub fn fiber_pairing_closed_form(
    lie: &LieData,
    metric: &ComplexMetricField,
    q1_dot: &FieldC,
    q2bar_dot: &FieldC,
    u_minus_delta: Complex64,
) -> Result<Complex64> {
    if !metric.is_conformal(0.0) {
        return Err(Error::Precondition("the fiber pairing formula needs a conformal chart (μ = 0)".into()));
    }
    if q1_dot.n != metric.n() || q2bar_dot.n != metric.n() {
        return Err(Error::Shape("fiber pairing inputs must live on the chart grid".into()));
    }
    let d = lie.toda.d as f64;
    let integrand = metric.log_lambda()?.map(|l| ((1.0 - d) * l).exp()).mul(q1_dot).mul(q2bar_dot);
    let integral = integrand.data.iter().sum::<Complex64>() * metric.grid.cell_area() * DZ_WEDGE_DZB;
    Ok(-HIGGS_SCALE * u_minus_delta * delta_pairing(lie) * integral)
}

/// The fiber quadratic form `−2i ω(q̇, conj q̇)` at a point with constant `U`.
pub fn fiber_form(lie: &LieData, metric: &ComplexMetricField, q_dot: &FieldC, log_u: &[FieldC]) -> Result<Complex64> {
    let a = variation_q1(lie, q_dot);
    let b = variation_q2(lie, metric, log_u, &q_dot.conj())?;
    Ok(Complex64::new(0.0, -2.0) * pairing(lie, metric, &a, &b)?.value)
}

fn rebuild(base: &TodaProblem, q1: FieldC, q2bar: FieldC) -> Result<TodaProblem> {
    TodaProblem::new(base.data.clone(), base.metric.clone(), q1, q2bar, base.form, base.symmetry)
}

fn solve_and_assemble(lie: &LieData, problem: &TodaProblem, start: &[FieldC], opts: &NewtonOptions) -> Result<ConnectionForm> {
    let guess = problem.restrict(start);
    let sol = newton_solve(problem, Some(&guess), opts)?;
    assemble_connection(lie, problem, &sol, Basepoint::Both)
}

/// Central difference of assembled connections along a path of Toda
/// solutions `(q₁ + t q̇₁, q̄₂ + t q̇̄₂)`. `base_u` is the solution at `t = 0`
/// (full fields, one per simple root) and seeds both neighbouring solves.
pub fn family_variation(
    lie: &LieData,
    base: &TodaProblem,
    base_u: &[FieldC],
    q1_dot: &FieldC,
    q2bar_dot: &FieldC,
    step: f64,
    opts: &NewtonOptions,
) -> Result<Variation> {
    if !(step > 0.0) {
        return Err(Error::Config("finite-difference step must be positive".into()));
    }
    if base_u.len() != base.rank() {
        return Err(Error::Shape(format!("expected {} base fields, got {}", base.rank(), base_u.len())));
    }
    let h = Complex64::new(step, 0.0);
    let plus = rebuild(base, base.q1.add(&q1_dot.scale(h)), base.q2bar.add(&q2bar_dot.scale(h)))?;
    let minus = rebuild(base, base.q1.sub(&q1_dot.scale(h)), base.q2bar.sub(&q2bar_dot.scale(h)))?;
    let cp = solve_and_assemble(lie, &plus, base_u, opts)?;
    let cm = solve_and_assemble(lie, &minus, base_u, opts)?;
    let diff = cp.sub(&cm);
    let s = Complex64::new(0.5 / step, 0.0);
    let kind = match (q1_dot.sup_norm() == 0.0, q2bar_dot.sup_norm() == 0.0) {
        (true, false) => VariationKind::Q2Direction,
        (false, true) => VariationKind::Q1Direction,
        _ => VariationKind::Raw,
    };
    Ok(Variation { a_z: diff.a_z.scale(s), a_zb: diff.a_zb.scale(s), kind })
}

/// Which side of the product parametrization is held fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LagrangianSide {
    /// `(c₁, q₁)` frozen, `q̄₂` moves.
    FixLeft,
    /// `(c̄₂, q̄₂)` frozen, `q₁` moves.
    FixRight,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LagrangianReport {
    pub side: LagrangianSide,
    /// Sup of the pointwise `ν(Ȧ∧Ḃ)` density.
    pub max_density: f64,
    /// `sup|Ȧ| · sup|Ḃ|`, the natural scale of the density.
    pub scale: f64,
}

/// The conjugate point `(c₂, q₂, c̄₁, q̄₁)` on a conformal chart with real `λ`.
pub fn conjugate_problem(problem: &TodaProblem) -> Result<TodaProblem> {
    let metric = &problem.metric;
    if !metric.is_conformal(0.0) || metric.lambda.max_imag() > 0.0 {
        return Err(Error::Precondition("conjugation needs a conformal chart with real λ".into()));
    }
    rebuild(problem, problem.q2bar.conj(), problem.q1.conj())
}

/// Pointwise Goldman density of two same-side variations.
///
/// Fixing the left side varies `q̄₂` along `dir_a` and `dir_b`. Fixing the
/// right side varies `q₁`; the check then runs on the conjugate point, where
/// those directions become left-fixed variations of `q̄₁`.
pub fn lagrangian_check(
    lie: &LieData,
    base: &TodaProblem,
    side: LagrangianSide,
    dir_a: &FieldC,
    dir_b: &FieldC,
    step: f64,
    opts: &NewtonOptions,
) -> Result<LagrangianReport> {
    let zero = FieldC::zeros(base.n());
    let (problem, da, db) = match side {
        LagrangianSide::FixLeft => (base.clone(), dir_a.clone(), dir_b.clone()),
        LagrangianSide::FixRight => (conjugate_problem(base)?, dir_a.conj(), dir_b.conj()),
    };
    let u = newton_solve(&problem, None, opts)?.u;
    let a = family_variation(lie, &problem, &u, &zero, &da, step, opts)?;
    let b = family_variation(lie, &problem, &u, &zero, &db, step, opts)?;
    let density = pairing_density(lie, &a, &b)?;
    Ok(LagrangianReport { side, max_density: density.sup_norm(), scale: a.sup_norm() * b.sup_norm() })
}
