use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ComplexMetricField, FieldC};
use crate::lie::{LieData, RepKind, HIGGS_SCALE};
use crate::toda::{u_minus_delta, TodaProblem, TodaSolution};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// A Lie-algebra valued field, one coefficient field per basis element.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraField {
    pub n: usize,
    pub comps: Vec<FieldC>,
}

impl AlgebraField {
    pub fn zeros(n: usize, dim: usize) -> Self {
        AlgebraField { n, comps: vec![FieldC::zeros(n); dim] }
    }

    /// `f ⊗ X` for a scalar field `f` and a constant element `X`.
    pub fn from_scalar(f: &FieldC, x: &[Complex64]) -> Self {
        AlgebraField {
            n: f.n,
            comps: x.iter().map(|xi| if *xi == ZERO { FieldC::zeros(f.n) } else { f.scale(*xi) }).collect(),
        }
    }

    pub fn constant(n: usize, x: &[Complex64]) -> Self {
        Self::from_scalar(&FieldC::constant(n, Complex64::new(1.0, 0.0)), x)
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    /// Coefficient vector at node `k`.
    pub fn at(&self, k: usize) -> Vec<Complex64> {
        self.comps.iter().map(|f| f.data[k]).collect()
    }

    pub fn set(&mut self, k: usize, x: &[Complex64]) {
        for (f, v) in self.comps.iter_mut().zip(x) {
            f.data[k] = *v;
        }
    }

    pub fn add(&self, other: &AlgebraField) -> AlgebraField {
        AlgebraField { n: self.n, comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a.add(b)).collect() }
    }

    pub fn sub(&self, other: &AlgebraField) -> AlgebraField {
        AlgebraField { n: self.n, comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a.sub(b)).collect() }
    }

    /// Multiply every coefficient by a scalar field.
    pub fn mul_scalar(&self, f: &FieldC) -> AlgebraField {
        AlgebraField { n: self.n, comps: self.comps.iter().map(|c| c.mul(f)).collect() }
    }

    pub fn scale(&self, s: Complex64) -> AlgebraField {
        AlgebraField { n: self.n, comps: self.comps.iter().map(|c| c.scale(s)).collect() }
    }

    pub fn map_comps(&self, f: impl Fn(&FieldC) -> FieldC) -> AlgebraField {
        AlgebraField { n: self.n, comps: self.comps.iter().map(f).collect() }
    }

    /// Largest coefficient magnitude.
    pub fn sup_norm(&self) -> f64 {
        self.comps.iter().map(|f| f.sup_norm()).fold(0.0, f64::max)
    }

    /// Node-wise bracket.
    pub fn bracket(&self, other: &AlgebraField, lie: &LieData) -> AlgebraField {
        let nn = self.n * self.n;
        let dim = self.dim();
        let mut out = AlgebraField::zeros(self.n, dim);
        let mut buf = vec![ZERO; dim];
        for k in 0..nn {
            lie.basis.bracket_into(&self.at(k), &other.at(k), &mut buf);
            out.set(k, &buf);
        }
        out
    }
}

/// The connection `d + A_z dz + A_z̄ dz̄`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionForm {
    pub a_z: AlgebraField,
    pub a_zb: AlgebraField,
    pub rep: RepKind,
}

impl ConnectionForm {
    pub fn n(&self) -> usize {
        self.a_z.n
    }

    pub fn zeros(lie: &LieData, n: usize) -> Self {
        let rep = default_rep_kind(lie);
        ConnectionForm { a_z: AlgebraField::zeros(n, lie.dim()), a_zb: AlgebraField::zeros(n, lie.dim()), rep }
    }

    pub fn sub(&self, other: &ConnectionForm) -> ConnectionForm {
        ConnectionForm { a_z: self.a_z.sub(&other.a_z), a_zb: self.a_zb.sub(&other.a_zb), rep: self.rep }
    }

    pub fn sup_norm(&self) -> f64 {
        self.a_z.sup_norm().max(self.a_zb.sup_norm())
    }
}

pub fn default_rep_kind(lie: &LieData) -> RepKind {
    use crate::lie::CartanType;
    match lie.basis.roots.cartan_type {
        CartanType::A | CartanType::C => RepKind::Defining,
        _ => RepKind::Adjoint,
    }
}

/// Which differentials enter the connection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basepoint {
    /// `(q₁, q̄₂)`.
    #[default]
    Both,
    /// `(q, 0)`.
    Left,
    /// `(0, q̄)`.
    Right,
}

/// Cartan part `a` of `A_z`, fixed by `α(a) = −(∂_z − μ̄ ∂_z̄) log(λ U_α)`.
pub fn cartan_part(lie: &LieData, metric: &ComplexMetricField, log_u: &[FieldC]) -> Result<AlgebraField> {
    let l = lie.rank();
    let n = metric.n();
    let log_lambda = metric.log_lambda()?;
    let g: Vec<FieldC> = log_u.iter().map(|u| metric.del_coefficient(&log_lambda.add(u))).collect();
    let cm = DMatrix::from_fn(l, l, |i, j| lie.basis.roots.cartan_matrix[i][j] as f64);
    let inv = cm
        .try_inverse()
        .ok_or_else(|| Error::Internal("Cartan matrix is singular".into()))?
        .map(|v| Complex64::new(v, 0.0));
    let mut a = AlgebraField::zeros(n, lie.dim());
    for k in 0..n * n {
        let rhs = DVector::from_iterator(l, g.iter().map(|f| -f.data[k]));
        let coeff = &inv * rhs;
        for j in 0..l {
            a.comps[lie.basis.cartan(j)].data[k] = coeff[j];
        }
    }
    Ok(a)
}

/// The `dw̄` coefficient
/// `Ψ = κ (Σ r_α^{1/2} λ U_α x_α − λ^{1−d} U_{−δ} q̄₂ x_{−δ})`.
pub fn higgs_bar(lie: &LieData, metric: &ComplexMetricField, log_u: &[FieldC], q2bar: &FieldC) -> Result<AlgebraField> {
    let td = &lie.toda;
    let cb = &lie.basis;
    let n = metric.n();
    let kappa = Complex64::new(HIGGS_SCALE, 0.0);
    let mut psi = AlgebraField::zeros(n, lie.dim());
    for i in 0..td.rank {
        let coeff = metric.lambda.zip(&log_u[i], |lam, u| kappa * td.r[i].sqrt() * lam * td.s[i] * u.exp());
        psi.comps[cb.simple(i)] = psi.comps[cb.simple(i)].add(&coeff);
    }
    if q2bar.sup_norm() > 0.0 {
        let umd = u_minus_delta(td, log_u);
        let log_lambda = metric.log_lambda()?;
        let d = td.d as f64;
        let weight = log_lambda.map(|l| ((1.0 - d) * l).exp());
        let coeff = weight.mul(&umd).mul(q2bar).scale(-kappa);
        let k = cb.neg_highest();
        psi.comps[k] = psi.comps[k].add(&coeff);
    }
    Ok(psi)
}

/// Assemble `A = a + φ₁ + Ψ dw̄` with `φ₁ = ẽ + Σ f_i X_i`.
///
/// `log_u` holds `u_α` per simple root (so `U_α = s_α e^{u_α}`), `holomorphic`
/// lists the extra `dz` terms of `φ₁`.
pub fn assemble_raw(
    lie: &LieData,
    metric: &ComplexMetricField,
    log_u: &[FieldC],
    holomorphic: &[(FieldC, Vec<Complex64>)],
    q2bar: &FieldC,
) -> Result<ConnectionForm> {
    if log_u.len() != lie.rank() {
        return Err(Error::Shape(format!("expected {} log-unknown fields, got {}", lie.rank(), log_u.len())));
    }
    let n = metric.n();
    let a = cartan_part(lie, metric, log_u)?;
    let mut phi1 = AlgebraField::constant(n, &lie.triple.e_tilde);
    for (f, x) in holomorphic {
        phi1 = phi1.add(&AlgebraField::from_scalar(f, x));
    }
    let psi = higgs_bar(lie, metric, log_u, q2bar)?;
    let a_z = a.add(&phi1).add(&psi.mul_scalar(&metric.p));
    let a_zb = psi.mul_scalar(&metric.m);
    Ok(ConnectionForm { a_z, a_zb, rep: default_rep_kind(lie) })
}

/// Connection of a Toda solution at the requested basepoint.
pub fn assemble_connection(
    lie: &LieData,
    problem: &TodaProblem,
    solution: &TodaSolution,
    basepoint: Basepoint,
) -> Result<ConnectionForm> {
    let n = problem.n();
    let zero = FieldC::zeros(n);
    let (q1, q2) = match basepoint {
        Basepoint::Both => (&problem.q1, &problem.q2bar),
        Basepoint::Left => (&problem.q1, &zero),
        Basepoint::Right => (&zero, &problem.q2bar),
    };
    let xd = lie.basis.unit(lie.basis.highest());
    assemble_raw(lie, &problem.metric, &solution.u, &[(q1.clone(), xd)], q2)
}

/// Connection at a marginal basepoint `(q, 0)` with constant `U` (the
/// reduced constant solution); `U` does not depend on `q` there.
pub fn marginal_connection(lie: &LieData, metric: &ComplexMetricField, q: &FieldC) -> Result<ConnectionForm> {
    let n = metric.n();
    let log_u = vec![FieldC::zeros(n); lie.rank()];
    let xd = lie.basis.unit(lie.basis.highest());
    assemble_raw(lie, metric, &log_u, &[(q.clone(), xd)], &FieldC::zeros(n))
}

/// Node-wise defect of `[φ₁, Ψ] = −κ λ (Σ r_α U_α h_α − q₁q̄₂ λ^{−d} U_{−δ} h_δ)`.
pub fn commutator_identity_defect(
    lie: &LieData,
    metric: &ComplexMetricField,
    log_u: &[FieldC],
    q1: &FieldC,
    q2bar: &FieldC,
) -> Result<f64> {
    let n = metric.n();
    let td = &lie.toda;
    let cb = &lie.basis;
    let xd = cb.unit(cb.highest());
    let phi1 = AlgebraField::constant(n, &lie.triple.e_tilde).add(&AlgebraField::from_scalar(q1, &xd));
    let psi = higgs_bar(lie, metric, log_u, q2bar)?;
    let lhs = phi1.bracket(&psi, lie);
    let umd = u_minus_delta(td, log_u);
    let log_lambda = metric.log_lambda()?;
    let kappa = HIGGS_SCALE;
    let mut worst: f64 = 0.0;
    for k in 0..n * n {
        let lam = metric.lambda.data[k];
        let mut expected = vec![ZERO; lie.dim()];
        for i in 0..td.rank {
            expected[cb.cartan(i)] += -kappa * lam * td.r[i] * td.s[i] * log_u[i].data[k].exp();
        }
        let q = q1.data[k] * q2bar.data[k] * (-(td.d as f64) * log_lambda.data[k]).exp();
        for (j, hj) in td.h_delta.iter().enumerate() {
            expected[cb.cartan(j)] += kappa * lam * q * umd.data[k] * *hj as f64;
        }
        let got = lhs.at(k);
        let d = got.iter().zip(&expected).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        worst = worst.max(d);
    }
    Ok(worst)
}
