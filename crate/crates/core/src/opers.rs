//! Oper connections on the marginal locus and the relation between the
//! connection of a perturbed chart and the Beilinson–Drinfeld family.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::connection::{assemble_raw, AlgebraField, ConnectionForm};
use crate::error::{Error, Result};
use crate::geometry::{bers_from_quadratic_perturbation, log_identity_defect, Backend, ComplexMetricField, FieldC, Grid};
use crate::goldman::{Variation, VariationKind};
use crate::lie::{LieData, HIGGS_SCALE};
use crate::toda::u_fields;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// A connection together with the Borel reduction `𝔟 = ⊕_{m≥0} 𝔤_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperConnection {
    pub conn: ConnectionForm,
    /// Lowest grade of the Borel subalgebra.
    pub borel_grade: i64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RelativePositionReport {
    /// `|coefficient of x_{−α}|` in `A_z` for each node (row) and simple root.
    pub magnitudes: Vec<Vec<f64>>,
    /// Minimum over nodes for each simple root.
    pub min_per_root: Vec<f64>,
    /// Nodes where some coefficient falls below the threshold.
    pub failing_nodes: usize,
    pub pass: bool,
}

fn zero_logs(lie: &LieData, n: usize) -> Vec<FieldC> {
    vec![FieldC::zeros(n); lie.rank()]
}

/// Connection at `(q, 0)` with the constant solution: `a + ẽ + Σ q_i e_i` in
/// `dz` and the `𝔤₁` Higgs term in `dw̄`.
fn marginal_with_differentials(lie: &LieData, metric: &ComplexMetricField, q: &[FieldC]) -> Result<ConnectionForm> {
    if q.len() != lie.rank() {
        return Err(Error::Shape(format!("expected {} differentials, got {}", lie.rank(), q.len())));
    }
    if q.iter().any(|f| f.n != metric.n()) {
        return Err(Error::Shape("differentials must live on the chart grid".into()));
    }
    let n = metric.n();
    let slots: Vec<(FieldC, Vec<Complex64>)> =
        q.iter().zip(&lie.hw.vectors).map(|(f, e)| (f.clone(), e.clone())).collect();
    assemble_raw(lie, metric, &zero_logs(lie, n), &slots, &FieldC::zeros(n))
}

/// Beilinson–Drinfeld connection `A_q = A_{P_K} − σ̂(φ₀) + φ₀ + Σ q_i e_i` on a
/// conformal chart with real `λ`, the term `−σ̂(φ₀)` being the `𝔤₁` Higgs
/// field of the constant real solution.
pub fn bd_oper_connection(lie: &LieData, metric: &ComplexMetricField, q: &[FieldC]) -> Result<OperConnection> {
    if !metric.is_conformal(0.0) || metric.lambda.max_imag() > 0.0 {
        return Err(Error::Precondition("the oper construction needs a conformal chart with real λ".into()));
    }
    if lie.hw.vectors.len() != lie.rank() {
        return Err(Error::Unsupported(format!("no highest-weight vectors for {:?}", lie.basis.roots.cartan_type)));
    }
    Ok(OperConnection { conn: marginal_with_differentials(lie, metric, q)?, borel_grade: 0 })
}

/// Nonvanishing of every `𝔤_{−α}` coefficient of `A_z`, against the
/// threshold `1e−10 (|A_z| + 1)` at each node.
pub fn relative_position_check(lie: &LieData, oper: &OperConnection) -> RelativePositionReport {
    let cb = &lie.basis;
    let a_z = &oper.conn.a_z;
    let nn = a_z.n * a_z.n;
    let rank = lie.rank();
    let mut magnitudes = Vec::with_capacity(nn);
    let mut min_per_root = vec![f64::INFINITY; rank];
    let mut failing_nodes = 0;
    for k in 0..nn {
        let scale = a_z.comps.iter().map(|f| f.data[k].norm()).fold(0.0, f64::max);
        let threshold = 1e-10 * (scale + 1.0);
        let row: Vec<f64> = (0..rank).map(|i| a_z.comps[cb.neg_simple(i)].data[k].norm()).collect();
        if row.iter().any(|v| *v <= threshold) {
            failing_nodes += 1;
        }
        for (m, v) in min_per_root.iter_mut().zip(&row) {
            *m = m.min(*v);
        }
        magnitudes.push(row);
    }
    RelativePositionReport { magnitudes, min_per_root, failing_nodes, pass: failing_nodes == 0 }
}

/// `τ = κ Σ U_α r_α^{1/2} x_α ⊗ φ dz`, the `𝔤₁` shift produced by adding `φ dz²`
/// to the metric.
pub fn tau_correction(lie: &LieData, phi: &FieldC, log_u: &[FieldC]) -> Result<Variation> {
    if log_u.len() != lie.rank() {
        return Err(Error::Shape(format!("expected {} log-unknowns, got {}", lie.rank(), log_u.len())));
    }
    let n = phi.n;
    let td = &lie.toda;
    let big_u = u_fields(td, log_u);
    let mut a_z = AlgebraField::zeros(n, lie.dim());
    for i in 0..lie.rank() {
        let coeff = big_u[i].mul(phi).scale(Complex64::new(HIGGS_SCALE * td.r[i].sqrt(), 0.0));
        a_z.comps[lie.basis.simple(i)] = coeff;
    }
    Ok(Variation { a_z, a_zb: AlgebraField::zeros(n, lie.dim()), kind: VariationKind::Raw })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RelationReport {
    /// `sup |A − (A_q + τ)|` over both components.
    pub discrepancy: f64,
    /// `sup |A − A_{q'}|` with the quadratic slot shifted by `κ U s φ₀`
    /// (`e = s e₁`), when all `U_α` agree and the first exponent is quadratic.
    pub collapse_discrepancy: Option<f64>,
    /// Sup of `∂_{J₀} log λ₀ − ∂_J log λ`.
    pub log_identity_defect: f64,
}

/// `s` with `e = s e₁` when the principal nilpotent is a multiple of the
/// quadratic slot vector.
fn e_over_first_slot(lie: &LieData) -> Option<Complex64> {
    let e = &lie.triple.e;
    let e1 = lie.hw.vectors.first()?;
    let k = e1.iter().position(|v| v.norm() > 0.0)?;
    let s = e[k] / e1[k];
    e.iter().zip(e1).all(|(a, b)| (a - s * b).norm() <= 1e-14).then_some(s)
}

fn form_distance(a: &ConnectionForm, b: &ConnectionForm) -> f64 {
    a.sub(b).sup_norm()
}

/// Compare the connection of `λ₀|dz|² + φ₀ dz²` at `(q, 0)` with the
/// Beilinson–Drinfeld connection `A_q` of `λ₀` plus `τ(φ₀)`.
pub fn connection_relation_check(lie: &LieData, grid: &Grid, lambda0: &FieldC, phi0: &FieldC, q: &[FieldC]) -> Result<RelationReport> {
    let metric0 = ComplexMetricField::conformal(grid.clone(), lambda0.clone())?;
    let metric = bers_from_quadratic_perturbation(grid, lambda0, phi0).map_err(|e| match e {
        Error::DegenerateMetric(m) => Error::Precondition(format!("perturbed metric is not admissible: {m}")),
        other => other,
    })?;
    let n = grid.n;
    let logs = zero_logs(lie, n);
    let full = marginal_with_differentials(lie, &metric, q)?;
    let a_q = bd_oper_connection(lie, &metric0, q)?.conn;
    let tau = tau_correction(lie, phi0, &logs)?;
    let shifted = ConnectionForm { a_z: a_q.a_z.add(&tau.a_z), a_zb: a_q.a_zb.add(&tau.a_zb), rep: a_q.rep };
    let discrepancy = form_distance(&full, &shifted);

    let big_u = u_fields(&lie.toda, &logs);
    let uniform = big_u.iter().all(|f| f.sub(&big_u[0]).sup_norm() == 0.0);
    let quadratic = lie.hw.exponents.first() == Some(&2);
    let collapse_discrepancy = if let (true, true, Some(ratio)) = (uniform, quadratic, e_over_first_slot(lie)) {
        let mut q_shift = q.to_vec();
        q_shift[0] = q_shift[0].add(&phi0.mul(&big_u[0]).scale(ratio * HIGGS_SCALE));
        let a_shift = bd_oper_connection(lie, &metric0, &q_shift)?.conn;
        Some(form_distance(&full, &a_shift))
    } else {
        None
    };
    let log_identity_defect = log_identity_defect(&metric0, &metric)?.sup_norm();
    Ok(RelationReport { discrepancy, collapse_discrepancy, log_identity_defect })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogIdentityReport {
    /// Sup of `∂_{J₀} log λ₀ − ∂_J log λ`.
    pub defect: f64,
    /// Sup of the defect minus its exact non-holomorphic part `∂_z̄φ₀/λ₀`,
    /// which isolates the discretization error.
    pub discretization_defect: f64,
}

/// Pointwise comparison of the `(1,0)` log-derivatives of `λ₀` and of the
/// metric derived from `λ₀|dz|² + φ₀ dz²`.
pub fn log_identity_check(grid: &Grid, lambda0: &FieldC, phi0: &FieldC) -> Result<LogIdentityReport> {
    let metric0 = ComplexMetricField::conformal(grid.clone(), lambda0.clone())?;
    let metric = bers_from_quadratic_perturbation(grid, lambda0, phi0).map_err(|e| match e {
        Error::DegenerateMetric(m) => Error::Precondition(format!("perturbed metric is not admissible: {m}")),
        other => other,
    })?;
    let defect = log_identity_defect(&metric0, &metric)?;
    let spectral = grid.with_backend(Backend::Spectral)?;
    let exact = spectral.dzb(phi0).div(lambda0);
    Ok(LogIdentityReport { defect: defect.sup_norm(), discretization_defect: defect.sub(&exact).sup_norm() })
}

/// Grades (heights) carried by the nonzero `dz` coefficients of a connection.
pub fn grades_present(lie: &LieData, conn: &ConnectionForm, tol: f64) -> Vec<i64> {
    let mut grades: Vec<i64> = conn
        .a_z
        .comps
        .iter()
        .enumerate()
        .filter(|(_, f)| f.sup_norm() > tol)
        .map(|(k, _)| lie.basis.grade(k))
        .collect();
    grades.sort_unstable();
    grades.dedup();
    grades
}

/// Copy of `oper` with the `𝔤_{−α_i}` coefficient of `A_z` set to zero.
pub fn zero_simple_coefficient(lie: &LieData, oper: &OperConnection, i: usize) -> OperConnection {
    let mut out = oper.clone();
    let k = lie.basis.neg_simple(i);
    out.conn.a_z.comps[k].data.iter_mut().for_each(|v| *v = ZERO);
    out
}
