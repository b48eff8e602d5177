use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::linear::{dense_solve, flatten, gmres_solve, LinearSolver};
use super::problem::{TodaForm, TodaProblem};
use super::residual::{constant_start, homotopy, residual, u_fields, u_minus_delta};
use crate::error::{Error, Result};
use crate::geometry::FieldC;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NewtonOptions {
    /// Sup-norm tolerance on the residual.
    pub tol: f64,
    /// Newton iterations allowed per continuation stage.
    pub max_iter: usize,
    /// Number of homotopy stages; 0 or 1 solves the target directly.
    pub continuation_steps: usize,
    /// Largest unknown count solved with dense LU.
    pub dense_threshold: usize,
    pub gmres_restart: usize,
    pub gmres_max_iter: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: 1e-10,
            max_iter: 40,
            continuation_steps: 4,
            dense_threshold: 1024,
            gmres_restart: 60,
            gmres_max_iter: 600,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageReport {
    pub t: f64,
    pub iterations: usize,
    pub final_residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NewtonReport {
    /// Newton iterations summed over all stages.
    pub iterations: usize,
    pub final_residual: f64,
    /// Sup-norm residual before each iteration of the last stage, then after the last.
    pub history: Vec<f64>,
    pub stages: Vec<StageReport>,
    pub converged: bool,
    pub linear_solver: Option<LinearSolver>,
}

impl NewtonReport {
    fn empty() -> Self {
        NewtonReport {
            iterations: 0,
            final_residual: f64::NAN,
            history: Vec::new(),
            stages: Vec::new(),
            converged: false,
            linear_solver: None,
        }
    }
}

/// Converged log-unknowns, one field per simple root.
#[derive(Debug, Clone)]
pub struct TodaSolution {
    pub u: Vec<FieldC>,
    pub s: Vec<f64>,
    pub form: TodaForm,
    pub residual_norm: f64,
    pub newton_iterations: usize,
    pub report: NewtonReport,
}

impl TodaSolution {
    /// `U_α = s_α e^{u_α}`.
    pub fn big_u(&self, problem: &TodaProblem) -> Vec<FieldC> {
        u_fields(&problem.data, &self.u)
    }

    pub fn u_minus_delta(&self, problem: &TodaProblem) -> FieldC {
        u_minus_delta(&problem.data, &self.u)
    }

    pub fn max_imag(&self) -> f64 {
        self.u.iter().map(|f| f.max_imag()).fold(0.0, f64::max)
    }
}

pub(crate) fn sup_norm(fields: &[FieldC]) -> f64 {
    fields.iter().map(|f| f.sup_norm()).fold(0.0, f64::max)
}

fn rms(fields: &[FieldC]) -> f64 {
    let v = flatten(fields);
    (v.iter().map(|x| x.norm_sqr()).sum::<f64>() / v.len().max(1) as f64).sqrt()
}

fn axpy(u: &[FieldC], a: f64, d: &[FieldC]) -> Vec<FieldC> {
    u.iter().zip(d).map(|(x, y)| x.zip(y, |p, q| p + a * q)).collect()
}

/// Newton iteration on one fixed problem.
fn newton_stage(
    problem: &TodaProblem,
    mut u: Vec<FieldC>,
    opts: &NewtonOptions,
    report: &mut NewtonReport,
) -> Result<(Vec<FieldC>, StageReport)> {
    let dense = problem.num_unknowns() <= opts.dense_threshold;
    report.linear_solver = Some(if dense { LinearSolver::DenseLu } else { LinearSolver::Gmres });
    let mut r = residual(problem, &u);
    let mut res = sup_norm(&r);
    report.history.clear();
    report.history.push(res);
    let mut iterations = 0;
    while res > opts.tol {
        if iterations >= opts.max_iter || !res.is_finite() {
            report.final_residual = res;
            return Err(Error::NonConvergence(Box::new(report.clone())));
        }
        let rhs: Vec<FieldC> = r.iter().map(|f| f.scale(Complex64::new(-1.0, 0.0))).collect();
        let step = if dense {
            dense_solve(problem, &u, &rhs)?
        } else {
            let tol = (1e-3 * opts.tol / (res * (problem.num_unknowns() as f64).sqrt())).clamp(1e-13, 1e-6);
            gmres_solve(problem, &u, &rhs, tol, opts.gmres_restart, opts.gmres_max_iter)?
        };
        let r0 = rms(&r);
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let trial = axpy(&u, alpha, &step);
            let rt = residual(problem, &trial);
            let n_t = rms(&rt);
            if n_t.is_finite() && (n_t <= (1.0 - 1e-4 * alpha) * r0 || sup_norm(&rt) <= opts.tol) {
                accepted = Some((trial, rt));
                break;
            }
            alpha *= 0.5;
        }
        iterations += 1;
        report.iterations += 1;
        match accepted {
            Some((nu, nr)) => {
                u = nu;
                r = nr;
                res = sup_norm(&r);
                report.history.push(res);
            }
            None => {
                report.final_residual = res;
                return Err(Error::NonConvergence(Box::new(report.clone())));
            }
        }
    }
    report.final_residual = res;
    Ok((u, StageReport { t: 1.0, iterations, final_residual: res }))
}

/// Solve the Toda system by damped Newton with continuation.
///
/// The homotopy starts from constant data (`q` scaled to zero in the reduced
/// form; averaged `log λ` and `q₁q̄₂` in the unreduced form), where the
/// constant solution is exact, and ramps linearly to the target. A supplied
/// `u0` is taken to be close already and is refined on the target directly.
pub fn newton_solve(problem: &TodaProblem, u0: Option<&[FieldC]>, opts: &NewtonOptions) -> Result<TodaSolution> {
    if !(opts.tol > 0.0) {
        return Err(Error::Config("Newton tolerance must be positive".into()));
    }
    let mut u = match u0 {
        Some(v) => {
            if v.len() != problem.num_fields() || v.iter().any(|f| f.n != problem.n()) {
                return Err(Error::Shape(format!(
                    "initial guess needs {} fields of size {}",
                    problem.num_fields(),
                    problem.n()
                )));
            }
            if v.iter().any(|f| !f.is_finite()) {
                return Err(Error::Config("initial guess has non-finite values".into()));
            }
            v.to_vec()
        }
        None => constant_start(problem)?,
    };
    let mut report = NewtonReport::empty();
    let steps = if u0.is_some() { 1 } else { opts.continuation_steps.max(1) };
    for k in 1..=steps {
        let t = k as f64 / steps as f64;
        let stage_problem = if k == steps { problem.clone() } else { homotopy(problem, t) };
        let (nu, mut stage) = newton_stage(&stage_problem, u, opts, &mut report)?;
        stage.t = t;
        report.stages.push(stage);
        u = nu;
    }
    report.converged = true;
    let residual_norm = report.final_residual;
    Ok(TodaSolution {
        u: problem.expand(&u),
        s: problem.data.s.clone(),
        form: problem.form,
        residual_norm,
        newton_iterations: report.iterations,
        report,
    })
}
