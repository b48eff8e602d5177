use num_complex::Complex64;

use super::problem::{Forcing, TodaForm, TodaProblem};
use crate::error::{Error, Result};
use crate::geometry::FieldC;
use crate::lie::{substituted_constant_solution, TodaData};

/// `U_α = s_α e^{u_α}` for every simple root.
pub fn u_fields(data: &TodaData, full_u: &[FieldC]) -> Vec<FieldC> {
    full_u.iter().zip(&data.s).map(|(u, s)| u.map(|v| *s * v.exp())).collect()
}

/// `U_{−δ} = C_δ Π_γ U_γ^{−n_γ}`, evaluated as `C_δ Π s_γ^{−n_γ} exp(−Σ n_γ u_γ)`
/// so no complex power is ever taken.
pub fn u_minus_delta(data: &TodaData, full_u: &[FieldC]) -> FieldC {
    let n = full_u[0].n;
    let mut prefactor = data.c_delta;
    for (s, ng) in data.s.iter().zip(&data.n) {
        prefactor *= s.powi(-(*ng as i32));
    }
    FieldC::from_fn(n, |ix, iy| {
        let k = iy * n + ix;
        let mut e = Complex64::new(0.0, 0.0);
        for (u, ng) in full_u.iter().zip(&data.n) {
            e -= u.data[k] * *ng as f64;
        }
        prefactor * e.exp()
    })
}

/// `Q = q₁ q̄₂ λ^{−d}`.
pub(crate) fn q_field(data: &TodaData, forcing: &Forcing) -> FieldC {
    let d = data.d as f64;
    forcing.q_product.zip(&forcing.log_lambda, |p, l| p * (-d * l).exp())
}

fn full_residual(problem: &TodaProblem, full_u: &[FieldC]) -> Vec<FieldC> {
    let data = &problem.data;
    let l = data.rank;
    let n = problem.n();
    let c = problem.laplacian_weight();
    let w = problem.reaction_weight();
    let big_u = u_fields(data, full_u);
    let umd = u_minus_delta(data, full_u);
    let q = q_field(data, &problem.forcing);
    let mut out = Vec::with_capacity(l);
    for alpha in 0..l {
        let lap = problem.metric.bers_laplacian(&full_u[alpha]);
        let mut r = FieldC::zeros(n);
        for k in 0..n * n {
            let mut reaction = Complex64::new(0.0, 0.0);
            for beta in 0..l {
                reaction -= data.a[alpha][beta] * data.r[beta] * big_u[beta].data[k];
            }
            reaction += data.a[alpha][l] * q.data[k] * umd.data[k];
            let source = match problem.form {
                TodaForm::Reduced => Complex64::new(2.0, 0.0),
                TodaForm::Unreduced => 0.25 * problem.forcing.lap_log_lambda.data[k],
            };
            r.data[k] = c * lap.data[k] + w * reaction + source;
        }
        out.push(r);
    }
    out
}

/// Pointwise residual, one field per unknown (per orbit under symmetry).
pub fn residual(problem: &TodaProblem, u: &[FieldC]) -> Vec<FieldC> {
    let full = problem.expand(u);
    problem.restrict(&full_residual(problem, &full))
}

/// Pointwise derivative blocks `M_{αβ} = ∂(reaction_α)/∂u_β` at each node,
/// stored as `m[alpha][beta]`.
pub(crate) fn reaction_jacobian(problem: &TodaProblem, full_u: &[FieldC]) -> Vec<Vec<FieldC>> {
    let data = &problem.data;
    let l = data.rank;
    let w = problem.reaction_weight();
    let big_u = u_fields(data, full_u);
    let umd = u_minus_delta(data, full_u);
    let q = q_field(data, &problem.forcing);
    let qu = q.mul(&umd);
    let mut m = vec![vec![FieldC::zeros(problem.n()); l]; l];
    for alpha in 0..l {
        for beta in 0..l {
            let arb = data.a[alpha][beta] * data.r[beta];
            let anb = data.a[alpha][l] * data.n[beta] as f64;
            m[alpha][beta] = big_u[beta].zip(&qu, |ub, qud| -w * (arb * ub + anb * qud));
        }
    }
    m
}

/// Reaction blocks in unknown space: `M_red[g][h] = Σ_{β∈orbit h} M[rep g][β]`.
pub(crate) fn reduced_reaction_jacobian(problem: &TodaProblem, u: &[FieldC]) -> Vec<Vec<FieldC>> {
    let full = problem.expand(u);
    let m = reaction_jacobian(problem, &full);
    let groups = problem.groups();
    let nf = groups.len();
    let mut out = vec![vec![FieldC::zeros(problem.n()); nf]; nf];
    for (gi, g) in groups.iter().enumerate() {
        for (hi, h) in groups.iter().enumerate() {
            let mut acc = FieldC::zeros(problem.n());
            for &beta in h {
                acc = acc.add(&m[g[0]][beta]);
            }
            out[gi][hi] = acc;
        }
    }
    out
}

/// Directional derivative of [`residual`] at `u` along `v`.
pub fn jacobian_apply(problem: &TodaProblem, u: &[FieldC], v: &[FieldC]) -> Vec<FieldC> {
    let m = reduced_reaction_jacobian(problem, u);
    apply_with_blocks(problem, &m, v)
}

pub(crate) fn apply_with_blocks(problem: &TodaProblem, m: &[Vec<FieldC>], v: &[FieldC]) -> Vec<FieldC> {
    let c = problem.laplacian_weight();
    let nf = v.len();
    (0..nf)
        .map(|g| {
            let mut out = problem.metric.bers_laplacian(&v[g]).scale(Complex64::new(c, 0.0));
            for h in 0..nf {
                for (o, (mk, vk)) in out.data.iter_mut().zip(m[g][h].data.iter().zip(&v[h].data)) {
                    *o += mk * vk;
                }
            }
            out
        })
        .collect()
}

/// Constant start for the problem's form, in unknown space.
///
/// Reduced: `u ≡ 0`, i.e. `U = s`. Unreduced: the closed-form constant
/// solution for the averaged data `λ̄ = exp(mean log λ)` and `P̄ = mean(q₁q̄₂)`.
pub fn constant_start(problem: &TodaProblem) -> Result<Vec<FieldC>> {
    let n = problem.n();
    let values = match problem.form {
        TodaForm::Reduced => vec![Complex64::new(0.0, 0.0); problem.rank()],
        TodaForm::Unreduced => {
            let lbar = problem.forcing.log_lambda.mean();
            let pbar = problem.forcing.q_product.mean();
            unreduced_constant_solution(&problem.data, lbar, pbar)?
        }
    };
    let full: Vec<FieldC> = values.iter().map(|v| FieldC::constant(n, *v)).collect();
    Ok(problem.restrict(&full))
}

/// Log-unknowns `u_α` of the constant solution of the unreduced system with
/// constant `log λ = lbar` and `q₁q̄₂ = pbar`.
///
/// Writing `r∘U = K v` with `A v = a_δ`, the system reduces to
/// `K^d = Q C_δ Π (v_γ / r_γ)^{−n_γ}`; the principal root is taken.
pub fn unreduced_constant_solution(data: &TodaData, lbar: Complex64, pbar: Complex64) -> Result<Vec<Complex64>> {
    if pbar.norm() == 0.0 {
        return Err(Error::Precondition(
            "the unreduced form has no constant solution when q1*q2bar averages to zero".into(),
        ));
    }
    let a = data.cartan_part();
    let rhs = nalgebra::DVector::from_vec(data.a_delta());
    let v = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Internal("Cartan part of the Toda coefficients is singular".into()))?;
    let d = data.d as f64;
    let q = pbar * (-d * lbar).exp();
    let mut log_k_d = q.ln() + data.c_delta.ln();
    for i in 0..data.rank {
        let ratio = v[i] / data.r[i];
        if ratio <= 0.0 {
            return Err(Error::Internal("non-positive ratio in the constant solution".into()));
        }
        log_k_d -= data.n[i] as f64 * ratio.ln();
    }
    let log_k = log_k_d / d;
    Ok((0..data.rank).map(|i| log_k + (v[i] / data.r[i] / data.s[i]).ln()).collect())
}

/// Log-unknowns of the reduced constant solution with `q₁q̄₂ ≡ 0`, from the
/// linear system `A (r∘U) = e`.
pub fn reduced_constant_solution(data: &TodaData) -> Result<Vec<Complex64>> {
    let v = substituted_constant_solution(data)?;
    Ok((0..data.rank).map(|i| Complex64::new((v[i] / data.r[i] / data.s[i]).ln(), 0.0)).collect())
}

/// Homotopy from averaged data (`t = 0`) to the target (`t = 1`).
pub(crate) fn homotopy(problem: &TodaProblem, t: f64) -> TodaProblem {
    let f = &problem.forcing;
    let forcing = match problem.form {
        TodaForm::Reduced => Forcing {
            log_lambda: f.log_lambda.clone(),
            lap_log_lambda: f.lap_log_lambda.clone(),
            q_product: f.q_product.scale(Complex64::new(t * t, 0.0)),
        },
        TodaForm::Unreduced => {
            let lbar = f.log_lambda.mean();
            let pbar = f.q_product.mean();
            Forcing {
                log_lambda: f.log_lambda.map(|v| lbar + t * (v - lbar)),
                lap_log_lambda: f.lap_log_lambda.scale(Complex64::new(t, 0.0)),
                q_product: f.q_product.map(|v| pbar + t * (v - pbar)),
            }
        }
    };
    problem.with_forcing(forcing)
}
