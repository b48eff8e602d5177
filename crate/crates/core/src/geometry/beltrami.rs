use num_complex::Complex64;

use super::field::{FieldC, OneFormC};
use super::grid::Grid;
use super::metric::{ComplexMetricField, MU_LIMIT};
use crate::error::{Error, Result};

const MAX_ITER: usize = 500;
const ITER_TOL: f64 = 1e-15;

/// Rewrite `λ₀ dz dz̄ + φ₀ dz²` as `λ dz dw̄` on a periodic chart.
///
/// The coordinate is `w̄ = z̄ + c z + ψ` with `ψ` periodic. Writing
/// `ν = φ₀/λ₀` and `h = ψ_z̄`, the requirement `λ₀ dz̄ + φ₀ dz = λ dw̄` becomes
/// `ψ_z = ν(1 + h) − c`, which is solved by fixed-point iteration of the
/// Fourier multiplier that takes `ψ_z` to `ψ_z̄`. Then `m = 1 + h`,
/// `p = ν m` and `λ = λ₀ / m`.
pub fn bers_from_quadratic_perturbation(grid: &Grid, lambda0: &FieldC, phi0: &FieldC) -> Result<ComplexMetricField> {
    if !grid.periodic {
        return Err(Error::Config("quadratic perturbation needs a periodic chart".into()));
    }
    let n = grid.n;
    let nu = phi0.div(lambda0);
    if !nu.is_finite() {
        return Err(Error::DegenerateMetric("phi0 / lambda0 is not finite".into()));
    }
    let sup = nu.sup_norm();
    if sup >= MU_LIMIT {
        return Err(Error::DegenerateMetric(format!("|phi0 / lambda0| reaches {sup:.6}, positivity fails")));
    }

    let mut h = FieldC::zeros(n);
    let mut c = Complex64::new(0.0, 0.0);
    let mut psi_z = FieldC::zeros(n);
    let mut converged = sup == 0.0;
    for _ in 0..MAX_ITER {
        if converged {
            break;
        }
        let rhs = nu.zip(&h, |v, hh| v * (1.0 + hh));
        c = rhs.mean();
        psi_z = rhs.map(|v| v - c);
        let next = grid.apply_symbol(&psi_z, |kx, ky, _, _| {
            if kx == 0.0 && ky == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(kx, ky) / Complex64::new(kx, -ky)
            }
        });
        let change = next.sub(&h).sup_norm();
        h = next;
        converged = change <= ITER_TOL * (1.0 + h.sup_norm());
    }
    if !converged {
        return Err(Error::DegenerateMetric("quadratic perturbation iteration did not converge".into()));
    }
    if sup > 0.0 {
        let rhs = nu.zip(&h, |v, hh| v * (1.0 + hh));
        c = rhs.mean();
        psi_z = rhs.map(|v| v - c);
    }

    let m = h.map(|v| v + 1.0);
    let p = nu.mul(&m);
    let lambda = lambda0.div(&m);
    let psi = grid.apply_symbol(&psi_z, |kx, ky, _, _| {
        if kx == 0.0 && ky == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            2.0 / Complex64::new(ky, kx)
        }
    });
    let wbar = grid.field_from_fn(|x, y| Complex64::new(x, -y) + c * Complex64::new(x, y)).add(&psi);
    let mut metric = ComplexMetricField::new(grid.clone(), lambda, p, m)?;
    metric.wbar = Some(wbar);
    Ok(metric)
}

/// `∂_{J₀} log λ₀ − ∂_J log λ`, the coefficient of `dz`.
pub fn log_identity_defect(lambda0: &ComplexMetricField, derived: &ComplexMetricField) -> Result<FieldC> {
    let a = lambda0.del_coefficient(&lambda0.log_lambda()?);
    let b = derived.del_coefficient(&derived.log_lambda()?);
    Ok(a.sub(&b))
}

/// Residual of `λ₀ dz̄ + φ₀ dz = λ dw̄`.
pub fn perturbation_identity_defect(lambda0: &FieldC, phi0: &FieldC, metric: &ComplexMetricField) -> OneFormC {
    let dz = phi0.sub(&metric.lambda.mul(&metric.p));
    let dzb = lambda0.sub(&metric.lambda.mul(&metric.m));
    OneFormC { dz, dzb }
}
