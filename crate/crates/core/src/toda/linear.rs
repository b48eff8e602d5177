//! Linear solves for the Newton step: dense LU for small grids, restarted
//! GMRES with a Fourier block preconditioner otherwise.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::problem::TodaProblem;
use super::residual::{apply_with_blocks, reduced_reaction_jacobian};
use crate::error::{Error, Result};
use crate::geometry::FieldC;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Which linear solver produced the Newton steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinearSolver {
    DenseLu,
    Gmres,
}

pub(crate) fn flatten(fields: &[FieldC]) -> Vec<Complex64> {
    fields.iter().flat_map(|f| f.data.iter().copied()).collect()
}

pub(crate) fn unflatten(v: &[Complex64], n: usize) -> Vec<FieldC> {
    v.chunks(n * n).map(|c| FieldC { n, data: c.to_vec() }).collect()
}

/// Assemble the full discretized Jacobian in unknown space.
pub fn dense_jacobian(problem: &TodaProblem, u: &[FieldC]) -> DMatrix<Complex64> {
    let n = problem.n();
    let nn = n * n;
    let nf = u.len();
    let lap = problem.laplacian_matrix();
    let c = problem.laplacian_weight();
    let m = reduced_reaction_jacobian(problem, u);
    let mut j = DMatrix::from_element(nf * nn, nf * nn, ZERO);
    for g in 0..nf {
        j.view_mut((g * nn, g * nn), (nn, nn)).copy_from(&(lap * Complex64::new(c, 0.0)));
        for h in 0..nf {
            for k in 0..nn {
                j[(g * nn + k, h * nn + k)] += m[g][h].data[k];
            }
        }
    }
    j
}

/// Ratio of extreme singular values.
pub fn condition_estimate(m: &DMatrix<Complex64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

pub(crate) fn dense_solve(problem: &TodaProblem, u: &[FieldC], rhs: &[FieldC]) -> Result<Vec<FieldC>> {
    let j = dense_jacobian(problem, u);
    let b = DVector::from_vec(flatten(rhs));
    let lu = j.clone().lu();
    match lu.solve(&b) {
        Some(x) if x.iter().all(|v| v.re.is_finite() && v.im.is_finite()) => {
            Ok(unflatten(x.as_slice(), problem.n()))
        }
        _ => Err(Error::LinearSolve {
            message: "dense LU factorization is singular".into(),
            condition: condition_estimate(&j),
        }),
    }
}

/// Per-wavevector inverse of `c σ(k) I + mean(M)`, where `σ` is the symbol of
/// `Δ_h` with its coefficients replaced by their means.
struct FourierBlockPreconditioner {
    n: usize,
    nf: usize,
    blocks: Vec<DMatrix<Complex64>>,
}

impl FourierBlockPreconditioner {
    fn new(problem: &TodaProblem, u: &[FieldC]) -> Self {
        let metric = &problem.metric;
        let grid = &metric.grid;
        let n = grid.n;
        let nf = u.len();
        let inv = metric.lambda.mul(&metric.m).map(|v| 4.0 / v);
        let a0 = inv.mean();
        let a1 = inv.mul(&metric.mubar).mean();
        let a2 = if metric.is_conformal(0.0) { ZERO } else { inv.mul(&grid.dzb(&metric.mubar)).mean() };
        let c = problem.laplacian_weight();
        let m = reduced_reaction_jacobian(problem, u);
        let mbar = DMatrix::from_fn(nf, nf, |g, h| m[g][h].mean());
        let i = Complex64::new(0.0, 1.0);
        let mut blocks = Vec::with_capacity(n * n);
        for iy in 0..n {
            let (ky, _) = grid.wavenumber(iy);
            for ix in 0..n {
                let (kx, _) = grid.wavenumber(ix);
                let dzb = 0.5 * (i * kx - ky);
                let sigma = a0 * (-0.25 * (kx * kx + ky * ky)) - a1 * dzb * dzb - a2 * dzb;
                let mut b = mbar.clone();
                for g in 0..nf {
                    b[(g, g)] += c * sigma;
                }
                let inv = b.clone().try_inverse().unwrap_or_else(|| DMatrix::identity(nf, nf));
                blocks.push(inv);
            }
        }
        FourierBlockPreconditioner { n, nf, blocks }
    }

    fn apply(&self, grid: &crate::geometry::Grid, v: &[Complex64]) -> Vec<Complex64> {
        let nn = self.n * self.n;
        let mut spectra: Vec<Vec<Complex64>> = v.chunks(nn).map(|c| c.to_vec()).collect();
        for s in spectra.iter_mut() {
            grid.fft2(s);
        }
        let mut tmp = DVector::from_element(self.nf, ZERO);
        for k in 0..nn {
            for g in 0..self.nf {
                tmp[g] = spectra[g][k];
            }
            let out = &self.blocks[k] * &tmp;
            for g in 0..self.nf {
                spectra[g][k] = out[g];
            }
        }
        let mut out = Vec::with_capacity(v.len());
        for mut s in spectra {
            grid.ifft2(&mut s);
            out.extend(s);
        }
        out
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm2(a: &[Complex64]) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Outcome of a GMRES run.
#[derive(Debug, Clone)]
pub struct GmresOutcome {
    pub x: Vec<Complex64>,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

/// Restarted, right-preconditioned GMRES.
pub fn gmres(
    op: impl Fn(&[Complex64]) -> Vec<Complex64>,
    precond: impl Fn(&[Complex64]) -> Vec<Complex64>,
    b: &[Complex64],
    tol: f64,
    restart: usize,
    max_iter: usize,
) -> GmresOutcome {
    let dim = b.len();
    let mut x = vec![ZERO; dim];
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return GmresOutcome { x, iterations: 0, residual: 0.0, converged: true };
    }
    let mut total = 0;
    let mut r: Vec<Complex64> = b.to_vec();
    let mut rnorm = bnorm;
    while total < max_iter {
        let mut basis: Vec<Vec<Complex64>> = vec![r.iter().map(|v| v / rnorm).collect()];
        let mut h = vec![vec![ZERO; restart]; restart + 1];
        let mut cs = vec![0.0; restart];
        let mut sn = vec![ZERO; restart];
        let mut g = vec![ZERO; restart + 1];
        g[0] = Complex64::new(rnorm, 0.0);
        let mut k_used = 0;
        for k in 0..restart {
            let z = precond(&basis[k]);
            let mut w = op(&z);
            for (i, vi) in basis.iter().enumerate() {
                let hik = dot(vi, &w);
                h[i][k] = hik;
                for (wj, vj) in w.iter_mut().zip(vi) {
                    *wj -= hik * vj;
                }
            }
            let wn = norm2(&w);
            h[k + 1][k] = Complex64::new(wn, 0.0);
            for i in 0..k {
                let t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i].conj() * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let (a, bb) = (h[k][k], h[k + 1][k]);
            let rho = (a.norm_sqr() + bb.norm_sqr()).sqrt();
            if a.norm() == 0.0 {
                cs[k] = 0.0;
                sn[k] = Complex64::new(1.0, 0.0);
            } else {
                let phase = a / a.norm();
                cs[k] = a.norm() / rho;
                sn[k] = phase * bb.conj() / rho;
            }
            h[k][k] = cs[k] * a + sn[k] * bb;
            h[k + 1][k] = ZERO;
            g[k + 1] = -sn[k].conj() * g[k];
            g[k] *= cs[k];
            total += 1;
            k_used = k + 1;
            if g[k + 1].norm() <= tol * bnorm || wn == 0.0 || total >= max_iter {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }
        // Back substitution for the least-squares coefficients.
        let mut y = vec![ZERO; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in (i + 1)..k_used {
                s -= h[i][j] * y[j];
            }
            y[i] = s / h[i][i];
        }
        let mut update = vec![ZERO; dim];
        for (yi, vi) in y.iter().zip(&basis) {
            for (u, v) in update.iter_mut().zip(vi) {
                *u += yi * v;
            }
        }
        let dx = precond(&update);
        for (xi, d) in x.iter_mut().zip(&dx) {
            *xi += d;
        }
        let ax = op(&x);
        r = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        rnorm = norm2(&r);
        if rnorm <= tol * bnorm {
            return GmresOutcome { x, iterations: total, residual: rnorm / bnorm, converged: true };
        }
    }
    GmresOutcome { x, iterations: total, residual: rnorm / bnorm, converged: false }
}

pub(crate) fn gmres_solve(
    problem: &TodaProblem,
    u: &[FieldC],
    rhs: &[FieldC],
    tol: f64,
    restart: usize,
    max_iter: usize,
) -> Result<Vec<FieldC>> {
    let n = problem.n();
    let pre = FourierBlockPreconditioner::new(problem, u);
    let grid = &problem.metric.grid;
    let m = reduced_reaction_jacobian(problem, u);
    let op = |v: &[Complex64]| flatten(&apply_with_blocks(problem, &m, &unflatten(v, n)));
    let b = flatten(rhs);
    let out = gmres(op, |v| pre.apply(grid, v), &b, tol, restart, max_iter);
    if !out.converged && out.residual > 1e-6 {
        return Err(Error::LinearSolve {
            message: format!(
                "GMRES stalled at relative residual {:.3e} after {} iterations",
                out.residual, out.iterations
            ),
            condition: f64::NAN,
        });
    }
    Ok(unflatten(&out.x, n))
}
