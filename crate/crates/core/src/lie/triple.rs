//! Principal sl₂ triple, highest weight vectors and the involution fixing
//! the Hitchin section.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::chevalley::ChevalleyBasis;
use crate::error::{Error, Result};

/// `x = Σ r_α h_α`, `e = Σ r_α^{1/2} x_α`, `ẽ = −Σ r_α^{1/2} x_{−α}`.
///
/// The minus sign on `ẽ` makes `[e, ẽ] = x` hold in a basis where
/// `[x_α, x_{−α}] = −h_α`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrincipalTriple {
    pub x: Vec<Complex64>,
    pub e: Vec<Complex64>,
    pub e_tilde: Vec<Complex64>,
    pub r: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HighestWeightVectors {
    /// `e_1 = e`, `e_l = x_δ`; intermediate vectors have unit coefficient norm.
    pub vectors: Vec<Vec<Complex64>>,
    /// Exponents `m_i`; `e_i` lies in `g_{m_i − 1}`.
    pub exponents: Vec<usize>,
}

fn c(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

pub fn principal_triple(cb: &ChevalleyBasis) -> Result<PrincipalTriple> {
    let rs = &cb.roots;
    let l = rs.rank;
    let mut twice_r = vec![0i64; l];
    for g in 0..rs.num_positive {
        for (i, ci) in rs.coroot_coefficients(&rs.roots[g]).iter().enumerate() {
            twice_r[i] += ci;
        }
    }
    let r: Vec<f64> = twice_r.iter().map(|&v| v as f64 / 2.0).collect();
    if r.iter().any(|&v| v <= 0.0) {
        return Err(Error::Internal("non-positive coefficient in x = ½ Σ h_α".into()));
    }
    let dim = cb.dim();
    let mut x = vec![c(0.0); dim];
    let mut e = vec![c(0.0); dim];
    let mut et = vec![c(0.0); dim];
    for i in 0..l {
        x[cb.cartan(i)] = c(r[i]);
        e[cb.simple(i)] = c(r[i].sqrt());
        et[cb.neg_simple(i)] = c(-r[i].sqrt());
    }
    let pt = PrincipalTriple { x, e, e_tilde: et, r };
    let defect = pt.sl2_defect(cb);
    if defect > 1e-12 {
        return Err(Error::Internal(format!("principal triple relations fail ({defect:e})")));
    }
    Ok(pt)
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

impl PrincipalTriple {
    /// Largest coefficient error among `[x,e] = e`, `[x,ẽ] = −ẽ`, `[e,ẽ] = x`.
    pub fn sl2_defect(&self, cb: &ChevalleyBasis) -> f64 {
        let xe = cb.bracket(&self.x, &self.e);
        let xet = cb.bracket(&self.x, &self.e_tilde);
        let eet = cb.bracket(&self.e, &self.e_tilde);
        let neg_et: Vec<Complex64> = self.e_tilde.iter().map(|v| -v).collect();
        max_diff(&xe, &self.e).max(max_diff(&xet, &neg_et)).max(max_diff(&eet, &self.x))
    }
}

fn nullspace(m: &DMatrix<f64>, tol: f64) -> Vec<nalgebra::DVector<f64>> {
    let cols = m.ncols();
    if m.nrows() == 0 {
        return (0..cols)
            .map(|i| {
                let mut v = nalgebra::DVector::zeros(cols);
                v[i] = 1.0;
                v
            })
            .collect();
    }
    // Pad to at least square so that the SVD exposes the full right basis.
    let rows = m.nrows().max(cols);
    let mut padded = DMatrix::zeros(rows, cols);
    padded.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let mut out = Vec::new();
    for (k, s) in svd.singular_values.iter().enumerate() {
        if *s < tol {
            out.push(vt.row(k).transpose());
        }
    }
    out
}

pub fn highest_weight_vectors(cb: &ChevalleyBasis, pt: &PrincipalTriple) -> Result<HighestWeightVectors> {
    let dim = cb.dim();
    let ad_e = cb.ad(&pt.e).map(|v| v.re);
    let top = cb.grade(cb.highest());
    let mut vectors = Vec::new();
    let mut exponents = Vec::new();
    for m in 1..=top {
        let cols: Vec<usize> = (0..dim).filter(|&i| cb.grade(i) == m).collect();
        let rows: Vec<usize> = (0..dim).filter(|&i| cb.grade(i) == m + 1).collect();
        let sub = DMatrix::from_fn(rows.len(), cols.len(), |a, b| ad_e[(rows[a], cols[b])]);
        for v in nullspace(&sub, 1e-10) {
            let mut full = vec![c(0.0); dim];
            for (b, &ci) in cols.iter().enumerate() {
                full[ci] = c(v[b]);
            }
            vectors.push(full);
            exponents.push((m + 1) as usize);
        }
    }
    if vectors.len() != cb.rank() {
        return Err(Error::Internal(format!(
            "centralizer of e has dimension {} instead of the rank {}",
            vectors.len(),
            cb.rank()
        )));
    }
    // Normalize: e_1 = e, e_l = x_δ, others sign-fixed unit vectors.
    let l = vectors.len();
    vectors[0] = pt.e.clone();
    vectors[l - 1] = cb.unit(cb.highest());
    for v in vectors.iter_mut().take(l - 1).skip(1) {
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let lead = v.iter().find(|z| z.norm() > 1e-12).map(|z| z.re.signum()).unwrap_or(1.0);
        v.iter_mut().for_each(|z| *z *= lead / norm);
    }
    Ok(HighestWeightVectors { vectors, exponents })
}

/// The involution `σ₀` with `σ₀(ad(ẽ)^k e_i) = (−1)^{k+1} ad(ẽ)^k e_i`, as a
/// matrix on basis coefficients.
pub fn sigma0(cb: &ChevalleyBasis, pt: &PrincipalTriple, hw: &HighestWeightVectors) -> Result<DMatrix<f64>> {
    let dim = cb.dim();
    let ad_et = cb.ad(&pt.e_tilde).map(|v| v.re);
    let mut basis = DMatrix::zeros(dim, dim);
    let mut signs = Vec::with_capacity(dim);
    let mut col = 0;
    for (v, &m) in hw.vectors.iter().zip(&hw.exponents) {
        let mut cur = nalgebra::DVector::from_iterator(dim, v.iter().map(|z| z.re));
        for k in 0..(2 * m - 1) {
            if col >= dim {
                return Err(Error::Internal("sl2 decomposition overflows the algebra".into()));
            }
            basis.set_column(col, &cur);
            signs.push(if k % 2 == 0 { -1.0 } else { 1.0 });
            col += 1;
            cur = &ad_et * cur;
        }
    }
    if col != dim {
        return Err(Error::Internal(format!("sl2 decomposition covers {col} of {dim} dimensions")));
    }
    let inv = basis
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Internal("sl2 decomposition basis is singular".into()))?;
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(signs));
    Ok(&basis * d * inv)
}

/// The permutation ξ of simple roots with `σ₀(h_α) = h_{ξ(α)}`.
pub fn xi_permutation(cb: &ChevalleyBasis, s0: &DMatrix<f64>) -> Result<Vec<usize>> {
    let l = cb.rank();
    let mut perm = Vec::with_capacity(l);
    for i in 0..l {
        let col = s0.column(cb.cartan(i));
        let mut found = None;
        for j in 0..l {
            let target = cb.cartan(j);
            let err: f64 = (0..cb.dim())
                .map(|k| (col[k] - if k == target { 1.0 } else { 0.0 }).abs())
                .fold(0.0, f64::max);
            if err < 1e-9 {
                found = Some(j);
            }
        }
        perm.push(found.ok_or_else(|| Error::Internal(format!("σ₀(h_{i}) is not a simple coroot")))?);
    }
    Ok(perm)
}

/// Max defect of `σ₀` being an involutive Lie algebra automorphism.
pub fn automorphism_defect(cb: &ChevalleyBasis, s0: &DMatrix<f64>) -> f64 {
    let dim = cb.dim();
    let id = DMatrix::<f64>::identity(dim, dim);
    let mut worst = (s0 * s0 - id).amax();
    let img = |i: usize| -> Vec<Complex64> { (0..dim).map(|k| c(s0[(k, i)])).collect() };
    for i in 0..dim {
        for j in 0..dim {
            let lhs_in = cb.bracket(&cb.unit(i), &cb.unit(j));
            let lhs: Vec<f64> = (0..dim)
                .map(|k| (0..dim).map(|m| s0[(k, m)] * lhs_in[m].re).sum())
                .collect();
            let rhs = cb.bracket(&img(i), &img(j));
            for k in 0..dim {
                worst = worst.max((lhs[k] - rhs[k].re).abs());
            }
        }
    }
    worst
}
