//! Scalar coefficients of the Toda system.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::chevalley::ChevalleyBasis;
use super::triple::PrincipalTriple;
use crate::error::{Error, Result};

/// Aggregation convention for the off-diagonal affine Cartan numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CartanSign {
    /// `a_{αβ} = α(h_β)`, the signed Cartan integers.
    #[default]
    Standard,
    /// Off-diagonal entries replaced by their absolute values.
    Unsigned,
}

/// Amplitude of the `g_1` part of the anti-holomorphic Higgs field relative
/// to `λ U_α r_α^{1/2}`.
pub const HIGGS_SCALE: f64 = 0.5;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TodaData {
    pub d: usize,
    pub rank: usize,
    pub r: Vec<f64>,
    pub n: Vec<i64>,
    /// `rank × (rank + 1)`; column `rank` holds `a_{αδ}`.
    pub a: Vec<Vec<f64>>,
    pub xi: Vec<usize>,
    pub invariant_form_scale: f64,
    pub convention: CartanSign,
    /// Coefficients of `h_δ` in the basis `h_1..h_l`.
    pub h_delta: Vec<i64>,
    /// Per-root normalization `U_α = s_α e^{u_α}`.
    pub s: Vec<f64>,
    /// `U_{−δ} = c_delta · Π U_γ^{−n_γ}`.
    pub c_delta: f64,
    pub higgs_scale: f64,
}

/// Compute the coefficient table. `xi` is supplied by the caller (it needs
/// the highest weight vectors).
pub fn toda_coefficients(
    cb: &ChevalleyBasis,
    pt: &PrincipalTriple,
    xi: Vec<usize>,
    convention: CartanSign,
    invariant_form_scale: f64,
) -> Result<TodaData> {
    let rs = &cb.roots;
    let l = rs.rank;
    // α(h_β) read off the adjoint action [h_β, x_α] = α(h_β) x_α.
    let eval = |alpha_idx: usize, h: &[i64]| -> i64 {
        let mut total = 0;
        for (j, hj) in h.iter().enumerate() {
            if *hj == 0 {
                continue;
            }
            let coeff: i64 = cb
                .bracket_basis(cb.cartan(j), alpha_idx)
                .iter()
                .filter(|(k, _)| *k == alpha_idx)
                .map(|(_, c)| *c)
                .sum();
            total += hj * coeff;
        }
        total
    };
    // h_δ = −[x_δ, x_{−δ}].
    let mut h_delta = vec![0i64; l];
    for &(k, c) in cb.bracket_basis(cb.highest(), cb.neg_highest()) {
        if k >= rs.num_roots() {
            h_delta[k - rs.num_roots()] -= c;
        }
    }
    let mut a = vec![vec![0.0; l + 1]; l];
    for i in 0..l {
        let ai = cb.simple(i);
        for j in 0..l {
            let mut hj = vec![0i64; l];
            hj[j] = 1;
            let mut v = eval(ai, &hj) as f64;
            if i != j && convention == CartanSign::Unsigned {
                v = v.abs();
            }
            a[i][j] = v;
        }
        a[i][l] = eval(ai, &h_delta) as f64;
    }
    let d = rs.coxeter_number();
    let mut td = TodaData {
        d,
        rank: l,
        r: pt.r.clone(),
        n: rs.highest_root.clone(),
        a,
        xi,
        invariant_form_scale,
        convention,
        h_delta,
        s: vec![1.0; l],
        c_delta: HIGGS_SCALE.powi(-(d as i32)),
        higgs_scale: HIGGS_SCALE,
    };
    td.s = constant_solution(&td)?;
    Ok(td)
}

impl TodaData {
    pub fn cartan_part(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rank, self.rank, |i, j| self.a[i][j])
    }

    pub fn a_delta(&self) -> Vec<f64> {
        (0..self.rank).map(|i| self.a[i][self.rank]).collect()
    }

    /// ξ-orbits of simple roots, each listed by increasing index.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.rank];
        let mut out = Vec::new();
        for i in 0..self.rank {
            if seen[i] {
                continue;
            }
            let mut orbit = vec![i];
            seen[i] = true;
            let mut j = self.xi[i];
            while !seen[j] {
                seen[j] = true;
                orbit.push(j);
                j = self.xi[j];
            }
            orbit.sort();
            out.push(orbit);
        }
        out
    }

    pub fn xi_is_trivial(&self) -> bool {
        self.xi.iter().enumerate().all(|(i, &j)| i == j)
    }
}

/// Constant solution of the reduced system with vanishing differentials:
/// solve `A (r∘U) = (1,…,1)` and return `U`.
pub fn constant_solution(td: &TodaData) -> Result<Vec<f64>> {
    let v = substituted_constant_solution(td)?;
    Ok(v.iter().zip(&td.r).map(|(vi, ri)| vi / ri).collect())
}

/// The vector `v = r∘U` solving `A v = (1,…,1)`.
pub fn substituted_constant_solution(td: &TodaData) -> Result<Vec<f64>> {
    let a = td.cartan_part();
    let rhs = nalgebra::DVector::from_element(td.rank, 1.0);
    let v = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Internal("Cartan part of the Toda coefficients is singular".into()))?;
    Ok(v.iter().copied().collect())
}
