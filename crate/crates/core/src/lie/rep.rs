//! Matrix representations: adjoint for every type, defining for A and C.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::chevalley::ChevalleyBasis;
use super::roots::CartanType;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RepKind {
    Adjoint,
    Defining,
}

/// Images of the basis elements.
#[derive(Debug, Clone)]
pub struct Representation {
    pub kind: RepKind,
    pub size: usize,
    pub matrices: Vec<DMatrix<Complex64>>,
}

fn cz() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn commutator(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a * b - b * a
}

impl Representation {
    pub fn adjoint(cb: &ChevalleyBasis) -> Self {
        let matrices = cb
            .adjoint_matrices()
            .into_iter()
            .map(|m| m.map(|v| Complex64::new(v, 0.0)))
            .collect();
        Representation { kind: RepKind::Adjoint, size: cb.dim(), matrices }
    }

    /// Standard representation of `sl_{l+1}` or `sp_{2l}`, built from simple
    /// root generators and extended through the structure constants.
    pub fn defining(cb: &ChevalleyBasis) -> Result<Self> {
        let rs = &cb.roots;
        let l = rs.rank;
        let (size, gens): (usize, Vec<(DMatrix<Complex64>, DMatrix<Complex64>)>) = match rs.cartan_type {
            CartanType::A => {
                let n = l + 1;
                let gens = (0..l)
                    .map(|i| {
                        let mut e = DMatrix::from_element(n, n, cz());
                        let mut f = DMatrix::from_element(n, n, cz());
                        e[(i, i + 1)] = Complex64::new(1.0, 0.0);
                        f[(i + 1, i)] = Complex64::new(1.0, 0.0);
                        (e, f)
                    })
                    .collect();
                (n, gens)
            }
            CartanType::C => {
                let n = 2 * l;
                let gens = (0..l)
                    .map(|i| {
                        let mut e = DMatrix::from_element(n, n, cz());
                        let mut f = DMatrix::from_element(n, n, cz());
                        if i + 1 < l {
                            e[(i, i + 1)] = Complex64::new(1.0, 0.0);
                            e[(l + i + 1, l + i)] = Complex64::new(-1.0, 0.0);
                            f[(i + 1, i)] = Complex64::new(1.0, 0.0);
                            f[(l + i, l + i + 1)] = Complex64::new(-1.0, 0.0);
                        } else {
                            e[(i, l + i)] = Complex64::new(1.0, 0.0);
                            f[(l + i, i)] = Complex64::new(1.0, 0.0);
                        }
                        (e, f)
                    })
                    .collect();
                (n, gens)
            }
            _ => {
                return Err(Error::Unsupported(format!(
                    "no defining representation implemented for type {}",
                    rs.cartan_type.letter()
                )))
            }
        };
        let mut mats: Vec<Option<DMatrix<Complex64>>> = vec![None; cb.dim()];
        for (i, (e, f)) in gens.iter().enumerate() {
            // x_{α} = e_{α}, x_{−α} = −e_{−α}.
            mats[cb.simple(i)] = Some(e.clone());
            mats[cb.neg_simple(i)] = Some(-f.clone());
            mats[cb.cartan(i)] = Some(commutator(e, f));
        }
        // Positive roots in height order: x_γ = [x_{α_i}, x_β]/N_{α_i,β}.
        for g in 0..rs.num_positive {
            if mats[g].is_some() {
                continue;
            }
            let mut done = false;
            for i in 0..l {
                let ai = cb.simple(i);
                let target: Vec<i64> = rs.roots[g]
                    .iter()
                    .enumerate()
                    .map(|(k, v)| if k == i { v - 1 } else { *v })
                    .collect();
                if let Some(b) = rs.index_of(&target) {
                    let n = cb.n(ai, b);
                    if n != 0 {
                        if let (Some(xa), Some(xb)) = (&mats[ai], &mats[b]) {
                            let xg = commutator(xa, xb) / Complex64::new(n as f64, 0.0);
                            let nai = rs.negative_of(ai);
                            let nb = rs.negative_of(b);
                            let nn = cb.n(nai, nb);
                            let yg = commutator(mats[nai].as_ref().unwrap(), mats[nb].as_ref().unwrap())
                                / Complex64::new(nn as f64, 0.0);
                            mats[g] = Some(xg);
                            mats[rs.negative_of(g)] = Some(yg);
                            done = true;
                            break;
                        }
                    }
                }
            }
            if !done {
                return Err(Error::Internal(format!("could not build defining matrix for root {g}")));
            }
        }
        let matrices: Vec<DMatrix<Complex64>> = mats.into_iter().map(|m| m.unwrap()).collect();
        let rep = Representation { kind: RepKind::Defining, size, matrices };
        let err = rep.homomorphism_defect(cb);
        if err > 1e-12 {
            return Err(Error::Internal(format!("defining representation fails bracket check ({err:e})")));
        }
        Ok(rep)
    }

    /// Representation for holonomy: defining for A/C types, adjoint otherwise.
    pub fn default_for(cb: &ChevalleyBasis) -> Self {
        match cb.roots.cartan_type {
            CartanType::A | CartanType::C => Self::defining(cb).unwrap_or_else(|_| Self::adjoint(cb)),
            _ => Self::adjoint(cb),
        }
    }

    pub fn kind_for(cb: &ChevalleyBasis, kind: RepKind) -> Result<Self> {
        match kind {
            RepKind::Adjoint => Ok(Self::adjoint(cb)),
            RepKind::Defining => Self::defining(cb),
        }
    }

    /// Max-entry defect of `ρ([b_i, b_j]) = [ρ(b_i), ρ(b_j)]` over all pairs.
    pub fn homomorphism_defect(&self, cb: &ChevalleyBasis) -> f64 {
        let dim = cb.dim();
        let mut worst: f64 = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                let lhs = commutator(&self.matrices[i], &self.matrices[j]);
                let mut rhs = DMatrix::from_element(self.size, self.size, cz());
                for &(k, c) in cb.bracket_basis(i, j) {
                    rhs += &self.matrices[k] * Complex64::new(c as f64, 0.0);
                }
                let d = (lhs - rhs).iter().map(|v| v.norm()).fold(0.0, f64::max);
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Matrix of a general element.
    pub fn matrix(&self, x: &[Complex64]) -> DMatrix<Complex64> {
        let mut m = DMatrix::from_element(self.size, self.size, cz());
        for (i, xi) in x.iter().enumerate() {
            if *xi != cz() {
                m += &self.matrices[i] * *xi;
            }
        }
        m
    }
}
