//! Root systems, Chevalley bases, principal triples and Toda coefficients.

mod chevalley;
mod rep;
mod roots;
mod toda_data;
mod triple;

pub use chevalley::{build_chevalley_basis, ChevalleyBasis, StructureConstant};
pub use rep::{RepKind, Representation};
pub use roots::{build_root_system, CartanType, RootSystem};
pub use toda_data::{
    constant_solution, substituted_constant_solution, toda_coefficients, CartanSign, TodaData, HIGGS_SCALE,
};
pub use triple::{
    automorphism_defect, highest_weight_vectors, principal_triple, sigma0, xi_permutation, HighestWeightVectors,
    PrincipalTriple,
};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Everything derived from a (type, rank) pair, immutable after construction.
#[derive(Debug, Clone)]
pub struct LieData {
    pub basis: ChevalleyBasis,
    pub triple: PrincipalTriple,
    pub hw: HighestWeightVectors,
    pub toda: TodaData,
    /// Gram matrix of the invariant form on basis elements.
    pub killing: DMatrix<f64>,
}

impl LieData {
    pub fn new(kind: CartanType, rank: usize) -> Result<Self> {
        Self::with_options(kind, rank, CartanSign::Standard, 1.0)
    }

    pub fn with_options(kind: CartanType, rank: usize, convention: CartanSign, form_scale: f64) -> Result<Self> {
        if !(form_scale > 0.0) {
            return Err(Error::Config("invariant form scale must be positive".into()));
        }
        let rs = build_root_system(kind, rank)?;
        let basis = build_chevalley_basis(&rs)?;
        let triple = principal_triple(&basis)?;
        let hw = highest_weight_vectors(&basis, &triple)?;
        let s0 = sigma0(&basis, &triple, &hw)?;
        let xi = xi_permutation(&basis, &s0)?;
        let toda = toda_coefficients(&basis, &triple, xi, convention, form_scale)?;
        let killing = killing_matrix(&basis, form_scale);
        Ok(LieData { basis, triple, hw, toda, killing })
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn rank(&self) -> usize {
        self.basis.rank()
    }

    /// `ν(X, Y)`, evaluated so that `ν(X, Y) = ν(Y, X)` holds bit for bit.
    pub fn killing_form(&self, x: &[Complex64], y: &[Complex64]) -> Complex64 {
        killing_eval(&self.killing, x, y)
    }

    /// Invariant polynomials via traces of powers in the defining representation.
    pub fn invariant_poly_eval(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        invariant_poly_eval(&self.basis, x)
    }
}

/// `ν(b_i, b_j) = scale · tr(ad b_i ad b_j)`.
pub fn killing_matrix(cb: &ChevalleyBasis, scale: f64) -> DMatrix<f64> {
    let ads = cb.adjoint_matrices();
    let dim = cb.dim();
    DMatrix::from_fn(dim, dim, |i, j| scale * (&ads[i] * &ads[j]).trace())
}

pub fn killing_eval(k: &DMatrix<f64>, x: &[Complex64], y: &[Complex64]) -> Complex64 {
    let dim = x.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..dim {
        let kii = k[(i, i)];
        if kii != 0.0 {
            acc += x[i] * y[i] * kii;
        }
        for j in (i + 1)..dim {
            let kij = k[(i, j)];
            if kij != 0.0 {
                acc += (x[i] * y[j] + x[j] * y[i]) * kij;
            }
        }
    }
    acc
}

/// Generators `p_1..p_l`: `tr X^{k+1}` for type A, `tr X^{2k}` for type C.
pub fn invariant_poly_eval(cb: &ChevalleyBasis, x: &[Complex64]) -> Result<Vec<Complex64>> {
    let kind = cb.roots.cartan_type;
    let degrees: Vec<usize> = match kind {
        CartanType::A => (1..=cb.rank()).map(|k| k + 1).collect(),
        CartanType::C => (1..=cb.rank()).map(|k| 2 * k).collect(),
        _ => {
            return Err(Error::Unsupported(format!(
                "invariant polynomials need a defining representation; none for type {}",
                kind.letter()
            )))
        }
    };
    let rep = Representation::defining(cb)?;
    let m = rep.matrix(x);
    let mut out = Vec::with_capacity(degrees.len());
    let mut power = DMatrix::<Complex64>::identity(rep.size, rep.size);
    let mut current = 0;
    for deg in degrees {
        while current < deg {
            power = &power * &m;
            current += 1;
        }
        out.push(power.trace());
    }
    Ok(out)
}
