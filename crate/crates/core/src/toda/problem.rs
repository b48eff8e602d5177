use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ComplexMetricField, FieldC};
use crate::lie::TodaData;

/// Which version of the Toda system is solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TodaForm {
    /// `Δ_h u_α − 2 Σ a_{αβ} r_β U_β + 2 a_{αδ} Q U_{−δ} + 2 = 0`, which
    /// assumes `Δ_h log λ = 2`.
    Reduced,
    /// `¼ Δ_h (log λ + u_α) − ½ Σ a_{αβ} r_β U_β + ½ a_{αδ} Q U_{−δ} = 0`,
    /// the exact flatness condition on any background.
    #[default]
    Unreduced,
}

/// Background data entering the equations: `L = log λ`, `Δ_h L` and
/// `P = q₁ q̄₂`. Continuation deforms these.
#[derive(Debug, Clone)]
pub(crate) struct Forcing {
    pub log_lambda: FieldC,
    pub lap_log_lambda: FieldC,
    pub q_product: FieldC,
}

#[derive(Debug, Clone)]
pub struct TodaProblem {
    pub data: TodaData,
    pub metric: ComplexMetricField,
    pub q1: FieldC,
    pub q2bar: FieldC,
    pub form: TodaForm,
    /// Enforce `u_α = u_{ξ(α)}` by solving for one field per ξ-orbit.
    pub symmetry: bool,
    pub(crate) forcing: Forcing,
    laplacian: Arc<OnceLock<DMatrix<Complex64>>>,
}

impl TodaProblem {
    pub fn new(
        data: TodaData,
        metric: ComplexMetricField,
        q1: FieldC,
        q2bar: FieldC,
        form: TodaForm,
        symmetry: bool,
    ) -> Result<Self> {
        let n = metric.n();
        for (name, f) in [("q1", &q1), ("q2bar", &q2bar)] {
            if f.n != n {
                return Err(Error::Shape(format!("{name} has grid size {} but the metric has {n}", f.n)));
            }
            if !f.is_finite() {
                return Err(Error::Config(format!("{name} has non-finite values")));
            }
        }
        if !metric.grid.periodic {
            return Err(Error::Config("the Toda solver needs a periodic chart".into()));
        }
        let log_lambda = metric.log_lambda()?;
        let lap_log_lambda = metric.bers_laplacian(&log_lambda);
        let q_product = q1.mul(&q2bar);
        Ok(TodaProblem {
            data,
            metric,
            q1,
            q2bar,
            form,
            symmetry,
            forcing: Forcing { log_lambda, lap_log_lambda, q_product },
            laplacian: Arc::new(OnceLock::new()),
        })
    }

    pub fn n(&self) -> usize {
        self.metric.n()
    }

    pub fn rank(&self) -> usize {
        self.data.rank
    }

    /// Unknown fields: one per ξ-orbit with symmetry, one per simple root otherwise.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        if self.symmetry {
            self.data.orbits()
        } else {
            (0..self.rank()).map(|i| vec![i]).collect()
        }
    }

    pub fn num_fields(&self) -> usize {
        self.groups().len()
    }

    pub fn num_unknowns(&self) -> usize {
        self.num_fields() * self.n() * self.n()
    }

    /// Copy each orbit field to every root of its orbit.
    pub fn expand(&self, u: &[FieldC]) -> Vec<FieldC> {
        let groups = self.groups();
        assert_eq!(u.len(), groups.len(), "expected {} unknown fields", groups.len());
        let mut full = vec![FieldC::zeros(self.n()); self.rank()];
        for (g, f) in groups.iter().zip(u) {
            for &i in g {
                full[i] = f.clone();
            }
        }
        full
    }

    /// Keep the orbit representative (the smallest index) of each orbit.
    pub fn restrict(&self, full: &[FieldC]) -> Vec<FieldC> {
        self.groups().iter().map(|g| full[g[0]].clone()).collect()
    }

    /// Coefficient of `Δ_h u_α` in the residual.
    pub(crate) fn laplacian_weight(&self) -> f64 {
        match self.form {
            TodaForm::Reduced => 1.0,
            TodaForm::Unreduced => 0.25,
        }
    }

    /// Coefficient of `(−Σ a r U + a_δ Q U_{−δ})` in the residual.
    pub(crate) fn reaction_weight(&self) -> f64 {
        match self.form {
            TodaForm::Reduced => 2.0,
            TodaForm::Unreduced => 0.5,
        }
    }

    /// The same problem with the enforced symmetry switched on.
    pub fn symmetric(&self) -> TodaProblem {
        let mut p = self.clone();
        p.symmetry = true;
        p
    }

    pub(crate) fn with_forcing(&self, forcing: Forcing) -> TodaProblem {
        let mut p = self.clone();
        p.forcing = forcing;
        p
    }

    /// Dense matrix of `Δ_h` on the grid, built once per metric.
    pub fn laplacian_matrix(&self) -> &DMatrix<Complex64> {
        self.laplacian.get_or_init(|| {
            let n = self.n();
            let nn = n * n;
            let cols: Vec<Vec<Complex64>> = (0..nn)
                .into_par_iter()
                .map(|j| {
                    let mut e = FieldC::zeros(n);
                    e.data[j] = Complex64::new(1.0, 0.0);
                    self.metric.bers_laplacian(&e).data
                })
                .collect();
            DMatrix::from_fn(nn, nn, |i, j| cols[j][i])
        })
    }
}

/// Reduce to one unknown per ξ-orbit. The trivial ξ leaves the problem unchanged
/// apart from the flag.
pub fn symmetry_reduce(problem: &TodaProblem) -> TodaProblem {
    problem.symmetric()
}
