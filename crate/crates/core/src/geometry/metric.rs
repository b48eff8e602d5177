use num_complex::Complex64;

use super::field::{FieldC, OneFormC};
use super::grid::{Backend, Deriv, Grid};
use crate::error::{Error, Result};

/// Largest admissible `|μ|` before a chart is rejected.
pub const MU_LIMIT: f64 = 1.0 - 1e-9;
const TINY: f64 = 1e-12;
/// Default half width of the Poincaré test patch.
pub const POINCARE_HALF_WIDTH: f64 = 0.35;

/// A Bers metric `λ dz dw̄` sampled on a grid chart.
///
/// The second coordinate is stored through its derivatives `p = ∂_z w̄` and
/// `m = ∂_z̄ w̄`, so that `dw̄ = p dz + m dz̄` and `μ̄ = p / m`. `wbar` keeps the
/// coordinate values themselves when they are known.
#[derive(Debug, Clone)]
pub struct ComplexMetricField {
    pub grid: Grid,
    pub lambda: FieldC,
    pub p: FieldC,
    pub m: FieldC,
    pub mubar: FieldC,
    pub wbar: Option<FieldC>,
    dzb_mubar: FieldC,
}

impl ComplexMetricField {
    pub fn new(grid: Grid, lambda: FieldC, p: FieldC, m: FieldC) -> Result<Self> {
        let n = grid.n;
        for (name, f) in [("lambda", &lambda), ("p", &p), ("m", &m)] {
            if f.n != n || f.len() != n * n {
                return Err(Error::Shape(format!("field {name} has size {} but the grid has {n}", f.n)));
            }
            if !f.is_finite() {
                return Err(Error::DegenerateMetric(format!("field {name} has non-finite values")));
            }
        }
        let mut mubar = FieldC::zeros(n);
        for k in 0..n * n {
            let (ix, iy) = (k % n, k / n);
            if lambda.data[k].norm() < TINY {
                return Err(Error::DegenerateMetric(format!("lambda vanishes at node ({ix}, {iy})")));
            }
            if m.data[k].norm() < TINY {
                return Err(Error::DegenerateChart(format!("d w̄/d z̄ vanishes at node ({ix}, {iy})")));
            }
            let mu = p.data[k] / m.data[k];
            if mu.norm() >= MU_LIMIT {
                return Err(Error::DegenerateMetric(format!(
                    "|mu| = {:.6} at node ({ix}, {iy}) violates positivity",
                    mu.norm()
                )));
            }
            mubar.data[k] = mu;
        }
        let dzb_mubar = if mubar.sup_norm() == 0.0 { FieldC::zeros(n) } else { grid.dzb(&mubar) };
        Ok(ComplexMetricField { grid, lambda, p, m, mubar, wbar: None, dzb_mubar })
    }

    /// `λ dz dz̄` with the trivial second chart `w = z`.
    pub fn conformal(grid: Grid, lambda: FieldC) -> Result<Self> {
        let n = grid.n;
        let wbar = grid.field_from_fn(|x, y| Complex64::new(x, -y));
        let mut out = Self::new(grid, lambda, FieldC::zeros(n), FieldC::constant(n, Complex64::new(1.0, 0.0)))?;
        out.wbar = Some(wbar);
        Ok(out)
    }

    pub fn flat(grid: Grid) -> Result<Self> {
        let n = grid.n;
        Self::conformal(grid, FieldC::constant(n, Complex64::new(1.0, 0.0)))
    }

    /// The disc metric `4 / (1 − |z|²)²` on the square `[−a, a]²`, differentiated
    /// with fourth-order differences.
    pub fn poincare_patch(n: usize, half_width: f64) -> Result<Self> {
        if !(half_width > 0.0 && half_width < std::f64::consts::FRAC_1_SQRT_2) {
            return Err(Error::Config("patch half width must lie in (0, 1/√2)".into()));
        }
        let grid = Grid::patch(n, (-half_width, -half_width), 2.0 * half_width)?;
        let lambda = grid.field_from_fn(|x, y| {
            let s = 1.0 - (x * x + y * y);
            Complex64::new(4.0 / (s * s), 0.0)
        });
        Self::conformal(grid, lambda)
    }

    /// Chart `w̄ = z̄ + ψ` with `ψ` periodic, so `p = ψ_z` and `m = 1 + ψ_z̄`.
    pub fn from_wbar_perturbation(grid: Grid, lambda: FieldC, psi: &FieldC) -> Result<Self> {
        let p = grid.dz(psi);
        let m = grid.dzb(psi).map(|v| v + 1.0);
        let wbar = grid.field_from_fn(|x, y| Complex64::new(x, -y)).add(psi);
        let mut out = Self::new(grid, lambda, p, m)?;
        out.wbar = Some(wbar);
        Ok(out)
    }

    pub fn n(&self) -> usize {
        self.grid.n
    }

    pub fn backend(&self) -> Backend {
        self.grid.backend
    }

    pub fn with_backend(&self, backend: Backend) -> Result<Self> {
        let grid = self.grid.with_backend(backend)?;
        let mut out = Self::new(grid, self.lambda.clone(), self.p.clone(), self.m.clone())?;
        out.wbar = self.wbar.clone();
        Ok(out)
    }

    /// True when `μ ≡ 0`, i.e. both complex structures agree.
    pub fn is_conformal(&self, tol: f64) -> bool {
        self.mubar.sup_norm() <= tol
    }

    pub fn interior_mask(&self) -> Vec<bool> {
        self.grid.interior_mask()
    }

    /// Density `λ m` of the area form `dA = (i/2) λ m dz∧dz̄`.
    pub fn area_density(&self) -> FieldC {
        self.lambda.mul(&self.m)
    }

    /// `Δ_h f = 4/(λm) (f_zz̄ − (∂_z̄ μ̄) f_z̄ − μ̄ f_z̄z̄)`.
    pub fn bers_laplacian(&self, f: &FieldC) -> FieldC {
        let g = &self.grid;
        let fzzb = g.deriv(f, Deriv::ZZb);
        if self.is_conformal(0.0) {
            let mut out = fzzb;
            for k in 0..out.len() {
                out.data[k] *= 4.0 / (self.lambda.data[k] * self.m.data[k]);
            }
            return out;
        }
        let fzb = g.deriv(f, Deriv::Zb);
        let fzbzb = g.deriv(f, Deriv::ZbZb);
        let mut out = FieldC::zeros(f.n);
        for k in 0..out.len() {
            let inner = fzzb.data[k] - self.dzb_mubar.data[k] * fzb.data[k] - self.mubar.data[k] * fzbzb.data[k];
            out.data[k] = 4.0 * inner / (self.lambda.data[k] * self.m.data[k]);
        }
        out
    }

    /// `Δ_h f = 4/(λm) ∂_z̄ (f_z − μ̄ f_z̄)`, differentiating twice in sequence.
    pub fn bers_laplacian_composed(&self, f: &FieldC) -> FieldC {
        let g = self.del_coefficient(f);
        let gzb = self.grid.dzb(&g);
        let mut out = gzb;
        for k in 0..out.len() {
            out.data[k] *= 4.0 / (self.lambda.data[k] * self.m.data[k]);
        }
        out
    }

    /// Coefficient `f_z − μ̄ f_z̄` of `∂_J f`.
    pub fn del_coefficient(&self, f: &FieldC) -> FieldC {
        let fz = self.grid.dz(f);
        if self.is_conformal(0.0) {
            return fz;
        }
        let fzb = self.grid.dzb(f);
        FieldC { n: f.n, data: (0..f.len()).map(|k| fz.data[k] - self.mubar.data[k] * fzb.data[k]).collect() }
    }

    /// Split `ω` into its `dz` part and its `dw̄` part, both written in the
    /// `(dz, dz̄)` frame.
    pub fn project_forms(&self, w: &OneFormC) -> (OneFormC, OneFormC) {
        let n = w.dz.n;
        let mut p1 = OneFormC::zeros(n);
        let mut p2 = OneFormC::zeros(n);
        for k in 0..n * n {
            let mu = self.mubar.data[k];
            let shifted = mu * w.dzb.data[k];
            p1.dz.data[k] = w.dz.data[k] - shifted;
            p2.dz.data[k] = shifted;
            p2.dzb.data[k] = w.dzb.data[k];
        }
        (p1, p2)
    }

    /// `(∂_J f, ∂̄_J f)`.
    pub fn del_ops(&self, f: &FieldC) -> (OneFormC, OneFormC) {
        let df = OneFormC { dz: self.grid.dz(f), dzb: self.grid.dzb(f) };
        self.project_forms(&df)
    }

    /// `∂̄_J ∂_J f − (i/2) Δ_h f dA` as a coefficient of `dz∧dz̄`.
    ///
    /// The left side is `−∂_z̄ (f_z − μ̄ f_z̄)`, the right side `−¼ λ m Δ_h f`
    /// with `Δ_h` in expanded form.
    pub fn laplace_identity_defect(&self, f: &FieldC) -> FieldC {
        let lhs = self.grid.dzb(&self.del_coefficient(f));
        let lap = self.bers_laplacian(f);
        let n = f.n;
        FieldC {
            n,
            data: (0..n * n)
                .map(|k| -lhs.data[k] + 0.25 * self.lambda.data[k] * self.m.data[k] * lap.data[k])
                .collect(),
        }
    }

    /// A continuous logarithm of `λ`.
    ///
    /// The field is rotated by the phase of its mean before taking the
    /// principal branch; an error is returned if the rotated field still
    /// reaches the negative real axis.
    pub fn log_lambda(&self) -> Result<FieldC> {
        log_field(&self.lambda)
    }

    pub fn laplacian_log_lambda(&self) -> Result<FieldC> {
        Ok(self.bers_laplacian(&self.log_lambda()?))
    }

    /// `½ Δ_h log λ − 1`.
    pub fn gauss_curvature_defect(&self) -> Result<FieldC> {
        Ok(self.laplacian_log_lambda()?.map(|v| 0.5 * v - 1.0))
    }

    /// Evaluate a function of `w̄` at every node.
    pub fn pullback_wbar(&self, f: impl Fn(Complex64) -> Complex64) -> Result<FieldC> {
        let wbar = self
            .wbar
            .as_ref()
            .ok_or_else(|| Error::Precondition("metric does not carry the w̄ coordinate map".into()))?;
        Ok(wbar.map(f))
    }
}

/// Continuous logarithm of a nonvanishing field without branch crossings.
pub fn log_field(f: &FieldC) -> Result<FieldC> {
    let mean = f.mean();
    let rot = if mean.norm() > 0.0 { Complex64::from_polar(1.0, -mean.arg()) } else { Complex64::new(1.0, 0.0) };
    let shift = Complex64::new(0.0, -rot.arg());
    let mut out = FieldC::zeros(f.n);
    for (o, v) in out.data.iter_mut().zip(&f.data) {
        let r = v * rot;
        if r.re <= 0.0 && r.im.abs() < 0.5 * r.norm() {
            return Err(Error::DegenerateMetric(
                "logarithm of lambda is not single valued on this chart".into(),
            ));
        }
        *o = r.ln() + shift;
    }
    Ok(out)
}
