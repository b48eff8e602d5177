//! Run configurations, field files and scalar field specifications.
//!
//! Complex numbers are `[re, im]` pairs and fields are stored row-major,
//! `data[iy * N + ix]`. Every reader rejects unknown keys and reports the
//! JSON path of the first offending value.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{bers_from_quadratic_perturbation, Backend, ComplexMetricField, FieldC, Grid};
use crate::lie::{CartanSign, CartanType, LieData};
use crate::toda::{NewtonOptions, TodaForm, TodaProblem};

pub type Pair = [f64; 2];

pub fn to_pair(z: Complex64) -> Pair {
    [z.re, z.im]
}

pub fn from_pair(p: Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

/// Deserialize `text`, turning failures into [`Error::Schema`] with the path
/// of the offending value.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| Error::Schema {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    de.end().map_err(|e| Error::Schema { path: ".".into(), message: e.to_string() })?;
    Ok(value)
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// Named complex fields on one `N × N` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldFile {
    #[serde(rename = "N")]
    pub n: usize,
    pub fields: BTreeMap<String, Vec<Pair>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

impl FieldFile {
    pub fn new(n: usize) -> Self {
        FieldFile { n, fields: BTreeMap::new(), meta: None }
    }

    pub fn insert(&mut self, name: &str, f: &FieldC) -> Result<()> {
        if f.n != self.n {
            return Err(Error::Shape(format!("field {name} has N = {} but the file has N = {}", f.n, self.n)));
        }
        self.fields.insert(name.to_string(), f.data.iter().map(|z| to_pair(*z)).collect());
        Ok(())
    }

    pub fn field(&self, name: &str) -> Result<FieldC> {
        let data = self.fields.get(name).ok_or_else(|| Error::Schema {
            path: format!("fields.{name}"),
            message: "missing field".into(),
        })?;
        if data.len() != self.n * self.n {
            return Err(Error::Schema {
                path: format!("fields.{name}"),
                message: format!("expected {} values, found {}", self.n * self.n, data.len()),
            });
        }
        Ok(FieldC { n: self.n, data: data.iter().map(|p| from_pair(*p)).collect() })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let file: FieldFile = parse_json(&read_text(path)?)?;
        for (name, data) in &file.fields {
            if data.len() != file.n * file.n {
                return Err(Error::Schema {
                    path: format!("fields.{name}"),
                    message: format!("expected {} values, found {}", file.n * file.n, data.len()),
                });
            }
        }
        Ok(file)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

/// One Fourier mode `c · exp(2πi (kx x + ky y))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigTerm {
    pub k: [i32; 2],
    pub coeff: Pair,
}

/// A complex scalar field given by value, by Fourier coefficients or by a
/// named entry of a field file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ScalarSpec {
    Constant { value: Pair },
    Trig { terms: Vec<TrigTerm> },
    File { path: PathBuf, field: String },
}

impl Default for ScalarSpec {
    fn default() -> Self {
        ScalarSpec::Constant { value: [0.0, 0.0] }
    }
}

impl ScalarSpec {
    pub fn constant(z: Complex64) -> Self {
        ScalarSpec::Constant { value: to_pair(z) }
    }

    /// Relative file paths are resolved against `base`.
    pub fn evaluate(&self, grid: &Grid, base: &Path) -> Result<FieldC> {
        match self {
            ScalarSpec::Constant { value } => Ok(FieldC::constant(grid.n, from_pair(*value))),
            ScalarSpec::Trig { terms } => Ok(grid.field_from_fn(|x, y| {
                terms
                    .iter()
                    .map(|t| {
                        let phase = 2.0 * PI * (t.k[0] as f64 * x + t.k[1] as f64 * y);
                        from_pair(t.coeff) * Complex64::from_polar(1.0, phase)
                    })
                    .sum()
            })),
            ScalarSpec::File { path, field } => {
                let file = FieldFile::read(&base.join(path))?;
                if file.n != grid.n {
                    return Err(Error::Shape(format!("{} has N = {}, the run uses {}", path.display(), file.n, grid.n)));
                }
                file.field(field)
            }
        }
    }
}

fn default_half_width() -> f64 {
    crate::geometry::POINCARE_HALF_WIDTH
}

/// Background metric of a run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MetricSpec {
    /// `|dz|²` on the unit torus.
    #[default]
    Flat,
    /// Disc metric on a square patch, differentiated with fourth-order stencils.
    PoincarePatch {
        #[serde(default = "default_half_width")]
        half_width: f64,
    },
    /// The Bers metric induced by `λ₀|dz|² + φ₀ dz²`.
    Perturbed { lambda0: ScalarSpec, phi0: ScalarSpec },
    /// `λ |dz|²` with the trivial second chart.
    Conformal { lambda: ScalarSpec },
    /// `λ`, `p = ∂_z w̄` and `m = ∂_z̄ w̄` read from one field file.
    Files { path: PathBuf },
}

impl MetricSpec {
    pub fn build(&self, n: usize, backend: Backend, base: &Path) -> Result<ComplexMetricField> {
        let periodic = || Grid::periodic(n, backend);
        match self {
            MetricSpec::Flat => ComplexMetricField::flat(periodic()?),
            MetricSpec::PoincarePatch { half_width } => ComplexMetricField::poincare_patch(n, *half_width),
            MetricSpec::Perturbed { lambda0, phi0 } => {
                let grid = periodic()?;
                let l0 = lambda0.evaluate(&grid, base)?;
                let p0 = phi0.evaluate(&grid, base)?;
                bers_from_quadratic_perturbation(&grid, &l0, &p0)
            }
            MetricSpec::Conformal { lambda } => {
                let grid = periodic()?;
                let l = lambda.evaluate(&grid, base)?;
                ComplexMetricField::conformal(grid, l)
            }
            MetricSpec::Files { path } => {
                let file = FieldFile::read(&base.join(path))?;
                if file.n != n {
                    return Err(Error::Shape(format!("{} has N = {}, the run uses {n}", path.display(), file.n)));
                }
                ComplexMetricField::new(periodic()?, file.field("lambda")?, file.field("p")?, file.field("m")?)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LieSpec {
    #[serde(rename = "type")]
    pub kind: CartanType,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    #[serde(rename = "N")]
    pub n: usize,
    pub backend: Backend,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { n: 32, backend: Backend::Spectral }
    }
}

/// Sign of `Δ_h`. Only the value selected by `Δ_h log λ = +2` on the disc
/// metric is implemented; the flag exists so configurations state it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LaplacianSign {
    #[default]
    Positive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Conventions {
    pub a_sign: CartanSign,
    pub laplacian_sign: LaplacianSign,
    pub form_scale: f64,
}

impl Default for Conventions {
    fn default() -> Self {
        Conventions { a_sign: CartanSign::Standard, laplacian_sign: LaplacianSign::Positive, form_scale: 1.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub lie: LieSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub metric: MetricSpec,
    #[serde(default)]
    pub q1: ScalarSpec,
    #[serde(default)]
    pub q2bar: ScalarSpec,
    /// Oper differentials `q_i`, one per exponent; missing slots are zero.
    #[serde(default)]
    pub differentials: Vec<ScalarSpec>,
    #[serde(default)]
    pub form: TodaForm,
    #[serde(default)]
    pub symmetry: bool,
    #[serde(default)]
    pub solver: NewtonOptions,
    #[serde(default)]
    pub conventions: Conventions,
    #[serde(default)]
    pub seed: u64,
    /// Directory that relative file paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = parse_json(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_json(&read_text(path)?)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        let schema = |path: &str, message: String| Err(Error::Schema { path: path.into(), message });
        if self.grid.n < 8 || self.grid.n % 2 != 0 {
            return schema("grid.N", format!("must be even and at least 8, got {}", self.grid.n));
        }
        if !(self.solver.tol > 0.0) {
            return schema("solver.tol", "must be positive".into());
        }
        if self.solver.max_iter == 0 {
            return schema("solver.max_iter", "must be at least 1".into());
        }
        if !(self.conventions.form_scale > 0.0) {
            return schema("conventions.form_scale", "must be positive".into());
        }
        if self.differentials.len() > self.lie.rank {
            return schema(
                "differentials",
                format!("{} entries for rank {}", self.differentials.len(), self.lie.rank),
            );
        }
        Ok(())
    }

    pub fn lie_data(&self) -> Result<LieData> {
        LieData::with_options(self.lie.kind, self.lie.rank, self.conventions.a_sign, self.conventions.form_scale)
    }

    pub fn metric(&self) -> Result<ComplexMetricField> {
        self.metric.build(self.grid.n, self.grid.backend, &self.base_dir)
    }

    pub fn q_fields(&self, grid: &Grid) -> Result<(FieldC, FieldC)> {
        Ok((self.q1.evaluate(grid, &self.base_dir)?, self.q2bar.evaluate(grid, &self.base_dir)?))
    }

    /// One field per exponent, padded with zeros.
    pub fn differential_fields(&self, grid: &Grid) -> Result<Vec<FieldC>> {
        (0..self.lie.rank)
            .map(|i| match self.differentials.get(i) {
                Some(spec) => spec.evaluate(grid, &self.base_dir),
                None => Ok(FieldC::zeros(grid.n)),
            })
            .collect()
    }

    pub fn toda_problem(&self, lie: &LieData) -> Result<TodaProblem> {
        let metric = self.metric()?;
        let (q1, q2bar) = self.q_fields(&metric.grid)?;
        TodaProblem::new(lie.toda.clone(), metric, q1, q2bar, self.form, self.symmetry)
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}
