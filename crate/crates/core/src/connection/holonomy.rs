use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::form::{AlgebraField, ConnectionForm};
use crate::error::{Error, Result};
use crate::geometry::{FieldC, Grid};
use crate::lie::{LieData, Representation};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
/// Agreement required between successive step refinements.
pub const HOLONOMY_TOL: f64 = 1e-9;
const MAX_REFINEMENTS: usize = 10;

/// Curvature `F = ∂_z A_z̄ − ∂_z̄ A_z + [A_z, A_z̄]`, the `dz∧dz̄` coefficient.
pub fn curvature(lie: &LieData, grid: &Grid, conn: &ConnectionForm) -> AlgebraField {
    let d1 = conn.a_zb.map_comps(|f| grid.dz(f));
    let d2 = conn.a_z.map_comps(|f| grid.dzb(f));
    d1.sub(&d2).add(&conn.a_z.bracket(&conn.a_zb, lie))
}

/// A path through grid nodes made of axis-aligned segments. Indices may
/// leave `[0, N)`; the chart is periodic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridPath {
    pub points: Vec<(i64, i64)>,
}

impl GridPath {
    /// Loop once around the x direction along row `iy`.
    pub fn loop_x(n: usize, iy: i64) -> Self {
        GridPath { points: vec![(0, iy), (n as i64, iy)] }
    }

    pub fn loop_y(n: usize, ix: i64) -> Self {
        GridPath { points: vec![(ix, 0), (ix, n as i64)] }
    }

    /// Parse `loop:x`, `loop:x@ROW`, `loop:y`, `loop:y@COL` or a JSON list of
    /// `[ix, iy]` points.
    pub fn parse(spec: &str, n: usize) -> Result<Self> {
        let spec = spec.trim();
        if let Some(rest) = spec.strip_prefix("loop:") {
            let (axis, at) = match rest.split_once('@') {
                Some((a, i)) => {
                    let idx = i
                        .parse::<i64>()
                        .map_err(|_| Error::Config(format!("bad loop offset in path '{spec}'")))?;
                    (a, idx)
                }
                None => (rest, 0),
            };
            return match axis {
                "x" => Ok(Self::loop_x(n, at)),
                "y" => Ok(Self::loop_y(n, at)),
                _ => Err(Error::Config(format!("unknown loop axis in path '{spec}'"))),
            };
        }
        let pts: Vec<[i64; 2]> = serde_json::from_str(spec)
            .map_err(|e| Error::Config(format!("path must be loop:x, loop:y or a JSON point list: {e}")))?;
        let path = GridPath { points: pts.into_iter().map(|[a, b]| (a, b)).collect() };
        path.validate()?;
        Ok(path)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.len() < 2 {
            return Err(Error::Config("a path needs at least two points".into()));
        }
        for w in self.points.windows(2) {
            if w[0].0 != w[1].0 && w[0].1 != w[1].1 {
                return Err(Error::Config(format!("segment {:?} -> {:?} is not grid aligned", w[0], w[1])));
            }
        }
        Ok(())
    }

    pub fn reversed(&self) -> Self {
        let mut points = self.points.clone();
        points.reverse();
        GridPath { points }
    }

    pub fn translated(&self, dx: i64, dy: i64) -> Self {
        GridPath { points: self.points.iter().map(|(a, b)| (a + dx, b + dy)).collect() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HolonomyResult {
    #[serde(with = "matrix_serde")]
    pub matrix: DMatrix<Complex64>,
    pub path: GridPath,
    pub trace: Complex64,
    pub determinant: Complex64,
    /// RK4 steps per grid cell in the accepted integration.
    pub steps_per_cell: usize,
    /// Max-entry difference between the last two refinements.
    pub refinement_change: f64,
    /// False when refinement stopped before reaching the tolerance.
    pub converged: bool,
}

mod matrix_serde {
    use nalgebra::DMatrix;
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &DMatrix<Complex64>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> =
            (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<Complex64>, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let nr = rows.len();
        let nc = rows.first().map(|r| r.len()).unwrap_or(0);
        if rows.iter().any(|r| r.len() != nc) {
            return Err(serde::de::Error::custom("ragged matrix"));
        }
        Ok(DMatrix::from_fn(nr, nc, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
    }
}

/// Trigonometric interpolant of one grid line of a Lie-algebra field.
struct LineInterpolant {
    n: usize,
    /// Fourier coefficients per basis component, already divided by `n`.
    coeffs: Vec<Vec<Complex64>>,
}

impl LineInterpolant {
    fn new(values: &[Vec<Complex64>]) -> Self {
        let n = values.len();
        let dim = values[0].len();
        let mut planner = rustfft::FftPlanner::new();
        let fft = planner.plan_fft_forward(n);
        let coeffs = (0..dim)
            .map(|i| {
                let mut line: Vec<Complex64> = values.iter().map(|v| v[i]).collect();
                fft.process(&mut line);
                line.iter().map(|c| c / n as f64).collect()
            })
            .collect();
        LineInterpolant { n, coeffs }
    }

    /// Value at fractional index `t` (in grid cells).
    fn eval(&self, t: f64, out: &mut [Complex64]) {
        let n = self.n;
        let theta = 2.0 * std::f64::consts::PI * t / n as f64;
        let phases: Vec<Complex64> = (0..n)
            .map(|k| {
                let kk = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
                if n % 2 == 0 && k == n / 2 {
                    Complex64::new((kk * theta).cos(), 0.0)
                } else {
                    Complex64::from_polar(1.0, kk * theta)
                }
            })
            .collect();
        for (o, c) in out.iter_mut().zip(&self.coeffs) {
            *o = c.iter().zip(&phases).map(|(a, p)| a * p).sum();
        }
    }
}

/// `A(∂_x) = A_z + A_z̄` and `A(∂_y) = i (A_z − A_z̄)`.
fn directional(conn: &ConnectionForm) -> (AlgebraField, AlgebraField) {
    let ax = conn.a_z.add(&conn.a_zb);
    let ay = conn.a_z.sub(&conn.a_zb).scale(Complex64::new(0.0, 1.0));
    (ax, ay)
}

fn line_values(field: &AlgebraField, along_x: bool, fixed: i64) -> Vec<Vec<Complex64>> {
    let n = field.n;
    let f = fixed.rem_euclid(n as i64) as usize;
    (0..n)
        .map(|t| {
            let k = if along_x { f * n + t } else { t * n + f };
            field.at(k)
        })
        .collect()
}

fn segment_transport(
    rep: &Representation,
    interp: &LineInterpolant,
    start: f64,
    cells: f64,
    spacing: f64,
    steps: usize,
) -> DMatrix<Complex64> {
    let size = rep.size;
    let dim = interp.coeffs.len();
    let mut t = DMatrix::<Complex64>::identity(size, size);
    let h = cells / steps as f64;
    let mut buf = vec![ZERO; dim];
    let mut a_at = |s: f64| {
        interp.eval(start + s, &mut buf);
        rep.matrix(&buf) * Complex64::new(spacing * cells.signum(), 0.0)
    };
    // dT/ds = T A(γ(s)) |γ'|, with s measured in cells along the segment.
    let hs = h.abs();
    let mut s = 0.0;
    let mut a0 = a_at(0.0);
    for _ in 0..steps {
        let am = a_at(s + 0.5 * h);
        let a1 = a_at(s + h);
        let k1 = &t * &a0;
        let k2 = (&t + &k1 * Complex64::new(0.5 * hs, 0.0)) * &am;
        let k3 = (&t + &k2 * Complex64::new(0.5 * hs, 0.0)) * &am;
        let k4 = (&t + &k3 * Complex64::new(hs, 0.0)) * &a1;
        t += (k1 + k2 * Complex64::new(2.0, 0.0) + k3 * Complex64::new(2.0, 0.0) + k4) * Complex64::new(hs / 6.0, 0.0);
        s += h;
        a0 = a1;
    }
    t
}

fn path_transport(
    conn: &ConnectionForm,
    rep: &Representation,
    grid: &Grid,
    path: &GridPath,
    steps_per_cell: usize,
) -> DMatrix<Complex64> {
    let (ax, ay) = directional(conn);
    let mut total = DMatrix::<Complex64>::identity(rep.size, rep.size);
    for w in path.points.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        let (interp, start, cells) = if y0 == y1 {
            (LineInterpolant::new(&line_values(&ax, true, y0)), x0 as f64, (x1 - x0) as f64)
        } else {
            (LineInterpolant::new(&line_values(&ay, false, x0)), y0 as f64, (y1 - y0) as f64)
        };
        if cells == 0.0 {
            continue;
        }
        let steps = steps_per_cell * cells.abs() as usize;
        total = total * segment_transport(rep, &interp, start, cells, grid.spacing(), steps);
    }
    total
}

/// Path-ordered exponential along `path`, solving `dT = T A` with RK4 and
/// doubling the step count until two refinements agree to [`HOLONOMY_TOL`].
pub fn holonomy(
    lie: &LieData,
    grid: &Grid,
    conn: &ConnectionForm,
    path: &GridPath,
) -> Result<HolonomyResult> {
    path.validate()?;
    if !grid.periodic {
        return Err(Error::Config("holonomy needs a periodic chart".into()));
    }
    let rep = Representation::kind_for(&lie.basis, conn.rep)?;
    let mut steps = 1;
    let mut prev = path_transport(conn, &rep, grid, path, steps);
    let mut change = f64::INFINITY;
    let mut converged = false;
    for _ in 0..MAX_REFINEMENTS {
        steps *= 2;
        let next = path_transport(conn, &rep, grid, path, steps);
        change = (&next - &prev).iter().map(|v| v.norm()).fold(0.0, f64::max);
        prev = next;
        if change <= HOLONOMY_TOL {
            converged = true;
            break;
        }
    }
    Ok(HolonomyResult {
        trace: prev.trace(),
        determinant: prev.determinant(),
        matrix: prev,
        path: path.clone(),
        steps_per_cell: steps,
        refinement_change: change,
        converged,
    })
}

/// `tr H^k` for `k = 1..size`.
pub fn trace_invariants(hol: &DMatrix<Complex64>) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(hol.nrows());
    let mut p = hol.clone();
    for _ in 0..hol.nrows() {
        out.push(p.trace());
        p = &p * hol;
    }
    out
}

/// Max-entry norm of `[H_a, H_b]`.
pub fn commutator_norm(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a * b - b * a).iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// The exact abelian connection `df ⊗ h`.
pub fn exact_abelian(lie: &LieData, grid: &Grid, f: &FieldC, h: &[Complex64]) -> ConnectionForm {
    let a_z = AlgebraField::from_scalar(&grid.dz(f), h);
    let a_zb = AlgebraField::from_scalar(&grid.dzb(f), h);
    ConnectionForm { a_z, a_zb, rep: super::form::default_rep_kind(lie) }
}
