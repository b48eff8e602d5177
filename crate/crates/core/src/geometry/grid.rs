//! Grid charts and differentiation backends.
//!
//! Periodic charts cover `[0,1)²` and support both the spectral and the
//! fourth-order finite-difference backends. Patches are non-periodic, use
//! finite differences only, and produce values on interior nodes; the two
//! outermost rings are `NaN`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::field::FieldC;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    #[default]
    Spectral,
    Fd4,
}

#[derive(Clone)]
pub struct Grid {
    pub n: usize,
    pub periodic: bool,
    pub origin: (f64, f64),
    pub length: f64,
    pub backend: Backend,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.n)
            .field("periodic", &self.periodic)
            .field("origin", &self.origin)
            .field("length", &self.length)
            .field("backend", &self.backend)
            .finish()
    }
}

/// Which derivative to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Deriv {
    X,
    Y,
    XX,
    YY,
    XY,
    Z,
    Zb,
    ZZb,
    ZbZb,
    ZZ,
}

const NAN: Complex64 = Complex64 { re: f64::NAN, im: f64::NAN };

impl Grid {
    /// Periodic unit square with `n × n` nodes.
    pub fn periodic(n: usize, backend: Backend) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(Error::Config(format!("grid size must be even and at least 8, got {n}")));
        }
        Ok(Self::build(n, true, (0.0, 0.0), 1.0, backend))
    }

    /// Non-periodic square patch `[x0, x0 + length] × [y0, y0 + length]`
    /// including both endpoints.
    pub fn patch(n: usize, origin: (f64, f64), length: f64) -> Result<Self> {
        if n < 8 {
            return Err(Error::Config(format!("patch size must be at least 8, got {n}")));
        }
        Ok(Self::build(n, false, origin, length, Backend::Fd4))
    }

    fn build(n: usize, periodic: bool, origin: (f64, f64), length: f64, backend: Backend) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        Grid { n, periodic, origin, length, backend, fwd, inv }
    }

    pub fn with_backend(&self, backend: Backend) -> Result<Self> {
        if !self.periodic && backend == Backend::Spectral {
            return Err(Error::Config("spectral differentiation needs a periodic chart".into()));
        }
        let mut g = self.clone();
        g.backend = backend;
        Ok(g)
    }

    pub fn spacing(&self) -> f64 {
        if self.periodic {
            self.length / self.n as f64
        } else {
            self.length / (self.n - 1) as f64
        }
    }

    pub fn cell_area(&self) -> f64 {
        self.spacing() * self.spacing()
    }

    pub fn nodes(&self) -> usize {
        self.n * self.n
    }

    pub fn coord(&self, ix: usize, iy: usize) -> (f64, f64) {
        let h = self.spacing();
        (self.origin.0 + ix as f64 * h, self.origin.1 + iy as f64 * h)
    }

    pub fn z(&self, ix: usize, iy: usize) -> Complex64 {
        let (x, y) = self.coord(ix, iy);
        Complex64::new(x, y)
    }

    pub fn field_from_fn(&self, f: impl Fn(f64, f64) -> Complex64) -> FieldC {
        FieldC::from_fn(self.n, |ix, iy| {
            let (x, y) = self.coord(ix, iy);
            f(x, y)
        })
    }

    /// Nodes where derivatives are defined.
    pub fn interior_mask(&self) -> Vec<bool> {
        let n = self.n;
        let mut mask = vec![true; n * n];
        if !self.periodic {
            for iy in 0..n {
                for ix in 0..n {
                    if ix < 2 || iy < 2 || ix + 2 >= n || iy + 2 >= n {
                        mask[iy * n + ix] = false;
                    }
                }
            }
        }
        mask
    }

    fn check(&self, f: &FieldC) {
        assert_eq!(f.n, self.n, "field size {} does not match grid size {}", f.n, self.n);
    }

    pub fn fft2(&self, data: &mut [Complex64]) {
        let n = self.n;
        self.fwd.process(data);
        let mut t = transpose(data, n);
        self.fwd.process(&mut t);
        data.copy_from_slice(&transpose(&t, n));
    }

    pub fn ifft2(&self, data: &mut [Complex64]) {
        let n = self.n;
        self.inv.process(data);
        let mut t = transpose(data, n);
        self.inv.process(&mut t);
        let scale = 1.0 / (n * n) as f64;
        for (d, v) in data.iter_mut().zip(transpose(&t, n)) {
            *d = v * scale;
        }
    }

    /// Angular wavenumber of FFT index `i` and whether it is the Nyquist mode.
    pub fn wavenumber(&self, i: usize) -> (f64, bool) {
        let n = self.n;
        let k = if i <= n / 2 { i as f64 } else { i as f64 - n as f64 };
        (2.0 * std::f64::consts::PI * k / self.length, n % 2 == 0 && i == n / 2)
    }

    /// Multiply the spectrum by `symbol(kx, ky, nyq_x, nyq_y)`.
    pub fn apply_symbol(
        &self,
        f: &FieldC,
        symbol: impl Fn(f64, f64, bool, bool) -> Complex64,
    ) -> FieldC {
        self.check(f);
        let n = self.n;
        let mut data = f.data.clone();
        self.fft2(&mut data);
        for iy in 0..n {
            let (ky, ny) = self.wavenumber(iy);
            for ix in 0..n {
                let (kx, nx) = self.wavenumber(ix);
                data[iy * n + ix] *= symbol(kx, ky, nx, ny);
            }
        }
        self.ifft2(&mut data);
        FieldC { n, data }
    }

    pub fn deriv(&self, f: &FieldC, d: Deriv) -> FieldC {
        match self.backend {
            Backend::Spectral => self.spectral(f, d),
            Backend::Fd4 => self.fd4(f, d),
        }
    }

    pub fn dz(&self, f: &FieldC) -> FieldC {
        self.deriv(f, Deriv::Z)
    }

    pub fn dzb(&self, f: &FieldC) -> FieldC {
        self.deriv(f, Deriv::Zb)
    }

    fn spectral(&self, f: &FieldC, d: Deriv) -> FieldC {
        let i = Complex64::new(0.0, 1.0);
        let c = |v: f64| Complex64::new(v, 0.0);
        match d {
            Deriv::X => self.apply_symbol(f, |kx, _, nx, _| if nx { c(0.0) } else { i * kx }),
            Deriv::Y => self.apply_symbol(f, |_, ky, _, ny| if ny { c(0.0) } else { i * ky }),
            Deriv::XX => self.apply_symbol(f, |kx, _, _, _| c(-kx * kx)),
            Deriv::YY => self.apply_symbol(f, |_, ky, _, _| c(-ky * ky)),
            Deriv::XY => self.apply_symbol(f, |kx, ky, nx, ny| if nx || ny { c(0.0) } else { c(-kx * ky) }),
            Deriv::Z => self.apply_symbol(f, |kx, ky, nx, ny| {
                let ax = if nx { 0.0 } else { kx };
                let ay = if ny { 0.0 } else { ky };
                0.5 * (i * ax + ay)
            }),
            Deriv::Zb => self.apply_symbol(f, |kx, ky, nx, ny| {
                let ax = if nx { 0.0 } else { kx };
                let ay = if ny { 0.0 } else { ky };
                0.5 * (i * ax - ay)
            }),
            Deriv::ZZb => self.apply_symbol(f, |kx, ky, _, _| c(-0.25 * (kx * kx + ky * ky))),
            Deriv::ZbZb => self.apply_symbol(f, |kx, ky, nx, ny| {
                let mixed = if nx || ny { 0.0 } else { kx * ky };
                0.25 * (c(-kx * kx + ky * ky) - 2.0 * i * mixed)
            }),
            Deriv::ZZ => self.apply_symbol(f, |kx, ky, nx, ny| {
                let mixed = if nx || ny { 0.0 } else { kx * ky };
                0.25 * (c(-kx * kx + ky * ky) + 2.0 * i * mixed)
            }),
        }
    }

    fn fd4(&self, f: &FieldC, d: Deriv) -> FieldC {
        let i = Complex64::new(0.0, 1.0);
        match d {
            Deriv::X => self.fd_axis(f, true, false),
            Deriv::Y => self.fd_axis(f, false, false),
            Deriv::XX => self.fd_axis(f, true, true),
            Deriv::YY => self.fd_axis(f, false, true),
            Deriv::XY => self.fd_axis(&self.fd_axis(f, true, false), false, false),
            Deriv::Z => self.fd_axis(f, true, false).zip(&self.fd_axis(f, false, false), |a, b| 0.5 * (a - i * b)),
            Deriv::Zb => self.fd_axis(f, true, false).zip(&self.fd_axis(f, false, false), |a, b| 0.5 * (a + i * b)),
            Deriv::ZZb => self.fd_axis(f, true, true).zip(&self.fd_axis(f, false, true), |a, b| 0.25 * (a + b)),
            Deriv::ZbZb | Deriv::ZZ => {
                let sign = if d == Deriv::ZbZb { 1.0 } else { -1.0 };
                let xx = self.fd_axis(f, true, true);
                let yy = self.fd_axis(f, false, true);
                let xy = self.fd4(f, Deriv::XY);
                let mut out = xx.sub(&yy);
                for (o, m) in out.data.iter_mut().zip(&xy.data) {
                    *o = 0.25 * (*o + 2.0 * sign * i * m);
                }
                out
            }
        }
    }

    /// Fourth-order centered stencil along one axis.
    fn fd_axis(&self, f: &FieldC, along_x: bool, second: bool) -> FieldC {
        self.check(f);
        let n = self.n;
        let h = self.spacing();
        let mut out = vec![NAN; n * n];
        let get = |ix: isize, iy: isize| -> Option<Complex64> {
            if self.periodic {
                let ix = ix.rem_euclid(n as isize) as usize;
                let iy = iy.rem_euclid(n as isize) as usize;
                Some(f.data[iy * n + ix])
            } else if ix < 0 || iy < 0 || ix >= n as isize || iy >= n as isize {
                None
            } else {
                let v = f.data[iy as usize * n + ix as usize];
                if v.re.is_nan() {
                    None
                } else {
                    Some(v)
                }
            }
        };
        for iy in 0..n as isize {
            for ix in 0..n as isize {
                let s = |k: isize| if along_x { get(ix + k, iy) } else { get(ix, iy + k) };
                let vals = (s(-2), s(-1), s(0), s(1), s(2));
                if let (Some(m2), Some(m1), Some(c0), Some(p1), Some(p2)) = vals {
                    let v = if second {
                        (-p2 + 16.0 * p1 - 30.0 * c0 + 16.0 * m1 - m2) / (12.0 * h * h)
                    } else {
                        (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h)
                    };
                    out[iy as usize * n + ix as usize] = v;
                }
            }
        }
        FieldC { n, data: out }
    }
}

fn transpose(data: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for iy in 0..n {
        for ix in 0..n {
            out[ix * n + iy] = data[iy * n + ix];
        }
    }
    out
}
