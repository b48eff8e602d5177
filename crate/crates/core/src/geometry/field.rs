use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Complex scalar per grid node, row-major: `data[iy * n + ix]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldC {
    pub n: usize,
    pub data: Vec<Complex64>,
}

/// Coefficients of `dz` and `dz̄`.
#[derive(Debug, Clone, PartialEq)]
pub struct OneFormC {
    pub dz: FieldC,
    pub dzb: FieldC,
}

impl FieldC {
    pub fn zeros(n: usize) -> Self {
        FieldC { n, data: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn constant(n: usize, v: Complex64) -> Self {
        FieldC { n, data: vec![v; n * n] }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for iy in 0..n {
            for ix in 0..n {
                data.push(f(ix, iy));
            }
        }
        FieldC { n, data }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn at(&self, ix: usize, iy: usize) -> Complex64 {
        self.data[iy * self.n + ix]
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> FieldC {
        FieldC { n: self.n, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip(&self, other: &FieldC, f: impl Fn(Complex64, Complex64) -> Complex64) -> FieldC {
        assert_eq!(self.n, other.n, "grid size mismatch");
        FieldC { n: self.n, data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect() }
    }

    pub fn add(&self, other: &FieldC) -> FieldC {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &FieldC) -> FieldC {
        self.zip(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &FieldC) -> FieldC {
        self.zip(other, |a, b| a * b)
    }

    pub fn div(&self, other: &FieldC) -> FieldC {
        self.zip(other, |a, b| a / b)
    }

    pub fn scale(&self, s: Complex64) -> FieldC {
        self.map(|v| v * s)
    }

    pub fn conj(&self) -> FieldC {
        self.map(|v| v.conj())
    }

    pub fn sup_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).filter(|v| !v.is_nan()).fold(0.0, f64::max)
    }

    /// Sup norm over nodes selected by `mask`.
    pub fn sup_norm_masked(&self, mask: &[bool]) -> f64 {
        self.data
            .iter()
            .zip(mask)
            .filter(|(_, &m)| m)
            .map(|(v, _)| v.norm())
            .fold(0.0, f64::max)
    }

    pub fn mean(&self) -> Complex64 {
        let s: Complex64 = self.data.iter().sum();
        s / self.data.len() as f64
    }

    pub fn max_imag(&self) -> f64 {
        self.data.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

impl OneFormC {
    pub fn zeros(n: usize) -> Self {
        OneFormC { dz: FieldC::zeros(n), dzb: FieldC::zeros(n) }
    }

    pub fn add(&self, other: &OneFormC) -> OneFormC {
        OneFormC { dz: self.dz.add(&other.dz), dzb: self.dzb.add(&other.dzb) }
    }

    pub fn sub(&self, other: &OneFormC) -> OneFormC {
        OneFormC { dz: self.dz.sub(&other.dz), dzb: self.dzb.sub(&other.dzb) }
    }

    pub fn sup_norm(&self) -> f64 {
        self.dz.sup_norm().max(self.dzb.sup_norm())
    }
}
