//! Chevalley basis with integer structure constants.
//!
//! Structure constants are first fixed in the normalization
//! `[e_γ, e_{−γ}] = h_γ` by the extraspecial-pair algorithm, then transported to
//! the basis `x_γ = e_γ` (γ > 0), `x_{−γ} = −e_{−γ}` in which
//! `[x_γ, x_{−γ}] = −h_γ` for every positive root γ.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::roots::RootSystem;
use crate::error::{Error, Result};

/// One nonzero structure constant: `[b_i, b_j]` has coefficient `c` on `b_k`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StructureConstant {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub c: i64,
}

/// Basis order: roots in `RootSystem` order (positive then negative), then
/// `h_1..h_l`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChevalleyBasis {
    pub roots: RootSystem,
    /// `N_{a,b}` in the x-basis for root indices `a`, `b` with `a + b` a root.
    pub n_table: Vec<(usize, usize, i64)>,
    pub constants: Vec<StructureConstant>,
    #[serde(skip)]
    table: Vec<Vec<Vec<(usize, i64)>>>,
}

fn add(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn sub(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn neg(a: &[i64]) -> Vec<i64> {
    a.iter().map(|x| -x).collect()
}

struct CarterTable<'a> {
    rs: &'a RootSystem,
    positive: HashMap<(usize, usize), i64>,
}

impl<'a> CarterTable<'a> {
    fn idx(&self, r: &[i64]) -> Option<usize> {
        self.rs.index_of(r)
    }

    fn sign(&self, r: &[i64]) -> bool {
        r.iter().sum::<i64>() > 0
    }

    /// `N_{a,b}` in the e-normalization for arbitrary roots; zero if `a + b`
    /// is not a root.
    fn n(&self, a: &[i64], b: &[i64]) -> i64 {
        let c = add(a, b);
        if c.iter().all(|&x| x == 0) || self.idx(&c).is_none() {
            return 0;
        }
        let (pa, pb) = (self.sign(a), self.sign(b));
        let rs = self.rs;
        if pa && pb {
            let key = (self.idx(a).unwrap(), self.idx(b).unwrap());
            return *self
                .positive
                .get(&key)
                .unwrap_or_else(|| panic!("positive pair {:?} not yet resolved", key));
        }
        if !pa && !pb {
            return -self.n(&neg(a), &neg(b));
        }
        // a + b + (−c) = 0 gives N_{a,b}/(c,c) = N_{b,−c}/(a,a) = N_{−c,a}/(b,b).
        let cc = rs.inner(&c, &c);
        if self.sign(&c) {
            let (x, y) = if pa { (a, b) } else { (b, a) };
            // x > 0, y < 0, c > 0: N_{x,y} = −(c,c)/(x,x) N_{−y,c}.
            let val = -cc * self.n(&neg(y), &c);
            let xx = rs.inner(x, x);
            assert_eq!(val % xx, 0, "non-integral structure constant");
            let v = val / xx;
            if pa { v } else { -v }
        } else {
            let (x, y) = if pa { (a, b) } else { (b, a) };
            // x > 0, y < 0, c < 0: N_{x,y} = (c,c)/(y,y) N_{−c,x}.
            let val = cc * self.n(&neg(&c), x);
            let yy = rs.inner(y, y);
            assert_eq!(val % yy, 0, "non-integral structure constant");
            let v = val / yy;
            if pa { v } else { -v }
        }
    }
}

/// `p` such that `b − p a` is a root and `b − (p+1) a` is not.
fn string_p(rs: &RootSystem, a: &[i64], b: &[i64]) -> i64 {
    let mut p = 0;
    let mut cur = b.to_vec();
    loop {
        cur = sub(&cur, a);
        if rs.index_of(&cur).is_some() {
            p += 1;
        } else {
            return p;
        }
    }
}

fn positive_structure_constants(rs: &RootSystem) -> Result<HashMap<(usize, usize), i64>> {
    let np = rs.num_positive;
    let mut table = CarterTable { rs, positive: HashMap::new() };
    // Process sums ξ in increasing height (positive roots are height-sorted).
    for xi_idx in 0..np {
        let xi = rs.roots[xi_idx].clone();
        let mut special: Vec<(usize, usize)> = Vec::new();
        for a in 0..np {
            for b in (a + 1)..np {
                if add(&rs.roots[a], &rs.roots[b]) == xi {
                    special.push((a, b));
                }
            }
        }
        if special.is_empty() {
            continue;
        }
        special.sort();
        let (ea, eb) = special[0];
        let alpha = rs.roots[ea].clone();
        let beta = rs.roots[eb].clone();
        let n_ext = string_p(rs, &alpha, &beta) + 1;
        table.positive.insert((ea, eb), n_ext);
        table.positive.insert((eb, ea), -n_ext);
        let xx = rs.inner(&xi, &xi) as f64;
        for &(ga, da) in special.iter().skip(1) {
            let gamma = rs.roots[ga].clone();
            let delta = rs.roots[da].clone();
            let mut acc = 0.0;
            let bg = sub(&beta, &gamma);
            let n1 = table.n(&beta, &neg(&gamma));
            if n1 != 0 {
                acc += (n1 * table.n(&alpha, &neg(&delta))) as f64 / rs.inner(&bg, &bg) as f64;
            }
            let ag = sub(&alpha, &gamma);
            let n2 = table.n(&neg(&gamma), &alpha);
            if n2 != 0 {
                acc += (n2 * table.n(&beta, &neg(&delta))) as f64 / rs.inner(&ag, &ag) as f64;
            }
            let val = xx / n_ext as f64 * acc;
            let rounded = val.round();
            let expect = (string_p(rs, &gamma, &delta) + 1) as f64;
            if (val - rounded).abs() > 1e-9 || rounded.abs() != expect {
                return Err(Error::Internal(format!(
                    "structure constant for pair ({ga},{da}) resolved to {val}, expected ±{expect}"
                )));
            }
            table.positive.insert((ga, da), rounded as i64);
            table.positive.insert((da, ga), -(rounded as i64));
        }
    }
    let mut out = HashMap::new();
    let nr = rs.num_roots();
    for a in 0..nr {
        for b in 0..nr {
            let v = table.n(&rs.roots[a], &rs.roots[b]);
            if v != 0 {
                out.insert((a, b), v);
            }
        }
    }
    Ok(out)
}

/// Build the Chevalley basis and verify the Jacobi identity exactly.
pub fn build_chevalley_basis(rs: &RootSystem) -> Result<ChevalleyBasis> {
    let e_table = positive_structure_constants(rs)?;
    let nr = rs.num_roots();
    let l = rs.rank;
    let sigma = |i: usize| if rs.is_positive(i) { 1 } else { -1 };
    let mut n_table = Vec::new();
    let mut constants = Vec::new();
    for a in 0..nr {
        for b in 0..nr {
            if let Some(&ne) = e_table.get(&(a, b)) {
                let c = rs.index_of(&add(&rs.roots[a], &rs.roots[b])).unwrap();
                let nx = sigma(a) * sigma(b) * sigma(c) * ne;
                n_table.push((a, b, nx));
                constants.push(StructureConstant { i: a, j: b, k: c, c: nx });
            }
        }
    }
    for a in 0..nr {
        // [x_a, x_{−a}] = −h_a.
        let b = rs.negative_of(a);
        let coeffs = rs.coroot_coefficients(&rs.roots[a]);
        for (i, &ci) in coeffs.iter().enumerate() {
            if ci != 0 {
                constants.push(StructureConstant { i: a, j: b, k: nr + i, c: -ci });
            }
        }
    }
    for i in 0..l {
        for a in 0..nr {
            let v = rs.eval_on_coroot(&rs.roots[a], i);
            if v != 0 {
                constants.push(StructureConstant { i: nr + i, j: a, k: a, c: v });
                constants.push(StructureConstant { i: a, j: nr + i, k: a, c: -v });
            }
        }
    }
    let mut cb = ChevalleyBasis { roots: rs.clone(), n_table, constants, table: Vec::new() };
    cb.rebuild_table();
    let defect = cb.jacobi_defect();
    if defect != 0 {
        return Err(Error::Internal(format!("Jacobi identity fails with integer defect {defect}")));
    }
    Ok(cb)
}

impl ChevalleyBasis {
    fn rebuild_table(&mut self) {
        let dim = self.dim();
        let mut table = vec![vec![Vec::new(); dim]; dim];
        for sc in &self.constants {
            table[sc.i][sc.j].push((sc.k, sc.c));
        }
        self.table = table;
    }

    /// Restore the lookup table after deserialization.
    pub fn reindex(mut self) -> Self {
        self.rebuild_table();
        self
    }

    pub fn dim(&self) -> usize {
        self.roots.dim()
    }

    pub fn rank(&self) -> usize {
        self.roots.rank
    }

    /// Basis index of `x_γ` for root index `γ`.
    pub fn root_vector(&self, root_index: usize) -> usize {
        root_index
    }

    /// Basis index of `h_i`.
    pub fn cartan(&self, i: usize) -> usize {
        self.roots.num_roots() + i
    }

    pub fn simple(&self, i: usize) -> usize {
        self.roots.simple_index(i)
    }

    pub fn neg_simple(&self, i: usize) -> usize {
        self.roots.negative_of(self.roots.simple_index(i))
    }

    pub fn highest(&self) -> usize {
        self.roots.highest_index()
    }

    pub fn neg_highest(&self) -> usize {
        self.roots.negative_of(self.roots.highest_index())
    }

    /// Nonzero products `[b_i, b_j] = Σ c b_k`.
    pub fn bracket_basis(&self, i: usize, j: usize) -> &[(usize, i64)] {
        &self.table[i][j]
    }

    /// `N_{a,b}` in the x-basis (0 if `a + b` is not a root).
    pub fn n(&self, a: usize, b: usize) -> i64 {
        self.n_table
            .iter()
            .find(|(x, y, _)| *x == a && *y == b)
            .map(|t| t.2)
            .unwrap_or(0)
    }

    fn bracket_int(&self, x: &[i64], y: &[i64]) -> Vec<i64> {
        let dim = self.dim();
        let mut out = vec![0i64; dim];
        for i in 0..dim {
            if x[i] == 0 {
                continue;
            }
            for j in 0..dim {
                if y[j] == 0 {
                    continue;
                }
                for &(k, c) in &self.table[i][j] {
                    out[k] += c * x[i] * y[j];
                }
            }
        }
        out
    }

    /// Sum of absolute Jacobi defects over all basis triples (integer exact).
    pub fn jacobi_defect(&self) -> i64 {
        let dim = self.dim();
        let unit = |i: usize| {
            let mut v = vec![0i64; dim];
            v[i] = 1;
            v
        };
        let mut total = 0;
        for a in 0..dim {
            for b in (a + 1)..dim {
                let ab = self.bracket_int(&unit(a), &unit(b));
                for c in (b + 1)..dim {
                    let t1 = self.bracket_int(&ab, &unit(c));
                    let bc = self.bracket_int(&unit(b), &unit(c));
                    let t2 = self.bracket_int(&bc, &unit(a));
                    let ca = self.bracket_int(&unit(c), &unit(a));
                    let t3 = self.bracket_int(&ca, &unit(b));
                    total += (0..dim).map(|k| (t1[k] + t2[k] + t3[k]).abs()).sum::<i64>();
                }
            }
        }
        total
    }

    /// Lie bracket of two elements given as coefficient vectors.
    pub fn bracket(&self, x: &[Complex64], y: &[Complex64]) -> Vec<Complex64> {
        let dim = self.dim();
        let mut out = vec![Complex64::new(0.0, 0.0); dim];
        self.bracket_into(x, y, &mut out);
        out
    }

    pub fn bracket_into(&self, x: &[Complex64], y: &[Complex64], out: &mut [Complex64]) {
        let dim = self.dim();
        out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for i in 0..dim {
            if x[i] == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..dim {
                if y[j] == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let p = x[i] * y[j];
                for &(k, c) in &self.table[i][j] {
                    out[k] += p * c as f64;
                }
            }
        }
    }

    /// Adjoint matrix of basis element `i`: `(ad b_i)_{k,j}` = coefficient of
    /// `b_k` in `[b_i, b_j]`.
    pub fn adjoint_matrix(&self, i: usize) -> nalgebra::DMatrix<f64> {
        let dim = self.dim();
        let mut m = nalgebra::DMatrix::zeros(dim, dim);
        for j in 0..dim {
            for &(k, c) in &self.table[i][j] {
                m[(k, j)] += c as f64;
            }
        }
        m
    }

    pub fn adjoint_matrices(&self) -> Vec<nalgebra::DMatrix<f64>> {
        (0..self.dim()).map(|i| self.adjoint_matrix(i)).collect()
    }

    /// Adjoint matrix of a general element.
    pub fn ad(&self, x: &[Complex64]) -> nalgebra::DMatrix<Complex64> {
        let dim = self.dim();
        let mut m = nalgebra::DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
        for (i, xi) in x.iter().enumerate() {
            if *xi == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..dim {
                for &(k, c) in &self.table[i][j] {
                    m[(k, j)] += xi * c as f64;
                }
            }
        }
        m
    }

    pub fn unit(&self, i: usize) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); self.dim()];
        v[i] = Complex64::new(1.0, 0.0);
        v
    }

    /// Height grading of each basis element (0 on the Cartan subalgebra).
    pub fn grade(&self, i: usize) -> i64 {
        if i < self.roots.num_roots() {
            self.roots.heights[i]
        } else {
            0
        }
    }

    /// Basis permutation realizing the Chevalley involution
    /// `x_γ ↦ x_{−γ}`, `h ↦ −h`, as (target index, sign).
    pub fn chevalley_involution(&self, i: usize) -> (usize, f64) {
        let nr = self.roots.num_roots();
        if i < nr {
            (self.roots.negative_of(i), 1.0)
        } else {
            (i, -1.0)
        }
    }

    /// Apply the Chevalley involution to an element.
    pub fn apply_chevalley_involution(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        for (i, v) in x.iter().enumerate() {
            let (j, s) = self.chevalley_involution(i);
            out[j] = v * s;
        }
        out
    }
}
