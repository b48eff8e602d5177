//! Root systems of split simple types, generated from a Euclidean realization
//! of the simple roots.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CartanType {
    A,
    B,
    C,
    D,
    G,
}

impl CartanType {
    pub fn letter(self) -> char {
        match self {
            CartanType::A => 'A',
            CartanType::B => 'B',
            CartanType::C => 'C',
            CartanType::D => 'D',
            CartanType::G => 'G',
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(CartanType::A),
            "B" | "b" => Ok(CartanType::B),
            "C" | "c" => Ok(CartanType::C),
            "D" | "d" => Ok(CartanType::D),
            "G" | "g" => Ok(CartanType::G),
            other => Err(Error::Config(format!("unknown Cartan type '{other}'"))),
        }
    }
}

/// Roots are stored as integer coefficient vectors in the simple-root basis.
/// Positive roots come first, sorted by height then lexicographically; the
/// negative of positive root `i` sits at index `i + num_positive`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RootSystem {
    pub cartan_type: CartanType,
    pub rank: usize,
    pub roots: Vec<Vec<i64>>,
    pub num_positive: usize,
    pub heights: Vec<i64>,
    pub highest_root: Vec<i64>,
    /// `cartan_matrix[i][j] = α_i(h_j) = 2(α_i, α_j)/(α_j, α_j)`.
    pub cartan_matrix: Vec<Vec<i64>>,
    /// Gram matrix of the simple roots in the chosen Euclidean realization.
    pub gram: Vec<Vec<i64>>,
}

fn euclidean_simple_roots(kind: CartanType, rank: usize) -> Result<Vec<Vec<i64>>> {
    let unsupported = || Error::UnsupportedType { kind: kind.letter(), rank };
    if rank == 0 || rank > 4 {
        return Err(unsupported());
    }
    let unit = |dim: usize, i: usize| {
        let mut v = vec![0i64; dim];
        v[i] = 1;
        v
    };
    let sub = |a: &[i64], b: &[i64]| a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>();
    let add = |a: &[i64], b: &[i64]| a.iter().zip(b).map(|(x, y)| x + y).collect::<Vec<_>>();
    let chain = |dim: usize, count: usize| {
        (0..count)
            .map(|i| sub(&unit(dim, i), &unit(dim, i + 1)))
            .collect::<Vec<_>>()
    };
    let simple = match kind {
        CartanType::A => chain(rank + 1, rank),
        CartanType::B => {
            if rank < 2 {
                return Err(unsupported());
            }
            let mut s = chain(rank, rank - 1);
            s.push(unit(rank, rank - 1));
            s
        }
        CartanType::C => {
            if rank < 2 {
                return Err(unsupported());
            }
            let mut s = chain(rank, rank - 1);
            s.push(unit(rank, rank - 1).iter().map(|x| 2 * x).collect());
            s
        }
        CartanType::D => {
            if rank < 3 {
                return Err(unsupported());
            }
            let mut s = chain(rank, rank - 1);
            s.push(add(&unit(rank, rank - 2), &unit(rank, rank - 1)));
            s
        }
        CartanType::G => {
            if rank != 2 {
                return Err(unsupported());
            }
            vec![vec![1, -1, 0], vec![-2, 1, 1]]
        }
    };
    Ok(simple)
}

fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Build the root system of type `kind` and rank `rank` (rank ≤ 4).
pub fn build_root_system(kind: CartanType, rank: usize) -> Result<RootSystem> {
    let simple = euclidean_simple_roots(kind, rank)?;
    let l = rank;
    let gram: Vec<Vec<i64>> = (0..l)
        .map(|i| (0..l).map(|j| dot(&simple[i], &simple[j])).collect())
        .collect();
    let cartan_matrix: Vec<Vec<i64>> = (0..l)
        .map(|i| (0..l).map(|j| 2 * gram[i][j] / gram[j][j]).collect())
        .collect();

    // Root strings: β + α_i is a root iff q > 0 where p - q = <β, α_i^∨>.
    let pairing = |beta: &[i64], i: usize| -> i64 { (0..l).map(|j| beta[j] * cartan_matrix[j][i]).sum() };
    let mut positive: Vec<Vec<i64>> = (0..l)
        .map(|i| {
            let mut v = vec![0; l];
            v[i] = 1;
            v
        })
        .collect();
    let mut layer = positive.clone();
    while !layer.is_empty() {
        let mut next: Vec<Vec<i64>> = Vec::new();
        for beta in &layer {
            for i in 0..l {
                let mut p = 0;
                let mut down = beta.clone();
                loop {
                    down[i] -= 1;
                    if positive.contains(&down) {
                        p += 1;
                    } else {
                        break;
                    }
                }
                let q = p - pairing(beta, i);
                if q > 0 {
                    let mut up = beta.clone();
                    up[i] += 1;
                    if !positive.contains(&up) && !next.contains(&up) {
                        next.push(up);
                    }
                }
            }
        }
        positive.extend(next.iter().cloned());
        layer = next;
    }
    positive.sort_by(|a, b| {
        let ha: i64 = a.iter().sum();
        let hb: i64 = b.iter().sum();
        ha.cmp(&hb).then_with(|| b.cmp(a))
    });
    let num_positive = positive.len();
    let mut roots = positive.clone();
    roots.extend(positive.iter().map(|r| r.iter().map(|x| -x).collect::<Vec<_>>()));
    let heights = roots.iter().map(|r| r.iter().sum()).collect();
    let highest_root = positive.last().cloned().expect("nonempty root system");
    Ok(RootSystem {
        cartan_type: kind,
        rank,
        roots,
        num_positive,
        heights,
        highest_root,
        cartan_matrix,
        gram,
    })
}

impl RootSystem {
    pub fn num_roots(&self) -> usize {
        self.roots.len()
    }

    /// Dimension of the Lie algebra.
    pub fn dim(&self) -> usize {
        self.roots.len() + self.rank
    }

    /// Coxeter number, `height(δ) + 1`.
    pub fn coxeter_number(&self) -> usize {
        (self.highest_root.iter().sum::<i64>() + 1) as usize
    }

    pub fn index_of(&self, root: &[i64]) -> Option<usize> {
        self.roots.iter().position(|r| r.as_slice() == root)
    }

    pub fn negative_of(&self, i: usize) -> usize {
        if i < self.num_positive {
            i + self.num_positive
        } else {
            i - self.num_positive
        }
    }

    pub fn is_positive(&self, i: usize) -> bool {
        i < self.num_positive
    }

    pub fn simple_index(&self, i: usize) -> usize {
        let mut v = vec![0; self.rank];
        v[i] = 1;
        self.index_of(&v).expect("simple root present")
    }

    pub fn highest_index(&self) -> usize {
        self.num_positive - 1
    }

    /// Invariant inner product `(a, b)` of two coefficient vectors.
    pub fn inner(&self, a: &[i64], b: &[i64]) -> i64 {
        let mut s = 0;
        for i in 0..self.rank {
            for j in 0..self.rank {
                s += a[i] * self.gram[i][j] * b[j];
            }
        }
        s
    }

    /// `β(h_i)` for a root given by coefficients.
    pub fn eval_on_coroot(&self, beta: &[i64], i: usize) -> i64 {
        (0..self.rank).map(|j| beta[j] * self.cartan_matrix[j][i]).sum()
    }

    /// Coefficients of the coroot `h_γ` in the basis `h_1..h_l`:
    /// `c_i = k_i (α_i, α_i)/(γ, γ)`.
    pub fn coroot_coefficients(&self, gamma: &[i64]) -> Vec<i64> {
        let gg = self.inner(gamma, gamma);
        (0..self.rank)
            .map(|i| {
                let num = gamma[i] * self.gram[i][i];
                debug_assert_eq!(num % gg, 0);
                num / gg
            })
            .collect()
    }
}
