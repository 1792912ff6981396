//! Real coordinates for Hermitian matrices.
//!
//! A Hermitian `n x n` matrix is carried as `n²` real numbers over a fixed
//! orthonormal basis (Hilbert-Schmidt inner product): diagonal units, then for
//! every `j < k` the symmetric and antisymmetric pairs scaled by `1/√2`.
//! Basis elements are stored sparsely.

use crate::linalg::{c, re, ComplexMatrix, C64};

const INV_SQRT2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Sparse Hermitian matrix: every nonzero `(row, col, value)` is listed,
/// including both triangles.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseHerm {
    pub entries: Vec<(usize, usize, C64)>,
}

impl SparseHerm {
    pub fn scaled_identity(n: usize, s: f64) -> Self {
        Self {
            entries: (0..n).map(|i| (i, i, re(s))).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        self.entries
            .iter()
            .filter(|(i, j, _)| i == j)
            .map(|e| e.2)
            .sum()
    }

    /// `Re Tr(self · m)` for a dense Hermitian `m`.
    pub fn re_trace_with(&self, m: &nalgebra::DMatrix<C64>) -> f64 {
        self.entries
            .iter()
            .map(|&(p, q, v)| (v * m[(q, p)]).re)
            .sum()
    }

    pub fn add_to(&self, m: &mut nalgebra::DMatrix<C64>, weight: f64) {
        for &(p, q, v) in &self.entries {
            m[(p, q)] += v * weight;
        }
    }

    pub fn add_to_dense(&self, m: &mut ComplexMatrix, weight: f64) {
        for &(p, q, v) in &self.entries {
            m[(p, q)] += v * weight;
        }
    }

    pub fn kron(&self, other: &Self, other_dim: usize) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len() * other.entries.len());
        for &(p, q, v) in &self.entries {
            for &(r, s, w) in &other.entries {
                entries.push((p * other_dim + r, q * other_dim + s, v * w));
            }
        }
        Self { entries }
    }

    pub fn to_dense(&self, n: usize) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(n, n);
        self.add_to_dense(&mut m, 1.0);
        m
    }
}

/// The orthonormal coordinate basis of `n x n` Hermitian matrices.
pub fn unit_basis(n: usize) -> Vec<SparseHerm> {
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        out.push(SparseHerm {
            entries: vec![(i, i, re(1.0))],
        });
    }
    for j in 0..n {
        for k in j + 1..n {
            out.push(SparseHerm {
                entries: vec![(j, k, re(INV_SQRT2)), (k, j, re(INV_SQRT2))],
            });
            out.push(SparseHerm {
                entries: vec![(j, k, c(0.0, -INV_SQRT2)), (k, j, c(0.0, INV_SQRT2))],
            });
        }
    }
    out
}

/// Orthonormal basis of the traceless Hermitian `n x n` matrices: the
/// off-diagonal pairs of [`unit_basis`] plus generalized Gell-Mann diagonals.
pub fn traceless_basis(n: usize) -> Vec<SparseHerm> {
    let mut out: Vec<SparseHerm> = unit_basis(n).into_iter().skip(n).collect();
    for l in 1..n {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut entries: Vec<(usize, usize, C64)> = (0..l).map(|k| (k, k, re(norm))).collect();
        entries.push((l, l, re(-(l as f64) * norm)));
        out.push(SparseHerm { entries });
    }
    out
}

/// Orthonormal basis of real diagonal `k x k` matrices with zero trace
/// (zero-sum functions on `k` outcomes).
pub fn zero_sum_diagonal_basis(k: usize) -> Vec<SparseHerm> {
    (1..k)
        .map(|l| {
            let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
            let mut entries: Vec<(usize, usize, C64)> = (0..l).map(|i| (i, i, re(norm))).collect();
            entries.push((l, l, re(-(l as f64) * norm)));
            SparseHerm { entries }
        })
        .collect()
}

pub fn to_coordinates(m: &ComplexMatrix) -> Vec<f64> {
    unit_basis(m.rows())
        .iter()
        .map(|b| {
            b.entries
                .iter()
                .map(|&(p, q, v)| (v.conj() * m[(p, q)]).re)
                .sum()
        })
        .collect()
}

pub fn from_coordinates(n: usize, x: &[f64]) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    for (b, &w) in unit_basis(n).iter().zip(x) {
        b.add_to_dense(&mut m, w);
    }
    m
}
