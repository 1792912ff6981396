//! Random test objects: matrices, bases, channels and POVMs.
//!
//! All generators take an explicit RNG so that callers control seeding.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::channels::{Channel, Povm};
use crate::linalg::{c, kron, re, Basis, ComplexMatrix, HermitianMatrix, C64};

fn gaussian(rng: &mut impl Rng) -> C64 {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Ginibre matrix with i.i.d. standard complex Gaussian entries.
pub fn random_complex(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> HermitianMatrix {
    HermitianMatrix::symmetrize(&random_complex(rng, n, n))
}

/// Wishart-type PSD matrix `G G†` with `G` of size `n x rank`.
pub fn random_psd(rng: &mut impl Rng, n: usize, rank: usize) -> HermitianMatrix {
    let g = random_complex(rng, n, rank);
    HermitianMatrix::symmetrize(&(&g * &g.adjoint()))
}

/// Haar-ish unitary from Gram-Schmidt on a Ginibre matrix.
pub fn random_unitary(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let g = random_complex(rng, n, n);
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut v = g.column(j);
        for _ in 0..2 {
            for u in &cols {
                let p: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= p * ui;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for vi in &mut v {
            *vi /= norm;
        }
        cols.push(v);
    }
    ComplexMatrix::from_fn(n, n, |i, j| cols[j][i])
}

pub fn random_basis(rng: &mut impl Rng, d: usize) -> Basis {
    Basis::from_unitary_columns(&random_unitary(rng, d))
        .expect("Gram-Schmidt output is orthonormal")
}

/// Random PSD matrix with unit diagonal: Gram matrix of random unit vectors.
pub fn random_schur_matrix(rng: &mut impl Rng, d: usize, rank: usize) -> HermitianMatrix {
    let vs: Vec<Vec<C64>> = (0..d)
        .map(|_| {
            let v: Vec<C64> = (0..rank).map(|_| gaussian(rng)).collect();
            let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            v.into_iter().map(|z| z / n).collect()
        })
        .collect();
    let mut b = ComplexMatrix::from_fn(d, d, |i, j| {
        vs[i].iter().zip(&vs[j]).map(|(a, b)| a.conj() * b).sum()
    });
    for i in 0..d {
        b[(i, i)] = re(1.0);
    }
    HermitianMatrix::symmetrize(&b)
}

/// Random CPTP map on `C^d` from a normalized Wishart Choi matrix.
pub fn random_channel(rng: &mut impl Rng, d: usize) -> Channel {
    let w = random_psd(rng, d * d, d * d);
    let t = crate::linalg::partial_trace(&w, &[d, d], &[0]).expect("square");
    let t_inv_sqrt = t.map_spectrum(|x| 1.0 / x.sqrt()).expect("eigh");
    let a = kron(&t_inv_sqrt, &ComplexMatrix::identity(d));
    let choi = HermitianMatrix::symmetrize(&(&(&a * &w) * &a));
    Channel::new(d, d, choi, "random").expect("normalized Choi matrix is a channel")
}

/// Random unital channel: convex mixture of `terms` unitary conjugations.
pub fn random_unital_channel(rng: &mut impl Rng, d: usize, terms: usize) -> Channel {
    let mut weights: Vec<f64> = (0..terms).map(|_| rng.random::<f64>() + 0.05).collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    let mut choi = ComplexMatrix::zeros(d * d, d * d);
    for w in weights {
        let u = random_unitary(rng, d);
        // Choi of X -> U X U† is |vec(U)><vec(U)| in the input-first, row-major convention
        let mut v = vec![c(0.0, 0.0); d * d];
        for i in 0..d {
            for k in 0..d {
                v[i * d + k] = u[(k, i)];
            }
        }
        choi += &ComplexMatrix::outer(&v, &v).scale(w);
    }
    Channel::new(d, d, HermitianMatrix::symmetrize(&choi), "random-unital")
        .expect("mixed unitary channel")
}

/// Random POVM on `C^d` with `k` effects.
pub fn random_povm(rng: &mut impl Rng, d: usize, k: usize) -> Povm {
    let mut ranks: Vec<usize> = (0..k).map(|_| rng.random_range(1..=d)).collect();
    // the sum must be invertible
    if ranks.iter().sum::<usize>() < d {
        ranks[k - 1] = d;
    }
    let ws: Vec<HermitianMatrix> = ranks.iter().map(|&r| random_psd(rng, d, r)).collect();
    let mut s = HermitianMatrix::zeros(d);
    for w in &ws {
        s = s.add(w);
    }
    let s_inv_sqrt = s.map_spectrum(|x| 1.0 / x.sqrt()).expect("eigh");
    let effects = ws
        .iter()
        .map(|w| HermitianMatrix::symmetrize(&(&(&*s_inv_sqrt * w) * &s_inv_sqrt)))
        .collect();
    Povm::new(effects).expect("normalized effects form a POVM")
}
