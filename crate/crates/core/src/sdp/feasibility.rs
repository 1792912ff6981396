//! Exact compatibility oracles.
//!
//! Both oracles maximize `λ_min` over an affine family of Hermitian matrices
//! `J(x) = J₀ + Σ_k x_k B_k` whose members all have the prescribed
//! marginals. `J₀` is written down in closed form and `{B_k}` is an
//! orthonormal product basis of the kernel of the marginal maps, so no
//! equality constraint is ever solved numerically.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;

use super::barrier::{self, BarrierProblem, BarrierSettings, BarrierStatus, LmiBlock};
use super::coords::{traceless_basis, unit_basis, zero_sum_diagonal_basis, SparseHerm};
use crate::channels::{Channel, Povm};
use crate::error::{Error, Result};
use crate::linalg::{re, ComplexMatrix, HermitianMatrix, C64};

/// Half-width of the band around zero where the verdict is `Marginal`.
pub const FEASIBILITY_BAND: f64 = 1e-7;
/// Default cap on `N · D²` where `D` is the joint matrix dimension.
pub const DEFAULT_ORACLE_BUDGET: usize = 1500;
const FEASIBILITY_TARGET_GAP: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FeasibilityStatus {
    Feasible,
    Infeasible,
    Marginal,
}

#[derive(Clone, Debug, Serialize)]
pub struct FeasibilityResult {
    /// Attained `λ_min(J(x))` at the returned witness.
    pub lambda_star: f64,
    /// Certified upper bound on the optimal `λ_min`.
    pub upper_bound: f64,
    /// Joint Choi matrix (channels) or block-diagonal joint POVM.
    pub witness: HermitianMatrix,
    pub status: FeasibilityStatus,
    pub iterations: usize,
    /// `false` when the solver stopped before certifying the gap target.
    pub converged: bool,
}

impl FeasibilityResult {
    pub fn gap(&self) -> f64 {
        self.upper_bound - self.lambda_star
    }
}

#[derive(Clone, Debug)]
pub struct OracleOptions {
    pub budget: usize,
    pub band: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            budget: DEFAULT_ORACLE_BUDGET,
            band: FEASIBILITY_BAND,
        }
    }
}

fn classify(lambda_star: f64, upper: f64, band: f64) -> FeasibilityStatus {
    if lambda_star >= band {
        FeasibilityStatus::Feasible
    } else if upper <= -band {
        FeasibilityStatus::Infeasible
    } else {
        FeasibilityStatus::Marginal
    }
}

fn check_budget(n: usize, dim: usize, budget: usize) -> Result<()> {
    let cost = n.saturating_mul(dim.saturating_mul(dim));
    if cost > budget {
        return Err(Error::BudgetExceeded {
            required_dim: dim,
            cost,
            budget,
        });
    }
    Ok(())
}

/// One tensor factor of the marginal structure: the normalized identity and
/// an orthonormal basis of its orthogonal complement.
struct Factor {
    dim: usize,
    unit: SparseHerm,
    complement: Vec<SparseHerm>,
}

/// Products `f_1 ⊗ … ⊗ f_N` (with the free factor inserted first or last)
/// where at least two of the `f_i` come from a complement.
fn kernel_basis(
    factors: &[Factor],
    free: &[SparseHerm],
    free_dim: usize,
    free_first: bool,
) -> Vec<SparseHerm> {
    fn rec(
        factors: &[Factor],
        idx: usize,
        acc: SparseHerm,
        acc_complements: usize,
        out: &mut Vec<(SparseHerm, usize)>,
    ) {
        if idx == factors.len() {
            out.push((acc, acc_complements));
            return;
        }
        let f = &factors[idx];
        rec(
            factors,
            idx + 1,
            acc.kron(&f.unit, f.dim),
            acc_complements,
            out,
        );
        for t in &f.complement {
            rec(
                factors,
                idx + 1,
                acc.kron(t, f.dim),
                acc_complements + 1,
                out,
            );
        }
    }
    let mut products = Vec::new();
    let one = SparseHerm {
        entries: vec![(0, 0, re(1.0))],
    };
    rec(factors, 0, one, 0, &mut products);
    let outer_dim: usize = factors.iter().map(|f| f.dim).product();
    let mut basis = Vec::new();
    for a in free {
        for (p, count) in &products {
            if *count < 2 {
                continue;
            }
            basis.push(if free_first {
                a.kron(p, outer_dim)
            } else {
                p.kron(a, free_dim)
            });
        }
    }
    basis
}

/// Maximizes `λ` subject to `J₀ + Σ x_k B_k − λI ⪰ 0`.
fn maximize_lambda_min(
    j0: &ComplexMatrix,
    kernel: Vec<SparseHerm>,
    band: f64,
) -> (HermitianMatrix, f64, f64, FeasibilityStatus, usize, bool) {
    let dim = j0.rows();
    let m = kernel.len();
    let j0h = HermitianMatrix::symmetrize(j0);
    let lam0 = j0h.min_eigenvalue().unwrap_or(-j0.frobenius_norm()) - 1.0;
    let lam_cap = j0h.real_trace() / dim as f64;

    let mut coeffs = kernel.clone();
    coeffs.push(SparseHerm::scaled_identity(dim, -1.0));
    let mut objective = vec![0.0; m];
    objective.push(-1.0);
    let bp = BarrierProblem {
        objective,
        blocks: vec![LmiBlock {
            constant: j0h.to_nalgebra(),
            coeffs: Arc::new(coeffs),
        }],
        regularization: 0.0,
    };
    let mut y0 = vec![0.0; m];
    y0.push(lam0);
    let settings = BarrierSettings {
        mu0: (lam_cap - lam0).max(1e-3) / dim as f64,
        target_gap: FEASIBILITY_TARGET_GAP,
        polish: true,
        ..BarrierSettings::default()
    };

    let mut best_upper = lam_cap;
    let j0n = j0h.to_nalgebra();
    let outcome = barrier::run(&bp, y0, &settings, |pt| {
        let lam = *pt.y.last().expect("lambda variable");
        if let Some(ub) = dual_upper_bound(&j0n, &kernel, pt.mu, &pt.inverses[0]) {
            best_upper = best_upper.min(ub);
        }
        best_upper - lam
    });

    let mut j = j0.clone();
    for (b, &x) in kernel.iter().zip(&outcome.y) {
        b.add_to_dense(&mut j, x);
    }
    let witness = HermitianMatrix::symmetrize(&j);
    // report the exact spectrum of the witness rather than the barrier variable
    let lambda_star = witness
        .min_eigenvalue()
        .unwrap_or(*outcome.y.last().expect("lambda"));
    let upper = best_upper.max(lambda_star);
    let status = classify(lambda_star, upper, band);
    let converged = outcome.status == BarrierStatus::Converged;
    (
        witness,
        lambda_star,
        upper,
        status,
        outcome.newton_steps,
        converged,
    )
}

/// Projects `μ S⁻¹` onto the dual feasible set `{Z ⪰ 0, Tr Z = 1, <B_k, Z> = 0}`
/// and returns `<J₀, Z>`.
fn dual_upper_bound(
    j0: &DMatrix<C64>,
    kernel: &[SparseHerm],
    mu: f64,
    inverse: &DMatrix<C64>,
) -> Option<f64> {
    let mut z = inverse * C64::new(mu, 0.0);
    for b in kernel {
        let w = b.re_trace_with(&z);
        b.add_to(&mut z, -w);
    }
    let zc = HermitianMatrix::symmetrize(&ComplexMatrix::from_nalgebra(&z));
    let lam = zc.min_eigenvalue().ok()?;
    let n = zc.dim();
    let shifted = if lam < 0.0 {
        zc.sub(&HermitianMatrix::identity(n).scale(lam))
    } else {
        zc
    };
    let tr = shifted.real_trace();
    if tr <= 0.0 {
        return None;
    }
    let zn = shifted.to_nalgebra();
    let val: f64 = j0
        .iter()
        .zip(zn.transpose().iter())
        .map(|(a, b)| (a * b).re)
        .sum();
    Some(val / tr)
}

/// Decides whether the channels admit a joint channel
/// `Λ : L(C^d) → L((C^d)^{⊗N})` with the given marginals.
pub fn solve_joint_channel(channels: &[Channel]) -> Result<FeasibilityResult> {
    solve_joint_channel_with(channels, &OracleOptions::default())
}

pub fn solve_joint_channel_with(
    channels: &[Channel],
    opts: &OracleOptions,
) -> Result<FeasibilityResult> {
    let first = channels
        .first()
        .ok_or_else(|| Error::InvalidParameter("need at least one channel".into()))?;
    let d = first.d_in();
    for ch in channels {
        if ch.d_in() != d || ch.d_out() != d {
            return Err(Error::InvalidParameter(format!(
                "joint-channel oracle needs d_in = d_out = {d} for every channel (got {} -> {})",
                ch.d_in(),
                ch.d_out()
            )));
        }
    }
    let n = channels.len();
    let dim = d.pow(n as u32 + 1);
    check_budget(n, dim, opts.budget)?;

    let j0 = joint_particular_solution(channels, d);
    let factors: Vec<Factor> = (0..n)
        .map(|_| Factor {
            dim: d,
            unit: SparseHerm::scaled_identity(d, 1.0 / (d as f64).sqrt()),
            complement: traceless_basis(d),
        })
        .collect();
    let kernel = kernel_basis(&factors, &unit_basis(d), d, true);
    let (witness, lambda_star, upper_bound, status, iterations, converged) =
        maximize_lambda_min(&j0, kernel, opts.band);
    Ok(FeasibilityResult {
        lambda_star,
        upper_bound,
        witness,
        status,
        iterations,
        converged,
    })
}

/// `J₀ = Σ_i C_i ⊗ I/d^{N−1} − (N−1)·I/d^N`, with `C_i` placed on the input
/// and the `i`-th output factor.
fn joint_particular_solution(channels: &[Channel], d: usize) -> ComplexMatrix {
    let n = channels.len();
    let outs = d.pow(n as u32);
    let dim = d * outs;
    let digits = |idx: usize| -> Vec<usize> {
        // [input, out_1, ..., out_N], most significant first
        let mut v = vec![0; n + 1];
        let mut r = idx;
        for k in (0..=n).rev() {
            v[k] = r % d;
            r /= d;
        }
        v
    };
    let all: Vec<Vec<usize>> = (0..dim).map(digits).collect();
    let other = 1.0 / d.pow(n as u32 - 1) as f64;
    let mut j = ComplexMatrix::identity(dim).scale(-((n - 1) as f64) / outs as f64);
    for (i, ch) in channels.iter().enumerate() {
        let c = ch.choi();
        for (r, rd) in all.iter().enumerate() {
            for (s, sd) in all.iter().enumerate() {
                let same_elsewhere = (1..=n).all(|k| k == i + 1 || rd[k] == sd[k]);
                if !same_elsewhere {
                    continue;
                }
                let v = c[(rd[0] * d + rd[i + 1], sd[0] * d + sd[i + 1])];
                j[(r, s)] += v * other;
            }
        }
    }
    j
}

/// The joint channel encoded by a feasible witness.
pub fn witness_channel(result: &FeasibilityResult, d: usize, n: usize) -> Result<Channel> {
    Channel::with_tolerance(d, d.pow(n as u32), result.witness.clone(), "joint", 1e-6)
}

/// Decides joint measurability of POVMs on a common `C^d`.
pub fn solve_povm_joint(povms: &[Povm]) -> Result<FeasibilityResult> {
    solve_povm_joint_with(povms, &OracleOptions::default())
}

pub fn solve_povm_joint_with(povms: &[Povm], opts: &OracleOptions) -> Result<FeasibilityResult> {
    let first = povms
        .first()
        .ok_or_else(|| Error::InvalidParameter("need at least one POVM".into()))?;
    let d = first.d();
    if let Some(bad) = povms.iter().find(|p| p.d() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: bad.d(),
        });
    }
    let n = povms.len();
    let ks: Vec<usize> = povms.iter().map(Povm::len).collect();
    let outcomes: usize = ks.iter().product();
    let dim = outcomes * d;
    check_budget(n, dim, opts.budget)?;

    // block-diagonal J = Σ_x |x><x| ⊗ C_x, outcome tuple most significant first
    let mut j0 = ComplexMatrix::zeros(dim, dim);
    let correction = -((n - 1) as f64) / outcomes as f64;
    for x in 0..outcomes {
        let mut digits = vec![0; n];
        let mut r = x;
        for k in (0..n).rev() {
            digits[k] = r % ks[k];
            r /= ks[k];
        }
        let mut block = ComplexMatrix::identity(d).scale(correction);
        for (i, p) in povms.iter().enumerate() {
            let share = (outcomes / ks[i]) as f64;
            block += &p.effects()[digits[i]].scale(1.0 / share);
        }
        for a in 0..d {
            for b in 0..d {
                j0[(x * d + a, x * d + b)] = block[(a, b)];
            }
        }
    }
    let factors: Vec<Factor> = ks
        .iter()
        .map(|&k| Factor {
            dim: k,
            unit: SparseHerm::scaled_identity(k, 1.0 / (k as f64).sqrt()),
            complement: zero_sum_diagonal_basis(k),
        })
        .collect();
    let kernel = kernel_basis(&factors, &unit_basis(d), d, false);
    let (witness, lambda_star, upper_bound, status, iterations, converged) =
        maximize_lambda_min(&j0, kernel, opts.band);
    Ok(FeasibilityResult {
        lambda_star,
        upper_bound,
        witness,
        status,
        iterations,
        converged,
    })
}

/// Effects `C_x` of a joint POVM witness, outcome tuples in row-major order.
pub fn witness_effects(result: &FeasibilityResult, d: usize) -> Vec<HermitianMatrix> {
    let w = &result.witness;
    (0..w.dim() / d)
        .map(|x| {
            HermitianMatrix::symmetrize(&ComplexMatrix::from_fn(d, d, |a, b| {
                w[(x * d + a, x * d + b)]
            }))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{induced_povm, make_depolarizing, marginal_channel};
    use crate::fisher::fourier_basis;
    use crate::linalg::{partial_trace_matrix, Basis};
    use crate::sample;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kernel_elements_have_vanishing_marginals() {
        let d = 2;
        let n = 3;
        let factors: Vec<Factor> = (0..n)
            .map(|_| Factor {
                dim: d,
                unit: SparseHerm::scaled_identity(d, 1.0 / (d as f64).sqrt()),
                complement: traceless_basis(d),
            })
            .collect();
        let kernel = kernel_basis(&factors, &unit_basis(d), d, true);
        assert_eq!(kernel.len(), 4 * (64 - 1 - 9));
        let dims = vec![d; n + 1];
        for b in kernel.iter().step_by(7) {
            let m = b.to_dense(16);
            for i in 0..n {
                let r = partial_trace_matrix(&m, &dims, &[0, i + 1]).unwrap();
                assert!(r.frobenius_norm() < 1e-14);
            }
        }
    }

    #[test]
    fn particular_solution_has_the_right_marginals() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let chs: Vec<Channel> = (0..3)
            .map(|_| sample::random_channel(&mut rng, 2))
            .collect();
        let j0 = joint_particular_solution(&chs, 2);
        for (i, ch) in chs.iter().enumerate() {
            let r = partial_trace_matrix(&j0, &[2, 2, 2, 2], &[0, i + 1]).unwrap();
            assert!(r.max_abs_diff(ch.choi()) < 1e-12);
        }
    }

    #[test]
    fn delta_is_compatible_with_anything() {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        for _ in 0..3 {
            let phi = sample::random_channel(&mut rng, 2);
            let res =
                solve_joint_channel(&[Channel::completely_depolarizing(2), phi.clone()]).unwrap();
            assert_eq!(res.status, FeasibilityStatus::Feasible, "{res:?}");
            let joint = witness_channel(&res, 2, 2).unwrap();
            let m = marginal_channel(&joint, &[2, 2], 1).unwrap();
            assert!(m.choi().max_abs_diff(phi.choi()) < 1e-6);
        }
    }

    #[test]
    fn no_cloning() {
        let res = solve_joint_channel(&[Channel::identity(2), Channel::identity(2)]).unwrap();
        assert_eq!(res.status, FeasibilityStatus::Infeasible);
        assert!(res.upper_bound < -1e-3);
    }

    #[test]
    fn symmetric_cloning_threshold_is_marginal() {
        let t = 2.0 / 3.0;
        let ch = make_depolarizing(2, t).unwrap();
        let res = solve_joint_channel(&[ch.clone(), ch]).unwrap();
        assert!(res.lambda_star.abs() < 1e-6, "{}", res.lambda_star);
        assert_ne!(res.status, FeasibilityStatus::Infeasible);
    }

    #[test]
    fn permutation_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let a = sample::random_channel(&mut rng, 2).noisy(0.6).unwrap();
        let b = make_depolarizing(2, 0.5).unwrap();
        let r1 = solve_joint_channel(&[a.clone(), b.clone()]).unwrap();
        let r2 = solve_joint_channel(&[b, a]).unwrap();
        assert!((r1.lambda_star - r2.lambda_star).abs() < 1e-6);
    }

    #[test]
    fn budget_is_enforced() {
        let ch = Channel::identity(2);
        let err = solve_joint_channel(&[ch.clone(), ch.clone(), ch.clone(), ch]).unwrap_err();
        assert!(matches!(
            err,
            Error::BudgetExceeded {
                required_dim: 32,
                ..
            }
        ));
        let ok = solve_joint_channel_with(
            &vec![Channel::completely_depolarizing(2); 3],
            &OracleOptions::default(),
        )
        .unwrap();
        assert_eq!(ok.status, FeasibilityStatus::Feasible);
    }

    #[test]
    fn povm_oracle_cases() {
        let res = solve_povm_joint(&[Povm::trivial(2), Povm::trivial(2)]).unwrap();
        assert_eq!(res.status, FeasibilityStatus::Feasible);

        let can = Povm::projective(&Basis::canonical(2));
        let four = Povm::projective(&fourier_basis(2));
        let res = solve_povm_joint(&[can.clone(), four]).unwrap();
        assert_eq!(res.status, FeasibilityStatus::Infeasible);

        // a POVM is always jointly measurable with a coarse-graining of itself
        let mut rng = ChaCha8Rng::seed_from_u64(54);
        let p = sample::random_povm(&mut rng, 2, 2);
        let res = solve_povm_joint(&[p.clone(), Povm::trivial(2)]).unwrap();
        assert_ne!(res.status, FeasibilityStatus::Infeasible);
        let effects = witness_effects(&res, 2);
        assert_eq!(effects.len(), 2);
        for (e, f) in effects.iter().zip(p.effects()) {
            assert!(e.max_abs_diff(f) < 1e-9);
        }
    }

    #[test]
    fn induced_povms_of_compatible_channels_are_compatible() {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        let a = make_depolarizing(2, 0.5).unwrap();
        let b = sample::random_channel(&mut rng, 2).noisy(0.4).unwrap();
        let res = solve_joint_channel(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(res.status, FeasibilityStatus::Feasible);
        let e = sample::random_basis(&mut rng, 2);
        let f = sample::random_basis(&mut rng, 2);
        let pres =
            solve_povm_joint(&[induced_povm(&a, &e).unwrap(), induced_povm(&b, &f).unwrap()])
                .unwrap();
        assert_eq!(pres.status, FeasibilityStatus::Feasible);
        assert!(pres.lambda_star >= res.lambda_star - 1e-6);
    }
}
