//! Log-det barrier engine shared by both solvers.
//!
//! Solves `min cᵀy` subject to linear matrix inequalities
//! `S_j(y) = F_j0 + Σ_a y_a F_ja ⪰ 0` by following the central path of
//! `cᵀy − μ Σ_j log det(S_j(y) + εI)` with damped Newton steps. After each
//! centering the caller-supplied certifier turns the dual estimates
//! `Z_j = μ S_j⁻¹` into a certified optimality gap.

use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, Dyn};
use rayon::prelude::*;

use super::coords::SparseHerm;
use crate::linalg::C64;

pub(crate) struct LmiBlock {
    pub constant: DMatrix<C64>,
    /// One entry per variable; blocks may share a set.
    pub coeffs: Arc<Vec<SparseHerm>>,
}

pub(crate) struct BarrierProblem {
    pub objective: Vec<f64>,
    pub blocks: Vec<LmiBlock>,
    pub regularization: f64,
}

#[derive(Clone, Debug)]
pub(crate) struct BarrierSettings {
    pub mu0: f64,
    pub mu_factor: f64,
    pub target_gap: f64,
    pub max_outer: usize,
    pub max_newton: usize,
    pub newton_tol: f64,
    /// Finish each centering with quadratic steps; needed when the certifier
    /// projects `μS⁻¹` instead of rescaling it.
    pub polish: bool,
}

impl Default for BarrierSettings {
    fn default() -> Self {
        Self {
            mu0: 1.0,
            mu_factor: 0.05,
            target_gap: 1e-7,
            max_outer: 80,
            max_newton: 200,
            newton_tol: 1e-1,
            polish: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum BarrierStatus {
    Converged,
    MaxIterations,
    Stalled,
}

pub(crate) struct BarrierOutcome {
    pub y: Vec<f64>,
    pub newton_steps: usize,
    pub status: BarrierStatus,
}

/// What the certifier sees after each centering.
pub(crate) struct CenterPoint<'a> {
    pub y: &'a [f64],
    pub mu: f64,
    /// `S_j⁻¹` per block.
    pub inverses: &'a [DMatrix<C64>],
}

type Chol = Cholesky<C64, Dyn>;

impl BarrierProblem {
    fn nvars(&self) -> usize {
        self.objective.len()
    }

    pub(crate) fn slack(&self, j: usize, y: &[f64]) -> DMatrix<C64> {
        let block = &self.blocks[j];
        let mut s = block.constant.clone();
        for (coeff, &w) in block.coeffs.iter().zip(y) {
            if w != 0.0 {
                coeff.add_to(&mut s, w);
            }
        }
        if self.regularization != 0.0 {
            for i in 0..s.nrows() {
                s[(i, i)] += C64::new(self.regularization, 0.0);
            }
        }
        s
    }

    /// Cholesky factors of every slack, or `None` when one is not positive
    /// definite.
    fn factor(&self, y: &[f64]) -> Option<Vec<Chol>> {
        (0..self.blocks.len())
            .map(|j| {
                let s = self.slack(j, y);
                let chol = Cholesky::new(s)?;
                // complex square roots never fail, so a negative pivot shows up
                // as a mostly imaginary diagonal entry instead of an error
                let ok = (0..chol.l_dirty().nrows()).all(|i| {
                    let v = chol.l_dirty()[(i, i)];
                    v.re.is_finite() && v.re > 0.0 && v.im.abs() <= 1e-8 * v.re
                });
                ok.then_some(chol)
            })
            .collect()
    }

    fn merit(&self, y: &[f64], mu: f64, chols: &[Chol]) -> f64 {
        let lin: f64 = self.objective.iter().zip(y).map(|(c, y)| c * y).sum();
        let logdet: f64 = chols
            .iter()
            .map(|ch| {
                let l = ch.l_dirty();
                2.0 * (0..l.nrows()).map(|i| l[(i, i)].re.ln()).sum::<f64>()
            })
            .sum();
        lin - mu * logdet
    }

    /// `K_ab = Σ_j Re Tr(W_j F_ja W_j F_jb)`. Blocks sharing one coefficient
    /// set are folded into a single `M[(p,q),(r,s)] = Σ_j W_j[s,p] W_j[q,r]`
    /// first, so the sparse contraction runs once per set.
    fn barrier_hessian(&self, inverses: &[DMatrix<C64>]) -> DMatrix<f64> {
        let m = self.nvars();
        let mut k = DMatrix::<f64>::zeros(m, m);
        let mut done = vec![false; self.blocks.len()];
        for j in 0..self.blocks.len() {
            if done[j] {
                continue;
            }
            let coeffs = &self.blocks[j].coeffs;
            let n = self.blocks[j].constant.nrows();
            let n2 = n * n;
            let mut big = vec![C64::new(0.0, 0.0); n2 * n2];
            for (jj, block) in self.blocks.iter().enumerate().skip(j) {
                if !Arc::ptr_eq(&block.coeffs, coeffs) {
                    continue;
                }
                done[jj] = true;
                // column-major storage: column p of W is W[·, p]
                let w = inverses[jj].as_slice();
                for p in 0..n {
                    let col_p = &w[p * n..(p + 1) * n];
                    for q in 0..n {
                        let row = &mut big[(p * n + q) * n2..(p * n + q + 1) * n2];
                        for r in 0..n {
                            let wqr = w[r * n + q];
                            for (dst, &wsp) in row[r * n..(r + 1) * n].iter_mut().zip(col_p) {
                                *dst += wsp * wqr;
                            }
                        }
                    }
                }
            }
            let rows: Vec<Vec<f64>> = (0..m)
                .into_par_iter()
                .map(|a| {
                    let fa = &coeffs[a];
                    let mut row = vec![0.0; m - a];
                    for (b, fb) in coeffs.iter().enumerate().skip(a) {
                        let mut acc = 0.0;
                        for &(p, q, v) in &fa.entries {
                            let base = (p * n + q) * n2;
                            for &(r, s, u) in &fb.entries {
                                acc += (v * u * big[base + r * n + s]).re;
                            }
                        }
                        row[b - a] = acc;
                    }
                    row
                })
                .collect();
            for (a, row) in rows.iter().enumerate() {
                for (off, v) in row.iter().enumerate() {
                    k[(a, a + off)] += v;
                }
            }
        }
        for a in 0..m {
            for b in a + 1..m {
                k[(b, a)] = k[(a, b)];
            }
        }
        k
    }

    fn gradient(&self, mu: f64, inverses: &[DMatrix<C64>]) -> Vec<f64> {
        (0..self.nvars())
            .map(|a| {
                let barrier: f64 = self
                    .blocks
                    .iter()
                    .zip(inverses)
                    .map(|(block, w)| block.coeffs[a].re_trace_with(w))
                    .sum();
                self.objective[a] - mu * barrier
            })
            .collect()
    }
}

fn solve_spd(mut h: DMatrix<f64>, rhs: &[f64]) -> Option<Vec<f64>> {
    let n = h.nrows();
    // symmetric diagonal scaling tames the spread of curvature near the boundary
    let scale: Vec<f64> = (0..n)
        .map(|i| {
            let v = h[(i, i)];
            if v > 0.0 && v.is_finite() {
                1.0 / v.sqrt()
            } else {
                1.0
            }
        })
        .collect();
    for i in 0..n {
        for j in 0..n {
            h[(i, j)] *= scale[i] * scale[j];
        }
    }
    let b = nalgebra::DVector::from_iterator(n, rhs.iter().zip(&scale).map(|(r, s)| r * s));
    let mut ridge = 0.0;
    for _ in 0..6 {
        let mut hr = h.clone();
        if ridge > 0.0 {
            for i in 0..n {
                hr[(i, i)] += ridge;
            }
        }
        if let Some(ch) = Cholesky::new(hr) {
            let z = ch.solve(&b);
            if z.iter().all(|v| v.is_finite()) {
                return Some(z.iter().zip(&scale).map(|(z, s)| z * s).collect());
            }
        }
        ridge = if ridge == 0.0 { 1e-14 } else { ridge * 100.0 };
    }
    None
}

const POLISH_TOL: f64 = 1e-12;
const MAX_POLISH: usize = 4;

pub(crate) fn run(
    problem: &BarrierProblem,
    y0: Vec<f64>,
    settings: &BarrierSettings,
    mut certify: impl FnMut(&CenterPoint<'_>) -> f64,
) -> BarrierOutcome {
    let mut y = y0;
    let mut mu = settings.mu0;
    let mut newton_steps = 0;
    let mut prev_gap = f64::INFINITY;
    let mut flat_rounds = 0;

    let Some(mut chols) = problem.factor(&y) else {
        return BarrierOutcome {
            y,
            newton_steps,
            status: BarrierStatus::Stalled,
        };
    };

    for _outer in 0..settings.max_outer {
        let mut stalled = false;
        // centering, then a few quadratic steps so that μS⁻¹ is nearly dual
        // feasible; a loose center leaves a gap that does not shrink with μ
        let mut tol = settings.newton_tol;
        let mut polish_steps = 0;
        for _ in 0..settings.max_newton {
            let inverses: Vec<DMatrix<C64>> = chols.iter().map(|c| c.inverse()).collect();
            let grad = problem.gradient(mu, &inverses);
            let mut hess = problem.barrier_hessian(&inverses);
            hess.scale_mut(mu);
            let neg_grad: Vec<f64> = grad.iter().map(|g| -g).collect();
            let Some(step) = solve_spd(hess, &neg_grad) else {
                stalled = true;
                break;
            };
            let slope: f64 = grad.iter().zip(&step).map(|(g, s)| g * s).sum();
            let decrement2 = -slope / mu;
            if !(decrement2.is_finite()) || slope >= 0.0 {
                // while polishing the point is already centered
                stalled = tol != POLISH_TOL;
                break;
            }
            if decrement2 / 2.0 <= tol {
                if tol == POLISH_TOL || !settings.polish {
                    break;
                }
                tol = POLISH_TOL;
            }
            if tol == POLISH_TOL {
                polish_steps += 1;
                if polish_steps > MAX_POLISH {
                    break;
                }
            }
            newton_steps += 1;
            let phi0 = problem.merit(&y, mu, &chols);
            let mut t = 1.0;
            let mut accepted = None;
            while t > 1e-14 {
                let trial: Vec<f64> = y.iter().zip(&step).map(|(y, s)| y + t * s).collect();
                if let Some(tc) = problem.factor(&trial) {
                    let phi = problem.merit(&trial, mu, &tc);
                    if phi <= phi0 + 0.25 * t * slope {
                        accepted = Some((trial, tc));
                        break;
                    }
                }
                t *= 0.5;
            }
            match accepted {
                Some((trial, tc)) => {
                    y = trial;
                    chols = tc;
                }
                None => {
                    stalled = tol != POLISH_TOL;
                    break;
                }
            }
        }
        let inverses: Vec<DMatrix<C64>> = chols.iter().map(|c| c.inverse()).collect();
        let gap = certify(&CenterPoint {
            y: &y,
            mu,
            inverses: &inverses,
        });
        if gap <= settings.target_gap {
            return BarrierOutcome {
                y,
                newton_steps,
                status: BarrierStatus::Converged,
            };
        }
        // the certified gap has hit its rounding floor
        if gap.is_finite() && gap > 0.5 * prev_gap {
            flat_rounds += 1;
        } else {
            flat_rounds = 0;
        }
        prev_gap = prev_gap.min(gap);
        if stalled || flat_rounds >= 3 {
            return BarrierOutcome {
                y,
                newton_steps,
                status: BarrierStatus::Stalled,
            };
        }
        mu *= settings.mu_factor;
    }
    BarrierOutcome {
        y,
        newton_steps,
        status: BarrierStatus::MaxIterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdp::coords::unit_basis;

    fn one_block(constant: DMatrix<C64>) -> BarrierProblem {
        let n = constant.nrows();
        BarrierProblem {
            objective: vec![0.0; n * n],
            blocks: vec![LmiBlock {
                constant,
                coeffs: Arc::new(unit_basis(n)),
            }],
            regularization: 0.0,
        }
    }

    #[test]
    fn indefinite_complex_slack_is_rejected() {
        // a negative pivot plus rounding-sized imaginary noise off the diagonal
        let mut s = DMatrix::<C64>::identity(3, 3);
        s[(1, 1)] = C64::new(-4.0, 0.0);
        s[(0, 1)] = C64::new(0.0, 1e-17);
        s[(1, 0)] = C64::new(0.0, -1e-17);
        let p = one_block(s);
        assert!(p.factor(&[0.0; 9]).is_none());
        let p = one_block(DMatrix::<C64>::identity(3, 3));
        assert!(p.factor(&[0.0; 9]).is_some());
    }

    #[test]
    fn hessian_matches_finite_differences_of_the_gradient() {
        let n = 3;
        let mut c = DMatrix::<C64>::identity(n, n) * C64::new(2.0, 0.0);
        c[(0, 2)] = C64::new(0.3, -0.4);
        c[(2, 0)] = C64::new(0.3, 0.4);
        let p = one_block(c);
        let y0 = vec![0.1; n * n];
        let inv = |y: &[f64]| -> Vec<DMatrix<C64>> {
            p.factor(y).unwrap().iter().map(|c| c.inverse()).collect()
        };
        let k = p.barrier_hessian(&inv(&y0));
        let h = 1e-6;
        for a in 0..n * n {
            let mut yp = y0.clone();
            yp[a] += h;
            let mut ym = y0.clone();
            ym[a] -= h;
            let gp = p.gradient(1.0, &inv(&yp));
            let gm = p.gradient(1.0, &inv(&ym));
            for b in 0..n * n {
                let fd = (gp[b] - gm[b]) / (2.0 * h);
                assert!(
                    (fd - k[(a, b)]).abs() < 1e-6,
                    "({a},{b}): {fd} vs {}",
                    k[(a, b)]
                );
            }
        }
    }
}
