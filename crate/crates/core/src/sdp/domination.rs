use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;

use super::barrier::{self, BarrierProblem, BarrierSettings, BarrierStatus, LmiBlock};
use super::coords::{self, unit_basis};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianMatrix, C64};

/// Certified gap at which [`solve_domination`] stops.
pub const DOMINATION_TARGET_GAP: f64 = 1e-7;
const REGULARIZATION: f64 = 1e-12;

/// `min Tr H` subject to `H ⪰ G_i` for every constraint `G_i`.
#[derive(Clone, Debug)]
pub struct DominationProblem {
    d2: usize,
    constraints: Vec<HermitianMatrix>,
}

impl DominationProblem {
    pub fn new(constraints: Vec<HermitianMatrix>) -> Result<Self> {
        let d2 = constraints
            .first()
            .ok_or_else(|| Error::InvalidParameter("domination problem needs a constraint".into()))?
            .dim();
        if let Some(bad) = constraints.iter().find(|c| c.dim() != d2) {
            return Err(Error::DimensionMismatch {
                expected: d2,
                actual: bad.dim(),
            });
        }
        Ok(Self { d2, constraints })
    }

    pub fn dim(&self) -> usize {
        self.d2
    }

    pub fn constraints(&self) -> &[HermitianMatrix] {
        &self.constraints
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SdpStatus {
    Optimal,
    MaxIterations,
    NumericalFailure,
}

#[derive(Clone, Debug, Serialize)]
pub struct SdpResult {
    /// `Tr H` at the returned optimizer (an upper bound on the optimum).
    pub value: f64,
    /// Certified lower bound from a dual feasible point.
    pub lower_bound: f64,
    pub optimizer: HermitianMatrix,
    /// `value − lower_bound`
    pub gap: f64,
    pub iterations: usize,
    pub status: SdpStatus,
}

/// Dual bound: rescale `Z_i = μ S_i⁻¹` by `R^{-1/2}` with `R = Σ Z_i` so the
/// dual constraint `Σ Z_i = I` holds exactly; returns `Σ <G_i, Z_i>`.
fn dual_bound(constraints: &[HermitianMatrix], mu: f64, inverses: &[DMatrix<C64>]) -> Option<f64> {
    let n = constraints[0].dim();
    let mut r = DMatrix::<C64>::zeros(n, n);
    for w in inverses {
        r += w * C64::new(mu, 0.0);
    }
    let r = HermitianMatrix::symmetrize(&ComplexMatrix::from_nalgebra(&r));
    let r_inv_sqrt = r
        .map_spectrum(|x| if x > 0.0 { 1.0 / x.sqrt() } else { 0.0 })
        .ok()?;
    let rs = r_inv_sqrt.to_nalgebra();
    let mut total = 0.0;
    for (g, w) in constraints.iter().zip(inverses) {
        let z = &rs * (w * C64::new(mu, 0.0)) * &rs;
        let g = g.to_nalgebra();
        total += g
            .iter()
            .zip(z.transpose().iter())
            .map(|(a, b)| (a * b).re)
            .sum::<f64>();
    }
    Some(total)
}

pub fn solve_domination(problem: &DominationProblem) -> SdpResult {
    let n = problem.d2;
    let basis = Arc::new(unit_basis(n));
    let objective: Vec<f64> = basis.iter().map(|b| b.trace().re).collect();
    let blocks = problem
        .constraints
        .iter()
        .map(|g| LmiBlock {
            constant: -g.to_nalgebra(),
            coeffs: Arc::clone(&basis),
        })
        .collect();
    let bp = BarrierProblem {
        objective,
        blocks,
        regularization: REGULARIZATION,
    };

    let top = problem
        .constraints
        .iter()
        .map(|g| g.max_eigenvalue().unwrap_or_else(|_| g.frobenius_norm()))
        .fold(f64::NEG_INFINITY, f64::max);
    let start = ComplexMatrix::identity(n).scale(top + 1.0);
    let y0 = coords::to_coordinates(&start);
    let trivial_lower = problem
        .constraints
        .iter()
        .map(|g| g.real_trace())
        .fold(f64::NEG_INFINITY, f64::max);
    let nu = (n * problem.constraints.len()) as f64;
    let settings = BarrierSettings {
        mu0: ((top + 1.0) * n as f64 - trivial_lower).max(1.0) / nu,
        target_gap: DOMINATION_TARGET_GAP,
        ..BarrierSettings::default()
    };

    let mut lower = f64::NEG_INFINITY;
    let outcome = barrier::run(&bp, y0, &settings, |pt| {
        let value: f64 = pt.y.iter().zip(&bp.objective).map(|(y, c)| y * c).sum();
        match dual_bound(&problem.constraints, pt.mu, pt.inverses) {
            Some(lb) => {
                lower = lower.max(lb);
                value - lower
            }
            None => f64::INFINITY,
        }
    });
    let h = HermitianMatrix::symmetrize(&coords::from_coordinates(n, &outcome.y));
    let value = h.real_trace();
    let status = match outcome.status {
        BarrierStatus::Converged => SdpStatus::Optimal,
        BarrierStatus::MaxIterations => SdpStatus::MaxIterations,
        BarrierStatus::Stalled => SdpStatus::NumericalFailure,
    };
    SdpResult {
        value,
        lower_bound: lower.max(trivial_lower),
        optimizer: h,
        gap: value - lower.max(trivial_lower),
        iterations: outcome.newton_steps,
        status,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fisher::{depolarizing_g, mub_family, omega, z_matrix};
    use crate::linalg::Basis;
    use crate::sample;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn check_feasible(res: &SdpResult, p: &DominationProblem) {
        for g in p.constraints() {
            let lam = res.optimizer.sub(g).min_eigenvalue().unwrap();
            assert!(lam >= -1e-7, "optimizer violates a constraint by {lam}");
        }
    }

    #[test]
    fn single_constraint_is_tight() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let g = sample::random_psd(&mut rng, 4, 2);
        let p = DominationProblem::new(vec![g.clone()]).unwrap();
        let res = solve_domination(&p);
        assert_eq!(res.status, SdpStatus::Optimal);
        assert!((res.value - g.real_trace()).abs() < 1e-6);
        assert!(res.optimizer.max_abs_diff(&g) < 1e-3);
        check_feasible(&res, &p);
    }

    #[test]
    fn commuting_constraints_take_entrywise_max() {
        let p = DominationProblem::new(vec![
            HermitianMatrix::real_diag(&[3.0, 1.0]),
            HermitianMatrix::real_diag(&[2.0, 2.0]),
        ])
        .unwrap();
        let res = solve_domination(&p);
        assert_eq!(res.status, SdpStatus::Optimal);
        assert!((res.value - 5.0).abs() < 1e-6, "{}", res.value);
        assert!(res.gap <= 1e-6);
        check_feasible(&res, &p);
    }

    #[test]
    fn depolarizing_constraints_over_mubs() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for d in [2usize, 3] {
            let fam = mub_family(d).unwrap();
            let ts: Vec<f64> = (0..fam.len()).map(|_| rng.random::<f64>()).collect();
            let gs = fam
                .bases()
                .iter()
                .zip(&ts)
                .map(|(e, &t)| depolarizing_g(e, t).into_matrix())
                .collect();
            let res = solve_domination(&DominationProblem::new(gs).unwrap());
            let expect = 1.0 + (d as f64 - 1.0) * ts.iter().map(|t| t * t).sum::<f64>();
            assert!(
                (res.value - expect).abs() < 1e-6,
                "d={d}: {} vs {expect}",
                res.value
            );
        }
    }

    #[test]
    fn value_bounded_below_by_traces_and_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..5 {
            let gs: Vec<HermitianMatrix> =
                (0..3).map(|_| sample::random_psd(&mut rng, 3, 2)).collect();
            let two = solve_domination(&DominationProblem::new(gs[..2].to_vec()).unwrap());
            let three = solve_domination(&DominationProblem::new(gs.clone()).unwrap());
            for g in &gs[..2] {
                assert!(two.value >= g.real_trace() - 1e-6);
            }
            assert!(three.value >= two.value - 1e-6);
            assert!(two.lower_bound <= two.value + 1e-12);
        }
    }

    #[test]
    fn orthogonal_closed_form() {
        let d = 3;
        let can = Basis::canonical(d);
        let f = crate::fisher::fourier_basis(d);
        let g1 = z_matrix(&can);
        let g2 = omega(d).combine(0.5, &z_matrix(&f), 0.5);
        let expect = 1.0 - 2.0 + g1.real_trace() + g2.real_trace();
        let res = solve_domination(&DominationProblem::new(vec![g1, g2]).unwrap());
        assert!((res.value - expect).abs() < 1e-6);
    }

    #[test]
    fn mismatched_dimensions_are_rejected() {
        let err = DominationProblem::new(vec![
            HermitianMatrix::identity(2),
            HermitianMatrix::identity(3),
        ]);
        assert!(err.is_err());
        assert!(DominationProblem::new(vec![]).is_err());
    }
}
