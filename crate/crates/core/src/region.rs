//! Compatibility regions of noisy channel tuples.
//!
//! The region of `(Φ_1, …, Φ_N)` is the set of `s ∈ [0,1]^N` for which the
//! channels `s_i Φ_i + (1 − s_i) Δ` are compatible. It is convex, closed, and
//! contains the origin, so along every ray from the origin membership changes
//! at most once and bisection finds the crossing.

use rayon::prelude::*;
use serde::Serialize;

use crate::channels::{depolarizing_parameter, Channel};
use crate::criteria::{
    auto_criterion, exact_depolarizing_pair, schur_pair_criterion, BasisPolicy, VerdictKind,
    CRITERION_MARGIN,
};
use crate::error::{Error, Result};
use crate::linalg::HermitianMatrix;
use crate::sdp::{solve_joint_channel_with, FeasibilityStatus, OracleOptions};

/// Smallest accepted bisection tolerance.
pub const MIN_BISECT_TOL: f64 = 1e-4;
/// Default number of rays for pairs.
pub const DEFAULT_RAYS: usize = 64;
const DIRECTION_NORM_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct RayResult {
    pub direction: Vec<f64>,
    /// Distance to the criterion boundary along the ray.
    pub criterion_radius: f64,
    /// Distance to the oracle boundary (marginal points count as inside).
    pub oracle_radius: Option<f64>,
    /// Exact boundary distance where a closed form is known.
    pub analytic_radius: Option<f64>,
    /// Final oracle bracket `[inside, outside]`, re-checked at the end.
    pub oracle_bracket: Option<(f64, f64)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RegionReport {
    pub channel_labels: Vec<String>,
    pub bisect_tol: f64,
    pub rays: Vec<RayResult>,
    /// Criterion verdicts on a uniform grid over `[0,1]²`, indexed `[i][j]`
    /// for `(s, t) = (i, j) / (resolution − 1)`; pairs only.
    pub grid: Option<Vec<Vec<VerdictKind>>>,
}

impl RegionReport {
    /// Rays whose oracle radius exceeds the criterion radius by more than `slack`.
    pub fn outer_bound_violations(&self, slack: f64) -> usize {
        self.rays
            .iter()
            .filter(|r| {
                r.oracle_radius
                    .is_some_and(|o| o > r.criterion_radius + slack)
            })
            .count()
    }
}

/// `n` unit directions in the closed first quadrant, from `e₁` to `e₂`.
pub fn quadrant_directions(n: usize) -> Vec<Vec<f64>> {
    if n == 1 {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        return vec![vec![h, h]];
    }
    (0..n)
        .map(|i| {
            let theta = std::f64::consts::FRAC_PI_2 * i as f64 / (n - 1) as f64;
            if i == 0 {
                vec![1.0, 0.0]
            } else if i == n - 1 {
                vec![0.0, 1.0]
            } else {
                vec![theta.cos(), theta.sin()]
            }
        })
        .collect()
}

fn check_direction(u: &[f64], n: usize) -> Result<f64> {
    if u.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: u.len(),
        });
    }
    if u.iter().any(|&x| !(x >= 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "direction {u:?} leaves the first orthant"
        )));
    }
    let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > DIRECTION_NORM_TOL {
        return Err(Error::InvalidParameter(format!(
            "direction {u:?} has norm {norm}, expected 1"
        )));
    }
    // largest r with r·u inside the unit cube
    Ok(1.0 / u.iter().cloned().fold(0.0, f64::max))
}

fn noisy_tuple(channels: &[Channel], point: &[f64]) -> Result<Vec<Channel>> {
    channels
        .iter()
        .zip(point)
        .map(|(ch, &s)| ch.noisy(s.clamp(0.0, 1.0)))
        .collect()
}

/// Returns `(inside, outside)` with `outside − inside ≤ tol`; `outside` is
/// `r_max` when the whole segment is inside.
fn bisect(r_max: f64, tol: f64, mut inside: impl FnMut(f64) -> Result<bool>) -> Result<(f64, f64)> {
    if inside(r_max)? {
        return Ok((r_max, r_max));
    }
    let (mut lo, mut hi) = (0.0, r_max);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if inside(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

/// Closed-form boundary for two depolarizing channels in the same dimension.
fn exact_pair_radius(channels: &[Channel], u: &[f64], r_max: f64, tol: f64) -> Result<Option<f64>> {
    if channels.len() != 2 {
        return Ok(None);
    }
    let d = channels[0].d_in();
    // the noisy family of Φ_t is Φ_{s·t}
    let ts: Option<Vec<f64>> = channels
        .iter()
        .map(|c| depolarizing_parameter(c, 1e-12))
        .collect();
    let Some(ts) = ts else { return Ok(None) };
    let (lo, hi) = bisect(r_max, tol * 1e-3, |r| {
        exact_depolarizing_pair(d, (r * u[0]).min(1.0) * ts[0], (r * u[1]).min(1.0) * ts[1])
    })?;
    Ok(Some(0.5 * (lo + hi)))
}

pub fn scan_rays(
    channels: &[Channel],
    directions: &[Vec<f64>],
    use_oracle: bool,
    bisect_tol: f64,
    oracle: &OracleOptions,
) -> Result<RegionReport> {
    if channels.is_empty() {
        return Err(Error::InvalidParameter("need at least one channel".into()));
    }
    if !(bisect_tol >= MIN_BISECT_TOL) {
        return Err(Error::InvalidParameter(format!(
            "bisection tolerance must be at least {MIN_BISECT_TOL} (got {bisect_tol})"
        )));
    }
    let n = channels.len();
    let r_maxes = directions
        .iter()
        .map(|u| check_direction(u, n))
        .collect::<Result<Vec<_>>>()?;
    if use_oracle {
        // fail fast on the budget before any ray runs
        solve_joint_channel_with(&noisy_tuple(channels, &vec![0.0; n])?, oracle)?;
    }
    let policy = BasisPolicy::Auto;
    let rays = directions
        .par_iter()
        .zip(&r_maxes)
        .map(|(u, &r_max)| {
            let point = |r: f64| -> Vec<f64> { u.iter().map(|x| r * x).collect() };
            let (c_lo, c_hi) = bisect(r_max, bisect_tol, |r| {
                Ok(!auto_criterion(
                    &noisy_tuple(channels, &point(r))?,
                    &policy,
                    CRITERION_MARGIN,
                )?
                .is_incompatible())
            })?;
            let (oracle_radius, oracle_bracket) = if use_oracle {
                let member = |r: f64| -> Result<bool> {
                    let res = solve_joint_channel_with(&noisy_tuple(channels, &point(r))?, oracle)?;
                    Ok(res.status != FeasibilityStatus::Infeasible)
                };
                let (lo, hi) = bisect(r_max, bisect_tol, member)?;
                // re-query the final bracket
                let confirmed = member(lo)? && (hi == lo || !member(hi)?);
                if !confirmed {
                    return Err(Error::Numerical(format!(
                        "oracle bracket [{lo}, {hi}] along {u:?} did not reproduce"
                    )));
                }
                (Some(0.5 * (lo + hi)), Some((lo, hi)))
            } else {
                (None, None)
            };
            Ok(RayResult {
                direction: u.clone(),
                criterion_radius: 0.5 * (c_lo + c_hi),
                oracle_radius,
                analytic_radius: exact_pair_radius(channels, u, r_max, bisect_tol)?,
                oracle_bracket,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RegionReport {
        channel_labels: channels.iter().map(|c| c.label().to_string()).collect(),
        bisect_tol,
        rays,
        grid: None,
    })
}

/// Criterion verdicts for a pair on a uniform grid.
pub fn criterion_grid(channels: &[Channel], resolution: usize) -> Result<Vec<Vec<VerdictKind>>> {
    if channels.len() != 2 {
        return Err(Error::InvalidParameter(format!(
            "grid needs a pair, got {} channels",
            channels.len()
        )));
    }
    if resolution < 2 {
        return Err(Error::InvalidParameter(format!(
            "resolution must be at least 2 (got {resolution})"
        )));
    }
    let step = |i: usize| i as f64 / (resolution - 1) as f64;
    (0..resolution)
        .into_par_iter()
        .map(|i| {
            (0..resolution)
                .map(|j| {
                    let tuple = noisy_tuple(channels, &[step(i), step(j)])?;
                    Ok(auto_criterion(&tuple, &BasisPolicy::Auto, CRITERION_MARGIN)?.kind)
                })
                .collect()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Figure2Row {
    pub d: usize,
    pub s: f64,
    pub t_exact: f64,
    pub t_criterion: f64,
}

/// Largest `t` with `(Φ_s, Φ_t)` compatible in dimension `d`.
pub fn exact_depolarizing_boundary(d: usize, s: f64) -> f64 {
    // with u = √(1−t) and v = 1−s the boundary is u² + (2/d)√v·u − (1−v) = 0
    let v = 1.0 - s;
    let dd = d as f64;
    let u = -v.sqrt() / dd + (v / (dd * dd) + 1.0 - v).sqrt();
    (1.0 - u * u).clamp(0.0, 1.0)
}

/// Exact and criterion boundaries for depolarizing pairs.
pub fn emit_figure2_data(ds: &[usize], resolution: usize) -> Result<Vec<Figure2Row>> {
    if resolution < 16 {
        return Err(Error::InvalidParameter(format!(
            "resolution must be at least 16 (got {resolution})"
        )));
    }
    if let Some(&bad) = ds.iter().find(|&&d| d < 2) {
        return Err(Error::InvalidParameter(format!(
            "dimension must be at least 2 (got {bad})"
        )));
    }
    let mut rows = Vec::with_capacity(ds.len() * resolution);
    for &d in ds {
        for i in 0..resolution {
            let s = i as f64 / (resolution - 1) as f64;
            rows.push(Figure2Row {
                d,
                s,
                t_exact: exact_depolarizing_boundary(d, s),
                t_criterion: (1.0 - s * s).max(0.0).sqrt(),
            });
        }
    }
    Ok(rows)
}

/// Rows whose exact boundary pokes outside the criterion circle by more
/// than `slack`.
pub fn figure2_violations(rows: &[Figure2Row], slack: f64) -> usize {
    rows.iter()
        .filter(|r| r.t_exact > r.t_criterion + slack)
        .count()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Figure1Row {
    pub s: f64,
    pub t: f64,
    pub criterion_inside: bool,
    pub oracle_compatible: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Figure1Data {
    pub rows: Vec<Figure1Row>,
    /// Oracle boundary along `e₁`, `e₂` and the diagonal.
    pub red_dots: Vec<RayResult>,
    pub notes: Vec<String>,
}

impl Figure1Data {
    /// Oracle-compatible rows the criterion places outside.
    pub fn outer_bound_violations(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| r.oracle_compatible == Some(true) && !r.criterion_inside)
            .count()
    }
}

/// Grid over `[0,1]²` for the Schur pair `(Σ_B, Σ_C)`.
pub fn emit_figure1_data(
    b: &HermitianMatrix,
    c: &HermitianMatrix,
    resolution: usize,
    use_oracle: bool,
    oracle: &OracleOptions,
) -> Result<Figure1Data> {
    if resolution < 2 {
        return Err(Error::InvalidParameter(format!(
            "resolution must be at least 2 (got {resolution})"
        )));
    }
    let phi = crate::channels::make_schur(b)?;
    let psi = crate::channels::make_schur(c)?;
    let pair = [phi.clone(), psi.clone()];
    if use_oracle {
        solve_joint_channel_with(&pair, oracle)?;
    }
    let grid: Vec<(f64, f64)> = (0..resolution)
        .flat_map(|i| (0..resolution).map(move |j| (i, j)))
        .map(|(i, j)| {
            (
                i as f64 / (resolution - 1) as f64,
                j as f64 / (resolution - 1) as f64,
            )
        })
        .collect();
    let rows = grid
        .par_iter()
        .map(|&(s, t)| {
            let criterion_inside = !schur_pair_criterion(b, c, s, t)?.is_incompatible();
            let oracle_compatible = if use_oracle {
                let res = solve_joint_channel_with(&[phi.noisy(s)?, psi.noisy(t)?], oracle)?;
                Some(res.status != FeasibilityStatus::Infeasible)
            } else {
                None
            };
            Ok(Figure1Row {
                s,
                t,
                criterion_inside,
                oracle_compatible,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut notes = vec![
        "criterion_inside: neither s^2 + beta(C) t^2 nor beta(B) s^2 + t^2 exceeds 1".to_string(),
    ];
    let red_dots = if use_oracle {
        notes.push(
            "red_dots: oracle boundary along e1, e2 and the diagonal (marginal counts as inside)"
                .into(),
        );
        let h = std::f64::consts::FRAC_1_SQRT_2;
        scan_rays(
            &pair,
            &[vec![1.0, 0.0], vec![0.0, 1.0], vec![h, h]],
            true,
            MIN_BISECT_TOL,
            oracle,
        )?
        .rays
    } else {
        Vec::new()
    };
    Ok(Figure1Data {
        rows,
        red_dots,
        notes,
    })
}

pub fn figure1_csv(data: &Figure1Data) -> String {
    let mut out = String::from("s,t,criterion_inside,oracle_compatible\n");
    for r in &data.rows {
        let oracle = r
            .oracle_compatible
            .map(|b| b.to_string())
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.s, r.t, r.criterion_inside, oracle
        ));
    }
    out
}

pub fn figure2_csv(rows: &[Figure2Row]) -> String {
    let mut out = String::from("d,s,t_exact,t_criterion\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.d, r.s, r.t_exact, r.t_criterion
        ));
    }
    out
}

pub fn rays_csv(report: &RegionReport) -> String {
    let n = report.rays.first().map_or(0, |r| r.direction.len());
    let mut out = String::new();
    for i in 0..n {
        out.push_str(&format!("u{},", i + 1));
    }
    out.push_str("criterion_radius,oracle_radius,analytic_radius\n");
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    for r in &report.rays {
        for x in &r.direction {
            out.push_str(&format!("{x},"));
        }
        out.push_str(&format!(
            "{},{},{}\n",
            r.criterion_radius,
            opt(r.oracle_radius),
            opt(r.analytic_radius)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::make_depolarizing;
    use crate::criteria::self_compat_threshold;
    use crate::linalg::ComplexMatrix;

    fn half() -> HermitianMatrix {
        HermitianMatrix::new(ComplexMatrix::from_real_rows(&[&[1.0, 0.5], &[0.5, 1.0]]).unwrap())
            .unwrap()
    }

    fn id_pair() -> Vec<Channel> {
        vec![
            make_depolarizing(2, 1.0).unwrap(),
            make_depolarizing(2, 1.0).unwrap(),
        ]
    }

    #[test]
    fn directions_cover_the_quadrant() {
        let dirs = quadrant_directions(DEFAULT_RAYS);
        assert_eq!(dirs.len(), 64);
        assert_eq!(dirs[0], vec![1.0, 0.0]);
        assert_eq!(dirs[63], vec![0.0, 1.0]);
        for u in &dirs {
            assert!(check_direction(u, 2).is_ok());
        }
        assert!(check_direction(&[0.6, 0.6], 2).is_err());
        assert!(check_direction(&[-0.6, 0.8], 2).is_err());
    }

    #[test]
    fn depolarizing_diagonal() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let rep = scan_rays(
            &id_pair(),
            &[vec![h, h], vec![1.0, 0.0]],
            true,
            1e-4,
            &OracleOptions::default(),
        )
        .unwrap();
        let diag = &rep.rays[0];
        assert!((diag.oracle_radius.unwrap() * h - 2.0 / 3.0).abs() < 1e-4);
        assert!((diag.criterion_radius * h - h).abs() < 1e-4);
        assert!((diag.analytic_radius.unwrap() * h - self_compat_threshold(2)).abs() < 1e-6);
        let axis = &rep.rays[1];
        assert_eq!(axis.criterion_radius, 1.0);
        assert_eq!(axis.oracle_radius, Some(1.0));
        assert_eq!(rep.outer_bound_violations(1e-4), 0);
    }

    #[test]
    fn bad_inputs() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let opts = OracleOptions::default();
        assert!(scan_rays(&id_pair(), &[vec![h, h]], false, 1e-5, &opts).is_err());
        assert!(scan_rays(&id_pair(), &[vec![1.0, 1.0]], false, 1e-3, &opts).is_err());
        let four = vec![make_depolarizing(2, 1.0).unwrap(); 4];
        let u = vec![0.5; 4];
        assert!(matches!(
            scan_rays(&four, &[u], true, 1e-3, &opts),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn grid_is_symmetric_for_identical_channels() {
        let g = criterion_grid(&id_pair(), 9).unwrap();
        for i in 0..9 {
            for j in 0..9 {
                assert_eq!(g[i][j], g[j][i]);
            }
        }
        assert_eq!(g[8][8], VerdictKind::IncompatibleCertified);
        assert_eq!(g[8][0], VerdictKind::CompatibleCertified);
        assert_eq!(g[4][4], VerdictKind::Undetermined);
        assert!(criterion_grid(&id_pair()[..1], 9).is_err());
    }

    #[test]
    fn boundary_formula() {
        assert!((exact_depolarizing_boundary(2, 2.0 / 3.0) - 2.0 / 3.0).abs() < 1e-12);
        for d in [2usize, 3, 7] {
            assert_eq!(exact_depolarizing_boundary(d, 1.0), 0.0);
            assert!((exact_depolarizing_boundary(d, 0.0) - 1.0).abs() < 1e-12);
            for i in 1..20 {
                let s = i as f64 / 20.0;
                let t = exact_depolarizing_boundary(d, s);
                let lhs = t + s - 2.0 / d as f64 * ((1.0 - t) * (1.0 - s)).sqrt();
                assert!((lhs - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn figure2_rows() {
        let rows = emit_figure2_data(&[2, 5, 20], 200).unwrap();
        assert_eq!(rows.len(), 600);
        assert_eq!(figure2_violations(&rows, 1e-9), 0);
        let last = rows.iter().find(|r| r.d == 5 && r.s == 1.0).unwrap();
        assert_eq!((last.t_exact, last.t_criterion), (0.0, 0.0));
        assert!(emit_figure2_data(&[2], 8).is_err());
        let csv = figure2_csv(&rows);
        assert_eq!(csv.lines().count(), 601);
        assert!(csv.starts_with("d,s,t_exact,t_criterion\n"));
    }

    #[test]
    fn figure1_criterion_only() {
        let b = half();
        let data = emit_figure1_data(&b, &b, 11, false, &OracleOptions::default()).unwrap();
        assert_eq!(data.rows.len(), 121);
        let at = |s: f64, t: f64| data.rows.iter().find(|r| r.s == s && r.t == t).unwrap();
        assert!(!at(0.9, 0.9).criterion_inside);
        assert!(at(1.0, 0.0).criterion_inside);
        assert!(at(0.0, 1.0).criterion_inside);
        assert!(data.rows.iter().all(|r| r.oracle_compatible.is_none()));
        // symmetric input gives a symmetric picture
        for r in &data.rows {
            assert_eq!(r.criterion_inside, at(r.t, r.s).criterion_inside);
        }
    }

    #[test]
    fn figure1_with_oracle_is_sound() {
        let b = half();
        let data = emit_figure1_data(&b, &b, 6, true, &OracleOptions::default()).unwrap();
        assert_eq!(data.outer_bound_violations(), 0);
        assert_eq!(data.red_dots.len(), 3);
        assert_eq!(data.red_dots[0].oracle_radius, Some(1.0));
        let csv = figure1_csv(&data);
        assert!(csv.lines().nth(1).unwrap().ends_with("true"));
    }
}
