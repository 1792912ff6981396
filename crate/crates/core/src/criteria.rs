//! Incompatibility decisions.
//!
//! The Fisher-information criterion is one-sided: it can certify
//! incompatibility but never compatibility. Compatibility is certified only
//! by an explicit joint channel: the exact oracle's witness, or the product
//! channel when all but one input are replacement channels.

use serde::Serialize;

use crate::channels::{depolarizing_parameter, replacement_state, Channel, Povm};
use crate::error::{Error, Result};
use crate::fisher::{beta, fourier_basis, g_matrix, g_matrix_povm, is_prime, mub_family};
use crate::linalg::{Basis, HermitianMatrix};
use crate::sdp::{
    solve_domination, solve_joint_channel_with, DominationProblem, FeasibilityResult,
    FeasibilityStatus, OracleOptions, SdpResult,
};

/// Required excess of the SDP value over `d` before incompatibility is
/// certified.
pub const CRITERION_MARGIN: f64 = 1e-6;
/// Slack for closed-form inequalities.
pub const ANALYTIC_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum VerdictKind {
    IncompatibleCertified,
    CompatibleCertified,
    Undetermined,
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub kind: VerdictKind,
    /// Criterion value (SDP optimum or closed-form left-hand side).
    pub value: Option<f64>,
    pub margin: f64,
    pub certificate: String,
}

impl Verdict {
    pub fn is_incompatible(&self) -> bool {
        self.kind == VerdictKind::IncompatibleCertified
    }

    pub fn is_compatible(&self) -> bool {
        self.kind == VerdictKind::CompatibleCertified
    }

    fn undetermined(value: Option<f64>, margin: f64, certificate: String) -> Self {
        Self {
            kind: VerdictKind::Undetermined,
            value,
            margin,
            certificate,
        }
    }
}

fn check_margin(margin: f64) -> Result<()> {
    if !(margin.is_finite() && margin >= CRITERION_MARGIN) {
        return Err(Error::InvalidParameter(format!(
            "criterion margin must be at least {CRITERION_MARGIN} (got {margin})"
        )));
    }
    Ok(())
}

fn check_unit(name: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidParameter(format!(
            "{name} must lie in [0, 1] (got {x})"
        )));
    }
    Ok(())
}

/// Certifies from the dual lower bound, so an unconverged solve can only
/// lose a certificate, never produce a false one.
fn domination_verdict(
    gs: Vec<HermitianMatrix>,
    d: usize,
    margin: f64,
    what: &str,
) -> Result<(Verdict, SdpResult)> {
    let res = solve_domination(&DominationProblem::new(gs)?);
    let threshold = d as f64 + margin;
    let detail = format!(
        "{what}; SDP value {:.9} (certified lower bound {:.9}, gap {:.2e}, {} Newton steps, {:?})",
        res.value, res.lower_bound, res.gap, res.iterations, res.status
    );
    let verdict = if res.lower_bound > threshold {
        Verdict {
            kind: VerdictKind::IncompatibleCertified,
            value: Some(res.value),
            margin,
            certificate: format!("{detail} > d + margin = {threshold}"),
        }
    } else {
        Verdict::undetermined(
            Some(res.value),
            margin,
            format!("{detail} does not exceed d + margin = {threshold}"),
        )
    };
    Ok((verdict, res))
}

fn common_dimension(channels: &[Channel]) -> Result<usize> {
    let first = channels
        .first()
        .ok_or_else(|| Error::InvalidParameter("need at least one channel".into()))?;
    let d = first.d_in();
    for ch in channels {
        if ch.d_in() != d || ch.d_out() != d {
            return Err(Error::InvalidParameter(format!(
                "criterion needs channels on a common C^{d} -> C^{d} (got {} -> {} for '{}')",
                ch.d_in(),
                ch.d_out(),
                ch.label()
            )));
        }
    }
    Ok(d)
}

/// Runs the criterion with channel `i` read out in `bases[i]`.
pub fn zhu_criterion_channels(channels: &[Channel], bases: &[Basis]) -> Result<Verdict> {
    zhu_criterion_channels_with(channels, bases, CRITERION_MARGIN)
}

pub fn zhu_criterion_channels_with(
    channels: &[Channel],
    bases: &[Basis],
    margin: f64,
) -> Result<Verdict> {
    check_margin(margin)?;
    let d = common_dimension(channels)?;
    if bases.len() != channels.len() {
        return Err(Error::InvalidParameter(format!(
            "{} channels but {} bases",
            channels.len(),
            bases.len()
        )));
    }
    if let Some(bad) = bases.iter().find(|b| b.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: bad.dim(),
        });
    }
    let gs = channels
        .iter()
        .zip(bases)
        .map(|(ch, e)| g_matrix(ch, e).map(|g| g.into_matrix()))
        .collect::<Result<Vec<_>>>()?;
    Ok(domination_verdict(
        gs,
        d,
        margin,
        &format!("{} channels in d = {d}", channels.len()),
    )?
    .0)
}

pub fn zhu_criterion_povms(povms: &[Povm]) -> Result<Verdict> {
    zhu_criterion_povms_with(povms, CRITERION_MARGIN)
}

pub fn zhu_criterion_povms_with(povms: &[Povm], margin: f64) -> Result<Verdict> {
    check_margin(margin)?;
    let d = povms
        .first()
        .ok_or_else(|| Error::InvalidParameter("need at least one POVM".into()))?
        .d();
    if let Some(bad) = povms.iter().find(|p| p.d() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: bad.d(),
        });
    }
    let gs = povms
        .iter()
        .map(|p| g_matrix_povm(p).into_matrix())
        .collect();
    Ok(domination_verdict(gs, d, margin, &format!("{} POVMs in d = {d}", povms.len()))?.0)
}

/// How bases are chosen when the caller supplies none.
#[derive(Clone, Debug, Default)]
pub enum BasisPolicy {
    /// A prefix of the MUB family (canonical, Fourier, ...); for pairs the
    /// swapped assignment is tried as well and the larger value kept.
    #[default]
    Auto,
    /// Canonical basis for every channel.
    Canonical,
    /// One basis per channel, in order.
    Explicit(Vec<Basis>),
}

/// Candidate basis assignments for `n` channels in dimension `d`.
pub fn candidate_bases(policy: &BasisPolicy, d: usize, n: usize) -> Result<Vec<Vec<Basis>>> {
    match policy {
        BasisPolicy::Explicit(bases) => {
            if bases.len() != n {
                return Err(Error::InvalidParameter(format!(
                    "{n} channels but {} bases",
                    bases.len()
                )));
            }
            Ok(vec![bases.clone()])
        }
        BasisPolicy::Canonical => Ok(vec![vec![Basis::canonical(d); n]]),
        BasisPolicy::Auto => {
            let prefix: Vec<Basis> = if is_prime(d) && n <= d + 1 {
                mub_family(d)?.bases()[..n].to_vec()
            } else if n <= 2 {
                [Basis::canonical(d), fourier_basis(d)][..n].to_vec()
            } else {
                return Err(Error::InvalidParameter(format!(
                    "no default bases for {n} channels in d = {d}; supply explicit bases"
                )));
            };
            let mut out = vec![prefix.clone()];
            if n == 2 {
                out.push(vec![prefix[1].clone(), prefix[0].clone()]);
            }
            Ok(out)
        }
    }
}

/// Runs the criterion over every candidate assignment of `policy` and keeps
/// the strongest result.
pub fn criterion_with_policy(
    channels: &[Channel],
    policy: &BasisPolicy,
    margin: f64,
) -> Result<Verdict> {
    let d = common_dimension(channels)?;
    let mut best: Option<Verdict> = None;
    for bases in candidate_bases(policy, d, channels.len())? {
        let v = zhu_criterion_channels_with(channels, &bases, margin)?;
        let better = match &best {
            None => true,
            Some(b) => v.value.unwrap_or(f64::NEG_INFINITY) > b.value.unwrap_or(f64::NEG_INFINITY),
        };
        if better {
            best = Some(v);
        }
    }
    Ok(best.expect("at least one candidate assignment"))
}

/// Entrywise tolerance for recognizing a depolarizing channel.
const DEPOLARIZING_MATCH_TOL: f64 = 1e-12;

/// The criterion under `policy`, using the closed form `Σ t_i² > 1` when every
/// channel is depolarizing and the MUB family covers them (it is the SDP value
/// over that family, without solver noise).
pub fn auto_criterion(channels: &[Channel], policy: &BasisPolicy, margin: f64) -> Result<Verdict> {
    let d = common_dimension(channels)?;
    if let Some(v) = replacement_certificate(channels) {
        return Ok(v);
    }
    match closed_form_parameters(channels, policy)? {
        Some(ts) => {
            check_margin(margin)?;
            let mut v = depolarizing_criterion(d, &ts)?;
            // the SDP value is 1 + (d−1)Σt², so the margin above d is (d−1)(Σt² − 1)
            let excess = v.value.map_or(0.0, |sum| (d as f64 - 1.0) * (sum - 1.0));
            if v.is_incompatible() && excess <= margin {
                v = Verdict::undetermined(
                    v.value,
                    margin,
                    format!(
                        "{}; SDP value exceeds d by {excess:.3e}, within the margin",
                        v.certificate
                    ),
                );
            } else {
                v.margin = margin;
            }
            Ok(v)
        }
        None => criterion_with_policy(channels, policy, margin),
    }
}

/// The depolarizing parameters when [`auto_criterion`] would use the closed
/// form instead of the SDP.
pub fn closed_form_parameters(
    channels: &[Channel],
    policy: &BasisPolicy,
) -> Result<Option<Vec<f64>>> {
    let d = common_dimension(channels)?;
    if !(matches!(policy, BasisPolicy::Auto) && is_prime(d) && channels.len() <= d + 1) {
        return Ok(None);
    }
    Ok(channels
        .iter()
        .map(|c| depolarizing_parameter(c, DEPOLARIZING_MATCH_TOL))
        .collect())
}

/// Entrywise tolerance for recognizing `ρ ↦ Tr(ρ) σ`.
const REPLACEMENT_MATCH_TOL: f64 = 1e-12;

/// Compatibility from structure: when every channel but at most one is a
/// replacement channel `ρ ↦ Tr(ρ) σ_i`, the product `Φ ⊗ σ_1 ⊗ …` is a joint
/// channel.
pub fn replacement_certificate(channels: &[Channel]) -> Option<Verdict> {
    let mut general = Vec::new();
    for (i, ch) in channels.iter().enumerate() {
        if replacement_state(ch, REPLACEMENT_MATCH_TOL).is_none() {
            general.push(i);
        }
    }
    if general.len() > 1 || channels.is_empty() {
        return None;
    }
    let certificate = match general.first() {
        Some(&k) => format!(
            "channel {k} ('{}') tensored with the fixed outputs of the other {} replacement channel(s) is a joint channel",
            channels[k].label(),
            channels.len() - 1
        ),
        None => "all channels are replacement channels; the product of their outputs is a joint channel".into(),
    };
    Some(Verdict {
        kind: VerdictKind::CompatibleCertified,
        value: None,
        margin: REPLACEMENT_MATCH_TOL,
        certificate,
    })
}

/// Closed form for two Schur channels `Φ_s`, `Ψ_t` with matrices `b`, `c`,
/// read out in the canonical and Fourier bases (both orientations).
pub fn schur_pair_criterion(
    b: &HermitianMatrix,
    c: &HermitianMatrix,
    s: f64,
    t: f64,
) -> Result<Verdict> {
    check_unit("s", s)?;
    check_unit("t", t)?;
    if b.dim() != c.dim() {
        return Err(Error::DimensionMismatch {
            expected: b.dim(),
            actual: c.dim(),
        });
    }
    let (bb, bc) = (beta(b)?, beta(c)?);
    let lhs1 = s * s + bc * t * t;
    let lhs2 = bb * s * s + t * t;
    let value = lhs1.max(lhs2);
    let certificate = format!(
        "beta(B) = {bb:.12}, beta(C) = {bc:.12}; s^2 + beta(C) t^2 = {lhs1:.12}, beta(B) s^2 + t^2 = {lhs2:.12}"
    );
    Ok(if value > 1.0 + ANALYTIC_TOL {
        Verdict {
            kind: VerdictKind::IncompatibleCertified,
            value: Some(value),
            margin: ANALYTIC_TOL,
            certificate: format!("{certificate}; exceeds 1"),
        }
    } else {
        Verdict::undetermined(
            Some(value),
            ANALYTIC_TOL,
            format!("{certificate}; both at most 1"),
        )
    })
}

/// `Σ t_i² > 1` certifies incompatibility of depolarizing channels in a
/// prime dimension with enough mutually unbiased bases.
pub fn depolarizing_criterion(d: usize, ts: &[f64]) -> Result<Verdict> {
    if !is_prime(d) {
        return Err(Error::InvalidParameter(format!(
            "closed form needs a prime dimension (got d = {d}); use the SDP criterion with explicit bases"
        )));
    }
    if ts.is_empty() || ts.len() > d + 1 {
        return Err(Error::InvalidParameter(format!(
            "closed form covers 1..={} channels in d = {d} (got {}); use the SDP criterion",
            d + 1,
            ts.len()
        )));
    }
    for &t in ts {
        check_unit("t", t)?;
    }
    let sum: f64 = ts.iter().map(|t| t * t).sum();
    Ok(if sum > 1.0 + ANALYTIC_TOL {
        Verdict {
            kind: VerdictKind::IncompatibleCertified,
            value: Some(sum),
            margin: ANALYTIC_TOL,
            certificate: format!("sum of t_i^2 = {sum:.12} > 1 (mutually unbiased read-out bases)"),
        }
    } else {
        Verdict::undetermined(
            Some(sum),
            ANALYTIC_TOL,
            format!("sum of t_i^2 = {sum:.12} <= 1"),
        )
    })
}

/// Exact compatibility of two depolarizing channels:
/// `t + s − (2/d)·√((1−t)(1−s)) ≤ 1`.
pub fn exact_depolarizing_pair(d: usize, s: f64, t: f64) -> Result<bool> {
    check_unit("s", s)?;
    check_unit("t", t)?;
    if d < 2 {
        return Err(Error::InvalidParameter(format!(
            "d must be at least 2 (got {d})"
        )));
    }
    Ok(exact_pair_lhs(d, s, t) <= 1.0 + ANALYTIC_TOL)
}

fn exact_pair_lhs(d: usize, s: f64, t: f64) -> f64 {
    t + s - (2.0 / d as f64) * ((1.0 - t) * (1.0 - s)).sqrt()
}

/// Largest `t` with `Φ_t` compatible with itself: `(d+2)/(2(d+1))`.
pub fn self_compat_threshold(d: usize) -> f64 {
    let d = d as f64;
    (d + 2.0) / (2.0 * (d + 1.0))
}

/// Maps an oracle result onto a verdict.
pub fn oracle_verdict(result: &FeasibilityResult) -> Verdict {
    let detail = format!(
        "joint-channel SDP: lambda* = {:.3e}, certified upper bound {:.3e}, {} Newton steps",
        result.lambda_star, result.upper_bound, result.iterations
    );
    let (kind, note) = match result.status {
        FeasibilityStatus::Feasible => (
            VerdictKind::CompatibleCertified,
            "positive definite joint witness found",
        ),
        FeasibilityStatus::Infeasible => (
            VerdictKind::IncompatibleCertified,
            "no joint object can be positive",
        ),
        FeasibilityStatus::Marginal => (
            VerdictKind::Undetermined,
            "boundary case within the marginal band",
        ),
    };
    Verdict {
        kind,
        value: Some(result.lambda_star),
        margin: 0.0,
        certificate: format!("{detail}; {note}"),
    }
}

/// Runs the exact oracle on `channels` and returns both views.
pub fn oracle_check(
    channels: &[Channel],
    opts: &OracleOptions,
) -> Result<(Verdict, FeasibilityResult)> {
    let res = solve_joint_channel_with(channels, opts)?;
    Ok((oracle_verdict(&res), res))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::make_depolarizing;
    use crate::linalg::{re, ComplexMatrix};
    use crate::sample;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dep(d: usize, t: f64) -> Channel {
        make_depolarizing(d, t).unwrap()
    }

    fn half() -> HermitianMatrix {
        HermitianMatrix::new(ComplexMatrix::from_real_rows(&[&[1.0, 0.5], &[0.5, 1.0]]).unwrap())
            .unwrap()
    }

    #[test]
    fn closed_form_honours_the_margin() {
        let chans = [
            make_depolarizing(2, 0.8).unwrap(),
            make_depolarizing(2, 0.7).unwrap(),
        ];
        let v = auto_criterion(&chans, &BasisPolicy::Auto, CRITERION_MARGIN).unwrap();
        assert!(v.is_incompatible());
        assert_eq!(v.margin, CRITERION_MARGIN);
        // the SDP value 2.13 exceeds d = 2 by 0.13
        let v = auto_criterion(&chans, &BasisPolicy::Auto, 0.2).unwrap();
        assert_eq!(v.kind, VerdictKind::Undetermined);
        assert!(auto_criterion(&chans, &BasisPolicy::Auto, 1e-9).is_err());
    }

    #[test]
    fn replacement_channels_are_compatible_with_anything() {
        let delta = Channel::completely_depolarizing(2);
        let v = auto_criterion(
            &[delta.clone(), Channel::identity(2)],
            &BasisPolicy::Auto,
            CRITERION_MARGIN,
        )
        .unwrap();
        assert!(v.is_compatible(), "{v:?}");
        let v = auto_criterion(
            &[delta.clone(), delta.clone()],
            &BasisPolicy::Canonical,
            CRITERION_MARGIN,
        )
        .unwrap();
        assert!(v.is_compatible());
        let v = auto_criterion(
            &[delta, Channel::identity(2), Channel::identity(2)],
            &BasisPolicy::Auto,
            CRITERION_MARGIN,
        )
        .unwrap();
        assert!(v.is_incompatible());
    }

    #[test]
    fn depolarizing_pair_over_mubs() {
        let fam = mub_family(2).unwrap();
        let v = zhu_criterion_channels(&[dep(2, 0.8), dep(2, 0.8)], &fam.bases()[..2]).unwrap();
        assert!(v.is_incompatible());
        assert!((v.value.unwrap() - 2.28).abs() < 1e-6);
    }

    #[test]
    fn fully_depolarizing_pair_is_undetermined() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let bases = [
            sample::random_basis(&mut rng, 3),
            sample::random_basis(&mut rng, 3),
        ];
        let delta = Channel::completely_depolarizing(3);
        let v = zhu_criterion_channels(&[delta.clone(), delta], &bases).unwrap();
        assert_eq!(v.kind, VerdictKind::Undetermined);
        assert!((v.value.unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn identity_pair_violates_no_cloning() {
        let bases = [Basis::canonical(2), fourier_basis(2)];
        let v =
            zhu_criterion_channels(&[Channel::identity(2), Channel::identity(2)], &bases).unwrap();
        assert!(v.is_incompatible());
        assert!((v.value.unwrap() - 3.0).abs() < 1e-6);
    }

    #[test]
    fn povm_examples() {
        let can = Povm::projective(&Basis::canonical(2));
        let four = Povm::projective(&fourier_basis(2));
        let v = zhu_criterion_povms(&[can, four]).unwrap();
        assert!(v.is_incompatible());
        assert!((v.value.unwrap() - 3.0).abs() < 1e-6);

        let mut rng = ChaCha8Rng::seed_from_u64(62);
        let p = sample::random_povm(&mut rng, 3, 4);
        let v = zhu_criterion_povms(std::slice::from_ref(&p)).unwrap();
        assert_eq!(v.kind, VerdictKind::Undetermined);
        assert!((v.value.unwrap() - g_matrix_povm(&p).trace()).abs() < 1e-6);
        assert!(v.value.unwrap() <= 3.0 + 1e-9);

        let v = zhu_criterion_povms(&[Povm::trivial(2), Povm::trivial(2)]).unwrap();
        assert_eq!(v.kind, VerdictKind::Undetermined);
        assert!((v.value.unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn margin_below_floor_is_rejected() {
        let bases = [Basis::canonical(2), fourier_basis(2)];
        let chs = [Channel::identity(2), Channel::identity(2)];
        assert!(zhu_criterion_channels_with(&chs, &bases, 1e-9).is_err());
        assert!(zhu_criterion_channels_with(&chs, &bases[..1], 1e-6).is_err());
    }

    #[test]
    fn schur_examples() {
        let b = half();
        let v = schur_pair_criterion(&b, &b, 0.9, 0.9).unwrap();
        assert!(v.is_incompatible());
        assert!((v.value.unwrap() - (0.81 + 0.25 * 0.81)).abs() < 1e-15);
        assert_eq!(
            schur_pair_criterion(&b, &b, 1.0, 0.0).unwrap().kind,
            VerdictKind::Undetermined
        );
        let j = HermitianMatrix::new(ComplexMatrix::from_fn(2, 2, |_, _| re(1.0))).unwrap();
        assert!(schur_pair_criterion(&j, &j, 0.8, 0.8)
            .unwrap()
            .is_incompatible());
        assert!(
            schur_pair_criterion(&HermitianMatrix::real_diag(&[1.0, 0.5]), &b, 0.5, 0.5).is_err()
        );
        assert!(schur_pair_criterion(&b, &b, 1.1, 0.5).is_err());
    }

    /// The closed form must agree with the SDP run on the same bases.
    #[test]
    fn schur_closed_form_matches_sdp() {
        let mut rng = ChaCha8Rng::seed_from_u64(63);
        for d in [2usize, 3] {
            for _ in 0..4 {
                let rb = 1 + rng.random_range(0..d);
                let rc = 1 + rng.random_range(0..d);
                let b = sample::random_schur_matrix(&mut rng, d, rb);
                let c = sample::random_schur_matrix(&mut rng, d, rc);
                let (s, t) = (rng.random::<f64>(), rng.random::<f64>());
                let phi = crate::channels::make_schur(&b).unwrap().noisy(s).unwrap();
                let psi = crate::channels::make_schur(&c).unwrap().noisy(t).unwrap();
                let sdp =
                    zhu_criterion_channels(&[phi, psi], &[Basis::canonical(d), fourier_basis(d)])
                        .unwrap();
                let closed = 1.0 + (d as f64 - 1.0) * (s * s + beta(&c).unwrap() * t * t);
                assert!(
                    (sdp.value.unwrap() - closed).abs() < 1e-6,
                    "d={d}: {} vs {closed}",
                    sdp.value.unwrap()
                );
            }
        }
    }

    #[test]
    fn schur_with_all_ones_matches_depolarizing() {
        let j = HermitianMatrix::new(ComplexMatrix::from_fn(3, 3, |_, _| re(1.0))).unwrap();
        for i in 0..=20 {
            for k in 0..=20 {
                let (s, t) = (i as f64 / 20.0, k as f64 / 20.0);
                let a = schur_pair_criterion(&j, &j, s, t).unwrap().kind;
                let b = depolarizing_criterion(3, &[s, t]).unwrap().kind;
                assert_eq!(a, b, "({s}, {t})");
            }
        }
    }

    #[test]
    fn depolarizing_examples() {
        assert!(depolarizing_criterion(2, &[0.8, 0.8])
            .unwrap()
            .is_incompatible());
        let n = 3;
        let ts = vec![1.0 / (n as f64).sqrt(); n];
        assert_eq!(
            depolarizing_criterion(2, &ts).unwrap().kind,
            VerdictKind::Undetermined
        );
        assert_eq!(
            depolarizing_criterion(2, &[0.6, 0.6]).unwrap().kind,
            VerdictKind::Undetermined
        );
        assert!(depolarizing_criterion(2, &[0.5; 4]).is_err());
        assert!(depolarizing_criterion(4, &[0.5, 0.5]).is_err());
    }

    #[test]
    fn depolarizing_closed_form_matches_sdp() {
        let mut rng = ChaCha8Rng::seed_from_u64(64);
        for d in [2usize, 3] {
            for n in 2..=d + 1 {
                for _ in 0..3 {
                    let ts: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
                    let chs: Vec<Channel> = ts.iter().map(|&t| dep(d, t)).collect();
                    let fam = mub_family(d).unwrap();
                    let a = zhu_criterion_channels(&chs, &fam.bases()[..n]).unwrap();
                    let b = depolarizing_criterion(d, &ts).unwrap();
                    assert_eq!(a.kind, b.kind, "d={d} ts={ts:?}");
                }
            }
        }
    }

    #[test]
    fn exact_pair_examples() {
        assert!(exact_depolarizing_pair(2, 2.0 / 3.0, 2.0 / 3.0).unwrap());
        assert!(exact_depolarizing_pair(7, 1.0, 0.0).unwrap());
        assert!(!exact_depolarizing_pair(2, 0.75, 0.75).unwrap());
        assert!(exact_depolarizing_pair(2, 0.6, 0.6).unwrap());
        assert!(exact_depolarizing_pair(2, -0.1, 0.5).is_err());
    }

    #[test]
    fn exact_region_inside_criterion_circle() {
        for d in [2usize, 3, 5, 20] {
            for i in 0..=200 {
                for k in 0..=200 {
                    let (s, t) = (i as f64 / 200.0, k as f64 / 200.0);
                    if exact_depolarizing_pair(d, s, t).unwrap() {
                        assert!(s * s + t * t <= 1.0 + 1e-9, "d={d} ({s}, {t})");
                    }
                }
            }
        }
    }

    #[test]
    fn thresholds() {
        assert!((self_compat_threshold(2) - 2.0 / 3.0).abs() < 1e-15);
        assert!((self_compat_threshold(4) - 0.6).abs() < 1e-15);
        assert!((self_compat_threshold(1_000_000) - 0.5).abs() < 1e-6);
        for d in 2..10 {
            let t = self_compat_threshold(d);
            assert!((exact_pair_lhs(d, t, t) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn monotone_in_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(65);
        for _ in 0..500 {
            let ts: Vec<f64> = (0..3).map(|_| rng.random::<f64>()).collect();
            let up: Vec<f64> = ts
                .iter()
                .map(|t| t + (1.0 - t) * rng.random::<f64>())
                .collect();
            if depolarizing_criterion(2, &ts).unwrap().is_incompatible() {
                assert!(depolarizing_criterion(2, &up).unwrap().is_incompatible());
            }
        }
    }

    #[test]
    fn auto_policy_tries_both_orientations() {
        let b = half();
        let phi = crate::channels::make_schur(&b)
            .unwrap()
            .noisy(0.95)
            .unwrap();
        let psi = crate::channels::make_schur(&HermitianMatrix::identity(2)).unwrap();
        // (canonical, Fourier) gives 1 + s^2 + beta(I) t^2; the swap gives 1 + beta(B) s^2 + t^2
        let v = criterion_with_policy(&[phi, psi], &BasisPolicy::Auto, CRITERION_MARGIN).unwrap();
        let expect = 1.0 + (0.25 * 0.95f64.powi(2) + 1.0).max(0.95f64.powi(2));
        assert!((v.value.unwrap() - expect).abs() < 1e-6);
        assert!(candidate_bases(&BasisPolicy::Auto, 4, 3).is_err());
        assert_eq!(candidate_bases(&BasisPolicy::Auto, 4, 2).unwrap().len(), 2);
    }

    #[test]
    fn oracle_verdicts() {
        let opts = OracleOptions::default();
        let (v, _) = oracle_check(&[dep(2, 0.6), dep(2, 0.6)], &opts).unwrap();
        assert!(v.is_compatible());
        let (v, _) = oracle_check(&[dep(2, 0.8), dep(2, 0.8)], &opts).unwrap();
        assert!(v.is_incompatible());
    }
}
