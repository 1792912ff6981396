//! Quantum channels in the Choi representation, and POVMs.
//!
//! Choi convention: `choi = Σ_ij |i><j| ⊗ Φ(|i><j|)`, input factor first.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, kron, partial_trace, re, Basis, ComplexMatrix, HermitianMatrix, C64};

/// Tolerance for the CP and TP checks on channels and for POVM validation.
pub const VALIDATION_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Channel {
    d_in: usize,
    d_out: usize,
    choi: HermitianMatrix,
    label: String,
}

impl Channel {
    /// Validates complete positivity and trace preservation.
    pub fn new(
        d_in: usize,
        d_out: usize,
        choi: HermitianMatrix,
        label: impl Into<String>,
    ) -> Result<Self> {
        Self::with_tolerance(d_in, d_out, choi, label, VALIDATION_TOL)
    }

    pub fn with_tolerance(
        d_in: usize,
        d_out: usize,
        choi: HermitianMatrix,
        label: impl Into<String>,
        tol: f64,
    ) -> Result<Self> {
        if d_in == 0 || d_out == 0 {
            return Err(Error::InvalidParameter(
                "channel dimensions must be positive".into(),
            ));
        }
        if choi.dim() != d_in * d_out {
            return Err(Error::DimensionMismatch {
                expected: d_in * d_out,
                actual: choi.dim(),
            });
        }
        let lam = choi.min_eigenvalue()?;
        if lam < -tol {
            return Err(Error::NotPsd {
                what: "Choi matrix".into(),
                min_eigenvalue: lam,
            });
        }
        let reduced = partial_trace(&choi, &[d_in, d_out], &[0])?;
        let deviation = reduced.max_abs_diff(&ComplexMatrix::identity(d_in));
        if deviation > tol {
            return Err(Error::NotTracePreserving { deviation });
        }
        Ok(Self {
            d_in,
            d_out,
            choi,
            label: label.into(),
        })
    }

    pub fn identity(d: usize) -> Self {
        make_depolarizing(d, 1.0)
            .expect("t = 1 is valid")
            .relabel("identity")
    }

    /// `Δ(X) = Tr(X) I/d`
    pub fn completely_depolarizing(d: usize) -> Self {
        make_depolarizing(d, 0.0)
            .expect("t = 0 is valid")
            .relabel("delta")
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn choi(&self) -> &HermitianMatrix {
        &self.choi
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn relabel(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// `s·Φ + (1−s)·Δ` where `Δ` outputs the maximally mixed state.
    pub fn noisy(&self, s: f64) -> Result<Self> {
        check_unit_interval("s", s)?;
        let delta = ComplexMatrix::identity(self.d_in * self.d_out).scale(1.0 / self.d_out as f64);
        let choi =
            HermitianMatrix::symmetrize(&(self.choi.scale(s).as_matrix() + &delta.scale(1.0 - s)));
        Ok(Self {
            d_in: self.d_in,
            d_out: self.d_out,
            choi,
            label: format!("{}@{s}", self.label),
        })
    }

    /// Whether `Φ(I) = I` within `tol`.
    pub fn is_unital(&self, tol: f64) -> bool {
        if self.d_in != self.d_out {
            return false;
        }
        match apply(self, &HermitianMatrix::identity(self.d_in)) {
            Ok(img) => img.max_abs_diff(&ComplexMatrix::identity(self.d_out)) <= tol,
            Err(_) => false,
        }
    }
}

/// The `t` with `ch = t·id + (1−t)·Δ` (entrywise within `tol`), if any.
pub fn depolarizing_parameter(ch: &Channel, tol: f64) -> Option<f64> {
    let d = ch.d_in();
    if d != ch.d_out() || d < 2 {
        return None;
    }
    // off the maximally entangled support the Choi diagonal is (1−t)/d
    let t = 1.0 - d as f64 * ch.choi()[(1, 1)].re;
    if !(-tol..=1.0 + tol).contains(&t) {
        return None;
    }
    let t = t.clamp(0.0, 1.0);
    let reference = make_depolarizing(d, t).ok()?;
    (reference.choi().max_abs_diff(ch.choi()) <= tol).then_some(t)
}

/// The fixed output `σ` when `ch` is the replacement channel `ρ ↦ Tr(ρ) σ`.
pub fn replacement_state(ch: &Channel, tol: f64) -> Option<HermitianMatrix> {
    let (din, dout) = (ch.d_in(), ch.d_out());
    let choi = ch.choi();
    // Φ(|i><j|) sits in block (i, j) and must equal δ_ij σ
    let sigma = ComplexMatrix::from_fn(dout, dout, |a, b| choi[(a, b)]);
    for i in 0..din {
        for j in 0..din {
            for a in 0..dout {
                for b in 0..dout {
                    let want = if i == j { sigma[(a, b)] } else { re(0.0) };
                    if (choi[(i * dout + a, j * dout + b)] - want).norm() > tol {
                        return None;
                    }
                }
            }
        }
    }
    Some(HermitianMatrix::symmetrize(&sigma))
}

fn check_unit_interval(name: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidParameter(format!(
            "{name} = {x} outside [0, 1]"
        )));
    }
    Ok(())
}

/// Partially depolarizing channel `t·id + (1−t)·Δ`.
pub fn make_depolarizing(d: usize, t: f64) -> Result<Channel> {
    if d == 0 {
        return Err(Error::InvalidParameter("d must be positive".into()));
    }
    check_unit_interval("t", t)?;
    let n = d * d;
    let mut choi = ComplexMatrix::identity(n).scale((1.0 - t) / d as f64);
    for i in 0..d {
        for j in 0..d {
            choi[(i * d + i, j * d + j)] += re(t);
        }
    }
    Channel::new(
        d,
        d,
        HermitianMatrix::symmetrize(&choi),
        format!("depolarizing(d={d},t={t})"),
    )
}

/// Schur multiplier channel `X ↦ B ∘ X`.
pub fn make_schur(b: &HermitianMatrix) -> Result<Channel> {
    check_schur_matrix(b)?;
    let d = b.dim();
    let mut choi = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            choi[(i * d + i, j * d + j)] = b[(i, j)];
        }
    }
    Channel::new(d, d, HermitianMatrix::symmetrize(&choi), "schur")
}

/// Checks that `b` is PSD with unit diagonal.
pub fn check_schur_matrix(b: &HermitianMatrix) -> Result<()> {
    check_unit_diagonal(b)?;
    let lam = b.min_eigenvalue()?;
    if lam < -VALIDATION_TOL {
        return Err(Error::NotPsd {
            what: "Schur matrix".into(),
            min_eigenvalue: lam,
        });
    }
    Ok(())
}

pub(crate) fn check_unit_diagonal(b: &HermitianMatrix) -> Result<()> {
    for i in 0..b.dim() {
        if (b[(i, i)] - re(1.0)).norm() > VALIDATION_TOL {
            return Err(Error::NonUnitDiagonal {
                index: i,
                value: format!("{}", b[(i, i)]),
            });
        }
    }
    Ok(())
}

/// `Φ(X) = Tr_in[choi · (Xᵀ ⊗ I)]`
pub fn apply(ch: &Channel, x: &HermitianMatrix) -> Result<HermitianMatrix> {
    apply_matrix(ch, x).map(|m| HermitianMatrix::symmetrize(&m))
}

/// [`apply`] for arbitrary (not necessarily Hermitian) inputs.
pub fn apply_matrix(ch: &Channel, x: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (din, dout) = (ch.d_in, ch.d_out);
    if x.rows() != din || x.cols() != din {
        return Err(Error::DimensionMismatch {
            expected: din,
            actual: x.rows(),
        });
    }
    let mut out = ComplexMatrix::zeros(dout, dout);
    for i in 0..din {
        for j in 0..din {
            let w = x[(i, j)];
            if w == c(0.0, 0.0) {
                continue;
            }
            for a in 0..dout {
                for b in 0..dout {
                    out[(a, b)] += w * ch.choi[(i * dout + a, j * dout + b)];
                }
            }
        }
    }
    Ok(out)
}

/// Heisenberg-picture adjoint: `Φ*(A) = (Tr_out[choi · (I ⊗ A)])ᵀ`.
pub fn adjoint_apply(ch: &Channel, a: &HermitianMatrix) -> Result<HermitianMatrix> {
    let (din, dout) = (ch.d_in, ch.d_out);
    if a.dim() != dout {
        return Err(Error::DimensionMismatch {
            expected: dout,
            actual: a.dim(),
        });
    }
    let mut out = ComplexMatrix::zeros(din, din);
    for i in 0..din {
        for j in 0..din {
            let mut acc = c(0.0, 0.0);
            for p in 0..dout {
                for q in 0..dout {
                    acc += ch.choi[(i * dout + p, j * dout + q)] * a[(q, p)];
                }
            }
            out[(j, i)] = acc;
        }
    }
    Ok(HermitianMatrix::symmetrize(&out))
}

/// The POVM `[Φ*(|e_i><e_i|)]_i`.
pub fn induced_povm(ch: &Channel, e: &Basis) -> Result<Povm> {
    if e.dim() != ch.d_out {
        return Err(Error::DimensionMismatch {
            expected: ch.d_out,
            actual: e.dim(),
        });
    }
    let effects = (0..e.dim())
        .map(|i| adjoint_apply(ch, &e.projector(i)))
        .collect::<Result<Vec<_>>>()?;
    Povm::new(effects)
}

/// Marginal of a joint channel whose output factors as `dims`; keeps output
/// factor `keep` (0-based).
pub fn marginal_channel(joint: &Channel, dims: &[usize], keep: usize) -> Result<Channel> {
    let total: usize = dims.iter().product();
    if total != joint.d_out {
        return Err(Error::DimensionMismatch {
            expected: joint.d_out,
            actual: total,
        });
    }
    if keep >= dims.len() {
        return Err(Error::InvalidParameter(format!(
            "output index {keep} out of range"
        )));
    }
    let mut all = vec![joint.d_in];
    all.extend_from_slice(dims);
    let choi = partial_trace(&joint.choi, &all, &[0, keep + 1])?;
    Channel::new(
        joint.d_in,
        dims[keep],
        choi,
        format!("{}[{keep}]", joint.label),
    )
}

/// Choi matrix of `X ↦ Φ(X) ⊗ I/d_extra` (output factors: Φ's output, then
/// the extra factor).
pub fn trivial_extension(ch: &Channel, d_extra: usize) -> Result<Channel> {
    let extra = ComplexMatrix::identity(d_extra).scale(1.0 / d_extra as f64);
    let choi = HermitianMatrix::symmetrize(&kron(ch.choi(), &extra));
    Channel::new(ch.d_in, ch.d_out * d_extra, choi, format!("{}⊗Δ", ch.label))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Povm {
    d: usize,
    effects: Vec<HermitianMatrix>,
}

impl Povm {
    pub fn new(effects: Vec<HermitianMatrix>) -> Result<Self> {
        let d = effects
            .first()
            .ok_or_else(|| Error::InvalidParameter("POVM needs at least one effect".into()))?
            .dim();
        let mut sum = ComplexMatrix::zeros(d, d);
        for e in &effects {
            if e.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: e.dim(),
                });
            }
            let lam = e.min_eigenvalue()?;
            if lam < -VALIDATION_TOL {
                return Err(Error::NotPsd {
                    what: "POVM effect".into(),
                    min_eigenvalue: lam,
                });
            }
            sum += e;
        }
        let deviation = sum.max_abs_diff(&ComplexMatrix::identity(d));
        if deviation > VALIDATION_TOL {
            return Err(Error::PovmNotNormalized { deviation });
        }
        Ok(Self { d, effects })
    }

    /// Rank-one projective measurement in basis `e`.
    pub fn projective(e: &Basis) -> Self {
        Self {
            d: e.dim(),
            effects: (0..e.dim()).map(|i| e.projector(i)).collect(),
        }
    }

    /// The one-outcome POVM `{I}`.
    pub fn trivial(d: usize) -> Self {
        Self {
            d,
            effects: vec![HermitianMatrix::identity(d)],
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn effects(&self) -> &[HermitianMatrix] {
        &self.effects
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }
}

/// JSON description of a channel.
///
/// ```json
/// {"kind":"depolarizing","d":2,"t":0.8}
/// {"kind":"schur","B":[[[1,0],[0.5,0]],[[0.5,0],[1,0]]]}
/// {"kind":"choi","d_in":2,"d_out":2,"entries":[[0.5,0], ...]}
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ChannelSpec {
    Depolarizing {
        d: usize,
        t: f64,
    },
    Schur {
        #[serde(rename = "B")]
        b: Vec<Vec<C64>>,
    },
    Choi {
        d_in: usize,
        d_out: usize,
        entries: Vec<C64>,
    },
}

impl ChannelSpec {
    pub fn build(&self) -> Result<Channel> {
        match self {
            ChannelSpec::Depolarizing { d, t } => make_depolarizing(*d, *t),
            ChannelSpec::Schur { b } => {
                let m = ComplexMatrix::from_rows(b).map_err(|e| Error::Spec(format!("B: {e}")))?;
                let h = HermitianMatrix::new(m)?;
                make_schur(&h).map(|ch| {
                    ch.relabel(format!(
                        "schur(beta={:.6})",
                        crate::fisher::beta(&h).unwrap_or(f64::NAN)
                    ))
                })
            }
            ChannelSpec::Choi {
                d_in,
                d_out,
                entries,
            } => {
                let n = d_in * d_out;
                let m = ComplexMatrix::from_row_major(n, n, entries.clone())
                    .map_err(|e| Error::Spec(format!("entries: {e}")))?;
                Channel::new(*d_in, *d_out, HermitianMatrix::new(m)?, "choi")
            }
        }
    }

    /// The Schur matrix, when this spec describes a Schur channel.
    pub fn schur_matrix(&self) -> Option<Result<HermitianMatrix>> {
        match self {
            ChannelSpec::Schur { b } => {
                Some(ComplexMatrix::from_rows(b).and_then(HermitianMatrix::new))
            }
            _ => None,
        }
    }

    /// `Some(t)` for depolarizing specs.
    pub fn depolarizing_parameter(&self) -> Option<(usize, f64)> {
        match self {
            ChannelSpec::Depolarizing { d, t } => Some((*d, *t)),
            _ => None,
        }
    }

    pub fn from_channel(ch: &Channel) -> Self {
        ChannelSpec::Choi {
            d_in: ch.d_in,
            d_out: ch.d_out,
            entries: ch.choi.data().to_vec(),
        }
    }
}

/// Traces `Tr Φ*(|e_i><e_i|)`; all equal to one when `Φ` is unital.
pub fn induced_traces(ch: &Channel, e: &Basis) -> Result<Vec<f64>> {
    Ok(induced_povm(ch, e)?
        .effects
        .iter()
        .map(|f| f.real_trace())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fisher::omega;
    use crate::linalg::frob_inner;
    use crate::sample;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn half_b() -> HermitianMatrix {
        HermitianMatrix::new(ComplexMatrix::from_real_rows(&[&[1.0, 0.5], &[0.5, 1.0]]).unwrap())
            .unwrap()
    }

    #[test]
    fn replacement_channels() {
        let delta = Channel::completely_depolarizing(3);
        let sigma = replacement_state(&delta, 1e-12).unwrap();
        assert!(
            sigma
                .as_matrix()
                .max_abs_diff(&ComplexMatrix::identity(3).scale(1.0 / 3.0))
                < 1e-15
        );
        assert!(replacement_state(&make_depolarizing(3, 1e-3).unwrap(), 1e-12).is_none());
        assert!(replacement_state(&Channel::identity(2), 1e-12).is_none());
    }

    #[test]
    fn depolarizing_endpoints() {
        for d in 2..5 {
            let id = make_depolarizing(d, 1.0).unwrap();
            assert!(id.choi().max_abs_diff(&omega(d).scale(d as f64)) < 1e-14);
            let delta = make_depolarizing(d, 0.0).unwrap();
            let expect = ComplexMatrix::identity(d * d).scale(1.0 / d as f64);
            assert!(delta.choi().max_abs_diff(&expect) < 1e-14);
        }
        assert!(make_depolarizing(2, 0.5).is_ok());
        assert!(make_depolarizing(2, -0.1).is_err());
        assert!(make_depolarizing(2, 1.1).is_err());
    }

    #[test]
    fn schur_of_all_ones_is_identity_and_of_identity_is_dephasing() {
        let j = HermitianMatrix::new(ComplexMatrix::from_fn(3, 3, |_, _| re(1.0))).unwrap();
        let ch = make_schur(&j).unwrap();
        assert!(ch.choi().max_abs_diff(Channel::identity(3).choi()) < 1e-14);

        let deph = make_schur(&HermitianMatrix::identity(3)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = sample::random_hermitian(&mut rng, 3);
        let y = apply(&deph, &x).unwrap();
        for i in 0..3 {
            for k in 0..3 {
                let expect = if i == k { x[(i, k)] } else { re(0.0) };
                assert!((y[(i, k)] - expect).norm() < 1e-14);
            }
        }
        assert!(make_schur(&half_b()).is_ok());
    }

    #[test]
    fn schur_validation_errors_are_distinct() {
        let bad_diag = HermitianMatrix::real_diag(&[1.0, 2.0]);
        assert!(matches!(
            make_schur(&bad_diag),
            Err(Error::NonUnitDiagonal { index: 1, .. })
        ));
        let not_psd = HermitianMatrix::new(
            ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 1.0]]).unwrap(),
        )
        .unwrap();
        assert!(matches!(make_schur(&not_psd), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn apply_identity_and_delta() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let x = sample::random_hermitian(&mut rng, 3);
        let y = apply(&Channel::identity(3), &x).unwrap();
        assert!(y.max_abs_diff(&x) < 1e-14);
        let z = apply(&Channel::completely_depolarizing(3), &x).unwrap();
        let expect = ComplexMatrix::identity(3).scale_c(x.trace() / 3.0);
        assert!(z.max_abs_diff(&expect) < 1e-14);
        assert!(apply(&Channel::identity(2), &x).is_err());
    }

    #[test]
    fn apply_schur_is_hadamard_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..10 {
            let b = sample::random_schur_matrix(&mut rng, 3, 2);
            let ch = make_schur(&b).unwrap();
            let x = sample::random_hermitian(&mut rng, 3);
            let y = apply(&ch, &x).unwrap();
            // direct oracle
            let expect = ComplexMatrix::from_fn(3, 3, |i, j| b[(i, j)] * x[(i, j)]);
            assert!(y.max_abs_diff(&expect) < 1e-13);
            assert!((y.trace() - x.trace()).norm() < 1e-9);
        }
    }

    #[test]
    fn adjoint_duality_and_unitality() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..100 {
            let ch = sample::random_channel(&mut rng, 3);
            let rho = sample::random_hermitian(&mut rng, 3);
            let a = sample::random_hermitian(&mut rng, 3);
            let lhs = frob_inner(&a, &apply(&ch, &rho).unwrap()).unwrap();
            let rhs = frob_inner(&adjoint_apply(&ch, &a).unwrap(), &rho).unwrap();
            assert!((lhs - rhs).norm() < 1e-9);
        }
        let ch = sample::random_channel(&mut rng, 3);
        let one = adjoint_apply(&ch, &HermitianMatrix::identity(3)).unwrap();
        assert!(one.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-9);
    }

    #[test]
    fn adjoint_of_delta_on_projector() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let e = sample::random_basis(&mut rng, 3);
        let r = adjoint_apply(&Channel::completely_depolarizing(3), &e.projector(0)).unwrap();
        assert!(r.max_abs_diff(&ComplexMatrix::identity(3).scale(1.0 / 3.0)) < 1e-14);
    }

    #[test]
    fn induced_povms_of_named_channels() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let e = sample::random_basis(&mut rng, 3);
        let p = induced_povm(&Channel::identity(3), &e).unwrap();
        for i in 0..3 {
            assert!(p.effects()[i].max_abs_diff(&e.projector(i)) < 1e-14);
        }
        let p = induced_povm(&Channel::completely_depolarizing(3), &e).unwrap();
        assert_eq!(p.len(), 3);
        for f in p.effects() {
            assert!(f.max_abs_diff(&ComplexMatrix::identity(3).scale(1.0 / 3.0)) < 1e-14);
        }
        for _ in 0..5 {
            let b = sample::random_schur_matrix(&mut rng, 3, 3);
            let p = induced_povm(&make_schur(&b).unwrap(), &Basis::canonical(3)).unwrap();
            for i in 0..3 {
                assert!(p.effects()[i].max_abs_diff(&Basis::canonical(3).projector(i)) < 1e-12);
            }
        }
    }

    #[test]
    fn induced_povm_sums_to_identity_and_unital_traces_are_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let ch = sample::random_channel(&mut rng, 3);
            let e = sample::random_basis(&mut rng, 3);
            assert!(induced_povm(&ch, &e).is_ok());
            let u = sample::random_unital_channel(&mut rng, 3, 3);
            assert!(u.is_unital(1e-9));
            for t in induced_traces(&u, &e).unwrap() {
                assert!((t - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn marginals_of_trivial_extension() {
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        let phi = sample::random_channel(&mut rng, 2);
        let ext = trivial_extension(&phi, 2).unwrap();
        let m1 = marginal_channel(&ext, &[2, 2], 0).unwrap();
        assert!(m1.choi().max_abs_diff(phi.choi()) < 1e-12);
        let m2 = marginal_channel(&ext, &[2, 2], 1).unwrap();
        assert!(
            m2.choi()
                .max_abs_diff(Channel::completely_depolarizing(2).choi())
                < 1e-12
        );
        assert!(marginal_channel(&ext, &[3, 2], 0).is_err());
    }

    #[test]
    fn validator_rejects_perturbed_choi() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..10 {
            let ch = sample::random_channel(&mut rng, 2);
            let e = crate::linalg::eigh(ch.choi()).unwrap();
            let lam = e.values[0];
            let v = &e.vectors.vectors()[0];
            // pushes the smallest eigenvalue to -lam - 1e-3
            let mutant = ch
                .choi()
                .sub(&HermitianMatrix::projector(v).scale(2.0 * lam + 1e-3));
            assert!(Channel::new(2, 2, mutant, "mutant").is_err());
        }
    }

    #[test]
    fn channel_spec_json() {
        let s: ChannelSpec =
            serde_json::from_str(r#"{"kind":"depolarizing","d":2,"t":0.8}"#).unwrap();
        assert_eq!(s, ChannelSpec::Depolarizing { d: 2, t: 0.8 });
        let s: ChannelSpec =
            serde_json::from_str(r#"{"kind":"schur","B":[[[1,0],[0.5,0]],[[0.5,0],[1,0]]]}"#)
                .unwrap();
        let ch = s.build().unwrap();
        assert!(
            ch.choi()
                .max_abs_diff(make_schur(&half_b()).unwrap().choi())
                < 1e-15
        );
        let id = Channel::identity(2);
        let json = serde_json::to_string(&ChannelSpec::from_channel(&id)).unwrap();
        assert!(json.starts_with(r#"{"kind":"choi","d_in":2,"d_out":2,"entries":[[1.0,0.0]"#));
        let back: ChannelSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back.build().unwrap().choi(), id.choi());
        assert!(serde_json::from_str::<ChannelSpec>(r#"{"kind":"depolarizing","d":2}"#).is_err());
    }

    #[test]
    fn povm_validation() {
        assert!(Povm::new(vec![HermitianMatrix::identity(2).scale(0.5)]).is_err());
        assert!(Povm::new(vec![
            HermitianMatrix::real_diag(&[1.5, 0.0]),
            HermitianMatrix::real_diag(&[-0.5, 1.0])
        ])
        .is_err());
        assert!(Povm::new(vec![HermitianMatrix::identity(2).scale(0.5); 2]).is_ok());
    }
}
