//! Fisher-information objects at the maximally mixed point: `ω`, the
//! `Z`-matrices of bases, `G`-matrices of channels and POVMs, the Schur
//! parameter `β`, and mutually unbiased bases in prime dimension.

use std::f64::consts::PI;

use serde::Serialize;

use crate::channels::{check_unit_diagonal, induced_povm, Channel, Povm};
use crate::error::{Error, Result};
use crate::linalg::{
    self, c, frob_inner, kron_vec, re, Basis, ComplexMatrix, HermitianMatrix, C64,
};

/// Effects with trace at or below this are dropped from `G`.
pub const ZERO_EFFECT_TOL: f64 = 1e-12;

/// `ω = (1/d) Σ_ij |ii><jj|`
pub fn omega(d: usize) -> HermitianMatrix {
    let mut m = ComplexMatrix::zeros(d * d, d * d);
    let w = re(1.0 / d as f64);
    for i in 0..d {
        for j in 0..d {
            m[(i * d + i, j * d + j)] = w;
        }
    }
    HermitianMatrix::new(m).expect("omega is Hermitian")
}

/// `Z_e = Σ_i |e_i ⊗ ē_i><e_i ⊗ ē_i|`
pub fn z_matrix(e: &Basis) -> HermitianMatrix {
    let d = e.dim();
    let mut m = ComplexMatrix::zeros(d * d, d * d);
    for v in e.vectors() {
        let vb: Vec<C64> = v.iter().map(|z| z.conj()).collect();
        let w = kron_vec(v, &vb);
        m += &ComplexMatrix::outer(&w, &w);
    }
    HermitianMatrix::symmetrize(&m)
}

/// The `d² x d²` matrix `Σ_s |A_s><A_s| / Tr A_s` of a POVM (or of the POVM
/// a channel induces through a basis).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GMatrix {
    d: usize,
    m: HermitianMatrix,
    source_label: String,
}

impl GMatrix {
    /// Wraps an arbitrary `d² x d²` Hermitian matrix, e.g. an analytic `G`.
    pub fn from_matrix(
        d: usize,
        m: HermitianMatrix,
        source_label: impl Into<String>,
    ) -> Result<Self> {
        if m.dim() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                actual: m.dim(),
            });
        }
        Ok(Self {
            d,
            m,
            source_label: source_label.into(),
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> HermitianMatrix {
        self.m
    }

    pub fn source_label(&self) -> &str {
        &self.source_label
    }

    pub fn trace(&self) -> f64 {
        self.m.real_trace()
    }
}

fn g_from_effects(d: usize, effects: &[HermitianMatrix], label: &str) -> GMatrix {
    let mut m = ComplexMatrix::zeros(d * d, d * d);
    let mut skipped = 0;
    for f in effects {
        let tr = f.real_trace();
        if tr <= ZERO_EFFECT_TOL {
            skipped += 1;
            continue;
        }
        let v = linalg::vec(f).expect("effects are square");
        m += &ComplexMatrix::outer(&v, &v).scale(1.0 / tr);
    }
    let source_label = if skipped > 0 {
        format!("{label} (skipped {skipped} zero effects)")
    } else {
        label.to_string()
    };
    GMatrix {
        d,
        m: HermitianMatrix::symmetrize(&m),
        source_label,
    }
}

/// `G_{Φ,e} = Σ_i |F_i><F_i| / Tr F_i` with `F_i = Φ*(|e_i><e_i|)`.
pub fn g_matrix(ch: &Channel, e: &Basis) -> Result<GMatrix> {
    if ch.d_in() != ch.d_out() {
        return Err(Error::InvalidParameter(format!(
            "G-matrix needs d_in = d_out (got {} -> {})",
            ch.d_in(),
            ch.d_out()
        )));
    }
    let povm = induced_povm(ch, e)?;
    Ok(g_from_effects(ch.d_in(), povm.effects(), ch.label()))
}

pub fn g_matrix_povm(p: &Povm) -> GMatrix {
    g_from_effects(p.d(), p.effects(), "povm")
}

/// `β(B) = (1/(d(d−1))) Σ_{i≠j} |B_ij|²`, normalized so that `β(I) = 0` and
/// `β(bb*) = 1` for `b` on the torus.
pub fn beta(b: &HermitianMatrix) -> Result<f64> {
    check_unit_diagonal(b)?;
    let d = b.dim();
    if d < 2 {
        return Err(Error::InvalidParameter("beta needs d >= 2".into()));
    }
    let mut acc = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                acc += b[(i, j)].norm_sqr();
            }
        }
    }
    Ok(acc / (d * (d - 1)) as f64)
}

/// `f_j(s) = exp(2πi·js/d)/√d`
pub fn fourier_basis(d: usize) -> Basis {
    let norm = 1.0 / (d as f64).sqrt();
    Basis::new_unchecked(
        (0..d)
            .map(|j| {
                (0..d)
                    .map(|s| C64::from_polar(norm, 2.0 * PI * ((j * s) % d) as f64 / d as f64))
                    .collect()
            })
            .collect(),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MubFamily {
    d: usize,
    bases: Vec<Basis>,
}

impl MubFamily {
    /// Checks pairwise unbiasedness within `1e-9`.
    pub fn new(bases: Vec<Basis>) -> Result<Self> {
        let d = bases
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty MUB family".into()))?
            .dim();
        for (a, e) in bases.iter().enumerate() {
            if e.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: e.dim(),
                });
            }
            for f in &bases[a + 1..] {
                let dev = unbiasedness_defect(e, f);
                if dev > 1e-9 {
                    return Err(Error::InvalidParameter(format!(
                        "bases are not mutually unbiased (deviation {dev:.3e})"
                    )));
                }
            }
        }
        Ok(Self { d, bases })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn bases(&self) -> &[Basis] {
        &self.bases
    }

    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }
}

/// `max_ij | |<e_i, f_j>| − 1/√d |`
pub fn unbiasedness_defect(e: &Basis, f: &Basis) -> f64 {
    let target = 1.0 / (e.dim() as f64).sqrt();
    let mut dev: f64 = 0.0;
    for u in e.vectors() {
        for v in f.vectors() {
            dev = dev.max((linalg::inner(u, v).norm() - target).abs());
        }
    }
    dev
}

pub fn is_prime(n: usize) -> bool {
    n >= 2
        && (2..)
            .take_while(|k| k * k <= n)
            .all(|k| !n.is_multiple_of(k))
}

/// A complete family of `d + 1` MUBs for prime `d`. The canonical basis comes
/// first.
pub fn mub_family(d: usize) -> Result<MubFamily> {
    if !is_prime(d) {
        return Err(Error::UnsupportedMubDimension(d));
    }
    let mut bases = vec![Basis::canonical(d)];
    if d == 2 {
        let h = 1.0 / 2f64.sqrt();
        bases.push(Basis::new_unchecked(vec![
            vec![re(h), re(h)],
            vec![re(h), re(-h)],
        ]));
        bases.push(Basis::new_unchecked(vec![
            vec![re(h), c(0.0, h)],
            vec![re(h), c(0.0, -h)],
        ]));
    } else {
        let norm = 1.0 / (d as f64).sqrt();
        for k in 0..d {
            let basis = (0..d)
                .map(|j| {
                    (0..d)
                        .map(|s| {
                            let phase = (k * s * s + j * s) % d;
                            C64::from_polar(norm, 2.0 * PI * phase as f64 / d as f64)
                        })
                        .collect()
                })
                .collect();
            bases.push(Basis::new_unchecked(basis));
        }
    }
    MubFamily::new(bases)
}

/// `|<g1 − ω, g2 − ω>| <= tol`
pub fn orthogonal_modulo_omega(g1: &GMatrix, g2: &GMatrix, tol: f64) -> Result<bool> {
    if g1.d != g2.d {
        return Err(Error::DimensionMismatch {
            expected: g1.d,
            actual: g2.d,
        });
    }
    let w = omega(g1.d);
    let a = g1.m.sub(&w);
    let b = g2.m.sub(&w);
    Ok(frob_inner(&a, &b)?.norm() <= tol)
}

/// `t²·Z_e + (1−t²)·ω`, the `G`-matrix of the depolarizing channel `Φ_t`.
pub fn depolarizing_g(e: &Basis, t: f64) -> GMatrix {
    let d = e.dim();
    let m = z_matrix(e).combine(t * t, &omega(d), 1.0 - t * t);
    GMatrix {
        d,
        m,
        source_label: format!("depolarizing(t={t})"),
    }
}
