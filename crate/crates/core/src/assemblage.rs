//! `(N, K)` classification of channel assemblages.
//!
//! Every `K`-subset is checked independently. Subsets made only of
//! depolarizing channels in a prime dimension use the closed form `Σ t_i² > 1`
//! (the SDP value over mutually unbiased bases); everything else runs the SDP
//! criterion under the chosen basis policy. With the oracle enabled, subsets
//! the criterion leaves open are sent to the exact joint-channel solver.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::channels::Channel;
use crate::criteria::{
    auto_criterion, oracle_verdict, BasisPolicy, Verdict, VerdictKind, CRITERION_MARGIN,
};
use crate::error::{Error, Result};
use crate::sdp::{solve_joint_channel_with, OracleOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum AssemblageLabel {
    #[serde(rename = "NK_Compatible")]
    Compatible,
    #[serde(rename = "NK_Incompatible")]
    Incompatible,
    #[serde(rename = "NK_StrongIncompatible")]
    StrongIncompatible,
    /// `(N, K+1)`-genuinely incompatible.
    #[serde(rename = "NK1_GenuinelyIncompatible")]
    GenuinelyIncompatible,
    /// `(N, K+1)`-genuinely strong incompatible.
    #[serde(rename = "NK1_GenuinelyStrongIncompatible")]
    GenuinelyStrongIncompatible,
}

impl AssemblageLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Compatible => "NK_Compatible",
            Self::Incompatible => "NK_Incompatible",
            Self::StrongIncompatible => "NK_StrongIncompatible",
            Self::GenuinelyIncompatible => "NK1_GenuinelyIncompatible",
            Self::GenuinelyStrongIncompatible => "NK1_GenuinelyStrongIncompatible",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SubsetVerdict {
    /// Zero-based channel indices, increasing.
    pub subset: Vec<usize>,
    pub verdict: Verdict,
    /// Present when the oracle was consulted for this subset.
    pub oracle: Option<Verdict>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelSummary {
    pub k: usize,
    pub subsets: Vec<SubsetVerdict>,
    pub incompatible: usize,
    pub compatible: usize,
    pub undetermined: usize,
}

impl LevelSummary {
    fn new(k: usize, subsets: Vec<SubsetVerdict>) -> Self {
        let count = |kind| subsets.iter().filter(|s| s.verdict.kind == kind).count();
        Self {
            k,
            incompatible: count(VerdictKind::IncompatibleCertified),
            compatible: count(VerdictKind::CompatibleCertified),
            undetermined: count(VerdictKind::Undetermined),
            subsets,
        }
    }

    fn all_incompatible(&self) -> bool {
        self.incompatible == self.subsets.len()
    }

    fn all_compatible(&self) -> bool {
        self.compatible == self.subsets.len()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AssemblageReport {
    pub n: usize,
    pub k: usize,
    pub labels: BTreeSet<AssemblageLabel>,
    /// The requested level, subsets in lexicographic order.
    pub level: LevelSummary,
    /// The `K+1` level, evaluated only with the oracle (genuine labels).
    pub next_level: Option<LevelSummary>,
    /// Why labels could not be decided, if any.
    pub unresolved: Vec<String>,
}

impl AssemblageReport {
    pub fn has(&self, label: AssemblageLabel) -> bool {
        self.labels.contains(&label)
    }
}

#[derive(Clone, Debug)]
pub struct ClassifyOptions {
    pub policy: BasisPolicy,
    pub use_oracle: bool,
    pub oracle: OracleOptions,
    pub margin: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            policy: BasisPolicy::Auto,
            use_oracle: false,
            oracle: OracleOptions::default(),
            margin: CRITERION_MARGIN,
        }
    }
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// `Σ_{i∈S} t_i²` for every `k`-subset `S` (zero-based, lexicographic).
pub fn subset_sums_depolarizing(ts: &[f64], k: usize) -> BTreeMap<Vec<usize>, f64> {
    k_subsets(ts.len(), k)
        .into_iter()
        .map(|s| {
            let sum = s.iter().map(|&i| ts[i] * ts[i]).sum();
            (s, sum)
        })
        .collect()
}

fn check_subset(chs: &[Channel], opts: &ClassifyOptions) -> Result<(Verdict, Option<Verdict>)> {
    let criterion = auto_criterion(chs, &opts.policy, opts.margin)?;
    if criterion.is_incompatible() || !opts.use_oracle {
        return Ok((criterion, None));
    }
    match solve_joint_channel_with(chs, &opts.oracle) {
        Ok(res) => {
            let ov = oracle_verdict(&res);
            let verdict = if ov.kind == VerdictKind::Undetermined {
                criterion
            } else {
                ov.clone()
            };
            Ok((verdict, Some(ov)))
        }
        Err(Error::BudgetExceeded { .. }) => {
            let mut v = criterion;
            v.certificate.push_str("; oracle skipped (over budget)");
            Ok((v, None))
        }
        Err(e) => Err(e),
    }
}

fn evaluate_level(channels: &[Channel], k: usize, opts: &ClassifyOptions) -> Result<LevelSummary> {
    let subsets = k_subsets(channels.len(), k);
    let verdicts = subsets
        .par_iter()
        .map(|s| {
            let chs: Vec<Channel> = s.iter().map(|&i| channels[i].clone()).collect();
            check_subset(&chs, opts).map(|(verdict, oracle)| SubsetVerdict {
                subset: s.clone(),
                verdict,
                oracle,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LevelSummary::new(k, verdicts))
}

/// Classifies `channels` at level `k`.
pub fn classify(
    channels: &[Channel],
    k: usize,
    opts: &ClassifyOptions,
) -> Result<AssemblageReport> {
    let n = channels.len();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= K <= N (got K = {k}, N = {n})"
        )));
    }
    let d = channels[0].d_in();
    if let Some(bad) = channels.iter().find(|c| c.d_in() != d || c.d_out() != d) {
        return Err(Error::InvalidParameter(format!(
            "assemblage needs channels on a common C^{d} -> C^{d} (got {} -> {} for '{}')",
            bad.d_in(),
            bad.d_out(),
            bad.label()
        )));
    }

    let level = if k == 1 {
        // a single channel is its own joint channel
        let subsets = (0..n)
            .map(|i| SubsetVerdict {
                subset: vec![i],
                verdict: Verdict {
                    kind: VerdictKind::CompatibleCertified,
                    value: None,
                    margin: 0.0,
                    certificate: "single channel".into(),
                },
                oracle: None,
            })
            .collect();
        LevelSummary::new(1, subsets)
    } else {
        evaluate_level(channels, k, opts)?
    };

    let mut labels = BTreeSet::new();
    let mut unresolved = Vec::new();
    if level.incompatible > 0 {
        labels.insert(AssemblageLabel::Incompatible);
    }
    if level.all_incompatible() {
        labels.insert(AssemblageLabel::StrongIncompatible);
    }
    if level.all_compatible() {
        labels.insert(AssemblageLabel::Compatible);
    }
    if level.undetermined > 0 {
        unresolved.push(format!(
            "{} of {} {k}-subsets undetermined",
            level.undetermined,
            level.subsets.len()
        ));
    }

    let mut next_level = None;
    if opts.use_oracle && k < n {
        if level.all_compatible() {
            let next = evaluate_level(channels, k + 1, opts)?;
            if next.incompatible > 0 {
                labels.insert(AssemblageLabel::GenuinelyIncompatible);
            }
            if next.all_incompatible() {
                labels.insert(AssemblageLabel::GenuinelyStrongIncompatible);
            }
            if next.undetermined > 0 {
                unresolved.push(format!(
                    "{} of {} {}-subsets undetermined; genuine labels may be incomplete",
                    next.undetermined,
                    next.subsets.len(),
                    k + 1
                ));
            }
            next_level = Some(next);
        } else {
            unresolved.push(format!(
                "genuine labels need every {k}-subset certified compatible"
            ));
        }
    }

    Ok(AssemblageReport {
        n,
        k,
        labels,
        level,
        next_level,
        unresolved,
    })
}
