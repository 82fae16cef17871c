//! Exact accuracy, infra-marginality, and group-fairness metrics over a
//! finite weighted dataset.
//!
//! All quantities are weighted sums over the empirical feature
//! distribution; nothing here samples. On probabilistic datasets the
//! confusion masses are expectations over `Bernoulli(p_star)`, so rates
//! like the false discovery rate are exact rather than estimated.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataset::{FairLabeling, LabeledDataset};
use crate::error::{Error, Result};

/// Binary decisions aligned with a dataset's instances.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionVector(Vec<u8>);

impl DecisionVector {
    pub fn new(decisions: Vec<u8>) -> Self {
        debug_assert!(decisions.iter().all(|&d| d <= 1));
        DecisionVector(decisions)
    }

    /// Decisions copied from a fair labeling (the zero-infra-marginality
    /// classifier for that labeling).
    pub fn from_labels(fl: &FairLabeling) -> Self {
        DecisionVector(fl.f_star.clone())
    }

    /// The accuracy-maximizing rule `1{p_star >= 1/2}`.
    pub fn bayes(ds: &LabeledDataset) -> Result<Self> {
        let p = ds.p_star()?;
        Ok(DecisionVector(
            p.iter().map(|&pi| u8::from(pi >= 0.5)).collect(),
        ))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    /// Flip every decision.
    pub fn complement(&self) -> Self {
        DecisionVector(self.0.iter().map(|&d| 1 - d).collect())
    }
}

fn check_len(ds: &LabeledDataset, len: usize) -> Result<()> {
    if len != ds.len() {
        return Err(Error::LengthMismatch {
            expected: ds.len(),
            got: len,
        });
    }
    Ok(())
}

/// Expected accuracy under `y ~ Bernoulli(p_star)`:
/// sum of `w * (C*p + (1-C)*(1-p))`. Deterministic, no sampling.
pub fn expected_accuracy(ds: &LabeledDataset, c: &DecisionVector) -> Result<f64> {
    check_len(ds, c.len())?;
    let p = ds.p_star()?;
    Ok(ds
        .instances()
        .iter()
        .zip(c.as_slice())
        .zip(&p)
        .map(|((r, &ci), &pi)| r.weight * if ci == 1 { pi } else { 1.0 - pi })
        .sum())
}

/// Weighted fraction of agreements with the sampled labels.
pub fn empirical_accuracy(ds: &LabeledDataset, c: &DecisionVector) -> Result<f64> {
    check_len(ds, c.len())?;
    let y = ds.y_star()?;
    Ok(ds
        .instances()
        .iter()
        .zip(c.as_slice())
        .zip(&y)
        .map(|((r, &ci), &yi)| if ci == yi { r.weight } else { 0.0 })
        .sum())
}

/// Degree of infra-marginality: weighted expected disagreement between the
/// decisions and the fair labels, `sum of w * |C - f_star|`.
pub fn inframarginality(ds: &LabeledDataset, c: &DecisionVector, fl: &FairLabeling) -> Result<f64> {
    check_len(ds, c.len())?;
    check_len(ds, fl.f_star.len())?;
    Ok(ds
        .instances()
        .iter()
        .zip(c.as_slice())
        .zip(&fl.f_star)
        .map(|((r, &ci), &fi)| if ci == fi { 0.0 } else { r.weight })
        .sum())
}

/// Weighted l1 distance between outcome probabilities and fair labels,
/// `sum of w * |p_star - f_star|`. A dataset property, independent of any
/// classifier.
pub fn l1_delta(ds: &LabeledDataset, fl: &FairLabeling) -> Result<f64> {
    check_len(ds, fl.f_star.len())?;
    let p = ds.p_star()?;
    Ok(ds
        .instances()
        .iter()
        .zip(&p)
        .zip(&fl.f_star)
        .map(|((r, &pi), &fi)| r.weight * (pi - fi as f64).abs())
        .sum())
}

/// Per-group metrics on the conditional (renormalized) weight distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupMetrics {
    pub accuracy: f64,
    pub error: f64,
    pub eta: f64,
    pub delta: Option<f64>,
}

/// Accuracy, error, infra-marginality, and l1 distance per group, each
/// computed on that group's conditional weight distribution. Accuracy is
/// the expected form on probabilistic datasets, the empirical form
/// otherwise.
pub fn groupwise(
    ds: &LabeledDataset,
    fl: &FairLabeling,
    c: &DecisionVector,
) -> Result<BTreeMap<u32, GroupMetrics>> {
    check_len(ds, c.len())?;
    check_len(ds, fl.f_star.len())?;
    let probabilistic = ds.is_probabilistic();
    if !probabilistic {
        ds.y_star()?;
    }
    let mut out = BTreeMap::new();
    for group in 0..ds.group_count() {
        let mut w_sum = 0.0;
        let mut acc = 0.0;
        let mut eta = 0.0;
        let mut delta = 0.0;
        for (i, r) in ds.instances().iter().enumerate() {
            if r.group != group {
                continue;
            }
            w_sum += r.weight;
            let ci = c.as_slice()[i];
            let fi = fl.f_star[i];
            if probabilistic {
                let pi = r.p_star.unwrap();
                acc += r.weight * if ci == 1 { pi } else { 1.0 - pi };
                delta += r.weight * (pi - fi as f64).abs();
            } else if ci == r.y_star.unwrap() {
                acc += r.weight;
            }
            if ci != fi {
                eta += r.weight;
            }
        }
        if w_sum == 0.0 {
            return Err(Error::EmptyGroup { group });
        }
        out.insert(
            group,
            GroupMetrics {
                accuracy: acc / w_sum,
                error: 1.0 - acc / w_sum,
                eta: eta / w_sum,
                delta: probabilistic.then_some(delta / w_sum),
            },
        );
    }
    Ok(out)
}

/// Weighted selection rate per group: share of the group's mass receiving
/// the favorable decision.
pub fn selection_rates(ds: &LabeledDataset, c: &DecisionVector) -> Result<Vec<f64>> {
    check_len(ds, c.len())?;
    let mut selected = vec![0.0; ds.group_count() as usize];
    let mut total = vec![0.0; ds.group_count() as usize];
    for (r, &ci) in ds.instances().iter().zip(c.as_slice()) {
        total[r.group as usize] += r.weight;
        if ci == 1 {
            selected[r.group as usize] += r.weight;
        }
    }
    for (group, t) in total.iter().enumerate() {
        if *t == 0.0 {
            return Err(Error::EmptyGroup {
                group: group as u32,
            });
        }
    }
    Ok(selected.iter().zip(&total).map(|(s, t)| s / t).collect())
}

/// One minus the min ratio of two nonnegative rates, with the degenerate
/// conventions: exactly one zero rate gives 1, two zero rates give 0.
/// The second return is true when a convention fired.
fn ratio_unfairness(a: f64, b: f64) -> (f64, bool) {
    match (a == 0.0, b == 0.0) {
        (true, true) => (0.0, true),
        (true, false) | (false, true) => (1.0, true),
        (false, false) => (1.0 - (a / b).min(b / a), false),
    }
}

fn require_two_groups(ds: &LabeledDataset) -> Result<()> {
    if ds.group_count() != 2 {
        return Err(Error::NotTwoGroups {
            count: ds.group_count(),
        });
    }
    Ok(())
}

/// Disparate-impact unfairness: `1 - min(SR1/SR0, SR0/SR1)` over the two
/// groups' selection rates.
pub fn di_unfairness(ds: &LabeledDataset, c: &DecisionVector) -> Result<f64> {
    require_two_groups(ds)?;
    let sr = selection_rates(ds, c)?;
    Ok(ratio_unfairness(sr[0], sr[1]).0)
}

/// Per-group confusion masses. Expectations over `Bernoulli(p_star)` on
/// probabilistic datasets, indicator sums on sampled ones.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ConfusionMasses {
    pub tp: f64,
    pub fp: f64,
    pub fn_: f64,
    pub tn: f64,
}

/// Confusion masses per group, normalized within each group.
pub fn groupwise_confusion(
    ds: &LabeledDataset,
    c: &DecisionVector,
) -> Result<Vec<ConfusionMasses>> {
    check_len(ds, c.len())?;
    let probabilistic = ds.is_probabilistic();
    if !probabilistic {
        ds.y_star()?;
    }
    let k = ds.group_count() as usize;
    let mut out = vec![ConfusionMasses::default(); k];
    let mut totals = vec![0.0; k];
    for (r, &ci) in ds.instances().iter().zip(c.as_slice()) {
        let g = r.group as usize;
        totals[g] += r.weight;
        // Positive-outcome mass for this instance.
        let pos = if probabilistic {
            r.p_star.unwrap()
        } else {
            r.y_star.unwrap() as f64
        };
        let m = &mut out[g];
        if ci == 1 {
            m.tp += r.weight * pos;
            m.fp += r.weight * (1.0 - pos);
        } else {
            m.fn_ += r.weight * pos;
            m.tn += r.weight * (1.0 - pos);
        }
    }
    for (g, m) in out.iter_mut().enumerate() {
        if totals[g] == 0.0 {
            return Err(Error::EmptyGroup { group: g as u32 });
        }
        m.tp /= totals[g];
        m.fp /= totals[g];
        m.fn_ /= totals[g];
        m.tn /= totals[g];
    }
    Ok(out)
}

/// False discovery rate per group: false-positive mass over
/// predicted-positive mass. `None` when the group predicts nobody positive.
pub fn fdr_per_group(ds: &LabeledDataset, c: &DecisionVector) -> Result<Vec<Option<f64>>> {
    let confusion = groupwise_confusion(ds, c)?;
    Ok(confusion
        .iter()
        .map(|m| {
            let predicted = m.tp + m.fp;
            (predicted > 0.0).then(|| m.fp / predicted)
        })
        .collect())
}

/// FDR-ratio unfairness over two groups, with the conventions: an
/// undefined FDR (no predicted positives) reports 1; one zero FDR reports
/// 1; two zero FDRs report 0.
pub fn fdr_unfairness(ds: &LabeledDataset, c: &DecisionVector) -> Result<f64> {
    require_two_groups(ds)?;
    let fdr = fdr_per_group(ds, c)?;
    Ok(match (fdr[0], fdr[1]) {
        (Some(a), Some(b)) => ratio_unfairness(a, b).0,
        (None, None) => 0.0,
        _ => 1.0,
    })
}

/// Full metrics bundle for one classifier on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub expected_accuracy: Option<f64>,
    pub empirical_accuracy: Option<f64>,
    /// One minus the empirical accuracy when sampled labels exist, else
    /// one minus the expected accuracy.
    pub error: f64,
    pub eta: f64,
    pub delta: Option<f64>,
    pub selection_rate: Vec<f64>,
    pub di_unfairness: Option<f64>,
    pub fdr: Vec<Option<f64>>,
    pub fdr_unfairness: Option<f64>,
    pub confusion: Vec<ConfusionMasses>,
    pub groups: BTreeMap<u32, GroupMetrics>,
    /// True when a zero-rate or undefined-rate convention decided one of
    /// the ratio unfairness values.
    pub degenerate_rates: bool,
}

impl MetricsReport {
    pub fn compute(
        ds: &LabeledDataset,
        c: &DecisionVector,
        fl: &FairLabeling,
    ) -> Result<MetricsReport> {
        let expected = ds
            .is_probabilistic()
            .then(|| expected_accuracy(ds, c))
            .transpose()?;
        let empirical = ds
            .has_sampled_labels()
            .then(|| empirical_accuracy(ds, c))
            .transpose()?;
        let accuracy = empirical.or(expected).ok_or(Error::MissingYstar)?;
        let eta = inframarginality(ds, c, fl)?;
        let delta = ds
            .is_probabilistic()
            .then(|| l1_delta(ds, fl))
            .transpose()?;
        let selection_rate = selection_rates(ds, c)?;
        let confusion = groupwise_confusion(ds, c)?;
        let groups = groupwise(ds, fl, c)?;
        let two_groups = ds.group_count() == 2;
        let mut degenerate = false;
        let di = two_groups.then(|| {
            let (v, d) = ratio_unfairness(selection_rate[0], selection_rate[1]);
            degenerate |= d;
            v
        });
        let fdr: Vec<Option<f64>> = confusion
            .iter()
            .map(|m| {
                let predicted = m.tp + m.fp;
                (predicted > 0.0).then(|| m.fp / predicted)
            })
            .collect();
        let fdr_unf = two_groups.then(|| match (fdr[0], fdr[1]) {
            (Some(a), Some(b)) => {
                let (v, d) = ratio_unfairness(a, b);
                degenerate |= d;
                v
            }
            (None, None) => {
                degenerate = true;
                0.0
            }
            _ => {
                degenerate = true;
                1.0
            }
        });
        Ok(MetricsReport {
            expected_accuracy: expected,
            empirical_accuracy: empirical,
            error: 1.0 - accuracy,
            eta,
            delta,
            selection_rate,
            di_unfairness: di,
            fdr,
            fdr_unfairness: fdr_unf,
            confusion,
            groups,
            degenerate_rates: degenerate,
        })
    }

    /// Flat field list in the documented, stable order. Values are
    /// rounded to 6 decimals; absent values are empty.
    pub fn fields(&self) -> Vec<(String, Option<f64>)> {
        let mut out: Vec<(String, Option<f64>)> = vec![
            ("expected_accuracy".into(), self.expected_accuracy),
            ("empirical_accuracy".into(), self.empirical_accuracy),
            ("error".into(), Some(self.error)),
            ("eta".into(), Some(self.eta)),
            ("delta".into(), self.delta),
            ("di_unfairness".into(), self.di_unfairness),
            ("fdr_unfairness".into(), self.fdr_unfairness),
            (
                "degenerate_rates".into(),
                Some(if self.degenerate_rates { 1.0 } else { 0.0 }),
            ),
        ];
        for (g, m) in &self.groups {
            out.push((format!("group{g}_accuracy"), Some(m.accuracy)));
            out.push((format!("group{g}_error"), Some(m.error)));
            out.push((format!("group{g}_eta"), Some(m.eta)));
            out.push((format!("group{g}_delta"), m.delta));
            out.push((
                format!("group{g}_selection_rate"),
                Some(self.selection_rate[*g as usize]),
            ));
            out.push((format!("group{g}_fdr"), self.fdr[*g as usize]));
            let cm = &self.confusion[*g as usize];
            out.push((format!("group{g}_tp"), Some(cm.tp)));
            out.push((format!("group{g}_fp"), Some(cm.fp)));
            out.push((format!("group{g}_fn"), Some(cm.fn_)));
            out.push((format!("group{g}_tn"), Some(cm.tn)));
        }
        out
    }

    /// Flat JSON document with values rounded to 6 decimals.
    pub fn to_json(&self) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        for (k, v) in self.fields() {
            let val = match v {
                Some(x) => serde_json::json!(round6(x)),
                None => serde_json::Value::Null,
            };
            map.insert(k, val);
        }
        serde_json::Value::Object(map)
    }

    /// One-row CSV (header plus row) in the documented column order.
    pub fn to_csv(&self) -> String {
        let fields = self.fields();
        let header: Vec<&str> = fields.iter().map(|(k, _)| k.as_str()).collect();
        let row: Vec<String> = fields
            .iter()
            .map(|(_, v)| v.map(|x| format!("{}", round6(x))).unwrap_or_default())
            .collect();
        format!("{}\n{}\n", header.join(","), row.join(","))
    }
}

/// Round to 6 decimal places for report serialization.
pub fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}
