//! Executable verifiers for the accuracy/infra-marginality bounds.
//!
//! The central bound says the degree of infra-marginality of any
//! classifier lies within the classification error plus or minus the
//! dataset's l1 distance delta. With expectation-form accuracy all three
//! quantities are exact weighted sums, so the check carries a 1e-12
//! tolerance rather than a statistical one.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dataset::{FairLabeling, LabeledDataset};
use crate::error::{Error, Result};
use crate::metrics::{self, DecisionVector};

const TOL: f64 = 1e-12;

/// One evaluation of the two-sided bound `(1-alpha)-delta <= eta <=
/// (1-alpha)+delta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub alpha: f64,
    pub eta: f64,
    pub delta: f64,
    pub lower: f64,
    pub upper: f64,
    pub holds: bool,
    /// Distance to the nearer bound edge; nonnegative when the bound holds.
    pub slack: f64,
}

impl BoundReport {
    fn from_parts(alpha: f64, eta: f64, delta: f64) -> BoundReport {
        let lower = (1.0 - alpha) - delta;
        let upper = (1.0 - alpha) + delta;
        let slack = (eta - lower).min(upper - eta);
        BoundReport {
            alpha,
            eta,
            delta,
            lower,
            upper,
            holds: slack >= -TOL,
            slack,
        }
    }
}

/// Check the bound globally with expectation-form accuracy.
pub fn check_bound(
    ds: &LabeledDataset,
    fl: &FairLabeling,
    c: &DecisionVector,
) -> Result<BoundReport> {
    let alpha = metrics::expected_accuracy(ds, c)?;
    let eta = metrics::inframarginality(ds, c, fl)?;
    let delta = metrics::l1_delta(ds, fl)?;
    Ok(BoundReport::from_parts(alpha, eta, delta))
}

/// Check the bound per group on conditional weight distributions.
pub fn check_group_bounds(
    ds: &LabeledDataset,
    fl: &FairLabeling,
    c: &DecisionVector,
) -> Result<BTreeMap<u32, BoundReport>> {
    if !ds.is_probabilistic() {
        return Err(Error::MissingPstar);
    }
    let per_group = metrics::groupwise(ds, fl, c)?;
    Ok(per_group
        .into_iter()
        .map(|(g, m)| {
            (
                g,
                BoundReport::from_parts(m.accuracy, m.eta, m.delta.unwrap()),
            )
        })
        .collect())
}

/// Window-count smoothness report for the outcome probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzReport {
    /// Maximum number of p_star values inside any closed window of width
    /// 1/n.
    pub lambda: usize,
    /// False when the dataset weights are not uniform; the count-based
    /// sweep is still reported.
    pub uniform_weights: bool,
}

fn weights_uniform(ds: &LabeledDataset) -> bool {
    let n = ds.len() as f64;
    ds.instances()
        .iter()
        .all(|r| (r.weight - 1.0 / n).abs() <= 1e-9 / n)
}

/// Exact sliding-window sweep over sorted p_star values with closed
/// windows of width 1/n (both endpoints counted).
pub fn lipschitz_constant(ds: &LabeledDataset) -> Result<LipschitzReport> {
    let mut p = ds.p_star()?;
    p.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = p.len();
    let width = 1.0 / n as f64;
    let mut lambda = 0;
    let mut hi = 0;
    for lo in 0..n {
        if hi < lo {
            hi = lo;
        }
        while hi + 1 < n && p[hi + 1] <= p[lo] + width + 1e-12 {
            hi += 1;
        }
        lambda = lambda.max(hi - lo + 1);
    }
    Ok(LipschitzReport {
        lambda,
        uniform_weights: weights_uniform(ds),
    })
}

/// Result of the lambda/4 bound check at threshold 0.5.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowBoundReport {
    pub lambda: usize,
    pub delta: f64,
    /// lambda/4 expressed on the weight scale.
    pub bound: f64,
    /// Explicit lambda/n slack standing in for the endpoint error of the
    /// interval-sum argument.
    pub slack_term: f64,
    pub holds: bool,
    pub uniform_weights: bool,
}

/// Check `delta <= lambda/4 + lambda/n` at tau = 0.5. The lambda/n term
/// realizes the endpoint error of the interval-sum argument, keeping the
/// check decidable for every n.
pub fn check_window_bound(ds: &LabeledDataset) -> Result<WindowBoundReport> {
    let lip = lipschitz_constant(ds)?;
    let fl = ds.fair_labels(0.5)?;
    let delta = metrics::l1_delta(ds, &fl)?;
    let n = ds.len() as f64;
    let bound = lip.lambda as f64 / 4.0;
    let slack_term = lip.lambda as f64 / n;
    Ok(WindowBoundReport {
        lambda: lip.lambda,
        delta,
        bound,
        slack_term,
        holds: delta <= bound + slack_term + TOL,
        uniform_weights: lip.uniform_weights,
    })
}

/// Parameters of the spread condition: at least `mass_outside` of the
/// weight lies at distance `half_width` or more from 0.5.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpreadParams {
    pub half_width: f64,
    pub mass_outside: f64,
}

/// Result of the 1/2 - half_width*q bound check at threshold 0.5.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpreadBoundReport {
    pub delta: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Verify the spread condition, then check
/// `delta <= 0.5 - half_width * mass_outside` at tau = 0.5.
///
/// The spread window is open: mass exactly at distance `half_width` from
/// 0.5 counts as outside, which admits the tight two-point construction.
pub fn check_spread_bound(ds: &LabeledDataset, spread: SpreadParams) -> Result<SpreadBoundReport> {
    if !(0.0..=0.5).contains(&spread.half_width) {
        return Err(Error::ParamOutOfRange {
            name: "half_width",
            value: spread.half_width,
            lo: 0.0,
            hi: 0.5,
        });
    }
    if !(spread.mass_outside > 0.0 && spread.mass_outside < 1.0) {
        return Err(Error::ParamOutOfRange {
            name: "mass_outside",
            value: spread.mass_outside,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let p = ds.p_star()?;
    let inside: f64 = ds
        .instances()
        .iter()
        .zip(&p)
        .filter(|(_, &pi)| (pi - 0.5).abs() < spread.half_width)
        .map(|(r, _)| r.weight)
        .sum();
    let allowed = 1.0 - spread.mass_outside;
    if inside > allowed + TOL {
        return Err(Error::SpreadViolated {
            mass: inside,
            allowed,
        });
    }
    let fl = ds.fair_labels(0.5)?;
    let delta = metrics::l1_delta(ds, &fl)?;
    let bound = 0.5 - spread.half_width * spread.mass_outside;
    Ok(SpreadBoundReport {
        delta,
        bound,
        holds: delta <= bound + TOL,
    })
}

/// Append serializable verifier records as JSON lines, one per record.
pub fn write_jsonl<T: Serialize, W: Write>(writer: &mut W, records: &[T]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut *writer, r)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}
