//! Exact accuracy maximization under an infra-marginality budget.
//!
//! The primal problem — maximize expected accuracy over binary decision
//! vectors subject to `eta(C) <= eta` — relaxes to a linear program whose
//! dual objective
//!
//! ```text
//! g(lambda) = E[min(0, r_lambda(x))] + lambda * (f_bar - eta)
//! r_lambda(x) = (1 - 2 p*_x) - lambda * (2 f*_x - 1)
//! ```
//!
//! is concave and piecewise linear in `lambda`, with kinks only where
//! some `r_lambda(x)` crosses zero, i.e. at `lambda = |1 - 2 p*_x|`. The
//! solver therefore evaluates the dual at every such breakpoint plus
//! zero, takes the smallest maximizer, and reads the classifier off the
//! closed form: decide 1 when `p* >= (1 + lambda*)/2` on the low side
//! (`p* <= tau`) and when `p* >= (1 - lambda*)/2` on the high side.
//!
//! Instances sitting exactly on a threshold can make that closed form
//! overshoot the budget; the solver then flips boundary points back to
//! their fair label, largest weight first, until feasible, and records
//! the flips.

use serde::Serialize;

use crate::dataset::{FairLabeling, LabeledDataset};
use crate::error::{Error, Result};
use crate::metrics::{self, DecisionVector};

const FEAS_TOL: f64 = 1e-12;
/// Matching tolerance for "p* sits exactly on a threshold".
const BOUNDARY_TOL: f64 = 1e-12;

/// Maximum dataset size accepted by the exhaustive oracle.
pub const BRUTE_FORCE_MAX: usize = 20;

/// Output of the constrained solver.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstrainedSolution {
    pub lambda_star: f64,
    pub classifier: DecisionVector,
    pub accuracy: f64,
    pub eta_budget: f64,
    pub eta_achieved: f64,
    /// Decision threshold on the high side `p* > tau`: (1 - lambda*)/2.
    pub low_threshold: f64,
    /// Decision threshold on the low side `p* <= tau`: (1 + lambda*)/2.
    pub high_threshold: f64,
    /// True when the budget constrained the optimum (lambda* > 0).
    pub binding: bool,
    /// Instance ids flipped back to their fair label during the
    /// feasibility repair.
    pub flipped_boundary_points: Vec<usize>,
}

/// Serialized summary, matching the documented JSON layout.
#[derive(Debug, Clone, Serialize)]
pub struct SolutionSummary {
    pub lambda_star: f64,
    pub thresholds: ThresholdPair,
    pub accuracy: f64,
    pub eta_budget: f64,
    pub eta_achieved: f64,
    pub binding: bool,
    pub flipped_boundary_points: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThresholdPair {
    pub low: f64,
    pub high: f64,
}

impl ConstrainedSolution {
    pub fn summary(&self) -> SolutionSummary {
        SolutionSummary {
            lambda_star: self.lambda_star,
            thresholds: ThresholdPair {
                low: self.low_threshold,
                high: self.high_threshold,
            },
            accuracy: self.accuracy,
            eta_budget: self.eta_budget,
            eta_achieved: self.eta_achieved,
            binding: self.binding,
            flipped_boundary_points: self.flipped_boundary_points.clone(),
        }
    }
}

fn validate_inputs(ds: &LabeledDataset, fl: &FairLabeling, eta: f64) -> Result<Vec<f64>> {
    if fl.f_star.len() != ds.len() {
        return Err(Error::LengthMismatch {
            expected: ds.len(),
            got: fl.f_star.len(),
        });
    }
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::ParamOutOfRange {
            name: "eta",
            value: eta,
            lo: 0.0,
            hi: 1.0,
        });
    }
    ds.p_star()
}

fn f_bar(ds: &LabeledDataset, fl: &FairLabeling) -> f64 {
    ds.instances()
        .iter()
        .zip(&fl.f_star)
        .map(|(r, &f)| r.weight * f as f64)
        .sum()
}

/// Evaluate the dual objective at one multiplier. Exact weighted sum.
pub fn dual_objective(
    ds: &LabeledDataset,
    fl: &FairLabeling,
    eta: f64,
    lambda: f64,
) -> Result<f64> {
    if lambda < 0.0 {
        return Err(Error::ParamOutOfRange {
            name: "lambda",
            value: lambda,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    let p = validate_inputs(ds, fl, eta)?;
    let mut value = lambda * (f_bar(ds, fl) - eta);
    for ((r, &pi), &fi) in ds.instances().iter().zip(&p).zip(&fl.f_star) {
        let r_lambda = (1.0 - 2.0 * pi) - lambda * (2.0 * fi as f64 - 1.0);
        value += r.weight * r_lambda.min(0.0);
    }
    Ok(value)
}

/// Closed-form classifier at a fixed multiplier, with `>=` at both
/// thresholds.
fn closed_form(p: &[f64], tau: f64, lambda: f64) -> (DecisionVector, Vec<usize>) {
    let hi = (1.0 + lambda) / 2.0;
    let lo = (1.0 - lambda) / 2.0;
    let mut decisions = Vec::with_capacity(p.len());
    let mut boundary = Vec::new();
    for (i, &pi) in p.iter().enumerate() {
        let threshold = if pi <= tau { hi } else { lo };
        decisions.push(u8::from(pi >= threshold));
        if (pi - threshold).abs() <= BOUNDARY_TOL {
            boundary.push(i);
        }
    }
    (DecisionVector::new(decisions), boundary)
}

/// Solve the dual exactly by breakpoint enumeration and return the
/// primal-feasible classifier built from the closed form.
pub fn solve_dual(ds: &LabeledDataset, fl: &FairLabeling, eta: f64) -> Result<ConstrainedSolution> {
    let p = validate_inputs(ds, fl, eta)?;
    let fbar = f_bar(ds, fl);

    // Candidate multipliers: zero plus every kink of the piecewise-linear
    // dual, evaluated with running sums over the kinks sorted ascending.
    //
    // Split the instances by which side of their kink contributes:
    //   f=1: term = w*(d - lambda) once lambda >= d, with d = 1 - 2p
    //        (d <= 0 contributes from lambda = 0 on).
    //   f=0: term = w*(e + lambda) until lambda >= -e, with e = 1 - 2p
    //        (e >= 0 never contributes).
    let mut candidates: Vec<f64> = Vec::with_capacity(p.len() + 1);
    candidates.push(0.0);
    candidates.extend(p.iter().map(|&pi| (1.0 - 2.0 * pi).abs()));
    candidates.sort_by(|a, b| a.partial_cmp(b).unwrap());
    candidates.dedup();

    // Kinks for f=1 instances with d > 0, sorted by d: join the active sum
    // as lambda passes d. f=1 instances with d <= 0 are active always.
    // Kinks for f=0 instances with e < 0, sorted by -e: leave the active
    // sum as lambda passes -e.
    let mut join: Vec<(f64, f64)> = Vec::new(); // (d, w) for f=1, d > 0
    let mut leave: Vec<(f64, f64, f64)> = Vec::new(); // (-e, w, e) for f=0, e < 0
    let mut const_sum = 0.0; // sum of w*d over always-active f=1 instances
    let mut const_w = 0.0; // their total weight (slope contribution)
    for ((r, &pi), &fi) in ds.instances().iter().zip(&p).zip(&fl.f_star) {
        let d = 1.0 - 2.0 * pi;
        if fi == 1 {
            if d > 0.0 {
                join.push((d, r.weight));
            } else {
                const_sum += r.weight * d;
                const_w += r.weight;
            }
        } else if d < 0.0 {
            leave.push((-d, r.weight, d));
        }
    }
    join.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    leave.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let mut best_lambda = 0.0;
    let mut best_value = f64::NEG_INFINITY;
    let mut ji = 0;
    let mut li = 0;
    // Running sums of w*key and w over active instances of each kind.
    let mut join_sum = 0.0;
    let mut join_w = 0.0;
    let mut leave_sum: f64 = leave.iter().map(|(_, w, e)| w * e).sum();
    let mut leave_w: f64 = leave.iter().map(|(_, w, _)| w).sum();
    for &lambda in &candidates {
        while ji < join.len() && join[ji].0 <= lambda {
            join_sum += join[ji].1 * join[ji].0;
            join_w += join[ji].1;
            ji += 1;
        }
        while li < leave.len() && leave[li].0 <= lambda {
            leave_sum -= leave[li].1 * leave[li].2;
            leave_w -= leave[li].1;
            li += 1;
        }
        let value = (const_sum - const_w * lambda)
            + (join_sum - join_w * lambda)
            + (leave_sum + leave_w * lambda)
            + lambda * (fbar - eta);
        if value > best_value + 1e-14 {
            best_value = value;
            best_lambda = lambda;
        }
    }

    let lambda_star = best_lambda;
    let (mut classifier, boundary) = closed_form(&p, fl.tau, lambda_star);
    let mut eta_achieved = metrics::inframarginality(ds, &classifier, fl)?;
    let mut flipped = Vec::new();
    if eta_achieved > eta + FEAS_TOL {
        // Flip boundary points that disagree with their fair label back to
        // it, largest weight first. Each flip removes that instance's
        // weight from eta, and the repaired classifier is guaranteed to
        // reach the budget because the fair labeling itself has eta = 0.
        let mut repair: Vec<usize> = boundary
            .iter()
            .copied()
            .filter(|&i| classifier.as_slice()[i] != fl.f_star[i])
            .collect();
        repair.sort_by(|&a, &b| {
            let wa = ds.instances()[a].weight;
            let wb = ds.instances()[b].weight;
            wb.partial_cmp(&wa).unwrap().then(a.cmp(&b))
        });
        let mut bits = classifier.as_slice().to_vec();
        for i in repair {
            if eta_achieved <= eta + FEAS_TOL {
                break;
            }
            bits[i] = fl.f_star[i];
            eta_achieved -= ds.instances()[i].weight;
            flipped.push(i);
        }
        classifier = DecisionVector::new(bits);
        eta_achieved = metrics::inframarginality(ds, &classifier, fl)?;
        debug_assert!(eta_achieved <= eta + FEAS_TOL);
    }
    let accuracy = metrics::expected_accuracy(ds, &classifier)?;
    Ok(ConstrainedSolution {
        lambda_star,
        classifier,
        accuracy,
        eta_budget: eta,
        eta_achieved,
        low_threshold: (1.0 - lambda_star) / 2.0,
        high_threshold: (1.0 + lambda_star) / 2.0,
        binding: lambda_star > 0.0,
        flipped_boundary_points: flipped,
    })
}

/// Exhaustive oracle: enumerate all 2^n decision vectors and return a
/// feasible accuracy maximizer, ties broken toward the lexicographically
/// smallest vector. Only for n <= [`BRUTE_FORCE_MAX`].
pub fn brute_force_optimum(
    ds: &LabeledDataset,
    fl: &FairLabeling,
    eta: f64,
) -> Result<(DecisionVector, f64)> {
    let p = validate_inputs(ds, fl, eta)?;
    let n = ds.len();
    if n > BRUTE_FORCE_MAX {
        return Err(Error::TooManyInstances {
            n,
            max: BRUTE_FORCE_MAX,
        });
    }
    let weights: Vec<f64> = ds.instances().iter().map(|r| r.weight).collect();
    let mut best: Option<(Vec<u8>, f64)> = None;
    for mask in 0u64..(1u64 << n) {
        let bits: Vec<u8> = (0..n).map(|i| ((mask >> i) & 1) as u8).collect();
        let mut eta_c = 0.0;
        let mut acc = 0.0;
        for i in 0..n {
            if bits[i] != fl.f_star[i] {
                eta_c += weights[i];
            }
            acc += weights[i] * if bits[i] == 1 { p[i] } else { 1.0 - p[i] };
        }
        if eta_c > eta + FEAS_TOL {
            continue;
        }
        let better = match &best {
            None => true,
            Some((cur, cur_acc)) => {
                acc > *cur_acc || (acc == *cur_acc && bits.as_slice() < cur.as_slice())
            }
        };
        if better {
            best = Some((bits, acc));
        }
    }
    let (bits, acc) = best.expect("the fair labeling is always feasible");
    Ok((DecisionVector::new(bits), acc))
}

/// Minimize the infra-marginality budget subject to a lower bound on
/// accuracy, by bisection on the budget (solver accuracy is nondecreasing
/// in it). Returns the solution at the smallest budget, to 1e-9.
pub fn min_infra_given_accuracy(
    ds: &LabeledDataset,
    fl: &FairLabeling,
    alpha_min: f64,
) -> Result<ConstrainedSolution> {
    let bayes = solve_dual(ds, fl, 1.0)?;
    if alpha_min > bayes.accuracy + FEAS_TOL {
        return Err(Error::InfeasibleAccuracy {
            requested: alpha_min,
            max_accuracy: bayes.accuracy,
        });
    }
    let at_zero = solve_dual(ds, fl, 0.0)?;
    if at_zero.accuracy >= alpha_min {
        return Ok(at_zero);
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if solve_dual(ds, fl, mid)?.accuracy >= alpha_min {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    solve_dual(ds, fl, hi)
}
