//! Probability estimation and the group-fairness trade-off trainer.
//!
//! The scorer is a weighted l2-regularized logistic regression fit by
//! deterministic full-batch gradient descent with backtracking, on
//! standardized features. The trade-off trainer searches a lattice of
//! per-group decision thresholds on the score, minimizing
//! `empirical_error + gamma * unfairness`; it is exactly optimal within
//! that classifier family and fully deterministic, which is what the
//! sweep and ablation experiments need from it.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{FairLabeling, LabeledDataset};
use crate::error::{Error, Result};
use crate::metrics::{self, round6, DecisionVector};

/// Per-column affine transform fitted on training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
}

impl Standardizer {
    fn fit(ds: &LabeledDataset) -> Standardizer {
        let k = ds.feature_arity();
        let mut means = vec![0.0; k];
        for r in ds.instances() {
            for (j, &x) in r.features.iter().enumerate() {
                means[j] += r.weight * x;
            }
        }
        let mut vars = vec![0.0; k];
        for r in ds.instances() {
            for (j, &x) in r.features.iter().enumerate() {
                let d = x - means[j];
                vars[j] += r.weight * d * d;
            }
        }
        let sds = vars
            .iter()
            .map(|&v| {
                let sd = v.sqrt();
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { means, sds }
    }

    fn apply(&self, features: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(
            features
                .iter()
                .zip(self.means.iter().zip(&self.sds))
                .map(|(&x, (&m, &s))| (x - m) / s),
        );
    }
}

/// Linear-logistic probability estimator plus its training metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticScorer {
    /// Coefficients on standardized features.
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub standardizer: Standardizer,
    pub iterations: usize,
    pub final_loss: f64,
    pub l2: f64,
}

fn log_sigmoid(z: f64) -> f64 {
    // -softplus(-z), stable on both tails.
    if z >= 0.0 {
        -(-z).exp().ln_1p()
    } else {
        z - z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Weighted negative log-likelihood plus `(l2/2)*|w|^2` of a linear
/// model on the dataset's raw features (intercept unregularized).
pub fn logistic_loss(ds: &LabeledDataset, weights: &[f64], intercept: f64, l2: f64) -> Result<f64> {
    if weights.len() != ds.feature_arity() {
        return Err(Error::LengthMismatch {
            expected: ds.feature_arity(),
            got: weights.len(),
        });
    }
    let y = ds.y_star()?;
    let mut loss = 0.0;
    for (r, &yi) in ds.instances().iter().zip(&y) {
        let z: f64 = intercept
            + r.features
                .iter()
                .zip(weights)
                .map(|(&x, &w)| x * w)
                .sum::<f64>();
        let ll = if yi == 1 {
            log_sigmoid(z)
        } else {
            log_sigmoid(-z)
        };
        loss -= r.weight * ll;
    }
    Ok(loss + 0.5 * l2 * weights.iter().map(|w| w * w).sum::<f64>())
}

/// Analytic gradient of [`logistic_loss`] with respect to the weights and
/// the intercept.
pub fn logistic_gradient(
    ds: &LabeledDataset,
    weights: &[f64],
    intercept: f64,
    l2: f64,
) -> Result<(Vec<f64>, f64)> {
    if weights.len() != ds.feature_arity() {
        return Err(Error::LengthMismatch {
            expected: ds.feature_arity(),
            got: weights.len(),
        });
    }
    let y = ds.y_star()?;
    let mut grad = vec![0.0; weights.len()];
    let mut grad_b = 0.0;
    for (r, &yi) in ds.instances().iter().zip(&y) {
        let z: f64 = intercept
            + r.features
                .iter()
                .zip(weights)
                .map(|(&x, &w)| x * w)
                .sum::<f64>();
        let residual = r.weight * (sigmoid(z) - yi as f64);
        grad_b += residual;
        for (g, &x) in grad.iter_mut().zip(&r.features) {
            *g += residual * x;
        }
    }
    for (g, &w) in grad.iter_mut().zip(weights) {
        *g += l2 * w;
    }
    Ok((grad, grad_b))
}

/// Fit the scorer by full-batch gradient descent with Armijo
/// backtracking, starting from zero. Deterministic given its inputs.
pub fn train_logistic(
    ds: &LabeledDataset,
    l2: f64,
    max_iter: usize,
    tol: f64,
) -> Result<LogisticScorer> {
    train_logistic_fair(ds, UnfairnessMetric::Di, 0.0, l2, max_iter, tol)
}

/// Group-gap term added to the training loss. For the DI metric the gap
/// is the difference of group mean scores; for FDR it is the difference
/// of group mean scores among negative-label instances, the
/// differentiable stand-in for unequal false-discovery pressure.
fn score_gap_and_grad(
    ds: &LabeledDataset,
    scores: &[f64],
    metric: UnfairnessMetric,
) -> (f64, Vec<f64>) {
    let mut mass = [0.0; 2];
    for r in ds.instances() {
        let include = match metric {
            UnfairnessMetric::Di => true,
            UnfairnessMetric::Fdr => r.y_star.unwrap() == 0,
        };
        if include {
            mass[r.group as usize] += r.weight;
        }
    }
    let mut gap = 0.0;
    let mut coef = vec![0.0; ds.len()];
    for (i, r) in ds.instances().iter().enumerate() {
        let include = match metric {
            UnfairnessMetric::Di => true,
            UnfairnessMetric::Fdr => r.y_star.unwrap() == 0,
        };
        if !include || mass[r.group as usize] == 0.0 {
            continue;
        }
        let sign = if r.group == 1 { 1.0 } else { -1.0 };
        let c = sign * r.weight / mass[r.group as usize];
        gap += c * scores[i];
        coef[i] = c;
    }
    (gap, coef)
}

/// Fit the scorer with an additional in-processing fairness penalty
/// `(fair_penalty / 2) * gap^2` on the group score gap, the functional
/// stand-in for constraint-weighted fair training. `fair_penalty = 0`
/// recovers [`train_logistic`].
pub fn train_logistic_fair(
    ds: &LabeledDataset,
    metric: UnfairnessMetric,
    fair_penalty: f64,
    l2: f64,
    max_iter: usize,
    tol: f64,
) -> Result<LogisticScorer> {
    ds.y_star()?;
    for (i, r) in ds.instances().iter().enumerate() {
        if let Some(j) = r.features.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFiniteFeature {
                index: i,
                column: j,
            });
        }
    }
    let standardizer = Standardizer::fit(ds);
    let mut rows = ds.instances().to_vec();
    let mut buf = Vec::new();
    for r in &mut rows {
        standardizer.apply(&r.features, &mut buf);
        r.features = buf.clone();
    }
    let std_ds = LabeledDataset::build_with_columns(rows, ds.columns().to_vec())?;

    let loss_at = |w: &[f64], b: f64| -> Result<f64> {
        let mut loss = logistic_loss(&std_ds, w, b, l2)?;
        if fair_penalty > 0.0 {
            let scores = raw_scores(&std_ds, w, b);
            let (gap, _) = score_gap_and_grad(&std_ds, &scores, metric);
            loss += 0.5 * fair_penalty * gap * gap;
        }
        Ok(loss)
    };
    let grad_at = |w: &[f64], b: f64| -> Result<(Vec<f64>, f64)> {
        let (mut grad, mut grad_b) = logistic_gradient(&std_ds, w, b, l2)?;
        if fair_penalty > 0.0 {
            let scores = raw_scores(&std_ds, w, b);
            let (gap, coef) = score_gap_and_grad(&std_ds, &scores, metric);
            for (i, r) in std_ds.instances().iter().enumerate() {
                if coef[i] == 0.0 {
                    continue;
                }
                let dsig = scores[i] * (1.0 - scores[i]);
                let common = fair_penalty * gap * coef[i] * dsig;
                grad_b += common;
                for (g, &x) in grad.iter_mut().zip(&r.features) {
                    *g += common * x;
                }
            }
        }
        Ok((grad, grad_b))
    };

    let k = std_ds.feature_arity();
    let mut weights = vec![0.0; k];
    let mut intercept = 0.0;
    let mut loss = loss_at(&weights, intercept)?;
    let mut step = 1.0_f64;
    let mut iterations = 0;
    for it in 0..max_iter {
        iterations = it + 1;
        let (grad, grad_b) = grad_at(&weights, intercept)?;
        let gnorm2: f64 = grad.iter().map(|g| g * g).sum::<f64>() + grad_b * grad_b;
        if gnorm2.sqrt() <= tol {
            iterations = it;
            break;
        }
        step = (step * 2.0).min(64.0);
        let mut accepted = false;
        while step >= 1e-18 {
            let cand_w: Vec<f64> = weights
                .iter()
                .zip(&grad)
                .map(|(w, g)| w - step * g)
                .collect();
            let cand_b = intercept - step * grad_b;
            let cand_loss = loss_at(&cand_w, cand_b)?;
            if cand_loss <= loss - 0.5 * step * gnorm2 {
                weights = cand_w;
                intercept = cand_b;
                loss = cand_loss;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return Err(Error::Divergence);
        }
    }
    Ok(LogisticScorer {
        weights,
        intercept,
        standardizer,
        iterations,
        final_loss: loss,
        l2,
    })
}

fn raw_scores(ds: &LabeledDataset, weights: &[f64], intercept: f64) -> Vec<f64> {
    ds.instances()
        .iter()
        .map(|r| {
            sigmoid(
                intercept
                    + r.features
                        .iter()
                        .zip(weights)
                        .map(|(&x, &w)| x * w)
                        .sum::<f64>(),
            )
        })
        .collect()
}

/// Elementwise sigmoid scores on the dataset's features.
pub fn predict_proba(scorer: &LogisticScorer, ds: &LabeledDataset) -> Result<Vec<f64>> {
    if scorer.weights.len() != ds.feature_arity() {
        return Err(Error::LengthMismatch {
            expected: scorer.weights.len(),
            got: ds.feature_arity(),
        });
    }
    let mut buf = Vec::new();
    Ok(ds
        .instances()
        .iter()
        .map(|r| {
            scorer.standardizer.apply(&r.features, &mut buf);
            let z: f64 = scorer.intercept
                + buf
                    .iter()
                    .zip(&scorer.weights)
                    .map(|(&x, &w)| x * w)
                    .sum::<f64>();
            sigmoid(z)
        })
        .collect())
}

/// Threshold the estimated probabilities into a proxy fair labeling:
/// label 1 exactly when `p_hat > tau`.
pub fn proxy_labeling(
    scorer: &LogisticScorer,
    ds: &LabeledDataset,
    tau: f64,
) -> Result<FairLabeling> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::ParamOutOfRange {
            name: "tau",
            value: tau,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let scores = predict_proba(scorer, ds)?;
    Ok(FairLabeling {
        tau,
        f_star: scores.iter().map(|&s| u8::from(s > tau)).collect(),
    })
}

/// Which group-unfairness measure the trade-off trainer penalizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnfairnessMetric {
    Di,
    Fdr,
}

impl FromStr for UnfairnessMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<UnfairnessMetric> {
        match s.to_ascii_lowercase().as_str() {
            "di" => Ok(UnfairnessMetric::Di),
            "fdr" => Ok(UnfairnessMetric::Fdr),
            _ => Err(Error::Schema {
                reason: format!("unknown unfairness metric {s:?}; expected di or fdr"),
            }),
        }
    }
}

/// Scorer plus one decision threshold per group:
/// `decision = 1{score >= theta[group]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupThresholdClassifier {
    pub scorer: LogisticScorer,
    pub theta: [f64; 2],
}

impl GroupThresholdClassifier {
    pub fn decisions(&self, ds: &LabeledDataset) -> Result<DecisionVector> {
        let scores = predict_proba(&self.scorer, ds)?;
        Ok(DecisionVector::new(
            ds.instances()
                .iter()
                .zip(&scores)
                .map(|(r, &s)| u8::from(s >= self.theta[r.group as usize]))
                .collect(),
        ))
    }
}

/// Per-group cumulative masses at each grid threshold, over scores sorted
/// descending, so every lattice cell evaluates in constant time.
struct GroupAggregates {
    group_weight: f64,
    /// Empirical positive mass of the group (for the error term).
    pos_mass: f64,
    /// Per grid index: selected mass, empirical FP mass, empirical TP
    /// mass, and outcome-based FP mass for the FDR metric.
    selected: Vec<f64>,
    fp_emp: Vec<f64>,
    tp_emp: Vec<f64>,
    fp_outcome: Vec<f64>,
}

fn build_aggregates(
    ds: &LabeledDataset,
    scores: &[f64],
    grid: &[f64],
    group: u32,
) -> GroupAggregates {
    let probabilistic = ds.is_probabilistic();
    let mut members: Vec<usize> = (0..ds.len())
        .filter(|&i| ds.instances()[i].group == group)
        .collect();
    members.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap().then(a.cmp(&b)));
    let sorted_scores: Vec<f64> = members.iter().map(|&i| scores[i]).collect();
    let n = members.len();
    let mut cw = vec![0.0; n + 1];
    let mut cfp = vec![0.0; n + 1];
    let mut ctp = vec![0.0; n + 1];
    let mut cfpo = vec![0.0; n + 1];
    let mut group_weight = 0.0;
    let mut pos_mass = 0.0;
    for (k, &i) in members.iter().enumerate() {
        let r = &ds.instances()[i];
        let yi = r.y_star.unwrap() as f64;
        let outcome = if probabilistic { r.p_star.unwrap() } else { yi };
        cw[k + 1] = cw[k] + r.weight;
        cfp[k + 1] = cfp[k] + r.weight * (1.0 - yi);
        ctp[k + 1] = ctp[k] + r.weight * yi;
        cfpo[k + 1] = cfpo[k] + r.weight * (1.0 - outcome);
        group_weight += r.weight;
        pos_mass += r.weight * yi;
    }
    let mut selected = Vec::with_capacity(grid.len());
    let mut fp_emp = Vec::with_capacity(grid.len());
    let mut tp_emp = Vec::with_capacity(grid.len());
    let mut fp_outcome = Vec::with_capacity(grid.len());
    for &t in grid {
        let count = sorted_scores.partition_point(|&s| s >= t);
        selected.push(cw[count]);
        fp_emp.push(cfp[count]);
        tp_emp.push(ctp[count]);
        fp_outcome.push(cfpo[count]);
    }
    GroupAggregates {
        group_weight,
        pos_mass,
        selected,
        fp_emp,
        tp_emp,
        fp_outcome,
    }
}

fn ratio_unfairness(a: f64, b: f64) -> f64 {
    match (a == 0.0, b == 0.0) {
        (true, true) => 0.0,
        (true, false) | (false, true) => 1.0,
        (false, false) => 1.0 - (a / b).min(b / a),
    }
}

/// Exhaustive lattice search over per-group thresholds minimizing
/// `empirical_error + gamma * unfairness`. Ties break toward smaller
/// unfairness, then lexicographically smaller thresholds.
pub fn train_tradeoff(
    ds: &LabeledDataset,
    scorer: &LogisticScorer,
    metric: UnfairnessMetric,
    gamma: f64,
    grid: usize,
) -> Result<GroupThresholdClassifier> {
    if ds.group_count() != 2 {
        return Err(Error::NotTwoGroups {
            count: ds.group_count(),
        });
    }
    let gamma_ok = gamma.is_finite() && gamma >= 0.0;
    if !gamma_ok {
        return Err(Error::ParamOutOfRange {
            name: "gamma",
            value: gamma,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    if grid < 2 {
        return Err(Error::ParamOutOfRange {
            name: "grid",
            value: grid as f64,
            lo: 2.0,
            hi: f64::INFINITY,
        });
    }
    ds.y_star()?;
    let scores = predict_proba(scorer, ds)?;
    let thresholds: Vec<f64> = (0..grid).map(|g| g as f64 / (grid - 1) as f64).collect();
    let agg0 = build_aggregates(ds, &scores, &thresholds, 0);
    let agg1 = build_aggregates(ds, &scores, &thresholds, 1);
    if agg0.group_weight == 0.0 {
        return Err(Error::EmptyGroup { group: 0 });
    }
    if agg1.group_weight == 0.0 {
        return Err(Error::EmptyGroup { group: 1 });
    }

    let mut best: Option<(f64, f64, usize, usize)> = None;
    let mut any_defined = false;
    for (i, _) in thresholds.iter().enumerate() {
        let err0 = agg0.fp_emp[i] + (agg0.pos_mass - agg0.tp_emp[i]);
        for (j, _) in thresholds.iter().enumerate() {
            let error = err0 + agg1.fp_emp[j] + (agg1.pos_mass - agg1.tp_emp[j]);
            let (unfairness, defined) = match metric {
                UnfairnessMetric::Di => {
                    let sr0 = agg0.selected[i] / agg0.group_weight;
                    let sr1 = agg1.selected[j] / agg1.group_weight;
                    (ratio_unfairness(sr0, sr1), true)
                }
                UnfairnessMetric::Fdr => {
                    let pp0 = agg0.selected[i];
                    let pp1 = agg1.selected[j];
                    if pp0 > 0.0 && pp1 > 0.0 {
                        (
                            ratio_unfairness(agg0.fp_outcome[i] / pp0, agg1.fp_outcome[j] / pp1),
                            true,
                        )
                    } else {
                        (1.0, false)
                    }
                }
            };
            any_defined |= defined;
            let objective = error + gamma * unfairness;
            let better = match &best {
                None => true,
                Some((bo, bu, _, _)) => objective < *bo || (objective == *bo && unfairness < *bu),
            };
            if better {
                best = Some((objective, unfairness, i, j));
            }
        }
    }
    if !any_defined {
        return Err(Error::MetricUndefined);
    }
    let (_, _, i, j) = best.expect("grid is nonempty");
    Ok(GroupThresholdClassifier {
        scorer: scorer.clone(),
        theta: [thresholds[i], thresholds[j]],
    })
}

/// One row of a trade-off curve; every value is recomputed from the
/// trained classifier's decisions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    pub gamma: f64,
    pub error: f64,
    pub eta: f64,
    pub unfairness: f64,
    pub group_error: [f64; 2],
    pub group_eta: [f64; 2],
    pub group_sr: [f64; 2],
    pub group_fdr: [Option<f64>; 2],
    pub theta: [f64; 2],
}

/// Sequence of trade-off points at strictly increasing gamma values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffCurve {
    pub metric: UnfairnessMetric,
    pub points: Vec<TradeoffPoint>,
}

impl TradeoffCurve {
    /// CSV with the documented plottable header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "gamma,error,eta,unfairness,group0_error,group1_error,group0_eta,group1_eta,group0_sr,group1_sr,group0_fdr,group1_fdr\n",
        );
        for p in &self.points {
            let fdr = |v: Option<f64>| v.map(|x| format!("{}", round6(x))).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                round6(p.gamma),
                round6(p.error),
                round6(p.eta),
                round6(p.unfairness),
                round6(p.group_error[0]),
                round6(p.group_error[1]),
                round6(p.group_eta[0]),
                round6(p.group_eta[1]),
                round6(p.group_sr[0]),
                round6(p.group_sr[1]),
                fdr(p.group_fdr[0]),
                fdr(p.group_fdr[1]),
            ));
        }
        out
    }
}

fn groupwise_empirical(
    ds: &LabeledDataset,
    c: &DecisionVector,
    benchmark: &FairLabeling,
) -> ([f64; 2], [f64; 2]) {
    let mut err = [0.0; 2];
    let mut eta = [0.0; 2];
    let mut w = [0.0; 2];
    for (i, r) in ds.instances().iter().enumerate() {
        let g = r.group as usize;
        w[g] += r.weight;
        if c.as_slice()[i] != r.y_star.unwrap() {
            err[g] += r.weight;
        }
        if c.as_slice()[i] != benchmark.f_star[i] {
            eta[g] += r.weight;
        }
    }
    (
        [err[0] / w[0], err[1] / w[1]],
        [eta[0] / w[0], eta[1] / w[1]],
    )
}

/// Weight tying the sweep's in-processing fairness penalty to gamma:
/// the scorer refit at trade-off weight gamma uses a score-gap penalty
/// of `gamma * FAIR_PENALTY_SCALE`.
pub const FAIR_PENALTY_SCALE: f64 = 60.0;

/// Run one trade-off training per gamma and recompute every reported
/// metric from the resulting decisions. Infra-marginality is measured
/// against the supplied benchmark labeling (true fair labels when the
/// outcome probabilities are known, a proxy labeling otherwise).
///
/// Each gamma refits the scorer with the matching in-processing penalty
/// before the threshold search, so higher trade-off weights degrade the
/// score itself the way constraint-weighted fair training does; gamma 0
/// is the plain accuracy-max fit.
pub fn sweep_tradeoff(
    ds: &LabeledDataset,
    benchmark: &FairLabeling,
    metric: UnfairnessMetric,
    gammas: &[f64],
    cfg: &TrainConfig,
) -> Result<TradeoffCurve> {
    if gammas.is_empty() || gammas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::GammasNotIncreasing);
    }
    if benchmark.f_star.len() != ds.len() {
        return Err(Error::LengthMismatch {
            expected: ds.len(),
            got: benchmark.f_star.len(),
        });
    }
    let mut points = Vec::with_capacity(gammas.len());
    for &gamma in gammas {
        let scorer = train_logistic_fair(
            ds,
            metric,
            gamma * FAIR_PENALTY_SCALE,
            cfg.l2,
            cfg.max_iter,
            cfg.tol,
        )?;
        let classifier = train_tradeoff(ds, &scorer, metric, gamma, cfg.grid)?;
        let c = classifier.decisions(ds)?;
        let error = 1.0 - metrics::empirical_accuracy(ds, &c)?;
        let eta = metrics::inframarginality(ds, &c, benchmark)?;
        let unfairness = match metric {
            UnfairnessMetric::Di => metrics::di_unfairness(ds, &c)?,
            UnfairnessMetric::Fdr => metrics::fdr_unfairness(ds, &c)?,
        };
        let sr = metrics::selection_rates(ds, &c)?;
        let fdr = metrics::fdr_per_group(ds, &c)?;
        let (group_error, group_eta) = groupwise_empirical(ds, &c, benchmark);
        points.push(TradeoffPoint {
            gamma,
            error,
            eta,
            unfairness,
            group_error,
            group_eta,
            group_sr: [sr[0], sr[1]],
            group_fdr: [fdr[0], fdr[1]],
            theta: classifier.theta,
        });
    }
    Ok(TradeoffCurve { metric, points })
}

/// Training knobs shared by the sweep and ablation entry points.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub l2: f64,
    pub max_iter: usize,
    pub tol: f64,
    pub grid: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            l2: 1e-3,
            max_iter: 300,
            tol: 1e-6,
            grid: 201,
        }
    }
}

/// One ablation row: metrics of the accuracy-max classifier trained on
/// the reduced features, benchmarked against the full-feature labeling
/// and against its own, plus the rank correlation of error and
/// benchmark infra-marginality across the gamma sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AblationRow {
    pub dropped: Vec<String>,
    pub error: f64,
    pub eta_vs_full: f64,
    pub eta_vs_self: f64,
    pub rank_corr_error_eta: f64,
}

impl AblationRow {
    pub fn csv_header() -> &'static str {
        "dropped,error,eta_vs_full,eta_vs_self,rank_corr_error_eta"
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            if self.dropped.is_empty() {
                "full".to_string()
            } else {
                self.dropped.join("+")
            },
            round6(self.error),
            round6(self.eta_vs_full),
            round6(self.eta_vs_self),
            round6(self.rank_corr_error_eta),
        )
    }
}

/// Train a scorer per reduced feature set (expressed as dropped feature
/// names; an empty list is the full set) and report each one's metrics
/// against the full-feature proxy labeling at the given threshold.
pub fn ablation_report(
    ds: &LabeledDataset,
    drop_sets: &[Vec<String>],
    tau: f64,
    metric: UnfairnessMetric,
    gammas: &[f64],
    cfg: &TrainConfig,
) -> Result<Vec<AblationRow>> {
    let full_scorer = train_logistic(ds, cfg.l2, cfg.max_iter, cfg.tol)?;
    let full_labeling = proxy_labeling(&full_scorer, ds, tau)?;
    let mut rows = Vec::with_capacity(drop_sets.len());
    for drops in drop_sets {
        let names: Vec<&str> = drops.iter().map(|s| s.as_str()).collect();
        let reduced = if names.is_empty() {
            ds.clone()
        } else {
            ds.drop_features(&names)?
        };
        let scorer = train_logistic(&reduced, cfg.l2, cfg.max_iter, cfg.tol)?;
        let self_labeling = proxy_labeling(&scorer, &reduced, tau)?;
        let baseline = train_tradeoff(&reduced, &scorer, metric, 0.0, cfg.grid)?;
        let c = baseline.decisions(&reduced)?;
        let error = 1.0 - metrics::empirical_accuracy(&reduced, &c)?;
        let eta_vs_full = metrics::inframarginality(&reduced, &c, &full_labeling)?;
        let eta_vs_self = metrics::inframarginality(&reduced, &c, &self_labeling)?;
        let curve = sweep_tradeoff(&reduced, &full_labeling, metric, gammas, cfg)?;
        let errs: Vec<f64> = curve.points.iter().map(|p| p.error).collect();
        let etas: Vec<f64> = curve.points.iter().map(|p| p.eta).collect();
        rows.push(AblationRow {
            dropped: drops.clone(),
            error,
            eta_vs_full,
            eta_vs_self,
            rank_corr_error_eta: spearman(&errs, &etas),
        });
    }
    Ok(rows)
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).unwrap());
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0;
        for &k in &order[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation with average ranks on ties; 0 when either
/// side has no variation.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let rx = ranks(xs);
    let ry = ranks(ys);
    let n = xs.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mx) * (b - my);
        vx += (a - mx) * (a - mx);
        vy += (b - my) * (b - my);
    }
    if vx == 0.0 || vy == 0.0 {
        return 0.0;
    }
    cov / (vx * vy).sqrt()
}
