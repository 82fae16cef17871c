//! Calibration sweep behind the shipped S1-S5 presets.
//!
//! Searches the preset parameter families for Gaussian separations whose
//! l1 distances (overall or per group, at tau = 0.5) land on the
//! documented targets, then prints the frozen parameter values and a
//! verification pass at n = 10000. Run with:
//!
//! ```text
//! cargo run --release -p inframargin --example calibrate_presets
//! ```

use inframargin::dataset::LabeledDataset;
use inframargin::metrics::{self, DecisionVector};
use inframargin::model::{self, UnfairnessMetric};
use inframargin::simgen::{sample_dataset, GaussianPair, GenerativeSpec};

const CALIBRATION_N: usize = 200_000;
const CALIBRATION_SEED: u64 = 1;

fn cell(mean: f64) -> GaussianPair {
    GaussianPair {
        mean_u: mean,
        sd_u: 1.0,
        mean_v: mean,
        sd_v: 1.0,
    }
}

/// Gaussians shared across groups, separation `d` per feature, group tilt
/// `a = P(Z=1|Y=1) = 1 - P(Z=1|Y=0)`.
fn build_shared(d: f64, a: f64) -> GenerativeSpec {
    let cells = [cell(-d / 2.0), cell(d / 2.0)];
    GenerativeSpec {
        p_y1: 0.5,
        p_z1_given_y: [1.0 - a, a],
        gaussians: [cells, cells],
    }
}

/// Group-dependent separations with no group/label correlation.
fn build_split(d0: f64, d1: f64) -> GenerativeSpec {
    GenerativeSpec {
        p_y1: 0.5,
        p_z1_given_y: [0.5, 0.5],
        gaussians: [
            [cell(-d0 / 2.0), cell(d0 / 2.0)],
            [cell(-d1 / 2.0), cell(d1 / 2.0)],
        ],
    }
}

fn delta_overall(spec: &GenerativeSpec) -> f64 {
    let ds = sample_dataset(spec, CALIBRATION_N, CALIBRATION_SEED).unwrap();
    let fl = ds.fair_labels(0.5).unwrap();
    metrics::l1_delta(&ds, &fl).unwrap()
}

fn delta_per_group(ds: &LabeledDataset) -> Vec<f64> {
    let fl = ds.fair_labels(0.5).unwrap();
    let c = DecisionVector::bayes(ds).unwrap();
    let g = metrics::groupwise(ds, &fl, &c).unwrap();
    g.values().map(|m| m.delta.unwrap()).collect()
}

/// Bisect a monotone delta(d) to the target, detecting the direction
/// from the bracket ends. Panics when the target is outside the bracket.
fn bisect_delta(target: f64, mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let f_lo = f(lo);
    let f_hi = f(hi);
    assert!(
        (f_lo - target) * (f_hi - target) <= 0.0,
        "target {target} outside bracket [{f_lo}, {f_hi}]"
    );
    let increasing = f_hi > f_lo;
    for _ in 0..24 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > target) == increasing {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn print_spec(name: &str, spec: &GenerativeSpec) {
    println!("--- {name} ---");
    println!("{}", serde_json::to_string_pretty(spec).unwrap());
}

fn main() {
    // S1: one population concentrated near 0.5; delta target sits at the
    // point where the delta band [0.35, 0.41] meets the error band
    // [0.25, 0.35] (the accuracy-max error equals delta at tau = 0.5).
    // The small group tilt keeps the per-group deltas equal (mirror
    // symmetry) while giving the accuracy-max classifier a real, not
    // noise-level, selection-rate gap for the trade-off sweep to shrink.
    let a1 = 0.53;
    let d1 = bisect_delta(0.3535, 0.05, 2.0, |d| delta_overall(&build_shared(d, a1)));
    let s1 = build_shared(d1, a1);
    let ds1 = sample_dataset(&s1, CALIBRATION_N, CALIBRATION_SEED).unwrap();
    println!(
        "S1: d = {d1:.4}, a = {a1}, delta = {:.4}, per-group {:?}",
        delta_overall(&s1),
        delta_per_group(&ds1)
    );
    print_spec("S1", &s1);

    // S2: a fixed feature separation plus a group tilt a = P(Z=1|Y=1)
    // bisected for per-group delta 0.33; the tilt pushes group 1's
    // posterior mass above 0.5 and group 0's below it, symmetrically.
    let d2 = 0.45;
    let a2 = bisect_delta(0.33, 0.5, 0.97, |a| delta_overall(&build_shared(d2, a)));
    let s2 = build_shared(d2, a2);
    let ds2 = sample_dataset(&s2, CALIBRATION_N, CALIBRATION_SEED).unwrap();
    println!(
        "S2: d = {d2:.4}, a = {a2:.4}, delta = {:.4}, per-group {:?}, group-1 center {:.3}",
        delta_overall(&s2),
        delta_per_group(&ds2),
        1.0 / (1.0 + (-(d2 * d2 + (a2 / (1.0 - a2)).ln())).exp()),
    );
    print_spec("S2", &s2);

    // S3: extreme version of S2 with a stronger separation, group
    // posteriors concentrated near 0 and 1, delta target 0.10.
    let d3 = 0.9;
    let a3 = bisect_delta(0.10, 0.5, 0.995, |a| delta_overall(&build_shared(d3, a)));
    let s3 = build_shared(d3, a3);
    let ds3 = sample_dataset(&s3, CALIBRATION_N, CALIBRATION_SEED).unwrap();
    println!(
        "S3: d = {d3:.4}, a = {a3:.4}, delta = {:.4}, per-group {:?}, group-1 center {:.3}",
        delta_overall(&s3),
        delta_per_group(&ds3),
        1.0 / (1.0 + (-(d3 * d3 + (a3 / (1.0 - a3)).ln())).exp()),
    );
    print_spec("S3", &s3);

    // S4: group 0 easy (delta 0.08), group 1 concentrated near the
    // threshold (delta 0.41). Group deltas decouple because the group is
    // independent of the label here.
    let d40 = bisect_delta(0.08, 0.2, 4.0, |d| {
        let ds = sample_dataset(&build_split(d, 1.0), CALIBRATION_N, CALIBRATION_SEED).unwrap();
        delta_per_group(&ds)[0]
    });
    let d41 = bisect_delta(0.41, 0.02, 2.0, |d| {
        let ds = sample_dataset(&build_split(1.0, d), CALIBRATION_N, CALIBRATION_SEED).unwrap();
        delta_per_group(&ds)[1]
    });
    let s4 = build_split(d40, d41);
    let ds4 = sample_dataset(&s4, CALIBRATION_N, CALIBRATION_SEED).unwrap();
    println!(
        "S4: d0 = {d40:.4}, d1 = {d41:.4}, per-group deltas {:?}",
        delta_per_group(&ds4)
    );
    print_spec("S4", &s4);

    // Verification at the experiment size, a few seeds each.
    println!("\n=== verification at n = 10000 ===");
    for (name, spec) in [("S1", &s1), ("S2", &s2), ("S3", &s3), ("S4", &s4)] {
        for seed in [7u64, 11, 13] {
            let ds = sample_dataset(spec, 10000, seed).unwrap();
            let fl = ds.fair_labels(0.5).unwrap();
            let delta = metrics::l1_delta(&ds, &fl).unwrap();
            let per = delta_per_group(&ds);
            println!("{name} seed {seed}: delta {delta:.4} per-group {per:?}");
        }
    }

    // S1 seed hunt: empirical delta must stay at or above 0.35 while the
    // empirical error of the fitted accuracy-max group thresholds stays
    // at or below 0.35.
    println!("\n=== S1 seed hunt (delta >= 0.35, fitted error <= 0.35) ===");
    for seed in 1..=40u64 {
        let ds = sample_dataset(&s1, 10000, seed).unwrap();
        let fl = ds.fair_labels(0.5).unwrap();
        let delta = metrics::l1_delta(&ds, &fl).unwrap();
        let scorer = model::train_logistic(&ds, 1e-3, 300, 1e-6).unwrap();
        let clf = model::train_tradeoff(&ds, &scorer, UnfairnessMetric::Di, 0.0, 201).unwrap();
        let c = clf.decisions(&ds).unwrap();
        let err = 1.0 - metrics::empirical_accuracy(&ds, &c).unwrap();
        let ok = delta >= 0.35 && err <= 0.35;
        println!(
            "seed {seed:>2}: delta {delta:.4} err {err:.4} {}",
            if ok { "OK" } else { "" }
        );
    }
}
