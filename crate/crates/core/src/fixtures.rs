//! Deterministic synthetic stand-ins for the census-income and
//! medical-expenditure survey files.
//!
//! The real files are not redistributable with this crate, so tests and
//! demos generate files with the same columns, realistic category mixes,
//! the same missing-value markers, and calibrated aggregate statistics:
//! the income file has exactly 32561 rows of which 30162 are complete,
//! and the expenditure file has a high-utilization fraction near 0.17.
//! Loaders and pipelines run unchanged on the real files.

use std::io::Write;
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};

use crate::error::Result;
use crate::rng;

const WORKCLASSES: &[&str] = &[
    "Private",
    "Self-emp-not-inc",
    "Self-emp-inc",
    "Federal-gov",
    "Local-gov",
    "State-gov",
    "Without-pay",
];
const EDUCATIONS: &[(&str, f64)] = &[
    ("Preschool", 1.0),
    ("5th-6th", 3.0),
    ("7th-8th", 4.0),
    ("9th", 5.0),
    ("10th", 6.0),
    ("11th", 7.0),
    ("12th", 8.0),
    ("HS-grad", 9.0),
    ("Some-college", 10.0),
    ("Assoc-voc", 11.0),
    ("Assoc-acdm", 12.0),
    ("Bachelors", 13.0),
    ("Masters", 14.0),
    ("Prof-school", 15.0),
    ("Doctorate", 16.0),
];
const MARITAL: &[&str] = &[
    "Married-civ-spouse",
    "Never-married",
    "Divorced",
    "Separated",
    "Widowed",
    "Married-spouse-absent",
];
const OCCUPATIONS: &[&str] = &[
    "Adm-clerical",
    "Exec-managerial",
    "Craft-repair",
    "Sales",
    "Prof-specialty",
    "Other-service",
    "Machine-op-inspct",
    "Transport-moving",
    "Handlers-cleaners",
    "Tech-support",
];
const RACES: &[(&str, f64)] = &[
    ("White", 0.85),
    ("Black", 0.10),
    ("Asian-Pac-Islander", 0.03),
    ("Amer-Indian-Eskimo", 0.01),
    ("Other", 0.01),
];
const COUNTRIES: &[&str] = &[
    "United-States",
    "Mexico",
    "Philippines",
    "Germany",
    "Canada",
];

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn pick_weighted<'a, R: Rng>(items: &[(&'a str, f64)], g: &mut R) -> &'a str {
    let total: f64 = items.iter().map(|(_, w)| w).sum();
    let mut t = g.random::<f64>() * total;
    for (name, w) in items {
        t -= w;
        if t <= 0.0 {
            return name;
        }
    }
    items[items.len() - 1].0
}

/// Write a census-income-style CSV: 32561 rows, 2399 of which carry a
/// `?` in one of the usual columns, leaving 30162 complete rows. Income
/// is drawn from a logistic model in age, education, and sex so the
/// label correlates with the features and the positive rate is lower
/// for the Female group.
pub fn write_adult_like(path: &Path, seed: u64) -> Result<()> {
    const TOTAL: usize = 32561;
    const INCOMPLETE: usize = 2399;
    let mut g = rng::stream_rng(seed, 0);
    let mut rows = Vec::with_capacity(TOTAL);
    for _ in 0..TOTAL {
        let age = g.random_range(17..=90);
        let (education, edu_years) = *EDUCATIONS
            .iter()
            .collect::<Vec<_>>()
            .choose_weighted(&mut g, |(_, y)| 1.0 + 14.0 / (1.0 + (y - 10.0).abs()))
            .unwrap();
        let sex = if g.random::<f64>() < 0.33 {
            "Female"
        } else {
            "Male"
        };
        let race = pick_weighted(RACES, &mut g);
        let workclass = *WORKCLASSES.choose(&mut g).unwrap();
        let marital = *MARITAL.choose(&mut g).unwrap();
        let occupation = *OCCUPATIONS.choose(&mut g).unwrap();
        let country = *COUNTRIES.choose(&mut g).unwrap();
        let hours = g.random_range(20..=60);
        let fnlwgt = g.random_range(20000..400000);
        let z = -3.2
            + 0.045 * (age as f64 - 38.0).min(20.0)
            + 0.38 * (edu_years - 9.0)
            + if sex == "Female" { -0.9 } else { 0.0 }
            + if race == "White" { 0.15 } else { 0.0 }
            + 0.02 * (hours as f64 - 40.0);
        let income = if g.random::<f64>() < sigmoid(z) {
            ">50K"
        } else {
            "<=50K"
        };
        let capital_gain = if g.random::<f64>() < 0.05 {
            g.random_range(1000..20000)
        } else {
            0
        };
        rows.push(vec![
            age.to_string(),
            workclass.to_string(),
            fnlwgt.to_string(),
            education.to_string(),
            format!("{edu_years}"),
            marital.to_string(),
            occupation.to_string(),
            race.to_string(),
            sex.to_string(),
            capital_gain.to_string(),
            "0".to_string(),
            hours.to_string(),
            country.to_string(),
            income.to_string(),
        ]);
    }
    // Blank out one of the usual columns in a fixed number of rows.
    let mut idx: Vec<usize> = (0..TOTAL).collect();
    idx.shuffle(&mut g);
    for (k, &i) in idx[..INCOMPLETE].iter().enumerate() {
        let col = [1usize, 6, 12][k % 3]; // workclass, occupation, country
        rows[i][col] = "?".to_string();
    }
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        w,
        "age,workclass,fnlwgt,education,education-num,marital-status,occupation,race,sex,capital-gain,capital-loss,hours-per-week,native-country,income"
    )?;
    for row in rows {
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Write an expenditure-survey-style CSV with the five utilization
/// component columns. Rates are calibrated so the fraction of rows with
/// total utilization >= 10 lands near 0.17, higher among older and
/// non-White-non-Hispanic-coded respondents so the groups differ.
pub fn write_meps_like(path: &Path, seed: u64, n: usize) -> Result<()> {
    let mut g = rng::stream_rng(seed, 1);
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        w,
        "AGELAST,SEX,RACEV2X,HISPANX,POVCAT15,RTHLTH53,OBTOTV15,OPTOTV15,ERTOT15,IPNGTD15,HHTOTD16"
    )?;
    for _ in 0..n {
        let age = g.random_range(18..=85);
        let sex = g.random_range(1..=2);
        let racev2x = if g.random::<f64>() < 0.72 {
            1
        } else {
            g.random_range(2..=6)
        };
        let hispanx = if g.random::<f64>() < 0.82 { 2 } else { 1 };
        let povcat = g.random_range(1..=5);
        let health = g.random_range(1..=5);
        let white = racev2x == 1 && hispanx == 2;
        let frailty: f64 = Normal::new(0.0, 0.85).unwrap().sample(&mut g);
        let log_rate = 1.02
            + 0.016 * (age as f64 - 45.0)
            + 0.30 * (health as f64 - 3.0)
            + if white { 0.18 } else { -0.12 }
            + frailty;
        let total_rate = log_rate.exp().clamp(0.02, 120.0);
        // Split the person-level rate across the five visit types.
        let shares = [0.55, 0.20, 0.10, 0.05, 0.10];
        let mut counts = [0u32; 5];
        for (c, share) in counts.iter_mut().zip(shares) {
            *c = Poisson::new((total_rate * share).max(1e-9))
                .unwrap()
                .sample(&mut g) as u32;
        }
        writeln!(
            w,
            "{age},{sex},{racev2x},{hispanx},{povcat},{health},{},{},{},{},{}",
            counts[0], counts[1], counts[2], counts[3], counts[4]
        )?;
    }
    w.flush()?;
    Ok(())
}
