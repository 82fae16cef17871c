//! Core data model: finite weighted datasets, fair-label derivation, and
//! the canonical CSV dump format.
//!
//! A dataset is a finite set of instances drawn from an empirical feature
//! distribution given by per-instance weights (normalized to sum to 1).
//! Instances optionally carry a true outcome probability `p_star` and a
//! sampled binary label `y_star`. Fair labels `f_star` are derived from
//! `p_star` by a strict threshold rule: `f_star = 1` exactly when
//! `p_star > tau`.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// A single data point: feature vector, group id, optional outcome
/// probability and sampled label, and a nonnegative sampling weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub id: usize,
    pub features: Vec<f64>,
    pub group: u32,
    pub p_star: Option<f64>,
    pub y_star: Option<u8>,
    pub weight: f64,
}

impl Instance {
    /// Instance with a known outcome probability and unit weight.
    pub fn probabilistic(id: usize, features: Vec<f64>, group: u32, p_star: f64) -> Self {
        Instance {
            id,
            features,
            group,
            p_star: Some(p_star),
            y_star: None,
            weight: 1.0,
        }
    }

    /// Instance with only a sampled label and unit weight.
    pub fn sampled(id: usize, features: Vec<f64>, group: u32, y_star: u8) -> Self {
        Instance {
            id,
            features,
            group,
            p_star: None,
            y_star: Some(y_star),
            weight: 1.0,
        }
    }
}

/// Name and origin of one feature column. `source` is the base feature a
/// one-hot column was expanded from (equal to `name` for plain columns),
/// so dropping a base feature removes its whole expansion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureColumn {
    pub name: String,
    pub source: String,
}

impl FeatureColumn {
    pub fn plain(name: &str) -> Self {
        FeatureColumn {
            name: name.to_string(),
            source: name.to_string(),
        }
    }

    pub fn expanded(name: String, source: &str) -> Self {
        FeatureColumn {
            name,
            source: source.to_string(),
        }
    }
}

/// Finite weighted dataset. Immutable after construction; all operations
/// that change contents return a new dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    instances: Vec<Instance>,
    columns: Vec<FeatureColumn>,
    weights_normalized: bool,
    group_count: u32,
}

/// Threshold and the derived deterministic labels, aligned with instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairLabeling {
    pub tau: f64,
    pub f_star: Vec<u8>,
}

impl LabeledDataset {
    /// Build a dataset from rows: validates invariants, normalizes weights
    /// to sum to 1, and reindexes instances 0..n-1. Columns are named
    /// `f0..fk`.
    pub fn build(rows: Vec<Instance>) -> Result<Self> {
        let arity = rows.first().map(|r| r.features.len()).unwrap_or(0);
        let columns = (0..arity)
            .map(|j| FeatureColumn::plain(&format!("f{j}")))
            .collect();
        Self::build_with_columns(rows, columns)
    }

    /// As [`build`](Self::build) with explicit column metadata.
    pub fn build_with_columns(
        mut rows: Vec<Instance>,
        columns: Vec<FeatureColumn>,
    ) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let arity = columns.len();
        let has_p = rows[0].p_star.is_some();
        let has_y = rows[0].y_star.is_some();
        let mut weight_sum = 0.0;
        for (i, row) in rows.iter().enumerate() {
            if row.features.len() != arity {
                return Err(Error::InconsistentArity {
                    index: i,
                    expected: arity,
                    got: row.features.len(),
                });
            }
            if row.p_star.is_some() != has_p {
                return Err(Error::MixedPstarPresence);
            }
            if row.y_star.is_some() != has_y {
                return Err(Error::MixedYstarPresence);
            }
            if let Some(p) = row.p_star {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::PstarOutOfRange { index: i, value: p });
                }
            }
            let weight_ok = row.weight.is_finite() && row.weight > 0.0;
            if !weight_ok {
                return Err(Error::NonPositiveWeight {
                    index: i,
                    weight: row.weight,
                });
            }
            weight_sum += row.weight;
        }
        // Skip the division when the weights already sum to one, so
        // rebuilding a normalized dataset (or reloading its dump) keeps
        // the weights bit-identical.
        let needs_normalization = (weight_sum - 1.0).abs() > 1e-12;
        let mut group_count = 0;
        for (i, row) in rows.iter_mut().enumerate() {
            row.id = i;
            if needs_normalization {
                row.weight /= weight_sum;
            }
            group_count = group_count.max(row.group + 1);
        }
        Ok(LabeledDataset {
            instances: rows,
            columns,
            weights_normalized: true,
            group_count,
        })
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn columns(&self) -> &[FeatureColumn] {
        &self.columns
    }

    pub fn feature_arity(&self) -> usize {
        self.columns.len()
    }

    /// Number of group ids (max id + 1).
    pub fn group_count(&self) -> u32 {
        self.group_count
    }

    pub fn weights_normalized(&self) -> bool {
        self.weights_normalized
    }

    /// True when every instance carries a `p_star` annotation.
    pub fn is_probabilistic(&self) -> bool {
        self.instances.first().is_some_and(|r| r.p_star.is_some())
    }

    /// True when every instance carries a sampled `y_star` label.
    pub fn has_sampled_labels(&self) -> bool {
        self.instances.first().is_some_and(|r| r.y_star.is_some())
    }

    /// Outcome probabilities, or an error on sampled-only datasets.
    pub fn p_star(&self) -> Result<Vec<f64>> {
        if !self.is_probabilistic() {
            return Err(Error::MissingPstar);
        }
        Ok(self.instances.iter().map(|r| r.p_star.unwrap()).collect())
    }

    /// Sampled labels, or an error when absent.
    pub fn y_star(&self) -> Result<Vec<u8>> {
        if !self.has_sampled_labels() {
            return Err(Error::MissingYstar);
        }
        Ok(self.instances.iter().map(|r| r.y_star.unwrap()).collect())
    }

    /// Total weight per group id.
    pub fn group_weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.group_count as usize];
        for r in &self.instances {
            w[r.group as usize] += r.weight;
        }
        w
    }

    /// Derive the fair labeling at threshold `tau`: `f_star = 1` exactly
    /// when `p_star > tau` (strict), else 0.
    pub fn fair_labels(&self, tau: f64) -> Result<FairLabeling> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(Error::ParamOutOfRange {
                name: "tau",
                value: tau,
                lo: 0.0,
                hi: 1.0,
            });
        }
        let p = self.p_star()?;
        let f_star = p.iter().map(|&pi| u8::from(pi > tau)).collect();
        Ok(FairLabeling { tau, f_star })
    }

    /// Resample `y_star ~ Bernoulli(p_star)` with one derived stream per
    /// instance; the same seed reproduces identical labels.
    pub fn sample_y_star(&self, seed: u64) -> Result<LabeledDataset> {
        let p = self.p_star()?;
        let mut out = self.clone();
        for (i, r) in out.instances.iter_mut().enumerate() {
            let mut g = rng::stream_rng(seed, i as u64);
            r.y_star = Some(u8::from(g.random::<f64>() < p[i]));
        }
        Ok(out)
    }

    /// Remove the named features. Names match either a column name or the
    /// source feature of a one-hot expansion, which removes the whole block.
    pub fn drop_features(&self, names: &[&str]) -> Result<LabeledDataset> {
        let known: BTreeSet<&str> = self
            .columns
            .iter()
            .flat_map(|c| [c.name.as_str(), c.source.as_str()])
            .collect();
        for name in names {
            if !known.contains(name) {
                return Err(Error::UnknownFeature {
                    name: name.to_string(),
                });
            }
        }
        let drop: BTreeSet<&str> = names.iter().copied().collect();
        let keep: Vec<usize> = self
            .columns
            .iter()
            .enumerate()
            .filter(|(_, c)| !drop.contains(c.name.as_str()) && !drop.contains(c.source.as_str()))
            .map(|(j, _)| j)
            .collect();
        if keep.is_empty() {
            return Err(Error::NoFeaturesRemain);
        }
        let columns = keep.iter().map(|&j| self.columns[j].clone()).collect();
        let mut out = self.clone();
        out.columns = columns;
        for r in &mut out.instances {
            r.features = keep.iter().map(|&j| r.features[j]).collect();
        }
        Ok(out)
    }

    /// Seeded, group-stratified train/test split. Disjoint and exhaustive;
    /// per-group sizes are `round(fraction * n_group)`.
    pub fn split_train_test(
        &self,
        fraction: f64,
        seed: u64,
    ) -> Result<(LabeledDataset, LabeledDataset)> {
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(Error::InvalidFraction { fraction });
        }
        let mut train_idx = Vec::new();
        let mut test_idx = Vec::new();
        for group in 0..self.group_count {
            let mut idx: Vec<usize> = self
                .instances
                .iter()
                .filter(|r| r.group == group)
                .map(|r| r.id)
                .collect();
            let mut g = rng::stream_rng(seed, group as u64);
            idx.shuffle(&mut g);
            let k = (fraction * idx.len() as f64).round() as usize;
            train_idx.extend_from_slice(&idx[..k]);
            test_idx.extend_from_slice(&idx[k..]);
        }
        if train_idx.is_empty() {
            return Err(Error::EmptySplit { side: "train" });
        }
        if test_idx.is_empty() {
            return Err(Error::EmptySplit { side: "test" });
        }
        train_idx.sort_unstable();
        test_idx.sort_unstable();
        let take = |idx: &[usize]| -> Result<LabeledDataset> {
            let rows = idx.iter().map(|&i| self.instances[i].clone()).collect();
            LabeledDataset::build_with_columns(rows, self.columns.clone())
        };
        Ok((take(&train_idx)?, take(&test_idx)?))
    }

    /// Write the canonical CSV dump: `id,group,weight,p_star,y_star[,f_star]`
    /// then one column per feature. Optional columns are blank when absent.
    pub fn write_csv<W: Write>(&self, writer: W, labeling: Option<&FairLabeling>) -> Result<()> {
        if let Some(fl) = labeling {
            if fl.f_star.len() != self.len() {
                return Err(Error::LengthMismatch {
                    expected: self.len(),
                    got: fl.f_star.len(),
                });
            }
        }
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec![
            "id".to_string(),
            "group".to_string(),
            "weight".to_string(),
            "p_star".to_string(),
            "y_star".to_string(),
        ];
        if labeling.is_some() {
            header.push("f_star".to_string());
        }
        header.extend(self.columns.iter().map(|c| c.name.clone()));
        w.write_record(&header)?;
        for (i, r) in self.instances.iter().enumerate() {
            let mut rec = vec![
                r.id.to_string(),
                r.group.to_string(),
                format!("{}", r.weight),
                r.p_star.map(|p| format!("{p}")).unwrap_or_default(),
                r.y_star.map(|y| y.to_string()).unwrap_or_default(),
            ];
            if let Some(fl) = labeling {
                rec.push(fl.f_star[i].to_string());
            }
            rec.extend(r.features.iter().map(|x| format!("{x}")));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Write the canonical CSV dump to a file path.
    pub fn write_csv_path(&self, path: &Path, labeling: Option<&FairLabeling>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file), labeling)
    }

    /// Read a canonical CSV dump. All columns after the reserved prefix
    /// (`id,group,weight,p_star,y_star[,f_star]`) are features; one-hot
    /// sources are recovered from `name=value` column names.
    pub fn read_csv_path(path: &Path) -> Result<LabeledDataset> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(file))
    }

    pub fn read_csv<R: std::io::Read>(reader: R) -> Result<LabeledDataset> {
        let mut rd = csv::Reader::from_reader(reader);
        let header = rd.headers()?.clone();
        let names: Vec<&str> = header.iter().collect();
        let reserved = ["id", "group", "weight", "p_star", "y_star", "f_star"];
        for req in &reserved[..5] {
            if !names.contains(req) {
                return Err(Error::MissingColumn {
                    name: req.to_string(),
                });
            }
        }
        let col = |n: &str| names.iter().position(|h| *h == n);
        let id_c = col("id").unwrap();
        let group_c = col("group").unwrap();
        let weight_c = col("weight").unwrap();
        let p_c = col("p_star").unwrap();
        let y_c = col("y_star").unwrap();
        let feature_cols: Vec<(usize, FeatureColumn)> = names
            .iter()
            .enumerate()
            .filter(|(_, n)| !reserved.contains(n))
            .map(|(j, n)| {
                let source = n.split_once('=').map(|(s, _)| s).unwrap_or(n);
                (j, FeatureColumn::expanded(n.to_string(), source))
            })
            .collect();
        let mut rows = Vec::new();
        for (line, rec) in rd.records().enumerate() {
            let rec = rec?;
            let row = line + 2;
            let parse_f64 = |s: &str, what: &str| -> Result<f64> {
                s.trim().parse::<f64>().map_err(|_| Error::BadRow {
                    row,
                    reason: format!("cannot parse {what} {s:?}"),
                })
            };
            let get = |j: usize| rec.get(j).unwrap_or("");
            let p_star = match get(p_c).trim() {
                "" => None,
                s => Some(parse_f64(s, "p_star")?),
            };
            let y_star =
                match get(y_c).trim() {
                    "" => None,
                    s => Some(s.parse::<u8>().ok().filter(|v| *v <= 1).ok_or_else(|| {
                        Error::BadRow {
                            row,
                            reason: format!("cannot parse y_star {s:?}"),
                        }
                    })?),
                };
            let features = feature_cols
                .iter()
                .map(|(j, c)| parse_f64(get(*j), &c.name))
                .collect::<Result<Vec<f64>>>()?;
            rows.push(Instance {
                id: get(id_c).trim().parse().map_err(|_| Error::BadRow {
                    row,
                    reason: format!("cannot parse id {:?}", get(id_c)),
                })?,
                group: get(group_c).trim().parse().map_err(|_| Error::BadRow {
                    row,
                    reason: format!("cannot parse group {:?}", get(group_c)),
                })?,
                p_star,
                y_star,
                weight: parse_f64(get(weight_c), "weight")?,
                features,
            });
        }
        let columns = feature_cols.into_iter().map(|(_, c)| c).collect();
        LabeledDataset::build_with_columns(rows, columns)
    }
}
