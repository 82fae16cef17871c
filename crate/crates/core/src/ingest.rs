//! CSV ingestion driven by a column schema: numeric, categorical, and
//! bucketized feature columns, a label rule, and a group rule.
//!
//! Categorical and bucketized columns are one-hot encoded with a
//! deterministic category order (lexicographic over observed values), so
//! loading the same file twice yields byte-identical datasets. Rows with
//! missing fields are dropped and counted in the ingestion report.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{FeatureColumn, Instance, LabeledDataset};
use crate::error::{Error, Result};

/// How one raw column turns into features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ColumnKind {
    /// Parsed as f64 and used directly.
    Numeric,
    /// One-hot encoded over the observed categories.
    Categorical,
    /// Parsed as f64, binned at the given edges, then one-hot encoded.
    Bucketized { edges: Vec<f64> },
}

/// One feature column of the schema. `rename` sets the feature name used
/// in the output (defaults to the raw column name).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub column: String,
    #[serde(flatten)]
    pub kind: ColumnKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rename: Option<String>,
}

impl ColumnSpec {
    fn feature_name(&self) -> &str {
        self.rename.as_deref().unwrap_or(&self.column)
    }
}

/// Rule producing the binary label for each row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum LabelRule {
    /// Label 1 when the column value is in the positive set.
    ValueIn {
        column: String,
        positive: Vec<String>,
    },
    /// Label 1 when the sum of the named numeric columns is >= threshold.
    SumAtLeast {
        columns: Vec<String>,
        threshold: f64,
    },
}

/// Rule producing the group id for each row: `on_match` when every
/// condition column equals its value, `otherwise` if not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRule {
    pub conditions: Vec<(String, String)>,
    pub on_match: u32,
    pub otherwise: u32,
}

/// Full ingestion schema: feature columns, exactly one label rule, and
/// exactly one group rule. Serializes to/from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub columns: Vec<ColumnSpec>,
    pub label: LabelRule,
    pub group: GroupRule,
    /// Field values treated as missing.
    #[serde(default = "default_missing_markers")]
    pub missing_markers: Vec<String>,
    /// Drop a row when any field of the file is missing (not just
    /// schema-used ones). Matches complete-case preprocessing.
    #[serde(default = "default_true")]
    pub drop_if_any_missing: bool,
}

fn default_missing_markers() -> Vec<String> {
    vec!["?".to_string(), String::new()]
}

fn default_true() -> bool {
    true
}

/// Counts from one ingestion run.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct IngestReport {
    pub rows_read: usize,
    pub rows_kept: usize,
    pub rows_dropped_missing: usize,
}

impl ColumnSchema {
    pub fn from_json(text: &str) -> Result<ColumnSchema> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serializes")
    }

    /// Schema for the adult census income file: features age-groups
    /// (decade buckets), education-levels, race, and sex; label 1 for
    /// income above 50K; group 1 for Female.
    pub fn adult_default() -> ColumnSchema {
        ColumnSchema {
            columns: vec![
                ColumnSpec {
                    column: "age".into(),
                    kind: ColumnKind::Bucketized {
                        edges: vec![25.0, 35.0, 45.0, 55.0, 65.0],
                    },
                    rename: Some("age-groups".into()),
                },
                ColumnSpec {
                    column: "education".into(),
                    kind: ColumnKind::Categorical,
                    rename: Some("education-levels".into()),
                },
                ColumnSpec {
                    column: "race".into(),
                    kind: ColumnKind::Categorical,
                    rename: None,
                },
                ColumnSpec {
                    column: "sex".into(),
                    kind: ColumnKind::Categorical,
                    rename: None,
                },
            ],
            label: LabelRule::ValueIn {
                column: "income".into(),
                positive: vec![">50K".into(), ">50K.".into()],
            },
            group: GroupRule {
                conditions: vec![("sex".into(), "Female".into())],
                on_match: 1,
                otherwise: 0,
            },
            missing_markers: default_missing_markers(),
            drop_if_any_missing: true,
        }
    }

    /// Schema for the medical expenditure survey file: label 1 when total
    /// utilization (sum of five visit-count columns) is at least 10;
    /// group 0 for White non-Hispanic respondents, 1 otherwise.
    pub fn meps_default() -> ColumnSchema {
        ColumnSchema {
            columns: vec![
                ColumnSpec {
                    column: "AGELAST".into(),
                    kind: ColumnKind::Numeric,
                    rename: None,
                },
                ColumnSpec {
                    column: "SEX".into(),
                    kind: ColumnKind::Categorical,
                    rename: None,
                },
                ColumnSpec {
                    column: "POVCAT15".into(),
                    kind: ColumnKind::Categorical,
                    rename: None,
                },
                ColumnSpec {
                    column: "RTHLTH53".into(),
                    kind: ColumnKind::Numeric,
                    rename: None,
                },
            ],
            label: LabelRule::SumAtLeast {
                columns: vec![
                    "OBTOTV15".into(),
                    "OPTOTV15".into(),
                    "ERTOT15".into(),
                    "IPNGTD15".into(),
                    "HHTOTD16".into(),
                ],
                threshold: 10.0,
            },
            group: GroupRule {
                conditions: vec![
                    ("RACEV2X".into(), "1".into()),
                    ("HISPANX".into(), "2".into()),
                ],
                on_match: 0,
                otherwise: 1,
            },
            missing_markers: default_missing_markers(),
            drop_if_any_missing: true,
        }
    }

    fn referenced_columns(&self) -> Vec<&str> {
        let mut out: Vec<&str> = self.columns.iter().map(|c| c.column.as_str()).collect();
        match &self.label {
            LabelRule::ValueIn { column, .. } => out.push(column),
            LabelRule::SumAtLeast { columns, .. } => out.extend(columns.iter().map(|c| c.as_str())),
        }
        out.extend(self.group.conditions.iter().map(|(c, _)| c.as_str()));
        out
    }
}

fn bucket_label(edges: &[f64], value: f64) -> String {
    if value < edges[0] {
        return format!("<{}", edges[0]);
    }
    for w in edges.windows(2) {
        if value < w[1] {
            return format!("{}-{}", w[0], w[1]);
        }
    }
    format!(">={}", edges[edges.len() - 1])
}

/// Parsed intermediate value of one schema column for one row.
enum CellValue {
    Number(f64),
    Category(String),
}

/// Load a headered CSV through a schema: returns a sampled dataset
/// (y_star only, unit weights normalized) plus the ingestion report.
pub fn load_csv(path: &Path, schema: &ColumnSchema) -> Result<(LabeledDataset, IngestReport)> {
    let file = std::fs::File::open(path)?;
    let mut rd = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(std::io::BufReader::new(file));
    let header = rd.headers()?.clone();
    let names: Vec<&str> = header.iter().collect();
    let position = |name: &str| -> Result<usize> {
        names
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| Error::MissingColumn {
                name: name.to_string(),
            })
    };
    for name in schema.referenced_columns() {
        position(name)?;
    }
    let missing: BTreeSet<&str> = schema.missing_markers.iter().map(|s| s.as_str()).collect();

    let mut report = IngestReport::default();
    let mut parsed: Vec<(Vec<CellValue>, u8, u32)> = Vec::new();
    'rows: for (line, rec) in rd.records().enumerate() {
        let rec = rec?;
        let row = line + 2;
        report.rows_read += 1;
        if schema.drop_if_any_missing {
            if rec.iter().any(|field| missing.contains(field)) {
                report.rows_dropped_missing += 1;
                continue;
            }
        } else {
            for name in schema.referenced_columns() {
                let v = rec.get(position(name)?).unwrap_or("");
                if missing.contains(v) {
                    report.rows_dropped_missing += 1;
                    continue 'rows;
                }
            }
        }
        let field = |name: &str| -> Result<&str> { Ok(rec.get(position(name)?).unwrap_or("")) };
        let numeric = |name: &str| -> Result<f64> {
            let raw = field(name)?;
            raw.parse::<f64>().map_err(|_| Error::BadRow {
                row,
                reason: format!("cannot parse {name} value {raw:?} as a number"),
            })
        };
        let mut cells = Vec::with_capacity(schema.columns.len());
        for spec in &schema.columns {
            let cell = match &spec.kind {
                ColumnKind::Numeric => CellValue::Number(numeric(&spec.column)?),
                ColumnKind::Categorical => CellValue::Category(field(&spec.column)?.to_string()),
                ColumnKind::Bucketized { edges } => {
                    CellValue::Category(bucket_label(edges, numeric(&spec.column)?))
                }
            };
            cells.push(cell);
        }
        let y_star = match &schema.label {
            LabelRule::ValueIn { column, positive } => {
                u8::from(positive.iter().any(|p| p == field(column).unwrap_or("")))
            }
            LabelRule::SumAtLeast { columns, threshold } => {
                let mut sum = 0.0;
                for c in columns {
                    sum += numeric(c)?;
                }
                u8::from(sum >= *threshold)
            }
        };
        let matched = schema
            .group
            .conditions
            .iter()
            .all(|(c, v)| field(c).map(|f| f == v).unwrap_or(false));
        let group = if matched {
            schema.group.on_match
        } else {
            schema.group.otherwise
        };
        parsed.push((cells, y_star, group));
    }
    if parsed.is_empty() {
        return Err(Error::ZeroRows);
    }
    report.rows_kept = parsed.len();

    // Category inventory per categorical column, sorted for determinism.
    let mut categories: Vec<BTreeSet<String>> = vec![BTreeSet::new(); schema.columns.len()];
    for (cells, _, _) in &parsed {
        for (j, cell) in cells.iter().enumerate() {
            if let CellValue::Category(c) = cell {
                categories[j].insert(c.clone());
            }
        }
    }
    let mut columns = Vec::new();
    for (j, spec) in schema.columns.iter().enumerate() {
        match spec.kind {
            ColumnKind::Numeric => columns.push(FeatureColumn::plain(spec.feature_name())),
            _ => {
                for cat in &categories[j] {
                    columns.push(FeatureColumn::expanded(
                        format!("{}={}", spec.feature_name(), cat),
                        spec.feature_name(),
                    ));
                }
            }
        }
    }

    let mut rows = Vec::with_capacity(parsed.len());
    for (i, (cells, y_star, group)) in parsed.iter().enumerate() {
        let mut features = Vec::with_capacity(columns.len());
        for (j, cell) in cells.iter().enumerate() {
            match cell {
                CellValue::Number(x) => features.push(*x),
                CellValue::Category(c) => {
                    for cat in &categories[j] {
                        features.push(if cat == c { 1.0 } else { 0.0 });
                    }
                }
            }
        }
        rows.push(Instance::sampled(i, features, *group, *y_star));
    }
    let ds = LabeledDataset::build_with_columns(rows, columns)?;
    Ok((ds, report))
}
