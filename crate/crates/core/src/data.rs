//! Raw input values and CSV datasets.
//!
//! Pointwise data is one row per sample with a label column. Ranking data
//! comes either as one row per pair with every feature present twice, with
//! suffixes `+` and `-` (or `−`), or as two rows per pair sharing a pair-id
//! column, where the row with the larger label is preferred.

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use crate::calibration::{FeatureKind, FeatureSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Number(f64),
    Category(String),
    Missing,
}

impl Value {
    pub fn is_missing(&self) -> bool {
        matches!(self, Value::Missing)
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Number(x)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Category(s.to_string())
    }
}

/// Labelled samples, one row of feature values per sample.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub rows: Vec<Vec<Value>>,
    pub labels: Vec<f64>,
}

impl Dataset {
    pub fn new(rows: Vec<Vec<Value>>, labels: Vec<f64>) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::Data(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        Ok(Self { rows, labels })
    }

    /// Builds a dataset of purely numeric features.
    pub fn from_numeric(rows: &[Vec<f64>], labels: &[f64]) -> Result<Self> {
        Self::new(
            rows.iter()
                .map(|r| r.iter().map(|&x| Value::Number(x)).collect())
                .collect(),
            labels.to_vec(),
        )
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Preference pairs: `preferred[i]` should score above `other[i]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PairDataset {
    pub preferred: Vec<Vec<Value>>,
    pub other: Vec<Vec<Value>>,
}

impl PairDataset {
    pub fn new(preferred: Vec<Vec<Value>>, other: Vec<Vec<Value>>) -> Result<Self> {
        if preferred.len() != other.len() {
            return Err(Error::Data("pair sides differ in length".into()));
        }
        Ok(Self { preferred, other })
    }

    pub fn len(&self) -> usize {
        self.preferred.len()
    }

    pub fn is_empty(&self) -> bool {
        self.preferred.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainingData {
    Samples(Dataset),
    Pairs(PairDataset),
}

impl TrainingData {
    pub fn len(&self) -> usize {
        match self {
            TrainingData::Samples(d) => d.len(),
            TrainingData::Pairs(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Layout of ranking CSV files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PairFormat {
    /// One row per pair, columns `name+` and `name-`.
    Columns,
    /// Two rows per pair linked by the named id column; the larger label wins.
    Grouped { pair_id: String },
}

/// CSV parsing options.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvOptions {
    pub missing_token: String,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            missing_token: String::new(),
        }
    }
}

fn parse_cell(raw: &str, spec: &FeatureSpec, options: &CsvOptions, line: usize) -> Result<Value> {
    let cell = raw.trim();
    if cell == options.missing_token {
        return Ok(Value::Missing);
    }
    match spec.kind {
        FeatureKind::Continuous => cell.parse::<f64>().map(Value::Number).map_err(|_| {
            Error::Data(format!(
                "line {line}: feature {:?} expects a number, got {cell:?}",
                spec.name
            ))
        }),
        FeatureKind::Categorical => Ok(Value::Category(cell.to_string())),
    }
}

struct Table {
    header: Vec<String>,
    records: Vec<csv::StringRecord>,
}

fn read_table<R: Read>(reader: R) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let header = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let records = rdr.records().collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(Table { header, records })
}

impl Table {
    fn column(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Data(format!("missing column {name:?}")))
    }

    fn columns_for(&self, features: &[FeatureSpec], suffix: &[&str]) -> Result<Vec<usize>> {
        features
            .iter()
            .map(|f| {
                suffix
                    .iter()
                    .find_map(|s| self.column(&format!("{}{s}", f.name)).ok())
                    .ok_or_else(|| Error::Data(format!("missing column {:?}{}", f.name, suffix[0])))
            })
            .collect()
    }

    fn row_values(
        &self,
        record: &csv::StringRecord,
        columns: &[usize],
        features: &[FeatureSpec],
        options: &CsvOptions,
        line: usize,
    ) -> Result<Vec<Value>> {
        columns
            .iter()
            .zip(features)
            .map(|(&c, spec)| parse_cell(&record[c], spec, options, line))
            .collect()
    }
}

fn parse_label(raw: &str, line: usize) -> Result<f64> {
    raw.trim()
        .parse::<f64>()
        .ok()
        .filter(|y| y.is_finite())
        .ok_or_else(|| Error::Data(format!("line {line}: bad label {raw:?}")))
}

/// Reads feature rows (and the label column, if given) from CSV. Returns an
/// empty dataset for completely empty input.
pub fn read_dataset<R: Read>(
    reader: R,
    features: &[FeatureSpec],
    label: Option<&str>,
    options: &CsvOptions,
) -> Result<Dataset> {
    let table = read_table(reader)?;
    if table.header.is_empty() || table.header == [""] && table.records.is_empty() {
        return Ok(Dataset::default());
    }
    let columns = table.columns_for(features, &[""])?;
    let label_col = label.map(|l| table.column(l)).transpose()?;
    let mut rows = Vec::with_capacity(table.records.len());
    let mut labels = Vec::with_capacity(table.records.len());
    for (i, record) in table.records.iter().enumerate() {
        let line = i + 2;
        rows.push(table.row_values(record, &columns, features, options, line)?);
        labels.push(match label_col {
            Some(c) => parse_label(&record[c], line)?,
            None => 0.0,
        });
    }
    Dataset::new(rows, labels)
}

pub fn read_dataset_file(
    path: &Path,
    features: &[FeatureSpec],
    label: Option<&str>,
    options: &CsvOptions,
) -> Result<Dataset> {
    read_dataset(std::fs::File::open(path)?, features, label, options)
}

/// Column names from the header row of a CSV file.
pub fn read_header(path: &Path) -> Result<Vec<String>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    Ok(rdr.headers()?.iter().map(|h| h.trim().to_string()).collect())
}

pub fn read_pairs<R: Read>(
    reader: R,
    features: &[FeatureSpec],
    format: &PairFormat,
    label: &str,
    options: &CsvOptions,
) -> Result<PairDataset> {
    let table = read_table(reader)?;
    match format {
        PairFormat::Columns => {
            let plus = table.columns_for(features, &["+"])?;
            let minus = table.columns_for(features, &["-", "\u{2212}"])?;
            let mut pairs = PairDataset::default();
            for (i, record) in table.records.iter().enumerate() {
                pairs
                    .preferred
                    .push(table.row_values(record, &plus, features, options, i + 2)?);
                pairs
                    .other
                    .push(table.row_values(record, &minus, features, options, i + 2)?);
            }
            Ok(pairs)
        }
        PairFormat::Grouped { pair_id } => {
            let id_col = table.column(pair_id)?;
            let label_col = table.column(label)?;
            let columns = table.columns_for(features, &[""])?;
            let mut order: Vec<String> = Vec::new();
            let mut groups: HashMap<String, Vec<(f64, Vec<Value>)>> = HashMap::new();
            for (i, record) in table.records.iter().enumerate() {
                let id = record[id_col].trim().to_string();
                let y = parse_label(&record[label_col], i + 2)?;
                let row = table.row_values(record, &columns, features, options, i + 2)?;
                let entry = groups.entry(id.clone()).or_default();
                if entry.is_empty() {
                    order.push(id);
                }
                entry.push((y, row));
            }
            let mut pairs = PairDataset::default();
            for id in order {
                let mut group = groups.remove(&id).expect("id recorded");
                if group.len() != 2 {
                    return Err(Error::Data(format!(
                        "pair {id:?} has {} rows, expected 2",
                        group.len()
                    )));
                }
                if group[0].0 == group[1].0 {
                    return Err(Error::Data(format!("pair {id:?} has tied labels")));
                }
                if group[0].0 < group[1].0 {
                    group.swap(0, 1);
                }
                let (_, other) = group.pop().expect("two rows");
                let (_, preferred) = group.pop().expect("two rows");
                pairs.preferred.push(preferred);
                pairs.other.push(other);
            }
            Ok(pairs)
        }
    }
}

pub fn read_pairs_file(
    path: &Path,
    features: &[FeatureSpec],
    format: &PairFormat,
    label: &str,
    options: &CsvOptions,
) -> Result<PairDataset> {
    read_pairs(std::fs::File::open(path)?, features, format, label, options)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn features() -> Vec<FeatureSpec> {
        vec![
            FeatureSpec::continuous("dist"),
            FeatureSpec::categorical("country"),
        ]
    }

    #[test]
    fn reads_pointwise_rows_with_missing_cells() {
        let csv = "country,dist,label\nUS,1.5,1\n,NA,0\nBR,NA,1\n";
        let opts = CsvOptions { missing_token: "NA".into() };
        let d = read_dataset(csv.as_bytes(), &features(), Some("label"), &opts).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.rows[0], vec![Value::Number(1.5), Value::Category("US".into())]);
        assert_eq!(d.rows[1], vec![Value::Missing, Value::Category("".into())]);
        assert_eq!(d.labels, vec![1.0, 0.0, 1.0]);

        let d = read_dataset(csv.as_bytes(), &features(), Some("label"), &CsvOptions::default());
        assert!(matches!(d, Err(Error::Data(_))));
    }

    #[test]
    fn empty_input_gives_empty_dataset() {
        let d = read_dataset("".as_bytes(), &features(), Some("label"), &CsvOptions::default()).unwrap();
        assert!(d.is_empty());
        let d = read_dataset("dist,country,label\n".as_bytes(), &features(), Some("label"), &CsvOptions::default())
            .unwrap();
        assert!(d.is_empty());
    }

    #[test]
    fn reports_missing_columns() {
        let err = read_dataset("dist,label\n1,0\n".as_bytes(), &features(), Some("label"), &CsvOptions::default())
            .unwrap_err();
        assert!(err.to_string().contains("country"));
    }

    #[test]
    fn reads_paired_columns() {
        let csv = "dist+,country+,dist-,country\u{2212}\n1,US,2,BR\n";
        let p = read_pairs(csv.as_bytes(), &features(), &PairFormat::Columns, "label", &CsvOptions::default())
            .unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.preferred[0][0], Value::Number(1.0));
        assert_eq!(p.other[0][1], Value::Category("BR".into()));
    }

    #[test]
    fn reads_grouped_pairs() {
        let csv = "qid,dist,country,label\na,1,US,0\na,2,BR,1\nb,3,DE,2\nb,4,GB,1\n";
        let fmt = PairFormat::Grouped { pair_id: "qid".into() };
        let p = read_pairs(csv.as_bytes(), &features(), &fmt, "label", &CsvOptions::default()).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.preferred[0][0], Value::Number(2.0));
        assert_eq!(p.other[0][0], Value::Number(1.0));
        assert_eq!(p.preferred[1][0], Value::Number(3.0));

        let bad = "qid,dist,country,label\na,1,US,0\n";
        assert!(read_pairs(bad.as_bytes(), &features(), &fmt, "label", &CsvOptions::default()).is_err());
    }
}
