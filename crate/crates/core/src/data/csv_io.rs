use std::io::Read;
use std::path::Path;

use serde::Serialize;

use super::{is_missing, parse_number, Dataset, Encoding};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::Task;

/// Summary of one ingestion, emitted as JSON in verbose mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestionReport {
    pub rows_read: usize,
    pub rows_dropped: usize,
    pub encodings: Vec<FeatureEncoding>,
    /// Raw class labels mapped to 0 and 1 (classification only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classes: Option<[String; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureEncoding {
    pub feature: String,
    #[serde(flatten)]
    pub encoding: Encoding,
}

struct RawTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    /// Data-row index in the file of every entry of `rows`.
    positions: Vec<usize>,
    /// Rows whose field count differs from the header.
    ragged: usize,
}

fn read_table<R: Read>(reader: R) -> Result<RawTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(Error::EmptyData("no header row".into()));
    }
    let mut rows = Vec::new();
    let mut positions = Vec::new();
    let mut ragged = 0;
    for (idx, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != header.len() {
            ragged += 1;
            continue;
        }
        rows.push(rec.iter().map(str::to_owned).collect());
        positions.push(idx);
    }
    Ok(RawTable {
        header,
        rows,
        positions,
        ragged,
    })
}

/// Loads a CSV file with a header row. See [`read_csv`].
pub fn load_csv(
    path: impl AsRef<Path>,
    target: &str,
    task: Task,
) -> Result<(Dataset, IngestionReport)> {
    read_csv(crate::fsutil::open_input(path.as_ref())?, target, task)
}

/// Parses CSV text into a data set.
///
/// A feature column is numeric when every non-missing cell parses as a
/// number; otherwise it is ordinal, with codes in first-appearance order over
/// the kept rows. Rows with a missing token, a non-finite number or the
/// wrong number of fields are dropped. For classification the target must
/// have exactly two distinct values, mapped to 0 and 1 by sorted order
/// (numeric order when both parse as numbers).
pub fn read_csv<R: Read>(reader: R, target: &str, task: Task) -> Result<(Dataset, IngestionReport)> {
    let table = read_table(reader)?;
    let rows_read = table.rows.len() + table.ragged;
    if rows_read == 0 {
        return Err(Error::EmptyData("no data rows".into()));
    }
    let t_col = table
        .header
        .iter()
        .position(|h| h == target)
        .ok_or_else(|| Error::MissingTarget(target.to_owned()))?;
    let feat_cols: Vec<usize> = (0..table.header.len()).filter(|&j| j != t_col).collect();

    let numeric: Vec<bool> = feat_cols
        .iter()
        .map(|&j| {
            table
                .rows
                .iter()
                .map(|r| r[j].as_str())
                .filter(|c| !is_missing(c))
                .all(|c| c.parse::<f64>().is_ok())
        })
        .collect();

    let cell_ok = |cell: &str, numeric: bool| {
        !is_missing(cell) && (!numeric || parse_number(cell).is_some())
    };
    let kept: Vec<&Vec<String>> = table
        .rows
        .iter()
        .filter(|r| {
            feat_cols.iter().zip(&numeric).all(|(&j, &num)| cell_ok(&r[j], num))
                && cell_ok(&r[t_col], task == Task::Regression)
        })
        .collect();
    let rows_dropped = rows_read - kept.len();
    if kept.is_empty() {
        return Err(Error::EmptyData(format!(
            "all {rows_read} rows were dropped for missing or unparseable cells"
        )));
    }

    let encodings: Vec<Encoding> = feat_cols
        .iter()
        .zip(&numeric)
        .map(|(&j, &num)| {
            if num {
                return Encoding::Numeric;
            }
            let mut categories: Vec<String> = Vec::new();
            for r in &kept {
                if !categories.contains(&r[j]) {
                    categories.push(r[j].clone());
                }
            }
            Encoding::Ordinal { categories }
        })
        .collect();

    let d = feat_cols.len();
    let mut x = Vec::with_capacity(kept.len() * d);
    for r in &kept {
        for (&j, enc) in feat_cols.iter().zip(&encodings) {
            x.push(enc.encode(&r[j]).expect("cell validated above"));
        }
    }

    let (y, classes) = match task {
        Task::Regression => (
            kept.iter().map(|r| parse_number(&r[t_col]).expect("validated")).collect(),
            None,
        ),
        Task::BinaryClassification => {
            let mut distinct: Vec<&str> = Vec::new();
            for r in &kept {
                if !distinct.contains(&r[t_col].as_str()) {
                    distinct.push(&r[t_col]);
                }
            }
            if distinct.len() != 2 {
                return Err(Error::ClassCount(distinct.len()));
            }
            let swap = match (parse_number(distinct[0]), parse_number(distinct[1])) {
                (Some(a), Some(b)) => a > b,
                _ => distinct[0] > distinct[1],
            };
            if swap {
                distinct.swap(0, 1);
            }
            let y = kept.iter().map(|r| if r[t_col] == distinct[1] { 1.0 } else { 0.0 }).collect();
            (y, Some([distinct[0].to_owned(), distinct[1].to_owned()]))
        }
    };

    let feature_names: Vec<String> = feat_cols.iter().map(|&j| table.header[j].clone()).collect();
    let x = Matrix::from_vec(kept.len(), d, x)?;
    let mut dataset = Dataset::new(x, y, feature_names.clone(), task)?;
    dataset.encodings = encodings.clone();
    let report = IngestionReport {
        rows_read,
        rows_dropped,
        encodings: feature_names
            .into_iter()
            .zip(encodings)
            .map(|(feature, encoding)| FeatureEncoding { feature, encoding })
            .collect(),
        classes,
    };
    Ok((dataset, report))
}

/// Feature rows read for prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRows {
    /// Original units, columns in model order.
    pub x: Matrix,
    /// Zero-based data-row index in the file for every row of `x`.
    pub row_ids: Vec<usize>,
    pub rows_read: usize,
    pub rows_dropped: usize,
}

/// Reads the named feature columns (any order, extra columns ignored) and
/// encodes them with the stored encodings. Rows that cannot be encoded are
/// dropped.
pub fn read_feature_rows<R: Read>(
    reader: R,
    feature_names: &[String],
    encodings: &[Encoding],
) -> Result<FeatureRows> {
    let table = read_table(reader)?;
    let cols: Vec<usize> = feature_names
        .iter()
        .map(|name| {
            table
                .header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::MissingColumn(name.clone()))
        })
        .collect::<Result<_>>()?;
    let mut x = Vec::new();
    let mut row_ids = Vec::new();
    let mut buf = vec![0.0; cols.len()];
    for (&idx, r) in table.positions.iter().zip(&table.rows) {
        let ok = cols.iter().zip(encodings).zip(buf.iter_mut()).all(|((&j, enc), slot)| {
            match (!is_missing(&r[j])).then(|| enc.encode(&r[j])).flatten() {
                Some(v) => {
                    *slot = v;
                    true
                }
                None => false,
            }
        });
        if ok {
            x.extend_from_slice(&buf);
            row_ids.push(idx);
        }
    }
    let rows_read = table.rows.len() + table.ragged;
    Ok(FeatureRows {
        x: Matrix::from_vec(row_ids.len(), cols.len(), x)?,
        rows_dropped: rows_read - row_ids.len(),
        row_ids,
        rows_read,
    })
}

/// Reads an evaluation file: features encoded as in [`read_feature_rows`]
/// plus the target column, parsed with the rules of [`read_csv`].
pub fn read_labeled_rows<R: Read>(
    reader: R,
    target: &str,
    task: Task,
    feature_names: &[String],
    encodings: &[Encoding],
) -> Result<(Dataset, IngestionReport)> {
    let (dataset, report) = read_csv(reader, target, task)?;
    let mut cols = Vec::with_capacity(feature_names.len());
    for name in feature_names {
        cols.push(
            dataset
                .feature_names
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::MissingColumn(name.clone()))?,
        );
    }
    // re-encode with the stored encodings; rows with unseen categories are dropped
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut dropped = report.rows_dropped;
    for r in 0..dataset.n_rows() {
        let row = dataset.x.row(r);
        let vals: Option<Vec<f64>> = cols
            .iter()
            .zip(encodings)
            .map(|(&j, enc)| match (&dataset.encodings[j], enc) {
                (Encoding::Numeric, Encoding::Numeric) => Some(row[j]),
                (Encoding::Ordinal { categories }, _) => enc.encode(&categories[row[j] as usize]),
                (Encoding::Numeric, Encoding::Ordinal { .. }) => enc.encode(&format_number(row[j])),
            })
            .collect();
        match vals {
            Some(v) => {
                x.extend(v);
                y.push(dataset.y[r]);
            }
            None => dropped += 1,
        }
    }
    if y.is_empty() {
        return Err(Error::EmptyData("no rows could be encoded with the model's encodings".into()));
    }
    let mut out = Dataset::new(
        Matrix::from_vec(y.len(), cols.len(), x)?,
        y,
        feature_names.to_vec(),
        task,
    )?;
    out.encodings = encodings.to_vec();
    let report = IngestionReport {
        rows_dropped: dropped,
        encodings: feature_names
            .iter()
            .zip(encodings)
            .map(|(f, e)| FeatureEncoding {
                feature: f.clone(),
                encoding: e.clone(),
            })
            .collect(),
        ..report
    };
    Ok((out, report))
}

fn format_number(v: f64) -> String {
    format!("{v}")
}
