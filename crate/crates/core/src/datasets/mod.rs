//! Tabular regression data: CSV ingestion, min-max scaling and splitting.

use std::fs::File;
use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linsolve::DesignMatrix;

pub mod synth;

pub use synth::{gen_tf, TargetFunction};

/// Inputs `x` (N x n) with target `y` (N). All values finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: DesignMatrix,
    pub y: Vec<f64>,
    pub column_names: Vec<String>,
    pub target_name: String,
    pub source: String,
}

impl Dataset {
    pub fn new(x: DesignMatrix, y: Vec<f64>, column_names: Vec<String>, target_name: impl Into<String>, source: impl Into<String>) -> Result<Self> {
        if y.len() != x.rows() {
            return Err(Error::mismatch(format!("{} input rows but {} targets", x.rows(), y.len())));
        }
        if column_names.len() != x.cols() {
            return Err(Error::mismatch(format!("{} column names for {} inputs", column_names.len(), x.cols())));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("target contains non-finite values"));
        }
        Ok(Self {
            x,
            y,
            column_names,
            target_name: target_name.into(),
            source: source.into(),
        })
    }

    /// Builds a dataset with generated column names `x1..xn` and target `y`.
    pub fn from_parts(x: DesignMatrix, y: Vec<f64>, source: impl Into<String>) -> Result<Self> {
        let names = (1..=x.cols()).map(|i| format!("x{i}")).collect();
        Self::new(x, y, names, "y", source)
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn n_inputs(&self) -> usize {
        self.x.cols()
    }

    pub fn select_rows(&self, rows: &[usize]) -> Result<Dataset> {
        if rows.is_empty() {
            return Err(Error::EmptyDataset(format!("empty row selection from {}", self.source)));
        }
        let m = self.x.as_matrix();
        let x = DMatrix::from_fn(rows.len(), m.ncols(), |i, j| m[(rows[i], j)]);
        Ok(Dataset {
            x: DesignMatrix::new(x)?,
            y: rows.iter().map(|&i| self.y[i]).collect(),
            column_names: self.column_names.clone(),
            target_name: self.target_name.clone(),
            source: self.source.clone(),
        })
    }
}

/// Which column of a CSV file holds the target.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum TargetColumn {
    #[default]
    Last,
    Name(String),
}

/// Header and column-major values of a numeric CSV table.
struct Table {
    headers: Vec<String>,
    columns: Vec<Vec<f64>>,
}

/// Reads a comma-separated file with one header row. Every cell must parse as
/// a finite number; errors report the 1-based line number in the file.
fn read_table(path: &Path) -> Result<Table> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let headers: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); headers.len()];
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let line = i + 2;
        if record.len() != headers.len() {
            return Err(Error::Parse {
                row: line,
                column: String::new(),
                message: format!("expected {} fields, found {}", headers.len(), record.len()),
            });
        }
        for (j, cell) in record.iter().enumerate() {
            let value = cell
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    row: line,
                    column: headers[j].clone(),
                    message: format!("'{cell}' is not a finite number"),
                })?;
            columns[j].push(value);
        }
    }
    if columns.first().is_none_or(Vec::is_empty) {
        return Err(Error::EmptyDataset(format!("{} has a header but no rows", path.display())));
    }
    Ok(Table { headers, columns })
}

fn find_column(path: &Path, headers: &[String], name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::invalid(format!("{}: no column named '{name}'", path.display())))
}

pub fn load_csv(path: impl AsRef<Path>, target: &TargetColumn) -> Result<Dataset> {
    let path = path.as_ref();
    let Table { mut headers, mut columns } = read_table(path)?;
    if headers.len() < 2 {
        return Err(Error::invalid(format!(
            "{}: need at least one input and one target column, found {}",
            path.display(),
            headers.len()
        )));
    }
    let target_idx = match target {
        TargetColumn::Last => headers.len() - 1,
        TargetColumn::Name(name) => find_column(path, &headers, name)?,
    };
    let y = columns.remove(target_idx);
    let target_name = headers.remove(target_idx);
    Dataset::new(
        DesignMatrix::from_columns(&columns)?,
        y,
        headers,
        target_name,
        path.display().to_string(),
    )
}

/// Reads a CSV whose columns are all inputs, optionally dropping one named
/// column first.
pub fn load_features_csv(path: impl AsRef<Path>, drop: Option<&str>) -> Result<(DesignMatrix, Vec<String>)> {
    let path = path.as_ref();
    let Table { mut headers, mut columns } = read_table(path)?;
    if let Some(name) = drop {
        let j = find_column(path, &headers, name)?;
        headers.remove(j);
        columns.remove(j);
    }
    if columns.is_empty() {
        return Err(Error::invalid(format!("{} has no input columns", path.display())));
    }
    Ok((DesignMatrix::from_columns(&columns)?, headers))
}

/// Writes inputs then target, with a header row. Values use the shortest
/// representation that parses back to the same `f64`.
pub fn write_csv(path: impl AsRef<Path>, ds: &Dataset) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = csv::Writer::from_writer(file);
    let mut header: Vec<&str> = ds.column_names.iter().map(String::as_str).collect();
    header.push(&ds.target_name);
    writer.write_record(&header)?;
    for i in 0..ds.len() {
        let mut row: Vec<String> = (0..ds.n_inputs()).map(|j| ds.x.get(i, j).to_string()).collect();
        row.push(ds.y[i].to_string());
        writer.write_record(&row)?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Whether training data is min-max scaled before fitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scaling {
    #[default]
    MinMax,
    None,
}

/// Per-column `(min, max)` for the inputs and the target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub x_min: Vec<f64>,
    pub x_max: Vec<f64>,
    pub y_min: f64,
    pub y_max: f64,
}

fn scale(v: f64, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        (v - lo) / (hi - lo)
    } else {
        0.0
    }
}

fn unscale(v: f64, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        v * (hi - lo) + lo
    } else {
        lo
    }
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

impl NormStats {
    /// Statistics whose transform is exactly the identity.
    pub fn identity(n_inputs: usize) -> Self {
        Self {
            x_min: vec![0.0; n_inputs],
            x_max: vec![1.0; n_inputs],
            y_min: 0.0,
            y_max: 1.0,
        }
    }

    pub fn n_inputs(&self) -> usize {
        self.x_min.len()
    }

    /// Scales inputs with these statistics. Values outside the fitted range
    /// are not clamped.
    pub fn normalize_x(&self, x: &DesignMatrix) -> Result<DesignMatrix> {
        if x.cols() != self.n_inputs() {
            return Err(Error::mismatch(format!(
                "expected {} input columns, got {}",
                self.n_inputs(),
                x.cols()
            )));
        }
        let m = x.as_matrix();
        let scaled = DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| scale(m[(i, j)], self.x_min[j], self.x_max[j]));
        DesignMatrix::new(scaled)
    }

    pub fn denormalize_x(&self, x: &DesignMatrix) -> Result<DesignMatrix> {
        if x.cols() != self.n_inputs() {
            return Err(Error::mismatch("input column count differs from statistics"));
        }
        let m = x.as_matrix();
        DesignMatrix::new(DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| unscale(m[(i, j)], self.x_min[j], self.x_max[j])))
    }

    pub fn normalize_y(&self, y: &[f64]) -> Vec<f64> {
        y.iter().map(|&v| scale(v, self.y_min, self.y_max)).collect()
    }

    pub fn denormalize_y(&self, y: &[f64]) -> Vec<f64> {
        y.iter().map(|&v| unscale(v, self.y_min, self.y_max)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.x_min.len() != self.x_max.len() {
            return Err(Error::invalid("normalization x_min and x_max differ in length"));
        }
        let pairs = self.x_min.iter().zip(&self.x_max).chain(std::iter::once((&self.y_min, &self.y_max)));
        for (lo, hi) in pairs {
            if !(lo.is_finite() && hi.is_finite() && hi >= lo) {
                return Err(Error::invalid(format!("invalid normalization range [{lo}, {hi}]")));
            }
        }
        Ok(())
    }
}

pub fn fit_normalization(train: &Dataset) -> NormStats {
    let (x_min, x_max) = (0..train.n_inputs()).map(|j| min_max(train.x.column(j))).unzip();
    let (y_min, y_max) = min_max(&train.y);
    NormStats {
        x_min,
        x_max,
        y_min,
        y_max,
    }
}

pub fn apply_normalization(ds: &Dataset, stats: &NormStats) -> Result<Dataset> {
    Ok(Dataset {
        x: stats.normalize_x(&ds.x)?,
        y: stats.normalize_y(&ds.y),
        column_names: ds.column_names.clone(),
        target_name: ds.target_name.clone(),
        source: ds.source.clone(),
    })
}

/// Number of training rows for a split of `n` rows.
fn train_count(n: usize, fraction: f64) -> usize {
    ((n as f64 * fraction).round() as usize).clamp(1, n - 1)
}

/// Seeded shuffle, then the first `round(N * fraction)` rows train.
pub fn split_indices(n: usize, train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::invalid(format!("train fraction must lie in (0, 1), got {train_fraction}")));
    }
    if n < 2 {
        return Err(Error::invalid("splitting needs at least two rows"));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let test = idx.split_off(train_count(n, train_fraction));
    Ok((idx, test))
}

pub fn split(ds: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let (train, test) = split_indices(ds.len(), train_fraction, seed)?;
    Ok((ds.select_rows(&train)?, ds.select_rows(&test)?))
}
