//! Synthetic benchmark target functions.
//!
//! | id    | inputs | domain          | post-processing                    |
//! |-------|--------|-----------------|------------------------------------|
//! | TF1   | 2      | `[0, 1]`        | none                               |
//! | TF2   | 2      | `[0, 1]`        | training targets get `U(-0.2,0.2)` |
//! | TF3   | 2      | `[-500, 500]`   | inputs and target min-max scaled   |
//! | TF4   | 10     | `[-4, 4]`       | inputs and target min-max scaled   |
//! | TF5   | 2      | `[0, pi]`       | inputs and target min-max scaled   |
//! | TF5-5 | 5      | `[0, pi]`       | inputs and target min-max scaled   |
//!
//! Scaling statistics come from the training split and are applied to both
//! splits.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{apply_normalization, fit_normalization, Dataset};
use crate::error::{Error, Result};
use crate::linsolve::DesignMatrix;

const TF2_NOISE: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TargetFunction {
    Tf1,
    Tf2,
    Tf3,
    Tf4,
    Tf5,
    Tf5_5,
}

impl TargetFunction {
    pub const ALL: [TargetFunction; 6] = [
        TargetFunction::Tf1,
        TargetFunction::Tf2,
        TargetFunction::Tf3,
        TargetFunction::Tf4,
        TargetFunction::Tf5,
        TargetFunction::Tf5_5,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TargetFunction::Tf1 => "TF1",
            TargetFunction::Tf2 => "TF2",
            TargetFunction::Tf3 => "TF3",
            TargetFunction::Tf4 => "TF4",
            TargetFunction::Tf5 => "TF5",
            TargetFunction::Tf5_5 => "TF5-5",
        }
    }

    pub fn n_inputs(self) -> usize {
        match self {
            TargetFunction::Tf4 => 10,
            TargetFunction::Tf5_5 => 5,
            _ => 2,
        }
    }

    pub fn domain(self) -> (f64, f64) {
        match self {
            TargetFunction::Tf1 | TargetFunction::Tf2 => (0.0, 1.0),
            TargetFunction::Tf3 => (-500.0, 500.0),
            TargetFunction::Tf4 => (-4.0, 4.0),
            TargetFunction::Tf5 | TargetFunction::Tf5_5 => (0.0, PI),
        }
    }

    /// Whether generated inputs and targets are min-max scaled.
    pub fn is_normalized(self) -> bool {
        matches!(self, TargetFunction::Tf3 | TargetFunction::Tf4 | TargetFunction::Tf5 | TargetFunction::Tf5_5)
    }

    /// Training/test sizes of the reference benchmark.
    pub fn reference_sizes(self) -> (usize, usize) {
        match self {
            TargetFunction::Tf4 => (3750, 1250),
            TargetFunction::Tf5_5 => (7500, 2500),
            _ => (5000, 10000),
        }
    }

    /// Noise-free function value on the native domain.
    pub fn eval(self, x: &[f64]) -> f64 {
        match self {
            TargetFunction::Tf1 => (2.0 * x[0] - 1.0) * (2.0 * x[1] - 1.0),
            TargetFunction::Tf2 => x.iter().map(|&v| (20.0 * v.exp()).sin() * v * v).sum(),
            TargetFunction::Tf3 => -x.iter().map(|&v| v * v.abs().sqrt().sin()).sum::<f64>(),
            TargetFunction::Tf4 => {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                1.0 - (2.0 * PI * r).cos() - 0.1 * r
            }
            TargetFunction::Tf5 | TargetFunction::Tf5_5 => -x
                .iter()
                .enumerate()
                .map(|(i, &v)| v.sin() * ((i + 1) as f64 * v * v / PI).sin().powi(20))
                .sum::<f64>(),
        }
    }
}

impl fmt::Display for TargetFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TargetFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_uppercase().replace('_', "-");
        TargetFunction::ALL
            .into_iter()
            .find(|t| t.name() == norm)
            .ok_or_else(|| Error::invalid(format!("unknown target function '{s}' (expected TF1..TF5 or TF5-5)")))
    }
}

fn sample_inputs(tf: TargetFunction, n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let (lo, hi) = tf.domain();
    (0..n)
        .map(|_| (0..tf.n_inputs()).map(|_| rng.gen_range(lo..=hi)).collect())
        .collect()
}

fn to_dataset(tf: TargetFunction, rows: &[Vec<f64>], y: Vec<f64>, split: &str, seed: u64) -> Result<Dataset> {
    let n = tf.n_inputs();
    let x = DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]);
    Dataset::from_parts(DesignMatrix::new(x)?, y, format!("{tf} {split} (seed {seed})"))
}

/// Generates training and test sets for one synthetic target function.
///
/// Inputs come from one ChaCha8 stream and the TF2 noise from another, so
/// the clean function values of a given seed are reproducible exactly.
pub fn gen_tf(tf: TargetFunction, n_train: usize, n_test: usize, seed: u64) -> Result<(Dataset, Dataset)> {
    if n_train < 1 || n_test < 1 {
        return Err(Error::invalid("synthetic splits need at least one row each"));
    }
    let mut input_rng = ChaCha8Rng::seed_from_u64(seed);
    let train_x = sample_inputs(tf, n_train, &mut input_rng);
    let test_x = sample_inputs(tf, n_test, &mut input_rng);

    let mut train_y: Vec<f64> = train_x.iter().map(|x| tf.eval(x)).collect();
    let test_y: Vec<f64> = test_x.iter().map(|x| tf.eval(x)).collect();
    if tf == TargetFunction::Tf2 {
        let mut noise_rng = ChaCha8Rng::seed_from_u64(seed);
        noise_rng.set_stream(1);
        for y in &mut train_y {
            *y += noise_rng.gen_range(-TF2_NOISE..=TF2_NOISE);
        }
    }

    let train = to_dataset(tf, &train_x, train_y, "train", seed)?;
    let test = to_dataset(tf, &test_x, test_y, "test", seed)?;
    if tf.is_normalized() {
        let stats = fit_normalization(&train);
        Ok((apply_normalization(&train, &stats)?, apply_normalization(&test, &stats)?))
    } else {
        Ok((train, test))
    }
}
