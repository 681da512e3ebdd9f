//! Accuracy metrics, k-fold cross-validation and repeated-run statistics.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::datasets::{Dataset, Scaling};
use crate::error::{Error, Result};
use crate::network::{train, HkanConfig, HkanModel};

mod metrics;

pub use metrics::{quantile, r_squared, rmse, RunStats};

/// Test RMSE of a trained model, in original target units.
pub fn evaluate(model: &HkanModel, ds: &Dataset) -> Result<f64> {
    rmse(&ds.y, &model.predict(&ds.x)?)
}

/// Seeded balanced partition of `0..n` into `k` folds.
pub fn fold_assignment(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::invalid(format!("cross-validation needs k >= 2, got {k}")));
    }
    if k > n {
        return Err(Error::invalid(format!("{k} folds requested for {n} samples")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut folds = vec![Vec::with_capacity(n / k + 1); k];
    for (pos, i) in idx.into_iter().enumerate() {
        folds[pos % k].push(i);
    }
    Ok(folds)
}

/// Result of a cross-validation that may stop early.
#[derive(Debug, Clone, PartialEq)]
pub enum CvOutcome {
    Completed { fold_rmse: Vec<f64> },
    /// Stopped after `fold_rmse.len()` folds.
    Stopped { fold_rmse: Vec<f64> },
}

impl CvOutcome {
    pub fn fold_rmse(&self) -> &[f64] {
        match self {
            CvOutcome::Completed { fold_rmse } | CvOutcome::Stopped { fold_rmse } => fold_rmse,
        }
    }

    pub fn mean_rmse(&self) -> f64 {
        let f = self.fold_rmse();
        f.iter().sum::<f64>() / f.len() as f64
    }
}

fn fold_rmse(cfg: &HkanConfig, ds: &Dataset, folds: &[Vec<usize>], f: usize) -> Result<f64> {
    let train_idx: Vec<usize> = folds
        .iter()
        .enumerate()
        .filter(|&(g, _)| g != f)
        .flat_map(|(_, fold)| fold.iter().copied())
        .collect();
    let train_ds = ds.select_rows(&train_idx)?;
    let held_out = ds.select_rows(&folds[f])?;
    let model = train(&train_ds, cfg, Scaling::MinMax)?;
    let r = evaluate(&model, &held_out)?;
    if !r.is_finite() {
        return Err(Error::Numeric(format!("fold {f} produced non-finite predictions")));
    }
    Ok(r)
}

/// Runs folds in order, calling `stop(fold, rmse)` after each one; a `true`
/// return ends the run early. Scaling is refit on every fold's training part.
pub fn kfold_cv_with<F>(cfg: &HkanConfig, ds: &Dataset, k: usize, seed: u64, mut stop: F) -> Result<CvOutcome>
where
    F: FnMut(usize, f64) -> bool,
{
    let folds = fold_assignment(ds.len(), k, seed)?;
    let mut fold_rmses = Vec::with_capacity(k);
    for f in 0..k {
        let r = fold_rmse(cfg, ds, &folds, f)?;
        fold_rmses.push(r);
        if f + 1 < k && stop(f, r) {
            return Ok(CvOutcome::Stopped { fold_rmse: fold_rmses });
        }
    }
    Ok(CvOutcome::Completed { fold_rmse: fold_rmses })
}

/// Per-fold validation RMSE.
pub fn kfold_cv_folds(cfg: &HkanConfig, ds: &Dataset, k: usize, seed: u64) -> Result<Vec<f64>> {
    let folds = fold_assignment(ds.len(), k, seed)?;
    (0..k)
        .into_par_iter()
        .map(|f| fold_rmse(cfg, ds, &folds, f))
        .collect()
}

/// Mean validation RMSE over `k` folds.
pub fn kfold_cv(cfg: &HkanConfig, ds: &Dataset, k: usize, seed: u64) -> Result<f64> {
    let r = kfold_cv_folds(cfg, ds, k, seed)?;
    Ok(r.iter().sum::<f64>() / r.len() as f64)
}

/// Trains `runs` models, run `i` with seed `cfg.seed + i`, and summarizes
/// their test RMSE.
pub fn repeated_runs(cfg: &HkanConfig, train_ds: &Dataset, test_ds: &Dataset, runs: usize, scaling: Scaling) -> Result<RunStats> {
    if runs < 1 {
        return Err(Error::invalid("at least one run is required"));
    }
    let rmses = (0..runs)
        .into_par_iter()
        .map(|i| {
            let model = train(train_ds, &cfg.with_seed(cfg.seed.wrapping_add(i as u64)), scaling)?;
            evaluate(&model, test_ds)
        })
        .collect::<Result<Vec<_>>>()?;
    RunStats::from_rmses(rmses)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{BafKind, PlacementStrategy};
    use crate::linsolve::DesignMatrix;
    use crate::network::LayerConfig;
    use crate::testutil::{rng, uniform_vec};

    /// `y = 2 x1 + 0.5 x2` with `anchors` copies of the origin, so every
    /// training part contains the corner that makes scaled data intercept-free.
    fn linear(n: usize, anchors: usize, seed: u64) -> Dataset {
        let mut r = rng(seed);
        let mut a = uniform_vec(&mut r, n, 0.0, 1.0);
        let mut b = uniform_vec(&mut r, n, 0.0, 1.0);
        for i in 0..anchors {
            a[i] = 0.0;
            b[i] = 0.0;
        }
        let y = a.iter().zip(&b).map(|(a, b)| 2.0 * a + 0.5 * b).collect();
        Dataset::from_parts(DesignMatrix::from_columns(&[a, b]).unwrap(), y, "linear").unwrap()
    }

    #[test]
    fn folds_partition_and_balance() {
        for (n, k) in [(10, 3), (7, 7), (100, 5), (11, 2)] {
            let folds = fold_assignment(n, k, 4).unwrap();
            let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
            assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            let mut all: Vec<usize> = folds.concat();
            all.sort_unstable();
            assert_eq!(all, (0..n).collect::<Vec<_>>());
        }
        assert!(fold_assignment(3, 4, 0).is_err());
        assert!(fold_assignment(3, 1, 0).is_err());
    }

    #[test]
    fn leave_one_out_on_linear_data() {
        let ds = linear(30, 2, 1);
        let r = kfold_cv(&HkanConfig::linear(0), &ds, ds.len(), 5).unwrap();
        assert!(r <= 1e-9, "{r}");
    }

    #[test]
    fn cv_is_seed_reproducible() {
        let ds = linear(40, 0, 2);
        let cfg = HkanConfig::new(
            vec![LayerConfig::hidden(3, BafKind::Gaussian, 4, 3.0, PlacementStrategy::RandomUniform, 0.01)],
            LayerConfig::identity_output(),
            9,
        );
        let a = kfold_cv_folds(&cfg, &ds, 4, 3).unwrap();
        assert_eq!(a, kfold_cv_folds(&cfg, &ds, 4, 3).unwrap());
        assert_eq!(a.len(), 4);
        let seq = kfold_cv_with(&cfg, &ds, 4, 3, |_, _| false).unwrap();
        assert_eq!(seq, CvOutcome::Completed { fold_rmse: a });
    }

    #[test]
    fn early_stop_keeps_partial_rmse() {
        let ds = linear(20, 0, 3);
        let out = kfold_cv_with(&HkanConfig::linear(0), &ds, 5, 0, |f, _| f == 0).unwrap();
        assert!(matches!(out, CvOutcome::Stopped { ref fold_rmse } if fold_rmse.len() == 1));
    }

    #[test]
    fn deterministic_config_has_zero_iqr() {
        let ds = linear(60, 0, 4);
        let (train_ds, test_ds) = crate::datasets::split(&ds, 0.75, 1).unwrap();
        let s = repeated_runs(&HkanConfig::linear(0), &train_ds, &test_ds, 6, Scaling::MinMax).unwrap();
        assert_eq!(s.iqr, 0.0);
        assert_eq!(s.runs, 6);
        let one = repeated_runs(&HkanConfig::linear(0), &train_ds, &test_ds, 1, Scaling::MinMax).unwrap();
        assert_eq!(one.median, one.per_run_rmse[0]);
    }

    #[test]
    fn run_seeds_are_offsets_of_base_seed() {
        let ds = linear(60, 0, 5);
        let (train_ds, test_ds) = crate::datasets::split(&ds, 0.75, 1).unwrap();
        let cfg = HkanConfig::new(
            vec![LayerConfig::hidden(3, BafKind::Gaussian, 4, 3.0, PlacementStrategy::RandomUniform, 0.01)],
            LayerConfig::identity_output(),
            10,
        );
        let s = repeated_runs(&cfg, &train_ds, &test_ds, 3, Scaling::MinMax).unwrap();
        for i in 0..3 {
            let m = train(&train_ds, &cfg.with_seed(10 + i as u64), Scaling::MinMax).unwrap();
            assert_eq!(evaluate(&m, &test_ds).unwrap(), s.per_run_rmse[i]);
        }
    }
}
