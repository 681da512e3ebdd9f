//! Seeded random hyperparameter search with baseline pruning.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{BafKind, PlacementStrategy};
use crate::datasets::Dataset;
use crate::error::{Error, Result};
use crate::evaluation::{kfold_cv_with, rmse, CvOutcome};
use crate::network::{HkanConfig, LayerConfig};

const PRUNE_FACTOR: f64 = 2.0;

/// Ranges for every tunable hyperparameter. Integer ranges are inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSpace {
    pub depths: Vec<usize>,
    pub width_min: usize,
    pub width_max: usize,
    /// Width cap for three-layer networks.
    pub width_max_deep: usize,
    pub hidden_kinds: Vec<BafKind>,
    pub output_kinds: Vec<BafKind>,
    pub sigma_min: u32,
    pub sigma_max: u32,
    pub m_min: usize,
    pub m_max: usize,
    pub hidden_placements: Vec<PlacementStrategy>,
    pub output_placements: Vec<PlacementStrategy>,
    pub lambdas: Vec<f64>,
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self {
            depths: vec![1, 2, 3],
            width_min: 2,
            width_max: 1000,
            width_max_deep: 200,
            hidden_kinds: BafKind::ALL.into_iter().filter(|k| !k.output_layer_only()).collect(),
            output_kinds: BafKind::ALL.to_vec(),
            sigma_min: 1,
            sigma_max: 50,
            m_min: 1,
            m_max: 40,
            hidden_placements: PlacementStrategy::ALL.into_iter().filter(|p| !p.output_layer_only()).collect(),
            output_placements: PlacementStrategy::ALL.to_vec(),
            lambdas: vec![0.0, 0.001, 0.01, 0.1, 1.0, 10.0],
        }
    }
}

fn pick<T: Copy>(rng: &mut ChaCha8Rng, items: &[T]) -> T {
    *items.choose(rng).expect("validated non-empty")
}

impl SearchSpace {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(format!("search space: {msg}")));
        if self.depths.is_empty() || self.depths.iter().any(|&d| !(1..=3).contains(&d)) {
            return bad("depths must be a non-empty subset of {1, 2, 3}");
        }
        if self.width_min < 1 || self.width_min > self.width_max {
            return bad("width range is empty");
        }
        if self.depths.contains(&3) && self.width_min > self.width_max_deep {
            return bad("three-layer width cap is below the minimum width");
        }
        if self.output_kinds.is_empty() || self.output_placements.is_empty() || self.lambdas.is_empty() {
            return bad("output kinds, output placements and penalties must be non-empty");
        }
        if self.depths.iter().any(|&d| d > 1) && (self.hidden_kinds.is_empty() || self.hidden_placements.is_empty()) {
            return bad("multi-layer depths need hidden kinds and placements");
        }
        if self.hidden_kinds.iter().any(|k| k.output_layer_only()) {
            return bad("hidden kinds include an output-only basis function");
        }
        if self.hidden_placements.iter().any(|p| p.output_layer_only()) {
            return bad("hidden placements include an output-only strategy");
        }
        if self.sigma_min < 1 || self.sigma_min > self.sigma_max || self.m_min < 1 || self.m_min > self.m_max {
            return bad("sigma and m ranges must be non-empty and positive");
        }
        if self.lambdas.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
            return bad("penalties must be finite and non-negative");
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let space: Self = serde_json::from_str(text)?;
        space.validate()?;
        Ok(space)
    }

    fn sample_layer(&self, rng: &mut ChaCha8Rng, n_out: usize, kinds: &[BafKind], placements: &[PlacementStrategy]) -> LayerConfig {
        let kind = pick(rng, kinds);
        let m = rng.gen_range(self.m_min..=self.m_max);
        let sigma = f64::from(rng.gen_range(self.sigma_min..=self.sigma_max));
        let placement = pick(rng, placements);
        let lambda_phi = pick(rng, &self.lambdas);
        if kind == BafKind::Identity {
            return LayerConfig::identity_output();
        }
        LayerConfig {
            n_out,
            m,
            kind,
            sigma,
            placement,
            lambda_phi,
            lambda_h: 0.0,
        }
    }
}

/// Draws one configuration, independently per dimension and per layer.
pub fn sample_config(space: &SearchSpace, rng: &mut ChaCha8Rng, seed: u64) -> HkanConfig {
    let depth = pick(rng, &space.depths);
    let width_max = if depth == 3 { space.width_max.min(space.width_max_deep) } else { space.width_max };
    let hidden = (1..depth)
        .map(|_| {
            let width = rng.gen_range(space.width_min..=width_max);
            space.sample_layer(rng, width, &space.hidden_kinds, &space.hidden_placements)
        })
        .collect();
    let output = space.sample_layer(rng, 1, &space.output_kinds, &space.output_placements);
    HkanConfig::new(hidden, output, seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrialStatus {
    Completed,
    Pruned,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub config: HkanConfig,
    pub status: TrialStatus,
    /// Mean validation RMSE; for pruned trials the RMSE that triggered pruning.
    pub cv_rmse: Option<f64>,
    pub fold_rmse: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub best: HkanConfig,
    pub best_cv_rmse: f64,
    pub baseline_rmse: f64,
    /// In trial order.
    pub log: Vec<TrialRecord>,
}

/// RMSE of predicting the training mean everywhere.
pub fn baseline_rmse(ds: &Dataset) -> Result<f64> {
    let mean = ds.y.iter().sum::<f64>() / ds.len() as f64;
    rmse(&ds.y, &vec![mean; ds.len()])
}

fn run_trial(trial: usize, config: HkanConfig, ds: &Dataset, k: usize, cv_seed: u64, baseline: f64) -> TrialRecord {
    let start = Instant::now();
    let outcome = kfold_cv_with(&config, ds, k, cv_seed, |fold, r| fold == 0 && r > PRUNE_FACTOR * baseline);
    let wall_time_s = start.elapsed().as_secs_f64();
    let (status, cv_rmse, fold_rmse, error) = match outcome {
        Ok(CvOutcome::Completed { fold_rmse }) => {
            let mean = fold_rmse.iter().sum::<f64>() / fold_rmse.len() as f64;
            (TrialStatus::Completed, Some(mean), fold_rmse, None)
        }
        Ok(CvOutcome::Stopped { fold_rmse }) => (TrialStatus::Pruned, fold_rmse.last().copied(), fold_rmse, None),
        Err(e) => (TrialStatus::Failed, None, Vec::new(), Some(e.to_string())),
    };
    TrialRecord {
        trial,
        config,
        status,
        cv_rmse,
        fold_rmse,
        error,
        wall_time_s,
    }
}

/// Evaluates `trials` sampled configurations by `k`-fold cross-validation on
/// shared folds and returns the best completed one. Trial `t` draws its
/// configuration from stream `t` of the search seed and trains with seed
/// `seed + t`.
pub fn random_search(space: &SearchSpace, ds: &Dataset, trials: usize, k: usize, seed: u64) -> Result<SearchResult> {
    space.validate()?;
    if trials < 1 {
        return Err(Error::invalid("search needs at least one trial"));
    }
    if k < 2 || k > ds.len() {
        return Err(Error::invalid(format!("{k} folds are not possible for {} samples", ds.len())));
    }
    let baseline = baseline_rmse(ds)?;

    let log: Vec<TrialRecord> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let config = sample_config(space, &mut rng, seed.wrapping_add(t as u64));
            run_trial(t, config, ds, k, seed, baseline)
        })
        .collect();

    let mut best: Option<&TrialRecord> = None;
    for rec in log.iter().filter(|r| r.status == TrialStatus::Completed) {
        if best.is_none_or(|b| rec.cv_rmse < b.cv_rmse) {
            best = Some(rec);
        }
    }
    let best = best.ok_or_else(|| Error::Numeric(format!("none of {trials} trials completed")))?;
    Ok(SearchResult {
        best: best.config.clone(),
        best_cv_rmse: best.cv_rmse.expect("completed trials carry an RMSE"),
        baseline_rmse: baseline,
        log,
    })
}

/// Writes one JSON object per line.
pub fn write_trial_log(path: impl AsRef<Path>, log: &[TrialRecord]) -> Result<()> {
    let path = path.as_ref();
    let mut out = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    for rec in log {
        serde_json::to_writer(&mut out, rec)?;
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}
