use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::HkanConfig;
use super::layer::{fit_layer_detailed, Layer, LayerFit};
use super::streams::LayerStreams;
use crate::datasets::{apply_normalization, fit_normalization, Dataset, NormStats, Scaling};
use crate::error::{Error, Result};
use crate::linsolve::DesignMatrix;

pub const FORMAT_VERSION: u32 = 1;

/// A trained network together with the scaling it was trained under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HkanModel {
    pub format_version: u32,
    pub seed: u64,
    pub input_dim: usize,
    pub normalization: NormStats,
    pub layers: Vec<Layer>,
}

/// A trained model plus the per-layer training diagnostics.
#[derive(Debug, Clone)]
pub struct FitTrace {
    pub model: HkanModel,
    pub layers: Vec<LayerFit>,
}

impl FitTrace {
    /// Model output on the training rows, in the model's internal scale.
    pub fn train_predictions(&self) -> &[f64] {
        self.layers.last().expect("at least one layer").output.column(0)
    }
}

fn check_shapes(x: &DesignMatrix, y: &[f64]) -> Result<()> {
    if x.rows() != y.len() {
        return Err(Error::mismatch(format!("{} input rows but {} targets", x.rows(), y.len())));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("target contains non-finite values"));
    }
    Ok(())
}

/// Fits on data already in the model's internal scale, recording `stats` as
/// the transform for later predictions.
pub fn fit_hkan_traced(x: &DesignMatrix, y: &[f64], cfg: &HkanConfig, stats: NormStats) -> Result<FitTrace> {
    cfg.validate()?;
    check_shapes(x, y)?;
    stats.validate()?;
    if stats.n_inputs() != x.cols() {
        return Err(Error::mismatch("normalization statistics do not match input width"));
    }

    let mut fits: Vec<LayerFit> = Vec::with_capacity(cfg.depth());
    for (l, (layer_cfg, _)) in cfg.layers().enumerate() {
        let z_in = fits.last().map_or(x, |f| &f.output);
        let streams = LayerStreams::new(cfg.seed, l);
        fits.push(fit_layer_detailed(z_in, y, layer_cfg, &streams)?);
    }

    let model = HkanModel {
        format_version: FORMAT_VERSION,
        seed: cfg.seed,
        input_dim: x.cols(),
        normalization: stats,
        layers: fits.iter().map(|f| f.layer.clone()).collect(),
    };
    Ok(FitTrace { model, layers: fits })
}

pub fn fit_hkan_with_stats(x: &DesignMatrix, y: &[f64], cfg: &HkanConfig, stats: NormStats) -> Result<HkanModel> {
    Ok(fit_hkan_traced(x, y, cfg, stats)?.model)
}

/// Fits on `x`, `y` as given, without any rescaling.
pub fn fit_hkan(x: &DesignMatrix, y: &[f64], cfg: &HkanConfig) -> Result<HkanModel> {
    fit_hkan_with_stats(x, y, cfg, NormStats::identity(x.cols()))
}

/// Fits on a raw dataset, optionally min-max scaling it first. Predictions
/// from the returned model are always in the original target units.
pub fn train(ds: &Dataset, cfg: &HkanConfig, scaling: Scaling) -> Result<HkanModel> {
    match scaling {
        Scaling::None => fit_hkan(&ds.x, &ds.y, cfg),
        Scaling::MinMax => {
            let stats = fit_normalization(ds);
            let scaled = apply_normalization(ds, &stats)?;
            fit_hkan_with_stats(&scaled.x, &scaled.y, cfg, stats)
        }
    }
}

pub fn predict(model: &HkanModel, x: &DesignMatrix) -> Result<Vec<f64>> {
    model.predict(x)
}

impl HkanModel {
    /// Forward pass on inputs already in the internal scale.
    pub fn predict_scaled(&self, x: &DesignMatrix) -> Result<Vec<f64>> {
        if x.cols() != self.input_dim {
            return Err(Error::mismatch(format!(
                "model expects {} input columns, got {}",
                self.input_dim,
                x.cols()
            )));
        }
        let mut z = self.layers[0].forward(x)?;
        for layer in &self.layers[1..] {
            z = layer.forward(&z)?;
        }
        Ok(z.column(0).to_vec())
    }

    /// Predictions in the original target units for raw inputs.
    pub fn predict(&self, x: &DesignMatrix) -> Result<Vec<f64>> {
        let scaled = self.normalization.normalize_x(x)?;
        let out = self.predict_scaled(&scaled)?;
        Ok(self.normalization.denormalize_y(&out))
    }

    pub fn widths(&self) -> Vec<usize> {
        self.layers.iter().map(Layer::n_out).collect()
    }

    /// Configuration that reproduces this model when refitted on the same data.
    pub fn config(&self) -> HkanConfig {
        let (output, hidden) = self.layers.split_last().expect("model has layers");
        HkanConfig::new(
            hidden.iter().map(|l| l.config.clone()).collect(),
            output.config.clone(),
            self.seed,
        )
    }

    /// Mean first-layer block training R^2 for each input column.
    pub fn input_importance(&self) -> Vec<f64> {
        let first = &self.layers[0];
        let n = first.n_out() as f64;
        (0..self.input_dim)
            .map(|p| first.nodes.iter().map(|node| node.blocks[p].train_r2).sum::<f64>() / n)
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::invalid(format!(
                "unsupported model format version {} (expected {FORMAT_VERSION})",
                self.format_version
            )));
        }
        if self.layers.is_empty() {
            return Err(Error::invalid("model has no layers"));
        }
        if self.input_dim < 1 {
            return Err(Error::invalid("model input dimension must be at least 1"));
        }
        self.normalization.validate()?;
        if self.normalization.n_inputs() != self.input_dim {
            return Err(Error::invalid("normalization width differs from input dimension"));
        }
        self.config().validate()?;
        let mut n_in = self.input_dim;
        for (l, layer) in self.layers.iter().enumerate() {
            layer
                .validate(n_in)
                .map_err(|e| Error::invalid(format!("layer {}: {e}", l + 1)))?;
            if layer.n_out() != layer.config.n_out {
                return Err(Error::invalid(format!("layer {} width differs from its configuration", l + 1)));
            }
            n_in = layer.n_out();
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(text)?;
        model.validate()?;
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
