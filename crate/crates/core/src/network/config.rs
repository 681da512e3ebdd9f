use serde::{Deserialize, Serialize};

use crate::basis::{BafKind, PlacementStrategy};
use crate::error::{Error, Result};

fn one() -> usize {
    1
}

fn unit_sigma() -> f64 {
    1.0
}

fn random_placement() -> PlacementStrategy {
    PlacementStrategy::RandomUniform
}

/// Hyperparameters of one layer. Identity layers ignore `m`, `sigma`,
/// `placement` and `lambda_phi`, so those may be omitted in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerConfig {
    /// Number of nodes (h-functions).
    pub n_out: usize,
    /// Basis functions per block.
    #[serde(default = "one")]
    pub m: usize,
    pub kind: BafKind,
    #[serde(default = "unit_sigma")]
    pub sigma: f64,
    #[serde(default = "random_placement")]
    pub placement: PlacementStrategy,
    #[serde(default)]
    pub lambda_phi: f64,
    #[serde(default)]
    pub lambda_h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerRole {
    Hidden,
    Output,
}

impl LayerConfig {
    pub fn hidden(n_out: usize, kind: BafKind, m: usize, sigma: f64, placement: PlacementStrategy, lambda_phi: f64) -> Self {
        Self {
            n_out,
            m,
            kind,
            sigma,
            placement,
            lambda_phi,
            lambda_h: 0.0,
        }
    }

    pub fn output(kind: BafKind, m: usize, sigma: f64, placement: PlacementStrategy, lambda_phi: f64) -> Self {
        Self::hidden(1, kind, m, sigma, placement, lambda_phi)
    }

    pub fn identity_output() -> Self {
        Self::output(BafKind::Identity, 1, 1.0, PlacementStrategy::EquallySpaced, 0.0)
    }

    pub fn with_lambda_h(mut self, lambda_h: f64) -> Self {
        self.lambda_h = lambda_h;
        self
    }

    /// Basis functions actually used per block.
    pub fn effective_m(&self) -> usize {
        if self.kind == BafKind::Identity {
            1
        } else {
            self.m
        }
    }

    /// True when fitting this layer consumes no randomness.
    pub fn is_deterministic(&self) -> bool {
        self.kind == BafKind::Identity || !self.placement.is_random()
    }

    pub fn validate(&self, role: LayerRole) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_out < 1 {
            return bad("layer width must be at least 1".into());
        }
        if role == LayerRole::Output && self.n_out != 1 {
            return bad(format!("output layer must have exactly one node, got {}", self.n_out));
        }
        if self.m < 1 {
            return bad("blocks need at least one basis function".into());
        }
        if role == LayerRole::Hidden && self.kind.output_layer_only() {
            return bad(format!("{} basis functions are only allowed in the output layer", self.kind));
        }
        if role == LayerRole::Hidden && self.placement.output_layer_only() {
            return bad(format!("'{}' placement is only allowed in the output layer", self.placement));
        }
        if self.kind.is_parametric() && !(self.sigma.is_finite() && self.sigma > 0.0) {
            return bad(format!("sigma must be finite and > 0, got {}", self.sigma));
        }
        for (name, v) in [("lambda_phi", self.lambda_phi), ("lambda_h", self.lambda_h)] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be finite and >= 0, got {v}"));
            }
        }
        Ok(())
    }
}

/// Full network description: zero or more hidden layers followed by a
/// single-node output layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HkanConfig {
    #[serde(default)]
    pub hidden_layers: Vec<LayerConfig>,
    pub output_layer: LayerConfig,
    #[serde(default)]
    pub seed: u64,
}

impl HkanConfig {
    pub fn new(hidden_layers: Vec<LayerConfig>, output_layer: LayerConfig, seed: u64) -> Self {
        Self {
            hidden_layers,
            output_layer,
            seed,
        }
    }

    /// Single-layer linear model.
    pub fn linear(seed: u64) -> Self {
        Self::new(Vec::new(), LayerConfig::identity_output(), seed)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    /// Total number of layers, `L`.
    pub fn depth(&self) -> usize {
        self.hidden_layers.len() + 1
    }

    pub fn layers(&self) -> impl Iterator<Item = (&LayerConfig, LayerRole)> {
        self.hidden_layers
            .iter()
            .map(|c| (c, LayerRole::Hidden))
            .chain(std::iter::once((&self.output_layer, LayerRole::Output)))
    }

    pub fn validate(&self) -> Result<()> {
        for (i, (layer, role)) in self.layers().enumerate() {
            layer
                .validate(role)
                .map_err(|e| Error::InvalidConfig(format!("layer {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    /// True when every layer is seed-independent.
    pub fn is_deterministic(&self) -> bool {
        self.layers().all(|(l, _)| l.is_deterministic())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sigmoid_hidden(n: usize) -> LayerConfig {
        LayerConfig::hidden(n, BafKind::Sigmoid, 5, 3.0, PlacementStrategy::DataDriven, 0.01)
    }

    #[test]
    fn identity_output_config_is_valid_and_deterministic() {
        let cfg = HkanConfig::linear(3);
        cfg.validate().unwrap();
        assert!(cfg.is_deterministic());
        assert_eq!(cfg.depth(), 1);
    }

    #[test]
    fn hidden_layers_reject_output_only_choices() {
        let mut cfg = HkanConfig::new(vec![sigmoid_hidden(4)], LayerConfig::identity_output(), 0);
        cfg.validate().unwrap();
        assert!(!cfg.is_deterministic());

        cfg.hidden_layers[0].kind = BafKind::Identity;
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));

        cfg.hidden_layers[0] = sigmoid_hidden(4);
        cfg.hidden_layers[0].placement = PlacementStrategy::EquallySpaced;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn output_layer_must_have_one_node() {
        let mut cfg = HkanConfig::linear(0);
        cfg.output_layer.n_out = 2;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn numeric_ranges_checked() {
        let mut layer = sigmoid_hidden(3);
        layer.sigma = 0.0;
        assert!(layer.validate(LayerRole::Hidden).is_err());
        layer.sigma = 1.0;
        layer.lambda_phi = -0.1;
        assert!(layer.validate(LayerRole::Hidden).is_err());
        layer.lambda_phi = 0.0;
        layer.lambda_h = f64::NAN;
        assert!(layer.validate(LayerRole::Hidden).is_err());
        layer.lambda_h = 0.0;
        layer.n_out = 0;
        assert!(layer.validate(LayerRole::Hidden).is_err());
        layer.n_out = 1;
        layer.m = 0;
        assert!(layer.validate(LayerRole::Hidden).is_err());
    }

    #[test]
    fn json_round_trip_and_defaults() {
        let cfg = HkanConfig::new(vec![sigmoid_hidden(7)], LayerConfig::output(BafKind::Tanh, 3, 10.0, PlacementStrategy::RandomUniform, 1.0), 42);
        let back = HkanConfig::from_json(&cfg.to_json().unwrap()).unwrap();
        assert_eq!(back, cfg);

        let minimal = r#"{ "output_layer": { "n_out": 1, "kind": "identity" } }"#;
        let parsed = HkanConfig::from_json(minimal).unwrap();
        assert_eq!(parsed.seed, 0);
        assert!(parsed.hidden_layers.is_empty());
        assert_eq!(parsed.output_layer.kind, BafKind::Identity);

        assert!(HkanConfig::from_json(r#"{ "output_layer": { "n_out": 1, "kind": "spline" } }"#).is_err());
        assert!(HkanConfig::from_json(r#"{ "output_layer": { "n_out": 1, "kind": "tanh", "bogus": 1 } }"#).is_err());
    }
}
