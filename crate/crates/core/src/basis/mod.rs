//! Fixed-parameter univariate basis functions and location placement.
//!
//! Both families are strategy registries: each variant implements a small
//! trait and is registered under the lowercase name that appears in config
//! and model files. [`BafKind`] and [`PlacementStrategy`] are the serialized
//! keys; [`BafKind::function`] and [`PlacementStrategy::strategy`] resolve
//! them to the registered implementation.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::registry::Registry;

pub mod functions;
pub mod placement;

/// A univariate basis function `g(z; mu, sigma)`.
pub trait BasisFunction: Send + Sync {
    fn name(&self) -> &'static str;

    fn eval(&self, z: f64, mu: f64, sigma: f64) -> f64;

    /// Kinds restricted to the top layer of a network.
    fn output_layer_only(&self) -> bool {
        false
    }

    /// Whether location and slope affect the output.
    fn is_parametric(&self) -> bool {
        true
    }
}

/// Chooses `m` basis locations for one input column.
pub trait Placement: Send + Sync {
    fn name(&self) -> &'static str;

    /// `column` is non-empty and finite; `m >= 1`.
    fn locations(&self, m: usize, column: &[f64], rng: &mut dyn RngCore) -> Vec<f64>;

    fn output_layer_only(&self) -> bool {
        false
    }

    /// Whether the produced locations depend on the random stream.
    fn is_random(&self) -> bool {
        true
    }
}

pub fn basis_registry() -> &'static Registry<dyn BasisFunction> {
    static REGISTRY: OnceLock<Registry<dyn BasisFunction>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        let mut reg: Registry<dyn BasisFunction> = Registry::new();
        reg.register("gaussian", Box::new(functions::Gaussian))
            .register("sigmoid", Box::new(functions::Sigmoid))
            .register("relu", Box::new(functions::Relu))
            .register("softplus", Box::new(functions::Softplus))
            .register("tanh", Box::new(functions::Tanh))
            .register("identity", Box::new(functions::Identity));
        reg
    })
}

pub fn placement_registry() -> &'static Registry<dyn Placement> {
    static REGISTRY: OnceLock<Registry<dyn Placement>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        let mut reg: Registry<dyn Placement> = Registry::new();
        reg.register("random", Box::new(placement::RandomUniform))
            .register("data", Box::new(placement::DataDriven))
            .register("equal", Box::new(placement::EquallySpaced));
        reg
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BafKind {
    Gaussian,
    Sigmoid,
    #[serde(rename = "relu")]
    ReLU,
    Softplus,
    Tanh,
    Identity,
}

impl BafKind {
    pub const ALL: [BafKind; 6] = [
        BafKind::Gaussian,
        BafKind::Sigmoid,
        BafKind::ReLU,
        BafKind::Softplus,
        BafKind::Tanh,
        BafKind::Identity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BafKind::Gaussian => "gaussian",
            BafKind::Sigmoid => "sigmoid",
            BafKind::ReLU => "relu",
            BafKind::Softplus => "softplus",
            BafKind::Tanh => "tanh",
            BafKind::Identity => "identity",
        }
    }

    pub fn function(self) -> &'static dyn BasisFunction {
        basis_registry()
            .get(self.name())
            .expect("every BafKind has a registered implementation")
    }

    pub fn output_layer_only(self) -> bool {
        self.function().output_layer_only()
    }

    pub fn is_parametric(self) -> bool {
        self.function().is_parametric()
    }
}

impl fmt::Display for BafKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BafKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        BafKind::ALL
            .into_iter()
            .find(|k| k.name() == lower)
            .ok_or_else(|| {
                let known: Vec<_> = basis_registry().names().collect();
                Error::invalid(format!("unknown basis kind '{s}' (known: {})", known.join(", ")))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PlacementStrategy {
    #[serde(rename = "random")]
    RandomUniform,
    #[serde(rename = "data")]
    DataDriven,
    #[serde(rename = "equal")]
    EquallySpaced,
}

impl PlacementStrategy {
    pub const ALL: [PlacementStrategy; 3] = [
        PlacementStrategy::RandomUniform,
        PlacementStrategy::DataDriven,
        PlacementStrategy::EquallySpaced,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PlacementStrategy::RandomUniform => "random",
            PlacementStrategy::DataDriven => "data",
            PlacementStrategy::EquallySpaced => "equal",
        }
    }

    pub fn strategy(self) -> &'static dyn Placement {
        placement_registry()
            .get(self.name())
            .expect("every PlacementStrategy has a registered implementation")
    }

    pub fn output_layer_only(self) -> bool {
        self.strategy().output_layer_only()
    }

    pub fn is_random(self) -> bool {
        self.strategy().is_random()
    }
}

impl fmt::Display for PlacementStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PlacementStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        PlacementStrategy::ALL
            .into_iter()
            .find(|p| p.name() == lower)
            .ok_or_else(|| Error::invalid(format!("unknown placement '{s}'")))
    }
}

/// One basis function with its fixed location and slope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BafParams {
    pub kind: BafKind,
    pub mu: f64,
    pub sigma: f64,
}

impl BafParams {
    pub fn new(kind: BafKind, mu: f64, sigma: f64) -> Result<Self> {
        if kind.is_parametric() && !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::invalid(format!(
                "{kind} basis needs a finite sigma > 0, got {sigma}"
            )));
        }
        if !mu.is_finite() {
            return Err(Error::invalid("basis location must be finite"));
        }
        Ok(Self { kind, mu, sigma })
    }

    pub fn identity() -> Self {
        Self {
            kind: BafKind::Identity,
            mu: 0.0,
            sigma: 1.0,
        }
    }
}

pub fn eval_baf(p: &BafParams, z: f64) -> f64 {
    p.kind.function().eval(z, p.mu, p.sigma)
}

/// Chooses `m` locations for the basis functions of one block.
pub fn generate_locations(
    strategy: PlacementStrategy,
    m: usize,
    column: &[f64],
    rng: &mut dyn RngCore,
) -> Result<Vec<f64>> {
    if m < 1 {
        return Err(Error::invalid("at least one basis function is required"));
    }
    if column.is_empty() {
        return Err(Error::invalid("cannot place basis functions on an empty column"));
    }
    if column.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("column contains non-finite values"));
    }
    Ok(strategy.strategy().locations(m, column, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(kind: BafKind, mu: f64, sigma: f64) -> BafParams {
        BafParams::new(kind, mu, sigma).unwrap()
    }

    #[test]
    fn gaussian_peaks_at_location() {
        assert_eq!(eval_baf(&p(BafKind::Gaussian, 0.3, 5.0), 0.3), 1.0);
        let v = eval_baf(&p(BafKind::Gaussian, 0.0, 1.0), 1.0);
        assert!((v - (-1.0f64).exp()).abs() < 1e-15);
        assert!((v - 0.36787944).abs() < 1e-8);
    }

    #[test]
    fn sigmoid_is_half_at_inflection() {
        for (mu, sigma) in [(0.0, 1.0), (0.7, 33.0), (-3.0, 0.5)] {
            assert_eq!(eval_baf(&p(BafKind::Sigmoid, mu, sigma), mu), 0.5);
        }
    }

    #[test]
    fn identity_passes_through() {
        assert_eq!(eval_baf(&BafParams::identity(), 0.42), 0.42);
    }

    #[test]
    fn softplus_is_finite_for_huge_arguments() {
        let sp = p(BafKind::Softplus, 0.0, 50.0);
        assert_eq!(eval_baf(&sp, 100.0), 5000.0);
        assert!(eval_baf(&sp, -100.0) >= 0.0);
        assert!(eval_baf(&sp, -0.1) > 0.0);
        assert!((eval_baf(&sp, 0.0) - 2f64.ln()).abs() < 1e-15);
        let sig = p(BafKind::Sigmoid, 0.0, 50.0);
        assert_eq!(eval_baf(&sig, -100.0), 0.0);
        assert_eq!(eval_baf(&sig, 100.0), 1.0);
    }

    #[test]
    fn relu_and_tanh_use_affine_argument() {
        assert_eq!(eval_baf(&p(BafKind::ReLU, 0.5, 2.0), 1.0), 1.0);
        assert_eq!(eval_baf(&p(BafKind::ReLU, 0.5, 2.0), 0.0), 0.0);
        assert!((eval_baf(&p(BafKind::Tanh, 0.5, 2.0), 1.0) - 1f64.tanh()).abs() < 1e-15);
    }

    #[test]
    fn params_reject_bad_sigma() {
        assert!(BafParams::new(BafKind::Gaussian, 0.0, 0.0).is_err());
        assert!(BafParams::new(BafKind::Tanh, 0.0, -1.0).is_err());
        assert!(BafParams::new(BafKind::Identity, 0.0, 0.0).is_ok());
    }

    #[test]
    fn names_round_trip_through_registry_and_serde() {
        for kind in BafKind::ALL {
            assert_eq!(kind.function().name(), kind.name());
            assert_eq!(kind.name().parse::<BafKind>().unwrap(), kind);
            assert_eq!(serde_json::to_string(&kind).unwrap(), format!("\"{}\"", kind.name()));
        }
        for pl in PlacementStrategy::ALL {
            assert_eq!(pl.strategy().name(), pl.name());
            assert_eq!(pl.name().parse::<PlacementStrategy>().unwrap(), pl);
            assert_eq!(serde_json::to_string(&pl).unwrap(), format!("\"{}\"", pl.name()));
        }
        assert!("spline".parse::<BafKind>().is_err());
        assert_eq!(basis_registry().len(), BafKind::ALL.len());
        assert_eq!(placement_registry().len(), PlacementStrategy::ALL.len());
    }

    #[test]
    fn output_only_flags() {
        assert!(BafKind::Identity.output_layer_only());
        assert!(!BafKind::Sigmoid.output_layer_only());
        assert!(PlacementStrategy::EquallySpaced.output_layer_only());
        assert!(!PlacementStrategy::DataDriven.output_layer_only());
    }

    #[test]
    fn equally_spaced_midpoints() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let locs = generate_locations(PlacementStrategy::EquallySpaced, 2, &[0.0, 1.0], &mut rng).unwrap();
        assert_eq!(locs, vec![0.25, 0.75]);
    }

    #[test]
    fn data_driven_on_constant_column() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let locs = generate_locations(PlacementStrategy::DataDriven, 3, &[0.5; 4], &mut rng).unwrap();
        assert_eq!(locs, vec![0.5; 3]);
    }

    #[test]
    fn random_uniform_mean_is_central() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let locs = generate_locations(PlacementStrategy::RandomUniform, 1000, &[0.0, 1.0], &mut rng).unwrap();
        let mean = locs.iter().sum::<f64>() / 1000.0;
        assert!((0.45..=0.55).contains(&mean), "mean {mean}");
        assert!(locs.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn range_extends_beyond_unit_interval_when_needed() {
        assert_eq!(placement::location_range(&[0.2, 0.4]), (0.0, 1.0));
        assert_eq!(placement::location_range(&[-0.5, 0.4]), (-0.5, 0.4));
        assert_eq!(placement::location_range(&[0.5, 2.0]), (0.5, 2.0));
    }

    #[test]
    fn rejects_zero_locations() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(generate_locations(PlacementStrategy::RandomUniform, 0, &[0.0], &mut rng).is_err());
        assert!(generate_locations(PlacementStrategy::DataDriven, 1, &[], &mut rng).is_err());
    }

    #[test]
    fn same_seed_same_locations() {
        let column: Vec<f64> = (0..50).map(|i| i as f64 / 49.0).collect();
        for strategy in PlacementStrategy::ALL {
            let a = generate_locations(strategy, 20, &column, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
            let b = generate_locations(strategy, 20, &column, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
            assert_eq!(a, b);
        }
    }

    proptest! {
        #[test]
        fn output_ranges(mu in -2.0f64..2.0, sigma in 0.01f64..50.0, z in -5.0f64..5.0) {
            let g = eval_baf(&p(BafKind::Gaussian, mu, sigma), z);
            prop_assert!(g > 0.0 || (sigma * (z - mu)).abs() > 25.0);
            prop_assert!(g <= 1.0);
            let s = eval_baf(&p(BafKind::Sigmoid, mu, sigma), z);
            prop_assert!((0.0..=1.0).contains(&s));
            if (sigma * (z - mu)).abs() < 30.0 {
                prop_assert!(s > 0.0 && s < 1.0);
                prop_assert!(eval_baf(&p(BafKind::Softplus, mu, sigma), z) > 0.0);
            }
            let t = eval_baf(&p(BafKind::Tanh, mu, sigma), z);
            prop_assert!((-1.0..=1.0).contains(&t));
            prop_assert!(eval_baf(&p(BafKind::ReLU, mu, sigma), z) >= 0.0);
        }

        #[test]
        fn monotone_kinds(mu in -1.0f64..1.0, sigma in 0.01f64..50.0, z in -3.0f64..3.0, dz in 0.0f64..2.0) {
            for kind in [BafKind::Sigmoid, BafKind::Tanh, BafKind::ReLU, BafKind::Softplus, BafKind::Identity] {
                let q = p(kind, mu, sigma);
                prop_assert!(eval_baf(&q, z) <= eval_baf(&q, z + dz));
            }
            let g = p(BafKind::Gaussian, mu, sigma);
            prop_assert!(eval_baf(&g, z) <= eval_baf(&g, mu));
            // Unimodal: moving away from mu never increases the value.
            let away = if z >= mu { z + dz } else { z - dz };
            prop_assert!(eval_baf(&g, away) <= eval_baf(&g, z));
        }

        #[test]
        fn data_driven_picks_column_values(seed in 0u64..1000, m in 1usize..30) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let column: Vec<f64> = (0..17).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let locs = generate_locations(PlacementStrategy::DataDriven, m, &column, &mut rng).unwrap();
            prop_assert_eq!(locs.len(), m);
            for l in locs {
                prop_assert!(column.contains(&l));
            }
        }
    }
}
