//! Layered network assembly, training and inference.

mod config;
mod layer;
mod model;
mod streams;

pub use config::{HkanConfig, LayerConfig, LayerRole};
pub use layer::{fit_h, fit_layer, fit_layer_detailed, Layer, LayerFit, Node};
pub use model::{fit_hkan, fit_hkan_traced, fit_hkan_with_stats, predict, train, FitTrace, HkanModel, FORMAT_VERSION};
pub use streams::{LayerStreams, SharedStreams, StreamSource};
