//! One network layer: `n_out` nodes, each an h-function stacking one block
//! per input column.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::LayerConfig;
use super::streams::StreamSource;
use crate::basis::{generate_locations, BafKind, BafParams};
use crate::blocks::{fit_block_detailed, Block};
use crate::error::{Error, Result};
use crate::linsolve::{solve_ridge, DesignMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    /// One block per input column, in column order.
    pub blocks: Vec<Block>,
    pub h_weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub config: LayerConfig,
    pub nodes: Vec<Node>,
}

/// Training-time diagnostics for one fitted layer.
#[derive(Debug, Clone)]
pub struct LayerFit {
    pub layer: Layer,
    /// Node outputs on the training inputs, `N x n_out`.
    pub output: DesignMatrix,
    /// `block_sse[q][p]`: training SSE of block `p` of node `q`.
    pub block_sse: Vec<Vec<f64>>,
    /// Training SSE of each node's h-function.
    pub h_sse: Vec<f64>,
}

/// Weights combining a node's block responses (`N x n_in`) into one output.
/// A zero penalty gives the minimum-norm least-squares solution.
pub fn fit_h(block_responses: &DesignMatrix, y: &[f64], lambda_h: f64) -> Result<Vec<f64>> {
    Ok(solve_ridge(block_responses, y, lambda_h)?.solution)
}

struct NodeFit {
    node: Node,
    output: Vec<f64>,
    block_sse: Vec<f64>,
    h_sse: f64,
}

fn block_bafs(cfg: &LayerConfig, column: &[f64], streams: &dyn StreamSource, node: usize, input: usize) -> Result<Vec<BafParams>> {
    if cfg.kind == BafKind::Identity {
        return Ok(vec![BafParams::identity()]);
    }
    let mut rng = streams.stream(node, input);
    generate_locations(cfg.placement, cfg.m, column, &mut rng)?
        .into_iter()
        .map(|mu| BafParams::new(cfg.kind, mu, cfg.sigma))
        .collect()
}

fn fit_node(z_in: &DesignMatrix, y: &[f64], cfg: &LayerConfig, streams: &dyn StreamSource, q: usize) -> Result<NodeFit> {
    let fits = (0..z_in.cols())
        .into_par_iter()
        .map(|p| {
            let column = z_in.column(p);
            let bafs = block_bafs(cfg, column, streams, q, p)?;
            fit_block_detailed(p, &bafs, column, y, cfg.lambda_phi)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut blocks = Vec::with_capacity(fits.len());
    let mut responses = Vec::with_capacity(fits.len());
    let mut block_sse = Vec::with_capacity(fits.len());
    for f in fits {
        block_sse.push(f.sse);
        responses.push(f.fitted);
        blocks.push(f.block);
    }
    let phi = DesignMatrix::from_columns(&responses)?;
    let h_weights = fit_h(&phi, y, cfg.lambda_h)?;
    let output = phi.mul_vec(&h_weights);
    let h_sse = output.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(NodeFit {
        node: Node { blocks, h_weights },
        output,
        block_sse,
        h_sse,
    })
}

/// Fits every node of a layer against `y` and returns the layer together
/// with its training outputs (the next layer's inputs).
pub fn fit_layer(
    z_in: &DesignMatrix,
    y: &[f64],
    cfg: &LayerConfig,
    streams: &dyn StreamSource,
) -> Result<(Layer, DesignMatrix)> {
    let fit = fit_layer_detailed(z_in, y, cfg, streams)?;
    Ok((fit.layer, fit.output))
}

pub fn fit_layer_detailed(
    z_in: &DesignMatrix,
    y: &[f64],
    cfg: &LayerConfig,
    streams: &dyn StreamSource,
) -> Result<LayerFit> {
    if y.len() != z_in.rows() {
        return Err(Error::mismatch(format!(
            "layer input has {} rows, target has {}",
            z_in.rows(),
            y.len()
        )));
    }
    if cfg.n_out < 1 {
        return Err(Error::invalid("layer width must be at least 1"));
    }

    // Results are collected in node order whatever the scheduling.
    let fits = (0..cfg.n_out)
        .into_par_iter()
        .map(|q| fit_node(z_in, y, cfg, streams, q))
        .collect::<Result<Vec<_>>>()?;

    let mut nodes = Vec::with_capacity(fits.len());
    let mut outputs = Vec::with_capacity(fits.len());
    let mut block_sse = Vec::with_capacity(fits.len());
    let mut h_sse = Vec::with_capacity(fits.len());
    for f in fits {
        nodes.push(f.node);
        outputs.push(f.output);
        block_sse.push(f.block_sse);
        h_sse.push(f.h_sse);
    }
    let output = DesignMatrix::from_columns(&outputs)
        .map_err(|e| Error::Numeric(format!("layer produced unusable outputs: {e}")))?;
    Ok(LayerFit {
        layer: Layer {
            config: cfg.clone(),
            nodes,
        },
        output,
        block_sse,
        h_sse,
    })
}

impl Node {
    /// Node output on a batch of layer inputs.
    pub fn forward(&self, z_in: &DesignMatrix) -> Result<Vec<f64>> {
        let responses: Vec<Vec<f64>> = self
            .blocks
            .iter()
            .map(|b| b.eval_column(z_in.column(b.input_index)))
            .collect();
        Ok(DesignMatrix::from_columns(&responses)?.mul_vec(&self.h_weights))
    }
}

impl Layer {
    pub fn n_in(&self) -> usize {
        self.nodes.first().map_or(0, |n| n.blocks.len())
    }

    pub fn n_out(&self) -> usize {
        self.nodes.len()
    }

    pub fn forward(&self, z_in: &DesignMatrix) -> Result<DesignMatrix> {
        if z_in.cols() != self.n_in() {
            return Err(Error::mismatch(format!(
                "layer expects {} inputs, got {}",
                self.n_in(),
                z_in.cols()
            )));
        }
        let outputs = self
            .nodes
            .par_iter()
            .map(|node| node.forward(z_in))
            .collect::<Result<Vec<_>>>()?;
        DesignMatrix::from_columns(&outputs)
            .map_err(|e| Error::Numeric(format!("layer produced unusable outputs: {e}")))
    }

    pub(crate) fn validate(&self, n_in: usize) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::invalid("layer has no nodes"));
        }
        for (q, node) in self.nodes.iter().enumerate() {
            if node.blocks.len() != n_in || node.h_weights.len() != n_in {
                return Err(Error::invalid(format!(
                    "node {q} has {} blocks and {} h-weights, expected {n_in}",
                    node.blocks.len(),
                    node.h_weights.len()
                )));
            }
            if node.h_weights.iter().any(|w| !w.is_finite()) {
                return Err(Error::invalid(format!("node {q} has non-finite h-weights")));
            }
            for (p, block) in node.blocks.iter().enumerate() {
                if block.input_index != p {
                    return Err(Error::invalid(format!("node {q} block {p} reads input {}", block.input_index)));
                }
                block.validate()?;
            }
        }
        Ok(())
    }
}
