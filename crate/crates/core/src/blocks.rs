//! Block functions: a least-squares combination of basis functions of a single
//! input column, fitted directly against the target.

use serde::{Deserialize, Serialize};

use crate::basis::{BafKind, BafParams};
use crate::error::{Error, Result};
use crate::evaluation::r_squared;
use crate::linsolve::{solve_ridge, DesignMatrix};

/// A fitted block. All basis functions share one kind and slope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub input_index: usize,
    pub kind: BafKind,
    pub mu: Vec<f64>,
    pub sigma: f64,
    pub c: Vec<f64>,
    /// Coefficient of determination on the training target.
    pub train_r2: f64,
}

/// A block together with its training-time response.
#[derive(Debug, Clone)]
pub struct BlockFit {
    pub block: Block,
    /// Block output on the training column.
    pub fitted: Vec<f64>,
    pub sse: f64,
}

impl Block {
    pub fn m(&self) -> usize {
        self.c.len()
    }

    pub fn bafs(&self) -> impl Iterator<Item = BafParams> + '_ {
        self.mu.iter().map(|&mu| BafParams {
            kind: self.kind,
            mu,
            sigma: self.sigma,
        })
    }

    pub fn eval(&self, z: f64) -> f64 {
        let f = self.kind.function();
        self.mu
            .iter()
            .zip(&self.c)
            .map(|(&mu, &c)| c * f.eval(z, mu, self.sigma))
            .sum()
    }

    pub fn eval_column(&self, column: &[f64]) -> Vec<f64> {
        let f = self.kind.function();
        let mut out = vec![0.0; column.len()];
        for (&mu, &c) in self.mu.iter().zip(&self.c) {
            for (o, &z) in out.iter_mut().zip(column) {
                *o += c * f.eval(z, mu, self.sigma);
            }
        }
        out
    }

    /// Structural checks for blocks read back from a model file.
    pub fn validate(&self) -> Result<()> {
        if self.c.is_empty() || self.c.len() != self.mu.len() {
            return Err(Error::invalid(format!(
                "block on input {} has {} weights for {} locations",
                self.input_index,
                self.c.len(),
                self.mu.len()
            )));
        }
        if self.c.iter().chain(&self.mu).any(|v| !v.is_finite()) {
            return Err(Error::invalid("block contains non-finite parameters"));
        }
        if self.kind.is_parametric() && !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::invalid("block sigma must be > 0"));
        }
        Ok(())
    }
}

/// Response matrix with entry `(i, r) = g_r(column[i])`.
pub fn build_design_matrix(bafs: &[BafParams], column: &[f64]) -> Result<DesignMatrix> {
    if bafs.is_empty() || column.is_empty() {
        return Err(Error::invalid("design matrix needs at least one basis function and one sample"));
    }
    let mut data = Vec::with_capacity(bafs.len() * column.len());
    for p in bafs {
        let f = p.kind.function();
        data.extend(column.iter().map(|&z| f.eval(z, p.mu, p.sigma)));
    }
    DesignMatrix::new(nalgebra::DMatrix::from_vec(column.len(), bafs.len(), data))
}

pub fn fit_block(
    input_index: usize,
    bafs: &[BafParams],
    column: &[f64],
    y: &[f64],
    lambda_phi: f64,
) -> Result<Block> {
    fit_block_detailed(input_index, bafs, column, y, lambda_phi).map(|f| f.block)
}

/// Fits block weights by ridge regression of `y` on the basis responses.
///
/// Identity blocks always use a single basis function and no penalty.
pub fn fit_block_detailed(
    input_index: usize,
    bafs: &[BafParams],
    column: &[f64],
    y: &[f64],
    lambda_phi: f64,
) -> Result<BlockFit> {
    let first = *bafs
        .first()
        .ok_or_else(|| Error::invalid("block needs at least one basis function"))?;
    if bafs.iter().any(|b| b.kind != first.kind || b.sigma != first.sigma) {
        return Err(Error::invalid("all basis functions in a block must share kind and sigma"));
    }
    if column.len() != y.len() {
        return Err(Error::mismatch(format!(
            "input column has {} samples, target has {}",
            column.len(),
            y.len()
        )));
    }
    let (bafs, lambda) = if first.kind == BafKind::Identity {
        (vec![BafParams::identity()], 0.0)
    } else {
        (bafs.to_vec(), lambda_phi)
    };

    let g = build_design_matrix(&bafs, column)?;
    let solved = solve_ridge(&g, y, lambda)?;
    let mut block = Block {
        input_index,
        kind: bafs[0].kind,
        mu: bafs.iter().map(|b| b.mu).collect(),
        sigma: bafs[0].sigma,
        c: solved.solution,
        train_r2: 0.0,
    };
    // Same evaluation path as prediction, so training and inference agree bitwise.
    let fitted = block.eval_column(column);
    block.train_r2 = r_squared(y, &fitted)?;
    let sse = fitted.iter().zip(y).map(|(p, t)| (p - t) * (p - t)).sum();

    Ok(BlockFit { block, fitted, sse })
}

pub fn eval_block(b: &Block, z: f64) -> f64 {
    b.eval(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::eval_baf;
    use crate::testutil::{max_abs_diff, normal_equation_solve, rng, uniform_vec};
    use proptest::prelude::*;

    fn gaussians(mus: &[f64], sigma: f64) -> Vec<BafParams> {
        mus.iter()
            .map(|&mu| BafParams::new(BafKind::Gaussian, mu, sigma).unwrap())
            .collect()
    }

    #[test]
    fn identity_design_matrix() {
        let g = build_design_matrix(&[BafParams::identity()], &[0.1, 0.9]).unwrap();
        assert_eq!((g.rows(), g.cols()), (2, 1));
        assert_eq!(g.column(0), &[0.1, 0.9]);
    }

    #[test]
    fn sigmoid_at_its_location_is_half() {
        let c = 0.37;
        let bafs = [BafParams::new(BafKind::Sigmoid, c, 8.0).unwrap()];
        let g = build_design_matrix(&bafs, &[c; 4]).unwrap();
        assert!(g.column(0).iter().all(|&v| v == 0.5));
    }

    #[test]
    fn design_matrix_entries_match_pointwise_evaluation() {
        let bafs = gaussians(&[0.2, 0.7], 3.0);
        let column = [0.0, 0.5, 1.0];
        let g = build_design_matrix(&bafs, &column).unwrap();
        for (i, &z) in column.iter().enumerate() {
            for (r, b) in bafs.iter().enumerate() {
                assert_eq!(g.get(i, r), eval_baf(b, z));
            }
        }
    }

    #[test]
    fn empty_inputs_rejected() {
        assert!(build_design_matrix(&[], &[0.1]).is_err());
        assert!(build_design_matrix(&[BafParams::identity()], &[]).is_err());
    }

    #[test]
    fn identity_block_recovers_perfect_predictor() {
        let y = [0.1, 0.4, 0.8, 0.3];
        let b = fit_block(0, &[BafParams::identity()], &y, &y, 0.0).unwrap();
        assert!((b.c[0] - 1.0).abs() < 1e-14);
        assert!((b.train_r2 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn identity_block_ignores_penalty_and_extra_bafs() {
        let y = [0.1, 0.4, 0.8, 0.3];
        let bafs = [BafParams::identity(), BafParams::identity()];
        let b = fit_block(0, &bafs, &y, &y, 10.0).unwrap();
        assert_eq!(b.m(), 1);
        assert!((b.c[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn constant_target_reports_zero_r2() {
        let mut r = rng(1);
        let column = uniform_vec(&mut r, 30, 0.0, 1.0);
        let y = vec![0.5; 30];
        let bafs: Vec<_> = [0.1, 0.5, 0.9]
            .iter()
            .map(|&mu| BafParams::new(BafKind::Sigmoid, mu, 2.0).unwrap())
            .collect();
        let fit = fit_block_detailed(0, &bafs, &column, &y, 0.0).unwrap();
        assert_eq!(fit.block.train_r2, 0.0);
        // All-zero weights are feasible, so the fit can only do better.
        assert!(fit.sse <= 30.0 * 0.25);
    }

    #[test]
    fn ridge_weights_match_normal_equation_oracle() {
        let mut r = rng(7);
        let column = uniform_vec(&mut r, 20, 0.0, 1.0);
        let y = uniform_vec(&mut r, 20, -1.0, 1.0);
        let mus = uniform_vec(&mut r, 5, 0.0, 1.0);
        let bafs = gaussians(&mus, 4.0);
        let b = fit_block(0, &bafs, &column, &y, 0.01).unwrap();

        let rows: Vec<Vec<f64>> = column
            .iter()
            .map(|&z| bafs.iter().map(|p| eval_baf(p, z)).collect())
            .collect();
        let expected = normal_equation_solve(&rows, &y, 0.01);
        assert!(max_abs_diff(&b.c, &expected) <= 1e-8);
    }

    #[test]
    fn eval_block_basic_cases() {
        let zero = Block {
            input_index: 0,
            kind: BafKind::Gaussian,
            mu: vec![0.1, 0.5],
            sigma: 3.0,
            c: vec![0.0, 0.0],
            train_r2: 0.0,
        };
        for z in [-1.0, 0.0, 0.3, 7.0] {
            assert_eq!(eval_block(&zero, z), 0.0);
        }
        let double = Block {
            input_index: 0,
            kind: BafKind::Identity,
            mu: vec![0.0],
            sigma: 1.0,
            c: vec![2.0],
            train_r2: 1.0,
        };
        for z in [-1.0, 0.0, 0.3, 7.0] {
            assert_eq!(eval_block(&double, z), 2.0 * z);
        }
    }

    #[test]
    fn refit_reproduces_recorded_sse() {
        let mut r = rng(3);
        let column = uniform_vec(&mut r, 50, 0.0, 1.0);
        let y: Vec<f64> = column.iter().map(|x| (6.0 * x).sin()).collect();
        let bafs = gaussians(&uniform_vec(&mut r, 8, 0.0, 1.0), 5.0);
        let fit = fit_block_detailed(0, &bafs, &column, &y, 0.001).unwrap();
        let sse: f64 = column
            .iter()
            .zip(&y)
            .map(|(&z, &t)| (eval_block(&fit.block, z) - t).powi(2))
            .sum();
        assert!((sse - fit.sse).abs() <= 1e-10);
        assert_eq!(fit.block.eval_column(&column).len(), 50);
    }

    #[test]
    fn shrinkage_is_monotone_in_penalty() {
        let mut r = rng(5);
        let column = uniform_vec(&mut r, 40, 0.0, 1.0);
        let y = uniform_vec(&mut r, 40, 0.0, 1.0);
        let bafs = gaussians(&uniform_vec(&mut r, 6, 0.0, 1.0), 2.0);
        let mut prev = f64::INFINITY;
        for lambda in [0.0, 0.001, 0.01, 0.1, 1.0, 10.0] {
            let b = fit_block(0, &bafs, &column, &y, lambda).unwrap();
            let n = b.c.iter().map(|c| c * c).sum::<f64>().sqrt();
            assert!(n <= prev * (1.0 + 1e-10));
            prev = n;
        }
    }

    #[test]
    fn mixed_kinds_rejected() {
        let bafs = [
            BafParams::new(BafKind::Gaussian, 0.0, 1.0).unwrap(),
            BafParams::new(BafKind::Sigmoid, 0.0, 1.0).unwrap(),
        ];
        assert!(fit_block(0, &bafs, &[0.0, 1.0], &[0.0, 1.0], 0.0).is_err());
        assert!(matches!(
            fit_block(0, &bafs[..1], &[0.0, 1.0], &[0.0], 0.0),
            Err(Error::DimensionMismatch(_))
        ));
    }

    proptest! {
        #[test]
        fn unpenalized_fit_is_optimal(seed in 0u64..5000, probe in proptest::collection::vec(-3.0f64..3.0, 6)) {
            let mut r = rng(seed);
            let column = uniform_vec(&mut r, 25, 0.0, 1.0);
            let y = uniform_vec(&mut r, 25, -1.0, 1.0);
            let bafs: Vec<_> = uniform_vec(&mut r, 6, 0.0, 1.0)
                .into_iter()
                .map(|mu| BafParams::new(BafKind::Sigmoid, mu, 5.0).unwrap())
                .collect();
            let fit = fit_block_detailed(0, &bafs, &column, &y, 0.0).unwrap();
            let g = build_design_matrix(&bafs, &column).unwrap();
            prop_assert!(fit.sse <= g.sse(&probe, &y) + 1e-9);
            prop_assert!(fit.block.train_r2 <= 1.0);
        }
    }
}
