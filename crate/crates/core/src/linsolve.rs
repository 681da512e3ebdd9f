//! Dense least-squares and ridge solvers.
//!
//! Every weight vector in the network (block coefficients and h-function
//! weights) comes out of one of the two entry points here:
//!
//! - [`solve_least_squares`]: minimum-norm solution via Householder QR followed
//!   by an SVD of the triangular factor, so rank-deficient systems are handled
//!   with a relative singular-value cutoff.
//! - [`solve_ridge`]: Cholesky solve of the regularized normal equations. A
//!   zero penalty is routed to [`solve_least_squares`].
//!
//! All arithmetic is `f64`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const SVD_MAX_ITERATIONS: usize = 10_000;

/// Dense sample-by-feature matrix. Row `i` is sample `i`.
///
/// Storage is column-major so that a single feature column is a contiguous
/// slice, which is the access pattern used when fitting per-input blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    values: DMatrix<f64>,
}

impl DesignMatrix {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::invalid(format!(
                "design matrix must be non-empty, got {}x{}",
                values.nrows(),
                values.ncols()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            let (row, col) = (pos % values.nrows(), pos / values.nrows());
            return Err(Error::invalid(format!(
                "non-finite design matrix entry at ({row}, {col})"
            )));
        }
        Ok(Self { values })
    }

    pub fn from_row_slice(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::mismatch(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(rows, cols, data))
    }

    /// Builds a matrix from equally long columns.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::mismatch("columns have different lengths"));
        }
        let data: Vec<f64> = columns.iter().flatten().copied().collect();
        Self::new(DMatrix::from_vec(rows, columns.len(), data))
    }

    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn cols(&self) -> usize {
        self.values.ncols()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        let n = self.rows();
        &self.values.as_slice()[j * n..(j + 1) * n]
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[(row, col)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.values
    }

    /// `A x` for a coefficient vector of length `cols`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols(), "coefficient length must equal column count");
        let mut out = vec![0.0; self.rows()];
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.column(j)) {
                *o += a * xj;
            }
        }
        out
    }

    /// Sum of squared residuals `||A x - y||^2`.
    pub fn sse(&self, x: &[f64], y: &[f64]) -> f64 {
        self.mul_vec(x)
            .iter()
            .zip(y)
            .map(|(p, t)| (p - t) * (p - t))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub solution: Vec<f64>,
    /// Rank of the system that was actually solved. The ridge path always
    /// reports full column rank.
    pub effective_rank: usize,
    /// Recomputed from `solution`.
    pub residual_sse: f64,
}

fn check_target(a: &DesignMatrix, y: &[f64]) -> Result<()> {
    if y.len() != a.rows() {
        return Err(Error::mismatch(format!(
            "target has {} entries, design matrix has {} rows",
            y.len(),
            a.rows()
        )));
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("non-finite target value at row {i}")));
    }
    Ok(())
}

fn report(a: &DesignMatrix, y: &[f64], solution: Vec<f64>, effective_rank: usize) -> Result<SolveReport> {
    if solution.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("solver produced non-finite coefficients".into()));
    }
    let residual_sse = a.sse(&solution, y);
    Ok(SolveReport {
        solution,
        effective_rank,
        residual_sse,
    })
}

/// Pseudoinverse applied through an SVD: `V diag(1/s) U^T rhs`, with singular
/// values at or below `tol` dropped.
fn svd_pinv_apply(m: DMatrix<f64>, rhs: &DVector<f64>, tol_rows: usize) -> Result<(DVector<f64>, usize)> {
    let cols = m.ncols();
    let svd = m
        .try_svd(true, true, f64::EPSILON, SVD_MAX_ITERATIONS)
        .ok_or_else(|| Error::Numeric("SVD failed to converge".into()))?;
    let u = svd.u.as_ref().expect("U requested");
    let v_t = svd.v_t.as_ref().expect("V^T requested");
    let s_max = svd.singular_values.iter().copied().fold(0.0_f64, f64::max);
    let tol = tol_rows.max(cols) as f64 * f64::EPSILON * s_max;

    let ut_rhs = u.tr_mul(rhs);
    let mut scaled = DVector::zeros(svd.singular_values.len());
    let mut rank = 0;
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > tol {
            scaled[k] = ut_rhs[k] / s;
            rank += 1;
        }
    }
    Ok((v_t.tr_mul(&scaled), rank))
}

/// Minimum-norm least-squares solution of `A x ~ y`.
pub fn solve_least_squares(a: &DesignMatrix, y: &[f64]) -> Result<SolveReport> {
    check_target(a, y)?;
    let (n, m) = (a.rows(), a.cols());
    let y_vec = DVector::from_column_slice(y);

    let (x, rank) = if n >= m {
        // Reduce to the m x m triangular factor first; the SVD then runs on a
        // small square matrix with the same singular values as A.
        let qr = a.as_matrix().clone().qr();
        let mut qty = y_vec;
        qr.q_tr_mul(&mut qty);
        let r = qr.r();
        let head = qty.rows(0, m).into_owned();
        svd_pinv_apply(r, &head, n)?
    } else {
        svd_pinv_apply(a.as_matrix().clone(), &y_vec, n)?
    };
    report(a, y, x.as_slice().to_vec(), rank)
}

/// Minimizer of `||A x - y||^2 + lambda ||x||^2`.
pub fn solve_ridge(a: &DesignMatrix, y: &[f64], lambda: f64) -> Result<SolveReport> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::invalid(format!(
            "ridge penalty must be finite and >= 0, got {lambda}"
        )));
    }
    if lambda == 0.0 {
        return solve_least_squares(a, y);
    }
    check_target(a, y)?;
    let m = a.cols();
    let mat = a.as_matrix();
    let y_vec = DVector::from_column_slice(y);

    let mut gram = mat.tr_mul(mat);
    for k in 0..m {
        gram[(k, k)] += lambda;
    }
    let rhs = mat.tr_mul(&y_vec);

    let x = match gram.cholesky() {
        Some(chol) => chol.solve(&rhs),
        None => ridge_via_svd(mat.clone(), &y_vec, lambda)?,
    };
    report(a, y, x.as_slice().to_vec(), m)
}

// Only reached when rounding makes the regularized Gram matrix lose
// definiteness (penalty far below the Gram matrix scale).
fn ridge_via_svd(mat: DMatrix<f64>, y: &DVector<f64>, lambda: f64) -> Result<DVector<f64>> {
    let svd = mat
        .try_svd(true, true, f64::EPSILON, SVD_MAX_ITERATIONS)
        .ok_or_else(|| Error::Numeric("SVD failed to converge".into()))?;
    let u = svd.u.as_ref().expect("U requested");
    let v_t = svd.v_t.as_ref().expect("V^T requested");
    let ut_y = u.tr_mul(y);
    let scaled = DVector::from_iterator(
        svd.singular_values.len(),
        svd.singular_values
            .iter()
            .zip(ut_y.iter())
            .map(|(&s, &b)| s * b / (s * s + lambda)),
    );
    Ok(v_t.tr_mul(&scaled))
}
