//! Independent oracles shared by unit tests. Nothing here touches the
//! solver paths it is used to check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Gauss-Jordan inverse with partial pivoting.
pub fn invert(mut a: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut inv: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let d = a[col][col];
        for j in 0..n {
            a[col][j] /= d;
            inv[col][j] /= d;
        }
        for i in 0..n {
            if i != col {
                let f = a[i][col];
                for j in 0..n {
                    a[i][j] -= f * a[col][j];
                    inv[i][j] -= f * inv[col][j];
                }
            }
        }
    }
    inv
}

/// `(A^T A + lambda I)^{-1} A^T y` by explicit inversion. `rows[i]` is row i of A.
pub fn normal_equation_solve(rows: &[Vec<f64>], y: &[f64], lambda: f64) -> Vec<f64> {
    let m = rows[0].len();
    let mut gram = vec![vec![0.0; m]; m];
    let mut rhs = vec![0.0; m];
    for (row, &t) in rows.iter().zip(y) {
        for i in 0..m {
            rhs[i] += row[i] * t;
            for j in 0..m {
                gram[i][j] += row[i] * row[j];
            }
        }
    }
    for (i, g) in gram.iter_mut().enumerate() {
        g[i] += lambda;
    }
    let inv = invert(gram);
    (0..m)
        .map(|i| (0..m).map(|j| inv[i][j] * rhs[j]).sum())
        .collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
}

pub fn uniform_vec(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
