//! Strategies for choosing basis-function locations within one input column.

use rand::{Rng, RngCore};

use super::Placement;

/// Sampling interval for a column: its observed range, widened to `[0, 1]`
/// when the observed range already lies inside the unit interval.
pub fn location_range(column: &[f64]) -> (f64, f64) {
    let lo = column.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = column.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo >= 0.0 && hi <= 1.0 {
        (0.0, 1.0)
    } else {
        (lo, hi)
    }
}

/// Locations drawn i.i.d. from `U(lo, hi)`.
pub struct RandomUniform;

impl Placement for RandomUniform {
    fn name(&self) -> &'static str {
        "random"
    }

    fn locations(&self, m: usize, column: &[f64], rng: &mut dyn RngCore) -> Vec<f64> {
        let (lo, hi) = location_range(column);
        (0..m)
            .map(|_| {
                let u: f64 = rng.gen();
                lo + u * (hi - lo)
            })
            .collect()
    }
}

/// Support points: each location is the value of a training sample drawn
/// uniformly with replacement.
pub struct DataDriven;

impl Placement for DataDriven {
    fn name(&self) -> &'static str {
        "data"
    }

    fn locations(&self, m: usize, column: &[f64], rng: &mut dyn RngCore) -> Vec<f64> {
        (0..m)
            .map(|_| column[rng.gen_range(0..column.len())])
            .collect()
    }
}

/// Midpoints of `m` equal cells covering `[lo, hi]`. Consumes no randomness.
pub struct EquallySpaced;

impl Placement for EquallySpaced {
    fn name(&self) -> &'static str {
        "equal"
    }

    fn locations(&self, m: usize, column: &[f64], _rng: &mut dyn RngCore) -> Vec<f64> {
        let (lo, hi) = location_range(column);
        let step = (hi - lo) / m as f64;
        (0..m).map(|i| lo + (i as f64 + 0.5) * step).collect()
    }

    fn output_layer_only(&self) -> bool {
        true
    }

    fn is_random(&self) -> bool {
        false
    }
}
