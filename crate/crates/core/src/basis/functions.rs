//! Univariate basis functions. Every parametric kind is applied to the
//! affine argument `a = sigma * (z - mu)`.

use super::BasisFunction;

pub struct Gaussian;

impl BasisFunction for Gaussian {
    fn name(&self) -> &'static str {
        "gaussian"
    }

    fn eval(&self, z: f64, mu: f64, sigma: f64) -> f64 {
        let a = sigma * (z - mu);
        (-(a * a)).exp()
    }
}

pub struct Sigmoid;

impl BasisFunction for Sigmoid {
    fn name(&self) -> &'static str {
        "sigmoid"
    }

    fn eval(&self, z: f64, mu: f64, sigma: f64) -> f64 {
        let a = sigma * (z - mu);
        // Branch on sign so exp never overflows.
        if a >= 0.0 {
            1.0 / (1.0 + (-a).exp())
        } else {
            let e = a.exp();
            e / (1.0 + e)
        }
    }
}

pub struct Relu;

impl BasisFunction for Relu {
    fn name(&self) -> &'static str {
        "relu"
    }

    fn eval(&self, z: f64, mu: f64, sigma: f64) -> f64 {
        (sigma * (z - mu)).max(0.0)
    }
}

pub struct Softplus;

impl BasisFunction for Softplus {
    fn name(&self) -> &'static str {
        "softplus"
    }

    fn eval(&self, z: f64, mu: f64, sigma: f64) -> f64 {
        let a = sigma * (z - mu);
        a.max(0.0) + (-a.abs()).exp().ln_1p()
    }
}

pub struct Tanh;

impl BasisFunction for Tanh {
    fn name(&self) -> &'static str {
        "tanh"
    }

    fn eval(&self, z: f64, mu: f64, sigma: f64) -> f64 {
        (sigma * (z - mu)).tanh()
    }
}

/// Passes its input through; ignores location and slope.
pub struct Identity;

impl BasisFunction for Identity {
    fn name(&self) -> &'static str {
        "identity"
    }

    fn eval(&self, z: f64, _mu: f64, _sigma: f64) -> f64 {
        z
    }

    fn output_layer_only(&self) -> bool {
        true
    }

    fn is_parametric(&self) -> bool {
        false
    }
}
