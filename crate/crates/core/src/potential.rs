//! Shared evaluation record and the exponential-weights potential.

use serde::Serialize;

use crate::error::{Error, Result};

/// Value and derivatives of a potential at one point `(x, t)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialEval {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: Option<Vec<Vec<f64>>>,
    /// Zero for closed-form potentials.
    pub quadrature_error_estimate: f64,
}

/// Log-sum-exp `(1/η) log Σ e^{η x_k}`, shifted by the max for stability.
pub fn log_sum_exp(x: &[f64], eta: f64) -> f64 {
    let m = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = x.iter().map(|xk| (eta * (xk - m)).exp()).sum();
    m + s.ln() / eta
}

/// Softmax weights `e^{η x_i} / Σ e^{η x_k}`.
pub fn softmax(x: &[f64], eta: f64) -> Vec<f64> {
    let m = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = x.iter().map(|xk| (eta * (xk - m)).exp()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|wk| wk / s).collect()
}

/// Exponential-weights potential `w(x, t) = (1/η) log Σ e^{η x_k} - η t / 2`
/// with its gradient and Hessian `η (diag(p) - p pᵀ)`.
pub fn exp_potential(x: &[f64], t: f64, eta: f64) -> Result<PotentialEval> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::invalid(format!("learning rate must be positive, got {eta}")));
    }
    if x.is_empty() {
        return Err(Error::invalid("empty regret vector"));
    }
    let p = softmax(x, eta);
    let n = x.len();
    let hessian = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| eta * (if i == j { p[i] } else { 0.0 } - p[i] * p[j]))
                .collect()
        })
        .collect();
    Ok(PotentialEval {
        value: log_sum_exp(x, eta) - 0.5 * eta * t,
        gradient: p,
        hessian: Some(hessian),
        quadrature_error_estimate: 0.0,
    })
}

/// Learning rate `√(2 log N / |T|)` that balances the two terms of the bound.
pub fn tuned_eta(n: usize, horizon: u64) -> f64 {
    (2.0 * (n as f64).ln() / horizon as f64).sqrt()
}
