//! Max potential `ψ`, the closed-form solution of
//! `ψ_t + κ max_i ∂²_i ψ = 0`, `ψ(x, 0) = max_i x_i`.
//!
//! In ranked coordinates `x_(1) ≥ … ≥ x_(N)`,
//!
//! ```text
//! ψ(x, t) = (1/N) Σ_i x_(i) + s Σ_{l=1}^{N-1} c_l f(z_l),
//!   s = √(-2κt),  c_l = 1/(l(l+1)),
//!   z_l = ((Σ_{n≤l} x_(n)) - l x_(l+1)) / s,
//!   f(z) = √(2/π) e^{-z²/2} + z erf(z/√2).
//! ```
//!
//! `∂z_l/∂x_(i)` is `1/s` for `i ≤ l`, `-l/s` for `i = l + 1` and zero
//! otherwise; the gradient and Hessian below are assembled from that
//! Jacobian.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::potential::PotentialEval;
use crate::special::{erf, SQRT_2_OVER_PI};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxPotentialParams {
    pub kappa: f64,
}

impl MaxPotentialParams {
    pub fn new(kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::invalid(format!("diffusion factor must be positive, got {kappa}")));
        }
        Ok(Self { kappa })
    }
}

/// `(f(z), f'(z), f''(z))`.
pub fn f_eval(z: f64) -> (f64, f64, f64) {
    let a = z.abs();
    let f2 = SQRT_2_OVER_PI * (-0.5 * a * a).exp();
    let e = erf(a * FRAC_1_SQRT_2);
    let f = f2 + a * e;
    (f, e.copysign(z), f2)
}

/// `1/(l(l+1))` for `l ≥ 1`.
#[inline]
pub fn comb_coefficient(l: usize) -> f64 {
    1.0 / (l * (l + 1)) as f64
}

/// Ranked coordinates of `x` at a fixed time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedView {
    /// `order[r]` is the original index holding rank `r` (0-based).
    pub order: Vec<usize>,
    /// `z[l - 1] = z_l`, nondecreasing.
    pub z: Vec<f64>,
    pub scale: f64,
}

/// Original indices sorted by value descending, ties by lowest index.
pub fn rank_descending(x: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    // sort_by is stable
    order.sort_by(|&a, &b| x[b].partial_cmp(&x[a]).unwrap_or(std::cmp::Ordering::Equal));
    order
}

impl RankedView {
    pub fn new(x: &[f64], t: f64, params: &MaxPotentialParams) -> Result<Self> {
        Self::with_order(x, t, params, rank_descending(x))
    }

    /// Uses a caller-supplied ranking, which must sort `x` descending. Any
    /// ordering of tied coordinates is accepted.
    pub fn with_order(x: &[f64], t: f64, params: &MaxPotentialParams, order: Vec<usize>) -> Result<Self> {
        if x.len() < 2 {
            return Err(Error::invalid("max potential needs at least two coordinates"));
        }
        if !(t < 0.0) {
            return Err(Error::invalid(format!("max potential needs t < 0 (got {t}); use psi_boundary at t = 0")));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("regret vector has non-finite components"));
        }
        let mut seen = vec![false; x.len()];
        if order.len() != x.len() || !order.iter().all(|&i| i < x.len() && !std::mem::replace(&mut seen[i], true)) {
            return Err(Error::invalid("ranking is not a permutation"));
        }
        if order.windows(2).any(|w| x[w[0]] < x[w[1]]) {
            return Err(Error::invalid("ranking does not sort x descending"));
        }
        let scale = (-2.0 * params.kappa * t).sqrt();
        let n = x.len();
        let mut z = Vec::with_capacity(n - 1);
        let mut prefix = 0.0;
        for l in 1..n {
            prefix += x[order[l - 1]];
            // prefix - l x_(l+1) = Σ_{n≤l} (x_(n) - x_(l+1)), each term ≥ 0
            let next = x[order[l]];
            let num: f64 = order[..l].iter().map(|&k| x[k] - next).sum();
            debug_assert!((num - (prefix - l as f64 * next)).abs() <= 1e-9 * (1.0 + prefix.abs()));
            z.push(num / scale);
        }
        Ok(Self { order, z, scale })
    }

    fn n(&self) -> usize {
        self.order.len()
    }

    /// `∂z_l/∂x_(r)` times `s`, with rank `r` and `l` both 1-based.
    #[inline]
    fn jac(r: usize, l: usize) -> f64 {
        if r <= l {
            1.0
        } else if r == l + 1 {
            -(l as f64)
        } else {
            0.0
        }
    }

    /// Gradient in ranked order.
    pub fn ranked_gradient(&self) -> Vec<f64> {
        let n = self.n();
        let fp: Vec<f64> = self.z.iter().map(|&z| f_eval(z).1).collect();
        (1..=n)
            .map(|r| {
                1.0 / n as f64
                    + (1..n).map(|l| comb_coefficient(l) * fp[l - 1] * Self::jac(r, l)).sum::<f64>()
            })
            .collect()
    }

    /// Hessian in ranked order.
    pub fn ranked_hessian(&self) -> Vec<Vec<f64>> {
        let n = self.n();
        let fpp: Vec<f64> = self.z.iter().map(|&z| f_eval(z).2).collect();
        let mut h = vec![vec![0.0; n]; n];
        for r in 1..=n {
            for c in r..=n {
                let v: f64 = (1..n)
                    .map(|l| comb_coefficient(l) * fpp[l - 1] * Self::jac(r, l) * Self::jac(c, l))
                    .sum::<f64>()
                    / self.scale;
                h[r - 1][c - 1] = v;
                h[c - 1][r - 1] = v;
            }
        }
        h
    }

    fn unrank_vector(&self, ranked: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; ranked.len()];
        for (r, &i) in self.order.iter().enumerate() {
            out[i] = ranked[r];
        }
        out
    }

    fn unrank_matrix(&self, ranked: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = ranked.len();
        let mut out = vec![vec![0.0; n]; n];
        for (r, &i) in self.order.iter().enumerate() {
            for (c, &j) in self.order.iter().enumerate() {
                out[i][j] = ranked[r][c];
            }
        }
        out
    }

    pub fn gradient(&self) -> Vec<f64> {
        self.unrank_vector(&self.ranked_gradient())
    }

    pub fn hessian(&self) -> Vec<Vec<f64>> {
        self.unrank_matrix(&self.ranked_hessian())
    }
}

/// `ψ(x, t)`, closed form.
pub fn psi(x: &[f64], t: f64, params: &MaxPotentialParams) -> Result<f64> {
    let view = RankedView::new(x, t, params)?;
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let tail: f64 = view
        .z
        .iter()
        .enumerate()
        .map(|(k, &z)| comb_coefficient(k + 1) * f_eval(z).0)
        .sum();
    Ok(mean + view.scale * tail)
}

/// `ψ(x, 0) = max_i x_i`.
pub fn psi_boundary(x: &[f64]) -> f64 {
    x.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

pub fn psi_grad(x: &[f64], t: f64, params: &MaxPotentialParams) -> Result<Vec<f64>> {
    Ok(RankedView::new(x, t, params)?.gradient())
}

/// Analytic Hessian. At exact ties the stable ranking is used; `ψ` is C²,
/// so the result does not depend on how ties are ordered.
pub fn psi_hessian(x: &[f64], t: f64, params: &MaxPotentialParams) -> Result<Vec<Vec<f64>>> {
    Ok(RankedView::new(x, t, params)?.hessian())
}

/// `ψ_t = -(√κ / √(-2t)) Σ c_l f''(z_l)`.
pub fn psi_time_deriv(x: &[f64], t: f64, params: &MaxPotentialParams) -> Result<f64> {
    let view = RankedView::new(x, t, params)?;
    let s: f64 = view
        .z
        .iter()
        .enumerate()
        .map(|(k, &z)| comb_coefficient(k + 1) * f_eval(z).2)
        .sum();
    Ok(-(params.kappa.sqrt() / (-2.0 * t).sqrt()) * s)
}

/// Value, gradient and Hessian in one pass.
pub fn psi_eval(x: &[f64], t: f64, params: &MaxPotentialParams) -> Result<PotentialEval> {
    let view = RankedView::new(x, t, params)?;
    Ok(PotentialEval {
        value: psi(x, t, params)?,
        gradient: view.gradient(),
        hessian: Some(view.hessian()),
        quadrature_error_estimate: 0.0,
    })
}
