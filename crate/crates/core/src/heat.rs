//! Heat potential `φ(x, t) = E[max_k (x_k - σ G_k)]`, `σ² = -2κt`.
//!
//! `G` has independent coordinates, so every quantity reduces to a 1-D
//! integral against products of Gaussian cdfs:
//!
//! * value: `E max Y = ∫₀^∞ (1 - F(s)) ds - ∫_{-∞}^0 F(s) ds` with
//!   `F(s) = Π_k Φ((s - x_k)/σ)`;
//! * gradient: `∂_i φ = P(i is the argmax) = ∫ ϕ(g) Π_{j≠i} Φ((x_i - x_j)/σ - g) dg`.
//!
//! Integration variables are measured in units of `σ` and centred on
//! `max_k x_k`, which confines every integrand to `[-12, 12]` up to a
//! Gaussian tail below `1e-30`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::potential::PotentialEval;
use crate::quadrature::{integrate, QuadConfig};
use crate::special::{norm_cdf, norm_pdf, norm_sf};

const HALF_WIDTH: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeatPotentialParams {
    pub kappa: f64,
    pub quad_tolerance: f64,
    pub quad_max_nodes: usize,
}

impl HeatPotentialParams {
    pub fn new(kappa: f64) -> Result<Self> {
        Self::with_tolerance(kappa, 1e-10)
    }

    pub fn with_tolerance(kappa: f64, quad_tolerance: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::invalid(format!("diffusion factor must be positive, got {kappa}")));
        }
        if !(quad_tolerance > 0.0) {
            return Err(Error::invalid(format!("quadrature tolerance must be positive, got {quad_tolerance}")));
        }
        Ok(Self {
            kappa,
            quad_tolerance,
            quad_max_nodes: 400_000,
        })
    }

    fn quad(&self, tolerance: f64) -> QuadConfig {
        QuadConfig {
            tolerance,
            max_evaluations: self.quad_max_nodes,
        }
    }

    pub fn sigma(&self, t: f64) -> f64 {
        (-2.0 * self.kappa * t).sqrt()
    }
}

fn check_args(x: &[f64], t: f64) -> Result<()> {
    if x.is_empty() {
        return Err(Error::invalid("empty regret vector"));
    }
    if !(t < 0.0) {
        return Err(Error::invalid(format!(
            "heat potential needs t < 0 (got {t}); use boundary_phi at t = 0"
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("regret vector has non-finite components"));
    }
    Ok(())
}

/// `φ(x, 0) = max_i x_i`.
pub fn boundary_phi(x: &[f64]) -> f64 {
    x.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Value of `φ` with its quadrature error estimate (survival-integral path).
pub fn phi_value_1d(x: &[f64], t: f64, params: &HeatPotentialParams) -> Result<(f64, f64)> {
    check_args(x, t)?;
    let sigma = params.sigma(t);
    let m = boundary_phi(x);
    let d: Vec<f64> = x.iter().map(|xk| (xk - m) / sigma).collect();
    // each half gets half the budget, rescaled to the σ-units variable
    let tol = 0.5 * params.quad_tolerance / sigma;

    let upper = integrate(
        |u| {
            // 1 - Π Φ(u - d_k), computed as -expm1(Σ log1p(-sf))
            let log_f: f64 = d.iter().map(|dk| (-norm_sf(u - dk)).ln_1p()).sum();
            -log_f.exp_m1()
        },
        0.0,
        HALF_WIDTH,
        &[],
        params.quad(tol),
    )?;
    let breaks: Vec<f64> = d.iter().copied().filter(|dk| *dk > -HALF_WIDTH && *dk < 0.0).collect();
    let lower = integrate(
        |u| d.iter().map(|dk| norm_cdf(u - dk)).product::<f64>(),
        -HALF_WIDTH,
        0.0,
        &breaks,
        params.quad(tol),
    )?;
    let value = m + sigma * (upper.value - lower.value);
    let err = sigma * (upper.error_estimate + lower.error_estimate);
    Ok((value, err))
}

/// Heat potential value.
pub fn phi(x: &[f64], t: f64, params: &HeatPotentialParams) -> Result<f64> {
    phi_value_1d(x, t, params).map(|(v, _)| v)
}

fn argmax_probability(x: &[f64], i: usize, sigma: f64, cfg: QuadConfig) -> Result<(f64, f64)> {
    let e: Vec<f64> = x
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, xj)| (x[i] - xj) / sigma)
        .collect();
    let breaks: Vec<f64> = e.iter().copied().filter(|v| v.abs() < HALF_WIDTH).collect();
    let r = integrate(
        |g| norm_pdf(g) * e.iter().map(|ej| norm_cdf(ej - g)).product::<f64>(),
        -HALF_WIDTH,
        HALF_WIDTH,
        &breaks,
        cfg,
    )?;
    Ok((r.value, r.error_estimate))
}

/// `∇φ(x, t)`: the probability that each coordinate attains the max.
pub fn phi_grad(x: &[f64], t: f64, params: &HeatPotentialParams) -> Result<Vec<f64>> {
    phi_grad_with_error(x, t, params).map(|(g, _)| g)
}

fn phi_grad_with_error(x: &[f64], t: f64, params: &HeatPotentialParams) -> Result<(Vec<f64>, f64)> {
    check_args(x, t)?;
    let sigma = params.sigma(t);
    let cfg = params.quad(params.quad_tolerance);
    let mut grad = Vec::with_capacity(x.len());
    let mut err = 0.0;
    for i in 0..x.len() {
        let (g, e) = argmax_probability(x, i, sigma, cfg)?;
        grad.push(g);
        err += e;
    }
    Ok((grad, err))
}

/// Value and gradient in one record. No Hessian: that is only needed by
/// tests, which use [`phi_hessian_fd`].
pub fn phi_eval(x: &[f64], t: f64, params: &HeatPotentialParams) -> Result<PotentialEval> {
    let (value, e1) = phi_value_1d(x, t, params)?;
    let (gradient, e2) = phi_grad_with_error(x, t, params)?;
    Ok(PotentialEval {
        value,
        gradient,
        hessian: None,
        quadrature_error_estimate: e1 + e2,
    })
}

/// Central finite differences of [`phi_grad`]:
/// `H[i][j] = (∂_j φ(x + h e_i) - ∂_j φ(x - h e_i)) / 2h`.
pub fn phi_hessian_fd(x: &[f64], t: f64, params: &HeatPotentialParams, h: f64) -> Result<Vec<Vec<f64>>> {
    if !(h > 0.0) {
        return Err(Error::invalid(format!("finite-difference step must be positive, got {h}")));
    }
    let n = x.len();
    let mut hess = vec![vec![0.0; n]; n];
    let mut probe = x.to_vec();
    for i in 0..n {
        probe[i] = x[i] + h;
        let up = phi_grad(&probe, t, params)?;
        probe[i] = x[i] - h;
        let down = phi_grad(&probe, t, params)?;
        probe[i] = x[i];
        for j in 0..n {
            hess[i][j] = (up[j] - down[j]) / (2.0 * h);
        }
    }
    Ok(hess)
}

/// `E[max of n iid standard Gaussians] = ∫ s · n Φ(s)^{n-1} ϕ(s) ds`.
pub fn gaussian_max_mean(n: usize) -> f64 {
    match n {
        0 => f64::NEG_INFINITY,
        1 => 0.0,
        _ => {
            let k = (n - 1) as f64;
            let cfg = QuadConfig {
                tolerance: 1e-13,
                max_evaluations: 1_000_000,
            };
            let r = integrate(
                |s| {
                    let log_pow = k * (-norm_sf(s)).ln_1p();
                    s * n as f64 * log_pow.exp() * norm_pdf(s)
                },
                -15.0,
                15.0,
                &[0.0],
                cfg,
            )
            .expect("fixed smooth integrand on a finite range");
            r.value
        }
    }
}

/// Gauss–Hermite nodes and weights for the standard normal weight
/// `ϕ(g)`, from Newton iteration on orthonormal Hermite polynomials.
pub fn gauss_hermite_normal(n: usize) -> (Vec<f64>, Vec<f64>) {
    // physicists' rule for e^{-y²}, then g = √2 y, w = w_y / √π
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let mut y = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let mut z = 0.0f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * n as f64 + 1.0).sqrt() - 1.85575 * (2.0 * n as f64 + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * (n as f64).powf(0.426) / z,
            2 => 1.86 * z - 0.86 * y[0],
            3 => 1.91 * z - 0.91 * y[1],
            _ => 2.0 * z - y[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * n as f64).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        y[i] = z;
        y[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    let s2 = std::f64::consts::SQRT_2;
    let sp = std::f64::consts::PI.sqrt();
    (y.iter().map(|v| v * s2).collect(), w.iter().map(|v| v / sp).collect())
}

/// Independent evaluation of `φ` by Gauss–Hermite quadrature of the
/// argmax decomposition `Σ_i E[Y_i 1{i is the argmax}]`, conditioning on
/// `G_i`. The conditional integrand is smooth, unlike `max` itself.
/// Cross-check only.
pub fn phi_gauss_hermite(x: &[f64], t: f64, kappa: f64, nodes: usize) -> Result<f64> {
    check_args(x, t)?;
    let sigma = (-2.0 * kappa * t).sqrt();
    let m = boundary_phi(x);
    let (g, w) = gauss_hermite_normal(nodes);
    let mut total = 0.0;
    for i in 0..x.len() {
        for (gk, wk) in g.iter().zip(&w) {
            let others: f64 = x
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, xj)| norm_cdf((x[i] - xj) / sigma - gk))
                .product();
            total += wk * (x[i] - m - sigma * gk) * others;
        }
    }
    Ok(m + total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn params(kappa: f64) -> HeatPotentialParams {
        HeatPotentialParams::with_tolerance(kappa, 1e-12).unwrap()
    }

    #[test]
    fn value_at_origin_two_experts() {
        let v = phi(&[0.0, 0.0], -1.0, &params(1.0)).unwrap();
        assert!((v - (2.0 / PI).sqrt()).abs() < 1e-11, "{v}");
    }

    #[test]
    fn value_at_origin_three_experts() {
        // σ = √(2·½·4) = 2, E max of 3 = 3/(2√π)
        let v = phi(&[0.0; 3], -4.0, &params(0.5)).unwrap();
        assert!((v - 2.0 * 3.0 / (2.0 * PI.sqrt())).abs() < 1e-11, "{v}");
    }

    #[test]
    fn dominated_coordinate() {
        let v = phi(&[100.0, 0.0], -1.0, &params(1.0)).unwrap();
        assert!((v - 100.0).abs() < 1e-10);
    }

    #[test]
    fn translation_along_ones() {
        let p = params(0.8);
        let base = phi(&[0.0; 4], -2.5, &p).unwrap();
        let shifted = phi(&[3.25; 4], -2.5, &p).unwrap();
        assert!((shifted - base - 3.25).abs() < 1e-10);
    }

    #[test]
    fn boundary_values() {
        assert_eq!(boundary_phi(&[1.0, 0.0]), 1.0);
        assert_eq!(boundary_phi(&[0.0, 0.0, 0.0]), 0.0);
        assert_eq!(boundary_phi(&[-3.0, -5.0]), -3.0);
    }

    #[test]
    fn rejects_nonnegative_time() {
        assert!(matches!(phi(&[0.0, 0.0], 0.0, &params(1.0)), Err(Error::InvalidInput(_))));
        assert!(phi_grad(&[0.0, 0.0], 0.5, &params(1.0)).is_err());
        assert!(HeatPotentialParams::new(0.0).is_err());
    }

    #[test]
    fn gradient_uniform_at_origin() {
        for n in 2..=5 {
            let g = phi_grad(&vec![0.0; n], -3.0, &params(1.0)).unwrap();
            for gi in g {
                assert!((gi - 1.0 / n as f64).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn gradient_two_experts_closed_form() {
        let (a, b, kappa, t) = (1.3, -0.4, 0.75, -2.0);
        let p = params(kappa);
        let g = phi_grad(&[a, b], t, &p).unwrap();
        let s = p.sigma(t) * 2f64.sqrt();
        assert!((g[0] - norm_cdf((a - b) / s)).abs() < 1e-11);
        assert!((g[0] + g[1] - 1.0).abs() < 1e-11);
    }

    #[test]
    fn gradient_dominant_coordinate() {
        let g = phi_grad(&[10.0, 0.0, 0.0], -1.0, &params(1.0)).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-6 && g[1].abs() < 1e-6 && g[2].abs() < 1e-6);
    }

    #[test]
    fn gaussian_max_closed_forms() {
        assert_eq!(gaussian_max_mean(1), 0.0);
        assert!((gaussian_max_mean(2) - 1.0 / PI.sqrt()).abs() < 1e-12);
        assert!((gaussian_max_mean(3) - 1.5 / PI.sqrt()).abs() < 1e-12);
        // E max of 4 = (6/π^{3/2}) atan(√2)
        let four = 6.0 / PI.powf(1.5) * 2f64.sqrt().atan();
        assert!((gaussian_max_mean(4) - four).abs() < 1e-12);
    }

    #[test]
    fn hermite_rule_integrates_moments() {
        let (g, w) = gauss_hermite_normal(40);
        let m0: f64 = w.iter().sum();
        let m2: f64 = g.iter().zip(&w).map(|(x, wi)| wi * x * x).sum();
        let m4: f64 = g.iter().zip(&w).map(|(x, wi)| wi * x.powi(4)).sum();
        assert!((m0 - 1.0).abs() < 1e-13);
        assert!((m2 - 1.0).abs() < 1e-12);
        assert!((m4 - 3.0).abs() < 1e-11);
    }

    #[test]
    fn hessian_structure_two_experts() {
        let h = phi_hessian_fd(&[0.0, 0.0], -1.0, &params(1.0), 1e-4).unwrap();
        assert!(h[0][1] < 0.0 && h[1][0] < 0.0);
        assert!(h[0][0] > 0.0 && h[1][1] > 0.0);
        // N = 2: ∂₁₁φ = ϕ(0)/(σ√2) with σ = √2
        let exact = norm_pdf(0.0) / 2.0;
        assert!((h[0][0] - exact).abs() < 1e-6);
    }
}
