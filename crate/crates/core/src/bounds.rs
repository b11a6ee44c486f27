//! Nonasymptotic error budgets `E(t) = C + Σ_{τ=t}^{-2} K(τ)` for the heat
//! and max potentials, and the resulting regret bounds at `(0, T)`.
//!
//! The third-order budget sums `(K₂/2)|s|^{-3/2} + (K₃/6)|s|^{-2}` over
//! `s = τ + 1`; the fourth-order budget sums `(K₂/2 + K₄/24)|s|^{-3/2}`.
//! Both sums are replaced by their integral bounds
//!
//! ```text
//! Σ |s|^{-3/2} ≤ 3 - 2/√(|t|-1),      Σ |s|^{-2} ≤ 1 + ln(|t|-1).
//! ```
//!
//! Logarithms are natural.

use std::f64::consts::{E, PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::heat::gaussian_max_mean;
use crate::strategies::{kappa_h, kappa_m};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetVariant {
    Taylor3,
    Taylor4,
    MinOfBoth,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorBudget {
    pub c: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: Option<f64>,
    pub e_of_t: f64,
    pub variant: BudgetVariant,
    /// Set when a constant is used outside the range it was derived for.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub caveat: Option<String>,
}

fn check_time(t: i64, n: usize) -> Result<()> {
    if t > -1 {
        return Err(Error::invalid(format!("error budgets need t <= -1, got {t}")));
    }
    if n < 2 {
        return Err(Error::invalid(format!("error budgets need N >= 2, got {n}")));
    }
    Ok(())
}

/// `(Σ_{s=1}^{|t|-1} s^{-3/2} bound, Σ s^{-2} bound)`; both zero at `t = -1`.
fn sum_bounds(t: i64) -> (f64, f64) {
    let m = (-t - 1) as f64;
    if m < 1.0 {
        (0.0, 0.0)
    } else {
        (3.0 - 2.0 / m.sqrt(), 1.0 + m.ln())
    }
}

fn taylor3(k2: f64, k3: f64, t: i64) -> f64 {
    let (s32, s2) = sum_bounds(t);
    k2 / 2.0 * s32 + k3 / 6.0 * s2
}

struct HeatConstants {
    c: f64,
    k2: f64,
    k3: f64,
    k4: f64,
}

fn heat_constants(n: usize, kappa: f64) -> HeatConstants {
    let nf = n as f64;
    let ln = nf.ln();
    let max_sq = 2.0 * ln + 2.0 * ln.sqrt() + 1.0;
    let a = if n == 2 { 1.0 } else { 2.0 };
    HeatConstants {
        c: 2.0 + (2.0 * kappa).sqrt() * gaussian_max_mean(n),
        k2: kappa.sqrt() / (2.0 * SQRT_2) * (2.0 * (nf + 2.0) * max_sq).sqrt(),
        k3: (3.0 * nf.sqrt() / SQRT_2 + a * (2.0 * ln + 2.0 * ln.sqrt() + 2.0)) / kappa,
        k4: 2.0 * SQRT_2 * nf / kappa.powf(1.5) * (2.0 * 6f64.sqrt() + 3.0 * (2.0 * nf + 4.0).sqrt()),
    }
}

fn heat_caveat(kappa: f64) -> Option<String> {
    (!(0.5..=1.0).contains(&kappa))
        .then(|| format!("kappa = {kappa} lies outside [1/2, 1], where the third-order constant was derived"))
}

/// Lower-bound budget for the heat potential against a symmetric adversary:
/// the smaller of the third- and fourth-order Taylor budgets.
pub fn heat_lb_error(t: i64, n: usize, kappa: f64) -> Result<ErrorBudget> {
    check_time(t, n)?;
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::invalid(format!("kappa must be positive, got {kappa}")));
    }
    let k = heat_constants(n, kappa);
    let (s32, _) = sum_bounds(t);
    let t3 = taylor3(k.k2, k.k3, t);
    let t4 = (k.k2 / 2.0 + k.k4 / 24.0) * s32;
    Ok(ErrorBudget {
        c: k.c,
        k2: k.k2,
        k3: k.k3,
        k4: Some(k.k4),
        e_of_t: k.c + t3.min(t4),
        variant: BudgetVariant::MinOfBoth,
        caveat: heat_caveat(kappa),
    })
}

/// Upper-bound budget for the heat potential with `κ = 1`.
pub fn heat_ub_error(t: i64, n: usize) -> Result<ErrorBudget> {
    check_time(t, n)?;
    let k = heat_constants(n, 1.0);
    Ok(ErrorBudget {
        c: k.c,
        k2: k.k2,
        k3: k.k3,
        k4: None,
        e_of_t: k.c + taylor3(k.k2, k.k3, t),
        variant: BudgetVariant::Taylor3,
        caveat: None,
    })
}

/// Lower-bound budget for the max potential with `κ = 2` against `a^m`.
pub fn max_lb_error(t: i64, n: usize) -> Result<ErrorBudget> {
    check_time(t, n)?;
    let kappa = 2.0;
    let nf = n as f64;
    let frac = (nf - 1.0) / nf;
    let c = 2.0 + 2.0 * (kappa / PI).sqrt() * frac;
    let k2 = frac * kappa.sqrt() / (2.0 * PI.sqrt());
    let k3 = 4.0 / kappa * ((nf - 1.0).powi(2) / nf) * (2.0 / (E * PI)).sqrt();
    Ok(ErrorBudget {
        c,
        k2,
        k3,
        k4: None,
        e_of_t: c + taylor3(k2, k3, t),
        variant: BudgetVariant::Taylor3,
        caveat: None,
    })
}

/// Upper-bound budget for the max potential with `κ = κ_m(N)`.
pub fn max_ub_error(t: i64, n: usize) -> Result<ErrorBudget> {
    check_time(t, n)?;
    let kappa = kappa_m(n);
    let nf = n as f64;
    let c = 2.0;
    let k2 = (nf - 1.0) / nf * (kappa / (E.powi(3) * PI)).sqrt();
    let k3 = 1.0 / (2.0 * kappa) * (2.0 / (E * PI)).sqrt() * (3.5 * nf * nf - 8.0 * nf + 5.0 * nf.ln() + 1.5);
    Ok(ErrorBudget {
        c,
        k2,
        k3,
        k4: None,
        e_of_t: c + taylor3(k2, k3, t),
        variant: BudgetVariant::Taylor3,
        caveat: None,
    })
}

/// Comparison lower bound from `M = ⌊log₂ N⌋` interleaved random walks, each
/// walk's mean distance set to `√(2n/π) exp(1/(12n) - 2/(6n+1))`.
pub fn gyorgy_bound(n: usize, horizon: u64) -> Result<f64> {
    if n < 2 || horizon < 1 {
        return Err(Error::invalid("random-walk bound needs N >= 2 and |T| >= 1"));
    }
    let m = n.ilog2() as u64;
    let total = (0..m)
        .map(|j| {
            // #{1 ≤ t ≤ |T| : t mod M = j}
            let len = horizon / m + u64::from(j != 0 && j <= horizon % m);
            walk_distance(len)
        })
        .sum();
    Ok(total)
}

fn walk_distance(len: u64) -> f64 {
    if len == 0 {
        return 0.0;
    }
    let n = len as f64;
    (2.0 * n / PI).sqrt() * (1.0 / (12.0 * n) - 2.0 / (6.0 * n + 1.0)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Lower,
    Upper,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Lower => "lower",
            Direction::Upper => "upper",
        })
    }
}

/// Named (potential, strategy) pairings with a closed-form bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundStrategy {
    ExpUb,
    HeatLbR,
    HeatLbC,
    HeatLbH,
    HeatUb,
    MaxLb,
    MaxUb,
    GyorgyLb,
}

impl BoundStrategy {
    pub const ALL: [BoundStrategy; 8] = [
        BoundStrategy::ExpUb,
        BoundStrategy::HeatLbR,
        BoundStrategy::HeatLbC,
        BoundStrategy::HeatLbH,
        BoundStrategy::HeatUb,
        BoundStrategy::MaxLb,
        BoundStrategy::MaxUb,
        BoundStrategy::GyorgyLb,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundStrategy::ExpUb => "exp_ub",
            BoundStrategy::HeatLbR => "heat_lb_r",
            BoundStrategy::HeatLbC => "heat_lb_c",
            BoundStrategy::HeatLbH => "heat_lb_h",
            BoundStrategy::HeatUb => "heat_ub",
            BoundStrategy::MaxLb => "max_lb",
            BoundStrategy::MaxUb => "max_ub",
            BoundStrategy::GyorgyLb => "gyorgy_lb",
        }
    }

    pub fn direction(self) -> Direction {
        match self {
            BoundStrategy::ExpUb | BoundStrategy::HeatUb | BoundStrategy::MaxUb => Direction::Upper,
            _ => Direction::Lower,
        }
    }

    /// Diffusion factor of the potential behind the bound, if any.
    pub fn kappa(self, n: usize) -> Option<f64> {
        match self {
            BoundStrategy::HeatLbR | BoundStrategy::HeatLbC => Some(0.5),
            BoundStrategy::HeatLbH => Some(kappa_h(n)),
            BoundStrategy::HeatUb => Some(1.0),
            BoundStrategy::MaxLb => Some(2.0),
            BoundStrategy::MaxUb => Some(kappa_m(n)),
            BoundStrategy::ExpUb | BoundStrategy::GyorgyLb => None,
        }
    }
}

impl fmt::Display for BoundStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "heat_lb" {
            return Ok(BoundStrategy::HeatLbH);
        }
        BoundStrategy::ALL
            .into_iter()
            .find(|b| b.as_str() == s)
            .ok_or_else(|| Error::UnknownStrategy(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub n: usize,
    pub horizon: u64,
    pub strategy: String,
    pub direction: Direction,
    pub potential_value: f64,
    pub error: f64,
    pub bound: f64,
    pub c_n: f64,
}

/// Potential value at `(0, T)` for the pairing.
pub fn potential_at_origin(strategy: BoundStrategy, n: usize, horizon: u64) -> Result<f64> {
    if n < 2 || horizon < 1 {
        return Err(Error::invalid("bounds need N >= 2 and |T| >= 1"));
    }
    let nf = n as f64;
    let h = horizon as f64;
    Ok(match strategy {
        BoundStrategy::ExpUb => (2.0 * h * nf.ln()).sqrt(),
        BoundStrategy::GyorgyLb => gyorgy_bound(n, horizon)?,
        BoundStrategy::HeatLbR | BoundStrategy::HeatLbC | BoundStrategy::HeatLbH | BoundStrategy::HeatUb => {
            let kappa = strategy.kappa(n).unwrap();
            (2.0 * kappa * h).sqrt() * gaussian_max_mean(n)
        }
        BoundStrategy::MaxLb | BoundStrategy::MaxUb => {
            let kappa = strategy.kappa(n).unwrap();
            2.0 * (nf - 1.0) / nf * (kappa * h / PI).sqrt()
        }
    })
}

/// Error term at `t = T` for the pairing (zero for the two bounds that are
/// exact at the origin).
pub fn error_at(strategy: BoundStrategy, n: usize, horizon: u64) -> Result<ErrorBudget> {
    let t = -i64::try_from(horizon).map_err(|_| Error::invalid("horizon too large"))?;
    match strategy {
        BoundStrategy::HeatLbR | BoundStrategy::HeatLbC | BoundStrategy::HeatLbH => {
            heat_lb_error(t, n, strategy.kappa(n).unwrap())
        }
        BoundStrategy::HeatUb => heat_ub_error(t, n),
        BoundStrategy::MaxLb => max_lb_error(t, n),
        BoundStrategy::MaxUb => max_ub_error(t, n),
        BoundStrategy::ExpUb | BoundStrategy::GyorgyLb => {
            check_time(t, n)?;
            Ok(ErrorBudget {
                c: 0.0,
                k2: 0.0,
                k3: 0.0,
                k4: None,
                e_of_t: 0.0,
                variant: BudgetVariant::Taylor3,
                caveat: None,
            })
        }
    }
}

pub fn bound_report_for(strategy: BoundStrategy, n: usize, horizon: u64) -> Result<BoundReport> {
    let value = potential_at_origin(strategy, n, horizon)?;
    let error = error_at(strategy, n, horizon)?.e_of_t;
    let direction = strategy.direction();
    let bound = match direction {
        Direction::Lower => value - error,
        Direction::Upper => value + error,
    };
    Ok(BoundReport {
        n,
        horizon,
        strategy: strategy.as_str().to_string(),
        direction,
        potential_value: value,
        error,
        bound,
        c_n: bound / (horizon as f64).sqrt(),
    })
}

/// Bound report by strategy name; `heat_lb` is an alias of `heat_lb_h`.
pub fn bound_report(strategy: &str, n: usize, horizon: u64) -> Result<BoundReport> {
    bound_report_for(strategy.parse()?, n, horizon)
}

/// Leading-order constant `lim C_N` as `|T| → ∞`.
pub fn asymptotic_constant(strategy: BoundStrategy, n: usize) -> f64 {
    let nf = n as f64;
    match strategy {
        BoundStrategy::ExpUb => (2.0 * nf.ln()).sqrt(),
        BoundStrategy::GyorgyLb => (n.ilog2() as f64).sqrt() * (2.0 / PI).sqrt(),
        BoundStrategy::MaxLb | BoundStrategy::MaxUb => {
            2.0 * (nf - 1.0) / nf * (strategy.kappa(n).unwrap() / PI).sqrt()
        }
        _ => (2.0 * strategy.kappa(n).unwrap()).sqrt() * gaussian_max_mean(n),
    }
}
