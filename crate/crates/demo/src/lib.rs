//! Browser bindings. Every export takes plain numbers or strings and returns
//! a JSON string, so the page needs no generated TypeScript types. The
//! `*_json` functions are the same operations for native callers and tests.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use regret_potentials::bounds::{asymptotic_constant, bound_report_for, BoundStrategy};
use regret_potentials::dp::{state_estimate, verify_horizon, DpLimits, DpOptions};
use regret_potentials::heat::{phi, HeatPotentialParams};
use regret_potentials::max_potential::{psi, MaxPotentialParams};
use regret_potentials::potential::exp_potential;
use regret_potentials::strategies::{kappa_h, kappa_m};

/// Largest expert count offered by the constant plot.
pub const MAX_PLOT_EXPERTS: usize = 64;
/// Heat-potential slices use a coarser tolerance to stay interactive.
const SLICE_QUAD_TOL: f64 = 1e-8;
/// The in-browser exact solver is capped well below the native default;
/// the cap applies to the a-priori state estimate so refusals are instant.
const DEMO_MAX_STATES: u64 = 200_000;

#[derive(Serialize)]
struct Curve {
    strategy: &'static str,
    direction: String,
    c_n: Vec<f64>,
    asymptote: Vec<f64>,
}

#[derive(Serialize)]
struct Curves {
    horizon: u64,
    n: Vec<usize>,
    curves: Vec<Curve>,
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// `C_N = bound / √|T|` for every bound over `n_min..=n_max` and its `|T| → ∞` limit.
pub fn bound_curves_json(n_min: usize, n_max: usize, horizon: u64) -> Result<String, String> {
    if n_min < 2 || n_max < n_min || n_max > MAX_PLOT_EXPERTS {
        return Err(format!("expert range must lie within 2..={MAX_PLOT_EXPERTS}"));
    }
    let ns: Vec<usize> = (n_min..=n_max).collect();
    let mut curves = Vec::new();
    for s in BoundStrategy::ALL {
        let c_n = ns
            .iter()
            .map(|&n| bound_report_for(s, n, horizon).map(|r| r.c_n))
            .collect::<Result<Vec<_>, _>>()
            .map_err(err)?;
        curves.push(Curve {
            strategy: s.as_str(),
            direction: s.direction().to_string(),
            c_n,
            asymptote: ns.iter().map(|&n| asymptotic_constant(s, n)).collect(),
        });
    }
    serde_json::to_string(&Curves { horizon, n: ns, curves }).map_err(err)
}

#[derive(Serialize)]
struct Slice {
    potential: String,
    kappa: f64,
    t: f64,
    u: Vec<f64>,
    value: Vec<f64>,
    boundary: Vec<f64>,
}

/// Potential along `x + u e_1` for `u` in `[lo, hi]`, next to the final
/// regret `max x`. `kappa <= 0` picks the default factor for the potential.
pub fn potential_slice_json(
    potential: &str,
    base: &[f64],
    t: f64,
    kappa: f64,
    lo: f64,
    hi: f64,
    points: usize,
) -> Result<String, String> {
    let n = base.len();
    if n < 2 {
        return Err("the regret vector needs at least two components".into());
    }
    if !(lo < hi) || !(2..=2000).contains(&points) {
        return Err("need lo < hi and between 2 and 2000 points".into());
    }
    let kappa = match (potential, kappa > 0.0) {
        (_, true) => kappa,
        ("heat", false) => kappa_h(n),
        ("max", false) => kappa_m(n),
        _ => 1.0,
    };
    let heat = HeatPotentialParams::with_tolerance(kappa, SLICE_QUAD_TOL).map_err(err)?;
    let max = MaxPotentialParams::new(kappa).map_err(err)?;
    let eval = |x: &[f64]| -> Result<f64, String> {
        match potential {
            "heat" => phi(x, t, &heat).map_err(err),
            "max" => psi(x, t, &max).map_err(err),
            // for exp, kappa doubles as the learning rate
            "exp" => exp_potential(x, t, kappa).map(|e| e.value).map_err(err),
            other => Err(format!("unknown potential `{other}`")),
        }
    };
    let mut out = Slice {
        potential: potential.to_string(),
        kappa,
        t,
        u: Vec::with_capacity(points),
        value: Vec::with_capacity(points),
        boundary: Vec::with_capacity(points),
    };
    let mut x = base.to_vec();
    for k in 0..points {
        let u = lo + (hi - lo) * k as f64 / (points - 1) as f64;
        x[0] = base[0] + u;
        out.u.push(u);
        out.value.push(eval(&x)?);
        out.boundary.push(x.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    }
    serde_json::to_string(&out).map_err(err)
}

/// Exact game values against every bound for one `(N, |T|)`.
pub fn verify_json(n: usize, horizon: u64) -> Result<String, String> {
    let estimate = state_estimate(n, horizon);
    if estimate > DEMO_MAX_STATES {
        return Err(format!(
            "N = {n}, |T| = {horizon} may need {estimate} states; the page allows {DEMO_MAX_STATES}"
        ));
    }
    let opts = DpOptions {
        limits: DpLimits {
            max_states: DEMO_MAX_STATES,
            ..DpLimits::default()
        },
        ..DpOptions::default()
    };
    let report = verify_horizon(n, horizon, &opts).map_err(err)?;
    serde_json::to_string(&report).map_err(err)
}

fn parse_vector(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| format!("`{v}` is not a number")))
        .collect()
}

#[wasm_bindgen]
pub fn bound_curves(n_min: usize, n_max: usize, horizon: f64) -> Result<String, JsError> {
    if !(horizon >= 1.0 && horizon <= 1e15) {
        return Err(JsError::new("horizon must be between 1 and 1e15"));
    }
    bound_curves_json(n_min, n_max, horizon as u64).map_err(|e| JsError::new(&e))
}

/// `base` is a comma-separated regret vector.
#[wasm_bindgen]
pub fn potential_slice(
    potential: &str,
    base: &str,
    t: f64,
    kappa: f64,
    lo: f64,
    hi: f64,
    points: usize,
) -> Result<String, JsError> {
    let base = parse_vector(base).map_err(|e| JsError::new(&e))?;
    potential_slice_json(potential, &base, t, kappa, lo, hi, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn verify(n: usize, horizon: u32) -> Result<String, JsError> {
    verify_json(n, horizon as u64).map_err(|e| JsError::new(&e))
}
