//! Exact value functions for small games by backward induction.
//!
//! * `v_a(x, t) = min_i Σ_q a_t(q) v_a(x + q_i 𝟙 - q, t + 1)` against a fixed
//!   adversary. The player's objective is linear in its distribution, so a
//!   pure expert attains the minimum.
//! * `v_p(x, t) = max_{q ∈ {±1}^N} Σ_i p_t(i) v_p(x + q_i 𝟙 - q, t + 1)` for a
//!   fixed player. `v_p(·, 0) = max` is convex, and expectations and maxima
//!   of convex functions stay convex, so `v_p(·, t + 1)` is convex in `x`.
//!   The continuation is then convex in `q`, its maximum over the cube
//!   `[-1, 1]^N` sits at a vertex, and a point mass on that vertex is an
//!   optimal adversary distribution.
//!
//! With ±1 (or 0) losses every reachable state is an integer vector. When the
//! strategy is translation invariant, states are stored with their minimum
//! subtracted, using `v(x + c𝟙, t) = v(x, t) + c`. Coordinates are never
//! sorted, so correctness does not depend on permutation symmetry.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{bound_report_for, BoundReport, BoundStrategy, Direction};
use crate::error::{Error, Result};
use crate::game::{Adversary, Player, RegretVector};
use crate::strategies::{
    CombAdversary, ExpPlayer, HeatAdversary, HeatPlayer, MaxAdversary, MaxPlayer, RandomizedAdversary,
    UniformPlayer,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DpLimits {
    pub max_experts: usize,
    pub max_horizon: u64,
    /// Cap on the total number of stored states over all layers.
    pub max_states: u64,
}

impl Default for DpLimits {
    fn default() -> Self {
        Self {
            max_experts: 5,
            max_horizon: 12,
            max_states: 5_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DpOptions {
    pub limits: DpLimits,
    /// Subtract the minimum coordinate from every state. Ignored for
    /// strategies that are not translation invariant.
    pub normalize: bool,
}

impl Default for DpOptions {
    fn default() -> Self {
        Self {
            limits: DpLimits::default(),
            normalize: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DpResult {
    /// `v(0, T)`.
    pub value: f64,
    /// Distinct stored states over all layers, including `t = 0`.
    pub states: u64,
}

type Key = Vec<i64>;
/// One option for the optimising side: a lottery over successor states.
type Lottery = Vec<(f64, Key)>;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Min,
    Max,
}

/// Upper estimate of the number of normalised states.
pub fn state_estimate(n: usize, horizon: u64) -> u64 {
    (0..=horizon)
        .map(|k| (n as u64).saturating_mul((2 * k + 1).saturating_pow(n.saturating_sub(1) as u32)))
        .fold(0u64, u64::saturating_add)
}

fn check_guard(n: usize, horizon: u64, limits: &DpLimits) -> Result<()> {
    if n < 2 {
        return Err(Error::invalid("exact values need N >= 2"));
    }
    if horizon < 1 {
        return Err(Error::invalid("exact values need |T| >= 1"));
    }
    if n > limits.max_experts || horizon > limits.max_horizon {
        return Err(Error::ResourceGuard {
            what: format!(
                "N = {n}, |T| = {horizon} exceeds the limits N <= {}, |T| <= {}",
                limits.max_experts, limits.max_horizon
            ),
            estimate: state_estimate(n, horizon),
            limit: limits.max_states,
        });
    }
    Ok(())
}

fn to_lattice(q: &[f64]) -> Result<Vec<i64>> {
    q.iter()
        .map(|&c| {
            if c == c.round() {
                Ok(c as i64)
            } else {
                Err(Error::invalid(format!(
                    "exact values need integer losses, got component {c}"
                )))
            }
        })
        .collect()
}

fn lattice_step(x: &[i64], q: &[i64], i: usize) -> Key {
    x.iter().zip(q).map(|(xj, qj)| xj + q[i] - qj).collect()
}

fn normalise(x: Key, enabled: bool) -> (Key, i64) {
    if !enabled {
        return (x, 0);
    }
    let m = *x.iter().min().unwrap();
    (x.into_iter().map(|v| v - m).collect(), m)
}

fn to_regret(x: &[i64]) -> RegretVector {
    RegretVector::new(x.iter().map(|&v| v as f64).collect())
}

/// Generic layered backward induction from `(0, T)`.
fn solve<F>(n: usize, horizon: u64, options: &DpOptions, normalize: bool, side: Side, options_at: F) -> Result<DpResult>
where
    F: Fn(&[i64], i64) -> Result<Vec<Lottery>> + Sync,
{
    let limits = &options.limits;
    check_guard(n, horizon, limits)?;
    let start = -(horizon as i64);

    // Forward pass: reachable (normalised) states per layer.
    let mut layers: Vec<Vec<Key>> = vec![vec![vec![0; n]]];
    let mut total = 1u64;
    for k in 0..horizon as usize {
        let t = start + k as i64;
        let next: Vec<Vec<Key>> = layers[k]
            .par_iter()
            .map(|x| {
                Ok(options_at(x, t)?
                    .into_iter()
                    .flatten()
                    .map(|(_, y)| normalise(y, normalize).0)
                    .collect())
            })
            .collect::<Result<_>>()?;
        let set: HashSet<Key> = next.into_iter().flatten().collect();
        total += set.len() as u64;
        if total > limits.max_states {
            return Err(Error::ResourceGuard {
                what: format!("state space for N = {n}, |T| = {horizon}"),
                estimate: total.max(state_estimate(n, horizon)),
                limit: limits.max_states,
            });
        }
        let mut layer: Vec<Key> = set.into_iter().collect();
        layer.sort_unstable();
        layers.push(layer);
    }

    // Backward pass.
    let mut values: HashMap<Key, f64> = layers[horizon as usize]
        .iter()
        .map(|x| (x.clone(), *x.iter().max().unwrap() as f64))
        .collect();
    for k in (0..horizon as usize).rev() {
        let t = start + k as i64;
        let next = &values;
        let layer_values: Vec<(Key, f64)> = layers[k]
            .par_iter()
            .map(|x| {
                let lotteries = options_at(x, t)?;
                let mut best = match side {
                    Side::Min => f64::INFINITY,
                    Side::Max => f64::NEG_INFINITY,
                };
                for lottery in lotteries {
                    let v: f64 = lottery
                        .into_iter()
                        .map(|(p, y)| {
                            let (key, offset) = normalise(y, normalize);
                            p * (next[&key] + offset as f64)
                        })
                        .sum();
                    best = match side {
                        Side::Min => best.min(v),
                        Side::Max => best.max(v),
                    };
                }
                Ok((x.clone(), best))
            })
            .collect::<Result<_>>()?;
        values = layer_values.into_iter().collect();
    }
    Ok(DpResult {
        value: values[&vec![0; n]],
        states: total,
    })
}

/// `v_a(0, T)` for `|T| = horizon`.
pub fn value_vs_adversary(adversary: &dyn Adversary, n: usize, horizon: u64, options: &DpOptions) -> Result<DpResult> {
    let normalize = options.normalize && adversary.is_translation_invariant();
    solve(n, horizon, options, normalize, Side::Min, |x, t| {
        let d = adversary.distribution(&to_regret(x), t)?;
        d.validate()?;
        let atoms: Vec<(f64, Vec<i64>)> = d
            .atoms()
            .iter()
            .filter(|(_, p)| *p > 0.0)
            .map(|(q, p)| Ok((*p, to_lattice(q)?)))
            .collect::<Result<_>>()?;
        if atoms.iter().any(|(_, q)| q.len() != n) {
            return Err(Error::invalid("adversary returned a loss vector of the wrong length"));
        }
        Ok((0..n)
            .map(|i| atoms.iter().map(|(p, q)| (*p, lattice_step(x, q, i))).collect())
            .collect())
    })
}

/// `v_p(0, T)` for `|T| = horizon`, maximising over `{±1}^N` each round.
pub fn value_vs_player(player: &dyn Player, n: usize, horizon: u64, options: &DpOptions) -> Result<DpResult> {
    let normalize = options.normalize && player.is_translation_invariant();
    let vertices: Vec<Vec<i64>> = (0..1u64 << n)
        .map(|b| (0..n).map(|i| if b >> i & 1 == 1 { 1 } else { -1 }).collect())
        .collect();
    solve(n, horizon, options, normalize, Side::Max, |x, t| {
        let d = player.distribution(&to_regret(x), t)?;
        d.validate()?;
        let w = d.to_weights(n);
        if w.len() != n {
            return Err(Error::invalid("player chose an expert out of range"));
        }
        Ok(vertices
            .iter()
            .map(|q| {
                (0..n)
                    .filter(|&i| w[i] > 0.0)
                    .map(|i| (w[i], lattice_step(x, q, i)))
                    .collect()
            })
            .collect())
    })
}

/// Tolerance on the bound inequalities, covering float summation order.
pub const SANDWICH_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichRow {
    pub report: BoundReport,
    pub dp_value: f64,
    /// `v - bound` for lower bounds, `bound - v` for upper bounds.
    pub slack: f64,
    /// Worst-case effect of gradient quadrature error on `dp_value`.
    pub quadrature_error: f64,
    pub pass: bool,
}

fn solve_pairing(strategy: BoundStrategy, n: usize, horizon: u64, options: &DpOptions) -> Result<(DpResult, f64)> {
    let mut quadrature_error = 0.0;
    let dp = match strategy {
        BoundStrategy::HeatLbR => value_vs_adversary(&RandomizedAdversary, n, horizon, options)?,
        BoundStrategy::HeatLbC => value_vs_adversary(&CombAdversary, n, horizon, options)?,
        BoundStrategy::HeatLbH => value_vs_adversary(&HeatAdversary::new(n)?, n, horizon, options)?,
        BoundStrategy::MaxLb => value_vs_adversary(&MaxAdversary, n, horizon, options)?,
        BoundStrategy::HeatUb => {
            let p = HeatPlayer::default();
            // per round: weights off by N·tol in l1, continuation spread ≤ 2|T|
            let h = horizon as f64;
            quadrature_error = h * n as f64 * p.params.quad_tolerance * 2.0 * h;
            value_vs_player(&p, n, horizon, options)?
        }
        BoundStrategy::MaxUb => value_vs_player(&MaxPlayer::for_experts(n)?, n, horizon, options)?,
        BoundStrategy::ExpUb => value_vs_player(&ExpPlayer::tuned(n, horizon)?, n, horizon, options)?,
        BoundStrategy::GyorgyLb => {
            return Err(Error::invalid("the random-walk bound has no built-in strategy to solve exactly"))
        }
    };
    Ok((dp, quadrature_error))
}

fn sandwich_row(report: BoundReport, dp_value: f64, quadrature_error: f64) -> SandwichRow {
    let slack = match report.direction {
        Direction::Lower => dp_value - report.bound,
        Direction::Upper => report.bound - dp_value,
    };
    SandwichRow {
        report,
        dp_value,
        slack,
        quadrature_error,
        pass: slack >= -(SANDWICH_TOLERANCE + quadrature_error),
    }
}

/// Compares the closed-form bound for `strategy` with the exact value of the
/// strategy it pairs with.
pub fn sandwich_report(strategy: BoundStrategy, n: usize, horizon: u64, options: &DpOptions) -> Result<SandwichRow> {
    let report = bound_report_for(strategy, n, horizon)?;
    let (dp, quadrature_error) = solve_pairing(strategy, n, horizon, options)?;
    Ok(sandwich_row(report, dp.value, quadrature_error))
}

/// Pairings with an exact counterpart, in report order.
pub const SANDWICH_STRATEGIES: [BoundStrategy; 7] = [
    BoundStrategy::HeatLbR,
    BoundStrategy::HeatLbC,
    BoundStrategy::HeatLbH,
    BoundStrategy::MaxLb,
    BoundStrategy::ExpUb,
    BoundStrategy::HeatUb,
    BoundStrategy::MaxUb,
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossPairRow {
    pub n: usize,
    pub horizon: u64,
    pub adversary: String,
    pub player: String,
    pub adversary_value: f64,
    pub player_value: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub sandwiches: Vec<SandwichRow>,
    pub cross_pairs: Vec<CrossPairRow>,
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.sandwiches.iter().all(|r| r.pass) && self.cross_pairs.iter().all(|r| r.pass)
    }
}

/// Every sandwich and every (adversary, player) comparison at one horizon.
/// Each exact value is computed once.
pub fn verify_horizon(n: usize, horizon: u64, options: &DpOptions) -> Result<VerifyReport> {
    let mut sandwiches = Vec::with_capacity(SANDWICH_STRATEGIES.len());
    for s in SANDWICH_STRATEGIES {
        let report = bound_report_for(s, n, horizon)?;
        let (dp, q) = solve_pairing(s, n, horizon, options)?;
        sandwiches.push(sandwich_row(report, dp.value, q));
    }
    let adversaries: Vec<(&str, f64)> = sandwiches[..4]
        .iter()
        .zip(["randomized_adv", "comb_adv", "heat_adv", "max_adv"])
        .map(|(r, name)| (name, r.dp_value))
        .collect();
    let mut players: Vec<(&str, f64)> = sandwiches[4..]
        .iter()
        .zip(["exp_player", "heat_player", "max_player"])
        .map(|(r, name)| (name, r.dp_value))
        .collect();
    players.push(("uniform_player", value_vs_player(&UniformPlayer, n, horizon, options)?.value));
    let mut cross_pairs = Vec::new();
    for &(a, v_a) in &adversaries {
        for &(p, v_p) in &players {
            cross_pairs.push(CrossPairRow {
                n,
                horizon,
                adversary: a.to_string(),
                player: p.to_string(),
                adversary_value: v_a,
                player_value: v_p,
                pass: v_a <= v_p + SANDWICH_TOLERANCE,
            });
        }
    }
    Ok(VerifyReport { sandwiches, cross_pairs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{final_regret, step, FiniteDistribution, LossVector};
    use crate::strategies::PointMassAdversary;

    fn opts() -> DpOptions {
        DpOptions::default()
    }

    fn raw() -> DpOptions {
        DpOptions {
            normalize: false,
            ..DpOptions::default()
        }
    }

    // Exponential recursion without memoisation, on f64 states.
    fn naive_va(a: &dyn Adversary, x: &RegretVector, t: i64) -> f64 {
        if t == 0 {
            return final_regret(x).unwrap();
        }
        let d = a.distribution(x, t).unwrap();
        (0..x.len())
            .map(|i| {
                d.atoms()
                    .iter()
                    .map(|(q, p)| p * naive_va(a, &step(x, q, i).unwrap(), t + 1))
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min)
    }

    fn naive_vp(p: &dyn Player, x: &RegretVector, t: i64, grid: &[f64]) -> f64 {
        if t == 0 {
            return final_regret(x).unwrap();
        }
        let n = x.len();
        let w = p.distribution(x, t).unwrap().to_weights(n);
        let mut best = f64::NEG_INFINITY;
        let g = grid.len();
        for code in 0..g.pow(n as u32) {
            let q: Vec<f64> = (0..n).map(|k| grid[code / g.pow(k as u32) % g]).collect();
            let v: f64 = (0..n)
                .filter(|&i| w[i] > 0.0)
                .map(|i| w[i] * naive_vp(p, &step(x, &q, i).unwrap(), t + 1, grid))
                .sum();
            best = best.max(v);
        }
        best
    }

    #[test]
    fn hand_enumerated_values() {
        assert_eq!(value_vs_adversary(&CombAdversary, 2, 1, &opts()).unwrap().value, 1.0);
        assert_eq!(value_vs_player(&UniformPlayer, 2, 1, &opts()).unwrap().value, 1.0);
        let exp = ExpPlayer::tuned(2, 1).unwrap();
        assert!((value_vs_player(&exp, 2, 1, &opts()).unwrap().value - 1.0).abs() < 1e-15);
        for n in 2..=4 {
            for h in 1..=4 {
                let v = value_vs_adversary(&PointMassAdversary::default(), n, h, &opts()).unwrap();
                assert_eq!(v.value, 0.0);
            }
        }
    }

    #[test]
    fn final_round_value_at_most_two() {
        for n in 2..=4 {
            for p in [&UniformPlayer as &dyn Player, &HeatPlayer::default(), &MaxPlayer::for_experts(n).unwrap()] {
                assert!(value_vs_player(p, n, 1, &opts()).unwrap().value <= 2.0);
            }
        }
    }

    #[test]
    fn memoised_matches_naive_adversaries() {
        let cases: [(usize, i64); 7] = [(2, 1), (2, 2), (2, 3), (2, 4), (3, 1), (3, 2), (3, 3)];
        for (n, h) in cases {
            let heat = HeatAdversary::new(n).unwrap();
            for a in [&RandomizedAdversary as &dyn Adversary, &CombAdversary, &heat, &MaxAdversary] {
                let dp = value_vs_adversary(a, n, h as u64, &opts()).unwrap().value;
                let naive = naive_va(a, &RegretVector::zeros(n), -h);
                assert!((dp - naive).abs() < 1e-12, "{} n={n} h={h}: {dp} vs {naive}", a.name());
            }
        }
    }

    #[test]
    fn memoised_matches_naive_players() {
        let vertices = [-1.0, 1.0];
        for (n, h) in [(2usize, 1i64), (2, 2), (2, 3), (2, 4), (3, 1), (3, 2), (3, 3)] {
            let exp = ExpPlayer::tuned(n, h as u64).unwrap();
            let max = MaxPlayer::for_experts(n).unwrap();
            for p in [&exp as &dyn Player, &max, &UniformPlayer] {
                let dp = value_vs_player(p, n, h as u64, &opts()).unwrap().value;
                let naive = naive_vp(p, &RegretVector::zeros(n), -h, &vertices);
                assert!((dp - naive).abs() < 1e-12, "{} n={n} h={h}", p.name());
            }
        }
    }

    #[test]
    fn randomized_two_step_enumeration() {
        // 16 loss outcomes over two rounds, player minimising each round
        let v = value_vs_adversary(&RandomizedAdversary, 2, 2, &opts()).unwrap().value;
        let naive = naive_va(&RandomizedAdversary, &RegretVector::zeros(2), -2);
        assert!((v - naive).abs() < 1e-15);
        assert!(v > 0.0);
    }

    #[test]
    fn normalisation_is_lossless() {
        for h in 1..=4 {
            for a in [&RandomizedAdversary as &dyn Adversary, &CombAdversary, &MaxAdversary] {
                let a1 = value_vs_adversary(a, 2, h, &opts()).unwrap();
                let a2 = value_vs_adversary(a, 2, h, &raw()).unwrap();
                assert!((a1.value - a2.value).abs() < 1e-12);
                assert!(a1.states <= a2.states);
            }
            let exp = ExpPlayer::tuned(2, h).unwrap();
            let p1 = value_vs_player(&exp, 2, h, &opts()).unwrap().value;
            let p2 = value_vs_player(&exp, 2, h, &raw()).unwrap().value;
            assert!((p1 - p2).abs() < 1e-12);
        }
    }

    #[test]
    fn vertex_restriction_matches_grid_search() {
        let grid = [-1.0, -0.5, 0.0, 0.5, 1.0];
        for h in 1..=3i64 {
            let exp = ExpPlayer::tuned(2, h as u64).unwrap();
            let max = MaxPlayer::for_experts(2).unwrap();
            for p in [&exp as &dyn Player, &max, &UniformPlayer] {
                let dp = value_vs_player(p, 2, h as u64, &opts()).unwrap().value;
                let g = naive_vp(p, &RegretVector::zeros(2), -h, &grid);
                assert!((dp - g).abs() < 1e-12, "{} h={h}: {dp} vs {g}", p.name());
            }
        }
    }

    #[test]
    fn values_nonnegative_for_symmetric_adversaries() {
        for n in [2, 3] {
            for h in 1..=5 {
                let heat = HeatAdversary::new(n).unwrap();
                for a in [&RandomizedAdversary as &dyn Adversary, &CombAdversary, &heat, &MaxAdversary] {
                    assert!(value_vs_adversary(a, n, h, &opts()).unwrap().value >= 0.0);
                }
                assert!(value_vs_player(&UniformPlayer, n, h, &opts()).unwrap().value >= 0.0);
            }
        }
    }

    #[test]
    fn resource_guard() {
        let e = value_vs_adversary(&CombAdversary, 6, 3, &opts()).unwrap_err();
        assert!(matches!(e, Error::ResourceGuard { .. }));
        let e = value_vs_adversary(&CombAdversary, 2, 13, &opts()).unwrap_err();
        assert!(matches!(e, Error::ResourceGuard { estimate, .. } if estimate > 0));
        let tight = DpOptions {
            limits: DpLimits { max_states: 10, ..DpLimits::default() },
            normalize: true,
        };
        assert!(matches!(
            value_vs_adversary(&RandomizedAdversary, 3, 6, &tight),
            Err(Error::ResourceGuard { .. })
        ));
    }

    struct HalfLoss;

    impl Adversary for HalfLoss {
        fn name(&self) -> &str {
            "half"
        }
        fn distribution(&self, x: &RegretVector, _t: i64) -> Result<FiniteDistribution<LossVector>> {
            let q = LossVector::new(vec![0.5; x.len()])?;
            Ok(FiniteDistribution::point_mass(q))
        }
    }

    #[test]
    fn rejects_off_lattice_losses() {
        assert!(matches!(value_vs_adversary(&HalfLoss, 2, 2, &opts()), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn sandwich_examples() {
        let row = sandwich_report(BoundStrategy::MaxLb, 3, 6, &opts()).unwrap();
        assert!(row.pass && row.slack >= 0.0);
        let row = sandwich_report(BoundStrategy::ExpUb, 2, 8, &opts()).unwrap();
        assert_eq!(row.report.error, 0.0);
        assert!((row.report.bound - (16.0 * 2f64.ln()).sqrt()).abs() < 1e-12);
        assert!(row.dp_value <= row.report.bound);
        assert!(sandwich_report(BoundStrategy::GyorgyLb, 2, 3, &opts()).is_err());
    }

    #[test]
    fn verify_small_horizon() {
        let r = verify_horizon(2, 4, &opts()).unwrap();
        assert_eq!(r.sandwiches.len(), 7);
        assert_eq!(r.cross_pairs.len(), 16);
        assert!(r.all_pass(), "{r:?}");
        let direct = sandwich_report(BoundStrategy::HeatLbC, 2, 4, &opts()).unwrap();
        assert_eq!(direct, r.sandwiches[1]);
    }
}
