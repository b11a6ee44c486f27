//! Game-state arithmetic, strategy interfaces and the Monte-Carlo simulator.
//!
//! Time runs over nonpositive integers: a game of horizon `|T|` starts at
//! `t = T = -|T|` and the last round is played at `t = -1`. The regret
//! vector `x` entering round `t` is the sum of the instantaneous regrets
//! `r = q_I 𝟙 - q` of all earlier rounds.
//!
//! Expert indices are zero-based throughout the crate.

use std::collections::HashSet;
use std::hash::{Hash, Hasher};
use std::ops::Deref;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerance on the total mass of a [`FiniteDistribution`].
pub const PROBABILITY_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GameConfig {
    pub n_experts: usize,
    /// Number of rounds `|T|`.
    pub horizon: u64,
}

impl GameConfig {
    pub fn new(n_experts: usize, horizon: u64) -> Result<Self> {
        if n_experts < 2 {
            return Err(Error::invalid(format!("need at least 2 experts, got {n_experts}")));
        }
        if horizon < 1 {
            return Err(Error::invalid("horizon must be at least 1"));
        }
        Ok(Self { n_experts, horizon })
    }

    /// The (negative) starting time `T`.
    pub fn start_time(&self) -> i64 {
        -(self.horizon as i64)
    }
}

/// Cumulative regret of the player relative to each expert.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretVector(Vec<f64>);

impl RegretVector {
    pub fn new(components: Vec<f64>) -> Self {
        Self(components)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for RegretVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for RegretVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// Expert losses for one round, each in `[-1, 1]`.
#[derive(Debug, Clone, Serialize)]
pub struct LossVector(Vec<f64>);

impl LossVector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if let Some(bad) = components.iter().find(|c| !(c.is_finite() && c.abs() <= 1.0)) {
            return Err(Error::invalid(format!("loss component {bad} outside [-1, 1]")));
        }
        // -0.0 and 0.0 must hash alike
        Ok(Self(components.into_iter().map(|c| c + 0.0).collect()))
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|c| -c + 0.0).collect())
    }

    /// `±1` losses from a sign pattern: bit `i` set means `q_i = +1`.
    pub fn from_sign_bits(bits: u64, n: usize) -> Self {
        Self((0..n).map(|i| if bits >> i & 1 == 1 { 1.0 } else { -1.0 }).collect())
    }
}

impl Deref for LossVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl PartialEq for LossVector {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

// Components are finite and -0.0 is normalised away, so equality is total.
impl Eq for LossVector {}

impl Hash for LossVector {
    fn hash<H: Hasher>(&self, state: &mut H) {
        for c in &self.0 {
            c.to_bits().hash(state);
        }
    }
}

/// Finitely supported probability distribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteDistribution<T> {
    atoms: Vec<(T, f64)>,
}

impl<T: Clone + Eq + Hash> FiniteDistribution<T> {
    pub fn new(atoms: Vec<(T, f64)>) -> Result<Self> {
        let d = Self { atoms };
        d.validate()?;
        Ok(d)
    }

    /// Skips validation; callers that take strategy output should run
    /// [`FiniteDistribution::validate`] themselves.
    pub fn new_unchecked(atoms: Vec<(T, f64)>) -> Self {
        Self { atoms }
    }

    pub fn uniform(items: Vec<T>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::invalid("uniform distribution over an empty set"));
        }
        let p = 1.0 / items.len() as f64;
        Self::new(items.into_iter().map(|i| (i, p)).collect())
    }

    pub fn point_mass(item: T) -> Self {
        Self { atoms: vec![(item, 1.0)] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.atoms.is_empty() {
            return Err(Error::invalid("distribution has no atoms"));
        }
        let mut total = 0.0;
        for (_, p) in &self.atoms {
            if !(p.is_finite() && *p >= 0.0) {
                return Err(Error::invalid(format!("atom probability {p} is not a nonnegative number")));
            }
            total += p;
        }
        if (total - 1.0).abs() > PROBABILITY_SUM_TOL {
            return Err(Error::invalid(format!("probabilities sum to {total}, not 1")));
        }
        let mut seen = HashSet::with_capacity(self.atoms.len());
        if !self.atoms.iter().all(|(item, _)| seen.insert(item)) {
            return Err(Error::invalid("distribution has repeated atoms"));
        }
        Ok(())
    }
}

impl<T> FiniteDistribution<T> {
    pub fn atoms(&self) -> &[(T, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Inverse-cdf draw with a uniform `u ∈ [0, 1)`.
    pub fn sample_with(&self, u: f64) -> &T {
        let mut acc = 0.0;
        for (item, p) in &self.atoms {
            acc += p;
            if u < acc {
                return item;
            }
        }
        // rounding left a sliver of mass at the top; give it to the last positive atom
        &self
            .atoms
            .iter()
            .rev()
            .find(|(_, p)| *p > 0.0)
            .unwrap_or(&self.atoms[self.atoms.len() - 1])
            .0
    }
}

impl FiniteDistribution<usize> {
    /// Dense probability vector over experts `0..n`.
    pub fn to_weights(&self, n: usize) -> Vec<f64> {
        let mut w = vec![0.0; n];
        for &(i, p) in &self.atoms {
            if i < n {
                w[i] += p;
            }
        }
        w
    }

    /// Player distribution from a dense weight vector.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        Self::new(weights.iter().copied().enumerate().collect())
    }
}

impl FiniteDistribution<LossVector> {
    pub fn mean(&self) -> Vec<f64> {
        let n = self.atoms.first().map_or(0, |(q, _)| q.len());
        let mut m = vec![0.0; n];
        for (q, p) in &self.atoms {
            for (mi, qi) in m.iter_mut().zip(q.iter()) {
                *mi += p * qi;
            }
        }
        m
    }

    /// Returns `c` when `E[q] = c 𝟙` holds within `tol`.
    pub fn balanced_constant(&self, tol: f64) -> Option<f64> {
        let m = self.mean();
        let c = *m.first()?;
        m.iter().all(|mi| (mi - c).abs() <= tol).then_some(c)
    }

    pub fn is_balanced(&self, tol: f64) -> bool {
        self.balanced_constant(tol).is_some()
    }

    /// `q` and `-q` carry equal probability for every atom.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.atoms.iter().all(|(q, p)| {
            let mirror = q.neg();
            let pm: f64 = self.atoms.iter().filter(|(r, _)| *r == mirror).map(|(_, w)| w).sum();
            (pm - p).abs() <= tol
        })
    }
}

/// Markovian player: a distribution over experts given `(x, t)`.
pub trait Player: Send + Sync {
    fn name(&self) -> &str;
    fn distribution(&self, x: &RegretVector, t: i64) -> Result<FiniteDistribution<usize>>;

    /// Whether `distribution(x + c𝟙, t) == distribution(x, t)`. The exact
    /// oracle relies on this to normalise states.
    fn is_translation_invariant(&self) -> bool {
        true
    }
}

/// Markovian adversary: a distribution over loss vectors given `(x, t)`.
pub trait Adversary: Send + Sync {
    fn name(&self) -> &str;
    fn distribution(&self, x: &RegretVector, t: i64) -> Result<FiniteDistribution<LossVector>>;

    /// Draws one loss vector. Adversaries with large supports override this
    /// to avoid materialising the distribution.
    fn sample(&self, x: &RegretVector, t: i64, rng: &mut dyn RngCore) -> Result<LossVector> {
        let d = self.distribution(x, t)?;
        d.validate()?;
        Ok(d.sample_with(rng.random::<f64>()).clone())
    }

    fn is_translation_invariant(&self) -> bool {
        true
    }
}

/// `x + (q_i 𝟙 - q)`.
pub fn step(x: &RegretVector, q: &[f64], i: usize) -> Result<RegretVector> {
    if x.len() != q.len() {
        return Err(Error::invalid(format!(
            "regret has {} components but loss has {}",
            x.len(),
            q.len()
        )));
    }
    if i >= x.len() {
        return Err(Error::invalid(format!("expert index {i} out of range for N = {}", x.len())));
    }
    let qi = q[i];
    let mut next: Vec<f64> = x.iter().zip(q).map(|(xj, qj)| xj + (qi - qj)).collect();
    // exact zero increment on the chosen coordinate
    next[i] = x[i];
    Ok(RegretVector(next))
}

/// Terminal regret `max_i x_i`.
pub fn final_regret(x: &[f64]) -> Result<f64> {
    x.iter()
        .copied()
        .reduce(f64::max)
        .ok_or_else(|| Error::invalid("final regret of an empty vector"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegretStats {
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
    pub seed: u64,
}

// Words reserved per round in each trial's RNG streams.
const ROUND_STRIDE_WORDS: u128 = 256;

fn validation_due(round: u64) -> bool {
    cfg!(debug_assertions) || round.is_multiple_of(64)
}

fn check_player(d: &FiniteDistribution<usize>, n: usize) -> std::result::Result<(), String> {
    d.validate().map_err(|e| e.to_string())?;
    if let Some((i, _)) = d.atoms().iter().find(|(i, _)| *i >= n) {
        return Err(format!("player chose expert {i} but N = {n}"));
    }
    Ok(())
}

fn play_trial(
    player: &dyn Player,
    adversary: &dyn Adversary,
    config: &GameConfig,
    seed: u64,
    trial: u64,
) -> Result<f64> {
    let n = config.n_experts;
    let mut loss_rng = ChaCha8Rng::seed_from_u64(seed);
    loss_rng.set_stream(2 * trial);
    let mut choice_rng = ChaCha8Rng::seed_from_u64(seed);
    choice_rng.set_stream(2 * trial + 1);

    let mut x = RegretVector::zeros(n);
    let start = config.start_time();
    for round in 0..config.horizon {
        let t = start + round as i64;
        let contract = |reason: String| Error::StrategyContract { round: t, reason };

        loss_rng.set_word_pos(round as u128 * ROUND_STRIDE_WORDS);
        let q = adversary
            .sample(&x, t, &mut loss_rng)
            .map_err(|e| contract(e.to_string()))?;
        if q.len() != n {
            return Err(contract(format!("loss vector has {} components, N = {n}", q.len())));
        }

        let p = player.distribution(&x, t).map_err(|e| contract(e.to_string()))?;
        if validation_due(round) {
            check_player(&p, n).map_err(contract)?;
        }
        choice_rng.set_word_pos(round as u128 * ROUND_STRIDE_WORDS);
        let i = *p.sample_with(choice_rng.random::<f64>());
        x = step(&x, &q, i).map_err(|e| contract(e.to_string()))?;
    }
    final_regret(&x)
}

/// Monte-Carlo estimate of the expected final regret. Trials run in
/// parallel; each draws its losses and expert choices from its own
/// counter-positioned streams, so the result depends only on `seed`.
pub fn simulate(
    player: &dyn Player,
    adversary: &dyn Adversary,
    config: &GameConfig,
    seed: u64,
    trials: usize,
) -> Result<RegretStats> {
    if trials < 1 {
        return Err(Error::invalid("need at least one trial"));
    }
    let regrets: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|k| play_trial(player, adversary, config, seed, k))
        .collect::<Result<_>>()?;
    let m = regrets.len() as f64;
    let mean = regrets.iter().sum::<f64>() / m;
    let std_error = if regrets.len() > 1 {
        let var = regrets.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (m - 1.0);
        (var / m).sqrt()
    } else {
        0.0
    };
    Ok(RegretStats {
        mean,
        std_error,
        trials,
        seed,
    })
}
