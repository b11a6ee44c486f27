//! Built-in players and adversaries, and the diffusion factors that pair
//! them with the potentials.
//!
//! On the final round `t = -1` every potential-based player returns the
//! uniform distribution; adversaries keep their usual rule.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, RngCore};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{Adversary, FiniteDistribution, LossVector, Player, RegretVector};
use crate::heat::{phi_grad, HeatPotentialParams};
use crate::max_potential::{psi_grad, rank_descending, MaxPotentialParams};
use crate::potential::softmax;

/// Largest `N` for which a full `{±1}^N` support is materialised.
pub const MAX_ENUMERATED_EXPERTS: usize = 20;

/// Heat-adversary diffusion factor. Panics if `n < 2`.
pub fn kappa_h(n: usize) -> f64 {
    assert!(n >= 2, "kappa_h needs N >= 2");
    let nf = n as f64;
    if n == 2 {
        1.0
    } else if n % 2 == 1 {
        0.5 + 1.0 / (2.0 * nf)
    } else {
        0.5 + 1.0 / (2.0 * nf - 2.0)
    }
}

/// Max-potential diffusion factor. Panics if `n < 2`.
pub fn kappa_m(n: usize) -> f64 {
    assert!(n >= 2, "kappa_m needs N >= 2");
    let nf = n as f64;
    if n % 2 == 0 {
        nf * nf / (2.0 * (nf - 1.0))
    } else {
        (nf + 1.0) / 2.0
    }
}

fn uniform_over(n: usize) -> FiniteDistribution<usize> {
    let p = 1.0 / n as f64;
    FiniteDistribution::new_unchecked((0..n).map(|i| (i, p)).collect())
}

fn check_round(t: i64) -> Result<()> {
    if t > -1 {
        return Err(Error::invalid(format!("players act at t <= -1, got t = {t}")));
    }
    Ok(())
}

/// Clamps tiny negative components left by quadrature and renormalises.
fn weights_to_distribution(mut w: Vec<f64>) -> Result<FiniteDistribution<usize>> {
    for v in w.iter_mut() {
        if !v.is_finite() {
            return Err(Error::invalid("non-finite player weight"));
        }
        *v = v.max(0.0);
    }
    let s: f64 = w.iter().sum();
    if !(s > 0.0) {
        return Err(Error::invalid("player weights sum to zero"));
    }
    w.iter_mut().for_each(|v| *v /= s);
    FiniteDistribution::from_weights(&w)
}

// ---------------------------------------------------------------- players

/// Exponential weights: `p ∝ e^{η x}` in every round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpPlayer {
    pub eta: f64,
}

impl ExpPlayer {
    pub fn new(eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::invalid(format!("learning rate must be positive, got {eta}")));
        }
        Ok(Self { eta })
    }

    /// `η = √(2 ln N / |T|)`.
    pub fn tuned(n: usize, horizon: u64) -> Result<Self> {
        if n < 2 || horizon < 1 {
            return Err(Error::invalid("tuned learning rate needs N >= 2 and |T| >= 1"));
        }
        Self::new(crate::potential::tuned_eta(n, horizon))
    }
}

impl Player for ExpPlayer {
    fn name(&self) -> &str {
        "exp_player"
    }

    fn distribution(&self, x: &RegretVector, t: i64) -> Result<FiniteDistribution<usize>> {
        check_round(t)?;
        weights_to_distribution(softmax(x, self.eta))
    }
}

/// Plays the gradient of the heat potential one step ahead.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatPlayer {
    pub params: HeatPotentialParams,
}

impl HeatPlayer {
    pub fn new(kappa: f64, quad_tolerance: f64) -> Result<Self> {
        Ok(Self {
            params: HeatPotentialParams::with_tolerance(kappa, quad_tolerance)?,
        })
    }
}

impl Default for HeatPlayer {
    fn default() -> Self {
        Self {
            params: HeatPotentialParams::new(1.0).expect("valid default"),
        }
    }
}

impl Player for HeatPlayer {
    fn name(&self) -> &str {
        "heat_player"
    }

    fn distribution(&self, x: &RegretVector, t: i64) -> Result<FiniteDistribution<usize>> {
        check_round(t)?;
        if t == -1 {
            return Ok(uniform_over(x.len()));
        }
        weights_to_distribution(phi_grad(x, (t + 1) as f64, &self.params)?)
    }
}

/// Plays the gradient of the max potential one step ahead.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxPlayer {
    pub params: MaxPotentialParams,
}

impl MaxPlayer {
    pub fn new(kappa: f64) -> Result<Self> {
        Ok(Self {
            params: MaxPotentialParams::new(kappa)?,
        })
    }

    /// Uses `κ_m(N)`.
    pub fn for_experts(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("max player needs N >= 2"));
        }
        Self::new(kappa_m(n))
    }
}

impl Player for MaxPlayer {
    fn name(&self) -> &str {
        "max_player"
    }

    fn distribution(&self, x: &RegretVector, t: i64) -> Result<FiniteDistribution<usize>> {
        check_round(t)?;
        if t == -1 {
            return Ok(uniform_over(x.len()));
        }
        weights_to_distribution(psi_grad(x, (t + 1) as f64, &self.params)?)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct UniformPlayer;

impl Player for UniformPlayer {
    fn name(&self) -> &str {
        "uniform_player"
    }

    fn distribution(&self, x: &RegretVector, t: i64) -> Result<FiniteDistribution<usize>> {
        check_round(t)?;
        if x.is_empty() {
            return Err(Error::invalid("empty regret vector"));
        }
        Ok(uniform_over(x.len()))
    }
}

// ------------------------------------------------------------ adversaries

/// Uniform over `{±1}^N`.
pub fn randomized_adversary(n: usize) -> Result<FiniteDistribution<LossVector>> {
    if n < 1 || n > MAX_ENUMERATED_EXPERTS {
        return Err(Error::invalid(format!(
            "randomized support is enumerated only for 1 <= N <= {MAX_ENUMERATED_EXPERTS}, got {n}"
        )));
    }
    let p = 0.5f64.powi(n as i32);
    Ok(FiniteDistribution::new_unchecked(
        (0..1u64 << n).map(|b| (LossVector::from_sign_bits(b, n), p)).collect(),
    ))
}

/// Uniform over `S`: all `q ∈ {±1}^N` with `Σq = 0` (even `N`) or `Σq = ±1` (odd `N`).
pub fn heat_adversary(n: usize) -> Result<FiniteDistribution<LossVector>> {
    if n < 2 || n > MAX_ENUMERATED_EXPERTS {
        return Err(Error::invalid(format!(
            "heat adversary support is enumerated only for 2 <= N <= {MAX_ENUMERATED_EXPERTS}, got {n}"
        )));
    }
    let target = if n % 2 == 0 { 0 } else { 1 };
    let support: Vec<LossVector> = (0..1u64 << n)
        .filter(|b| {
            let plus = b.count_ones() as i64;
            (2 * plus - n as i64).abs() == target
        })
        .map(|b| LossVector::from_sign_bits(b, n))
        .collect();
    FiniteDistribution::uniform(support)
}

fn plus_minus(q: Vec<f64>) -> Result<FiniteDistribution<LossVector>> {
    let q = LossVector::new(q)?;
    let m = q.neg();
    Ok(FiniteDistribution::new_unchecked(vec![(q, 0.5), (m, 0.5)]))
}

/// `±q^c` with `q^c_(r) = +1` on odd ranks and `-1` on even ranks.
pub fn comb_adversary(x: &[f64]) -> Result<FiniteDistribution<LossVector>> {
    if x.is_empty() {
        return Err(Error::invalid("empty regret vector"));
    }
    let mut q = vec![0.0; x.len()];
    for (r, &i) in rank_descending(x).iter().enumerate() {
        q[i] = if r % 2 == 0 { 1.0 } else { -1.0 };
    }
    plus_minus(q)
}

/// `±q^m` with `+1` on the (lowest-index) largest coordinate and `-1` elsewhere.
pub fn max_adversary(x: &[f64]) -> Result<FiniteDistribution<LossVector>> {
    if x.is_empty() {
        return Err(Error::invalid("empty regret vector"));
    }
    let top = rank_descending(x)[0];
    plus_minus((0..x.len()).map(|i| if i == top { 1.0 } else { -1.0 }).collect())
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RandomizedAdversary;

impl Adversary for RandomizedAdversary {
    fn name(&self) -> &str {
        "randomized_adv"
    }

    fn distribution(&self, x: &RegretVector, _t: i64) -> Result<FiniteDistribution<LossVector>> {
        randomized_adversary(x.len())
    }

    fn sample(&self, x: &RegretVector, _t: i64, rng: &mut dyn RngCore) -> Result<LossVector> {
        let n = x.len();
        if n < 1 || n > 64 {
            return Err(Error::invalid(format!("randomized adversary supports 1 <= N <= 64, got {n}")));
        }
        Ok(LossVector::from_sign_bits(rng.next_u64(), n))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CombAdversary;

impl Adversary for CombAdversary {
    fn name(&self) -> &str {
        "comb_adv"
    }

    fn distribution(&self, x: &RegretVector, _t: i64) -> Result<FiniteDistribution<LossVector>> {
        comb_adversary(x)
    }
}

/// Heat adversary for a fixed `N`; the support is built once.
#[derive(Debug, Clone)]
pub struct HeatAdversary {
    n: usize,
    dist: Arc<FiniteDistribution<LossVector>>,
}

impl HeatAdversary {
    pub fn new(n: usize) -> Result<Self> {
        Ok(Self {
            n,
            dist: Arc::new(heat_adversary(n)?),
        })
    }

    pub fn n_experts(&self) -> usize {
        self.n
    }

    fn check(&self, x: &RegretVector) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::invalid(format!(
                "heat adversary built for N = {} but state has {} components",
                self.n,
                x.len()
            )));
        }
        Ok(())
    }
}

impl Adversary for HeatAdversary {
    fn name(&self) -> &str {
        "heat_adv"
    }

    fn distribution(&self, x: &RegretVector, _t: i64) -> Result<FiniteDistribution<LossVector>> {
        self.check(x)?;
        Ok((*self.dist).clone())
    }

    fn sample(&self, x: &RegretVector, _t: i64, rng: &mut dyn RngCore) -> Result<LossVector> {
        self.check(x)?;
        let atoms = self.dist.atoms();
        Ok(atoms[rng.random_range(0..atoms.len())].0.clone())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MaxAdversary;

impl Adversary for MaxAdversary {
    fn name(&self) -> &str {
        "max_adv"
    }

    fn distribution(&self, x: &RegretVector, _t: i64) -> Result<FiniteDistribution<LossVector>> {
        max_adversary(x)
    }
}

/// Always plays the constant loss `c𝟙`, so no regret accrues.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PointMassAdversary {
    pub level: f64,
}

impl PointMassAdversary {
    pub fn new(level: f64) -> Result<Self> {
        if !(level.is_finite() && level.abs() <= 1.0) {
            return Err(Error::invalid(format!("loss level {level} outside [-1, 1]")));
        }
        Ok(Self { level })
    }
}

impl Adversary for PointMassAdversary {
    fn name(&self) -> &str {
        "point_mass_adv"
    }

    fn distribution(&self, x: &RegretVector, _t: i64) -> Result<FiniteDistribution<LossVector>> {
        Ok(FiniteDistribution::point_mass(LossVector::new(vec![self.level; x.len()])?))
    }
}

// ----------------------------------------------------------- name registry

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    ExpPlayer,
    HeatPlayer,
    MaxPlayer,
    UniformPlayer,
    RandomizedAdv,
    CombAdv,
    HeatAdv,
    MaxAdv,
    PointMassAdv,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 9] = [
        StrategyKind::ExpPlayer,
        StrategyKind::HeatPlayer,
        StrategyKind::MaxPlayer,
        StrategyKind::UniformPlayer,
        StrategyKind::RandomizedAdv,
        StrategyKind::CombAdv,
        StrategyKind::HeatAdv,
        StrategyKind::MaxAdv,
        StrategyKind::PointMassAdv,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::ExpPlayer => "exp_player",
            StrategyKind::HeatPlayer => "heat_player",
            StrategyKind::MaxPlayer => "max_player",
            StrategyKind::UniformPlayer => "uniform_player",
            StrategyKind::RandomizedAdv => "randomized_adv",
            StrategyKind::CombAdv => "comb_adv",
            StrategyKind::HeatAdv => "heat_adv",
            StrategyKind::MaxAdv => "max_adv",
            StrategyKind::PointMassAdv => "point_mass_adv",
        }
    }

    pub fn is_player(self) -> bool {
        matches!(
            self,
            StrategyKind::ExpPlayer | StrategyKind::HeatPlayer | StrategyKind::MaxPlayer | StrategyKind::UniformPlayer
        )
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::UnknownStrategy(s.to_string()))
    }
}

/// A strategy name plus optional parameter overrides. Unset parameters take
/// their defaults when the strategy is built for a given `(N, |T|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrategySpec {
    pub kind: StrategyKind,
    pub kappa: Option<f64>,
    pub eta: Option<f64>,
    pub quad_tolerance: Option<f64>,
}

impl StrategySpec {
    pub fn new(kind: StrategyKind) -> Self {
        Self {
            kind,
            kappa: None,
            eta: None,
            quad_tolerance: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(k) = self.kappa {
            if !(k > 0.0 && k.is_finite()) {
                return Err(Error::invalid(format!("kappa must be positive, got {k}")));
            }
            if !matches!(self.kind, StrategyKind::HeatPlayer | StrategyKind::MaxPlayer) {
                return Err(Error::invalid(format!("{} takes no kappa", self.kind)));
            }
        }
        if let Some(e) = self.eta {
            if !(e > 0.0 && e.is_finite()) {
                return Err(Error::invalid(format!("eta must be positive, got {e}")));
            }
            if self.kind != StrategyKind::ExpPlayer {
                return Err(Error::invalid(format!("{} takes no eta", self.kind)));
            }
        }
        if let Some(q) = self.quad_tolerance {
            if !(q > 0.0) {
                return Err(Error::invalid(format!("quadrature tolerance must be positive, got {q}")));
            }
        }
        Ok(())
    }

    pub fn player(&self, n: usize, horizon: u64) -> Result<Box<dyn Player>> {
        self.validate()?;
        if n < 2 {
            return Err(Error::invalid("players need N >= 2"));
        }
        Ok(match self.kind {
            StrategyKind::ExpPlayer => Box::new(match self.eta {
                Some(e) => ExpPlayer::new(e)?,
                None => ExpPlayer::tuned(n, horizon)?,
            }),
            StrategyKind::HeatPlayer => Box::new(HeatPlayer::new(
                self.kappa.unwrap_or(1.0),
                self.quad_tolerance.unwrap_or(1e-10),
            )?),
            StrategyKind::MaxPlayer => Box::new(MaxPlayer::new(self.kappa.unwrap_or(kappa_m(n)))?),
            StrategyKind::UniformPlayer => Box::new(UniformPlayer),
            other => return Err(Error::invalid(format!("{other} is an adversary, not a player"))),
        })
    }

    pub fn adversary(&self, n: usize) -> Result<Box<dyn Adversary>> {
        self.validate()?;
        if n < 2 {
            return Err(Error::invalid("adversaries need N >= 2"));
        }
        Ok(match self.kind {
            StrategyKind::RandomizedAdv => Box::new(RandomizedAdversary),
            StrategyKind::CombAdv => Box::new(CombAdversary),
            StrategyKind::HeatAdv => Box::new(HeatAdversary::new(n)?),
            StrategyKind::MaxAdv => Box::new(MaxAdversary),
            StrategyKind::PointMassAdv => Box::new(PointMassAdversary::default()),
            other => return Err(Error::invalid(format!("{other} is a player, not an adversary"))),
        })
    }
}

impl FromStr for StrategySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(Self::new(s.parse()?))
    }
}
