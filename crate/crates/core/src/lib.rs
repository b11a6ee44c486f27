//! Potential-based regret bounds for prediction with expert advice.
//!
//! The crate evaluates two families of potentials on the regret vector
//! `x ∈ ℝ^N` and remaining time `t < 0`:
//!
//! * the heat potential `φ(x, t) = E max_k (x_k - √(-2κt) G_k)`;
//! * the max potential `ψ`, a closed form in ranked coordinates.
//!
//! Around them it provides the players and adversaries that pair with each
//! potential, explicit nonasymptotic error budgets, a Monte-Carlo game
//! simulator and an exact dynamic-programming oracle for small games.
//!
//! ```
//! use regret_potentials::bounds::bound_report;
//!
//! let r = bound_report("exp_ub", 16, 10_000).unwrap();
//! assert!((r.bound - (2e4 * 16f64.ln()).sqrt()).abs() < 1e-9);
//! ```

pub mod bounds;
pub mod dp;
pub mod error;
pub mod game;
pub mod heat;
pub mod max_potential;
pub mod potential;
pub mod quadrature;
pub mod special;
pub mod strategies;

pub use error::{Error, Result};
pub use game::{
    final_regret, simulate, step, Adversary, FiniteDistribution, GameConfig, LossVector, Player, RegretStats,
    RegretVector,
};
pub use potential::PotentialEval;
