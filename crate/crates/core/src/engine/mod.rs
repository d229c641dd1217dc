//! Generic finite Monty Hall machinery.
//!
//! A game is four conditional tables over door indices (0-based):
//!
//! * `prize_dist[i]`          = P(prize behind i)
//! * `contestant_dist[i][j]`  = P(pick j | prize i)
//! * `host_policy[i][j][k]`   = P(host opens k | prize i, pick j)
//! * `switch_policy[j][k][l]` = P(switch to l | pick j, opened k)
//!
//! [`enumerate_joint`] multiplies them out exactly; [`simulate`] samples them.

mod enumerate;
mod simulate;
mod spec;

use thiserror::Error;

pub use enumerate::{enumerate_joint, GameAnalysis, JointOutcome};
pub use simulate::{simulate, simulate_with, Sampler, SimulationReport, Strategy, Trial};
pub use spec::{table3, validate, GameSpec, Violation, ViolationKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("invalid game specification: {}", format_violations(.0))]
    InvalidSpec(Vec<Violation>),
    #[error("trial count must be at least 1")]
    NoTrials,
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}
