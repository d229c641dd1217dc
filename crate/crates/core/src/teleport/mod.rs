//! Teleportation: the state-vector protocol, the four-door game where Alice
//! plays host, and the lossy channel where Bob hears one bit.

mod game;
mod simulate;
mod state;

use thiserror::Error;

pub use game::{
    monty_teleport_game, monty_teleport_game_for, unreliable_analysis, ReceivedBitAnalysis,
    UnreliableReport,
};
pub use simulate::{
    play_session, simulate_teleport, simulate_teleport_with, BitTally, Received, TeleportMode,
    TeleportReport, TeleportSession, WIN_FIDELITY,
};
pub use state::{
    bell_state, correction_for, teleport_step, AliceResult, BellLabel, Bits2, Branch,
    CorrectionOp, QubitState, NORM_TOLERANCE,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TeleportError {
    #[error("input qubit is not normalized (|α|² + |β|² = {0})")]
    NotNormalized(f64),
    #[error("trial count must be at least 1")]
    NoTrials,
}
