use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::game::switch_options;
use super::{correction_for, teleport_step, BellLabel, Bits2, CorrectionOp, QubitState, TeleportError};
use crate::batch::{run_batched, Execution, Tally};
use crate::engine::{SimulationReport, Strategy};

/// Bob "wins" when his corrected qubit matches the input up to global phase.
pub const WIN_FIDELITY: f64 = 1.0 - 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TeleportMode {
    /// Both bits arrive; Bob applies the matching correction.
    Standard,
    /// Alice announces a goat door instead of her result.
    Monty,
    /// One of the two bits is lost; Bob hears the other's value only.
    Unreliable,
}

impl fmt::Display for TeleportMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TeleportMode::Standard => "standard",
            TeleportMode::Monty => "monty",
            TeleportMode::Unreliable => "unreliable",
        })
    }
}

impl FromStr for TeleportMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "standard" => Ok(TeleportMode::Standard),
            "monty" => Ok(TeleportMode::Monty),
            "unreliable" => Ok(TeleportMode::Unreliable),
            other => Err(format!("unknown mode `{other}` (expected standard, monty, unreliable)")),
        }
    }
}

/// What reached Bob over the classical channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum Received {
    Result(Bits2),
    GoatDoor(Bits2),
    SingleBit(u8),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TeleportSession {
    pub input: QubitState,
    pub bell: BellLabel,
    pub mode: TeleportMode,
    pub alice_result: Bits2,
    pub received: Received,
    /// The result Bob acted on.
    pub bob_guess: Bits2,
    pub bob_action: CorrectionOp,
    pub fidelity: f64,
}

impl TeleportSession {
    pub fn channel(&self) -> &'static str {
        match self.mode {
            TeleportMode::Unreliable => "one-bit-lost",
            _ => "perfect",
        }
    }

    pub fn won(&self) -> bool {
        self.fidelity >= WIN_FIDELITY
    }
}

/// Runs the protocol once on `input`.
///
/// `strategy` is ignored in [`TeleportMode::Standard`]. Otherwise sticking
/// applies the correction for `result = bell`, and switching picks
/// uniformly among the results still consistent with what Bob received.
pub fn play_session<R: Rng + ?Sized>(
    input: &QubitState,
    bell: BellLabel,
    mode: TeleportMode,
    strategy: Strategy,
    rng: &mut R,
) -> Result<TeleportSession, TeleportError> {
    let branches = teleport_step(input, bell)?;
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let branch = branches
        .iter()
        .find(|b| {
            acc += b.probability;
            u < acc
        })
        .unwrap_or(&branches[3]);
    let ab = branch.alice_result;

    let (received, guess) = match mode {
        TeleportMode::Standard => (Received::Result(ab), ab),
        TeleportMode::Monty => {
            let goats: Vec<Bits2> = Bits2::ALL.into_iter().filter(|d| *d != bell && *d != ab).collect();
            let cd = *goats.choose(rng).expect("at least two goat doors");
            let guess = if wants_switch(strategy, rng) {
                let options: Vec<Bits2> = Bits2::ALL.into_iter().filter(|d| *d != bell && *d != cd).collect();
                *options.choose(rng).expect("two doors remain")
            } else {
                bell
            };
            (Received::GoatDoor(cd), guess)
        }
        TeleportMode::Unreliable => {
            let bit = if rng.random::<bool>() { ab.first() } else { ab.second() };
            let guess = if wants_switch(strategy, rng) {
                *switch_options(bell, bit).choose(rng).expect("consistent doors remain")
            } else {
                bell
            };
            (Received::SingleBit(bit), guess)
        }
    };
    let bob_action = correction_for(bell, guess);
    let fidelity = input.fidelity(&bob_action.apply(&branch.bob_state));
    Ok(TeleportSession {
        input: *input,
        bell,
        mode,
        alice_result: ab,
        received,
        bob_guess: guess,
        bob_action,
        fidelity,
    })
}

fn wants_switch<R: Rng + ?Sized>(strategy: Strategy, rng: &mut R) -> bool {
    match strategy {
        Strategy::Stick => false,
        Strategy::Switch => true,
        Strategy::PerTrialRandom => rng.random::<bool>(),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitTally {
    pub trials: u64,
    pub wins: u64,
}

impl BitTally {
    pub fn rate(&self) -> f64 {
        if self.trials == 0 { 0.0 } else { self.wins as f64 / self.trials as f64 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TeleportReport {
    pub mode: TeleportMode,
    pub bell: BellLabel,
    /// `goat_reveals` counts every trial: Alice never announces the prize.
    pub report: SimulationReport,
    pub mean_fidelity: f64,
    /// Per received bit value, unreliable mode only.
    pub by_received_bit: Option<[BitTally; 2]>,
}

#[derive(Default)]
struct Acc {
    trials: u64,
    wins: u64,
    fidelity: f64,
    bits: [BitTally; 2],
}

impl Tally for Acc {
    fn merge(&mut self, o: Self) {
        self.trials += o.trials;
        self.wins += o.wins;
        self.fidelity += o.fidelity;
        for (a, b) in self.bits.iter_mut().zip(o.bits) {
            a.trials += b.trials;
            a.wins += b.wins;
        }
    }
}

/// Haar-random inputs through the full pipeline with Bell state `β₀₀`.
pub fn simulate_teleport(
    mode: TeleportMode,
    strategy: Strategy,
    trials: u64,
    seed: u64,
) -> Result<TeleportReport, TeleportError> {
    simulate_teleport_with(mode, Bits2::new(0, 0), strategy, trials, seed, Execution::default())
}

pub fn simulate_teleport_with(
    mode: TeleportMode,
    bell: BellLabel,
    strategy: Strategy,
    trials: u64,
    seed: u64,
    execution: Execution,
) -> Result<TeleportReport, TeleportError> {
    if trials == 0 {
        return Err(TeleportError::NoTrials);
    }
    let acc = run_batched(trials, seed, execution, |rng, n| {
        let mut acc = Acc::default();
        for _ in 0..n {
            let input = QubitState::haar(rng);
            let s = play_session(&input, bell, mode, strategy, rng).expect("Haar states are normalized");
            let won = s.won();
            acc.trials += 1;
            acc.wins += u64::from(won);
            acc.fidelity += s.fidelity;
            if let Received::SingleBit(bit) = s.received {
                let t = &mut acc.bits[usize::from(bit)];
                t.trials += 1;
                t.wins += u64::from(won);
            }
        }
        acc
    });
    Ok(TeleportReport {
        mode,
        bell,
        report: SimulationReport {
            trials,
            seed,
            strategy,
            wins: acc.wins,
            goat_reveals: acc.trials,
            prize_reveals: 0,
            empirical_win_given_goat: acc.wins as f64 / acc.trials as f64,
        },
        mean_fidelity: acc.fidelity / acc.trials as f64,
        by_received_bit: (mode == TeleportMode::Unreliable).then_some(acc.bits),
    })
}
