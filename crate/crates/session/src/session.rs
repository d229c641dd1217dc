//! One contestant's game, step by step, with every random draw taken from a
//! per-session seeded generator so the whole run can be replayed.
//!
//! Doors are 1-based everywhere outside this module's internals.

use pbr_monty::engine::{GameSpec, Sampler};
use pbr_monty::games::{build_game, EpistemicParams, GameKind, GamesError, PrepState};
use pbr_monty::rational::fraction_string;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    AwaitingPick,
    AwaitingDecision,
    Finished,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Win,
    Lose,
    HostOpenedPrize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RevealKind {
    Goat,
    Prize,
}

/// What the contestant asked for. `Switch { to: None }` lets the game's
/// switch policy choose among the remaining doors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "action")]
pub enum DecisionRequest {
    Stick,
    Switch {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        to: Option<usize>,
    },
}

/// Which catalog game a session plays.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameChoice {
    pub game: GameKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<EpistemicParams>,
    #[serde(default)]
    pub state: PrepState,
}

impl GameChoice {
    pub fn new(game: GameKind) -> Self {
        GameChoice { game, params: None, state: PrepState::default() }
    }

    pub fn build(&self) -> Result<GameSpec, GamesError> {
        build_game(self.game, self.params.as_ref(), self.state)
    }

    /// The parameters a client sees echoed back: fractions as strings.
    pub fn echo(&self) -> serde_json::Map<String, serde_json::Value> {
        let mut m = serde_json::Map::new();
        if self.game.takes_q() {
            let default = pbr_monty::games::default_epistemic_params();
            let p = self.params.as_ref().unwrap_or(&default);
            m.insert("q1".into(), fraction_string(p.q1()).into());
            m.insert("q2".into(), fraction_string(p.q2()).into());
            m.insert("q3".into(), fraction_string(p.q3()).into());
            m.insert("q".into(), fraction_string(&p.q()).into());
        }
        if self.game.takes_state() {
            m.insert("state".into(), self.state.number().into());
        }
        m
    }
}

/// One step of a session, as written to the transcript.
// `Created` carries the exact game parameters; a session holds only three
// events, so boxing them would buy nothing.
#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "event")]
pub enum Event {
    Created {
        choice: GameChoice,
        label: String,
        doors: usize,
        seed: u64,
    },
    Picked {
        door: usize,
        revealed_door: usize,
        reveal: RevealKind,
    },
    Decided {
        request: DecisionRequest,
        final_door: usize,
        prize_door: usize,
        outcome: Outcome,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PlayError {
    #[error("door {door} is out of range 1..={doors}")]
    DoorOutOfRange { door: usize, doors: usize },
    #[error("session is {actual:?}, expected {expected:?}")]
    WrongPhase { expected: Phase, actual: Phase },
    #[error("cannot switch to door {door}: it is the picked or the opened door")]
    IllegalSwitch { door: usize },
}

#[derive(Clone, Debug)]
pub struct Session {
    choice: GameChoice,
    spec: GameSpec,
    sampler: Sampler,
    seed: u64,
    rng: ChaCha8Rng,
    prize: usize,
    phase: Phase,
    picked: Option<usize>,
    revealed: Option<usize>,
    final_door: Option<usize>,
    decision: Option<DecisionRequest>,
    outcome: Option<Outcome>,
    events: Vec<Event>,
}

/// Results disclosed once a session is finished.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Disclosure {
    pub prize_door: usize,
    pub seed: u64,
    pub outcome: Outcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decision: Option<DecisionRequest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_door: Option<usize>,
}

impl Session {
    /// Draws the prize immediately; the host's reveal waits for the pick.
    pub fn create(choice: GameChoice, seed: u64) -> Result<Self, GamesError> {
        let spec = choice.build()?;
        let sampler = Sampler::new(&spec);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let prize = sampler.prize(&mut rng);
        let created = Event::Created { choice: choice.clone(), label: spec.label.clone(), doors: spec.doors, seed };
        Ok(Session {
            choice,
            spec,
            sampler,
            seed,
            rng,
            prize,
            phase: Phase::AwaitingPick,
            picked: None,
            revealed: None,
            final_door: None,
            decision: None,
            outcome: None,
            events: vec![created],
        })
    }

    fn expect_phase(&self, expected: Phase) -> Result<(), PlayError> {
        if self.phase == expected {
            Ok(())
        } else {
            Err(PlayError::WrongPhase { expected, actual: self.phase })
        }
    }

    fn door_index(&self, door: usize) -> Result<usize, PlayError> {
        if (1..=self.spec.doors).contains(&door) {
            Ok(door - 1)
        } else {
            Err(PlayError::DoorOutOfRange { door, doors: self.spec.doors })
        }
    }

    /// The host opens a door drawn from its policy for `(prize, pick)`.
    pub fn pick(&mut self, door: usize) -> Result<&Event, PlayError> {
        self.expect_phase(Phase::AwaitingPick)?;
        let pick = self.door_index(door)?;
        let reveal = self.sampler.reveal(&mut self.rng, self.prize, pick);
        self.picked = Some(pick);
        self.revealed = Some(reveal);
        let kind = if reveal == self.prize {
            self.phase = Phase::Finished;
            self.outcome = Some(Outcome::HostOpenedPrize);
            RevealKind::Prize
        } else {
            self.phase = Phase::AwaitingDecision;
            RevealKind::Goat
        };
        self.events.push(Event::Picked { door, revealed_door: reveal + 1, reveal: kind });
        Ok(self.events.last().expect("just pushed"))
    }

    pub fn decide(&mut self, request: DecisionRequest) -> Result<&Event, PlayError> {
        self.expect_phase(Phase::AwaitingDecision)?;
        let (pick, reveal) = (self.picked.expect("picked"), self.revealed.expect("revealed"));
        let final_door = match request {
            DecisionRequest::Stick => pick,
            DecisionRequest::Switch { to: Some(door) } => {
                let target = self.door_index(door)?;
                if target == pick || target == reveal {
                    return Err(PlayError::IllegalSwitch { door });
                }
                target
            }
            DecisionRequest::Switch { to: None } => self.sampler.switch_target(&mut self.rng, pick, reveal),
        };
        let outcome = if final_door == self.prize { Outcome::Win } else { Outcome::Lose };
        self.final_door = Some(final_door);
        self.decision = Some(request);
        self.outcome = Some(outcome);
        self.phase = Phase::Finished;
        self.events.push(Event::Decided {
            request,
            final_door: final_door + 1,
            prize_door: self.prize + 1,
            outcome,
        });
        Ok(self.events.last().expect("just pushed"))
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn choice(&self) -> &GameChoice {
        &self.choice
    }

    pub fn spec(&self) -> &GameSpec {
        &self.spec
    }

    pub fn picked(&self) -> Option<usize> {
        self.picked.map(|d| d + 1)
    }

    pub fn revealed(&self) -> Option<usize> {
        self.revealed.map(|d| d + 1)
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    /// Doors a switch may land on, while a decision is pending.
    pub fn switch_targets(&self) -> Vec<usize> {
        match (self.phase, self.picked, self.revealed) {
            (Phase::AwaitingDecision, Some(p), Some(r)) => {
                (0..self.spec.doors).filter(|&d| d != p && d != r).map(|d| d + 1).collect()
            }
            _ => Vec::new(),
        }
    }

    /// `None` until the session is finished.
    pub fn disclosure(&self) -> Option<Disclosure> {
        (self.phase == Phase::Finished).then(|| Disclosure {
            prize_door: self.prize + 1,
            seed: self.seed,
            outcome: self.outcome.expect("finished sessions have an outcome"),
            decision: self.decision,
            final_door: self.final_door.map(|d| d + 1),
        })
    }
}

/// Re-executes a session from its recorded inputs and returns the events it
/// produces. A faithful transcript reproduces itself exactly.
pub fn replay(events: &[Event]) -> Result<Vec<Event>, String> {
    let Some(Event::Created { choice, seed, .. }) = events.first() else {
        return Err("transcript does not start with a `created` event".into());
    };
    let mut session = Session::create(choice.clone(), *seed).map_err(|e| e.to_string())?;
    for event in &events[1..] {
        match event {
            Event::Picked { door, .. } => session.pick(*door).map(|_| ()),
            Event::Decided { request, .. } => session.decide(*request).map(|_| ()),
            Event::Created { .. } => return Err("second `created` event in one session".into()),
        }
        .map_err(|e| e.to_string())?;
    }
    Ok(session.events().to_vec())
}
