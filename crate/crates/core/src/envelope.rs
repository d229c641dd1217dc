//! The machine-readable result format shared by the CLI and the HTTP service.
//!
//! Every exact result is written twice: as `{"num","den"}` under
//! `exact_results` and as a decimal under `float_results`, with the same key.
//! Keys for game analyses are fixed:
//!
//! | key                     | meaning                                   |
//! |-------------------------|-------------------------------------------|
//! | `p_opens_prize`         | P(host opens the prize door)              |
//! | `p_opens_goat`          | P(host opens a goat door)                 |
//! | `win_stick`             | P(win if stick), unconditional            |
//! | `win_switch`            | P(win if switch), unconditional           |
//! | `win_stick_and_goat`    | P(win if stick ∩ goat revealed)           |
//! | `win_switch_and_goat`   | P(win if switch ∩ goat revealed)          |
//! | `win_stick_given_goat`  | P(win if stick \| goat revealed)          |
//! | `win_switch_given_goat` | P(win if switch \| goat revealed)         |

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::batch::Execution;
use crate::engine::{enumerate_joint, simulate_with, GameAnalysis, Strategy};
use crate::games::{build_game, EpistemicParams, GameKind, GamesError, PrepState};
use crate::rational::{fraction_string, ratio, to_f64, ExactValue, Rational};

/// Largest allowed gap between an exact result and its decimal rendering.
pub const FLOAT_TOLERANCE: f64 = 1e-12;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    pub version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputEnvelope {
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
    pub exact_results: BTreeMap<String, ExactValue>,
    pub float_results: BTreeMap<String, f64>,
    pub metadata: Metadata,
    /// Command-specific structured payload (joint table, Born matrix, …).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub details: Option<Value>,
}

impl OutputEnvelope {
    pub fn new(command: impl Into<String>) -> Self {
        OutputEnvelope {
            command: command.into(),
            parameters: BTreeMap::new(),
            exact_results: BTreeMap::new(),
            float_results: BTreeMap::new(),
            metadata: Metadata { seed: None, trials: None, version: VERSION.to_string() },
            details: None,
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        let v = serde_json::to_value(value).expect("parameters serialize to JSON");
        self.parameters.insert(key.to_string(), v);
        self
    }

    /// Records `value` under `key` in both the exact and the float maps.
    pub fn exact(mut self, key: &str, value: &Rational) -> Self {
        self.exact_results.insert(key.to_string(), ExactValue::from(value));
        self.float_results.insert(key.to_string(), to_f64(value));
        self
    }

    /// A result that only exists as a float (empirical rates, fidelities).
    pub fn float(mut self, key: &str, value: f64) -> Self {
        self.float_results.insert(key.to_string(), value);
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.metadata.seed = Some(seed);
        self
    }

    pub fn trials(mut self, trials: u64) -> Self {
        self.metadata.trials = Some(trials);
        self
    }

    pub fn details(mut self, details: impl Serialize) -> Self {
        self.details = Some(serde_json::to_value(details).expect("details serialize to JSON"));
        self
    }

    /// Adds the standard analysis keys. Goat-conditioned keys are omitted
    /// when the host can never reveal a goat.
    pub fn analysis(self, a: &GameAnalysis) -> Self {
        let mut env = self
            .exact("p_opens_prize", &a.p_opens_prize)
            .exact("p_opens_goat", &a.p_opens_goat)
            .exact("win_stick", a.p_win_stick())
            .exact("win_switch", a.p_win_switch())
            .exact("win_stick_and_goat", &a.p_win_stick_and_goat)
            .exact("win_switch_and_goat", &a.p_win_switch_and_goat);
        if let Some(v) = &a.p_win_stick_given_goat {
            env = env.exact("win_stick_given_goat", v);
        }
        if let Some(v) = &a.p_win_switch_given_goat {
            env = env.exact("win_switch_given_goat", v);
        }
        env
    }

    /// Keys whose float rendering is missing or disagrees with the exact
    /// value by more than [`FLOAT_TOLERANCE`].
    pub fn inconsistent_keys(&self) -> Vec<&str> {
        self.exact_results
            .iter()
            .filter(|(k, v)| {
                self.float_results
                    .get(*k)
                    .is_none_or(|f| (f - to_f64(&v.0)).abs() > FLOAT_TOLERANCE)
            })
            .map(|(k, _)| k.as_str())
            .collect()
    }

    pub fn exact_value(&self, key: &str) -> Option<&Rational> {
        self.exact_results.get(key).map(|v| &v.0)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("envelope serializes to JSON")
    }
}

fn game_parameters(
    env: OutputEnvelope,
    kind: GameKind,
    params: Option<&EpistemicParams>,
    state: PrepState,
    label: &str,
) -> OutputEnvelope {
    let mut env = env.param("game", kind.name()).param("label", label);
    if kind.takes_q() {
        let default = crate::games::default_epistemic_params();
        let p = params.unwrap_or(&default);
        env = env
            .param("q1", fraction_string(p.q1()))
            .param("q2", fraction_string(p.q2()))
            .param("q3", fraction_string(p.q3()))
            .param("q", fraction_string(&p.q()));
    }
    if kind.takes_state() {
        env = env.param("state", state.number());
    }
    env
}

/// `analyze`: exact results for a catalog game, with the joint table under
/// `details`.
pub fn analysis_envelope(
    kind: GameKind,
    params: Option<&EpistemicParams>,
    state: PrepState,
) -> Result<OutputEnvelope, GamesError> {
    let spec = build_game(kind, params, state)?;
    let analysis = enumerate_joint(&spec)?;
    let env = game_parameters(OutputEnvelope::new("analyze"), kind, params, state, &spec.label);
    Ok(env.analysis(&analysis).details(&analysis))
}

/// Goat-conditioned win probability the simulation should converge to.
pub fn expected_win_given_goat(a: &GameAnalysis, strategy: Strategy) -> Option<Rational> {
    let stick = a.p_win_stick_given_goat.as_ref()?;
    let switch = a.p_win_switch_given_goat.as_ref()?;
    Some(match strategy {
        Strategy::Stick => stick.clone(),
        Strategy::Switch => switch.clone(),
        Strategy::PerTrialRandom => (stick + switch) * ratio(1, 2),
    })
}

/// `simulate`: seeded Monte Carlo beside the exact value it estimates.
///
/// Keys: `expected_win_given_goat` (exact), `empirical_win_given_goat`,
/// `three_sigma`; the full [`crate::SimulationReport`] goes under `details`.
pub fn simulation_envelope(
    kind: GameKind,
    params: Option<&EpistemicParams>,
    state: PrepState,
    strategy: Strategy,
    trials: u64,
    seed: u64,
    execution: Execution,
) -> Result<OutputEnvelope, GamesError> {
    let spec = build_game(kind, params, state)?;
    let analysis = enumerate_joint(&spec)?;
    let report = simulate_with(&spec, strategy, trials, seed, execution)?;
    let mut env = game_parameters(OutputEnvelope::new("simulate"), kind, params, state, &spec.label)
        .param("strategy", strategy)
        .seed(seed)
        .trials(trials)
        .float("empirical_win_given_goat", report.empirical_win_given_goat);
    if let Some(p) = expected_win_given_goat(&analysis, strategy) {
        env = env.float("three_sigma", report.three_sigma(to_f64(&p))).exact("expected_win_given_goat", &p);
    }
    Ok(env.details(&report))
}
