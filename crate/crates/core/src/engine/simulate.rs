use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{validate, EngineError, GameSpec};
use crate::batch::{run_batched, Execution, Tally};
use crate::rational::{self, Rational};

/// What the contestant does after a goat reveal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Stick,
    /// Move to a door drawn from the game's switch policy.
    Switch,
    /// Fair coin per trial between the two.
    PerTrialRandom,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Stick => "stick",
            Strategy::Switch => "switch",
            Strategy::PerTrialRandom => "per-trial-random",
        })
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "stick" => Ok(Strategy::Stick),
            "switch" => Ok(Strategy::Switch),
            "random" | "per-trial-random" => Ok(Strategy::PerTrialRandom),
            other => Err(format!("unknown strategy `{other}` (expected stick, switch, random)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub trials: u64,
    pub seed: u64,
    pub strategy: Strategy,
    pub wins: u64,
    pub goat_reveals: u64,
    pub prize_reveals: u64,
    /// `wins / goat_reveals`, or `0.0` when no goat was revealed.
    pub empirical_win_given_goat: f64,
}

impl SimulationReport {
    /// Three binomial standard errors around `p` for the goat-conditioned rate.
    pub fn three_sigma(&self, p: f64) -> f64 {
        3.0 * (p * (1.0 - p) / self.goat_reveals.max(1) as f64).sqrt()
    }
}

/// Inverse-CDF table. Cumulative sums are taken exactly and then rounded,
/// so the last positive entry is exactly `1.0`.
#[derive(Clone, Debug)]
pub(crate) struct Cdf {
    cumulative: Vec<f64>,
    last_positive: usize,
}

impl Cdf {
    pub(crate) fn new(weights: &[Rational]) -> Self {
        let mut acc = rational::zero();
        let mut cumulative = Vec::with_capacity(weights.len());
        let mut last_positive = 0;
        for (idx, w) in weights.iter().enumerate() {
            acc += w;
            cumulative.push(rational::to_f64(&acc));
            if *w > rational::zero() {
                last_positive = idx;
            }
        }
        Cdf { cumulative, last_positive }
    }

    /// Smallest index whose cumulative mass exceeds `u ∈ [0, 1)`. Zero-mass
    /// entries are never returned.
    pub(crate) fn sample(&self, u: f64) -> usize {
        self.cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.last_positive)
    }
}

/// A spec flattened into inverse-CDF tables, for step-by-step play.
///
/// The spec is assumed valid; see [`validate`].
#[derive(Clone, Debug)]
pub struct Sampler {
    prize: Cdf,
    pick: Vec<Cdf>,
    host: Vec<Vec<Cdf>>,
    switch: Vec<Vec<Cdf>>,
}

/// Outcome of a single sampled game.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Trial {
    pub prize: usize,
    pub pick: usize,
    pub reveal: usize,
    /// Final door, `None` when the host opened the prize.
    pub final_door: Option<usize>,
}

impl Sampler {
    pub fn new(spec: &GameSpec) -> Self {
        Sampler {
            prize: Cdf::new(&spec.prize_dist),
            pick: spec.contestant_dist.iter().map(|r| Cdf::new(r)).collect(),
            host: spec
                .host_policy
                .iter()
                .map(|m| m.iter().map(|r| Cdf::new(r)).collect())
                .collect(),
            switch: spec
                .switch_policy
                .iter()
                .map(|m| m.iter().map(|r| Cdf::new(r)).collect())
                .collect(),
        }
    }

    pub fn prize<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.prize.sample(rng.random())
    }

    pub fn pick<R: Rng + ?Sized>(&self, rng: &mut R, prize: usize) -> usize {
        self.pick[prize].sample(rng.random())
    }

    pub fn reveal<R: Rng + ?Sized>(&self, rng: &mut R, prize: usize, pick: usize) -> usize {
        self.host[prize][pick].sample(rng.random())
    }

    pub fn switch_target<R: Rng + ?Sized>(&self, rng: &mut R, pick: usize, reveal: usize) -> usize {
        self.switch[pick][reveal].sample(rng.random())
    }

    pub fn play<R: Rng + ?Sized>(&self, rng: &mut R, strategy: Strategy) -> Trial {
        let prize = self.prize(rng);
        let pick = self.pick(rng, prize);
        let reveal = self.reveal(rng, prize, pick);
        if reveal == prize {
            return Trial { prize, pick, reveal, final_door: None };
        }
        let switch = match strategy {
            Strategy::Stick => false,
            Strategy::Switch => true,
            Strategy::PerTrialRandom => rng.random::<bool>(),
        };
        let final_door = if switch { self.switch_target(rng, pick, reveal) } else { pick };
        Trial { prize, pick, reveal, final_door: Some(final_door) }
    }
}

#[derive(Default)]
struct Counts {
    wins: u64,
    goat: u64,
    prize: u64,
}

impl Tally for Counts {
    fn merge(&mut self, other: Self) {
        self.wins += other.wins;
        self.goat += other.goat;
        self.prize += other.prize;
    }
}

/// Seeded Monte Carlo using the default [`Execution`].
pub fn simulate(
    spec: &GameSpec,
    strategy: Strategy,
    trials: u64,
    seed: u64,
) -> Result<SimulationReport, EngineError> {
    simulate_with(spec, strategy, trials, seed, Execution::default())
}

/// Seeded Monte Carlo. The report depends only on `(spec, strategy,
/// trials, seed)`, never on `execution`.
pub fn simulate_with(
    spec: &GameSpec,
    strategy: Strategy,
    trials: u64,
    seed: u64,
    execution: Execution,
) -> Result<SimulationReport, EngineError> {
    let violations = validate(spec);
    if !violations.is_empty() {
        return Err(EngineError::InvalidSpec(violations));
    }
    if trials == 0 {
        return Err(EngineError::NoTrials);
    }
    let sampler = Sampler::new(spec);
    let counts = run_batched(trials, seed, execution, |rng, n| {
        let mut c = Counts::default();
        for _ in 0..n {
            let t = sampler.play(rng, strategy);
            match t.final_door {
                None => c.prize += 1,
                Some(door) => {
                    c.goat += 1;
                    c.wins += u64::from(door == t.prize);
                }
            }
        }
        c
    });
    Ok(SimulationReport {
        trials,
        seed,
        strategy,
        wins: counts.wins,
        goat_reveals: counts.goat,
        prize_reveals: counts.prize,
        empirical_win_given_goat: if counts.goat == 0 {
            0.0
        } else {
            counts.wins as f64 / counts.goat as f64
        },
    })
}
