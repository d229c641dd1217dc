use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{validate, EngineError, GameSpec};
use crate::rational::{self, exact, exact_opt, Rational};

/// One positive-probability path through the game. `switch_to` is `None`
/// when the host opened the prize door and the game ended there.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JointOutcome {
    pub prize: usize,
    pub pick: usize,
    pub reveal: usize,
    pub switch_to: Option<usize>,
    #[serde(with = "exact")]
    pub probability: Rational,
}

/// Exact results of a game.
///
/// A stick win needs `prize == pick`, which forces a goat reveal, and a
/// switch win needs `switch_to == prize ≠ reveal`. The `*_and_goat` joint
/// values are therefore also the unconditional win probabilities.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameAnalysis {
    pub label: String,
    pub doors: usize,
    pub joint: Vec<JointOutcome>,
    #[serde(with = "exact")]
    pub p_opens_prize: Rational,
    #[serde(with = "exact")]
    pub p_opens_goat: Rational,
    #[serde(with = "exact")]
    pub p_win_stick_and_goat: Rational,
    #[serde(with = "exact")]
    pub p_win_switch_and_goat: Rational,
    /// `None` when the host can never open a goat door.
    #[serde(with = "exact_opt")]
    pub p_win_stick_given_goat: Option<Rational>,
    #[serde(with = "exact_opt")]
    pub p_win_switch_given_goat: Option<Rational>,
}

impl GameAnalysis {
    /// Unconditional P(win if stick).
    pub fn p_win_stick(&self) -> &Rational {
        &self.p_win_stick_and_goat
    }

    /// Unconditional P(win if switch).
    pub fn p_win_switch(&self) -> &Rational {
        &self.p_win_switch_and_goat
    }
}

/// Chain-rule product over every `(prize, pick, reveal, switch)` path.
pub fn enumerate_joint(spec: &GameSpec) -> Result<GameAnalysis, EngineError> {
    let violations = validate(spec);
    if !violations.is_empty() {
        return Err(EngineError::InvalidSpec(violations));
    }
    let n = spec.doors;
    let mut joint = Vec::new();
    let mut opens_prize = rational::zero();
    let mut stick_and_goat = rational::zero();
    let mut switch_and_goat = rational::zero();

    for i in 0..n {
        let pa = &spec.prize_dist[i];
        if pa.is_zero() {
            continue;
        }
        for j in 0..n {
            let pab = pa * &spec.contestant_dist[i][j];
            if pab.is_zero() {
                continue;
            }
            for k in 0..n {
                let pabc = &pab * &spec.host_policy[i][j][k];
                if !pabc.is_positive() {
                    continue;
                }
                if k == i {
                    opens_prize += &pabc;
                    joint.push(JointOutcome { prize: i, pick: j, reveal: k, switch_to: None, probability: pabc });
                    continue;
                }
                if i == j {
                    stick_and_goat += &pabc;
                }
                for l in 0..n {
                    let p = &pabc * &spec.switch_policy[j][k][l];
                    if !p.is_positive() {
                        continue;
                    }
                    if l == i {
                        switch_and_goat += &p;
                    }
                    joint.push(JointOutcome { prize: i, pick: j, reveal: k, switch_to: Some(l), probability: p });
                }
            }
        }
    }

    let opens_goat = rational::one() - &opens_prize;
    let given_goat = |x: &Rational| (!opens_goat.is_zero()).then(|| x / &opens_goat);
    Ok(GameAnalysis {
        label: spec.label.clone(),
        doors: n,
        p_win_stick_given_goat: given_goat(&stick_and_goat),
        p_win_switch_given_goat: given_goat(&switch_and_goat),
        joint,
        p_opens_prize: opens_prize,
        p_opens_goat: opens_goat,
        p_win_stick_and_goat: stick_and_goat,
        p_win_switch_and_goat: switch_and_goat,
    })
}
