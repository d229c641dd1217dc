//! The game catalog and the ψ-epistemic parameter sweep.

use std::fmt;
use std::str::FromStr;

use num_traits::Signed;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{enumerate_joint, table3, EngineError, GameSpec};
use crate::qcore::born_matrix;
use crate::rational::{self, exact, fraction_string, ratio, Rational};
use crate::teleport::monty_teleport_game;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GamesError {
    #[error("{name} = {value} is outside [{min}, {max}]")]
    ParamOutOfRange { name: &'static str, value: String, min: String, max: String },
    #[error("preparation state must be 1..=4, got {0}")]
    BadState(u8),
    #[error("unknown game `{0}` (expected classic, ignorant, psi-ontic, psi-epistemic, monty-teleport)")]
    UnknownGame(String),
    #[error("game `{0}` takes no q parameters")]
    UnexpectedParams(GameKind),
    #[error("give either q or q1/q2/q3, not both")]
    ConflictingParams,
    #[error(transparent)]
    Engine(#[from] EngineError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GameKind {
    Classic,
    Ignorant,
    PsiOntic,
    PsiEpistemic,
    MontyTeleport,
}

impl GameKind {
    pub const ALL: [GameKind; 5] = [
        GameKind::Classic,
        GameKind::Ignorant,
        GameKind::PsiOntic,
        GameKind::PsiEpistemic,
        GameKind::MontyTeleport,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            GameKind::Classic => "classic",
            GameKind::Ignorant => "ignorant",
            GameKind::PsiOntic => "psi-ontic",
            GameKind::PsiEpistemic => "psi-epistemic",
            GameKind::MontyTeleport => "monty-teleport",
        }
    }

    pub fn doors(&self) -> usize {
        match self {
            GameKind::Classic | GameKind::Ignorant => 3,
            _ => 4,
        }
    }

    pub fn takes_q(&self) -> bool {
        *self == GameKind::PsiEpistemic
    }

    pub fn takes_state(&self) -> bool {
        matches!(self, GameKind::PsiOntic | GameKind::PsiEpistemic)
    }
}

impl fmt::Display for GameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GameKind {
    type Err = GamesError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GameKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| GamesError::UnknownGame(s.to_string()))
    }
}

/// Which of the four product preparations the ψ games are built on (1..=4).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct PrepState(u8);

impl PrepState {
    pub const PSI1: PrepState = PrepState(1);

    pub fn new(n: u8) -> Result<Self, GamesError> {
        if (1..=4).contains(&n) {
            Ok(PrepState(n))
        } else {
            Err(GamesError::BadState(n))
        }
    }

    pub fn number(&self) -> u8 {
        self.0
    }

    /// 0-based row of the Born table, which is also the door the host
    /// treats as certainly empty.
    pub fn index(&self) -> usize {
        usize::from(self.0 - 1)
    }
}

impl Default for PrepState {
    fn default() -> Self {
        PrepState::PSI1
    }
}

impl TryFrom<u8> for PrepState {
    type Error = GamesError;

    fn try_from(n: u8) -> Result<Self, Self::Error> {
        PrepState::new(n)
    }
}

impl From<PrepState> for u8 {
    fn from(s: PrepState) -> u8 {
        s.0
    }
}

/// Mass moved onto the forbidden outcome: `q = q1 + q2 + q3`.
///
/// `q1` and `q2` come out of the two quarter-probability doors (in door
/// order) and `q3` out of the half-probability door.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawEpistemicParams")]
pub struct EpistemicParams {
    #[serde(with = "exact")]
    q1: Rational,
    #[serde(with = "exact")]
    q2: Rational,
    #[serde(with = "exact")]
    q3: Rational,
}

/// Unchecked wire form; deserialization goes through [`EpistemicParams::new`].
#[derive(Deserialize)]
struct RawEpistemicParams {
    #[serde(with = "exact")]
    q1: Rational,
    #[serde(with = "exact")]
    q2: Rational,
    #[serde(with = "exact")]
    q3: Rational,
}

impl TryFrom<RawEpistemicParams> for EpistemicParams {
    type Error = GamesError;

    fn try_from(raw: RawEpistemicParams) -> Result<Self, Self::Error> {
        EpistemicParams::new(raw.q1, raw.q2, raw.q3)
    }
}

impl EpistemicParams {
    pub fn new(q1: Rational, q2: Rational, q3: Rational) -> Result<Self, GamesError> {
        let check = |name: &'static str, v: &Rational, max: Rational| {
            if v.is_negative() || *v > max {
                Err(GamesError::ParamOutOfRange {
                    name,
                    value: fraction_string(v),
                    min: "0".into(),
                    max: fraction_string(&max),
                })
            } else {
                Ok(())
            }
        };
        check("q1", &q1, ratio(1, 4))?;
        check("q2", &q2, ratio(1, 4))?;
        check("q3", &q3, ratio(1, 2))?;
        Ok(EpistemicParams { q1, q2, q3 })
    }

    /// `q1 = q2 = q3 = 0`; the game then coincides with the ψ-ontic one.
    pub fn zero() -> Self {
        EpistemicParams { q1: rational::zero(), q2: rational::zero(), q3: rational::zero() }
    }

    /// Equal thirds of `q`.
    pub fn equal_split(q: &Rational) -> Result<Self, GamesError> {
        let third = q / rational::int(3);
        EpistemicParams::new(third.clone(), third.clone(), third)
    }

    pub fn q1(&self) -> &Rational {
        &self.q1
    }

    pub fn q2(&self) -> &Rational {
        &self.q2
    }

    pub fn q3(&self) -> &Rational {
        &self.q3
    }

    pub fn q(&self) -> Rational {
        &self.q1 + &self.q2 + &self.q3
    }
}

/// The `q` at which sticking and switching tie in the ψ-epistemic game.
pub fn crossover_q() -> Rational {
    ratio(1, 4)
}

/// Closed forms for the ψ-epistemic game as functions of `q` alone.
pub mod closed_form {
    use super::*;

    fn eleven_minus_eight_q(q: &Rational) -> Rational {
        rational::int(11) - rational::int(8) * q
    }

    /// `1/12 + 2q/3`
    pub fn opens_prize(q: &Rational) -> Rational {
        ratio(1, 12) + ratio(2, 3) * q
    }

    /// `3 / (11 − 8q)`
    pub fn stick_given_goat(q: &Rational) -> Rational {
        rational::int(3) / eleven_minus_eight_q(q)
    }

    /// `(4 − 4q) / (11 − 8q)`
    pub fn switch_given_goat(q: &Rational) -> Rational {
        (rational::int(4) - rational::int(4) * q) / eleven_minus_eight_q(q)
    }

    /// `(1 − 4q) / (11 − 8q)`
    pub fn advantage(q: &Rational) -> Rational {
        (rational::one() - rational::int(4) * q) / eleven_minus_eight_q(q)
    }
}

fn three_door(label: &str, host_policy: Vec<Vec<Vec<Rational>>>) -> GameSpec {
    GameSpec {
        label: label.to_string(),
        doors: 3,
        door_labels: None,
        prize_dist: vec![ratio(1, 3); 3],
        contestant_dist: GameSpec::uniform_contestant(3),
        host_policy,
        switch_policy: GameSpec::uniform_switch(3),
    }
}

/// Three doors; the host knows where the prize is and never reveals it.
pub fn classic_game() -> GameSpec {
    three_door("classic", GameSpec::informed_host(3))
}

/// Three doors; the host opens either non-picked door at random and may
/// reveal the prize.
pub fn ignorant_game() -> GameSpec {
    three_door(
        "ignorant",
        table3(3, |_, j, k| if j == k { rational::zero() } else { ratio(1, 2) }),
    )
}

/// Host table shared by the ψ games: open the forbidden door unless it was
/// picked, in which case open one of the other three uniformly.
fn born_rule_host(forbidden: usize) -> Vec<Vec<Vec<Rational>>> {
    table3(4, |_, j, k| {
        if j == forbidden {
            if k == j { rational::zero() } else { ratio(1, 3) }
        } else if k == forbidden {
            rational::one()
        } else {
            rational::zero()
        }
    })
}

fn four_door(label: String, prize_dist: Vec<Rational>, forbidden: usize) -> GameSpec {
    GameSpec {
        label,
        doors: 4,
        door_labels: None,
        prize_dist,
        contestant_dist: GameSpec::uniform_contestant(4),
        host_policy: born_rule_host(forbidden),
        switch_policy: GameSpec::uniform_switch(4),
    }
}

pub fn psi_ontic_game() -> GameSpec {
    psi_ontic_game_for(PrepState::PSI1)
}

/// ψ-ontic game on preparation `state`: prizes follow the Born row exactly.
pub fn psi_ontic_game_for(state: PrepState) -> GameSpec {
    let row = born_matrix().row(state.index()).to_vec();
    let label = if state == PrepState::PSI1 {
        "psi-ontic".to_string()
    } else {
        format!("psi-ontic(state={})", state.number())
    };
    four_door(label, row, state.index())
}

pub fn psi_epistemic_game(params: &EpistemicParams) -> GameSpec {
    psi_epistemic_game_for(params, PrepState::PSI1)
}

/// ψ-epistemic game: the forbidden outcome carries `q`, drawn from the other
/// three doors. The host still trusts the Born table.
pub fn psi_epistemic_game_for(params: &EpistemicParams, state: PrepState) -> GameSpec {
    let born = born_matrix();
    let row = born.row(state.index());
    let forbidden = state.index();
    let quarter = ratio(1, 4);
    let quarters: Vec<usize> = (0..4).filter(|&d| row[d] == quarter).collect();
    let half = (0..4).find(|&d| row[d] == ratio(1, 2)).expect("Born row has a 1/2 entry");

    let mut prize = row.to_vec();
    prize[forbidden] = params.q();
    prize[quarters[0]] -= params.q1();
    prize[quarters[1]] -= params.q2();
    prize[half] -= params.q3();

    let mut label = format!(
        "psi-epistemic(q1={},q2={},q3={}",
        fraction_string(params.q1()),
        fraction_string(params.q2()),
        fraction_string(params.q3())
    );
    if state != PrepState::PSI1 {
        label.push_str(&format!(",state={}", state.number()));
    }
    label.push(')');
    four_door(label, prize, forbidden)
}

/// Parameters from either a total `q` (split equally) or any of `q1, q2,
/// q3` (missing ones are zero). `None` when nothing was given.
pub fn params_from_parts(
    q: Option<Rational>,
    split: [Option<Rational>; 3],
) -> Result<Option<EpistemicParams>, GamesError> {
    let any_split = split.iter().any(Option::is_some);
    match (q, any_split) {
        (Some(_), true) => Err(GamesError::ConflictingParams),
        (Some(q), false) => EpistemicParams::equal_split(&q).map(Some),
        (None, true) => {
            let [q1, q2, q3] = split.map(|v| v.unwrap_or_else(rational::zero));
            EpistemicParams::new(q1, q2, q3).map(Some)
        }
        (None, false) => Ok(None),
    }
}

/// Default parameters used when a ψ-epistemic game is requested without q:
/// the tie point `q = 1/4`, split equally.
pub fn default_epistemic_params() -> EpistemicParams {
    EpistemicParams::equal_split(&crossover_q()).expect("1/12 each is in range")
}

/// Builds any catalog game. `params` is only accepted for `psi-epistemic`
/// (defaulting to [`default_epistemic_params`]); `state` is ignored by games
/// that are not built on a preparation.
pub fn build_game(
    kind: GameKind,
    params: Option<&EpistemicParams>,
    state: PrepState,
) -> Result<GameSpec, GamesError> {
    if params.is_some() && !kind.takes_q() {
        return Err(GamesError::UnexpectedParams(kind));
    }
    Ok(match kind {
        GameKind::Classic => classic_game(),
        GameKind::Ignorant => ignorant_game(),
        GameKind::PsiOntic => psi_ontic_game_for(state),
        GameKind::PsiEpistemic => {
            let default = default_epistemic_params();
            psi_epistemic_game_for(params.unwrap_or(&default), state)
        }
        GameKind::MontyTeleport => monty_teleport_game(),
    })
}

/// One row of a ψ-epistemic sweep, computed by full enumeration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepRow {
    pub params: EpistemicParams,
    #[serde(with = "exact")]
    pub q: Rational,
    #[serde(with = "exact")]
    pub stick: Rational,
    #[serde(with = "exact")]
    pub switch: Rational,
    /// `switch − stick`; negative means sticking is better.
    #[serde(with = "exact")]
    pub advantage: Rational,
}

/// Goat-conditioned stick/switch rates for each `(q1, q2, q3)`. Invalid
/// triples produce an error in their own slot.
pub fn sweep_epistemic(triples: &[(Rational, Rational, Rational)]) -> Vec<Result<SweepRow, GamesError>> {
    triples
        .iter()
        .map(|(q1, q2, q3)| {
            let params = EpistemicParams::new(q1.clone(), q2.clone(), q3.clone())?;
            let analysis = enumerate_joint(&psi_epistemic_game(&params))?;
            let stick = analysis.p_win_stick_given_goat.expect("ψ-epistemic host reveals goats");
            let switch = analysis.p_win_switch_given_goat.expect("ψ-epistemic host reveals goats");
            Ok(SweepRow { q: params.q(), advantage: &switch - &stick, stick, switch, params })
        })
        .collect()
}
