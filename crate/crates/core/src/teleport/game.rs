use serde::Serialize;

use super::{BellLabel, Bits2};
use crate::engine::GameSpec;
use crate::rational::{self, exact, exact_opt, ratio, Rational};

/// Four doors `00, 01, 10, 11`. The prize is Alice's result (uniform by
/// the Born rule), Bob's pick is the Bell state `β₀₀`, and Alice opens a
/// door that is neither.
pub fn monty_teleport_game() -> GameSpec {
    monty_teleport_game_for(Bits2::new(0, 0))
}

pub fn monty_teleport_game_for(bell: BellLabel) -> GameSpec {
    let pick_row: Vec<Rational> = Bits2::ALL
        .iter()
        .map(|d| if *d == bell { rational::one() } else { rational::zero() })
        .collect();
    let label = if bell == Bits2::new(0, 0) {
        "monty-teleport".to_string()
    } else {
        format!("monty-teleport(bell={bell})")
    };
    GameSpec {
        label,
        doors: 4,
        door_labels: Some(Bits2::ALL.iter().map(ToString::to_string).collect()),
        prize_dist: vec![ratio(1, 4); 4],
        contestant_dist: vec![pick_row; 4],
        host_policy: GameSpec::informed_host(4),
        switch_policy: GameSpec::uniform_switch(4),
    }
}

/// Outcomes conditioned on Bob hearing the bit value `bit`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReceivedBitAnalysis {
    pub bit: u8,
    #[serde(with = "exact")]
    pub p_received: Rational,
    /// Doors Bob picks from, uniformly, when switching.
    pub switch_options: Vec<Bits2>,
    #[serde(with = "exact")]
    pub p_win_stick_and_bit: Rational,
    #[serde(with = "exact")]
    pub p_win_switch_and_bit: Rational,
    #[serde(with = "exact_opt")]
    pub p_win_stick_given_bit: Option<Rational>,
    #[serde(with = "exact_opt")]
    pub p_win_switch_given_bit: Option<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UnreliableReport {
    pub bell: BellLabel,
    pub by_bit: [ReceivedBitAnalysis; 2],
}

/// Doors Bob may switch to after hearing `bit` without its position: every
/// result with `bit` in some position, minus the stick door.
pub(crate) fn switch_options(bell: BellLabel, bit: u8) -> Vec<Bits2> {
    Bits2::ALL
        .into_iter()
        .filter(|d| d.contains(bit) && *d != bell)
        .collect()
}

/// Exact analysis of the one-bit-lost channel.
///
/// Alice's result is uniform over four; which bit survives is uniform over
/// the two positions; Bob learns only the surviving value. Sticking means
/// applying the correction for `result = bell`, switching means picking
/// uniformly from [`ReceivedBitAnalysis::switch_options`].
pub fn unreliable_analysis(bell: BellLabel) -> UnreliableReport {
    let by_bit = [0u8, 1].map(|bit| {
        let options = switch_options(bell, bit);
        let mut received = rational::zero();
        let mut stick = rational::zero();
        let mut switch = rational::zero();
        for result in Bits2::ALL {
            for surviving in [result.first(), result.second()] {
                if surviving != bit {
                    continue;
                }
                let p = ratio(1, 8);
                received += &p;
                if result == bell {
                    stick += &p;
                }
                if options.contains(&result) {
                    switch += p / rational::int(options.len() as i64);
                }
            }
        }
        let given = |x: &Rational| (received != rational::zero()).then(|| x / &received);
        ReceivedBitAnalysis {
            bit,
            p_win_stick_given_bit: given(&stick),
            p_win_switch_given_bit: given(&switch),
            p_received: received,
            switch_options: options,
            p_win_stick_and_bit: stick,
            p_win_switch_and_bit: switch,
        }
    });
    UnreliableReport { bell, by_bit }
}
