use std::fmt;

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::rational::{self, ExactValue, Rational};

/// A complete finite Monty Hall game as explicit conditional tables.
///
/// Index conventions are documented on the [`engine`](super) module. The
/// struct is not validated on construction; call [`validate`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "GameSpecWire", try_from = "GameSpecWire")]
pub struct GameSpec {
    pub label: String,
    pub doors: usize,
    /// Display names for doors, e.g. `"00"` for teleportation games.
    pub door_labels: Option<Vec<String>>,
    pub prize_dist: Vec<Rational>,
    pub contestant_dist: Vec<Vec<Rational>>,
    pub host_policy: Vec<Vec<Vec<Rational>>>,
    pub switch_policy: Vec<Vec<Vec<Rational>>>,
}

impl GameSpec {
    /// `P(pick j | prize i) = 1/n` for every `i`, `j`.
    pub fn uniform_contestant(doors: usize) -> Vec<Vec<Rational>> {
        let p = rational::ratio(1, doors as i64);
        vec![vec![p; doors]; doors]
    }

    /// Uniform over the doors that are neither picked nor opened. Rows with
    /// `pick == opened` never occur and are left at zero.
    pub fn uniform_switch(doors: usize) -> Vec<Vec<Vec<Rational>>> {
        table3(doors, |j, k, l| {
            if j == k || l == j || l == k {
                rational::zero()
            } else {
                rational::ratio(1, doors as i64 - 2)
            }
        })
    }

    /// Host who knows the prize: uniform over doors that are neither the
    /// pick nor the prize.
    pub fn informed_host(doors: usize) -> Vec<Vec<Vec<Rational>>> {
        table3(doors, |i, j, k| {
            if k == i || k == j {
                return rational::zero();
            }
            let options = if i == j { doors - 1 } else { doors - 2 };
            rational::ratio(1, options as i64)
        })
    }

    pub fn door_name(&self, door: usize) -> String {
        self.door_labels
            .as_ref()
            .and_then(|l| l.get(door).cloned())
            .unwrap_or_else(|| (door + 1).to_string())
    }
}

/// Builds an `n × n × n` table from a closure.
pub fn table3(
    n: usize,
    f: impl Fn(usize, usize, usize) -> Rational,
) -> Vec<Vec<Vec<Rational>>> {
    (0..n)
        .map(|a| (0..n).map(|b| (0..n).map(|c| f(a, b, c)).collect()).collect())
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    ShapeMismatch,
    NegativeProbability,
    PrizeNotNormalized,
    ContestantNotNormalized,
    HostOpensPickedDoor,
    HostNotNormalized,
    SwitchToClosedOffDoor,
    SwitchNotNormalized,
}

impl ViolationKind {
    pub fn message(&self) -> &'static str {
        match self {
            ViolationKind::ShapeMismatch => "table shape does not match door count",
            ViolationKind::NegativeProbability => "negative probability",
            ViolationKind::PrizeNotNormalized => "prize distribution not normalized",
            ViolationKind::ContestantNotNormalized => "contestant distribution not normalized",
            ViolationKind::HostOpensPickedDoor => "host opens picked door",
            ViolationKind::HostNotNormalized => "host policy not normalized",
            ViolationKind::SwitchToClosedOffDoor => "switch targets picked or opened door",
            ViolationKind::SwitchNotNormalized => "switch policy not normalized",
        }
    }
}

/// One broken invariant, with the table and indices involved.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub table: String,
    /// 0-based indices into `table`.
    pub indices: Vec<usize>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}{:?}", self.kind.message(), self.table, self.indices)?;
        if !self.detail.is_empty() {
            write!(f, " ({})", self.detail)?;
        }
        Ok(())
    }
}

fn violation(kind: ViolationKind, table: &str, indices: Vec<usize>, detail: String) -> Violation {
    Violation { kind, table: table.to_string(), indices, detail }
}

fn sum(xs: &[Rational]) -> Rational {
    xs.iter().sum()
}

/// Every broken invariant of `spec`; empty iff the spec is a valid game.
///
/// Host rows are only checked on reachable `(prize, pick)` pairs, and switch
/// rows only where `pick != opened`; conditionals on null events are free.
pub fn validate(spec: &GameSpec) -> Vec<Violation> {
    let n = spec.doors;
    let mut out = Vec::new();

    let shape_ok = n > 0
        && spec.prize_dist.len() == n
        && spec.contestant_dist.len() == n
        && spec.contestant_dist.iter().all(|r| r.len() == n)
        && [&spec.host_policy, &spec.switch_policy]
            .iter()
            .all(|t| t.len() == n && t.iter().all(|m| m.len() == n && m.iter().all(|r| r.len() == n)))
        && spec.door_labels.as_ref().is_none_or(|l| l.len() == n);
    if !shape_ok {
        out.push(violation(
            ViolationKind::ShapeMismatch,
            "spec",
            vec![],
            format!("doors = {n}"),
        ));
        return out;
    }

    let negative = |table: &str, idx: Vec<usize>, p: &Rational, out: &mut Vec<Violation>| {
        if p.is_negative() {
            out.push(violation(
                ViolationKind::NegativeProbability,
                table,
                idx,
                rational::fraction_string(p),
            ));
        }
    };

    for (i, p) in spec.prize_dist.iter().enumerate() {
        negative("prize_dist", vec![i], p, &mut out);
    }
    let total = sum(&spec.prize_dist);
    if total != rational::one() {
        out.push(violation(
            ViolationKind::PrizeNotNormalized,
            "prize_dist",
            vec![],
            format!("sums to {}", rational::fraction_string(&total)),
        ));
    }

    for (i, row) in spec.contestant_dist.iter().enumerate() {
        for (j, p) in row.iter().enumerate() {
            negative("contestant_dist", vec![i, j], p, &mut out);
        }
        let s = sum(row);
        if s != rational::one() {
            out.push(violation(
                ViolationKind::ContestantNotNormalized,
                "contestant_dist",
                vec![i],
                format!("sums to {}", rational::fraction_string(&s)),
            ));
        }
    }

    for i in 0..n {
        for j in 0..n {
            let reach = &spec.prize_dist[i] * &spec.contestant_dist[i][j];
            if !reach.is_positive() {
                continue;
            }
            let row = &spec.host_policy[i][j];
            for (k, p) in row.iter().enumerate() {
                negative("host_policy", vec![i, j, k], p, &mut out);
            }
            if row[j] != rational::zero() {
                out.push(violation(
                    ViolationKind::HostOpensPickedDoor,
                    "host_policy",
                    vec![i, j, j],
                    rational::fraction_string(&row[j]),
                ));
            }
            let s = sum(row);
            if s != rational::one() {
                out.push(violation(
                    ViolationKind::HostNotNormalized,
                    "host_policy",
                    vec![i, j],
                    format!("sums to {}", rational::fraction_string(&s)),
                ));
            }
        }
    }

    for j in 0..n {
        for k in (0..n).filter(|&k| k != j) {
            let row = &spec.switch_policy[j][k];
            for (l, p) in row.iter().enumerate() {
                negative("switch_policy", vec![j, k, l], p, &mut out);
                if (l == j || l == k) && *p != rational::zero() {
                    out.push(violation(
                        ViolationKind::SwitchToClosedOffDoor,
                        "switch_policy",
                        vec![j, k, l],
                        rational::fraction_string(p),
                    ));
                }
            }
            let s = sum(row);
            if s != rational::one() {
                out.push(violation(
                    ViolationKind::SwitchNotNormalized,
                    "switch_policy",
                    vec![j, k],
                    format!("sums to {}", rational::fraction_string(&s)),
                ));
            }
        }
    }
    out
}

#[derive(Serialize, Deserialize)]
struct GameSpecWire {
    label: String,
    doors: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    door_labels: Option<Vec<String>>,
    prize_dist: Vec<ExactValue>,
    contestant_dist: Vec<Vec<ExactValue>>,
    host_policy: Vec<Vec<Vec<ExactValue>>>,
    switch_policy: Vec<Vec<Vec<ExactValue>>>,
}

fn wrap1(v: Vec<Rational>) -> Vec<ExactValue> {
    v.into_iter().map(ExactValue).collect()
}

fn wrap2(v: Vec<Vec<Rational>>) -> Vec<Vec<ExactValue>> {
    v.into_iter().map(wrap1).collect()
}

fn unwrap1(v: Vec<ExactValue>) -> Vec<Rational> {
    v.into_iter().map(|x| x.0).collect()
}

fn unwrap2(v: Vec<Vec<ExactValue>>) -> Vec<Vec<Rational>> {
    v.into_iter().map(unwrap1).collect()
}

impl From<GameSpec> for GameSpecWire {
    fn from(s: GameSpec) -> Self {
        GameSpecWire {
            label: s.label,
            doors: s.doors,
            door_labels: s.door_labels,
            prize_dist: wrap1(s.prize_dist),
            contestant_dist: wrap2(s.contestant_dist),
            host_policy: s.host_policy.into_iter().map(wrap2).collect(),
            switch_policy: s.switch_policy.into_iter().map(wrap2).collect(),
        }
    }
}

impl TryFrom<GameSpecWire> for GameSpec {
    type Error = String;

    fn try_from(w: GameSpecWire) -> Result<Self, Self::Error> {
        if w.doors == 0 {
            return Err("doors must be positive".into());
        }
        Ok(GameSpec {
            label: w.label,
            doors: w.doors,
            door_labels: w.door_labels,
            prize_dist: unwrap1(w.prize_dist),
            contestant_dist: unwrap2(w.contestant_dist),
            host_policy: w.host_policy.into_iter().map(unwrap2).collect(),
            switch_policy: w.switch_policy.into_iter().map(unwrap2).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{ratio, zero};

    fn three_door_classic() -> GameSpec {
        GameSpec {
            label: "test".into(),
            doors: 3,
            door_labels: None,
            prize_dist: vec![ratio(1, 3); 3],
            contestant_dist: GameSpec::uniform_contestant(3),
            host_policy: GameSpec::informed_host(3),
            switch_policy: GameSpec::uniform_switch(3),
        }
    }

    #[test]
    fn well_formed_spec_has_no_violations() {
        assert_eq!(validate(&three_door_classic()), vec![]);
    }

    #[test]
    fn host_opening_pick_is_one_violation() {
        let mut s = three_door_classic();
        // (prize 0, pick 0): move half of the mass onto the picked door.
        s.host_policy[0][0] = vec![ratio(1, 2), zero(), ratio(1, 2)];
        let v = validate(&s);
        assert_eq!(v.len(), 1, "{v:?}");
        assert_eq!(v[0].kind, ViolationKind::HostOpensPickedDoor);
        assert_eq!(v[0].indices, vec![0, 0, 0]);
        assert!(v[0].to_string().starts_with("host opens picked door"));
    }

    #[test]
    fn unnormalized_prize_is_one_violation() {
        let mut s = three_door_classic();
        s.prize_dist = vec![ratio(1, 4); 3];
        let v = validate(&s);
        assert_eq!(v.len(), 1, "{v:?}");
        assert_eq!(v[0].kind.message(), "prize distribution not normalized");
    }

    #[test]
    fn zero_reach_rows_are_unconstrained() {
        let mut s = three_door_classic();
        s.prize_dist = vec![rational::one(), zero(), zero()];
        s.host_policy[1][0] = vec![zero(), zero(), zero()];
        assert_eq!(validate(&s), vec![]);
    }

    #[test]
    fn negative_and_switch_violations_reported() {
        let mut s = three_door_classic();
        s.contestant_dist[1] = vec![ratio(2, 3), ratio(2, 3), ratio(-1, 3)];
        s.switch_policy[0][1] = vec![ratio(1, 2), zero(), ratio(1, 2)];
        let kinds: Vec<_> = validate(&s).into_iter().map(|v| v.kind).collect();
        assert!(kinds.contains(&ViolationKind::NegativeProbability));
        assert!(kinds.contains(&ViolationKind::SwitchToClosedOffDoor));
        assert!(!kinds.contains(&ViolationKind::SwitchNotNormalized));
    }

    #[test]
    fn shape_mismatch_short_circuits() {
        let mut s = three_door_classic();
        s.host_policy.pop();
        let v = validate(&s);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::ShapeMismatch);
    }

    #[test]
    fn two_doors_cannot_switch() {
        let s = GameSpec {
            label: "two".into(),
            doors: 2,
            door_labels: None,
            prize_dist: vec![ratio(1, 2); 2],
            contestant_dist: GameSpec::uniform_contestant(2),
            host_policy: table3(2, |_, j, k| if j == k { zero() } else { rational::one() }),
            switch_policy: table3(2, |_, _, _| zero()),
        };
        let kinds: Vec<_> = validate(&s).into_iter().map(|v| v.kind).collect();
        assert_eq!(kinds, vec![ViolationKind::SwitchNotNormalized; 2]);
    }

    #[test]
    fn json_uses_num_den_objects() {
        let s = three_door_classic();
        let json = serde_json::to_value(&s).unwrap();
        assert_eq!(json["doors"], 3);
        assert_eq!(json["prize_dist"][0], serde_json::json!({"num": 1, "den": 3}));
        assert!(json.get("door_labels").is_none());
        let back: GameSpec = serde_json::from_value(json).unwrap();
        assert_eq!(back, s);
    }
}
