//! Independent cross-checks for the exact paths.
//!
//! Nothing here calls into [`crate::engine`] or [`crate::qcore`]: the game
//! oracle walks the full door grid with literal event definitions, the Born
//! oracle redoes the overlaps in plain `f64`, and the lost-bit oracle lists
//! every (result, surviving position, switch choice) path by hand.

use num_traits::Zero;

use crate::engine::GameSpec;
use crate::rational::{ratio, Rational};

/// Exact event probabilities computed by brute force.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleAnalysis {
    pub opens_prize: Rational,
    pub opens_goat: Rational,
    pub stick_and_goat: Rational,
    pub switch_and_goat: Rational,
    pub stick_given_goat: Option<Rational>,
    pub switch_given_goat: Option<Rational>,
}

/// Sums the product `P(A_i)·P(B_j|A_i)·P(C_k|B_j∩A_i)·P(D_l|C_k∩B_j)` over
/// every `(i, j, k)` and the winning `l = i`, reading events straight off their
/// definitions. Prize reveals end the game, so their weight is taken before
/// the switch stage. No validation: the caller passes a well-formed spec.
pub fn brute_force(spec: &GameSpec) -> OracleAnalysis {
    let n = spec.doors;
    let mut opens_prize = Rational::zero();
    let mut opens_goat = Rational::zero();
    let mut stick_and_goat = Rational::zero();
    let mut switch_and_goat = Rational::zero();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let p = &spec.prize_dist[i] * &spec.contestant_dist[i][j] * &spec.host_policy[i][j][k];
                if k == i {
                    opens_prize += &p;
                    continue;
                }
                opens_goat += &p;
                if i == j {
                    stick_and_goat += &p;
                }
                // Switching wins exactly when the target `l` is the prize.
                switch_and_goat += &p * &spec.switch_policy[j][k][i];
            }
        }
    }
    let given = |x: &Rational| (!opens_goat.is_zero()).then(|| x / &opens_goat);
    OracleAnalysis {
        stick_given_goat: given(&stick_and_goat),
        switch_given_goat: given(&switch_and_goat),
        opens_prize,
        opens_goat,
        stick_and_goat,
        switch_and_goat,
    }
}

/// `|⟨Φ_i|Ψ_h⟩|²` for all sixteen pairs, in `f64`, with rows indexed by
/// the state `h` and columns by the outcome `i`.
pub fn born_matrix_f64() -> [[f64; 4]; 4] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let zero = [1.0, 0.0];
    let plus = [s, s];
    let minus = [s, -s];
    let one = [0.0, 1.0];
    let kron = |a: [f64; 2], b: [f64; 2]| [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]];
    let states = [kron(zero, zero), kron(zero, plus), kron(plus, zero), kron(plus, plus)];
    // (|a b⟩ + |c d⟩)/√2 for the four pairs, written out term by term.
    let pair = |a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]| {
        let x = kron(a, b);
        let y = kron(c, d);
        [(x[0] + y[0]) * s, (x[1] + y[1]) * s, (x[2] + y[2]) * s, (x[3] + y[3]) * s]
    };
    let basis = [
        pair(zero, one, one, zero),
        pair(zero, minus, one, plus),
        pair(plus, one, minus, zero),
        pair(plus, minus, minus, plus),
    ];
    let mut out = [[0.0; 4]; 4];
    for (h, st) in states.iter().enumerate() {
        for (i, b) in basis.iter().enumerate() {
            let amp: f64 = st.iter().zip(b).map(|(x, y)| x * y).sum();
            out[h][i] = amp * amp;
        }
    }
    out
}

/// Lost-bit channel numbers for one received value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LostBitOracle {
    pub p_received: Rational,
    pub stick_given_bit: Rational,
    pub switch_given_bit: Rational,
}

/// Lists the 4×2 (result, surviving position) outcomes, each with weight
/// 1/8, and scores both strategies for Bob's stick door `bell`.
pub fn lost_bit(bell: (u8, u8), bit: u8) -> LostBitOracle {
    let results = [(0u8, 0u8), (0, 1), (1, 0), (1, 1)];
    let mut received = Rational::zero();
    let mut stick = Rational::zero();
    let mut switch = Rational::zero();
    // The switch set depends only on the value heard.
    let options: Vec<(u8, u8)> = results
        .iter()
        .copied()
        .filter(|&(a, b)| (a == bit || b == bit) && (a, b) != bell)
        .collect();
    for result in results {
        for position in 0..2 {
            let surviving = if position == 0 { result.0 } else { result.1 };
            if surviving != bit {
                continue;
            }
            let w = ratio(1, 8);
            received += &w;
            if result == bell {
                stick += &w;
            }
            for option in &options {
                if *option == result {
                    switch += &w * ratio(1, options.len() as i64);
                }
            }
        }
    }
    LostBitOracle {
        stick_given_bit: &stick / &received,
        switch_given_bit: &switch / &received,
        p_received: received,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_born_row_one() {
        let m = born_matrix_f64();
        for (got, want) in m[0].iter().zip([0.0, 0.25, 0.25, 0.5]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn lost_bit_zero() {
        let o = lost_bit((0, 0), 0);
        assert_eq!(o.p_received, ratio(1, 2));
        assert_eq!(o.stick_given_bit, ratio(1, 2));
        assert_eq!(o.switch_given_bit, ratio(1, 4));
    }
}
