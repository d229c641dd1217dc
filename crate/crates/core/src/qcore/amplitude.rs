use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::rational::Rational;

/// A real number `(a + b·√2) / 2^k` with integer `a`, `b` and `k ≥ 0`.
///
/// Values are kept in canonical form: whenever `k > 0` and both `a` and `b`
/// are even, a factor of two is cancelled. Zero is always `(0, 0, 0)`.
/// Structural equality is therefore numeric equality.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ExactAmplitude {
    a: i64,
    b: i64,
    log2denom: u32,
}

impl ExactAmplitude {
    pub const ZERO: ExactAmplitude = ExactAmplitude { a: 0, b: 0, log2denom: 0 };
    pub const ONE: ExactAmplitude = ExactAmplitude { a: 1, b: 0, log2denom: 0 };
    /// `1/√2 = √2/2`.
    pub const FRAC_1_SQRT_2: ExactAmplitude = ExactAmplitude { a: 0, b: 1, log2denom: 1 };
    pub const HALF: ExactAmplitude = ExactAmplitude { a: 1, b: 0, log2denom: 1 };

    pub fn new(a: i64, b: i64, log2denom: u32) -> Self {
        let (mut a, mut b, mut k) = (a, b, log2denom);
        if a == 0 && b == 0 {
            return Self::ZERO;
        }
        while k > 0 && a % 2 == 0 && b % 2 == 0 {
            a /= 2;
            b /= 2;
            k -= 1;
        }
        ExactAmplitude { a, b, log2denom: k }
    }

    pub fn integer(n: i64) -> Self {
        Self::new(n, 0, 0)
    }

    /// Rational coefficient numerator.
    pub fn a(&self) -> i64 {
        self.a
    }

    /// Coefficient of `√2` in the numerator.
    pub fn b(&self) -> i64 {
        self.b
    }

    pub fn log2denom(&self) -> u32 {
        self.log2denom
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0 && self.b == 0
    }

    /// The exact value when it has no `√2` component.
    pub fn to_rational(&self) -> Option<Rational> {
        if self.b != 0 {
            return None;
        }
        let den = num_traits::pow(num_bigint::BigInt::from(2), self.log2denom as usize);
        Some(Rational::new(self.a.into(), den))
    }

    pub fn to_f64(&self) -> f64 {
        (self.a as f64 + self.b as f64 * std::f64::consts::SQRT_2)
            / 2f64.powi(self.log2denom as i32)
    }

    /// `x²` as an exact rational, when it is one.
    ///
    /// `(a + b√2)²` is rational exactly when `a·b = 0`, which covers every
    /// amplitude in the PBR construction.
    pub fn squared_magnitude(&self) -> Option<Rational> {
        (*self * *self).to_rational()
    }

    fn scaled_to(&self, k: u32) -> (i64, i64) {
        let factor = 1i64
            .checked_shl(k - self.log2denom)
            .filter(|f| *f > 0)
            .expect("amplitude denominator overflow");
        (
            self.a.checked_mul(factor).expect("amplitude overflow"),
            self.b.checked_mul(factor).expect("amplitude overflow"),
        )
    }
}

impl Add for ExactAmplitude {
    type Output = ExactAmplitude;

    fn add(self, rhs: Self) -> Self {
        let k = self.log2denom.max(rhs.log2denom);
        let (a1, b1) = self.scaled_to(k);
        let (a2, b2) = rhs.scaled_to(k);
        ExactAmplitude::new(
            a1.checked_add(a2).expect("amplitude overflow"),
            b1.checked_add(b2).expect("amplitude overflow"),
            k,
        )
    }
}

impl Neg for ExactAmplitude {
    type Output = ExactAmplitude;

    fn neg(self) -> Self {
        ExactAmplitude { a: -self.a, b: -self.b, log2denom: self.log2denom }
    }
}

impl Sub for ExactAmplitude {
    type Output = ExactAmplitude;

    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul for ExactAmplitude {
    type Output = ExactAmplitude;

    fn mul(self, rhs: Self) -> Self {
        let m = |x: i64, y: i64| x.checked_mul(y).expect("amplitude overflow");
        // (a1 + b1√2)(a2 + b2√2) = a1a2 + 2b1b2 + (a1b2 + a2b1)√2
        let a = m(self.a, rhs.a)
            .checked_add(m(2, m(self.b, rhs.b)))
            .expect("amplitude overflow");
        let b = m(self.a, rhs.b)
            .checked_add(m(self.b, rhs.a))
            .expect("amplitude overflow");
        let k = self
            .log2denom
            .checked_add(rhs.log2denom)
            .expect("amplitude denominator overflow");
        ExactAmplitude::new(a, b, k)
    }
}

impl std::iter::Sum for ExactAmplitude {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(ExactAmplitude::ZERO, Add::add)
    }
}

impl fmt::Display for ExactAmplitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let num = match (self.a, self.b) {
            (a, 0) => a.to_string(),
            (0, 1) => "√2".to_string(),
            (0, -1) => "-√2".to_string(),
            (0, b) => format!("{b}√2"),
            (a, b) if b < 0 => format!("({a} - {}√2)", -b),
            (a, b) => format!("({a} + {b}√2)"),
        };
        if self.log2denom == 0 {
            f.write_str(&num)
        } else {
            write!(f, "{num}/{}", 1u128 << self.log2denom.min(127))
        }
    }
}

impl From<ExactAmplitude> for f64 {
    fn from(x: ExactAmplitude) -> f64 {
        x.to_f64()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use proptest::prelude::*;

    #[test]
    fn inverse_sqrt_two_encoding() {
        // √2/4 is half of 1/√2; the canonical 1/√2 is (0 + √2)/2.
        let inv = ExactAmplitude::FRAC_1_SQRT_2;
        assert_eq!((inv.a(), inv.b(), inv.log2denom()), (0, 1, 1));
        assert_ne!(ExactAmplitude::new(0, 1, 2), inv);
        assert_eq!(inv * inv, ExactAmplitude::HALF);
        assert_eq!(inv.squared_magnitude(), Some(ratio(1, 2)));
        assert!((inv.to_f64() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn canonical_form_cancels_common_twos() {
        assert_eq!(ExactAmplitude::new(4, 2, 3), ExactAmplitude::new(2, 1, 2));
        assert_eq!(ExactAmplitude::new(8, 0, 2), ExactAmplitude::integer(2));
        // No cancellation below a zero exponent.
        assert_eq!(ExactAmplitude::new(4, 2, 0).log2denom(), 0);
        assert_eq!(ExactAmplitude::new(0, 0, 9), ExactAmplitude::ZERO);
    }

    #[test]
    fn sqrt_two_squared_is_two() {
        let root2 = ExactAmplitude::new(0, 1, 0);
        assert_eq!(root2 * root2, ExactAmplitude::integer(2));
        assert_eq!(root2 * ExactAmplitude::FRAC_1_SQRT_2, ExactAmplitude::ONE);
    }

    #[test]
    fn mixed_amplitude_square_is_irrational() {
        let x = ExactAmplitude::new(1, 1, 1);
        assert_eq!(x.squared_magnitude(), None);
        assert_eq!(x.to_rational(), None);
    }

    #[test]
    fn display_is_readable() {
        assert_eq!(ExactAmplitude::FRAC_1_SQRT_2.to_string(), "√2/2");
        assert_eq!(ExactAmplitude::new(1, -3, 2).to_string(), "(1 - 3√2)/4");
        assert_eq!(ExactAmplitude::integer(-1).to_string(), "-1");
    }

    fn small() -> impl Strategy<Value = ExactAmplitude> {
        (-1000i64..1000, -1000i64..1000, 0u32..12)
            .prop_map(|(a, b, k)| ExactAmplitude::new(a, b, k))
    }

    proptest! {
        #[test]
        fn closed_and_canonical_under_ring_ops(x in small(), y in small()) {
            for z in [x + y, x * y, x - y] {
                let canon = ExactAmplitude::new(z.a(), z.b(), z.log2denom());
                prop_assert_eq!(z, canon);
                prop_assert!(z.log2denom() == 0 || z.a() % 2 != 0 || z.b() % 2 != 0);
            }
        }

        #[test]
        fn ring_ops_agree_with_floats(x in small(), y in small()) {
            let tol = 1e-9 * (1.0 + x.to_f64().abs() * y.to_f64().abs() + x.to_f64().abs() + y.to_f64().abs());
            prop_assert!(((x + y).to_f64() - (x.to_f64() + y.to_f64())).abs() < tol);
            prop_assert!(((x * y).to_f64() - x.to_f64() * y.to_f64()).abs() < tol);
        }

        #[test]
        fn equality_is_numeric(x in small(), shift in 0u32..6) {
            let f = 1i64 << shift;
            let scaled = ExactAmplitude::new(x.a() * f, x.b() * f, x.log2denom() + shift);
            prop_assert_eq!(scaled, x);
        }
    }
}
