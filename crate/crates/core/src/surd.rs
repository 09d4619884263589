//! Exact numbers `a + b sqrt(d)` with rational `a`, `b` and a fixed
//! square-free radicand `d`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::Rational64;
use num_traits::{Signed, Zero};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Surd {
    pub rational: Rational64,
    pub radical: Rational64,
    pub radicand: i64,
}

impl Surd {
    pub fn new(rational: Rational64, radical: Rational64, radicand: i64) -> Self {
        assert!(radicand > 1, "radicand must exceed 1");
        Self {
            rational,
            radical,
            radicand,
        }
    }

    /// `a + b sqrt(d)` from integers.
    pub fn from_ints(a: i64, b: i64, d: i64) -> Self {
        Self::new(Rational64::from_integer(a), Rational64::from_integer(b), d)
    }

    pub fn rational_only(a: Rational64, d: i64) -> Self {
        Self::new(a, Rational64::zero(), d)
    }

    /// `a - b sqrt(d)`.
    pub fn conjugate(self) -> Self {
        Self::new(self.rational, -self.radical, self.radicand)
    }

    /// `a^2 - d b^2`, the field norm.
    pub fn norm(self) -> Rational64 {
        self.rational * self.rational
            - Rational64::from_integer(self.radicand) * self.radical * self.radical
    }

    pub fn to_f64(self) -> f64 {
        let a = *self.rational.numer() as f64 / *self.rational.denom() as f64;
        let b = *self.radical.numer() as f64 / *self.radical.denom() as f64;
        a + b * (self.radicand as f64).sqrt()
    }

    /// Exact sign (-1, 0, 1).
    pub fn signum(self) -> i32 {
        let sa = sign_of(self.rational);
        let sb = sign_of(self.radical);
        if sa == sb || sb == 0 {
            return sa;
        }
        if sa == 0 {
            return sb;
        }
        // Opposite signs: compare a^2 with d b^2.
        let a2 = self.rational * self.rational;
        let db2 = Rational64::from_integer(self.radicand) * self.radical * self.radical;
        match a2.cmp(&db2) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => 0,
        }
    }

    fn check(self, other: Self) {
        assert!(
            self.radicand == other.radicand || self.radical.is_zero() || other.radical.is_zero(),
            "mixed radicands"
        );
    }

    fn radicand_of(self, other: Self) -> i64 {
        if self.radical.is_zero() {
            other.radicand
        } else {
            self.radicand
        }
    }
}

fn sign_of(r: Rational64) -> i32 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

impl PartialOrd for Surd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(match (*self - *other).signum() {
            -1 => Ordering::Less,
            0 => Ordering::Equal,
            _ => Ordering::Greater,
        })
    }
}

impl Add for Surd {
    type Output = Surd;
    fn add(self, o: Surd) -> Surd {
        self.check(o);
        Surd::new(
            self.rational + o.rational,
            self.radical + o.radical,
            self.radicand_of(o),
        )
    }
}

impl Sub for Surd {
    type Output = Surd;
    fn sub(self, o: Surd) -> Surd {
        self + (-o)
    }
}

impl Neg for Surd {
    type Output = Surd;
    fn neg(self) -> Surd {
        Surd::new(-self.rational, -self.radical, self.radicand)
    }
}

impl Mul for Surd {
    type Output = Surd;
    fn mul(self, o: Surd) -> Surd {
        self.check(o);
        let d = Rational64::from_integer(self.radicand_of(o));
        Surd::new(
            self.rational * o.rational + d * self.radical * o.radical,
            self.rational * o.radical + self.radical * o.rational,
            self.radicand_of(o),
        )
    }
}

impl Div for Surd {
    type Output = Surd;
    fn div(self, o: Surd) -> Surd {
        self.check(o);
        let d = self.radicand_of(o);
        let o = Surd::new(o.rational, o.radical, d);
        let norm = o.norm();
        assert!(!norm.is_zero(), "division by zero surd");
        let num = Surd::new(self.rational, self.radical, d) * o.conjugate();
        Surd::new(num.rational / norm, num.radical / norm, d)
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.radical.is_zero() {
            return write!(f, "{}", self.rational);
        }
        let sign = if self.radical.is_negative() { '-' } else { '+' };
        write!(
            f,
            "{} {} {}*sqrt({})",
            self.rational,
            sign,
            self.radical.abs(),
            self.radicand
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn arithmetic() {
        let s = Surd::from_ints(1, 1, 2);
        let sq = s * s; // 3 + 2 sqrt 2
        assert_eq!(sq, Surd::from_ints(3, 2, 2));
        let q = sq / s;
        assert_eq!(q, s);
        assert!((Surd::from_ints(-1, 3, 2).to_f64() - 3.242640687119285).abs() < 1e-15);
        assert_eq!(format!("{}", Surd::from_ints(1, -3, 2)), "1 - 3*sqrt(2)");
    }

    #[test]
    fn exact_sign() {
        assert_eq!(Surd::from_ints(-1, 3, 2).signum(), 1);
        assert_eq!(Surd::from_ints(5, -3, 2).signum(), 1);
        assert_eq!(Surd::from_ints(4, -3, 2).signum(), -1);
        assert_eq!(Surd::from_ints(0, 0, 5).signum(), 0);
        assert!(Surd::from_ints(1, 1, 2) < Surd::from_ints(1, 3, 2));
    }

    proptest! {
        #[test]
        fn sign_matches_float(a in -1000i64..1000, b in -1000i64..1000, d in prop::sample::select(vec![2i64, 3, 5, 7])) {
            let s = Surd::from_ints(a, b, d);
            let f = s.to_f64();
            if f.abs() > 1e-9 {
                prop_assert_eq!(s.signum(), if f > 0.0 { 1 } else { -1 });
            }
        }

        #[test]
        fn division_inverts_multiplication(a in -50i64..50, b in -50i64..50, c in 1i64..50, e in -50i64..50) {
            let x = Surd::from_ints(a, b, 5);
            let y = Surd::from_ints(c, e, 5);
            prop_assert_eq!((x * y) / y, x);
        }
    }
}
