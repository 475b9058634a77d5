//! Exact rational coefficients.
//!
//! All symbolic computation in this crate runs over arbitrary-precision
//! rationals; `num_rational::BigRational` already maintains the invariants we
//! need (reduced fraction, positive denominator).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub type Rational = num_rational::BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// n! as a rational, for the factorial weights in jet composition formulas.
pub fn factorial(n: usize) -> Rational {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= BigInt::from(k);
    }
    Rational::from_integer(acc)
}

/// gcd of two non-negative rationals: gcd(a/b, c/d) = gcd(ad, cb)/(bd).
/// Returns zero when both inputs are zero.
pub fn rational_gcd(a: &Rational, b: &Rational) -> Rational {
    if a.is_zero() {
        return b.abs();
    }
    if b.is_zero() {
        return a.abs();
    }
    let num = a.numer().abs().gcd(&(b.numer().abs()));
    let den = a.denom().lcm(b.denom());
    Rational::new(num, den)
}

/// Renders `3`, `-3` or `3/4` without surrounding whitespace.
pub fn rational_to_string(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduced_and_positive_denominator() {
        let r = ratio(6, -4);
        assert_eq!(r.numer(), &BigInt::from(-3));
        assert_eq!(r.denom(), &BigInt::from(2));
    }

    #[test]
    fn gcd_of_rationals() {
        let g = rational_gcd(&ratio(4, 6), &ratio(2, 9));
        // gcd(2/3, 2/9) = 2/9
        assert_eq!(g, ratio(2, 9));
        assert_eq!(rational_gcd(&rat(0), &ratio(-5, 3)), ratio(5, 3));
    }

    #[test]
    fn factorials() {
        assert_eq!(factorial(0), rat(1));
        assert_eq!(factorial(5), rat(120));
    }
}
