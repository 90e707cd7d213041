//! Exact rational helpers shared by the model, the parser and the IP kernel.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational number used for every coefficient and right-hand side.
pub type Rational = BigRational;

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Parses an unsigned decimal literal such as `12`, `0.5` or `3.`.
pub fn parse_decimal(text: &str) -> Option<Rational> {
    let (whole, frac) = match text.split_once('.') {
        Some((w, f)) => (w, f),
        None => (text, ""),
    };
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{whole}{frac}");
    let numer: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().ok()?
    };
    let denom = num_traits::pow(BigInt::from(10), frac.len());
    Some(Rational::new(numer, denom))
}

/// Number of decimal places needed to write `value` exactly, or `None`
/// when its expansion does not terminate.
pub fn decimal_places(value: &Rational) -> Option<u32> {
    let mut denom = value.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let (mut twos, mut fives) = (0u32, 0u32);
    while denom.is_even() {
        denom /= &two;
        twos += 1;
    }
    while (&denom % &five).is_zero() {
        denom /= &five;
        fives += 1;
    }
    denom.is_one().then_some(twos.max(fives))
}

/// Canonical text form: an exact decimal when one exists, `p/q` otherwise.
pub fn format_rational(value: &Rational) -> String {
    match decimal_places(value) {
        Some(0) => value.numer().to_string(),
        Some(places) => {
            let scale = num_traits::pow(BigInt::from(10), places as usize);
            let scaled = (value * Rational::from_integer(scale)).to_integer();
            let negative = scaled.is_negative();
            let digits = scaled.abs().to_string();
            let places = places as usize;
            let padded = if digits.len() <= places {
                format!("{}{}", "0".repeat(places + 1 - digits.len()), digits)
            } else {
                digits
            };
            let split = padded.len() - places;
            let text = format!("{}.{}", &padded[..split], &padded[split..]);
            if negative {
                format!("-{text}")
            } else {
                text
            }
        }
        None => format!("{}/{}", value.numer(), value.denom()),
    }
}

/// Least common multiple of the denominators of `values` (1 for an empty input).
pub fn lcm_of_denominators<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

pub fn to_i64(value: &Rational) -> Option<i64> {
    if value.is_integer() {
        value.numer().to_i64()
    } else {
        None
    }
}

pub fn to_i128(value: &BigInt) -> Option<i128> {
    value.to_i128()
}

/// Rounds to the nearest integer, halves away from zero.
pub fn round_nearest(value: &Rational) -> BigInt {
    value.round().to_integer()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals() {
        assert_eq!(parse_decimal("0.5"), Some(ratio(1, 2)));
        assert_eq!(parse_decimal("12"), Some(int(12)));
        assert_eq!(parse_decimal("1.25"), Some(ratio(5, 4)));
        assert_eq!(parse_decimal(""), None);
        assert_eq!(parse_decimal("1.2.3"), None);
        assert_eq!(parse_decimal("x"), None);
    }

    #[test]
    fn decimal_places_detects_termination() {
        assert_eq!(decimal_places(&int(4)), Some(0));
        assert_eq!(decimal_places(&ratio(1, 2)), Some(1));
        assert_eq!(decimal_places(&ratio(1, 8)), Some(3));
        assert_eq!(decimal_places(&ratio(3, 20)), Some(2));
        assert_eq!(decimal_places(&ratio(1, 3)), None);
    }

    #[test]
    fn formats_exactly() {
        assert_eq!(format_rational(&ratio(1, 3)), "1/3");
        assert_eq!(format_rational(&ratio(-1, 3)), "-1/3");
        assert_eq!(format_rational(&ratio(1, 2)), "0.5");
        assert_eq!(format_rational(&ratio(-1, 20)), "-0.05");
        assert_eq!(format_rational(&ratio(11, 4)), "2.75");
        assert_eq!(format_rational(&int(-7)), "-7");
    }

    #[test]
    fn lcm_over_mixed_denominators() {
        let values = [ratio(1, 2), ratio(1, 3), int(4)];
        assert_eq!(lcm_of_denominators(&values), BigInt::from(6));
    }
}
