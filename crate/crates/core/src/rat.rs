//! Thin helpers over `num_rational::BigRational`.
//!
//! All arithmetic in the crate is exact; rationals are kept in lowest terms
//! by `BigRational` itself. Serialization uses decimal strings because
//! denominators routinely exceed machine precision after deep iteration.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::Error;

pub type Rat = BigRational;

/// Rational from machine integers.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn zero() -> Rat {
    Rat::zero()
}

pub fn one() -> Rat {
    Rat::one()
}

pub fn half() -> Rat {
    rat(1, 2)
}

/// 1 / 2^k.
pub fn pow2_inv(k: u64) -> Rat {
    Rat::new(BigInt::one(), BigInt::one() << k)
}

/// x mod 1, normalized into [0, 1).
pub fn frac_mod1(x: &Rat) -> Rat {
    use num_traits::Signed as _;
    // Already in range: skip the floor division.
    if !x.is_negative() && x.numer() < x.denom() {
        return x.clone();
    }
    let f = x.floor();
    x - f
}

/// True when x = a / 2^m in lowest terms (integers included).
pub fn is_dyadic(x: &Rat) -> bool {
    let mut d = x.denom().clone();
    while (&d % 2u8).is_zero() {
        d /= 2u8;
    }
    d.is_one()
}

/// Parse "a/b" or "a" into a rational. Whitespace is not accepted.
pub fn parse_rat(s: &str) -> Result<Rat, Error> {
    let bad = |_| Error::Invalid(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.parse().map_err(bad)?;
            let d: BigInt = d.parse().map_err(bad)?;
            if d.is_zero() {
                return Err(Error::Invalid(format!("zero denominator: {s:?}")));
            }
            Ok(Rat::new(n, d))
        }
        None => {
            let n: BigInt = s.parse().map_err(bad)?;
            Ok(Rat::from_integer(n))
        }
    }
}

/// Lowest-terms "a/b" (or "a" for integers).
pub fn fmt_rat(x: &Rat) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// min over a nonempty iterator of rationals.
pub fn min_rat<I: IntoIterator<Item = Rat>>(it: I) -> Option<Rat> {
    it.into_iter().min()
}

pub fn max_rat<I: IntoIterator<Item = Rat>>(it: I) -> Option<Rat> {
    it.into_iter().max()
}

/// Absolute value.
pub fn abs(x: &Rat) -> Rat {
    x.abs()
}

/// Serde adapter: rationals as lowest-terms "a/b" strings.
pub mod serde_str {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Rat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rat(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        parse_rat(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for optional rationals.
pub mod serde_str_opt {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<Rat>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(v) => s.serialize_some(&fmt_rat(v)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rat>, D::Error> {
        let s: Option<String> = Option::deserialize(d)?;
        s.map(|s| parse_rat(&s).map_err(serde::de::Error::custom)).transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["1/3", "0", "-7/24", "12"] {
            let r = parse_rat(s).unwrap();
            assert_eq!(fmt_rat(&r), s);
        }
        assert_eq!(fmt_rat(&parse_rat("2/4").unwrap()), "1/2");
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("x").is_err());
    }

    #[test]
    fn mod1_and_dyadic() {
        assert_eq!(frac_mod1(&rat(7, 3)), rat(1, 3));
        assert_eq!(frac_mod1(&rat(-1, 4)), rat(3, 4));
        assert!(is_dyadic(&rat(3, 8)));
        assert!(is_dyadic(&rat_int(2)));
        assert!(!is_dyadic(&rat(1, 6)));
    }
}
