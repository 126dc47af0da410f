//! Exact p-adic primitives over the rational integers.
//!
//! Everything here works on arbitrary-precision [`BigInt`]s; there is no
//! floating point in this module.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A rational prime, checked at construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prime(u64);

impl Prime {
    pub fn new(p: u64) -> Result<Self> {
        if is_prime(p) {
            Ok(Prime(p))
        } else {
            Err(Error::NotPrime(p))
        }
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }

    pub fn to_bigint(self) -> BigInt {
        BigInt::from(self.0)
    }

    /// `p^e` as a big integer.
    pub fn pow(self, e: u32) -> BigInt {
        num_traits::pow(BigInt::from(self.0), e as usize)
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for Prime {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u64(self.0)
    }
}

impl<'de> Deserialize<'de> for Prime {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let p = u64::deserialize(d)?;
        Prime::new(p).map_err(serde::de::Error::custom)
    }
}

/// Deterministic Miller-Rabin; the witness set is exact for all of `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &w in &WITNESSES {
        if n.is_multiple_of(w) {
            return n == w;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let pow = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mul(acc, b);
            }
            b = mul(b, b);
            e >>= 1;
        }
        acc
    };
    'witness: for &a in &WITNESSES {
        let mut x = pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// A prime together with a working precision `N`; residues live in `Z/p^N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrecisionContext {
    prime: Prime,
    precision: u32,
    modulus: BigInt,
}

impl PrecisionContext {
    pub fn new(p: u64, precision: u32) -> Result<Self> {
        let prime = Prime::new(p)?;
        Self::with_prime(prime, precision)
    }

    pub fn with_prime(prime: Prime, precision: u32) -> Result<Self> {
        if precision == 0 {
            return Err(Error::ZeroPrecision);
        }
        Ok(PrecisionContext {
            prime,
            precision,
            modulus: prime.pow(precision),
        })
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// `p^N`.
    pub fn modulus(&self) -> &BigInt {
        &self.modulus
    }

    /// Least nonnegative representative mod `p^N`.
    pub fn reduce(&self, x: &BigInt) -> BigInt {
        x.mod_floor(&self.modulus)
    }
}

/// `v_p`, with zero mapped to [`Valuation::Infinite`].
///
/// The derived ordering puts every finite value below `Infinite`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Valuation {
    Finite(u64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<u64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Valuation::Infinite)
    }

    /// Clamp to `cap`, mapping infinity to `cap`.
    pub fn min_with(self, cap: u64) -> u64 {
        match self {
            Valuation::Finite(v) => v.min(cap),
            Valuation::Infinite => cap,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => f.write_str("inf"),
        }
    }
}

/// An exact rational slope, always held in lowest terms with positive
/// denominator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slope(Ratio<i64>);

impl Slope {
    pub fn new(numerator: i64, denominator: i64) -> Result<Self> {
        if denominator == 0 {
            return Err(Error::Parse("slope with zero denominator".into()));
        }
        Ok(Slope(Ratio::new(numerator, denominator)))
    }

    pub fn integer(value: i64) -> Self {
        Slope(Ratio::from_integer(value))
    }

    pub fn numerator(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denominator(&self) -> i64 {
        *self.0.denom()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn as_ratio(&self) -> Ratio<i64> {
        self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.numerator() as f64 / self.denominator() as f64
    }
}

impl From<Ratio<i64>> for Slope {
    fn from(r: Ratio<i64>) -> Self {
        Slope(r)
    }
}

impl fmt::Display for Slope {
    /// Always `num/den`, including integers (`2/1`).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator(), self.denominator())
    }
}

impl FromStr for Slope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("malformed slope {s:?}"));
        match s.split_once('/') {
            Some((n, d)) => {
                let n = n.trim().parse::<i64>().map_err(|_| bad())?;
                let d = d.trim().parse::<i64>().map_err(|_| bad())?;
                Slope::new(n, d)
            }
            None => Ok(Slope::integer(s.trim().parse::<i64>().map_err(|_| bad())?)),
        }
    }
}

impl Serialize for Slope {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Slope {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn padic_valuation(x: &BigInt, p: Prime) -> Valuation {
    if x.is_zero() {
        return Valuation::Infinite;
    }
    if p.get() == 2 {
        return Valuation::Finite(x.trailing_zeros().unwrap_or(0));
    }
    let pb = p.to_bigint();
    let mut v = 0;
    let mut rest = x.clone();
    loop {
        let (q, r) = rest.div_rem(&pb);
        if !r.is_zero() {
            return Valuation::Finite(v);
        }
        rest = q;
        v += 1;
    }
}

/// `x / p^{v_p(x)}`, keeping the sign of `x`.
pub fn unit_part(x: &BigInt, p: Prime) -> Result<BigInt> {
    match padic_valuation(x, p) {
        Valuation::Infinite => Err(Error::ZeroInput),
        Valuation::Finite(v) => Ok(x / p.pow(v as u32)),
    }
}

/// `p^m | (x - y)`.
pub fn congruent_mod_power(x: &BigInt, y: &BigInt, p: Prime, m: u32) -> bool {
    if m == 0 {
        return true;
    }
    (x - y).is_multiple_of(&p.pow(m))
}

/// `v_p(x - y)` capped at `cap`.
pub fn congruence_margin(x: &BigInt, y: &BigInt, p: Prime, cap: u32) -> u32 {
    padic_valuation(&(x - y), p).min_with(cap as u64) as u32
}

pub fn is_unit(x: &BigInt, p: Prime) -> bool {
    !x.is_multiple_of(&p.to_bigint())
}

/// Inverse of `x` modulo `m`, as the least nonnegative representative.
pub fn inverse_mod(x: &BigInt, m: &BigInt) -> Option<BigInt> {
    if m.is_one() {
        return Some(BigInt::zero());
    }
    let x = x.mod_floor(m);
    let egcd = x.extended_gcd(m);
    if !egcd.gcd.is_one() {
        return None;
    }
    Some(egcd.x.mod_floor(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    fn big(x: i64) -> BigInt {
        BigInt::from(x)
    }

    /// Oracle: strip factors of p by repeated exact division on i128.
    fn valuation_by_division(mut x: i128, p: i128) -> Option<u64> {
        if x == 0 {
            return None;
        }
        let mut v = 0;
        while x % p == 0 {
            x /= p;
            v += 1;
        }
        Some(v)
    }

    #[test]
    fn primality() {
        let small: Vec<u64> = (0..60).filter(|&n| is_prime(n)).collect();
        assert_eq!(
            small,
            vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]
        );
        assert!(is_prime(18_446_744_073_709_551_557));
        assert!(!is_prime(3_215_031_751));
        assert!(Prime::new(1).is_err());
        assert!(Prime::new(91).is_err());
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(padic_valuation(&big(12), p(2)), Valuation::Finite(2));
        assert_eq!(padic_valuation(&big(0), p(5)), Valuation::Infinite);
        assert_eq!(
            padic_valuation(&big(-2187), p(3)),
            Valuation::Finite(valuation_by_division(-2187, 3).unwrap())
        );
        assert_eq!(padic_valuation(&big(-2187), p(3)), Valuation::Finite(7));
        assert!(Valuation::Finite(u64::MAX) < Valuation::Infinite);
    }

    #[test]
    fn unit_part_examples() {
        assert_eq!(unit_part(&big(12), p(2)).unwrap(), big(3));
        assert_eq!(unit_part(&big(-2187), p(3)).unwrap(), big(-1));
        assert_eq!(unit_part(&big(50), p(5)).unwrap(), big(2));
        assert_eq!(unit_part(&big(0), p(5)), Err(Error::ZeroInput));
    }

    #[test]
    fn congruence_examples() {
        assert!(congruent_mod_power(&big(7), &big(7), p(2), 10));
        assert!(congruent_mod_power(&big(1), &big(33), p(2), 5));
        assert!(!congruent_mod_power(&big(1), &big(33), p(2), 6));
        assert!(congruent_mod_power(&big(1), &big(2), p(2), 0));
    }

    #[test]
    fn precision_context() {
        let ctx = PrecisionContext::new(3, 4).unwrap();
        assert_eq!(ctx.modulus(), &big(81));
        assert_eq!(ctx.reduce(&big(-1)), big(80));
        assert!(PrecisionContext::new(4, 2).is_err());
        assert_eq!(PrecisionContext::new(3, 0), Err(Error::ZeroPrecision));
    }

    #[test]
    fn slope_text() {
        let s: Slope = "4/6".parse().unwrap();
        assert_eq!(s, Slope::new(2, 3).unwrap());
        assert_eq!(s.to_string(), "2/3");
        assert_eq!(Slope::integer(-2).to_string(), "-2/1");
        assert_eq!("3".parse::<Slope>().unwrap(), Slope::integer(3));
        assert!("1/0".parse::<Slope>().is_err());
        assert!(Slope::new(1, 3).unwrap() < Slope::new(1, 2).unwrap());
    }

    #[test]
    fn modular_inverse() {
        assert_eq!(inverse_mod(&big(3), &big(7)), Some(big(5)));
        assert_eq!(inverse_mod(&big(-3), &big(7)), Some(big(2)));
        assert_eq!(inverse_mod(&big(3), &big(9)), None);
    }

    proptest! {
        #[test]
        fn valuation_is_additive(
            x in (1i64..1_000_000).prop_union(-1_000_000i64..-1),
            y in (1i64..1_000_000).prop_union(-1_000_000i64..-1),
            pi in 0usize..4,
        ) {
            let q = p([2, 3, 5, 7][pi]);
            let vx = padic_valuation(&big(x), q).finite().unwrap();
            let vy = padic_valuation(&big(y), q).finite().unwrap();
            let vxy = padic_valuation(&(big(x) * big(y)), q).finite().unwrap();
            prop_assert_eq!(vxy, vx + vy);
            prop_assert_eq!(Some(vx), valuation_by_division(x as i128, q.get() as i128));
        }

        #[test]
        fn unit_part_reconstructs(x in any::<i64>().prop_filter("nonzero", |x| *x != 0), pi in 0usize..4) {
            let q = p([2, 3, 5, 7][pi]);
            let v = padic_valuation(&big(x), q).finite().unwrap() as u32;
            let u = unit_part(&big(x), q).unwrap();
            prop_assert!(is_unit(&u, q));
            prop_assert_eq!(q.pow(v) * u, big(x));
        }

        #[test]
        fn congruence_matches_valuation(x in any::<i32>(), y in any::<i32>(), m in 0u32..12, pi in 0usize..4) {
            let q = p([2, 3, 5, 7][pi]);
            let expected = padic_valuation(&(big(x as i64) - big(y as i64)), q) >= Valuation::Finite(m as u64);
            prop_assert_eq!(congruent_mod_power(&big(x as i64), &big(y as i64), q, m), expected);
        }
    }
}
