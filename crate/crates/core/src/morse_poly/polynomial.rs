use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul};
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{Signed, Zero};
use serde::de::{self, MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// `Σ cₑ tᵉ` with non-negative rational exponents and positive integer
/// coefficients. Zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ExponentPolynomial {
    terms: BTreeMap<Rational64, u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolynomialParseError {
    #[error("invalid exponent '{0}'")]
    Exponent(String),
    #[error("negative exponent {0}")]
    NegativeExponent(Rational64),
    #[error("invalid term '{0}'")]
    Term(String),
}

impl ExponentPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(Rational64::zero(), 1)
    }

    /// `coeff · t^exponent`.
    ///
    /// # Panics
    /// If `exponent` is negative.
    pub fn monomial(exponent: Rational64, coeff: u64) -> Self {
        let mut p = Self::zero();
        p.add_term(exponent, coeff);
        p
    }

    /// `Σ coeffs[i] tⁱ`.
    pub fn from_coefficients(coeffs: &[u64]) -> Self {
        let mut p = Self::zero();
        for (i, &c) in coeffs.iter().enumerate() {
            p.add_term(Rational64::from_integer(i as i64), c);
        }
        p
    }

    /// # Panics
    /// If `exponent` is negative.
    pub fn add_term(&mut self, exponent: Rational64, coeff: u64) {
        assert!(!exponent.is_negative(), "negative exponent {exponent}");
        if coeff > 0 {
            *self.terms.entry(exponent).or_insert(0) += coeff;
        }
    }

    pub fn coeff(&self, exponent: Rational64) -> u64 {
        self.terms.get(&exponent).copied().unwrap_or(0)
    }

    /// Terms in ascending exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (Rational64, u64)> + '_ {
        self.terms.iter().map(|(e, c)| (*e, *c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<Rational64> {
        self.terms.keys().next_back().copied()
    }

    /// All exponents are integers.
    pub fn is_integral(&self) -> bool {
        self.terms.keys().all(|e| e.is_integer())
    }

    /// Value at `t = 1`.
    pub fn total(&self) -> u64 {
        self.terms.values().sum()
    }

    /// Coefficients `[c₀, c₁, …]` when all exponents are integral.
    pub fn integer_coefficients(&self) -> Option<Vec<u64>> {
        if !self.is_integral() {
            return None;
        }
        let Some(deg) = self.degree() else {
            return Some(Vec::new());
        };
        let mut out = vec![0; deg.to_integer() as usize + 1];
        for (e, c) in self.terms() {
            out[e.to_integer() as usize] = c;
        }
        Some(out)
    }

    /// `(1 + t) · self`.
    pub fn times_one_plus_t(&self) -> Self {
        let mut out = self.clone();
        for (e, c) in self.terms() {
            out.add_term(e + 1, c);
        }
        out
    }

    /// For each exponent class `e mod 1` (keyed by its representative in
    /// `[0, 1)`), the alternating sum `Σ cₑ (-1)^⌊e⌋`. For integral
    /// polynomials this is the single value at `t = -1`.
    pub fn alternating_sums(&self) -> BTreeMap<Rational64, i128> {
        let mut out = BTreeMap::new();
        for (e, c) in self.terms() {
            let floor = e.floor();
            let sign = if floor.to_integer().is_even() { 1 } else { -1 };
            *out.entry(e - floor).or_insert(0) += sign * c as i128;
        }
        out.retain(|_, v| *v != 0);
        out
    }

    /// Value at `t = -1`, only defined for integral polynomials.
    pub fn at_minus_one(&self) -> Option<i128> {
        self.is_integral().then(|| self.alternating_sums().values().sum())
    }
}

fn exponent_text(e: Rational64) -> String {
    if e.is_integer() {
        e.to_integer().to_string()
    } else {
        format!("{}/{}", e.numer(), e.denom())
    }
}

fn parse_exponent(s: &str) -> Result<Rational64, PolynomialParseError> {
    let s = s.trim();
    let e = Rational64::from_str(s).map_err(|_| PolynomialParseError::Exponent(s.to_string()))?;
    if e.is_negative() {
        return Err(PolynomialParseError::NegativeExponent(e));
    }
    Ok(e)
}

impl fmt::Display for ExponentPolynomial {
    /// Ascending exponents, e.g. `1 + 22*t^2 + t^4` or `2 + t^(1/2)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let power = if e.is_zero() {
                String::new()
            } else if e == Rational64::from_integer(1) {
                "t".to_string()
            } else if e.is_integer() {
                format!("t^{}", e.to_integer())
            } else {
                format!("t^({})", exponent_text(e))
            };
            match (c, power.is_empty()) {
                (_, true) => write!(f, "{c}")?,
                (1, false) => write!(f, "{power}")?,
                _ => write!(f, "{c}*{power}")?,
            }
        }
        Ok(())
    }
}

impl FromStr for ExponentPolynomial {
    type Err = PolynomialParseError;

    /// Parses the display form. Terms are `c`, `t`, `t^k`, `t^(p/q)` or
    /// `c*` followed by one of the powers; repeated exponents are summed.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Self::zero();
        let s = s.trim();
        if s == "0" {
            return Ok(p);
        }
        for raw in s.split('+') {
            let term: String = raw.chars().filter(|c| !c.is_whitespace()).collect();
            let bad = || PolynomialParseError::Term(raw.trim().to_string());
            if term.is_empty() {
                return Err(bad());
            }
            let (coeff, power) = match term.split_once('*') {
                Some((c, rest)) => (c.parse::<u64>().map_err(|_| bad())?, Some(rest)),
                None if term.starts_with('t') => (1, Some(term.as_str())),
                None => (term.parse::<u64>().map_err(|_| bad())?, None),
            };
            let exponent = match power {
                None => Rational64::zero(),
                Some("t") => Rational64::from_integer(1),
                Some(pw) => {
                    let e = pw.strip_prefix("t^").ok_or_else(bad)?;
                    let e = e.strip_prefix('(').and_then(|x| x.strip_suffix(')')).unwrap_or(e);
                    parse_exponent(e)?
                }
            };
            p.add_term(exponent, coeff);
        }
        Ok(p)
    }
}

impl Add for &ExponentPolynomial {
    type Output = ExponentPolynomial;

    fn add(self, rhs: Self) -> ExponentPolynomial {
        let mut out = self.clone();
        for (e, c) in rhs.terms() {
            out.add_term(e, c);
        }
        out
    }
}

impl Mul for &ExponentPolynomial {
    type Output = ExponentPolynomial;

    fn mul(self, rhs: Self) -> ExponentPolynomial {
        let mut out = ExponentPolynomial::zero();
        for (a, x) in self.terms() {
            for (b, y) in rhs.terms() {
                out.add_term(a + b, x * y);
            }
        }
        out
    }
}

impl Serialize for ExponentPolynomial {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.terms.len()))?;
        for (e, c) in self.terms() {
            map.serialize_entry(&exponent_text(e), &c)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for ExponentPolynomial {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct PolyVisitor;

        impl<'de> Visitor<'de> for PolyVisitor {
            type Value = ExponentPolynomial;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map from exponent strings like \"2\" or \"1/2\" to non-negative integers")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<Self::Value, A::Error> {
                let mut p = ExponentPolynomial::zero();
                while let Some((key, coeff)) = access.next_entry::<String, u64>()? {
                    let e = parse_exponent(&key).map_err(de::Error::custom)?;
                    p.add_term(e, coeff);
                }
                Ok(p)
            }
        }

        deserializer.deserialize_map(PolyVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn display_forms() {
        assert_eq!(ExponentPolynomial::from_coefficients(&[1, 0, 22, 0, 1]).to_string(), "1 + 22*t^2 + t^4");
        assert_eq!(ExponentPolynomial::from_coefficients(&[1, 1, 1]).to_string(), "1 + t + t^2");
        assert_eq!(ExponentPolynomial::monomial(r(1, 2), 3).to_string(), "3*t^(1/2)");
        assert_eq!(ExponentPolynomial::zero().to_string(), "0");
    }

    #[test]
    fn json_uses_reduced_fraction_keys_in_ascending_order() {
        let mut p = ExponentPolynomial::from_coefficients(&[17, 0, 6, 0, 0, 0, 0, 0, 0, 0, 1]);
        p.add_term(r(2, 4), 2);
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, r#"{"0":17,"1/2":2,"2":6,"10":1}"#);
        let back: ExponentPolynomial = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<ExponentPolynomial>(r#"{"-1":1}"#).is_err());
        assert!(serde_json::from_str::<ExponentPolynomial>(r#"{"x":1}"#).is_err());
    }

    #[test]
    fn zero_coefficients_vanish() {
        let p: ExponentPolynomial = serde_json::from_str(r#"{"0":0,"3":2}"#).unwrap();
        assert_eq!(p.terms().count(), 1);
        assert_eq!(p.coeff(r(0, 1)), 0);
    }

    #[test]
    fn alternating_sums_split_by_class() {
        let mut p = ExponentPolynomial::from_coefficients(&[1, 1, 1]);
        p.add_term(r(1, 2), 2);
        p.add_term(r(3, 2), 1);
        let sums = p.alternating_sums();
        assert_eq!(sums[&r(0, 1)], 1);
        assert_eq!(sums[&r(1, 2)], 1);
        assert_eq!(p.at_minus_one(), None);
        assert_eq!(ExponentPolynomial::from_coefficients(&[1, 0, 22, 0, 1]).at_minus_one(), Some(24));
    }

    fn poly() -> impl Strategy<Value = ExponentPolynomial> {
        prop::collection::vec((0i64..12, 1i64..4, 0u64..5), 0..6).prop_map(|ts| {
            let mut p = ExponentPolynomial::zero();
            for (n, d, c) in ts {
                p.add_term(Rational64::new(n, d), c);
            }
            p
        })
    }

    proptest! {
        #[test]
        fn display_parse_round_trip(p in poly()) {
            let back: ExponentPolynomial = p.to_string().parse().unwrap();
            prop_assert_eq!(back, p);
        }

        #[test]
        fn json_round_trip(p in poly()) {
            let back: ExponentPolynomial = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
            prop_assert_eq!(back, p);
        }

        #[test]
        fn one_plus_t_matches_multiplication(p in poly()) {
            let one_plus_t = ExponentPolynomial::from_coefficients(&[1, 1]);
            prop_assert_eq!(p.times_one_plus_t(), &p * &one_plus_t);
        }
    }
}
