//! Exact rational arithmetic used by the polytope predicates.

use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = Ratio<i128>;

const MAX_DENOMINATOR: i128 = 1 << 40;

/// Converts a float to the simplest rational within `1e-12` relative error,
/// searching continued-fraction convergents with bounded denominators.
pub fn rational_from_f64(x: f64) -> Result<Rational> {
    if !x.is_finite() {
        return Err(Error::InvalidGeometry(format!("non-finite coordinate {x}")));
    }
    if x == x.trunc() && x.abs() < 1e18 {
        return Ok(Rational::from_integer(x as i128));
    }
    let tol = 1e-12 * x.abs().max(1.0);
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a.abs() > 1e18 {
            break;
        }
        let a = a as i128;
        let h2 = a.checked_mul(h1).and_then(|v| v.checked_add(h0));
        let k2 = a.checked_mul(k1).and_then(|v| v.checked_add(k0));
        let (Some(h2), Some(k2)) = (h2, k2) else { break };
        if k2 > MAX_DENOMINATOR {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if ((h1 as f64) / (k1 as f64) - x).abs() <= tol {
            return Ok(Rational::new(h1, k1));
        }
        let frac = r - r.floor();
        if frac == 0.0 {
            break;
        }
        r = 1.0 / frac;
    }
    if k1 != 0 && ((h1 as f64) / (k1 as f64) - x).abs() <= tol {
        return Ok(Rational::new(h1, k1));
    }
    Err(Error::InvalidGeometry(format!(
        "coordinate {x} has no small rational representation"
    )))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Parses a rational from a JSON-friendly text form: "3", "-1/2", "0.25".
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num: i128 = num
            .trim()
            .parse()
            .map_err(|_| Error::InvalidGeometry(format!("bad rational {text:?}")))?;
        let den: i128 = den
            .trim()
            .parse()
            .map_err(|_| Error::InvalidGeometry(format!("bad rational {text:?}")))?;
        if den == 0 {
            return Err(Error::InvalidGeometry(format!("zero denominator in {text:?}")));
        }
        return Ok(Rational::new(num, den));
    }
    let value: f64 = text
        .parse()
        .map_err(|_| Error::InvalidGeometry(format!("bad number {text:?}")))?;
    rational_from_f64(value)
}

/// A rational number as it appears in configuration files: either a JSON
/// number or a string such as `"1/3"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JsonRational(pub Rational);

impl Serialize for JsonRational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_integer() {
            s.serialize_i64(self.0.to_integer() as i64)
        } else {
            s.serialize_str(&format!("{}/{}", self.0.numer(), self.0.denom()))
        }
    }
}

impl<'de> Deserialize<'de> for JsonRational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Float(f64),
            Text(String),
        }
        let parsed = match Raw::deserialize(d)? {
            Raw::Int(v) => Ok(Rational::from_integer(v as i128)),
            Raw::Float(v) => rational_from_f64(v),
            Raw::Text(t) => parse_rational(&t),
        };
        parsed.map(JsonRational).map_err(serde::de::Error::custom)
    }
}

/// Solves the square system `m · x = rhs` exactly. Returns `None` when the
/// matrix is singular.
#[allow(clippy::needless_range_loop)]
pub fn solve(mut m: Vec<Vec<Rational>>, mut rhs: Vec<Rational>) -> Option<Vec<Rational>> {
    let size = rhs.len();
    for col in 0..size {
        let pivot = (col..size).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        let p = m[col][col];
        for row in 0..size {
            if row == col || m[row][col].is_zero() {
                continue;
            }
            let factor = m[row][col] / p;
            for k in col..size {
                let delta = factor * m[col][k];
                m[row][k] -= delta;
            }
            let delta = factor * rhs[col];
            rhs[row] -= delta;
        }
    }
    Some((0..size).map(|i| rhs[i] / m[i][i]).collect())
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn abs(r: Rational) -> Rational {
    r.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_become_small_rationals() {
        assert_eq!(rational_from_f64(0.5).unwrap(), Rational::new(1, 2));
        assert_eq!(rational_from_f64(0.1).unwrap(), Rational::new(1, 10));
        assert_eq!(rational_from_f64(-1.25).unwrap(), Rational::new(-5, 4));
        assert_eq!(rational_from_f64(3.0).unwrap(), Rational::from_integer(3));
        assert!(rational_from_f64(f64::NAN).is_err());
    }

    #[test]
    fn parses_fractions() {
        assert_eq!(parse_rational("1/3").unwrap(), Rational::new(1, 3));
        assert_eq!(parse_rational(" -2 / 4 ").unwrap(), Rational::new(-1, 2));
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn json_rational_accepts_numbers_and_strings() {
        let v: Vec<JsonRational> = serde_json::from_str(r#"[1, 0.5, "2/3"]"#).unwrap();
        assert_eq!(v[0].0, Rational::from_integer(1));
        assert_eq!(v[1].0, Rational::new(1, 2));
        assert_eq!(v[2].0, Rational::new(2, 3));
    }

    #[test]
    fn solves_and_detects_singular() {
        let r = |v: i128| Rational::from_integer(v);
        let m = vec![vec![r(2), r(1)], vec![r(1), r(3)]];
        let x = solve(m, vec![r(3), r(5)]).unwrap();
        assert_eq!(x, vec![Rational::new(4, 5), Rational::new(7, 5)]);
        let singular = vec![vec![r(1), r(2)], vec![r(2), r(4)]];
        assert!(solve(singular, vec![r(1), r(1)]).is_none());
    }
}
