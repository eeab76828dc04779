//! Exact rational polynomials used for inter-component relations
//! `chi_to = p(sum of chi_from)`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Polynomial with exact rational coefficients, ascending degree.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Polynomial {
    coeffs: Vec<BigRational>,
}

pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Very large numerators/denominators: fall back to a ratio of f64s.
        r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
    })
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let t = s.trim();
    if let Ok(r) = t.parse::<BigRational>() {
        return Ok(r);
    }
    // Accept plain decimal integers like "-3" or decimals like "0.5".
    if let Ok(i) = t.parse::<BigInt>() {
        return Ok(BigRational::from_integer(i));
    }
    if let Some((int, frac)) = t.split_once('.') {
        let neg = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches('-'), frac);
        if let Ok(n) = digits.parse::<BigInt>() {
            let den = num_traits::pow(BigInt::from(10), frac.len());
            let r = BigRational::new(n, den);
            return Ok(if neg { -r } else { r });
        }
    }
    Err(Error::Format(format!("cannot parse rational `{s}`")))
}

pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn from_i64_pairs(pairs: &[(i64, i64)]) -> Self {
        Polynomial::new(pairs.iter().map(|&(n, d)| rat(n, d)).collect())
    }

    pub fn identity() -> Self {
        Polynomial::new(vec![BigRational::zero(), BigRational::one()])
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// Degree of the polynomial; the zero polynomial reports degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, t: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }

    pub fn eval_f64(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * t + rat_to_f64(c);
        }
        acc
    }

    pub fn coeff_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(format_rational).collect()
    }

    pub fn from_strings(items: &[String]) -> Result<Self> {
        items
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>>>()
            .map(Polynomial::new)
    }

    fn mul_linear(&self, root: &BigRational) -> Polynomial {
        // (t - root) * self
        let mut out = vec![BigRational::zero(); self.coeffs.len() + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i + 1] += c;
            out[i] -= c * root;
        }
        Polynomial::new(out)
    }

    fn add_scaled(&mut self, other: &Polynomial, k: &BigRational) {
        if self.coeffs.len() < other.coeffs.len() {
            self.coeffs.resize(other.coeffs.len(), BigRational::zero());
        }
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b * k;
        }
        let trimmed = Polynomial::new(std::mem::take(&mut self.coeffs));
        *self = trimmed;
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (deg, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = c.abs();
            let show_coeff = !(a.is_one() && deg > 0);
            if show_coeff {
                write!(f, "{}", format_rational(&a))?;
            }
            match deg {
                0 => {}
                1 => write!(f, "t")?,
                d => write!(f, "t^{d}")?,
            }
        }
        Ok(())
    }
}

impl Serialize for Polynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.coeff_strings().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let items = Vec::<String>::deserialize(d)?;
        Polynomial::from_strings(&items).map_err(serde::de::Error::custom)
    }
}

/// Minimal-degree interpolating polynomial through `pairs` (Newton form,
/// expanded to monomials). Exact duplicates are ignored; a repeated abscissa
/// with a different value is an error.
pub fn interpolate_relation(pairs: &[(BigRational, BigRational)]) -> Result<Polynomial> {
    let mut xs: Vec<BigRational> = Vec::new();
    let mut ys: Vec<BigRational> = Vec::new();
    for (s, t) in pairs {
        match xs.iter().position(|x| x == s) {
            Some(i) if ys[i] != *t => {
                return Err(Error::InconsistentData(format!(
                    "abscissa {} mapped to both {} and {}",
                    format_rational(s),
                    format_rational(&ys[i]),
                    format_rational(t)
                )));
            }
            Some(_) => {}
            None => {
                xs.push(s.clone());
                ys.push(t.clone());
            }
        }
    }
    if xs.is_empty() {
        return Ok(Polynomial::default());
    }

    // Divided differences in place.
    let n = xs.len();
    let mut dd = ys.clone();
    for level in 1..n {
        for i in (level..n).rev() {
            dd[i] = (&dd[i] - &dd[i - 1]) / (&xs[i] - &xs[i - level]);
        }
    }

    let mut result = Polynomial::default();
    let mut basis = Polynomial::new(vec![BigRational::one()]);
    for (i, c) in dd.iter().enumerate() {
        result.add_scaled(&basis, c);
        basis = basis.mul_linear(&xs[i]);
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_well_relation_is_odd_cubic() {
        let pairs: Vec<_> = [(-2, -1), (1, -1), (2, 1), (-1, 1), (0, 0)]
            .iter()
            .map(|&(s, t)| (rat(s, 1), rat(t, 1)))
            .collect();
        let g = interpolate_relation(&pairs).unwrap();
        assert_eq!(g, Polynomial::from_i64_pairs(&[(0, 1), (-3, 2), (0, 1), (1, 2)]));
        assert_eq!(g.to_string(), "1/2t^3 - 3/2t");
    }

    #[test]
    fn identity_from_three_points() {
        let pairs: Vec<_> = [(-1, -1), (0, 0), (1, 1)]
            .iter()
            .map(|&(s, t)| (rat(s, 1), rat(t, 1)))
            .collect();
        assert_eq!(interpolate_relation(&pairs).unwrap(), Polynomial::identity());
    }

    #[test]
    fn conflicting_abscissa_is_rejected() {
        let pairs = vec![(rat(1, 1), rat(2, 1)), (rat(1, 1), rat(3, 1))];
        assert!(matches!(
            interpolate_relation(&pairs),
            Err(Error::InconsistentData(_))
        ));
        // exact duplicates are fine
        let pairs = vec![(rat(1, 1), rat(2, 1)), (rat(1, 1), rat(2, 1))];
        assert_eq!(interpolate_relation(&pairs).unwrap().degree(), 0);
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("-7/12").unwrap(), rat(-7, 12));
        assert_eq!(parse_rational("3").unwrap(), rat(3, 1));
        assert_eq!(parse_rational("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("-0.5").unwrap(), rat(-1, 2));
        assert!(parse_rational("abc").is_err());
        assert_eq!(format_rational(&rat(6, 4)), "3/2");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn interpolation_reproduces_every_pair(
                raw in proptest::collection::btree_map(-20i64..20, -50i64..50, 1..8)
            ) {
                let pairs: Vec<_> = raw.iter().map(|(&s, &t)| (rat(s, 3), rat(t, 7))).collect();
                let p = interpolate_relation(&pairs).unwrap();
                prop_assert!(p.degree() < pairs.len().max(1));
                for (s, t) in &pairs {
                    prop_assert_eq!(&p.eval(s), t);
                }
            }
        }
    }
}
