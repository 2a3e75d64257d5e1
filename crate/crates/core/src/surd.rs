//! Square-root extensions of the rationals.
//!
//! [`Surd`] is a finite sum `Σ c_k √m_k` with rational `c_k` and pairwise
//! inequivalent radicands `m_k` (no ratio `m_i / m_j` is a rational square).
//! Square roots of pairwise inequivalent rationals are linearly independent
//! over ℚ, so a `Surd` is zero exactly when its term list is empty and
//! equality is decidable without floating point.
//!
//! [`RadicalScalar`] is the single-term special case `sign · √radicand` used
//! for superpotential coefficients.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{fmt_rat, sqrt_exact, to_f64, Rat};

const TRIAL_LIMIT: u32 = 1000;

/// Splits a positive integer `n` as `k² · m`, removing every square factor
/// built from primes below the trial limit and a trailing perfect square.
fn split_square(n: &BigInt) -> (BigInt, BigInt) {
    debug_assert!(n.is_positive());
    let mut m = n.clone();
    let mut k = BigInt::one();
    let mut p: u32 = 2;
    while p <= TRIAL_LIMIT {
        let pb = BigInt::from(p);
        let p2 = &pb * &pb;
        if p2 > m {
            break;
        }
        while m.is_multiple_of(&p2) {
            m /= &p2;
            k *= &pb;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    let s = m.sqrt();
    if &s * &s == m {
        k *= s;
        m = BigInt::one();
    }
    (k, m)
}

fn is_square_int(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let s = n.sqrt();
    (&s * &s == *n).then_some(s)
}

/// Exact element of the multiquadratic extension generated by square roots of rationals.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Surd {
    /// `(m, c)` meaning `c·√m`; `m` a positive integer, sorted ascending, `c ≠ 0`.
    terms: Vec<(BigInt, Rat)>,
}

impl Surd {
    pub fn from_rat(r: Rat) -> Self {
        let mut s = Surd::default();
        s.push(BigInt::one(), r);
        s
    }

    /// `c · √r` for rational `r ≥ 0`.
    pub fn scaled_sqrt(c: Rat, r: &Rat) -> Option<Self> {
        if r.is_negative() {
            return None;
        }
        if r.is_zero() || c.is_zero() {
            return Some(Surd::default());
        }
        // √(p/q) = √(pq)/q
        let n = r.numer() * r.denom();
        let (k, m) = split_square(&n);
        let coeff = c * Rat::new(k, r.denom().clone());
        let mut s = Surd::default();
        s.push(m, coeff);
        Some(s)
    }

    pub fn sqrt(r: &Rat) -> Option<Self> {
        Self::scaled_sqrt(Rat::one(), r)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BigInt, &Rat)> {
        self.terms.iter().map(|(m, c)| (m, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    fn push(&mut self, m: BigInt, c: Rat) {
        if c.is_zero() {
            return;
        }
        // Exact rep match first, then the equivalence test m·m' = square.
        for (rep, coeff) in self.terms.iter_mut() {
            if *rep == m {
                *coeff += c;
                self.terms.retain(|(_, c)| !c.is_zero());
                return;
            }
        }
        for (rep, coeff) in self.terms.iter_mut() {
            if let Some(root) = is_square_int(&(&*rep * &m)) {
                // √m = √(rep·m)/rep · √rep
                *coeff += c * Rat::new(root, rep.clone());
                self.terms.retain(|(_, c)| !c.is_zero());
                return;
            }
        }
        let pos = self.terms.partition_point(|(rep, _)| *rep < m);
        self.terms.insert(pos, (m, c));
    }

    pub fn is_rational(&self) -> bool {
        self.terms.iter().all(|(m, _)| m.is_one())
    }

    pub fn as_rational(&self) -> Option<Rat> {
        match self.terms.as_slice() {
            [] => Some(Rat::zero()),
            [(m, c)] if m.is_one() => Some(c.clone()),
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| to_f64(c) * m.to_f64().unwrap_or(f64::INFINITY).sqrt())
            .sum()
    }

    /// Single-term surds are radical scalars.
    pub fn as_radical(&self) -> Option<RadicalScalar> {
        match self.terms.as_slice() {
            [] => Some(RadicalScalar::zero()),
            [(m, c)] => {
                let radicand = c * c * Rat::from_integer(m.clone());
                let sign = if c.is_positive() { 1 } else { -1 };
                Some(RadicalScalar { sign, radicand })
            }
            _ => None,
        }
    }

    /// Multiplicative inverse inside a quadratic field `ℚ(√m)`; `None` for
    /// zero or for elements needing two independent radicals.
    pub fn inverse(&self) -> Option<Surd> {
        match self.terms.as_slice() {
            [] => None,
            [(m, c)] => {
                // 1/(c√m) = √m / (c m)
                let mut s = Surd::default();
                s.push(m.clone(), (c * Rat::from_integer(m.clone())).recip());
                Some(s)
            }
            [(one, a), (m, b)] if one.is_one() => {
                let norm = a * a - b * b * Rat::from_integer(m.clone());
                if norm.is_zero() {
                    return None;
                }
                let mut s = Surd::default();
                s.push(BigInt::one(), a / &norm);
                s.push(m.clone(), -(b / &norm));
                Some(s)
            }
            _ => None,
        }
    }

    pub fn checked_div(&self, other: &Surd) -> Option<Surd> {
        Some(self.clone() * other.inverse()?)
    }

    pub fn scale(&self, r: &Rat) -> Surd {
        if r.is_zero() {
            return Surd::default();
        }
        Surd {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * r)).collect(),
        }
    }
}

impl Zero for Surd {
    fn zero() -> Self {
        Surd::default()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for Surd {
    fn one() -> Self {
        Surd::from_rat(Rat::one())
    }
}

impl Add for Surd {
    type Output = Surd;
    fn add(mut self, rhs: Surd) -> Surd {
        for (m, c) in rhs.terms {
            self.push(m, c);
        }
        self
    }
}

impl Neg for Surd {
    type Output = Surd;
    fn neg(self) -> Surd {
        Surd {
            terms: self.terms.into_iter().map(|(m, c)| (m, -c)).collect(),
        }
    }
}

impl Sub for Surd {
    type Output = Surd;
    fn sub(self, rhs: Surd) -> Surd {
        self + (-rhs)
    }
}

impl Mul for Surd {
    type Output = Surd;
    fn mul(self, rhs: Surd) -> Surd {
        let mut out = Surd::default();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                let prod = m1 * m2;
                let (k, m) = if m1.is_one() || m2.is_one() {
                    (BigInt::one(), prod)
                } else {
                    split_square(&prod)
                };
                out.push(m, c1 * c2 * Rat::from_integer(k));
            }
        }
        out
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            if m.is_one() {
                write!(f, "{}", fmt_rat(&mag))?;
            } else if mag.is_one() {
                write!(f, "sqrt({m})")?;
            } else {
                write!(f, "{}*sqrt({m})", fmt_rat(&mag))?;
            }
        }
        Ok(())
    }
}

/// `sign · √radicand`, with `sign = 0` exactly when `radicand = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RadicalScalar {
    pub sign: i8,
    #[serde(with = "crate::rational::serde_rat")]
    pub radicand: Rat,
}

impl RadicalScalar {
    pub fn new(sign: i8, radicand: Rat) -> crate::error::Result<Self> {
        use crate::error::Error;
        if radicand.is_negative() {
            return Err(Error::Schema("negative radicand".into()));
        }
        if !matches!(sign, -1..=1) {
            return Err(Error::Schema(format!("sign {sign} not in {{-1,0,1}}")));
        }
        if (sign == 0) != radicand.is_zero() {
            return Err(Error::Schema(
                "sign must be 0 exactly when radicand is 0".into(),
            ));
        }
        Ok(RadicalScalar { sign, radicand })
    }

    pub fn zero() -> Self {
        RadicalScalar {
            sign: 0,
            radicand: Rat::zero(),
        }
    }

    pub fn from_rat(r: &Rat) -> Self {
        let sign = if r.is_zero() {
            0
        } else if r.is_positive() {
            1
        } else {
            -1
        };
        RadicalScalar {
            sign,
            radicand: r * r,
        }
    }

    /// `±√r` for `r ≥ 0`.
    pub fn sqrt(sign: i8, r: Rat) -> Self {
        if r.is_zero() {
            Self::zero()
        } else {
            RadicalScalar {
                sign: sign.signum(),
                radicand: r,
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    /// The exact rational value when the radicand is a rational square.
    pub fn as_rational(&self) -> Option<Rat> {
        sqrt_exact(&self.radicand).map(|s| if self.sign < 0 { -s } else { s })
    }

    pub fn to_surd(&self) -> Surd {
        match self.sign {
            0 => Surd::zero(),
            s => Surd::scaled_sqrt(Rat::from_integer(BigInt::from(s)), &self.radicand)
                .expect("radicand is nonnegative"),
        }
    }

    pub fn to_f64(&self) -> f64 {
        f64::from(self.sign) * to_f64(&self.radicand).sqrt()
    }

    pub fn neg(&self) -> Self {
        RadicalScalar {
            sign: -self.sign,
            radicand: self.radicand.clone(),
        }
    }
}

impl Mul for &RadicalScalar {
    type Output = RadicalScalar;
    fn mul(self, rhs: &RadicalScalar) -> RadicalScalar {
        RadicalScalar {
            sign: self.sign * rhs.sign,
            radicand: &self.radicand * &rhs.radicand,
        }
    }
}

impl fmt::Display for RadicalScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(r) = self.as_rational() {
            return write!(f, "{}", fmt_rat(&r));
        }
        let s = if self.sign < 0 { "-" } else { "" };
        write!(f, "{s}sqrt({})", fmt_rat(&self.radicand))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn sqrt_normalises_squares() {
        let s = Surd::sqrt(&rat(8, 9)).unwrap();
        // √(8/9) = (2/3)√2
        assert_eq!(s.terms().count(), 1);
        let (m, c) = s.terms().next().unwrap();
        assert_eq!(*m, BigInt::from(2));
        assert_eq!(*c, rat(2, 3));
        assert_eq!(
            Surd::sqrt(&rat(9, 4)).unwrap().as_rational(),
            Some(rat(3, 2))
        );
    }

    #[test]
    fn products_of_conjugate_radicals_are_rational() {
        let a = Surd::sqrt(&rat(3, 2)).unwrap();
        let b = Surd::sqrt(&rat(2, 3)).unwrap();
        assert_eq!((a * b).as_rational(), Some(int(1)));
    }

    #[test]
    fn independent_radicals_do_not_cancel() {
        let a = Surd::sqrt(&int(2)).unwrap();
        let b = Surd::sqrt(&int(3)).unwrap();
        assert!(!(a.clone() - b).is_zero());
        assert!((a.clone() - a).is_zero());
    }

    #[test]
    fn quadratic_field_inverse() {
        // (1 + √5)^{-1} · (1 + √5) = 1
        let x = Surd::from_rat(int(1)) + Surd::sqrt(&int(5)).unwrap();
        let inv = x.inverse().unwrap();
        assert_eq!((x * inv).as_rational(), Some(int(1)));
    }

    #[test]
    fn radical_scalar_round_trip() {
        let r = RadicalScalar::sqrt(-1, rat(9, 2));
        let s = r.to_surd();
        assert_eq!(s.as_radical().unwrap(), r);
        assert!((r.to_f64() + (4.5f64).sqrt()).abs() < 1e-15);
        assert_eq!((&r * &r).as_rational(), Some(rat(9, 2)));
    }

    #[test]
    fn radical_scalar_invariants() {
        assert!(RadicalScalar::new(0, int(1)).is_err());
        assert!(RadicalScalar::new(1, int(-1)).is_err());
        assert!(RadicalScalar::new(1, int(2)).is_ok());
    }
}
