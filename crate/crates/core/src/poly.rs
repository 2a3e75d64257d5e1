//! Sparse multivariate polynomials over an exact coefficient ring.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::rational::{fmt_rat, Rat};
use crate::surd::Surd;

/// Exact coefficient ring used by [`Poly`] and the exponential polynomials.
pub trait Coeff:
    Clone
    + PartialEq
    + Debug
    + Zero
    + One
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    fn from_rat(r: Rat) -> Self;
    fn to_f64(&self) -> f64;
    fn render(&self) -> String;
    /// Multiplicative inverse when it exists in the ring.
    fn inv(&self) -> Option<Self>;
}

impl Coeff for Rat {
    fn from_rat(r: Rat) -> Self {
        r
    }
    fn to_f64(&self) -> f64 {
        crate::rational::to_f64(self)
    }
    fn render(&self) -> String {
        fmt_rat(self)
    }
    fn inv(&self) -> Option<Self> {
        (!self.is_zero()).then(|| self.recip())
    }
}

impl Coeff for Surd {
    fn from_rat(r: Rat) -> Self {
        Surd::from_rat(r)
    }
    fn to_f64(&self) -> f64 {
        Surd::to_f64(self)
    }
    fn render(&self) -> String {
        self.to_string()
    }
    fn inv(&self) -> Option<Self> {
        self.inverse()
    }
}

pub type Monomial = Vec<u32>;

/// Polynomial in `nvars` variables; zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<C> {
    nvars: usize,
    terms: BTreeMap<Monomial, C>,
}

impl<C: Coeff> Poly<C> {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: C) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, C::one())
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable index out of range");
        let mut m = vec![0; nvars];
        m[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(m, C::one());
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, C)>) -> Self {
        let mut p = Self::zero(nvars);
        for (m, c) in terms {
            assert_eq!(m.len(), nvars, "monomial length");
            p.add_term(m, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, m: &[u32]) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }

    /// The constant coefficient if the polynomial has no other terms.
    pub fn as_constant(&self) -> Option<C> {
        match self.terms.len() {
            0 => Some(C::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.iter().all(|&e| e == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn add_term(&mut self, m: Monomial, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&m) {
            Some(old) => {
                let s = old + c;
                if !s.is_zero() {
                    self.terms.insert(m, s);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = Self::zero(self.nvars);
        for (m, a) in &self.terms {
            out.add_term(m.clone(), a.clone() * c.clone());
        }
        out
    }

    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            if m[i] == 0 {
                continue;
            }
            let mut m2 = m.clone();
            m2[i] -= 1;
            let k = C::from_rat(Rat::from_integer(m[i].into()));
            out.add_term(m2, c.clone() * k);
        }
        out
    }

    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|m| m[i]).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.iter().sum()).max().unwrap_or(0)
    }

    pub fn uses_var(&self, i: usize) -> bool {
        self.terms.keys().any(|m| m[i] > 0)
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                m.iter()
                    .zip(x)
                    .fold(c.to_f64(), |acc, (&e, &xi)| acc * xi.powi(e as i32))
            })
            .sum()
    }

    /// Exact evaluation at a point of the coefficient ring.
    pub fn eval(&self, x: &[C]) -> C {
        let mut acc = C::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (&e, xi) in m.iter().zip(x) {
                for _ in 0..e {
                    t = t * xi.clone();
                }
            }
            acc = acc + t;
        }
        acc
    }

    /// Coefficients with respect to variable `i`: `self = Σ_k out[k] · x_i^k`.
    pub fn split_by(&self, i: usize) -> Vec<Self> {
        let deg = self.degree_in(i) as usize;
        let mut out = vec![Self::zero(self.nvars); deg + 1];
        for (m, c) in &self.terms {
            let mut m2 = m.clone();
            let k = m2[i] as usize;
            m2[i] = 0;
            out[k].add_term(m2, c.clone());
        }
        out
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Poly<D> {
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    /// Renders with the given variable names, e.g. `2*p1^2 - phi`.
    pub fn render(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut s = String::new();
        // Highest monomials first reads more naturally.
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let mono: Vec<String> = m
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| {
                    if e == 1 {
                        names[i].clone()
                    } else {
                        format!("{}^{}", names[i], e)
                    }
                })
                .collect();
            let mono = mono.join("*");
            let cr = c.render();
            let compound = cr.trim_start_matches('-').contains(' ');
            let (neg, mag) = if !compound && cr.starts_with('-') {
                (true, cr[1..].to_string())
            } else {
                (false, cr)
            };
            let mag = if compound { format!("({mag})") } else { mag };
            let body = if mono.is_empty() {
                mag
            } else if mag == "1" {
                mono
            } else {
                format!("{mag}*{mono}")
            };
            match (k, neg) {
                (0, true) => s.push_str(&format!("-{body}")),
                (0, false) => s.push_str(&body),
                (_, true) => s.push_str(&format!(" - {body}")),
                (_, false) => s.push_str(&format!(" + {body}")),
            }
        }
        s
    }
}

impl<C: Coeff> Add for &Poly<C> {
    type Output = Poly<C>;
    fn add(self, rhs: &Poly<C>) -> Poly<C> {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl<C: Coeff> Sub for &Poly<C> {
    type Output = Poly<C>;
    fn sub(self, rhs: &Poly<C>) -> Poly<C> {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl<C: Coeff> Neg for &Poly<C> {
    type Output = Poly<C>;
    fn neg(self) -> Poly<C> {
        self.scale(&-C::one())
    }
}

impl<C: Coeff> Mul for &Poly<C> {
    type Output = Poly<C>;
    fn mul(self, rhs: &Poly<C>) -> Poly<C> {
        let mut out = Poly::zero(self.nvars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                let m: Monomial = m1.iter().zip(m2).map(|(a, b)| a + b).collect();
                out.add_term(m, c1.clone() * c2.clone());
            }
        }
        out
    }
}
