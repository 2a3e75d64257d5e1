//! Exponential polynomials `Σ_b P_b(p, φ, q, u) e^{b·q}` on phase space.
//!
//! Exponent vectors `b` live in `ℚ^{r+1}` (the last slot pairs with `u`).
//! Coefficient polynomials use the variable layout
//! `p_1..p_r, φ, q_1..q_r, u`, so variable `i ≤ r` is the momentum conjugate
//! to variable `r + 1 + i`.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_geometry::{add as vadd, scale as vscale, sub as vsub, QVec};
use crate::poly::{Coeff, Monomial, Poly};
use crate::rational::{fmt_rat, half, to_f64, Rat};
use crate::weight_config::Configuration;

const EXP_CLAMP: f64 = 700.0;

#[derive(Clone, Debug, PartialEq)]
pub struct ExpPoly<C> {
    r: usize,
    terms: BTreeMap<QVec, Poly<C>>,
}

/// Index of momentum `p_i` (`i = r` is `φ`).
pub fn p_var(_r: usize, i: usize) -> usize {
    i
}

/// Index of position `q_i` (`i = r` is `u`).
pub fn q_var(r: usize, i: usize) -> usize {
    r + 1 + i
}

pub fn var_names(r: usize) -> Vec<String> {
    let mut names: Vec<String> = (1..=r).map(|i| format!("p{i}")).collect();
    names.push("phi".into());
    names.extend((1..=r).map(|i| format!("q{i}")));
    names.push("u".into());
    names
}

impl<C: Coeff> ExpPoly<C> {
    pub fn zero(r: usize) -> Self {
        ExpPoly {
            r,
            terms: BTreeMap::new(),
        }
    }

    pub fn nvars(&self) -> usize {
        2 * (self.r + 1)
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// `c · e^{b·q}`.
    pub fn exp_term(r: usize, b: QVec, c: C) -> Self {
        let mut f = Self::zero(r);
        f.add_term(b, Poly::constant(2 * (r + 1), c));
        f
    }

    /// `P · e^{0}` for a polynomial `P`.
    pub fn poly(r: usize, p: Poly<C>) -> Self {
        let mut f = Self::zero(r);
        f.add_term(vec![Rat::zero(); r + 1], p);
        f
    }

    pub fn constant(r: usize, c: C) -> Self {
        Self::exp_term(r, vec![Rat::zero(); r + 1], c)
    }

    /// The bare phase-space variable with index `i`.
    pub fn var(r: usize, i: usize) -> Self {
        Self::poly(r, Poly::var(2 * (r + 1), i))
    }

    pub fn add_term(&mut self, b: QVec, p: Poly<C>) {
        assert_eq!(b.len(), self.r + 1, "exponent length");
        if p.is_zero() {
            return;
        }
        let merged = match self.terms.remove(&b) {
            Some(old) => &old + &p,
            None => p,
        };
        if !merged.is_zero() {
            self.terms.insert(b, merged);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&QVec, &Poly<C>)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, b: &[Rat]) -> Option<&Poly<C>> {
        self.terms.get(b)
    }

    pub fn exponents(&self) -> Vec<QVec> {
        self.terms.keys().cloned().collect()
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = Self::zero(self.r);
        for (b, p) in &self.terms {
            out.add_term(b.clone(), p.scale(c));
        }
        out
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> ExpPoly<D> {
        let mut out = ExpPoly::zero(self.r);
        for (b, p) in &self.terms {
            out.add_term(b.clone(), p.map_coeffs(&f));
        }
        out
    }

    /// `∂/∂q_i` for `i ≤ r` (`i = r` is `∂/∂u`).
    pub fn d_q(&self, i: usize) -> Self {
        let mut out = Self::zero(self.r);
        let qi = q_var(self.r, i);
        for (b, p) in &self.terms {
            let mut t = p.scale(&C::from_rat(b[i].clone()));
            t = &t + &p.derivative(qi);
            out.add_term(b.clone(), t);
        }
        out
    }

    /// `∂/∂p_i` for `i ≤ r` (`i = r` is `∂/∂φ`).
    pub fn d_p(&self, i: usize) -> Self {
        let mut out = Self::zero(self.r);
        let pi = p_var(self.r, i);
        for (b, p) in &self.terms {
            out.add_term(b.clone(), p.derivative(pi));
        }
        out
    }

    pub fn gradient_q(&self) -> Vec<Self> {
        (0..=self.r).map(|i| self.d_q(i)).collect()
    }

    pub fn gradient_p(&self) -> Vec<Self> {
        (0..=self.r).map(|i| self.d_p(i)).collect()
    }

    /// `{f, g} = Σ_i ∂f/∂q_i ∂g/∂p_i − ∂f/∂p_i ∂g/∂q_i` over all `r+1` pairs.
    pub fn poisson(&self, g: &Self) -> Self {
        let mut out = Self::zero(self.r);
        for i in 0..=self.r {
            let a = &self.d_q(i) * &g.d_p(i);
            let b = &self.d_p(i) * &g.d_q(i);
            out = &out + &(&a - &b);
        }
        out
    }

    /// Whether any coefficient polynomial involves phase-space variable `i`.
    pub fn uses_var(&self, i: usize) -> bool {
        self.terms.values().any(|p| p.uses_var(i))
    }

    /// Double-precision value at momenta `p` (length r+1) and positions `q` (length r+1).
    pub fn eval_f64(&self, p: &[f64], q: &[f64]) -> f64 {
        let mut x = p.to_vec();
        x.extend_from_slice(q);
        self.terms
            .iter()
            .map(|(b, poly)| {
                let e: f64 = b.iter().zip(q).map(|(bi, qi)| to_f64(bi) * qi).sum();
                poly.eval_f64(&x) * e.clamp(-EXP_CLAMP, EXP_CLAMP).exp()
            })
            .sum()
    }

    /// Substitutes `p_i := subs[i]` for every momentum variable.
    ///
    /// The substitutes must not themselves contain momenta.
    pub fn substitute_momenta(&self, subs: &[Self]) -> Self {
        let r = self.r;
        assert_eq!(subs.len(), r + 1);
        let nv = self.nvars();
        let mut out = Self::zero(r);
        let mut powers: Vec<Vec<Self>> = subs
            .iter()
            .map(|s| vec![Self::constant(r, C::one()), s.clone()])
            .collect();
        for (b, poly) in &self.terms {
            for (m, c) in poly.terms() {
                let mut term = Self::zero(r);
                let mut rest: Monomial = m.clone();
                for v in rest.iter_mut().take(r + 1) {
                    *v = 0;
                }
                term.add_term(b.clone(), Poly::from_terms(nv, [(rest, c.clone())]));
                for i in 0..=r {
                    let e = m[p_var(r, i)] as usize;
                    while powers[i].len() <= e {
                        let next = &powers[i][powers[i].len() - 1] * &subs[i];
                        powers[i].push(next);
                    }
                    if e > 0 {
                        term = &term * &powers[i][e];
                    }
                }
                out = &out + &term;
            }
        }
        out
    }

    /// Exact quotient `Φ` with `self = Φ · candidate`, if one exists.
    ///
    /// Terms are ordered by (exponent, monomial) lexicographically and the lowest
    /// term of `candidate` is the pivot; quotient terms outside the Newton box
    /// of `self` relative to `candidate` prove non-divisibility.
    pub fn divides_into(&self, candidate: &Self) -> Option<Self> {
        assert!(!candidate.is_zero(), "division by zero");
        let r = self.r;
        let nv = self.nvars();
        if self.is_zero() {
            return Some(Self::zero(r));
        }
        let (cb, cm, cc) = candidate.lowest_term();
        let cinv = cc.inv()?;
        let (pmin, pmax) = self.exponent_box();
        let (cmin, cmax) = candidate.exponent_box();
        let qmin = vsub(&pmin, &cmin);
        let qmax = vsub(&pmax, &cmax);
        let pdeg = self.degree_box();
        let cdeg = candidate.degree_box();
        let mut rem = self.clone();
        let mut quot = Self::zero(r);
        while !rem.is_zero() {
            let (rb, rm, rc) = rem.lowest_term();
            let qb = vsub(&rb, &cb);
            if qb
                .iter()
                .zip(qmin.iter().zip(&qmax))
                .any(|(x, (lo, hi))| x < lo || x > hi)
            {
                return None;
            }
            let mut qm = Vec::with_capacity(nv);
            for j in 0..nv {
                if rm[j] < cm[j] || rm[j] - cm[j] + cdeg[j] > pdeg[j] {
                    return None;
                }
                qm.push(rm[j] - cm[j]);
            }
            let qc = rc * cinv.clone();
            let t = Self::single(r, qb, qm, qc);
            rem = &rem - &(&t * candidate);
            quot = &quot + &t;
        }
        Some(quot)
    }

    fn single(r: usize, b: QVec, m: Monomial, c: C) -> Self {
        let mut out = Self::zero(r);
        out.add_term(b, Poly::from_terms(2 * (r + 1), [(m, c)]));
        out
    }

    fn lowest_term(&self) -> (QVec, Monomial, C) {
        let (b, p) = self.terms.iter().next().expect("nonzero");
        let (m, c) = p.terms().next().expect("nonzero poly");
        (b.clone(), m.clone(), c.clone())
    }

    fn exponent_box(&self) -> (QVec, QVec) {
        let mut it = self.terms.keys();
        let first = it.next().expect("nonzero").clone();
        let (mut lo, mut hi) = (first.clone(), first);
        for b in it {
            for k in 0..b.len() {
                if b[k] < lo[k] {
                    lo[k] = b[k].clone();
                }
                if b[k] > hi[k] {
                    hi[k] = b[k].clone();
                }
            }
        }
        (lo, hi)
    }

    fn degree_box(&self) -> Vec<u32> {
        let nv = self.nvars();
        (0..nv)
            .map(|j| {
                self.terms
                    .values()
                    .map(|p| p.degree_in(j))
                    .max()
                    .unwrap_or(0)
            })
            .collect()
    }

    /// Renders as `(poly)*exp(dot) + …`; the zero function renders as `0`.
    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let names = var_names(self.r);
        self.terms
            .iter()
            .map(|(b, p)| {
                format!(
                    "({})*exp({})",
                    p.render(&names),
                    render_dot(b, &names[self.r + 1..])
                )
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

fn render_dot(b: &[Rat], qnames: &[String]) -> String {
    let mut s = String::new();
    for (bi, name) in b.iter().zip(qnames) {
        if bi.is_zero() {
            continue;
        }
        let neg = *bi < Rat::zero();
        let mag = if neg { -bi.clone() } else { bi.clone() };
        let body = if mag.is_one() {
            name.clone()
        } else {
            format!("{}*{}", fmt_rat(&mag), name)
        };
        if s.is_empty() {
            s = if neg { format!("-{body}") } else { body };
        } else {
            s.push_str(if neg { " - " } else { " + " });
            s.push_str(&body);
        }
    }
    if s.is_empty() {
        "0".into()
    } else {
        s
    }
}

impl<C: Coeff> Add for &ExpPoly<C> {
    type Output = ExpPoly<C>;
    fn add(self, rhs: &ExpPoly<C>) -> ExpPoly<C> {
        let mut out = self.clone();
        for (b, p) in &rhs.terms {
            out.add_term(b.clone(), p.clone());
        }
        out
    }
}

impl<C: Coeff> Sub for &ExpPoly<C> {
    type Output = ExpPoly<C>;
    fn sub(self, rhs: &ExpPoly<C>) -> ExpPoly<C> {
        let mut out = self.clone();
        for (b, p) in &rhs.terms {
            out.add_term(b.clone(), -p);
        }
        out
    }
}

impl<C: Coeff> Neg for &ExpPoly<C> {
    type Output = ExpPoly<C>;
    fn neg(self) -> ExpPoly<C> {
        self.scale(&-C::one())
    }
}

impl<C: Coeff> Mul for &ExpPoly<C> {
    type Output = ExpPoly<C>;
    fn mul(self, rhs: &ExpPoly<C>) -> ExpPoly<C> {
        let mut out = ExpPoly::zero(self.r);
        for (b1, p1) in &self.terms {
            for (b2, p2) in &rhs.terms {
                out.add_term(vadd(b1, b2), p1 * p2);
            }
        }
        out
    }
}

/// JSON form with exact rational coefficients:
/// `{"r": 1, "terms": [{"b": ["-3", "1"], "coeffs": [{"mono": [2, 0, 0, 0], "c": "-1/4"}]}]}`.
/// Monomial exponents follow the variable layout `p_1..p_r, φ, q_1..q_r, u`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpPolyJson {
    pub r: usize,
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    #[serde(with = "crate::rational::serde_rat_vec")]
    pub b: QVec,
    pub coeffs: Vec<MonomialJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonomialJson {
    pub mono: Vec<u32>,
    #[serde(with = "crate::rational::serde_rat")]
    pub c: Rat,
}

impl ExpPoly<Rat> {
    pub fn to_json(&self) -> ExpPolyJson {
        ExpPolyJson {
            r: self.r,
            terms: self
                .terms
                .iter()
                .map(|(b, p)| TermJson {
                    b: b.clone(),
                    coeffs: p
                        .terms()
                        .map(|(m, c)| MonomialJson {
                            mono: m.clone(),
                            c: c.clone(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn from_json(j: &ExpPolyJson) -> Result<Self> {
        let nv = 2 * (j.r + 1);
        let mut out = Self::zero(j.r);
        for t in &j.terms {
            if t.b.len() != j.r + 1 {
                return Err(Error::Dimension {
                    expected: j.r + 1,
                    got: t.b.len(),
                });
            }
            for m in &t.coeffs {
                if m.mono.len() != nv {
                    return Err(Error::Dimension {
                        expected: nv,
                        got: m.mono.len(),
                    });
                }
                out.add_term(
                    t.b.clone(),
                    Poly::from_terms(nv, [(m.mono.clone(), m.c.clone())]),
                );
            }
        }
        Ok(out)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let j: ExpPolyJson = serde_json::from_str(s).map_err(|e| Error::Schema(e.to_string()))?;
        Self::from_json(&j)
    }
}

/// `J(p, p)` as a quadratic polynomial in the momenta.
pub fn j_poly<C: Coeff>(cfg: &Configuration) -> Poly<C> {
    let r = cfg.r();
    let nv = 2 * (r + 1);
    let j = cfg.jform();
    let m = j.matrix();
    let mut out = Poly::zero(nv);
    for a in 0..=r {
        for b in 0..=r {
            if m[a][b].is_zero() {
                continue;
            }
            let mut mono = vec![0u32; nv];
            mono[p_var(r, a)] += 1;
            mono[p_var(r, b)] += 1;
            out.add_term(mono, C::from_rat(m[a][b].clone()));
        }
    }
    out
}

/// `H = e^{−½d·q} J(p) − e^{½d·q}(E − λ(n+1−u) + Σ A_w e^{w·q})`.
pub fn hamiltonian(cfg: &Configuration) -> ExpPoly<Rat> {
    let r = cfg.r();
    let nv = 2 * (r + 1);
    let d = cfg.d_ext();
    let hd = vscale(&d, &half());
    let mut h = ExpPoly::zero(r);
    h.add_term(vscale(&hd, &-Rat::one()), j_poly(cfg));
    let n1 = Rat::from_integer((cfg.n() + 1).into());
    let mut pot = Poly::constant(nv, -(cfg.e.clone() - &cfg.lambda * n1));
    pot.add_term(
        {
            let mut m = vec![0; nv];
            m[q_var(r, r)] = 1;
            m
        },
        -cfg.lambda.clone(),
    );
    h.add_term(hd.clone(), pot);
    for (w, a) in &cfg.weights {
        h.add_term(vadd(&hd, &w.extended()), Poly::constant(nv, -a.clone()));
    }
    h
}
