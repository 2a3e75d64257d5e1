//! Superpotentials `f = Σ_c f_c e^{c·q}`: the exact condition, a coefficient
//! solver and a bounded search over exponent lattices.

mod search;
mod solve;

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_geometry::{add as vadd, hull_vertices, scale as vscale, sub as vsub, QVec};
use crate::exp_poly::{hamiltonian, q_var, ExpPoly};
use crate::poly::Poly;
use crate::rational::{fmt_rat, half, int, Rat};
use crate::surd::{RadicalScalar, Surd};
use crate::weight_config::Configuration;

pub use search::{search, SearchOptions, SearchResult};
pub use solve::{solve_coefficients, NoSolution};

/// A coefficient `f_c`: a constant, or `u·a + b` for polynomial ansätze.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficient {
    Affine {
        u: RadicalScalar,
        constant: RadicalScalar,
    },
    Constant(RadicalScalar),
}

impl Coefficient {
    pub fn is_zero(&self) -> bool {
        match self {
            Coefficient::Constant(c) => c.is_zero(),
            Coefficient::Affine { u, constant } => u.is_zero() && constant.is_zero(),
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Coefficient::Constant(_) => true,
            Coefficient::Affine { u, .. } => u.is_zero(),
        }
    }

    /// Sign of the leading (highest `u`-degree) part.
    fn leading_sign(&self) -> i8 {
        match self {
            Coefficient::Constant(c) => c.sign,
            Coefficient::Affine { u, constant } => {
                if u.is_zero() {
                    constant.sign
                } else {
                    u.sign
                }
            }
        }
    }

    pub fn neg(&self) -> Self {
        match self {
            Coefficient::Constant(c) => Coefficient::Constant(c.neg()),
            Coefficient::Affine { u, constant } => Coefficient::Affine {
                u: u.neg(),
                constant: constant.neg(),
            },
        }
    }

    /// The coefficient as a polynomial in the phase-space variable layout of rank `r`.
    pub fn to_poly(&self, r: usize) -> Poly<Surd> {
        let nv = 2 * (r + 1);
        match self {
            Coefficient::Constant(c) => Poly::constant(nv, c.to_surd()),
            Coefficient::Affine { u, constant } => {
                let mut p = Poly::constant(nv, constant.to_surd());
                p = &p + &Poly::var(nv, q_var(r, r)).scale(&u.to_surd());
                p
            }
        }
    }

    pub fn render(&self) -> String {
        match self {
            Coefficient::Constant(c) => c.to_string(),
            Coefficient::Affine { u, constant } => format!("({u})*u + ({constant})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzEntry {
    #[serde(with = "crate::rational::serde_rat_vec")]
    pub c: QVec,
    pub f: Coefficient,
}

/// `f = Σ_{c∈C} f_c e^{c·q}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuperpotentialAnsatz {
    pub entries: Vec<AnsatzEntry>,
    pub steady: bool,
}

impl SuperpotentialAnsatz {
    pub fn new(entries: Vec<(QVec, Coefficient)>, steady: bool) -> Result<Self> {
        let Some(len) = entries.first().map(|(c, _)| c.len()) else {
            return Err(Error::Ansatz("empty exponent set".into()));
        };
        let mut seen = BTreeSet::new();
        for (c, f) in &entries {
            if c.len() != len {
                return Err(Error::Dimension {
                    expected: len,
                    got: c.len(),
                });
            }
            if c.iter().all(|x| x.is_zero()) {
                return Err(Error::Ansatz("the zero vector is not allowed".into()));
            }
            if !seen.insert(c.clone()) {
                return Err(Error::Ansatz("duplicate exponent vector".into()));
            }
            if f.is_zero() {
                return Err(Error::Ansatz("zero coefficient".into()));
            }
            if steady && !f.is_constant() {
                return Err(Error::Ansatz(
                    "steady ansatz with non-constant coefficient".into(),
                ));
            }
        }
        let mut entries: Vec<AnsatzEntry> = entries
            .into_iter()
            .map(|(c, f)| AnsatzEntry { c, f })
            .collect();
        entries.sort_by(|a, b| a.c.cmp(&b.c));
        Ok(SuperpotentialAnsatz { entries, steady })
    }

    /// Parses the JSON form and re-applies the construction checks.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: SuperpotentialAnsatz =
            serde_json::from_str(s).map_err(|e| Error::Schema(e.to_string()))?;
        Self::new(
            raw.entries.into_iter().map(|e| (e.c, e.f)).collect(),
            raw.steady,
        )
    }

    /// Constant-coefficient ansatz from `(c, f_c)` pairs.
    pub fn constant(entries: Vec<(QVec, RadicalScalar)>) -> Result<Self> {
        Self::new(
            entries
                .into_iter()
                .map(|(c, f)| (c, Coefficient::Constant(f)))
                .collect(),
            true,
        )
    }

    pub fn exponents(&self) -> Vec<QVec> {
        self.entries.iter().map(|e| e.c.clone()).collect()
    }

    pub fn coefficient(&self, c: &[Rat]) -> Option<&Coefficient> {
        self.entries
            .iter()
            .find(|e| e.c.as_slice() == c)
            .map(|e| &e.f)
    }

    /// `r` such that exponent vectors have length `r + 1`.
    pub fn r(&self) -> usize {
        self.entries[0].c.len() - 1
    }

    pub fn to_exp_poly(&self) -> ExpPoly<Surd> {
        let r = self.r();
        let mut f = ExpPoly::zero(r);
        for e in &self.entries {
            f.add_term(e.c.clone(), e.f.to_poly(r));
        }
        f
    }

    /// Flips every sign so that the lexicographically smallest exponent has a positive coefficient.
    pub fn gauge_fixed(mut self) -> Self {
        if self.entries[0].f.leading_sign() < 0 {
            for e in &mut self.entries {
                e.f = e.f.neg();
            }
        }
        self
    }

    pub fn negated(&self) -> Self {
        let mut out = self.clone();
        for e in &mut out.entries {
            e.f = e.f.neg();
        }
        out
    }

    /// `f_1 e^(...) + ...` in the exponential-polynomial grammar.
    pub fn render(&self) -> String {
        self.to_exp_poly().render()
    }
}

/// Nonzero residual of the superpotential condition at a sum vector `b`.
#[derive(Clone, Debug, PartialEq)]
pub struct Residual {
    pub b: QVec,
    /// Left side minus right side; a polynomial in `u` only.
    pub value: Poly<Surd>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionReport {
    pub residuals: Vec<Residual>,
    pub satisfied: bool,
    pub violated_b: Vec<QVec>,
}

#[derive(Serialize)]
struct ResidualJson {
    b: Vec<String>,
    residual: String,
}

#[derive(Serialize)]
pub struct ConditionReportJson {
    satisfied: bool,
    violated_b: Vec<Vec<String>>,
    residuals: Vec<ResidualJson>,
}

impl ConditionReport {
    pub fn to_json(&self, r: usize) -> ConditionReportJson {
        let names = crate::exp_poly::var_names(r);
        ConditionReportJson {
            satisfied: self.satisfied,
            violated_b: self
                .violated_b
                .iter()
                .map(|b| b.iter().map(fmt_rat).collect())
                .collect(),
            residuals: self
                .residuals
                .iter()
                .map(|res| ResidualJson {
                    b: res.b.iter().map(fmt_rat).collect(),
                    residual: res.value.render(&names),
                })
                .collect(),
        }
    }
}

/// `J(∇f, ∇f)` for an exponential polynomial in the positions.
fn j_gradient(cfg: &Configuration, f: &ExpPoly<Surd>) -> ExpPoly<Surd> {
    let grad = f.gradient_q();
    let jf = cfg.jform();
    let m = jf.matrix();
    let r = cfg.r();
    let mut out = ExpPoly::zero(r);
    for i in 0..=r {
        for j in i..=r {
            if m[i][j].is_zero() {
                continue;
            }
            let k = if i == j {
                m[i][j].clone()
            } else {
                int(2) * &m[i][j]
            };
            out = &out + &(&grad[i] * &grad[j]).scale(&Surd::from_rat(k));
        }
    }
    out
}

/// `e^{d·q}(E − λ(n+1) + λu + Σ A_w e^{w·q})`.
fn condition_rhs(cfg: &Configuration) -> ExpPoly<Surd> {
    let r = cfg.r();
    let nv = 2 * (r + 1);
    let d = cfg.d_ext();
    let n1 = Rat::from_integer((cfg.n() + 1).into());
    let mut pot = Poly::constant(nv, Surd::from_rat(cfg.e.clone() - &cfg.lambda * n1));
    pot = &pot + &Poly::var(nv, q_var(r, r)).scale(&Surd::from_rat(cfg.lambda.clone()));
    let mut out = ExpPoly::zero(r);
    out.add_term(d.clone(), pot);
    for (w, a) in &cfg.weights {
        out.add_term(
            vadd(&d, &w.extended()),
            Poly::constant(nv, Surd::from_rat(a.clone())),
        );
    }
    out
}

fn check_shape(cfg: &Configuration, f: &SuperpotentialAnsatz) -> Result<()> {
    if f.r() != cfg.r() {
        return Err(Error::Dimension {
            expected: cfg.r() + 1,
            got: f.r() + 1,
        });
    }
    Ok(())
}

/// Exact comparison of `Σ_{a+c=b} (…)` with the right-hand side at every sum vector `b`.
pub fn check(cfg: &Configuration, f: &SuperpotentialAnsatz) -> Result<ConditionReport> {
    check_shape(cfg, f)?;
    let diff = &j_gradient(cfg, &f.to_exp_poly()) - &condition_rhs(cfg);
    let residuals: Vec<Residual> = diff
        .terms()
        .map(|(b, p)| Residual {
            b: b.clone(),
            value: p.clone(),
        })
        .collect();
    let violated_b = residuals.iter().map(|r| r.b.clone()).collect();
    Ok(ConditionReport {
        satisfied: residuals.is_empty(),
        residuals,
        violated_b,
    })
}

/// `H(q, ∇f(q))`; identically zero exactly when `f` is a superpotential.
pub fn hamiltonian_on_graph(
    cfg: &Configuration,
    f: &SuperpotentialAnsatz,
) -> Result<ExpPoly<Surd>> {
    check_shape(cfg, f)?;
    let h = hamiltonian(cfg).map_coeffs(|c| Surd::from_rat(c.clone()));
    Ok(h.substitute_momenta(&f.to_exp_poly().gradient_q()))
}

/// `s(½(d + x)) = Σ_i x_i`.
pub fn s_value(cfg: &Configuration, c: &[Rat]) -> Rat {
    let x = vsub(&vscale(c, &int(2)), &cfg.d_ext());
    x[..cfg.r()].iter().sum()
}

/// Counts of hull vertices of `C` with `s > −1` and `s < −1`.
pub fn ab_signature(cfg: &Configuration, c: &[QVec]) -> Result<(usize, usize)> {
    let r = cfg.r();
    for v in c {
        if v.len() != r + 1 {
            return Err(Error::Dimension {
                expected: r + 1,
                got: v.len(),
            });
        }
        if v[r] != -Rat::one() {
            return Err(Error::NotInP);
        }
    }
    let minus_one = -Rat::one();
    let (mut a, mut b) = (0, 0);
    for v in hull_vertices(c) {
        let s = s_value(cfg, &v);
        if s > minus_one {
            a += 1;
        } else if s < minus_one {
            b += 1;
        }
    }
    Ok((a, b))
}

/// Whether some hull vertex of `C` is `J`-null.
pub fn has_null_vertex(cfg: &Configuration, c: &[QVec]) -> bool {
    let j = cfg.jform();
    hull_vertices(c).iter().any(|v| j.is_null(v))
}

/// `½(d + x)` for an extended lattice vector `x`.
pub fn half_shift(cfg: &Configuration, x: &[Rat]) -> QVec {
    vscale(&vadd(&cfg.d_ext(), x), &half())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_vec};
    use crate::weight_config::catalog_entry;

    fn case5(cfg: &Configuration) -> Vec<QVec> {
        [
            [0, -1, -1, 0],
            [0, 1, -1, 0],
            [0, -1, 1, 0],
            [1, 0, -2, 0],
            [1, -2, 0, 0],
        ]
        .iter()
        .map(|x| half_shift(cfg, &rat_vec(x)))
        .collect()
    }

    #[test]
    fn s_and_signature() {
        let cfg = catalog_entry("bbc-case5").unwrap().config;
        let c = case5(&cfg);
        assert_eq!(s_value(&cfg, &c[0]), int(-2));
        assert_eq!(ab_signature(&cfg, &c).unwrap(), (2, 1));
        let off = vec![rat_vec(&[0, 0, 0, 0])];
        assert_eq!(ab_signature(&cfg, &off), Err(Error::NotInP));
    }

    #[test]
    fn ansatz_invariants() {
        let one = RadicalScalar::from_rat(&int(1));
        let c = rat_vec(&[1, -1]);
        assert!(SuperpotentialAnsatz::constant(vec![
            (c.clone(), one.clone()),
            (c.clone(), one.clone())
        ])
        .is_err());
        assert!(SuperpotentialAnsatz::constant(vec![(c.clone(), RadicalScalar::zero())]).is_err());
        assert!(SuperpotentialAnsatz::constant(vec![(rat_vec(&[0, 0]), one.clone())]).is_err());
        let affine = Coefficient::Affine {
            u: one.clone(),
            constant: one,
        };
        assert!(SuperpotentialAnsatz::new(vec![(c, affine)], true).is_err());
    }

    #[test]
    fn json_shape() {
        let f = SuperpotentialAnsatz::constant(vec![(
            vec![rat(1, 2), int(-1)],
            RadicalScalar::sqrt(-1, int(2)),
        )])
        .unwrap();
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(
            s,
            r#"{"entries":[{"c":["1/2","-1"],"f":{"sign":-1,"radicand":"2"}}],"steady":true}"#
        );
        let back: SuperpotentialAnsatz = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
    }
}
