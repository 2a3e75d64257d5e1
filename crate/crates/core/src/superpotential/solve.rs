//! Exact solution of the quadratic coefficient system.
//!
//! Unknowns are the coefficients `f_c` (constant mode) or the pairs
//! `(a_c, b_c)` with `f_c = a_c u + b_c` (polynomial mode). Each sum vector
//! `b` contributes one polynomial equation per power of `u`. A depth-first
//! search assigns exact values: univariate equations are solved by the
//! quadratic formula, products fixed by monomial equations yield squared
//! magnitudes, and genuinely free scalings are normalised to `±1`.

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check, Coefficient, SuperpotentialAnsatz};
use crate::exact_geometry::{add as vadd, lp, QVec};
use crate::poly::Poly;
use crate::rational::{approximate, int, Rat};
use crate::surd::{RadicalScalar, Surd};
use crate::weight_config::{CoefficientMode, Configuration};

const MAX_SET: usize = 12;
const NEWTON_SEEDS: usize = 32;
const NEWTON_TOL: f64 = 1e-10;
const NODE_LIMIT: usize = 20_000;

/// Why no ansatz was produced.
#[derive(Clone, Debug, PartialEq)]
pub struct NoSolution {
    /// A sum vector whose equation is contradicted on every branch explored, if one was found.
    pub contradicted_b: Option<QVec>,
    pub reason: String,
}

impl NoSolution {
    fn new(contradicted_b: Option<QVec>, reason: &str) -> Self {
        NoSolution {
            contradicted_b,
            reason: reason.into(),
        }
    }
}

type Eq = (QVec, Poly<Surd>);

struct System {
    /// Number of unknowns; variable `nunk` is `u` while building.
    nunk: usize,
    polynomial: bool,
    eqs: Vec<Eq>,
}

fn build(cfg: &Configuration, cs: &[QVec], mode: CoefficientMode) -> System {
    let k = cs.len();
    let polynomial = mode == CoefficientMode::Polynomial;
    let nunk = if polynomial { 2 * k } else { k };
    let nv = nunk + 1;
    let u = nunk;
    let jf = cfg.jform();
    let r = cfg.r();
    let m_rr = jf.matrix()[r][r].clone();
    let mut e_u = vec![Rat::zero(); r + 1];
    e_u[r] = Rat::one();

    let f_of = |i: usize| -> Poly<Rat> {
        if polynomial {
            &(&Poly::var(nv, 2 * i) * &Poly::var(nv, u)) + &Poly::var(nv, 2 * i + 1)
        } else {
            Poly::var(nv, i)
        }
    };
    // ∂f_c/∂u
    let g_of = |i: usize| -> Poly<Rat> {
        if polynomial {
            Poly::var(nv, 2 * i)
        } else {
            Poly::zero(nv)
        }
    };

    let mut lhs: std::collections::BTreeMap<QVec, Poly<Rat>> = Default::default();
    for i in 0..k {
        for j in 0..k {
            let b = vadd(&cs[i], &cs[j]);
            let mut t = (&f_of(i) * &f_of(j)).scale(&jf.j(&cs[i], &cs[j]));
            if polynomial {
                t = &t + &(&f_of(i) * &g_of(j)).scale(&jf.j(&cs[i], &e_u));
                t = &t + &(&g_of(i) * &f_of(j)).scale(&jf.j(&cs[j], &e_u));
                t = &t + &(&g_of(i) * &g_of(j)).scale(&m_rr);
            }
            let entry = lhs.entry(b).or_insert_with(|| Poly::zero(nv));
            *entry = &*entry + &t;
        }
    }
    let d = cfg.d_ext();
    let n1 = Rat::from_integer((cfg.n() + 1).into());
    let mut rhs: Vec<(QVec, Poly<Rat>)> = vec![(
        d.clone(),
        &Poly::constant(nv, cfg.e.clone() - &cfg.lambda * n1)
            + &Poly::var(nv, u).scale(&cfg.lambda),
    )];
    for (w, a) in &cfg.weights {
        rhs.push((vadd(&d, &w.extended()), Poly::constant(nv, a.clone())));
    }
    for (b, p) in rhs {
        let entry = lhs.entry(b).or_insert_with(|| Poly::zero(nv));
        *entry = &*entry - &p;
    }

    let mut eqs = Vec::new();
    for (b, p) in lhs {
        for part in p.split_by(u) {
            if !part.is_zero() {
                eqs.push((b.clone(), part.map_coeffs(|c| Surd::from_rat(c.clone()))));
            }
        }
    }
    System {
        nunk,
        polynomial,
        eqs,
    }
}

fn substitute(p: &Poly<Surd>, var: usize, value: &Surd) -> Poly<Surd> {
    let mut out = Poly::zero(p.nvars());
    for (m, c) in p.terms() {
        let mut m2 = m.clone();
        let e = m2[var];
        m2[var] = 0;
        let mut t = c.clone();
        for _ in 0..e {
            t = t * value.clone();
        }
        out.add_term(m2, t);
    }
    out
}

fn vars_of(p: &Poly<Surd>, nunk: usize) -> Vec<usize> {
    (0..nunk).filter(|&i| p.uses_var(i)).collect()
}

/// Real roots of `c2 x² + c1 x + c0`; `None` when the arithmetic leaves the supported fields.
fn univariate_roots(p: &Poly<Surd>, x: usize) -> Option<Vec<Surd>> {
    let parts = p.split_by(x);
    let coeff = |k: usize| parts.get(k).map_or(Some(Surd::zero()), |q| q.as_constant());
    let (c0, c1, c2) = (coeff(0)?, coeff(1)?, coeff(2)?);
    if parts.len() > 3 {
        return None;
    }
    if c2.is_zero() {
        return Some(vec![(-c0).checked_div(&c1)?]);
    }
    let disc = (c1.clone() * c1.clone() - Surd::from_rat(int(4)) * c2.clone() * c0.clone())
        .as_rational()?;
    if disc.is_negative() {
        return Some(vec![]);
    }
    let s = Surd::sqrt(&disc)?;
    let den = (Surd::from_rat(int(2)) * c2).inverse()?;
    let mut roots = vec![(s.clone() - c1.clone()) * den.clone()];
    if !disc.is_zero() {
        roots.push((-s - c1) * den);
    }
    Some(roots)
}

struct Dfs<'a> {
    nunk: usize,
    polynomial: bool,
    accept: &'a dyn Fn(&[Surd]) -> bool,
    /// Set when a branch could not be decided exactly or a free value was guessed.
    incomplete: bool,
    contradicted: Option<QVec>,
    nodes: usize,
}

enum Step {
    /// Alternative single assignments, tried in order.
    Branch(Vec<(usize, Surd)>),
    Contradiction(QVec),
    Done,
}

impl Dfs<'_> {
    fn nonzero_required(&self) -> bool {
        !self.polynomial
    }

    fn next_step(&mut self, eqs: &[Eq], assign: &[Option<Surd>]) -> Step {
        for (b, p) in eqs {
            if let Some(c) = p.as_constant() {
                if !c.is_zero() {
                    return Step::Contradiction(b.clone());
                }
            }
        }
        // c · Π x = 0 forces some factor to vanish.
        for (b, p) in eqs {
            if p.num_terms() == 1 {
                if self.nonzero_required() {
                    return Step::Contradiction(b.clone());
                }
                return Step::Branch(
                    vars_of(p, self.nunk)
                        .into_iter()
                        .map(|v| (v, Surd::zero()))
                        .collect(),
                );
            }
        }
        for (b, p) in eqs {
            let vs = vars_of(p, self.nunk);
            if vs.len() == 1 {
                match univariate_roots(p, vs[0]) {
                    Some(mut roots) => {
                        if self.nonzero_required() {
                            roots.retain(|x| !x.is_zero());
                        }
                        if roots.is_empty() {
                            return Step::Contradiction(b.clone());
                        }
                        return Step::Branch(roots.into_iter().map(|x| (vs[0], x)).collect());
                    }
                    None => self.incomplete = true,
                }
            }
        }
        if let Some((v, sq)) = self.magnitude(eqs) {
            if sq.is_negative() {
                return Step::Contradiction(eqs[0].0.clone());
            }
            let s = Surd::sqrt(&sq).expect("nonnegative");
            return Step::Branch(vec![(v, s.clone()), (v, -s)]);
        }
        let free =
            (0..self.nunk).find(|&i| assign[i].is_none() && eqs.iter().any(|(_, p)| p.uses_var(i)));
        if let Some(v) = free {
            self.incomplete = true;
            let mut vals = vec![Surd::one(), -Surd::one()];
            if self.polynomial {
                vals.push(Surd::zero());
            }
            return Step::Branch(vals.into_iter().map(|x| (v, x)).collect());
        }
        Step::Done
    }

    /// A squared value `x_v² ∈ ℚ` implied by equations of the form `α x_i x_j = β`.
    fn magnitude(&self, eqs: &[Eq]) -> Option<(usize, Rat)> {
        let mut rows: Vec<Vec<Rat>> = Vec::new();
        let mut vals: Vec<Rat> = Vec::new();
        for (_, p) in eqs {
            if p.num_terms() != 2 {
                continue;
            }
            let terms: Vec<_> = p.terms().collect();
            let (konst, quad) = if terms[0].0.iter().all(|&e| e == 0) {
                (terms[0].1, terms[1])
            } else if terms[1].0.iter().all(|&e| e == 0) {
                (terms[1].1, terms[0])
            } else {
                continue;
            };
            if quad.0.iter().sum::<u32>() != 2 {
                continue;
            }
            let (Some(k), Some(a)) = (konst.as_rational(), quad.1.as_rational()) else {
                continue;
            };
            let mut row = vec![Rat::zero(); self.nunk];
            for (i, &e) in quad.0.iter().enumerate().take(self.nunk) {
                row[i] = Rat::from_integer(e.into());
            }
            rows.push(row);
            vals.push(-k / a);
        }
        if rows.len() < 2 {
            return None;
        }
        for v in 0..self.nunk {
            if rows.iter().all(|r| r[v].is_zero()) || rows.iter().any(|r| r[v] == int(2)) {
                continue;
            }
            // Find y with Σ y_j row_j = e_v.
            let a: Vec<Vec<Rat>> = (0..self.nunk)
                .map(|i| rows.iter().map(|r| r[i].clone()).collect())
                .collect();
            let mut target = vec![Rat::zero(); self.nunk];
            target[v] = Rat::one();
            let Some(y) = lp::solve(&a, &target) else {
                continue;
            };
            let mut sq = Rat::one();
            let mut ok = true;
            for (yj, val) in y.iter().zip(&vals) {
                let e2 = yj * int(2);
                if !e2.is_integer() {
                    ok = false;
                    break;
                }
                let e = e2.to_integer();
                let e: i32 = match i32::try_from(e) {
                    Ok(e) => e,
                    Err(_) => {
                        ok = false;
                        break;
                    }
                };
                sq *= val.pow(e);
            }
            if ok {
                return Some((v, sq));
            }
        }
        None
    }

    fn run(&mut self, eqs: Vec<Eq>, assign: Vec<Option<Surd>>) -> Option<Vec<Surd>> {
        self.nodes += 1;
        if self.nodes > NODE_LIMIT {
            self.incomplete = true;
            return None;
        }
        match self.next_step(&eqs, &assign) {
            Step::Contradiction(b) => {
                if self.contradicted.is_none() {
                    self.contradicted = Some(b);
                }
                None
            }
            Step::Branch(alternatives) => {
                for (v, val) in alternatives {
                    let next: Vec<Eq> = eqs
                        .iter()
                        .map(|(b, p)| (b.clone(), substitute(p, v, &val)))
                        .filter(|(_, p)| !p.is_zero())
                        .collect();
                    let mut a = assign.clone();
                    a[v] = Some(val);
                    if let Some(sol) = self.run(next, a) {
                        return Some(sol);
                    }
                }
                None
            }
            Step::Done => {
                let sol = self.complete(&assign);
                (self.accept)(&sol).then_some(sol)
            }
        }
    }

    /// Fills unconstrained unknowns: constants become 1, polynomial parts become 0
    /// unless the coefficient would otherwise vanish.
    fn complete(&self, assign: &[Option<Surd>]) -> Vec<Surd> {
        if !self.polynomial {
            return assign
                .iter()
                .map(|a| a.clone().unwrap_or_else(Surd::one))
                .collect();
        }
        let mut out = vec![Surd::zero(); self.nunk];
        for c in 0..self.nunk / 2 {
            let a = assign[2 * c].clone();
            let b = assign[2 * c + 1].clone();
            let a_val = a.clone().unwrap_or_else(Surd::zero);
            let b_val = match b {
                Some(b) => b,
                None if a_val.is_zero() => Surd::one(),
                None => Surd::zero(),
            };
            out[2 * c] = a_val;
            out[2 * c + 1] = b_val;
        }
        out
    }
}

fn to_ansatz(
    cs: &[QVec],
    vals: &[Surd],
    polynomial: bool,
    steady: bool,
) -> Option<SuperpotentialAnsatz> {
    let rad = |s: &Surd| s.as_radical();
    let entries: Option<Vec<(QVec, Coefficient)>> = cs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let f = if polynomial {
                Coefficient::Affine {
                    u: rad(&vals[2 * i])?,
                    constant: rad(&vals[2 * i + 1])?,
                }
            } else {
                Coefficient::Constant(rad(&vals[i])?)
            };
            Some((c.clone(), f))
        })
        .collect();
    let entries = entries?;
    let steady = steady && entries.iter().all(|(_, f)| f.is_constant());
    let entries = entries
        .into_iter()
        .map(|(c, f)| match f {
            Coefficient::Affine { u, constant } if steady && u.is_zero() => {
                (c, Coefficient::Constant(constant))
            }
            f => (c, f),
        })
        .collect();
    SuperpotentialAnsatz::new(entries, steady).ok()
}

/// Exact coefficients making `Σ_{c∈C} f_c e^{c·q}` a superpotential, gauge-fixed so the
/// lexicographically smallest exponent carries a positive leading coefficient.
pub fn solve_coefficients(
    cfg: &Configuration,
    cs: &[QVec],
    mode: CoefficientMode,
) -> std::result::Result<SuperpotentialAnsatz, NoSolution> {
    if cs.is_empty() || cs.len() > MAX_SET {
        return Err(NoSolution::new(
            None,
            "exponent set must have between 1 and 12 elements",
        ));
    }
    let r = cfg.r();
    if cs.iter().any(|c| c.len() != r + 1) {
        return Err(NoSolution::new(
            None,
            "exponent vectors must have length r+1",
        ));
    }
    let mut cs = cs.to_vec();
    cs.sort();
    cs.dedup();
    if cs.iter().any(|c| c.iter().all(|x| x.is_zero())) {
        return Err(NoSolution::new(None, "the zero vector is not allowed"));
    }
    let sys = build(cfg, &cs, mode);
    let polynomial = sys.polynomial;
    let steady = cfg.is_steady();
    let accept = |vals: &[Surd]| {
        to_ansatz(&cs, vals, polynomial, steady)
            .and_then(|f| check(cfg, &f).ok())
            .is_some_and(|rep| rep.satisfied)
    };
    let mut dfs = Dfs {
        nunk: sys.nunk,
        polynomial,
        accept: &accept,
        incomplete: false,
        contradicted: None,
        nodes: 0,
    };
    let assign = vec![None; sys.nunk];
    if let Some(sol) = dfs.run(sys.eqs.clone(), assign) {
        let f = to_ansatz(&cs, &sol, polynomial, steady).expect("accepted");
        return Ok(f.gauge_fixed());
    }
    if dfs.incomplete && !polynomial {
        if let Some(f) = newton_fallback(cfg, &cs, &sys) {
            return Ok(f.gauge_fixed());
        }
    }
    if dfs.incomplete {
        Err(NoSolution::new(None, "no solution found"))
    } else {
        Err(NoSolution::new(
            dfs.contradicted,
            "inconsistent exact system",
        ))
    }
}

/// Damped Gauss-Newton from random seeds, followed by rational recognition of
/// the squared values and an exact re-check.
fn newton_fallback(cfg: &Configuration, cs: &[QVec], sys: &System) -> Option<SuperpotentialAnsatz> {
    let k = sys.nunk;
    let eqs: Vec<&Poly<Surd>> = sys.eqs.iter().map(|(_, p)| p).collect();
    let grads: Vec<Vec<Poly<Surd>>> = eqs
        .iter()
        .map(|p| (0..k).map(|i| p.derivative(i)).collect())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..NEWTON_SEEDS {
        let mut x: Vec<f64> = (0..=k)
            .map(|_| {
                let mag = 10f64.powf(rng.gen_range(-1.0..1.0));
                if rng.gen_bool(0.5) {
                    mag
                } else {
                    -mag
                }
            })
            .collect();
        x[k] = 0.0;
        let mut mu = 1e-3;
        for _ in 0..200 {
            let res: Vec<f64> = eqs.iter().map(|p| p.eval_f64(&x)).collect();
            let norm: f64 = res.iter().map(|v| v * v).sum();
            if norm.sqrt() < NEWTON_TOL * 1e-2 {
                break;
            }
            let jac: Vec<Vec<f64>> = grads
                .iter()
                .map(|g| g.iter().map(|d| d.eval_f64(&x)).collect())
                .collect();
            let mut a = vec![vec![0.0; k]; k];
            let mut rhs = vec![0.0; k];
            for (row, rv) in jac.iter().zip(&res) {
                for i in 0..k {
                    rhs[i] -= row[i] * rv;
                    for j in 0..k {
                        a[i][j] += row[i] * row[j];
                    }
                }
            }
            for (i, row) in a.iter_mut().enumerate() {
                row[i] += mu;
            }
            let Some(step) = gauss_solve(a, rhs) else {
                break;
            };
            let mut trial = x.clone();
            for i in 0..k {
                trial[i] += step[i];
            }
            let tnorm: f64 = eqs.iter().map(|p| p.eval_f64(&trial).powi(2)).sum();
            if tnorm < norm {
                x = trial;
                mu = (mu * 0.3).max(1e-15);
            } else {
                mu *= 10.0;
            }
        }
        let resid = eqs.iter().map(|p| p.eval_f64(&x).abs()).fold(0.0, f64::max);
        if resid >= NEWTON_TOL || x[..k].iter().any(|v| v.abs() < 1e-8) {
            continue;
        }
        let vals: Option<Vec<Surd>> = x[..k]
            .iter()
            .map(|&v| {
                let sq = approximate(v * v, 1_000_000)?;
                Some(RadicalScalar::sqrt(if v < 0.0 { -1 } else { 1 }, sq).to_surd())
            })
            .collect();
        let Some(vals) = vals else { continue };
        if let Some(f) = to_ansatz(cs, &vals, false, cfg.is_steady()) {
            if check(cfg, &f).is_ok_and(|rep| rep.satisfied) {
                return Some(f);
            }
        }
    }
    None
}

fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[p][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, p);
        b.swap(col, p);
        for i in col + 1..n {
            let f = a[i][col] / a[col][col];
            for j in col..n {
                a[i][j] -= f * a[col][j];
            }
            b[i] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat_vec;
    use crate::superpotential::half_shift;
    use crate::weight_config::catalog_entry;

    #[test]
    fn bryant2_family_representative() {
        let cfg = catalog_entry("bryant2").unwrap().config;
        let cs = vec![rat_vec(&[1, -1]), rat_vec(&[0, -1])];
        let f = solve_coefficients(&cfg, &cs, CoefficientMode::Constant).unwrap();
        let prod = &f.entries[0].f;
        assert!(matches!(prod, Coefficient::Constant(c) if c.sign == 1));
        assert!(check(&cfg, &f).unwrap().satisfied);
    }

    #[test]
    fn expanding_constant_mode_fails_at_d() {
        let cfg = catalog_entry("bryant2").unwrap().config.with_lambda(int(1));
        let cs = vec![rat_vec(&[1, -1]), rat_vec(&[0, -1])];
        let err = solve_coefficients(&cfg, &cs, CoefficientMode::Constant).unwrap_err();
        assert_eq!(err.contradicted_b, Some(cfg.d_ext()));
    }

    #[test]
    fn interior_point_is_rejected() {
        let cfg = catalog_entry("bryant2").unwrap().config;
        let cs = vec![
            rat_vec(&[1, -1]),
            rat_vec(&[0, -1]),
            half_shift(&cfg, &rat_vec(&[0, 0])),
        ];
        assert!(solve_coefficients(&cfg, &cs, CoefficientMode::Constant).is_err());
    }
}
