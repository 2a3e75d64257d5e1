//! The first-order subsystem `q̇ = 2 e^{−½d·q} J∇f`, the singular start of the
//! case-5 flow, and full Hamiltonian-flow diagnostics.

mod dopri;

use num_traits::Zero;

pub use dopri::{integrate, Diagnostic, IntegratorOptions, Trajectory};

use crate::error::{Error, Result};
use crate::exact_geometry::{scale as vscale, QVec};
use crate::exp_poly::{hamiltonian, ExpPoly};
use crate::poly::Coeff;
use crate::rational::{half, int, rat_vec, to_f64, Rat};
use crate::superpotential::{check, half_shift, SuperpotentialAnsatz};
use crate::surd::Surd;
use crate::weight_config::Configuration;

/// Double-precision copy of an exponential polynomial for fast evaluation.
#[derive(Clone, Debug)]
pub struct NumExpPoly {
    terms: Vec<(Vec<f64>, Vec<(Vec<i32>, f64)>)>,
}

impl NumExpPoly {
    pub fn new<C: Coeff>(f: &ExpPoly<C>) -> Self {
        let terms = f
            .terms()
            .map(|(b, p)| {
                let mono = p
                    .terms()
                    .map(|(m, c)| (m.iter().map(|&e| e as i32).collect(), c.to_f64()))
                    .collect();
                (b.iter().map(to_f64).collect(), mono)
            })
            .collect();
        NumExpPoly { terms }
    }

    /// Value at momenta `p` and positions `q` (each of length `r + 1`).
    pub fn eval(&self, p: &[f64], q: &[f64]) -> f64 {
        let mut total = 0.0;
        for (b, mono) in &self.terms {
            let e: f64 = b.iter().zip(q).map(|(x, y)| x * y).sum();
            let mut poly = 0.0;
            for (m, c) in mono {
                let mut t = *c;
                for (k, &e) in m.iter().enumerate() {
                    if e != 0 {
                        let x = if k < p.len() { p[k] } else { q[k - p.len()] };
                        t *= x.powi(e);
                    }
                }
                poly += t;
            }
            total += poly * e.clamp(-700.0, 700.0).exp();
        }
        total
    }
}

/// Right-hand side of the first-order subsystem for a verified superpotential.
#[derive(Clone, Debug)]
pub struct SubsystemRhs {
    pub cfg: Configuration,
    pub ansatz: SuperpotentialAnsatz,
    symbolic: Vec<ExpPoly<Surd>>,
    numeric: Vec<NumExpPoly>,
    gradient: Vec<NumExpPoly>,
}

impl SubsystemRhs {
    /// `q̇_i` as exponential polynomials in `q`.
    pub fn symbolic(&self) -> &[ExpPoly<Surd>] {
        &self.symbolic
    }

    pub fn eval(&self, q: &[f64]) -> Vec<f64> {
        let p = vec![0.0; q.len()];
        self.numeric.iter().map(|c| c.eval(&p, q)).collect()
    }

    /// `∇f(q)`, the momenta on the graph.
    pub fn momenta(&self, q: &[f64]) -> Vec<f64> {
        let p = vec![0.0; q.len()];
        self.gradient.iter().map(|c| c.eval(&p, q)).collect()
    }

    pub fn integrate(
        &self,
        q0: &[f64],
        t0: f64,
        t1: f64,
        opts: &IntegratorOptions,
    ) -> Result<Trajectory> {
        if q0.len() != self.cfg.r() + 1 {
            return Err(Error::Dimension {
                expected: self.cfg.r() + 1,
                got: q0.len(),
            });
        }
        integrate(|_, q| self.eval(q), q0, t0, t1, opts)
    }

    /// Adds `H(q, ∇f(q))` and a zero graph defect to each sample.
    pub fn annotate(&self, traj: &mut Trajectory) {
        let h = NumExpPoly::new(&hamiltonian(&self.cfg));
        let d: Vec<f64> = self.cfg.d_ext().iter().map(to_f64).collect();
        traj.diagnostics = traj
            .samples
            .iter()
            .map(|(_, q)| {
                let hv = h.eval(&self.momenta(q), q);
                Diagnostic {
                    hamiltonian: hv,
                    graph_defect: 0.0,
                    hamiltonian_scaled: hv * (-0.5 * dot_f64(&d, q)).exp(),
                    graph_defect_rel: 0.0,
                }
            })
            .collect();
    }
}

fn dot_f64(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Builds `q̇ = 2 e^{−½d·q} M ∇f` after checking the superpotential condition exactly.
///
/// For the case-5 ansatz the result is compared term by term with the closed
/// expression of [`case5_reference_rhs`].
pub fn build_rhs(cfg: &Configuration, f: &SuperpotentialAnsatz) -> Result<SubsystemRhs> {
    if !check(cfg, f)?.satisfied {
        return Err(Error::Unsatisfied);
    }
    let r = cfg.r();
    let grad = f.to_exp_poly().gradient_q();
    let jf = cfg.jform();
    let m = jf.matrix();
    let weight = ExpPoly::exp_term(r, vscale(&cfg.d_ext(), &-half()), Surd::from_rat(int(2)));
    let symbolic: Vec<ExpPoly<Surd>> = (0..=r)
        .map(|i| {
            let mut row = ExpPoly::zero(r);
            for (j, g) in grad.iter().enumerate() {
                if !m[i][j].is_zero() {
                    row = &row + &g.scale(&Surd::from_rat(m[i][j].clone()));
                }
            }
            &weight * &row
        })
        .collect();
    if let Ok(params) = Case5Params::from_config(cfg) {
        if f.exponents() == case5_exponents(cfg) {
            let sign = f
                .coefficient(&half_shift(cfg, &rat_vec(&[1, 0, -2, 0])))
                .map_or(1, |c| match c {
                    crate::superpotential::Coefficient::Constant(c) => c.sign,
                    _ => 0,
                });
            if sign != 0 && symbolic != case5_reference_rhs(&params, sign) {
                return Err(Error::Integrator(
                    "first-order system disagrees with the closed case-5 form".into(),
                ));
            }
        }
    }
    Ok(SubsystemRhs {
        cfg: cfg.clone(),
        ansatz: f.clone(),
        numeric: symbolic.iter().map(NumExpPoly::new).collect(),
        gradient: grad.iter().map(NumExpPoly::new).collect(),
        symbolic,
    })
}

/// Parameters of a case-5 configuration with `A_(0,−1,0) = A_(0,0,−1) = λ` and
/// `A_(1,−2,0) = A_(1,0,−2) = A`. Here `λ` is the common sphere coefficient, not
/// the soliton constant (which must vanish).
#[derive(Clone, Debug, PartialEq)]
pub struct Case5Params {
    pub lambda: Rat,
    pub e: Rat,
    pub a: Rat,
}

impl Case5Params {
    pub fn from_config(cfg: &Configuration) -> Result<Self> {
        let bad = |msg: &str| Err(Error::Config(msg.into()));
        if cfg.dims != [1, 2, 2] || cfg.weights.len() != 4 {
            return bad("not a case-5 configuration: need d=(1,2,2) and four weights");
        }
        if !cfg.is_steady() {
            return bad("case-5 flow requires a steady configuration");
        }
        let get = |w: &[i64]| {
            cfg.coefficient(&w.iter().map(|&x| int(x)).collect::<Vec<_>>())
                .cloned()
        };
        let (Some(l1), Some(l2), Some(a1), Some(a2)) = (
            get(&[0, -1, 0]),
            get(&[0, 0, -1]),
            get(&[1, -2, 0]),
            get(&[1, 0, -2]),
        ) else {
            return bad("not a case-5 configuration: missing weights");
        };
        if l1 != l2 || a1 != a2 {
            return bad("case-5 normalisation needs equal sphere coefficients and equal A-values");
        }
        Ok(Case5Params {
            lambda: l1,
            e: cfg.e.clone(),
            a: a1,
        })
    }

    pub fn lambda_f64(&self) -> f64 {
        to_f64(&self.lambda)
    }

    pub fn e_f64(&self) -> f64 {
        to_f64(&self.e)
    }

    pub fn a_f64(&self) -> f64 {
        to_f64(&self.a)
    }
}

/// `C = ½(d + {(0,−1,−1), (0,1,−1), (0,−1,1), (1,0,−2), (1,−2,0)})`, sorted.
pub fn case5_exponents(cfg: &Configuration) -> Vec<QVec> {
    let mut c: Vec<QVec> = [
        [0, -1, -1, 0],
        [0, 1, -1, 0],
        [0, -1, 1, 0],
        [1, 0, -2, 0],
        [1, -2, 0, 0],
    ]
    .iter()
    .map(|x| half_shift(cfg, &rat_vec(x)))
    .collect();
    c.sort();
    c
}

/// The case-5 first-order system written out by hand; `sign` selects the
/// square-root branch of the `q_1` terms.
pub fn case5_reference_rhs(p: &Case5Params, sign: i8) -> Vec<ExpPoly<Surd>> {
    let r = 3;
    let root_a = Surd::sqrt(&(int(-2) * &p.a))
        .expect("A < 0")
        .scale(&int(sign.into()));
    let root_e = Surd::sqrt(&p.e).expect("E > 0");
    let half_e = root_e.scale(&half());
    let lam_over = Surd::sqrt(&(&p.lambda * &p.lambda / &p.e)).expect("E > 0");
    let term = |b: [Rat; 4], c: Surd| ExpPoly::exp_term(r, b.to_vec(), c);
    let h = half();
    let mh = -half();
    let z = Rat::zero;
    let a_q2 = || term([h.clone(), int(-1), z(), z()], root_a.clone());
    let a_q3 = || term([h.clone(), z(), int(-1), z()], root_a.clone());
    let e_23 = |c: Surd| term([z(), h.clone(), mh.clone(), z()], c);
    let e_32 = |c: Surd| term([z(), mh.clone(), h.clone(), z()], c);
    let l_t = || term([z(), mh.clone(), mh.clone(), z()], lam_over.clone());
    let q1 = &a_q2() - &a_q3();
    let q2 = &(&(&e_23(-half_e.clone()) + &e_32(half_e.clone())) + &l_t()) - &a_q2();
    let q3 = &(&(&e_23(half_e.clone()) + &e_32(-half_e.clone())) + &l_t()) + &a_q3();
    let u = &(&e_23(-half_e.clone()) + &e_32(-half_e.clone())) + &l_t();
    vec![q1, q2, q3, u]
}

/// Which integration variable a start refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coordinate {
    T,
    S,
}

/// Initial data near the singular orbit taken from the exact linear solution
/// `β₁ = s`, `β₂ = s + 2λ/E`.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularStart {
    pub s0: f64,
    pub lambda: f64,
    pub e: f64,
    pub a: f64,
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub u: f64,
    pub coordinate: Coordinate,
}

pub const DEFAULT_S0: f64 = 1e-6;

impl SingularStart {
    /// `(q₁, q₂, q₃, u)` from `α = −2A e^{q₁}`, `β₁ = e^{q₂}`, `β₂ = e^{q₃}`.
    pub fn q(&self) -> Vec<f64> {
        vec![
            (self.alpha / (-2.0 * self.a)).ln(),
            self.beta1.ln(),
            self.beta2.ln(),
            self.u,
        ]
    }

    /// State `(β₁, β₂, u)` of the s-system.
    pub fn s_state(&self) -> Vec<f64> {
        vec![self.beta1, self.beta2, self.u]
    }

    /// The same start expressed for integration in `t`.
    pub fn in_t(&self) -> (f64, Vec<f64>) {
        (t_of_s(self.s0, self.lambda, self.e), self.q())
    }
}

pub fn singular_start_case5(cfg: &Configuration, s0: f64) -> Result<SingularStart> {
    let p = Case5Params::from_config(cfg)?;
    let (lambda, e) = (p.lambda_f64(), p.e_f64());
    singular_start_with(cfg, 0.0, 2.0 * lambda / e, s0)
}

/// Starts from the singular-orbit values `(β₁⁰, β₂⁰)`; only the branch
/// `(0, 2λ/E)` continues to `s > 0` with positive metric functions.
pub fn singular_start_with(
    cfg: &Configuration,
    beta1_0: f64,
    beta2_0: f64,
    s0: f64,
) -> Result<SingularStart> {
    let p = Case5Params::from_config(cfg)?;
    let (lambda, e, a) = (p.lambda_f64(), p.e_f64(), p.a_f64());
    if lambda <= 0.0 || e <= 0.0 {
        return Err(Error::Parameter(
            "singular start needs λ > 0 and E > 0".into(),
        ));
    }
    if a >= 0.0 {
        return Err(Error::Parameter("singular start needs A < 0".into()));
    }
    if !(s0 > 0.0 && s0.is_finite()) {
        return Err(Error::Parameter("s0 must be positive".into()));
    }
    let k = e / (2.0 * lambda);
    let tol = 1e-12 * (1.0 + 2.0 * lambda / e);
    let cond1 = k * beta1_0 * (beta2_0 - beta1_0) + beta1_0;
    let cond2 = -k * beta2_0 * (beta2_0 - beta1_0) + beta2_0;
    if cond1.abs() > tol || cond2.abs() > tol {
        return Err(Error::Parameter(
            "initial values do not solve the singular-orbit equations".into(),
        ));
    }
    if beta1_0.abs() <= tol && beta2_0.abs() <= tol {
        return Err(Error::Parameter(
            "β₁⁰ = β₂⁰ = 0 fails the non-degeneracy condition".into(),
        ));
    }
    if beta2_0.abs() <= tol {
        return Err(Error::Parameter(
            "the branch β₂⁰ = 0 has β₂ = −s < 0 for s > 0".into(),
        ));
    }
    let beta1 = s0;
    let beta2 = s0 + 2.0 * lambda / e;
    let alpha = lambda * lambda * s0 * s0 / (e * beta1 * beta2);
    Ok(SingularStart {
        s0,
        lambda,
        e,
        a,
        alpha,
        beta1,
        beta2,
        u: -e * s0 / lambda,
        coordinate: Coordinate::S,
    })
}

/// The s-system for `(β₁, β₂, u)`.
pub fn case5_s_rhs(lambda: f64, e: f64) -> impl Fn(f64, &[f64]) -> Vec<f64> {
    let k = e / (2.0 * lambda);
    move |s, y| {
        let (b1, b2) = (y[0], y[1]);
        vec![
            (k * b1 * (b2 - b1) + b1) / s - 1.0,
            (-k * b2 * (b2 - b1) + b2) / s + 1.0,
            (-k * (b1 + b2) + 1.0) / s,
        ]
    }
}

/// Integrates the s-system from the start to `s_max`.
pub fn integrate_case5_s(
    start: &SingularStart,
    s_max: f64,
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    integrate(
        case5_s_rhs(start.lambda, start.e),
        &start.s_state(),
        start.s0,
        s_max,
        opts,
    )
}

/// `(q₁, q₂, q₃, u)` from an s-system sample.
pub fn case5_q_from_s(start: &SingularStart, s: f64, state: &[f64]) -> Vec<f64> {
    let alpha = start.lambda * start.lambda * s * s / (start.e * state[0] * state[1]);
    vec![
        (alpha / (-2.0 * start.a)).ln(),
        state[0].ln(),
        state[1].ln(),
        state[2],
    ]
}

/// `arccoth x = ½ ln((x+1)/(x−1))` for `x > 1`.
pub fn arccoth(x: f64) -> f64 {
    assert!(x > 1.0, "arccoth domain is x > 1");
    0.5 * (2.0 / (x - 1.0)).ln_1p()
}

/// `t(s) = √(2s/λ) √(1 + Es/2λ) + (2/√E) arccoth √(1 + 2λ/Es)`.
pub fn t_of_s(s: f64, lambda: f64, e: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    (2.0 * s / lambda).sqrt() * (1.0 + e * s / (2.0 * lambda)).sqrt()
        + 2.0 / e.sqrt() * arccoth((1.0 + 2.0 * lambda / (e * s)).sqrt())
}

/// `t(s) = (√E/λ) ∫₀ˢ √(1 + 2λ/(Eσ)) dσ` by adaptive Simpson quadrature after `σ = w²`.
pub fn t_of_s_quadrature(s: f64, lambda: f64, e: f64, tol: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let c = 2.0 * lambda / e;
    let g = |w: f64| 2.0 * (w * w + c).sqrt();
    (e.sqrt() / lambda) * adaptive_simpson(&g, 0.0, s.sqrt(), tol, 50)
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
            + rec(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    rec(f, a, fa, b, fb, m, fm, whole, tol, depth)
}

/// Replaces the s-coordinate of each sample by `t(s)`.
pub fn reparametrize_t(traj: &Trajectory, lambda: f64, e: f64) -> Result<Trajectory> {
    if traj.samples.iter().any(|(s, _)| *s <= 0.0) {
        return Err(Error::Parameter("s-samples must be positive".into()));
    }
    Ok(Trajectory {
        samples: traj
            .samples
            .iter()
            .map(|(s, y)| (t_of_s(*s, lambda, e), y.clone()))
            .collect(),
        diagnostics: traj.diagnostics.clone(),
        truncated: traj.truncated.clone(),
    })
}

/// Integrates the canonical equations of `H` from `p(0) = ∇f(q(0)) + p_offset`,
/// recording `H` and `‖p − ∇f(q)‖` at every sample.
pub fn full_flow_check(
    cfg: &Configuration,
    f: &SuperpotentialAnsatz,
    q0: &[f64],
    t_span: (f64, f64),
    opts: &IntegratorOptions,
    p_offset: Option<&[f64]>,
) -> Result<Trajectory> {
    let rhs = build_rhs(cfg, f)?;
    let r = cfg.r();
    if q0.len() != r + 1 {
        return Err(Error::Dimension {
            expected: r + 1,
            got: q0.len(),
        });
    }
    let h = hamiltonian(cfg);
    let h_num = NumExpPoly::new(&h);
    let d: Vec<f64> = cfg.d_ext().iter().map(to_f64).collect();
    let dh_dp: Vec<NumExpPoly> = h.gradient_p().iter().map(NumExpPoly::new).collect();
    let dh_dq: Vec<NumExpPoly> = h.gradient_q().iter().map(NumExpPoly::new).collect();
    let mut y0 = q0.to_vec();
    let mut p0 = rhs.momenta(q0);
    if let Some(off) = p_offset {
        for (p, o) in p0.iter_mut().zip(off) {
            *p += o;
        }
    }
    y0.extend(p0);
    let field = |_: f64, y: &[f64]| -> Vec<f64> {
        let (q, p) = y.split_at(r + 1);
        let mut out: Vec<f64> = dh_dp.iter().map(|d| d.eval(p, q)).collect();
        out.extend(dh_dq.iter().map(|d| -d.eval(p, q)));
        out
    };
    let mut traj = integrate(field, &y0, t_span.0, t_span.1, opts)?;
    traj.diagnostics = traj
        .samples
        .iter()
        .map(|(_, y)| {
            let (q, p) = y.split_at(r + 1);
            let g = rhs.momenta(q);
            let defect = p
                .iter()
                .zip(&g)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let gnorm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
            let hv = h_num.eval(p, q);
            Diagnostic {
                hamiltonian: hv,
                graph_defect: defect,
                hamiltonian_scaled: hv * (-0.5 * dot_f64(&d, q)).exp(),
                graph_defect_rel: defect / (1.0 + gnorm),
            }
        })
        .collect();
    Ok(traj)
}

/// Case-5 configuration with sphere coefficient `λ`, energy `E` and type-III coefficient `A`.
pub fn case5_config(lambda: Rat, e: Rat, a: Rat) -> Result<Configuration> {
    Configuration::new(
        vec![1, 2, 2],
        vec![
            (vec![0, -1, 0], lambda.clone()),
            (vec![0, 0, -1], lambda),
            (vec![1, -2, 0], a.clone()),
            (vec![1, 0, -2], a),
        ],
        e,
        Rat::zero(),
    )
}

/// The case-5 superpotential of a normalised configuration, as the closed formulas give it.
pub fn case5_ansatz(cfg: &Configuration) -> Result<SuperpotentialAnsatz> {
    use crate::surd::RadicalScalar;
    let p = Case5Params::from_config(cfg)?;
    let lam = &p.lambda;
    let e = &p.e;
    let entries = vec![
        (
            half_shift(cfg, &rat_vec(&[0, -1, -1, 0])),
            RadicalScalar::sqrt(1, int(4) * lam * lam / e),
        ),
        (
            half_shift(cfg, &rat_vec(&[0, 1, -1, 0])),
            RadicalScalar::sqrt(1, e.clone()),
        ),
        (
            half_shift(cfg, &rat_vec(&[0, -1, 1, 0])),
            RadicalScalar::sqrt(1, e.clone()),
        ),
        (
            half_shift(cfg, &rat_vec(&[1, 0, -2, 0])),
            RadicalScalar::sqrt(1, int(-2) * &p.a),
        ),
        (
            half_shift(cfg, &rat_vec(&[1, -2, 0, 0])),
            RadicalScalar::sqrt(-1, int(-2) * &p.a),
        ),
    ];
    SuperpotentialAnsatz::constant(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight_config::catalog_entry;

    #[test]
    fn case5_rhs_matches_closed_form() {
        let cfg = catalog_entry("bbc-case5").unwrap().config;
        let f = case5_ansatz(&cfg).unwrap();
        let rhs = build_rhs(&cfg, &f).unwrap();
        let p = Case5Params::from_config(&cfg).unwrap();
        assert_eq!(rhs.symbolic(), case5_reference_rhs(&p, 1).as_slice());
    }

    #[test]
    fn t_closed_form_value() {
        let t = t_of_s(1.0, 4.0, 8.0);
        let expected = 1.0 + (1.0 + 2f64.sqrt()).ln() / 2f64.sqrt();
        assert!((t - expected).abs() < 1e-14);
        assert!((t - 1.623225).abs() < 1e-6);
        assert_eq!(t_of_s(0.0, 4.0, 8.0), 0.0);
    }

    #[test]
    fn start_values() {
        let cfg = case5_config(int(4), int(8), -half()).unwrap();
        let st = singular_start_case5(&cfg, 1.0).unwrap();
        assert!((st.alpha - 1.0).abs() < 1e-15);
        assert_eq!((st.beta1, st.beta2), (1.0, 2.0));
        assert!(singular_start_with(&cfg, 0.0, 0.0, 1e-6).is_err());
        assert!(singular_start_with(&cfg, 1.0, 0.0, 1e-6).is_err());
    }
}
