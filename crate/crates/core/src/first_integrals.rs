//! Factorisation of `J`, generalised first integrals `{F, H} = ΦH`, and the
//! exponents of the two-vector construction.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact_geometry::lp;
use crate::exp_poly::{hamiltonian, j_poly, p_var, var_names, ExpPoly};
use crate::poly::Poly;
use crate::rational::{fmt_rat, int, is_square, rat, Rat};
use crate::surd::Surd;
use crate::weight_config::Configuration;

/// `J = (c·∇J) θ` with `θ` linear in the momenta.
#[derive(Clone, Debug, PartialEq)]
pub struct Factorization {
    pub c: Vec<Surd>,
    pub theta: Poly<Surd>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FactorizationResult {
    pub r: usize,
    pub feasible: bool,
    pub factorization: Option<Factorization>,
    /// Contradicted coefficient equations when infeasible.
    pub certificate: Vec<String>,
    /// Rank of the matrix of `J`; a product of two linear forms has rank at most 2.
    pub form_rank: usize,
}

#[derive(Serialize)]
pub struct FactorizationJson {
    pub feasible: bool,
    pub c: Option<Vec<String>>,
    pub theta: Option<String>,
    pub certificate: Vec<String>,
    pub form_rank: usize,
}

impl FactorizationResult {
    pub fn to_json(&self) -> FactorizationJson {
        let names = var_names(self.r);
        FactorizationJson {
            feasible: self.feasible,
            c: self
                .factorization
                .as_ref()
                .map(|f| f.c.iter().map(|x| x.to_string()).collect()),
            theta: self.factorization.as_ref().map(|f| f.theta.render(&names)),
            certificate: self.certificate.clone(),
            form_rank: self.form_rank,
        }
    }
}

/// `c·∇_p J` for a coefficient vector of length `r + 1`.
pub fn c_dot_grad_j(cfg: &Configuration, c: &[Surd]) -> Poly<Surd> {
    let r = cfg.r();
    let j: Poly<Surd> = j_poly(cfg);
    let mut out = Poly::zero(2 * (r + 1));
    for (i, ci) in c.iter().enumerate() {
        out = &out + &j.derivative(p_var(r, i)).scale(ci);
    }
    out
}

/// `J − (c·∇J)θ`, which vanishes exactly for a valid factorisation.
pub fn factorization_defect(cfg: &Configuration, f: &Factorization) -> Poly<Surd> {
    let j: Poly<Surd> = j_poly(cfg);
    &j - &(&c_dot_grad_j(cfg, &f.c) * &f.theta)
}

pub fn factor_j(cfg: &Configuration) -> FactorizationResult {
    let r = cfg.r();
    let form_rank = lp::rank(cfg.jform().matrix());
    if r == 1 {
        let n = int(cfg.n() as i64);
        let sn = Surd::sqrt(&n).expect("n is positive");
        let nv = 4;
        let c = vec![
            (Surd::from_rat(n.clone()) + sn.clone()).scale(&rat(-1, 2)),
            Surd::one(),
        ];
        let inv_sn = sn.inverse().expect("nonzero");
        let mut theta = Poly::zero(nv);
        theta.add_term(mono(nv, p_var(1, 0)), -inv_sn);
        theta.add_term(mono(nv, p_var(1, 1)), -(sn - Surd::one()).scale(&rat(1, 2)));
        let f = Factorization { c, theta };
        let ok = factorization_defect(cfg, &f).is_zero();
        return FactorizationResult {
            r,
            feasible: ok,
            factorization: ok.then_some(f),
            certificate: if ok {
                vec![]
            } else {
                vec!["expansion J - (c.gradJ)theta is nonzero".into()]
            },
            form_rank,
        };
    }
    let (d1, d2) = (cfg.dims[0] as i64, cfg.dims[1] as i64);
    let k = r + 1;
    let certificate = vec![
        format!("p1^2: 1/{d1} = (2*c1/{d1} + c{k})*t1"),
        format!("p1*p2: 0 = (2*c1/{d1} + c{k})*t2 + (2*c2/{d2} + c{k})*t1"),
        format!("p2^2: 1/{d2} = (2*c2/{d2} + c{k})*t2"),
        format!("combined: 0 = t2^2/{d1} + t1^2/{d2} with t1, t2 nonzero"),
    ];
    FactorizationResult {
        r,
        feasible: false,
        factorization: None,
        certificate,
        form_rank,
    }
}

fn mono(nv: usize, i: usize) -> Vec<u32> {
    let mut m = vec![0; nv];
    m[i] = 1;
    m
}

#[derive(Clone, Debug, PartialEq)]
pub struct GFIReport {
    pub r: usize,
    pub bracket: ExpPoly<Surd>,
    pub phi: Option<ExpPoly<Surd>>,
    pub is_gfi: bool,
}

#[derive(Serialize)]
pub struct GFIReportJson {
    pub bracket: String,
    pub phi: Option<String>,
    pub is_gfi: bool,
}

impl GFIReport {
    pub fn to_json(&self) -> GFIReportJson {
        GFIReportJson {
            bracket: self.bracket.render(),
            phi: self.phi.as_ref().map(|p| p.render()),
            is_gfi: self.is_gfi,
        }
    }
}

/// Computes `{F, H}` and tries to write it as `ΦH` exactly.
pub fn verify_gfi(cfg: &Configuration, f: &ExpPoly<Surd>) -> Result<GFIReport> {
    if f.r() != cfg.r() {
        return Err(Error::Dimension {
            expected: cfg.r(),
            got: f.r(),
        });
    }
    let h = hamiltonian(cfg).map_coeffs(|c| Surd::from_rat(c.clone()));
    let bracket = f.poisson(&h);
    let phi = bracket.divides_into(&h);
    Ok(GFIReport {
        r: cfg.r(),
        is_gfi: phi.is_some(),
        bracket,
        phi,
    })
}

/// `J e^{c·q} − E e^{(c+d)·q} − Σ_w A_w e^{(c+d+w)·q}` with `c = (1 − n, 1)` for `r = 1`.
pub fn bryant_difference_integral(cfg: &Configuration) -> Result<ExpPoly<Rat>> {
    if cfg.r() != 1 {
        return Err(Error::Parameter("requires r = 1".into()));
    }
    let n = cfg.n() as i64;
    let c = vec![int(1 - n), int(1)];
    let d = cfg.d_ext();
    let cd: Vec<Rat> = c.iter().zip(&d).map(|(a, b)| a + b).collect();
    let mut f = ExpPoly::zero(1);
    f.add_term(c, j_poly(cfg));
    f.add_term(cd.clone(), Poly::constant(4, -cfg.e.clone()));
    for (w, a) in &cfg.weights {
        let b: Vec<Rat> = cd.iter().zip(w.extended()).map(|(x, y)| x + y).collect();
        f.add_term(b, Poly::constant(4, -a.clone()));
    }
    Ok(f)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwoVectorExponents {
    pub n: u64,
    /// `d·∇θ`.
    pub d_dot_grad_theta: Surd,
    /// `(d + w)·∇θ`.
    pub dw_dot_grad_theta: Surd,
    pub s_prime: Rat,
    /// `s = √n/(√n − 1) = (n + √n)/(n − 1)`.
    pub s: Surd,
    pub integral_s: bool,
}

#[derive(Serialize)]
pub struct TwoVectorJson {
    pub n: u64,
    pub d_dot_grad_theta: String,
    pub dw_dot_grad_theta: String,
    pub s_prime: String,
    pub s: String,
    pub integral_s: bool,
}

impl TwoVectorExponents {
    pub fn to_json(&self) -> TwoVectorJson {
        TwoVectorJson {
            n: self.n,
            d_dot_grad_theta: self.d_dot_grad_theta.to_string(),
            dw_dot_grad_theta: self.dw_dot_grad_theta.to_string(),
            s_prime: fmt_rat(&self.s_prime),
            s: self.s.to_string(),
            integral_s: self.integral_s,
        }
    }
}

/// Exponents for `r = 1`, `W̃ = {0, (−1, 0)}` with `θ` from [`factor_j`].
pub fn two_vector_exponents(n: u64) -> Result<TwoVectorExponents> {
    if n < 2 {
        return Err(Error::Parameter(
            "two_vector_exponents requires n >= 2".into(),
        ));
    }
    let cfg = Configuration::new(
        vec![n],
        vec![(vec![-1], int((n * (n - 1)) as i64))],
        Rat::zero(),
        Rat::zero(),
    )?;
    let fac = factor_j(&cfg).factorization.expect("r = 1 factorises");
    let grad: Vec<Surd> = (0..2)
        .map(|i| fac.theta.coeff(&mono(4, p_var(1, i))))
        .collect();
    let dot = |v: &[Rat]| {
        grad.iter()
            .zip(v)
            .fold(Surd::zero(), |acc, (g, x)| acc + g.scale(x))
    };
    let d = cfg.d_ext();
    let dw = vec![&d[0] - int(1), d[1].clone()];
    let a = dot(&d);
    let b = dot(&dw);
    let s_prime = (-a.clone())
        .inverse()
        .and_then(|x| x.as_rational())
        .expect("d.grad(theta) = -1");
    let s = (-b.clone()).inverse().expect("nonzero");
    let integral_s = s
        .as_rational()
        .is_some_and(|v| v.is_integer() && v > Rat::zero());
    debug_assert_eq!(is_square(&int(n as i64)), s.is_rational());
    Ok(TwoVectorExponents {
        n,
        d_dot_grad_theta: a,
        dw_dot_grad_theta: b,
        s_prime,
        s,
        integral_s,
    })
}
