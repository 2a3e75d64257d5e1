use cohomflow::exact_geometry::lp;
use cohomflow::exp_poly::{hamiltonian, j_poly, var_names, ExpPoly};
use cohomflow::first_integrals::{
    bryant_difference_integral, factor_j, factorization_defect, two_vector_exponents, verify_gfi,
};
use cohomflow::poly::Poly;
use cohomflow::rational::{int, rat, Rat};
use cohomflow::weight_config::{catalog_entry, Configuration};
use cohomflow::Surd;

fn surd(f: &ExpPoly<Rat>) -> ExpPoly<Surd> {
    f.map_coeffs(|c| Surd::from_rat(c.clone()))
}

fn single(n: u64) -> Configuration {
    Configuration::new(vec![n], vec![], int(1), int(0)).unwrap()
}

#[test]
fn factorisation_identity_for_every_small_n() {
    for n in 1..=12 {
        let cfg = single(n);
        let res = factor_j(&cfg);
        assert!(res.feasible, "n={n}");
        assert!(factorization_defect(&cfg, res.factorization.as_ref().unwrap()).is_zero());
    }
}

#[test]
fn factorisation_examples() {
    // n = 4: c = (-3, 1), θ = -(p/2 + φ/2)
    let res = factor_j(&single(4));
    let f = res.factorization.unwrap();
    assert_eq!(f.c, vec![Surd::from_rat(int(-3)), Surd::from_rat(int(1))]);
    assert_eq!(f.theta.render(&var_names(1)), "-1/2*p1 - 1/2*phi");
    // n = 1: c = (-1, 1), θ = -p
    let f = factor_j(&single(1)).factorization.unwrap();
    assert_eq!(f.c[0], Surd::from_rat(int(-1)));
    assert_eq!(f.theta.render(&var_names(1)), "-p1");
}

#[test]
fn no_factorisation_for_two_summands() {
    for d1 in 1..=6u64 {
        for d2 in 1..=6u64 {
            let cfg = Configuration::new(vec![d1, d2], vec![], int(1), int(0)).unwrap();
            let res = factor_j(&cfg);
            assert!(!res.feasible);
            assert_eq!(res.certificate.len(), 4);
            // independent oracle: a product of two linear forms has rank <= 2
            assert_eq!(lp::rank(cfg.jform().matrix()), 3);
            assert_eq!(res.form_rank, 3);
        }
    }
}

fn phi_lin(cp: Rat, cphi: Rat) -> ExpPoly<Surd> {
    let mut lin = Poly::zero(4);
    lin.add_term(vec![1, 0, 0, 0], Surd::from_rat(cp));
    lin.add_term(vec![0, 1, 0, 0], Surd::from_rat(cphi));
    let mut out = ExpPoly::zero(1);
    out.add_term(vec![int(-3), int(1)], lin);
    out
}

#[test]
fn bryant_n4_quotient() {
    let cfg = catalog_entry("bryant5").unwrap().config;
    let f = bryant_difference_integral(&cfg).unwrap();
    let rep = verify_gfi(&cfg, &surd(&f)).unwrap();
    assert!(rep.is_gfi);
    let phi = rep.phi.unwrap();
    // Φ = −∂J/∂p e^{−3q+u} with J = −(p²/4 + pφ + 3φ²/4)
    assert_eq!(phi, phi_lin(rat(1, 2), int(1)));
    assert_eq!(phi.num_terms(), 1);
    // −½(p + φ) e^{−3q+u} does not satisfy {F, H} = ΦH for this H
    let h = surd(&hamiltonian(&cfg));
    let other = phi_lin(rat(-1, 2), rat(-1, 2));
    assert!(!(&rep.bracket - &(&other * &h)).is_zero());
}

/// `{F, H}` by central differences of the numerical functions.
fn numeric_bracket(f: &ExpPoly<Rat>, h: &ExpPoly<Rat>, p: &[f64], q: &[f64]) -> f64 {
    let eps = 1e-5;
    let d = |g: &ExpPoly<Rat>, which: usize, i: usize| {
        let (mut pp, mut qq) = (p.to_vec(), q.to_vec());
        let v = if which == 0 { &mut pp } else { &mut qq };
        v[i] += eps;
        let hi = g.eval_f64(&pp, &qq);
        let v = if which == 0 { &mut pp } else { &mut qq };
        v[i] -= 2.0 * eps;
        let lo = g.eval_f64(&pp, &qq);
        (hi - lo) / (2.0 * eps)
    };
    (0..2)
        .map(|i| d(f, 1, i) * d(h, 0, i) - d(f, 0, i) * d(h, 1, i))
        .sum()
}

#[test]
fn bryant_n4_quotient_numeric_oracle() {
    let cfg = catalog_entry("bryant5").unwrap().config;
    let f = bryant_difference_integral(&cfg).unwrap();
    let h = hamiltonian(&cfg);
    for (p, q) in [
        ([0.3, -0.7], [0.2, 0.1]),
        ([1.1, 0.4], [-0.3, 0.5]),
        ([-0.6, 0.9], [0.05, -0.2]),
    ] {
        let num = numeric_bracket(&f, &h, &p, &q);
        let phi = (0.5 * p[0] + p[1]) * (-3.0 * q[0] + q[1]).exp();
        let want = phi * h.eval_f64(&p, &q);
        assert!(
            (num - want).abs() < 1e-6 * (1.0 + want.abs()),
            "{num} vs {want}"
        );
    }
}

#[test]
fn hamiltonian_is_trivially_a_gfi() {
    let cfg = catalog_entry("bbc-r2").unwrap().config;
    let h = surd(&hamiltonian(&cfg));
    let rep = verify_gfi(&cfg, &h).unwrap();
    assert!(rep.is_gfi);
    assert!(rep.bracket.is_zero());
    assert!(rep.phi.unwrap().is_zero());
}

#[test]
fn momentum_is_not_a_gfi() {
    let cfg = catalog_entry("bryant5").unwrap().config;
    let p1 = ExpPoly::<Surd>::var(1, 0);
    assert!(!verify_gfi(&cfg, &p1).unwrap().is_gfi);
}

#[test]
fn adding_multiples_of_h_keeps_the_verdict() {
    let cfg = catalog_entry("bryant5").unwrap().config;
    let h = hamiltonian(&cfg);
    let f = bryant_difference_integral(&cfg).unwrap();
    let p1 = ExpPoly::<Rat>::var(1, 0);
    for alpha in [rat(1, 3), int(-2), int(5)] {
        for g in [&f, &p1] {
            let shifted = g + &h.scale(&alpha);
            assert_eq!(
                verify_gfi(&cfg, &surd(g)).unwrap().is_gfi,
                verify_gfi(&cfg, &surd(&shifted)).unwrap().is_gfi
            );
        }
    }
}

#[test]
fn difference_integral_shape() {
    let cfg = catalog_entry("bryant5").unwrap().config;
    let f = bryant_difference_integral(&cfg).unwrap();
    assert_eq!(f.coefficient(&[int(-3), int(1)]), Some(&j_poly(&cfg)));
    assert_eq!(
        f.coefficient(&[int(1), int(-1)]).unwrap().as_constant(),
        Some(int(-1))
    );
    assert_eq!(
        f.coefficient(&[int(0), int(-1)]).unwrap().as_constant(),
        Some(int(-12))
    );
}

#[test]
fn two_vector_exponent_values() {
    let t = two_vector_exponents(9).unwrap();
    assert_eq!(t.s.as_rational(), Some(rat(3, 2)));
    assert!(!t.integral_s);
    let t = two_vector_exponents(2).unwrap();
    assert!(t.s.as_rational().is_none());
    assert!(!t.integral_s);
    // s = (n + √n)/(n − 1), compared in floating point
    for n in 2..=25u64 {
        let t = two_vector_exponents(n).unwrap();
        let sn = (n as f64).sqrt();
        assert!((t.s.to_f64() - sn / (sn - 1.0)).abs() < 1e-12);
        assert_eq!(t.d_dot_grad_theta, Surd::from_rat(int(-1)));
        assert!((t.dw_dot_grad_theta.to_f64() - (-1.0 + 1.0 / sn)).abs() < 1e-12);
        assert_eq!(t.integral_s, n == 4, "n={n}");
    }
}
