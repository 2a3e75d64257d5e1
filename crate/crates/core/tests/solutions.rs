use cohomflow::ode_flow::*;
use cohomflow::rational::{int, rat};
use cohomflow::solutions::*;
use cohomflow::superpotential::SuperpotentialAnsatz;
use cohomflow::weight_config::Configuration;
use cohomflow::RadicalScalar;

#[test]
fn smoothness_passes_at_a_minus_half() {
    for e in [1.0, 8.0, 32.0] {
        let rep = smoothness_check(&explicit_case5(e).unwrap()).unwrap();
        assert!(rep.pass, "E={e}: {:?}", rep.checks);
        assert!((rep.check("f'(0)").unwrap().value - 1.0).abs() < 1e-4);
        assert!((rep.check("g1'(0)^2").unwrap().value - 0.5).abs() < 1e-4);
    }
}

#[test]
fn smoothness_fails_fdot_at_a_minus_one() {
    let rep = smoothness_check(&explicit_case5_with(8.0, -1.0, 0.0).unwrap()).unwrap();
    assert!(!rep.pass);
    let fd = rep.check("f'(0)").unwrap();
    assert!(!fd.pass);
    assert!((fd.value - 0.5f64.sqrt()).abs() < 1e-4);
    assert!(rep
        .checks
        .iter()
        .filter(|c| c.name != "f'(0)")
        .all(|c| c.pass));
}

#[test]
fn taylor_fit_oracle() {
    // exact cubic plus a quartic tail
    let c = taylor_fit(&|t: f64| 0.3 - 1.2 * t + 0.5 * t * t + 2.0 * t.powi(3) + 7.0 * t.powi(4))
        .unwrap();
    for (got, want) in c.iter().zip([0.3, -1.2, 0.5, 2.0]) {
        assert!((got - want).abs() < 1e-6, "{got} vs {want}");
    }
    let s = taylor_fit(&f64::sin).unwrap();
    assert!((s[1] - 1.0).abs() < 1e-9 && s[2].abs() < 1e-8 && (s[3] + 1.0 / 6.0).abs() < 1e-5);
}

#[test]
fn closed_form_examples() {
    let sol = explicit_case5(8.0).unwrap();
    let t = sol.t_of_s(1.0);
    assert!((t - (1.0 + (1.0 + 2f64.sqrt()).ln() / 2f64.sqrt())).abs() < 1e-12);
    assert!((sol.g1(t) - 1.0).abs() < 1e-10);
    assert!((sol.g2(t) - 2f64.sqrt()).abs() < 1e-10);
    assert!((sol.u(t) + 2.0).abs() < 1e-10);
    // s → ∞: f → λ/√(−2AE) = 4/√E at A = −1/2; s → 0: g₂ → √(8/E)
    assert!((sol.f_of_s(1e12) - 4.0 / 8f64.sqrt()).abs() < 1e-10);
    assert!((sol.g2(1e-9) - 1.0).abs() < 1e-12);
    assert!(explicit_case5(-1.0).is_err());
    assert_eq!(sol.euler_class, (-1, -1));
}

#[test]
fn round_trip_and_monotonicity() {
    let sol = explicit_case5(8.0).unwrap();
    let mut t = 1e-3;
    while t <= 10.0 {
        assert!((sol.t_of_s(sol.s_of_t(t)) - t).abs() < 1e-10);
        t *= 1.37;
    }
    let mut prev = 0.0;
    let mut s = 1e-6;
    while s <= 1e6 {
        let t = sol.t_of_s(s);
        assert!(t > prev);
        prev = t;
        s *= 3.0;
    }
    assert!(prev > 1e3);
}

#[test]
fn closed_form_solves_the_s_system() {
    for e in [1.0, 8.0, 32.0] {
        let sol = explicit_case5(e).unwrap();
        let rhs = case5_s_rhs(sol.lambda, e);
        for s in [1e-3, 0.1, 1.0, 7.5] {
            let y = sol.s_state(s);
            let dy = rhs(s, &y);
            let want = [1.0, 1.0, -e / sol.lambda];
            for k in 0..3 {
                assert!(
                    (dy[k] - want[k]).abs() < 1e-10 * (1.0 + want[k].abs()),
                    "E={e} s={s} k={k}"
                );
            }
        }
    }
}

#[test]
fn closed_form_u_matches_integration() {
    let cfg = case5_config(int(4), int(8), rat(-1, 2)).unwrap();
    let st = singular_start_case5(&cfg, DEFAULT_S0).unwrap();
    let tr = integrate_case5_s(&st, 10.0, &IntegratorOptions::default()).unwrap();
    let sol = explicit_case5(8.0).unwrap();
    for (s, y) in &tr.samples {
        let u = sol.u(sol.t_of_s(*s));
        assert!((y[2] - u).abs() <= 1e-8 * u.abs(), "s={s}");
    }
}

#[test]
fn bryant_n1_residual_and_sign() {
    let opts = IntegratorOptions::default();
    for (a, e, l) in [
        (1.0, 2.0, 0.0),
        (1.0, 1.0, 1.0),
        (2.0, 3.0, 1.0),
        (-0.5, 5.0, 2.0),
    ] {
        let sol = bryant_n1(a, e, l, 10.0, &opts).unwrap();
        assert!(sol.trajectory.truncated.is_none());
        assert!(
            sol.second_order_residual < 1e-8,
            "{a} {e} {l}: {}",
            sol.second_order_residual
        );
        // ḣ(0) = (E − 2λ)/(2a)
        let hd0 = bryant_n1_rhs(a, e, l)(0.0, &[0.0, 0.0])[0];
        assert_eq!(hd0, (e - 2.0 * l) / (2.0 * a));
    }
    let up = bryant_n1_rhs(1.0, 3.0, 1.0)(0.0, &[0.0, 0.0])[0];
    let down = bryant_n1_rhs(1.0, 1.0, 1.0)(0.0, &[0.0, 0.0])[0];
    assert!(up > 0.0 && down < 0.0);
    assert!(bryant_n1(0.0, 1.0, 1.0, 1.0, &opts).is_err());
}

#[test]
fn bryant_n1_steady_matches_superpotential_flow() {
    // λ = 0: f = a e^{q−u} + (E/a) e^{−u}, integrated in q = 2 ln h away from h = 0
    let (a, e) = (1.0, 2.0);
    let opts = IntegratorOptions::default();
    let sol = bryant_n1(a, e, 0.0, 3.0, &opts).unwrap();
    let k = sol
        .trajectory
        .samples
        .iter()
        .position(|(t, _)| *t >= 1.0)
        .unwrap();
    let (t1, y1) = sol.trajectory.samples[k].clone();
    let cfg = Configuration::new(vec![1], vec![], int(2), int(0)).unwrap();
    let f = SuperpotentialAnsatz::constant(vec![
        (vec![int(1), int(-1)], RadicalScalar::from_rat(&int(1))),
        (vec![int(0), int(-1)], RadicalScalar::from_rat(&int(2))),
    ])
    .unwrap();
    let rhs = build_rhs(&cfg, &f).unwrap();
    let tr = rhs
        .integrate(&[2.0 * y1[0].ln(), y1[1]], t1, 3.0, &opts)
        .unwrap();
    let q = &tr.last().1;
    let y = &sol.trajectory.last().1;
    assert!(((q[0] / 2.0).exp() - y[0]).abs() < 1e-8);
    assert!((q[1] - y[1]).abs() < 1e-8);
}

#[test]
fn sample_csv_shape() {
    let csv = explicit_case5(8.0).unwrap().sample_csv(&[0.5, 1.0]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,f,g1,g2,u");
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[1].split(',').count(), 5);
}
