use std::time::Instant;

use cohomflow::ode_flow::*;
use cohomflow::rational::{int, rat};
use cohomflow::superpotential::{search, SearchOptions};
use cohomflow::weight_config::{catalog_entry, Configuration};

const PAIRS: [(i64, i64); 3] = [(4, 8), (4, 1), (4, 32)];

fn cfg(l: i64, e: i64) -> Configuration {
    case5_config(int(l), int(e), rat(-1, 2)).unwrap()
}

#[test]
fn s_system_reproduces_the_linear_solution() {
    let start = Instant::now();
    for (l, e) in PAIRS {
        let st = singular_start_case5(&cfg(l, e), DEFAULT_S0).unwrap();
        let tr = integrate_case5_s(&st, 10.0, &IntegratorOptions::default()).unwrap();
        assert!(tr.truncated.is_none());
        assert_eq!(tr.last().0, 10.0);
        let (l, e) = (l as f64, e as f64);
        for (s, y) in &tr.samples {
            let want = [*s, s + 2.0 * l / e, -e * s / l];
            for k in 0..3 {
                assert!(
                    (y[k] - want[k]).abs() <= 1e-8 * want[k].abs(),
                    "s={s} k={k}"
                );
            }
        }
        // u strictly decreasing
        assert!(tr.samples.windows(2).all(|w| w[1].1[2] < w[0].1[2]));
    }
    assert!(start.elapsed().as_secs_f64() < 5.0);
}

#[test]
fn t_quadrature_matches_closed_form() {
    for (l, e) in PAIRS {
        for s in [0.1, 1.0, 10.0] {
            let (l, e) = (l as f64, e as f64);
            let a = t_of_s(s, l, e);
            let b = t_of_s_quadrature(s, l, e, 1e-13);
            assert!((a - b).abs() < 1e-10, "λ={l} E={e} s={s}: {a} vs {b}");
        }
    }
}

#[test]
fn t_coordinate_flow_matches_closed_form() {
    let c = cfg(4, 8);
    let f = case5_ansatz(&c).unwrap();
    let rhs = build_rhs(&c, &f).unwrap();
    let st = singular_start_case5(&c, 1e-3).unwrap();
    let (t0, q0) = st.in_t();
    let t1 = t_of_s(5.0, 4.0, 8.0);
    let tr = rhs
        .integrate(&q0, t0, t1, &IntegratorOptions::default())
        .unwrap();
    let (_, q) = tr.last();
    assert!((q[1].exp() - 5.0).abs() < 1e-8 * 5.0);
    assert!((q[2].exp() - 6.0).abs() < 1e-8 * 6.0);
    assert!((q[3] + 10.0).abs() < 1e-8 * 10.0);
}

fn endpoint_error(tol: f64) -> f64 {
    let c = cfg(4, 8);
    let rhs = build_rhs(&c, &case5_ansatz(&c).unwrap()).unwrap();
    let st = singular_start_case5(&c, 1e-3).unwrap();
    let (t0, q0) = st.in_t();
    let tr = rhs
        .integrate(
            &q0,
            t0,
            t_of_s(5.0, 4.0, 8.0),
            &IntegratorOptions::with_tol(tol),
        )
        .unwrap();
    let q = &tr.last().1;
    (q[1].exp() - 5.0)
        .abs()
        .max((q[2].exp() - 6.0).abs())
        .max((q[3] + 10.0).abs())
}

#[test]
fn tighter_tolerance_converges() {
    // Per-step error control gives global error ~ tol^0.8, so a factor 4 in tol
    // buys at least a factor 2 in accuracy.
    let mut tol = 1e-8;
    let mut prev = endpoint_error(tol);
    while tol > 2e-11 {
        assert!(
            endpoint_error(tol / 2.0) < prev,
            "halving tol must reduce the error"
        );
        tol /= 4.0;
        let e = endpoint_error(tol);
        assert!(e * 2.0 <= prev, "tol={tol}: {e} vs {prev}");
        prev = e;
    }
}

#[test]
fn reconstructed_momenta_keep_h_small() {
    let c = cfg(4, 8);
    let rhs = build_rhs(&c, &case5_ansatz(&c).unwrap()).unwrap();
    let st = singular_start_case5(&c, 1e-3).unwrap();
    let (t0, q0) = st.in_t();
    let tol = 1e-10;
    let mut tr = rhs
        .integrate(
            &q0,
            t0,
            t_of_s(5.0, 4.0, 8.0),
            &IntegratorOptions::with_tol(tol),
        )
        .unwrap();
    rhs.annotate(&mut tr);
    assert!(tr.max_abs_hamiltonian_scaled() < 10.0 * tol);
}

#[test]
fn full_flow_conservation_case5() {
    let c = cfg(4, 8);
    let f = case5_ansatz(&c).unwrap();
    let st = singular_start_case5(&c, 1e-3).unwrap();
    let (t0, q0) = st.in_t();
    let span = (t0, t_of_s(5.0, 4.0, 8.0));
    let tr = full_flow_check(&c, &f, &q0, span, &IntegratorOptions::default(), None).unwrap();
    assert!(tr.max_abs_hamiltonian_scaled() < 1e-8);
    assert!(tr.max_graph_defect_rel() < 1e-7);
    let bad = full_flow_check(
        &c,
        &f,
        &q0,
        span,
        &IntegratorOptions::default(),
        Some(&[1e-3; 4]),
    )
    .unwrap();
    assert!(bad.max_abs_hamiltonian_scaled() > 1e-8);
    assert!(bad.max_graph_defect_rel() > 1e-7);
}

#[test]
fn full_flow_conservation_bryant5() {
    let entry = catalog_entry("bryant5").unwrap();
    let f = search(&entry.config, &SearchOptions::default())
        .unwrap()
        .found
        .remove(0);
    let opts = IntegratorOptions::default();
    let tr = full_flow_check(&entry.config, &f, &[0.0, 0.0], (0.0, 3.0), &opts, None).unwrap();
    assert!(tr.max_abs_hamiltonian() < 1e-8);
    assert!(tr.max_abs_hamiltonian_scaled() < 1e-8);
    assert!(tr.max_graph_defect() < 1e-7);
    let bad = full_flow_check(
        &entry.config,
        &f,
        &[0.0, 0.0],
        (0.0, 3.0),
        &opts,
        Some(&[1e-3, 1e-3]),
    )
    .unwrap();
    assert!(bad.max_abs_hamiltonian() > 1e-8);
    assert!(bad.max_graph_defect() > 1e-7);
    // the defect does not decay back to zero
    let last = bad.diagnostics.last().unwrap();
    assert!(last.graph_defect > 1e-7);
}

#[test]
fn time_translation_invariance() {
    let c = cfg(4, 8);
    let rhs = build_rhs(&c, &case5_ansatz(&c).unwrap()).unwrap();
    let st = singular_start_case5(&c, 1e-2).unwrap();
    let (t0, q0) = st.in_t();
    let opts = IntegratorOptions::default();
    let full = rhs.integrate(&q0, t0, 3.0, &opts).unwrap();
    let mid = full.samples[full.samples.len() / 2].clone();
    let tail = rhs.integrate(&mid.1, 0.0, 3.0 - mid.0, &opts).unwrap();
    let (a, b) = (&full.last().1, &tail.last().1);
    for k in 0..4 {
        assert!((a[k] - b[k]).abs() < 1e-8 * (1.0 + a[k].abs()));
    }
}

#[test]
fn zero_ansatz_gives_constant_flow() {
    // ansätze are never empty, so the zero field goes straight to the integrator
    let tr = integrate(
        |_, y| vec![0.0; y.len()],
        &[0.5, -1.0],
        0.0,
        2.0,
        &IntegratorOptions::default(),
    )
    .unwrap();
    assert!(tr.samples.iter().all(|(_, y)| y == &vec![0.5, -1.0]));
}

#[test]
fn singular_start_examples() {
    let c = cfg(4, 8);
    let st = singular_start_case5(&c, 1.0).unwrap();
    assert!((st.alpha - 1.0).abs() < 1e-15);
    assert_eq!((st.beta1, st.beta2), (1.0, 2.0));
    assert!(singular_start_with(&c, 0.0, 0.0, 1e-6).is_err());
    assert!(singular_start_with(&c, 1.0, 0.0, 1e-6).is_err());
    let bad = case5_config(int(4), int(-1), rat(-1, 2)).unwrap();
    assert!(singular_start_case5(&bad, 1e-6).is_err());
}

#[test]
fn reparametrised_samples_increase() {
    let st = singular_start_case5(&cfg(4, 8), DEFAULT_S0).unwrap();
    let tr = integrate_case5_s(&st, 10.0, &IntegratorOptions::default()).unwrap();
    let tt = reparametrize_t(&tr, 4.0, 8.0).unwrap();
    assert!(tt.samples.windows(2).all(|w| w[1].0 > w[0].0));
}

#[test]
fn csv_header() {
    let st = singular_start_case5(&cfg(4, 8), DEFAULT_S0).unwrap();
    let tr = integrate_case5_s(&st, 1.0, &IntegratorOptions::default()).unwrap();
    assert!(tr.to_csv(2).starts_with("t,q1,q2,u,H,graph_defect\n"));
}
