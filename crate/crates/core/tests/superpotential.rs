use std::time::Instant;

use cohomflow::exact_geometry::QVec;
use cohomflow::ode_flow::{case5_ansatz, case5_config};
use cohomflow::rational::{int, rat, rat_vec, Rat};
use cohomflow::superpotential::{
    ab_signature, check, half_shift, hamiltonian_on_graph, search, solve_coefficients, Coefficient,
    SearchOptions, SuperpotentialAnsatz,
};
use cohomflow::weight_config::{builtin_catalog, catalog_entry, CoefficientMode, Configuration};
use cohomflow::RadicalScalar;

fn opts(mode: CoefficientMode) -> SearchOptions {
    SearchOptions {
        mode,
        ..Default::default()
    }
}

fn hs(cfg: &Configuration, x: &[i64]) -> QVec {
    half_shift(cfg, &rat_vec(x))
}

fn constant(f: &SuperpotentialAnsatz, c: &QVec) -> RadicalScalar {
    match f.coefficient(c).expect("exponent present") {
        Coefficient::Constant(v) => v.clone(),
        other => panic!("expected a constant coefficient, got {other:?}"),
    }
}

#[test]
fn catalog_counts_match_the_classification() {
    for entry in builtin_catalog() {
        let start = Instant::now();
        let res = search(&entry.config, &opts(entry.mode)).unwrap();
        assert!(!res.partial, "{}", entry.name);
        assert_eq!(res.found.len(), entry.expected, "{}", entry.name);
        assert!(
            start.elapsed().as_secs() < 60,
            "{} took {:?}",
            entry.name,
            start.elapsed()
        );
    }
}

#[test]
fn classified_exponent_sets() {
    let warped = catalog_entry("warped-2x2").unwrap().config;
    let res = search(&warped, &SearchOptions::default()).unwrap();
    let mut want: Vec<QVec> = [[-1, -1, 0], [-1, 1, 0], [1, -1, 0]]
        .iter()
        .map(|x| hs(&warped, x))
        .collect();
    want.sort();
    assert_eq!(res.found[0].exponents(), want);

    let b5 = catalog_entry("bryant5").unwrap().config;
    let res = search(&b5, &SearchOptions::default()).unwrap();
    let mut want: Vec<QVec> = [[-2, 0], [0, 0]].iter().map(|x| hs(&b5, x)).collect();
    want.sort();
    assert_eq!(res.found[0].exponents(), want);

    let case5 = catalog_entry("bbc-case5").unwrap().config;
    let res = search(&case5, &SearchOptions::default()).unwrap();
    let f5 = case5_ansatz(&case5).unwrap();
    assert!(res.found.iter().any(|f| f.exponents() == f5.exponents()));
}

#[test]
fn non_steady_constant_runs_are_empty() {
    for name in ["bryant2", "bryant5", "warped-2x2", "bbc-r2"] {
        let cfg = catalog_entry(name).unwrap().config.with_lambda(int(1));
        let res = search(&cfg, &SearchOptions::default()).unwrap();
        assert!(res.found.is_empty(), "{name}");
    }
    let shrinking = catalog_entry("bryant2")
        .unwrap()
        .config
        .with_lambda(int(-1));
    assert!(search(&shrinking, &SearchOptions::default())
        .unwrap()
        .found
        .is_empty());
}

#[test]
fn superpotential_identity_holds_symbolically() {
    for entry in builtin_catalog() {
        let res = search(&entry.config, &opts(entry.mode)).unwrap();
        for f in &res.found {
            assert!(check(&entry.config, f).unwrap().satisfied, "{}", entry.name);
            assert!(
                hamiltonian_on_graph(&entry.config, f).unwrap().is_zero(),
                "{}",
                entry.name
            );
        }
    }
}

/// Case 5 with sphere coefficients `A₁ = A_(0,−1,0)`, `A₂ = A_(0,0,−1)`.
fn case5_general(a1: Rat, a2: Rat, ax: Rat, ay: Rat, e: Rat) -> Configuration {
    Configuration::new(
        vec![1, 2, 2],
        vec![
            (vec![0, -1, 0], a1),
            (vec![0, 0, -1], a2),
            (vec![1, 0, -2], ax),
            (vec![1, -2, 0], ay),
        ],
        e,
        int(0),
    )
    .unwrap()
}

fn case5_set(cfg: &Configuration) -> Vec<QVec> {
    [
        [0, -1, -1, 0],
        [0, 1, -1, 0],
        [0, -1, 1, 0],
        [1, 0, -2, 0],
        [1, -2, 0, 0],
    ]
    .iter()
    .map(|x| hs(cfg, x))
    .collect()
}

#[test]
fn case5_coefficients_exact() {
    // Pairings by hand with J(½(d+x), ½(d+y)) = ¼(1 − Σ x_i y_i / d_i):
    //   f_v f_u = 2A₂, f_{−v} f_u = 2A₁, f_v f_{−v} = E, and −½f_x² = A_x, −½f_y² = A_y,
    // so f_v = √(EA₂/A₁), f_{−v} = √(EA₁/A₂), f_u = (2/√E)√(A₁A₂) for v = (0,1,−1).
    let grid = [
        (int(4), int(9), rat(-1, 2), int(1)),
        (int(4), int(4), rat(-1, 2), int(1)),
        (int(1), int(2), rat(-1, 3), int(3)),
    ];
    for (a1, a2, ay, e) in grid {
        // A₂²/A_x = A₁²/A_y
        let ax = &ay * &a2 * &a2 / (&a1 * &a1);
        let cfg = case5_general(a1.clone(), a2.clone(), ax.clone(), ay.clone(), e.clone());
        let set = case5_set(&cfg);
        let f = solve_coefficients(&cfg, &set, CoefficientMode::Constant).unwrap();
        assert!(check(&cfg, &f).unwrap().satisfied);
        let (cu, cv, cmv, cx, cy) = (&set[0], &set[1], &set[2], &set[3], &set[4]);
        assert_eq!(constant(&f, cv), RadicalScalar::sqrt(1, &e * &a2 / &a1));
        assert_eq!(constant(&f, cmv), RadicalScalar::sqrt(1, &e * &a1 / &a2));
        assert_eq!(
            constant(&f, cu),
            RadicalScalar::sqrt(1, int(4) * &a1 * &a2 / &e)
        );
        let fx = constant(&f, cx);
        let fy = constant(&f, cy);
        assert_eq!(fx.radicand, int(-2) * &ax);
        assert_eq!(fy.radicand, int(-2) * &ay);
        assert_eq!(fx.sign, -fy.sign, "opposite-sign square roots");
    }
}

#[test]
fn catalog_case5_values() {
    // λ = 4, E = 1, A = −1/2: f_v = f_{−v} = 1, f_u = 8, f_x = ±1, f_y = ∓1
    let cfg = case5_config(int(4), int(1), rat(-1, 2)).unwrap();
    let f = case5_ansatz(&cfg).unwrap();
    assert!(check(&cfg, &f).unwrap().satisfied);
    let set = case5_set(&cfg);
    let vals: Vec<RadicalScalar> = set.iter().map(|c| constant(&f, c)).collect();
    let one = RadicalScalar::from_rat(&int(1));
    assert_eq!(vals[0], RadicalScalar::from_rat(&int(8)));
    assert_eq!(vals[1], one);
    assert_eq!(vals[2], one);
    assert_eq!(vals[3], one);
    assert_eq!(vals[4], one.neg());
    assert_eq!(ab_signature(&cfg, &set).unwrap(), (2, 1));
}

#[test]
fn case5_sign_flip_invariance() {
    let cfg = case5_config(int(4), int(1), rat(-1, 2)).unwrap();
    let f = case5_ansatz(&cfg).unwrap();
    let set = case5_set(&cfg);
    let flipped: Vec<(QVec, RadicalScalar)> = set
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let v = constant(&f, c);
            (c.clone(), if i >= 3 { v.neg() } else { v })
        })
        .collect();
    let g = SuperpotentialAnsatz::constant(flipped).unwrap();
    assert!(check(&cfg, &g).unwrap().satisfied);
}

#[test]
fn case5_requirement_violation_is_rejected() {
    let cfg = case5_general(int(4), int(4), rat(-1, 2), rat(-1, 4), int(1));
    let set = case5_set(&cfg);
    assert!(solve_coefficients(&cfg, &set, CoefficientMode::Constant).is_err());
    // the unperturbed coefficients now fail the check
    let good = case5_config(int(4), int(1), rat(-1, 2)).unwrap();
    let f = case5_ansatz(&good).unwrap();
    let rep = check(&cfg, &f).unwrap();
    assert!(!rep.satisfied);
    // A_(1,−2,0) enters only at b = d + (1,−2,0) = 2c_y
    let b: QVec = set[4].iter().map(|a| a + a).collect();
    assert_eq!(rep.violated_b, vec![b]);
    // nor does the full search find the case-5 set
    let res = search(&cfg, &SearchOptions::default()).unwrap();
    assert!(res.found.iter().all(|g| g.exponents() != f.exponents()));
}

#[test]
fn n1_family_is_satisfied() {
    // f = a e^{q−u} + (1/a)(λu + E − λ) e^{−u} with n = 1
    for (a, e, l) in [
        (int(1), int(1), int(1)),
        (int(2), int(3), rat(1, 2)),
        (rat(1, 3), int(1), int(-2)),
    ] {
        let cfg = Configuration::new(vec![1], vec![], e.clone(), l.clone()).unwrap();
        let f = SuperpotentialAnsatz::new(
            vec![
                (
                    rat_vec(&[1, -1]),
                    Coefficient::Constant(RadicalScalar::from_rat(&a)),
                ),
                (
                    rat_vec(&[0, -1]),
                    Coefficient::Affine {
                        u: RadicalScalar::from_rat(&(&l / &a)),
                        constant: RadicalScalar::from_rat(&((&e - &l) / &a)),
                    },
                ),
            ],
            false,
        )
        .unwrap();
        assert!(check(&cfg, &f).unwrap().satisfied);
        assert!(hamiltonian_on_graph(&cfg, &f).unwrap().is_zero());
    }
}

#[test]
fn bryant5_coefficients_by_hand() {
    // C = {c₁, c₂} = {½(d + (−2, 0)), ½d}; with J(c₂,c₂) = J(c₁,c₂) = ¼ the rows are
    // ¼f₂² = E and 2·¼·f₁f₂ = A, so f₂ = 2 and f₁ = 12 for E = 1, A = 12.
    let cfg = catalog_entry("bryant5").unwrap().config;
    let c1 = rat_vec(&[1, -1]);
    let c2 = rat_vec(&[2, -1]);
    let f = solve_coefficients(&cfg, &[c1.clone(), c2.clone()], CoefficientMode::Constant).unwrap();
    assert_eq!(constant(&f, &c2), RadicalScalar::from_rat(&int(2)));
    assert_eq!(constant(&f, &c1), RadicalScalar::from_rat(&int(12)));
}

#[test]
fn no_null_vertex_is_rejected() {
    // bryant5 with only the weight point ½(d + w̃): not null, E ≠ 0
    let cfg = catalog_entry("bryant5").unwrap().config;
    assert!(solve_coefficients(&cfg, &[rat_vec(&[1, -1])], CoefficientMode::Constant).is_err());
}
