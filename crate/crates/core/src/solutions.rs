//! Closed-form and reference solutions, and the smoothness test at the singular orbit.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ode_flow::{integrate, t_of_s, IntegratorOptions, Trajectory};

/// The case-5 soliton with `λ = 4`:
/// `f = (λ/√(−2AE)) (1 + 2λ/(Es))^{−1/2}`, `g₁ = √s`, `g₂ = √(s + 2λ/E)`, `u = u₀ − Es/λ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosedFormCase5 {
    pub e: f64,
    pub lambda: f64,
    pub a: f64,
    /// Additive gauge of the soliton potential.
    pub u0: f64,
    /// Euler class coefficients `(b₁, b₂)` of the circle bundle; metadata only.
    pub euler_class: (i32, i32),
}

/// Case 5 with `E` given, `A = −1/2` and `u(0) = 0`.
pub fn explicit_case5(e: f64) -> Result<ClosedFormCase5> {
    explicit_case5_with(e, -0.5, 0.0)
}

pub fn explicit_case5_with(e: f64, a: f64, u0: f64) -> Result<ClosedFormCase5> {
    if !(e > 0.0 && e.is_finite()) {
        return Err(Error::Parameter("E must be positive".into()));
    }
    if !(a < 0.0 && a.is_finite()) {
        return Err(Error::Parameter("A must be negative".into()));
    }
    Ok(ClosedFormCase5 {
        e,
        lambda: 4.0,
        a,
        u0,
        euler_class: (-1, -1),
    })
}

impl ClosedFormCase5 {
    pub fn t_of_s(&self, s: f64) -> f64 {
        t_of_s(s, self.lambda, self.e)
    }

    /// Inverse of `t(s)`, by bisection and Newton in `w = √s`.
    pub fn s_of_t(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let c = 2.0 * self.lambda / self.e;
        let k = 2.0 * self.e.sqrt() / self.lambda;
        let tw = |w: f64| self.t_of_s(w * w);
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        while tw(hi) < t {
            lo = hi;
            hi *= 2.0;
        }
        let mut w = 0.5 * (lo + hi);
        for _ in 0..200 {
            let g = tw(w) - t;
            if g > 0.0 {
                hi = w;
            } else {
                lo = w;
            }
            // dt/dw = (2√E/λ) √(w² + 2λ/E)
            let step = g / (k * (w * w + c).sqrt());
            let mut next = w - step;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - w).abs() <= 1e-16 * (1.0 + w) {
                w = next;
                break;
            }
            w = next;
        }
        w * w
    }

    pub fn f_of_s(&self, s: f64) -> f64 {
        self.lambda
            / (-2.0 * self.a * self.e).sqrt()
            / (1.0 + 2.0 * self.lambda / (self.e * s)).sqrt()
    }

    pub fn f(&self, t: f64) -> f64 {
        self.f_of_s(self.s_of_t(t))
    }

    pub fn g1(&self, t: f64) -> f64 {
        self.s_of_t(t).sqrt()
    }

    pub fn g2(&self, t: f64) -> f64 {
        (self.s_of_t(t) + 2.0 * self.lambda / self.e).sqrt()
    }

    pub fn u(&self, t: f64) -> f64 {
        self.u0 - self.e * self.s_of_t(t) / self.lambda
    }

    /// `(β₁, β₂, u)` of the linear solution at `s`.
    pub fn s_state(&self, s: f64) -> [f64; 3] {
        [
            s,
            s + 2.0 * self.lambda / self.e,
            self.u0 - self.e * s / self.lambda,
        ]
    }

    /// CSV `t,f,g1,g2,u` at the given times.
    pub fn sample_csv(&self, ts: &[f64]) -> String {
        let mut out = String::from("t,f,g1,g2,u\n");
        for &t in ts {
            out.push_str(&format!(
                "{t:.17e},{:.17e},{:.17e},{:.17e},{:.17e}\n",
                self.f(t),
                self.g1(t),
                self.g2(t),
                self.u(t)
            ));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FunctionFit {
    pub name: String,
    /// Taylor coefficients `c₀..c₃` at `t = 0`.
    pub coefficients: [f64; 4],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmoothnessCheck {
    pub name: String,
    pub value: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmoothnessReport {
    pub fits: Vec<FunctionFit>,
    pub checks: Vec<SmoothnessCheck>,
    pub pass: bool,
}

impl SmoothnessReport {
    pub fn check(&self, name: &str) -> Option<&SmoothnessCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub const SMOOTHNESS_STEPS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];
pub const SMOOTHNESS_TOL: f64 = 1e-4;

/// Cubic through `(kh, g(kh))`, `k = 1..4`, as Taylor coefficients at 0.
fn cubic_fit(g: &dyn Fn(f64) -> f64, h: f64) -> Result<[f64; 4]> {
    let mut a = [[0.0; 4]; 4];
    let mut b = [0.0; 4];
    for k in 0..4 {
        let t = (k + 1) as f64 * h;
        let v = g(t);
        if !v.is_finite() {
            return Err(Error::Parameter(format!("evaluator not finite at t={t}")));
        }
        for (j, x) in a[k].iter_mut().enumerate() {
            *x = t.powi(j as i32);
        }
        b[k] = v;
    }
    // Gaussian elimination; the system is tiny and well scaled after dividing columns by h^j.
    for (j, col_scale) in (0..4).map(|j| (j, h.powi(j as i32))) {
        for row in a.iter_mut() {
            row[j] /= col_scale;
        }
    }
    for col in 0..4 {
        let p = (col..4)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, p);
        b.swap(col, p);
        for i in col + 1..4 {
            let f = a[i][col] / a[col][col];
            for j in col..4 {
                a[i][j] -= f * a[col][j];
            }
            b[i] -= f * b[col];
        }
    }
    let mut x = [0.0; 4];
    for i in (0..4).rev() {
        let s: f64 = (i + 1..4).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    for (j, v) in x.iter_mut().enumerate() {
        *v /= h.powi(j as i32);
    }
    Ok(x)
}

/// Richardson-extrapolated Taylor coefficients from cubic fits at the three steps.
pub fn taylor_fit(g: &dyn Fn(f64) -> f64) -> Result<[f64; 4]> {
    let fits: Vec<[f64; 4]> = SMOOTHNESS_STEPS
        .iter()
        .map(|&h| cubic_fit(g, h))
        .collect::<Result<_>>()?;
    let mut out = [0.0; 4];
    for (j, o) in out.iter_mut().enumerate() {
        let p = (4 - j) as i32;
        let r1 = |a: f64, b: f64, p: i32| {
            let k = 2f64.powi(p);
            (k * b - a) / (k - 1.0)
        };
        let e1 = r1(fits[0][j], fits[1][j], p);
        let e2 = r1(fits[1][j], fits[2][j], p);
        *o = r1(e1, e2, p + 1);
    }
    Ok(out)
}

fn check(name: &str, value: f64, expected: f64) -> SmoothnessCheck {
    SmoothnessCheck {
        name: name.into(),
        value,
        expected,
        tolerance: SMOOTHNESS_TOL,
        pass: (value - expected).abs() <= SMOOTHNESS_TOL,
    }
}

/// Vanishing of the odd/even Taylor coefficients through order 2 and the first-derivative values.
pub fn smoothness_check(sol: &ClosedFormCase5) -> Result<SmoothnessReport> {
    let f = taylor_fit(&|t| sol.f(t))?;
    let g1 = taylor_fit(&|t| sol.g1(t))?;
    let g2 = taylor_fit(&|t| sol.g2(t))?;
    let u = taylor_fit(&|t| sol.u(t) - sol.u0)?;
    let checks = vec![
        check("f(0)", f[0], 0.0),
        check("f'(0)", f[1], 1.0),
        check("f''(0)", 2.0 * f[2], 0.0),
        check("g1(0)", g1[0], 0.0),
        check("g1'(0)^2", g1[1] * g1[1], 0.5),
        check("g1''(0)", 2.0 * g1[2], 0.0),
        check("g2'(0)", g2[1], 0.0),
        check("u(0)", u[0], 0.0),
        check("u'(0)", u[1], 0.0),
    ];
    let fits = vec![
        FunctionFit {
            name: "f".into(),
            coefficients: f,
        },
        FunctionFit {
            name: "g1".into(),
            coefficients: g1,
        },
        FunctionFit {
            name: "g2".into(),
            coefficients: g2,
        },
        FunctionFit {
            name: "u".into(),
            coefficients: u,
        },
    ];
    let pass = checks.iter().all(|c| c.pass);
    Ok(SmoothnessReport { fits, checks, pass })
}

/// The `n = 1` flow `ḣ = −(a/2)h² + (1/2a)(λu + E − 2λ)`, `u̇ = −ah` from `h(0) = 0`, `u(0) = u₀`.
#[derive(Clone, Debug)]
pub struct BryantN1 {
    pub a: f64,
    pub e: f64,
    pub lambda: f64,
    /// Samples `(t, [h, u])`.
    pub trajectory: Trajectory,
    /// Largest deviation in `(h, ḣ)` between consecutive samples of this flow and
    /// `ḧ + aḣh + (λ/2)h = 0` restarted from the earlier sample.
    pub second_order_residual: f64,
}

pub fn bryant_n1_rhs(a: f64, e: f64, lambda: f64) -> impl Fn(f64, &[f64]) -> Vec<f64> {
    move |_, y| {
        vec![
            -0.5 * a * y[0] * y[0] + (lambda * y[1] + e - 2.0 * lambda) / (2.0 * a),
            -a * y[0],
        ]
    }
}

pub fn bryant_n1(
    a: f64,
    e: f64,
    lambda: f64,
    t_max: f64,
    opts: &IntegratorOptions,
) -> Result<BryantN1> {
    bryant_n1_with(a, e, lambda, 0.0, t_max, opts)
}

pub fn bryant_n1_with(
    a: f64,
    e: f64,
    lambda: f64,
    u0: f64,
    t_max: f64,
    opts: &IntegratorOptions,
) -> Result<BryantN1> {
    if a == 0.0 || !a.is_finite() {
        return Err(Error::Parameter("a must be nonzero".into()));
    }
    let first = bryant_n1_rhs(a, e, lambda);
    let trajectory = integrate(&first, &[0.0, u0], 0.0, t_max, opts)?;
    let second = |_: f64, y: &[f64]| vec![y[1], -a * y[1] * y[0] - 0.5 * lambda * y[0]];
    let mut residual: f64 = 0.0;
    for w in trajectory.samples.windows(2) {
        let ((ta, ya), (tb, yb)) = (&w[0], &w[1]);
        let hd_a = first(*ta, ya)[0];
        let hd_b = first(*tb, yb)[0];
        let local = integrate(second, &[ya[0], hd_a], *ta, *tb, opts)?;
        let y2 = &local.last().1;
        residual = residual
            .max((y2[0] - yb[0]).abs())
            .max((y2[1] - hd_b).abs());
    }
    Ok(BryantN1 {
        a,
        e,
        lambda,
        trajectory,
        second_order_residual: residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        let sol = explicit_case5(8.0).unwrap();
        assert!((sol.t_of_s(1.0) - 1.623225).abs() < 1e-6);
        let t = sol.t_of_s(1.0);
        assert!((sol.g1(t) - 1.0).abs() < 1e-12);
        assert!((sol.g2(t) - 2f64.sqrt()).abs() < 1e-12);
        assert!((sol.u(t) + 2.0).abs() < 1e-12);
        assert!(explicit_case5(0.0).is_err());
    }

    #[test]
    fn round_trip_inversion() {
        let sol = explicit_case5(8.0).unwrap();
        for &t in &[1e-3, 0.1, 1.0, 10.0] {
            assert!((sol.t_of_s(sol.s_of_t(t)) - t).abs() < 1e-10 * (1.0 + t));
        }
    }

    #[test]
    fn zero_a_rejected() {
        assert!(bryant_n1(0.0, 1.0, 0.0, 1.0, &IntegratorOptions::default()).is_err());
    }
}
