//! Dormand–Prince 5(4) with a PI step-size controller.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct IntegratorOptions {
    /// Mixed absolute/relative local error bound per step.
    pub tol: f64,
    pub max_step: f64,
    pub initial_step: f64,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            tol: 1e-10,
            max_step: 0.1,
            initial_step: 1e-4,
            max_steps: 1_000_000,
        }
    }
}

impl IntegratorOptions {
    pub fn with_tol(tol: f64) -> Self {
        IntegratorOptions {
            tol,
            ..Default::default()
        }
    }
}

/// Per-sample conservation data from a full-flow run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagnostic {
    pub hamiltonian: f64,
    pub graph_defect: f64,
    /// `H e^{−½d·q}`, the constraint with the relative volume divided out.
    pub hamiltonian_scaled: f64,
    /// `‖p − ∇f(q)‖ / (1 + ‖∇f(q)‖)`.
    pub graph_defect_rel: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<(f64, Vec<f64>)>,
    pub diagnostics: Vec<Diagnostic>,
    /// Why integration stopped before the end of the requested span.
    pub truncated: Option<String>,
}

impl Trajectory {
    pub fn last(&self) -> &(f64, Vec<f64>) {
        self.samples
            .last()
            .expect("trajectory has at least the initial sample")
    }

    pub fn max_abs_hamiltonian(&self) -> f64 {
        self.diagnostics
            .iter()
            .map(|d| d.hamiltonian.abs())
            .fold(0.0, f64::max)
    }

    pub fn max_graph_defect(&self) -> f64 {
        self.diagnostics
            .iter()
            .map(|d| d.graph_defect)
            .fold(0.0, f64::max)
    }

    pub fn max_abs_hamiltonian_scaled(&self) -> f64 {
        self.diagnostics
            .iter()
            .map(|d| d.hamiltonian_scaled.abs())
            .fold(0.0, f64::max)
    }

    pub fn max_graph_defect_rel(&self) -> f64 {
        self.diagnostics
            .iter()
            .map(|d| d.graph_defect_rel)
            .fold(0.0, f64::max)
    }

    /// CSV with header `t,q1..qr,u,H,graph_defect`; `r + 1` state columns are written.
    pub fn to_csv(&self, r: usize) -> String {
        let mut out = String::from("t");
        for i in 1..=r {
            out.push_str(&format!(",q{i}"));
        }
        out.push_str(",u,H,graph_defect\n");
        for (k, (t, y)) in self.samples.iter().enumerate() {
            out.push_str(&format!("{t:.17e}"));
            for v in y.iter().take(r + 1) {
                out.push_str(&format!(",{v:.17e}"));
            }
            match self.diagnostics.get(k) {
                Some(d) => out.push_str(&format!(
                    ",{:.17e},{:.17e}\n",
                    d.hamiltonian, d.graph_defect
                )),
                None => out.push_str(",,\n"),
            }
        }
        out
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B_HAT: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const PI_ALPHA: f64 = 0.7 / 5.0;
const PI_BETA: f64 = 0.4 / 5.0;

/// Integrates `y' = f(t, y)` from `t0` to `t1` (either direction), recording every accepted step.
pub fn integrate<F>(
    f: F,
    y0: &[f64],
    t0: f64,
    t1: f64,
    opts: &IntegratorOptions,
) -> Result<Trajectory>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    if !(1e-13..=1e-6).contains(&opts.tol) {
        return Err(Error::Parameter(format!(
            "tol {} outside [1e-13, 1e-6]",
            opts.tol
        )));
    }
    if y0.iter().any(|v| !v.is_finite()) || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::Parameter("non-finite initial data".into()));
    }
    let n = y0.len();
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let mut traj = Trajectory {
        samples: vec![(t0, y0.to_vec())],
        ..Default::default()
    };
    if t1 == t0 {
        return Ok(traj);
    }
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut h = opts.initial_step.min(opts.max_step).min((t1 - t0).abs());
    let mut err_prev: f64 = 1.0;
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    k[0] = f(t, &y);
    let mut steps = 0;
    let mut ytmp = vec![0.0; n];
    while (t1 - t) * dir > 0.0 {
        steps += 1;
        if steps > opts.max_steps {
            traj.truncated = Some(format!("step limit reached at t={t}"));
            break;
        }
        let last = (t1 - t).abs() <= h;
        if last {
            h = (t1 - t).abs();
        }
        let hs = h * dir;
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += hs * A[s][j] * kj[i];
                }
                ytmp[i] = acc;
            }
            k[s] = f(t + C[s] * hs, &ytmp);
        }
        let y_new: Vec<f64> = ytmp.clone();
        let mut err: f64 = 0.0;
        for i in 0..n {
            let mut e = 0.0;
            for s in 0..7 {
                e += (B[s] - B_HAT[s]) * k[s][i];
            }
            let scale = opts.tol * (1.0 + y[i].abs().max(y_new[i].abs()));
            err = err.max((hs * e).abs() / scale);
        }
        if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            h *= 0.2;
            if h < 1e-14 * t.abs().max(1.0) {
                traj.truncated = Some(format!("step size underflow at t={t}"));
                break;
            }
            continue;
        }
        if err <= 1.0 {
            t = if last { t1 } else { t + hs };
            y = y_new;
            k[0] = k[6].clone();
            traj.samples.push((t, y.clone()));
            let fac = if err == 0.0 {
                5.0
            } else {
                SAFETY * err.powf(-PI_ALPHA) * err_prev.powf(PI_BETA)
            };
            h = (h * fac.clamp(0.2, 5.0)).min(opts.max_step);
            err_prev = err.max(1e-4);
        } else {
            h *= (SAFETY * err.powf(-0.2)).clamp(0.1, 0.9);
            if h < 1e-14 * t.abs().max(1.0) {
                traj.truncated = Some(format!("step size underflow at t={t}"));
                break;
            }
        }
    }
    Ok(traj)
}
