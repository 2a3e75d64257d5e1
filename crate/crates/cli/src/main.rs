use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use cohomflow::first_integrals::{bryant_difference_integral, verify_gfi};
use cohomflow::ode_flow::{
    build_rhs, case5_ansatz, case5_config, case5_q_from_s, integrate_case5_s, singular_start_case5,
    t_of_s, Case5Params, IntegratorOptions, Trajectory,
};
use cohomflow::rational::{parse_rat, rat, to_f64};
use cohomflow::solutions::{bryant_n1, explicit_case5_with, smoothness_check, ClosedFormCase5};
use cohomflow::superpotential::{check, search, SearchOptions, SuperpotentialAnsatz};
use cohomflow::weight_config::{builtin_catalog, catalog_entry, CoefficientMode};
use cohomflow::{Configuration, Error, ExpPoly, Rat, Surd};

const EXIT_UNSATISFIED: u8 = 1;
const EXIT_SCHEMA: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_INTEGRATOR: u8 = 4;

#[derive(Parser)]
#[command(
    name = "cohomflow",
    version,
    about = "Superpotentials and first-order flows for cohomogeneity-one Ricci solitons"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the superpotential condition for an ansatz.
    Verify {
        /// Configuration JSON, or `builtin:<name>`.
        config: String,
        ansatz: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for superpotentials within a lattice bound.
    Classify {
        config: String,
        #[arg(long, default_value_t = 3)]
        lattice_bound: u32,
        #[arg(long, default_value_t = 2)]
        max_extra: usize,
        /// Worker threads; `COHOMFLOW_THREADS` takes precedence.
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, default_value_t = 200_000)]
        budget: usize,
        #[arg(long)]
        off_p: bool,
        /// Defaults to the catalog mode for built-ins, otherwise constant.
        #[arg(long)]
        mode: Option<Mode>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate a first-order flow and write a CSV trajectory.
    Integrate {
        /// Configuration JSON or `builtin:<name>`; required for an ansatz file.
        config: Option<String>,
        /// `case5`, `bryant-n1`, or a path to an ansatz JSON file.
        #[arg(long)]
        solution: String,
        #[arg(long, default_value_t = 1e-6)]
        s0: f64,
        #[arg(long, default_value_t = 10.0)]
        s_max: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Append deviations from the exact case-5 solution.
        #[arg(long)]
        check_closed_form: bool,
        /// Integration variable for case5.
        #[arg(long, value_enum, default_value_t = Coord::S)]
        coordinate: Coord,
        /// Energy `E` as "p/q"; for case5 it replaces the configuration value.
        #[arg(long, allow_hyphen_values = true)]
        e: Option<String>,
        #[arg(long, allow_hyphen_values = true, default_value = "1")]
        a: String,
        #[arg(long, allow_hyphen_values = true, default_value = "0")]
        lambda: String,
        #[arg(long, default_value_t = 10.0)]
        t_max: f64,
        #[arg(long, default_value_t = 0.0)]
        t0: f64,
        /// Initial point `q1,..,qr,u` for an ansatz flow.
        #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
        q0: Vec<f64>,
    },
    /// Test whether `F` is a generalised first integral.
    CheckGfi {
        config: String,
        /// ExpPoly JSON file, or `builtin:bryant-difference`.
        f: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Smoothness conditions at the singular orbit.
    Smoothness {
        #[arg(long, default_value = "case5")]
        solution: String,
        #[arg(long, allow_hyphen_values = true, default_value = "8")]
        e: String,
        #[arg(long, allow_hyphen_values = true, default_value = "-1/2")]
        a: String,
        #[arg(long, allow_hyphen_values = true, default_value = "0")]
        u0: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the built-in configurations.
    Catalog {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Coord {
    S,
    T,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Constant,
    Polynomial,
}

#[derive(Serialize)]
struct RunManifest {
    command: String,
    config_hash: Option<String>,
    parameters: BTreeMap<String, String>,
    results: BTreeMap<String, Value>,
    tool_version: &'static str,
    wall_time: f64,
}

struct Run {
    command: &'static str,
    started: Instant,
    config_hash: Option<String>,
    parameters: BTreeMap<String, String>,
    results: BTreeMap<String, Value>,
}

impl Run {
    fn new(command: &'static str) -> Self {
        Run {
            command,
            started: Instant::now(),
            config_hash: None,
            parameters: BTreeMap::new(),
            results: BTreeMap::new(),
        }
    }

    fn param(&mut self, k: &str, v: impl ToString) {
        self.parameters.insert(k.into(), v.to_string());
    }

    fn result(&mut self, k: &str, v: impl Into<Value>) {
        self.results.insert(k.into(), v.into());
    }

    fn hash_config(&mut self, cfg: &Configuration) {
        let canon = serde_json::to_string(&cfg.to_json()).expect("config serialises");
        let digest = Sha256::digest(canon.as_bytes());
        self.config_hash = Some(digest.iter().map(|b| format!("{b:02x}")).collect());
    }

    /// Writes the primary output and the manifest next to it (stderr without `--out`).
    fn finish(self, out: Option<&Path>, body: &str) -> Result<(), Failure> {
        let manifest = RunManifest {
            command: self.command.into(),
            config_hash: self.config_hash,
            parameters: self.parameters,
            results: self.results,
            tool_version: env!("CARGO_PKG_VERSION"),
            wall_time: self.started.elapsed().as_secs_f64(),
        };
        let m = serde_json::to_string_pretty(&manifest).expect("manifest serialises") + "\n";
        match out {
            Some(p) => {
                std::fs::write(p, body).map_err(|e| Failure::io(p, e))?;
                let mp = manifest_path(p);
                std::fs::write(&mp, m).map_err(|e| Failure::io(&mp, e))?;
            }
            None => {
                print!("{body}");
                eprint!("{m}");
            }
        }
        Ok(())
    }
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn io(p: &Path, e: std::io::Error) -> Self {
        Failure {
            code: EXIT_SCHEMA,
            msg: format!("{}: {e}", p.display()),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Unsatisfied => EXIT_UNSATISFIED,
            Error::Integrator(_) => EXIT_INTEGRATOR,
            _ => EXIT_SCHEMA,
        };
        Failure {
            code,
            msg: e.to_string(),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

fn load_config(arg: &str) -> Result<(Configuration, Option<CoefficientMode>), Failure> {
    if let Some(name) = arg.strip_prefix("builtin:") {
        let e = catalog_entry(name)
            .ok_or_else(|| Error::Config(format!("unknown built-in '{name}'")))?;
        return Ok((e.config, Some(e.mode)));
    }
    Ok((Configuration::from_json_str(&read(Path::new(arg))?)?, None))
}

fn load_ansatz(path: &Path) -> Result<SuperpotentialAnsatz, Failure> {
    Ok(SuperpotentialAnsatz::from_json_str(&read(path)?)?)
}

fn rational(name: &str, s: &str) -> Result<Rat, Failure> {
    parse_rat(s).map_err(|e| Failure {
        code: EXIT_SCHEMA,
        msg: format!("--{name}: {e}"),
    })
}

fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("output serialises") + "\n"
}

fn threads(flag: Option<usize>) -> Result<Option<usize>, Failure> {
    match std::env::var("COHOMFLOW_THREADS") {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| Failure {
            code: EXIT_SCHEMA,
            msg: format!("COHOMFLOW_THREADS: bad value '{v}'"),
        }),
        Err(_) => Ok(flag),
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Verify {
            config,
            ansatz,
            out,
        } => {
            let mut run = Run::new("verify");
            let (cfg, _) = load_config(&config)?;
            run.hash_config(&cfg);
            run.param("config", &config);
            run.param("ansatz", ansatz.display());
            let f = load_ansatz(&ansatz)?;
            let report = check(&cfg, &f)?;
            run.result("satisfied", report.satisfied);
            run.finish(out.as_deref(), &pretty(&report.to_json(cfg.r())))?;
            Ok(if report.satisfied {
                0
            } else {
                EXIT_UNSATISFIED
            })
        }
        Command::Classify {
            config,
            lattice_bound,
            max_extra,
            threads: nthreads,
            budget,
            off_p,
            mode,
            out,
        } => {
            let mut run = Run::new("classify");
            let (cfg, builtin_mode) = load_config(&config)?;
            run.hash_config(&cfg);
            let mode = match mode {
                Some(Mode::Constant) => CoefficientMode::Constant,
                Some(Mode::Polynomial) => CoefficientMode::Polynomial,
                None => builtin_mode.unwrap_or(CoefficientMode::Constant),
            };
            let opts = SearchOptions {
                lattice_bound,
                max_extra,
                mode,
                off_p,
                budget,
            };
            run.param("config", &config);
            run.param("lattice_bound", lattice_bound);
            run.param("max_extra", max_extra);
            run.param("budget", budget);
            run.param("off_p", off_p);
            run.param("mode", format!("{mode:?}").to_lowercase());
            let mut pool = rayon::ThreadPoolBuilder::new();
            if let Some(n) = threads(nthreads)? {
                pool = pool.num_threads(n);
            }
            let pool = pool.build().map_err(|e| Failure {
                code: EXIT_SCHEMA,
                msg: e.to_string(),
            })?;
            let res = pool.install(|| search(&cfg, &opts))?;
            run.result("found", res.found.len());
            run.result("partial", res.partial);
            run.finish(out.as_deref(), &pretty(&res.to_json()))?;
            Ok(if res.partial { EXIT_BUDGET } else { 0 })
        }
        Command::Integrate {
            config,
            solution,
            s0,
            s_max,
            tol,
            out,
            check_closed_form,
            coordinate,
            e,
            a,
            lambda,
            t_max,
            t0,
            q0,
        } => {
            let mut run = Run::new("integrate");
            run.param("solution", &solution);
            run.param("tol", tol);
            let opts = IntegratorOptions::with_tol(tol);
            let (body, truncated) = match solution.as_str() {
                "case5" => {
                    let mut cfg = match &config {
                        Some(c) => load_config(c)?.0,
                        None => case5_config(
                            Rat::from_integer(4.into()),
                            Rat::from_integer(8.into()),
                            rat(-1, 2),
                        )?,
                    };
                    if let Some(e) = &e {
                        cfg = cfg.with_e(rational("e", e)?);
                    }
                    run.hash_config(&cfg);
                    run.param("s0", s0);
                    run.param("s_max", s_max);
                    run.param("check_closed_form", check_closed_form);
                    run.param("coordinate", format!("{coordinate:?}").to_lowercase());
                    match coordinate {
                        Coord::S => {
                            integrate_case5(&cfg, s0, s_max, &opts, check_closed_form, &mut run)?
                        }
                        Coord::T => {
                            integrate_case5_t(&cfg, s0, s_max, &opts, check_closed_form, &mut run)?
                        }
                    }
                }
                "bryant-n1" => {
                    let (a, e, l) = (
                        rational("a", &a)?,
                        rational("e", e.as_deref().unwrap_or("1"))?,
                        rational("lambda", &lambda)?,
                    );
                    for (k, v) in [("a", &a), ("e", &e), ("lambda", &l)] {
                        run.param(k, v);
                    }
                    run.param("t_max", t_max);
                    let sol = bryant_n1(to_f64(&a), to_f64(&e), to_f64(&l), t_max, &opts)?;
                    run.result("second_order_residual", sol.second_order_residual);
                    run.result("t_end", sol.trajectory.last().0);
                    let mut csv = String::from("t,h,u\n");
                    for (t, y) in &sol.trajectory.samples {
                        csv.push_str(&format!("{t:.17e},{:.17e},{:.17e}\n", y[0], y[1]));
                    }
                    (csv, sol.trajectory.truncated.clone())
                }
                path => {
                    let c = config.as_deref().ok_or_else(|| {
                        Error::Schema("an ansatz flow needs a configuration".into())
                    })?;
                    let (cfg, _) = load_config(c)?;
                    run.hash_config(&cfg);
                    let f = load_ansatz(Path::new(path))?;
                    run.param("t0", t0);
                    run.param("t_max", t_max);
                    run.param(
                        "q0",
                        q0.iter()
                            .map(|x| x.to_string())
                            .collect::<Vec<_>>()
                            .join(","),
                    );
                    let rhs = build_rhs(&cfg, &f)?;
                    let mut tr = rhs.integrate(&q0, t0, t_max, &opts)?;
                    rhs.annotate(&mut tr);
                    run.result("max_abs_hamiltonian", tr.max_abs_hamiltonian());
                    (tr.to_csv(cfg.r()), tr.truncated)
                }
            };
            if let Some(why) = &truncated {
                run.result("truncated", why.as_str());
            }
            run.finish(out.as_deref(), &body)?;
            if let Some(why) = truncated {
                eprintln!("error: integration truncated: {why}");
                return Ok(EXIT_INTEGRATOR);
            }
            Ok(0)
        }
        Command::CheckGfi { config, f, out } => {
            let mut run = Run::new("check-gfi");
            let (cfg, _) = load_config(&config)?;
            run.hash_config(&cfg);
            run.param("config", &config);
            run.param("f", &f);
            let fx: ExpPoly<Surd> = match f.as_str() {
                "builtin:bryant-difference" => bryant_difference_integral(&cfg)?,
                path => ExpPoly::from_json_str(&read(Path::new(path))?)?,
            }
            .map_coeffs(|c| Surd::from_rat(c.clone()));
            let report = verify_gfi(&cfg, &fx)?;
            run.result("is_gfi", report.is_gfi);
            run.finish(out.as_deref(), &pretty(&report.to_json()))?;
            Ok(if report.is_gfi { 0 } else { EXIT_UNSATISFIED })
        }
        Command::Smoothness {
            solution,
            e,
            a,
            u0,
            out,
        } => {
            let mut run = Run::new("smoothness");
            if solution != "case5" {
                return Err(
                    Error::Schema(format!("no smoothness test for solution '{solution}'")).into(),
                );
            }
            let (e, a, u0) = (rational("e", &e)?, rational("a", &a)?, rational("u0", &u0)?);
            for (k, v) in [("e", &e), ("a", &a), ("u0", &u0)] {
                run.param(k, v);
            }
            run.param("solution", &solution);
            let sol = explicit_case5_with(to_f64(&e), to_f64(&a), to_f64(&u0))?;
            let report = smoothness_check(&sol)?;
            run.result("pass", report.pass);
            run.finish(out.as_deref(), &pretty(&report))?;
            Ok(if report.pass { 0 } else { EXIT_UNSATISFIED })
        }
        Command::Catalog { out } => {
            let run = Run::new("catalog");
            let list: Vec<Value> = builtin_catalog()
                .into_iter()
                .map(|e| {
                    json!({
                        "name": e.name,
                        "description": e.description,
                        "mode": e.mode,
                        "expected": e.expected,
                        "classified": e.classified,
                        "config": e.config.to_json(),
                    })
                })
                .collect();
            run.finish(out.as_deref(), &pretty(&list))?;
            Ok(0)
        }
    }
}

/// Case-5 s-system from the singular start, written out in `t` with the positions `q`.
fn integrate_case5(
    cfg: &Configuration,
    s0: f64,
    s_max: f64,
    opts: &IntegratorOptions,
    closed_form: bool,
    run: &mut Run,
) -> Result<(String, Option<String>), Failure> {
    let p = Case5Params::from_config(cfg)?;
    let (lambda, e) = (p.lambda_f64(), p.e_f64());
    let start = singular_start_case5(cfg, s0)?;
    let tr = integrate_case5_s(&start, s_max, opts)?;
    let rhs = build_rhs(cfg, &case5_ansatz(cfg)?)?;
    let mut qt = Trajectory {
        samples: tr
            .samples
            .iter()
            .map(|(s, y)| (t_of_s(*s, lambda, e), case5_q_from_s(&start, *s, y)))
            .collect(),
        diagnostics: vec![],
        truncated: tr.truncated.clone(),
    };
    rhs.annotate(&mut qt);
    let mut csv = qt.to_csv(3);
    run.result(
        "max_abs_hamiltonian_scaled",
        qt.max_abs_hamiltonian_scaled(),
    );
    run.result("s_end", tr.last().0);
    if closed_form {
        let mut lines: Vec<String> = csv.lines().map(str::to_owned).collect();
        lines[0].push_str(",s,dev_beta1,dev_beta2,dev_u");
        let mut worst: f64 = 0.0;
        for (line, (s, y)) in lines[1..].iter_mut().zip(&tr.samples) {
            let want = [*s, s + 2.0 * lambda / e, start.u - e * (s - s0) / lambda];
            let dev: Vec<f64> = (0..3)
                .map(|k| (y[k] - want[k]).abs() / want[k].abs().max(f64::MIN_POSITIVE))
                .collect();
            worst = dev.iter().copied().fold(worst, f64::max);
            line.push_str(&format!(
                ",{s:.17e},{:.17e},{:.17e},{:.17e}",
                dev[0], dev[1], dev[2]
            ));
        }
        csv = lines.join("\n") + "\n";
        run.result("max_closed_form_deviation", worst);
    }
    Ok((csv, tr.truncated))
}

/// Case-5 first-order flow in `t`, started at `t(s0)`; deviations are taken against `s(t)`.
fn integrate_case5_t(
    cfg: &Configuration,
    s0: f64,
    s_max: f64,
    opts: &IntegratorOptions,
    closed_form: bool,
    run: &mut Run,
) -> Result<(String, Option<String>), Failure> {
    let p = Case5Params::from_config(cfg)?;
    let (lambda, e) = (p.lambda_f64(), p.e_f64());
    let start = singular_start_case5(cfg, s0)?;
    let (t0, q0) = start.in_t();
    let rhs = build_rhs(cfg, &case5_ansatz(cfg)?)?;
    let mut tr = rhs.integrate(&q0, t0, t_of_s(s_max, lambda, e), opts)?;
    rhs.annotate(&mut tr);
    run.result(
        "max_abs_hamiltonian_scaled",
        tr.max_abs_hamiltonian_scaled(),
    );
    run.result("t_end", tr.last().0);
    let mut csv = tr.to_csv(3);
    if closed_form {
        let exact = ClosedFormCase5 {
            e,
            lambda,
            a: p.a_f64(),
            u0: 0.0,
            euler_class: (-1, -1),
        };
        let mut lines: Vec<String> = csv.lines().map(str::to_owned).collect();
        lines[0].push_str(",s,dev_beta1,dev_beta2,dev_u");
        let mut worst: f64 = 0.0;
        for (line, (t, q)) in lines[1..].iter_mut().zip(&tr.samples) {
            let s = exact.s_of_t(*t);
            let want = [s, s + 2.0 * lambda / e, start.u - e * (s - s0) / lambda];
            let got = [q[1].exp(), q[2].exp(), q[3]];
            let dev: Vec<f64> = (0..3)
                .map(|k| (got[k] - want[k]).abs() / want[k].abs().max(1.0))
                .collect();
            worst = dev.iter().copied().fold(worst, f64::max);
            line.push_str(&format!(
                ",{s:.17e},{:.17e},{:.17e},{:.17e}",
                dev[0], dev[1], dev[2]
            ));
        }
        csv = lines.join("\n") + "\n";
        run.result("max_closed_form_deviation", worst);
    }
    Ok((csv, tr.truncated))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
