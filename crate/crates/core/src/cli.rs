//! Command-line front end.
//!
//! Results go to stdout (JSON, or CSV for `path --csv`), diagnostics to
//! stderr. Exit codes: 0 success, 1 `check` found a violated property,
//! 2 usage error, 3 invalid config or input, 4 solver target error,
//! 5 convergence failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{parse_config, SystemConfig};
use crate::ergopt::max_ergodic_average;
use crate::error::{Error, ErrorKind};
use crate::paths::{
    solve_intermediate_entropy_with_tolerance, solve_intermediate_pressure_with_tolerance, sweep, PathSample,
    SolveReport, SOLVER_TOLERANCE,
};
use crate::potentials::Potential;
use crate::sft::{recode_to_edge_shift, topological_entropy};
use crate::transfer::{lipschitz_check, measure_pressure, pressure, pressure_and_equilibrium};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_SOLVER: i32 = 4;
pub const EXIT_CONVERGENCE: i32 = 5;

pub const CSV_HEADER: &str = "t,pressure,entropy,phi_avg,psi_pressure";

#[derive(Debug, Parser)]
#[command(name = "thermoform", version, about = "Pressure, equilibrium states and ground states on subshifts of finite type")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON system configuration.
    config: PathBuf,
    /// Report entropies and pressures in bits instead of nats.
    #[arg(long)]
    bits: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Topological entropy of the system.
    Entropy(Common),
    /// Pressure of a potential (zero potential by default).
    Pressure {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        phi: Option<String>,
    },
    /// Equilibrium state of a potential as a Markov measure.
    Equilibrium {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        phi: Option<String>,
    },
    /// Maximal ergodic average, critical graph and ground entropy.
    Maximize {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        phi: String,
    },
    /// Sweep t over [0, t_max] along psi + t phi.
    Path {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        psi: Option<String>,
        #[arg(long)]
        phi: String,
        #[arg(long, default_value_t = 10.0)]
        t_max: f64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        /// Emit CSV instead of JSON.
        #[arg(long)]
        csv: bool,
    },
    /// Find t such that the equilibrium state of t phi has the target entropy.
    SolveEntropy {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        phi: String,
        #[arg(long)]
        target: f64,
        #[arg(long, default_value_t = SOLVER_TOLERANCE)]
        tol: f64,
    },
    /// Find t such that the equilibrium state of psi + t phi has the target
    /// psi-pressure.
    SolvePressure {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        psi: Option<String>,
        #[arg(long)]
        phi: String,
        #[arg(long)]
        target: f64,
        #[arg(long, default_value_t = SOLVER_TOLERANCE)]
        tol: f64,
    },
    /// Run self-consistency checks on every potential in the config.
    Check(Common),
}

/// Captured result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

enum Failure {
    Usage(String),
    Config(String),
    Library(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Library(e)
    }
}

struct Units {
    scale: f64,
    name: &'static str,
}

impl Units {
    fn new(bits: bool) -> Units {
        if bits {
            Units {
                scale: 1.0 / std::f64::consts::LN_2,
                name: "bits",
            }
        } else {
            Units { scale: 1.0, name: "nats" }
        }
    }

    fn sample(&self, s: &PathSample) -> PathSample {
        PathSample {
            t: s.t,
            pressure: s.pressure * self.scale,
            entropy: s.entropy * self.scale,
            phi_avg: s.phi_avg * self.scale,
            psi_pressure: s.psi_pressure * self.scale,
        }
    }

    fn report(&self, r: &SolveReport) -> SolveReport {
        SolveReport {
            target: r.target * self.scale,
            achieved: r.achieved * self.scale,
            residual: r.residual * self.scale,
            trace: r.trace.iter().map(|s| self.sample(s)).collect(),
            ..r.clone()
        }
    }
}

fn lookup<'a>(config: &'a SystemConfig, name: &str) -> Result<&'a Potential, Failure> {
    config
        .potentials
        .get(name)
        .ok_or_else(|| Failure::Usage(format!("no potential named {name:?} in config")))
}

fn lookup_or_zero(config: &SystemConfig, name: Option<&str>) -> Result<Potential, Failure> {
    match name {
        Some(n) => lookup(config, n).cloned(),
        None => Ok(Potential::zero(&config.sft)),
    }
}

fn load(common: &Common) -> Result<SystemConfig, Failure> {
    parse_config(&common.config).map_err(|e| Failure::Config(e.to_string()))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable output");
    text.push('\n');
    text
}

fn csv(samples: &[PathSample]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for s in samples {
        let _ = writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            s.t, s.pressure, s.entropy, s.phi_avg, s.psi_pressure
        );
    }
    out
}

fn check(config: &SystemConfig) -> Result<(Value, bool), Failure> {
    let sft = &config.sft;
    let h = topological_entropy(sft);
    let mut pass = true;

    let recode: Vec<Value> = (1..=3)
        .map(|k| -> Result<Value, Failure> {
            let (recoded, _) = recode_to_edge_shift(sft, k)?;
            let gap = (topological_entropy(&recoded) - h).abs();
            let ok = gap <= 1e-10;
            pass &= ok;
            Ok(json!({"k": k, "entropy_gap": gap, "pass": ok}))
        })
        .collect::<Result<_, _>>()?;

    let mut variational = Vec::new();
    for (name, phi) in &config.potentials {
        let (p, mu) = pressure_and_equilibrium(sft, phi)?;
        let defect = (p.value - measure_pressure(&mu, phi)?).abs();
        let measure_ok = mu.validate().is_ok() && mu.support_is_strongly_connected();
        let ok = defect <= 1e-9 && measure_ok;
        pass &= ok;
        variational.push(json!({
            "potential": name,
            "pressure": p.value,
            "defect": defect,
            "measure_valid": measure_ok,
            "pass": ok,
        }));
    }

    let mut lipschitz = Vec::new();
    let names: Vec<&String> = config.potentials.keys().collect();
    for (i, a) in names.iter().enumerate() {
        for b in &names[i + 1..] {
            let r = lipschitz_check(sft, &config.potentials[*a], &config.potentials[*b])?;
            pass &= r.holds;
            lipschitz.push(json!({
                "phi": a,
                "psi": b,
                "pressure_gap": r.pressure_gap,
                "sup_distance": r.sup_distance,
                "pass": r.holds,
            }));
        }
    }

    Ok((
        json!({
            "topological_entropy_nats": h,
            "recoding": recode,
            "variational": variational,
            "lipschitz": lipschitz,
            "pass": pass,
        }),
        pass,
    ))
}

fn dispatch(command: Command) -> Result<(String, i32), Failure> {
    match command {
        Command::Entropy(common) => {
            let config = load(&common)?;
            let units = Units::new(common.bits);
            let key = format!("entropy_{}", units.name);
            let value = topological_entropy(&config.sft) * units.scale;
            Ok((to_json(&json!({ key: value })), EXIT_OK))
        }
        Command::Pressure { common, phi } => {
            let config = load(&common)?;
            let units = Units::new(common.bits);
            let potential = lookup_or_zero(&config, phi.as_deref())?;
            let p = pressure(&config.sft, &potential)?;
            Ok((
                to_json(&json!({
                    "potential": phi,
                    "pressure": p.value * units.scale,
                    "units": units.name,
                    "residual": p.residual,
                    "iterations": p.iterations,
                })),
                EXIT_OK,
            ))
        }
        Command::Equilibrium { common, phi } => {
            let config = load(&common)?;
            let units = Units::new(common.bits);
            let potential = lookup_or_zero(&config, phi.as_deref())?;
            let (p, mu) = pressure_and_equilibrium(&config.sft, &potential)?;
            Ok((
                to_json(&json!({
                    "potential": phi,
                    "order": mu.order(),
                    "states": mu.states(),
                    "stationary": mu.stationary(),
                    "kernel": mu.kernel(),
                    "entropy": mu.entropy() * units.scale,
                    "pressure": p.value * units.scale,
                    "units": units.name,
                })),
                EXIT_OK,
            ))
        }
        Command::Maximize { common, phi } => {
            let config = load(&common)?;
            let units = Units::new(common.bits);
            let r = max_ergodic_average(&config.sft, lookup(&config, &phi)?)?;
            Ok((
                to_json(&json!({
                    "potential": phi,
                    "beta": r.beta * units.scale,
                    "critical_edges": r.critical_edges,
                    "witness_cycle": r.witness_cycle,
                    "ground_entropy": r.ground_entropy * units.scale,
                    "unique_flag": r.unique_flag,
                    "units": units.name,
                })),
                EXIT_OK,
            ))
        }
        Command::Path {
            common,
            psi,
            phi,
            t_max,
            steps,
            csv: as_csv,
        } => {
            if steps == 0 || !t_max.is_finite() || t_max <= 0.0 {
                return Err(Failure::Usage("--steps must be positive and --t-max positive".into()));
            }
            let config = load(&common)?;
            let units = Units::new(common.bits);
            let psi = lookup_or_zero(&config, psi.as_deref())?;
            let phi = lookup(&config, &phi)?;
            let grid: Vec<f64> = (0..=steps).map(|i| t_max * i as f64 / steps as f64).collect();
            let samples: Vec<PathSample> = sweep(&config.sft, &psi, phi, &grid)?
                .iter()
                .map(|s| units.sample(s))
                .collect();
            let out = if as_csv { csv(&samples) } else { to_json(&samples) };
            Ok((out, EXIT_OK))
        }
        Command::SolveEntropy {
            common,
            phi,
            target,
            tol,
        } => {
            if tol.is_nan() || tol <= 0.0 {
                return Err(Failure::Usage("--tol must be positive".into()));
            }
            let config = load(&common)?;
            let units = Units::new(common.bits);
            let r = solve_intermediate_entropy_with_tolerance(&config.sft, lookup(&config, &phi)?, target, tol)?;
            Ok((to_json(&units.report(&r)), EXIT_OK))
        }
        Command::SolvePressure {
            common,
            psi,
            phi,
            target,
            tol,
        } => {
            if tol.is_nan() || tol <= 0.0 {
                return Err(Failure::Usage("--tol must be positive".into()));
            }
            let config = load(&common)?;
            let units = Units::new(common.bits);
            let psi = lookup_or_zero(&config, psi.as_deref())?;
            let r = solve_intermediate_pressure_with_tolerance(&config.sft, &psi, lookup(&config, &phi)?, target, tol)?;
            Ok((to_json(&units.report(&r)), EXIT_OK))
        }
        Command::Check(common) => {
            let config = load(&common)?;
            let (report, pass) = check(&config)?;
            Ok((to_json(&report), if pass { EXIT_OK } else { EXIT_CHECK_FAILED }))
        }
    }
}

/// Runs one invocation; `args` includes the program name.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    match dispatch(cli.command) {
        Ok((stdout, code)) => Outcome {
            code,
            stdout,
            stderr: String::new(),
        },
        Err(failure) => {
            let (code, message) = match failure {
                Failure::Usage(m) => (EXIT_USAGE, m),
                Failure::Config(m) => (EXIT_VALIDATION, m),
                Failure::Library(e) => {
                    let code = match e.kind() {
                        ErrorKind::Validation => EXIT_VALIDATION,
                        ErrorKind::Solver => EXIT_SOLVER,
                        ErrorKind::Convergence => EXIT_CONVERGENCE,
                    };
                    (code, format!("{}: {e}", e.name()))
                }
            };
            Outcome {
                code,
                stdout: String::new(),
                stderr: format!("error: {message}\n"),
            }
        }
    }
}
