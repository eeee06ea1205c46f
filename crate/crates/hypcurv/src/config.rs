//! Sectioned `key = value` run configuration.
//!
//! ```text
//! # comments start with '#'
//! [problem]
//! spec = quotient n=2 l=1
//! domain = ellipse a=1 b=0.5
//! sigma = 0.5
//!
//! [solver]
//! grid_h = 1/64
//! eps_schedule = 0.2, 0.1, 0.05, 0.02
//!
//! [sweep]
//! sigma_list = 0.2, 0.4, 0.6, 0.8
//!
//! [verify]
//! specs = default
//!
//! [run]
//! seed = 1
//! output = out
//! ```
//!
//! Parsing collects every error, each tagged with its line, instead of
//! stopping at the first one.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use hypcurv_core::solver::{default_schedule, JacobianMode, NewtonParams};
use hypcurv_core::verify::default_suite_specs;
use hypcurv_core::{CurvatureSpec, DomainSpec, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Sweep,
    Verify,
    Oracle,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Sweep => "sweep",
            Command::Verify => "verify",
            Command::Oracle => "oracle",
        }
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "solve" => Ok(Command::Solve),
            "sweep" => Ok(Command::Sweep),
            "verify" => Ok(Command::Verify),
            "oracle" => Ok(Command::Oracle),
            _ => Err(format!("unknown command `{s}` (expected solve, sweep, verify or oracle)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    /// 1-based line, or `None` for whole-file problems such as a missing key.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Every problem found in one config file.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

pub const DEFAULT_SIGMA: f64 = 0.5;
pub const DEFAULT_GRID_H: f64 = 1.0 / 64.0;
pub const DEFAULT_EPS_START: f64 = 0.2;
pub const DEFAULT_EPS_TARGET: f64 = 0.02;
pub const DEFAULT_SIGMA_LIST: [f64; 4] = [0.2, 0.4, 0.6, 0.8];
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_OUTPUT: &str = "hypcurv-out";

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// `[run] command`, if the file names one.
    pub command: Option<Command>,
    pub spec: Option<CurvatureSpec>,
    pub domain: Option<DomainSpec>,
    pub sigma: f64,
    pub sigma_list: Vec<f64>,
    pub solver: SolverConfig,
    pub verify_specs: Vec<CurvatureSpec>,
    pub seed: u64,
    pub output: PathBuf,
}

impl RunConfig {
    /// Solver settings with the configured σ filled in.
    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            sigma: self.sigma,
            ..self.solver.clone()
        }
    }

    /// Keys a command needs beyond the defaults.
    pub fn check_for(&self, command: Command) -> Result<(), ConfigErrors> {
        let mut errs = Vec::new();
        let missing = |key: &str| ConfigError {
            line: None,
            message: format!("`{key}` is required by the {} command", command.as_str()),
        };
        if matches!(command, Command::Solve | Command::Sweep | Command::Oracle) {
            if self.spec.is_none() {
                errs.push(missing("[problem] spec"));
            }
            if self.domain.is_none() {
                errs.push(missing("[problem] domain"));
            }
        }
        if matches!(command, Command::Solve | Command::Sweep) {
            if let Some(s) = self.spec.as_ref().filter(|s| s.dim() != 2) {
                errs.push(ConfigError {
                    line: None,
                    message: format!("the grid solver needs a 2-dimensional spec, got `{s}`"),
                });
            }
        }
        if command == Command::Oracle
            && !matches!(self.domain, None | Some(DomainSpec::Ball { .. }))
        {
            errs.push(ConfigError {
                line: None,
                message: "the oracle command needs a ball domain".into(),
            });
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(ConfigErrors(errs))
        }
    }
}

const KEYS: &[(&str, &[&str])] = &[
    ("problem", &["spec", "domain", "sigma"]),
    (
        "solver",
        &[
            "grid_h",
            "eps_schedule",
            "jacobian",
            "max_iters",
            "abs_tol",
            "rel_tol",
            "damping_min",
            "eps_floor_factor",
        ],
    ),
    ("sweep", &["sigma_list"]),
    ("verify", &["specs"]),
    ("run", &["command", "seed", "output"]),
];

struct Entry<'a> {
    line: usize,
    value: &'a str,
}

/// Accepts decimals and `a/b` fractions.
fn parse_real(text: &str) -> Result<f64, String> {
    let text = text.trim();
    let value = match text.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| format!("malformed number `{text}`"))?;
            let b: f64 = b.trim().parse().map_err(|_| format!("malformed number `{text}`"))?;
            a / b
        }
        None => text.parse().map_err(|_| format!("malformed number `{text}`"))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("number `{text}` is not finite"))
    }
}

fn parse_list(text: &str) -> Result<Vec<f64>, String> {
    text.split(',').map(parse_real).collect()
}

fn sigma_in_range(s: f64) -> Result<f64, String> {
    if s > 0.0 && s < 1.0 {
        Ok(s)
    } else {
        Err(format!("sigma = {s} is outside (0,1)"))
    }
}

/// Parses and validates a config file.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigErrors> {
    let mut errs: Vec<ConfigError> = Vec::new();
    let mut entries: Vec<(&str, &str, Entry)> = Vec::new();
    let mut section: Option<&str> = None;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut err = |message: String| errs.push(ConfigError { line: Some(line), message });
        if let Some(name) = body.strip_prefix('[') {
            match name.strip_suffix(']').map(str::trim) {
                Some(name) if KEYS.iter().any(|(s, _)| *s == name) => section = Some(name),
                Some(name) => {
                    err(format!("unknown section [{name}]"));
                    section = None;
                }
                None => err(format!("malformed section header `{body}`")),
            }
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            err(format!("expected `key = value`, got `{body}`"));
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        let Some(sec) = section else {
            err(format!("key `{key}` appears outside a known section"));
            continue;
        };
        let allowed = KEYS.iter().find(|(s, _)| *s == sec).map(|(_, k)| *k).unwrap_or(&[]);
        if !allowed.contains(&key) {
            err(format!("unknown key `{key}` in [{sec}]"));
            continue;
        }
        if let Some((_, _, prev)) = entries.iter().find(|(s, k, _)| *s == sec && *k == key) {
            err(format!("duplicate key `{key}` in [{sec}] (first set on line {})", prev.line));
            continue;
        }
        entries.push((sec, key, Entry { line, value }));
    }

    let get = |sec: &str, key: &str| entries.iter().find(|(s, k, _)| *s == sec && *k == key).map(|(_, _, e)| e);

    // Each field is parsed independently so that all errors are reported.
    fn field<T>(
        errs: &mut Vec<ConfigError>,
        entry: Option<&Entry>,
        default: T,
        parse: impl FnOnce(&str) -> Result<T, String>,
    ) -> T {
        match entry {
            None => default,
            Some(e) => match parse(e.value) {
                Ok(v) => v,
                Err(message) => {
                    errs.push(ConfigError {
                        line: Some(e.line),
                        message,
                    });
                    default
                }
            },
        }
    }

    let command = field(&mut errs, get("run", "command"), None, |v| v.parse().map(Some));
    let spec = field(&mut errs, get("problem", "spec"), None, |v| {
        v.parse::<CurvatureSpec>().map(Some).map_err(|e| e.to_string())
    });
    let domain = field(&mut errs, get("problem", "domain"), None, |v| {
        v.parse::<DomainSpec>().map(Some).map_err(|e| e.to_string())
    });
    let sigma = field(&mut errs, get("problem", "sigma"), DEFAULT_SIGMA, |v| {
        parse_real(v).and_then(sigma_in_range)
    });
    let sigma_list = field(&mut errs, get("sweep", "sigma_list"), DEFAULT_SIGMA_LIST.to_vec(), |v| {
        let list = parse_list(v)?;
        for s in &list {
            sigma_in_range(*s)?;
        }
        if list.windows(2).any(|w| !(w[1] > w[0])) {
            return Err("sigma_list must be strictly increasing".into());
        }
        Ok(list)
    });
    let grid_h = field(&mut errs, get("solver", "grid_h"), DEFAULT_GRID_H, |v| {
        let h = parse_real(v)?;
        if h > 0.0 {
            Ok(h)
        } else {
            Err(format!("grid_h = {h} must be positive"))
        }
    });
    let eps_schedule = field(
        &mut errs,
        get("solver", "eps_schedule"),
        default_schedule(DEFAULT_EPS_START, DEFAULT_EPS_TARGET),
        |v| {
            let list = parse_list(v)?;
            if list.iter().any(|e| !(*e > 0.0)) {
                return Err("eps_schedule values must be positive".into());
            }
            if list.windows(2).any(|w| !(w[1] < w[0])) {
                return Err("eps_schedule must be strictly decreasing".into());
            }
            Ok(list)
        },
    );
    let jacobian_mode = field(&mut errs, get("solver", "jacobian"), JacobianMode::Analytic, |v| match v {
        "analytic" => Ok(JacobianMode::Analytic),
        "fd" | "finite-difference" => Ok(JacobianMode::FiniteDifference),
        _ => Err(format!("jacobian must be `analytic` or `fd`, got `{v}`")),
    });
    let defaults = NewtonParams::default();
    let positive = |name: &'static str| {
        move |v: &str| {
            let x = parse_real(v)?;
            if x > 0.0 {
                Ok(x)
            } else {
                Err(format!("{name} = {x} must be positive"))
            }
        }
    };
    let max_iters = field(&mut errs, get("solver", "max_iters"), defaults.max_iters, |v| {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(format!("max_iters must be a positive integer, got `{v}`")),
        }
    });
    let abs_tol = field(&mut errs, get("solver", "abs_tol"), defaults.abs_tol, positive("abs_tol"));
    let rel_tol = field(&mut errs, get("solver", "rel_tol"), defaults.rel_tol, |v| {
        let x = parse_real(v)?;
        if x >= 0.0 {
            Ok(x)
        } else {
            Err(format!("rel_tol = {x} must be non-negative"))
        }
    });
    let damping_min = field(&mut errs, get("solver", "damping_min"), defaults.damping_min, |v| {
        let x = parse_real(v)?;
        if x > 0.0 && x <= 1.0 {
            Ok(x)
        } else {
            Err(format!("damping_min = {x} must lie in (0,1]"))
        }
    });
    let eps_floor_factor = field(
        &mut errs,
        get("solver", "eps_floor_factor"),
        SolverConfig::default().eps_floor_factor,
        positive("eps_floor_factor"),
    );
    let verify_specs = field(&mut errs, get("verify", "specs"), default_suite_specs(), |v| {
        if v == "default" {
            return Ok(default_suite_specs());
        }
        v.split(';')
            .map(|s| s.parse::<CurvatureSpec>().map_err(|e| e.to_string()))
            .collect()
    });
    let seed = field(&mut errs, get("run", "seed"), DEFAULT_SEED, |v| {
        v.parse::<u64>().map_err(|_| format!("seed must be a non-negative integer, got `{v}`"))
    });
    let output = field(&mut errs, get("run", "output"), PathBuf::from(DEFAULT_OUTPUT), |v| {
        if v.is_empty() {
            Err("output must not be empty".into())
        } else {
            Ok(PathBuf::from(v))
        }
    });

    if !errs.is_empty() {
        errs.sort_by_key(|e| e.line);
        return Err(ConfigErrors(errs));
    }
    Ok(RunConfig {
        command,
        spec,
        domain,
        sigma,
        sigma_list,
        solver: SolverConfig {
            sigma,
            eps_schedule,
            newton: NewtonParams {
                max_iters,
                abs_tol,
                rel_tol,
                damping_min,
            },
            grid_h,
            jacobian_mode,
            eps_floor_factor,
        },
        verify_specs,
        seed,
        output,
    })
}
