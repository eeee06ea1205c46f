//! The four commands. Each writes `report.csv`, `manifest.txt` and any
//! meshes into the output directory and returns an exit code.

use std::fs;
use std::path::{Path, PathBuf};

use hypcurv_core::radial::radial_solve;
use hypcurv_core::solver::{eps_continuation, sigma_sweep, Sweep};
use hypcurv_core::verify::{cite, nesting_check, run_structure_suite, solution_checks};
use hypcurv_core::{CheckReport, CheckStatus, CurvatureSpec, DomainSpec, Error};

use crate::config::{Command, ConfigErrors, RunConfig};
use crate::mesh::export_mesh;
use crate::report::{any_failed, write_report, Manifest};
use crate::IoError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;

/// Largest accepted gap between the radial profile and the closed-form sphere.
pub const ORACLE_TOL: f64 = 1e-6;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Config(#[from] ConfigErrors),
    #[error(transparent)]
    Io(#[from] IoError),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        EXIT_USAGE
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub rows: Vec<CheckReport>,
    /// Lines for stdout besides the rows.
    pub messages: Vec<String>,
    pub files: Vec<PathBuf>,
}

impl RunOutcome {
    fn new() -> Self {
        RunOutcome {
            exit_code: EXIT_OK,
            rows: Vec::new(),
            messages: Vec::new(),
            files: Vec::new(),
        }
    }

    fn settle(&mut self) {
        if self.exit_code == EXIT_OK && any_failed(&self.rows) {
            self.exit_code = EXIT_CHECK_FAILED;
        }
    }
}

/// Runs `command` with `cfg`, writing into `cfg.output`. `config_text` is
/// echoed into the manifest.
pub fn run(command: Command, cfg: &RunConfig, config_text: &str) -> Result<RunOutcome, RunError> {
    cfg.check_for(command)?;
    let out = cfg.output.as_path();
    fs::create_dir_all(out).map_err(|e| IoError::new(out, e))?;
    let mut outcome = match command {
        Command::Solve => solve(cfg, out)?,
        Command::Sweep => sweep(cfg, out)?,
        Command::Verify => verify(cfg),
        Command::Oracle => oracle(cfg),
    };
    outcome.settle();
    let report = write_report(out, &outcome.rows)?;
    outcome.files.insert(0, report);
    let manifest = Manifest {
        command,
        seed: cfg.seed,
        output: out,
        exit_code: outcome.exit_code,
        files: &outcome.files,
        config_text,
    };
    manifest.write()?;
    Ok(outcome)
}

fn problem(cfg: &RunConfig) -> (&CurvatureSpec, &DomainSpec) {
    // check_for has already insisted on both.
    (cfg.spec.as_ref().expect("spec"), cfg.domain.as_ref().expect("domain"))
}

fn solve(cfg: &RunConfig, out: &Path) -> Result<RunOutcome, IoError> {
    let (spec, domain) = problem(cfg);
    let mut o = RunOutcome::new();
    let run = match eps_continuation(spec, domain, &cfg.solver_config()) {
        Ok(run) => run,
        Err(e) => {
            o.messages.push(format!("solver failed: {e}"));
            o.exit_code = EXIT_NOT_CONVERGED;
            return Ok(o);
        }
    };
    for s in &run.stages {
        o.messages.push(format!(
            "eps={:.6e} converged={} iterations={} residual={:.3e}",
            s.eps, s.converged, s.iterations, s.final_max_residual
        ));
    }
    match (&run.field, run.converged()) {
        (Some(field), true) => {
            o.rows = solution_checks(field, spec, &run.stages, domain.r1());
            o.files.extend(export_mesh(field, out)?);
        }
        _ => {
            let why = run.failure.as_deref().unwrap_or("unknown");
            o.messages.push(format!("not converged: {why}"));
            o.exit_code = EXIT_NOT_CONVERGED;
        }
    }
    Ok(o)
}

fn sweep(cfg: &RunConfig, out: &Path) -> Result<RunOutcome, IoError> {
    let (spec, domain) = problem(cfg);
    let mut o = RunOutcome::new();
    match sigma_sweep(spec, domain, &cfg.sigma_list, &cfg.solver_config()) {
        Ok(sw) => {
            let r1 = domain.r1();
            o.rows = sweep_rows(&sw, spec, r1);
            for f in &sw.fields {
                o.files.extend(export_mesh(f, out)?);
            }
            if let Some(c) = &sw.crossing {
                o.messages.push(c.to_string());
            }
        }
        Err(e @ Error::Crossing { .. }) => {
            o.messages.push(e.to_string());
            o.rows.push(crossing_row(&e));
        }
        Err(e) => {
            o.messages.push(format!("sweep failed: {e}"));
            o.exit_code = EXIT_NOT_CONVERGED;
        }
    }
    Ok(o)
}

/// Per-σ solution checks, suffixed `[sigma=..]`, followed by the nesting check.
pub fn sweep_rows(sw: &Sweep, spec: &CurvatureSpec, r1: f64) -> Vec<CheckReport> {
    let mut rows = Vec::new();
    for ((sigma, field), run) in sw.sigmas.iter().zip(&sw.fields).zip(&sw.runs) {
        for mut r in solution_checks(field, spec, &run.stages, r1) {
            r.name = format!("{}[sigma={sigma}]", r.name);
            rows.push(r);
        }
    }
    rows.push(nesting_check(&sw.sigmas, &sw.fields));
    rows
}

/// A failing nesting row for a crossing reported by the solver.
pub fn crossing_row(e: &Error) -> CheckReport {
    let (gap, detail) = match e {
        Error::Crossing {
            node,
            x,
            y,
            sigma_lo,
            sigma_hi,
            gap,
        } => (*gap, format!("sigma {sigma_lo}->{sigma_hi} node {node} at ({x}, {y})")),
        other => (f64::NAN, other.to_string()),
    };
    CheckReport::new("nesting", CheckStatus::Fail, gap, 0.0, cite::NESTING).with_detail(detail)
}

fn verify(cfg: &RunConfig) -> RunOutcome {
    let mut o = RunOutcome::new();
    o.rows = run_structure_suite(&cfg.verify_specs, cfg.seed);
    o
}

fn oracle(cfg: &RunConfig) -> RunOutcome {
    let (spec, domain) = problem(cfg);
    let mut o = RunOutcome::new();
    let DomainSpec::Ball { radius } = *domain else {
        unreachable!("check_for rejects non-ball domains")
    };
    let eps = *cfg.solver.eps_schedule.last().expect("schedule is non-empty");
    let profile = radial_solve(spec, radius, cfg.sigma, eps, spec.dim());
    let err = match profile.map(|p| (p.converged, p.sphere_error())) {
        Ok((true, Ok(err))) => err,
        Ok((true, Err(e))) | Err(e) => {
            o.messages.push(format!("radial solve failed: {e}"));
            o.exit_code = EXIT_NOT_CONVERGED;
            return o;
        }
        Ok((false, _)) => {
            o.messages.push("radial solve did not converge".into());
            o.exit_code = EXIT_NOT_CONVERGED;
            return o;
        }
    };
    o.messages.push(format!("max |radial - sphere| = {err:.3e}"));
    let status = if err <= ORACLE_TOL {
        CheckStatus::Pass
    } else {
        CheckStatus::Fail
    };
    o.rows.push(
        CheckReport::new("radial_oracle", status, err, ORACLE_TOL, cite::EQUIDISTANT_SPHERE)
            .with_detail(format!("n={} delta={radius} sigma={} eps={eps}", spec.dim(), cfg.sigma)),
    );
    o
}
