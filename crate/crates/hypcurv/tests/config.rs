use hypcurv::config::{parse_config, Command, ConfigErrors, DEFAULT_OUTPUT};
use hypcurv_core::solver::default_schedule;
use hypcurv_core::{CurvatureSpec, DomainSpec};

fn errors(text: &str) -> ConfigErrors {
    parse_config(text).expect_err("config should be rejected")
}

#[test]
fn minimal_disk_config_fills_defaults() {
    let cfg = parse_config("[problem]\nspec = quotient n=2 l=0\ndomain = ball r=1\n").unwrap();
    assert_eq!(cfg.spec, Some(CurvatureSpec::quotient(2, 0).unwrap()));
    assert_eq!(cfg.domain, Some(DomainSpec::ball(1.0).unwrap()));
    assert_eq!(cfg.solver.grid_h, 1.0 / 64.0);
    assert_eq!(cfg.solver.eps_schedule, default_schedule(0.2, 0.02));
    assert_eq!(cfg.solver.eps_schedule.first(), Some(&0.2));
    assert_eq!(cfg.solver.eps_schedule.last(), Some(&0.02));
    assert_eq!(cfg.sigma, 0.5);
    assert_eq!(cfg.seed, 1);
    assert_eq!(cfg.output.to_str(), Some(DEFAULT_OUTPUT));
    assert_eq!(cfg.command, None);
    assert!(cfg.check_for(Command::Solve).is_ok());
}

#[test]
fn sigma_outside_unit_interval_is_a_range_error() {
    let e = errors("[problem]\nspec = quotient n=2 l=0\ndomain = ball r=1\nsigma = 1.2\n");
    assert_eq!(e.0.len(), 1);
    assert_eq!(e.0[0].line, Some(4));
    assert!(e.0[0].message.contains("(0,1)"), "{}", e.0[0].message);
    let e = errors("[sweep]\nsigma_list = 0.2, 1.0\n");
    assert!(e.0[0].message.contains("(0,1)"));
}

#[test]
fn quotient_index_must_be_below_dimension() {
    let e = errors("[problem]\nspec = quotient n=2 l=2\n");
    assert_eq!(e.0[0].line, Some(2));
    assert!(e.0[0].message.contains("0 <= l < n"), "{}", e.0[0].message);
}

#[test]
fn schedule_must_decrease() {
    for bad in ["0.1, 0.2", "0.1, 0.1", "0.2, -0.1"] {
        let e = errors(&format!("[solver]\neps_schedule = {bad}\n"));
        assert_eq!(e.0[0].line, Some(2), "{bad}");
    }
}

#[test]
fn every_error_is_reported_with_its_line() {
    let text = "\
[problem]
spec = quotient n=2 l=0
sigma = 1.5
colour = blue

[solver]
grid_h = 0.0x
eps_schedule = 0.1, 0.2
grid_h = 1/32

[nowhere]
[run]
seed = -3
";
    let e = errors(text);
    let lines: Vec<Option<usize>> = e.0.iter().map(|e| e.line).collect();
    let mut sorted = lines.clone();
    sorted.sort();
    assert_eq!(sorted, [Some(3), Some(4), Some(7), Some(8), Some(9), Some(11), Some(13)]);
    let shown = e.to_string();
    assert!(shown.contains("line 4: unknown key `colour` in [problem]"), "{shown}");
    assert!(shown.contains("malformed number"), "{shown}");
    assert!(shown.contains("duplicate key `grid_h`"), "{shown}");
    assert!(shown.contains("unknown section [nowhere]"), "{shown}");
}

#[test]
fn all_keys_round_trip() {
    let text = "\
# every key once
[problem]
spec = sum(0.5*quotient n=2 l=0, 0.5*quotient n=2 l=1)
domain = polygon 1,0; 0,1; -1,0; 0,-1
sigma = 0.3   # trailing comment

[solver]
grid_h = 1/40
eps_schedule = 0.2, 0.1, 0.05
jacobian = fd
max_iters = 12
abs_tol = 1e-8
rel_tol = 0
damping_min = 0.01
eps_floor_factor = 2

[sweep]
sigma_list = 0.25, 0.5

[verify]
specs = quotient n=3 l=1; quotient n=4 l=2

[run]
command = sweep
seed = 77
output = out/dir
";
    let cfg = parse_config(text).unwrap();
    assert_eq!(cfg.command, Some(Command::Sweep));
    assert_eq!(cfg.sigma, 0.3);
    assert_eq!(cfg.solver.grid_h, 1.0 / 40.0);
    assert_eq!(cfg.solver.eps_schedule, [0.2, 0.1, 0.05]);
    assert_eq!(cfg.solver.newton.max_iters, 12);
    assert_eq!(cfg.solver.newton.rel_tol, 0.0);
    assert_eq!(cfg.solver.eps_floor_factor, 2.0);
    assert_eq!(cfg.sigma_list, [0.25, 0.5]);
    assert_eq!(cfg.verify_specs.len(), 2);
    assert_eq!(cfg.seed, 77);
    assert_eq!(cfg.solver_config().sigma, 0.3);
    assert_eq!(
        cfg.spec.unwrap().to_string(),
        "sum(0.5*quotient n=2 l=0, 0.5*quotient n=2 l=1)"
    );
}

#[test]
fn commands_check_their_requirements() {
    let cfg = parse_config("[problem]\nspec = quotient n=3 l=1\ndomain = ellipse a=1 b=0.5\n").unwrap();
    assert!(cfg.check_for(Command::Verify).is_ok());
    let solve = cfg.check_for(Command::Solve).unwrap_err();
    assert!(solve.to_string().contains("2-dimensional"));
    let oracle = cfg.check_for(Command::Oracle).unwrap_err();
    assert!(oracle.to_string().contains("ball"));
    let empty = parse_config("").unwrap();
    assert_eq!(empty.check_for(Command::Sweep).unwrap_err().0.len(), 2);
}
