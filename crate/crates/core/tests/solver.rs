use std::sync::Arc;

use hypcurv_core::grid::MIN_ARM;
use hypcurv_core::solver::{
    ball_error, ball_exact_field, default_schedule, eps_continuation, initial_guess,
    iterate_invariants_hold, jacobian, newton_solve, residual, shift_start, sigma_sweep,
    warm_start, JacobianMode,
};
use hypcurv_core::{CurvatureSpec, DomainSpec, Error, Grid, ScalarField, SolverConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn spec(l: usize) -> CurvatureSpec {
    CurvatureSpec::quotient(2, l).unwrap()
}

fn disk(h: f64) -> Arc<Grid> {
    Grid::new(DomainSpec::ball(1.0).unwrap(), h).unwrap()
}

#[test]
fn horosphere_residual_is_one_minus_sigma() {
    let grid = disk(1.0 / 16.0);
    let eps = 0.3;
    let field = ScalarField::from_fn(grid.clone(), eps, 0.4, |_| eps);
    for l in 0..2 {
        let r = residual(&field, &spec(l)).unwrap();
        for k in 0..grid.len() {
            let expect = if grid.is_pinned(k) { 0.0 } else { 0.6 };
            assert!((r[k] - expect).abs() < 1e-12, "node {k}: {}", r[k]);
        }
    }
}

#[test]
fn other_sphere_residual_is_sigma_gap() {
    let grid = disk(1.0 / 32.0);
    let exact = ball_exact_field(grid.clone(), 0.6, 0.05).unwrap();
    let field = ScalarField { sigma: 0.4, ..exact };
    let r = residual(&field, &spec(1)).unwrap();
    let interior: Vec<f64> = (0..grid.len())
        .filter(|&k| !grid.is_band(k))
        .map(|k| r[k])
        .collect();
    let worst = interior.iter().fold(0.0f64, |m, v| m.max((v - 0.2).abs()));
    assert!(worst < 2e-3, "{worst}");
}

#[test]
fn exact_sphere_is_a_near_solution_and_newton_finishes_fast() {
    let grid = disk(1.0 / 32.0);
    let config = SolverConfig {
        sigma: 0.5,
        ..SolverConfig::default()
    };
    for l in 0..2 {
        let start = ball_exact_field(grid.clone(), 0.5, 0.05).unwrap();
        let (field, report) = newton_solve(start, &spec(l), &config).unwrap();
        assert!(report.converged, "{}", report.message);
        assert!(report.iterations <= 4, "l={l}: {} iterations", report.iterations);
        assert!(report.admissibility_ok);
        assert!(report.final_max_residual <= 1e-9);
        assert!(ball_error(&field).unwrap() < 1e-2);
    }
}

#[test]
fn analytic_jacobian_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for domain in [DomainSpec::ball(1.0).unwrap(), DomainSpec::ellipse(1.0, 0.5).unwrap()] {
        let grid = Grid::new(domain, 1.0 / 16.0).unwrap();
        let base = initial_guess(grid.clone(), 0.5, 0.05).unwrap();
        // Smooth random perturbation: a few low-frequency modes.
        let modes: Vec<[f64; 4]> = (0..4)
            .map(|_| {
                let mut r = || rng.random::<f64>();
                let mut m = [0.0; 4];
                m[0] = 0.01 * (r() - 0.5);
                m[1] = 3.0 * (r() - 0.5);
                m[2] = 3.0 * (r() - 0.5);
                m[3] = std::f64::consts::TAU * r();
                m
            })
            .collect();
        let mut field = base.clone();
        for (k, v) in field.values.iter_mut().enumerate() {
            let x = grid.coord(k);
            let bump: f64 = modes.iter().map(|m| m[0] * (m[1] * x[0] + m[2] * x[1] + m[3]).cos()).sum();
            *v *= 1.0 + bump;
        }
        for l in 0..2 {
            let s = spec(l);
            residual(&field, &s).expect("perturbed field stays admissible");
            let (a, fallbacks) = jacobian(&field, &s, JacobianMode::Analytic).unwrap();
            let (f, _) = jacobian(&field, &s, JacobianMode::FiniteDifference).unwrap();
            assert_eq!(fallbacks, 0);
            let scale = f.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let worst = a
                .values
                .iter()
                .zip(&f.values)
                .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            assert!(worst / scale <= 1e-5, "l={l}: {:e}", worst / scale);
        }
    }
}

#[test]
fn initial_guess_is_admissible_on_every_domain() {
    let domains = [
        DomainSpec::ball(1.0).unwrap(),
        DomainSpec::ellipse(1.0, 0.5).unwrap(),
        DomainSpec::superellipse(1.0, 0.8, 4.0).unwrap(),
        "polygon 1,0; 0,1; -1,0; 0,-1".parse().unwrap(),
        "polygon -1,-0.6; 1,-0.6; 1,0.6; -1,0.6".parse().unwrap(),
    ];
    for d in domains {
        let grid = Grid::new(d.clone(), 1.0 / 32.0).unwrap();
        for sigma in [0.3, 0.5, 0.8] {
            let u = initial_guess(grid.clone(), sigma, 0.05).unwrap();
            assert!(iterate_invariants_hold(&u), "{d} sigma={sigma}");
            for l in 0..2 {
                assert!(residual(&u, &spec(l)).is_ok(), "{d} sigma={sigma} l={l}");
            }
        }
    }
}

#[test]
fn initial_guess_is_exact_on_the_ball() {
    let grid = disk(1.0 / 16.0);
    let u = initial_guess(grid.clone(), 0.3, 0.04).unwrap();
    let exact = ball_exact_field(grid, 0.3, 0.04).unwrap();
    for (a, b) in u.values.iter().zip(&exact.values) {
        assert!((a - b).abs() < 1e-14);
    }
}

#[test]
fn large_epsilon_is_rejected() {
    let grid = disk(1.0 / 16.0);
    assert!(matches!(
        initial_guess(grid, 0.95, 0.2),
        Err(Error::EpsilonTooLarge { .. })
    ));
}

#[test]
fn pinned_nodes_follow_their_interpolation() {
    // This ellipse puts four nodes within 1e-3 h of the boundary at h = 1/32,
    // well clear of rounding.
    let h = 1.0 / 32.0;
    let grid = Grid::new(DomainSpec::ellipse(1.0, 0.513).unwrap(), h).unwrap();
    let pinned: Vec<usize> = (0..grid.len()).filter(|&k| grid.is_pinned(k)).collect();
    assert_eq!(pinned.len(), 4);
    for &k in &pinned {
        let pin = grid.pin(k).unwrap();
        assert!(pin.frac < MIN_ARM && pin.frac > 1e-4);
        let w = pin.far_weight();
        assert!((0.0..1e-3).contains(&w));
    }
    let config = SolverConfig {
        sigma: 0.5,
        eps_schedule: vec![0.1, 0.05],
        grid_h: h,
        ..SolverConfig::default()
    };
    let run = eps_continuation(&spec(1), &grid.domain, &config).unwrap();
    assert!(run.converged(), "{:?}", run.failure);
    let u = run.field.unwrap();
    for &k in &pinned {
        let pin = grid.pin(k).unwrap();
        let target = grid.pin_target(&pin, k, &u.values, u.eps);
        assert!((u.values[k] - target).abs() < 1e-9);
    }
}

#[test]
fn continuation_error_decreases_with_h() {
    let mut errs = Vec::new();
    for h in [1.0 / 16.0, 1.0 / 32.0] {
        let config = SolverConfig {
            sigma: 0.5,
            eps_schedule: vec![0.2, 0.1],
            grid_h: h,
            ..SolverConfig::default()
        };
        let run = eps_continuation(&spec(0), &DomainSpec::ball(1.0).unwrap(), &config).unwrap();
        assert!(run.converged());
        assert_eq!(run.stages.len(), 2);
        errs.push(ball_error(run.field.as_ref().unwrap()).unwrap());
    }
    assert!(errs[0] / errs[1] >= 3.0, "{errs:?}");
}

#[test]
fn warm_and_shift_starts_respect_new_level() {
    let grid = disk(1.0 / 16.0);
    let u = ball_exact_field(grid, 0.5, 0.1).unwrap();
    for v in [warm_start(&u, 0.05), shift_start(&u, 0.05)] {
        assert_eq!(v.eps, 0.05);
        assert!(v.values.iter().all(|&x| x >= 0.05));
        assert!(v.values.iter().zip(&u.values).all(|(a, b)| a < b));
    }
    // u² moves by the constant ε_new² - ε_old².
    let ws = warm_start(&u, 0.05);
    let q_old: Vec<f64> = u.values.iter().map(|x| x * x).collect();
    for (a, b) in ws.values.iter().zip(&q_old) {
        assert!((a * a - (b + 0.0025 - 0.01)).abs() < 1e-14);
    }
}

#[test]
fn config_validation() {
    assert!(SolverConfig::default().validate().is_ok());
    assert_eq!(default_schedule(0.2, 0.02), vec![0.2, 0.1, 0.05, 0.02]);
    for bad in [
        SolverConfig {
            sigma: 1.2,
            ..SolverConfig::default()
        },
        SolverConfig {
            eps_schedule: vec![0.1, 0.1],
            ..SolverConfig::default()
        },
        SolverConfig {
            eps_schedule: vec![],
            ..SolverConfig::default()
        },
        SolverConfig {
            grid_h: 0.0,
            ..SolverConfig::default()
        },
    ] {
        assert!(matches!(bad.validate(), Err(Error::InvalidConfig(_))));
    }
    let floored = SolverConfig {
        eps_schedule: vec![0.2, 0.1, 0.01],
        grid_h: 1.0 / 32.0,
        ..SolverConfig::default()
    };
    assert_eq!(floored.effective_schedule(), vec![0.2, 0.1, 1.0 / 32.0]);
}

#[test]
fn spec_dimension_must_be_two() {
    let grid = disk(1.0 / 8.0);
    let u = initial_guess(grid, 0.5, 0.1).unwrap();
    assert!(matches!(
        residual(&u, &CurvatureSpec::quotient(3, 1).unwrap()),
        Err(Error::DimensionMismatch { .. })
    ));
}

#[test]
fn sweep_is_nested_on_the_disk() {
    let config = SolverConfig {
        eps_schedule: vec![0.1, 0.05],
        grid_h: 1.0 / 24.0,
        ..SolverConfig::default()
    };
    let sweep = sigma_sweep(&spec(1), &DomainSpec::ball(1.0).unwrap(), &[0.3, 0.6], &config).unwrap();
    assert_eq!(sweep.fields.len(), 2);
    assert!(sweep.min_gaps[0] > 0.0);
    assert!(sweep.crossing.is_none());
    assert!(sigma_sweep(&spec(1), &DomainSpec::ball(1.0).unwrap(), &[0.6, 0.3], &config).is_err());
}
