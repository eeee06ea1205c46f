//! Damped Newton for `f(κ[u]) = σ` in `Ω`, `u = ε` on `∂Ω`, on a masked grid.
//!
//! At a node with discrete `u`, `p = Du` and `D = D²u`, the hyperbolic
//! principal curvatures are the eigenvalues of `S = (I + u Q D Q) / w`. The
//! analytic Jacobian differentiates `F = f(λ(S))` through
//! `dF = tr(F^S dS)` with `F^S = Σ f_k v_k v_kᵀ` in the eigenframe of `S`,
//! then through the stencil weights.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use libm::sqrt;

use crate::dense::sym_eigen2;
use crate::domain::DomainSpec;
use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField, OPPOSITE, PX, PY, UXX, UXY, UYY};
use crate::hypgeo::{admissibility, EquidistantSphere};
use crate::sparse::CscMatrix;
use crate::symfunc::{in_uniqueness_class, CurvatureSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JacobianMode {
    Analytic,
    FiniteDifference,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonParams {
    pub max_iters: usize,
    /// Converged once `max |residual| <= abs_tol`.
    pub abs_tol: f64,
    /// Stop (unconverged) when an accepted step moves `u` by less than
    /// `rel_tol · max u` while the residual is still above `abs_tol`.
    pub rel_tol: f64,
    /// Smallest step fraction tried by the backtracking line search.
    pub damping_min: f64,
}

impl Default for NewtonParams {
    fn default() -> Self {
        NewtonParams {
            max_iters: 40,
            abs_tol: 1e-9,
            rel_tol: 1e-15,
            damping_min: 1.0 / 1024.0,
        }
    }
}

/// A step is accepted only if it reduces `‖r‖₂` by at least this fraction.
pub const SUFFICIENT_DECREASE: f64 = 1e-4;
/// Accepted iterates satisfy `u >= ε (1 - HEIGHT_SLACK)`.
pub const HEIGHT_SLACK: f64 = 1e-12;
/// Boundary slopes are measured only along arms with `|n·e| >=` this.
pub const MIN_NORMAL_ALIGNMENT: f64 = 0.6;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub sigma: f64,
    /// Strictly decreasing positive ε values; the last one is the target.
    pub eps_schedule: Vec<f64>,
    pub newton: NewtonParams,
    pub grid_h: f64,
    pub jacobian_mode: JacobianMode,
    /// ε is never driven below `eps_floor_factor · h`.
    pub eps_floor_factor: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            sigma: 0.5,
            eps_schedule: default_schedule(0.2, 0.02),
            newton: NewtonParams::default(),
            grid_h: 1.0 / 64.0,
            jacobian_mode: JacobianMode::Analytic,
            eps_floor_factor: 1.0,
        }
    }
}

/// Halving from `start`; the target replaces any value below `1.5 · target`.
pub fn default_schedule(start: f64, target: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut e = start;
    while e >= 1.5 * target {
        out.push(e);
        e *= 0.5;
    }
    out.push(target);
    out
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "sigma must lie in (0, 1), got {}",
                self.sigma
            )));
        }
        if self.eps_schedule.is_empty() {
            return Err(Error::InvalidConfig("empty epsilon schedule".into()));
        }
        if self.eps_schedule.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::InvalidConfig("epsilon values must be positive".into()));
        }
        if self.eps_schedule.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::InvalidConfig(
                "epsilon schedule must be strictly decreasing".into(),
            ));
        }
        if !(self.grid_h > 0.0) {
            return Err(Error::InvalidConfig("grid spacing must be positive".into()));
        }
        let n = &self.newton;
        if !(n.abs_tol > 0.0 && n.rel_tol >= 0.0 && n.damping_min > 0.0 && n.damping_min <= 1.0)
        {
            return Err(Error::InvalidConfig("Newton tolerances must be positive".into()));
        }
        Ok(())
    }

    /// Schedule after applying the floor `max(target, factor · h)`.
    pub fn effective_schedule(&self) -> Vec<f64> {
        let floor = self.eps_floor_factor * self.grid_h;
        let mut out: Vec<f64> = self
            .eps_schedule
            .iter()
            .copied()
            .filter(|&e| e >= floor)
            .collect();
        let target = *self.eps_schedule.last().unwrap();
        if target < floor && out.last().is_none_or(|&l| l > floor) {
            out.push(floor);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Stats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

impl Stats {
    fn of(values: impl Iterator<Item = f64>) -> Stats {
        let (mut min, mut max, mut sum, mut n) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize);
        for v in values {
            min = min.min(v);
            max = max.max(v);
            sum += v;
            n += 1;
        }
        Stats {
            min,
            max,
            mean: if n > 0 { sum / n as f64 } else { f64::NAN },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub eps: f64,
    pub sigma: f64,
    pub converged: bool,
    /// `max |residual|` before each Newton step and after the last one.
    pub residual_history: Vec<f64>,
    pub final_max_residual: f64,
    pub iterations: usize,
    /// Every accepted iterate was re-checked: admissible at every node and
    /// `u >= ε(1 - 1e-12)`.
    pub admissibility_ok: bool,
    pub accepted_iterates: usize,
    /// `w` at boundary crossings of well-aligned stencil arms.
    pub boundary_w: Stats,
    /// Hyperbolic principal curvatures over all nodes.
    pub kappa: Stats,
    /// Nodes where the analytic Jacobian was replaced by finite differences.
    pub fd_fallback_nodes: usize,
    pub smallest_damping: f64,
    pub message: String,
}

/// Per-node geometry for a 2-D graph.
#[derive(Debug, Clone, Copy)]
pub(crate) struct NodeGeom {
    pub u: f64,
    pub p: [f64; 2],
    /// `[u_xx, u_yy, u_xy]`.
    pub d: [f64; 3],
    pub w: f64,
    pub q: [[f64; 2]; 2],
    /// Ascending hyperbolic principal curvatures.
    pub kappa: [f64; 2],
    /// Eigenvectors of `S` as columns.
    pub vecs: [[f64; 2]; 2],
}

type M2 = [[f64; 2]; 2];

fn mm(a: &M2, b: &M2) -> M2 {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

fn tr_prod(a: &M2, b: &M2) -> f64 {
    a[0][0] * b[0][0] + a[0][1] * b[1][0] + a[1][0] * b[0][1] + a[1][1] * b[1][1]
}

pub(crate) fn node_geom(u: f64, der: [f64; 5]) -> NodeGeom {
    let p = [der[PX], der[PY]];
    let d = [der[UXX], der[UYY], der[UXY]];
    let w = sqrt(1.0 + p[0] * p[0] + p[1] * p[1]);
    let c = 1.0 / (w * (1.0 + w));
    let q = [
        [1.0 - c * p[0] * p[0], -c * p[0] * p[1]],
        [-c * p[0] * p[1], 1.0 - c * p[1] * p[1]],
    ];
    let dm = [[d[0], d[2]], [d[2], d[1]]];
    let m = mm(&mm(&q, &dm), &q);
    let (vals, vecs) = sym_eigen2(m[0][0], 0.5 * (m[0][1] + m[1][0]), m[1][1]);
    let kappa = [(1.0 + u * vals[0]) / w, (1.0 + u * vals[1]) / w];
    NodeGeom {
        u,
        p,
        d,
        w,
        q,
        kappa,
        vecs,
    }
}

/// `∂F/∂u`, `∂F/∂p_a` and `∂F/∂(u_xx, u_yy, u_xy)` at one node.
pub(crate) fn node_partials(g: &NodeGeom, fi: &[f64]) -> (f64, [f64; 2], [f64; 3]) {
    let v = &g.vecs;
    let mut fs = [[0.0; 2]; 2];
    for k in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                fs[i][j] += fi[k] * v[i][k] * v[j][k];
            }
        }
    }
    let dm = [[g.d[0], g.d[2]], [g.d[2], g.d[1]]];
    let qdq = mm(&mm(&g.q, &dm), &g.q);
    let w = g.w;
    let df_du = tr_prod(&fs, &qdq) / w;

    let qfq = mm(&mm(&g.q, &fs), &g.q);
    let s = g.u / w;
    let df_dd = [s * qfq[0][0], s * qfq[1][1], 2.0 * s * qfq[0][1]];

    let sm = [
        [(1.0 + g.u * qdq[0][0]) / w, g.u * qdq[0][1] / w],
        [g.u * qdq[1][0] / w, (1.0 + g.u * qdq[1][1]) / w],
    ];
    let c = 1.0 / (w * (1.0 + w));
    let dc = -(1.0 + 2.0 * w) / (w * w * (1.0 + w) * (1.0 + w));
    let p = g.p;
    let ppt = [[p[0] * p[0], p[0] * p[1]], [p[1] * p[0], p[1] * p[1]]];
    let mut df_dp = [0.0; 2];
    for a in 0..2 {
        let dcda = dc * p[a] / w;
        let mut dq = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let ea_i = if i == a { 1.0 } else { 0.0 };
                let ea_j = if j == a { 1.0 } else { 0.0 };
                dq[i][j] = -c * (ea_i * p[j] + p[i] * ea_j) - dcda * ppt[i][j];
            }
        }
        let t1 = mm(&mm(&dq, &dm), &g.q);
        let t2 = mm(&mm(&g.q, &dm), &dq);
        let mut ds = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                ds[i][j] = -sm[i][j] * p[a] / (w * w) + s * (t1[i][j] + t2[i][j]);
            }
        }
        df_dp[a] = tr_prod(&fs, &ds);
    }
    (df_du, df_dp, df_dd)
}

fn check_spec(spec: &CurvatureSpec) -> Result<()> {
    if spec.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: spec.dim(),
        });
    }
    Ok(())
}

/// Residual at one node for the given values; `None` if inadmissible.
/// Pinned nodes carry their interpolation constraint instead.
fn node_residual(field: &ScalarField, spec: &CurvatureSpec, k: usize, values: &[f64]) -> Option<f64> {
    let grid = &field.grid;
    if let Some(pin) = grid.pin(k) {
        return Some(values[k] - grid.pin_target(&pin, k, values, field.eps));
    }
    let eps = field.eps;
    let g = node_geom(values[k], grid.derivatives_with(k, values, |_| eps));
    (g.u > 0.0 && g.kappa[0] > 0.0 && g.kappa[0].is_finite() && g.kappa[1].is_finite())
        .then(|| spec.value_unchecked(&g.kappa) - field.sigma)
}

/// `f(κ[u]) - σ` at every node; inadmissible nodes are listed in the error.
pub fn residual(field: &ScalarField, spec: &CurvatureSpec) -> Result<Vec<f64>> {
    check_spec(spec)?;
    let n = field.grid.len();
    let mut r = vec![0.0; n];
    let mut bad = Vec::new();
    for (k, rk) in r.iter_mut().enumerate() {
        match node_residual(field, spec, k, &field.values) {
            Some(v) => *rk = v,
            None => bad.push(k),
        }
    }
    if bad.is_empty() {
        Ok(r)
    } else {
        Err(Error::Inadmissible { nodes: bad })
    }
}

/// Jacobian of [`residual`] in the grid's factorization order, together with
/// the number of nodes that fell back to finite differences.
pub fn jacobian(
    field: &ScalarField,
    spec: &CurvatureSpec,
    mode: JacobianMode,
) -> Result<(CscMatrix, usize)> {
    check_spec(spec)?;
    let grid = &field.grid;
    let mut jac = grid.pattern().clone();
    jac.values.iter_mut().for_each(|v| *v = 0.0);
    let mut fallbacks = 0;
    let mut scratch = field.values.clone();
    for k in 0..grid.len() {
        let st = grid.stencil(k);
        let mut row = [0.0; 9];
        let mut ok = false;
        if let Some(pin) = grid.pin(k) {
            row[0] = 1.0;
            row[OPPOSITE[pin.slot]] = -pin.far_weight();
            ok = true;
        } else if mode == JacobianMode::Analytic {
            let g = node_geom(field.values[k], field.derivatives(k));
            if g.kappa[0] > 0.0 {
                let (_, fi) = spec.value_grad_unchecked(&g.kappa);
                let (du, dp, dd) = node_partials(&g, &fi);
                let coef = [dp[0], dp[1], dd[0], dd[1], dd[2]];
                for (s, r) in row.iter_mut().enumerate() {
                    *r = (0..5).map(|i| coef[i] * st.weights[i][s]).sum::<f64>();
                }
                row[0] += du;
                ok = row.iter().all(|v| v.is_finite());
            }
            if !ok {
                fallbacks += 1;
            }
        }
        if !ok {
            for (s, r) in row.iter_mut().enumerate() {
                let Some(m) = st.neighbour(s) else { continue };
                let base = field.values[m];
                let step = 1e-6 * base.abs().max(field.eps);
                scratch[m] = base + step;
                let fp = node_residual(field, spec, k, &scratch).unwrap_or(f64::NAN);
                scratch[m] = base - step;
                let fm = node_residual(field, spec, k, &scratch).unwrap_or(f64::NAN);
                scratch[m] = base;
                *r = (fp - fm) / (2.0 * step);
            }
        }
        for (s, r) in row.iter().enumerate() {
            if let Some(pos) = grid.jacobian_position(k, s) {
                jac.values[pos] += r;
            }
        }
    }
    Ok((jac, fallbacks))
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn norm2(v: &[f64]) -> f64 {
    sqrt(v.iter().map(|x| x * x).sum())
}

/// Independent re-check of an iterate through the general admissibility
/// matrix `δ + Du Duᵀ + u D²u` at every unpinned node.
pub fn iterate_invariants_hold(field: &ScalarField) -> bool {
    let floor = field.eps * (1.0 - HEIGHT_SLACK);
    (0..field.grid.len()).all(|k| {
        field.values[k] >= floor
            && (field.grid.is_pinned(k) || admissibility(&field.discretize(k)))
    })
}

/// `w` at each boundary crossing of an arm with `|n·e| >= 0.6`, recovered
/// from the one-sided slope along the arm and `u = ε` on `∂Ω`.
pub fn boundary_w_samples(field: &ScalarField) -> Vec<(usize, f64)> {
    let grid = &field.grid;
    grid.boundary_arms()
        .iter()
        .filter_map(|arm| {
            if grid.is_pinned(arm.node) {
                return None;
            }
            let e = Grid::slot_direction(arm.slot);
            let align = arm.normal[0] * e[0] + arm.normal[1] * e[1];
            if align.abs() < MIN_NORMAL_ALIGNMENT {
                return None;
            }
            let dn = grid.boundary_slope(arm, &field.values, field.eps) / align;
            Some((arm.node, sqrt(1.0 + dn * dn)))
        })
        .collect()
}

fn kappa_stats(field: &ScalarField) -> Stats {
    let mut all = Vec::with_capacity(2 * field.grid.len());
    for k in (0..field.grid.len()).filter(|&k| !field.grid.is_pinned(k)) {
        let g = node_geom(field.values[k], field.derivatives(k));
        all.extend_from_slice(&g.kappa);
    }
    Stats::of(all.into_iter())
}

fn finish_report(field: &ScalarField, mut report: SolveReport) -> SolveReport {
    report.boundary_w = Stats::of(boundary_w_samples(field).into_iter().map(|(_, w)| w));
    report.kappa = kappa_stats(field);
    report
}

/// Damped Newton from an admissible initial field.
pub fn newton_solve(
    field: ScalarField,
    spec: &CurvatureSpec,
    config: &SolverConfig,
) -> Result<(ScalarField, SolveReport)> {
    let params = config.newton;
    let mut field = field;
    let floor = field.eps * (1.0 - HEIGHT_SLACK);
    if field.values.iter().any(|&v| v < floor) {
        let nodes = (0..field.values.len())
            .filter(|&k| field.values[k] < floor)
            .collect();
        return Err(Error::Inadmissible { nodes });
    }
    let mut r = residual(&field, spec)?;
    let mut report = SolveReport {
        eps: field.eps,
        sigma: field.sigma,
        converged: false,
        residual_history: vec![max_abs(&r)],
        final_max_residual: max_abs(&r),
        iterations: 0,
        admissibility_ok: iterate_invariants_hold(&field),
        accepted_iterates: 0,
        boundary_w: Stats::default(),
        kappa: Stats::default(),
        fd_fallback_nodes: 0,
        smallest_damping: 1.0,
        message: String::new(),
    };
    let grid = field.grid.clone();
    let perm = grid.perm();
    let n = grid.len();
    loop {
        let rmax = max_abs(&r);
        report.final_max_residual = rmax;
        if rmax <= params.abs_tol {
            report.converged = true;
            report.message = format!("converged in {} iterations", report.iterations);
            break;
        }
        if report.iterations >= params.max_iters {
            report.message = format!("iteration limit {} reached", params.max_iters);
            break;
        }
        let (jac, fallbacks) = jacobian(&field, spec, config.jacobian_mode)?;
        report.fd_fallback_nodes += fallbacks;
        let lu = match grid.symbolic().factor(&jac) {
            Ok(lu) => lu,
            Err(e) => {
                report.message = format!("linear solve failed: {e}");
                break;
            }
        };
        let mut rhs = vec![0.0; n];
        for k in 0..n {
            rhs[perm[k]] = -r[k];
        }
        let sol = lu.solve_refined(&jac, &rhs);
        let delta: Vec<f64> = (0..n).map(|k| sol[perm[k]]).collect();

        let rnorm = norm2(&r);
        let mut t = 1.0;
        let accepted = loop {
            let trial_vals: Vec<f64> = field
                .values
                .iter()
                .zip(&delta)
                .map(|(u, d)| u + t * d)
                .collect();
            if trial_vals.iter().all(|&v| v >= floor) {
                let trial = ScalarField {
                    values: trial_vals,
                    ..field.clone()
                };
                if let Ok(rt) = residual(&trial, spec) {
                    if norm2(&rt) <= (1.0 - SUFFICIENT_DECREASE) * rnorm {
                        break Some((trial, rt));
                    }
                }
            }
            t *= 0.5;
            if t < params.damping_min {
                break None;
            }
        };
        report.iterations += 1;
        let Some((next, rt)) = accepted else {
            report.message = format!(
                "damping floor {} reached at max residual {rmax:.3e}",
                params.damping_min
            );
            break;
        };
        report.smallest_damping = report.smallest_damping.min(t);
        report.accepted_iterates += 1;
        report.admissibility_ok &= iterate_invariants_hold(&next);
        let umax = next.max();
        let step = t * max_abs(&delta);
        field = next;
        r = rt;
        report.residual_history.push(max_abs(&r));
        if step <= params.rel_tol * umax && max_abs(&r) > params.abs_tol {
            report.final_max_residual = max_abs(&r);
            report.message = format!("stagnated at max residual {:.3e}", max_abs(&r));
            break;
        }
    }
    Ok((field.clone(), finish_report(&field, report)))
}

/// Result of an ε-continuation run.
#[derive(Debug, Clone)]
pub struct Continuation {
    /// Last converged stage, if any.
    pub field: Option<ScalarField>,
    pub stages: Vec<SolveReport>,
    /// Why the run stopped early, if it did.
    pub failure: Option<String>,
    /// Stages that started from a fresh initial guess.
    pub restarts: usize,
    /// Intermediate ε values inserted where a warm start was inadmissible.
    pub inserted: Vec<f64>,
}

impl Continuation {
    pub fn converged(&self) -> bool {
        self.failure.is_none() && self.stages.last().is_some_and(|s| s.converged)
    }
}

/// Maps a solution at `ε_old` to a start for `ε_new` by shifting
/// `u² + |x|²` by a constant, which keeps its convexity and boundary values.
pub fn warm_start(field: &ScalarField, eps_new: f64) -> ScalarField {
    let shift = eps_new * eps_new - field.eps * field.eps;
    ScalarField {
        grid: field.grid.clone(),
        values: field
            .values
            .iter()
            .map(|u| sqrt((u * u + shift).max(eps_new * eps_new)))
            .collect(),
        eps: eps_new,
        sigma: field.sigma,
    }
}

/// Lowers a solution at `ε_old` by `ε_old - ε_new`. On concave caps this
/// only adds to `δ + Du Duᵀ + u D²u`.
pub fn shift_start(field: &ScalarField, eps_new: f64) -> ScalarField {
    let shift = field.eps - eps_new;
    ScalarField {
        grid: field.grid.clone(),
        values: field.values.iter().map(|u| (u - shift).max(eps_new)).collect(),
        eps: eps_new,
        sigma: field.sigma,
    }
}

/// Cap on intermediate stages inserted into one continuation run.
pub const MAX_INSERTED_STAGES: usize = 8;

/// Solves along the ε schedule, warm-starting each stage from
/// [`warm_start`] or else [`shift_start`]. When both are inadmissible the
/// stage restarts from [`initial_guess`]; if that
/// is inadmissible too, the geometric mean of the two ε values is solved
/// first.
pub fn eps_continuation(
    spec: &CurvatureSpec,
    domain: &DomainSpec,
    config: &SolverConfig,
) -> Result<Continuation> {
    config.validate()?;
    let grid = Grid::new(domain.clone(), config.grid_h)?;
    eps_continuation_on(spec, grid, config)
}

/// As [`eps_continuation`] on a prebuilt grid.
pub fn eps_continuation_on(
    spec: &CurvatureSpec,
    grid: Arc<Grid>,
    config: &SolverConfig,
) -> Result<Continuation> {
    config.validate()?;
    check_spec(spec)?;
    let mut pending: Vec<f64> = config.effective_schedule();
    pending.reverse();
    let mut out = Continuation {
        field: None,
        stages: Vec::new(),
        failure: None,
        restarts: 0,
        inserted: Vec::new(),
    };
    let mut current: Option<ScalarField> = None;
    while let Some(eps) = pending.pop() {
        let start = match &current {
            None => initial_guess(grid.clone(), config.sigma, eps)?,
            Some(prev) => {
                let ws = warm_start(prev, eps);
                let shifted = shift_start(prev, eps);
                if residual(&ws, spec).is_ok() {
                    ws
                } else if residual(&shifted, spec).is_ok() {
                    shifted
                } else {
                    let fresh = initial_guess(grid.clone(), config.sigma, eps)?;
                    if residual(&fresh, spec).is_ok() {
                        out.restarts += 1;
                        fresh
                    } else if out.inserted.len() < MAX_INSERTED_STAGES {
                        let mid = sqrt(prev.eps * eps);
                        out.inserted.push(mid);
                        pending.push(eps);
                        pending.push(mid);
                        continue;
                    } else {
                        fresh
                    }
                }
            }
        };
        let (field, report) = match newton_solve(start, spec, config) {
            Ok(v) => v,
            Err(e) => {
                out.failure = Some(format!("stage eps={eps}: {e}"));
                return Ok(out);
            }
        };
        let ok = report.converged;
        let msg = report.message.clone();
        out.stages.push(report);
        if !ok {
            out.failure = Some(format!("stage eps={eps}: {msg}"));
            return Ok(out);
        }
        current = Some(field.clone());
        out.field = Some(field);
    }
    Ok(out)
}

/// Solutions for increasing σ on a common grid and ε.
#[derive(Debug, Clone)]
pub struct Sweep {
    pub sigmas: Vec<f64>,
    pub fields: Vec<ScalarField>,
    pub runs: Vec<Continuation>,
    /// Smallest `u^{σ_i} - u^{σ_{i+1}}` over all nodes, per consecutive pair.
    pub min_gaps: Vec<f64>,
    /// First crossing found, for specs outside the uniqueness class.
    pub crossing: Option<Error>,
}

/// Per-pair minimum gap and the first node where it is not positive.
fn ordering_gap(lo: &ScalarField, hi: &ScalarField, s_lo: f64, s_hi: f64) -> (f64, Option<Error>) {
    let mut gap = f64::INFINITY;
    let mut worst = 0;
    for k in 0..lo.values.len() {
        let g = lo.values[k] - hi.values[k];
        if g < gap {
            gap = g;
            worst = k;
        }
    }
    let crossing = (gap <= 0.0).then(|| {
        let x = lo.grid.coord(worst);
        Error::Crossing {
            node: worst,
            x: x[0],
            y: x[1],
            sigma_lo: s_lo,
            sigma_hi: s_hi,
            gap,
        }
    });
    (gap, crossing)
}

/// Solves for each σ and checks strict nesting `u^{σ_i} > u^{σ_j}` for
/// `σ_i < σ_j`. A crossing is an error for specs in the uniqueness class and
/// is recorded in [`Sweep::crossing`] otherwise.
pub fn sigma_sweep(
    spec: &CurvatureSpec,
    domain: &DomainSpec,
    sigmas: &[f64],
    config: &SolverConfig,
) -> Result<Sweep> {
    if sigmas.is_empty() || sigmas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidConfig(
            "sigma list must be non-empty and strictly increasing".into(),
        ));
    }
    if let Some(s) = sigmas.iter().find(|s| !(**s > 0.0 && **s < 1.0)) {
        return Err(Error::InvalidConfig(format!("sigma must lie in (0, 1), got {s}")));
    }
    let grid = Grid::new(domain.clone(), config.grid_h)?;
    let mut sweep = Sweep {
        sigmas: sigmas.to_vec(),
        fields: Vec::new(),
        runs: Vec::new(),
        min_gaps: Vec::new(),
        crossing: None,
    };
    for &sigma in sigmas {
        let cfg = SolverConfig {
            sigma,
            ..config.clone()
        };
        let run = eps_continuation_on(spec, grid.clone(), &cfg)?;
        if !run.converged() {
            let why = run.failure.clone().unwrap_or_default();
            sweep.runs.push(run);
            return Err(Error::NotConverged(format!("sigma={sigma}: {why}")));
        }
        sweep.fields.push(run.field.clone().expect("converged run has a field"));
        sweep.runs.push(run);
    }
    let strict = in_uniqueness_class(spec, 10_000, 0x5eed);
    for i in 1..sweep.fields.len() {
        let (gap, crossing) =
            ordering_gap(&sweep.fields[i - 1], &sweep.fields[i], sigmas[i - 1], sigmas[i]);
        sweep.min_gaps.push(gap);
        if let Some(c) = crossing {
            if strict {
                return Err(c);
            }
            if sweep.crossing.is_none() {
                sweep.crossing = Some(c);
            }
        }
    }
    Ok(sweep)
}

/// Radius of the ε-level sphere for a gauge of length `L`.
fn level_radius(length: f64, sigma: f64, eps: f64) -> f64 {
    let one_m = 1.0 - sigma * sigma;
    (eps * sigma + sqrt(eps * eps + one_m * length * length)) / one_m
}

/// Admissible starting field: the equidistant sphere composed with the
/// domain's convex gauge, `ũ = -σR' + sqrt(R'² - L² ψ)`. Where `ũ` dips
/// below `ε` it is lifted by `u² = ε² + φ(ũ₊² - ε² - τ)` with the Huber
/// ramp `φ`; this is a smooth maximum, convex and monotone in both
/// arguments, so `u² + |x|²` stays convex and `u = ε` wherever `ũ <= ε`.
/// On a ball this is the exact ε-level sphere.
pub fn initial_guess(grid: Arc<Grid>, sigma: f64, eps: f64) -> Result<ScalarField> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::InvalidConfig(format!("sigma must lie in (0, 1), got {sigma}")));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidConfig(format!("epsilon must be positive, got {eps}")));
    }
    let gauge = grid.domain.gauge();
    let big_l = gauge.length;
    let r = level_radius(big_l, sigma, eps);
    let cap_height = r * (1.0 - sigma) - eps;
    let required = 2.0 * grid.h;
    if cap_height < required {
        return Err(Error::EpsilonTooLarge {
            eps,
            cap_height,
            required,
        });
    }
    let raw: Vec<f64> = grid
        .coords()
        .iter()
        .map(|&x| {
            let arg = r * r - big_l * big_l * gauge.eval(x);
            if arg > 0.0 {
                (-sigma * r + sqrt(arg)).max(0.0)
            } else {
                0.0
            }
        })
        .collect();
    let needs_lift = raw.iter().any(|&v| v < eps);
    let values = if needs_lift {
        let tau = 0.5 * eps * eps;
        let ramp = |d: f64| {
            if d <= -tau {
                0.0
            } else if d >= tau {
                d
            } else {
                (d + tau) * (d + tau) / (4.0 * tau)
            }
        };
        raw.iter()
            .map(|&v| sqrt(eps * eps + ramp(v * v - eps * eps - tau)))
            .collect()
    } else {
        raw
    };
    ScalarField::new(grid, values, eps, sigma)
}

/// Exact ε-level sphere on a ball domain sampled at the grid nodes.
pub fn ball_exact_field(grid: Arc<Grid>, sigma: f64, eps: f64) -> Result<ScalarField> {
    let DomainSpec::Ball { radius } = grid.domain else {
        return Err(Error::InvalidDomain("exact solution is only known on balls".into()));
    };
    let sph = EquidistantSphere::at_level(radius, sigma, eps)?;
    Ok(ScalarField::from_fn(grid, eps, sigma, |x| sph.height(&x)))
}

/// Largest nodal deviation from the exact ε-level sphere on a ball.
pub fn ball_error(field: &ScalarField) -> Result<f64> {
    let exact = ball_exact_field(field.grid.clone(), field.sigma, field.eps)?;
    Ok(field
        .values
        .iter()
        .zip(&exact.values)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
}
