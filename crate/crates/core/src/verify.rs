//! Machine-checkable reports over solutions and randomized suites.
//!
//! Every check returns a [`CheckReport`] with the measured quantity, the
//! bound it was compared against and a short citation tag naming the
//! estimate it encodes. Checks never assert non-constructive constants; they
//! fit them and report the fit.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use libm::sqrt;

use crate::grid::{ScalarField, UXX, UXY, UYY};
use crate::solver::{boundary_w_samples, node_geom, SolveReport};
use crate::symfunc::{check_structure, margin_survey, CurvatureSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Observational,
}

impl CheckStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Observational => "observational",
        }
    }

    fn from_bool(ok: bool) -> Self {
        if ok {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        }
    }
}

impl core::fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub status: CheckStatus,
    pub measured: f64,
    pub bound: f64,
    pub citation: &'static str,
    /// Secondary numbers, human readable.
    pub detail: String,
}

impl CheckReport {
    pub fn new(name: &str, status: CheckStatus, measured: f64, bound: f64, citation: &'static str) -> Self {
        CheckReport {
            name: name.to_string(),
            status,
            measured,
            bound,
            citation,
            detail: String::new(),
        }
    }

    pub fn with_detail(mut self, detail: String) -> Self {
        self.detail = detail;
        self
    }

    pub fn passed(&self) -> bool {
        self.status != CheckStatus::Fail
    }
}

pub mod cite {
    pub const BOUNDARY_ANGLE: &str = "boundary-angle-law";
    pub const ANGLE_BOUND: &str = "asymptotic-angle-bound";
    pub const ANGLE_MAX_PRINCIPLE: &str = "angle-maximum-principle";
    pub const GRADIENT_ALTERNATIVE: &str = "gradient-alternative";
    pub const CURVATURE_DOMINATION: &str = "boundary-curvature-domination";
    pub const QUOTIENT_INTERIOR: &str = "quotient-interior-bound";
    pub const STRUCTURE: &str = "structure-conditions";
    pub const UNIQUENESS_MARGIN: &str = "uniqueness-margin";
    pub const CONVEXITY: &str = "convexity-of-u2-plus-x2";
    pub const ADMISSIBLE_ITERATES: &str = "admissible-iterates";
    pub const NESTING: &str = "strict-nesting";
    pub const EQUIDISTANT_SPHERE: &str = "equidistant-sphere";
}

/// Largest `C_fit` accepted in `max w <= 1/σ + C_fit ε`.
pub const C_FIT_CAP: f64 = 50.0;
/// Relative tolerance on the per-node identities of the `l = n-1` quotient.
pub const IDENTITY_TOL: f64 = 1e-8;
/// Sample count per spec in the structure suite.
pub const SUITE_SAMPLES: usize = 10_000;

/// Per-node quantities of a 2-D solution, pinned nodes excluded.
struct NodeData {
    node: usize,
    band: bool,
    u: f64,
    w: f64,
    kappa: [f64; 2],
    hess_max: f64,
}

fn node_data(field: &ScalarField) -> Vec<NodeData> {
    let grid = &field.grid;
    (0..grid.len())
        .filter(|&k| !grid.is_pinned(k))
        .map(|k| {
            let d = field.derivatives(k);
            let g = node_geom(field.values[k], d);
            NodeData {
                node: k,
                band: grid.is_band(k),
                u: g.u,
                w: g.w,
                kappa: g.kappa,
                hess_max: d[UXX].abs().max(d[UYY].abs()).max(d[UXY].abs()),
            }
        })
        .collect()
}

fn eta(sigma: f64, d: &NodeData) -> f64 {
    (sigma - 1.0 / d.w) / d.u
}

/// Declared discretization slack `10 h (1 + ‖D²u‖_band)`.
pub fn band_slack(field: &ScalarField) -> f64 {
    let band_hess = node_data(field)
        .iter()
        .filter(|d| d.band)
        .map(|d| d.hess_max)
        .fold(0.0, f64::max);
    10.0 * field.grid.h * (1.0 + band_hess)
}

fn fmax(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(f64::NEG_INFINITY, f64::max)
}

/// Boundary angle: `max w` on `∂Ω` against `1/σ + C_fit ε`, and the
/// asymptotic-angle bound `η <= sqrt(1-σ²)/r₁ + ε(1+σ)/r₁²` plus slack.
/// The second is observational when violated, since the threshold on ε
/// below which it applies is not constructive.
pub fn boundary_angle_check(field: &ScalarField, r1: f64) -> [CheckReport; 2] {
    let sigma = field.sigma;
    let eps = field.eps;
    let ws = boundary_w_samples(field);
    let w_max = fmax(ws.iter().map(|(_, w)| *w));
    let w_mean = ws.iter().map(|(_, w)| w).sum::<f64>() / ws.len().max(1) as f64;
    let c_fit = ((w_max - 1.0 / sigma) / eps).max(0.0);
    let angle = CheckReport::new(
        "boundary_angle",
        CheckStatus::from_bool(w_max.is_finite() && c_fit <= C_FIT_CAP),
        w_max,
        1.0 / sigma + c_fit * eps,
        cite::BOUNDARY_ANGLE,
    )
    .with_detail(format!(
        "w_mean={w_mean:.6} c_fit={c_fit:.4} cap={C_FIT_CAP} arms={}",
        ws.len()
    ));

    let slack = band_slack(field);
    let limit = if r1.is_finite() {
        sqrt(1.0 - sigma * sigma) / r1 + eps * (1.0 + sigma) / (r1 * r1)
    } else {
        0.0
    };
    let eta_max = fmax(node_data(field).iter().map(|d| eta(sigma, d)));
    let ok = eta_max <= limit + slack;
    let bound = CheckReport::new(
        "asymptotic_angle_bound",
        if ok {
            CheckStatus::Pass
        } else {
            CheckStatus::Observational
        },
        eta_max,
        limit + slack,
        cite::ANGLE_BOUND,
    )
    .with_detail(format!("r1={r1} slack={slack:.4e}"));
    [angle, bound]
}

/// Maximum principle for `η = (σ - ν)/u`: interior maximum against the
/// boundary-band maximum plus the declared slack.
pub fn eta_maximum_principle(field: &ScalarField) -> CheckReport {
    let data = node_data(field);
    let sigma = field.sigma;
    let band = fmax(data.iter().filter(|d| d.band).map(|d| eta(sigma, d)));
    let interior = fmax(data.iter().filter(|d| !d.band).map(|d| eta(sigma, d)));
    let slack = band_slack(field);
    CheckReport::new(
        "eta_maximum_principle",
        CheckStatus::from_bool(interior <= band + slack),
        interior,
        band + slack,
        cite::ANGLE_MAX_PRINCIPLE,
    )
    .with_detail(format!("band_max={band:.6e} slack={slack:.4e}"))
}

/// The alternative behind the gradient bound: `uw` peaks either where
/// `Du = 0` (so at most `max u`) or on `∂Ω` (where it equals `ε w`).
pub fn gradient_bound_check(field: &ScalarField) -> CheckReport {
    let data = node_data(field);
    let hw_max = fmax(data.iter().map(|d| d.u * d.w));
    let u_max = field.max();
    let boundary = field.eps * fmax(boundary_w_samples(field).iter().map(|(_, w)| *w));
    let slack = band_slack(field) * u_max;
    let top = u_max.max(boundary);
    let arg = data
        .iter()
        .max_by(|a, b| (a.u * a.w).total_cmp(&(b.u * b.w)))
        .map(|d| d.node)
        .unwrap_or(0);
    let branch = if u_max >= boundary { "critical-point" } else { "boundary" };
    CheckReport::new(
        "gradient_bound",
        CheckStatus::from_bool(hw_max <= top + slack),
        hw_max,
        top + slack,
        cite::GRADIENT_ALTERNATIVE,
    )
    .with_detail(format!(
        "max_u={u_max:.6} eps_max_w={boundary:.6} branch={branch} argmax={:?}",
        field.grid.coord(arg)
    ))
}

/// Observational: `max_interior κ_max / (1 + max_band κ_max)`.
pub fn curvature_domination_check(field: &ScalarField) -> CheckReport {
    let data = node_data(field);
    let interior = fmax(data.iter().filter(|d| !d.band).map(|d| d.kappa[1]));
    let band = fmax(data.iter().filter(|d| d.band).map(|d| d.kappa[1]));
    let ratio = interior / (1.0 + band);
    CheckReport::new(
        "curvature_domination",
        CheckStatus::Observational,
        ratio,
        f64::NAN,
        cite::CURVATURE_DOMINATION,
    )
    .with_detail(format!("interior_max={interior:.6} band_max={band:.6}"))
}

/// For `f = H_n/H_{n-1}`: reports `max (u - θ)_+ κ_max` and checks the
/// per-node identities `1 <= Σ f_i <= n` and `Σ κ_i² f_i = σ²`.
pub fn interior_bound_hn_hn1(field: &ScalarField, spec: &CurvatureSpec, theta: f64) -> CheckReport {
    let name = "interior_bound_hn_hn1";
    let Some(q) = spec.as_quotient().filter(|q| q.l() + 1 == q.n()) else {
        return CheckReport::new(name, CheckStatus::Fail, f64::NAN, f64::NAN, cite::QUOTIENT_INTERIOR)
            .with_detail(format!("spec {spec} is not the l = n-1 quotient"));
    };
    let n = q.n() as f64;
    let sigma = field.sigma;
    let mut worst_sum = 0.0f64;
    let mut worst_identity = 0.0f64;
    let mut phi_kappa = 0.0f64;
    for d in node_data(field) {
        let (_, g) = spec.value_grad_unchecked(&d.kappa);
        let s1: f64 = g.iter().sum();
        let s2: f64 = g.iter().zip(&d.kappa).map(|(f, k)| f * k * k).sum();
        let below = (1.0 - 1e-12 - s1).max(0.0);
        let above = (s1 - n - 1e-12).max(0.0);
        worst_sum = worst_sum.max(below.max(above));
        worst_identity = worst_identity.max((s2 - sigma * sigma).abs() / (sigma * sigma));
        phi_kappa = phi_kappa.max((d.u - theta).max(0.0) * d.kappa[1]);
    }
    let ok = worst_sum == 0.0 && worst_identity <= IDENTITY_TOL;
    CheckReport::new(name, CheckStatus::from_bool(ok), worst_identity, IDENTITY_TOL, cite::QUOTIENT_INTERIOR)
        .with_detail(format!(
            "phi_kappa_max={phi_kappa:.6} theta={theta:.6} sum_fi_excess={worst_sum:.3e}"
        ))
}

/// Smallest eigenvalue of the discrete Hessian of `u² + |x|²` over unpinned
/// nodes; `u² + |x|² = ε² + |x|²` supplies the boundary values.
pub fn convexity_check(field: &ScalarField) -> CheckReport {
    let grid = &field.grid;
    let q: Vec<f64> = (0..grid.len())
        .map(|k| {
            let x = grid.coord(k);
            field.values[k] * field.values[k] + x[0] * x[0] + x[1] * x[1]
        })
        .collect();
    let e2 = field.eps * field.eps;
    let mut min_eig = f64::INFINITY;
    let mut at = 0;
    for k in (0..grid.len()).filter(|&k| !grid.is_pinned(k)) {
        let d = grid.derivatives_with(k, &q, |y| e2 + y[0] * y[0] + y[1] * y[1]);
        let (a, b, c) = (d[UXX], d[UXY], d[UYY]);
        let lo = 0.5 * (a + c) - sqrt(0.25 * (a - c) * (a - c) + b * b);
        if lo < min_eig {
            min_eig = lo;
            at = k;
        }
    }
    CheckReport::new("convexity", CheckStatus::from_bool(min_eig > 0.0), min_eig, 0.0, cite::CONVEXITY)
        .with_detail(format!("at={:?}", grid.coord(at)))
}

/// Every accepted Newton iterate stayed admissible and above `ε(1-1e-12)`.
pub fn iterate_check(reports: &[SolveReport]) -> CheckReport {
    let bad = reports.iter().filter(|r| !r.admissibility_ok).count();
    let accepted: usize = reports.iter().map(|r| r.accepted_iterates).sum();
    CheckReport::new(
        "admissible_iterates",
        CheckStatus::from_bool(bad == 0),
        bad as f64,
        0.0,
        cite::ADMISSIBLE_ITERATES,
    )
    .with_detail(format!("stages={} accepted_iterates={accepted}", reports.len()))
}

/// Strict ordering `u^{σ_i} > u^{σ_{i+1}}` of a sweep on a shared grid.
/// Fails at the first pair whose smallest nodal gap is not positive and
/// names the offending node.
pub fn nesting_check(sigmas: &[f64], fields: &[ScalarField]) -> CheckReport {
    let mut worst = (f64::INFINITY, 0usize, 0usize);
    for i in 1..fields.len() {
        let (lo, hi) = (&fields[i - 1], &fields[i]);
        for k in 0..lo.values.len().min(hi.values.len()) {
            let g = lo.values[k] - hi.values[k];
            if g < worst.0 {
                worst = (g, i, k);
            }
        }
    }
    let (gap, pair, node) = worst;
    let mut report = CheckReport::new(
        "nesting",
        CheckStatus::from_bool(gap > 0.0),
        gap,
        0.0,
        cite::NESTING,
    );
    if pair > 0 {
        let x = fields[pair].grid.coord(node);
        report.detail = format!(
            "sigma {}->{} node {node} at ({:.6}, {:.6})",
            sigmas[pair - 1],
            sigmas[pair],
            x[0],
            x[1]
        );
    }
    report
}

/// Structure conditions for each spec and, for quotients, the uniqueness
/// margin. Quotients outside `l ∈ {n-1, n-2}` report the margin as
/// observational: the condition is not claimed there.
pub fn run_structure_suite(specs: &[CurvatureSpec], seed: u64) -> Vec<CheckReport> {
    let mut out = Vec::new();
    for spec in specs {
        let s = check_structure(spec, SUITE_SAMPLES, seed);
        out.push(
            CheckReport::new(
                &format!("structure[{spec}]"),
                CheckStatus::from_bool(s.passed()),
                s.total_violations() as f64,
                0.0,
                cite::STRUCTURE,
            )
            .with_detail(format!(
                "concavity_worst={:.3e} homogeneity_worst={:.3e} limit={:.6}/{:.6}",
                s.concavity.worst, s.homogeneity.worst, s.limit_measured, s.limit_expected
            )),
        );
        if let Some(q) = spec.as_quotient() {
            let m = margin_survey(spec, SUITE_SAMPLES, seed);
            let claimed = q.l() + 1 == q.n() || q.l() + 2 == q.n();
            let ok = m.below_one_minus_f2 == 0 && m.nonpositive == 0 && m.closed_form_error <= 1e-10;
            let status = match (claimed, ok) {
                (true, ok) => CheckStatus::from_bool(ok),
                (false, _) => CheckStatus::Observational,
            };
            let mut detail = format!(
                "in_range={} min_margin={:.6e} closed_form_error={:.3e}",
                m.in_range, m.min_margin, m.closed_form_error
            );
            if !claimed {
                detail.push_str(" expected-outside-class");
            }
            out.push(
                CheckReport::new(
                    &format!("uniqueness_margin[{spec}]"),
                    status,
                    (m.below_one_minus_f2 + m.nonpositive) as f64,
                    0.0,
                    cite::UNIQUENESS_MARGIN,
                )
                .with_detail(detail),
            );
        }
    }
    out
}

/// The default spec list of the structure suite.
pub fn default_suite_specs() -> Vec<CurvatureSpec> {
    let mut v: Vec<CurvatureSpec> = [(2, 0), (2, 1), (3, 0), (3, 1), (3, 2), (4, 2), (4, 3)]
        .iter()
        .map(|&(n, l)| CurvatureSpec::quotient(n, l).expect("valid quotient"))
        .collect();
    v.push(
        CurvatureSpec::concave_sum(alloc::vec![
            (0.5, CurvatureSpec::quotient(2, 0).expect("valid")),
            (0.5, CurvatureSpec::quotient(2, 1).expect("valid")),
        ])
        .expect("weights sum to one"),
    );
    v
}

/// All solution checks that apply to a converged 2-D field.
pub fn solution_checks(
    field: &ScalarField,
    spec: &CurvatureSpec,
    reports: &[SolveReport],
    r1: f64,
) -> Vec<CheckReport> {
    let mut out: Vec<CheckReport> = boundary_angle_check(field, r1).into();
    out.push(eta_maximum_principle(field));
    out.push(gradient_bound_check(field));
    out.push(curvature_domination_check(field));
    if spec.as_quotient().is_some_and(|q| q.l() + 1 == q.n()) {
        out.push(interior_bound_hn_hn1(field, spec, field.max() / 4.0));
    }
    out.push(convexity_check(field));
    out.push(iterate_check(reports));
    out
}
