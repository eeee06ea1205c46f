//! Curvature functions on the positive cone `K_n^+ = {λ : λ_i > 0}`.
//!
//! The building blocks are the normalized elementary symmetric polynomials
//! `H_l(λ) = e_l(λ) / C(n, l)` and the curvature quotients
//! `f = (H_n / H_l)^{1/(n-l)}`, `0 <= l < n`. Quotients can be combined by
//! concave sums `Σ α_k g_k` and concave products `Π g_k^{α_k}` with positive
//! weights summing to one. Every such `f` is symmetric, increasing in each
//! argument, concave, homogeneous of degree one, and normalized so that
//! `f(1, …, 1) = 1`.
//!
//! Gradients are closed form. For a quotient,
//!
//! ```text
//! f_i = f / (n - l) · e_l(λ | i) / (λ_i e_l(λ))
//! ```
//!
//! where `e_l(λ | i)` is the elementary polynomial of `λ` with entry `i`
//! deleted. This is the usual `f/(n-l) (1/λ_i - ∂_i H_l / H_l)` written
//! without the subtraction, so every factor stays positive.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use libm::{log, pow};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dense::{frobenius, sym_eigen};
use crate::error::{Error, Result};

/// Weights of a concave combination must sum to one within this tolerance.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// A validated point of the positive cone.
#[derive(Debug, Clone, PartialEq)]
pub struct Lambda(Vec<f64>);

impl Lambda {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_cone(&values)?;
        Ok(Lambda(values))
    }

    /// The umbilic point `(t, …, t)`.
    pub fn umbilic(n: usize, t: f64) -> Result<Self> {
        Self::new(vec![t; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl core::ops::Deref for Lambda {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

fn check_cone(lambda: &[f64]) -> Result<()> {
    if lambda.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: 0,
        });
    }
    for (index, &value) in lambda.iter().enumerate() {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::ConeViolation { index, value });
        }
    }
    Ok(())
}

fn check_dim(spec_n: usize, lambda: &[f64]) -> Result<()> {
    if lambda.len() != spec_n {
        return Err(Error::DimensionMismatch {
            expected: spec_n,
            got: lambda.len(),
        });
    }
    check_cone(lambda)
}

/// Binomial coefficient as a float (exact for the small `n` used here).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c
}

/// All elementary symmetric polynomials `e_0 … e_n` by the product recurrence.
///
/// For positive entries the recurrence only adds positive terms, so it is
/// accurate to a few ulps regardless of the spread of `λ`.
pub fn elementary_all(lambda: &[f64]) -> Vec<f64> {
    let n = lambda.len();
    let mut e = vec![0.0; n + 1];
    e[0] = 1.0;
    for (i, &x) in lambda.iter().enumerate() {
        for k in (1..=i + 1).rev() {
            e[k] += x * e[k - 1];
        }
    }
    e
}

/// Elementary symmetric polynomials of `λ` with entry `skip` removed.
fn elementary_deleted(lambda: &[f64], skip: usize) -> Vec<f64> {
    let n = lambda.len();
    let mut e = vec![0.0; n];
    e[0] = 1.0;
    let mut count = 0;
    for (i, &x) in lambda.iter().enumerate() {
        if i == skip {
            continue;
        }
        count += 1;
        for k in (1..=count).rev() {
            e[k] += x * e[k - 1];
        }
    }
    e
}

/// `H_l(λ) = e_l(λ) / C(n, l)`; `H_0 = 1`.
pub fn normalized_elementary(lambda: &[f64], l: usize) -> Result<f64> {
    let n = lambda.len();
    if l > n {
        return Err(Error::IndexOutOfRange { index: l, max: n });
    }
    Ok(elementary_all(lambda)[l] / binomial(n, l))
}

fn normalized_all(lambda: &[f64]) -> Vec<f64> {
    let n = lambda.len();
    elementary_all(lambda)
        .into_iter()
        .enumerate()
        .map(|(l, e)| e / binomial(n, l))
        .collect()
}

/// The curvature quotient `(H_n / H_l)^{1/(n-l)}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Quotient {
    n: usize,
    l: usize,
}

impl Quotient {
    pub fn new(n: usize, l: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSpec("dimension n must be at least 1".into()));
        }
        if l >= n {
            return Err(Error::InvalidSpec(format!(
                "quotient index must satisfy 0 <= l < n, got n={n} l={l}"
            )));
        }
        Ok(Quotient { n, l })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> usize {
        self.l
    }

    fn value(&self, lambda: &[f64]) -> f64 {
        let (n, l) = (self.n, self.l);
        let e = elementary_all(lambda);
        let ratio = e[n] * binomial(n, l) / e[l];
        pow(ratio, 1.0 / (n - l) as f64)
    }

    fn value_and_grad(&self, lambda: &[f64]) -> (f64, Vec<f64>) {
        let (n, l) = (self.n, self.l);
        let e = elementary_all(lambda);
        let f = pow(e[n] * binomial(n, l) / e[l], 1.0 / (n - l) as f64);
        let scale = f / (n - l) as f64 / e[l];
        let grad = (0..n)
            .map(|i| {
                let e_del = if l == 0 {
                    1.0
                } else {
                    elementary_deleted(lambda, i)[l]
                };
                scale * e_del / lambda[i]
            })
            .collect();
        (f, grad)
    }

    /// `lim_{R→∞} f(1, …, 1, 1 + R) = (n / l)^{1/(n-l)}`; infinite for `l = 0`.
    pub fn asymptotic_limit(&self) -> f64 {
        if self.l == 0 {
            f64::INFINITY
        } else {
            pow(self.n as f64 / self.l as f64, 1.0 / (self.n - self.l) as f64)
        }
    }
}

/// A weighted family of curvature functions of a common dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Combination {
    n: usize,
    parts: Vec<(f64, CurvatureSpec)>,
}

impl Combination {
    fn new(parts: Vec<(f64, CurvatureSpec)>) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidSpec("a combination needs at least one part".into()))?;
        let n = first.1.dim();
        let mut total = 0.0;
        for (w, s) in &parts {
            if !(*w > 0.0) {
                return Err(Error::InvalidSpec(format!("weight {w} is not positive")));
            }
            if s.dim() != n {
                return Err(Error::InvalidSpec(format!(
                    "mixed dimensions {n} and {} in one combination",
                    s.dim()
                )));
            }
            total += w;
        }
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidSpec(format!("weights sum to {total}, not 1")));
        }
        Ok(Combination { n, parts })
    }

    pub fn parts(&self) -> &[(f64, CurvatureSpec)] {
        &self.parts
    }
}

/// Which symmetric curvature function `f` is prescribed.
#[derive(Debug, Clone, PartialEq)]
pub enum CurvatureSpec {
    Quotient(Quotient),
    ConcaveSum(Combination),
    ConcaveProduct(Combination),
}

impl CurvatureSpec {
    pub fn quotient(n: usize, l: usize) -> Result<Self> {
        Quotient::new(n, l).map(CurvatureSpec::Quotient)
    }

    pub fn concave_sum(parts: Vec<(f64, CurvatureSpec)>) -> Result<Self> {
        Combination::new(parts).map(CurvatureSpec::ConcaveSum)
    }

    pub fn concave_product(parts: Vec<(f64, CurvatureSpec)>) -> Result<Self> {
        Combination::new(parts).map(CurvatureSpec::ConcaveProduct)
    }

    pub fn dim(&self) -> usize {
        match self {
            CurvatureSpec::Quotient(q) => q.n,
            CurvatureSpec::ConcaveSum(c) | CurvatureSpec::ConcaveProduct(c) => c.n,
        }
    }

    pub fn as_quotient(&self) -> Option<Quotient> {
        match self {
            CurvatureSpec::Quotient(q) => Some(*q),
            _ => None,
        }
    }

    /// `f(λ)` without cone validation; callers guarantee `λ ∈ K_n^+`.
    pub(crate) fn value_unchecked(&self, lambda: &[f64]) -> f64 {
        match self {
            CurvatureSpec::Quotient(q) => q.value(lambda),
            CurvatureSpec::ConcaveSum(c) => c
                .parts
                .iter()
                .map(|(w, s)| w * s.value_unchecked(lambda))
                .sum(),
            CurvatureSpec::ConcaveProduct(c) => c
                .parts
                .iter()
                .map(|(w, s)| pow(s.value_unchecked(lambda), *w))
                .product(),
        }
    }

    pub(crate) fn value_grad_unchecked(&self, lambda: &[f64]) -> (f64, Vec<f64>) {
        let n = lambda.len();
        match self {
            CurvatureSpec::Quotient(q) => q.value_and_grad(lambda),
            CurvatureSpec::ConcaveSum(c) => {
                let mut f = 0.0;
                let mut g = vec![0.0; n];
                for (w, s) in &c.parts {
                    let (fs, gs) = s.value_grad_unchecked(lambda);
                    f += w * fs;
                    for (gi, gsi) in g.iter_mut().zip(gs) {
                        *gi += w * gsi;
                    }
                }
                (f, g)
            }
            CurvatureSpec::ConcaveProduct(c) => {
                let mut f = 1.0;
                let mut dlog = vec![0.0; n];
                for (w, s) in &c.parts {
                    let (fs, gs) = s.value_grad_unchecked(lambda);
                    f *= pow(fs, *w);
                    for (di, gsi) in dlog.iter_mut().zip(gs) {
                        *di += w * gsi / fs;
                    }
                }
                (f, dlog.into_iter().map(|d| f * d).collect())
            }
        }
    }

    /// Limit of `f(1, …, 1, 1 + R)` as `R → ∞`, from the quotient limits.
    pub fn asymptotic_limit(&self) -> f64 {
        match self {
            CurvatureSpec::Quotient(q) => q.asymptotic_limit(),
            CurvatureSpec::ConcaveSum(c) => {
                c.parts.iter().map(|(w, s)| w * s.asymptotic_limit()).sum()
            }
            CurvatureSpec::ConcaveProduct(c) => c
                .parts
                .iter()
                .map(|(w, s)| pow(s.asymptotic_limit(), *w))
                .product(),
        }
    }
}

impl fmt::Display for CurvatureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let write_parts = |f: &mut fmt::Formatter<'_>, name: &str, c: &Combination| {
            write!(f, "{name}(")?;
            for (i, (w, s)) in c.parts.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{w}*{s}")?;
            }
            write!(f, ")")
        };
        match self {
            CurvatureSpec::Quotient(q) => write!(f, "quotient n={} l={}", q.n, q.l),
            CurvatureSpec::ConcaveSum(c) => write_parts(f, "sum", c),
            CurvatureSpec::ConcaveProduct(c) => write_parts(f, "product", c),
        }
    }
}

/// Parses the text form used in configuration files:
///
/// ```text
/// quotient n=2 l=0
/// sum(0.5*quotient n=2 l=0, 0.5*quotient n=2 l=1)
/// product(0.25*quotient n=3 l=0, 0.75*quotient n=3 l=2)
/// ```
impl FromStr for CurvatureSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let text = text.trim();
        let bad = |msg: &str| Error::InvalidSpec(format!("{msg}: `{text}`"));
        for (prefix, is_sum) in [("sum(", true), ("product(", false)] {
            if let Some(rest) = text.strip_prefix(prefix) {
                let inner = rest
                    .strip_suffix(')')
                    .ok_or_else(|| bad("missing closing parenthesis"))?;
                let mut parts = Vec::new();
                for item in split_top_level(inner) {
                    let (w, s) = item
                        .split_once('*')
                        .ok_or_else(|| bad("combination parts are written weight*spec"))?;
                    let w: f64 = w.trim().parse().map_err(|_| bad("malformed weight"))?;
                    parts.push((w, s.parse()?));
                }
                return if is_sum {
                    Self::concave_sum(parts)
                } else {
                    Self::concave_product(parts)
                };
            }
        }
        let mut words = text.split_whitespace();
        if words.next() != Some("quotient") {
            return Err(bad("expected `quotient`, `sum(...)` or `product(...)`"));
        }
        let (mut n, mut l) = (None, None);
        for word in words {
            let (key, value) = word.split_once('=').ok_or_else(|| bad("expected key=value"))?;
            let value: usize = value.parse().map_err(|_| bad("malformed integer"))?;
            match key {
                "n" => n = Some(value),
                "l" => l = Some(value),
                _ => return Err(bad("unknown quotient parameter")),
            }
        }
        match (n, l) {
            (Some(n), Some(l)) => Self::quotient(n, l),
            _ => Err(bad("quotient needs both n and l")),
        }
    }
}

fn split_top_level(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in text.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&text[start..]);
    out
}

/// Value, gradient and (optionally) Hessian of `f` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct FEval {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: Option<Vec<f64>>,
}

pub fn f_eval(spec: &CurvatureSpec, lambda: &[f64]) -> Result<f64> {
    check_dim(spec.dim(), lambda)?;
    Ok(spec.value_unchecked(lambda))
}

pub fn f_grad(spec: &CurvatureSpec, lambda: &[f64]) -> Result<Vec<f64>> {
    check_dim(spec.dim(), lambda)?;
    Ok(spec.value_grad_unchecked(lambda).1)
}

/// Relative step of the central differences used for the Hessian.
const HESS_STEP: f64 = 1e-5;

/// Hessian of `f` by central differences of the closed-form gradient, with a
/// step proportional to each coordinate. The result is symmetrized.
pub fn f_hess(spec: &CurvatureSpec, lambda: &[f64]) -> Result<Vec<f64>> {
    check_dim(spec.dim(), lambda)?;
    let n = lambda.len();
    let mut h = vec![0.0; n * n];
    let mut probe = lambda.to_vec();
    for j in 0..n {
        let step = HESS_STEP * lambda[j];
        probe[j] = lambda[j] + step;
        let gp = spec.value_grad_unchecked(&probe).1;
        probe[j] = lambda[j] - step;
        let gm = spec.value_grad_unchecked(&probe).1;
        probe[j] = lambda[j];
        for i in 0..n {
            h[i * n + j] = (gp[i] - gm[i]) / (2.0 * step);
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let s = 0.5 * (h[i * n + j] + h[j * n + i]);
            h[i * n + j] = s;
            h[j * n + i] = s;
        }
    }
    Ok(h)
}

pub fn f_full(spec: &CurvatureSpec, lambda: &[f64], with_hessian: bool) -> Result<FEval> {
    check_dim(spec.dim(), lambda)?;
    let (value, grad) = spec.value_grad_unchecked(lambda);
    let hess = if with_hessian {
        Some(f_hess(spec, lambda)?)
    } else {
        None
    };
    Ok(FEval { value, grad, hess })
}

/// `Σ f_i = f/(n-l) · (n H_{n-1}/H_n - l H_{l-1}/H_l)`.
pub fn sum_fi_closed(q: Quotient, lambda: &[f64]) -> Result<f64> {
    check_dim(q.n, lambda)?;
    let (n, l) = (q.n, q.l);
    let h = normalized_all(lambda);
    let f = q.value(lambda);
    let lower = if l == 0 { 0.0 } else { l as f64 * h[l - 1] / h[l] };
    Ok(f / (n - l) as f64 * (n as f64 * h[n - 1] / h[n] - lower))
}

/// `Σ λ_i² f_i = f · H_{l+1} / H_l`.
pub fn sum_lambda2_fi_closed(q: Quotient, lambda: &[f64]) -> Result<f64> {
    check_dim(q.n, lambda)?;
    let h = normalized_all(lambda);
    Ok(q.value(lambda) * h[q.l + 1] / h[q.l])
}

/// `Σ f_i - Σ λ_i² f_i`, via
/// `f/(n-l) · (n H_{n-1}/H_n - l H_{l-1}/H_l - (n-l) H_{l+1}/H_l)`.
pub fn uniqueness_margin(q: Quotient, lambda: &[f64]) -> Result<f64> {
    check_dim(q.n, lambda)?;
    let (n, l) = (q.n, q.l);
    let h = normalized_all(lambda);
    let f = q.value(lambda);
    let lower = if l == 0 { 0.0 } else { l as f64 * h[l - 1] / h[l] };
    let bracket =
        n as f64 * h[n - 1] / h[n] - lower - (n - l) as f64 * h[l + 1] / h[l];
    Ok(f / (n - l) as f64 * bracket)
}

/// Both sides of the Newton-Maclaurin chain `H_{n-1}/H_n >= H_{l-1}/H_l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maclaurin {
    pub upper: f64,
    pub lower: f64,
}

impl Maclaurin {
    pub fn holds(&self) -> bool {
        self.upper >= self.lower * (1.0 - 1e-14)
    }

    pub fn is_equality(&self, rel_tol: f64) -> bool {
        (self.upper - self.lower).abs() <= rel_tol * self.upper.abs()
    }
}

pub fn maclaurin_pair(lambda: &[f64], l: usize) -> Result<Maclaurin> {
    check_cone(lambda)?;
    let n = lambda.len();
    if l == 0 || l >= n {
        return Err(Error::IndexOutOfRange {
            index: l,
            max: n.saturating_sub(1),
        });
    }
    let h = normalized_all(lambda);
    Ok(Maclaurin {
        upper: h[n - 1] / h[n],
        lower: h[l - 1] / h[l],
    })
}

pub fn maclaurin_check(lambda: &[f64], l: usize) -> Result<bool> {
    maclaurin_pair(lambda, l).map(|m| m.holds())
}

/// Log-uniform sample of the cone box `[lo, hi]^n`.
pub fn sample_log_uniform<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let (a, b) = (log(lo), log(hi));
    (0..n)
        .map(|_| libm::exp(a + (b - a) * rng.random::<f64>()))
        .collect()
}

/// Sampling box used by every randomized structure check.
pub const SAMPLE_LO: f64 = 1e-2;
pub const SAMPLE_HI: f64 = 1e2;
/// Shift used to probe the limit of `f(λ_1, …, λ_n + R)`.
pub const LIMIT_SHIFT: f64 = 1e6;

/// Tolerances of [`check_structure`].
pub mod tol {
    /// `|f(tλ) - t f(λ)| <= HOMOGENEITY · t f(λ)`.
    pub const HOMOGENEITY: f64 = 1e-12;
    /// Largest Hessian eigenvalue `<= CONCAVITY · (1 + ‖H‖_F)`.
    pub const CONCAVITY: f64 = 1e-8;
    /// Slack for the inequalities `f <= mean(λ)` and `Σ f_i >= 1`.
    pub const INEQUALITY: f64 = 1e-12;
    pub const NORMALIZATION: f64 = 1e-13;
    /// `|measured - expected| <= LIMIT` for the shifted-point limit.
    pub const LIMIT: f64 = 1e-3;
    /// `f(λ)` with one entry scaled by 1e-14 must fall below this fraction of `f(λ)`.
    pub const BOUNDARY_DECAY: f64 = 1e-2;
}

/// Counts and worst cases of one structural property over the samples.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Tally {
    pub violations: usize,
    /// Worst normalized excess; `<= 0` means every sample satisfied the property.
    pub worst: f64,
}

impl Tally {
    fn new() -> Self {
        Tally {
            violations: 0,
            worst: f64::NEG_INFINITY,
        }
    }

    fn record(&mut self, excess: f64) {
        if excess > 0.0 || excess.is_nan() {
            self.violations += 1;
        }
        if excess > self.worst || excess.is_nan() {
            self.worst = excess;
        }
    }
}

/// Result of [`check_structure`].
#[derive(Debug, Clone, PartialEq)]
pub struct StructureReport {
    pub spec: String,
    pub samples: usize,
    pub seed: u64,
    /// `f > 0` and `f_i > 0` in the cone.
    pub monotonicity: Tally,
    /// Hessian negative semidefinite.
    pub concavity: Tally,
    /// Degree-one homogeneity at `t ∈ {0.5, 2, 10}`.
    pub homogeneity: Tally,
    /// `f(λ) <= (1/n) Σ λ_i`.
    pub mean_bound: Tally,
    /// `Σ f_i >= 1`.
    pub sum_fi: Tally,
    /// `f` decays towards the cone boundary.
    pub boundary: Tally,
    pub normalization_error: f64,
    pub sum_fi_at_ones: f64,
    /// `f(1, …, 1, 1 + R)` at `R = LIMIT_SHIFT`.
    pub limit_measured: f64,
    /// Smallest value of `f(λ + R e_n)` over base points in a ball of radius
    /// 0.1 around the all-ones point.
    pub limit_ball_min: f64,
    pub limit_expected: f64,
}

impl StructureReport {
    pub fn total_violations(&self) -> usize {
        self.monotonicity.violations
            + self.concavity.violations
            + self.homogeneity.violations
            + self.mean_bound.violations
            + self.sum_fi.violations
            + self.boundary.violations
    }

    pub fn limit_ok(&self) -> bool {
        if self.limit_expected.is_finite() {
            (self.limit_measured - self.limit_expected).abs() <= tol::LIMIT
        } else {
            self.limit_measured > 1.0
        }
    }

    pub fn passed(&self) -> bool {
        self.total_violations() == 0
            && self.normalization_error <= tol::NORMALIZATION
            && self.limit_ok()
    }
}

/// Randomized verification of the structure conditions on `f`.
///
/// Draws `sample_count` log-uniform points in `[1e-2, 1e2]^n` from a ChaCha8
/// stream seeded with `seed` and checks positivity and monotonicity,
/// concavity of the finite-difference Hessian, homogeneity, the bounds
/// `f <= mean(λ)` and `Σ f_i >= 1`, and decay towards the cone boundary.
/// Normalization and the limit along `λ_n → ∞` are measured separately.
pub fn check_structure(spec: &CurvatureSpec, sample_count: usize, seed: u64) -> StructureReport {
    let n = spec.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut monotonicity = Tally::new();
    let mut concavity = Tally::new();
    let mut homogeneity = Tally::new();
    let mut mean_bound = Tally::new();
    let mut sum_fi = Tally::new();
    let mut boundary = Tally::new();

    for _ in 0..sample_count.max(1) {
        let lambda = sample_log_uniform(&mut rng, n, SAMPLE_LO, SAMPLE_HI);
        let (f, grad) = spec.value_grad_unchecked(&lambda);
        let min_grad = grad.iter().copied().fold(f64::INFINITY, f64::min);
        monotonicity.record(if f > 0.0 && min_grad > 0.0 { -1.0 } else { 1.0 });

        let hess = f_hess(spec, &lambda).expect("sampled point lies in the cone");
        let eig = sym_eigen(&hess, n);
        let top = eig.values[n - 1];
        concavity.record(top / (1.0 + frobenius(&hess)) - tol::CONCAVITY);

        for t in [0.5, 2.0, 10.0] {
            let scaled: Vec<f64> = lambda.iter().map(|x| t * x).collect();
            let ft = spec.value_unchecked(&scaled);
            homogeneity.record((ft - t * f).abs() / (t * f) - tol::HOMOGENEITY);
        }

        let mean = lambda.iter().sum::<f64>() / n as f64;
        mean_bound.record((f - mean) / mean - tol::INEQUALITY);
        sum_fi.record(1.0 - grad.iter().sum::<f64>() - tol::INEQUALITY);

        let mut squeezed = lambda.clone();
        squeezed[0] *= 1e-14;
        let f0 = spec.value_unchecked(&squeezed);
        boundary.record(f0 / f - tol::BOUNDARY_DECAY);
    }

    let ones = vec![1.0; n];
    let (f1, g1) = spec.value_grad_unchecked(&ones);
    let mut shifted = ones.clone();
    shifted[n - 1] += LIMIT_SHIFT;
    let limit_measured = spec.value_unchecked(&shifted);
    let mut limit_ball_min = f64::INFINITY;
    for _ in 0..64 {
        let mut base: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        let norm = libm::sqrt(base.iter().map(|x| x * x).sum::<f64>()).max(1e-300);
        let radius = 0.1 * rng.random::<f64>();
        for b in base.iter_mut() {
            *b = 1.0 + radius * *b / norm;
        }
        base[n - 1] += LIMIT_SHIFT;
        limit_ball_min = limit_ball_min.min(spec.value_unchecked(&base));
    }

    StructureReport {
        spec: spec.to_string(),
        samples: sample_count.max(1),
        seed,
        monotonicity,
        concavity,
        homogeneity,
        mean_bound,
        sum_fi,
        boundary,
        normalization_error: (f1 - 1.0).abs(),
        sum_fi_at_ones: g1.iter().sum(),
        limit_measured,
        limit_ball_min,
        limit_expected: spec.asymptotic_limit(),
    }
}

/// Sampled statistics of the uniqueness margin `Σ f_i - Σ λ_i² f_i` on the
/// part of the cone where `0 < f < 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginReport {
    pub spec: String,
    pub samples: usize,
    /// Samples with `f < 1`, the only ones the margin condition speaks about.
    pub in_range: usize,
    /// Largest `|closed - direct| / (Σ f_i + Σ λ_i² f_i)` (quotients only).
    pub closed_form_error: f64,
    /// Samples with margin `<= 0`.
    pub nonpositive: usize,
    /// Samples with margin `< 1 - f² - 1e-9`.
    pub below_one_minus_f2: usize,
    pub min_margin: f64,
}

/// Slack on the lower bound `margin >= 1 - f²`.
pub const MARGIN_SLACK: f64 = 1e-9;

/// Samples the uniqueness margin. The closed form is used for quotients and
/// compared with the direct summation `Σ (1 - λ_i²) f_i`; other specs use the
/// direct sum only.
pub fn margin_survey(spec: &CurvatureSpec, sample_count: usize, seed: u64) -> MarginReport {
    let n = spec.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = MarginReport {
        spec: spec.to_string(),
        samples: sample_count,
        in_range: 0,
        closed_form_error: 0.0,
        nonpositive: 0,
        below_one_minus_f2: 0,
        min_margin: f64::INFINITY,
    };
    for _ in 0..sample_count {
        let lambda = sample_log_uniform(&mut rng, n, SAMPLE_LO, SAMPLE_HI);
        let (f, grad) = spec.value_grad_unchecked(&lambda);
        let s1: f64 = grad.iter().sum();
        let s2: f64 = grad.iter().zip(&lambda).map(|(g, x)| g * x * x).sum();
        let direct = s1 - s2;
        let margin = match spec.as_quotient() {
            Some(q) => {
                let closed = uniqueness_margin(q, &lambda).expect("cone point");
                let err = (closed - direct).abs() / (s1 + s2);
                report.closed_form_error = report.closed_form_error.max(err);
                closed
            }
            None => direct,
        };
        if f < 1.0 {
            report.in_range += 1;
            report.min_margin = report.min_margin.min(margin);
            if margin <= 0.0 {
                report.nonpositive += 1;
            }
            if margin < 1.0 - f * f - MARGIN_SLACK {
                report.below_one_minus_f2 += 1;
            }
        }
    }
    report
}

/// Whether `f` belongs to the class with `Σ f_i > Σ λ_i² f_i` on `{0 < f < 1}`.
///
/// Quotients with `l = n-1` or `l = n-2` are in the class outright; any other
/// spec is certified by sampling.
pub fn in_uniqueness_class(spec: &CurvatureSpec, sample_count: usize, seed: u64) -> bool {
    if let Some(q) = spec.as_quotient() {
        if q.l + 1 == q.n || q.l + 2 == q.n {
            return true;
        }
    }
    margin_survey(spec, sample_count, seed).nonpositive == 0
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force e_l by enumerating all l-subsets.
    fn elementary_brute(lambda: &[f64], l: usize) -> f64 {
        let n = lambda.len();
        (0u32..(1 << n))
            .filter(|m| m.count_ones() as usize == l)
            .map(|m| {
                (0..n)
                    .filter(|i| m & (1 << i) != 0)
                    .map(|i| lambda[i])
                    .product::<f64>()
            })
            .sum()
    }

    fn fd_grad(spec: &CurvatureSpec, lambda: &[f64], step: f64) -> Vec<f64> {
        let mut p = lambda.to_vec();
        (0..lambda.len())
            .map(|i| {
                let h = step * lambda[i];
                p[i] = lambda[i] + h;
                let fp = f_eval(spec, &p).unwrap();
                p[i] = lambda[i] - h;
                let fm = f_eval(spec, &p).unwrap();
                p[i] = lambda[i];
                (fp - fm) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn elementary_matches_subset_enumeration() {
        let lambda = [0.3, 1.7, 2.0, 5.5, 0.01];
        let e = elementary_all(&lambda);
        for l in 0..=5 {
            let b = elementary_brute(&lambda, l);
            assert!((e[l] - b).abs() <= 1e-14 * b.abs().max(1.0), "l={l}");
        }
    }

    #[test]
    fn normalized_elementary_examples() {
        assert_eq!(normalized_elementary(&[4.0, 7.0], 0).unwrap(), 1.0);
        assert_eq!(normalized_elementary(&[1.0, 1.0, 1.0], 2).unwrap(), 1.0);
        // e_2(1,2,3) = 2 + 3 + 6 = 11 by enumeration; C(3,2) = 3.
        assert_eq!(elementary_brute(&[1.0, 2.0, 3.0], 2), 11.0);
        let h = normalized_elementary(&[1.0, 2.0, 3.0], 2).unwrap();
        assert!((h - 11.0 / 3.0).abs() < 1e-15);
        assert_eq!(
            normalized_elementary(&[1.0, 2.0], 3),
            Err(Error::IndexOutOfRange { index: 3, max: 2 })
        );
    }

    #[test]
    fn f_eval_examples() {
        for (n, l) in [(2, 0), (2, 1), (3, 0), (3, 1), (3, 2), (4, 2)] {
            let s = CurvatureSpec::quotient(n, l).unwrap();
            assert!((f_eval(&s, &vec![1.0; n]).unwrap() - 1.0).abs() < 1e-15);
            assert!((f_eval(&s, &vec![2.0; n]).unwrap() - 2.0).abs() < 1e-14);
        }
        let k = CurvatureSpec::quotient(2, 0).unwrap();
        assert!((f_eval(&k, &[4.0, 9.0]).unwrap() - 6.0).abs() < 1e-14);
        assert_eq!(
            f_eval(&k, &[1.0, -2.0]),
            Err(Error::ConeViolation {
                index: 1,
                value: -2.0
            })
        );
        assert_eq!(
            f_eval(&k, &[1.0, 0.0]),
            Err(Error::ConeViolation { index: 1, value: 0.0 })
        );
    }

    #[test]
    fn gradient_examples() {
        let s = CurvatureSpec::quotient(3, 1).unwrap();
        for g in f_grad(&s, &[1.0, 1.0, 1.0]).unwrap() {
            assert!((g - 1.0 / 3.0).abs() < 1e-15);
        }
        // Frozen from central differences of f = sqrt(λ1 λ2) at (4, 9), step 1e-6.
        let k = CurvatureSpec::quotient(2, 0).unwrap();
        let fd = fd_grad(&k, &[4.0, 9.0], 1e-6);
        assert!((fd[0] - 0.75).abs() < 1e-8 && (fd[1] - 1.0 / 3.0).abs() < 1e-8);
        let g = f_grad(&k, &[4.0, 9.0]).unwrap();
        assert!((g[0] - 0.75).abs() < 1e-15);
        assert!((g[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn hessian_of_combination_is_weighted_sum() {
        let a = CurvatureSpec::quotient(2, 0).unwrap();
        let b = CurvatureSpec::quotient(2, 1).unwrap();
        let sum = CurvatureSpec::concave_sum(vec![(0.3, a.clone()), (0.7, b.clone())]).unwrap();
        let lam = [0.7, 2.9];
        let (ha, hb, hs) = (
            f_hess(&a, &lam).unwrap(),
            f_hess(&b, &lam).unwrap(),
            f_hess(&sum, &lam).unwrap(),
        );
        for i in 0..4 {
            assert!((hs[i] - 0.3 * ha[i] - 0.7 * hb[i]).abs() < 1e-8);
        }
        let h1 = f_hess(&a, &[1.0, 1.0]).unwrap();
        assert!(sym_eigen(&h1, 2).values.iter().all(|&v| v <= 1e-9));
    }

    #[test]
    fn closed_forms_at_umbilic_points() {
        for (n, l) in [(2, 0), (2, 1), (3, 1), (4, 2), (5, 4)] {
            let q = Quotient::new(n, l).unwrap();
            for t in [0.1, 1.0, 3.0] {
                let lam = vec![t; n];
                assert!((sum_fi_closed(q, &lam).unwrap() - 1.0).abs() < 1e-13);
                assert!((sum_lambda2_fi_closed(q, &lam).unwrap() - t * t).abs() < 1e-12 * t * t);
                assert!((uniqueness_margin(q, &lam).unwrap() - (1.0 - t * t)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn closed_forms_match_direct_sums() {
        let lam = [1.0, 2.0, 3.0];
        for l in 0..3 {
            let q = Quotient::new(3, l).unwrap();
            let g = f_grad(&CurvatureSpec::Quotient(q), &lam).unwrap();
            let s1: f64 = g.iter().sum();
            let s2: f64 = g.iter().zip(lam).map(|(g, x)| g * x * x).sum();
            assert!((sum_fi_closed(q, &lam).unwrap() - s1).abs() < 1e-13 * s1);
            assert!((sum_lambda2_fi_closed(q, &lam).unwrap() - s2).abs() < 1e-13 * s2);
        }
        // l = n-1: Σ λ_i² f_i = f².
        let q = Quotient::new(2, 1).unwrap();
        let lam = [0.3, 2.2];
        let f = f_eval(&CurvatureSpec::Quotient(q), &lam).unwrap();
        assert!((sum_lambda2_fi_closed(q, &lam).unwrap() - f * f).abs() < 1e-15);
    }

    #[test]
    fn maclaurin_examples() {
        let m = maclaurin_pair(&[1.0, 1.0, 1.0], 1).unwrap();
        assert!(m.holds() && m.is_equality(1e-15));
        // (1,2): H_1/H_2 = 1.5/2 = 0.75 vs H_0/H_1 = 1/1.5.
        let m = maclaurin_pair(&[1.0, 2.0], 1).unwrap();
        assert!((m.upper - 0.75).abs() < 1e-15 && (m.lower - 2.0 / 3.0).abs() < 1e-15);
        assert!(m.holds() && !m.is_equality(1e-6));
        // (1,1,5), l=2: H_2/H_3 = (11/3)/5 = 11/15 vs H_1/H_2 = (7/3)/(11/3) = 7/11.
        let m = maclaurin_pair(&[1.0, 1.0, 5.0], 2).unwrap();
        assert!((m.upper - 11.0 / 15.0).abs() < 1e-15 && (m.lower - 7.0 / 11.0).abs() < 1e-15);
        assert!(maclaurin_check(&[1.0, 1.0, 5.0], 1).unwrap());
    }

    #[test]
    fn spec_text_round_trip_and_errors() {
        for text in [
            "quotient n=2 l=0",
            "sum(0.5*quotient n=2 l=0, 0.5*quotient n=2 l=1)",
            "product(0.25*quotient n=3 l=0, 0.75*sum(0.5*quotient n=3 l=1, 0.5*quotient n=3 l=2))",
        ] {
            let s: CurvatureSpec = text.parse().unwrap();
            assert_eq!(s.to_string(), text);
        }
        assert!("quotient n=2 l=2".parse::<CurvatureSpec>().is_err());
        assert!("sum(0.5*quotient n=2 l=0, 0.6*quotient n=2 l=1)"
            .parse::<CurvatureSpec>()
            .is_err());
        assert!("sum(0.5*quotient n=2 l=0, 0.5*quotient n=3 l=1)"
            .parse::<CurvatureSpec>()
            .is_err());
        assert!("gauss".parse::<CurvatureSpec>().is_err());
    }

    #[test]
    fn structure_report_for_mean_quotient() {
        let s = CurvatureSpec::quotient(3, 1).unwrap();
        let r = check_structure(&s, 500, 11);
        assert!(r.passed(), "{r:?}");
        assert!((r.limit_measured - libm::sqrt(3.0)).abs() < 1e-3);
        assert!((r.sum_fi_at_ones - 1.0).abs() < 1e-15);
    }
}
