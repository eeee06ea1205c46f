//! Rotationally symmetric graphs over a ball of radius `δ` in any dimension.
//!
//! With `u(x) = U(s)`, `s = |x|²`, the profile is smooth in `s` and the
//! centre condition `u'(0) = 0` is automatic. Writing `w = sqrt(1 + 4sU'²)`,
//! the hyperbolic principal curvatures are
//!
//! ```text
//! κ_m = U (2U' + 4sU'') / w³ + 1/w      (meridian, once)
//! κ_p = 2 U U' / w + 1/w                (parallels, n - 1 times)
//! ```
//!
//! The equation `f(κ_m, κ_p, …, κ_p) = σ` with `U(δ²) = ε` is collocated at
//! Chebyshev points in `s` and solved by damped Newton with a dense
//! analytic Jacobian.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use libm::{cos, sqrt};

use crate::dense::lu_solve;
use crate::error::{Error, Result};
use crate::hypgeo::EquidistantSphere;
use crate::symfunc::CurvatureSpec;

/// Default number of Chebyshev intervals.
pub const DEFAULT_NODES: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub n: usize,
    pub delta: f64,
    pub sigma: f64,
    pub eps: f64,
    /// Collocation points in `s`, from `δ²` (index 0) down to 0.
    pub s: Vec<f64>,
    /// `U` at the collocation points; `values[0] = ε`.
    pub values: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub max_residual: f64,
}

/// Chebyshev points `cos(πj/N)` and the differentiation matrix on `[-1, 1]`.
fn cheb(n: usize) -> (Vec<f64>, Vec<f64>) {
    let x: Vec<f64> = (0..=n)
        .map(|j| cos(core::f64::consts::PI * j as f64 / n as f64))
        .collect();
    let m = n + 1;
    let c = |j: usize| {
        let e = if j == 0 || j == n { 2.0 } else { 1.0 };
        if j % 2 == 0 {
            e
        } else {
            -e
        }
    };
    let mut d = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            if i != j {
                d[i * m + j] = c(i) / c(j) / (x[i] - x[j]);
            }
        }
    }
    // Diagonal by negative row sums keeps constants in the kernel.
    for i in 0..m {
        let s: f64 = (0..m).filter(|&j| j != i).map(|j| d[i * m + j]).sum();
        d[i * m + i] = -s;
    }
    (x, d)
}

struct Collocation {
    s: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
    m: usize,
}

impl Collocation {
    fn new(nodes: usize, delta: f64) -> Self {
        let (x, dx) = cheb(nodes);
        let m = nodes + 1;
        let scale = 2.0 / (delta * delta);
        let s = x.iter().map(|xi| 0.5 * delta * delta * (1.0 + xi)).collect();
        let d1: Vec<f64> = dx.iter().map(|v| v * scale).collect();
        let mut d2 = vec![0.0; m * m];
        for i in 0..m {
            for k in 0..m {
                let a = d1[i * m + k];
                if a != 0.0 {
                    for j in 0..m {
                        d2[i * m + j] += a * d1[k * m + j];
                    }
                }
            }
        }
        Collocation { s, d1, d2, m }
    }

    fn derivs(&self, u: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let m = self.m;
        let mut p = vec![0.0; m];
        let mut q = vec![0.0; m];
        for i in 0..m {
            for j in 0..m {
                p[i] += self.d1[i * m + j] * u[j];
                q[i] += self.d2[i * m + j] * u[j];
            }
        }
        (p, q)
    }
}

/// Meridian and parallel curvature from `(s, U, U', U'')`.
pub fn profile_curvatures(s: f64, u: f64, up: f64, upp: f64) -> (f64, f64) {
    let w = sqrt(1.0 + 4.0 * s * up * up);
    let a = 2.0 * up + 4.0 * s * upp;
    (u * a / (w * w * w) + 1.0 / w, 2.0 * u * up / w + 1.0 / w)
}

/// Partials of `(κ_m, κ_p)` with respect to `(U, U', U'')`.
fn curvature_partials(s: f64, u: f64, up: f64, upp: f64) -> ([f64; 3], [f64; 3]) {
    let w = sqrt(1.0 + 4.0 * s * up * up);
    let w2 = w * w;
    let w3 = w2 * w;
    let a = 2.0 * up + 4.0 * s * upp;
    let dw = 4.0 * s * up / w;
    let km = [
        a / w3,
        2.0 * u / w3 - 3.0 * u * a / (w3 * w) * dw - dw / w2,
        4.0 * s * u / w3,
    ];
    let kp = [2.0 * up / w, 2.0 * u / w - 2.0 * u * up / w2 * dw - dw / w2, 0.0];
    (km, kp)
}

fn lambda_of(n: usize, km: f64, kp: f64) -> Vec<f64> {
    let mut l = vec![kp; n];
    l[0] = km;
    l
}

fn residuals(
    spec: &CurvatureSpec,
    col: &Collocation,
    u: &[f64],
    n: usize,
    sigma: f64,
) -> Option<Vec<f64>> {
    let (p, q) = col.derivs(u);
    let mut r = vec![0.0; col.m - 1];
    for i in 1..col.m {
        let (km, kp) = profile_curvatures(col.s[i], u[i], p[i], q[i]);
        if !(km > 0.0 && kp > 0.0 && u[i] > 0.0) {
            return None;
        }
        r[i - 1] = spec.value_unchecked(&lambda_of(n, km, kp)) - sigma;
    }
    Some(r)
}

/// Solves the radial problem with [`DEFAULT_NODES`] collocation intervals.
pub fn radial_solve(
    spec: &CurvatureSpec,
    delta: f64,
    sigma: f64,
    eps: f64,
    n: usize,
) -> Result<RadialProfile> {
    radial_solve_with(spec, delta, sigma, eps, n, DEFAULT_NODES)
}

pub fn radial_solve_with(
    spec: &CurvatureSpec,
    delta: f64,
    sigma: f64,
    eps: f64,
    n: usize,
    nodes: usize,
) -> Result<RadialProfile> {
    if spec.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: spec.dim(),
        });
    }
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::InvalidConfig(format!("sigma must lie in (0, 1), got {sigma}")));
    }
    if !(delta > 0.0 && eps > 0.0) || nodes < 4 {
        return Err(Error::InvalidConfig("radius, epsilon and node count must be positive".into()));
    }
    let col = Collocation::new(nodes, delta);
    let m = col.m;
    // Start from the ε-level sphere of a nearby σ: admissible, not exact.
    let start_sigma = if sigma < 0.5 { sigma + 0.05 } else { sigma - 0.05 };
    let sph = EquidistantSphere::at_level(delta, start_sigma, eps)?;
    let mut u: Vec<f64> = col.s.iter().map(|&s| sph.height(&[sqrt(s)])).collect();
    u[0] = eps;

    let mut r = residuals(spec, &col, &u, n, sigma)
        .ok_or_else(|| Error::NotConverged("initial profile is inadmissible".into()))?;
    let mut iterations = 0;
    let max_abs = |v: &[f64]| v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let norm = |v: &[f64]| sqrt(v.iter().map(|x| x * x).sum());
    let mut converged = false;
    while iterations < 60 {
        if max_abs(&r) <= 1e-13 {
            converged = true;
            break;
        }
        iterations += 1;
        let (p, q) = col.derivs(&u);
        let k = m - 1;
        let mut jac = vec![0.0; k * k];
        for i in 1..m {
            let (km, kp) = profile_curvatures(col.s[i], u[i], p[i], q[i]);
            let (_, g) = spec.value_grad_unchecked(&lambda_of(n, km, kp));
            let fm = g[0];
            let fp: f64 = g[1..].iter().sum();
            let (dm, dp) = curvature_partials(col.s[i], u[i], p[i], q[i]);
            for j in 1..m {
                let mut v = (fm * dm[1] + fp * dp[1]) * col.d1[i * m + j]
                    + (fm * dm[2] + fp * dp[2]) * col.d2[i * m + j];
                if i == j {
                    v += fm * dm[0] + fp * dp[0];
                }
                jac[(i - 1) * k + (j - 1)] = v;
            }
        }
        let mut step: Vec<f64> = r.iter().map(|x| -x).collect();
        lu_solve(&mut jac, k, &mut step)?;
        let r0 = norm(&r);
        let mut t = 1.0;
        let accepted = loop {
            let mut trial = u.clone();
            for j in 1..m {
                trial[j] += t * step[j - 1];
            }
            if let Some(rt) = residuals(spec, &col, &trial, n, sigma) {
                if norm(&rt) <= (1.0 - 1e-4 * t) * r0 || max_abs(&rt) <= 1e-13 {
                    break Some((trial, rt));
                }
            }
            t *= 0.5;
            if t < 1.0 / 1024.0 {
                break None;
            }
        };
        match accepted {
            Some((nu, nr)) => {
                u = nu;
                r = nr;
            }
            None => break,
        }
    }
    // Roundoff floor of the spectral derivatives; accept it if reached.
    if !converged && max_abs(&r) <= 1e-10 {
        converged = true;
    }
    Ok(RadialProfile {
        n,
        delta,
        sigma,
        eps,
        s: col.s,
        values: u,
        converged,
        iterations,
        max_residual: max_abs(&r),
    })
}

impl RadialProfile {
    /// Barycentric interpolation of the profile at radius `r <= δ`.
    pub fn eval(&self, r: f64) -> f64 {
        let s = r * r;
        let m = self.s.len();
        let (mut num, mut den) = (0.0, 0.0);
        for j in 0..m {
            let d = s - self.s[j];
            if d == 0.0 {
                return self.values[j];
            }
            let mut wj = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == m - 1 {
                wj *= 0.5;
            }
            num += wj / d * self.values[j];
            den += wj / d;
        }
        num / den
    }

    /// Largest nodal deviation from the ε-level equidistant sphere.
    pub fn sphere_error(&self) -> Result<f64> {
        let sph = EquidistantSphere::at_level(self.delta, self.sigma, self.eps)?;
        Ok(self
            .s
            .iter()
            .zip(&self.values)
            .map(|(&s, &u)| (u - sph.height(&[sqrt(s)])).abs())
            .fold(0.0, f64::max))
    }

    /// `(κ_m, κ_p)` at every collocation point.
    pub fn curvatures(&self) -> Vec<(f64, f64)> {
        let col = Collocation::new(self.s.len() - 1, self.delta);
        let (p, q) = col.derivs(&self.values);
        (0..self.s.len())
            .map(|i| profile_curvatures(self.s[i], self.values[i], p[i], q[i]))
            .collect()
    }
}
