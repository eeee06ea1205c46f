//! Pointwise geometry of a graph `x_{n+1} = u(x)` in the upper half-space
//! `{x_{n+1} > 0}` with metric `Σ dx_i² / x_{n+1}²`.
//!
//! The upward Euclidean normal is `ν = (-Du, 1) / w` with
//! `w = sqrt(1 + |Du|²)`, so `ν^{n+1} = 1/w`. With `G = I + Du Duᵀ` and
//! `Q = G^{-1/2} = I - Du Duᵀ / (w (1 + w))`, the Euclidean principal
//! curvatures are the eigenvalues of `Q D²u Q / w` and the hyperbolic ones are
//! `κ_i = u κ^e_i + ν^{n+1}`.

use alloc::vec;
use alloc::vec::Vec;

use libm::{atanh, log, sqrt, tanh};

use crate::dense::{matmul, sym_eigen, SymEigen};
use crate::error::{Error, Result};
use crate::symfunc::CurvatureSpec;

/// Height, gradient and Hessian of a graph at one point.
///
/// `d2u` is row-major `n × n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSample {
    pub u: f64,
    pub du: Vec<f64>,
    pub d2u: Vec<f64>,
}

impl GraphSample {
    pub fn new(u: f64, du: Vec<f64>, d2u: Vec<f64>) -> Result<Self> {
        let n = du.len();
        if d2u.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: d2u.len(),
            });
        }
        let s = GraphSample { u, du, d2u };
        s.check_height()?;
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.du.len()
    }

    pub fn w(&self) -> f64 {
        sqrt(1.0 + self.du.iter().map(|p| p * p).sum::<f64>())
    }

    fn check_height(&self) -> Result<()> {
        if self.u > 0.0 && self.u.is_finite() {
            Ok(())
        } else {
            Err(Error::NonPositiveHeight(self.u))
        }
    }
}

/// Geometry bundle at one point of the graph.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapePoint {
    pub w: f64,
    /// `ν^{n+1} = 1/w`.
    pub nu_up: f64,
    /// Euclidean principal curvatures, ascending.
    pub kappa_euclid: Vec<f64>,
    /// Hyperbolic principal curvatures `u κ^e + ν^{n+1}`, ascending.
    pub kappa_hyp: Vec<f64>,
    /// Hyperbolic curvatures recomputed from `g^{-1} h` directly.
    pub kappa_hyp_direct: Vec<f64>,
    pub admissible: bool,
    /// `(σ - ν^{n+1}) / u`, present when a target σ was supplied.
    pub eta: Option<f64>,
}

impl ShapePoint {
    /// Largest componentwise gap between the two curvature routes, relative
    /// to `1 + max |κ|`.
    pub fn route_gap(&self) -> f64 {
        let scale = 1.0 + self.kappa_hyp.iter().fold(0.0f64, |m, k| m.max(k.abs()));
        self.kappa_hyp
            .iter()
            .zip(&self.kappa_hyp_direct)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
            / scale
    }

    pub fn kappa_min(&self) -> f64 {
        self.kappa_hyp[0]
    }

    pub fn kappa_max(&self) -> f64 {
        self.kappa_hyp[self.kappa_hyp.len() - 1]
    }
}

/// `Q = (I + p pᵀ)^{-1/2} = I - p pᵀ / (w (1 + w))`.
pub fn inverse_sqrt_metric(du: &[f64]) -> Vec<f64> {
    let n = du.len();
    let w = sqrt(1.0 + du.iter().map(|p| p * p).sum::<f64>());
    let c = 1.0 / (w * (1.0 + w));
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            q[i * n + j] = if i == j { 1.0 } else { 0.0 } - c * du[i] * du[j];
        }
    }
    q
}

/// `(δ_ij + u_i u_j) / u²`.
pub fn first_fundamental(s: &GraphSample) -> Result<Vec<f64>> {
    s.check_height()?;
    let n = s.dim();
    let u2 = s.u * s.u;
    let mut g = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            g[i * n + j] = (if i == j { 1.0 } else { 0.0 } + s.du[i] * s.du[j]) / u2;
        }
    }
    Ok(g)
}

/// `δ_ij + u_i u_j + u u_ij`; positive definite exactly on admissible points.
pub fn admissibility_matrix(s: &GraphSample) -> Vec<f64> {
    let n = s.dim();
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] =
                if i == j { 1.0 } else { 0.0 } + s.du[i] * s.du[j] + s.u * s.d2u[i * n + j];
        }
    }
    a
}

/// `(δ_ij + u_i u_j + u u_ij) / (u² w)`.
pub fn second_fundamental(s: &GraphSample) -> Result<Vec<f64>> {
    s.check_height()?;
    let scale = 1.0 / (s.u * s.u * s.w());
    Ok(admissibility_matrix(s).into_iter().map(|a| a * scale).collect())
}

/// Eigen-decomposition of `Q D²u Q`; eigenvalues divided by `w` are the
/// Euclidean principal curvatures and the eigenvectors give the principal
/// frame in `Q`-coordinates.
pub fn euclidean_shape(s: &GraphSample) -> SymEigen {
    let n = s.dim();
    let q = inverse_sqrt_metric(&s.du);
    let m = matmul(&matmul(&q, &s.d2u, n), &q, n);
    sym_eigen(&m, n)
}

/// Full curvature bundle. The curvatures are computed twice, once from the
/// Euclidean shape operator and once from `Q (δ + Du Duᵀ + u D²u) Q / w`, the
/// symmetrized form of `g^{-1} h`.
pub fn hyperbolic_curvatures(s: &GraphSample) -> Result<ShapePoint> {
    s.check_height()?;
    let n = s.dim();
    let w = s.w();
    let nu = 1.0 / w;
    let eu = euclidean_shape(s);
    let kappa_euclid: Vec<f64> = eu.values.iter().map(|m| m / w).collect();
    let kappa_hyp: Vec<f64> = kappa_euclid.iter().map(|k| s.u * k + nu).collect();

    let q = inverse_sqrt_metric(&s.du);
    let a = admissibility_matrix(s);
    let direct = matmul(&matmul(&q, &a, n), &q, n);
    let kappa_hyp_direct = sym_eigen(&direct, n)
        .values
        .into_iter()
        .map(|v| v / w)
        .collect();

    Ok(ShapePoint {
        w,
        nu_up: nu,
        kappa_euclid,
        kappa_hyp,
        kappa_hyp_direct,
        admissible: admissibility(s),
        eta: None,
    })
}

/// Shape bundle with `η = (σ - ν^{n+1}) / u` filled in.
pub fn shape_point(s: &GraphSample, sigma: f64) -> Result<ShapePoint> {
    let mut p = hyperbolic_curvatures(s)?;
    p.eta = Some((sigma - p.nu_up) / s.u);
    Ok(p)
}

/// Whether `δ_ij + u_i u_j + u u_ij` is positive definite. Non-positive
/// heights are never admissible.
pub fn admissibility(s: &GraphSample) -> bool {
    if !(s.u > 0.0) {
        return false;
    }
    let n = s.dim();
    sym_eigen(&admissibility_matrix(s), n).values[0] > 0.0
}

/// `η = (σ - ν^{n+1}) / u`.
pub fn asymptotic_angle(s: &GraphSample, sigma: f64) -> Result<f64> {
    s.check_height()?;
    Ok((sigma - 1.0 / s.w()) / s.u)
}

/// Principal curvatures of the parallel hypersurface at hyperbolic distance
/// `t`, solving `κ' = 1 - κ²` componentwise in closed form.
pub fn parallel_flow(kappa0: &[f64], t: f64) -> Result<Vec<f64>> {
    kappa0.iter().map(|&k| parallel_flow_scalar(k, t)).collect()
}

fn arcoth(x: f64) -> f64 {
    0.5 * log((x + 1.0) / (x - 1.0))
}

fn parallel_flow_scalar(k0: f64, t: f64) -> Result<f64> {
    if k0 == 1.0 || k0 == -1.0 {
        return Ok(k0);
    }
    if k0.abs() < 1.0 {
        return Ok(tanh(t + atanh(k0)));
    }
    let s = t + arcoth(k0);
    // For κ₀ < -1 the argument starts negative and the solution has a pole at 0.
    if k0 < -1.0 && s >= 0.0 {
        return Err(Error::FlowBlowUp { kappa0: k0, t });
    }
    Ok(1.0 / tanh(s))
}

/// Classical RK4 for `κ' = 1 - κ²` with a fixed step no larger than `dt`.
pub fn parallel_flow_rk4(kappa0: &[f64], t: f64, dt: f64) -> Vec<f64> {
    let steps = libm::ceil(t / dt).max(1.0) as usize;
    let h = t / steps as f64;
    let rhs = |k: f64| 1.0 - k * k;
    kappa0
        .iter()
        .map(|&k0| {
            let mut k = k0;
            for _ in 0..steps {
                let a = rhs(k);
                let b = rhs(k + 0.5 * h * a);
                let c = rhs(k + 0.5 * h * b);
                let d = rhs(k + h * c);
                k += h / 6.0 * (a + 2.0 * b + 2.0 * c + d);
            }
            k
        })
        .collect()
}

/// A Euclidean sphere of radius `R` centred at depth `-σR` below the ideal
/// boundary. Its upper cap is a graph with all hyperbolic principal
/// curvatures equal to `σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquidistantSphere {
    pub sigma: f64,
    pub radius: f64,
}

impl EquidistantSphere {
    pub fn new(sigma: f64, radius: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&sigma) {
            return Err(Error::InvalidConfig(alloc::format!(
                "sigma must lie in [0, 1), got {sigma}"
            )));
        }
        if !(radius > 0.0) {
            return Err(Error::InvalidConfig(alloc::format!(
                "sphere radius must be positive, got {radius}"
            )));
        }
        Ok(EquidistantSphere { sigma, radius })
    }

    /// The cap meeting the ideal boundary along `|x| = δ`.
    pub fn through_ideal(delta: f64, sigma: f64) -> Result<Self> {
        Self::at_level(delta, sigma, 0.0)
    }

    /// The cap with `u = ε` along `|x| = δ`: the exact solution of the
    /// ε-regularized problem on the ball of radius `δ`.
    pub fn at_level(delta: f64, sigma: f64, eps: f64) -> Result<Self> {
        let one_m = 1.0 - sigma * sigma;
        let r = (eps * sigma + sqrt(eps * eps + one_m * delta * delta)) / one_m;
        Self::new(sigma, r)
    }

    /// Radius of the disc where the cap sits at height `level`.
    pub fn footprint(&self, level: f64) -> f64 {
        let z = level + self.sigma * self.radius;
        sqrt((self.radius * self.radius - z * z).max(0.0))
    }

    pub fn height(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        -self.sigma * self.radius + sqrt((self.radius * self.radius - r2).max(0.0))
    }

    /// Height with exact first and second derivatives.
    pub fn sample(&self, x: &[f64]) -> Result<GraphSample> {
        let n = x.len();
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let s2 = self.radius * self.radius - r2;
        if !(s2 > 0.0) {
            return Err(Error::OutsideOracle);
        }
        let s = sqrt(s2);
        let u = s - self.sigma * self.radius;
        if !(u > 0.0) {
            return Err(Error::OutsideOracle);
        }
        let du = x.iter().map(|xi| -xi / s).collect();
        let mut d2u = vec![0.0; n * n];
        let s3 = s2 * s;
        for i in 0..n {
            for j in 0..n {
                d2u[i * n + j] = -(if i == j { 1.0 / s } else { 0.0 }) - x[i] * x[j] / s3;
            }
        }
        Ok(GraphSample { u, du, d2u })
    }

    /// `η ≡ -1/R` on the whole cap.
    pub fn eta(&self) -> f64 {
        -1.0 / self.radius
    }
}

/// `v^σ(x)` over the ball of radius `δ` with its exact derivatives.
pub fn umbilic_sphere_oracle(delta: f64, sigma: f64, x: &[f64]) -> Result<GraphSample> {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    if r2 >= delta * delta {
        return Err(Error::OutsideOracle);
    }
    EquidistantSphere::through_ideal(delta, sigma)?.sample(x)
}

/// Closed-form umbilic graphs with `ν^{n+1}/u = a + b/u`.
#[derive(Debug, Clone, PartialEq)]
pub enum UmbilicOracle {
    /// `u ≡ c`; `κ ≡ 1`.
    Horosphere { height: f64 },
    /// `u = slope · x + offset`; `κ ≡ 1/w`.
    TiltedPlane { slope: Vec<f64>, offset: f64 },
    Sphere(EquidistantSphere),
}

impl UmbilicOracle {
    pub fn sample(&self, x: &[f64]) -> Result<GraphSample> {
        let n = x.len();
        match self {
            UmbilicOracle::Horosphere { height } => {
                GraphSample::new(*height, vec![0.0; n], vec![0.0; n * n])
                    .map_err(|_| Error::OutsideOracle)
            }
            UmbilicOracle::TiltedPlane { slope, offset } => {
                if slope.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: slope.len(),
                        got: n,
                    });
                }
                let u = offset + slope.iter().zip(x).map(|(a, x)| a * x).sum::<f64>();
                if !(u > 0.0) {
                    return Err(Error::OutsideOracle);
                }
                Ok(GraphSample {
                    u,
                    du: slope.clone(),
                    d2u: vec![0.0; n * n],
                })
            }
            UmbilicOracle::Sphere(sph) => sph.sample(x),
        }
    }

    /// The constant hyperbolic principal curvature.
    pub fn kappa(&self) -> f64 {
        match self {
            UmbilicOracle::Horosphere { .. } => 1.0,
            UmbilicOracle::TiltedPlane { slope, .. } => {
                1.0 / sqrt(1.0 + slope.iter().map(|a| a * a).sum::<f64>())
            }
            UmbilicOracle::Sphere(s) => s.sigma,
        }
    }

    /// `(a, b)` with `ν^{n+1}/u = a + b/u` on the whole graph.
    pub fn nu_over_u_coefficients(&self) -> (f64, f64) {
        match self {
            UmbilicOracle::Horosphere { .. } => (0.0, 1.0),
            UmbilicOracle::TiltedPlane { .. } => (0.0, self.kappa()),
            UmbilicOracle::Sphere(s) => (1.0 / s.radius, s.sigma),
        }
    }
}

/// Christoffel symbols `Γ^k_ij` of `g = (δ + Du Duᵀ)/u²` in graph
/// coordinates, stored at `[k][i][j]` flattened.
fn christoffel(s: &GraphSample) -> Vec<f64> {
    let n = s.dim();
    let u = s.u;
    let p = &s.du;
    let d = &s.d2u;
    let g = first_fundamental(s).expect("height checked by caller");
    // g^{-1} = u² (I - p pᵀ / w²).
    let w2 = 1.0 + p.iter().map(|x| x * x).sum::<f64>();
    let mut ginv = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            ginv[i * n + j] = u * u * (if i == j { 1.0 } else { 0.0 } - p[i] * p[j] / w2);
        }
    }
    // ∂_k g_ij
    let dg = |k: usize, i: usize, j: usize| -> f64 {
        (d[i * n + k] * p[j] + p[i] * d[j * n + k]) / (u * u) - 2.0 * p[k] * g[i * n + j] / u
    };
    let mut gamma = vec![0.0; n * n * n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for l in 0..n {
                    acc += ginv[k * n + l] * (dg(i, j, l) + dg(j, i, l) - dg(l, i, j));
                }
                gamma[(k * n + i) * n + j] = 0.5 * acc;
            }
        }
    }
    gamma
}

/// `∇_ij (1/u) = ∂_ij (1/u) - Γ^k_ij ∂_k (1/u)` for the induced hyperbolic
/// metric, from exact derivatives of `u`.
pub fn covariant_hessian_inv_u(s: &GraphSample) -> Result<Vec<f64>> {
    s.check_height()?;
    let n = s.dim();
    let u = s.u;
    let gamma = christoffel(s);
    let v1: Vec<f64> = s.du.iter().map(|p| -p / (u * u)).collect();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let v2 = -s.d2u[i * n + j] / (u * u) + 2.0 * s.du[i] * s.du[j] / (u * u * u);
            let mut corr = 0.0;
            for k in 0..n {
                corr += gamma[(k * n + i) * n + j] * v1[k];
            }
            out[i * n + j] = v2 - corr;
        }
    }
    Ok(out)
}

/// `(1/u)(g - ν^{n+1} h)`.
pub fn inv_u_hessian_closed(s: &GraphSample) -> Result<Vec<f64>> {
    let g = first_fundamental(s)?;
    let h = second_fundamental(s)?;
    let nu = 1.0 / s.w();
    Ok(g.iter().zip(&h).map(|(g, h)| (g - nu * h) / s.u).collect())
}

/// Largest entrywise gap between the covariant Hessian of `1/u` and
/// `(1/u)(g - ν^{n+1} h)`, divided by `max(1, largest entry)`.
pub fn inv_u_hessian_identity(oracle: &UmbilicOracle, x: &[f64]) -> Result<f64> {
    let s = oracle.sample(x)?;
    let lhs = covariant_hessian_inv_u(&s)?;
    let rhs = inv_u_hessian_closed(&s)?;
    let scale = rhs.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    Ok(lhs
        .iter()
        .zip(&rhs)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        / scale)
}

/// Both sides of the two contracted identities for the operator `F^{ij}` of
/// `spec` on an umbilic oracle, in the orthonormal frame `E = u Q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionCheck {
    /// `F^{ij} ∇_ij (1/u)` and `(Σ f_i - σ ν^{n+1}) / u`.
    pub inv_u: (f64, f64),
    /// `F^{ij} ∇_ij (ν^{n+1}/u)` and `σ/u - (ν^{n+1}/u) Σ f_i κ_i²`.
    pub nu_over_u: (f64, f64),
}

impl ContractionCheck {
    pub fn max_relative_gap(&self) -> f64 {
        let gap = |(a, b): (f64, f64)| (a - b).abs() / (1.0 + b.abs());
        gap(self.inv_u).max(gap(self.nu_over_u))
    }
}

pub fn contraction_check(
    oracle: &UmbilicOracle,
    spec: &CurvatureSpec,
    x: &[f64],
) -> Result<ContractionCheck> {
    let s = oracle.sample(x)?;
    let n = s.dim();
    if spec.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            got: n,
        });
    }
    let q = inverse_sqrt_metric(&s.du);
    let e: Vec<f64> = q.iter().map(|v| s.u * v).collect();
    let h = second_fundamental(&s)?;
    let a = matmul(&matmul(&e, &h, n), &e, n);
    let eig = sym_eigen(&a, n);
    let kappa = &eig.values;
    for (index, &value) in kappa.iter().enumerate() {
        if !(value > 0.0) {
            return Err(Error::ConeViolation { index, value });
        }
    }
    let (sigma, fi) = spec.value_grad_unchecked(kappa);
    let fs = crate::dense::from_eigen(&eig.vectors, &fi, n);

    let hess = covariant_hessian_inv_u(&s)?;
    let hess_frame = matmul(&matmul(&e, &hess, n), &e, n);
    let contracted = crate::dense::trace_product(&fs, &hess_frame, n);

    let nu = 1.0 / s.w();
    let sum_f: f64 = fi.iter().sum();
    let sum_fk2: f64 = fi.iter().zip(kappa).map(|(f, k)| f * k * k).sum();
    let (_, b) = oracle.nu_over_u_coefficients();
    Ok(ContractionCheck {
        inv_u: (contracted, (sum_f - sigma * nu) / s.u),
        nu_over_u: (b * contracted, sigma / s.u - nu / s.u * sum_fk2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fundamental_form_examples() {
        let s = GraphSample::new(1.0, vec![0.0, 0.0], vec![0.0; 4]).unwrap();
        assert_eq!(first_fundamental(&s).unwrap(), vec![1.0, 0.0, 0.0, 1.0]);
        let s = GraphSample::new(2.0, vec![0.0, 0.0], vec![0.0; 4]).unwrap();
        assert_eq!(first_fundamental(&s).unwrap(), vec![0.25, 0.0, 0.0, 0.25]);
        let s = GraphSample::new(1.0, vec![1.0, 0.0], vec![0.0; 4]).unwrap();
        assert_eq!(first_fundamental(&s).unwrap(), vec![2.0, 0.0, 0.0, 1.0]);
        assert_eq!(
            GraphSample::new(0.0, vec![0.0], vec![0.0]),
            Err(Error::NonPositiveHeight(0.0))
        );
    }

    #[test]
    fn horosphere_and_plane() {
        let s = GraphSample::new(3.0, vec![0.0; 2], vec![0.0; 4]).unwrap();
        let h = second_fundamental(&s).unwrap();
        assert!((h[0] - 1.0 / 9.0).abs() < 1e-16 && h[1] == 0.0);
        let p = hyperbolic_curvatures(&s).unwrap();
        assert_eq!(p.kappa_hyp, vec![1.0, 1.0]);
        assert!(p.admissible);

        let s = GraphSample::new(0.7, vec![0.3, -1.2], vec![0.0; 4]).unwrap();
        let p = hyperbolic_curvatures(&s).unwrap();
        let expect = 1.0 / sqrt(1.0 + 0.09 + 1.44);
        for k in p.kappa_hyp.iter().chain(&p.kappa_hyp_direct) {
            assert!((k - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn constructed_inadmissible_point() {
        let u = 0.5;
        let s = GraphSample::new(u, vec![0.0; 2], vec![-2.0 / u, 0.0, 0.0, -2.0 / u]).unwrap();
        assert!(!admissibility(&s));
        assert!(hyperbolic_curvatures(&s).unwrap().kappa_max() < 0.0);
    }

    #[test]
    fn sphere_oracle_values() {
        let (delta, sigma) = (1.0, 0.5);
        let s0 = umbilic_sphere_oracle(delta, sigma, &[0.0, 0.0]).unwrap();
        let v0 = delta * (1.0 - sigma) / sqrt(1.0 - sigma * sigma);
        assert!((s0.u - v0).abs() < 1e-15);
        assert_eq!(
            umbilic_sphere_oracle(delta, sigma, &[1.0, 0.0]),
            Err(Error::OutsideOracle)
        );
        let near = umbilic_sphere_oracle(delta, sigma, &[1.0 - 1e-12, 0.0]).unwrap();
        assert!(near.u.abs() < 1e-11);
        assert!((near.w() - 1.0 / sigma).abs() < 1e-5);
        let sph = EquidistantSphere::through_ideal(delta, sigma).unwrap();
        assert!(sph.height(&[0.6, 0.8]).abs() < 1e-15);
        let p = shape_point(&sph.sample(&[0.3, -0.4]).unwrap(), sigma).unwrap();
        for k in &p.kappa_hyp {
            assert!((k - sigma).abs() < 1e-14);
        }
        assert!((p.eta.unwrap() - sph.eta()).abs() < 1e-14);
    }

    #[test]
    fn sphere_at_level_hits_epsilon_on_boundary() {
        let sph = EquidistantSphere::at_level(1.0, 0.3, 0.05).unwrap();
        assert!((sph.height(&[1.0, 0.0]) - 0.05).abs() < 1e-15);
        assert!((sph.footprint(0.05) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn parallel_flow_examples() {
        assert_eq!(parallel_flow(&[1.0], 3.7).unwrap(), vec![1.0]);
        let k = parallel_flow(&[0.0], 1.0).unwrap()[0];
        assert!((k - 0.7615941559557649).abs() < 1e-15);
        let rk = parallel_flow_rk4(&[0.0], 1.0, 1e-4)[0];
        assert!((rk - 0.7615941559557649).abs() < 1e-12);
        let mut prev = 3.0;
        for i in 1..50 {
            let k = parallel_flow(&[3.0], 0.1 * i as f64).unwrap()[0];
            assert!(k < prev && k > 1.0);
            prev = k;
        }
        assert!(matches!(
            parallel_flow(&[-2.0], 1.0),
            Err(Error::FlowBlowUp { .. })
        ));
    }

    #[test]
    fn identity_on_horosphere_is_zero() {
        let o = UmbilicOracle::Horosphere { height: 0.4 };
        let s = o.sample(&[0.1, 0.2]).unwrap();
        assert!(inv_u_hessian_closed(&s).unwrap().iter().all(|v| v.abs() < 1e-15));
        assert!(inv_u_hessian_identity(&o, &[0.1, 0.2]).unwrap() < 1e-14);
    }
}
