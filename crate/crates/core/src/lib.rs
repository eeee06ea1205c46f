//! Constant-curvature graphs in the half-space model of hyperbolic space.
//!
//! This crate is `no_std` (it needs `alloc`) and holds everything that is
//! pure computation:
//!
//! * [`symfunc`]: normalized elementary symmetric polynomials, the curvature
//!   quotients `(H_n/H_l)^{1/(n-l)}`, their concave combinations, closed-form
//!   gradient identities and randomized structure checks on the positive cone.
//! * [`hypgeo`]: pointwise geometry of a graph `x_{n+1} = u(x)`: fundamental
//!   forms, Euclidean and hyperbolic principal curvatures, admissibility,
//!   the asymptotic angle quantity, umbilic closed-form oracles and the
//!   parallel-surface curvature flow.
//! * [`domain`], [`grid`], [`sparse`], [`solver`], [`radial`]: the
//!   ε-regularized Dirichlet problem `f(κ[u]) = σ`, `u = ε` on `∂Ω`, solved by
//!   damped Newton on a masked Cartesian grid, ε-continuation, σ-sweeps, and a
//!   spectral radial solver for balls in any dimension.
//! * [`verify`]: machine-checkable reports for the a priori estimates.
//!
//! File formats, configuration and the command-line front end live in the
//! `hypcurv` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod dense;
pub mod domain;
pub mod error;
pub mod grid;
pub mod hypgeo;
pub mod radial;
pub mod solver;
pub mod sparse;
pub mod symfunc;
pub mod verify;

pub use domain::DomainSpec;
pub use error::{Error, Result};
pub use grid::{Grid, ScalarField};
pub use hypgeo::{GraphSample, ShapePoint};
pub use solver::{SolveReport, SolverConfig};
pub use symfunc::{CurvatureSpec, Lambda};
pub use verify::{CheckReport, CheckStatus};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
