use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("index {index} out of range 0..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("point is outside the positive cone: component {index} = {value}")]
    ConeViolation { index: usize, value: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid curvature function: {0}")]
    InvalidSpec(String),
    #[error("height must be positive, got {0}")]
    NonPositiveHeight(f64),
    #[error("point lies outside the domain of the closed-form oracle")]
    OutsideOracle,
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("grid configuration: {0}")]
    Grid(String),
    #[error("{} inadmissible node(s), first at index {}", nodes.len(), nodes.first().copied().unwrap_or(0))]
    Inadmissible { nodes: Vec<usize> },
    #[error("zero pivot at step {0} of the sparse factorization")]
    SingularPivot(usize),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("epsilon {eps} too large: the initial cap rises only {cap_height:.3e} above it (need at least {required:.3e}); start from a smaller epsilon or refine the grid")]
    EpsilonTooLarge {
        eps: f64,
        cap_height: f64,
        required: f64,
    },
    #[error("solutions for sigma={sigma_lo} and sigma={sigma_hi} cross at node {node} ({x:.6}, {y:.6}): gap {gap:.3e}")]
    Crossing {
        node: usize,
        x: f64,
        y: f64,
        sigma_lo: f64,
        sigma_hi: f64,
        gap: f64,
    },
    #[error("parallel flow from kappa0={kappa0} reaches a pole before t={t}")]
    FlowBlowUp { kappa0: f64, t: f64 },
    #[error("not converged: {0}")]
    NotConverged(String),
}
