use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension {dim} is not supported here (expected {expected})")]
    Dimension { dim: usize, expected: &'static str },

    #[error("point {point:?} is within tolerance of both Γ₁ and Γ₂; refine the tolerance")]
    AmbiguousBoundary { point: Vec<f64> },

    #[error("direction is not a unit vector (|ξ| = {norm})")]
    NonUnitDirection { norm: f64 },

    #[error("coefficient matrix is not positive definite at sample {index} (λ_min = {min_eigenvalue})")]
    NotElliptic { index: usize, min_eigenvalue: f64 },

    #[error("singular evaluation: {0}")]
    Singular(&'static str),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("linear program is unbounded; sample the constraint set more densely")]
    Unbounded,

    #[error("vector field margin too small (ε̃ = {eps_tilde})")]
    MarginTooSmall { eps_tilde: f64 },

    #[error("coefficients fail the monotone stencil test at node {node:?} (a_ii < Σ|a_ij|)")]
    StencilNotMonotone { node: [usize; 3] },

    #[error("oblique foot point of Γ₂ node {node:?} leaves the domain")]
    FootOutside { node: [usize; 3] },

    #[error("interior node {node:?} has a stencil neighbour outside the domain")]
    DanglingStencil { node: [usize; 3] },

    #[error("relaxation did not converge: residual {residual:e} after {iterations} sweeps")]
    NoConvergence { residual: f64, iterations: usize },

    #[error("chain construction failed: S_R point {point:?} cannot be covered")]
    CoverFailed { point: Vec<f64> },

    #[error("chain construction failed: S_R ∩ Ω is empty")]
    EmptyLayer,

    #[error("chain construction failed: no root ball carries positive Γ₁ capacity")]
    ZeroRootCapacity,

    #[error("ball {index} is not connected to the root")]
    Disconnected { index: usize },

    #[error("hypothesis violated at {location:?}: {what}")]
    Hypothesis { what: &'static str, location: Vec<f64> },

    #[error("chain iteration did not terminate within {steps} steps")]
    IterationDidNotTerminate { steps: usize },

    #[error("layer {m} is not admissible: {reason}")]
    LayerNotAdmissible { m: usize, reason: String },

    #[error("grid ladder too coarse for layer {m}: h = {h}, need h <= {needed}")]
    GridTooCoarse { m: usize, h: f64, needed: f64 },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
