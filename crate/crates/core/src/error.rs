use std::fmt;

/// Row/column shape of a matrix, printed as `rows×cols`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape(pub usize, pub usize);

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}×{}", self.0, self.1)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{op}: dimension mismatch between {left} and {right}")]
    DimensionMismatch {
        op: &'static str,
        left: Shape,
        right: Shape,
    },

    #[error("{op}: expected a square matrix, got {shape}")]
    NotSquare { op: &'static str, shape: Shape },

    #[error("matrix is not symmetric (max |a_ij - a_ji| = {max_asymmetry:e})")]
    NotSymmetric { max_asymmetry: f64 },

    #[error("invalid matrix data: expected {expected} values, got {got}")]
    InvalidData { expected: usize, got: usize },

    #[error("matrix must have at least one row and one column, got {0}")]
    EmptyShape(Shape),

    #[error("Jacobi eigensolver did not converge in {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("degenerate input: normalizer {normalizer:e} is below epsilon {epsilon:e}")]
    DegenerateInput { normalizer: f64, epsilon: f64 },

    #[error("Newton-Schulz iteration produced a non-finite value at iteration {iteration}")]
    Divergence { iteration: usize },

    #[error("iteration tape holds {got} iterates, expected {expected}")]
    TapeMismatch { expected: usize, got: usize },

    #[error("gradient vector has length {got}, expected {expected}")]
    VecLength { expected: usize, got: usize },

    #[error("loss is not finite at perturbed index ({i}, {j})")]
    NonFiniteLoss { i: usize, j: usize },

    #[error("non-finite training loss at epoch {epoch} with head {head}")]
    TrainingDiverged { epoch: usize, head: &'static str },

    #[error("cannot normalize a zero vector")]
    ZeroVector,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
