use thiserror::Error;

use crate::subset::SubsetLabel;

#[derive(Debug, Error)]
pub enum BiError {
    #[error("dimension mismatch: {op} on {left:?} and {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("operand is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("invalid rational {0:?}")]
    ParseRational(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("subset {0} is empty; use the scalar Gamma_empty instead")]
    EmptySubset(SubsetLabel),

    #[error("subset {subset} reaches beyond n = {n}")]
    SubsetOutOfRange { subset: SubsetLabel, n: usize },

    #[error("level {level} exceeds the retained maximum {max_level}")]
    LevelOutOfRange { level: usize, max_level: usize },

    #[error("operators live on different tensor spaces")]
    SpaceMismatch,

    #[error("subsets {0}, {1}, {2} are not pairwise disjoint")]
    Overlap(SubsetLabel, SubsetLabel, SubsetLabel),

    #[error("invalid permutation {0:?}")]
    Permutation(Vec<usize>),

    #[error("orthonormal gauge needs mu > -1/2 at every site (site {site} has mu = {mu})")]
    Gauge { site: usize, mu: String },

    #[error("unresolved degeneracy at level {level}: {size} vectors share labels {labels:?}")]
    Degeneracy {
        level: usize,
        size: usize,
        labels: Vec<f64>,
    },

    #[error("operator {op} is not tridiagonal in this basis (off-band residual {residual:e})")]
    NotTridiagonal { op: SubsetLabel, residual: f64 },

    #[error("label tuple {labels:?} has no partner in the other basis")]
    Pairing { labels: Vec<f64> },

    #[error("numerical check failed: {what} residual {residual:e} exceeds {tolerance:e}")]
    Numerical {
        what: &'static str,
        residual: f64,
        tolerance: f64,
    },

    #[error("swap step does not match the bases: {0}")]
    Step(String),

    #[error("shape mismatch: {0}")]
    Shape(String),
}

pub type Result<T> = std::result::Result<T, BiError>;
