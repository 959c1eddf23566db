use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("chain length must be even and at least 2, got {0}")]
    InvalidChainLength(usize),
    #[error("transverse field must be finite and non-negative, got {0}")]
    InvalidField(f64),
    #[error("anisotropy must lie in [0, 1], got {0}")]
    InvalidAnisotropy(f64),
    #[error("inverse temperature must be finite and non-negative, got {0}")]
    InvalidBeta(f64),
    #[error("{what} is only defined for the transverse-field Ising chain (gamma = 1), got gamma = {gamma}")]
    RequiresIsing { what: &'static str, gamma: f64 },
    #[error("restricted tensor product needs at least one block")]
    EmptyBlocks,
    #[error("graded block must have dimension 2 or 4, got {0}")]
    InvalidBlockDim(usize),
    #[error("dense dimension {dim} exceeds the oracle limit {max}")]
    DimensionTooLarge { dim: usize, max: usize },
    #[error("operator is not Hermitian (max deviation {0:e})")]
    NonHermitian(f64),
    #[error("operator dimensions do not match: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("eigen-decomposition failed: {0}")]
    Eigen(String),
    #[error("closed-form limits exist only for the built-in observables, not `{0}`")]
    UnsupportedObservable(String),
    #[error("characteristic-function samples are not on the exact inversion grid: {0}")]
    WrongThetaGrid(String),
    #[error("inverted probability {value:e} at support value {at} is negative beyond the clamping threshold")]
    NegativeProbability { at: i64, value: f64 },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("cumulant order {0} is outside 1..=6")]
    CumulantOrder(usize),
    #[error("eigenvalue {0} of the counting operator is not on the declared integer lattice")]
    OffLattice(f64),
    #[error("parameter grid is empty")]
    EmptyGrid,
}

pub type Result<T> = std::result::Result<T, Error>;
