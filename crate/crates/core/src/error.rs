use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid offspring family: {0}")]
    InvalidFamily(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("power iteration did not converge within {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("the critical block of the mean matrix is reducible")]
    ReducibleCriticalBlock,

    #[error("family is not critical: spectral radius of the critical block is {radius}")]
    NotCritical { radius: f64 },

    #[error("I - M' is numerically singular (subcritical block radius {radius})")]
    SingularSubcriticalBlock { radius: f64 },

    #[error("tilt solver did not converge: {0}")]
    NoConvergence(String),

    #[error("target direction must be strictly positive")]
    DegenerateDirection,

    #[error("root must have type 1, found type {found}")]
    RootType { found: usize },

    #[error("decoration does not match flat tree at type-1 vertex {vertex}: {reason}")]
    DecorationMismatch { vertex: usize, reason: String },

    #[error("degree sequence is not admissible")]
    Inadmissible,

    #[error("tree exceeded the vertex budget of {max_vertices}")]
    Overflow { max_vertices: usize },

    #[error("size {n} is not feasible for this family and weight vector")]
    Infeasible { n: u64 },

    #[error("sampling budget exhausted after {attempts} attempts")]
    BudgetExhausted { attempts: u64 },

    #[error("blob table reaches coverage {coverage:.3e} of the required {required:.3e}; raise the blob-expansion budget")]
    TruncationTooCoarse { coverage: f64, required: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("replicates were conditioned on different sizes ({first} and {other})")]
    MixedConditioning { first: u64, other: u64 },

    #[error("malformed tree encoding: {0}")]
    Codec(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
