use thiserror::Error;

/// Broad failure classes, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Numeric,
    Configuration,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("self-edge at vertex {0}")]
    SelfEdge(usize),

    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(usize, usize),

    #[error("edge {0}-{1} has nonpositive conductance {2}")]
    NonPositiveConductance(usize, usize, f64),

    #[error("vertex {0} has invalid killing rate {1}")]
    InvalidKilling(usize, f64),

    #[error("vertex {vertex} out of range (graph has {count} vertices)")]
    VertexOutOfRange { vertex: usize, count: usize },

    #[error("graph is disconnected: vertex {0} unreachable from vertex 0")]
    Disconnected(usize),

    #[error("graph has no vertices")]
    Empty,

    #[error("not a spanning tree: {0}")]
    NotSpanningTree(String),

    #[error("{0}-{1} is not an edge of the graph")]
    NotAnEdge(usize, usize),

    #[error("invalid loop: {0}")]
    InvalidLoop(String),

    #[error("massless chain: I - P is singular (killing rates vanish identically)")]
    Massless,

    #[error("generator index {index} out of range 1..={rank}")]
    IndexOutOfRange { index: usize, rank: usize },

    #[error("series constant term is not 1")]
    ConstantTermNotOne,

    #[error("word degree {needed} exceeds truncation degree {depth}")]
    DegreeOverflow { needed: usize, depth: usize },

    #[error("degree exceeds {0}: all signature terms vanish up to that degree")]
    DegreeExceeds(usize),

    #[error("degree mismatch: expected {expected}, loop has degree {computed}")]
    DegreeMismatch { expected: usize, computed: usize },

    #[error("degree mismatch: expected {expected}, loop degree exceeds it")]
    DegreeAbove { expected: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("not a Lie element: residual after Lyndon projection is nonzero")]
    NotLie,

    #[error("non-summable tree-contour series at ({0}, {1})")]
    Divergence(usize, usize),

    #[error("fixed-point iteration did not converge within {0} iterations")]
    NoConvergence(usize),

    #[error("quadrature did not converge: estimated error {0:e}")]
    Quadrature(f64),

    #[error("graph is not regular with unit conductances")]
    NotRegular,

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("matrix for edge {0}-{1} is not unitary")]
    NonUnitary(usize, usize),

    #[error("inconsistent character table: {0}")]
    CharacterTable(String),

    #[error("{0} is not an odd prime")]
    InvalidPrime(u64),

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Massless
            | Error::Divergence(..)
            | Error::NoConvergence(_)
            | Error::Quadrature(_)
            | Error::Numeric(_) => ErrorKind::Numeric,
            Error::Config(_) | Error::Domain(_) | Error::InvalidPrime(_) => {
                ErrorKind::Configuration
            }
            _ => ErrorKind::Validation,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
