use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid signature: {0}")]
    InvalidSignature(String),
    #[error("unknown generator {0}")]
    UnknownGenerator(String),
    #[error("basis mismatch between operands")]
    BasisMismatch,
    #[error("no relative structure: the factor system is empty")]
    NoFactors,
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid forest: {0}")]
    InvalidForest(String),
    #[error("blow-up rejected: {0}")]
    BlowUp(String),
    #[error("edge bound {bound} exceeds the enumeration guard {guard} (pass force to override)")]
    BoundExceeded { bound: usize, guard: usize },
    #[error("poset lemma hypothesis violated at ({0}, {1}): {2}")]
    RetractHypothesis(usize, usize, String),
    #[error("degenerate metric: {0}")]
    DegenerateMetric(String),
    #[error("map collapses edge {0}")]
    CollapsedEdge(usize),
    #[error("not a relative automorphism: {0}")]
    NotRelative(String),
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error("empty complex")]
    EmptyComplex,
    #[error("unknown strategy `{0}`")]
    UnknownStrategy(String),
}

pub type Result<T> = std::result::Result<T, Error>;
