use thiserror::Error;

use crate::scalar::ParseScalarError;
use crate::sparse::IndexId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SparseError {
    #[error("empty carrier")]
    EmptyCarrier,
    #[error("entry {index} = {value} is not strictly positive")]
    NonPositiveEntry { index: IndexId, value: String },
    #[error("coordinates sum to {sum}, not 1")]
    NotUnitSum { sum: String },
    #[error("invalid tail certificate: {reason}")]
    BadTail { reason: String },
    #[error("no point supplied for weighted index {0}")]
    MissingPoint(IndexId),
    #[error("tail bound {tail} is not below half the sup-norm ({threshold})")]
    TailTooLarge { tail: String, threshold: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpaceError {
    #[error("unknown point {0}")]
    UnknownPoint(String),
    #[error("duplicate point {0}")]
    DuplicatePoint(String),
    #[error("no minimal open set given for point {0}")]
    MissingMinOpen(String),
    #[error("point {point} is not in its own minimal open set")]
    NotReflexive { point: String },
    #[error("not transitive at {point}: {via} is in min_open({point}) but {missing} in min_open({via}) is not")]
    NotTransitive {
        point: String,
        via: String,
        missing: String,
    },
    #[error("interval model needs at least one edge")]
    EmptyInterval,
    #[error("coordinate dimension {found} does not match {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("metric axiom violated: {0}")]
    MetricAxiom(String),
    #[error("{names} names given for {samples} samples")]
    SampleCountMismatch { names: usize, samples: usize },
    #[error("ball radius must be positive")]
    NonPositiveRadius,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error("value at {point} is empty")]
    EmptyValue { point: String },
    #[error("value count {found} does not match domain size {expected}")]
    WrongValueCount { expected: usize, found: usize },
    #[error("unknown point {0}")]
    UnknownPoint(String),
    #[error("domain or codomain mismatch: {0}")]
    Mismatch(String),
    #[error("codomain is not discrete")]
    CodomainNotDiscrete,
    #[error(transparent)]
    Space(#[from] SpaceError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PouError {
    #[error("row at {point} is not in the unit simplex: {source}")]
    RowNotSimplex { point: String, source: SparseError },
    #[error("not continuous: rows at {x} and {y} differ but {y} is in min_open({x})")]
    DiscontinuousAt { x: String, y: String },
    #[error("row at {point} uses index {index} outside the index set")]
    UnknownIndex { point: String, index: IndexId },
    #[error("{0} is not in the index set")]
    NoSuchIndex(IndexId),
    #[error("no row for point {0}")]
    MissingRow(String),
    #[error("row count {found} does not match ground size {expected}")]
    WrongRowCount { expected: usize, found: usize },
    #[error("sample {sample} lies in no ball")]
    NotACover { sample: String },
    #[error("index set mismatch: {0}")]
    IndexSetMismatch(String),
    #[error("ground mismatch: {0}")]
    GroundMismatch(String),
    #[error("ball covers need a Euclidean sample space")]
    NonEuclideanMetric,
    #[error(transparent)]
    Sparse(#[from] SparseError),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NerveError {
    #[error("empty simplex")]
    EmptySimplex,
    #[error("simplex {simplex:?} is present but its face {missing:?} is not")]
    NotDownwardClosed {
        simplex: Vec<IndexId>,
        missing: Vec<IndexId>,
    },
    #[error("vertex {0} is not a vertex of the complex")]
    ForeignVertex(IndexId),
    #[error("realization point has an empty carrier")]
    EmptyCarrier,
    #[error("index mismatch: {0}")]
    IndexMismatch(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SelectionError {
    #[error("no anchor for index {0}")]
    MissingAnchor(IndexId),
    #[error("no anchor is epsilon-close to the target set at {point}")]
    CoverGap { point: String },
    #[error("epsilon must be positive")]
    NonPositiveEpsilon,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("polytope needs at least one vertex")]
    EmptyPolytope,
    #[error(transparent)]
    Pou(#[from] PouError),
    #[error(transparent)]
    Sparse(#[from] SparseError),
}

/// Union of the module errors, used by the JSON layer and the CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Sparse(#[from] SparseError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Pou(#[from] PouError),
    #[error(transparent)]
    Nerve(#[from] NerveError),
    #[error(transparent)]
    Selection(#[from] SelectionError),
    #[error(transparent)]
    Scalar(#[from] ParseScalarError),
    #[error("malformed input: {0}")]
    Schema(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl Error {
    pub fn schema(msg: impl Into<String>) -> Self {
        Error::Schema(msg.into())
    }
}
