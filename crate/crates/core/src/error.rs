use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("node {node} out of range for graph with {n} nodes")]
    InvalidNode { node: usize, n: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("degenerate graph: {0}")]
    DegenerateGraph(String),
    #[error("invalid tetrad {nodes:?}")]
    InvalidTetrad { nodes: [usize; 4] },
    #[error("invalid degree signature {0:?}")]
    InvalidSignature([u8; 4]),
    #[error("graph has {n} nodes, at least {min} required")]
    TooSmall { n: usize, min: usize },
    #[error("graph has no connected 4-node tetrads")]
    NoConnectedTetrads,
    #[error("oracle supports at most 16 nodes, got {0}")]
    OracleTooLarge(usize),
    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("edge count {l} out of range for {m} nodes")]
    InvalidEdgeCount { m: usize, l: usize },
    #[error("graphs are not comparable: ({m1} nodes, {l1} edges) vs ({m2} nodes, {l2} edges)")]
    IncomparableGraphs {
        m1: usize,
        l1: usize,
        m2: usize,
        l2: usize,
    },
    #[error("invalid k = {k} for n = {n}: k must be even and in [2, {k_max}]")]
    InvalidK { k: usize, n: usize, k_max: usize },
    #[error("size mismatch: graph has {graph} nodes, atlas was built for {atlas}")]
    SizeMismatch { graph: usize, atlas: usize },
    #[error("non-positive value in series {series} at row {row}")]
    NonPositiveInput { series: usize, row: usize },
    #[error("insufficient data: {rows} rows, more than {needed} required")]
    InsufficientData { rows: usize, needed: usize },
    #[error("window length {window} exceeds series length {rows}")]
    WindowTooLong { window: usize, rows: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("window {window}: {source}")]
    Window {
        window: usize,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Coarse grouping used to choose process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed or unreadable input.
    Input,
    /// The graph has no connected tetrads, so the embedding is undefined.
    NoConnectedTetrads,
    /// Well-formed input that violates a model precondition.
    Domain,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::NoConnectedTetrads => ErrorKind::NoConnectedTetrads,
            Error::Window { source, .. } => source.kind(),
            Error::Parse { .. }
            | Error::Io(_)
            | Error::Json(_)
            | Error::Csv(_)
            | Error::InvalidNode { .. }
            | Error::SelfLoop(_)
            | Error::NonPositiveInput { .. } => ErrorKind::Input,
            _ => ErrorKind::Domain,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
