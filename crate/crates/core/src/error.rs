use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("a register needs at least one qubit")]
    EmptyRegister,
    #[error("site {site} out of range for {n} sites")]
    SiteOutOfRange { site: usize, n: usize },
    #[error("two-qubit gate needs distinct sites, got {0} twice")]
    RepeatedSite(usize),
    #[error("region must be a nonempty proper subset of {n} sites (got length {len})")]
    InvalidRegion { len: usize, n: usize },
    #[error("block of width {width} does not fit a chain of {n} sites at start {start}")]
    BlockOverflow { width: usize, start: usize, n: usize },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("vertex {vertex} is not in a graph on {n} vertices")]
    InvalidVertex { vertex: usize, n: usize },
    #[error("graphs have different vertex counts ({0} vs {1})")]
    VertexCountMismatch(usize, usize),
    #[error("LC orbit exceeds the limit of {0} graphs")]
    OrbitOverflow(usize),
    #[error("unsupported size: {0}")]
    Unsupported(String),
    #[error("invalid configuration: {field}: {reason}")]
    Config { field: &'static str, reason: String },
    #[error("cannot place {blocks} disjoint blocks of width {width} on {n} sites")]
    ImpossiblePlacement { blocks: usize, width: usize, n: usize },
    #[error("fit failed: {0}")]
    Fit(String),
    #[error("catalog: {0}")]
    Catalog(String),
    #[error("physics invariant violated: {0}")]
    Invariant(String),
    #[error("parse error on line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
