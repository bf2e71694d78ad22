use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {re}+{im}i is not strictly inside the unit disk")]
    OutsideDisk { re: f64, im: f64 },
    #[error("negative or non-finite hyperbolic length {0}")]
    BadLength(f64),
    #[error("geodesic sample {index} reached the disk boundary")]
    DiskOverflow { index: usize },
    #[error("degenerate configuration: {0}")]
    Degenerate(&'static str),
    #[error("sector {sector}: angle exceeds the cutoff on a sector axis, no admissible cut")]
    Inconsistent { sector: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("vertex {0} lies on the boundary of the complex")]
    BoundaryVertex(usize),
    #[error("angle {0} is numerically singular (0 or π)")]
    Singular(f64),
    #[error("argument {0} outside the function domain")]
    Domain(f64),
    #[error("loop is not closed")]
    OpenLoop,
    #[error("loop step {0} does not follow a single edge family")]
    MixedRun(usize),
    #[error("loop step {0} is not an edge of the complex")]
    NotAnEdge(usize),
    #[error("loop touches a reversal-flagged vertex {0}")]
    ReversalOnLoop(usize),
}
