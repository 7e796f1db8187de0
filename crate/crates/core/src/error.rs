use thiserror::Error;

/// Errors shared by the geometry kernel, the census and the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point lies on or outside the unit circle (|z| = {modulus})")]
    PointOutsideDisk { modulus: f64 },

    #[error("isometry is not hyperbolic (|trace| = {trace})")]
    NotHyperbolic { trace: f64 },

    #[error("boundary pair degenerate: angular separation {separation} below tolerance")]
    DegenerateBoundaryPair { separation: f64 },

    #[error("segment endpoints coincide within tolerance")]
    DegenerateSegment,

    #[error("word reduces to the trivial class")]
    TrivialClass,

    #[error("reduction to the fundamental domain failed: {0}")]
    ReductionFailed(String),

    #[error("chord decomposition failed: {0}")]
    DecompositionFailed(String),

    #[error("census is incomplete; refusing to compute")]
    IncompleteCensus,

    #[error("census cache version/meta mismatch: {0}")]
    CacheVersion(String),

    #[error("census cache checksum failure: {0}")]
    CacheChecksum(String),

    #[error("census cache parse error: {0}")]
    CacheParse(String),

    #[error("numeric audit failure: {0}")]
    AuditViolation(String),

    #[error("Liouville rejection sampler exceeded its cap")]
    RejectionCapExceeded,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
