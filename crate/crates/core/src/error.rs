use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("lattice extents must be at least 1 (got {lx}x{ly})")]
    InvalidExtent { lx: i64, ly: i64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("displacement ({dx}, {dy}) is not a half-integer vector")]
    NonHalfInteger { dx: f64, dy: f64 },

    #[error("displacement maps within one species")]
    SameSpeciesDisplacement,

    #[error("measure_x must follow every cz (cz at op {cz_index} after measurement at op {measure_index})")]
    MeasurementBeforeCz { measure_index: usize, cz_index: usize },

    #[error("graph is not bipartite under {mode}: edge {a}-{b} lies inside one set")]
    NotBipartite { mode: &'static str, a: usize, b: usize },

    #[error("hadamard on entangled vertex {0} cannot be tracked as a graph state")]
    HadamardOnEntangledVertex(usize),

    #[error("operation {0} is not handled by the graph tracker")]
    UnsupportedOp(String),

    #[error("unknown vertex {0}")]
    UnknownVertex(usize),

    #[error("vertex {special} is not adjacent to {vertex}")]
    NotAdjacent { vertex: usize, special: usize },

    #[error("{a}-{b} is not an edge of the graph")]
    NotAnEdge { a: usize, b: usize },

    #[error("site {site} out of range for {n} qubits")]
    SiteOutOfRange { site: usize, n: usize },

    #[error("two-qubit gate needs distinct sites (got {0} twice)")]
    SameSite(usize),

    #[error("operator {0} is not Hermitian")]
    NonHermitian(String),

    #[error("cannot measure the identity")]
    IdentityMeasurement,

    #[error("size mismatch: {0} vs {1} qubits")]
    SizeMismatch(usize, usize),

    #[error("{n} qubits exceeds the statevector cap of {cap}")]
    TooManyQubits { n: usize, cap: usize },

    #[error("post-selected outcome has zero probability")]
    ZeroProbability,

    #[error("region has {size} sites; subset expansion is capped at {cap}")]
    SubsetCapExceeded { size: usize, cap: usize },

    #[error("region spans both sides of the bipartition")]
    RegionSpansPartition,

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("retained sites do not form the surface-code qubit pattern: {0}")]
    SurfaceCodePattern(String),

    #[error("observable list is empty")]
    EmptyObservables,

    #[error("at least one trajectory is required")]
    NoTrajectories,

    #[error("{what} = {value} is out of range")]
    OutOfRange { what: &'static str, value: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
