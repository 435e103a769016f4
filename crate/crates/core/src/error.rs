use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("occupation vector has {got} modes, register expects {expected}")]
    OccupationLength { expected: usize, got: usize },

    #[error("state has no nonzero amplitude")]
    ZeroState,

    #[error("register mismatch: {0}")]
    RegisterMismatch(String),

    #[error("path {path} out of range for register with {paths} paths")]
    PathOutOfRange { path: usize, paths: usize },

    #[error("OAM label {oam} out of range for alphabet of size {oams}")]
    OamOutOfRange { oam: usize, oams: usize },

    #[error("invalid path subset: {0}")]
    InvalidPathSet(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not unitary (max deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("transmissivity {0} outside the open interval (0, 1)")]
    Transmissivity(f64),

    #[error("index ({row}, {col}) out of range for {size}x{size} matrix")]
    IndexOutOfRange { row: usize, col: usize, size: usize },

    #[error("duplicate entries in {0}")]
    Duplicate(&'static str),

    #[error("unsupported dimension d = {d}: {reason}")]
    UnsupportedDimension { d: usize, reason: String },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid Bell index ({m1}, {m2}) for d = {d}")]
    BellIndex { m1: usize, m2: usize, d: usize },

    #[error("input state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),

    #[error("input lies outside the antisymmetric subspace (overlap deficit {0:e})")]
    OutsideAntisymmetricSubspace(f64),

    #[error("unsupported mode: {0}")]
    UnsupportedMode(String),

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
