use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid packet: {0}")]
    InvalidPacket(String),

    #[error("invalid barrier: {0}")]
    InvalidBarrier(String),

    #[error("invalid evolution config: {0}")]
    InvalidConfig(String),

    #[error("grid too narrow: edge amplitude ratio {ratio:.3e} exceeds {threshold:.1e}")]
    GridTooNarrow { ratio: f64, threshold: f64 },

    #[error("tridiagonal solve broke down at row {row}")]
    SolverBreakdown { row: usize },

    #[error("probe at x = {x} lies outside the grid interior")]
    ProbeOffGrid { x: f64 },

    #[error("total density at the probe vanishes over the window")]
    ZeroTotalDensity,

    #[error("total current at the probe vanishes over the window")]
    ZeroTotalCurrent,

    #[error("distribution maximum sits at the window edge (T = {t})")]
    PeakAtWindowEdge { t: f64 },

    #[error("probe mismatch: {a} vs {b}")]
    ProbeMismatch { a: f64, b: f64 },

    #[error("wavenumber must be positive, got {0}")]
    NonPositiveWavenumber(f64),

    #[error("transmitted weight vanishes")]
    VanishingTransmission,

    #[error("phase branch discontinuity near k = {k}")]
    PhaseDiscontinuity { k: f64 },

    #[error("point x = {x} is not beyond the barrier exit {exit}")]
    NotBeyondBarrier { x: f64, exit: f64 },

    #[error("detector bin is empty at every recorded time")]
    EmptyDetectorBin,

    #[error("no path crosses x = {x}")]
    NoCrossings { x: f64 },

    #[error("no transmitted paths")]
    NoTransmittedPaths,

    #[error("empty record")]
    EmptyRecord,
}

pub type Result<T> = std::result::Result<T, Error>;
