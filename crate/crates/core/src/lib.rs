//! Quantitative geometry and elliptic-measure numerics on planar domains.
//!
//! The crate builds Christ-type dyadic grids on piecewise-linear boundaries,
//! Whitney decompositions with sawtooth regions, discrete Carleson measures
//! with stopping-time extraction, and a finite-difference / walk-on-spheres
//! engine for elliptic measure, Poisson kernels and Green functions, so that
//! corkscrew, Harnack-chain, Ahlfors-regularity and A_∞-type estimates can be
//! measured on concrete domains.

pub mod boundary;
pub mod carleson;
pub mod coeff;
pub mod cutoff;
pub mod dyadic;
pub mod elliptic;
pub mod field;
pub mod fasthash;
pub mod geom;
pub mod probe;
pub mod regions;
pub mod solver;
pub mod rng;
pub mod whitney;
pub mod wos;

/// Crate-wide error taxonomy; variants follow the failure modes the
/// operations can report.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("input: {0}")]
    Input(String),
    #[error("range: {0}")]
    Range(String),
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("resolution: {0}")]
    Resolution(String),
    #[error("parameter: {0}")]
    Parameter(String),
    #[error("precondition: {0}")]
    Precondition(String),
    #[error("solver: {0}")]
    Solver(String),
    #[error("certification: {0}")]
    Certification(String),
    #[error("contradiction: {0}")]
    Contradiction(String),
    #[error("format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
