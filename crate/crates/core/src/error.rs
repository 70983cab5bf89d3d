use thiserror::Error;

use crate::integrator::IntegrateError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension d = {d} not supported here (need d >= {min})")]
    Dimension { d: u32, min: u32 },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("radial equation evaluated at r = {r}; use the series initializer near the origin")]
    SingularPoint { r: f64 },
    #[error("series start {value} too far from the origin (max {max})")]
    SeriesStart { value: f64, max: f64 },
    #[error("profile tail not decayed: |f(r_max)|/max|f| = {ratio:e}")]
    UndecayedTail { ratio: f64 },
    #[error("no decay plateau: best relative spread {spread:e}")]
    NoPlateau { spread: f64 },
    #[error("profile samples invalid: {0}")]
    Profile(String),
    #[error("bracket invalid: both ends of ({lo}, {hi}) classify as {class}")]
    BracketInvalid { lo: f64, hi: f64, class: String },
    #[error("integration failed during {context}: {detail}")]
    Shot { context: String, detail: String },
    #[error("heteroclinic orbit did not settle at sqrt(d-3)")]
    ThetaNotConverged,
    #[error("degenerate Padé table entry [{m}/{k}]")]
    DegeneratePade { m: usize, k: usize },
    #[error("Padé denominator vanishes at s = {s} inside the matching disk")]
    PadePole { s: f64 },
    #[error("series coefficients overflow at n = {n}; reduce the order")]
    SeriesOverflow { n: usize },
    #[error("fit failed: {0}")]
    Fit(String),
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
}
