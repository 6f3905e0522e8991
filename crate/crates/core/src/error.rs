use thiserror::Error;

/// Errors produced anywhere in the operator laboratory.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("result overflows f64 (log-magnitude {log_magnitude})")]
    Overflow { log_magnitude: f64 },

    #[error("expected {expected} contour samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("|z| = {modulus} lies outside the closed disk of radius {radius}")]
    OutOfDisk { modulus: f64, radius: f64 },

    #[error("Re(z) = {re} exceeds b_n = {b_n}")]
    RightOfStrip { re: f64, b_n: f64 },

    #[error("decay certificate |c_p| <= M A^p/(2p)! violated at index {index}")]
    CertificateViolation { index: usize },

    #[error("function carries no valid decay certificate")]
    Uncertified,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("series truncation needs more than {limit} terms")]
    Truncation { limit: usize },

    #[error("quadrature did not converge: node counts disagree by {delta:e}")]
    QuadratureNonconvergence { delta: f64 },

    #[error("point z is not strictly inside the contour (|z - c| = {distance}, radius {radius})")]
    PointOnContour { distance: f64, radius: f64 },

    #[error("contour integral did not converge within {max_nodes} nodes")]
    ContourNonconvergence { max_nodes: usize },

    #[error("constant diverges: A*r = {product} >= 1")]
    Divergence { product: f64 },

    #[error("geometry: need r < r1, got r = {r}, r1 = {r1}")]
    Geometry { r: f64, r1: f64 },

    #[error("inadmissible b_n = {b_n} at n = {n} (need 0 < b_n < n)")]
    Inadmissible { n: u32, b_n: f64 },

    #[error("p_max = {requested} exceeds the cap of {cap}")]
    PmaxCap { requested: usize, cap: usize },

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
