use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate surface: {0}")]
    Degenerate(String),

    #[error("time step {dt:e} fell below dt_min {dt_min:e} at t = {t}")]
    StepTooSmall { dt: f64, dt_min: f64, t: f64 },

    #[error(
        "convexity lost at node {node} (t = {t}): lambda1 = {lambda1:e}, lambda2 = {lambda2:e}"
    )]
    ConvexityLost {
        node: usize,
        t: f64,
        lambda1: f64,
        lambda2: f64,
    },

    #[error("snapshot mismatch: {0}")]
    Mismatch(String),

    #[error("value {y:e} outside the tabulated range [{lo:e}, {hi:e}]")]
    Range { y: f64, lo: f64, hi: f64 },

    #[error("insufficient blowup: H_max grew only {growth:.3}x over the trace (need 10x)")]
    InsufficientBlowup { growth: f64 },

    #[error("graph equation left the parabolic regime at grid node ({i}, {j}): H = {h:e}")]
    NonParabolic { i: usize, j: usize, h: f64 },

    #[error("index error: {0}")]
    Index(String),

    #[error("{0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
