use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid needs an odd number of points >= 3, got {0}")]
    EvenOrTinyGrid(usize),
    #[error("grid half-width must be positive and finite, got {0}")]
    BadHalfWidth(f64),
    #[error("field has {got} samples but the grid has {expected} nodes")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite sample at node {0}")]
    NonFinite(usize),
    #[error("negative sample {value} at node {node}")]
    NegativeSample { node: usize, value: f64 },
    #[error("nonzero boundary value in field that must vanish at both ends")]
    NonzeroBoundary,
    #[error("bumps overlap after shifting by {0} nodes")]
    OverlappingSupports(i64),
    #[error("parameter {name} = {value} is outside its domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },
    #[error("phase rescaling is degenerate: overlap integral {0} <= 0")]
    DegenerateGamma(f64),
    #[error("phase weight integral {0} too small to carry momentum")]
    FlatModulus(f64),
    #[error("mass {0} too small to extract the chemical potential")]
    VanishingMass(f64),
    #[error("momentum pairing {0} vanishes; speed multiplier undefined")]
    VanishingPairing(f64),
    #[error("shooting blew up at x = {x}")]
    ShootBlowUp { x: f64 },
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
