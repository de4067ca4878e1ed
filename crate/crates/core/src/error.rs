use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid code spec: {0}")]
    InvalidSpec(String),

    #[error("check matrices violate the CSS condition (h_x * h_z^T != 0)")]
    NotCss,

    #[error("logical operator extraction failed: {0}")]
    Logicals(String),

    #[error("schedule layer {layer} touches qubit {qubit} twice")]
    LayerCollision { layer: usize, qubit: usize },

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("schedule does not match circuit: {0}")]
    ScheduleMismatch(String),

    #[error("impossible evidence: Pr(d_s = {flag}) = 0 for e = {e}, q = {q}")]
    ImpossibleEvidence { flag: bool, e: f64, q: f64 },

    #[error("inconsistent posterior: {0}")]
    InconsistentPosterior(String),

    #[error("detector or observable {0} is not deterministic in the noiseless circuit")]
    NonDeterministic(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("metrics: {0}")]
    Metrics(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
