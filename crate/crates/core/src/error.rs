use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph: {0}")]
    Graph(String),
    #[error("edge {edge} joins two vertices of parity {parity}")]
    Parity { edge: String, parity: char },
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("graph is not connected")]
    Disconnected,
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("power iteration did not converge after {0} steps")]
    NoConvergence(usize),
    #[error("loop: {0}")]
    Loop(String),
    #[error("level {level} is below {needed}")]
    Level { level: usize, needed: usize },
    #[error("shading mismatch")]
    Shading,
    #[error("odd number of points: {0}")]
    OddPoints(usize),
    #[error("pairing is crossing or not perfect")]
    BadPairing,
    #[error("delta {0} is below 1")]
    DeltaBelowOne(f64),
    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("tangle: {0}")]
    Tangle(String),
    #[error("basis size {0} exceeds cap")]
    BasisCap(usize),
    #[error("model: {0}")]
    Model(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
