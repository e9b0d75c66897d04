use thiserror::Error;

use crate::pic_lattice::LatticeSignature;

#[derive(Debug, Error)]
pub enum Error {
    #[error("signature mismatch: {left} vs {right}")]
    SignatureMismatch {
        left: LatticeSignature,
        right: LatticeSignature,
    },
    #[error("expected {expected} coefficients for {signature}, got {got}")]
    RankMismatch {
        signature: LatticeSignature,
        expected: usize,
        got: usize,
    },
    #[error("blow-up target {target} is not a one-point blow-up of {source_sig}")]
    BadBlowupTarget {
        source_sig: LatticeSignature,
        target: LatticeSignature,
    },
    #[error("integer overflow in lattice arithmetic")]
    Overflow,
    #[error("D.(D-K) = {value} is odd; integral classes must give an even value")]
    Parity { value: i64 },
    #[error("unknown seed `{0}` (expected P2, F0, F1 or F2)")]
    UnknownSeed(String),
    #[error("corner {index} out of range for a loop of length {len}{}", step_suffix(.step))]
    CornerOutOfRange {
        step: Option<usize>,
        index: usize,
        len: usize,
    },
    #[error("invalid fan: {0}")]
    InvalidFan(String),
    #[error("model corruption: {0}")]
    ModelCorruption(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid K^2 range [{min}, {max}]: need 1 <= min <= max <= 7")]
    K2Range { min: i64, max: i64 },
    #[error("degree parameter d must be positive, got {0}")]
    NonPositiveDegree(i64),
    #[error("lift precondition failed: {0}")]
    LiftPrecondition(String),
    #[error("unknown graph format `{0}` (expected dot or ascii)")]
    UnknownFormat(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

fn step_suffix(step: &Option<usize>) -> String {
    match step {
        Some(s) => format!(" at blow-up step {s}"),
        None => String::new(),
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
