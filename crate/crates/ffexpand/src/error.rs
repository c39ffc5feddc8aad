//! Crate-wide error type.
//!
//! Variants are grouped by how a caller should react: `Parse` and
//! `FieldSpec` are input-text problems, `Domain` is a violated mathematical
//! precondition, `Cap` means a configured resource budget was hit, and
//! `Internal` marks a broken invariant that should never surface.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Syntax error in polynomial text, with a byte offset into the input.
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    /// Malformed field spec string such as `"6"` or `"3^0"`.
    #[error("invalid field spec `{spec}`: {msg}")]
    FieldSpec { spec: String, msg: String },

    /// A mathematical precondition does not hold (wrong degree, q <= n, ...).
    #[error("{0}")]
    Domain(String),

    /// A configured safety cap was exceeded; the work was not attempted.
    #[error("{0}")]
    Cap(String),

    /// Operands belong to different field contexts.
    #[error("field context mismatch: {0}")]
    CtxMismatch(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    /// A supposedly unreachable state; indicates a bug in this crate.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn parse(pos: usize, msg: impl Into<String>) -> Self {
        Error::Parse { pos, msg: msg.into() }
    }

    /// Process exit code for this error: 64 usage, 65 domain, 66 cap,
    /// 70 internal, 74 i/o.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::FieldSpec { .. } => 64,
            Error::Domain(_) | Error::CtxMismatch(_) => 65,
            Error::Cap(_) => 66,
            Error::Io(_) | Error::Json(_) => 74,
            Error::Internal(_) => 70,
        }
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn cap(msg: impl Into<String>) -> Self {
        Error::Cap(msg.into())
    }
}
