use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("empty dataset{}", fmt_ctx(.0))]
    EmptyData(String),

    #[error("dataset contains a single class{}", fmt_ctx(.0))]
    SingleClass(String),

    #[error("class prior {0} outside (0, 1)")]
    InvalidPrior(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-positive denominator {den} when evaluating {what}")]
    DegenerateDenominator { what: String, den: f64 },

    #[error("regularity violation: {0}")]
    Regularity(String),

    #[error("empty sample stream")]
    EmptyStream,

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn fmt_ctx(ctx: &str) -> String {
    if ctx.is_empty() {
        String::new()
    } else {
        format!(" ({ctx})")
    }
}

pub type Result<T> = std::result::Result<T, Error>;
