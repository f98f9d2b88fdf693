use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("resource guard: {0}")]
    Resource(String),

    #[error("line {line}: {msg}")]
    EdgeList { line: u64, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Param(msg.into())
    }
}

macro_rules! ensure_param {
    ($cond:expr, $($arg:tt)+) => {
        // negated so that NaN fails the check
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !($cond) {
            return Err($crate::error::Error::param(format!($($arg)+)));
        }
    };
}
pub(crate) use ensure_param;
