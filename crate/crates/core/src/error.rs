use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("input contains NaN or infinite entries")]
    NonFinite,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shifted system is singular to working precision (rcond estimate {rcond:.3e})")]
    SingularShift { rcond: f64 },

    #[error("QZ iteration did not converge; eigenvalues {failed_at}.. are unresolved")]
    QzNoConvergence {
        failed_at: usize,
        /// Eigenvalue pairs `(alpha, beta)` that did converge, by position.
        partial: Vec<Option<(crate::C64, crate::C64)>>,
    },

    #[error("SVD did not converge")]
    SvdNoConvergence,

    #[error("deflation failed: {0}")]
    Deflation(String),

    #[error("missing coefficient file {name} in {}", dir.display())]
    MissingFile { name: String, dir: PathBuf },

    #[error("malformed Matrix Market file {}: {msg}", path.display())]
    MalformedMatrix { path: PathBuf, msg: String },

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
