use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Both control beams are off; the polariton weights are 0/0.
    #[error("controls-off: both Rabi frequencies are zero, the spin wave must be frozen")]
    ControlsOff,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("step-size error: dtau = {dtau:.3e} exceeds the stability bound {bound:.3e}")]
    StepSize { dtau: f64, bound: f64 },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("invalid config at `{path}`: {message}")]
    Validation { path: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Process exit code used by the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation { .. } | Error::Domain(_) | Error::ControlsOff => 2,
            Error::StepSize { .. } | Error::Numerical(_) => 3,
            Error::Io { .. } => 4,
        }
    }
}
