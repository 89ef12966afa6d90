use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("matrix A is not resonant: {0}")]
    NonResonant(String),
    #[error("argument out of range: {0}")]
    Domain(String),
    #[error("insufficient Fourier modes: reconstruction residual {residual:.3e} exceeds {tolerance:.3e}")]
    InsufficientModes { residual: f64, tolerance: f64 },
    #[error("solution bound exceeded at t = {t}: |u| = {norm:.6e} > {bound:.6e}")]
    BoundExceeded { t: f64, norm: f64, bound: f64 },
    #[error("maximum number of steps ({max_steps}) exceeded; last accepted time {t_reached}")]
    MaxStepsExceeded { max_steps: usize, t_reached: f64 },
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("unknown {kind} '{name}'")]
    Unknown { kind: &'static str, name: String },
    #[error("malformed data: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures coming from the numerics (guards, step limits), as opposed to
    /// bad input or I/O.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::BoundExceeded { .. } | Error::MaxStepsExceeded { .. } | Error::InsufficientModes { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
