use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Both the detuning and the spin-electric coupling vanish, so the
    /// effective Hamiltonian is zero and has no preferred eigenbasis.
    #[error("dressed basis undefined: detuning and spin-electric coupling are both zero")]
    DegenerateDressedBasis,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("not a density matrix: {0}")]
    NotDensityMatrix(String),

    #[error("mode frequency {0} is not positive; thermal occupation undefined")]
    NonPositiveFrequency(f64),

    #[error("quadrature did not converge: estimated error {estimate:e} above tolerance {tolerance:e}")]
    QuadratureNonConvergence { estimate: f64, tolerance: f64 },

    #[error("step size underflow at t = {t}: h = {h:e}")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("trace drifted by {drift:e} at t = {t}")]
    TraceDrift { t: f64, drift: f64 },

    #[error("eigenvalue {value:e} at t = {t}: dynamics left the weak-coupling regime")]
    PositivityViolation { t: f64, value: f64 },

    #[error("Bloch vector norm {0} exceeds 1")]
    BlochNormExceeded(f64),

    #[error("time grid invalid: {0}")]
    InvalidGrid(String),

    #[error("config: {0}")]
    Config(String),

    #[error("unknown figure `{0}` (expected fig1..fig5)")]
    UnknownFigure(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
