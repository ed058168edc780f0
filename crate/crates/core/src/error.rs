use thiserror::Error;

/// Errors raised by the numerical kernels.
///
/// Every variant maps onto a small stable integer through [`LabError::code`],
/// which the command-line front end uses as its process exit status.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("density must be real and nonnegative: {0}")]
    InvalidDensity(String),

    #[error("profile does not decay at the outer radius: |f(r_max)|/max|f| = {ratio:e}")]
    Truncation { ratio: f64 },

    #[error("frequency support overflows the grid (extent {extent:.4} >= nyquist {nyquist:.4}); n_per_dim >= {min_n} would fit")]
    SupportOverflow {
        extent: f64,
        nyquist: f64,
        min_n: usize,
    },

    #[error("non-finite values encountered; last good time t = {last_good_time}")]
    NonFinite { last_good_time: f64 },

    #[error("blow-up detected at t = {time}: sup norm grew by a factor {growth:e}")]
    BlowUp { time: f64, growth: f64 },

    #[error("iteration diverged after {iterations} steps: {reason}")]
    Divergence { iterations: usize, reason: String },

    #[error("iteration stagnated after {iterations} steps with residual {residual:e}")]
    Stagnation { iterations: usize, residual: f64 },

    #[error("not converged: {0}")]
    NotConverged(String),

    #[error("quadrature refinement ratio {ratio:e} exceeds 0.1")]
    Quadrature { ratio: f64 },

    #[error("empty support: {0}")]
    EmptySupport(String),

    #[error("Monte-Carlo precision insufficient: {0}")]
    McPrecision(String),

    #[error("malformed container: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl LabError {
    /// Stable exit code per error family.
    pub fn code(&self) -> i32 {
        match self {
            LabError::InvalidGrid(_) | LabError::InvalidParameter(_) => 2,
            LabError::InvalidDensity(_) | LabError::Truncation { .. } => 3,
            LabError::NonFinite { .. }
            | LabError::BlowUp { .. }
            | LabError::Divergence { .. }
            | LabError::Stagnation { .. }
            | LabError::NotConverged(_)
            | LabError::Quadrature { .. } => 4,
            LabError::SupportOverflow { .. } | LabError::EmptySupport(_) => 5,
            LabError::McPrecision(_) => 6,
            LabError::Format(_) | LabError::Io(_) => 7,
        }
    }

    /// Short machine-readable category name.
    pub fn category(&self) -> &'static str {
        match self.code() {
            2 => "config",
            3 => "input",
            4 => "numerical",
            5 => "support",
            6 => "monte_carlo",
            _ => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
