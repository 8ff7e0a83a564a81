use thiserror::Error;

/// Failures raised by the solvers and state constructors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A derived quantity left the physical domain (e.g. negative internal energy).
    #[error("{quantity} = {value:e} is outside the model domain")]
    Domain { quantity: &'static str, value: f64 },

    /// Density or internal energy collapsed below the vacuum floor.
    #[error("vacuum: {quantity} = {value:e} fell below the floor")]
    Vacuum { quantity: &'static str, value: f64 },

    /// The requested point is outside a wave curve's admissible range.
    #[error("wave curve not applicable: {0}")]
    NotApplicable(String),

    #[error(
        "Newton iteration did not converge after {iterations} iterations (residual {residual:e})"
    )]
    NoConvergence { iterations: usize, residual: f64 },

    /// A characteristic speed approached zero while integrating the stationary ODE.
    #[error("sonic point approached at x = {x}: |lambda|/c = {ratio:e}")]
    Sonic { x: f64, ratio: f64 },

    #[error("transmitted state leaves the subsonic region (theta = {theta})")]
    NonSubsonicResult { theta: f64 },

    #[error("{side} trace leaves the subsonic region (theta = {theta})")]
    NonSubsonicTrace { side: &'static str, theta: f64 },

    #[error("wave of family {family} has speed {speed:e} on the wrong side of the junction")]
    SpeedSign { family: u8, speed: f64 },

    #[error("closed forms are only available for gamma = 5/3 (got {0})")]
    UnsupportedGamma(f64),

    #[error("section ratio |da|/a = {ratio} exceeds the perturbative limit {limit}")]
    SectionGuard { ratio: f64, limit: f64 },

    /// The chain left the perturbative regime; `trajectory` holds the strengths reached so far.
    #[error("wave strength {sigma:e} exceeds the guard {limit:e} after pair {pair}")]
    AmplitudeOverflow {
        pair: usize,
        sigma: f64,
        limit: f64,
        trajectory: Vec<f64>,
        ratios: Vec<f64>,
        predicted: Vec<Option<f64>>,
    },

    #[error("invalid section profile: {0}")]
    Profile(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Short machine-readable tag used in CLI error objects.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "domain",
            Error::Vacuum { .. } => "vacuum",
            Error::NotApplicable(_) => "not_applicable",
            Error::NoConvergence { .. } => "no_convergence",
            Error::Sonic { .. } => "sonic",
            Error::NonSubsonicResult { .. } => "non_subsonic_result",
            Error::NonSubsonicTrace { .. } => "non_subsonic_trace",
            Error::SpeedSign { .. } => "speed_sign",
            Error::UnsupportedGamma(_) => "unsupported_gamma",
            Error::SectionGuard { .. } => "section_guard",
            Error::AmplitudeOverflow { .. } => "amplitude_overflow",
            Error::Profile(_) => "profile",
            Error::InvalidArgument(_) => "invalid_argument",
        }
    }
}
