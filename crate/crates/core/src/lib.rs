//! Euler equations in a duct with section discontinuities.
//!
//! The crate covers ideal-gas thermodynamics, Lax curves and the classical
//! Riemann solver, the four coupling conditions at a junction and their
//! transmission maps, the junction Riemann solver with the wave-interaction
//! experiments built on it, and the second-order interaction asymptotics
//! together with numerical oracles that extract the same coefficients from
//! the solvers.

pub mod asymptotics;
pub mod coupling;
pub mod error;
pub mod junction;
pub mod newton;
pub mod thermo;
pub mod waves;

use serde::{Deserialize, Serialize};

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;

pub use asymptotics::{
    chi_closed, expansion_hg, extract_interaction_series, extract_t_series, f_coeffs,
    reference_state, theta_plus_closed, ExpansionHG, InteractionCoefficients, InteractionSeries,
    TSeries,
};
pub use coupling::{
    det_criterion, integrate_stationary, psi_residual, t_map, CouplingKind, DetReport,
    SectionProfile, SmoothShape, StationaryPath,
};
pub use error::{Error, Result};
pub use junction::{
    amplify_pair, chain_propagate, interact_incoming, solve_junction_riemann, stationary_profile,
    ChainResult, InteractionResult, JunctionFan, PairResult, StationaryProfile,
};
pub use newton::NewtonOptions;
pub use thermo::{Eigensystem, GasLaw, GasState, Primitives, REFERENCE_GAMMA};
pub use waves::{
    lax_curve, lax_tangent_at_zero, solve_riemann, CurveDirection, WaveFamily, WaveFan,
};

/// Numerical policy shared by the coupling and junction solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub newton: NewtonOptions,
    /// RK4 steps over the smooth section for condition (S).
    pub ode_steps: usize,
    /// Largest `|a+ - a-| / a-` accepted without `allow_large_section_jump`.
    pub max_section_ratio: f64,
    pub allow_large_section_jump: bool,
    /// Shape of the smooth section used by condition (S).
    pub smooth_shape: SmoothShape,
    /// Half-length `X` of the smooth section.
    pub smooth_half_width: f64,
    /// The stationary ODE stops when `|lambda_1|` or `|lambda_2|` drops below this times `c`.
    pub sonic_guard: f64,
    /// Chains stop once `|sigma_3| > amplitude_guard * rho`.
    pub amplitude_guard: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            newton: NewtonOptions::default(),
            ode_steps: 2000,
            max_section_ratio: 0.2,
            allow_large_section_jump: false,
            smooth_shape: SmoothShape::Linear,
            smooth_half_width: 1.0,
            sonic_guard: 1e-6,
            amplitude_guard: 0.2,
        }
    }
}

impl SolverOptions {
    /// Copy with the Newton tolerance replaced.
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.newton.tolerance = tol;
        self
    }
}
