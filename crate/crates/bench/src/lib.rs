//! Shared fixtures for the criterion benches.

use ej_core::{asymptotics::reference_state, GasLaw, GasState};

/// Subsonic reference state at `theta` with unit density and internal energy.
pub fn state(theta: f64) -> GasState {
    reference_state(theta, 1.0, 1.0, &GasLaw::default()).expect("theta in (0, 1)")
}

/// A right state a few percent away from `state(theta)`.
pub fn perturbed(theta: f64) -> GasState {
    let u = state(theta);
    GasState::from_primitive(1.04, u.velocity() * 0.97, 1.03).expect("valid perturbation")
}
