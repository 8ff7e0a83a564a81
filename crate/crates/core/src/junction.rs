//! Junction Riemann problems, the interaction of a 3-wave with a junction,
//! junction pairs and chains, and piecewise-constant stationary profiles.

use serde::Serialize;

use crate::asymptotics;
use crate::coupling::{psi_residual, t_map, CouplingKind, SectionProfile};
use crate::error::{Error, Result};
use crate::newton::{self, Jacobian};
use crate::thermo::{GasLaw, GasState};
use crate::waves::{conserved_scale, lax_curve, wave_speed_range, CurveDirection, WaveFamily};
use crate::{SolverOptions, Vec3};

/// Solution of a Riemann problem with a section jump at `x = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JunctionFan {
    pub sigma: [f64; 3],
    pub u_far_left: GasState,
    /// `u(t, 0-) = L1(uL; sigma1)`
    pub trace_left: GasState,
    /// `u(t, 0+) = T(trace_left)`
    pub trace_right: GasState,
    /// State between the 2- and 3-waves.
    pub u_star_right: GasState,
    pub u_far_right: GasState,
    pub residual: f64,
    pub iterations: usize,
}

fn junction_states(
    kind: CouplingKind,
    a_minus: f64,
    a_plus: f64,
    u_left: &GasState,
    sigma: &Vec3,
    law: &GasLaw,
    opts: &SolverOptions,
) -> Result<[GasState; 4]> {
    let tl = lax_curve(
        WaveFamily::One,
        CurveDirection::Forward,
        u_left,
        sigma[0],
        law,
    )?;
    let tr = t_map(kind, a_minus, a_plus, &tl, law, opts)?;
    let s2 = lax_curve(WaveFamily::Two, CurveDirection::Forward, &tr, sigma[1], law)?;
    let s3 = lax_curve(
        WaveFamily::Three,
        CurveDirection::Forward,
        &s2,
        sigma[2],
        law,
    )?;
    Ok([tl, tr, s2, s3])
}

fn check_speed(
    family: WaveFamily,
    behind: &GasState,
    ahead: &GasState,
    sigma: f64,
    law: &GasLaw,
) -> Result<()> {
    if sigma.abs() <= 1e-14 * behind.rho() {
        return Ok(());
    }
    let (lo, hi) = wave_speed_range(family, behind, ahead, law);
    match family {
        WaveFamily::One if hi > 0.0 => Err(Error::SpeedSign {
            family: 1,
            speed: hi,
        }),
        WaveFamily::Two | WaveFamily::Three if lo <= 0.0 => Err(Error::SpeedSign {
            family: family.index(),
            speed: lo,
        }),
        _ => Ok(()),
    }
}

/// Solves `L3(L2(T(L1(uL; s1)); s2); s3) = uR`.
pub fn solve_junction_riemann(
    kind: CouplingKind,
    a_minus: f64,
    a_plus: f64,
    u_left: &GasState,
    u_right: &GasState,
    law: &GasLaw,
    opts: &SolverOptions,
) -> Result<JunctionFan> {
    for (side, u) in [("left", u_left), ("right", u_right)] {
        if !u.is_subsonic(law) {
            return Err(Error::NonSubsonicTrace {
                side,
                theta: u.theta(law),
            });
        }
    }
    let scale = conserved_scale(u_right, law);
    let target = u_right.as_vector();
    let residual = |s: &Vec3| -> Result<Vec3> {
        let states = junction_states(kind, a_minus, a_plus, u_left, s, law, opts)?;
        Ok((states[3].as_vector() - target).component_div(&scale))
    };
    let report = newton::solve(
        residual,
        Vec3::zeros(),
        Jacobian::FiniteDifference {
            scale: Vec3::repeat(u_left.rho().max(u_right.rho())),
        },
        &opts.newton,
    )?;
    let s = report.x;
    let [tl, tr, s2, s3] = junction_states(kind, a_minus, a_plus, u_left, &s, law, opts)?;
    for (side, u) in [("left", &tl), ("right", &tr)] {
        if !u.is_subsonic(law) {
            return Err(Error::NonSubsonicTrace {
                side,
                theta: u.theta(law),
            });
        }
    }
    check_speed(WaveFamily::One, u_left, &tl, s[0], law)?;
    check_speed(WaveFamily::Two, &tr, &s2, s[1], law)?;
    check_speed(WaveFamily::Three, &s2, &s3, s[2], law)?;
    Ok(JunctionFan {
        sigma: [s[0], s[1], s[2]],
        u_far_left: *u_left,
        trace_left: tl,
        trace_right: tr,
        u_star_right: s2,
        u_far_right: s3,
        residual: report.residual,
        iterations: report.iterations,
    })
}

/// Outcome of a 3-wave `sigma3m` travelling on `u` and hitting the junction `a -> a + da`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InteractionResult {
    /// Outgoing `(sigma1+, sigma2+, sigma3+)`.
    pub sigma: [f64; 3],
    /// State behind the transmitted 3-wave.
    pub u_plus: GasState,
    pub theta_plus: f64,
    pub residual: f64,
}

/// Solves `L3(L2(T(L1(u; s1)); s2); s3) = T(L3(u; sigma3m))`.
pub fn interact_incoming(
    kind: CouplingKind,
    u: &GasState,
    sigma3m: f64,
    a: f64,
    da: f64,
    law: &GasLaw,
    opts: &SolverOptions,
) -> Result<InteractionResult> {
    if !u.is_subsonic(law) {
        return Err(Error::NonSubsonicTrace {
            side: "left",
            theta: u.theta(law),
        });
    }
    if da == 0.0 {
        return Ok(InteractionResult {
            sigma: [0.0, 0.0, sigma3m],
            u_plus: *u,
            theta_plus: u.theta(law),
            residual: 0.0,
        });
    }
    let incoming = lax_curve(WaveFamily::Three, CurveDirection::Forward, u, sigma3m, law)?;
    let u_right = t_map(kind, a, a + da, &incoming, law, opts)?;
    let fan = solve_junction_riemann(kind, a, a + da, u, &u_right, law, opts)?;
    let theta_plus = fan.u_star_right.theta(law);
    if !(theta_plus > 0.0 && theta_plus < 1.0) {
        return Err(Error::NonSubsonicResult { theta: theta_plus });
    }
    Ok(InteractionResult {
        sigma: fan.sigma,
        u_plus: fan.u_star_right,
        theta_plus,
        residual: fan.residual,
    })
}

/// A wave crossing `a -> a + da` and then `a + da -> a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairResult {
    pub sigma3m: f64,
    pub sigma3p: f64,
    pub sigma3pp: f64,
    /// `sigma3pp / sigma3m`
    pub ratio: f64,
    /// `1 + chi(theta) (da/a)^2` from the closed form; `None` off the reference gamma.
    pub predicted_ratio: Option<f64>,
    pub theta: f64,
    pub theta_plus: f64,
    /// State behind the outgoing wave after the second junction.
    pub u_after: GasState,
}

pub fn amplify_pair(
    kind: CouplingKind,
    u: &GasState,
    sigma3m: f64,
    a: f64,
    da: f64,
    law: &GasLaw,
    opts: &SolverOptions,
) -> Result<PairResult> {
    let first = interact_incoming(kind, u, sigma3m, a, da, law, opts)?;
    let second = interact_incoming(kind, &first.u_plus, first.sigma[2], a + da, -da, law, opts)?;
    let theta = u.theta(law);
    let h = da / a;
    let predicted_ratio = if law.is_reference() {
        asymptotics::chi_closed(kind, theta)
            .ok()
            .map(|chi| 1.0 + chi * h * h)
    } else {
        None
    };
    Ok(PairResult {
        sigma3m,
        sigma3p: first.sigma[2],
        sigma3pp: second.sigma[2],
        ratio: second.sigma[2] / sigma3m,
        predicted_ratio,
        theta,
        theta_plus: first.theta_plus,
        u_after: second.u_plus,
    })
}

/// Strengths of the 3-wave after each junction pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainResult {
    /// `trajectory[0]` is the incoming strength, `trajectory[k]` the strength after pair `k`.
    pub trajectory: Vec<f64>,
    pub ratios: Vec<f64>,
    pub predicted: Vec<Option<f64>>,
    /// Background state met by each pair.
    pub backgrounds: Vec<GasState>,
}

/// Repeats [`amplify_pair`], re-anchoring the background to the state the
/// previous pair left behind the wave. Only the transmitted 3-wave is followed.
#[allow(clippy::too_many_arguments)]
pub fn chain_propagate(
    kind: CouplingKind,
    u: &GasState,
    sigma3m: f64,
    a: f64,
    da: f64,
    n_pairs: usize,
    law: &GasLaw,
    opts: &SolverOptions,
) -> Result<ChainResult> {
    let mut out = ChainResult {
        trajectory: vec![sigma3m],
        ratios: Vec::with_capacity(n_pairs),
        predicted: Vec::with_capacity(n_pairs),
        backgrounds: vec![*u],
    };
    let mut bg = *u;
    let mut sigma = sigma3m;
    for pair in 1..=n_pairs {
        let r = amplify_pair(kind, &bg, sigma, a, da, law, opts)?;
        sigma = r.sigma3pp;
        bg = r.u_after;
        out.trajectory.push(sigma);
        out.ratios.push(r.ratio);
        out.predicted.push(r.predicted_ratio);
        let limit = opts.amplitude_guard * bg.rho();
        if sigma.abs() > limit {
            return Err(Error::AmplitudeOverflow {
                pair,
                sigma,
                limit,
                trajectory: out.trajectory,
                ratios: out.ratios,
                predicted: out.predicted,
            });
        }
        if pair < n_pairs {
            out.backgrounds.push(bg);
        }
    }
    Ok(out)
}

/// Piecewise-constant stationary solution across a sequence of junctions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryProfile {
    pub states: Vec<GasState>,
    /// Max-norm of the scaled coupling residual at each junction.
    pub residuals: Vec<f64>,
    /// `sum_j |u_j - u_{j-1}|` in `(rho/rho0, q/q0, E/E0)`.
    pub total_variation: f64,
    pub section_variation: f64,
}

pub fn stationary_profile(
    kind: CouplingKind,
    profile: &SectionProfile,
    u0: &GasState,
    law: &GasLaw,
    opts: &SolverOptions,
) -> Result<StationaryProfile> {
    let SectionProfile::Pieces { sections, .. } = profile else {
        return Err(Error::Profile(
            "stationary_profile needs a piecewise-constant section".into(),
        ));
    };
    if !u0.is_subsonic(law) {
        return Err(Error::NonSubsonicTrace {
            side: "left",
            theta: u0.theta(law),
        });
    }
    let bar = u0.as_vector();
    let mut states = vec![*u0];
    let mut residuals = Vec::with_capacity(sections.len() - 1);
    let mut tv = 0.0;
    for w in sections.windows(2) {
        let prev = *states.last().expect("non-empty");
        let next = t_map(kind, w[0], w[1], &prev, law, opts)?;
        let r = psi_residual(kind, w[0], &prev, w[1], &next, law, opts)?;
        let c = prev.sound_speed(law);
        let rho = prev.rho();
        let scale = Vec3::new(w[0] * rho * c, w[0] * rho * c * c, w[0] * rho * c * c * c);
        residuals.push(r.component_div(&scale).amax());
        tv += (next.as_vector() - prev.as_vector())
            .component_div(&bar)
            .norm();
        states.push(next);
    }
    Ok(StationaryProfile {
        states,
        residuals,
        total_variation: tv,
        section_variation: profile.total_variation(),
    })
}
