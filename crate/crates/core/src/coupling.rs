//! Coupling conditions at a section discontinuity, the stationary ODE across
//! a smooth section, the transmission map `T` and the determinant criterion.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::newton::{self, Jacobian};
use crate::thermo::{GasLaw, GasState};
use crate::{Mat3, SolverOptions, Vec3};

/// Junction condition. Every kind conserves mass `a q` and energy `a F`;
/// they differ in the momentum relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CouplingKind {
    /// (S): limit of smooth sections, momentum balanced by `int p a' dx`.
    #[serde(rename = "S")]
    Smooth,
    /// (P): `P(u+) = P(u-)`.
    #[serde(rename = "P")]
    Momentum,
    /// (L): `a+ P(u+) = a- P(u-)`.
    #[serde(rename = "L")]
    SectionMomentum,
    /// (p): `p(u+) = p(u-)`.
    #[serde(rename = "p")]
    Pressure,
}

impl CouplingKind {
    pub const ALL: [CouplingKind; 4] = [
        CouplingKind::Smooth,
        CouplingKind::Momentum,
        CouplingKind::SectionMomentum,
        CouplingKind::Pressure,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            CouplingKind::Smooth => "S",
            CouplingKind::Momentum => "P",
            CouplingKind::SectionMomentum => "L",
            CouplingKind::Pressure => "p",
        }
    }
}

impl fmt::Display for CouplingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for CouplingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        // case matters: P and p are different conditions
        match s {
            "S" => Ok(CouplingKind::Smooth),
            "P" => Ok(CouplingKind::Momentum),
            "L" => Ok(CouplingKind::SectionMomentum),
            "p" => Ok(CouplingKind::Pressure),
            _ => Err(Error::InvalidArgument(format!(
                "coupling kind must be one of S, P, L, p (got {s:?})"
            ))),
        }
    }
}

/// Monotone interpolant between `a-` and `a+` on `[-X, X]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SmoothShape {
    Linear,
    /// `3 t^2 - 2 t^3`, flat at both ends.
    Cubic,
}

impl SmoothShape {
    fn value(self, t: f64) -> f64 {
        match self {
            SmoothShape::Linear => t,
            SmoothShape::Cubic => t * t * (3.0 - 2.0 * t),
        }
    }

    fn slope(self, t: f64) -> f64 {
        match self {
            SmoothShape::Linear => 1.0,
            SmoothShape::Cubic => 6.0 * t * (1.0 - t),
        }
    }
}

impl FromStr for SmoothShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(SmoothShape::Linear),
            "cubic" => Ok(SmoothShape::Cubic),
            _ => Err(Error::InvalidArgument(format!(
                "shape must be linear or cubic (got {s:?})"
            ))),
        }
    }
}

/// Duct section, either piecewise constant or a smooth monotone ramp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum SectionProfile {
    /// `a = sections[0]` left of `breaks[0]`, `sections[j]` on `[breaks[j-1], breaks[j])`,
    /// `sections[n]` right of the last break.
    Pieces {
        breaks: Vec<f64>,
        sections: Vec<f64>,
    },
    Smooth {
        a_minus: f64,
        a_plus: f64,
        half_width: f64,
        shape: SmoothShape,
    },
}

impl SectionProfile {
    pub fn pieces(breaks: Vec<f64>, sections: Vec<f64>) -> Result<Self> {
        if sections.len() != breaks.len() + 1 {
            return Err(Error::Profile(format!(
                "{} breaks need {} sections, got {}",
                breaks.len(),
                breaks.len() + 1,
                sections.len()
            )));
        }
        if let Some(a) = sections.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(Error::Profile(format!("section {a} is not positive")));
        }
        if breaks.iter().any(|x| !x.is_finite()) || breaks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Profile(
                "break points must be finite and strictly increasing".into(),
            ));
        }
        Ok(SectionProfile::Pieces { breaks, sections })
    }

    pub fn smooth(a_minus: f64, a_plus: f64, half_width: f64, shape: SmoothShape) -> Result<Self> {
        if !(a_minus.is_finite() && a_minus > 0.0 && a_plus.is_finite() && a_plus > 0.0) {
            return Err(Error::Profile(format!(
                "sections {a_minus}, {a_plus} must be positive"
            )));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::Profile(format!(
                "half width {half_width} must be positive"
            )));
        }
        Ok(SectionProfile::Smooth {
            a_minus,
            a_plus,
            half_width,
            shape,
        })
    }

    /// Total variation of `a`.
    pub fn total_variation(&self) -> f64 {
        match self {
            SectionProfile::Pieces { sections, .. } => {
                sections.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
            }
            SectionProfile::Smooth {
                a_minus, a_plus, ..
            } => (a_plus - a_minus).abs(),
        }
    }

    /// `(a(x), a'(x))`; for piecewise profiles the derivative is reported as zero.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        match self {
            SectionProfile::Pieces { breaks, sections } => {
                let j = breaks.partition_point(|b| *b <= x);
                (sections[j], 0.0)
            }
            SectionProfile::Smooth {
                a_minus,
                a_plus,
                half_width,
                shape,
            } => {
                let t = ((x + half_width) / (2.0 * half_width)).clamp(0.0, 1.0);
                let da = a_plus - a_minus;
                (
                    a_minus + da * shape.value(t),
                    da * shape.slope(t) / (2.0 * half_width),
                )
            }
        }
    }
}

fn section_ratio_guard(a_minus: f64, a_plus: f64, opts: &SolverOptions) -> Result<()> {
    if !(a_minus.is_finite() && a_minus > 0.0) {
        return Err(Error::Domain {
            quantity: "a-",
            value: a_minus,
        });
    }
    if !(a_plus.is_finite() && a_plus > 0.0) {
        return Err(Error::Domain {
            quantity: "a+",
            value: a_plus,
        });
    }
    let ratio = (a_plus - a_minus).abs() / a_minus;
    if ratio > opts.max_section_ratio && !opts.allow_large_section_jump {
        return Err(Error::SectionGuard {
            ratio,
            limit: opts.max_section_ratio,
        });
    }
    Ok(())
}

/// Result of integrating the stationary equations across a smooth section.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryPath {
    /// Sample points of the fine run.
    pub x: Vec<f64>,
    pub states: Vec<GasState>,
    /// Richardson-extrapolated state at `x = X`.
    pub end: GasState,
    /// `int_{-X}^{X} p a' dx`, extrapolated.
    pub sigma: f64,
    /// Max-norm of the fine-minus-extrapolated difference, scaled by the start state.
    pub error_estimate: f64,
}

type Aug = nalgebra::Vector4<f64>;

fn stationary_rhs(
    y: &Aug,
    x: f64,
    profile: &SectionProfile,
    law: &GasLaw,
    guard: f64,
) -> Result<Aug> {
    let (a, da) = profile.eval(x);
    let u = GasState::new(y[0], y[1], y[2])?;
    let v = u.velocity();
    let c = u.sound_speed(law);
    // one-sided, so a step that jumps across the sonic point is caught too
    let ratio = (c - v).min(v) / c;
    if ratio < guard {
        return Err(Error::Sonic { x, ratio });
    }
    let f = u.flux(law);
    let p = u.pressure(law);
    let g = Vec3::new(f[0], f[1] - p, f[2]);
    let w = u
        .flux_jacobian(law)
        .lu()
        .solve(&g)
        .ok_or(Error::Sonic { x, ratio: 0.0 })?;
    let k = -da / a;
    Ok(Aug::new(k * w[0], k * w[1], k * w[2], p * da))
}

fn rk4_run(
    u: &GasState,
    profile: &SectionProfile,
    steps: usize,
    law: &GasLaw,
    guard: f64,
    mut record: Option<(&mut Vec<f64>, &mut Vec<GasState>)>,
) -> Result<Aug> {
    let SectionProfile::Smooth { half_width, .. } = *profile else {
        return Err(Error::Profile(
            "the stationary ODE needs a smooth section".into(),
        ));
    };
    let dx = 2.0 * half_width / steps as f64;
    let mut y = Aug::new(u.rho(), u.q(), u.energy(), 0.0);
    if let Some((xs, us)) = record.as_mut() {
        xs.push(-half_width);
        us.push(*u);
    }
    for n in 0..steps {
        let x = -half_width + n as f64 * dx;
        let k1 = stationary_rhs(&y, x, profile, law, guard)?;
        let k2 = stationary_rhs(&(y + k1 * (0.5 * dx)), x + 0.5 * dx, profile, law, guard)?;
        let k3 = stationary_rhs(&(y + k2 * (0.5 * dx)), x + 0.5 * dx, profile, law, guard)?;
        let k4 = stationary_rhs(&(y + k3 * dx), x + dx, profile, law, guard)?;
        y += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dx / 6.0);
        if let Some((xs, us)) = record.as_mut() {
            xs.push(x + dx);
            us.push(GasState::new(y[0], y[1], y[2])?);
        }
    }
    // the guard also applies at the outflow end
    stationary_rhs(&y, half_width, profile, law, guard)?;
    Ok(y)
}

fn extrapolate(
    u: &GasState,
    profile: &SectionProfile,
    law: &GasLaw,
    opts: &SolverOptions,
    record: Option<(&mut Vec<f64>, &mut Vec<GasState>)>,
) -> Result<(GasState, f64, f64)> {
    let steps = opts.ode_steps.max(2) & !1;
    let fine = rk4_run(u, profile, steps, law, opts.sonic_guard, record)?;
    let coarse = rk4_run(u, profile, steps / 2, law, opts.sonic_guard, None)?;
    let best = (fine * 16.0 - coarse) / 15.0;
    let end = GasState::new(best[0], best[1], best[2])?;
    let c = u.sound_speed(law);
    let scale = Aug::new(u.rho(), u.rho() * c, u.rho() * c * c, u.rho() * c * c);
    let err = (fine - best).component_div(&scale).amax();
    Ok((end, best[3], err))
}

/// Integrates `u' = -Df(u)^{-1} (q, q^2/rho, F) a'/a` across a smooth
/// section, together with `Sigma = int p a' dx`.
pub fn integrate_stationary(
    u_start: &GasState,
    profile: &SectionProfile,
    law: &GasLaw,
    opts: &SolverOptions,
) -> Result<StationaryPath> {
    if !u_start.is_subsonic(law) {
        return Err(Error::NonSubsonicTrace {
            side: "left",
            theta: u_start.theta(law),
        });
    }
    let mut xs = Vec::with_capacity(opts.ode_steps + 1);
    let mut us = Vec::with_capacity(opts.ode_steps + 1);
    let (end, sigma, error_estimate) =
        extrapolate(u_start, profile, law, opts, Some((&mut xs, &mut us)))?;
    Ok(StationaryPath {
        x: xs,
        states: us,
        end,
        sigma,
        error_estimate,
    })
}

/// Endpoint and `Sigma` of the stationary ODE between sections `a_minus` and
/// `a_plus`, using the profile shape configured in `opts`.
fn smooth_transport(
    a_minus: f64,
    a_plus: f64,
    u: &GasState,
    law: &GasLaw,
    opts: &SolverOptions,
) -> Result<(GasState, f64)> {
    if a_minus == a_plus {
        return Ok((*u, 0.0));
    }
    let profile =
        SectionProfile::smooth(a_minus, a_plus, opts.smooth_half_width, opts.smooth_shape)?;
    let (end, sigma, _) = extrapolate(u, &profile, law, opts, None)?;
    Ok((end, sigma))
}

/// `Sigma(a-, a+, u-)` for condition (S).
pub fn sigma_integral(
    a_minus: f64,
    a_plus: f64,
    u_minus: &GasState,
    law: &GasLaw,
    opts: &SolverOptions,
) -> Result<f64> {
    Ok(smooth_transport(a_minus, a_plus, u_minus, law, opts)?.1)
}

/// `Psi(a-, u-; a+, u+)`. For (S) the momentum row reads
/// `a+ P(u+) - a- P(u-) - Sigma(a-, a+, u-)`.
pub fn psi_residual(
    kind: CouplingKind,
    a_minus: f64,
    u_minus: &GasState,
    a_plus: f64,
    u_plus: &GasState,
    law: &GasLaw,
    opts: &SolverOptions,
) -> Result<Vec3> {
    let fm = u_minus.flux(law);
    let fp = u_plus.flux(law);
    let second = match kind {
        CouplingKind::Smooth => {
            let sigma = sigma_integral(a_minus, a_plus, u_minus, law, opts)?;
            a_plus * fp[1] - a_minus * fm[1] - sigma
        }
        CouplingKind::Momentum => fp[1] - fm[1],
        CouplingKind::SectionMomentum => a_plus * fp[1] - a_minus * fm[1],
        CouplingKind::Pressure => u_plus.pressure(law) - u_minus.pressure(law),
    };
    Ok(Vec3::new(
        a_plus * fp[0] - a_minus * fm[0],
        second,
        a_plus * fp[2] - a_minus * fm[2],
    ))
}

/// `D_{u+} Psi` in conserved variables. For (S) `Sigma` does not depend on `u+`.
pub fn psi_jacobian_plus(kind: CouplingKind, a_plus: f64, u_plus: &GasState, law: &GasLaw) -> Mat3 {
    let df = u_plus.flux_jacobian(law);
    let mut m = df * a_plus;
    match kind {
        CouplingKind::Smooth | CouplingKind::SectionMomentum => {}
        CouplingKind::Momentum => m.set_row(1, &df.row(1)),
        CouplingKind::Pressure => m.set_row(1, &u_plus.pressure_gradient(law).transpose()),
    }
    m
}

/// Scales that make the rows of `Psi` dimensionless at the reference `u`.
fn psi_scale(kind: CouplingKind, a: f64, u: &GasState, law: &GasLaw) -> Vec3 {
    let c = u.sound_speed(law);
    let rho = u.rho();
    let a2 = match kind {
        CouplingKind::Smooth | CouplingKind::SectionMomentum => a,
        CouplingKind::Momentum | CouplingKind::Pressure => 1.0,
    };
    Vec3::new(a * rho * c, a2 * rho * c * c, a * rho * c * c * c)
}

/// Transmission map: the `u+` with `Psi(a-, u-; a+, u+) = 0`.
pub fn t_map(
    kind: CouplingKind,
    a_minus: f64,
    a_plus: f64,
    u_minus: &GasState,
    law: &GasLaw,
    opts: &SolverOptions,
) -> Result<GasState> {
    section_ratio_guard(a_minus, a_plus, opts)?;
    if a_minus == a_plus {
        return Ok(*u_minus);
    }
    let u_plus = match kind {
        CouplingKind::Smooth => smooth_transport(a_minus, a_plus, u_minus, law, opts)?.0,
        _ => algebraic_transmission(kind, a_minus, a_plus, u_minus, law, opts)?,
    };
    if !u_plus.is_subsonic(law) {
        return Err(Error::NonSubsonicResult {
            theta: u_plus.theta(law),
        });
    }
    Ok(u_plus)
}

fn first_order_guess(kind: CouplingKind, h: f64, u: &GasState, law: &GasLaw) -> Vec3 {
    let rqe = u.rqe();
    let hq = Vec3::new(0.0, -rqe[1], 0.0);
    let shift = crate::asymptotics::expansion_hg(kind, u, law)
        .map(|hg| hg.h)
        .unwrap_or(hq);
    let guess = rqe + shift * h;
    match GasState::from_rqe(guess[0], guess[1], guess[2]) {
        Ok(g) => g.as_vector(),
        Err(_) => u.as_vector(),
    }
}

fn algebraic_transmission(
    kind: CouplingKind,
    a_minus: f64,
    a_plus: f64,
    u_minus: &GasState,
    law: &GasLaw,
    opts: &SolverOptions,
) -> Result<GasState> {
    let scale = psi_scale(kind, a_minus, u_minus, law);
    let f = |x: &Vec3| -> Result<Vec3> {
        let up = GasState::from_vector(x)?;
        Ok(psi_residual(kind, a_minus, u_minus, a_plus, &up, law, opts)?.component_div(&scale))
    };
    let jac = |x: &Vec3| -> Result<Mat3> {
        let up = GasState::from_vector(x)?;
        let mut m = psi_jacobian_plus(kind, a_plus, &up, law);
        for i in 0..3 {
            let mut row = m.row_mut(i);
            row /= scale[i];
        }
        Ok(m)
    };
    let h = (a_plus - a_minus) / a_minus;
    let x0 = first_order_guess(kind, h, u_minus, law);
    let report = newton::solve(f, x0, Jacobian::Analytic(&jac), &opts.newton)?;
    GasState::from_vector(&report.x)
}

/// Determinant criterion at `(a, u; a, u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetReport {
    /// `det[D_{u-}Psi r1, D_{u+}Psi r2, D_{u+}Psi r3]` by central differences.
    pub numeric: f64,
    /// `det D_{u+}Psi` in closed form.
    pub analytic: f64,
    /// The commonly printed closed forms, which equal `-det D_{u+}Psi`.
    pub printed: f64,
    /// `-analytic * det[r1 r2 r3]`, the value `numeric` should reproduce.
    pub cross_check: f64,
}

impl DetReport {
    pub fn relative_gap(&self) -> f64 {
        (self.numeric - self.cross_check).abs() / self.cross_check.abs()
    }
}

fn fd_psi_jacobian<F>(f: F, u: &GasState) -> Result<Mat3>
where
    F: Fn(&GasState) -> Result<Vec3>,
{
    let x = u.as_vector();
    let mut m = Mat3::zeros();
    for k in 0..3 {
        let step = 1e-6 * x.amax();
        let mut xp = x;
        let mut xm = x;
        xp[k] += step;
        xm[k] -= step;
        let col =
            (f(&GasState::from_vector(&xp)?)? - f(&GasState::from_vector(&xm)?)?) / (2.0 * step);
        m.set_column(k, &col);
    }
    Ok(m)
}

pub fn det_criterion(
    kind: CouplingKind,
    a: f64,
    u: &GasState,
    law: &GasLaw,
    opts: &SolverOptions,
) -> Result<DetReport> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::Domain {
            quantity: "a",
            value: a,
        });
    }
    let es = u.eigensystem(law);
    let d_minus = fd_psi_jacobian(|w| psi_residual(kind, a, w, a, u, law, opts), u)?;
    let d_plus = fd_psi_jacobian(|w| psi_residual(kind, a, u, a, w, law, opts), u)?;
    let numeric =
        Mat3::from_columns(&[d_minus * es.r[0], d_plus * es.r[1], d_plus * es.r[2]]).determinant();

    let [l1, l2, l3] = es.lambda;
    let c = u.sound_speed(law);
    let printed = match kind {
        CouplingKind::Smooth | CouplingKind::SectionMomentum => -a.powi(3) * l1 * l2 * l3,
        CouplingKind::Momentum => -a * a * l1 * l2 * l3,
        CouplingKind::Pressure => {
            let pe_over_rho = law.dp_de(u.rho(), u.internal_energy()) / u.rho();
            a * a * l2 * (c * c + l2 * l2 * pe_over_rho)
        }
    };
    let analytic = -printed;
    Ok(DetReport {
        numeric,
        analytic,
        printed,
        cross_check: -analytic * es.eigenvector_determinant(),
    })
}
