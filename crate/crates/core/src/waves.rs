//! Forward and reversed Lax curves of the three wave families and the exact
//! Riemann solver built on them.
//!
//! Strengths are density offsets. The forward 1-curve moves `rho` by `-sigma`
//! and the forward 2- and 3-curves by `+sigma`; reversed curves flip the
//! offset, so `L_i^-(L_i(u, s), s) = u`. Families 1 and 3 take the shock
//! branch for `sigma < 0` and the rarefaction branch for `sigma >= 0`.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::newton::{self, Jacobian, NewtonOptions};
use crate::thermo::{GasLaw, GasState};
use crate::{Mat3, Vec3};

/// Density and internal-energy floor below which a state counts as vacuum.
pub const VACUUM_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum WaveFamily {
    One,
    Two,
    Three,
}

impl WaveFamily {
    pub const ALL: [WaveFamily; 3] = [WaveFamily::One, WaveFamily::Two, WaveFamily::Three];

    pub fn index(self) -> u8 {
        match self {
            WaveFamily::One => 1,
            WaveFamily::Two => 2,
            WaveFamily::Three => 3,
        }
    }
}

impl TryFrom<u8> for WaveFamily {
    type Error = Error;

    fn try_from(i: u8) -> Result<Self> {
        match i {
            1 => Ok(WaveFamily::One),
            2 => Ok(WaveFamily::Two),
            3 => Ok(WaveFamily::Three),
            _ => Err(Error::InvalidArgument(format!("wave family {i}"))),
        }
    }
}

impl fmt::Display for WaveFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CurveDirection {
    Forward,
    Reversed,
}

/// `d rho / d sigma` along the curve.
fn density_orientation(family: WaveFamily, dir: CurveDirection) -> f64 {
    match (family, dir) {
        (WaveFamily::One, CurveDirection::Forward)
        | (WaveFamily::Three, CurveDirection::Reversed) => -1.0,
        (WaveFamily::Two, CurveDirection::Reversed) => -1.0,
        _ => 1.0,
    }
}

fn vacuum_check(rho: f64, e: f64) -> Result<()> {
    if rho.is_nan() || rho <= VACUUM_FLOOR {
        return Err(Error::Vacuum {
            quantity: "rho",
            value: rho,
        });
    }
    if e.is_nan() || e <= VACUUM_FLOOR {
        return Err(Error::Vacuum {
            quantity: "e",
            value: e,
        });
    }
    Ok(())
}

/// State at parameter `sigma` on the selected Lax curve through `u0`.
pub fn lax_curve(
    family: WaveFamily,
    dir: CurveDirection,
    u0: &GasState,
    sigma: f64,
    law: &GasLaw,
) -> Result<GasState> {
    if sigma == 0.0 {
        return Ok(*u0);
    }
    let w0 = u0.primitives(law);
    let rho0 = u0.rho();
    let rho = rho0 + density_orientation(family, dir) * sigma;
    if rho.is_nan() || rho <= VACUUM_FLOOR {
        return Err(Error::Vacuum {
            quantity: "rho",
            value: rho,
        });
    }

    let (v, e) = match family {
        WaveFamily::Two => (w0.v, rho0 * w0.e / rho),
        WaveFamily::One | WaveFamily::Three if sigma < 0.0 => {
            // Rankine-Hugoniot: e = e0 - (p + p0)(1/rho - 1/rho0)/2 solved for e
            let g1 = law.gamma() - 1.0;
            let d = 1.0 / rho - 1.0 / rho0;
            let denom = 1.0 + 0.5 * g1 * rho * d;
            if denom <= 0.0 {
                return Err(Error::NotApplicable(format!(
                    "compression ratio rho/rho0 = {} beyond the shock limit",
                    rho / rho0
                )));
            }
            let e = (w0.e - 0.5 * w0.p * d) / denom;
            vacuum_check(rho, e)?;
            let jump = -(law.pressure(rho, e) - w0.p) * d;
            if jump < 0.0 {
                return Err(Error::NotApplicable(format!(
                    "negative Hugoniot velocity jump {jump:e}"
                )));
            }
            let sign = match dir {
                CurveDirection::Forward => -1.0,
                CurveDirection::Reversed => 1.0,
            };
            (w0.v + sign * jump.sqrt(), e)
        }
        WaveFamily::One | WaveFamily::Three => {
            // isentrope; the integral of dp/(rho c) is 2/(gamma-1) (c - c0)
            let g1 = law.gamma() - 1.0;
            let e = w0.e * (rho / rho0).powf(g1);
            vacuum_check(rho, e)?;
            let dv = 2.0 / g1 * (law.sound_speed(e) - w0.c);
            let sign = if family == WaveFamily::One { -1.0 } else { 1.0 };
            (w0.v + sign * dv, e)
        }
    };
    vacuum_check(rho, e)?;
    GasState::from_primitive(rho, v, e)
}

/// Tangent column as printed per unit density increase:
/// `(1, lambda_i, (E + p)/rho + {-v c, -rho c^2 / p_e, +v c})`.
pub fn printed_tangent_column(family: WaveFamily, u0: &GasState, law: &GasLaw) -> Vec3 {
    let w = u0.primitives(law);
    let es = u0.eigensystem(law);
    let h = (u0.energy() + w.p) / u0.rho();
    match family {
        WaveFamily::One => Vec3::new(1.0, es.lambda[0], h - w.v * w.c),
        WaveFamily::Two => Vec3::new(
            1.0,
            es.lambda[1],
            h - u0.rho() * w.c * w.c / law.dp_de(u0.rho(), w.e),
        ),
        WaveFamily::Three => Vec3::new(1.0, es.lambda[2], h + w.v * w.c),
    }
}

/// `d L / d sigma` at `sigma = 0` in conserved variables.
///
/// This is the printed column times the curve's density orientation, so the
/// forward 1-curve (which lowers `rho` for `sigma > 0`) carries a minus sign;
/// reversed curves are the negation of forward ones.
pub fn lax_tangent_at_zero(
    family: WaveFamily,
    dir: CurveDirection,
    u0: &GasState,
    law: &GasLaw,
) -> Vec3 {
    printed_tangent_column(family, u0, law) * density_orientation(family, dir)
}

/// Range of propagation speeds of a single wave joining `behind` (left) to
/// `ahead` (right): the shock speed twice for shocks, the head and tail
/// characteristic speeds for rarefactions.
pub fn wave_speed_range(
    family: WaveFamily,
    behind: &GasState,
    ahead: &GasState,
    law: &GasLaw,
) -> (f64, f64) {
    let i = (family.index() - 1) as usize;
    let lam_l = behind.eigensystem(law).lambda[i];
    let lam_r = ahead.eigensystem(law).lambda[i];
    if family == WaveFamily::Two {
        return (lam_l, lam_r);
    }
    let drho = ahead.rho() - behind.rho();
    let is_shock = match family {
        WaveFamily::One => drho > 0.0,
        _ => drho < 0.0,
    };
    if is_shock && drho.abs() > 1e-13 * behind.rho() {
        let s = (ahead.q() - behind.q()) / drho;
        (s, s)
    } else {
        (lam_l.min(lam_r), lam_l.max(lam_r))
    }
}

/// Solution of a Riemann problem as three waves and the states between them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaveFan {
    pub sigma: [f64; 3],
    pub u_left: GasState,
    pub u_star_left: GasState,
    pub u_star_right: GasState,
    pub u_right: GasState,
    /// Max-norm of the scaled residual at the returned strengths.
    pub residual: f64,
    pub iterations: usize,
}

/// Residual scales `(rho, rho (c + |v|), rho (c^2 + v^2))` for comparing conserved vectors.
pub fn conserved_scale(u: &GasState, law: &GasLaw) -> Vec3 {
    let c = u.sound_speed(law);
    let v = u.velocity().abs();
    let rho = u.rho();
    Vec3::new(rho, rho * (c + v), rho * (c * c + v * v))
}

/// Applies the 1-, 2- and 3-curves in sequence and returns all four states.
pub fn compose_fan(u_left: &GasState, sigma: &Vec3, law: &GasLaw) -> Result<[GasState; 4]> {
    let s1 = lax_curve(
        WaveFamily::One,
        CurveDirection::Forward,
        u_left,
        sigma[0],
        law,
    )?;
    let s2 = lax_curve(WaveFamily::Two, CurveDirection::Forward, &s1, sigma[1], law)?;
    let s3 = lax_curve(
        WaveFamily::Three,
        CurveDirection::Forward,
        &s2,
        sigma[2],
        law,
    )?;
    Ok([*u_left, s1, s2, s3])
}

/// Exact Riemann solver: finds `sigma` with `L3(L2(L1(uL; s1); s2); s3) = uR`.
pub fn solve_riemann(
    u_left: &GasState,
    u_right: &GasState,
    law: &GasLaw,
    opts: &NewtonOptions,
) -> Result<WaveFan> {
    let scale = conserved_scale(u_right, law);
    let target = u_right.as_vector();
    let residual = |s: &Vec3| -> Result<Vec3> {
        let states = compose_fan(u_left, s, law)?;
        Ok((states[3].as_vector() - target).component_div(&scale))
    };
    let tangents = Mat3::from_columns(&[
        lax_tangent_at_zero(WaveFamily::One, CurveDirection::Forward, u_left, law),
        lax_tangent_at_zero(WaveFamily::Two, CurveDirection::Forward, u_left, law),
        lax_tangent_at_zero(WaveFamily::Three, CurveDirection::Forward, u_left, law),
    ]);
    let fd_scale = Vec3::repeat(u_left.rho().max(u_right.rho()));
    let jac = |s: &Vec3| -> Result<Mat3> {
        if s.iter().all(|x| *x == 0.0) {
            let mut m = tangents;
            for k in 0..3 {
                for i in 0..3 {
                    m[(i, k)] /= scale[i];
                }
            }
            Ok(m)
        } else {
            newton::fd_jacobian(&residual, s, &fd_scale, opts.fd_step)
        }
    };
    let report = newton::solve(residual, Vec3::zeros(), Jacobian::Analytic(&jac), opts)?;
    let states = compose_fan(u_left, &report.x, law)?;
    Ok(WaveFan {
        sigma: [report.x[0], report.x[1], report.x[2]],
        u_left: states[0],
        u_star_left: states[1],
        u_star_right: states[2],
        u_right: states[3],
        residual: report.residual,
        iterations: report.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn law() -> GasLaw {
        GasLaw::default()
    }

    fn subsonic(rho: f64, e: f64, frac: f64) -> GasState {
        let v = frac * GasLaw::default().sound_speed(e);
        GasState::from_primitive(rho, v, e).unwrap()
    }

    #[test]
    fn zero_strength_is_identity() {
        let u = subsonic(1.2, 0.8, 0.4);
        for f in WaveFamily::ALL {
            for d in [CurveDirection::Forward, CurveDirection::Reversed] {
                assert_eq!(lax_curve(f, d, &u, 0.0, &law()).unwrap(), u);
            }
        }
    }

    #[test]
    fn contact_doubles_density_at_constant_pressure() {
        let u = GasState::from_primitive(1.0, 1.0, 1.0).unwrap();
        let w = lax_curve(WaveFamily::Two, CurveDirection::Forward, &u, 1.0, &law()).unwrap();
        assert_relative_eq!(w.rho(), 2.0);
        assert_relative_eq!(w.velocity(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(w.internal_energy(), 0.5, max_relative = 1e-15);
        assert_relative_eq!(w.pressure(&law()), u.pressure(&law()), max_relative = 1e-15);
    }

    #[test]
    fn three_shock_monotonicity() {
        let law = law();
        let u = subsonic(1.0, 1.0, 0.5);
        let w0 = u.primitives(&law);
        for s in [-0.01, -0.1, -0.4] {
            let w = lax_curve(WaveFamily::Three, CurveDirection::Forward, &u, s, &law)
                .unwrap()
                .primitives(&law);
            assert!(w.entropy <= w0.entropy && w.v <= w0.v, "sigma {s}");
        }
    }

    #[test]
    fn shock_branch_monotonicity_tables() {
        // (family, direction): signs of rho - rho0, v - v0, S - S0 for sigma < 0
        let cases = [
            (WaveFamily::One, CurveDirection::Forward, [1.0, -1.0, 1.0]),
            (
                WaveFamily::Three,
                CurveDirection::Forward,
                [-1.0, -1.0, -1.0],
            ),
            (WaveFamily::One, CurveDirection::Reversed, [-1.0, 1.0, -1.0]),
            (WaveFamily::Three, CurveDirection::Reversed, [1.0, 1.0, 1.0]),
        ];
        let law = law();
        let u = subsonic(1.0, 1.0, 0.3);
        let w0 = u.primitives(&law);
        for (f, d, signs) in cases {
            let w = lax_curve(f, d, &u, -0.2, &law).unwrap();
            let wp = w.primitives(&law);
            let diffs = [w.rho() - u.rho(), wp.v - w0.v, wp.entropy - w0.entropy];
            for (diff, s) in diffs.iter().zip(signs) {
                assert!(diff * s > 0.0, "{f:?} {d:?}: {diffs:?}");
            }
        }
    }

    #[test]
    fn rarefaction_branch_monotonicity_tables() {
        // signs of rho - rho0, v - v0, e - e0 for sigma > 0
        let cases = [
            (WaveFamily::One, CurveDirection::Forward, [-1.0, 1.0, -1.0]),
            (WaveFamily::Three, CurveDirection::Forward, [1.0, 1.0, 1.0]),
            (WaveFamily::One, CurveDirection::Reversed, [1.0, -1.0, 1.0]),
            (
                WaveFamily::Three,
                CurveDirection::Reversed,
                [-1.0, -1.0, -1.0],
            ),
        ];
        let law = law();
        let u = subsonic(1.0, 1.0, 0.3);
        for (f, d, signs) in cases {
            let w = lax_curve(f, d, &u, 0.2, &law).unwrap();
            let diffs = [
                w.rho() - u.rho(),
                w.velocity() - u.velocity(),
                w.internal_energy() - u.internal_energy(),
            ];
            for (diff, s) in diffs.iter().zip(signs) {
                assert!(diff * s > 0.0, "{f:?} {d:?}: {diffs:?}");
            }
            let ds = w.primitives(&law).entropy - u.primitives(&law).entropy;
            assert!(ds.abs() < 1e-14);
        }
    }

    #[test]
    fn branches_meet_to_second_order_at_zero() {
        let law = law();
        let u = subsonic(1.0, 1.0, 0.6);
        for f in [WaveFamily::One, WaveFamily::Three] {
            for eps in [1e-3, 1e-4] {
                let a = lax_curve(f, CurveDirection::Forward, &u, eps, &law)
                    .unwrap()
                    .as_vector();
                let b = lax_curve(f, CurveDirection::Forward, &u, -eps, &law)
                    .unwrap()
                    .as_vector();
                let t = lax_tangent_at_zero(f, CurveDirection::Forward, &u, &law);
                // symmetric difference removes the second-order term only if both branches share it
                let err = ((a - b) / (2.0 * eps) - t).amax();
                assert!(err < 10.0 * eps * eps, "{f:?} eps {eps}: {err:e}");
            }
        }
    }

    #[test]
    fn vacuum_and_shock_limits() {
        let law = law();
        let u = subsonic(1.0, 1.0, 0.3);
        assert!(matches!(
            lax_curve(WaveFamily::One, CurveDirection::Forward, &u, 1.0, &law),
            Err(Error::Vacuum { .. })
        ));
        // 1-shock compression beyond (gamma+1)/(gamma-1) = 4
        assert!(matches!(
            lax_curve(WaveFamily::One, CurveDirection::Forward, &u, -3.5, &law),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn tangent_matches_finite_difference() {
        let law = law();
        let u = GasState::new(1.0, 1.0, 4.1).unwrap();
        let t2 = lax_tangent_at_zero(WaveFamily::Two, CurveDirection::Forward, &u, &law);
        assert_relative_eq!(t2[1], 1.0, max_relative = 1e-14);
        let h = 1e-5;
        for f in WaveFamily::ALL {
            for d in [CurveDirection::Forward, CurveDirection::Reversed] {
                let p = lax_curve(f, d, &u, h, &law).unwrap().as_vector();
                let m = lax_curve(f, d, &u, -h, &law).unwrap().as_vector();
                let fd = (p - m) / (2.0 * h);
                let t = lax_tangent_at_zero(f, d, &u, &law);
                assert!((fd - t).norm() <= 1e-6 * t.norm(), "{f:?} {d:?}");
            }
        }
    }

    #[test]
    fn tangents_in_rqe_variables() {
        let law = law();
        let u = subsonic(0.9, 1.3, 0.45);
        let es = u.eigensystem(&law);
        let h = 1e-6;
        for (i, f) in WaveFamily::ALL.into_iter().enumerate() {
            let p = lax_curve(f, CurveDirection::Forward, &u, h, &law)
                .unwrap()
                .rqe();
            let m = lax_curve(f, CurveDirection::Forward, &u, -h, &law)
                .unwrap()
                .rqe();
            let fd = (p - m) / (2.0 * h);
            assert_relative_eq!(fd, es.r_tilde_curve[i], epsilon = 1e-8);
        }
        // the printed columns agree with the curves except for the q entry of families 1 and 3
        assert_relative_eq!(es.r_tilde[1], es.r_tilde_curve[1]);
        assert!((es.r_tilde[0][1] - es.r_tilde_curve[0][1]).abs() > 0.1);
        assert!((es.r_tilde[2][1] - es.r_tilde_curve[2][1]).abs() > 0.1);
    }

    #[test]
    fn constant_data_gives_zero_fan() {
        let u = subsonic(1.0, 1.0, 0.4);
        let fan = solve_riemann(&u, &u, &law(), &NewtonOptions::default()).unwrap();
        assert_eq!(fan.sigma, [0.0, 0.0, 0.0]);
        assert_eq!(fan.u_star_left, u);
        assert_eq!(fan.u_star_right, u);
    }

    #[test]
    fn pure_contact_fan() {
        let ul = GasState::from_primitive(1.0, 1.0, 1.0).unwrap();
        let ur = GasState::from_primitive(2.0, 1.0, 0.5).unwrap();
        let fan = solve_riemann(&ul, &ur, &law(), &NewtonOptions::default()).unwrap();
        assert!(fan.sigma[0].abs() < 1e-12);
        assert_relative_eq!(fan.sigma[1], 1.0, epsilon = 1e-12);
        assert!(fan.sigma[2].abs() < 1e-12);
        assert!(fan.residual <= 1e-11);
    }

    #[test]
    fn strong_shock_tube_converges() {
        let ul = GasState::from_primitive(1.0, 0.0, 2.5).unwrap();
        let ur = GasState::from_primitive(0.125, 0.0, 2.0).unwrap();
        let fan = solve_riemann(&ul, &ur, &law(), &NewtonOptions::default()).unwrap();
        assert!(fan.residual <= 1e-11);
        // Sod: rarefaction, contact, shock
        assert!(fan.sigma[0] > 0.0 && fan.sigma[2] < 0.0);
        assert_relative_eq!(
            fan.u_star_left.pressure(&law()),
            fan.u_star_right.pressure(&law()),
            max_relative = 1e-10
        );
    }

    proptest! {
        #[test]
        fn forward_then_reversed_is_identity(
            rho in 0.2f64..5.0, e in 0.2f64..5.0, frac in 0.05f64..0.95,
            s in -0.3f64..0.3, fam in 1u8..=3,
        ) {
            let law = law();
            let u = subsonic(rho, e, frac);
            let f = WaveFamily::try_from(fam).unwrap();
            let sigma = s * rho;
            let w = lax_curve(f, CurveDirection::Forward, &u, sigma, &law).unwrap();
            let back = lax_curve(f, CurveDirection::Reversed, &w, sigma, &law).unwrap();
            let scale = conserved_scale(&u, &law);
            let err = (back.as_vector() - u.as_vector()).component_div(&scale).amax();
            prop_assert!(err <= 1e-10, "err {err:e}");
        }

        #[test]
        fn contact_keeps_velocity_and_pressure(rho in 0.2f64..5.0, e in 0.2f64..5.0, s in -0.15f64..3.0) {
            let law = law();
            let u = subsonic(rho, e, 0.5);
            let w = lax_curve(WaveFamily::Two, CurveDirection::Forward, &u, s * rho, &law).unwrap();
            prop_assert!((w.velocity() - u.velocity()).abs() <= 1e-15 * u.velocity().abs().max(1.0) * 4.0);
            prop_assert!((w.pressure(&law) - u.pressure(&law)).abs() <= 1e-14 * u.pressure(&law));
        }

        #[test]
        fn riemann_fan_reproduces_right_state(
            rho in 0.5f64..2.0, e in 0.5f64..2.0, frac in 0.1f64..0.9,
            d in proptest::array::uniform3(-0.2f64..0.2),
        ) {
            let law = law();
            let ul = subsonic(rho, e, frac);
            let ur = GasState::from_primitive(rho * (1.0 + d[0]), ul.velocity() + d[1], e * (1.0 + d[2])).unwrap();
            let fan = solve_riemann(&ul, &ur, &law, &NewtonOptions::default()).unwrap();
            let again = compose_fan(&ul, &Vec3::from(fan.sigma), &law).unwrap();
            let err = (again[3].as_vector() - ur.as_vector()).component_div(&conserved_scale(&ur, &law)).amax();
            prop_assert!(err <= 1e-11);
        }
    }
}
