//! Second-order expansions in `h = da/a` for `gamma = 5/3`: closed forms of
//! `H`, `G`, `f1`, `f2`, `chi` and `theta+` as they are usually printed, and
//! numerical oracles that extract the same coefficients from the solvers.
//!
//! The closed forms are transcribed literally. Several of them disagree with
//! the solvers; [`extract_t_series`] and [`extract_interaction_series`] are the
//! reference values and callers are expected to report both.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::coupling::{t_map, CouplingKind};
use crate::error::{Error, Result};
use crate::junction::{amplify_pair, interact_incoming};
use crate::thermo::{GasLaw, GasState};
use crate::{SolverOptions, Vec3};

/// Default fit grid for the `h`-series.
pub const H_GRID: [f64; 8] = [1e-2, -1e-2, 5e-3, -5e-3, 2.5e-3, -2.5e-3, 1.25e-3, -1.25e-3];

/// Fit grid for [`extract_t_series`], shrunk towards the sonic boundary. A
/// contraction of roughly `(1 - sqrt(theta))^2` chokes the flow, which bounds
/// the radius of convergence of every `h`-series.
pub fn h_grid(theta: f64) -> [f64; 8] {
    scaled_grid(theta, 0.03)
}

/// Fit grid for [`extract_interaction_series`]. Wider than [`h_grid`] because
/// the transmitted strengths carry only about twelve correct digits.
pub fn interaction_h_grid(theta: f64) -> [f64; 8] {
    scaled_grid(theta, 0.1)
}

fn scaled_grid(theta: f64, fraction: f64) -> [f64; 8] {
    let m = (1.0 - theta.clamp(0.0, 1.0).sqrt()).powi(2);
    let scale = (fraction * m / 1e-2).min(1.0);
    H_GRID.map(|h| h * scale)
}

/// Incoming strength used by the interaction oracle, in units of the reference density.
pub const SIGMA_FRACTION: f64 = 1e-4;

/// `T(a, a(1+h); u) = u + H h + G h^2 + o(h^2)` in `(rho, q, e)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpansionHG {
    pub h: Vec3,
    pub g: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InteractionCoefficients {
    pub f1: f64,
    pub f2: f64,
    pub chi: f64,
}

fn check_theta(theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Domain {
            quantity: "theta",
            value: theta,
        });
    }
    Ok(theta)
}

fn check_gamma(law: &GasLaw) -> Result<()> {
    if law.is_reference() {
        Ok(())
    } else {
        Err(Error::UnsupportedGamma(law.gamma()))
    }
}

fn nonzero(den: f64) -> Result<f64> {
    if den.abs() < 1e-300 || !den.is_finite() {
        Err(Error::Domain {
            quantity: "denominator",
            value: den,
        })
    } else {
        Ok(den)
    }
}

/// `(theta - 1)^3`, the stable form of `theta^3 - 3 theta^2 + 3 theta - 1`.
fn cube_m1(t: f64) -> f64 {
    (t - 1.0).powi(3)
}

/// `(2 theta + 3)^3 = 4 (2 theta^3 + 9 theta^2) + 27 (2 theta + 1)`.
fn p_den(t: f64) -> f64 {
    (2.0 * t + 3.0).powi(3)
}

/// Closed-form `H`, `G` at `theta(u)` as `(H_rho/rho, H_e/e, G_rho/rho, G_e/e)`.
pub fn hg_factors(kind: CouplingKind, theta: f64) -> Result<[f64; 4]> {
    let t = check_theta(theta)?;
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    Ok(match kind {
        CouplingKind::Smooth => {
            let d = nonzero(cube_m1(t))?;
            [
                -(t3 - 4.0 * t2 + 5.0 * t - 2.0) / d,
                -2.0 * (-t3 + 2.0 * t2 - t) / (3.0 * d),
                -4.0 * (t3 - 2.0 * t2) / (3.0 * d),
                -(70.0 * t4 - 257.0 * t3 + 342.0 * t2 - 207.0 * t + 36.0) / (18.0 * d),
            ]
        }
        CouplingKind::Momentum => {
            let d = nonzero(cube_m1(t))?;
            [
                8.0 * (-t3 + 2.0 * t2 - t) / (3.0 * d),
                -2.0 * (5.0 * t4 - 7.0 * t3 - t2 + 3.0 * t) / (9.0 * d),
                64.0 * (t3 + 3.0 * t2) / (27.0 * d),
                -(565.0 * t4 - 1599.0 * t3 + 927.0 * t2 - 405.0 * t) / (81.0 * d),
            ]
        }
        CouplingKind::SectionMomentum => {
            let d = nonzero(t - 1.0)?;
            [
                -1.0,
                0.0,
                -4.0 * t / (3.0 * d),
                -(35.0 * t2 - 9.0 * (4.0 * t - 1.0)) / (9.0 * d),
            ]
        }
        CouplingKind::Pressure => {
            let d = p_den(t);
            let hr = -2.0 * (4.0 * t3 + 12.0 * t2 + 9.0 * t) / d;
            [
                hr,
                -hr,
                -4.0 * (t3 + 3.0 * t2) / d,
                12.0 * (t3 + 2.0 * t2) / d,
            ]
        }
    })
}

pub fn expansion_hg(kind: CouplingKind, u: &GasState, law: &GasLaw) -> Result<ExpansionHG> {
    check_gamma(law)?;
    let [hr, he, gr, ge] = hg_factors(kind, u.theta(law))?;
    let (rho, q, e) = (u.rho(), u.q(), u.internal_energy());
    Ok(ExpansionHG {
        h: Vec3::new(hr * rho, -q, he * e),
        g: Vec3::new(gr * rho, q, ge * e),
    })
}

/// `(f1, f2)` at `theta`.
pub fn f_coeffs(kind: CouplingKind, theta: f64) -> Result<(f64, f64)> {
    let t = check_theta(theta)?;
    let s = t.sqrt();
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let t5 = t4 * t;
    Ok(match kind {
        CouplingKind::Smooth => {
            let f1 = -(-3.0 * t + (t - 3.0) * s - 3.0) / nonzero(6.0 * (t - 1.0) * (s - 1.0))?;
            let num = s * (126.0 * t4 - 505.0 * t3 + 758.0 * t2 - 489.0 * t + 270.0) + 42.0 * t4
                - 183.0 * t3
                + 278.0 * t2
                + 33.0 * t
                + 54.0;
            (f1, num / nonzero(72.0 * cube_m1(t) * (s - 1.0))?)
        }
        CouplingKind::Momentum => {
            let f1 = (s * (9.0 * t2 + 2.0 * t - 27.0) + 3.0 * t2 - 42.0 * t - 9.0)
                / nonzero(18.0 * (t - 1.0) * (s - 1.0))?;
            let num = s * (154.0 * t5 + 931.0 * t4 - 4416.0 * t3 + 6570.0 * t2 + 990.0 * t + 891.0)
                + 86.0 * t5
                - 311.0 * t4
                - 752.0 * t3
                + 7038.0 * t2
                + 1026.0 * t
                + 81.0;
            (f1, num / nonzero(324.0 * cube_m1(t) * (s - 1.0))?)
        }
        CouplingKind::SectionMomentum => {
            (0.0, l_numerator(t) / nonzero(36.0 * (t - 1.0) * (s - 1.0))?)
        }
        CouplingKind::Pressure => {
            let d = 2.0 * t + 3.0;
            let f1 = (-2.0 * t2 + 4.0 * t * s + 3.0 * t - 9.0) / (2.0 * d * d);
            let f2 = (32.0 * t4
                + 8.0 * s * (4.0 * t3 + 9.0 * t2 - 9.0 * t)
                + 316.0 * t3
                + 558.0 * t2
                + 216.0 * t
                + 81.0)
                / (6.0 * d.powi(4));
            (f1, f2)
        }
    })
}

fn l_numerator(t: f64) -> f64 {
    t.sqrt() * (63.0 * t * t - 106.0 * t + 27.0) + 21.0 * t * t - 78.0 * t + 9.0
}

/// Amplification coefficient of a `+da / -da` junction pair.
pub fn chi_closed(kind: CouplingKind, theta: f64) -> Result<f64> {
    let t = check_theta(theta)?;
    let s = t.sqrt();
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let t5 = t4 * t;
    Ok(match kind {
        CouplingKind::Smooth => {
            let num = s * (126.0 * t4 - 506.0 * t3 + 773.0 * t2 - 480.0 * t + 279.0) + 42.0 * t4
                - 174.0 * t3
                + 311.0 * t2
                + 96.0 * t
                + 45.0;
            num / nonzero(36.0 * cube_m1(t) * (s - 1.0))?
        }
        CouplingKind::Momentum => {
            let num = s
                * (407.0 * t5 + 1931.0 * t4 - 7858.0 * t3 + 14766.0 * t2 + 1179.0 * t + 1863.0)
                + (-23.0 * t5 + 141.0 * t4 + 2002.0 * t3 + 15714.0 * t2 + 2565.0 * t + 81.0);
            num / nonzero(324.0 * cube_m1(t) * (s - 1.0))?
        }
        // 18 (sqrt(theta) - 1)^2 (sqrt(theta) + 1) > 0
        CouplingKind::SectionMomentum => {
            l_numerator(t) / nonzero(18.0 * (s - 1.0).powi(2) * (s + 1.0))?
        }
        CouplingKind::Pressure => {
            let num = 60.0 * t4 + 96.0 * s * (t3 + t2 - 3.0 * t) + 700.0 * t3 + 1107.0 * t2
                - 54.0 * t
                + 81.0;
            num / (6.0 * (2.0 * t + 3.0).powi(4))
        }
    })
}

pub fn interaction_coefficients(kind: CouplingKind, theta: f64) -> Result<InteractionCoefficients> {
    let (f1, f2) = f_coeffs(kind, theta)?;
    Ok(InteractionCoefficients {
        f1,
        f2,
        chi: chi_closed(kind, theta)?,
    })
}

/// `theta+` after the first junction, to first order in `sigma3m` (in units
/// of the reference density) and second order in `h`.
pub fn theta_plus_closed(kind: CouplingKind, theta: f64, sigma3m: f64, h: f64) -> Result<f64> {
    let t = check_theta(theta)?;
    if h == 0.0 {
        return Ok(t);
    }
    let s = t.sqrt();
    let m = sigma3m;
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let t5 = t4 * t;
    let t6 = t5 * t;
    let h2 = h * h;
    Ok(match kind {
        CouplingKind::Smooth => {
            let n1 = s * ((m + 6.0) * t2 + 18.0 * t - 9.0 * m)
                + 2.0 * (3.0 - 2.0 * m) * t2
                + 6.0 * (2.0 * m + 3.0) * t;
            let d1 = nonzero(9.0 * (t - 1.0) * (s + 1.0))?;
            let n2a = s
                * (14.0 * (11.0 * m - 30.0) * t5
                    + (990.0 - 301.0 * m) * t4
                    + 3.0 * (25.0 * m - 236.0) * t3
                    + (111.0 * m - 18.0) * t2
                    + 45.0 * (12.0 - m) * t
                    - 378.0 * m);
            let n2b = 4.0 * (217.0 * m - 105.0) * t5
                + 2.0 * (495.0 - 1489.0 * m) * t4
                + 4.0 * (928.0 * m - 177.0) * t3
                - 2.0 * (1077.0 * m - 9.0) * t2
                + 24.0 * (26.0 * m + 15.0) * t;
            let d2 = nonzero(108.0 * cube_m1(t) * (s + 1.0))?;
            t - n1 / d1 * h - n2a / d2 * h2 - n2b / d2 * h2
        }
        CouplingKind::Momentum => {
            let n1 = s
                * ((11.0 * m - 30.0) * t3
                    + (-19.0 * m - 108.0) * t2
                    + 9.0 * (5.0 * m - 6.0) * t
                    + 27.0 * m)
                + 2.0 * (31.0 * m - 15.0) * t3
                - 36.0 * (m + 3.0) * t2
                - 18.0 * (5.0 * m + 3.0) * t;
            let d1 = nonzero(27.0 * (t - 1.0) * (s + 1.0))?;
            let n2a = s
                * (2.0 * (233.0 * m - 300.0) * t6
                    + (1279.0 * m - 5310.0) * t5
                    + (5400.0 - 2543.0 * m) * t4
                    + 6.0 * (677.0 * m + 1242.0) * t3
                    + 36.0 * (109.0 - 297.0 * m) * t2
                    + 729.0 * (2.0 - 5.0 * m) * t
                    - 1215.0 * m);
            let n2b = 4.0 * (601.0 * m - 150.0) * t6
                + 2.0 * (3521.0 * m - 2655.0) * t5
                + 8.0 * (225.0 - 3814.0 * m) * t4
                + 36.0 * (655.0 * m + 207.0) * t3
                + 108.0 * (53.0 * m + 36.0) * t2
                + 162.0 * (9.0 * m + 25.0) * t;
            let d2 = nonzero(486.0 * cube_m1(t) * (s + 1.0))?;
            t - n1 / d1 * h - n2a / d2 * h2 - n2b / d2 * h2
        }
        CouplingKind::SectionMomentum => {
            // the stray "2+" of the usual typesetting is read as a factor 2 on the sqrt group
            let n = s
                * ((77.0 * m - 210.0) * t3 + (-13.0 * m - 36.0) * t2 + 27.0 * (m + 2.0) * t
                    - 27.0 * m)
                * 2.0
                + (217.0 * m - 105.0) * t3
                - 4.0 * (147.0 * m + 9.0) * t2
                + 18.0 * (5.0 * m + 3.0) * t;
            t - n / nonzero(54.0 * (t - 1.0) * (s + 1.0))? * h2
        }
        CouplingKind::Pressure => {
            let n1 = -2.0 * (m + 6.0) * t3
                + s * (10.0 * m * t2 + 27.0 * m * t + 27.0 * m)
                + 3.0 * (m - 18.0) * t2
                - 9.0 * (m + 6.0) * t;
            let d1 = 3.0 * (2.0 * t + 3.0).powi(2);
            let n2a = -48.0 * (m + 5.0) * t5
                + s * (144.0 * m * t4
                    + 780.0 * m * t3
                    + 2214.0 * m * t2
                    + 1944.0 * m * t
                    + 1215.0 * m);
            let n2b = -4.0 * (91.0 * m + 342.0) * t4
                - 54.0 * (11.0 * m + 56.0) * t3
                - 216.0 * (2.0 * m + 15.0) * t2
                - 81.0 * (5.0 * m + 18.0) * t;
            let d2 = 48.0 * (2.0 * t4 + 12.0 * t3 + 27.0 * t2 + 27.0 * t + 12.0);
            t + n1 / d1 * h - n2a / d2 * h2 - n2b / d2 * h2
        }
    })
}

/// Subsonic state with `rho = rho_bar`, `e = e_bar` and `v^2/c^2 = theta`.
pub fn reference_state(theta: f64, rho_bar: f64, e_bar: f64, law: &GasLaw) -> Result<GasState> {
    let t = check_theta(theta)?;
    let v = (t * law.gamma() * (law.gamma() - 1.0) * e_bar).sqrt();
    GasState::from_primitive(rho_bar, v, e_bar)
}

/// Least-squares fit of `y(h)` against `h, h^2, h^3, h^4`. Returns the
/// coefficients and the max-norm of the residual.
pub fn fit_power_series(hs: &[f64], ys: &[f64]) -> Result<([f64; 4], f64)> {
    if hs.len() != ys.len() || hs.len() < 5 {
        return Err(Error::InvalidArgument(
            "power-series fit needs at least 5 points".into(),
        ));
    }
    let scale = hs.iter().fold(0.0f64, |m, h| m.max(h.abs()));
    let a = DMatrix::from_fn(hs.len(), 4, |i, j| (hs[i] / scale).powi(j as i32 + 1));
    let b = DVector::from_column_slice(ys);
    let svd = a.clone().svd(true, true);
    let x = svd
        .solve(&b, 1e-14)
        .map_err(|e| Error::InvalidArgument(format!("power-series fit failed: {e}")))?;
    let resid = (a * &x - b).amax();
    let mut c = [0.0; 4];
    for (j, cj) in c.iter_mut().enumerate() {
        *cj = x[j] / scale.powi(j as i32 + 1);
    }
    Ok((c, resid))
}

/// Numerically fitted `H`, `G` in `(rho, q, e)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TSeries {
    pub h: Vec3,
    pub g: Vec3,
    /// Max-norm fit residual per component.
    pub residual: Vec3,
}

pub fn extract_t_series(
    kind: CouplingKind,
    u: &GasState,
    law: &GasLaw,
    opts: &SolverOptions,
    h_grid: &[f64],
) -> Result<TSeries> {
    let base = u.rqe();
    let mut cols: [Vec<f64>; 3] = Default::default();
    for &h in h_grid {
        let w = t_map(kind, 1.0, 1.0 + h, u, law, opts)?.rqe() - base;
        for (i, col) in cols.iter_mut().enumerate() {
            col.push(w[i]);
        }
    }
    let mut out = TSeries {
        h: Vec3::zeros(),
        g: Vec3::zeros(),
        residual: Vec3::zeros(),
    };
    for (i, col) in cols.iter().enumerate() {
        let (c, r) = fit_power_series(h_grid, col)?;
        out.h[i] = c[0];
        out.g[i] = c[1];
        out.residual[i] = r;
    }
    Ok(out)
}

/// Coefficients recovered from the junction solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InteractionSeries {
    pub f1: f64,
    pub f2: f64,
    pub chi: f64,
    /// Linear-in-`h` coefficient of the pair ratio.
    pub pair_linear: f64,
    /// Largest fit residual relative to the fitted data.
    pub fit_residual: f64,
    /// Largest relative change of `(f1, f2, chi)` when the incoming strength is halved.
    pub sigma_drift: f64,
}

fn interaction_fit(
    kind: CouplingKind,
    u: &GasState,
    sigma: f64,
    law: &GasLaw,
    opts: &SolverOptions,
    h_grid: &[f64],
) -> Result<([f64; 4], [f64; 4], f64)> {
    let mut single = Vec::with_capacity(h_grid.len());
    let mut pair = Vec::with_capacity(h_grid.len());
    for &h in h_grid {
        let r = interact_incoming(kind, u, sigma, 1.0, h, law, opts)?;
        single.push(r.sigma[2] / sigma - 1.0);
        pair.push(amplify_pair(kind, u, sigma, 1.0, h, law, opts)?.ratio - 1.0);
    }
    let (c1, r1) = fit_power_series(h_grid, &single)?;
    let (c2, r2) = fit_power_series(h_grid, &pair)?;
    Ok((c1, c2, r1.max(r2)))
}

/// Fits `sigma3+/sigma3- - 1` and the pair ratio minus one on `h_grid` at
/// `sigma3- = 1e-4 rho_bar` and half of it, and extrapolates the first-order
/// `sigma` dependence away.
pub fn extract_interaction_series(
    kind: CouplingKind,
    theta: f64,
    rho_bar: f64,
    e_bar: f64,
    law: &GasLaw,
    opts: &SolverOptions,
    h_grid: &[f64],
) -> Result<InteractionSeries> {
    let u = reference_state(theta, rho_bar, e_bar, law)?;
    let sigma = SIGMA_FRACTION * rho_bar;
    let (a1, a2, ra) = interaction_fit(kind, &u, sigma, law, opts, h_grid)?;
    let (b1, b2, rb) = interaction_fit(kind, &u, 0.5 * sigma, law, opts, h_grid)?;
    let lim = |x: f64, y: f64| 2.0 * y - x;
    let coarse = [a1[0], a1[1], a2[1]];
    let fine = [b1[0], b1[1], b2[1]];
    let size = fine.iter().fold(0.0f64, |m, y| m.max(y.abs())).max(1e-12);
    let drift = coarse
        .iter()
        .zip(&fine)
        .map(|(x, y)| (x - y).abs() / size)
        .fold(0.0, f64::max);
    Ok(InteractionSeries {
        f1: lim(a1[0], b1[0]),
        f2: lim(a1[1], b1[1]),
        chi: lim(a2[1], b2[1]),
        pair_linear: lim(a2[0], b2[0]),
        fit_residual: ra.max(rb),
        sigma_drift: drift,
    })
}
