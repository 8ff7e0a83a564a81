//! Damped Newton iteration for the 3x3 systems that appear in the wave,
//! coupling and junction solvers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{Mat3, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    pub max_iterations: usize,
    /// Convergence threshold on the max-norm of the scaled residual.
    pub tolerance: f64,
    /// Step halvings allowed per iteration before giving up.
    pub max_halvings: usize,
    /// Relative step of the central-difference Jacobian.
    pub fd_step: f64,
    /// Extra full steps taken after convergence while they still reduce the residual.
    pub polish: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            max_iterations: 60,
            tolerance: 1e-11,
            max_halvings: 30,
            fd_step: 1e-7,
            polish: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonReport {
    pub x: Vec3,
    pub residual: f64,
    pub iterations: usize,
}

/// Jacobian source for [`solve`].
pub enum Jacobian<'a> {
    /// Central differences with per-unknown scales.
    FiniteDifference { scale: Vec3 },
    /// Exact Jacobian supplied by the caller.
    Analytic(&'a dyn Fn(&Vec3) -> Result<Mat3>),
}

/// Solves `f(x) = 0` starting from `x0`. `f` must already return a scaled
/// residual. A failed evaluation or a non-decreasing residual halves the step.
pub fn solve<F>(
    f: F,
    x0: Vec3,
    jacobian: Jacobian<'_>,
    opts: &NewtonOptions,
) -> Result<NewtonReport>
where
    F: Fn(&Vec3) -> Result<Vec3>,
{
    let mut x = x0;
    let mut fx = f(&x)?;
    let mut norm = fx.amax();
    let jac_at = |x: &Vec3| match &jacobian {
        Jacobian::Analytic(j) => j(x),
        Jacobian::FiniteDifference { scale } => fd_jacobian(&f, x, scale, opts.fd_step),
    };
    for it in 0..opts.max_iterations {
        if norm <= opts.tolerance {
            let (x, norm) = polish(&f, &jac_at, x, norm, opts.polish);
            return Ok(NewtonReport {
                x,
                residual: norm,
                iterations: it,
            });
        }
        let jac = jac_at(&x)?;
        let step = jac.lu().solve(&(-fx)).ok_or(Error::NoConvergence {
            iterations: it,
            residual: norm,
        })?;

        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial = x + step * lambda;
            if let Ok(ft) = f(&trial) {
                let n = ft.amax();
                if n.is_finite() && (n < norm || n <= opts.tolerance) {
                    accepted = Some((trial, ft, n));
                    break;
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((xt, ft, n)) => {
                x = xt;
                fx = ft;
                norm = n;
            }
            // stalled at round-off level
            None => break,
        }
    }
    if norm <= opts.tolerance {
        Ok(NewtonReport {
            x,
            residual: norm,
            iterations: opts.max_iterations,
        })
    } else {
        Err(Error::NoConvergence {
            iterations: opts.max_iterations,
            residual: norm,
        })
    }
}

fn polish<F, J>(f: &F, jac: &J, mut x: Vec3, mut norm: f64, steps: usize) -> (Vec3, f64)
where
    F: Fn(&Vec3) -> Result<Vec3>,
    J: Fn(&Vec3) -> Result<Mat3>,
{
    for _ in 0..steps {
        if norm == 0.0 {
            break;
        }
        let Ok(fx) = f(&x) else { break };
        let Some(step) = jac(&x).ok().and_then(|m| m.lu().solve(&(-fx))) else {
            break;
        };
        match f(&(x + step)) {
            Ok(ft) if ft.amax() < norm => {
                x += step;
                norm = ft.amax();
            }
            _ => break,
        }
    }
    (x, norm)
}

pub(crate) fn fd_jacobian<F>(f: &F, x: &Vec3, scale: &Vec3, rel: f64) -> Result<Mat3>
where
    F: Fn(&Vec3) -> Result<Vec3>,
{
    let mut jac = Mat3::zeros();
    for k in 0..3 {
        let h = rel * x[k].abs().max(scale[k]);
        let mut xp = *x;
        let mut xm = *x;
        xp[k] += h;
        xm[k] -= h;
        let col = match (f(&xp), f(&xm)) {
            (Ok(fp), Ok(fm)) => (fp - fm) / (2.0 * h),
            // one-sided near the edge of a curve's domain
            (Ok(fp), Err(_)) => (fp - f(x)?) / h,
            (Err(_), Ok(fm)) => (f(x)? - fm) / h,
            (Err(e), Err(_)) => return Err(e),
        };
        jac.set_column(k, &col);
    }
    Ok(jac)
}
