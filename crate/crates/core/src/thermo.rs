//! Ideal-gas thermodynamics, flux functions and the eigenstructure of the
//! Euler system in conserved variables `(rho, q, E)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{Mat3, Vec3};

/// Adiabatic exponent used throughout the closed-form asymptotics.
pub const REFERENCE_GAMMA: f64 = 5.0 / 3.0;

/// Perfect gas `p = (gamma - 1) rho e`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasLaw {
    gamma: f64,
}

impl Default for GasLaw {
    fn default() -> Self {
        GasLaw {
            gamma: REFERENCE_GAMMA,
        }
    }
}

impl GasLaw {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 1.0) {
            return Err(Error::Domain {
                quantity: "gamma",
                value: gamma,
            });
        }
        Ok(GasLaw { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// True when `gamma` is 5/3, the only value the closed forms cover.
    pub fn is_reference(&self) -> bool {
        (self.gamma - REFERENCE_GAMMA).abs() <= 1e-12
    }

    pub fn pressure(&self, rho: f64, e: f64) -> f64 {
        (self.gamma - 1.0) * rho * e
    }

    /// `d p / d rho` at fixed `e`.
    pub fn dp_drho(&self, _rho: f64, e: f64) -> f64 {
        (self.gamma - 1.0) * e
    }

    /// `d p / d e` at fixed `rho`.
    pub fn dp_de(&self, rho: f64, _e: f64) -> f64 {
        (self.gamma - 1.0) * rho
    }

    pub fn entropy(&self, rho: f64, e: f64) -> f64 {
        e.ln() - (self.gamma - 1.0) * rho.ln()
    }

    pub fn sound_speed(&self, e: f64) -> f64 {
        (self.gamma * (self.gamma - 1.0) * e).sqrt()
    }

    /// Sound speed from the general relation `c^2 = p_rho + p p_e / rho^2`.
    pub fn sound_speed_general(&self, rho: f64, e: f64) -> f64 {
        let p = self.pressure(rho, e);
        (self.dp_drho(rho, e) + p * self.dp_de(rho, e) / (rho * rho)).sqrt()
    }
}

/// Primitive quantities derived from a [`GasState`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Primitives {
    pub v: f64,
    pub e: f64,
    pub p: f64,
    /// `ln e - (gamma - 1) ln rho`
    pub entropy: f64,
    pub c: f64,
    /// `v^2 / c^2`
    pub theta: f64,
}

/// One fluid state in conserved variables. Construction enforces `rho > 0`,
/// `E > 0` and a positive internal energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GasState {
    rho: f64,
    q: f64,
    #[serde(rename = "E")]
    energy: f64,
}

impl GasState {
    pub fn new(rho: f64, q: f64, energy: f64) -> Result<Self> {
        if !rho.is_finite() || rho <= 0.0 {
            return Err(Error::Domain {
                quantity: "rho",
                value: rho,
            });
        }
        if !q.is_finite() {
            return Err(Error::Domain {
                quantity: "q",
                value: q,
            });
        }
        if !energy.is_finite() || energy <= 0.0 {
            return Err(Error::Domain {
                quantity: "E",
                value: energy,
            });
        }
        let e = energy / rho - 0.5 * q * q / (rho * rho);
        if e <= 0.0 {
            return Err(Error::Domain {
                quantity: "e",
                value: e,
            });
        }
        Ok(GasState { rho, q, energy })
    }

    /// State from density, velocity and internal energy.
    pub fn from_primitive(rho: f64, v: f64, e: f64) -> Result<Self> {
        if !rho.is_finite() || rho <= 0.0 {
            return Err(Error::Domain {
                quantity: "rho",
                value: rho,
            });
        }
        if !e.is_finite() || e <= 0.0 {
            return Err(Error::Domain {
                quantity: "e",
                value: e,
            });
        }
        GasState::new(rho, rho * v, rho * (0.5 * v * v + e))
    }

    pub fn from_vector(u: &Vec3) -> Result<Self> {
        GasState::new(u[0], u[1], u[2])
    }

    /// State from `(rho, q, e)` coordinates.
    pub fn from_rqe(rho: f64, q: f64, e: f64) -> Result<Self> {
        GasState::from_primitive(rho, q / rho, e)
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn velocity(&self) -> f64 {
        self.q / self.rho
    }

    pub fn internal_energy(&self) -> f64 {
        self.energy / self.rho - 0.5 * self.q * self.q / (self.rho * self.rho)
    }

    pub fn as_vector(&self) -> Vec3 {
        Vec3::new(self.rho, self.q, self.energy)
    }

    /// `(rho, q, e)` coordinates.
    pub fn rqe(&self) -> Vec3 {
        Vec3::new(self.rho, self.q, self.internal_energy())
    }

    pub fn pressure(&self, law: &GasLaw) -> f64 {
        law.pressure(self.rho, self.internal_energy())
    }

    pub fn sound_speed(&self, law: &GasLaw) -> f64 {
        law.sound_speed(self.internal_energy())
    }

    pub fn theta(&self, law: &GasLaw) -> f64 {
        let v = self.velocity();
        let c = self.sound_speed(law);
        v * v / (c * c)
    }

    pub fn primitives(&self, law: &GasLaw) -> Primitives {
        let v = self.velocity();
        let e = self.internal_energy();
        let c = law.sound_speed(e);
        Primitives {
            v,
            e,
            p: law.pressure(self.rho, e),
            entropy: law.entropy(self.rho, e),
            c,
            theta: v * v / (c * c),
        }
    }

    /// `lambda_1 < 0 < lambda_2`, i.e. `0 < v < c`.
    pub fn is_subsonic(&self, law: &GasLaw) -> bool {
        let v = self.velocity();
        v > 0.0 && v - self.sound_speed(law) < 0.0
    }

    /// Flux `(q, P, F)` with `P = q^2/rho + p` and `F = q (E + p) / rho`.
    pub fn flux(&self, law: &GasLaw) -> Vec3 {
        let p = self.pressure(law);
        let v = self.velocity();
        Vec3::new(self.q, self.q * v + p, v * (self.energy + p))
    }

    /// Gradient of `p(rho, q, E)` with respect to the conserved variables.
    pub fn pressure_gradient(&self, law: &GasLaw) -> Vec3 {
        let g1 = law.gamma() - 1.0;
        let v = self.velocity();
        Vec3::new(0.5 * g1 * v * v, -g1 * v, g1)
    }

    /// Jacobian of [`GasState::flux`] in conserved variables.
    pub fn flux_jacobian(&self, law: &GasLaw) -> Mat3 {
        let v = self.velocity();
        let p = self.pressure(law);
        let dp = self.pressure_gradient(law);
        let h = (self.energy + p) / self.rho;
        Mat3::new(
            0.0,
            1.0,
            0.0,
            -v * v + dp[0],
            2.0 * v + dp[1],
            dp[2],
            -v * h + v * dp[0],
            h + v * dp[1],
            v * (1.0 + dp[2]),
        )
    }

    /// Characteristic speeds and eigenvectors.
    pub fn eigensystem(&self, law: &GasLaw) -> Eigensystem {
        let Primitives { v, e, p, c, .. } = self.primitives(law);
        let (rho, q, en) = (self.rho, self.q, self.energy);
        let g1 = law.gamma() - 1.0;
        let pe = law.dp_de(rho, e);
        let r = [
            Vec3::new(-rho, rho * c - q, q * c - en - p),
            Vec3::new(rho, q, en + p - rho * rho * c * c / pe),
            Vec3::new(rho, q + rho * c, en + p + q * c),
        ];
        let r_tilde = [
            Vec3::new(-1.0, -v - c, -g1 * e / rho),
            Vec3::new(1.0, v, -e / rho),
            Vec3::new(1.0, v - c, g1 * e / rho),
        ];
        let r_tilde_curve = [
            Vec3::new(-1.0, c - v, -g1 * e / rho),
            Vec3::new(1.0, v, -e / rho),
            Vec3::new(1.0, v + c, g1 * e / rho),
        ];
        Eigensystem {
            lambda: [v - c, v, v + c],
            r,
            r_tilde,
            r_tilde_curve,
        }
    }
}

/// Wave speeds and right eigenvectors at one state.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigensystem {
    pub lambda: [f64; 3],
    /// Right eigenvectors of the flux Jacobian, unnormalised.
    pub r: [Vec3; 3],
    /// Tangent vectors in `(rho, q, e)` as commonly printed. The `q`
    /// entries of families 1 and 3 carry `-v-c` and `v-c`.
    pub r_tilde: [Vec3; 3],
    /// Derivatives of the forward Lax curves at zero strength, in `(rho, q, e)`.
    pub r_tilde_curve: [Vec3; 3],
}

impl Eigensystem {
    /// `det [r1 r2 r3]`
    pub fn eigenvector_determinant(&self) -> f64 {
        Mat3::from_columns(&self.r).determinant()
    }
}
