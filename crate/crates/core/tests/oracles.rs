//! Independent oracles: a bisection-on-pressure exact Riemann solver,
//! quadrature of the rarefaction integral, the Rankine-Hugoniot relations and
//! scalar solutions of the four transmission conditions.

use ej_core::asymptotics::{extract_interaction_series, interaction_h_grid, reference_state};
use ej_core::coupling::t_map;
use ej_core::waves::{conserved_scale, lax_curve, solve_riemann};
use ej_core::{
    CouplingKind, CurveDirection, GasLaw, GasState, NewtonOptions, SolverOptions, WaveFamily,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const GAMMA: f64 = 5.0 / 3.0;

fn state(rho: f64, v: f64, p: f64) -> GasState {
    GasState::from_primitive(rho, v, p / ((GAMMA - 1.0) * rho)).unwrap()
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Pressure function of one side and the star density it implies.
fn side(p: f64, rho: f64, pk: f64) -> (f64, f64) {
    let c = (GAMMA * pk / rho).sqrt();
    if p > pk {
        let a = 2.0 / ((GAMMA + 1.0) * rho);
        let b = (GAMMA - 1.0) / (GAMMA + 1.0) * pk;
        let g6 = (GAMMA - 1.0) / (GAMMA + 1.0);
        let r = p / pk;
        (
            (p - pk) * (a / (p + b)).sqrt(),
            rho * (r + g6) / (g6 * r + 1.0),
        )
    } else {
        let f = 2.0 * c / (GAMMA - 1.0) * ((p / pk).powf((GAMMA - 1.0) / (2.0 * GAMMA)) - 1.0);
        (f, rho * (p / pk).powf(1.0 / GAMMA))
    }
}

/// Star states `(rho*L, rho*R, v*, p*)` of the exact Riemann problem.
fn exact_riemann(l: (f64, f64, f64), r: (f64, f64, f64)) -> (f64, f64, f64, f64) {
    let f = |p: f64| side(p, l.0, l.2).0 + side(p, r.0, r.2).0 + (r.1 - l.1);
    let p = bisect(1e-12, 1e3, f);
    let (fl, rl) = side(p, l.0, l.2);
    let (fr, rr) = side(p, r.0, r.2);
    (rl, rr, 0.5 * (l.1 + r.1) + 0.5 * (fr - fl), p)
}

#[test]
fn riemann_fan_matches_bisection_on_pressure() {
    let law = GasLaw::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let l = (
            rng.gen_range(0.5..2.0),
            rng.gen_range(-0.3..0.3),
            rng.gen_range(0.5..2.0),
        );
        let r = (
            rng.gen_range(0.5..2.0),
            rng.gen_range(-0.3..0.3),
            rng.gen_range(0.5..2.0),
        );
        let fan = solve_riemann(
            &state(l.0, l.1, l.2),
            &state(r.0, r.1, r.2),
            &law,
            &NewtonOptions::default(),
        )
        .unwrap();
        let (rl, rr, v, p) = exact_riemann(l, r);
        let sl = fan.u_star_left.primitives(&law);
        let sr = fan.u_star_right.primitives(&law);
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
        for (got, want) in [
            (fan.u_star_left.rho(), rl),
            (fan.u_star_right.rho(), rr),
            (sl.v, v),
            (sr.v, v),
            (sl.p, p),
            (sr.p, p),
        ] {
            assert!(
                rel(got, want) < 1e-8,
                "got {got}, oracle {want}, data {l:?} {r:?}"
            );
        }
    }
}

#[test]
fn rarefaction_velocity_is_the_integral_of_c_over_rho() {
    let law = GasLaw::default();
    let u0 = state(1.3, 0.2, 0.9);
    let w0 = u0.primitives(&law);
    for (family, sigma) in [
        (WaveFamily::One, 0.4),
        (WaveFamily::Three, 0.4),
        (WaveFamily::One, 0.05),
    ] {
        let w = lax_curve(family, CurveDirection::Forward, &u0, sigma, &law).unwrap();
        // composite Simpson of c(rho)/rho along the isentrope p = p0 (rho/rho0)^gamma
        let (a, b) = (u0.rho(), w.rho());
        let n = 2000;
        let c_over_rho = |rho: f64| (GAMMA * w0.p * (rho / a).powf(GAMMA) / rho).sqrt() / rho;
        let hq = (b - a) / n as f64;
        let mut s = c_over_rho(a) + c_over_rho(b);
        for i in 1..n {
            s += c_over_rho(a + i as f64 * hq) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        let integral = s * hq / 3.0;
        let sign = if family == WaveFamily::One { -1.0 } else { 1.0 };
        let wv = w.primitives(&law);
        assert!((wv.v - (w0.v + sign * integral)).abs() < 1e-12);
        assert!((wv.entropy - w0.entropy).abs() < 1e-13);
    }
}

#[test]
fn shock_branch_satisfies_rankine_hugoniot_and_lax() {
    let law = GasLaw::default();
    let u0 = state(0.8, -0.1, 1.2);
    for family in [WaveFamily::One, WaveFamily::Three] {
        for sigma in [-0.01, -0.2, -0.45] {
            let w = lax_curve(family, CurveDirection::Forward, &u0, sigma, &law).unwrap();
            let du = w.as_vector() - u0.as_vector();
            let df = w.flux(&law) - u0.flux(&law);
            let s = df[0] / du[0];
            let scale = conserved_scale(&u0, &law);
            assert!(((df - du * s).component_div(&scale)).amax() < 1e-12);
            // Lax entropy inequalities
            let (c0, c1) = (u0.sound_speed(&law), w.sound_speed(&law));
            let (v0, v1) = (u0.velocity(), w.velocity());
            if family == WaveFamily::One {
                assert!(v0 - c0 > s && s > v1 - c1);
            } else {
                assert!(v0 + c0 > s && s > v1 + c1);
            }
        }
    }
}

/// Downstream state from the transmission conditions, solved as scalar
/// equations in the downstream density. `None` when no subsonic root exists.
fn transmission_oracle(
    kind: CouplingKind,
    u: &GasState,
    ratio: f64,
    law: &GasLaw,
) -> Option<GasState> {
    let w = u.primitives(law);
    let q_plus = u.q() / ratio;
    let g = GAMMA / (GAMMA - 1.0);
    let enthalpy = g * w.p / u.rho() + 0.5 * w.v * w.v;
    let from_rho_p = |rho: f64, p: f64| state(rho, q_plus / rho, p);
    let out = match kind {
        CouplingKind::Smooth => {
            // isentropic and isenthalpic; subsonic root lies above the sonic density
            let k = w.p / u.rho().powf(GAMMA);
            let f =
                |rho: f64| g * k * rho.powf(GAMMA - 1.0) + 0.5 * (q_plus / rho).powi(2) - enthalpy;
            let rho_sonic = (q_plus * q_plus / (GAMMA * k)).powf(1.0 / (GAMMA + 1.0));
            if f(rho_sonic) > 0.0 {
                return None;
            }
            let rho = bisect(rho_sonic, 100.0 * u.rho(), f);
            from_rho_p(rho, k * rho.powf(GAMMA))
        }
        CouplingKind::SectionMomentum => {
            GasState::new(u.rho() / ratio, q_plus, u.energy() / ratio).unwrap()
        }
        CouplingKind::Pressure => {
            // g p x + q+^2 x^2 / 2 = enthalpy with x = 1/rho
            let (a, b, c) = (0.5 * q_plus * q_plus, g * w.p, -enthalpy);
            let x = (-b + (b * b - 4.0 * a * c).sqrt()) / (2.0 * a);
            from_rho_p(1.0 / x, w.p)
        }
        CouplingKind::Momentum => {
            // p+ = P - q+^2 x and g p+ x + q+^2 x^2 / 2 = enthalpy
            let pm = u.q() * w.v + w.p;
            let (a, b, c) = ((0.5 - g) * q_plus * q_plus, g * pm, -enthalpy);
            let disc = (b * b - 4.0 * a * c).sqrt();
            if disc.is_nan() {
                return None;
            }
            let roots = [(-b + disc) / (2.0 * a), (-b - disc) / (2.0 * a)];
            let x0 = 1.0 / u.rho();
            let x = if (roots[0] - x0).abs() < (roots[1] - x0).abs() {
                roots[0]
            } else {
                roots[1]
            };
            from_rho_p(1.0 / x, pm - q_plus * q_plus * x)
        }
    };
    out.is_subsonic(law).then_some(out)
}

#[test]
fn transmission_maps_match_scalar_oracles() {
    let law = GasLaw::default();
    let opts = SolverOptions::default();
    for kind in CouplingKind::ALL {
        for theta in [0.05, 0.25, 0.5, 0.8] {
            for h in [-0.005, 0.01, 0.05, 0.15] {
                let u = reference_state(theta, 1.7, 0.6, &law).unwrap();
                let got = t_map(kind, 1.0, 1.0 + h, &u, &law, &opts);
                let Some(want) = transmission_oracle(kind, &u, 1.0 + h, &law) else {
                    assert!(
                        got.is_err(),
                        "{kind} theta={theta} h={h}: choked, yet got {got:?}"
                    );
                    continue;
                };
                let got = got.unwrap_or_else(|e| panic!("{kind} theta={theta} h={h}: {e}"));
                let err = (got.as_vector() - want.as_vector())
                    .component_div(&conserved_scale(&u, &law))
                    .amax();
                let tol = if kind == CouplingKind::Smooth {
                    1e-9
                } else {
                    1e-12
                };
                assert!(err < tol, "{kind} theta={theta} h={h}: err {err:e}");
            }
        }
    }
}

/// (kind, theta, f1, chi) to the digits printed by an independent 60-digit
/// evaluation of the exact second-order expansion.
const EXACT_INTERACTION: [(CouplingKind, f64, f64, f64); 8] = [
    (CouplingKind::Smooth, 0.25, -0.0185, -0.373),
    (CouplingKind::Smooth, 0.5, 0.4665, -0.694),
    (CouplingKind::Momentum, 0.1, 0.0748, -0.168),
    (CouplingKind::Momentum, 0.75, 5.485, 2.123),
    (CouplingKind::SectionMomentum, 0.25, -1.0, 0.0),
    (CouplingKind::SectionMomentum, 0.75, -1.0, 0.0),
    (CouplingKind::Pressure, 0.1, -0.494, -0.184),
    (CouplingKind::Pressure, 0.5, -0.544, -0.087),
];

#[test]
fn interaction_series_match_exact_expansion() {
    let law = GasLaw::default();
    let opts = SolverOptions::default();
    EXACT_INTERACTION
        .par_iter()
        .for_each(|&(kind, theta, f1, chi)| {
            let s = extract_interaction_series(
                kind,
                theta,
                1.0,
                1.0,
                &law,
                &opts,
                &interaction_h_grid(theta),
            )
            .unwrap();
            let close = |got: f64, want: f64| (got - want).abs() <= 1e-3 * want.abs().max(1.0);
            assert!(close(s.f1, f1), "{kind} theta={theta}: f1 {} vs {f1}", s.f1);
            assert!(
                close(s.chi, chi),
                "{kind} theta={theta}: chi {} vs {chi}",
                s.chi
            );
            assert!(s.pair_linear.abs() < 1e-5);
        });
}
