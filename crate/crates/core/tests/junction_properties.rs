use ej_core::asymptotics::reference_state;
use ej_core::coupling::{psi_residual, t_map};
use ej_core::junction::{amplify_pair, interact_incoming, solve_junction_riemann};
use ej_core::waves::lax_curve;
use ej_core::{CouplingKind, CurveDirection, GasLaw, SolverOptions, WaveFamily};
use proptest::prelude::*;

fn kind() -> impl Strategy<Value = CouplingKind> {
    prop::sample::select(CouplingKind::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn junction_riemann_recovers_constructed_waves(
        k in kind(),
        theta in 0.05f64..0.5,
        h in -0.02f64..0.08,
        s in prop::array::uniform3(-0.04f64..0.04),
    ) {
        let law = GasLaw::default();
        let opts = SolverOptions::default();
        let ul = reference_state(theta, 1.3, 0.8, &law).unwrap();
        let tl = lax_curve(WaveFamily::One, CurveDirection::Forward, &ul, s[0], &law).unwrap();
        let tr = t_map(k, 1.0, 1.0 + h, &tl, &law, &opts).unwrap();
        let m = lax_curve(WaveFamily::Two, CurveDirection::Forward, &tr, s[1], &law).unwrap();
        let ur = lax_curve(WaveFamily::Three, CurveDirection::Forward, &m, s[2], &law).unwrap();

        let fan = solve_junction_riemann(k, 1.0, 1.0 + h, &ul, &ur, &law, &opts).unwrap();
        prop_assert!(fan.residual <= 1e-10);
        for i in 0..3 {
            prop_assert!((fan.sigma[i] - s[i]).abs() <= 1e-8, "sigma {:?} vs {:?}", fan.sigma, s);
        }
        let psi = psi_residual(k, 1.0, &fan.trace_left, 1.0 + h, &fan.trace_right, &law, &opts).unwrap();
        prop_assert!(psi.amax() <= 1e-9);
    }

    #[test]
    fn interaction_keeps_wave_sign_and_reflects_at_order_h(
        k in kind(),
        theta in 0.05f64..0.5,
        h in 0.005f64..0.05,
        sign in prop::bool::ANY,
    ) {
        let law = GasLaw::default();
        let opts = SolverOptions::default();
        let u = reference_state(theta, 1.0, 1.0, &law).unwrap();
        let sigma = if sign { 1e-3 } else { -1e-3 };
        let r = interact_incoming(k, &u, sigma, 1.0, h, &law, &opts).unwrap();
        prop_assert!(r.residual <= 1e-10);
        prop_assert!(r.sigma[2] * sigma > 0.0);
        prop_assert!((r.sigma[2] / sigma - 1.0).abs() <= 50.0 * h);
        prop_assert!(r.sigma[0].abs() <= 50.0 * h * sigma.abs());
    }

    #[test]
    fn pair_ratio_is_second_order(
        k in kind(),
        theta in 0.05f64..0.5,
    ) {
        let law = GasLaw::default();
        let opts = SolverOptions::default();
        let u = reference_state(theta, 1.0, 1.0, &law).unwrap();
        // first-order terms cancel: (R - 1)/h^2 settles to a finite limit
        let curv = |h: f64| (amplify_pair(k, &u, 1e-5, 1.0, h, &law, &opts).unwrap().ratio - 1.0) / (h * h);
        let (c1, c2) = (curv(0.01), curv(0.005));
        prop_assert!(c1.abs() < 100.0);
        prop_assert!((c1 - c2).abs() <= 0.5 + 0.1 * c2.abs(), "{} {}", c1, c2);
    }
}
