use std::f64::consts::PI;

use central_force::cli::output::to_json;
use central_force::dynamics::CartesianState;
use central_force::geometry::{bivector_components, wedge_bivector_self_max};
use central_force::integrals::*;
use central_force::oracles::{self, OracleForce, OracleParams};
use central_force::potentials::{EffectivePotentialSpec, RadialPotential};
use central_force::quadrature::adaptive_gk21;
use proptest::prelude::*;

const QUAD_TOL: f64 = 1e-12;

/// A bound Kepler/perturbed state `(k, κ, L, E-fraction, r-fraction, sgn v, θ, t)`.
fn bound_state() -> impl Strategy<Value = (OracleParams, PolarState)> {
    (0.5..2.0f64, prop_oneof![Just(0.0), 0.01..0.3f64], 0.6..2.0f64, any::<bool>(), 0.1..0.9f64, 0.05..0.95f64, any::<bool>(), -3.0..3.0f64, -5.0..5.0f64)
        .prop_map(|(k, kappa, l_abs, neg, ef, rf, out, theta, t)| {
            let l = if neg { -l_abs } else { l_abs };
            let force = if kappa == 0.0 { OracleForce::Kepler { k } } else { OracleForce::Perturbed { k, kappa } };
            let e_min = -k * k / (2.0 * (l * l - kappa));
            let p = OracleParams::new(force, l, e_min * ef, ReferenceKind::TurningMin).unwrap();
            let sp = oracles::special_points(&p);
            let (lo, hi) = (sp.r_min, sp.r_max.unwrap());
            let r = lo + (hi - lo) * rf;
            let w = (2.0 * (p.e - force.u(r)) - l * l / (r * r)).max(0.0);
            let v = if out { w.sqrt() } else { -w.sqrt() };
            (p, PolarState::new(t, r, theta, v, l / (r * r)).unwrap())
        })
}

fn spec_of(p: &OracleParams) -> EffectivePotentialSpec {
    EffectivePotentialSpec::new(p.force.potential().unwrap(), p.l).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn time_shift_moves_only_t((p, s) in bound_state(), dt in -10.0..10.0f64) {
        let spec = spec_of(&p);
        let a = first_integrals(&s, &spec, ReferencePolicy::Auto, QUAD_TOL).unwrap();
        let shifted = PolarState { t: s.t + dt, ..s };
        let b = first_integrals(&shifted, &spec, ReferencePolicy::Auto, QUAD_TOL).unwrap();
        prop_assert_eq!(a.l, b.l);
        prop_assert_eq!(a.e, b.e);
        prop_assert!((a.theta.unwrap() - b.theta.unwrap()).abs() < 1e-12);
        prop_assert!((b.t.unwrap() - a.t.unwrap() - dt).abs() < 1e-9);
    }

    #[test]
    fn rotation_moves_only_theta((p, s) in bound_state(), alpha in -6.0..6.0f64) {
        let spec = spec_of(&p);
        let a = first_integrals(&s, &spec, ReferencePolicy::Auto, QUAD_TOL).unwrap();
        let rotated = PolarState { theta: s.theta + alpha, ..s };
        let b = first_integrals(&rotated, &spec, ReferencePolicy::Auto, QUAD_TOL).unwrap();
        prop_assert!((b.theta.unwrap() - a.theta.unwrap() - alpha).abs() < 1e-12);
        prop_assert!((a.t.unwrap() - b.t.unwrap()).abs() < 1e-12);
    }

    #[test]
    fn quadrature_agrees_with_closed_forms((p, s) in bound_state()) {
        let spec = spec_of(&p);
        let policy = ReferencePolicy::Fixed(ReferenceKind::TurningMin);
        let th = theta_integral(&s, &spec, policy, QUAD_TOL).unwrap();
        let t = time_integral(&s, &spec, policy, QUAD_TOL).unwrap();
        prop_assert!((th - oracles::theta_closed(&s, &p).unwrap()).abs() < 1e-8);
        prop_assert!((t - oracles::time_closed(&s, &p).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn apsidal_angle_is_twice_the_half_separation((p, _s) in bound_state()) {
        let spec = spec_of(&p);
        let a = apsidal_angle(&spec, p.e, QUAD_TOL).unwrap();
        let (half, half_t) = oracles::half_separations(&p).unwrap();
        prop_assert!((a.delta_theta.abs() - 2.0 * half.abs()).abs() < 1e-8 * a.delta_theta.abs());
        prop_assert!((radial_period(&spec, p.e, QUAD_TOL).unwrap() - 2.0 * half_t).abs() < 1e-8 * half_t);
        prop_assert!(a.mod_2pi >= 0.0 && a.mod_2pi < 2.0 * PI);
    }

    #[test]
    fn mod_2pi_is_in_range(x in -1e6..1e6f64) {
        let y = mod_2pi(x);
        prop_assert!((0.0..2.0 * PI).contains(&y));
        prop_assert!(((x - y) / (2.0 * PI) - ((x - y) / (2.0 * PI)).round()).abs() < 1e-6);
    }

    #[test]
    fn bivectors_are_simple(r in prop::collection::vec(-2.0..2.0f64, 5), v in prop::collection::vec(-2.0..2.0f64, 5)) {
        prop_assume!(r.iter().map(|x| x * x).sum::<f64>() > 0.01);
        let s = CartesianState::new(0.0, r, v).unwrap();
        let b = bivector_components(&s);
        for i in 0..5 {
            for j in 0..5 {
                prop_assert_eq!(b[i * 5 + j], -b[j * 5 + i]);
            }
        }
        prop_assert!(wedge_bivector_self_max(&b, 5) < 1e-12);
    }

    #[test]
    fn quadrature_is_exact_on_cubics(c in prop::array::uniform4(-3.0..3.0f64), a in -2.0..0.0f64, b in 0.1..3.0f64) {
        let f = |x: f64| c[0] + c[1] * x + c[2] * x * x + c[3] * x * x * x;
        let prim = |x: f64| c[0] * x + c[1] * x * x / 2.0 + c[2] * x.powi(3) / 3.0 + c[3] * x.powi(4) / 4.0;
        let q = adaptive_gk21(f, a, b, 1e-13, 1e-13).unwrap();
        prop_assert!((q.value - (prim(b) - prim(a))).abs() < 1e-11);
    }

    #[test]
    fn json_floats_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        let text = to_json(&serde_json::json!({ "x": x })).unwrap();
        let back: serde_json::Value = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back["x"].as_f64().unwrap(), x);
    }

    #[test]
    fn energy_of_power_law_is_conserved_by_definition(k in 0.5..2.0f64, r in 0.5..2.0f64, v in -1.0..1.0f64, w in 0.1..1.0f64) {
        let spec = EffectivePotentialSpec::with_u_eq(RadialPotential::power(k, 1.0).unwrap(), w * r * r, 0.0).unwrap();
        let s = PolarState::new(0.0, r, 0.0, v, w).unwrap();
        let e = energy(&s, &spec);
        prop_assert!((e - (0.5 * v * v + 0.5 * (r * w).powi(2) + 0.5 * k * r * r)).abs() < 1e-12);
    }
}
