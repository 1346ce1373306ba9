mod common;

use std::f64::consts::PI;

use central_force::error::Error;
use central_force::integrals::*;
use central_force::potentials::*;
use common::rng;
use rand::Rng;

const TOL: f64 = 1e-12;

fn kepler_spec(k: f64, l: f64) -> EffectivePotentialSpec {
    EffectivePotentialSpec::new(RadialPotential::kepler(k).unwrap(), l).unwrap()
}

#[test]
fn kepler_orbits_do_not_precess() {
    let mut g = rng(1);
    for _ in 0..50 {
        let k = g.gen_range(0.5..2.0);
        let l = g.gen_range(0.5..2.0) * if g.gen_bool(0.5) { 1.0 } else { -1.0 };
        let e_min = -k * k / (2.0 * l * l);
        let e = e_min * g.gen_range(0.05..0.95);
        let spec = kepler_spec(k, l);
        let a = apsidal_angle(&spec, e, TOL).unwrap();
        assert!((a.delta_theta.abs() - 2.0 * PI).abs() < 1e-8, "k={k} L={l} E={e}: {}", a.delta_theta);
        assert!(matches!(a.verdict, ClosureVerdict::Closed { p: 1, q: 1, precessing: false }));
        let period = radial_period(&spec, e, TOL).unwrap();
        let want = PI * k / (2.0 * e.abs().powi(3)).sqrt();
        assert!(((period - want) / want).abs() < 1e-8, "{period} vs {want}");
    }
}

#[test]
fn perturbed_precession_and_period() {
    let (k, l, e) = (1.0, 1.0, -0.25);
    for kappa in [0.04, 0.19, 0.36, 0.64] {
        let spec = EffectivePotentialSpec::new(RadialPotential::perturbed(k, kappa).unwrap(), l).unwrap();
        let a = apsidal_angle(&spec, e, TOL).unwrap();
        let want = 2.0 * PI * l / (l * l - kappa).sqrt();
        assert!(((a.delta_theta - want) / want).abs() < 1e-8, "kappa={kappa}");
        let period = radial_period(&spec, e, TOL).unwrap();
        let want_t = PI * k / (2.0 * e.abs().powi(3)).sqrt();
        assert!(((period - want_t) / want_t).abs() < 1e-8);
    }
}

#[test]
fn perturbed_verdicts() {
    let spec = EffectivePotentialSpec::new(RadialPotential::perturbed(1.0, 0.19).unwrap(), 1.0).unwrap();
    let a = apsidal_angle(&spec, -0.25, TOL).unwrap();
    assert_eq!(a.verdict, ClosureVerdict::Closed { p: 10, q: 9, precessing: true });
    assert!((a.mod_2pi - (2.0 * PI / 0.9 - 2.0 * PI)).abs() < 1e-8);
    let spec = EffectivePotentialSpec::new(RadialPotential::perturbed(1.0, 0.5).unwrap(), 1.0).unwrap();
    assert_eq!(apsidal_angle(&spec, -0.25, TOL).unwrap().verdict, ClosureVerdict::Open);
}

#[test]
fn excessive_perturbation_is_rejected() {
    let spec = EffectivePotentialSpec::new(RadialPotential::perturbed(1.0, 1.5).unwrap(), 1.0).unwrap();
    let err = classify_trajectory(&spec, -0.1).unwrap_err();
    assert!(matches!(err, Error::NoBoundedTrajectories { .. }));
    assert!(err.to_string().contains("no bounded trajectories (κ ≥ L²)"));
}

#[test]
fn integrals_at_the_reference_state() {
    let spec = kepler_spec(1.0, 1.0);
    let s = PolarState::new(0.0, 1.0, 0.0, 0.5f64.sqrt(), 1.0).unwrap();
    let set = first_integrals(&s, &spec, ReferencePolicy::Fixed(ReferenceKind::TurningMin), TOL).unwrap();
    assert!((set.l - 1.0).abs() < 1e-15 && (set.e + 0.25).abs() < 1e-15);
    assert!((set.theta.unwrap() + PI / 2.0).abs() < 1e-10);
    let inertial = first_integrals(&s, &spec, ReferencePolicy::Fixed(ReferenceKind::Inertial), TOL).unwrap();
    assert!(inertial.theta.unwrap().abs() < 1e-12 && inertial.t.unwrap().abs() < 1e-12);
}

#[test]
fn circular_and_radial_states_have_no_numbers() {
    let spec = kepler_spec(1.0, 1.0);
    let circ = PolarState::new(0.0, 1.0, 0.3, 0.0, 1.0).unwrap();
    let set = first_integrals(&circ, &spec, ReferencePolicy::Auto, TOL).unwrap();
    assert_eq!((set.theta, set.t), (None, None));
    assert!(set.note.unwrap().contains("undefined for circular"));
    assert_eq!(theta_integral(&circ, &spec, ReferencePolicy::Auto, TOL), Err(Error::UndefinedForCircular));

    let radial = PolarState::new(0.0, 1.0, 0.7, 0.2, 0.0).unwrap();
    let set = first_integrals(&radial, &spec, ReferencePolicy::Auto, TOL).unwrap();
    assert_eq!((set.l, set.theta, set.t), (0.0, Some(0.7), None));
    assert_eq!(set.note.as_deref(), Some("radial"));
}

#[test]
fn turning_references_differ_by_half_separations() {
    let spec = kepler_spec(1.0, 1.0);
    let s = PolarState::new(0.0, 1.3, 0.2, 0.4, 1.0 / 1.69).unwrap();
    let e = energy(&s, &spec);
    let lo = first_integrals(&s, &spec, ReferencePolicy::Fixed(ReferenceKind::TurningMin), TOL).unwrap();
    let hi = first_integrals(&s, &spec, ReferencePolicy::Fixed(ReferenceKind::TurningMax), TOL).unwrap();
    let dtheta = apsidal_angle(&spec, e, TOL).unwrap().delta_theta;
    let dt = radial_period(&spec, e, TOL).unwrap();
    assert!((hi.theta.unwrap() - lo.theta.unwrap() - dtheta / 2.0).abs() < 1e-9);
    assert!((hi.t.unwrap() - lo.t.unwrap() - dt / 2.0).abs() < 1e-9);
}

#[test]
fn classification_examples() {
    let spec = kepler_spec(1.0, 1.0);
    assert_eq!(classify_trajectory(&spec, -0.25).unwrap().class, TrajectoryClass::BoundedNoncircular);
    assert_eq!(classify_trajectory(&spec, -0.5).unwrap().class, TrajectoryClass::Circular);
    assert_eq!(classify_trajectory(&spec, 0.0).unwrap().class, TrajectoryClass::UnboundedOneTurning);
    assert!(matches!(classify_trajectory(&spec, -0.6), Err(Error::InadmissibleEnergy { .. })));
    assert_eq!(classify_trajectory(&kepler_spec(1.0, 0.0), -0.3).unwrap().class, TrajectoryClass::Radial);
}

#[test]
fn mod_2pi_range() {
    assert_eq!(mod_2pi(0.0), 0.0);
    assert!((mod_2pi(-PI / 2.0) - 1.5 * PI).abs() < 1e-15);
    assert!(mod_2pi(-1e-18) < 2.0 * PI);
}
