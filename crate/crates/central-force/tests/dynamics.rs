mod common;

use central_force::dynamics::{embed_to_ndim, integrate_ndim, integrate_polar, reduce_to_plane, EventKind};
use central_force::geometry::PlaneFrame;
use central_force::integrals::*;
use central_force::oracles::{self, Regime};
use central_force::potentials::{EffectivePotentialSpec, RadialPotential};
use central_force::quadrature::IntegrandKind;
use common::*;

const ODE_TOL: f64 = 1e-10;
const QUAD_TOL: f64 = 1e-12;

fn setup(kappa: f64) -> (RadialPotential, EffectivePotentialSpec, PolarState) {
    let p = if kappa == 0.0 { RadialPotential::kepler(1.0) } else { RadialPotential::perturbed(1.0, kappa) }.unwrap();
    let spec = EffectivePotentialSpec::new(p.clone(), 1.0).unwrap();
    let s0 = PolarState::new(0.0, 1.0, 0.0, (0.5 - kappa / 2.0).sqrt(), 1.0).unwrap();
    (p, spec, s0)
}

#[test]
fn conservation_over_ten_periods() {
    for kappa in [0.0, 0.19] {
        let (p, spec, s0) = setup(kappa);
        let e0 = energy(&s0, &spec);
        let orbit = Orbit::from_state(&spec, &s0, QUAD_TOL).unwrap();
        let dt = radial_period(&spec, e0, QUAD_TOL).unwrap();
        let traj = integrate_polar(&p, s0, 10.0 * dt, ODE_TOL).unwrap();
        assert!(traj.apsis_events().count() >= 19);

        let l = conservation_residual(|s| Ok(angular_momentum(s)), false, &traj);
        let e = conservation_residual(|s| Ok(energy(s, &spec)), false, &traj);
        assert!(l.max_drift / 1.0 <= 1e-8, "L drift {}", l.max_drift);
        assert!(e.max_drift / e0.abs() <= 1e-8, "E drift {}", e.max_drift);

        for policy in [ReferencePolicy::Fixed(ReferenceKind::TurningMin), ReferencePolicy::Fixed(ReferenceKind::Inertial)] {
            let reference = orbit.reference(policy).unwrap();
            for kind in [IntegrandKind::Angular, IntegrandKind::Temporal] {
                let eval = |s: &PolarState| match kind {
                    IntegrandKind::Angular => theta_integral(s, &spec, policy, QUAD_TOL),
                    IntegrandKind::Temporal => time_integral(s, &spec, policy, QUAD_TOL),
                };
                let rep = conservation_residual(eval, true, &traj);
                assert_eq!(rep.failures, 0);
                let drift = rep.arc_drifts.iter().cloned().fold(0.0, f64::max);
                assert!(drift <= 1e-6, "kappa={kappa} {policy:?} {kind:?} drift {drift}");
                for (at, jump) in &rep.jumps {
                    let want = expected_jump(&orbit, &reference, kind, *at).unwrap();
                    assert!((jump - want).abs() <= 1e-6, "{policy:?} {kind:?} {at:?}: {jump} vs {want}");
                }
            }
        }
    }
}

#[test]
fn turning_references_jump_by_full_separations() {
    let (p, spec, s0) = setup(0.19);
    let e0 = energy(&s0, &spec);
    let dtheta = apsidal_angle(&spec, e0, QUAD_TOL).unwrap().delta_theta;
    let dt = radial_period(&spec, e0, QUAD_TOL).unwrap();
    let traj = integrate_polar(&p, s0, 3.0 * dt, ODE_TOL).unwrap();
    let policy = ReferencePolicy::Fixed(ReferenceKind::TurningMin);
    let rep = conservation_residual(|s| theta_integral(s, &spec, policy, QUAD_TOL), true, &traj);
    for (at, jump) in rep.jumps {
        match at {
            EventKind::Periapsis => assert!(jump.abs() < 1e-6),
            EventKind::Apoapsis => assert!((jump - dtheta).abs() < 1e-6),
            EventKind::InertialCrossing => unreachable!(),
        }
    }
    let rep = conservation_residual(|s| time_integral(s, &spec, policy, QUAD_TOL), true, &traj);
    assert!(rep.jumps.iter().any(|(k, j)| *k == EventKind::Apoapsis && (j - dt).abs() < 1e-6));
}

/// Interpolating to `T` lands on the reference radius at angle `Θ`.
#[test]
fn reference_point_semantics() {
    let mut g = rng(21);
    for regime in [Regime::NegE, Regime::ZeroE, Regime::PosE] {
        for branch in [ReferenceKind::TurningMin, ReferenceKind::Inertial] {
            for _ in 0..5 {
                let op = random_params(&mut g, kepler(1.0), regime, branch);
                let s = random_state(&mut g, &op, 0.05);
                let p = op.force.potential().unwrap();
                let spec = EffectivePotentialSpec::new(p.clone(), op.l).unwrap();
                let set = first_integrals(&s, &spec, ReferencePolicy::Fixed(branch), QUAD_TOL).unwrap();
                let (big_t, big_theta) = (set.t.unwrap(), set.theta.unwrap());
                let r0 = set.reference.unwrap().r0;
                let traj = integrate_polar(&p, s, big_t, ODE_TOL).unwrap();
                let hit = traj.interpolate(big_t).unwrap();
                assert!((hit.r - r0).abs() <= 1e-6, "{regime:?} {branch:?}: r {} vs {r0}", hit.r);
                assert!((hit.theta - big_theta).abs() <= 1e-6, "{regime:?} {branch:?}: θ {} vs {big_theta}", hit.theta);
                let sp = oracles::special_points(&op);
                let want_r0 = if branch == ReferenceKind::Inertial { sp.r_inertial } else { sp.r_min };
                assert!((r0 - want_r0).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn ndim_motion_stays_in_its_plane() {
    let (p, _, s0) = setup(0.0);
    let e1 = vec![0.5, 0.5, 0.5, 0.5];
    let e2 = vec![0.5, -0.5, 0.5, -0.5];
    let frame = PlaneFrame::new(e1, e2).unwrap();
    let c0 = embed_to_ndim(&frame, &s0).unwrap();
    let nd = integrate_ndim(&p, &c0, 20.0, ODE_TOL).unwrap();
    let pol = integrate_polar(&p, s0, 20.0, ODE_TOL).unwrap();
    let a = nd.final_state();
    let b = embed_to_ndim(&frame, pol.final_state()).unwrap();
    for i in 0..4 {
        assert!((a.r[i] - b.r[i]).abs() < 1e-7 && (a.v[i] - b.v[i]).abs() < 1e-7);
    }
    let red = reduce_to_plane(a).unwrap();
    assert!((red.polar.r - pol.final_state().r).abs() < 1e-7);
    assert_eq!(nd.events.len(), pol.events.len());
}

#[test]
fn circular_orbit_has_no_events() {
    let p = RadialPotential::kepler(1.0).unwrap();
    let s0 = PolarState::new(0.0, 1.0, 0.0, 0.0, 1.0).unwrap();
    let traj = integrate_polar(&p, s0, 30.0, ODE_TOL).unwrap();
    assert!(traj.events.is_empty());
    assert!(!traj.meta.apsis_events);
    assert!((traj.final_state().r - 1.0).abs() < 1e-8);
}

#[test]
fn radial_infall_reports_collision() {
    let p = RadialPotential::kepler(1.0).unwrap();
    let s0 = PolarState::new(0.0, 1.0, 0.0, -0.1, 0.0).unwrap();
    let traj = integrate_polar(&p, s0, 10.0, ODE_TOL).unwrap();
    assert!(traj.meta.collision);
    assert!(traj.final_state().t < 10.0);
}
