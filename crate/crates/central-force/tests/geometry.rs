use central_force::cli::verify::random_kepler_state;
use central_force::dynamics::{integrate_ndim, reduce_to_plane};
use central_force::geometry::*;
use central_force::integrals::{angular_momentum, energy, ReferenceKind, ReferencePolicy};
use central_force::potentials::{EffectivePotentialSpec, RadialPotential};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const QUAD_TOL: f64 = 1e-12;

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|a| a * a).sum::<f64>().sqrt()
}

#[test]
fn wedge_identities_in_many_dimensions() {
    let k = RadialPotential::kepler(1.0).unwrap();
    let mut g = ChaCha8Rng::seed_from_u64(4);
    for n in [2, 3, 5, 8] {
        for _ in 0..100 {
            let s = random_kepler_state(&mut g, n).unwrap();
            let lc = bivector_from_state(&s).unwrap().components();
            let d = lrl_vector(&s, &k, ReferencePolicy::Auto, Normalization::Default, QUAD_TOL).unwrap();
            assert!((norm(&d.theta_hat) - 1.0).abs() < 1e-10);
            assert!(wedge_vector_bivector_max(&d.theta_hat, &lc) < 1e-10);
            assert!(wedge_vector_bivector_max(&d.a, &lc) < 1e-10);
            assert!(wedge_bivector_self_max(&lc, n) < 1e-10);
            assert!(contract2(&d.theta_hat, &d.theta_hat_perp).abs() < 1e-10);
        }
    }
}

#[test]
fn kepler_vector_magnitude_and_variant() {
    let k = RadialPotential::kepler(1.0).unwrap();
    let mut g = ChaCha8Rng::seed_from_u64(8);
    for n in [2, 3, 5] {
        for _ in 0..50 {
            let s = random_kepler_state(&mut g, n).unwrap();
            let polar = reduce_to_plane(&s).unwrap().polar;
            let l = angular_momentum(&polar);
            let e = energy(&polar, &EffectivePotentialSpec::new(k.clone(), l).unwrap());
            let star = kepler_lrl(&s, 1.0);
            let want = (2.0 * e * l * l + 1.0).sqrt();
            assert!((norm(&star) - want).abs() < 1e-8 * want);

            let general = lrl_vector(&s, &k, ReferencePolicy::Fixed(ReferenceKind::TurningMin), Normalization::Default, QUAD_TOL)
                .unwrap();
            for (a, b) in general.a.iter().zip(&star) {
                assert!((a - b).abs() < 1e-8, "{:?} vs {star:?}", general.a);
            }

            let lhat = bivector_from_state(&s).unwrap().unit().unwrap().components();
            let rotated: Vec<f64> = contract(&star, &lhat).iter().map(|x| x * polar.v.signum()).collect();
            let variant = lrl_variant(&s, &k, Normalization::Default, QUAD_TOL).unwrap();
            for (a, b) in variant.iter().zip(&rotated) {
                assert!((a - b).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn lrl_vector_is_conserved_along_kepler_motion() {
    let k = RadialPotential::kepler(1.0).unwrap();
    let s0 = central_force::dynamics::CartesianState::new(0.0, vec![1.0, 0.0, 0.0], vec![0.3, 0.8, 0.2]).unwrap();
    let traj = integrate_ndim(&k, &s0, 30.0, 1e-11).unwrap();
    let a0 = lrl_vector(&s0, &k, ReferencePolicy::Auto, Normalization::Default, QUAD_TOL).unwrap().a;
    for t in [3.0, 7.5, 12.0, 29.0] {
        let s = traj.interpolate(t).unwrap();
        let a = lrl_vector(&s, &k, ReferencePolicy::Auto, Normalization::Default, QUAD_TOL).unwrap().a;
        for (x, y) in a.iter().zip(&a0) {
            assert!((x - y).abs() < 1e-6, "t={t}: {a:?} vs {a0:?}");
        }
    }
}

#[test]
fn perturbed_direction_rotates_by_the_apsidal_angle() {
    let p = RadialPotential::perturbed(1.0, 0.19).unwrap();
    let s0 = central_force::dynamics::CartesianState::new(0.0, vec![1.0, 0.0], vec![0.3, 1.0]).unwrap();
    let polar = reduce_to_plane(&s0).unwrap().polar;
    let spec = EffectivePotentialSpec::new(p.clone(), angular_momentum(&polar)).unwrap();
    let e = energy(&polar, &spec);
    let dt = central_force::integrals::radial_period(&spec, e, QUAD_TOL).unwrap();
    let dtheta = central_force::integrals::apsidal_angle(&spec, e, QUAD_TOL).unwrap().delta_theta;
    let traj = integrate_ndim(&p, &s0, dt, 1e-11).unwrap();
    let policy = ReferencePolicy::Fixed(ReferenceKind::TurningMin);
    let a0 = theta_hat(&s0, &p, policy, QUAD_TOL).unwrap().theta_hat;
    let a1 = theta_hat(traj.final_state(), &p, policy, QUAD_TOL).unwrap().theta_hat;
    let angle = a1[1].atan2(a1[0]) - a0[1].atan2(a0[0]);
    let diff = (angle - dtheta).rem_euclid(2.0 * std::f64::consts::PI);
    assert!(diff.min(2.0 * std::f64::consts::PI - diff) < 1e-6, "{angle} vs {dtheta}");
}

#[test]
fn jacobian_has_full_rank() {
    let k = RadialPotential::kepler(1.0).unwrap();
    let mut g = ChaCha8Rng::seed_from_u64(13);
    for n in [2, 3, 5] {
        let s = random_kepler_state(&mut g, n).unwrap();
        assert_eq!(jacobian_rank(&s, &k, ReferencePolicy::Auto).unwrap(), 2 * n);
        assert_eq!(count_independent(n).unwrap().total_independent, 2 * n);
    }
}
