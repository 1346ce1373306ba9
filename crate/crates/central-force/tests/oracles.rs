mod common;

use central_force::integrals::{self, ReferenceKind, ReferencePolicy};
use central_force::oracles::{self, Regime};
use central_force::potentials::EffectivePotentialSpec;
use common::*;

fn compare(force: central_force::oracles::OracleForce, regime: Regime, branch: ReferenceKind, seed: u64) -> (f64, f64) {
    let mut g = rng(seed);
    let mut worst = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let p = random_params(&mut g, force, regime, branch);
        let s = random_state(&mut g, &p, 1e-3);
        let spec = EffectivePotentialSpec::with_u_eq(force.potential().unwrap(), p.l, 0.0).unwrap();
        let policy = ReferencePolicy::Fixed(branch);
        let th_q = integrals::theta_integral(&s, &spec, policy, 1e-12).unwrap();
        let t_q = integrals::time_integral(&s, &spec, policy, 1e-12).unwrap();
        let th_c = oracles::theta_closed(&s, &p).unwrap();
        let t_c = oracles::time_closed(&s, &p).unwrap();
        worst.0 = worst.0.max((th_q - th_c).abs());
        worst.1 = worst.1.max((t_q - t_c).abs() / t_c.abs().max(1.0));
    }
    worst
}

#[test]
fn closed_forms_match_quadrature() {
    for (fi, force) in [kepler(1.3), perturbed(1.0, 0.19)].into_iter().enumerate() {
        for regime in REGIMES {
            for branch in BRANCHES {
                if branch == ReferenceKind::TurningMax && regime != Regime::NegE {
                    continue;
                }
                let (dth, dt) = compare(force, regime, branch, 17 + fi as u64);
                assert!(dth < 1e-8 && dt < 1e-8, "{force:?} {regime:?} {branch:?}: {dth:e} {dt:e}");
            }
        }
    }
}
