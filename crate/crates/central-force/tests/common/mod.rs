#![allow(dead_code)]

use central_force::integrals::{PolarState, ReferenceKind};
use central_force::oracles::{OracleForce, OracleParams, Regime};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random `(L, E)` in the requested regime, `k ∈ [0.5, 2]`, `|L| ∈ [0.5, 2]`.
pub fn random_params(rng: &mut ChaCha8Rng, force: OracleForce, regime: Regime, branch: ReferenceKind) -> OracleParams {
    loop {
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let l_abs: f64 = rng.gen_range(0.5..2.0);
        if force.kappa() >= 0.8 * l_abs * l_abs {
            continue;
        }
        let l = sign * l_abs;
        let k = force.k();
        let lp2 = l * l - force.kappa();
        let e_min = -k * k / (2.0 * lp2);
        let e = match regime {
            Regime::NegE => e_min * rng.gen_range(0.1..0.9),
            Regime::ZeroE => 0.0,
            Regime::PosE => rng.gen_range(0.05..1.5),
        };
        if let Ok(p) = OracleParams::new(force, l, e, branch) {
            return p;
        }
    }
}

/// A random on-shell state for `p`, at least `margin` (relative) away from
/// turning points.
pub fn random_state(rng: &mut ChaCha8Rng, p: &OracleParams, margin: f64) -> PolarState {
    let sp = central_force::oracles::special_points(p);
    let lo = sp.r_min * (1.0 + margin);
    let hi = match sp.r_max {
        Some(r) => r * (1.0 - margin),
        None => sp.r_min * 8.0,
    };
    let r = rng.gen_range(lo..hi);
    let omega = p.l / (r * r);
    let w = 2.0 * (p.e - p.force.u(r)) - p.l * p.l / (r * r);
    let v = if rng.gen_bool(0.5) { w.sqrt() } else { -w.sqrt() };
    let theta = rng.gen_range(-3.0..3.0);
    let t = rng.gen_range(-5.0..5.0);
    PolarState::new(t, r, theta, v, omega).unwrap()
}

pub fn kepler(k: f64) -> OracleForce {
    OracleForce::Kepler { k }
}

pub fn perturbed(k: f64, kappa: f64) -> OracleForce {
    OracleForce::Perturbed { k, kappa }
}

pub const REGIMES: [Regime; 3] = [Regime::NegE, Regime::ZeroE, Regime::PosE];
pub const BRANCHES: [ReferenceKind; 3] = [ReferenceKind::TurningMin, ReferenceKind::TurningMax, ReferenceKind::Inertial];
