//! Closed-form Θ, T and orbit shapes for the Kepler and perturbed forces.

use central_force::integrals::{PolarState, ReferenceKind};
use central_force::oracles::*;

fn main() -> central_force::error::Result<()> {
    for force in [OracleForce::Kepler { k: 1.0 }, OracleForce::Perturbed { k: 1.0, kappa: 0.19 }] {
        let p = OracleParams::new(force, 1.0, -0.25, ReferenceKind::TurningMin)?;
        let sp = special_points(&p);
        println!("{force:?}: r_min={:.9} r_max={:?} r*={:.9} v*={:.9}", sp.r_min, sp.r_max, sp.r_inertial, sp.v_star);
        let r: f64 = 1.2;
        let w = 2.0 * (p.e - force.u(r)) - 1.0 / (r * r);
        let s = PolarState::new(0.0, r, 0.0, w.sqrt(), 1.0 / (r * r))?;
        let big_theta = theta_closed(&s, &p)?;
        println!("  Theta = {big_theta:.12}, T = {:.12}", time_closed(&s, &p)?);
        for theta in [0.0, 0.5, 1.0] {
            println!("  r({theta}) = {:.9}", shape_closed(theta, &p, big_theta, 1.0)?);
        }
    }
    Ok(())
}
