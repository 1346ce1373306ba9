//! The four symmetries acting on (L, E, Θ, T), their commutators and the
//! point symmetries of the Kepler force.

use central_force::integrals::{PolarState, ReferenceKind};
use central_force::potentials::RadialPotential;
use central_force::symmetry::*;

fn main() -> central_force::error::Result<()> {
    let kepler = RadialPotential::kepler(1.0)?;
    let ctx = SymmetryContext::new(kepler.clone(), ReferenceKind::TurningMin);
    let s = PolarState::new(0.0, 1.5, 0.3, 0.4, 1.0 / 2.25)?;
    println!("action on (L, E, Theta, T):");
    for w in Which::ALL {
        let row = action_on_integrals(w, &s, &ctx, None)?;
        println!("  {:8} {:+.6?}", w.as_str(), row);
    }
    let p = ctx.point_from_state(&s)?;
    println!("[X_Theta, X_T] residual = {:.2e}", commutator_residual(Which::XTheta, Which::XT, &p, &ctx)?);
    let samples = [s, PolarState::new(0.2, 0.8, -1.0, -0.3, 0.9)?];
    for g in [PointGenerator::rotation(), PointGenerator::time_translation(), PointGenerator::power_dilation(-2.0)] {
        println!("point symmetry {} residual = {:.2e}", g.name, point_symmetry_residual(&g, &samples, &kepler));
    }
    Ok(())
}
