//! Evaluates (L, E, Θ, T) with each reference policy and reports the apsidal
//! angle and radial period of a precessing orbit.

use central_force::integrals::*;
use central_force::potentials::{EffectivePotentialSpec, RadialPotential};

fn main() -> central_force::error::Result<()> {
    let spec = EffectivePotentialSpec::new(RadialPotential::kepler(1.0)?, 1.0)?;
    let s = PolarState::new(0.0, 1.0, 0.0, 0.5f64.sqrt(), 1.0)?;
    for kind in [ReferenceKind::TurningMin, ReferenceKind::TurningMax, ReferenceKind::Inertial] {
        let set = first_integrals(&s, &spec, ReferencePolicy::Fixed(kind), 1e-12)?;
        println!(
            "{:12} L={} E={} Theta={:+.12} T={:+.12}",
            kind.as_str(),
            set.l,
            set.e,
            set.theta.unwrap_or(f64::NAN),
            set.t.unwrap_or(f64::NAN)
        );
    }

    let circular = PolarState::new(0.0, 1.0, 0.0, 0.0, 1.0)?;
    let set = first_integrals(&circular, &spec, ReferencePolicy::Auto, 1e-12)?;
    println!("circular: Theta={:?} T={:?} ({})", set.theta, set.t, set.note.unwrap_or_default());

    let pert = EffectivePotentialSpec::new(RadialPotential::perturbed(1.0, 0.19)?, 1.0)?;
    let a = apsidal_angle(&pert, -0.25, 1e-12)?;
    let dt = radial_period(&pert, -0.25, 1e-12)?;
    println!("perturbed: Δθ = {:.10}, Δt = {dt:.10}, {}", a.delta_theta, a.verdict.describe());
    Ok(())
}
