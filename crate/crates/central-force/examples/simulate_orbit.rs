//! Integrates a precessing orbit, lists its apsis events and checks that Θ
//! stays constant between apsides while L and E are conserved.

use central_force::dynamics::integrate_polar;
use central_force::integrals::*;
use central_force::potentials::{EffectivePotentialSpec, RadialPotential};

fn main() -> central_force::error::Result<()> {
    let p = RadialPotential::perturbed(1.0, 0.19)?;
    let spec = EffectivePotentialSpec::new(p.clone(), 1.0)?;
    let s0 = PolarState::new(0.0, 1.0, 0.0, 0.405f64.sqrt(), 1.0)?;
    let e = energy(&s0, &spec);
    let period = radial_period(&spec, e, 1e-12)?;
    let traj = integrate_polar(&p, s0, 3.0 * period, 1e-10)?;
    println!("{} steps, {} rejected", traj.meta.steps, traj.meta.rejected);
    for ev in traj.apsis_events() {
        println!("  {:?} at t = {:.9}, r = {:.9}, θ = {:.9}", ev.kind, ev.t, ev.state.r, ev.state.theta);
    }
    let policy = ReferencePolicy::Fixed(ReferenceKind::TurningMin);
    let theta = conservation_residual(|s| theta_integral(s, &spec, policy, 1e-12), true, &traj);
    let energy_drift = conservation_residual(|s| Ok(energy(s, &spec)), false, &traj).max_drift;
    println!("E drift {energy_drift:.2e}; Theta drift within arcs {:.2e}", theta.arc_drifts.iter().cloned().fold(0.0, f64::max));
    for (at, jump) in &theta.jumps {
        println!("  Theta jumps by {jump:+.9} across {at:?}");
    }
    Ok(())
}
