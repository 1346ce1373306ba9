//! Integrates up to a turning point, where the integrand has an inverse
//! square-root singularity, and compares with the Kepler closed forms.

use std::f64::consts::PI;

use central_force::integrals::{Orbit, ReferenceKind, ReferencePolicy};
use central_force::potentials::{EffectivePotentialSpec, RadialPotential};
use central_force::quadrature::{adaptive_gk21, IntegrandKind};

fn main() -> central_force::error::Result<()> {
    let smooth = adaptive_gk21(|x: f64| x.sin(), 0.0, PI, 1e-13, 1e-13)?;
    println!("∫₀^π sin = {:.15} (error estimate {:.1e})", smooth.value, smooth.error);

    let spec = EffectivePotentialSpec::new(RadialPotential::kepler(1.0)?, 1.0)?;
    let orbit = Orbit::bounded(&spec, -0.25, 1e-12)?;
    let reference = orbit.reference(ReferencePolicy::Fixed(ReferenceKind::TurningMin))?;
    let r_max = orbit.r_max().unwrap_or(f64::NAN);
    let half_angle = orbit.integral(IntegrandKind::Angular, &reference, r_max, Some(0.0))?;
    let half_time = orbit.integral(IntegrandKind::Temporal, &reference, r_max, Some(0.0))?;
    println!("r_min = {:.12}, r_max = {r_max:.12}", reference.r0);
    println!("∫ L/(r²√W) between apsides = {half_angle:.15} (π = {PI:.15})");
    println!("∫ 1/√W between apsides      = {half_time:.15} (π(k/2|E|)^1.5 = {:.15})", PI * 2.0f64.powf(1.5));
    Ok(())
}
