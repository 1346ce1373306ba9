//! Classifies the motion in a few potentials and locates their equilibrium points.

use central_force::potentials::{classify_trajectory, EffectivePotentialSpec, RadialPotential};

fn main() -> central_force::error::Result<()> {
    let cases = [
        ("kepler", RadialPotential::kepler(1.0)?, 1.0, -0.25),
        ("kepler", RadialPotential::kepler(1.0)?, 1.0, -0.5),
        ("kepler", RadialPotential::kepler(1.0)?, 1.0, 0.3),
        ("perturbed", RadialPotential::perturbed(1.0, 0.19)?, 1.0, -0.25),
        ("power p=1", RadialPotential::power(1.0, 1.0)?, 1.0, 2.0),
    ];
    for (name, p, l, e) in cases {
        let eq = p.equilibrium_point()?;
        let spec = EffectivePotentialSpec::new(p, l)?;
        let c = classify_trajectory(&spec, e)?;
        println!("{name:10} L={l} E={e:5}: {:22} E_min={:?}  r_eq={:?}", c.class.as_str(), c.e_min, eq.r_eq);
    }
    let spec = EffectivePotentialSpec::new(RadialPotential::perturbed(1.0, 1.5)?, 1.0)?;
    println!("perturbed kappa=1.5: {}", classify_trajectory(&spec, -0.1).unwrap_err());
    Ok(())
}
