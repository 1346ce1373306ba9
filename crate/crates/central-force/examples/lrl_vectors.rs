//! The generalized Laplace-Runge-Lenz vector of a 3-dimensional Kepler orbit
//! and its comparison with the classical vector.

use central_force::dynamics::{integrate_ndim, CartesianState};
use central_force::geometry::*;
use central_force::integrals::ReferencePolicy;
use central_force::potentials::RadialPotential;

fn main() -> central_force::error::Result<()> {
    let k = RadialPotential::kepler(1.0)?;
    let s0 = CartesianState::new(0.0, vec![1.0, 0.0, 0.0], vec![0.3, 0.8, 0.2])?;
    let traj = integrate_ndim(&k, &s0, 20.0, 1e-11)?;
    for t in [0.0, 5.0, 10.0, 20.0] {
        let s = traj.interpolate(t).unwrap_or_else(|| s0.clone());
        let d = lrl_vector(&s, &k, ReferencePolicy::Auto, Normalization::Default, 1e-12)?;
        let classical = kepler_lrl(&s, 1.0);
        println!("t = {t:5.1}  A = {:+.9?}  classical = {:+.9?}", d.a, classical);
    }
    let b = bivector_from_state(&s0)?;
    println!("L components (row-major): {:?}", b.components());
    for n in 2..=5 {
        let c = count_independent(n)?;
        println!("n = {n}: {} independent quantities", c.total_independent);
    }
    Ok(())
}
