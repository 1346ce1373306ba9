//! One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use central_force::cli::commands::Resolved;
use central_force::cli::config::RunConfig;
use central_force::cli::verify::{self, random_oracle_params, random_oracle_state};
use central_force::cli::{SharedArgs, Suite};
use central_force::dynamics::integrate_polar;
use central_force::error::{Error, Result};
use central_force::integrals::*;
use central_force::oracles::{self, OracleForce, OracleParams, Regime};
use central_force::potentials::{classify_trajectory, CustomPotential, EffectivePotentialSpec, RadialPotential};
use central_force::symmetry::{self, JetPoint, PointGenerator, SymmetryContext, Which};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const QUAD_TOL: f64 = 1e-12;
const ODE_TOL: f64 = 1e-10;

const C1_ABS_TOL: f64 = 1e-8;
const C1_BUDGET: Duration = Duration::from_secs(5);
const C2_REL_TOL: f64 = 1e-8;
const C3_REL_TOL: f64 = 1e-8;
const C4_TOL: f64 = 1e-8;
const C4_BUDGET: Duration = Duration::from_secs(20);
const C6_TOL: f64 = 1e-6;
const C8_POINT_TOL: f64 = 1e-9;
const C8_NOETHER_TOL: f64 = 1e-5;
const C9_TOL: f64 = 1e-6;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn random_negative_e(g: &mut ChaCha8Rng) -> (f64, f64, f64) {
    let k = g.gen_range(0.5..2.0);
    let l: f64 = g.gen_range(0.5..2.0) * if g.gen_bool(0.5) { 1.0 } else { -1.0 };
    let e = -k * k / (2.0 * l * l) * g.gen_range(0.05..0.95);
    (k, l, e)
}

fn kepler_grid() -> Vec<(f64, f64, f64)> {
    let mut g = ChaCha8Rng::seed_from_u64(1001);
    (0..50).map(|_| random_negative_e(&mut g)).collect()
}

fn criterion_1() -> Result<Outcome> {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for (k, l, e) in kepler_grid() {
        let spec = EffectivePotentialSpec::new(RadialPotential::kepler(k)?, l)?;
        worst = worst.max((apsidal_angle(&spec, e, QUAD_TOL)?.delta_theta.abs() - 2.0 * PI).abs());
    }
    let elapsed = start.elapsed();
    Ok(outcome(
        worst <= C1_ABS_TOL && elapsed < C1_BUDGET,
        format!("max |Δθ - 2π| = {worst:.3e} (tol {C1_ABS_TOL:e}), {:.2} s", elapsed.as_secs_f64()),
    ))
}

fn criterion_2() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for (k, l, e) in kepler_grid() {
        let spec = EffectivePotentialSpec::new(RadialPotential::kepler(k)?, l)?;
        let want = PI * k / (2.0 * e.abs().powi(3)).sqrt();
        worst = worst.max(((radial_period(&spec, e, QUAD_TOL)? - want) / want).abs());
    }
    Ok(outcome(worst <= C2_REL_TOL, format!("max relative period error = {worst:.3e} (tol {C2_REL_TOL:e})")))
}

fn criterion_3() -> Result<Outcome> {
    let (k, l, e) = (1.0, 1.0, -0.25);
    let (mut angle, mut period): (f64, f64) = (0.0, 0.0);
    for kappa in [0.04, 0.19, 0.36, 0.64] {
        let spec = EffectivePotentialSpec::new(RadialPotential::perturbed(k, kappa)?, l)?;
        let want = 2.0 * PI * l / (l * l - kappa).sqrt();
        angle = angle.max(((apsidal_angle(&spec, e, QUAD_TOL)?.delta_theta - want) / want).abs());
        let want_t = PI * k / (2.0 * e.abs().powi(3)).sqrt();
        period = period.max(((radial_period(&spec, e, QUAD_TOL)? - want_t) / want_t).abs());
    }
    Ok(outcome(
        angle <= C3_REL_TOL && period <= C3_REL_TOL,
        format!("relative errors: angle {angle:.3e}, period {period:.3e} (tol {C3_REL_TOL:e})"),
    ))
}

fn criterion_4() -> Result<Outcome> {
    let start = Instant::now();
    let mut g = ChaCha8Rng::seed_from_u64(1004);
    let mut worst: f64 = 0.0;
    let mut combos = 0;
    for kappa in [None, Some(0.19)] {
        for regime in [Regime::NegE, Regime::ZeroE, Regime::PosE] {
            for branch in [ReferenceKind::TurningMin, ReferenceKind::TurningMax, ReferenceKind::Inertial] {
                if branch == ReferenceKind::TurningMax && regime != Regime::NegE {
                    continue;
                }
                combos += 1;
                for _ in 0..100 {
                    let p = random_oracle_params(&mut g, None, kappa, regime, branch)?;
                    let s = random_oracle_state(&mut g, &p, 0.02)?;
                    let spec = EffectivePotentialSpec::new(p.force.potential()?, p.l)?;
                    let policy = ReferencePolicy::Fixed(branch);
                    let dth = (theta_integral(&s, &spec, policy, QUAD_TOL)? - oracles::theta_closed(&s, &p)?).abs();
                    let dt = (time_integral(&s, &spec, policy, QUAD_TOL)? - oracles::time_closed(&s, &p)?).abs();
                    worst = worst.max(dth).max(dt);
                }
            }
        }
    }
    let elapsed = start.elapsed();
    Ok(outcome(
        worst <= C4_TOL && elapsed < C4_BUDGET,
        format!("{combos} combinations x 100 states, max deviation {worst:.3e} (tol {C4_TOL:e}), {:.2} s", elapsed.as_secs_f64()),
    ))
}

fn shared(ode_tol: Option<f64>) -> SharedArgs {
    SharedArgs { ode_tol, ..SharedArgs::default() }
}

fn criterion_5() -> Result<Outcome> {
    let mut perturbed = RunConfig::default_kepler();
    perturbed.potential.kind = "perturbed".into();
    perturbed.potential.kappa = Some(0.19);
    let mut failed = Vec::new();
    let mut n = 0;
    for (label, cfg) in [("kepler", RunConfig::default_kepler()), ("perturbed", perturbed)] {
        let res = Resolved::from_config(cfg, &shared(Some(ODE_TOL)))?;
        for c in verify::conservation(&res)? {
            n += 1;
            if !c.pass {
                failed.push(format!("{label}:{}={:.3e}", c.name, c.value));
            }
        }
    }
    Ok(outcome(failed.is_empty(), format!("{n} checks over 10 radial periods, failures: {failed:?}")))
}

fn criterion_6() -> Result<Outcome> {
    let mut g = ChaCha8Rng::seed_from_u64(1006);
    let (mut dr, mut dth): (f64, f64) = (0.0, 0.0);
    for regime in [Regime::NegE, Regime::ZeroE, Regime::PosE] {
        for branch in [ReferenceKind::TurningMin, ReferenceKind::Inertial] {
            for _ in 0..5 {
                let p = random_oracle_params(&mut g, None, None, regime, branch)?;
                let s = random_oracle_state(&mut g, &p, 0.05)?;
                let pot = p.force.potential()?;
                let spec = EffectivePotentialSpec::new(pot.clone(), p.l)?;
                let set = first_integrals(&s, &spec, ReferencePolicy::Fixed(branch), QUAD_TOL)?;
                let (big_t, big_theta) = (set.t.unwrap_or(f64::NAN), set.theta.unwrap_or(f64::NAN));
                let r0 = set.reference.map_or(f64::NAN, |r| r.r0);
                let traj = integrate_polar(&pot, s, big_t, ODE_TOL)?;
                let hit = traj.interpolate(big_t).ok_or_else(|| Error::InvalidInput("T outside span".into()))?;
                dr = dr.max((hit.r - r0).abs());
                dth = dth.max((hit.theta - big_theta).abs());
            }
        }
    }
    Ok(outcome(
        dr <= C6_TOL && dth <= C6_TOL,
        format!("max |r(T) - r0| = {dr:.3e}, max |θ(T) - Θ| = {dth:.3e} (tol {C6_TOL:e})"),
    ))
}

fn suite(s: Suite, samples: usize) -> Result<Outcome> {
    let res = Resolved::from_config(RunConfig::default_kepler(), &shared(None))?;
    let report = verify::run_suite(s, &res, 0, Some(samples))?;
    let failed: Vec<String> =
        report.checks.iter().filter(|c| !c.pass).map(|c| format!("{}={:.3e}", c.name, c.value)).collect();
    Ok(outcome(report.pass, format!("{} checks, failures: {failed:?}", report.checks.len())))
}

fn criterion_7() -> Result<Outcome> {
    suite(Suite::Geometry, 100)
}

fn oscillator_plus_inverse_cube(k: f64, kt: f64) -> Result<RadialPotential> {
    let c = CustomPotential::new(
        "oscillator-plus-inverse-cube",
        move |r: f64| -k * r * r / 2.0 + kt / (2.0 * r * r),
        move |r: f64| -k * r - kt / (r * r * r),
        f64::INFINITY,
        (0.1, 10.0),
    )?
    .with_second_derivative(move |r: f64| -k + 3.0 * kt / r.powi(4));
    Ok(RadialPotential::custom(c))
}

fn criterion_8() -> Result<Outcome> {
    let table_and_commutators = suite(Suite::Symmetry, 20)?;

    let mut g = ChaCha8Rng::seed_from_u64(1008);
    let jets: Vec<PolarState> = (0..30)
        .map(|_| {
            PolarState::new(
                g.gen_range(-1.0..1.0),
                g.gen_range(0.5..2.0),
                g.gen_range(-3.0..3.0),
                g.gen_range(-1.0..1.0),
                g.gen_range(-1.0..1.0),
            )
        })
        .collect::<Result<_>>()?;
    let mut point: f64 = 0.0;
    let general = [RadialPotential::perturbed(1.0, 0.19)?, oscillator_plus_inverse_cube(1.0, 1.0)?];
    for p in &general {
        point = point.max(symmetry::point_symmetry_residual(&PointGenerator::rotation(), &jets, p));
        point = point.max(symmetry::point_symmetry_residual(&PointGenerator::time_translation(), &jets, p));
    }
    for (k, exponent) in [(-1.0, -2.0), (-1.0, 2.0), (-0.5, 3.0)] {
        let p = RadialPotential::power(k, exponent)?;
        point = point.max(symmetry::point_symmetry_residual(&PointGenerator::power_dilation(exponent), &jets, &p));
    }
    let osc = oscillator_plus_inverse_cube(1.0, 1.0)?;
    for plus in [true, false] {
        point = point.max(symmetry::point_symmetry_residual(&PointGenerator::time_dependent_dilation(1.0, plus), &jets, &osc));
    }

    let kepler = RadialPotential::kepler(1.0)?;
    let ctx = SymmetryContext::new(kepler.clone(), ReferenceKind::TurningMin);
    let orbit = OracleParams::new(OracleForce::Kepler { k: 1.0 }, 1.0, -0.25, ReferenceKind::TurningMin)?;
    let mut noether: f64 = 0.0;
    for _ in 0..50 {
        let s = random_oracle_state(&mut g, &orbit, 0.05)?;
        let jp = JetPoint { state: s, a_r: g.gen_range(-2.0..2.0), a_theta: g.gen_range(-2.0..2.0) };
        let theta = |s: &PolarState| Ok(ctx.integrals_at(&ctx.point_from_state(s)?)?.0);
        let time = |s: &PolarState| Ok(ctx.integrals_at(&ctx.point_from_state(s)?)?.1);
        noether = noether.max(symmetry::noether_identity_residual(theta, &jp, &kepler, None)?);
        noether = noether.max(symmetry::noether_identity_residual(time, &jp, &kepler, None)?);
    }
    let pass = table_and_commutators.pass && point <= C8_POINT_TOL && noether <= C8_NOETHER_TOL;
    Ok(outcome(
        pass,
        format!(
            "table/commutators: {}; point residual {point:.3e} (tol {C8_POINT_TOL:e}); Noether residual {noether:.3e} (tol {C8_NOETHER_TOL:e})",
            table_and_commutators.detail
        ),
    ))
}

fn criterion_9() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for force in [OracleForce::Kepler { k: 1.0 }, OracleForce::Perturbed { k: 1.0, kappa: 0.19 }] {
        let ctx = SymmetryContext::new(force.potential()?, ReferenceKind::TurningMin);
        let op = OracleParams::new(force, 1.0, -0.25, ReferenceKind::TurningMin)?;
        let sp = oracles::special_points(&op);
        let (lo, hi) = (sp.r_min * 1.05, sp.r_max.unwrap_or(f64::NAN) * 0.95);
        let grid: Vec<f64> = (0..=16).map(|i| lo + (hi - lo) * f64::from(i) / 16.0).collect();
        for sgn in [1.0, -1.0] {
            for rec in symmetry::solve_special_symmetries(&ctx, 1.0, -0.25, sgn, &grid)? {
                if matches!(rec.which, Which::XTheta | Which::XT) {
                    worst = worst.max(symmetry::recovery_residual(&rec, &ctx, sgn, 1.0, -0.25)?);
                }
            }
        }
    }
    Ok(outcome(worst <= C9_TOL, format!("max |recovered - generator| = {worst:.3e} (tol {C9_TOL:e})")))
}

fn criterion_10() -> Result<Outcome> {
    let mut notes = Vec::new();
    let kepler = RadialPotential::kepler(1.0)?;
    let spec = EffectivePotentialSpec::new(kepler, 1.0)?;
    let circ = PolarState::new(0.0, 1.0, 0.0, 0.0, 1.0)?;
    let set = first_integrals(&circ, &spec, ReferencePolicy::Auto, QUAD_TOL)?;
    let circular_ok = set.theta.is_none()
        && set.t.is_none()
        && theta_integral(&circ, &spec, ReferencePolicy::Auto, QUAD_TOL) == Err(Error::UndefinedForCircular)
        && time_integral(&circ, &spec, ReferencePolicy::Auto, QUAD_TOL) == Err(Error::UndefinedForCircular);
    notes.push(format!("circular undefined: {circular_ok}"));

    let pert = EffectivePotentialSpec::new(RadialPotential::perturbed(1.0, 1.5)?, 1.0)?;
    let kappa_ok = matches!(classify_trajectory(&pert, -0.1), Err(Error::NoBoundedTrajectories { .. }));
    notes.push(format!("kappa >= L^2 rejected: {kappa_ok}"));

    let res = Resolved::from_config(RunConfig::default_kepler(), &shared(Some(1e-2)))?;
    let report = verify::run_suite(Suite::Conservation, &res, 0, None)?;
    let bin = Command::new(env!("CARGO_BIN_EXE_central-force"))
        .args(["verify", "--suite", "conservation", "--ode-tol", "1e-2"])
        .output()
        .map_err(|e| Error::Io(e.to_string()))?;
    let corrupted_ok = !report.pass && bin.status.code() == Some(1);
    notes.push(format!("corrupted ode_tol fails with exit {:?}: {corrupted_ok}", bin.status.code()));
    Ok(outcome(circular_ok && kappa_ok && corrupted_ok, notes.join("; ")))
}

fn main() {
    let criteria: [(u32, fn() -> Result<Outcome>); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let mut all = true;
    for (n, f) in criteria {
        let o = f().unwrap_or_else(|e| outcome(false, format!("error: {e}")));
        all &= o.pass;
        println!("criterion {n}: {} {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if !all {
        std::process::exit(1);
    }
}
