//! Verification suites driven by `central-force verify`.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use super::commands::Resolved;
use super::Suite;
use crate::dynamics::{integrate_polar, CartesianState};
use crate::error::{Error, Result};
use crate::geometry::{self, Normalization};
use crate::integrals::{
    self, angular_momentum, conservation_residual, energy, expected_jump, Orbit, PolarState, ReferenceKind,
    ReferencePolicy,
};
use crate::oracles::{self, OracleForce, OracleParams, Regime};
use crate::potentials::{EffectivePotentialSpec, RadialPotential, TrajectoryClass};
use crate::quadrature::IntegrandKind;
use crate::symmetry::{self, ExtPoint, JetPoint, PointGenerator, SymmetryContext, Which, CANONICAL_TABLE};

pub const CONSERVATION_REL_TOL: f64 = 1e-8;
pub const ARC_DRIFT_TOL: f64 = 1e-6;
pub const JUMP_TOL: f64 = 1e-6;
pub const REFERENCE_HIT_TOL: f64 = 1e-6;
pub const ORACLE_TOL: f64 = 1e-8;
pub const TABLE_TOL: f64 = 1e-6;
pub const COMMUTATOR_TOL: f64 = 1e-5;
pub const DETERMINING_TOL: f64 = 1e-6;
pub const NOETHER_TOL: f64 = 1e-5;
pub const POINT_SYMMETRY_TOL: f64 = 1e-9;
pub const GEOMETRY_TOL: f64 = 1e-10;
pub const LRL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value ≤ threshold` (NaN fails).
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, pass: value <= threshold }
    }

    pub fn equals(name: impl Into<String>, value: f64, expected: f64) -> Self {
        Self { name: name.into(), value, threshold: expected, pass: value == expected }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub suite: &'static str,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub pass: bool,
    /// Suite-specific data (tables, residual lists).
    pub details: Value,
}

pub fn run_suite(suite: Suite, res: &Resolved, seed: u64, samples: Option<usize>) -> Result<Report> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (name, checks, details) = match suite {
        Suite::Conservation => ("conservation", conservation(res)?, Value::Null),
        Suite::Oracle => {
            let (c, d) = oracle(res, &mut rng, samples.unwrap_or(100))?;
            ("oracle", c, d)
        }
        Suite::Symmetry => {
            let (c, d) = symmetry_suite(&mut rng, samples.unwrap_or(20))?;
            ("symmetry", c, d)
        }
        Suite::Geometry => {
            let (c, d) = geometry_suite(res, &mut rng, samples.unwrap_or(100))?;
            ("geometry", c, d)
        }
    };
    let pass = checks.iter().all(|c| c.pass);
    Ok(Report { suite: name, seed, checks, pass, details })
}

fn max_abs(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, |m, x| if x.is_nan() { f64::NAN } else { m.max(x.abs()) })
}

fn relative(drift: f64, scale: f64) -> f64 {
    if scale == 0.0 {
        drift
    } else {
        drift / scale.abs()
    }
}

/// Ten radial periods of the configured bounded orbit.
pub fn conservation(res: &Resolved) -> Result<Vec<Check>> {
    let s0 = res.initial()?.polar()?;
    let (spec, e0) = res.spec_at(&s0)?;
    let l0 = angular_momentum(&s0);
    let orbit = Orbit::from_state(&spec, &s0, res.quad_tol)?;
    if orbit.class() != TrajectoryClass::BoundedNoncircular {
        return Err(Error::ClassificationMismatch {
            expected: TrajectoryClass::BoundedNoncircular.to_string(),
            found: orbit.class().to_string(),
        });
    }
    let reference = orbit.reference(res.policy)?;
    let dtheta = 2.0 * orbit.half_separation(IntegrandKind::Angular)?;
    let dt = 2.0 * orbit.half_separation(IntegrandKind::Temporal)?;
    let traj = integrate_polar(&res.potential, s0, s0.t + 10.0 * dt, res.ode_tol)?;

    let mut checks = Vec::new();
    checks.push(Check::equals("collision", f64::from(u8::from(traj.meta.collision)), 0.0));
    // Ten periods pass at least nineteen apsides whatever the starting phase.
    let apsides = traj.apsis_events().count() as f64;
    checks.push(Check::at_most("apsis_count_deficit", (19.0 - apsides).max(0.0), 0.0));
    let l = conservation_residual(|s| Ok(angular_momentum(s)), false, &traj);
    checks.push(Check::at_most("L_relative_drift", relative(l.max_drift, l0), CONSERVATION_REL_TOL));
    let e = conservation_residual(|s| Ok(energy(s, &spec)), false, &traj);
    checks.push(Check::at_most("E_relative_drift", relative(e.max_drift, e0), CONSERVATION_REL_TOL));

    // Each state is evaluated on its own orbit; reusing the initial orbit
    // would amplify the integrator's radial error near the apsides.
    let theta = |s: &PolarState| integrals::theta_integral(s, &spec, res.policy, res.quad_tol);
    let time = |s: &PolarState| integrals::time_integral(s, &spec, res.policy, res.quad_tol);
    for (name, report, kind) in [
        ("Theta", conservation_residual(theta, true, &traj), IntegrandKind::Angular),
        ("T", conservation_residual(time, true, &traj), IntegrandKind::Temporal),
    ] {
        checks.push(Check::equals(format!("{name}_evaluation_failures"), report.failures as f64, 0.0));
        checks.push(Check::at_most(format!("{name}_arc_drift"), max_abs(report.arc_drifts.iter().copied()), ARC_DRIFT_TOL));
        let mut worst: f64 = 0.0;
        for (at, jump) in &report.jumps {
            let want = expected_jump(&orbit, &reference, kind, *at)?;
            worst = worst.max((jump - want).abs());
        }
        checks.push(Check::at_most(format!("{name}_jump_error"), worst, JUMP_TOL));
    }

    // The state at time T + mΔt is the reference point, at angle Θ + mΔθ.
    let big_t = time(&s0)?;
    let big_theta = theta(&s0)?;
    let m = ((s0.t - big_t) / dt).ceil();
    let t_hit = big_t + m * dt;
    let hit = traj
        .interpolate(t_hit)
        .ok_or_else(|| Error::InvalidInput(format!("reference time {t_hit} outside the integrated span")))?;
    checks.push(Check::at_most("reference_r_error", (hit.r - reference.r0).abs(), REFERENCE_HIT_TOL));
    checks.push(Check::at_most(
        "reference_theta_error",
        (hit.theta - (big_theta + m * dtheta)).abs(),
        REFERENCE_HIT_TOL,
    ));
    Ok(checks)
}

/// Random `(L, E)` in `regime` with `|L| ∈ [0.5, 2]` and random sign of `L`.
/// `k` is drawn from `[0.5, 2]` unless given.
pub fn random_oracle_params(
    rng: &mut impl Rng,
    k: Option<f64>,
    kappa: Option<f64>,
    regime: Regime,
    branch: ReferenceKind,
) -> Result<OracleParams> {
    for _ in 0..1000 {
        let k: f64 = k.unwrap_or_else(|| rng.gen_range(0.5..2.0));
        let force = match kappa {
            None => OracleForce::Kepler { k },
            Some(kappa) => OracleForce::Perturbed { k, kappa },
        };
        let l_abs: f64 = rng.gen_range(0.5..2.0);
        if force.kappa() >= 0.8 * l_abs * l_abs {
            continue;
        }
        let l = if rng.gen_bool(0.5) { l_abs } else { -l_abs };
        let e_min = -k * k / (2.0 * (l * l - force.kappa()));
        let e = match regime {
            Regime::NegE => e_min * rng.gen_range(0.1..0.9),
            Regime::ZeroE => 0.0,
            Regime::PosE => rng.gen_range(0.05..1.5),
        };
        if let Ok(p) = OracleParams::new(force, l, e, branch) {
            return Ok(p);
        }
    }
    Err(Error::InvalidInput("could not sample oracle parameters".into()))
}

/// Random on-shell state at least `margin` (relative) inside the turning points.
pub fn random_oracle_state(rng: &mut impl Rng, p: &OracleParams, margin: f64) -> Result<PolarState> {
    let sp = oracles::special_points(p);
    let lo = sp.r_min * (1.0 + margin);
    let hi = sp.r_max.map_or(8.0 * sp.r_min, |r| r * (1.0 - margin));
    let r = rng.gen_range(lo..hi);
    let w = 2.0 * (p.e - p.force.u(r)) - p.l * p.l / (r * r);
    let v = if rng.gen_bool(0.5) { w.sqrt() } else { -w.sqrt() };
    PolarState::new(rng.gen_range(-5.0..5.0), r, rng.gen_range(-3.0..3.0), v, p.l / (r * r))
}

const BRANCHES: [ReferenceKind; 3] = [ReferenceKind::TurningMin, ReferenceKind::TurningMax, ReferenceKind::Inertial];
const REGIMES: [Regime; 3] = [Regime::NegE, Regime::ZeroE, Regime::PosE];

/// Closed forms against quadrature for every regime/reference combination.
pub fn oracle(res: &Resolved, rng: &mut ChaCha8Rng, samples: usize) -> Result<(Vec<Check>, Value)> {
    let mut checks = Vec::new();
    let mut combos = Vec::new();
    for (label, kappa) in [("kepler", None), ("perturbed", Some(0.19))] {
        for regime in REGIMES {
            for branch in BRANCHES {
                if branch == ReferenceKind::TurningMax && regime != Regime::NegE {
                    continue;
                }
                let (mut d_theta, mut d_t): (f64, f64) = (0.0, 0.0);
                for _ in 0..samples {
                    let p = random_oracle_params(rng, None, kappa, regime, branch)?;
                    let s = random_oracle_state(rng, &p, 0.02)?;
                    let spec = EffectivePotentialSpec::new(p.force.potential()?, p.l)?;
                    let policy = ReferencePolicy::Fixed(branch);
                    let th = integrals::theta_integral(&s, &spec, policy, res.quad_tol)?;
                    let t = integrals::time_integral(&s, &spec, policy, res.quad_tol)?;
                    d_theta = d_theta.max((th - oracles::theta_closed(&s, &p)?).abs());
                    d_t = d_t.max((t - oracles::time_closed(&s, &p)?).abs());
                }
                let name = format!("{label}_{regime:?}_{}", branch.as_str());
                checks.push(Check::at_most(format!("{name}_Theta"), d_theta, ORACLE_TOL));
                checks.push(Check::at_most(format!("{name}_T"), d_t, ORACLE_TOL));
                combos.push(name);
            }
        }
        // Separations between the two apsides.
        let mut d_sep: f64 = 0.0;
        for _ in 0..samples.min(20) {
            let p = random_oracle_params(rng, None, kappa, Regime::NegE, ReferenceKind::TurningMin)?;
            let spec = EffectivePotentialSpec::new(p.force.potential()?, p.l)?;
            let (half_theta, half_t) = oracles::half_separations(&p)?;
            let angle = integrals::apsidal_angle(&spec, p.e, res.quad_tol)?.delta_theta;
            let period = integrals::radial_period(&spec, p.e, res.quad_tol)?;
            d_sep = d_sep.max(((angle.abs() - 2.0 * half_theta.abs()) / angle).abs());
            d_sep = d_sep.max(((period - 2.0 * half_t) / period).abs());
        }
        checks.push(Check::at_most(format!("{label}_separations_relative"), d_sep, ORACLE_TOL));
    }
    Ok((checks, json!({ "combinations": combos, "samples_per_combination": samples })))
}

fn table_at(s: &PolarState, ctx: &SymmetryContext) -> Result<[[f64; 4]; 4]> {
    let mut t = [[0.0; 4]; 4];
    for (row, w) in Which::ALL.iter().enumerate() {
        t[row] = symmetry::action_on_integrals(*w, s, ctx, None)?;
    }
    Ok(t)
}

pub fn symmetry_suite(rng: &mut ChaCha8Rng, samples: usize) -> Result<(Vec<Check>, Value)> {
    let mut checks = Vec::new();
    let kepler = RadialPotential::kepler(1.0)?;
    let forces = [(None, "kepler"), (Some(0.19), "perturbed")];

    let mut table = None;
    let mut table_dev: f64 = 0.0;
    for (kappa, _) in forces {
        let force = kappa.map_or(OracleForce::Kepler { k: 1.0 }, |kappa| OracleForce::Perturbed { k: 1.0, kappa });
        let ctx = SymmetryContext::new(force.potential()?, ReferenceKind::TurningMin);
        for _ in 0..samples {
            let p = random_oracle_params(rng, Some(force.k()), kappa, Regime::NegE, ReferenceKind::TurningMin)?;
            let s = random_oracle_state(rng, &p, 0.05)?;
            let t = table_at(&s, &ctx)?;
            for r in 0..4 {
                for c in 0..4 {
                    table_dev = table_dev.max((t[r][c] - CANONICAL_TABLE[r][c]).abs());
                }
            }
            table.get_or_insert(t);
        }
    }
    checks.push(Check::at_most("action_table_deviation", table_dev, TABLE_TOL));

    let ctx = SymmetryContext::new(kepler.clone(), ReferenceKind::TurningMin);
    let orbit = OracleParams::new(OracleForce::Kepler { k: 1.0 }, 1.0, -0.25, ReferenceKind::TurningMin)?;
    let points: Vec<ExtPoint> = (0..samples)
        .map(|_| ctx.point_from_state(&random_oracle_state(rng, &orbit, 0.05)?))
        .collect::<Result<_>>()?;
    let mut commutators = Vec::new();
    for i in 0..4 {
        for j in i + 1..4 {
            let mut worst: f64 = 0.0;
            for p in &points {
                worst = worst.max(symmetry::commutator_residual(Which::ALL[i], Which::ALL[j], p, &ctx)?);
            }
            let name = format!("commutator_{}_{}", Which::ALL[i].as_str(), Which::ALL[j].as_str());
            checks.push(Check::at_most(name.clone(), worst, COMMUTATOR_TOL));
            commutators.push(json!({"pair": [Which::ALL[i].as_str(), Which::ALL[j].as_str()], "residual": worst}));
        }
    }

    let mut determining = serde_json::Map::new();
    for (kappa, label) in forces {
        let force = kappa.map_or(OracleForce::Kepler { k: 1.0 }, |kappa| OracleForce::Perturbed { k: 1.0, kappa });
        let ctx = SymmetryContext::new(force.potential()?, ReferenceKind::TurningMin);
        let op = OracleParams::new(force, 1.0, -0.25, ReferenceKind::TurningMin)?;
        let sp = oracles::special_points(&op);
        let (lo, hi) = (sp.r_min * 1.05, sp.r_max.unwrap_or(2.0 * sp.r_min) * 0.95);
        let grid: Vec<f64> = (0..=16).map(|i| lo + (hi - lo) * f64::from(i) / 16.0).collect();
        for sgn in [1.0, -1.0] {
            for g in symmetry::solve_special_symmetries(&ctx, 1.0, -0.25, sgn, &grid)? {
                let r = symmetry::recovery_residual(&g, &ctx, sgn, 1.0, -0.25)?;
                let key = format!("{label}_{}", g.which.as_str());
                let prev = determining.get(&key).and_then(Value::as_f64).unwrap_or(0.0);
                determining.insert(key, json!(prev.max(r)));
            }
        }
    }
    for (k, v) in &determining {
        checks.push(Check::at_most(format!("determining_{k}"), v.as_f64().unwrap_or(f64::NAN), DETERMINING_TOL));
    }

    let theta = |s: &PolarState| Ok(ctx.integrals_at(&ctx.point_from_state(s)?)?.0);
    let time = |s: &PolarState| Ok(ctx.integrals_at(&ctx.point_from_state(s)?)?.1);
    let (mut n_theta, mut n_time): (f64, f64) = (0.0, 0.0);
    for _ in 0..samples {
        let s = random_oracle_state(rng, &orbit, 0.05)?;
        let jp = JetPoint { state: s, a_r: rng.gen_range(-2.0..2.0), a_theta: rng.gen_range(-2.0..2.0) };
        n_theta = n_theta.max(symmetry::noether_identity_residual(theta, &jp, &kepler, None)?);
        n_time = n_time.max(symmetry::noether_identity_residual(time, &jp, &kepler, None)?);
    }
    checks.push(Check::at_most("noether_Theta", n_theta, NOETHER_TOL));
    checks.push(Check::at_most("noether_T", n_time, NOETHER_TOL));

    let jets: Vec<PolarState> = (0..30)
        .map(|_| {
            PolarState::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.5..2.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            )
        })
        .collect::<Result<_>>()?;
    for (name, gen) in [
        ("rotation", PointGenerator::rotation()),
        ("time_translation", PointGenerator::time_translation()),
        ("kepler_dilation", PointGenerator::power_dilation(-2.0)),
    ] {
        checks.push(Check::at_most(
            format!("point_symmetry_{name}"),
            symmetry::point_symmetry_residual(&gen, &jets, &kepler),
            POINT_SYMMETRY_TOL,
        ));
    }

    let details = json!({
        "table": table,
        "commutators": commutators,
        "determining_residuals": determining,
    });
    Ok((checks, details))
}

fn unit_random(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.1 && norm <= 1.0 {
            return v.iter().map(|x| x / norm).collect();
        }
    }
}

/// A random bound Kepler (`k = 1`) state in `n` dimensions that is neither
/// radial, circular nor within 1% (in `W`) of an apsis.
pub fn random_kepler_state(rng: &mut ChaCha8Rng, n: usize) -> Result<CartesianState> {
    loop {
        let r: f64 = rng.gen_range(0.5..2.0);
        let rhat = unit_random(rng, n);
        let vhat = unit_random(rng, n);
        let speed = (2.0 / r).sqrt() * rng.gen_range(0.3..0.9);
        let s = CartesianState::new(rng.gen_range(-2.0..2.0), rhat.iter().map(|x| r * x).collect(), vhat.iter().map(|x| speed * x).collect())?;
        let vr = s.radial_speed();
        if vr.abs() < 0.1 * speed || vr.abs() > 0.95 * speed {
            continue;
        }
        return Ok(s);
    }
}

pub fn geometry_suite(res: &Resolved, rng: &mut ChaCha8Rng, samples: usize) -> Result<(Vec<Check>, Value)> {
    let k = 1.0;
    let kepler = RadialPotential::kepler(k)?;
    let mut checks = Vec::new();
    let mut ranks = serde_json::Map::new();
    for n in [2usize, 3, 5, 8] {
        let (mut unit, mut th_l, mut a_l, mut l_l, mut a_norm, mut variant): (f64, f64, f64, f64, f64, f64) =
            (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        for _ in 0..samples {
            let s = random_kepler_state(rng, n)?;
            let b = geometry::bivector_from_state(&s)?;
            let lc = b.components();
            let d = geometry::lrl_vector(&s, &kepler, res.policy, Normalization::Default, res.quad_tol)?;
            unit = unit.max((d.theta_hat.iter().map(|x| x * x).sum::<f64>().sqrt() - 1.0).abs());
            th_l = th_l.max(geometry::wedge_vector_bivector_max(&d.theta_hat, &lc));
            a_l = a_l.max(geometry::wedge_vector_bivector_max(&d.a, &lc));
            l_l = l_l.max(geometry::wedge_bivector_self_max(&lc, n));

            let red = crate::dynamics::reduce_to_plane(&s)?;
            let l = angular_momentum(&red.polar);
            let spec = EffectivePotentialSpec::new(kepler.clone(), l)?;
            let e = energy(&red.polar, &spec);
            let star = geometry::kepler_lrl(&s, k);
            let star_norm = star.iter().map(|x| x * x).sum::<f64>().sqrt();
            let want = (2.0 * e * l * l + k * k).sqrt();
            a_norm = a_norm.max((star_norm - want).abs() / want);

            let lhat = b.unit().ok_or_else(|| Error::InvalidInput("radial sample".into()))?.components();
            let sgn_v = red.polar.v.signum();
            let rotated: Vec<f64> = geometry::contract(&star, &lhat).iter().map(|x| x * sgn_v).collect();
            let var = geometry::lrl_variant(&s, &kepler, Normalization::Default, res.quad_tol)?;
            variant = variant.max(max_abs(var.iter().zip(&rotated).map(|(x, y)| x - y)));
        }
        checks.push(Check::at_most(format!("n{n}_theta_hat_unit"), unit, GEOMETRY_TOL));
        checks.push(Check::at_most(format!("n{n}_theta_hat_wedge_L"), th_l, GEOMETRY_TOL));
        checks.push(Check::at_most(format!("n{n}_A_wedge_L"), a_l, GEOMETRY_TOL));
        checks.push(Check::at_most(format!("n{n}_L_wedge_L"), l_l, GEOMETRY_TOL));
        checks.push(Check::at_most(format!("n{n}_kepler_A_norm_relative"), a_norm, LRL_TOL));
        checks.push(Check::at_most(format!("n{n}_variant_vs_rotated_kepler"), variant, LRL_TOL));

        let mut min_rank = usize::MAX;
        for _ in 0..samples.clamp(1, 3) {
            let s = random_kepler_state(rng, n)?;
            min_rank = min_rank.min(geometry::jacobian_rank(&s, &kepler, res.policy)?);
        }
        checks.push(Check::equals(format!("n{n}_jacobian_rank"), min_rank as f64, (2 * n) as f64));
        ranks.insert(n.to_string(), json!(min_rank));
    }
    Ok((checks, json!({ "jacobian_ranks": ranks })))
}
