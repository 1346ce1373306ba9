use std::path::PathBuf;

use serde::Serialize;
use serde_json::{json, Value};

use super::config::{parse_reference, InitialState, PotentialConfig, RunConfig, DEFAULT_ODE_TOL, DEFAULT_QUAD_TOL};
use super::output::{to_json, trajectory_csv, write_file};
use super::{Cli, Command, ForceArgs, SharedArgs, EXIT_FAILURE, EXIT_OK};
use crate::dynamics::{embed_to_ndim, integrate_ndim, integrate_polar, CartesianState, NdimTrajectory};
use crate::error::{Error, Result};
use crate::geometry::{self, Normalization, PlaneFrame};
use crate::integrals::{self, angular_momentum, energy, mod_2pi, PolarState, ReferencePolicy};
use crate::potentials::{classify_trajectory, EffectivePotentialSpec, PotentialKind, RadialPotential, TrajectoryClass};

/// Configuration merged from the config file, the shared flags and defaults.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub cfg: RunConfig,
    pub ode_tol: f64,
    pub quad_tol: f64,
    pub policy: ReferencePolicy,
    pub potential: RadialPotential,
    pub u_eq: f64,
    pub n: Option<usize>,
    pub out: Option<PathBuf>,
}

fn positive(name: &str, x: Option<f64>) -> Result<Option<f64>> {
    match x {
        Some(v) if !(v > 0.0 && v.is_finite()) => {
            Err(Error::Config(format!("--{name}: must be a positive finite number, found {v}")))
        }
        _ => Ok(x),
    }
}

impl Resolved {
    pub fn from_args(shared: &SharedArgs) -> Result<Self> {
        let cfg = match &shared.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default_kepler(),
        };
        Self::from_config(cfg, shared)
    }

    pub fn from_config(cfg: RunConfig, shared: &SharedArgs) -> Result<Self> {
        let ode_tol = positive("ode-tol", shared.ode_tol)?.or(cfg.ode_tol).unwrap_or(DEFAULT_ODE_TOL);
        let quad_tol = positive("quad-tol", shared.quad_tol)?.or(cfg.quad_tol).unwrap_or(DEFAULT_QUAD_TOL);
        let policy = match (shared.reference, &cfg.reference) {
            (Some(r), _) => r.policy(),
            (None, Some(s)) => parse_reference(s)?,
            (None, None) => ReferencePolicy::Auto,
        };
        if let Some(n) = shared.n {
            if !(2..=8).contains(&n) {
                return Err(Error::Config(format!("--n: dimension must lie in 2..=8, found {n}")));
            }
        }
        let potential = cfg.potential.build()?;
        let u_eq = cfg.potential.u_eq(&potential).map_err(|e| {
            Error::Config(format!("potential.u_eq: required because the equilibrium point is unavailable ({e})"))
        })?;
        Ok(Self { cfg, ode_tol, quad_tol, policy, potential, u_eq, n: shared.n, out: shared.out.clone() })
    }

    pub fn spec(&self, l: f64) -> Result<EffectivePotentialSpec> {
        EffectivePotentialSpec::with_u_eq(self.potential.clone(), l, self.u_eq)
    }

    pub fn initial(&self) -> Result<InitialState> {
        self.cfg.initial_state()
    }

    /// Spec at the state's own angular momentum, together with its energy.
    pub fn spec_at(&self, s: &PolarState) -> Result<(EffectivePotentialSpec, f64)> {
        let spec = self.spec(angular_momentum(s))?;
        let e = energy(s, &spec);
        Ok((spec, e))
    }

    /// Default end time: three radial periods for bounded motion, else ten time units.
    pub fn default_t_end(&self, s: &PolarState) -> f64 {
        let Ok((spec, e)) = self.spec_at(s) else { return s.t + 10.0 };
        let bounded = classify_trajectory(&spec, e).map(|c| c.class == TrajectoryClass::BoundedNoncircular);
        match bounded {
            Ok(true) => integrals::radial_period(&spec, e, self.quad_tol).map_or(s.t + 10.0, |p| s.t + 3.0 * p),
            _ => s.t + 10.0,
        }
    }

    /// Writes `doc` to `--out` (or the config's report path), else prints it.
    pub fn emit(&self, doc: &impl Serialize) -> Result<()> {
        let text = to_json(doc)?;
        match self.out.as_ref().or(self.cfg.output.report.as_ref()) {
            Some(path) => write_file(path, &text),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

pub fn dispatch(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Simulate { t_end } => simulate(&Resolved::from_args(&cli.shared)?, *t_end),
        Command::Integrals { at } => integrals_cmd(&Resolved::from_args(&cli.shared)?, *at),
        Command::Classify { force } => classify(&cli.shared, force),
        Command::Precession { force } => precession(&cli.shared, force),
        Command::Lrl { at } => lrl(&Resolved::from_args(&cli.shared)?, at),
        Command::Verify { suite, seed, samples } => {
            let res = Resolved::from_args(&cli.shared)?;
            let report = super::verify::run_suite(*suite, &res, *seed, *samples)?;
            res.emit(&report)?;
            if !report.pass {
                for c in report.checks.iter().filter(|c| !c.pass) {
                    eprintln!("check failed: {} = {:e} (threshold {:e})", c.name, c.value, c.threshold);
                }
            }
            Ok(if report.pass { EXIT_OK } else { EXIT_FAILURE })
        }
    }
}

fn is_circular(res: &Resolved, s: &PolarState) -> bool {
    res.spec_at(s)
        .and_then(|(spec, e)| classify_trajectory(&spec, e))
        .is_ok_and(|c| c.class == TrajectoryClass::Circular)
}

fn simulate(res: &Resolved, t_end: Option<f64>) -> Result<i32> {
    let s0 = res.initial()?.polar()?;
    let t_end = t_end.or(res.cfg.t_end).unwrap_or_else(|| res.default_t_end(&s0));
    let mut warnings = Vec::new();
    if is_circular(res, &s0) {
        eprintln!("warning: circular: Theta/T undefined");
        warnings.push("circular: Theta/T undefined".to_string());
    }
    let traj = integrate_polar(&res.potential, s0, t_end, res.ode_tol)?;
    if traj.meta.collision {
        warnings.push(format!("collision with the centre near t = {}", traj.final_state().t));
    }
    let csv = trajectory_csv(&traj.states);
    let csv_path = res.out.clone().or_else(|| res.cfg.output.trajectory.clone());
    let events_path = res.cfg.output.events.clone().or_else(|| {
        csv_path.as_ref().map(|p| {
            let mut s = p.clone().into_os_string();
            s.push(".events.json");
            PathBuf::from(s)
        })
    });
    let events_doc = json!({
        "events": traj.events,
        "meta": traj.meta,
        "warnings": warnings,
    });
    match &csv_path {
        Some(p) => write_file(p, &csv)?,
        None => print!("{csv}"),
    }
    if let Some(p) = &events_path {
        write_file(p, &to_json(&events_doc)?)?;
    }
    if csv_path.is_some() {
        let summary = json!({
            "trajectory": csv_path.as_ref().map(|p| p.display().to_string()),
            "events_file": events_path.as_ref().map(|p| p.display().to_string()),
            "states": traj.states.len(),
            "events": traj.events.len(),
            "t_end": traj.final_state().t,
            "warnings": warnings,
        });
        print!("{}", to_json(&summary)?);
    }
    if traj.meta.collision {
        eprintln!("error: trajectory collided with the centre at t = {}", traj.final_state().t);
        return Ok(EXIT_FAILURE);
    }
    Ok(EXIT_OK)
}

fn state_at(res: &Resolved, s0: PolarState, at: Option<f64>) -> Result<PolarState> {
    match at {
        None => Ok(s0),
        Some(t) if t == s0.t => Ok(s0),
        Some(t) => {
            let traj = integrate_polar(&res.potential, s0, t, res.ode_tol)?;
            if traj.meta.collision {
                return Err(Error::InvalidInput(format!("trajectory collides before t = {t}")));
            }
            Ok(*traj.final_state())
        }
    }
}

fn integrals_cmd(res: &Resolved, at: Option<f64>) -> Result<i32> {
    let s = state_at(res, res.initial()?.polar()?, at)?;
    let spec = res.spec(angular_momentum(&s))?;
    let set = integrals::first_integrals(&s, &spec, res.policy, res.quad_tol)?;
    let mut doc = serde_json::to_value(&set).map_err(|e| Error::Io(e.to_string()))?;
    doc["Theta_mod_2pi"] = set.theta.map_or(Value::Null, |x| json!(mod_2pi(x)));
    doc["state"] = json!(s);
    res.emit(&doc)?;
    Ok(EXIT_OK)
}

/// Potential plus `(L, E)` from the force flags, falling back to the config.
struct ForceInput {
    res: Resolved,
    l: f64,
    e: Option<f64>,
}

fn force_input(shared: &SharedArgs, f: &ForceArgs) -> Result<ForceInput> {
    let mut cfg = match &shared.config {
        Some(path) => RunConfig::load(path)?,
        None => {
            let mut c = RunConfig::default_kepler();
            c.polar = None;
            c
        }
    };
    if let Some(kind) = &f.kind {
        cfg.potential = PotentialConfig { kind: kind.clone(), k: Some(f.k.unwrap_or(1.0)), kappa: f.kappa, p: f.p, u_eq: None };
    } else {
        cfg.potential.k = f.k.or(cfg.potential.k);
        cfg.potential.kappa = f.kappa.or(cfg.potential.kappa);
        cfg.potential.p = f.p.or(cfg.potential.p);
    }
    let res = Resolved::from_config(cfg, shared)?;
    let state = res.cfg.initial_state().ok().and_then(|s| s.polar().ok());
    let l = f
        .l
        .or_else(|| state.map(|s| angular_momentum(&s)))
        .ok_or_else(|| Error::Config("--L is required when the config has no initial state".into()))?;
    let e = f.e.or_else(|| Some(energy(&state?, &res.spec(l).ok()?)).filter(|x| x.is_finite()));
    if let PotentialKind::Perturbed { kappa, .. } = res.potential.kind() {
        if *kappa >= l * l {
            return Err(Error::NoBoundedTrajectories { kappa: *kappa, l2: l * l });
        }
    }
    Ok(ForceInput { res, l, e })
}

fn require_e(fi: &ForceInput) -> Result<f64> {
    fi.e.ok_or_else(|| Error::Config("--E is required when the config has no initial state".into()))
}

fn classify(shared: &SharedArgs, f: &ForceArgs) -> Result<i32> {
    let fi = force_input(shared, f)?;
    let e = require_e(&fi)?;
    let spec = fi.res.spec(fi.l)?;
    let c = classify_trajectory(&spec, e)?;
    let mut doc = json!({
        "potential": fi.res.potential.kind_name(),
        "L": fi.l,
        "E": e,
        "class": c.class,
        "e_min": c.e_min,
        "turning_points": c.class.turning_point_count(),
    });
    if c.class == TrajectoryClass::BoundedNoncircular {
        let orbit = integrals::Orbit::bounded(&spec, e, fi.res.quad_tol)?;
        doc["r_min"] = json!(orbit.r_min());
        doc["r_max"] = json!(orbit.r_max());
        doc["inertial_points"] = json!(orbit.inertial_points());
    }
    fi.res.emit(&doc)?;
    Ok(EXIT_OK)
}

fn precession(shared: &SharedArgs, f: &ForceArgs) -> Result<i32> {
    let fi = force_input(shared, f)?;
    let e = require_e(&fi)?;
    let spec = fi.res.spec(fi.l)?;
    let angle = integrals::apsidal_angle(&spec, e, fi.res.quad_tol)?;
    let period = integrals::radial_period(&spec, e, fi.res.quad_tol)?;
    let doc = json!({
        "potential": fi.res.potential.kind_name(),
        "L": fi.l,
        "E": e,
        "delta_theta": angle.delta_theta,
        "mod_2pi": angle.mod_2pi,
        "delta_t": period,
        "closed_verdict": angle.verdict.describe(),
        "verdict": angle.verdict,
    });
    fi.res.emit(&doc)?;
    Ok(EXIT_OK)
}

fn ndim_initial(res: &Resolved) -> Result<CartesianState> {
    match res.initial()? {
        InitialState::Cartesian(c) => match res.n {
            Some(n) if n != c.n() => {
                Err(Error::Config(format!("--n {n} disagrees with the {}-dimensional cartesian state", c.n())))
            }
            _ => Ok(c),
        },
        InitialState::Polar(p) => embed_to_ndim(&PlaneFrame::standard(res.n.unwrap_or(2))?, &p),
    }
}

fn lrl(res: &Resolved, at: &[f64]) -> Result<i32> {
    let s0 = ndim_initial(res)?;
    let polar0 = crate::dynamics::reduce_to_plane(&s0)?.polar;
    let (spec, e) = res.spec_at(&polar0)?;
    if classify_trajectory(&spec, e)?.class == TrajectoryClass::Circular {
        return Err(Error::UndefinedForCircular);
    }
    let times: Vec<f64> = if at.is_empty() { vec![s0.t] } else { at.to_vec() };
    let integrate = |t: f64| -> Result<Option<NdimTrajectory>> {
        if t == s0.t {
            return Ok(None);
        }
        let tr = integrate_ndim(&res.potential, &s0, t, res.ode_tol)?;
        if tr.meta.collision {
            return Err(Error::InvalidInput(format!("trajectory collides before t = {t}")));
        }
        Ok(Some(tr))
    };
    let t_hi = times.iter().cloned().fold(s0.t, f64::max);
    let t_lo = times.iter().cloned().fold(s0.t, f64::min);
    let (fwd, bwd) = (integrate(t_hi)?, integrate(t_lo)?);
    let sample = |t: f64| -> Result<CartesianState> {
        let tr = if t > s0.t { &fwd } else { &bwd };
        match tr {
            _ if t == s0.t => Ok(s0.clone()),
            Some(tr) => tr.interpolate(t).ok_or_else(|| Error::InvalidInput(format!("t = {t} outside integrated span"))),
            None => Ok(s0.clone()),
        }
    };
    let mut rows = Vec::new();
    let mut first_a: Option<Vec<f64>> = None;
    let mut spread: f64 = 0.0;
    for &t in &times {
        let s = sample(t)?;
        let d = geometry::lrl_vector(&s, &res.potential, res.policy, Normalization::Default, res.quad_tol)?;
        let variant = geometry::lrl_variant(&s, &res.potential, Normalization::Default, res.quad_tol);
        let b = geometry::bivector_from_state(&s)?;
        let a_norm = d.a.iter().map(|x| x * x).sum::<f64>().sqrt();
        match &first_a {
            None => first_a = Some(d.a.clone()),
            Some(a0) => spread = spread.max(a0.iter().zip(&d.a).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)),
        }
        let mut row = json!({
            "t": t,
            "r": s.r,
            "v": s.v,
            "theta_hat": d.theta_hat,
            "theta_hat_perp": d.theta_hat_perp,
            "A": d.a,
            "A_norm": a_norm,
            "normalization": d.normalization,
            "ref": d.reference,
            "sgn_v": d.sgn_v,
            "bivector": b.components(),
        });
        match variant {
            Ok(v) => row["A_variant"] = json!(v),
            Err(err) => {
                row["A_variant"] = Value::Null;
                row["A_variant_note"] = json!(err.to_string());
            }
        }
        if let PotentialKind::Kepler { k } = res.potential.kind() {
            row["A_kepler"] = json!(geometry::kepler_lrl(&s, *k));
        }
        rows.push(row);
    }
    let doc = json!({
        "n": s0.n(),
        "potential": res.potential.kind_name(),
        "L": angular_momentum(&polar0),
        "E": e,
        "samples": rows,
        "A_spread": spread,
    });
    res.emit(&doc)?;
    Ok(EXIT_OK)
}
