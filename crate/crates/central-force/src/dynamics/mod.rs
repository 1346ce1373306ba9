//! Integration of the polar and n-dimensional equations of motion with apsis
//! and inertial-crossing events, plus the reduction of n-dimensional data to
//! the plane of motion.

pub mod dop853;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PlaneFrame;
use crate::integrals::{angular_momentum, PolarState};
use crate::potentials::{classify_trajectory, EffectivePotentialSpec, RadialPotential, TrajectoryClass};
use crate::quadrature::{self, ScanConfig};
use dop853::{Control, DenseStep, Failure, Options};

/// Smallest accepted ODE tolerance.
pub const MIN_TOL: f64 = 1e-13;
/// A trajectory is flagged as colliding once `r < COLLISION_FRACTION * r(0)`.
pub const COLLISION_FRACTION: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Periapsis,
    Apoapsis,
    InertialCrossing,
}

impl EventKind {
    pub fn is_apsis(&self) -> bool {
        !matches!(self, EventKind::InertialCrossing)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
    pub state: PolarState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegratorMeta {
    pub tol: f64,
    pub steps: usize,
    pub rejected: usize,
    pub evaluations: usize,
    pub collision: bool,
    /// False when the initial state is circular (no apsides exist).
    pub apsis_events: bool,
}

/// Polar states at every accepted step (in integration order), detected
/// events, and the dense output covering the whole time span.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Vec<PolarState>,
    pub events: Vec<Event>,
    pub meta: IntegratorMeta,
    dense: Vec<DenseStep>,
}

fn find_step(dense: &[DenseStep], t: f64) -> Option<&DenseStep> {
    let forward = dense.first().is_none_or(|d| d.h > 0.0);
    let idx = dense.partition_point(|d| if forward { d.t1() < t } else { d.t1() > t });
    dense.get(idx).filter(|d| d.covers(t))
}

fn polar_from(t: f64, y: &[f64]) -> PolarState {
    PolarState { t, r: y[0], theta: y[1], v: y[2], omega: y[3] }
}

impl Trajectory {
    /// Dense-output state at time `t`, or `None` outside the integrated span.
    pub fn interpolate(&self, t: f64) -> Option<PolarState> {
        find_step(&self.dense, t).map(|d| polar_from(t, &d.eval(t)))
    }

    pub fn final_state(&self) -> &PolarState {
        self.states.last().expect("a trajectory holds at least its initial state")
    }

    pub fn apsis_events(&self) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(|e| e.kind.is_apsis())
    }

    pub fn dense_steps(&self) -> &[DenseStep] {
        &self.dense
    }
}

/// An n-dimensional position/velocity pair, `2 <= n <= 8`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartesianState {
    pub t: f64,
    pub r: Vec<f64>,
    pub v: Vec<f64>,
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

impl CartesianState {
    pub fn new(t: f64, r: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        let n = r.len();
        if !(2..=8).contains(&n) || v.len() != n {
            return Err(Error::InvalidInput(format!(
                "position and velocity must share a dimension in 2..=8 (got {} and {})",
                n,
                v.len()
            )));
        }
        if r.iter().chain(&v).chain([&t]).any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite Cartesian state".into()));
        }
        if norm(&r) == 0.0 {
            return Err(Error::InvalidInput("position vector is zero".into()));
        }
        Ok(Self { t, r, v })
    }

    pub fn n(&self) -> usize {
        self.r.len()
    }

    pub fn radius(&self) -> f64 {
        norm(&self.r)
    }

    /// Radial speed `r̂·v`.
    pub fn radial_speed(&self) -> f64 {
        dot(&self.r, &self.v) / self.radius()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NdimEvent {
    pub t: f64,
    pub kind: EventKind,
    pub state: CartesianState,
}

#[derive(Debug, Clone)]
pub struct NdimTrajectory {
    pub states: Vec<CartesianState>,
    pub events: Vec<NdimEvent>,
    pub meta: IntegratorMeta,
    dense: Vec<DenseStep>,
}

impl NdimTrajectory {
    pub fn interpolate(&self, t: f64) -> Option<CartesianState> {
        find_step(&self.dense, t).map(|d| {
            let y = d.eval(t);
            let n = y.len() / 2;
            CartesianState { t, r: y[..n].to_vec(), v: y[n..].to_vec() }
        })
    }

    pub fn final_state(&self) -> &CartesianState {
        self.states.last().expect("a trajectory holds at least its initial state")
    }
}

struct EventSetup {
    apsis: bool,
    inertial: Vec<f64>,
}

struct Raw {
    ys: Vec<(f64, Vec<f64>)>,
    events: Vec<(f64, EventKind, Vec<f64>)>,
    dense: Vec<DenseStep>,
    meta: IntegratorMeta,
}

fn event_setup(p: &RadialPotential, s: &PolarState) -> EventSetup {
    let l = angular_momentum(s);
    let u_eq = p.equilibrium_point().map(|e| e.u_eq).unwrap_or(0.0);
    let spec = match EffectivePotentialSpec::with_u_eq(p.clone(), l, u_eq) {
        Ok(spec) => spec,
        Err(_) => return EventSetup { apsis: true, inertial: Vec::new() },
    };
    let e = crate::integrals::energy(s, &spec);
    let circular = matches!(classify_trajectory(&spec, e), Ok(c) if c.class == TrajectoryClass::Circular);
    let inertial = if l == 0.0 {
        Vec::new()
    } else {
        quadrature::find_inertial_points(&spec, &ScanConfig::for_spec(&spec)).into_iter().map(|r| r.r).collect()
    };
    EventSetup { apsis: !circular, inertial }
}

/// Drives the integrator and collects events. `radial_speed` and `radius`
/// read the corresponding scalars from a state vector.
fn drive(
    rhs: impl Fn(f64, &[f64], &mut [f64]) -> bool,
    t0: f64,
    y0: Vec<f64>,
    t_end: f64,
    tol: f64,
    setup: &EventSetup,
    radial_speed: impl Fn(&[f64]) -> f64,
    radius: impl Fn(&[f64]) -> f64,
) -> Result<Raw> {
    if !(tol >= MIN_TOL) || !tol.is_finite() {
        return Err(Error::InvalidInput(format!("ODE tolerance {tol} must be at least {MIN_TOL}")));
    }
    if !t_end.is_finite() {
        return Err(Error::InvalidInput("t_end must be finite".into()));
    }
    let r0 = radius(&y0);
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut ys = vec![(t0, y0.clone())];
    let mut events = Vec::new();
    let mut dense: Vec<DenseStep> = Vec::new();
    let mut collision = false;
    let mut y_old = y0.clone();
    let result = dop853::integrate(&rhs, t0, &y0, t_end, &Options::with_tol(tol), |d, y_new| {
        let t1 = d.t1();
        let mut found: Vec<(f64, EventKind, Vec<f64>)> = Vec::new();
        if setup.apsis {
            let (g0, g1) = (radial_speed(&y_old), radial_speed(y_new));
            if g0 * g1 < 0.0 || (g1 == 0.0 && g0 != 0.0) {
                let te = refine(d, &|t| radial_speed(&d.eval(t)), g1);
                // In true time order the radial speed rises through zero at periapsis.
                let rising = (g1 - g0) * dir > 0.0;
                let kind = if rising { EventKind::Periapsis } else { EventKind::Apoapsis };
                found.push((te, kind, d.eval(te)));
            }
        }
        for &rs in &setup.inertial {
            let (g0, g1) = (radius(&y_old) - rs, radius(y_new) - rs);
            if g0 * g1 < 0.0 || (g1 == 0.0 && g0 != 0.0) {
                let te = refine(d, &|t| radius(&d.eval(t)) - rs, g1);
                found.push((te, EventKind::InertialCrossing, d.eval(te)));
            }
        }
        found.sort_by(|a, b| ((a.0 - b.0) * dir).total_cmp(&0.0));
        events.extend(found);
        dense.push(d.clone());
        ys.push((t1, y_new.to_vec()));
        y_old.copy_from_slice(y_new);
        if radius(y_new) < COLLISION_FRACTION * r0 {
            collision = true;
            return Control::Stop;
        }
        Control::Continue
    });
    let stats = match result {
        Ok(stats) => stats,
        Err(Failure::InvalidStart) => {
            return Err(Error::InvalidInput("equations of motion undefined at the initial state".into()))
        }
        Err(Failure::StepSizeUnderflow { y, .. } | Failure::TooManySteps { y, .. }) if radius(&y) < 1e-6 * r0 => {
            // Steps collapse as the orbit falls into the centre.
            collision = true;
            dop853::Stats { steps: ys.len() - 1, rejected: 0, evaluations: 0 }
        }
        Err(Failure::StepSizeUnderflow { t, h, y }) => return Err(Error::StepSizeUnderflow { t, h, r: radius(&y) }),
        Err(Failure::TooManySteps { t, y }) => return Err(Error::StepSizeUnderflow { t, h: 0.0, r: radius(&y) }),
    };
    Ok(Raw {
        ys,
        events,
        dense,
        meta: IntegratorMeta {
            tol,
            steps: stats.steps,
            rejected: stats.rejected,
            evaluations: stats.evaluations,
            collision,
            apsis_events: setup.apsis,
        },
    })
}

/// Locates the zero of `g` inside a dense step; `g1` is its value at the step end.
fn refine(d: &DenseStep, g: &dyn Fn(f64) -> f64, g1: f64) -> f64 {
    if g1 == 0.0 {
        return d.t1();
    }
    quadrature::brent(g, d.t0, d.t1()).unwrap_or(d.t1())
}

/// Integrates the polar equations `r'' = r ω² + F(r)`, `ω' = -2 v ω / r`.
pub fn integrate_polar(p: &RadialPotential, s0: PolarState, t_end: f64, tol: f64) -> Result<Trajectory> {
    s0.validate()?;
    p.check_domain(s0.r)?;
    let setup = event_setup(p, &s0);
    let r_sup = p.r_sup();
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        let (r, v, w) = (y[0], y[2], y[3]);
        if !(r > 0.0 && r < r_sup) || !v.is_finite() || !w.is_finite() {
            return false;
        }
        dy[0] = v;
        dy[1] = w;
        dy[2] = r * w * w + p.force(r);
        dy[3] = -2.0 * v * w / r;
        dy.iter().all(|x| x.is_finite())
    };
    let y0 = vec![s0.r, s0.theta, s0.v, s0.omega];
    let raw = drive(rhs, s0.t, y0, t_end, tol, &setup, |y| y[2], |y| y[0])?;
    Ok(Trajectory {
        states: raw.ys.iter().map(|(t, y)| polar_from(*t, y)).collect(),
        events: raw.events.iter().map(|(t, k, y)| Event { t: *t, kind: *k, state: polar_from(*t, y) }).collect(),
        meta: raw.meta,
        dense: raw.dense,
    })
}

/// Integrates `r' = v`, `v' = F(|r|) r̂` in n dimensions.
pub fn integrate_ndim(p: &RadialPotential, s0: &CartesianState, t_end: f64, tol: f64) -> Result<NdimTrajectory> {
    let s0 = CartesianState::new(s0.t, s0.r.clone(), s0.v.clone())?;
    p.check_domain(s0.radius())?;
    let n = s0.n();
    let polar = reduce_to_plane(&s0)?;
    let setup = event_setup(p, &polar.polar);
    let r_sup = p.r_sup();
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        let r = norm(&y[..n]);
        if !(r > 0.0 && r < r_sup) {
            return false;
        }
        let f = p.force(r) / r;
        for i in 0..n {
            dy[i] = y[n + i];
            dy[n + i] = f * y[i];
        }
        dy.iter().all(|x| x.is_finite())
    };
    let mut y0 = s0.r.clone();
    y0.extend_from_slice(&s0.v);
    let radial = |y: &[f64]| dot(&y[..n], &y[n..]) / norm(&y[..n]);
    let raw = drive(rhs, s0.t, y0, t_end, tol, &setup, radial, |y| norm(&y[..n]))?;
    let cart = |t: f64, y: &[f64]| CartesianState { t, r: y[..n].to_vec(), v: y[n..].to_vec() };
    Ok(NdimTrajectory {
        states: raw.ys.iter().map(|(t, y)| cart(*t, y)).collect(),
        events: raw.events.iter().map(|(t, k, y)| NdimEvent { t: *t, kind: *k, state: cart(*t, y) }).collect(),
        meta: raw.meta,
        dense: raw.dense,
    })
}

/// Plane of motion and polar data of an n-dimensional state.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneReduction {
    pub frame: PlaneFrame,
    pub polar: PolarState,
    /// True when position and velocity are collinear and `e2` is a completion.
    pub collinear: bool,
}

/// Builds `e1 = r̂` and `e2` by Gram-Schmidt on the velocity; `θ = 0` by convention.
pub fn reduce_to_plane(s: &CartesianState) -> Result<PlaneReduction> {
    let s = CartesianState::new(s.t, s.r.clone(), s.v.clone())?;
    let n = s.n();
    let rn = s.radius();
    let e1: Vec<f64> = s.r.iter().map(|x| x / rn).collect();
    let vr = dot(&e1, &s.v);
    let mut w: Vec<f64> = (0..n).map(|i| s.v[i] - vr * e1[i]).collect();
    let mut wn = norm(&w);
    let vn = norm(&s.v);
    let collinear = !(wn > 1e-12 * vn) || vn == 0.0;
    if collinear {
        // Complete with the first standard basis vector not parallel to r.
        let k = (0..n).find(|&k| e1[k].abs() < 1.0 - 1e-6).unwrap_or(0);
        w = (0..n).map(|i| f64::from(u8::from(i == k)) - e1[k] * e1[i]).collect();
        wn = norm(&w);
    }
    let e2: Vec<f64> = w.iter().map(|x| x / wn).collect();
    let frame = PlaneFrame::new(e1, e2)?;
    let omega = dot(&frame.e2, &s.v) / rn;
    let polar = PolarState { t: s.t, r: rn, theta: 0.0, v: vr, omega };
    Ok(PlaneReduction { frame, polar, collinear })
}

/// Inverse of [`reduce_to_plane`]: `r = r(cos θ e1 + sin θ e2)`, `v = v r̂ + r ω θ̂`.
pub fn embed_to_ndim(frame: &PlaneFrame, s: &PolarState) -> Result<CartesianState> {
    frame.check()?;
    let (sn, cs) = s.theta.sin_cos();
    let n = frame.n();
    let rhat: Vec<f64> = (0..n).map(|i| cs * frame.e1[i] + sn * frame.e2[i]).collect();
    let that: Vec<f64> = (0..n).map(|i| -sn * frame.e1[i] + cs * frame.e2[i]).collect();
    let r = rhat.iter().map(|x| s.r * x).collect();
    let v = (0..n).map(|i| s.v * rhat[i] + s.r * s.omega * that[i]).collect();
    CartesianState::new(s.t, r, v)
}
