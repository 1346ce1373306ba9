//! The polar first integrals `L`, `E`, `Θ`, `T`, apsidal angle and period,
//! trajectory shapes, and conservation diagnostics along trajectories.
//!
//! `Θ` and `T` are evaluated as
//!
//! ```text
//! Θ = θ - sgn(v) ∫_{r0}^{r} L/(ρ² √W(ρ)) dρ,   T = t - sgn(v) ∫_{r0}^{r} 1/√W(ρ) dρ
//! ```
//!
//! with `r0` a turning point (`W(r0) = 0`) or an inertial point
//! (`U_eff'(r0) = 0`). Both are multi-valued along a trajectory: they are
//! constant on every arc between consecutive apsides and jump across each
//! apsis. The arc a value refers to is recorded in
//! [`FirstIntegralSet::branch_note`].

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::dynamics::{EventKind, Trajectory};
use crate::error::{Error, Result};
use crate::potentials::{classify_trajectory, EffectivePotentialSpec, TrajectoryClass};
use crate::quadrature::{self, IntegrandKind, Radicand, Region, RootKind, ScanConfig};

/// A point `(t, r, θ, v, ω)` of the polar jet space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarState {
    pub t: f64,
    pub r: f64,
    pub theta: f64,
    pub v: f64,
    pub omega: f64,
}

impl PolarState {
    pub fn new(t: f64, r: f64, theta: f64, v: f64, omega: f64) -> Result<Self> {
        let s = Self { t, r, theta, v, omega };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.t, self.r, self.theta, self.v, self.omega];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite polar state {self:?}")));
        }
        if !(self.r > 0.0) {
            return Err(Error::InvalidInput(format!("radius r = {} must be positive", self.r)));
        }
        Ok(())
    }
}

/// `L = ω r²`.
pub fn angular_momentum(s: &PolarState) -> f64 {
    s.omega * s.r * s.r
}

/// `E = v²/2 + L²/(2r²) + U(r) - U_eq`, using the state's own `v`, `ω`, `r`.
pub fn energy(s: &PolarState, spec: &EffectivePotentialSpec) -> f64 {
    let rw = s.r * s.omega;
    0.5 * s.v * s.v + 0.5 * rw * rw + spec.potential.u(s.r) - spec.u_eq
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceKind {
    TurningMin,
    TurningMax,
    Inertial,
}

impl ReferenceKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ReferenceKind::TurningMin => "turning_min",
            ReferenceKind::TurningMax => "turning_max",
            ReferenceKind::Inertial => "inertial",
        }
    }
}

/// How to choose the reference point; `Auto` prefers `turning_min`, then
/// `inertial`, then `turning_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferencePolicy {
    Auto,
    Fixed(ReferenceKind),
}

/// The radial endpoint `r0` of the `Θ`/`T` quadratures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferencePoint {
    pub kind: ReferenceKind,
    pub r0: f64,
    /// Index of `r0` in the sorted root list it was taken from (turning
    /// points of `W` or inertial points).
    pub root_index: usize,
}

/// Relative slack allowed when a state sits marginally outside its region.
const REGION_SLACK: f64 = 1e-9;

/// The radial motion for fixed `(L, E)`: the allowed region containing a
/// given radius, its turning points, and its inertial point.
#[derive(Debug)]
pub struct Orbit {
    rad: Radicand,
    class: TrajectoryClass,
    region: Region,
    turning: Vec<f64>,
    inertial: Vec<f64>,
    full_angular: OnceLock<Result<f64>>,
    full_temporal: OnceLock<Result<f64>>,
    tol: f64,
}

impl Orbit {
    /// The orbit through radius `r_hint` with angular momentum `spec.l` and energy `e`.
    pub fn new(spec: &EffectivePotentialSpec, e: f64, r_hint: f64, tol: f64) -> Result<Self> {
        Self::build(spec, e, Some(r_hint), tol)
    }

    /// The bounded orbit at `(spec.l, e)`; fails unless the motion is bounded and non-circular.
    pub fn bounded(spec: &EffectivePotentialSpec, e: f64, tol: f64) -> Result<Self> {
        let orbit = Self::build(spec, e, None, tol)?;
        if orbit.class != TrajectoryClass::BoundedNoncircular {
            return Err(Error::ClassificationMismatch {
                expected: TrajectoryClass::BoundedNoncircular.to_string(),
                found: orbit.class.to_string(),
            });
        }
        Ok(orbit)
    }

    /// The orbit of an on-shell state; `L` and `E` are recomputed from the state.
    pub fn from_state(spec: &EffectivePotentialSpec, s: &PolarState, tol: f64) -> Result<Self> {
        s.validate()?;
        let spec = spec.with_l(angular_momentum(s));
        Self::new(&spec, energy(s, &spec), s.r, tol)
    }

    fn build(spec: &EffectivePotentialSpec, e: f64, r_hint: Option<f64>, tol: f64) -> Result<Self> {
        let class = classify_trajectory(spec, e)?.class;
        match class {
            TrajectoryClass::Circular => return Err(Error::UndefinedForCircular),
            TrajectoryClass::Radial => {
                return Err(Error::ReferenceUnavailable("radial motion (L = 0) has no reference point".into()))
            }
            _ => {}
        }
        let rad = Radicand::new(spec.clone(), e);
        let scan = ScanConfig::for_spec(spec);
        let roots = quadrature::find_turning_points(&rad, &scan);
        let simple: Vec<f64> = roots.iter().filter(|r| r.kind == RootKind::Simple).map(|r| r.r).collect();
        let regions = quadrature::allowed_regions(&rad, &simple, &scan);
        let region = match r_hint {
            Some(r) => {
                let near = |reg: &Region| {
                    let lo = reg.lo.is_none_or(|lo| r >= lo * (1.0 - REGION_SLACK));
                    let hi = reg.hi.is_none_or(|hi| r <= hi * (1.0 + REGION_SLACK));
                    lo && hi
                };
                match regions.iter().find(|g| near(g)) {
                    Some(g) => *g,
                    None => {
                        let (lo, hi) = regions
                            .iter()
                            .min_by(|a, b| dist(a, r).total_cmp(&dist(b, r)))
                            .map(|g| (g.lo.unwrap_or(0.0), g.hi.unwrap_or(f64::INFINITY)))
                            .unwrap_or((f64::NAN, f64::NAN));
                        return Err(Error::OutsideRegion { r, lo, hi });
                    }
                }
            }
            None => match regions.iter().find(|g| g.lo.is_some() && g.hi.is_some()) {
                Some(g) => *g,
                None => regions.first().copied().ok_or(Error::InadmissibleEnergy { e, e_min: f64::NAN })?,
            },
        };
        let inertial: Vec<f64> = quadrature::find_inertial_points(spec, &scan)
            .into_iter()
            .map(|p| p.r)
            .filter(|&r| region.lo.is_none_or(|lo| r > lo) && region.hi.is_none_or(|hi| r < hi))
            .collect();
        let turning = [region.lo, region.hi].into_iter().flatten().collect();
        Ok(Self {
            rad,
            class,
            region,
            turning,
            inertial,
            full_angular: OnceLock::new(),
            full_temporal: OnceLock::new(),
            tol,
        })
    }

    pub fn radicand(&self) -> &Radicand {
        &self.rad
    }

    pub fn spec(&self) -> &EffectivePotentialSpec {
        self.rad.spec()
    }

    pub fn l(&self) -> f64 {
        self.rad.l()
    }

    pub fn energy(&self) -> f64 {
        self.rad.energy()
    }

    pub fn class(&self) -> TrajectoryClass {
        self.class
    }

    pub fn region(&self) -> Region {
        self.region
    }

    pub fn r_min(&self) -> Option<f64> {
        self.region.lo
    }

    pub fn r_max(&self) -> Option<f64> {
        self.region.hi
    }

    /// Inertial points strictly inside the region.
    pub fn inertial_points(&self) -> &[f64] {
        &self.inertial
    }

    /// Resolves a reference policy to a concrete reference point.
    pub fn reference(&self, policy: ReferencePolicy) -> Result<ReferencePoint> {
        let order: &[ReferenceKind] = match policy {
            ReferencePolicy::Auto => &[ReferenceKind::TurningMin, ReferenceKind::Inertial, ReferenceKind::TurningMax],
            ReferencePolicy::Fixed(ReferenceKind::TurningMin) => &[ReferenceKind::TurningMin],
            ReferencePolicy::Fixed(ReferenceKind::TurningMax) => &[ReferenceKind::TurningMax],
            ReferencePolicy::Fixed(ReferenceKind::Inertial) => &[ReferenceKind::Inertial],
        };
        for &kind in order {
            let found = match kind {
                ReferenceKind::TurningMin => self.region.lo.map(|r0| (r0, 0)),
                ReferenceKind::TurningMax => self.region.hi.map(|r0| (r0, self.turning.len() - 1)),
                ReferenceKind::Inertial => self.inertial.first().map(|&r0| (r0, 0)),
            };
            if let Some((r0, root_index)) = found {
                return Ok(ReferencePoint { kind, r0, root_index });
            }
        }
        Err(match policy {
            ReferencePolicy::Fixed(ReferenceKind::Inertial) => {
                Error::NoInertialPoint("no inertial point inside the allowed region".into())
            }
            _ => Error::ReferenceUnavailable(format!("{policy:?} has no point inside the allowed region")),
        })
    }

    fn full(&self, kind: IntegrandKind) -> Result<f64> {
        let (lo, hi) = match (self.region.lo, self.region.hi) {
            (Some(lo), Some(hi)) => (lo, hi),
            _ => return Err(Error::ReferenceUnavailable("the region is not bounded".into())),
        };
        let cell = match kind {
            IntegrandKind::Angular => &self.full_angular,
            IntegrandKind::Temporal => &self.full_temporal,
        };
        cell.get_or_init(|| {
            let spec = quadrature::SingularIntegralSpec {
                kind,
                a: lo,
                b: hi,
                singular: quadrature::SingularEnd::Both,
                tol: self.tol / 4.0,
            };
            quadrature::integrate_singular(&self.rad, &spec).map(|q| q.value)
        })
        .clone()
    }

    /// `∫_{lo}^{hi} h/√W` over the bounded region (half of the apsidal separation).
    pub fn half_separation(&self, kind: IntegrandKind) -> Result<f64> {
        self.full(kind)
    }

    /// Anchored primitive `P(x)` of `h/√W`: zero at the lower turning point
    /// when there is one, otherwise at the upper turning point, otherwise at
    /// the first inertial point.
    fn primitive(&self, kind: IntegrandKind, x: f64, speed: Option<f64>) -> Result<f64> {
        let tol = self.tol / 4.0;
        match (self.region.lo, self.region.hi) {
            (Some(lo), Some(hi)) => {
                if x <= 0.5 * (lo + hi) {
                    Ok(quadrature::integrate_from_root(&self.rad, kind, lo, x, speed, tol)?.value)
                } else {
                    let tail = quadrature::integrate_from_root(&self.rad, kind, hi, x, speed, tol)?.value;
                    Ok(self.full(kind)? + tail)
                }
            }
            (Some(anchor), None) | (None, Some(anchor)) => {
                Ok(quadrature::integrate_from_root(&self.rad, kind, anchor, x, speed, tol)?.value)
            }
            (None, None) => {
                let r_star = *self
                    .inertial
                    .first()
                    .ok_or_else(|| Error::NoInertialPoint("no turning or inertial point for this motion".into()))?;
                let (a, b, sign) = if x >= r_star { (r_star, x, 1.0) } else { (x, r_star, -1.0) };
                Ok(sign * quadrature::integrate_regular(&self.rad, kind, a, b, tol)?.value)
            }
        }
    }

    fn clamp(&self, r: f64) -> Result<f64> {
        let lo = self.region.lo.unwrap_or(0.0);
        let hi = self.region.hi.unwrap_or(f64::INFINITY);
        if r < lo {
            if r >= lo * (1.0 - REGION_SLACK) {
                return Ok(lo);
            }
            return Err(Error::OutsideRegion { r, lo, hi });
        }
        if r > hi {
            if r <= hi * (1.0 + REGION_SLACK) {
                return Ok(hi);
            }
            return Err(Error::OutsideRegion { r, lo, hi });
        }
        Ok(r)
    }

    /// `∫_{r0}^{r} h/√W`, oriented. `speed` is `|v|` at `r` when known.
    pub fn integral(&self, kind: IntegrandKind, reference: &ReferencePoint, r: f64, speed: Option<f64>) -> Result<f64> {
        let r = self.clamp(r)?;
        if r == reference.r0 {
            return Ok(0.0);
        }
        let p0 = if self.region.lo == Some(reference.r0) {
            0.0
        } else if self.region.hi == Some(reference.r0) {
            if self.region.lo.is_some() {
                self.full(kind)?
            } else {
                0.0
            }
        } else {
            self.primitive(kind, reference.r0, None)?
        };
        Ok(self.primitive(kind, r, speed)? - p0)
    }

    /// `sgn(v)`, with the departing side `sgn(W'(r))` used when `v = 0`.
    pub fn sgn_v(&self, s: &PolarState) -> f64 {
        let leading = if s.v != 0.0 { s.v } else { self.rad.dw(s.r) };
        if leading < 0.0 { -1.0 } else { 1.0 }
    }
}

fn dist(g: &Region, r: f64) -> f64 {
    let lo = g.lo.unwrap_or(0.0);
    let hi = g.hi.unwrap_or(f64::INFINITY);
    if r < lo {
        lo - r
    } else if r > hi {
        r - hi
    } else {
        0.0
    }
}

/// `Θ = θ - sgn(v) ∫_{r0}^{r} L/(ρ²√W) dρ` for the orbit of `s`.
pub fn theta_integral(s: &PolarState, spec: &EffectivePotentialSpec, policy: ReferencePolicy, tol: f64) -> Result<f64> {
    if angular_momentum(s) == 0.0 {
        s.validate()?;
        return Ok(s.theta);
    }
    let orbit = Orbit::from_state(spec, s, tol)?;
    let reference = orbit.reference(policy)?;
    theta_on_orbit(s, &orbit, &reference)
}

/// `T = t - sgn(v) ∫_{r0}^{r} 1/√W dρ` for the orbit of `s`.
pub fn time_integral(s: &PolarState, spec: &EffectivePotentialSpec, policy: ReferencePolicy, tol: f64) -> Result<f64> {
    let orbit = Orbit::from_state(spec, s, tol)?;
    let reference = orbit.reference(policy)?;
    time_on_orbit(s, &orbit, &reference)
}

/// `Θ` for a state known to lie on `orbit`.
pub fn theta_on_orbit(s: &PolarState, orbit: &Orbit, reference: &ReferencePoint) -> Result<f64> {
    let i = orbit.integral(IntegrandKind::Angular, reference, s.r, Some(s.v.abs()))?;
    Ok(s.theta - orbit.sgn_v(s) * i)
}

/// `T` for a state known to lie on `orbit`.
pub fn time_on_orbit(s: &PolarState, orbit: &Orbit, reference: &ReferencePoint) -> Result<f64> {
    let i = orbit.integral(IntegrandKind::Temporal, reference, s.r, Some(s.v.abs()))?;
    Ok(s.t - orbit.sgn_v(s) * i)
}

/// The set `(L, E, Θ, T)` at a state, with branch bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstIntegralSet {
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "E")]
    pub e: f64,
    /// `None` for circular motion.
    #[serde(rename = "Theta")]
    pub theta: Option<f64>,
    /// `None` for circular and radial motion.
    #[serde(rename = "T")]
    pub t: Option<f64>,
    #[serde(rename = "ref")]
    pub reference: Option<ReferencePoint>,
    pub sgn_v: i8,
    pub branch_note: String,
    /// Set when `Θ` or `T` are undefined ("undefined for circular", "radial").
    pub note: Option<String>,
}

/// Evaluates all four polar first integrals at `s`.
pub fn first_integrals(
    s: &PolarState,
    spec: &EffectivePotentialSpec,
    policy: ReferencePolicy,
    tol: f64,
) -> Result<FirstIntegralSet> {
    s.validate()?;
    let l = angular_momentum(s);
    let spec_l = spec.with_l(l);
    let e = energy(s, &spec_l);
    let sgn = |x: f64| if x > 0.0 { 1 } else if x < 0.0 { -1 } else { 0 };
    if l == 0.0 {
        return Ok(FirstIntegralSet {
            l,
            e,
            theta: Some(s.theta),
            t: None,
            reference: None,
            sgn_v: sgn(s.v),
            branch_note: "radial line: Theta is the polar angle of the line of motion".into(),
            note: Some("radial".into()),
        });
    }
    let orbit = match Orbit::from_state(spec, s, tol) {
        Ok(o) => o,
        Err(Error::UndefinedForCircular) => {
            return Ok(FirstIntegralSet {
                l,
                e,
                theta: None,
                t: None,
                reference: None,
                sgn_v: 0,
                branch_note: "circular motion".into(),
                note: Some(Error::UndefinedForCircular.to_string()),
            })
        }
        Err(err) => return Err(err),
    };
    let reference = orbit.reference(policy)?;
    let theta = theta_on_orbit(s, &orbit, &reference)?;
    let t = time_on_orbit(s, &orbit, &reference)?;
    let s_v = orbit.sgn_v(s);
    let bounds = |x: Option<f64>| x.map_or("none".to_string(), |v| format!("{v:.16e}"));
    let mut branch_note = format!(
        "{} arc between r_min = {} and r_max = {}; reference {} at r0 = {:.16e}",
        if s_v > 0.0 { "outgoing (v > 0)" } else { "incoming (v < 0)" },
        bounds(orbit.r_min()),
        bounds(orbit.r_max()),
        reference.kind.as_str(),
        reference.r0
    );
    if s.v == 0.0 {
        branch_note.push_str("; state at an apsis, values taken on the departing arc");
    }
    Ok(FirstIntegralSet {
        l,
        e,
        theta: Some(theta),
        t: Some(t),
        reference: Some(reference),
        sgn_v: s_v as i8,
        branch_note,
        note: None,
    })
}

/// Reduces an angle to `[0, 2π)`.
pub fn mod_2pi(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y >= 2.0 * PI {
        0.0
    } else {
        y
    }
}

/// Result of the rational-multiple test on `Δθ / 2π`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ClosureVerdict {
    /// `Δθ/2π = p/q` in lowest terms; precessing unless `p/q = 1`.
    Closed { p: i64, q: i64, precessing: bool },
    /// No fraction with denominator up to [`MAX_DENOMINATOR`] within tolerance.
    Open,
}

pub const MAX_DENOMINATOR: i64 = 64;
pub const RATIONAL_TOL: f64 = 1e-9;

impl ClosureVerdict {
    pub fn classify(delta_theta: f64) -> Self {
        let ratio = (delta_theta / (2.0 * PI)).abs();
        for q in 1..=MAX_DENOMINATOR {
            let p = (ratio * q as f64).round();
            if p >= 1.0 && (ratio - p / q as f64).abs() <= RATIONAL_TOL {
                let p = p as i64;
                return ClosureVerdict::Closed { p, q, precessing: p != q };
            }
        }
        ClosureVerdict::Open
    }

    pub fn describe(&self) -> String {
        match self {
            ClosureVerdict::Closed { precessing: false, .. } => "closed".into(),
            ClosureVerdict::Closed { p, q, .. } => format!("closed after {q} radial periods ({p}/{q}), precessing"),
            ClosureVerdict::Open => "open (within numerical precision)".into(),
        }
    }
}

/// Apsidal angle with its reduction and closure verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApsidalAngle {
    pub delta_theta: f64,
    pub mod_2pi: f64,
    pub verdict: ClosureVerdict,
}

/// `Δθ = 2 ∫_{r_min}^{r_max} L/(r²√W) dr`.
pub fn apsidal_angle(spec: &EffectivePotentialSpec, e: f64, tol: f64) -> Result<ApsidalAngle> {
    let orbit = Orbit::bounded(spec, e, tol)?;
    let delta_theta = 2.0 * orbit.half_separation(IntegrandKind::Angular)?;
    Ok(ApsidalAngle { delta_theta, mod_2pi: mod_2pi(delta_theta), verdict: ClosureVerdict::classify(delta_theta) })
}

/// `Δt = 2 ∫_{r_min}^{r_max} 1/√W dr`.
pub fn radial_period(spec: &EffectivePotentialSpec, e: f64, tol: f64) -> Result<f64> {
    let orbit = Orbit::bounded(spec, e, tol)?;
    Ok(2.0 * orbit.half_separation(IntegrandKind::Temporal)?)
}

/// `θ(r) = Θ + sgn(v) ∫_{r0}^{r} L/(ρ²√W) dρ` at each sample radius.
pub fn shape_curve(
    orbit: &Orbit,
    theta_ref: f64,
    reference: &ReferencePoint,
    samples: &[f64],
    sgn_v: f64,
) -> Vec<Result<(f64, f64)>> {
    samples
        .iter()
        .map(|&r| {
            let i = orbit.integral(IntegrandKind::Angular, reference, r, None)?;
            Ok((r, theta_ref + sgn_v * i))
        })
        .collect()
}

/// Jump of `Θ` (angular kind) or `T` (temporal kind) across the apsis
/// `at`, for forward time: `2 |∫_{r0}^{r_apsis} h/√W|`, carrying `sgn(L)`
/// for the angular kind. Zero when the apsis is the reference point.
pub fn expected_jump(orbit: &Orbit, reference: &ReferencePoint, kind: IntegrandKind, at: EventKind) -> Result<f64> {
    let r = match at {
        EventKind::Periapsis => orbit.r_min(),
        EventKind::Apoapsis => orbit.r_max(),
        EventKind::InertialCrossing => return Ok(0.0),
    }
    .ok_or_else(|| Error::ReferenceUnavailable(format!("orbit has no {at:?}")))?;
    let i = orbit.integral(kind, reference, r, Some(0.0))?.abs();
    let sign = match kind {
        IntegrandKind::Angular => orbit.l().signum(),
        IntegrandKind::Temporal => 1.0,
    };
    Ok(2.0 * sign * i)
}

/// Drift of a first integral along a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConservationReport {
    /// `max |I(t) - I(t0)|` over all states (whole trajectory).
    pub max_drift: f64,
    /// Per apsis-to-apsis arc: `max I - min I` within the arc.
    pub arc_drifts: Vec<f64>,
    /// Jumps between consecutive arcs (`mean of next - mean of previous`),
    /// with the kind of apsis separating them.
    pub jumps: Vec<(EventKind, f64)>,
    /// Number of states where the evaluator failed (excluded from the above).
    pub failures: usize,
}

/// Evaluates `eval` on every trajectory state. With `piecewise = true` the
/// states are split into arcs at the apsis events.
pub fn conservation_residual(
    eval: impl Fn(&PolarState) -> Result<f64>,
    piecewise: bool,
    traj: &Trajectory,
) -> ConservationReport {
    let mut failures = 0;
    let values: Vec<(f64, f64)> = traj
        .states
        .iter()
        .filter_map(|s| match eval(s) {
            Ok(v) if v.is_finite() => Some((s.t, v)),
            _ => {
                failures += 1;
                None
            }
        })
        .collect();
    let first = values.first().map(|x| x.1).unwrap_or(0.0);
    let max_drift = values.iter().map(|(_, v)| (v - first).abs()).fold(0.0, f64::max);
    if !piecewise {
        return ConservationReport { max_drift, arc_drifts: Vec::new(), jumps: Vec::new(), failures };
    }
    let apsides: Vec<(f64, EventKind)> = traj.apsis_events().map(|e| (e.t, e.kind)).collect();
    let forward = traj.states.len() < 2 || traj.states[1].t >= traj.states[0].t;
    let arc_of = |t: f64| {
        apsides.iter().take_while(|(te, _)| if forward { *te <= t } else { *te >= t }).count()
    };
    let mut arcs: Vec<Vec<f64>> = vec![Vec::new(); apsides.len() + 1];
    for &(t, v) in &values {
        arcs[arc_of(t)].push(v);
    }
    let arc_drifts = arcs
        .iter()
        .filter(|a| !a.is_empty())
        .map(|a| a.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - a.iter().cloned().fold(f64::INFINITY, f64::min))
        .collect();
    let mean = |a: &Vec<f64>| a.iter().sum::<f64>() / a.len() as f64;
    let jumps = (0..apsides.len())
        .filter(|&i| !arcs[i].is_empty() && !arcs[i + 1].is_empty())
        .map(|i| (apsides[i].1, mean(&arcs[i + 1]) - mean(&arcs[i])))
        .collect();
    ConservationReport { max_drift, arc_drifts, jumps, failures }
}
