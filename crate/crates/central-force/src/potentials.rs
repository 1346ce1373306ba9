//! Radial potentials, effective potentials and the qualitative classification
//! of trajectories from the energy equation `E = U_eff(r)`.
//!
//! Mass is fixed to 1 throughout. A potential `U(r)` generates the central
//! force `F(r) = -U'(r)`. The effective potential for angular momentum `L` is
//! `U_eff(r) = L^2/(2 r^2) + U(r) - U_eq`, where `U_eq` is the value of the
//! potential at its equilibrium point. Equilibria at infinity are represented
//! by [`ExtendedReal::Infinity`] so that nothing downstream ever evaluates `U`
//! at a symbolic infinity.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{self, Radicand, RootKind, ScanConfig};

/// A scalar function of the radius, shared between threads.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Five-point Gauss-Legendre nodes and weights on [0, 1].
const GL5: [(f64, f64); 5] = [
    (0.046_910_077_030_668_004, 0.118_463_442_528_094_54),
    (0.230_765_344_947_158_45, 0.239_314_335_249_683_23),
    (0.5, 0.284_444_444_444_444_44),
    (0.769_234_655_052_841_5, 0.239_314_335_249_683_23),
    (0.953_089_922_969_332, 0.118_463_442_528_094_54),
];

/// A user-supplied potential given by callbacks.
///
/// The domain is the open interval `(0, r_sup)` and `bracket` is the finite
/// interval searched for an equilibrium point. No global scan is attempted
/// outside the bracket.
#[derive(Clone)]
pub struct CustomPotential {
    name: String,
    u: ScalarFn,
    du: ScalarFn,
    d2u: Option<ScalarFn>,
    r_sup: f64,
    bracket: (f64, f64),
    declared_equilibrium: Option<Equilibrium>,
}

impl CustomPotential {
    /// Builds a custom potential from `U` and `U'`.
    pub fn new(
        name: impl Into<String>,
        u: impl Fn(f64) -> f64 + Send + Sync + 'static,
        du: impl Fn(f64) -> f64 + Send + Sync + 'static,
        r_sup: f64,
        bracket: (f64, f64),
    ) -> Result<Self> {
        if !(r_sup > 0.0) {
            return Err(Error::InvalidInput(format!("domain bound r_sup = {r_sup} must be positive")));
        }
        let (lo, hi) = bracket;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "search bracket ({lo}, {hi}) must be a finite interval inside (0, inf)"
            )));
        }
        Ok(Self {
            name: name.into(),
            u: Arc::new(u),
            du: Arc::new(du),
            d2u: None,
            r_sup,
            bracket,
            declared_equilibrium: None,
        })
    }

    /// Supplies the analytic second derivative `U''`.
    pub fn with_second_derivative(mut self, d2u: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.d2u = Some(Arc::new(d2u));
        self
    }

    /// Declares the equilibrium point explicitly instead of searching the bracket.
    pub fn with_equilibrium(mut self, eq: Equilibrium) -> Self {
        self.declared_equilibrium = Some(eq);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn bracket(&self) -> (f64, f64) {
        self.bracket
    }
}

impl fmt::Debug for CustomPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomPotential")
            .field("name", &self.name)
            .field("r_sup", &self.r_sup)
            .field("bracket", &self.bracket)
            .field("analytic_d2u", &self.d2u.is_some())
            .finish()
    }
}

/// The family a [`RadialPotential`] belongs to.
#[derive(Debug, Clone)]
pub enum PotentialKind {
    /// `U = -k/r`.
    Kepler { k: f64 },
    /// `U = -k/r - kappa/(2 r^2)`, with `kappa > 0`.
    Perturbed { k: f64, kappa: f64 },
    /// Force `F = -k r^p`, so `U = k r^(p+1)/(p+1)` (or `k ln r` when `p = -1`).
    Power { k: f64, p: f64 },
    Custom(CustomPotential),
}

/// A central potential `U(r)` with its derivatives.
#[derive(Debug, Clone)]
pub struct RadialPotential {
    kind: PotentialKind,
}

/// Radius that may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtendedReal {
    Finite(f64),
    Infinity,
}

impl ExtendedReal {
    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtendedReal::Infinity)
    }
}

/// An equilibrium point `U'(r_eq) = 0` (possibly at 0 or infinity) and `U(r_eq)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub r_eq: ExtendedReal,
    pub u_eq: f64,
}

fn finite(name: &str, x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::InvalidInput(format!("{name} = {x} must be finite")))
    }
}

impl RadialPotential {
    pub fn kepler(k: f64) -> Result<Self> {
        Ok(Self { kind: PotentialKind::Kepler { k: finite("k", k)? } })
    }

    pub fn perturbed(k: f64, kappa: f64) -> Result<Self> {
        let kappa = finite("kappa", kappa)?;
        if !(kappa > 0.0) {
            return Err(Error::InvalidInput(format!("kappa = {kappa} must be positive")));
        }
        Ok(Self { kind: PotentialKind::Perturbed { k: finite("k", k)?, kappa } })
    }

    pub fn power(k: f64, p: f64) -> Result<Self> {
        Ok(Self { kind: PotentialKind::Power { k: finite("k", k)?, p: finite("p", p)? } })
    }

    pub fn custom(c: CustomPotential) -> Self {
        Self { kind: PotentialKind::Custom(c) }
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    /// Short machine-readable name of the family.
    pub fn kind_name(&self) -> &str {
        match &self.kind {
            PotentialKind::Kepler { .. } => "kepler",
            PotentialKind::Perturbed { .. } => "perturbed",
            PotentialKind::Power { .. } => "power",
            PotentialKind::Custom(c) => c.name(),
        }
    }

    /// Upper end of the open domain `(0, r_sup)`.
    pub fn r_sup(&self) -> f64 {
        match &self.kind {
            PotentialKind::Custom(c) => c.r_sup,
            _ => f64::INFINITY,
        }
    }

    pub fn check_domain(&self, r: f64) -> Result<()> {
        let sup = self.r_sup();
        if r > 0.0 && r < sup && r.is_finite() {
            Ok(())
        } else {
            Err(Error::OutsideDomain { r, sup })
        }
    }

    /// `(U(r), U'(r))` with a domain check.
    pub fn eval(&self, r: f64) -> Result<(f64, f64)> {
        self.check_domain(r)?;
        Ok((self.u(r), self.du(r)))
    }

    /// `U(r)` without a domain check.
    pub fn u(&self, r: f64) -> f64 {
        match &self.kind {
            PotentialKind::Kepler { k } => -k / r,
            PotentialKind::Perturbed { k, kappa } => -k / r - kappa / (2.0 * r * r),
            PotentialKind::Power { k, p } => {
                if *p == -1.0 {
                    k * r.ln()
                } else {
                    k * r.powf(p + 1.0) / (p + 1.0)
                }
            }
            PotentialKind::Custom(c) => (c.u)(r),
        }
    }

    /// `U'(r)` without a domain check.
    pub fn du(&self, r: f64) -> f64 {
        match &self.kind {
            PotentialKind::Kepler { k } => k / (r * r),
            PotentialKind::Perturbed { k, kappa } => k / (r * r) + kappa / (r * r * r),
            PotentialKind::Power { k, p } => k * r.powf(*p),
            PotentialKind::Custom(c) => (c.du)(r),
        }
    }

    /// `U''(r)`; custom potentials without an analytic second derivative use a
    /// Richardson-extrapolated central difference of `U'`.
    pub fn d2u(&self, r: f64) -> f64 {
        match &self.kind {
            PotentialKind::Kepler { k } => -2.0 * k / (r * r * r),
            PotentialKind::Perturbed { k, kappa } => -2.0 * k / (r * r * r) - 3.0 * kappa / (r * r * r * r),
            PotentialKind::Power { k, p } => k * p * r.powf(p - 1.0),
            PotentialKind::Custom(c) => match &c.d2u {
                Some(f) => f(r),
                None => {
                    let h = 1e-4 * r;
                    let d = |h: f64| ((c.du)(r + h) - (c.du)(r - h)) / (2.0 * h);
                    (4.0 * d(h / 2.0) - d(h)) / 3.0
                }
            },
        }
    }

    /// The central force `F(r) = -U'(r)`.
    pub fn force(&self, r: f64) -> f64 {
        -self.du(r)
    }

    /// Divided difference `(U(b) - U(a)) / (b - a)`, computed without
    /// cancellation when `b` is close to `a`. Returns `U'(a)` when `a == b`.
    pub fn slope(&self, a: f64, b: f64) -> f64 {
        let h = b - a;
        if h == 0.0 {
            return self.du(a);
        }
        match &self.kind {
            PotentialKind::Kepler { k } => k / (a * b),
            PotentialKind::Perturbed { k, kappa } => k / (a * b) + kappa * (a + b) / (2.0 * a * a * b * b),
            PotentialKind::Power { k, p } => {
                let x = h / a;
                if *p == -1.0 {
                    k * x.ln_1p() / h
                } else {
                    let q = p + 1.0;
                    k * a.powf(*p) * (q * x.ln_1p()).exp_m1() / (q * x)
                }
            }
            PotentialKind::Custom(c) => {
                if h.abs() <= 0.1 * a.min(b) {
                    GL5.iter().map(|&(x, w)| w * (c.du)(a + h * x)).sum()
                } else {
                    ((c.u)(b) - (c.u)(a)) / h
                }
            }
        }
    }

    /// Locates the equilibrium point `U'(r_eq) = 0` on `[0, inf]`.
    pub fn equilibrium_point(&self) -> Result<Equilibrium> {
        match &self.kind {
            PotentialKind::Kepler { .. } | PotentialKind::Perturbed { .. } => {
                Ok(Equilibrium { r_eq: ExtendedReal::Infinity, u_eq: 0.0 })
            }
            PotentialKind::Power { k, p } => {
                if *k == 0.0 {
                    Ok(Equilibrium { r_eq: ExtendedReal::Infinity, u_eq: 0.0 })
                } else if *p > 0.0 {
                    Ok(Equilibrium { r_eq: ExtendedReal::Finite(0.0), u_eq: 0.0 })
                } else if *p < -1.0 {
                    Ok(Equilibrium { r_eq: ExtendedReal::Infinity, u_eq: 0.0 })
                } else {
                    // The force never vanishes, or it vanishes only at infinity
                    // where the potential diverges.
                    Err(Error::NoEquilibrium)
                }
            }
            PotentialKind::Custom(c) => {
                if let Some(eq) = c.declared_equilibrium {
                    return Ok(eq);
                }
                let (lo, hi) = c.bracket;
                let n = 256;
                let ratio = (hi / lo).powf(1.0 / (n - 1) as f64);
                let mut x0 = lo;
                let mut f0 = (c.du)(x0);
                for i in 1..n {
                    let x1 = if i == n - 1 { hi } else { lo * ratio.powi(i) };
                    let f1 = (c.du)(x1);
                    if f0 == 0.0 {
                        return Ok(Equilibrium { r_eq: ExtendedReal::Finite(x0), u_eq: (c.u)(x0) });
                    }
                    if f0 * f1 < 0.0 {
                        let r = quadrature::brent(|x| (c.du)(x), x0, x1)?;
                        return Ok(Equilibrium { r_eq: ExtendedReal::Finite(r), u_eq: (c.u)(r) });
                    }
                    x0 = x1;
                    f0 = f1;
                }
                Err(Error::NoEquilibrium)
            }
        }
    }
}

/// A potential together with the angular momentum `L` and the energy zero `U_eq`.
#[derive(Debug, Clone)]
pub struct EffectivePotentialSpec {
    pub potential: RadialPotential,
    pub l: f64,
    pub u_eq: f64,
}

impl EffectivePotentialSpec {
    /// Uses the potential's own equilibrium value for `U_eq`.
    pub fn new(potential: RadialPotential, l: f64) -> Result<Self> {
        let eq = potential.equilibrium_point()?;
        Self::with_u_eq(potential, l, eq.u_eq)
    }

    /// Uses an explicitly supplied normalization `U_eq`.
    pub fn with_u_eq(potential: RadialPotential, l: f64, u_eq: f64) -> Result<Self> {
        Ok(Self { potential, l: finite("L", l)?, u_eq: finite("U_eq", u_eq)? })
    }

    /// Same potential and normalization with another angular momentum.
    pub fn with_l(&self, l: f64) -> Self {
        Self { potential: self.potential.clone(), l, u_eq: self.u_eq }
    }

    /// `U_eff(r) = L^2/(2 r^2) + U(r) - U_eq`.
    pub fn u_eff(&self, r: f64) -> f64 {
        0.5 * self.l * self.l / (r * r) + self.potential.u(r) - self.u_eq
    }

    /// `U_eff'(r) = U'(r) - L^2/r^3`; its roots are the inertial points.
    pub fn u_eff_prime(&self, r: f64) -> f64 {
        self.potential.du(r) - self.l * self.l / (r * r * r)
    }
}

/// Qualitative trajectory type at a given energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryClass {
    Radial,
    Circular,
    BoundedNoncircular,
    UnboundedOneTurning,
    UnboundedNoTurning,
}

impl TrajectoryClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            TrajectoryClass::Radial => "radial",
            TrajectoryClass::Circular => "circular",
            TrajectoryClass::BoundedNoncircular => "bounded_noncircular",
            TrajectoryClass::UnboundedOneTurning => "unbounded_one_turning",
            TrajectoryClass::UnboundedNoTurning => "unbounded_no_turning",
        }
    }

    /// Number of simple turning points bounding the motion.
    pub fn turning_point_count(&self) -> Option<usize> {
        match self {
            TrajectoryClass::Radial => None,
            TrajectoryClass::Circular => Some(1),
            TrajectoryClass::BoundedNoncircular => Some(2),
            TrajectoryClass::UnboundedOneTurning => Some(1),
            TrajectoryClass::UnboundedNoTurning => Some(0),
        }
    }
}

impl fmt::Display for TrajectoryClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Result of [`classify_trajectory`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub class: TrajectoryClass,
    pub e_min: Option<f64>,
}

/// Relative tolerance deciding `E == E_min` (circular motion).
pub const CIRCULAR_REL_TOL: f64 = 1e-12;

fn is_circular(e: f64, e_min: f64) -> bool {
    (e - e_min).abs() <= CIRCULAR_REL_TOL * e_min.abs().max(1.0)
}

/// Classifies the motion with angular momentum `spec.l` and energy `e`.
pub fn classify_trajectory(spec: &EffectivePotentialSpec, e: f64) -> Result<Classification> {
    finite("E", e)?;
    if spec.l == 0.0 {
        return Ok(Classification { class: TrajectoryClass::Radial, e_min: None });
    }
    let l2 = spec.l * spec.l;
    let inverse_square = match spec.potential.kind() {
        PotentialKind::Kepler { k } => Some((*k, l2)),
        PotentialKind::Perturbed { k, kappa } => {
            if *kappa >= l2 {
                return Err(Error::NoBoundedTrajectories { kappa: *kappa, l2 });
            }
            Some((*k, l2 - kappa))
        }
        _ => None,
    };
    if let Some((k, l2_eff)) = inverse_square {
        // The effective potential is l2_eff/(2 r^2) - k/r shifted by U_eq.
        let e = e + spec.u_eq;
        if k > 0.0 {
            let e_min = -k * k / (2.0 * l2_eff);
            let out_min = e_min - spec.u_eq;
            if is_circular(e, e_min) {
                return Ok(Classification { class: TrajectoryClass::Circular, e_min: Some(out_min) });
            }
            if e < e_min {
                return Err(Error::InadmissibleEnergy { e: e - spec.u_eq, e_min: out_min });
            }
            let class = if e < 0.0 { TrajectoryClass::BoundedNoncircular } else { TrajectoryClass::UnboundedOneTurning };
            return Ok(Classification { class, e_min: Some(out_min) });
        }
        if e <= 0.0 {
            return Err(Error::InadmissibleEnergy { e: e - spec.u_eq, e_min: -spec.u_eq });
        }
        return Ok(Classification { class: TrajectoryClass::UnboundedOneTurning, e_min: None });
    }
    classify_generic(spec, e)
}

fn classify_generic(spec: &EffectivePotentialSpec, e: f64) -> Result<Classification> {
    let rad = Radicand::new(spec.clone(), e);
    let scan = ScanConfig::for_spec(spec);
    let inertial = quadrature::find_inertial_points(spec, &scan);
    let e_min = inertial
        .iter()
        .filter(|r| rad.d2w(r.r) < 0.0)
        .map(|r| spec.u_eff(r.r))
        .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.min(x))));
    let roots = quadrature::find_turning_points(&rad, &scan);
    let simple: Vec<f64> = roots.iter().filter(|r| r.kind == RootKind::Simple).map(|r| r.r).collect();
    let has_double = roots.iter().any(|r| r.kind == RootKind::CircularDegenerate);
    let regions = quadrature::allowed_regions(&rad, &simple, &scan);
    let class = if regions.iter().any(|g| g.lo.is_some() && g.hi.is_some()) {
        TrajectoryClass::BoundedNoncircular
    } else if regions.iter().any(|g| g.lo.is_some() || g.hi.is_some()) {
        TrajectoryClass::UnboundedOneTurning
    } else if !regions.is_empty() {
        TrajectoryClass::UnboundedNoTurning
    } else if has_double {
        TrajectoryClass::Circular
    } else {
        return Err(Error::InadmissibleEnergy { e, e_min: e_min.unwrap_or(f64::NAN) });
    };
    Ok(Classification { class, e_min })
}
