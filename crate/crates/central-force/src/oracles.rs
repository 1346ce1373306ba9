//! Closed-form `Θ`, `T`, orbit shapes and special radii for the Kepler force
//! `F = -k/r²` and the cubically perturbed force `F = -k/r² - κ/r³`.
//!
//! The perturbed formulas are the Kepler ones with `L'² = L² - κ` in the
//! radial motion and the angular prefactor `λ⁻¹ = L/L'`. With `λ = L'/L` the
//! Kepler case is `L' = |L|`, `λ = sgn(L)`, so one implementation serves both.
//!
//! Every evaluation first checks that the state is on shell, i.e. that its
//! `L` and `E` match the parameters to `1e-10` relative.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrals::{PolarState, ReferenceKind};
use crate::potentials::RadialPotential;

/// Relative tolerance of the on-shell check.
pub const ON_SHELL_TOL: f64 = 1e-10;
/// `|E| ≤ ZERO_E_TOL · k²/L'²` selects the parabolic formulas.
pub const ZERO_E_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OracleForce {
    Kepler { k: f64 },
    Perturbed { k: f64, kappa: f64 },
}

impl OracleForce {
    pub fn k(&self) -> f64 {
        match *self {
            OracleForce::Kepler { k } | OracleForce::Perturbed { k, .. } => k,
        }
    }

    pub fn kappa(&self) -> f64 {
        match *self {
            OracleForce::Kepler { .. } => 0.0,
            OracleForce::Perturbed { kappa, .. } => kappa,
        }
    }

    pub fn potential(&self) -> Result<RadialPotential> {
        match *self {
            OracleForce::Kepler { k } => RadialPotential::kepler(k),
            OracleForce::Perturbed { k, kappa } => RadialPotential::perturbed(k, kappa),
        }
    }

    /// `U(r)` with the zero at infinity.
    pub fn u(&self, r: f64) -> f64 {
        -self.k() / r - self.kappa() / (2.0 * r * r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    NegE,
    ZeroE,
    PosE,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleParams {
    pub force: OracleForce,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "E")]
    pub e: f64,
    pub branch: ReferenceKind,
}

impl OracleParams {
    pub fn new(force: OracleForce, l: f64, e: f64, branch: ReferenceKind) -> Result<Self> {
        let k = force.k();
        if !(k > 0.0) || !l.is_finite() || !e.is_finite() {
            return Err(Error::InvalidInput("closed forms need k > 0 and finite L, E".into()));
        }
        let kappa = force.kappa();
        if kappa < 0.0 {
            return Err(Error::InvalidInput(format!("kappa = {kappa} must be positive")));
        }
        if kappa >= l * l {
            return Err(Error::NoBoundedTrajectories { kappa, l2: l * l });
        }
        if l == 0.0 {
            return Err(Error::InvalidInput("closed forms need L ≠ 0".into()));
        }
        let p = Self { force, l, e, branch };
        let e_min = p.e_min();
        if e <= e_min {
            return Err(Error::InadmissibleEnergy { e, e_min });
        }
        if branch == ReferenceKind::TurningMax && p.regime() != Regime::NegE {
            return Err(Error::ReferenceUnavailable("turning_max exists only for E < 0".into()));
        }
        Ok(p)
    }

    /// Parameters matching a state's own `L` and `E`.
    pub fn from_state(force: OracleForce, s: &PolarState, branch: ReferenceKind) -> Result<Self> {
        let l = s.omega * s.r * s.r;
        Self::new(force, l, state_energy(&force, s), branch)
    }

    pub fn with_branch(&self, branch: ReferenceKind) -> Result<Self> {
        Self::new(self.force, self.l, self.e, branch)
    }

    /// `L' = √(L² - κ)`.
    pub fn l_prime(&self) -> f64 {
        (self.l * self.l - self.force.kappa()).sqrt()
    }

    /// `λ = L'/L`.
    pub fn lambda(&self) -> f64 {
        self.l_prime() / self.l
    }

    pub fn e_min(&self) -> f64 {
        let k = self.force.k();
        let lp2 = self.l * self.l - self.force.kappa();
        -k * k / (2.0 * lp2)
    }

    /// `D = √(k² + 2EL'²)`.
    pub fn d(&self) -> f64 {
        let k = self.force.k();
        let lp = self.l_prime();
        (k * k + 2.0 * self.e * lp * lp).max(0.0).sqrt()
    }

    pub fn regime(&self) -> Regime {
        let lp = self.l_prime();
        let scale = self.force.k().powi(2) / (lp * lp);
        if self.e.abs() <= ZERO_E_TOL * scale {
            Regime::ZeroE
        } else if self.e < 0.0 {
            Regime::NegE
        } else {
            Regime::PosE
        }
    }
}

fn state_energy(force: &OracleForce, s: &PolarState) -> f64 {
    let rw = s.r * s.omega;
    0.5 * s.v * s.v + 0.5 * rw * rw + force.u(s.r)
}

fn check_on_shell(s: &PolarState, p: &OracleParams) -> Result<()> {
    s.validate()?;
    let l = s.omega * s.r * s.r;
    let e = state_energy(&p.force, s);
    let dl = l - p.l;
    let de = e - p.e;
    let scale_e = p.e.abs().max(p.force.k() / s.r).max(1.0);
    if dl.abs() > ON_SHELL_TOL * p.l.abs().max(1.0) || de.abs() > ON_SHELL_TOL * scale_e {
        return Err(Error::OffShell { dl, de });
    }
    Ok(())
}

/// `sgn(v)`, with the departing side at an apsis: outward below the
/// inertial radius, inward above it.
fn sgn_v(s: &PolarState, p: &OracleParams) -> f64 {
    if s.v > 0.0 {
        1.0
    } else if s.v < 0.0 {
        -1.0
    } else {
        let lp = p.l_prime();
        if s.r < lp * lp / p.force.k() {
            1.0
        } else {
            -1.0
        }
    }
}

/// `atan(num / (sgn · |den|))` where `den = 0` is read as a zero of sign `sgn`.
fn atan_signed(num: f64, den_abs: f64, sgn: f64) -> f64 {
    if den_abs == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            num.signum() * sgn * FRAC_PI_2
        }
    } else {
        (num / (sgn * den_abs)).atan()
    }
}

/// `Θ` in closed form for either force.
pub fn theta_closed(s: &PolarState, p: &OracleParams) -> Result<f64> {
    check_on_shell(s, p)?;
    let k = p.force.k();
    let lp = p.l_prime();
    let sv = sgn_v(s, p);
    let base = atan_signed(lp * lp - k * s.r, lp * s.v.abs() * s.r, sv);
    let offset = match p.branch {
        ReferenceKind::TurningMin => -sv * FRAC_PI_2,
        ReferenceKind::TurningMax => sv * FRAC_PI_2,
        ReferenceKind::Inertial => 0.0,
    };
    Ok(s.theta + (base + offset) / p.lambda())
}

/// `T` in closed form for either force; all regime × reference combinations.
pub fn time_closed(s: &PolarState, p: &OracleParams) -> Result<f64> {
    check_on_shell(s, p)?;
    let k = p.force.k();
    let lp = p.l_prime();
    let sv = sgn_v(s, p);
    let (r, v, t) = (s.r, s.v, s.t);
    let d = p.d();
    let inertial = p.branch == ReferenceKind::Inertial;
    Ok(match p.regime() {
        Regime::NegE => {
            let a = -p.e;
            let sa = (2.0 * a).sqrt();
            let c = k / (2.0 * a).powf(1.5);
            let rv = r * v;
            if inertial {
                t + rv / (2.0 * a) - sv * lp * d / (2.0 * a * k)
                    + c * (atan_signed(k - 2.0 * a * r, sa * v.abs() * r, sv) - sv * (d / (sa * lp)).atan())
            } else {
                let pm = if p.branch == ReferenceKind::TurningMin { 1.0 } else { -1.0 };
                t + rv / (2.0 * a) - c * (atan_signed(2.0 * a * r - k, sa * v.abs() * r, sv) + pm * sv * FRAC_PI_2)
            }
        }
        Regime::ZeroE => {
            if inertial {
                t - sv * (r * v.abs() * (lp * lp + k * r) - 2.0 * lp.powi(3)) / (3.0 * k * k)
            } else {
                t - r * v * (lp * lp + k * r) / (3.0 * k * k)
            }
        }
        Regime::PosE => {
            let e = p.e;
            let se = (2.0 * e).sqrt();
            let c = k / (2.0 * e).powf(1.5);
            let h = c * (se * v * r / (2.0 * e * r + k)).atanh();
            if inertial {
                t - r * v / (2.0 * e) + sv * lp * d / (2.0 * k * e) + h - sv * c * (se * lp / d).atanh()
            } else {
                t - r * v / (2.0 * e) + h
            }
        }
    })
}

/// Orbit radius at polar angle `theta` on the branch through `Theta`.
pub fn shape_closed(theta: f64, p: &OracleParams, big_theta: f64, sgn_v: f64) -> Result<f64> {
    let k = p.force.k();
    let lp = p.l_prime();
    let d = p.d();
    let phase = p.lambda() * (theta - big_theta);
    let (den, limit) = match p.branch {
        ReferenceKind::TurningMin => (k + d * phase.cos(), PI),
        ReferenceKind::TurningMax => (k - d * phase.cos(), PI),
        ReferenceKind::Inertial => (k - sgn_v.signum() * d * phase.sin(), FRAC_PI_2),
    };
    if phase.abs() > limit * (1.0 + 1e-12) || !(den > 0.0) {
        return Err(Error::OutsideAngularDomain(format!("phase {phase} exceeds {limit} on the {} branch", p.branch.as_str())));
    }
    Ok(lp * lp / den)
}

fn require_kepler(p: &OracleParams) -> Result<()> {
    match p.force {
        OracleForce::Kepler { .. } => Ok(()),
        _ => Err(Error::InvalidInput("Kepler closed form called with a perturbed force".into())),
    }
}

fn require_perturbed(p: &OracleParams) -> Result<()> {
    match p.force {
        OracleForce::Perturbed { .. } => Ok(()),
        _ => Err(Error::InvalidInput("perturbed closed form called with the Kepler force".into())),
    }
}

pub fn kepler_theta_closed(s: &PolarState, p: &OracleParams) -> Result<f64> {
    require_kepler(p)?;
    theta_closed(s, p)
}

pub fn kepler_time_closed(s: &PolarState, p: &OracleParams) -> Result<f64> {
    require_kepler(p)?;
    time_closed(s, p)
}

pub fn kepler_shape(theta: f64, p: &OracleParams, big_theta: f64, sgn_v: f64) -> Result<f64> {
    require_kepler(p)?;
    shape_closed(theta, p, big_theta, sgn_v)
}

pub fn newton_theta_closed(s: &PolarState, p: &OracleParams) -> Result<f64> {
    require_perturbed(p)?;
    theta_closed(s, p)
}

pub fn newton_time_closed(s: &PolarState, p: &OracleParams) -> Result<f64> {
    require_perturbed(p)?;
    time_closed(s, p)
}

pub fn newton_shape(theta: f64, p: &OracleParams, big_theta: f64, sgn_v: f64) -> Result<f64> {
    require_perturbed(p)?;
    shape_closed(theta, p, big_theta, sgn_v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpecialPoints {
    /// `r_*-` (the only turning point when `E ≥ 0`).
    pub r_min: f64,
    /// `r_*+`, present only for `E < 0`.
    pub r_max: Option<f64>,
    pub r_inertial: f64,
    pub e_min: f64,
    /// `|v^*|`; the radial speed at the inertial point is `±v_star`.
    pub v_star: f64,
}

pub fn special_points(p: &OracleParams) -> SpecialPoints {
    let k = p.force.k();
    let lp = p.l_prime();
    let d = p.d();
    SpecialPoints {
        r_min: lp * lp / (k + d),
        r_max: (p.regime() == Regime::NegE).then(|| lp * lp / (k - d)),
        r_inertial: lp * lp / k,
        e_min: p.e_min(),
        v_star: d / lp,
    }
}

/// `(Θ₊ - Θ₋, T₊ - T₋)` between the two turning references at `sgn(v) = 1`:
/// `(π L/L', π k/(2|E|)^{3/2})`. Bounded orbits only.
pub fn half_separations(p: &OracleParams) -> Result<(f64, f64)> {
    if p.regime() != Regime::NegE {
        return Err(Error::ReferenceUnavailable("separations need E < 0".into()));
    }
    let a = -p.e;
    Ok((PI / p.lambda(), PI * p.force.k() / (2.0 * a).powf(1.5)))
}
