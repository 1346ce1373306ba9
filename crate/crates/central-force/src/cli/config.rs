//! JSON run configuration.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::dynamics::{reduce_to_plane, CartesianState};
use crate::error::{Error, Result};
use crate::integrals::{PolarState, ReferenceKind, ReferencePolicy};
use crate::potentials::{EffectivePotentialSpec, RadialPotential};

pub const DEFAULT_ODE_TOL: f64 = 1e-10;
pub const DEFAULT_QUAD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub kind: String,
    pub k: Option<f64>,
    pub kappa: Option<f64>,
    pub p: Option<f64>,
    /// Energy zero point; required for power laws with `-1 ≤ p ≤ 0`.
    pub u_eq: Option<f64>,
}

impl PotentialConfig {
    pub fn kepler(k: f64) -> Self {
        Self { kind: "kepler".into(), k: Some(k), kappa: None, p: None, u_eq: None }
    }

    pub fn build(&self) -> Result<RadialPotential> {
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Error::Config(format!("potential.{name} is required for kind \"{}\"", self.kind)))
        };
        let p = match self.kind.as_str() {
            "kepler" => RadialPotential::kepler(need(self.k, "k")?),
            "perturbed" => RadialPotential::perturbed(need(self.k, "k")?, need(self.kappa, "kappa")?),
            "power" => RadialPotential::power(need(self.k, "k")?, need(self.p, "p")?),
            other => {
                return Err(Error::Config(format!(
                    "potential.kind: unknown kind \"{other}\" (expected kepler, perturbed or power)"
                )))
            }
        };
        p.map_err(|e| Error::Config(format!("potential: {e}")))
    }

    /// `U_eq` from the config, else from the equilibrium point.
    pub fn u_eq(&self, p: &RadialPotential) -> Result<f64> {
        match self.u_eq {
            Some(u) => Ok(u),
            None => p.equilibrium_point().map(|e| e.u_eq),
        }
    }

    pub fn spec(&self, l: f64) -> Result<EffectivePotentialSpec> {
        let p = self.build()?;
        let u_eq = self.u_eq(&p)?;
        EffectivePotentialSpec::with_u_eq(p, l, u_eq)
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolarConfig {
    #[serde(default)]
    pub t: f64,
    pub r: f64,
    #[serde(default)]
    pub theta: f64,
    pub v: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CartesianConfig {
    #[serde(default)]
    pub t: f64,
    pub r: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub trajectory: Option<PathBuf>,
    pub events: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub potential: PotentialConfig,
    pub polar: Option<PolarConfig>,
    pub cartesian: Option<CartesianConfig>,
    pub t_end: Option<f64>,
    pub ode_tol: Option<f64>,
    pub quad_tol: Option<f64>,
    #[serde(rename = "ref")]
    pub reference: Option<String>,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Initial state in either representation.
#[derive(Debug, Clone)]
pub enum InitialState {
    Polar(PolarState),
    Cartesian(CartesianState),
}

impl InitialState {
    pub fn polar(&self) -> Result<PolarState> {
        match self {
            InitialState::Polar(s) => Ok(*s),
            InitialState::Cartesian(c) => Ok(reduce_to_plane(c)?.polar),
        }
    }

    pub fn t(&self) -> f64 {
        match self {
            InitialState::Polar(s) => s.t,
            InitialState::Cartesian(c) => c.t,
        }
    }
}

pub fn parse_reference(s: &str) -> Result<ReferencePolicy> {
    Ok(match s.replace('-', "_").as_str() {
        "auto" => ReferencePolicy::Auto,
        "turning_min" => ReferencePolicy::Fixed(ReferenceKind::TurningMin),
        "turning_max" => ReferencePolicy::Fixed(ReferenceKind::TurningMax),
        "inertial" => ReferencePolicy::Fixed(ReferenceKind::Inertial),
        other => {
            return Err(Error::Config(format!(
                "ref: unknown reference policy \"{other}\" (expected auto, turning-min, turning-max or inertial)"
            )))
        }
    })
}

impl RunConfig {
    /// The Kepler ellipse `k = 1`, `r = 1`, `v = √0.5`, `ω = 1` (`L = 1`, `E = -1/4`).
    pub fn default_kepler() -> Self {
        Self {
            potential: PotentialConfig::kepler(1.0),
            polar: Some(PolarConfig { t: 0.0, r: 1.0, theta: 0.0, v: 0.5f64.sqrt(), omega: 1.0 }),
            cartesian: None,
            t_end: None,
            ode_tol: None,
            quad_tol: None,
            reference: None,
            output: OutputConfig::default(),
        }
    }

    pub fn from_str(text: &str, origin: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(format!("{origin}: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: cannot read config: {e}", path.display())))?;
        Self::from_str(&text, &path.display().to_string())
    }

    pub fn validate(&self) -> Result<()> {
        if self.polar.is_some() && self.cartesian.is_some() {
            return Err(Error::Config("exactly one of \"polar\" and \"cartesian\" may be given, found both".into()));
        }
        for (name, v) in [("ode_tol", self.ode_tol), ("quad_tol", self.quad_tol), ("t_end", self.t_end)] {
            if let Some(x) = v {
                if !x.is_finite() || (name != "t_end" && x <= 0.0) {
                    return Err(Error::Config(format!("{name}: must be a positive finite number, found {x}")));
                }
            }
        }
        if let Some(r) = &self.reference {
            parse_reference(r)?;
        }
        self.potential.build()?;
        if let Some(c) = &self.cartesian {
            if c.r.len() != c.v.len() || !(2..=8).contains(&c.r.len()) {
                return Err(Error::Config(format!(
                    "cartesian: r and v must have the same dimension in 2..=8 (found {} and {})",
                    c.r.len(),
                    c.v.len()
                )));
            }
        }
        Ok(())
    }

    pub fn initial_state(&self) -> Result<InitialState> {
        match (&self.polar, &self.cartesian) {
            (Some(p), None) => PolarState::new(p.t, p.r, p.theta, p.v, p.omega)
                .map(InitialState::Polar)
                .map_err(|e| Error::Config(format!("polar: {e}"))),
            (None, Some(c)) => CartesianState::new(c.t, c.r.clone(), c.v.clone())
                .map(InitialState::Cartesian)
                .map_err(|e| Error::Config(format!("cartesian: {e}"))),
            (None, None) => Err(Error::Config("an initial state (\"polar\" or \"cartesian\") is required".into())),
            (Some(_), Some(_)) => Err(Error::Config("exactly one of \"polar\" and \"cartesian\" may be given".into())),
        }
    }
}
