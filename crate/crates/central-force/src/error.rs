use thiserror::Error;

/// Errors reported by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("rejected input: {0}")]
    InvalidInput(String),

    #[error("r = {r} lies outside the open domain (0, {sup}) of the potential")]
    OutsideDomain { r: f64, sup: f64 },

    #[error("no equilibrium point found for this potential")]
    NoEquilibrium,

    #[error("no bounded trajectories (κ ≥ L²): kappa = {kappa}, L^2 = {l2}")]
    NoBoundedTrajectories { kappa: f64, l2: f64 },

    #[error("energy E = {e} is below the effective-potential minimum {e_min}")]
    InadmissibleEnergy { e: f64, e_min: f64 },

    #[error("undefined for circular motion: Theta and T do not exist")]
    UndefinedForCircular,

    #[error("radius r = {r} lies outside the allowed radial interval [{lo}, {hi}]")]
    OutsideRegion { r: f64, lo: f64, hi: f64 },

    #[error("reference point unavailable: {0}")]
    ReferenceUnavailable(String),

    #[error("classification mismatch: expected {expected}, found {found}")]
    ClassificationMismatch { expected: String, found: String },

    #[error("endpoint r = {r} is not a simple root of the radicand (W' = {slope})")]
    NotSimpleRoot { r: f64, slope: f64 },

    #[error("quadrature did not reach tolerance: best value {value}, error estimate {estimate}")]
    AccuracyFailure { value: f64, estimate: f64 },

    #[error("step size underflow at t = {t} (h = {h}, r = {r})")]
    StepSizeUnderflow { t: f64, h: f64, r: f64 },

    #[error("state is off-shell: |dL| = {dl}, |dE| = {de}")]
    OffShell { dl: f64, de: f64 },

    #[error("state lies outside the angular domain of the closed form: {0}")]
    OutsideAngularDomain(String),

    #[error("too close to an apsis for finite differences (radicand margin {margin})")]
    TooCloseToApsis { margin: f64 },

    #[error("no inertial point: {0}")]
    NoInertialPoint(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
