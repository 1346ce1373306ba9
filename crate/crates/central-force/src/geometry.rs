//! Geometric first integrals in n dimensions: the angular-momentum bivector
//! `𝐋 = r ∧ v`, the unit vectors `Θ̂` and `Θ̂⊥ = Θ̂·𝐋̂`, and the generalized
//! Laplace-Runge-Lenz vector `A = A(E, L) Θ̂`.
//!
//! Bivectors are stored as dense antisymmetric `n × n` matrices in row-major
//! order. The contraction of a vector with a bivector is
//! `(a·B)_j = Σ_i a_i B_ij`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dynamics::{dot, norm, reduce_to_plane, CartesianState, PlaneReduction};
use crate::error::{Error, Result};
use crate::integrals::{self, Orbit, PolarState, ReferenceKind, ReferencePoint, ReferencePolicy};
use crate::potentials::{EffectivePotentialSpec, PotentialKind, RadialPotential};
use crate::quadrature::IntegrandKind;

const ORTHO_TOL: f64 = 1e-12;

/// Orthonormal basis `{e1, e2}` of a plane in `ℝⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneFrame {
    pub e1: Vec<f64>,
    pub e2: Vec<f64>,
}

impl PlaneFrame {
    pub fn new(e1: Vec<f64>, e2: Vec<f64>) -> Result<Self> {
        let f = Self { e1, e2 };
        f.check()?;
        Ok(f)
    }

    /// The coordinate plane of the first two axes.
    pub fn standard(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!("dimension {n} is below 2")));
        }
        let mut e1 = vec![0.0; n];
        let mut e2 = vec![0.0; n];
        e1[0] = 1.0;
        e2[1] = 1.0;
        Self::new(e1, e2)
    }

    pub fn n(&self) -> usize {
        self.e1.len()
    }

    pub fn check(&self) -> Result<()> {
        if self.e1.len() != self.e2.len() || self.e1.len() < 2 {
            return Err(Error::InvalidInput("frame vectors must share a dimension of at least 2".into()));
        }
        let (n1, n2, d) = (norm(&self.e1), norm(&self.e2), dot(&self.e1, &self.e2));
        if (n1 - 1.0).abs() > ORTHO_TOL || (n2 - 1.0).abs() > ORTHO_TOL || d.abs() > ORTHO_TOL {
            return Err(Error::InvalidInput(format!(
                "frame is not orthonormal: |e1| = {n1}, |e2| = {n2}, e1·e2 = {d}"
            )));
        }
        Ok(())
    }

    /// `cos(a) e1 + sin(a) e2`.
    pub fn direction(&self, a: f64) -> Vec<f64> {
        let (s, c) = a.sin_cos();
        self.e1.iter().zip(&self.e2).map(|(x, y)| c * x + s * y).collect()
    }
}

/// Simple bivector `L e1 ∧ e2` in the oriented plane `frame`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bivector {
    pub frame: PlaneFrame,
    pub scalar: f64,
}

impl Bivector {
    pub fn n(&self) -> usize {
        self.frame.n()
    }

    /// Components `L_ij = L (e1_i e2_j - e1_j e2_i)`.
    pub fn components(&self) -> Vec<f64> {
        let mut m = wedge(&self.frame.e1, &self.frame.e2);
        m.iter_mut().for_each(|x| *x *= self.scalar);
        m
    }

    /// `𝐋̂ = 𝐋/|L|`; `None` for the zero bivector.
    pub fn unit(&self) -> Option<Bivector> {
        (self.scalar != 0.0).then(|| Bivector { frame: self.frame.clone(), scalar: self.scalar.signum() })
    }

    /// `|𝐋|² = Σ_ij L_ij² = 2 L²`.
    pub fn norm_squared(&self) -> f64 {
        self.components().iter().map(|x| x * x).sum()
    }

    /// Entries `[i, j, L_ij]` for `i < j`.
    pub fn upper_entries(&self) -> Vec<(usize, usize, f64)> {
        let n = self.n();
        let m = self.components();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                out.push((i, j, m[i * n + j]));
            }
        }
        out
    }
}

/// `(a ∧ b)_ij = a_i b_j - a_j b_i` as a row-major matrix.
pub fn wedge(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] = a[i] * b[j] - a[j] * b[i];
        }
    }
    m
}

/// `(a·B)_j = Σ_i a_i B_ij`.
pub fn contract(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    (0..n).map(|j| (0..n).map(|i| a[i] * b[i * n + j]).sum()).collect()
}

/// Full contraction `Σ_ij A_ij B_ij`.
pub fn contract2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Largest component of `a ∧ B` (all index triples `i < j < k`).
pub fn wedge_vector_bivector_max(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let x = a[i] * b[j * n + k] + a[j] * b[k * n + i] + a[k] * b[i * n + j];
                worst = worst.max(x.abs());
            }
        }
    }
    worst
}

/// Largest component of `B ∧ B` (all index quadruples `i < j < k < l`).
pub fn wedge_bivector_self_max(b: &[f64], n: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                for l in k + 1..n {
                    let x = b[i * n + j] * b[k * n + l] - b[i * n + k] * b[j * n + l] + b[i * n + l] * b[j * n + k];
                    worst = worst.max(x.abs());
                }
            }
        }
    }
    worst
}

/// `𝐋 = r ∧ v` of a Cartesian state, oriented so that the scalar follows
/// the rotation sense in the reduced frame.
pub fn bivector_from_state(s: &CartesianState) -> Result<Bivector> {
    let red = reduce_to_plane(s)?;
    Ok(Bivector { frame: red.frame, scalar: integrals::angular_momentum(&red.polar) })
}

/// Direct components `r_i v_j - r_j v_i`.
pub fn bivector_components(s: &CartesianState) -> Vec<f64> {
    wedge(&s.r, &s.v)
}

/// Normalization factor `A(E, L)` of the LRL vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `√(2EL² + k²)` (Kepler), `√(2E(L² - κ) + k²)` (perturbed), `1` otherwise.
    Default,
    Custom(f64),
}

impl Normalization {
    pub fn value(&self, p: &RadialPotential, l: f64, e: f64) -> f64 {
        match self {
            Normalization::Custom(x) => *x,
            Normalization::Default => match p.kind() {
                PotentialKind::Kepler { k } => (2.0 * e * l * l + k * k).max(0.0).sqrt(),
                PotentialKind::Perturbed { k, kappa } => (2.0 * e * (l * l - kappa) + k * k).max(0.0).sqrt(),
                _ => 1.0,
            },
        }
    }
}

/// `Θ̂`, `Θ̂⊥` and the LRL vector at a state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionResult {
    pub theta_hat: Vec<f64>,
    pub theta_hat_perp: Vec<f64>,
    #[serde(rename = "A")]
    pub a: Vec<f64>,
    pub normalization: f64,
    #[serde(rename = "ref")]
    pub reference: ReferencePoint,
    pub sgn_v: f64,
}

struct Prepared {
    red: PlaneReduction,
    spec: EffectivePotentialSpec,
    orbit: Orbit,
    reference: ReferencePoint,
}

fn prepare(s: &CartesianState, p: &RadialPotential, policy: ReferencePolicy, tol: f64) -> Result<Prepared> {
    let red = reduce_to_plane(s)?;
    let l = integrals::angular_momentum(&red.polar);
    if l == 0.0 {
        return Err(Error::ReferenceUnavailable("radial motion (L = 0)".into()));
    }
    let u_eq = p.equilibrium_point().map(|e| e.u_eq).unwrap_or(0.0);
    let spec = EffectivePotentialSpec::with_u_eq(p.clone(), l, u_eq)?;
    let orbit = Orbit::from_state(&spec, &red.polar, tol)?;
    let reference = orbit.reference(policy)?;
    Ok(Prepared { red, spec, orbit, reference })
}

/// Signed `φ0 = |L| ∫_{r0}^{r} dρ/(ρ²√W)`.
fn phi0(pr: &Prepared) -> Result<f64> {
    let s = &pr.red.polar;
    let i = pr.orbit.integral(IntegrandKind::Angular, &pr.reference, s.r, Some(s.v.abs()))?;
    Ok(i * pr.orbit.l().signum())
}

/// Above this value of `|L|/(r|v_r|)` the alternative form loses accuracy.
const ALT_FORM_LIMIT: f64 = 1e4;

/// `Θ̂ = cos φ0 r̂ - sgn(v) sgn(L) sin φ0 θ̂`, with `θ̂ = r̂·𝐋̂`.
fn theta_hat_direct(pr: &Prepared, phi: f64, sgn_v: f64) -> Vec<f64> {
    let l_sign = pr.orbit.l().signum();
    let (sn, cs) = phi.sin_cos();
    pr.red.frame.e1.iter().zip(&pr.red.frame.e2).map(|(r, t)| cs * r - sgn_v * l_sign * sn * t).collect()
}

/// `Θ̂ = (∂_r(r cos φ0)/r) r⃗ + (2r² ∂_r cos φ0 / |𝐋|²) (v⃗·𝐋)`, with
/// `∂_r cos φ0 = -sin φ0 |L|/(r²|v_r|)` from the integrand at the upper limit.
fn theta_hat_alternative(s: &CartesianState, pr: &Prepared, phi: f64) -> Option<Vec<f64>> {
    let r = pr.red.polar.r;
    let vr = pr.red.polar.v;
    let l = pr.orbit.l();
    let ratio = l.abs() / (r * vr.abs());
    if !(ratio <= ALT_FORM_LIMIT) {
        return None;
    }
    let (sn, cs) = phi.sin_cos();
    let d_cos = -sn * l.abs() / (r * r * vr.abs());
    let lmat = wedge(&s.r, &s.v);
    let v_dot_l = contract(&s.v, &lmat);
    let l_norm2 = contract2(&lmat, &lmat);
    let c1 = (cs + r * d_cos) / r;
    let c2 = 2.0 * r * r * d_cos / l_norm2;
    Some(s.r.iter().zip(&v_dot_l).map(|(x, y)| c1 * x + c2 * y).collect())
}

fn directions(s: &CartesianState, pr: &Prepared, normalization: f64) -> Result<DirectionResult> {
    let phi = phi0(pr)?;
    let sgn_v = pr.orbit.sgn_v(&pr.red.polar);
    let direct = theta_hat_direct(pr, phi, sgn_v);
    let theta_hat = theta_hat_alternative(s, pr, phi).unwrap_or_else(|| direct.clone());
    let unit = wedge(&pr.red.frame.e1, &pr.red.frame.e2)
        .into_iter()
        .map(|x| x * pr.orbit.l().signum())
        .collect::<Vec<_>>();
    let theta_hat_perp = contract(&theta_hat, &unit);
    let a = theta_hat.iter().map(|x| normalization * x).collect();
    Ok(DirectionResult { theta_hat, theta_hat_perp, a, normalization, reference: pr.reference, sgn_v })
}

/// `Θ̂` and `Θ̂⊥` at `s` (the `A` field uses unit normalization).
/// For `L = 0` the radial direction `r̂` is returned.
pub fn theta_hat(s: &CartesianState, p: &RadialPotential, policy: ReferencePolicy, tol: f64) -> Result<DirectionResult> {
    let red = reduce_to_plane(s)?;
    if integrals::angular_momentum(&red.polar) == 0.0 {
        let rhat = red.frame.e1.clone();
        return Ok(DirectionResult {
            theta_hat: rhat.clone(),
            theta_hat_perp: vec![0.0; rhat.len()],
            a: rhat,
            normalization: 1.0,
            reference: ReferencePoint { kind: ReferenceKind::TurningMin, r0: red.polar.r, root_index: 0 },
            sgn_v: red.polar.v.signum(),
        });
    }
    let pr = prepare(s, p, policy, tol)?;
    directions(s, &pr, 1.0)
}

/// `Θ̂⊥ = Θ̂·𝐋̂`.
pub fn theta_hat_perp(d: &DirectionResult, b: &Bivector) -> Result<Vec<f64>> {
    let unit = b.unit().ok_or_else(|| Error::InvalidInput("zero bivector has no unit".into()))?;
    Ok(contract(&d.theta_hat, &unit.components()))
}

/// Generalized LRL vector `A = A(E, L) Θ̂`.
pub fn lrl_vector(
    s: &CartesianState,
    p: &RadialPotential,
    policy: ReferencePolicy,
    normalization: Normalization,
    tol: f64,
) -> Result<DirectionResult> {
    let pr = prepare(s, p, policy, tol)?;
    let n = normalization.value(p, pr.orbit.l(), pr.orbit.energy());
    let _ = &pr.spec;
    directions(s, &pr, n)
}

/// The inertial-point variant `A^* = A(E, L) Θ̂` with the inertial reference.
pub fn lrl_variant(s: &CartesianState, p: &RadialPotential, normalization: Normalization, tol: f64) -> Result<Vec<f64>> {
    Ok(lrl_vector(s, p, ReferencePolicy::Fixed(ReferenceKind::Inertial), normalization, tol)?.a)
}

/// Classical Kepler vector `A_* = (|v|² - k/r) r⃗ - (r⃗·v⃗) v⃗ = -(k r̂ + v⃗·𝐋)`.
pub fn kepler_lrl(s: &CartesianState, k: f64) -> Vec<f64> {
    let r = s.radius();
    let v2 = dot(&s.v, &s.v);
    let rv = dot(&s.r, &s.v);
    s.r.iter().zip(&s.v).map(|(x, y)| (v2 - k / r) * x - rv * y).collect()
}

/// Hamilton's vector `u = v⃗ - (k/L) θ̂`.
pub fn hamilton_vector(s: &CartesianState, k: f64) -> Result<Vec<f64>> {
    let b = bivector_from_state(s)?;
    let unit = b.unit().ok_or_else(|| Error::InvalidInput("radial motion has no Hamilton vector".into()))?;
    let rhat: Vec<f64> = s.r.iter().map(|x| x / s.radius()).collect();
    let that = contract(&rhat, &unit.components());
    Ok(s.v.iter().zip(&that).map(|(v, t)| v - k / b.scalar * t).collect())
}

/// `T = t - √2 sgn(v·r) τ0` with `τ0 = ∫_{r0}^{r} dρ/√(2W)`.
pub fn temporal_ndim(s: &CartesianState, p: &RadialPotential, policy: ReferencePolicy, tol: f64) -> Result<f64> {
    let pr = prepare(s, p, policy, tol)?;
    let polar = &pr.red.polar;
    let tau0 = pr.orbit.integral(IntegrandKind::Temporal, &pr.reference, polar.r, Some(polar.v.abs()))?
        / std::f64::consts::SQRT_2;
    Ok(s.t - std::f64::consts::SQRT_2 * pr.orbit.sgn_v(polar) * tau0)
}

/// Counts of components and independent quantities among `(𝐋, Θ̂, E, T)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndependenceReport {
    pub n: usize,
    pub bivector_components: usize,
    /// Number of component relations `(𝐋∧𝐋)_ijkl = 0`.
    pub bivector_wedge_relations: usize,
    pub bivector_independent: usize,
    pub theta_hat_components: usize,
    /// Free components of the unit vector `Θ̂` taken on its own.
    pub theta_hat_independent: usize,
    /// Independent relations `Θ̂∧𝐋 = 0` once `𝐋` is fixed; `Θ̂` keeps one
    /// free angle in the plane.
    pub in_plane_relations: usize,
    pub scalars: usize,
    pub total_independent: usize,
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

pub fn count_independent(n: usize) -> Result<IndependenceReport> {
    if !(2..=8).contains(&n) {
        return Err(Error::InvalidInput(format!("dimension {n} outside 2..=8")));
    }
    let bivector_independent = 2 * n - 3;
    let theta_hat_independent = n - 1;
    Ok(IndependenceReport {
        n,
        bivector_components: n * (n - 1) / 2,
        bivector_wedge_relations: binomial(n, 4),
        bivector_independent,
        theta_hat_components: n,
        theta_hat_independent,
        in_plane_relations: n - 2,
        scalars: 2,
        total_independent: bivector_independent + theta_hat_independent - (n - 2) + 2,
    })
}

/// Numerical rank of the Jacobian of `(r⃗, v⃗, t) ↦ (L_ij, Θ̂, E, T)` at `s`,
/// with singular values below `1e-8 σ_max` treated as zero.
pub fn jacobian_rank(s: &CartesianState, p: &RadialPotential, policy: ReferencePolicy) -> Result<usize> {
    const QUAD_TOL: f64 = 1e-14;
    let n = s.n();
    let u_eq = p.equilibrium_point().map(|e| e.u_eq).unwrap_or(0.0);
    let eval = |x: &[f64]| -> Result<Vec<f64>> {
        let st = CartesianState::new(x[2 * n], x[..n].to_vec(), x[n..2 * n].to_vec())?;
        let lm = wedge(&st.r, &st.v);
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                out.push(lm[i * n + j]);
            }
        }
        let red = reduce_to_plane(&st)?;
        let spec = EffectivePotentialSpec::with_u_eq(p.clone(), integrals::angular_momentum(&red.polar), u_eq)?;
        out.extend(theta_hat(&st, p, policy, QUAD_TOL)?.theta_hat);
        out.push(integrals::energy(&red.polar, &spec));
        out.push(temporal_ndim(&st, p, policy, QUAD_TOL)?);
        Ok(out)
    };
    let mut x0 = s.r.clone();
    x0.extend_from_slice(&s.v);
    x0.push(s.t);
    let m = eval(&x0)?.len();
    let mut jac = DMatrix::<f64>::zeros(m, 2 * n + 1);
    for j in 0..=2 * n {
        let h = 1e-3 * x0[j].abs().max(0.1);
        let at = |d: f64| -> Result<Vec<f64>> {
            let mut x = x0.clone();
            x[j] += d;
            eval(&x)
        };
        let (p1, m1, p2, m2) = (at(h)?, at(-h)?, at(h / 2.0)?, at(-h / 2.0)?);
        for i in 0..m {
            let d1 = (p1[i] - m1[i]) / (2.0 * h);
            let d2 = (p2[i] - m2[i]) / h;
            jac[(i, j)] = (4.0 * d2 - d1) / 3.0;
        }
    }
    let sv = jac.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    Ok(sv.iter().filter(|&&x| x > 1e-8 * max).count())
}

/// Polar state and reduced frame helper used by callers that need both.
pub fn reduce(s: &CartesianState) -> Result<(PlaneFrame, PolarState)> {
    let red = reduce_to_plane(s)?;
    Ok((red.frame, red.polar))
}
