//! Extended point symmetries acting on `(t, r, θ, L, E)`, their finite group
//! actions, Lie brackets, Noether multipliers and determining-equation checks.
//!
//! The angular and temporal offsets
//! `Θ0(r, L, E) = Θ - θ` and `T0(r, L, E) = T - t` are evaluated by quadrature
//! with the reference point recomputed for every `(L, E)`. Their partial
//! derivatives come from centered differences with Richardson extrapolation.

use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrals::{self, Orbit, PolarState, ReferenceKind, ReferencePolicy};
use crate::potentials::{EffectivePotentialSpec, RadialPotential};
use crate::quadrature::{adaptive_gk21, IntegrandKind};

/// Default absolute and relative quadrature tolerance for offset evaluations.
pub const QUAD_TOL: f64 = 1e-14;
/// Largest inner and outer steps of the nested differences in
/// [`commutator_residual`]. Both shrink with `W(r)` and `|E|`, since the higher
/// partials of the offsets grow like powers of `1/W` near an apsis and of
/// `1/|E|` for wide orbits.
pub const COMMUTATOR_INNER_STEP: f64 = 1e-4;
pub const COMMUTATOR_OUTER_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Which {
    #[serde(rename = "X_L")]
    XL,
    #[serde(rename = "X_E")]
    XE,
    #[serde(rename = "X_Theta")]
    XTheta,
    #[serde(rename = "X_T")]
    XT,
}

impl Which {
    pub const ALL: [Which; 4] = [Which::XL, Which::XE, Which::XTheta, Which::XT];

    pub fn as_str(&self) -> &'static str {
        match self {
            Which::XL => "X_L",
            Which::XE => "X_E",
            Which::XTheta => "X_Theta",
            Which::XT => "X_T",
        }
    }
}

/// The action table expected on `(L, E, Θ, T)`, one row per generator in
/// the order of [`Which::ALL`].
pub const CANONICAL_TABLE: [[f64; 4]; 4] =
    [[0.0, 0.0, -1.0, 0.0], [0.0, 0.0, 0.0, 1.0], [1.0, 0.0, 0.0, 0.0], [0.0, -1.0, 0.0, 0.0]];

/// A point of the extended space with the branch `sgn(v)` of the radial motion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtPoint {
    pub t: f64,
    pub r: f64,
    pub theta: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "E")]
    pub e: f64,
    pub sgn_v: f64,
}

/// Components `(η_t, η_r, η_θ, η_L, η_E)` of an extended generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub which: Which,
    pub eta_t: f64,
    pub eta_r: f64,
    pub eta_theta: f64,
    pub eta_l: f64,
    pub eta_e: f64,
}

impl Generator {
    pub fn as_array(&self) -> [f64; 5] {
        [self.eta_t, self.eta_r, self.eta_theta, self.eta_l, self.eta_e]
    }
}

/// `∂Θ0/∂L`, `∂Θ0/∂E`, `∂T0/∂L`, `∂T0/∂E` at fixed `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OffsetPartials {
    pub theta_l: f64,
    pub theta_e: f64,
    pub t_l: f64,
    pub t_e: f64,
}

/// Potential, energy zero and reference choice shared by all symmetry computations.
#[derive(Debug, Clone)]
pub struct SymmetryContext {
    pub potential: RadialPotential,
    pub u_eq: f64,
    pub reference: ReferenceKind,
    pub quad_tol: f64,
}

impl SymmetryContext {
    pub fn new(potential: RadialPotential, reference: ReferenceKind) -> Self {
        let u_eq = potential.equilibrium_point().map(|e| e.u_eq).unwrap_or(0.0);
        Self { potential, u_eq, reference, quad_tol: QUAD_TOL }
    }

    pub fn with_u_eq(mut self, u_eq: f64) -> Self {
        self.u_eq = u_eq;
        self
    }

    pub fn with_quad_tol(mut self, tol: f64) -> Self {
        self.quad_tol = tol;
        self
    }

    fn spec(&self, l: f64) -> Result<EffectivePotentialSpec> {
        EffectivePotentialSpec::with_u_eq(self.potential.clone(), l, self.u_eq)
    }

    /// `W(r) = 2(E + U_eq - U(r)) - L²/r²`.
    pub fn radicand(&self, r: f64, l: f64, e: f64) -> f64 {
        2.0 * (e + self.u_eq - self.potential.u(r)) - l * l / (r * r)
    }

    pub fn point_from_state(&self, s: &PolarState) -> Result<ExtPoint> {
        s.validate()?;
        let l = integrals::angular_momentum(s);
        let spec = self.spec(l)?;
        let e = integrals::energy(s, &spec);
        let sgn_v = if s.v != 0.0 {
            s.v.signum()
        } else {
            Orbit::new(&spec, e, s.r, self.quad_tol)?.sgn_v(s)
        };
        Ok(ExtPoint { t: s.t, r: s.r, theta: s.theta, l, e, sgn_v })
    }

    pub fn state_from_point(&self, p: &ExtPoint) -> Result<PolarState> {
        let w = self.radicand(p.r, p.l, p.e);
        if w < 0.0 {
            return Err(Error::OutsideRegion { r: p.r, lo: f64::NAN, hi: f64::NAN });
        }
        PolarState::new(p.t, p.r, p.theta, p.sgn_v * w.sqrt(), p.l / (p.r * p.r))
    }

    /// `(Θ0, T0)` at radius `r` for `(L, E)` on the branch `sgn_v`.
    pub fn offsets(&self, r: f64, l: f64, e: f64, sgn_v: f64) -> Result<(f64, f64)> {
        let spec = self.spec(l)?;
        let orbit = Orbit::new(&spec, e, r, self.quad_tol)?;
        let reference = orbit.reference(ReferencePolicy::Fixed(self.reference))?;
        let speed = self.radicand(r, l, e).max(0.0).sqrt();
        let ia = orbit.integral(IntegrandKind::Angular, &reference, r, Some(speed))?;
        let it = orbit.integral(IntegrandKind::Temporal, &reference, r, Some(speed))?;
        Ok((-sgn_v * ia, -sgn_v * it))
    }

    /// `(Θ, T)` at an extended point.
    pub fn integrals_at(&self, p: &ExtPoint) -> Result<(f64, f64)> {
        let (th0, t0) = self.offsets(p.r, p.l, p.e, p.sgn_v)?;
        Ok((p.theta + th0, p.t + t0))
    }

    fn default_steps(p: &ExtPoint) -> (f64, f64) {
        (1e-6f64.max(1e-6 * p.l.abs()), 1e-6f64.max(1e-6 * p.e.abs()))
    }

    /// Fails when the radicand at `r` is within the margin reached by
    /// perturbing `(L, E)` by up to `(h_l, h_e)`.
    fn check_margin(&self, p: &ExtPoint, h_l: f64, h_e: f64) -> Result<()> {
        let w = self.radicand(p.r, p.l, p.e);
        let h = h_l.max(h_e);
        let margin = 10.0 * (2.0 + 2.0 * p.l.abs() / (p.r * p.r)) * h;
        if w <= margin {
            return Err(Error::TooCloseToApsis { margin: w });
        }
        Ok(())
    }

    /// Richardson-extrapolated partials of `(Θ0, T0)` in `L` and `E`.
    pub fn partials(&self, p: &ExtPoint, fd_step: Option<f64>) -> Result<OffsetPartials> {
        let (h_l, h_e) = match fd_step {
            Some(h) => (h, h),
            None => Self::default_steps(p),
        };
        self.check_margin(p, h_l, h_e)?;
        let diff = |dl: f64, de: f64| -> Result<(f64, f64)> {
            let a = self.offsets(p.r, p.l + dl, p.e + de, p.sgn_v)?;
            let b = self.offsets(p.r, p.l - dl, p.e - de, p.sgn_v)?;
            let h = dl + de;
            Ok(((a.0 - b.0) / (2.0 * h), (a.1 - b.1) / (2.0 * h)))
        };
        let rich = |d1: (f64, f64), d2: (f64, f64)| ((4.0 * d2.0 - d1.0) / 3.0, (4.0 * d2.1 - d1.1) / 3.0);
        let (theta_l, t_l) = rich(diff(h_l, 0.0)?, diff(h_l / 2.0, 0.0)?);
        let (theta_e, t_e) = rich(diff(0.0, h_e)?, diff(0.0, h_e / 2.0)?);
        Ok(OffsetPartials { theta_l, theta_e, t_l, t_e })
    }

    /// Identity `Θ_E = -T_L` (turning references) and the pointwise relation
    /// `Θ_E = -L Θ_L / (2(E + U_eq - U))`, returned as the two residuals.
    pub fn diagnostic_residuals(&self, p: &ExtPoint, fd_step: Option<f64>) -> Result<(f64, f64)> {
        let d = self.partials(p, fd_step)?;
        let kinetic = p.e + self.u_eq - self.potential.u(p.r);
        Ok((d.theta_e + d.t_l, d.theta_e + p.l * d.theta_l / (2.0 * kinetic)))
    }
}

pub fn generator_components(which: Which, p: &ExtPoint, ctx: &SymmetryContext, fd_step: Option<f64>) -> Result<Generator> {
    let g = |eta_t, eta_theta, eta_l, eta_e| Generator { which, eta_t, eta_r: 0.0, eta_theta, eta_l, eta_e };
    Ok(match which {
        Which::XL => g(0.0, -1.0, 0.0, 0.0),
        Which::XE => g(1.0, 0.0, 0.0, 0.0),
        Which::XTheta => {
            let d = ctx.partials(p, fd_step)?;
            g(d.theta_e, -d.theta_l, 1.0, 0.0)
        }
        Which::XT => {
            let d = ctx.partials(p, fd_step)?;
            g(d.t_e, -d.t_l, 0.0, -1.0)
        }
    })
}

/// `∫_0^ε f(σ) dσ` for the smooth flow integrands.
fn flow_integral(f: impl Fn(f64) -> Result<f64>, eps: f64) -> Result<f64> {
    let err = std::cell::RefCell::new(None);
    let g = |s: f64| match f(s) {
        Ok(v) => v,
        Err(e) => {
            err.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };
    let res = adaptive_gk21(g, 0.0, eps, 1e-12, 1e-10);
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    Ok(res?.value)
}

/// The finite transformation with parameter `ε` generated by `which`.
/// `r` and the branch are invariant.
pub fn apply_group(which: Which, eps: f64, p: &ExtPoint, ctx: &SymmetryContext) -> Result<ExtPoint> {
    let mut q = *p;
    match which {
        Which::XL => q.theta -= eps,
        Which::XE => q.t += eps,
        Which::XTheta => {
            q.l = p.l + eps;
            let (th_a, _) = ctx.offsets(p.r, p.l, p.e, p.sgn_v)?;
            let (th_b, _) = ctx.offsets(p.r, q.l, p.e, p.sgn_v)?;
            q.theta = p.theta + th_a - th_b;
            let dt = flow_integral(|s| Ok(ctx.partials(&ExtPoint { l: p.l + s, ..*p }, None)?.theta_e), eps)?;
            q.t = p.t + dt;
        }
        Which::XT => {
            q.e = p.e - eps;
            let (_, t_a) = ctx.offsets(p.r, p.l, p.e, p.sgn_v)?;
            let (_, t_b) = ctx.offsets(p.r, p.l, q.e, p.sgn_v)?;
            q.t = p.t + t_a - t_b;
            let dth = flow_integral(|s| Ok(ctx.partials(&ExtPoint { e: p.e - s, ..*p }, None)?.t_l), eps)?;
            q.theta = p.theta - dth;
        }
    }
    Ok(q)
}

/// `(L, E, Θ, T)` at an extended point.
pub fn first_integrals_at(p: &ExtPoint, ctx: &SymmetryContext) -> Result<[f64; 4]> {
    let (th, t) = ctx.integrals_at(p)?;
    Ok([p.l, p.e, th, t])
}

/// `prX(I)` for `I = (L, E, Θ, T)`, by differentiating along the finite flow
/// at `ε = 0` with step `fd_step` (default `1e-4`).
pub fn action_on_integrals(which: Which, s: &PolarState, ctx: &SymmetryContext, fd_step: Option<f64>) -> Result<[f64; 4]> {
    let p = ctx.point_from_state(s)?;
    action_at_point(which, &p, ctx, fd_step)
}

pub fn action_at_point(which: Which, p: &ExtPoint, ctx: &SymmetryContext, fd_step: Option<f64>) -> Result<[f64; 4]> {
    let h = fd_step.unwrap_or(1e-4);
    ctx.check_margin(p, 2.0 * h, 2.0 * h)?;
    let at = |eps: f64| first_integrals_at(&apply_group(which, eps, p, ctx)?, ctx);
    let (p1, m1, p2, m2) = (at(h)?, at(-h)?, at(h / 2.0)?, at(-h / 2.0)?);
    let mut out = [0.0; 4];
    for i in 0..4 {
        let d1 = (p1[i] - m1[i]) / (2.0 * h);
        let d2 = (p2[i] - m2[i]) / h;
        out[i] = (4.0 * d2 - d1) / 3.0;
    }
    Ok(out)
}

/// Max-norm of the Lie bracket `[X1, X2]` on `(t, r, θ, L, E)`.
///
/// Components depend on `(r, L, E)` only and `η_r = 0`, so
/// `[X1, X2] = (η1_L ∂_L + η1_E ∂_E) η2 - (η2_L ∂_L + η2_E ∂_E) η1`; the
/// directional derivatives are nested Richardson differences.
pub fn commutator_residual(w1: Which, w2: Which, p: &ExtPoint, ctx: &SymmetryContext) -> Result<f64> {
    let w = ctx.radicand(p.r, p.l, p.e);
    let mut ho = COMMUTATOR_OUTER_STEP.min(0.008 * w);
    if p.e != 0.0 {
        ho = ho.min(0.01 * p.e.abs());
    }
    let hi = COMMUTATOR_INNER_STEP.min(0.3 * ho);
    commutator_residual_with_steps(w1, w2, p, ctx, hi, ho)
}

/// [`commutator_residual`] with explicit inner and outer steps.
pub fn commutator_residual_with_steps(
    w1: Which,
    w2: Which,
    p: &ExtPoint,
    ctx: &SymmetryContext,
    hi: f64,
    ho: f64,
) -> Result<f64> {
    ctx.check_margin(p, ho + hi, ho + hi)?;
    let comps = |w: Which, q: &ExtPoint| -> Result<[f64; 5]> { Ok(generator_components(w, q, ctx, Some(hi))?.as_array()) };
    let directional = |along: &Generator, target: Which| -> Result<[f64; 5]> {
        let (dl, de) = (along.eta_l, along.eta_e);
        if dl == 0.0 && de == 0.0 {
            return Ok([0.0; 5]);
        }
        let shift = |s: f64| ExtPoint { l: p.l + s * dl, e: p.e + s * de, ..*p };
        let (a1, b1) = (comps(target, &shift(ho))?, comps(target, &shift(-ho))?);
        let (a2, b2) = (comps(target, &shift(ho / 2.0))?, comps(target, &shift(-ho / 2.0))?);
        let mut out = [0.0; 5];
        for i in 0..5 {
            let d1 = (a1[i] - b1[i]) / (2.0 * ho);
            let d2 = (a2[i] - b2[i]) / ho;
            out[i] = (4.0 * d2 - d1) / 3.0;
        }
        Ok(out)
    };
    let g1 = generator_components(w1, p, ctx, Some(hi))?;
    let g2 = generator_components(w2, p, ctx, Some(hi))?;
    let a = directional(&g1, w2)?;
    let b = directional(&g2, w1)?;
    Ok(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

/// Characteristic `(P^r, P^θ) = (η_r - v η_t, η_θ - ω η_t)` of a generator at a state.
pub fn characteristic(g: &Generator, s: &PolarState) -> (f64, f64) {
    (g.eta_r - s.v * g.eta_t, g.eta_theta - s.omega * g.eta_t)
}

fn partial(f: &impl Fn(&PolarState) -> Result<f64>, s: &PolarState, field: usize, fd_step: Option<f64>) -> Result<f64> {
    let x = [s.t, s.r, s.theta, s.v, s.omega][field];
    let h = fd_step.unwrap_or_else(|| 1e-6f64.max(1e-6 * x.abs()));
    let at = |d: f64| -> Result<f64> {
        let mut q = *s;
        match field {
            0 => q.t += d,
            1 => q.r += d,
            2 => q.theta += d,
            3 => q.v += d,
            _ => q.omega += d,
        }
        f(&q)
    };
    let d1 = (at(h)? - at(-h)?) / (2.0 * h);
    let d2 = (at(h / 2.0)? - at(-h / 2.0)?) / h;
    Ok((4.0 * d2 - d1) / 3.0)
}

/// Multipliers `(Q^r, Q^θ) = (-I_v, -r⁻² I_ω)`.
pub fn noether_multiplier(
    i: impl Fn(&PolarState) -> Result<f64>,
    s: &PolarState,
    fd_step: Option<f64>,
) -> Result<(f64, f64)> {
    let iv = partial(&i, s, 3, fd_step)?;
    let iw = partial(&i, s, 4, fd_step)?;
    Ok((-iv, -iw / (s.r * s.r)))
}

/// A jet point: a polar state together with free accelerations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JetPoint {
    pub state: PolarState,
    pub a_r: f64,
    pub a_theta: f64,
}

impl JetPoint {
    /// The jet point whose accelerations solve the equations of motion.
    pub fn on_solution(state: PolarState, p: &RadialPotential) -> Self {
        let (r, v, w) = (state.r, state.v, state.omega);
        Self { state, a_r: r * w * w + p.force(r), a_theta: -2.0 * v * w / r }
    }
}

/// `|dI/dt - RHS|` where `dI/dt = I_t + v I_r + ω I_θ + a_r I_v + a_θ I_ω`
/// and `RHS = (a_r - rω² - F) I_v + (a_θ + 2vω/r) I_ω`.
pub fn noether_identity_residual(
    i: impl Fn(&PolarState) -> Result<f64>,
    jp: &JetPoint,
    p: &RadialPotential,
    fd_step: Option<f64>,
) -> Result<f64> {
    let s = &jp.state;
    let d: Vec<f64> = (0..5).map(|k| partial(&i, s, k, fd_step)).collect::<Result<_>>()?;
    let lhs = d[0] + s.v * d[1] + s.omega * d[2] + jp.a_r * d[3] + jp.a_theta * d[4];
    let rhs = (jp.a_r - s.r * s.omega * s.omega - p.force(s.r)) * d[3] + (jp.a_theta + 2.0 * s.v * s.omega / s.r) * d[4];
    Ok((lhs - rhs).abs())
}

/// Value, gradient and Hessian of a function of `(t, r, θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet2 {
    pub v: f64,
    pub g: [f64; 3],
    pub h: [[f64; 3]; 3],
}

impl Jet2 {
    pub fn constant(v: f64) -> Self {
        Self { v, g: [0.0; 3], h: [[0.0; 3]; 3] }
    }

    /// The coordinate function with index `i` (0 = t, 1 = r, 2 = θ).
    pub fn variable(v: f64, i: usize) -> Self {
        let mut j = Self::constant(v);
        j.g[i] = 1.0;
        j
    }

    /// `f(self)` given `f`, `f'`, `f''` at the value.
    pub fn chain(self, f0: f64, f1: f64, f2: f64) -> Self {
        let mut out = Self::constant(f0);
        for a in 0..3 {
            out.g[a] = f1 * self.g[a];
            for b in 0..3 {
                out.h[a][b] = f1 * self.h[a][b] + f2 * self.g[a] * self.g[b];
            }
        }
        out
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    pub fn ln(self) -> Self {
        self.chain(self.v.ln(), 1.0 / self.v, -1.0 / (self.v * self.v))
    }

    pub fn powf(self, p: f64) -> Self {
        let x = self.v;
        self.chain(x.powf(p), p * x.powf(p - 1.0), p * (p - 1.0) * x.powf(p - 2.0))
    }

    pub fn sqrt(self) -> Self {
        self.powf(0.5)
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn recip(self) -> Self {
        let x = self.v;
        self.chain(1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x))
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(mut self, o: Jet2) -> Jet2 {
        self.v += o.v;
        for a in 0..3 {
            self.g[a] += o.g[a];
            for b in 0..3 {
                self.h[a][b] += o.h[a][b];
            }
        }
        self
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self * -1.0
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        self + (-o)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        let mut out = Jet2::constant(self.v * o.v);
        for a in 0..3 {
            out.g[a] = self.g[a] * o.v + self.v * o.g[a];
            for b in 0..3 {
                out.h[a][b] = self.h[a][b] * o.v + self.g[a] * o.g[b] + self.g[b] * o.g[a] + self.v * o.h[a][b];
            }
        }
        out
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(mut self, c: f64) -> Jet2 {
        self.v *= c;
        for a in 0..3 {
            self.g[a] *= c;
            for b in 0..3 {
                self.h[a][b] *= c;
            }
        }
        self
    }
}

impl Add<f64> for Jet2 {
    type Output = Jet2;
    fn add(mut self, c: f64) -> Jet2 {
        self.v += c;
        self
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Jet2) -> Jet2 {
        self * o.recip()
    }
}

pub type JetFn = Box<dyn Fn(&[Jet2; 3]) -> Jet2 + Send + Sync>;

/// A point symmetry `τ ∂_t + ξ ∂_r + ψ ∂_θ` with components given as
/// functions of `(t, r, θ)` evaluated in [`Jet2`] arithmetic.
pub struct PointGenerator {
    pub name: String,
    pub tau: JetFn,
    pub xi: JetFn,
    pub psi: JetFn,
}

impl PointGenerator {
    pub fn new(
        name: impl Into<String>,
        tau: impl Fn(&[Jet2; 3]) -> Jet2 + Send + Sync + 'static,
        xi: impl Fn(&[Jet2; 3]) -> Jet2 + Send + Sync + 'static,
        psi: impl Fn(&[Jet2; 3]) -> Jet2 + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), tau: Box::new(tau), xi: Box::new(xi), psi: Box::new(psi) }
    }

    /// `X₁ = ∂θ`.
    pub fn rotation() -> Self {
        Self::new("X1", |_| Jet2::constant(0.0), |_| Jet2::constant(0.0), |_| Jet2::constant(1.0))
    }

    /// `X₂ = ∂t`.
    pub fn time_translation() -> Self {
        Self::new("X2", |_| Jet2::constant(1.0), |_| Jet2::constant(0.0), |_| Jet2::constant(0.0))
    }

    /// `X₃ = t ∂t + (2/(1 - p)) r ∂r` for power-law forces `F ∝ r^p`, `p ≠ 1`.
    pub fn power_dilation(p: f64) -> Self {
        let c = 2.0 / (1.0 - p);
        Self::new("X3", |x| x[0], move |x| x[1] * c, |_| Jet2::constant(0.0))
    }

    /// `X₄± = e^{±2√k t}(∂t ± √k r ∂r)` for `F = k r + k̃ r⁻³`, `k > 0`.
    pub fn time_dependent_dilation(k: f64, plus: bool) -> Self {
        let sk = k.sqrt();
        let sign = if plus { 1.0 } else { -1.0 };
        let e = move |x: &[Jet2; 3]| (x[0] * (2.0 * sign * sk)).exp();
        Self::new("X4", e, move |x| e(x) * x[1] * (sign * sk), |_| Jet2::constant(0.0))
    }
}

/// Largest absolute value of the two determining equations over `samples`.
///
/// With `Q_r = ξ - τ r'`, `Q_θ = ψ - τ θ'`, the generator is a symmetry of
/// `r'' = Φ_r = rθ'² + F(r)`, `θ'' = Φ_θ = -2r'θ'/r` when the linearized
/// equations annihilate `(Q_r, Q_θ)` on solutions. Time derivatives are total
/// derivatives with the accelerations replaced by `Φ`.
pub fn point_symmetry_residual(gen: &PointGenerator, samples: &[PolarState], p: &RadialPotential) -> f64 {
    samples.iter().map(|s| point_residual_at(gen, s, p)).fold(0.0, f64::max)
}

fn point_residual_at(gen: &PointGenerator, s: &PolarState, p: &RadialPotential) -> f64 {
    let x = [Jet2::variable(s.t, 0), Jet2::variable(s.r, 1), Jet2::variable(s.theta, 2)];
    let (tau, xi, psi) = ((gen.tau)(&x), (gen.xi)(&x), (gen.psi)(&x));
    let (r, u, w) = (s.r, s.v, s.omega);
    let f = p.force(r);
    let fp = -p.d2u(r);
    let phi_r = r * w * w + f;
    let phi_t = -2.0 * u * w / r;
    let vel = [1.0, u, w];
    let acc = [0.0, phi_r, phi_t];
    let d1 = |j: &Jet2| (0..3).map(|a| vel[a] * j.g[a]).sum::<f64>();
    let d2 = |j: &Jet2| {
        let mut s = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                s += vel[a] * vel[b] * j.h[a][b];
            }
            s += acc[a] * j.g[a];
        }
        s
    };
    let d_phi_r = (w * w + fp) * u + 2.0 * r * w * phi_t;
    let d_phi_t = 2.0 * u * u * w / (r * r) - 2.0 * w / r * phi_r - 2.0 * u / r * phi_t;
    let q_r = xi.v - tau.v * u;
    let dq_r = d1(&xi) - d1(&tau) * u - tau.v * phi_r;
    let dq_t = d1(&psi) - d1(&tau) * w - tau.v * phi_t;
    let ddq_r = d2(&xi) - d2(&tau) * u - 2.0 * d1(&tau) * phi_r - tau.v * d_phi_r;
    let ddq_t = d2(&psi) - d2(&tau) * w - 2.0 * d1(&tau) * phi_t - tau.v * d_phi_t;
    let e_r = ddq_r - ((w * w + fp) * q_r + 2.0 * r * w * dq_t);
    let e_t = ddq_t - (2.0 * u * w / (r * r) * q_r - 2.0 * w / r * dq_r - 2.0 * u / r * dq_t);
    e_r.abs().max(e_t.abs())
}

/// Components `η_t(r)`, `η_θ(r)` of a generator recovered on a radial grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveredGenerator {
    pub which: Which,
    pub eta_l: f64,
    pub eta_e: f64,
    pub grid: Vec<f64>,
    pub eta_t: Vec<f64>,
    pub eta_theta: Vec<f64>,
    /// Index of the grid node where the additive constants were matched.
    pub match_index: usize,
}

/// Recovers `X_E`, `X_L`, `X_Theta` and `X_T` from the restricted
/// determining system
///
/// ```text
/// ∂_r η_t = s (L η_L / r² - η_E) / W^{3/2}
/// ∂_r η_θ = s (2(E + U_eq - U) η_L - L η_E) / (r² W^{3/2})
/// ```
///
/// integrated along `grid` (inside one allowed region, away from turning
/// points). The additive constants are matched to [`generator_components`]
/// at the middle node.
pub fn solve_special_symmetries(
    ctx: &SymmetryContext,
    l: f64,
    e: f64,
    sgn_v: f64,
    grid: &[f64],
) -> Result<Vec<RecoveredGenerator>> {
    if grid.len() < 2 || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("grid must be strictly increasing with at least two nodes".into()));
    }
    if let Some(&r) = grid.iter().find(|&&r| ctx.radicand(r, l, e) <= 0.0) {
        return Err(Error::OutsideRegion { r, lo: grid[0], hi: grid[grid.len() - 1] });
    }
    let spec = ctx.spec(l)?;
    let orbit = Orbit::new(&spec, e, grid[0], ctx.quad_tol)?;
    let region = orbit.region();
    if grid.iter().any(|&r| !region.contains(r)) {
        return Err(Error::InvalidInput("grid crosses a turning point; split it at the apsis".into()));
    }
    let m = grid.len() / 2;
    let mid = ExtPoint { t: 0.0, r: grid[m], theta: 0.0, l, e, sgn_v };
    let mut out = vec![
        RecoveredGenerator {
            which: Which::XE,
            eta_l: 0.0,
            eta_e: 0.0,
            grid: grid.to_vec(),
            eta_t: vec![1.0; grid.len()],
            eta_theta: vec![0.0; grid.len()],
            match_index: m,
        },
        RecoveredGenerator {
            which: Which::XL,
            eta_l: 0.0,
            eta_e: 0.0,
            grid: grid.to_vec(),
            eta_t: vec![0.0; grid.len()],
            eta_theta: vec![-1.0; grid.len()],
            match_index: m,
        },
    ];
    for (which, eta_l, eta_e) in [(Which::XTheta, 1.0, 0.0), (Which::XT, 0.0, -1.0)] {
        let anchor = generator_components(which, &mid, ctx, None)?;
        let dt = |r: f64| {
            let w = ctx.radicand(r, l, e);
            sgn_v * (l * eta_l / (r * r) - eta_e) / w.powf(1.5)
        };
        let dth = |r: f64| {
            let w = ctx.radicand(r, l, e);
            let kin = 2.0 * (e + ctx.u_eq - ctx.potential.u(r));
            sgn_v * (kin * eta_l - l * eta_e) / (r * r * w.powf(1.5))
        };
        let integrate = |f: &dyn Fn(f64) -> f64, a: f64, b: f64| -> Result<f64> {
            Ok(adaptive_gk21(f, a, b, 1e-13, 1e-13)?.value)
        };
        let mut eta_t = vec![0.0; grid.len()];
        let mut eta_theta = vec![0.0; grid.len()];
        eta_t[m] = anchor.eta_t;
        eta_theta[m] = anchor.eta_theta;
        for i in (m + 1)..grid.len() {
            eta_t[i] = eta_t[i - 1] + integrate(&dt, grid[i - 1], grid[i])?;
            eta_theta[i] = eta_theta[i - 1] + integrate(&dth, grid[i - 1], grid[i])?;
        }
        for i in (0..m).rev() {
            eta_t[i] = eta_t[i + 1] - integrate(&dt, grid[i], grid[i + 1])?;
            eta_theta[i] = eta_theta[i + 1] - integrate(&dth, grid[i], grid[i + 1])?;
        }
        out.push(RecoveredGenerator { which, eta_l, eta_e, grid: grid.to_vec(), eta_t, eta_theta, match_index: m });
    }
    Ok(out)
}

/// Largest deviation of recovered components from [`generator_components`]
/// over the grid.
pub fn recovery_residual(rec: &RecoveredGenerator, ctx: &SymmetryContext, sgn_v: f64, l: f64, e: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (i, &r) in rec.grid.iter().enumerate() {
        let p = ExtPoint { t: 0.0, r, theta: 0.0, l, e, sgn_v };
        let g = generator_components(rec.which, &p, ctx, None)?;
        worst = worst.max((g.eta_t - rec.eta_t[i]).abs()).max((g.eta_theta - rec.eta_theta[i]).abs());
    }
    Ok(worst)
}
