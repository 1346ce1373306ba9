//! Root finding for turning and inertial points, and adaptive quadrature of
//! the two integrands `h(r)/sqrt(W(r))` with `h = 1` (temporal) or
//! `h = L/r^2` (angular).
//!
//! At a simple root `a` of the radicand the substitution `r = a ± s^2` turns
//! the integrand into the bounded function `2 h(r)/sqrt(|D(a, r)|)`, where
//! `D(a, r) = (W(r) - W(a))/(r - a)` is evaluated in a cancellation-free form
//! from the potential's divided difference.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potentials::EffectivePotentialSpec;

/// The radicand `W(r) = 2(E + U_eq - U(r)) - L^2/r^2` for fixed `(L, E)`.
#[derive(Debug, Clone)]
pub struct Radicand {
    spec: EffectivePotentialSpec,
    e: f64,
}

impl Radicand {
    pub fn new(spec: EffectivePotentialSpec, e: f64) -> Self {
        Self { spec, e }
    }

    pub fn spec(&self) -> &EffectivePotentialSpec {
        &self.spec
    }

    pub fn energy(&self) -> f64 {
        self.e
    }

    pub fn l(&self) -> f64 {
        self.spec.l
    }

    pub fn w(&self, r: f64) -> f64 {
        let l = self.spec.l;
        2.0 * (self.e + self.spec.u_eq - self.spec.potential.u(r)) - l * l / (r * r)
    }

    pub fn dw(&self, r: f64) -> f64 {
        let l = self.spec.l;
        -2.0 * self.spec.potential.du(r) + 2.0 * l * l / (r * r * r)
    }

    pub fn d2w(&self, r: f64) -> f64 {
        let l = self.spec.l;
        -2.0 * self.spec.potential.d2u(r) - 6.0 * l * l / (r * r * r * r)
    }

    /// Magnitude of the terms that make up `W(r)`, used for relative tolerances.
    pub fn scale(&self, r: f64) -> f64 {
        let l = self.spec.l;
        2.0 * (self.e.abs() + self.spec.u_eq.abs() + self.spec.potential.u(r).abs()) + l * l / (r * r)
    }

    /// `(W(r) - W(a)) / (r - a)` without cancellation; equals `W'(a)` at `r = a`.
    pub fn diff_quotient(&self, a: f64, r: f64) -> f64 {
        let l = self.spec.l;
        -2.0 * self.spec.potential.slope(a, r) + l * l * (r + a) / (r * r * a * a)
    }
}

/// Geometric scan grid `[lo_factor * r_ref, hi_factor * r_ref]` with `nodes` points.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    pub r_ref: f64,
    pub lo_factor: f64,
    pub hi_factor: f64,
    pub nodes: usize,
    /// Upper end of the potential's domain; the grid stays strictly below it.
    pub r_sup: f64,
}

impl ScanConfig {
    pub fn new(r_ref: f64, r_sup: f64) -> Self {
        Self { r_ref, lo_factor: 1e-6, hi_factor: 1e6, nodes: 256, r_sup }
    }

    /// Default grid, centred on the first inertial point when one exists.
    pub fn for_spec(spec: &EffectivePotentialSpec) -> Self {
        let r_sup = spec.potential.r_sup();
        let unit = Self::new(1.0, r_sup);
        match find_inertial_points(spec, &unit).first() {
            Some(root) => Self::new(root.r, r_sup),
            None => unit,
        }
    }

    pub fn bounds(&self) -> (f64, f64) {
        let lo = self.lo_factor * self.r_ref;
        let mut hi = self.hi_factor * self.r_ref;
        if self.r_sup.is_finite() && hi >= self.r_sup {
            hi = self.r_sup * (1.0 - 1e-12);
        }
        (lo, hi)
    }

    pub fn grid(&self) -> Vec<f64> {
        let (lo, hi) = self.bounds();
        let n = self.nodes.max(2);
        let ratio = (hi / lo).ln() / (n - 1) as f64;
        (0..n)
            .map(|i| if i == n - 1 { hi } else { lo * (ratio * i as f64).exp() })
            .collect()
    }
}

/// Multiplicity of a root of the radicand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootKind {
    Simple,
    /// A double root at an inertial point, the boundary case `E = E_min`.
    CircularDegenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub r: f64,
    pub kind: RootKind,
}

/// Brent's method on a sign-changing bracket, converged to machine precision.
pub fn brent(f: impl Fn(f64) -> f64, a: f64, b: f64) -> Result<f64> {
    let (mut a, mut b) = (a, b);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa * fb > 0.0 || !fa.is_finite() || !fb.is_finite() {
        return Err(Error::InvalidInput(format!("no sign change on [{a}, {b}]")));
    }
    let (mut c, mut fc) = (b, fb);
    let (mut d, mut e) = (b - a, b - a);
    for _ in 0..300 {
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 1e-300;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(xm) };
        fb = f(b);
    }
    Ok(b)
}

fn sign_change_roots(f: &impl Fn(f64) -> f64, nodes: &[f64], skip: &[bool]) -> Result<Vec<f64>> {
    let values: Vec<f64> = nodes.iter().map(|&x| f(x)).collect();
    let mut out = Vec::new();
    for i in 0..nodes.len() {
        if values[i] == 0.0 && !skip[i] {
            out.push(nodes[i]);
        }
        if i + 1 < nodes.len() && !(skip[i] || skip[i + 1]) && values[i] * values[i + 1] < 0.0 {
            out.push(brent(f, nodes[i], nodes[i + 1])?);
        }
    }
    Ok(out)
}

/// Roots of `U_eff'(r) = U'(r) - L^2/r^3` on the scan grid.
pub fn find_inertial_points(spec: &EffectivePotentialSpec, scan: &ScanConfig) -> Vec<Root> {
    let l2 = spec.l * spec.l;
    let g = |r: f64| spec.potential.du(r) * r * r * r - l2;
    let nodes = scan.grid();
    let skip = vec![false; nodes.len()];
    sign_change_roots(&g, &nodes, &skip)
        .unwrap_or_default()
        .into_iter()
        .map(|r| Root { r, kind: RootKind::Simple })
        .collect()
}

/// Relative tolerance on `W(r^*)` for reporting a double root at an inertial point.
pub const DOUBLE_ROOT_TOL: f64 = 1e-12;

/// Sorted roots of the radicand, with double roots at inertial points flagged.
pub fn find_turning_points(rad: &Radicand, scan: &ScanConfig) -> Vec<Root> {
    let inertial = find_inertial_points(rad.spec(), scan);
    let (lo, hi) = scan.bounds();
    let mut nodes = scan.grid();
    nodes.extend(inertial.iter().map(|p| p.r).filter(|&r| r > lo && r < hi));
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    nodes.dedup();
    let mut skip = vec![false; nodes.len()];
    let mut roots = Vec::new();
    for p in &inertial {
        let w = rad.w(p.r);
        let tol = 2.0 * DOUBLE_ROOT_TOL * rad.spec().u_eff(p.r).abs().max(1.0);
        if w.abs() <= tol {
            roots.push(Root { r: p.r, kind: RootKind::CircularDegenerate });
            if let Some(i) = nodes.iter().position(|&x| x == p.r) {
                skip[i] = true;
            }
        }
    }
    // Intervals touching a double root are not searched for sign changes.
    let w = |r: f64| rad.w(r);
    if let Ok(simple) = sign_change_roots(&w, &nodes, &skip) {
        roots.extend(simple.into_iter().map(|r| Root { r, kind: RootKind::Simple }));
    }
    roots.sort_by(|a, b| a.r.partial_cmp(&b.r).unwrap_or(Ordering::Equal));
    roots
}

/// An interval of radii where `W >= 0`; `None` marks an open end at the
/// domain boundary (0 or `r_sup`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub lo: Option<f64>,
    pub hi: Option<f64>,
}

impl Region {
    pub fn contains(&self, r: f64) -> bool {
        self.lo.is_none_or(|lo| r >= lo) && self.hi.is_none_or(|hi| r <= hi)
    }
}

/// Allowed regions bounded by the given sorted simple roots.
pub fn allowed_regions(rad: &Radicand, simple: &[f64], scan: &ScanConfig) -> Vec<Region> {
    if simple.is_empty() {
        let any_positive = scan.grid().iter().any(|&r| rad.w(r) > 0.0);
        return if any_positive { vec![Region { lo: None, hi: None }] } else { Vec::new() };
    }
    let mut out = Vec::new();
    if rad.dw(simple[0]) < 0.0 {
        out.push(Region { lo: None, hi: Some(simple[0]) });
    }
    for (i, &r) in simple.iter().enumerate() {
        if rad.dw(r) > 0.0 {
            out.push(Region { lo: Some(r), hi: simple.get(i + 1).copied() });
        }
    }
    out
}

/// Which integrand `h(r)/sqrt(W(r))` to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegrandKind {
    /// `h = L / r^2`.
    Angular,
    /// `h = 1`.
    Temporal,
}

impl IntegrandKind {
    fn h(self, l: f64, r: f64) -> f64 {
        match self {
            IntegrandKind::Angular => l / (r * r),
            IntegrandKind::Temporal => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularEnd {
    None,
    AtA,
    AtB,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularIntegralSpec {
    pub kind: IntegrandKind,
    pub a: f64,
    pub b: f64,
    pub singular: SingularEnd,
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
}

impl QuadResult {
    const ZERO: QuadResult = QuadResult { value: 0.0, error: 0.0 };

    fn add(self, o: QuadResult) -> QuadResult {
        QuadResult { value: self.value + o.value, error: self.error + o.error }
    }

    fn neg(self) -> QuadResult {
        QuadResult { value: -self.value, error: self.error }
    }
}

/// Default quadrature tolerance (absolute plus relative).
pub const DEFAULT_TOL: f64 = 1e-10;
/// Maximum bisection depth of a single panel.
pub const MAX_DEPTH: u32 = 40;
const MAX_PANELS: usize = 4000;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_73,
    0.054_755_896_574_352,
    0.075_039_674_810_919_95,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_85,
    0.134_709_217_311_473_33,
    0.142_775_938_577_060_08,
    0.147_739_104_901_338_5,
    0.149_445_554_002_916_9,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

fn gk21(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[10] * fc;
    let mut g = 0.0;
    let mut abs = (WGK[10] * fc).abs();
    for j in 0..10 {
        let x = h * XGK[j];
        let (f1, f2) = (f(c - x), f(c + x));
        k += WGK[j] * (f1 + f2);
        abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            g += WG[j / 2] * (f1 + f2);
        }
    }
    (k * h, (k - g).abs() * h.abs(), abs * h.abs())
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    depth: u32,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error.total_cmp(&o.error)
    }
}

fn panel(f: &impl Fn(f64) -> f64, a: f64, b: f64, depth: u32) -> Panel {
    let (value, err, abs) = gk21(f, a, b);
    // Below the rounding floor the Kronrod-Gauss difference is noise.
    let error = if err <= 50.0 * f64::EPSILON * abs { 0.0 } else { err };
    Panel { a, b, value, error, depth }
}

fn sum_panels(panels: &[Panel]) -> QuadResult {
    let mut sorted: Vec<&Panel> = panels.iter().collect();
    sorted.sort_by(|x, y| x.a.total_cmp(&y.a));
    sorted.iter().fold(QuadResult::ZERO, |acc, p| acc.add(QuadResult { value: p.value, error: p.error }))
}

/// Globally adaptive 21-point Gauss-Kronrod quadrature of a smooth function.
///
/// Converges when the summed error estimate is at most
/// `max(tol_abs, tol_rel * |value|)`.
pub fn adaptive_gk21(f: impl Fn(f64) -> f64, a: f64, b: f64, tol_abs: f64, tol_rel: f64) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult::ZERO);
    }
    let mut heap = BinaryHeap::new();
    heap.push(panel(&f, a, b, 0));
    let mut done: Vec<Panel> = Vec::new();
    loop {
        let total = sum_panels(&done).add(heap.iter().fold(QuadResult::ZERO, |acc, p| {
            acc.add(QuadResult { value: p.value, error: p.error })
        }));
        if !total.value.is_finite() {
            return Err(Error::AccuracyFailure { value: total.value, estimate: total.error });
        }
        if total.error <= tol_abs.max(tol_rel * total.value.abs()) {
            done.extend(heap.into_vec());
            return Ok(sum_panels(&done));
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => return Err(Error::AccuracyFailure { value: total.value, estimate: total.error }),
        };
        if worst.depth >= MAX_DEPTH || done.len() + heap.len() >= MAX_PANELS {
            return Err(Error::AccuracyFailure { value: total.value, estimate: total.error });
        }
        if worst.error == 0.0 {
            done.push(worst);
            continue;
        }
        let m = 0.5 * (worst.a + worst.b);
        heap.push(panel(&f, worst.a, m, worst.depth + 1));
        heap.push(panel(&f, m, worst.b, worst.depth + 1));
    }
}

/// Relative margin on `|W'(a)|` below which an endpoint is not a simple root.
const SIMPLE_ROOT_REL: f64 = 1e-8;

fn check_simple_root(rad: &Radicand, a: f64) -> Result<()> {
    let slope = rad.dw(a);
    if !(slope.abs() > SIMPLE_ROOT_REL * rad.scale(a) / a) {
        return Err(Error::NotSimpleRoot { r: a, slope });
    }
    Ok(())
}

/// `∫_anchor^x h/sqrt(W)` where `anchor` is a simple root of `W` and `W > 0`
/// strictly between the two. The result is oriented (negative for `x < anchor`).
///
/// `speed` may carry `|v| = sqrt(W(x))` from an on-shell state; close to the
/// anchor it fixes the substitution limit `s = sqrt(|x - anchor|)` more
/// accurately than the difference of two nearly equal radii.
pub fn integrate_from_root(
    rad: &Radicand,
    kind: IntegrandKind,
    anchor: f64,
    x: f64,
    speed: Option<f64>,
    tol: f64,
) -> Result<QuadResult> {
    if x == anchor {
        return Ok(QuadResult::ZERO);
    }
    check_simple_root(rad, anchor)?;
    let sigma = if x > anchor { 1.0 } else { -1.0 };
    let l = rad.l();
    let q = |s: f64| {
        let r = anchor + sigma * s * s;
        sigma * rad.diff_quotient(anchor, r)
    };
    let mut s_max = (x - anchor).abs().sqrt();
    if let Some(v) = speed {
        let near = (x - anchor).abs() < 1e-6 * anchor;
        if near && v == 0.0 {
            return Ok(QuadResult::ZERO);
        }
        if near && v > 0.0 {
            let mut s = s_max;
            for _ in 0..4 {
                let qs = q(s);
                if qs <= 0.0 {
                    break;
                }
                s = v / qs.sqrt();
            }
            if s.is_finite() && s > 0.0 {
                s_max = s;
            }
        }
    }
    let f = |s: f64| {
        let r = anchor + sigma * s * s;
        let qs = q(s);
        if qs <= 0.0 {
            return f64::NAN;
        }
        2.0 * kind.h(l, r) / qs.sqrt()
    };
    let res = adaptive_gk21(f, 0.0, s_max, tol, tol)?;
    Ok(if sigma > 0.0 { res } else { res.neg() })
}

/// `∫_a^b h/sqrt(W)` for a bounded, strictly positive radicand on `[a, b]`.
pub fn integrate_regular(rad: &Radicand, kind: IntegrandKind, a: f64, b: f64, tol: f64) -> Result<QuadResult> {
    let l = rad.l();
    let f = |r: f64| {
        let w = rad.w(r);
        if w <= 0.0 {
            return f64::NAN;
        }
        kind.h(l, r) / w.sqrt()
    };
    adaptive_gk21(f, a, b, tol, tol)
}

/// Integrates `h(r)/sqrt(W(r))` over `[a, b]` with the declared singular ends.
pub fn integrate_singular(rad: &Radicand, spec: &SingularIntegralSpec) -> Result<QuadResult> {
    let SingularIntegralSpec { kind, a, b, singular, tol } = *spec;
    if a == b {
        return Ok(QuadResult::ZERO);
    }
    if !(a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0) {
        return Err(Error::InvalidInput(format!("limits [{a}, {b}] must be positive and finite")));
    }
    match singular {
        SingularEnd::None => integrate_regular(rad, kind, a, b, tol),
        SingularEnd::AtA => integrate_from_root(rad, kind, a, b, None, tol),
        SingularEnd::AtB => Ok(integrate_from_root(rad, kind, b, a, None, tol)?.neg()),
        SingularEnd::Both => {
            let m = 0.5 * (a + b);
            let left = integrate_from_root(rad, kind, a, m, None, tol / 2.0)?;
            let right = integrate_from_root(rad, kind, b, m, None, tol / 2.0)?.neg();
            Ok(left.add(right))
        }
    }
}

/// Centered difference with one Richardson step, `h = max(1e-6, 1e-6 |x|)`
/// unless a step is supplied.
pub fn richardson_derivative(f: impl Fn(f64) -> f64, x: f64, step: Option<f64>) -> f64 {
    let h = step.unwrap_or_else(|| (1e-6f64).max(1e-6 * x.abs()));
    let d = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}
