mod common;

use central_force::integrals::{PolarState, ReferenceKind};
use central_force::oracles::{self, OracleParams, Regime};
use central_force::potentials::{CustomPotential, RadialPotential};
use central_force::symmetry::*;
use common::*;
use rand::Rng;

fn kepler_ctx() -> SymmetryContext {
    SymmetryContext::new(RadialPotential::kepler(1.0).unwrap(), ReferenceKind::TurningMin)
}

fn random_points(force: central_force::oracles::OracleForce, n: usize, seed: u64) -> Vec<PolarState> {
    let mut g = rng(seed);
    (0..n)
        .map(|_| {
            let p = random_params(&mut g, force, Regime::NegE, ReferenceKind::TurningMin);
            random_state(&mut g, &p, 0.05)
        })
        .collect()
}

#[test]
fn theta_l_matches_closed_form_derivative() {
    let ctx = kepler_ctx();
    let p = ExtPoint { t: 0.0, r: 2.0, theta: 0.0, l: 1.0, e: -0.25, sgn_v: 1.0 };
    let g = generator_components(Which::XTheta, &p, &ctx, None).unwrap();
    let theta_of = |l: f64| {
        let w = 2.0 * (-0.25 + 1.0 / 2.0) - l * l / 4.0;
        let s = PolarState::new(0.0, 2.0, 0.0, w.sqrt(), l / 4.0).unwrap();
        let op = OracleParams::new(kepler(1.0), l, -0.25, ReferenceKind::TurningMin).unwrap();
        oracles::theta_closed(&s, &op).unwrap()
    };
    let h = 1e-5;
    let exact = (theta_of(1.0 + h) - theta_of(1.0 - h)) / (2.0 * h);
    assert!((-g.eta_theta - exact).abs() < 1e-6, "{} vs {exact}", -g.eta_theta);
}

#[test]
fn action_table_is_canonical() {
    for force in [kepler(1.0), perturbed(1.0, 0.19)] {
        let ctx = SymmetryContext::new(force.potential().unwrap(), ReferenceKind::TurningMin);
        for s in random_points(force, 20, 5) {
            for (row, w) in Which::ALL.iter().enumerate() {
                let a = action_on_integrals(*w, &s, &ctx, None).unwrap();
                for c in 0..4 {
                    assert!((a[c] - CANONICAL_TABLE[row][c]).abs() < 1e-6, "{w:?} {a:?}");
                }
            }
        }
    }
}

#[test]
fn finite_flows_translate_one_integral() {
    let ctx = kepler_ctx();
    let p = ExtPoint { t: 0.3, r: 1.5, theta: 0.4, l: 1.0, e: -0.25, sgn_v: -1.0 };
    let base = first_integrals_at(&p, &ctx).unwrap();
    let eps = 0.05;
    for (row, w) in Which::ALL.iter().enumerate() {
        let q = apply_group(*w, eps, &p, &ctx).unwrap();
        assert_eq!(q.r, p.r);
        let after = first_integrals_at(&q, &ctx).unwrap();
        for c in 0..4 {
            assert!((after[c] - base[c] - eps * CANONICAL_TABLE[row][c]).abs() < 1e-6, "{w:?} {c}");
        }
    }
}

#[test]
fn group_law_and_generator_consistency() {
    let ctx = kepler_ctx();
    let p = ExtPoint { t: 0.0, r: 2.5, theta: 0.0, l: 1.0, e: -0.25, sgn_v: 1.0 };
    for w in Which::ALL {
        let a = apply_group(w, 0.02, &apply_group(w, 0.03, &p, &ctx).unwrap(), &ctx).unwrap();
        let b = apply_group(w, 0.05, &p, &ctx).unwrap();
        for (x, y) in [(a.t, b.t), (a.theta, b.theta), (a.l, b.l), (a.e, b.e)] {
            assert!((x - y).abs() < 1e-8, "{w:?}");
        }
        let h = 1e-4;
        let flow = |eps: f64| {
            let q = apply_group(w, eps, &p, &ctx).unwrap();
            [q.t, q.r, q.theta, q.l, q.e]
        };
        let (p1, m1, p2, m2) = (flow(h), flow(-h), flow(h / 2.0), flow(-h / 2.0));
        let fd: Vec<f64> = (0..5).map(|i| (4.0 * (p2[i] - m2[i]) / h - (p1[i] - m1[i]) / (2.0 * h)) / 3.0).collect();
        let g = generator_components(w, &p, &ctx, None).unwrap();
        for (x, y) in fd.iter().zip(g.as_array()) {
            assert!((x - y).abs() < 1e-6, "{w:?} {fd:?} {g:?}");
        }
    }
}

#[test]
fn generators_commute() {
    let ctx = kepler_ctx();
    let p = ExtPoint { t: 0.0, r: 2.0, theta: 0.0, l: 1.0, e: -0.25, sgn_v: 1.0 };
    assert_eq!(commutator_residual(Which::XL, Which::XE, &p, &ctx).unwrap(), 0.0);
    let mut g = rng(9);
    let op = OracleParams::new(kepler(1.0), 1.0, -0.25, ReferenceKind::TurningMin).unwrap();
    for _ in 0..20 {
        let s = random_state(&mut g, &op, 0.05);
        let p = ctx.point_from_state(&s).unwrap();
        for i in 0..4 {
            for j in i + 1..4 {
                let c = commutator_residual(Which::ALL[i], Which::ALL[j], &p, &ctx).unwrap();
                assert!(c < 1e-5, "{:?} {:?} {c} {p:?} {:?}", Which::ALL[i], Which::ALL[j], ctx.partials(&p, None));
            }
        }
    }
}

#[test]
fn multipliers_match_characteristics() {
    let ctx = kepler_ctx();
    let s = PolarState::new(0.0, 1.0, 0.2, 0.5f64.sqrt(), 1.0).unwrap();
    let (qr, qt) = noether_multiplier(|s| Ok(s.omega * s.r * s.r), &s, None).unwrap();
    assert!(qr.abs() < 1e-9 && (qt + 1.0).abs() < 1e-9);
    let energy = |s: &PolarState| Ok(0.5 * s.v * s.v + 0.5 * (s.r * s.omega).powi(2) - 1.0 / s.r);
    let (qr, qt) = noether_multiplier(energy, &s, None).unwrap();
    assert!((qr + s.v).abs() < 1e-9 && (qt + s.omega).abs() < 1e-9);
    let theta = |s: &PolarState| Ok(ctx.integrals_at(&ctx.point_from_state(s)?)?.0);
    let time = |s: &PolarState| Ok(ctx.integrals_at(&ctx.point_from_state(s)?)?.1);
    let p = ctx.point_from_state(&s).unwrap();
    for (w, i) in [(Which::XTheta, 0), (Which::XT, 1)] {
        let g = generator_components(w, &p, &ctx, None).unwrap();
        let (pr, pt) = characteristic(&g, &s);
        let (qr, qt) = if i == 0 { noether_multiplier(theta, &s, None) } else { noether_multiplier(time, &s, None) }.unwrap();
        assert!((pr - qr).abs() < 1e-6 && (pt - qt).abs() < 1e-6, "{w:?}: {pr} {pt} vs {qr} {qt}");
    }
}

#[test]
fn noether_identity_holds_off_solution() {
    let ctx = kepler_ctx();
    let p = RadialPotential::kepler(1.0).unwrap();
    let mut g = rng(3);
    let states = random_points(kepler(1.0), 50, 11);
    let theta = |s: &PolarState| Ok(ctx.integrals_at(&ctx.point_from_state(s)?)?.0);
    let ang = |s: &PolarState| Ok(s.omega * s.r * s.r);
    for s in states {
        let jp = JetPoint { state: s, a_r: g.gen_range(-2.0..2.0), a_theta: g.gen_range(-2.0..2.0) };
        assert!(noether_identity_residual(ang, &jp, &p, Some(1e-4)).unwrap() < 1e-9);
        assert!(noether_identity_residual(theta, &jp, &p, None).unwrap() < 1e-5);
        let on = JetPoint::on_solution(s, &p);
        let energy = |s: &PolarState| Ok(0.5 * s.v * s.v + 0.5 * (s.r * s.omega).powi(2) - 1.0 / s.r);
        let res = noether_identity_residual(energy, &on, &p, Some(1e-4)).unwrap();
        assert!(res < 1e-9, "{res} {s:?}");
    }
}

fn jet_samples(seed: u64) -> Vec<PolarState> {
    let mut g = rng(seed);
    (0..30)
        .map(|_| {
            PolarState::new(
                g.gen_range(-1.0..1.0),
                g.gen_range(0.5..2.0),
                g.gen_range(-3.0..3.0),
                g.gen_range(-1.0..1.0),
                g.gen_range(-1.0..1.0),
            )
            .unwrap()
        })
        .collect()
}

#[test]
fn point_symmetries_of_special_forces() {
    let samples = jet_samples(1);
    let kep = RadialPotential::kepler(1.0).unwrap();
    assert_eq!(point_symmetry_residual(&PointGenerator::rotation(), &samples, &kep), 0.0);
    assert!(point_symmetry_residual(&PointGenerator::time_translation(), &samples, &kep) < 1e-12);
    let pow = RadialPotential::power(-1.0, 2.0).unwrap();
    assert!(point_symmetry_residual(&PointGenerator::power_dilation(2.0), &samples, &pow) < 1e-9);
    let kepler_dilation = PointGenerator::power_dilation(-2.0);
    assert!(point_symmetry_residual(&kepler_dilation, &samples, &kep) < 1e-9);
    let (k, kt) = (1.0, 1.0);
    let u = CustomPotential::new(
        "oscillator-plus-inverse-cube",
        move |r: f64| -k * r * r / 2.0 + kt / (2.0 * r * r),
        move |r: f64| -k * r - kt / (r * r * r),
        f64::INFINITY,
        (0.1, 10.0),
    )
    .unwrap()
    .with_second_derivative(move |r: f64| -k + 3.0 * kt / r.powi(4));
    let pot = RadialPotential::custom(u);
    for plus in [true, false] {
        let res = point_symmetry_residual(&PointGenerator::time_dependent_dilation(k, plus), &samples, &pot);
        assert!(res < 1e-9, "{res}");
    }
    assert!(point_symmetry_residual(&PointGenerator::power_dilation(2.0), &samples, &kep) > 1e-3);
}

#[test]
fn determining_system_recovers_generators() {
    for force in [kepler(1.0), perturbed(1.0, 0.19)] {
        let ctx = SymmetryContext::new(force.potential().unwrap(), ReferenceKind::TurningMin);
        let op = OracleParams::new(force, 1.0, -0.25, ReferenceKind::TurningMin).unwrap();
        let sp = oracles::special_points(&op);
        let (lo, hi) = (sp.r_min * 1.05, sp.r_max.unwrap() * 0.95);
        let grid: Vec<f64> = (0..=16).map(|i| lo + (hi - lo) * i as f64 / 16.0).collect();
        for sgn in [1.0, -1.0] {
            let rec = solve_special_symmetries(&ctx, 1.0, -0.25, sgn, &grid).unwrap();
            assert_eq!(rec.len(), 4);
            for g in &rec {
                let res = recovery_residual(g, &ctx, sgn, 1.0, -0.25).unwrap();
                assert!(res < 1e-6, "{:?} {res}", g.which);
            }
        }
        let bad: Vec<f64> = vec![sp.r_min * 0.5, 1.0];
        assert!(solve_special_symmetries(&ctx, 1.0, -0.25, 1.0, &bad).is_err());
    }
}
