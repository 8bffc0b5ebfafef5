//! Randomized invariance and consistency properties.

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use twocenter::curve::{ClosedCurve, CurveSource, Point};
use twocenter::dynamics::{find_torus, gcd, trace_orbit, EulerParams, TorusFlow};
use twocenter::invariants::{distinguished_j0, selfintersection_formula, theorem_formulas, DistinguishedKind};
use twocenter::regularization::{birkhoff_lift, birkhoff_lift_with, levi_civita_lift, Cover, LiftedCurve, Primary};
use twocenter::topology::{find_double_points, viro_jplus, winding_number, TopologyError};

/// Random trigonometric polynomial curve dominated by a unit circle.
fn trig_curve(coeffs: &[(i32, f64, f64)], n: usize) -> ClosedCurve {
    let pts = (0..n)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / n as f64;
            coeffs
                .iter()
                .map(|&(m, re, im)| Complex64::new(re, im) * Complex64::from_polar(1.0, f64::from(m) * t))
                .sum::<Complex64>()
        })
        .collect();
    ClosedCurve::new(pts).unwrap()
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    ((a - o).conj() * (b - o)).im
}

/// Quadratic count of transverse crossings between non-adjacent segments.
fn brute_force_crossings(pts: &[Point]) -> usize {
    let n = pts.len();
    let mut count = 0;
    for i in 0..n {
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (a, b) = (pts[i], pts[(i + 1) % n]);
            let (c, d) = (pts[j], pts[(j + 1) % n]);
            let s1 = cross(a, b, c) * cross(a, b, d);
            let s2 = cross(c, d, a) * cross(c, d, b);
            if s1 < 0.0 && s2 < 0.0 {
                count += 1;
            }
        }
    }
    count
}

fn coefficient_strategy() -> impl Strategy<Value = Vec<(i32, f64, f64)>> {
    prop::collection::vec((-4i32..=4, -0.6f64..0.6, -0.6f64..0.6), 1..4).prop_map(|mut v| {
        v.push((1, 1.0, 0.0));
        v
    })
}

fn rigid(angle: f64, shift: (f64, f64), scale: f64) -> impl Fn(Point) -> Point {
    let rot = Complex64::from_polar(scale, angle);
    let t = Complex64::new(shift.0, shift.1);
    move |p| rot * p + t
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn double_points_match_brute_force(coeffs in coefficient_strategy()) {
        let curve = trig_curve(&coeffs, 600);
        match find_double_points(&curve) {
            Ok(d) => prop_assert_eq!(d.len(), brute_force_crossings(curve.points())),
            Err(TopologyError::NonGenericCurve(_)) => prop_assume!(false),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }

    #[test]
    fn jplus_is_invariant_under_similarities(
        j in 0u32..=6,
        angle in 0.0f64..(2.0 * PI),
        dx in -5.0f64..5.0,
        dy in -5.0f64..5.0,
        scale in 0.1f64..10.0,
    ) {
        let curve = ClosedCurve::standard(j, 720).unwrap();
        let moved = curve.mapped(rigid(angle, (dx, dy), scale)).unwrap();
        prop_assert_eq!(viro_jplus(&moved).unwrap(), viro_jplus(&curve).unwrap());
    }

    #[test]
    fn jplus_ignores_orientation_and_resampling(j in 0u32..=6, n in 300usize..1500) {
        let curve = ClosedCurve::standard(j, n).unwrap();
        let expected = 2 - 2 * i64::from(j.max(1));
        prop_assert_eq!(viro_jplus(&curve).unwrap(), expected);
        prop_assert_eq!(viro_jplus(&curve.reversed()).unwrap(), expected);
    }

    #[test]
    fn random_curves_keep_jplus_when_flipped(coeffs in coefficient_strategy()) {
        let curve = trig_curve(&coeffs, 600);
        let forward = match viro_jplus(&curve) {
            Ok(v) => v,
            Err(TopologyError::NonGenericCurve(_)) => { prop_assume!(false); unreachable!() }
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        prop_assert_eq!(viro_jplus(&curve.reversed()).unwrap(), forward);
        let finer = trig_curve(&coeffs, 1000);
        if let Ok(v) = viro_jplus(&finer) {
            prop_assert_eq!(v, forward);
        }
    }

    #[test]
    fn circle_windings(turns in -4i32..=4, r in 0.2f64..3.0, px in -0.9f64..0.9) {
        prop_assume!(turns != 0);
        let curve = ClosedCurve::circle(Point::new(0.0, 0.0), r, turns, 400 * turns.unsigned_abs() as usize).unwrap();
        let inside = Point::new(px * r, 0.0);
        prop_assert_eq!(winding_number(&curve, inside).unwrap(), i64::from(turns));
        prop_assert_eq!(winding_number(&curve, Point::new(2.0 * r + 1.0, 0.3)).unwrap(), 0);
    }
}

fn check_lift(lift: &LiftedCurve) -> Result<(), TestCaseError> {
    let nb = lift.base.len();
    let scale = lift.base.iter().map(|p| p.norm()).fold(1.0, f64::max);
    for comp in &lift.components {
        for (i, &z) in comp.points().iter().enumerate() {
            let err = (lift.cover.project(z) - lift.base[i % nb]).norm();
            prop_assert!(err < 1e-12 * scale, "projection error {err:e}");
        }
    }
    match lift.components.as_slice() {
        [one] => {
            prop_assert_eq!(one.len(), 2 * nb);
            for i in 0..nb {
                let d = (lift.cover.deck(one.points()[i]) - one.points()[i + nb]).norm();
                prop_assert!(d < 1e-12 * scale);
            }
        }
        [a, b] => {
            for i in 0..nb {
                let d = (lift.cover.deck(a.points()[i]) - b.points()[i]).norm();
                prop_assert!(d < 1e-12 * scale);
            }
        }
        other => prop_assert!(false, "{} components", other.len()),
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn lifts_project_back_and_are_deck_symmetric(
        coeffs in coefficient_strategy(),
        cx in -1.5f64..1.5,
        cy in -1.0f64..1.0,
        scale in 0.3f64..2.5,
    ) {
        let curve = trig_curve(&coeffs, 400)
            .mapped(rigid(0.0, (cx, cy), scale))
            .unwrap();
        for center in [Primary::E, Primary::M] {
            if let Ok(lift) = levi_civita_lift(&curve, center) {
                check_lift(&lift)?;
                let w = winding_number(&curve, center.position()).unwrap();
                prop_assert_eq!(lift.components.len(), if w % 2 == 0 { 2 } else { 1 });
            }
        }
        if let Ok(lift) = birkhoff_lift(&curve) {
            check_lift(&lift)?;
            let w = winding_number(&curve, Primary::E.position()).unwrap()
                + winding_number(&curve, Primary::M.position()).unwrap();
            prop_assert_eq!(lift.components.len(), if w % 2 == 0 { 2 } else { 1 });
        }
    }

    #[test]
    fn confocal_ellipses_lift_to_circles(lambda0 in 0.05f64..2.0, n in 200usize..800) {
        let source = Ellipse { lambda0, n };
        let ellipse = ClosedCurve::new((0..n).map(|i| source.point_at(i as f64)).collect()).unwrap();
        // Refinement near the foci samples the exact ellipse.
        let lift = birkhoff_lift_with(&ellipse, Some(&source)).unwrap();
        prop_assert_eq!(lift.components.len(), 2);
        let mut radii: Vec<f64> = Vec::new();
        for comp in &lift.components {
            let r0 = comp.points()[0].norm();
            for z in comp.points() {
                prop_assert!((z.norm() - r0).abs() < 1e-8 * r0);
            }
            radii.push(r0.ln());
        }
        radii.sort_by(f64::total_cmp);
        prop_assert!((radii[0] + lambda0).abs() < 1e-8 && (radii[1] - lambda0).abs() < 1e-8);
    }

    #[test]
    fn confocal_hyperbolas_lift_to_rays(
        l1 in 0.1f64..0.8,
        dl in 0.3f64..1.2,
        nu1 in 0.2f64..1.4,
        dnu in 0.3f64..1.4,
    ) {
        let (l2, nu2) = (l1 + dl, nu1 + dnu);
        prop_assume!(nu2 < PI - 0.2);
        let pts = coordinate_rectangle(l1, l2, nu1, nu2, 100);
        let lift = birkhoff_lift(&ClosedCurve::new(pts).unwrap()).unwrap();
        for comp in &lift.components {
            for z in comp.points() {
                prop_assert!(rectangle_boundary_distance(*z, l1, l2, nu1, nu2) < 1e-8);
            }
        }
    }
}

struct Ellipse {
    lambda0: f64,
    n: usize,
}

impl CurveSource for Ellipse {
    fn point_at(&self, s: f64) -> Point {
        let t = 2.0 * PI * s / self.n as f64;
        Point::new(self.lambda0.cosh() * t.cos(), self.lambda0.sinh() * t.sin())
    }
}

/// Boundary of `[l1, l2] x [nu1, nu2]` in elliptic coordinates, counterclockwise.
fn coordinate_rectangle(l1: f64, l2: f64, nu1: f64, nu2: f64, m: usize) -> Vec<Point> {
    let pos = |l: f64, v: f64| Point::new(l.cosh() * v.cos(), l.sinh() * v.sin());
    let mut pts = Vec::new();
    let step = |a: f64, b: f64, i: usize| a + (b - a) * i as f64 / m as f64;
    pts.extend((0..m).map(|i| pos(step(l1, l2, i), nu1)));
    pts.extend((0..m).map(|i| pos(l2, step(nu1, nu2, i))));
    pts.extend((0..m).map(|i| pos(step(l2, l1, i), nu2)));
    pts.extend((0..m).map(|i| pos(l1, step(nu2, nu1, i))));
    pts
}

/// Distance from `z` to the lifted rectangle or its deck image: arcs of the
/// circles `|z| = e^{±l}` and segments of the rays `arg z = ±nu`.
fn rectangle_boundary_distance(z: Point, l1: f64, l2: f64, nu1: f64, nu2: f64) -> f64 {
    let (r, a) = (z.norm(), z.arg());
    let on_circle = [l1, l2]
        .iter()
        .map(|&l| r * (r.ln().abs() - l).abs())
        .fold(f64::INFINITY, f64::min);
    let on_ray = [nu1, nu2]
        .iter()
        .map(|&v| r * (a.abs() - v).sin().abs())
        .fold(f64::INFINITY, f64::min);
    on_circle.min(on_ray)
}

fn torus_strategy() -> impl Strategy<Value = (f64, u32, u32)> {
    (prop::sample::select(vec![0.5, 0.3, 0.15]), 1u32..=4, 1u32..=4).prop_filter("coprime", |&(_, k, l)| gcd(k, l) == 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn traced_orbits_close_and_conserve_energy(
        (mu, k, l) in torus_strategy(),
        frac in 0.05f64..0.95,
    ) {
        let p = EulerParams::with_midpoint_energy(mu).unwrap();
        let torus = find_torus(&p, k, l).unwrap();
        let phase = frac * torus.collision_phase_spacing();
        let orbit = trace_orbit(&torus, phase, 128).unwrap();
        prop_assert!(orbit.closure_error().unwrap() < 1e-8);
        prop_assert!(orbit.max_energy_residual() < 1e-8);
        let lam = orbit.states.iter().map(|s| s.lambda.abs()).fold(0.0, f64::max);
        prop_assert!(lam <= torus.lambda_max * (1.0 + 1e-12));
        // nu circulates forwards: unwrapped increments are positive.
        for w in orbit.states.windows(2) {
            let step = (w[1].nu - w[0].nu).rem_euclid(2.0 * PI);
            prop_assert!(step > 0.0 && step < PI);
        }
    }

    #[test]
    fn mirror_image_is_the_orbit_of_the_mirrored_phase(
        (mu, k, l) in torus_strategy(),
        frac in 0.0f64..1.0,
        sigma in 0.0f64..1.0,
    ) {
        let p = EulerParams::with_midpoint_energy(mu).unwrap();
        let torus = find_torus(&p, k, l).unwrap();
        let flow = TorusFlow::new(&torus).unwrap();
        let tau = frac * torus.t_nu;
        let here = flow.state_at(sigma, tau).unwrap().position();
        let mirrored_phase = -tau - 0.5 * torus.t_lambda;
        let there = flow
            .state_at(0.5 / f64::from(k) - sigma, mirrored_phase)
            .unwrap()
            .position();
        prop_assert!((here.conj() - there).norm() < 1e-9, "{here} vs {there}");
    }

    #[test]
    fn closed_forms_are_mutually_consistent(k in 1u32..=12, l in 1u32..=12) {
        prop_assume!(gcd(k, l) == 1);
        let set = match theorem_formulas(k, l) {
            Ok(s) => s,
            // l even needs gcd(k, l/2) = 1 as well
            Err(_) => { prop_assume!(false); unreachable!() }
        };
        let n = selfintersection_formula(k, l).unwrap();
        let kind = if l % 2 == 0 { DistinguishedKind::CollisionTypeI } else { DistinguishedKind::CollisionTypeII };
        prop_assert_eq!(distinguished_j0(kind, n), set.j0);
        prop_assert_eq!(set.n, u64::from(l));
    }
}

#[test]
fn birkhoff_cover_maps_rays_to_hyperbolas() {
    for v in [0.3f64, 1.0, 2.5] {
        for t in [-1.5f64, -0.2, 0.4, 2.0] {
            let q = Cover::Birkhoff.project(Complex64::from_polar(t.exp(), v));
            let expected = Point::new(t.cosh() * v.cos(), t.sinh() * v.sin());
            assert!((q - expected).norm() < 1e-14);
        }
    }
}
