//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use twocenter::curve::{ClosedCurve, CurveSource, Point};
use twocenter::dynamics::{find_torus, gcd, trace_orbit_on, EulerParams, Orbit, TorusFlow, PRIMARY_E, PRIMARY_M};
use twocenter::invariants::{
    birkhoff_invariant, distinguished_j0, numeric_invariants, reduce_jem, selfintersection_formula, theorem_formulas,
    verify_torus, DistinguishedKind, HalfInteger, InvariantSet, PipelineOptions, VerificationReport,
};
use twocenter::regularization::{birkhoff_lift, birkhoff_lift_with, levi_civita_lift, Primary};
use twocenter::topology::{viro_jplus, winding_number, GeometryOptions};

/// Largest allowed distance of a lifted coordinate curve from its circle or ray.
const LIFT_GEOMETRY_TOL: f64 = 1e-8;
const ENERGY_TOL: f64 = 1e-8;
/// Phases of the generic orbits, as fractions of the collision-phase spacing.
const PHASE_FRACTIONS: [f64; 3] = [0.3, 0.5, 0.7];
const MASS_RATIOS: [f64; 2] = [0.5, 0.3];
const MAX_KL: u32 = 5;

struct Line {
    id: u32,
    title: &'static str,
    pass: bool,
    detail: String,
}

/// Curve source of a resampled or reversed orbit.
struct Reindexed<'a> {
    orbit: &'a Orbit,
    scale: f64,
    shift: f64,
}

impl CurveSource for Reindexed<'_> {
    fn point_at(&self, s: f64) -> Point {
        self.orbit.point_at(self.shift + self.scale * s)
    }
}

struct TorusStudy {
    mu: f64,
    k: u32,
    l: u32,
    report: VerificationReport,
    /// Invariants at each phase of `PHASE_FRACTIONS`.
    by_phase: Vec<Result<InvariantSet, String>>,
    decimated: Result<InvariantSet, String>,
    reversed: Result<InvariantSet, String>,
    /// `(n, JEM)` of each Birkhoff lift component, computed separately.
    birkhoff_components: Result<Vec<(u64, i64)>, String>,
    max_energy_residual: f64,
}

fn study(mu: f64, k: u32, l: u32) -> TorusStudy {
    let params = EulerParams::with_midpoint_energy(mu).expect("valid mass ratio");
    let opts = PipelineOptions::default();
    let report = verify_torus(&params, k, l, &opts);
    let geometry = opts.geometry;
    let mut by_phase = Vec::new();
    let mut decimated = Err("not traced".to_string());
    let mut reversed = Err("not traced".to_string());
    let mut birkhoff_components = Err("not traced".to_string());
    let mut max_energy_residual = 0.0_f64;
    let flow = find_torus(&params, k, l)
        .map_err(|e| e.to_string())
        .and_then(|t| TorusFlow::new(&t).map(Arc::new).map_err(|e| e.to_string()));
    for (i, &frac) in PHASE_FRACTIONS.iter().enumerate() {
        let flow = match &flow {
            Ok(f) => f.clone(),
            Err(e) => {
                by_phase.push(Err(e.clone()));
                continue;
            }
        };
        let phase = frac * flow.torus().collision_phase_spacing();
        let orbit = match trace_orbit_on(flow, phase, opts.resolution) {
            Ok(o) => o,
            Err(e) => {
                by_phase.push(Err(e.to_string()));
                continue;
            }
        };
        max_energy_residual = max_energy_residual.max(orbit.max_energy_residual());
        let set = numeric_invariants(&orbit.curve, Some(&orbit), &geometry)
            .map(|d| d.set)
            .map_err(|e| e.to_string());
        by_phase.push(set);
        if i == 0 {
            let n = orbit.curve.len() as f64;
            decimated = orbit
                .curve
                .decimated(2)
                .map_err(|e| e.to_string())
                .and_then(|c| {
                    let src = Reindexed {
                        orbit: &orbit,
                        scale: 2.0,
                        shift: 0.0,
                    };
                    numeric_invariants(&c, Some(&src), &geometry).map_err(|e| e.to_string())
                })
                .map(|d| d.set);
            let src = Reindexed {
                orbit: &orbit,
                scale: -1.0,
                shift: n,
            };
            reversed = numeric_invariants(&orbit.curve.reversed(), Some(&src), &geometry)
                .map(|d| d.set)
                .map_err(|e| e.to_string());
            birkhoff_components = birkhoff_per_component(&orbit, &geometry);
        }
    }
    TorusStudy {
        mu,
        k,
        l,
        report,
        by_phase,
        decimated,
        reversed,
        birkhoff_components,
        max_energy_residual,
    }
}

fn birkhoff_per_component(orbit: &Orbit, geometry: &GeometryOptions) -> Result<Vec<(u64, i64)>, String> {
    let (detail, lifted) = birkhoff_invariant(&orbit.curve, Some(orbit), geometry).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    for (comp, breakdown) in lifted.components.iter().zip(&detail.components) {
        let n = winding_number(comp, Point::new(0.0, 0.0))
            .map_err(|e| e.to_string())?
            .unsigned_abs();
        out.push((n, reduce_jem(breakdown.jplus, n)));
    }
    Ok(out)
}

fn check_passed(report: &VerificationReport, name: &str) -> bool {
    report.checks.iter().any(|c| c.name == name && c.pass)
}

fn tag(s: &TorusStudy) -> String {
    format!("mu={} ({},{})", s.mu, s.k, s.l)
}

fn summarize(id: u32, title: &'static str, failures: Vec<String>, total: usize, extra: &str) -> Line {
    let pass = failures.is_empty();
    let mut detail = format!("{}/{} ok{}", total - failures.len(), total, extra);
    if !pass {
        let shown: Vec<String> = failures.into_iter().take(6).collect();
        detail.push_str(&format!("; failing: {}", shown.join(", ")));
    }
    Line {
        id,
        title,
        pass,
        detail,
    }
}

fn criterion_sweep(studies: &[TorusStudy], seconds: f64) -> Line {
    let mut failures = Vec::new();
    for s in studies {
        let r = &s.report;
        let exact = ["j0", "jE", "jM", "n", "jEM", "rotation_number"]
            .iter()
            .all(|name| check_passed(r, name));
        if !exact || !r.passed() {
            let why: Vec<String> = r.failures().map(|c| c.name.clone()).collect();
            failures.push(format!("{} [{}]", tag(s), why.join(" ")));
        }
    }
    summarize(
        1,
        "closed-form invariants on every coprime torus, 1 <= k,l <= 5",
        failures,
        studies.len(),
        &format!(", sweep time {seconds:.1} s (target < 60 s)"),
    )
}

fn half(doubled: i64) -> HalfInteger {
    HalfInteger::from_doubled(doubled)
}

fn criterion_worked_examples(studies: &[TorusStudy]) -> Line {
    let find = |k: u32, l: u32| {
        studies
            .iter()
            .find(|s| s.mu == 0.5 && s.k == k && s.l == l)
            .and_then(|s| s.report.details.as_ref())
    };
    let mut notes = Vec::new();
    let mut pass = true;
    match find(3, 2) {
        Some(d) => {
            let b = d.j0.breakdown;
            let want = InvariantSet {
                j0: half(8),
                j_e: half(2),
                j_m: half(2),
                n: 2,
                j_em: 0,
            };
            let ok = (b.double_points, b.sum_w2, b.sum_ind2, b.jplus) == (9, 6, 0, 4) && d.set == want;
            pass &= ok;
            notes.push(format!(
                "T(3,2): #D={} sum w^2={} sum ind^2={} J+={} set={}",
                b.double_points,
                b.sum_w2,
                b.sum_ind2,
                b.jplus,
                show(&d.set)
            ));
        }
        None => {
            pass = false;
            notes.push("T(3,2) missing".into());
        }
    }
    match find(2, 3) {
        Some(d) => {
            let want = InvariantSet {
                j0: half(10),
                j_e: half(18),
                j_m: half(18),
                n: 3,
                j_em: 2,
            };
            let ok = d.j_em.raw_jplus == -4 && d.set == want;
            pass &= ok;
            notes.push(format!("T(2,3): lifted J+={} set={}", d.j_em.raw_jplus, show(&d.set)));
        }
        None => {
            pass = false;
            notes.push("T(2,3) missing".into());
        }
    }
    Line {
        id: 2,
        title: "worked examples T(3,2) and T(2,3) at mu = 1/2",
        pass,
        detail: notes.join("; "),
    }
}

fn show(s: &InvariantSet) -> String {
    format!(
        "{{{}, {}, {}, ({} mod {}), {}}}",
        s.j0,
        s.j_e,
        s.j_m,
        s.j_em,
        2 * s.n,
        s.n
    )
}

fn criterion_collision_counts(studies: &[TorusStudy]) -> Line {
    let mut failures = Vec::new();
    for s in studies {
        let r = &s.report;
        let ok = check_passed(r, "collision_selfintersections")
            && check_passed(r, "collision_orbit_first_endpoints")
            && check_passed(r, "collision_orbit_second_endpoints");
        if !ok {
            failures.push(format!(
                "{} numeric {:?} formula {:?}",
                tag(s),
                r.collision_n.numeric,
                r.collision_n.formula
            ));
        }
    }
    summarize(
        3,
        "collision orbit self-intersection counts (cluster tol 1e-7, primary exclusion 1e-6)",
        failures,
        studies.len(),
        "",
    )
}

fn criterion_birkhoff_n(studies: &[TorusStudy]) -> Line {
    let mut failures = Vec::new();
    let mut two = 0;
    for s in studies {
        let n_ok = s.report.numeric.map(|d| d.n) == Some(u64::from(s.l));
        let comps_ok = match &s.birkhoff_components {
            Ok(c) => {
                if c.len() == 2 {
                    two += 1;
                }
                c.iter().all(|&(n, j)| n == u64::from(s.l) && j == c[0].1)
            }
            Err(_) => false,
        };
        if !(n_ok && comps_ok) {
            failures.push(format!("{} {:?}", tag(s), s.birkhoff_components));
        }
    }
    summarize(
        4,
        "n = l, and both Birkhoff components agree on n and JEM",
        failures,
        studies.len(),
        &format!(", {two} tori with two components"),
    )
}

/// Boundary of `[l1, l2] x [nu1, nu2]` in elliptic coordinates, with the
/// side each sample lies on (0, 2: hyperbolas; 1, 3: ellipses).
fn coordinate_rectangle(l1: f64, l2: f64, nu1: f64, nu2: f64, m: usize) -> Vec<(Point, usize)> {
    let pos = |l: f64, v: f64| Point::new(l.cosh() * v.cos(), l.sinh() * v.sin());
    let step = |a: f64, b: f64, i: usize| a + (b - a) * i as f64 / m as f64;
    let mut pts = Vec::new();
    pts.extend((0..m).map(|i| (pos(step(l1, l2, i), nu1), 0)));
    pts.extend((0..m).map(|i| (pos(l2, step(nu1, nu2, i)), 1)));
    pts.extend((0..m).map(|i| (pos(step(l2, l1, i), nu2), 2)));
    pts.extend((0..m).map(|i| (pos(l1, step(nu2, nu1, i)), 3)));
    pts
}

struct ConfocalEllipse {
    lambda0: f64,
    n: usize,
}

impl CurveSource for ConfocalEllipse {
    fn point_at(&self, s: f64) -> Point {
        let t = 2.0 * PI * s / self.n as f64;
        Point::new(self.lambda0.cosh() * t.cos(), self.lambda0.sinh() * t.sin())
    }
}

fn criterion_confocal_lifts() -> Line {
    let mut radial = 0.0_f64;
    let mut perpendicular = 0.0_f64;
    let mut notes = Vec::new();
    let mut structural = true;
    for lambda0 in [0.1, 0.5, 1.2] {
        let n = 720;
        let src = ConfocalEllipse { lambda0, n };
        let curve = ClosedCurve::new((0..n).map(|i| src.point_at(i as f64)).collect()).unwrap();
        match birkhoff_lift_with(&curve, Some(&src)) {
            Ok(lift) => {
                structural &= lift.components.len() == 2;
                let mut radii = Vec::new();
                for comp in &lift.components {
                    let r0 = comp.points()[0].norm().ln().signum() * lambda0;
                    radii.push(r0);
                    for z in comp.points() {
                        let target = r0.exp();
                        radial = radial.max((z.norm() - target).abs() / target);
                    }
                }
                radii.sort_by(f64::total_cmp);
                structural &= radii == vec![-lambda0, lambda0];
            }
            Err(e) => {
                structural = false;
                notes.push(format!("ellipse {lambda0}: {e}"));
            }
        }
    }
    for (nu1, nu2) in [(0.4, 1.1), (1.3, 2.6)] {
        let (l1, l2) = (0.2, 1.4);
        let sided = coordinate_rectangle(l1, l2, nu1, nu2, 200);
        let curve = ClosedCurve::new(sided.iter().map(|p| p.0).collect()).unwrap();
        match birkhoff_lift(&curve) {
            Ok(lift) => {
                structural &= lift.components.len() == 2;
                let nb = lift.base.len();
                for comp in &lift.components {
                    for (i, z) in comp.points().iter().enumerate() {
                        // Only original samples carry a side label.
                        let Some(j) = sided.iter().position(|p| p.0 == lift.base[i % nb]) else {
                            continue;
                        };
                        let side = sided[j].1;
                        if side.is_multiple_of(2) {
                            let v = if side == 0 { nu1 } else { nu2 };
                            perpendicular = perpendicular.max(z.norm() * (z.arg().abs() - v).sin().abs());
                        }
                    }
                }
            }
            Err(e) => {
                structural = false;
                notes.push(format!("hyperbola {nu1}: {e}"));
            }
        }
    }
    let pass = structural && radial < LIFT_GEOMETRY_TOL && perpendicular < LIFT_GEOMETRY_TOL;
    notes.insert(
        0,
        format!(
            "max relative radial deviation {radial:.2e}, max perpendicular deviation {perpendicular:.2e} (tol {LIFT_GEOMETRY_TOL:e})"
        ),
    );
    Line {
        id: 5,
        title: "Birkhoff preimages of confocal ellipses are circles, of hyperbolas rays",
        pass,
        detail: notes.join("; "),
    }
}

fn criterion_component_parity(studies: &[TorusStudy]) -> Line {
    let mut failures = Vec::new();
    let mut total = 0;
    for s in studies {
        total += 1;
        let Some(d) = s.report.details.as_ref() else {
            failures.push(format!("{} no invariants", tag(s)));
            continue;
        };
        let (we, wm) = (d.j0.w_e, d.j0.w_m);
        let expect = |w: i64| if w % 2 != 0 { 1 } else { 2 };
        let ok = d.j_e.components.len() == expect(we)
            && d.j_m.components.len() == expect(wm)
            && d.j_em.components.len() == expect(we + wm);
        if !ok {
            failures.push(tag(s));
        }
    }
    for turns in 1..=3 {
        for (center, radius) in [(PRIMARY_E, 0.5), (PRIMARY_M, 0.5), (Point::new(0.0, 0.3), 2.0)] {
            total += 1;
            let circle = ClosedCurve::circle(center, radius, turns, 300 * turns as usize).unwrap();
            let we = winding_number(&circle, PRIMARY_E).unwrap();
            let wm = winding_number(&circle, PRIMARY_M).unwrap();
            let expect = |w: i64| if w % 2 != 0 { 1 } else { 2 };
            let ok = levi_civita_lift(&circle, Primary::E).map(|l| l.components.len()) == Ok(expect(we))
                && levi_civita_lift(&circle, Primary::M).map(|l| l.components.len()) == Ok(expect(wm))
                && birkhoff_lift(&circle).map(|l| l.components.len()) == Ok(expect(we + wm));
            if !ok {
                failures.push(format!("circle {turns} turns about {center}"));
            }
        }
    }
    summarize(
        6,
        "lift component counts follow winding parity (sweep orbits and circles of 1, 2, 3 turns)",
        failures,
        total,
        "",
    )
}

fn criterion_standard_curves() -> Line {
    let values: Vec<Result<i64, String>> = (0..=6)
        .map(|j| {
            ClosedCurve::standard(j, 1440)
                .map_err(|e| e.to_string())
                .and_then(|c| viro_jplus(&c).map_err(|e| e.to_string()))
        })
        .collect();
    let expected: Vec<Result<i64, String>> = [0, 0, -2, -4, -6, -8, -10].into_iter().map(Ok).collect();
    Line {
        id: 7,
        title: "J+ of the standard curves K0..K6",
        pass: values == expected,
        detail: format!("{values:?}"),
    }
}

fn criterion_properties(studies: &[TorusStudy]) -> Line {
    let mut failures = Vec::new();
    let mut max_residual = 0.0_f64;
    for s in studies {
        let base = s.report.details.as_ref().map(|d| d.set);
        let Some(base) = base else {
            failures.push(format!("{} no invariants", tag(s)));
            continue;
        };
        let same = |r: &Result<InvariantSet, String>| r.as_ref().ok() == Some(&base);
        let phases_ok = s.by_phase.len() == PHASE_FRACTIONS.len() && s.by_phase.iter().all(same);
        let residual_ok = s.max_energy_residual < ENERGY_TOL
            && s.report
                .checks
                .iter()
                .filter(|c| c.name.ends_with("energy_residual"))
                .count()
                == 3
            && s.report
                .checks
                .iter()
                .filter(|c| c.name.ends_with("energy_residual"))
                .all(|c| c.pass);
        max_residual = max_residual.max(s.max_energy_residual);
        let mut why = Vec::new();
        if !same(&s.decimated) {
            why.push(format!("resampling {:?}", s.decimated));
        }
        if !same(&s.reversed) {
            why.push(format!("orientation {:?}", s.reversed));
        }
        if !phases_ok {
            why.push("phase".to_string());
        }
        if !residual_ok {
            why.push("energy".to_string());
        }
        if !check_passed(&s.report, "distinguished_j0") {
            why.push("distinguished_j0".to_string());
        }
        if !why.is_empty() {
            failures.push(format!("{} [{}]", tag(s), why.join(" ")));
        }
    }
    // The closed-form web on a larger range.
    let mut web = 0;
    for k in 1..=20u32 {
        for l in 1..=20u32 {
            if gcd(k, l) != 1 {
                continue;
            }
            let Ok(set) = theorem_formulas(k, l) else { continue };
            web += 1;
            let n = selfintersection_formula(k, l).expect("formula defined");
            let kind = if l % 2 == 0 {
                DistinguishedKind::CollisionTypeI
            } else {
                DistinguishedKind::CollisionTypeII
            };
            if distinguished_j0(kind, n) != set.j0 {
                failures.push(format!("web ({k},{l})"));
            }
        }
    }
    summarize(
        8,
        "resampling, orientation and phase invariance, energy residual, consistency web",
        failures,
        studies.len() + web,
        &format!(
            ", phases {PHASE_FRACTIONS:?} of the collision spacing, max energy residual {max_residual:.2e} (tol {ENERGY_TOL:e})"
        ),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut studies = Vec::new();
    for mu in MASS_RATIOS {
        for k in 1..=MAX_KL {
            for l in 1..=MAX_KL {
                if gcd(k, l) == 1 {
                    studies.push(study(mu, k, l));
                }
            }
        }
    }
    let seconds = start.elapsed().as_secs_f64();
    let lines = vec![
        criterion_sweep(&studies, seconds),
        criterion_worked_examples(&studies),
        criterion_collision_counts(&studies),
        criterion_birkhoff_n(&studies),
        criterion_confocal_lifts(),
        criterion_component_parity(&studies),
        criterion_standard_curves(),
        criterion_properties(&studies),
    ];
    println!();
    for line in &lines {
        let verdict = if line.pass { "PASS" } else { "FAIL" };
        println!("criterion {} {verdict}: {} -- {}", line.id, line.title, line.detail);
    }
    let failed = lines.iter().filter(|l| !l.pass).count();
    println!(
        "acceptance: {} passed, {failed} failed in {:.1} s",
        lines.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
