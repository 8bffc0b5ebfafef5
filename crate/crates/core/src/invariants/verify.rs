//! End-to-end check of one torus: find it, trace orbits, compute every
//! invariant numerically and compare with the closed forms.

use std::sync::Arc;

use serde::Serialize;

use super::{
    collision_selfintersections, covering_jplus_check, distinguished_j0, exact_birkhoff_lift, numeric_invariants,
    reduce_jem, selfintersection_formula, theorem_formulas, DistinguishedKind, InvariantSet, NumericInvariants,
};
use crate::curve::{ClosedCurve, CurveSource, Point};
use crate::dynamics::{
    collision_orbit_on, find_torus_with, trace_orbit_on, CollisionSelector, EulerParams, TorusData, TorusFlow,
    TorusTolerances, PRIMARY_E, PRIMARY_M,
};
use crate::topology::{jplus_breakdown_with, winding_number_with, GeometryOptions};

/// Settings of the numeric pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineOptions {
    /// Samples per cycle of the faster separated motion.
    pub resolution: usize,
    /// Phase of the generic orbit; the midpoint between collision phases if unset.
    pub phase: Option<f64>,
    pub torus: TorusTolerances,
    pub geometry: GeometryOptions,
    /// Crossings this close to a primary are not counted on collision orbits.
    pub collision_exclusion: f64,
    /// Closure and energy tolerance of traced orbits.
    pub trace_tol: f64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            resolution: 256,
            phase: None,
            torus: TorusTolerances::default(),
            geometry: GeometryOptions::default(),
            collision_exclusion: 1e-6,
            trace_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Invariants with half-integers stored doubled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DoubledSet {
    pub j0_x2: i64,
    #[serde(rename = "jE_x2")]
    pub j_e_x2: i64,
    #[serde(rename = "jM_x2")]
    pub j_m_x2: i64,
    pub n: u64,
    #[serde(rename = "jEM")]
    pub j_em: i64,
}

impl From<&InvariantSet> for DoubledSet {
    fn from(s: &InvariantSet) -> Self {
        DoubledSet {
            j0_x2: s.j0.doubled(),
            j_e_x2: s.j_e.doubled(),
            j_m_x2: s.j_m.doubled(),
            n: s.n,
            j_em: s.j_em,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CollisionCount {
    pub numeric: Option<u64>,
    pub formula: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub mu: f64,
    pub c: f64,
    pub k: u32,
    pub l: u32,
    pub torus: Option<TorusData>,
    pub phase: Option<f64>,
    pub numeric: Option<DoubledSet>,
    pub closed_form: Option<DoubledSet>,
    #[serde(rename = "collision_N")]
    pub collision_n: CollisionCount,
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub details: Option<NumericInvariants>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    fn check(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.to_string(),
            pass,
            detail: detail.into(),
        });
    }

    fn compare<T: PartialEq + std::fmt::Display>(&mut self, name: &str, numeric: T, expected: T) {
        let pass = numeric == expected;
        self.check(name, pass, format!("numeric {numeric}, closed form {expected}"));
    }
}

/// Runs the full pipeline on `T_{k,l}`; failures are recorded as checks
/// and later stages run whenever their inputs exist.
pub fn verify_torus(params: &EulerParams, k: u32, l: u32, opts: &PipelineOptions) -> VerificationReport {
    let mut report = VerificationReport {
        mu: params.mu(),
        c: params.c(),
        k,
        l,
        torus: None,
        phase: None,
        numeric: None,
        closed_form: None,
        collision_n: CollisionCount {
            numeric: None,
            formula: None,
        },
        checks: Vec::new(),
        details: None,
    };
    let expected = match theorem_formulas(k, l) {
        Ok(set) => set,
        Err(e) => {
            report.check("precondition", false, e.to_string());
            return report;
        }
    };
    report.closed_form = Some(DoubledSet::from(&expected));

    let torus = match find_torus_with(params, k, l, &opts.torus) {
        Ok(t) => t,
        Err(e) => {
            report.check("find_torus", false, e.to_string());
            return report;
        }
    };
    report.torus = Some(torus);
    let target = f64::from(k) / f64::from(l);
    let miss = (torus.rotation_number() - target).abs();
    report.check(
        "rotation_number",
        miss <= opts.torus.rotation,
        format!("|R - k/l| = {miss:.3e}"),
    );

    let flow = match TorusFlow::with_options(&torus, &opts.torus.quad) {
        Ok(f) => Arc::new(f),
        Err(e) => {
            report.check("time_tables", false, e.to_string());
            return report;
        }
    };

    let phase = opts.phase.unwrap_or_else(|| torus.generic_phase());
    report.phase = Some(phase);
    match trace_orbit_on(flow.clone(), phase, opts.resolution) {
        Ok(orbit) => {
            match orbit.closure_error() {
                Ok(d) => report.check("closure", d < opts.trace_tol, format!("{d:.3e}")),
                Err(e) => report.check("closure", false, e.to_string()),
            }
            let residual = orbit.max_energy_residual();
            report.check("energy_residual", residual < opts.trace_tol, format!("{residual:.3e}"));
            let lam = orbit.states.iter().map(|s| s.lambda.abs()).fold(0.0, f64::max);
            report.check(
                "lambda_bound",
                lam <= torus.lambda_max + 1e-9,
                format!("max |lambda| = {lam:.12}, lambda_max = {:.12}", torus.lambda_max),
            );
            let source: &dyn CurveSource = &orbit;
            match numeric_invariants(&orbit.curve, Some(source), &opts.geometry) {
                Ok(inv) => {
                    let s = inv.set;
                    report.numeric = Some(DoubledSet::from(&s));
                    report.compare("j0", s.j0, expected.j0);
                    report.compare("jE", s.j_e, expected.j_e);
                    report.compare("jM", s.j_m, expected.j_m);
                    report.compare("n", s.n, expected.n);
                    report.compare("jEM", s.j_em, expected.j_em);
                    if l % 2 == 1 {
                        let twice = s.j0 + s.j0 - super::HalfInteger::from_integer(1);
                        report.check(
                            "odd_l_parity_identity",
                            s.j_e == twice && s.j_m == twice,
                            format!("jE = {}, jM = {}, 2 j0 - 1 = {twice}", s.j_e, s.j_m),
                        );
                    }
                    exact_lift_check(&mut report, &orbit, &inv, &opts.geometry);
                    report.details = Some(inv);
                }
                Err(e) => report.check("numeric_invariants", false, e.to_string()),
            }
        }
        Err(e) => report.check("trace_orbit", false, e.to_string()),
    }

    let formula = selfintersection_formula(k, l).ok();
    report.collision_n.formula = formula;
    let mut counts = Vec::new();
    for which in [CollisionSelector::First, CollisionSelector::Second] {
        let name = format!("collision_orbit_{which:?}").to_lowercase();
        let orbit = match collision_orbit_on(flow.clone(), which, opts.resolution) {
            Ok(o) => o,
            Err(e) => {
                report.check(&name, false, e.to_string());
                continue;
            }
        };
        let pts = orbit.curve.points();
        let ends = [pts[0], pts[pts.len() / 2]];
        let near = |p: Point, q: Point| (p - q).norm() < 1e-9;
        let expected_ends = match (which, l.is_multiple_of(2)) {
            (CollisionSelector::First, true) => [PRIMARY_E, PRIMARY_E],
            (CollisionSelector::Second, true) => [PRIMARY_M, PRIMARY_M],
            (_, false) => [PRIMARY_E, PRIMARY_M],
        };
        let residual = orbit.max_energy_residual();
        report.check(
            &format!("{name}_energy_residual"),
            residual < opts.trace_tol,
            format!("{residual:.3e}"),
        );
        report.check(
            &format!("{name}_endpoints"),
            near(ends[0], expected_ends[0]) && near(ends[1], expected_ends[1]),
            format!("collisions at {:?} and {:?}", ends[0], ends[1]),
        );
        match collision_selfintersections(&orbit, opts.collision_exclusion, &opts.geometry) {
            Ok(c) => counts.push(c as u64),
            Err(e) => report.check(&name, false, e.to_string()),
        }
    }
    if let Some(&first) = counts.first() {
        report.collision_n.numeric = Some(first);
        let formula_text = formula.map_or("-".to_string(), |f| f.to_string());
        report.check(
            "collision_selfintersections",
            counts.iter().all(|&c| Some(c) == formula),
            format!("numeric {counts:?}, formula {formula_text}"),
        );
    }

    if let Some(n) = formula {
        let kind = if l.is_multiple_of(2) {
            DistinguishedKind::CollisionTypeI
        } else {
            DistinguishedKind::CollisionTypeII
        };
        report.compare("distinguished_j0", distinguished_j0(kind, n), expected.j0);
    }
    let (ki, li) = (i64::from(k), i64::from(l));
    let covered = reduce_jem(covering_jplus_check(li, 0, 0, ki * li - ki), l as u64);
    report.compare("covering_formula_jEM", covered, expected.j_em);
    report
}

/// Compares the tracked Birkhoff lift with `exp(lambda + i nu)`.
fn exact_lift_check(
    report: &mut VerificationReport,
    orbit: &crate::dynamics::Orbit,
    inv: &NumericInvariants,
    geometry: &GeometryOptions,
) {
    let exact = match ClosedCurve::new(exact_birkhoff_lift(orbit)) {
        Ok(c) => c,
        Err(e) => {
            report.check("exact_birkhoff_lift", false, e.to_string());
            return;
        }
    };
    let n = match winding_number_with(&exact, Point::new(0.0, 0.0), geometry) {
        Ok(w) => w.unsigned_abs(),
        Err(e) => {
            report.check("exact_birkhoff_lift", false, e.to_string());
            return;
        }
    };
    match jplus_breakdown_with(&exact, geometry) {
        Ok(b) => {
            let jem = reduce_jem(b.jplus, n);
            report.check(
                "exact_birkhoff_lift",
                n == inv.j_em.n && jem == inv.j_em.value,
                format!("exact lift: n = {n}, J+ = {} = {jem} (mod {})", b.jplus, 2 * n),
            );
        }
        Err(e) => report.check("exact_birkhoff_lift", false, e.to_string()),
    }
}
