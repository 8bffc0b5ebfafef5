//! Lifts of plane curves through the branched double covers that regularize
//! collisions: the Levi-Civita squaring map at one primary and the Birkhoff
//! map `B(z) = (z + 1/z) / 2` for both at once.
//!
//! A lift is tracked sample by sample, choosing the square root closest to
//! the previous one. Segments that turn by more than a fixed angle as seen
//! from a branch point are subdivided first, using the analytic curve when
//! one is supplied.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{ClosedCurve, CurveError, CurveSource, Point};
use crate::dynamics::{PRIMARY_E, PRIMARY_M};
use crate::topology::{winding_number, TopologyError};

/// Maximal turning angle of a segment seen from a branch point.
pub const MAX_BRANCH_STEP: f64 = 0.2;
/// Samples closer than this to a branch point must be marked collisions.
pub const SINGULARITY_TOL: f64 = 1e-6;
const MAX_DEPTH: u32 = 40;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LiftError {
    #[error("sample {index} at ({x}, {y}) is within {distance:e} of a branch point")]
    SingularityOnCurve {
        index: usize,
        x: f64,
        y: f64,
        distance: f64,
    },
    #[error("cannot choose a square-root branch unambiguously near sample {0}")]
    BranchTrackingFailure(usize),
    #[error("components disagree: {0}")]
    ComponentMismatch(String),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Primary {
    E,
    M,
}

impl Primary {
    pub fn position(self) -> Point {
        match self {
            Primary::E => PRIMARY_E,
            Primary::M => PRIMARY_M,
        }
    }

    pub fn other(self) -> Primary {
        match self {
            Primary::E => Primary::M,
            Primary::M => Primary::E,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cover {
    #[serde(rename = "levi_civita_E")]
    LeviCivitaE,
    #[serde(rename = "levi_civita_M")]
    LeviCivitaM,
    #[serde(rename = "birkhoff")]
    Birkhoff,
}

impl Cover {
    /// Projection from the lifted plane to the base plane.
    pub fn project(self, z: Point) -> Point {
        match self {
            Cover::LeviCivitaE => z * z + PRIMARY_E,
            Cover::LeviCivitaM => z * z + PRIMARY_M,
            Cover::Birkhoff => 0.5 * (z + z.inv()),
        }
    }

    /// The nontrivial deck transformation.
    pub fn deck(self, z: Point) -> Point {
        match self {
            Cover::LeviCivitaE | Cover::LeviCivitaM => -z,
            Cover::Birkhoff => {
                if z.norm_sqr() == 0.0 {
                    z
                } else {
                    z.inv()
                }
            }
        }
    }

    fn branch_points(self) -> Vec<Point> {
        match self {
            Cover::LeviCivitaE => vec![PRIMARY_E],
            Cover::LeviCivitaM => vec![PRIMARY_M],
            Cover::Birkhoff => vec![PRIMARY_E, PRIMARY_M],
        }
    }

    /// The square root tracked along the curve: `z` itself for Levi-Civita,
    /// `s = sqrt(w^2 - 1)` with `z = w + s` for Birkhoff.
    fn radicand(self, w: Point) -> Point {
        match self {
            Cover::LeviCivitaE => w - PRIMARY_E,
            Cover::LeviCivitaM => w - PRIMARY_M,
            Cover::Birkhoff => (w - 1.0) * (w + 1.0),
        }
    }

    fn assemble(self, w: Point, root: Point) -> Point {
        match self {
            Cover::LeviCivitaE | Cover::LeviCivitaM => root,
            Cover::Birkhoff => w + root,
        }
    }
}

/// Preimage of a closed curve under a branched double cover.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiftedCurve {
    pub cover: Cover,
    /// One closed curve covering the base twice, or two curves exchanged by
    /// the deck transformation.
    pub components: Vec<ClosedCurve>,
    /// Preimages of the primary that is not a branch point (Levi-Civita only).
    pub lifted_singularities: Vec<Point>,
    /// The base samples actually lifted, after refinement.
    #[serde(skip)]
    pub base: Vec<Point>,
}

impl LiftedCurve {
    pub fn component_count(&self) -> usize {
        self.components.len()
    }
}

struct Refined {
    points: Vec<Point>,
    at_branch: Vec<bool>,
}

fn subtended(a: Point, b: Point, c: Point) -> f64 {
    let (da, db) = (a - c, b - c);
    if da.norm_sqr() == 0.0 || db.norm_sqr() == 0.0 {
        return 0.0;
    }
    (db * da.conj()).arg().abs()
}

fn refine(curve: &ClosedCurve, source: Option<&dyn CurveSource>, branch: &[Point]) -> Result<Refined, LiftError> {
    let pts = curve.points();
    let n = pts.len();
    let mut base: Vec<Point> = pts.to_vec();
    let mut at_branch = vec![false; n];
    for (i, p) in pts.iter().enumerate() {
        if let Some(&c) = branch.iter().min_by(|a, b| (p - *a).norm().total_cmp(&(p - *b).norm())) {
            let distance = (p - c).norm();
            if distance < SINGULARITY_TOL {
                if !curve.markers().contains(&i) {
                    return Err(LiftError::SingularityOnCurve {
                        index: i,
                        x: p.re,
                        y: p.im,
                        distance,
                    });
                }
                base[i] = c;
                at_branch[i] = true;
            }
        }
    }
    let ctx = Subdivision { source, branch };
    let mut out = Refined {
        points: Vec::with_capacity(n),
        at_branch: Vec::with_capacity(n),
    };
    for i in 0..n {
        out.points.push(base[i]);
        out.at_branch.push(at_branch[i]);
        let (a, b) = (base[i], base[(i + 1) % n]);
        ctx.split(i, (0.0, a), (1.0, b), (a, b), 0, &mut out.points)?;
        out.at_branch.resize(out.points.len(), false);
    }
    Ok(out)
}

struct Subdivision<'a> {
    source: Option<&'a dyn CurveSource>,
    branch: &'a [Point],
}

impl Subdivision<'_> {
    fn too_wide(&self, a: Point, b: Point) -> bool {
        self.branch.iter().any(|&c| subtended(a, b, c) > MAX_BRANCH_STEP)
    }

    /// Appends the interior subdivision points of segment `i` between the
    /// local parameters `t0` and `t1`, in curve order.
    fn split(
        &self,
        i: usize,
        (t0, p0): (f64, Point),
        (t1, p1): (f64, Point),
        (a, b): (Point, Point),
        depth: u32,
        out: &mut Vec<Point>,
    ) -> Result<(), LiftError> {
        if !self.too_wide(p0, p1) {
            return Ok(());
        }
        if depth >= MAX_DEPTH {
            return Err(LiftError::BranchTrackingFailure(i));
        }
        let tm = 0.5 * (t0 + t1);
        let pm = match self.source {
            Some(src) => src.point_at(i as f64 + tm),
            None => a + (b - a) * tm,
        };
        if !(pm.re.is_finite() && pm.im.is_finite()) {
            return Err(LiftError::BranchTrackingFailure(i));
        }
        if let Some(&c) = self.branch.iter().find(|&&c| (pm - c).norm() < SINGULARITY_TOL) {
            return Err(LiftError::SingularityOnCurve {
                index: i,
                x: pm.re,
                y: pm.im,
                distance: (pm - c).norm(),
            });
        }
        self.split(i, (t0, p0), (tm, pm), (a, b), depth + 1, out)?;
        out.push(pm);
        self.split(i, (tm, pm), (t1, p1), (a, b), depth + 1, out)
    }
}

/// Tracks `sqrt(radicand)` continuously along `refined`, for `extra`
/// samples beyond one full traversal.
fn track(cover: Cover, refined: &Refined, extra: usize) -> Result<Vec<Point>, LiftError> {
    let n = refined.points.len();
    let mut roots: Vec<Point> = Vec::with_capacity(n + extra);
    // Last nonzero root before a pass through a branch point.
    let mut before_branch: Option<Point> = None;
    for idx in 0..n + extra {
        let i = idx % n;
        if refined.at_branch[i] {
            if let Some(&prev) = roots.last() {
                if prev.norm_sqr() > 0.0 {
                    before_branch = Some(prev);
                }
            }
            roots.push(Point::new(0.0, 0.0));
            continue;
        }
        let r = cover.radicand(refined.points[i]).sqrt();
        let chosen = match roots.last() {
            None => r,
            Some(&prev) if prev.norm_sqr() == 0.0 => match before_branch {
                // One-sided limit through the branch point: the root changes sign.
                Some(b) => {
                    if (r * b.conj()).re > 0.0 {
                        -r
                    } else {
                        r
                    }
                }
                None => r,
            },
            Some(&prev) => {
                let dot = (r * prev.conj()).re;
                if dot.abs() < 0.5 * r.norm() * prev.norm() {
                    return Err(LiftError::BranchTrackingFailure(i));
                }
                if dot < 0.0 {
                    -r
                } else {
                    r
                }
            }
        };
        roots.push(chosen);
    }
    Ok(roots)
}

fn lift(curve: &ClosedCurve, cover: Cover, source: Option<&dyn CurveSource>) -> Result<LiftedCurve, LiftError> {
    let refined = refine(curve, source, &cover.branch_points())?;
    let n = refined.points.len();
    let j0 = refined
        .at_branch
        .iter()
        .position(|&b| !b)
        .ok_or(LiftError::BranchTrackingFailure(0))?;
    let roots = track(cover, &refined, j0 + 1)?;
    let (start, again) = (roots[j0], roots[n + j0]);
    let closes = (again - start).norm() < (again + start).norm();

    let first: Vec<Point> = (0..n).map(|i| cover.assemble(refined.points[i], roots[i])).collect();
    let markers: Vec<usize> = (0..n).filter(|&i| refined.at_branch[i]).collect();
    let second: Vec<Point> = first.iter().map(|&z| cover.deck(z)).collect();
    let components = if closes {
        vec![
            ClosedCurve::with_markers(first, markers.clone())?,
            ClosedCurve::with_markers(second, markers)?,
        ]
    } else {
        let mut both = first;
        both.extend(second);
        let mut m = markers.clone();
        m.extend(markers.iter().map(|&i| i + n));
        vec![ClosedCurve::with_markers(both, m)?]
    };
    let lifted_singularities = match cover {
        Cover::LeviCivitaE => {
            let r = (PRIMARY_M - PRIMARY_E).sqrt();
            vec![r, -r]
        }
        Cover::LeviCivitaM => {
            let r = (PRIMARY_E - PRIMARY_M).sqrt();
            vec![r, -r]
        }
        Cover::Birkhoff => Vec::new(),
    };
    Ok(LiftedCurve {
        cover,
        components,
        lifted_singularities,
        base: refined.points,
    })
}

/// Lift through `z -> z^2 + center` (the translated Levi-Civita map).
pub fn levi_civita_lift(curve: &ClosedCurve, center: Primary) -> Result<LiftedCurve, LiftError> {
    levi_civita_lift_with(curve, center, None)
}

/// As [`levi_civita_lift`], refining with the analytic curve `source`.
pub fn levi_civita_lift_with(
    curve: &ClosedCurve,
    center: Primary,
    source: Option<&dyn CurveSource>,
) -> Result<LiftedCurve, LiftError> {
    let cover = match center {
        Primary::E => Cover::LeviCivitaE,
        Primary::M => Cover::LeviCivitaM,
    };
    lift(curve, cover, source)
}

/// Lift through the Birkhoff map, whose branch points are the primaries `±1`.
pub fn birkhoff_lift(curve: &ClosedCurve) -> Result<LiftedCurve, LiftError> {
    birkhoff_lift_with(curve, None)
}

pub fn birkhoff_lift_with(curve: &ClosedCurve, source: Option<&dyn CurveSource>) -> Result<LiftedCurve, LiftError> {
    lift(curve, Cover::Birkhoff, source)
}

/// `|w_0|` of a Birkhoff lift component, checked across components.
pub fn n_invariant(lifted: &LiftedCurve) -> Result<u64, LiftError> {
    let origin = Point::new(0.0, 0.0);
    let mut values = Vec::new();
    for c in &lifted.components {
        values.push(winding_number(c, origin)?.unsigned_abs());
    }
    if values.windows(2).any(|w| w[0] != w[1]) {
        return Err(LiftError::ComponentMismatch(format!(
            "winding about the origin {values:?}"
        )));
    }
    Ok(values[0])
}
