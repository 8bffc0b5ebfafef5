//! Transverse self-intersections of polylines.
//!
//! Candidate segment pairs come from a sweep over x-extents; the crossing
//! test uses exact orientation signs with zero read as positive, which acts
//! as a consistent symbolic perturbation (a sample lying exactly on another
//! segment is nudged to one side, so a crossing is reported exactly once).

use robust::{orient2d, Coord};

use super::{DoublePoint, GeometryOptions, TopologyError};
use crate::curve::{catmull_rom, Point};

fn coord(p: Point) -> Coord<f64> {
    Coord { x: p.re, y: p.im }
}

fn side(a: Point, b: Point, c: Point) -> (bool, f64) {
    let o = orient2d(coord(a), coord(b), coord(c));
    (o >= 0.0, o)
}

/// Parameters `(t, u)` of the crossing of `[a, b]` and `[c, d]`, if any.
pub(crate) fn segment_crossing(a: Point, b: Point, c: Point, d: Point) -> Option<(f64, f64)> {
    let (sa, oa) = side(c, d, a);
    let (sb, ob) = side(c, d, b);
    if sa == sb {
        return None;
    }
    let (sc, oc) = side(a, b, c);
    let (sd, od) = side(a, b, d);
    if sc == sd {
        return None;
    }
    let t = if oa == ob { 0.5 } else { oa / (oa - ob) };
    let u = if oc == od { 0.5 } else { oc / (oc - od) };
    Some((t.clamp(0.0, 1.0), u.clamp(0.0, 1.0)))
}

fn crossing_angle(d1: Point, d2: Point) -> f64 {
    let cross = (d1.conj() * d2).im.abs();
    (cross / (d1.norm() * d2.norm())).clamp(0.0, 1.0).asin()
}

#[derive(Debug, Clone, Copy)]
struct RawCrossing {
    seg_a: usize,
    t: f64,
    seg_b: usize,
    u: f64,
    location: Point,
    angle: f64,
}

/// All crossings between non-adjacent segments of a polyline.
fn raw_crossings(points: &[Point], closed: bool) -> Vec<RawCrossing> {
    let n = points.len();
    let segs = if closed { n } else { n.saturating_sub(1) };
    let seg = |i: usize| (points[i], points[(i + 1) % n]);
    let adjacent = |i: usize, j: usize| j == i + 1 || (closed && i == 0 && j + 1 == n);

    let mut order: Vec<usize> = (0..segs).collect();
    let xmin = |i: usize| {
        let (a, b) = seg(i);
        a.re.min(b.re)
    };
    order.sort_by(|&i, &j| xmin(i).total_cmp(&xmin(j)).then(i.cmp(&j)));

    let mut active: Vec<usize> = Vec::new();
    let mut out = Vec::new();
    for &i in &order {
        let (a, b) = seg(i);
        let x_lo = a.re.min(b.re);
        active.retain(|&j| {
            let (c, d) = seg(j);
            c.re.max(d.re) >= x_lo
        });
        let (y_lo, y_hi) = (a.im.min(b.im), a.im.max(b.im));
        for &j in &active {
            let (c, d) = seg(j);
            if c.im.max(d.im) < y_lo || c.im.min(d.im) > y_hi {
                continue;
            }
            let (p, q) = (i.min(j), i.max(j));
            if adjacent(p, q) {
                continue;
            }
            let (pa, pb) = seg(p);
            let (qa, qb) = seg(q);
            if let Some((t, u)) = segment_crossing(pa, pb, qa, qb) {
                out.push(RawCrossing {
                    seg_a: p,
                    t,
                    seg_b: q,
                    u,
                    location: pa + (pb - pa) * t,
                    angle: crossing_angle(pb - pa, qb - qa),
                });
            }
        }
        active.push(i);
    }
    out
}

/// Re-examines a shallow crossing on Catmull-Rom refinements of both arcs.
fn refine_crossing(
    points: &[Point],
    closed: bool,
    x: &RawCrossing,
    opts: &GeometryOptions,
) -> Result<RawCrossing, TopologyError> {
    let n = points.len() as isize;
    let window = |seg: usize| -> Option<Vec<Point>> {
        let idx: Vec<isize> = (seg as isize - 1..=seg as isize + 2).collect();
        if closed {
            Some(idx.iter().map(|&i| points[i.rem_euclid(n) as usize]).collect())
        } else {
            let lo = idx[0].max(0);
            let hi = idx[3].min(n - 1);
            Some((lo..=hi).map(|i| points[i as usize]).collect())
        }
    };
    let gap = {
        let d = (x.seg_b as isize - x.seg_a as isize).abs();
        if closed {
            d.min(n - d)
        } else {
            d
        }
    };
    let shallow = || {
        TopologyError::NonGenericCurve(format!(
            "near-tangential crossing at ({:.6}, {:.6}), angle {:.2e} rad",
            x.location.re, x.location.im, x.angle
        ))
    };
    if gap < 4 {
        return Err(shallow());
    }
    let (arc_a, arc_b) = (
        window(x.seg_a).ok_or_else(shallow)?,
        window(x.seg_b).ok_or_else(shallow)?,
    );
    let mut factor = 1;
    for _ in 0..opts.refine_rounds {
        factor *= opts.refine_factor;
        let fa = catmull_rom(&arc_a, factor);
        let fb = catmull_rom(&arc_b, factor);
        let mut found = Vec::new();
        for i in 0..fa.len() - 1 {
            for j in 0..fb.len() - 1 {
                if let Some((t, _)) = segment_crossing(fa[i], fa[i + 1], fb[j], fb[j + 1]) {
                    let loc = fa[i] + (fa[i + 1] - fa[i]) * t;
                    found.push((loc, crossing_angle(fa[i + 1] - fa[i], fb[j + 1] - fb[j])));
                }
            }
        }
        if found.len() != 1 {
            return Err(shallow());
        }
        let (location, angle) = found[0];
        if angle >= opts.angle_tol {
            return Ok(RawCrossing { location, angle, ..*x });
        }
    }
    Err(shallow())
}

/// Transverse self-intersections of a polyline, sorted by curve parameter.
///
/// Segment `i` spans parameters `[i, i + 1]`; a closed polyline has the
/// extra segment from the last point back to the first.
pub fn find_self_intersections(
    points: &[Point],
    closed: bool,
    opts: &GeometryOptions,
) -> Result<Vec<DoublePoint>, TopologyError> {
    let n = points.len();
    let mut raw = raw_crossings(points, closed);
    for x in raw.iter_mut() {
        if x.angle < opts.angle_tol {
            *x = refine_crossing(points, closed, x, opts)?;
        }
    }

    // Cluster crossings closer than the tolerance.
    raw.sort_by(|a, b| a.location.re.total_cmp(&b.location.re));
    let mut parent: Vec<usize> = (0..raw.len()).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..raw.len() {
        for j in i + 1..raw.len() {
            if raw[j].location.re - raw[i].location.re > opts.cluster_tol {
                break;
            }
            if (raw[j].location - raw[i].location).norm() <= opts.cluster_tol {
                let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
                parent[ri] = rj;
            }
        }
    }
    let near = |a: usize, b: usize| {
        let d = a.abs_diff(b);
        d <= 1 || (closed && d + 1 == n)
    };
    let mut clusters: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..raw.len() {
        let r = root(&mut parent, i);
        clusters.entry(r).or_default().push(i);
    }
    let mut out = Vec::with_capacity(clusters.len());
    for members in clusters.values() {
        // Distinct branch passages through the cluster.
        let mut passages: Vec<usize> = Vec::new();
        for &m in members {
            for s in [raw[m].seg_a, raw[m].seg_b] {
                if !passages.iter().any(|&p| near(p, s)) {
                    passages.push(s);
                }
            }
        }
        let x = raw[members[0]];
        if passages.len() == 2 && members.len() % 2 == 0 {
            // Under the perturbation a vertex touching a segment yields an
            // even number of reports; a genuine crossing yields one.
            return Err(TopologyError::NonGenericCurve(format!(
                "branches touch without crossing near ({:.6}, {:.6})",
                x.location.re, x.location.im
            )));
        }
        if passages.len() > 2 {
            return Err(TopologyError::NonGenericCurve(format!(
                "{} branches meet near ({:.6}, {:.6})",
                passages.len(),
                x.location.re,
                x.location.im
            )));
        }
        let seg = |i: usize| points[(i + 1) % n] - points[i];
        let (ta, tb) = (seg(x.seg_a), seg(x.seg_b));
        out.push(DoublePoint {
            location: x.location,
            s1: x.seg_a as f64 + x.t,
            s2: x.seg_b as f64 + x.u,
            tangent1: ta / ta.norm(),
            tangent2: tb / tb.norm(),
            angle: x.angle,
        });
    }
    out.sort_by(|a, b| a.s1.total_cmp(&b.s1).then(a.s2.total_cmp(&b.s2)));
    Ok(out)
}
