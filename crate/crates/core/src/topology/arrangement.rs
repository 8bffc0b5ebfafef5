//! Planar subdivision induced by a closed curve with transverse double points.
//!
//! Each double point is a vertex of degree four. Edges are the arcs between
//! consecutive passages through vertices, and faces are traced on half-edges
//! with the face always on the left.

use serde::Serialize;

use super::{distance_to_polyline, snap_winding, winding_sum, DoublePoint, GeometryOptions, TopologyError};
use crate::curve::{ClosedCurve, Point};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Face {
    pub winding: i64,
    /// A point strictly inside the face.
    pub representative: Point,
    pub unbounded: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Arrangement {
    pub vertices: Vec<DoublePoint>,
    /// Arcs of the curve between consecutive passages, in curve order.
    pub edges: Vec<Vec<Point>>,
    pub faces: Vec<Face>,
    /// Faces of the four sectors at each vertex, counterclockwise.
    pub sectors: Vec<[usize; 4]>,
    /// Faces to the left and right of each edge.
    pub edge_faces: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Copy)]
struct Passage {
    s: f64,
    vertex: usize,
    direction: Point,
}

fn signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    (0..n).map(|i| (poly[i].conj() * poly[(i + 1) % n]).im).sum::<f64>() * 0.5
}

/// Point strictly inside the face bounded counterclockwise by `poly`.
fn interior_point(poly: &[Point], curve: &[Point], opts: &GeometryOptions) -> Option<Point> {
    let n = poly.len();
    let inside =
        |p: Point| distance_to_polyline(curve, p) > 10.0 * opts.point_tol && (winding_sum(poly, p) - 1.0).abs() < 0.05;
    let mut by_length: Vec<usize> = (0..n).collect();
    by_length.sort_by(|&i, &j| {
        let li = (poly[(i + 1) % n] - poly[i]).norm();
        let lj = (poly[(j + 1) % n] - poly[j]).norm();
        lj.total_cmp(&li).then(i.cmp(&j))
    });
    for &i in by_length.iter().take(32) {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        let d = b - a;
        let len = d.norm();
        if len == 0.0 {
            continue;
        }
        let normal = Point::i() * d / len;
        let mid = 0.5 * (a + b);
        let mut delta = 0.25 * len;
        for _ in 0..40 {
            let p = mid + normal * delta;
            if inside(p) {
                return Some(p);
            }
            delta *= 0.5;
        }
    }
    // Midpoints of chords between boundary points.
    for i in 0..n {
        for step in [n / 2, n / 3, n / 4] {
            let p = 0.5 * (poly[i] + poly[(i + step.max(1)) % n]);
            if inside(p) {
                return Some(p);
            }
        }
    }
    None
}

fn inconsistency(msg: String) -> TopologyError {
    TopologyError::ArrangementInconsistency(msg)
}

/// Builds the subdivision of the plane by `curve`, whose double points are `doubles`.
pub fn build_arrangement(
    curve: &ClosedCurve,
    doubles: &[DoublePoint],
    opts: &GeometryOptions,
) -> Result<Arrangement, TopologyError> {
    let pts = curve.points();
    let n = pts.len();
    let winding_at = |p: Point| snap_winding(winding_sum(pts, p), p);
    let (lo, hi) = curve.bounding_box();
    let far = lo - (hi - lo) - Point::new(1.0, 1.0);

    if doubles.is_empty() {
        let area = signed_area(pts);
        let boundary: Vec<Point> = if area > 0.0 {
            pts.to_vec()
        } else {
            pts.iter().rev().copied().collect()
        };
        let rep = interior_point(&boundary, pts, opts)
            .ok_or_else(|| inconsistency("no interior point for the bounded face".into()))?;
        let inner = Face {
            winding: winding_at(rep)?,
            representative: rep,
            unbounded: false,
        };
        let outer = Face {
            winding: winding_at(far)?,
            representative: far,
            unbounded: true,
        };
        let expected = if area > 0.0 { 1 } else { -1 };
        if inner.winding != expected || outer.winding != 0 {
            return Err(inconsistency(format!(
                "simple curve with windings {} and {}",
                inner.winding, outer.winding
            )));
        }
        let (left, right) = if area > 0.0 { (0, 1) } else { (1, 0) };
        return Ok(Arrangement {
            vertices: Vec::new(),
            edges: vec![pts.to_vec()],
            faces: vec![inner, outer],
            sectors: Vec::new(),
            edge_faces: vec![(left, right)],
        });
    }

    let seg_dir = |s: f64| {
        let i = (s.floor() as usize).min(n - 1);
        let d = pts[(i + 1) % n] - pts[i];
        d / d.norm()
    };
    let mut passages: Vec<Passage> = Vec::with_capacity(2 * doubles.len());
    for (v, d) in doubles.iter().enumerate() {
        for s in [d.s1, d.s2] {
            passages.push(Passage {
                s,
                vertex: v,
                direction: seg_dir(s),
            });
        }
    }
    passages.sort_by(|a, b| a.s.total_cmp(&b.s));
    let p_count = passages.len();
    for w in passages.windows(2) {
        if w[0].s == w[1].s {
            return Err(inconsistency(format!("two passages at parameter {}", w[0].s)));
        }
    }

    // Edge m runs from passage m to passage m + 1.
    let mut edges: Vec<Vec<Point>> = Vec::with_capacity(p_count);
    for m in 0..p_count {
        let a = passages[m];
        let b = passages[(m + 1) % p_count];
        let span = (b.s - a.s).rem_euclid(n as f64);
        let span = if span == 0.0 { n as f64 } else { span };
        let mut poly = vec![doubles[a.vertex].location];
        let first = a.s.floor() as i64 + 1;
        let last = (a.s + span).ceil() as i64 - 1;
        for j in first..=last {
            poly.push(pts[j.rem_euclid(n as i64) as usize]);
        }
        poly.push(doubles[b.vertex].location);
        edges.push(poly);
    }

    // Half-edge 2m follows edge m forwards, 2m + 1 backwards.
    let half_count = 2 * p_count;
    let twin = |h: usize| h ^ 1;
    let mut outgoing: Vec<Vec<(f64, usize)>> = vec![Vec::new(); doubles.len()];
    for (m, p) in passages.iter().enumerate() {
        let before = (m + p_count - 1) % p_count;
        outgoing[p.vertex].push((p.direction.arg(), 2 * m));
        outgoing[p.vertex].push(((-p.direction).arg(), 2 * before + 1));
    }
    let mut out_sorted: Vec<[usize; 4]> = Vec::with_capacity(doubles.len());
    for (v, list) in outgoing.iter_mut().enumerate() {
        if list.len() != 4 {
            return Err(inconsistency(format!("vertex {v} has degree {}", list.len())));
        }
        list.sort_by(|a, b| a.0.total_cmp(&b.0));
        out_sorted.push([list[0].1, list[1].1, list[2].1, list[3].1]);
    }
    let origin_vertex = |h: usize| {
        let m = h / 2;
        if h.is_multiple_of(2) {
            passages[m].vertex
        } else {
            passages[(m + 1) % p_count].vertex
        }
    };
    let next = |h: usize| {
        let t = twin(h);
        let v = origin_vertex(t);
        let ring = &out_sorted[v];
        let i = ring.iter().position(|&x| x == t).expect("twin leaves its vertex");
        ring[(i + 3) % 4]
    };
    let half_polyline = |h: usize| -> Vec<Point> {
        let e = &edges[h / 2];
        if h.is_multiple_of(2) {
            e.clone()
        } else {
            e.iter().rev().copied().collect()
        }
    };

    let mut face_of = vec![usize::MAX; half_count];
    let mut boundaries: Vec<Vec<Point>> = Vec::new();
    for start in 0..half_count {
        if face_of[start] != usize::MAX {
            continue;
        }
        let f = boundaries.len();
        let mut poly = Vec::new();
        let mut h = start;
        let mut steps = 0;
        loop {
            face_of[h] = f;
            let piece = half_polyline(h);
            poly.extend_from_slice(&piece[..piece.len() - 1]);
            h = next(h);
            steps += 1;
            if h == start {
                break;
            }
            if face_of[h] != usize::MAX || steps > half_count {
                return Err(inconsistency("face walk does not close".into()));
            }
        }
        boundaries.push(poly);
    }

    let v_count = doubles.len() as i64;
    let e_count = p_count as i64;
    let f_count = boundaries.len() as i64;
    if v_count - e_count + f_count != 2 {
        return Err(inconsistency(format!(
            "Euler characteristic V - E + F = {v_count} - {e_count} + {f_count} != 2"
        )));
    }

    let areas: Vec<f64> = boundaries.iter().map(|b| signed_area(b)).collect();
    let negative: Vec<usize> = (0..areas.len()).filter(|&f| areas[f] < 0.0).collect();
    if negative.len() != 1 {
        return Err(inconsistency(format!(
            "expected one clockwise (unbounded) face boundary, found {}",
            negative.len()
        )));
    }
    let unbounded = negative[0];
    let mut faces = Vec::with_capacity(boundaries.len());
    for (f, poly) in boundaries.iter().enumerate() {
        let representative = if f == unbounded {
            far
        } else {
            interior_point(poly, pts, opts).ok_or_else(|| inconsistency(format!("no interior point for face {f}")))?
        };
        faces.push(Face {
            winding: winding_at(representative)?,
            representative,
            unbounded: f == unbounded,
        });
    }
    if faces[unbounded].winding != 0 {
        return Err(inconsistency("unbounded face has nonzero winding".into()));
    }

    let edge_faces: Vec<(usize, usize)> = (0..p_count).map(|m| (face_of[2 * m], face_of[2 * m + 1])).collect();
    for (m, &(left, right)) in edge_faces.iter().enumerate() {
        if faces[left].winding - faces[right].winding != 1 {
            return Err(inconsistency(format!(
                "edge {m}: left winding {} and right winding {} do not differ by one",
                faces[left].winding, faces[right].winding
            )));
        }
    }
    let sectors = out_sorted
        .iter()
        .map(|ring| [face_of[ring[0]], face_of[ring[1]], face_of[ring[2]], face_of[ring[3]]])
        .collect();

    Ok(Arrangement {
        vertices: doubles.to_vec(),
        edges,
        faces,
        sectors,
        edge_faces,
    })
}

impl Arrangement {
    pub fn unbounded_face(&self) -> usize {
        self.faces.iter().position(|f| f.unbounded).expect("one unbounded face")
    }

    /// Sorted multiset of face windings.
    pub fn winding_multiset(&self) -> Vec<i64> {
        let mut w: Vec<i64> = self.faces.iter().map(|f| f.winding).collect();
        w.sort_unstable();
        w
    }

    #[cfg(test)]
    pub(crate) fn from_sector_windings(vertices: &[[i64; 4]]) -> Arrangement {
        let mut faces = Vec::new();
        let mut sectors = Vec::new();
        for w in vertices {
            let base = faces.len();
            for &x in w {
                faces.push(Face {
                    winding: x,
                    representative: Point::new(0.0, 0.0),
                    unbounded: false,
                });
            }
            sectors.push([base, base + 1, base + 2, base + 3]);
        }
        Arrangement {
            vertices: Vec::new(),
            edges: Vec::new(),
            faces,
            sectors,
            edge_faces: Vec::new(),
        }
    }
}
