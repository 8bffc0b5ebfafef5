//! Closed planar polylines and a few synthetic test curves.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Point = Complex64;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum CurveError {
    #[error("a closed curve needs at least 8 points (got {0})")]
    TooFewPoints(usize),
    #[error("consecutive points {0} and {1} coincide")]
    RepeatedPoint(usize, usize),
    #[error("point {0} is not finite")]
    NonFinite(usize),
    #[error("marker index {0} out of range")]
    BadMarker(usize),
}

/// Something that can be evaluated between the samples of a curve, in
/// sample units: `point_at(i as f64)` is sample `i`, and the map has period
/// equal to the number of samples.
pub trait CurveSource {
    fn point_at(&self, s: f64) -> Point;
}

/// Oriented closed polyline; the last point connects back to the first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedCurve {
    points: Vec<Point>,
    #[serde(default)]
    markers: Vec<usize>,
}

impl ClosedCurve {
    pub fn new(points: Vec<Point>) -> Result<Self, CurveError> {
        Self::with_markers(points, Vec::new())
    }

    /// Curve with marked sample indices (collision points of an orbit).
    pub fn with_markers(points: Vec<Point>, mut markers: Vec<usize>) -> Result<Self, CurveError> {
        let n = points.len();
        if n < 8 {
            return Err(CurveError::TooFewPoints(n));
        }
        for (i, p) in points.iter().enumerate() {
            if !(p.re.is_finite() && p.im.is_finite()) {
                return Err(CurveError::NonFinite(i));
            }
            let j = (i + 1) % n;
            if *p == points[j] {
                return Err(CurveError::RepeatedPoint(i, j));
            }
        }
        markers.sort_unstable();
        markers.dedup();
        if let Some(&m) = markers.iter().find(|&&m| m >= n) {
            return Err(CurveError::BadMarker(m));
        }
        Ok(ClosedCurve { points, markers })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn markers(&self) -> &[usize] {
        &self.markers
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Segment `i` runs from point `i` to point `i + 1` (cyclically).
    pub fn segment(&self, i: usize) -> (Point, Point) {
        let n = self.points.len();
        (self.points[i % n], self.points[(i + 1) % n])
    }

    /// Same point set traversed backwards, starting at the same point.
    pub fn reversed(&self) -> ClosedCurve {
        let n = self.points.len();
        let points = (0..n).map(|i| self.points[(n - i) % n]).collect();
        let markers = self.markers.iter().map(|&m| (n - m) % n).collect();
        ClosedCurve::with_markers(points, markers).expect("reversal keeps a valid curve")
    }

    /// Image under a pointwise map; fails if the map collapses consecutive samples.
    pub fn mapped(&self, f: impl Fn(Point) -> Point) -> Result<ClosedCurve, CurveError> {
        ClosedCurve::with_markers(self.points.iter().map(|&p| f(p)).collect(), self.markers.clone())
    }

    /// Every `step`-th sample.
    pub fn decimated(&self, step: usize) -> Result<ClosedCurve, CurveError> {
        let step = step.max(1);
        let points: Vec<Point> = self.points.iter().step_by(step).copied().collect();
        let markers = self
            .markers
            .iter()
            .filter(|&&m| m % step == 0)
            .map(|&m| m / step)
            .collect();
        ClosedCurve::with_markers(points, markers)
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = self.points[0];
        let mut hi = self.points[0];
        for p in &self.points {
            lo.re = lo.re.min(p.re);
            lo.im = lo.im.min(p.im);
            hi.re = hi.re.max(p.re);
            hi.im = hi.im.max(p.im);
        }
        (lo, hi)
    }

    /// Samples `source` at `n` equally spaced parameters of the period `n`.
    pub fn sample(source: &impl Fn(f64) -> Point, n: usize) -> Result<ClosedCurve, CurveError> {
        ClosedCurve::new((0..n).map(|i| source(i as f64 / n as f64)).collect())
    }

    pub fn circle(center: Point, radius: f64, turns: i32, n: usize) -> Result<ClosedCurve, CurveError> {
        let turns = f64::from(turns);
        ClosedCurve::sample(&|t| center + Complex64::from_polar(radius, TAU * turns * t), n)
    }

    /// Standard curve `K_j` of Arnold's normalization: the figure eight for
    /// `j = 0`, a circle with `j - 1` interior loops otherwise.
    pub fn standard(j: u32, n: usize) -> Result<ClosedCurve, CurveError> {
        if j == 0 {
            return ClosedCurve::sample(
                &|t| {
                    let a = TAU * t;
                    Complex64::new(a.cos(), 0.5 * (2.0 * a).sin())
                },
                n,
            );
        }
        let jf = f64::from(j);
        let loop_size = 1.5 / jf;
        ClosedCurve::sample(
            &|t| {
                let a = TAU * t;
                Complex64::from_polar(1.0, a) + Complex64::from_polar(loop_size, jf * a)
            },
            n,
        )
    }
}

/// Catmull-Rom resampling of an open polyline, `factor` points per segment.
pub(crate) fn catmull_rom(points: &[Point], factor: usize) -> Vec<Point> {
    let n = points.len();
    if n < 2 || factor < 2 {
        return points.to_vec();
    }
    let at = |i: isize| -> Point {
        if i < 0 {
            2.0 * points[0] - points[1]
        } else if i as usize >= n {
            2.0 * points[n - 1] - points[n - 2]
        } else {
            points[i as usize]
        }
    };
    let mut out = Vec::with_capacity((n - 1) * factor + 1);
    for i in 0..n - 1 {
        let (p0, p1, p2, p3) = (
            at(i as isize - 1),
            at(i as isize),
            at(i as isize + 1),
            at(i as isize + 2),
        );
        for s in 0..factor {
            let t = s as f64 / factor as f64;
            let t2 = t * t;
            let t3 = t2 * t;
            out.push(
                0.5 * ((2.0 * p1)
                    + (p2 - p0) * t
                    + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t2
                    + (3.0 * p1 - p0 - 3.0 * p2 + p3) * t3),
            );
        }
    }
    out.push(points[n - 1]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(ClosedCurve::new(vec![Point::new(0.0, 0.0); 3]).is_err());
        let mut pts: Vec<Point> = (0..10).map(|i| Point::new(i as f64, 0.0)).collect();
        pts[4] = pts[3];
        assert_eq!(ClosedCurve::new(pts).unwrap_err(), CurveError::RepeatedPoint(3, 4));
    }

    #[test]
    fn reversal_keeps_start_and_markers() {
        let c = ClosedCurve::with_markers(
            (0..10).map(|i| Point::new(i as f64, (i * i) as f64)).collect(),
            vec![0, 3],
        )
        .unwrap();
        let r = c.reversed();
        assert_eq!(r.points()[0], c.points()[0]);
        assert_eq!(r.points()[1], c.points()[9]);
        assert_eq!(r.markers(), &[0, 7]);
        assert_eq!(r.points()[7], c.points()[3]);
    }

    #[test]
    fn catmull_rom_interpolates() {
        let pts: Vec<Point> = (0..5).map(|i| Point::new(i as f64, (i as f64).powi(2))).collect();
        let out = catmull_rom(&pts, 8);
        assert_eq!(out.len(), 33);
        for i in 0..5 {
            assert!((out[8 * i] - pts[i]).norm() < 1e-14);
        }
    }
}
