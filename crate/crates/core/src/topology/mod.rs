//! Planar topology of generic closed curves: winding numbers, double points,
//! the induced planar subdivision, and Arnold's J⁺ through Viro's formula
//!
//! ```text
//! J+(K) = 1 + #D - sum_C w_C^2 + sum_p ind_p^2
//! ```
//!
//! where `C` runs over the faces of the complement and `ind_p` is the mean
//! winding number of the four sectors at the double point `p`.

mod arrangement;
mod intersect;

pub use arrangement::{build_arrangement, Arrangement, Face};
pub use intersect::find_self_intersections;

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{ClosedCurve, Point};
use crate::invariants::HalfInteger;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum TopologyError {
    #[error("point ({x}, {y}) lies within {distance:e} of the curve")]
    PointOnCurve { x: f64, y: f64, distance: f64 },
    #[error("winding number about ({x}, {y}) is {value}, too far from an integer")]
    WindingResidual { x: f64, y: f64, value: f64 },
    #[error("curve is not generic: {0}")]
    NonGenericCurve(String),
    #[error("inconsistent arrangement: {0}")]
    ArrangementInconsistency(String),
}

/// Geometric tolerances for intersection and winding computations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryOptions {
    /// Crossings closer than this are the same double point.
    pub cluster_tol: f64,
    /// Smallest accepted crossing angle in radians.
    pub angle_tol: f64,
    /// Smallest distance from the curve at which winding numbers are evaluated.
    pub point_tol: f64,
    pub refine_factor: usize,
    pub refine_rounds: usize,
}

impl Default for GeometryOptions {
    fn default() -> Self {
        GeometryOptions {
            cluster_tol: 1e-7,
            angle_tol: 1e-3,
            point_tol: 1e-9,
            refine_factor: 8,
            refine_rounds: 2,
        }
    }
}

/// A transverse self-crossing of a curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoublePoint {
    pub location: Point,
    /// Curve parameters of the two passages, in sample units, `s1 < s2`.
    pub s1: f64,
    pub s2: f64,
    pub tangent1: Point,
    pub tangent2: Point,
    /// Crossing angle in `(0, pi/2]`.
    pub angle: f64,
}

fn distance_to_segment(p: Point, a: Point, b: Point) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * d.conj()).re / len2).clamp(0.0, 1.0);
    (p - (a + d * t)).norm()
}

pub(crate) fn distance_to_polyline(points: &[Point], p: Point) -> f64 {
    let n = points.len();
    (0..n)
        .map(|i| distance_to_segment(p, points[i], points[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

/// Total turning of `points - p` in units of full turns, unrounded.
pub(crate) fn winding_sum(points: &[Point], p: Point) -> f64 {
    let n = points.len();
    let mut total = 0.0;
    for i in 0..n {
        let a = points[i] - p;
        let b = points[(i + 1) % n] - p;
        total += (b * a.conj()).arg();
    }
    total / TAU
}

pub(crate) fn snap_winding(value: f64, p: Point) -> Result<i64, TopologyError> {
    let rounded = value.round();
    if (value - rounded).abs() >= 0.05 {
        return Err(TopologyError::WindingResidual {
            x: p.re,
            y: p.im,
            value,
        });
    }
    Ok(rounded as i64)
}

/// Winding number of a closed polyline about `p`.
pub fn winding_number(curve: &ClosedCurve, p: Point) -> Result<i64, TopologyError> {
    winding_number_with(curve, p, &GeometryOptions::default())
}

pub fn winding_number_with(curve: &ClosedCurve, p: Point, opts: &GeometryOptions) -> Result<i64, TopologyError> {
    let distance = distance_to_polyline(curve.points(), p);
    if !(distance > opts.point_tol) {
        return Err(TopologyError::PointOnCurve {
            x: p.re,
            y: p.im,
            distance,
        });
    }
    snap_winding(winding_sum(curve.points(), p), p)
}

/// Double points of a closed curve.
pub fn find_double_points(curve: &ClosedCurve) -> Result<Vec<DoublePoint>, TopologyError> {
    find_double_points_with(curve, &GeometryOptions::default())
}

pub fn find_double_points_with(curve: &ClosedCurve, opts: &GeometryOptions) -> Result<Vec<DoublePoint>, TopologyError> {
    find_self_intersections(curve.points(), true, opts)
}

/// Index of vertex `vertex` of the arrangement: mean winding of its four sectors.
pub fn double_point_index(arrangement: &Arrangement, vertex: usize) -> HalfInteger {
    let sum: i64 = arrangement.sectors[vertex]
        .iter()
        .map(|&f| arrangement.faces[f].winding)
        .sum();
    // ind = sum / 4, stored doubled.
    HalfInteger::from_doubled(sum / 2)
}

/// The terms of Viro's formula for one curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JPlusBreakdown {
    pub double_points: usize,
    pub sum_w2: i64,
    pub sum_ind2: i64,
    pub jplus: i64,
}

impl JPlusBreakdown {
    pub fn from_arrangement(arr: &Arrangement) -> Result<Self, TopologyError> {
        let sum_w2: i64 = arr.faces.iter().map(|f| f.winding * f.winding).sum();
        // ind_p^2 with ind_p = d/2 is d^2/4.
        let mut sum_ind2_x4 = 0;
        for v in 0..arr.vertices.len() {
            let d = double_point_index(arr, v).doubled();
            sum_ind2_x4 += d * d;
        }
        let total_x4 = 4 * (1 + arr.vertices.len() as i64 - sum_w2) + sum_ind2_x4;
        if total_x4 % 4 != 0 || sum_ind2_x4 % 4 != 0 {
            return Err(TopologyError::ArrangementInconsistency(format!(
                "Viro sum is not an integer (4 J+ = {total_x4})"
            )));
        }
        Ok(JPlusBreakdown {
            double_points: arr.vertices.len(),
            sum_w2,
            sum_ind2: sum_ind2_x4 / 4,
            jplus: total_x4 / 4,
        })
    }
}

pub fn jplus_breakdown(curve: &ClosedCurve) -> Result<JPlusBreakdown, TopologyError> {
    jplus_breakdown_with(curve, &GeometryOptions::default())
}

pub fn jplus_breakdown_with(curve: &ClosedCurve, opts: &GeometryOptions) -> Result<JPlusBreakdown, TopologyError> {
    let doubles = find_double_points_with(curve, opts)?;
    let arr = build_arrangement(curve, &doubles, opts)?;
    JPlusBreakdown::from_arrangement(&arr)
}

/// Arnold's J⁺ of a generic closed curve.
pub fn viro_jplus(curve: &ClosedCurve) -> Result<i64, TopologyError> {
    Ok(jplus_breakdown(curve)?.jplus)
}
