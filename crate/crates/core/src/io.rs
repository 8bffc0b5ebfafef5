//! JSON and CSV dumps of orbits, lifts and arrangements.
//!
//! JSON output is canonical: object keys are sorted and every float is
//! printed with 17 significant digits, so equal data gives equal bytes.

use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{ClosedCurve, CurveError, Point};
use crate::dynamics::Orbit;
use crate::regularization::{Cover, LiftedCurve};
use crate::topology::{Arrangement, JPlusBreakdown};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed CSV at line {line}: {reason}")]
    Csv { line: usize, reason: String },
    #[error(transparent)]
    Curve(#[from] CurveError),
}

fn pair(p: Point) -> [f64; 2] {
    [p.re, p.im]
}

/// A traced orbit together with the torus it lies on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitDump {
    pub mu: f64,
    pub c: f64,
    pub k: u32,
    pub l: u32,
    pub f_lambda: f64,
    pub lambda_max: f64,
    #[serde(rename = "T_lambda")]
    pub t_lambda: f64,
    #[serde(rename = "T_nu")]
    pub t_nu: f64,
    pub phase: f64,
    pub samples: Vec<[f64; 2]>,
    pub collision_markers: Vec<usize>,
}

impl OrbitDump {
    pub fn from_orbit(orbit: &Orbit) -> Self {
        let t = &orbit.torus;
        OrbitDump {
            mu: t.params.mu(),
            c: t.params.c(),
            k: t.k,
            l: t.l,
            f_lambda: t.f_lambda,
            lambda_max: t.lambda_max,
            t_lambda: t.t_lambda,
            t_nu: t.t_nu,
            phase: orbit.phase,
            samples: orbit.curve.points().iter().map(|&p| pair(p)).collect(),
            collision_markers: orbit.curve.markers().to_vec(),
        }
    }

    pub fn curve(&self) -> Result<ClosedCurve, CurveError> {
        let pts = self.samples.iter().map(|s| Point::new(s[0], s[1])).collect();
        ClosedCurve::with_markers(pts, self.collision_markers.clone())
    }

    pub fn to_json(&self) -> Result<String, IoError> {
        to_canonical_json(self)
    }

    pub fn from_json(text: &str) -> Result<Self, IoError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, IoError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_csv(&self) -> String {
        curve_csv(&self.samples)
    }
}

fn curve_csv(samples: &[[f64; 2]]) -> String {
    let mut out = String::from("q1,q2\n");
    for s in samples {
        out.push_str(&format!("{},{}\n", float17(s[0]), float17(s[1])));
    }
    out
}

/// Reads the `q1,q2` CSV written by [`OrbitDump::to_csv`].
pub fn curve_from_csv(text: &str) -> Result<ClosedCurve, IoError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == "q1,q2" => {}
        _ => {
            return Err(IoError::Csv {
                line: 1,
                reason: "expected header q1,q2".into(),
            })
        }
    }
    let mut pts = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |reason: &str| IoError::Csv {
            line: i + 1,
            reason: reason.to_string(),
        };
        let (x, y) = line.split_once(',').ok_or_else(|| bad("expected two columns"))?;
        let x: f64 = x.trim().parse().map_err(|_| bad("q1 is not a number"))?;
        let y: f64 = y.trim().parse().map_err(|_| bad("q2 is not a number"))?;
        pts.push(Point::new(x, y));
    }
    Ok(ClosedCurve::new(pts)?)
}

/// A regularized curve. `samples` holds the components one after another;
/// all components have the same length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftDump {
    #[serde(flatten)]
    pub orbit: OrbitDump,
    pub cover: Cover,
    pub components: usize,
    pub lifted_singularities: Vec<[f64; 2]>,
}

impl LiftDump {
    /// `orbit` describes the base curve; its samples are replaced by the lift.
    pub fn new(orbit: &OrbitDump, lift: &LiftedCurve) -> Self {
        let mut base = orbit.clone();
        base.samples = lift
            .components
            .iter()
            .flat_map(|c| c.points().iter().map(|&p| pair(p)))
            .collect();
        base.collision_markers = Vec::new();
        LiftDump {
            orbit: base,
            cover: lift.cover,
            components: lift.components.len(),
            lifted_singularities: lift.lifted_singularities.iter().map(|&p| pair(p)).collect(),
        }
    }

    pub fn to_json(&self) -> Result<String, IoError> {
        to_canonical_json(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoublePointDump {
    pub x: f64,
    pub y: f64,
    pub s1: f64,
    pub s2: f64,
    pub angle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceDump {
    pub winding: i64,
    pub representative: [f64; 2],
}

/// Double points and faces of a curve with its `J+`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrangementDump {
    pub double_points: Vec<DoublePointDump>,
    pub faces: Vec<FaceDump>,
    pub jplus: i64,
}

impl ArrangementDump {
    pub fn new(arr: &Arrangement, breakdown: &JPlusBreakdown) -> Self {
        ArrangementDump {
            double_points: arr
                .vertices
                .iter()
                .map(|d| DoublePointDump {
                    x: d.location.re,
                    y: d.location.im,
                    s1: d.s1,
                    s2: d.s2,
                    angle: d.angle,
                })
                .collect(),
            faces: arr
                .faces
                .iter()
                .map(|f| FaceDump {
                    winding: f.winding,
                    representative: pair(f.representative),
                })
                .collect(),
            jplus: breakdown.jplus,
        }
    }

    pub fn to_json(&self) -> Result<String, IoError> {
        to_canonical_json(self)
    }
}

/// Fixed 17-significant-digit rendering; non-finite values become `null`.
fn float17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

struct FixedFloats;

impl serde_json::ser::Formatter for FixedFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(float17(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// Serializes with sorted keys and fixed 17-significant-digit floats.
pub fn to_canonical_json<T: Serialize + ?Sized>(value: &T) -> Result<String, IoError> {
    // Going through `Value` sorts the keys of every object.
    let tree = serde_json::to_value(value)?;
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedFloats);
    tree.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json emits UTF-8"))
}
