//! Periodic lemniscate orbits of Euler's two-center problem and their
//! J⁺-type invariants.
//!
//! The crate is organized bottom-up:
//!
//! - [`dynamics`]: tori of the separated problem, periods, and orbit tracing;
//! - [`topology`]: double points, face windings and Arnold's J⁺ of closed polylines;
//! - [`regularization`]: Levi-Civita and Birkhoff lifts of plane curves;
//! - [`invariants`]: the four two-center invariants, their closed forms, and
//!   an end-to-end verification harness;
//! - [`io`]: JSON/CSV dumps.

pub mod curve;
pub mod dynamics;
pub mod invariants;
pub mod io;
pub mod numerics;
pub mod regularization;
pub mod topology;

pub use curve::{ClosedCurve, CurveSource, Point};
pub use dynamics::{EulerParams, RegionLabel, TorusData};
pub use invariants::{HalfInteger, InvariantSet};
