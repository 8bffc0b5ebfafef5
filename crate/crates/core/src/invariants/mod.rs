//! The four J⁺-type invariants of two-center orbits,
//!
//! ```text
//! J0     = J+(K) + w_E(K)^2 / 2 + w_M(K)^2 / 2
//! JE     = J+(K_E) + w_M1(K_E)^2 / 2 + w_M2(K_E)^2 / 2     (Levi-Civita lift at E)
//! JM     = J+(K_M) + w_E1(K_M)^2 / 2 + w_E2(K_M)^2 / 2     (Levi-Civita lift at M)
//! (JEM, n) = (J+(K~) mod 2n, |w_0(K~)|)                    (Birkhoff lift)
//! ```
//!
//! computed numerically from traced orbits, alongside their closed forms on
//! `T_{k,l}` tori.

mod half;
mod verify;

pub use half::HalfInteger;
pub use verify::{verify_torus, Check, CollisionCount, DoubledSet, PipelineOptions, VerificationReport};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{ClosedCurve, CurveSource, Point};
use crate::dynamics::{gcd, DynamicsError, Orbit, PRIMARY_E, PRIMARY_M};
use crate::regularization::{birkhoff_lift_with, levi_civita_lift_with, n_invariant, LiftError, LiftedCurve, Primary};
use crate::topology::{
    find_self_intersections, jplus_breakdown_with, winding_number_with, GeometryOptions, JPlusBreakdown, TopologyError,
};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum InvariantError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("lift components disagree: {0}")]
    ComponentMismatch(String),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Lift(#[from] LiftError),
}

/// `(J0, JE, JM, n, JEM)`; `j_em` is reduced to `[0, 2n)` when `n > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InvariantSet {
    pub j0: HalfInteger,
    #[serde(rename = "jE")]
    pub j_e: HalfInteger,
    #[serde(rename = "jM")]
    pub j_m: HalfInteger,
    pub n: u64,
    #[serde(rename = "jEM")]
    pub j_em: i64,
}

/// Canonical representative of `raw` modulo `2n`, or `raw` itself when `n = 0`.
pub fn reduce_jem(raw: i64, n: u64) -> i64 {
    if n == 0 {
        raw
    } else {
        raw.rem_euclid(2 * n as i64)
    }
}

fn check_coprime(k: u32, l: u32) -> Result<(), InvariantError> {
    if k == 0 || l == 0 || gcd(k, l) != 1 {
        return Err(InvariantError::Precondition(format!(
            "k and l must be coprime positive integers (got k = {k}, l = {l})"
        )));
    }
    Ok(())
}

/// Closed-form invariants of the lemniscate orbits on a `T_{k,l}` torus.
pub fn theorem_formulas(k: u32, l: u32) -> Result<InvariantSet, InvariantError> {
    check_coprime(k, l)?;
    let (k, l) = (i64::from(k), i64::from(l));
    let j0 = k * l - k + 1;
    let j_side = if l % 2 == 0 {
        if gcd(k as u32, (l / 2) as u32) != 1 {
            return Err(InvariantError::Precondition(format!(
                "gcd(k, l/2) = 1 fails for k = {k}, l = {l}"
            )));
        }
        k * l / 2 - k + 1
    } else {
        2 * k * l - 2 * k + 1
    };
    Ok(InvariantSet {
        j0: HalfInteger::from_integer(j0),
        j_e: HalfInteger::from_integer(j_side),
        j_m: HalfInteger::from_integer(j_side),
        n: l as u64,
        j_em: reduce_jem(1 - k + k * l - l * l, l as u64),
    })
}

/// Number of self-intersections of the collision-collision orbits on `T_{k,l}`.
pub fn selfintersection_formula(k: u32, l: u32) -> Result<u64, InvariantError> {
    check_coprime(k, l)?;
    let (k, l) = (u64::from(k), u64::from(l));
    Ok(if l % 2 == 0 {
        (k * (l - 1) - 1) / 2
    } else {
        k * (l - 1) / 2
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistinguishedKind {
    BrakeBrake,
    BrakeCollision,
    CollisionTypeI,
    CollisionTypeII,
}

/// `J0` of a distinguished orbit with `n` self-intersections.
pub fn distinguished_j0(kind: DistinguishedKind, n: u64) -> HalfInteger {
    let base = HalfInteger::from_integer(2 * n as i64);
    base + match kind {
        DistinguishedKind::BrakeBrake => HalfInteger::ZERO,
        DistinguishedKind::BrakeCollision => HalfInteger::half(1),
        DistinguishedKind::CollisionTypeI => HalfInteger::from_integer(2),
        DistinguishedKind::CollisionTypeII => HalfInteger::from_integer(1),
    }
}

/// J⁺ of a degree-`d` covering curve from the base curve data:
/// `d^2 J+(K) - (d^2 - 1) + n_lift - d^2 n_base`.
pub fn covering_jplus_check(degree: i64, jplus_base: i64, n_base: i64, n_lift: i64) -> i64 {
    let d2 = degree * degree;
    d2 * jplus_base - (d2 - 1) + n_lift - d2 * n_base
}

/// Intermediate quantities of the `J0` computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct J0Detail {
    pub breakdown: JPlusBreakdown,
    pub w_e: i64,
    pub w_m: i64,
    pub value: HalfInteger,
}

pub fn j0_numeric(curve: &ClosedCurve) -> Result<J0Detail, InvariantError> {
    j0_numeric_with(curve, &GeometryOptions::default())
}

pub fn j0_numeric_with(curve: &ClosedCurve, opts: &GeometryOptions) -> Result<J0Detail, InvariantError> {
    let breakdown = jplus_breakdown_with(curve, opts)?;
    let w_e = winding_number_with(curve, PRIMARY_E, opts)?;
    let w_m = winding_number_with(curve, PRIMARY_M, opts)?;
    Ok(J0Detail {
        breakdown,
        w_e,
        w_m,
        value: HalfInteger::from_integer(breakdown.jplus) + HalfInteger::half(w_e * w_e + w_m * w_m),
    })
}

/// Per-component data of a Levi-Civita lift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftComponentDetail {
    pub breakdown: JPlusBreakdown,
    /// Windings about the two lifted copies of the other primary.
    pub w1: i64,
    pub w2: i64,
    pub value: HalfInteger,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeviCivitaDetail {
    pub center: Primary,
    pub components: Vec<LiftComponentDetail>,
    pub value: HalfInteger,
}

fn single_value<T: PartialEq + Copy + std::fmt::Debug>(what: &str, values: &[T]) -> Result<T, InvariantError> {
    if values.windows(2).any(|w| w[0] != w[1]) {
        return Err(InvariantError::ComponentMismatch(format!("{what}: {values:?}")));
    }
    values
        .first()
        .copied()
        .ok_or_else(|| InvariantError::ComponentMismatch(format!("{what}: no components")))
}

/// `JE` (center `E`) or `JM` (center `M`) from the Levi-Civita lift.
pub fn levi_civita_invariant(
    curve: &ClosedCurve,
    center: Primary,
    source: Option<&dyn CurveSource>,
    opts: &GeometryOptions,
) -> Result<(LeviCivitaDetail, LiftedCurve), InvariantError> {
    let lifted = levi_civita_lift_with(curve, center, source)?;
    let mut components = Vec::new();
    for comp in &lifted.components {
        let breakdown = jplus_breakdown_with(comp, opts)?;
        let w1 = winding_number_with(comp, lifted.lifted_singularities[0], opts)?;
        let w2 = winding_number_with(comp, lifted.lifted_singularities[1], opts)?;
        components.push(LiftComponentDetail {
            breakdown,
            w1,
            w2,
            value: HalfInteger::from_integer(breakdown.jplus) + HalfInteger::half(w1 * w1 + w2 * w2),
        });
    }
    let values: Vec<HalfInteger> = components.iter().map(|c| c.value).collect();
    let value = single_value("Levi-Civita invariant", &values)?;
    Ok((
        LeviCivitaDetail {
            center,
            components,
            value,
        },
        lifted,
    ))
}

pub fn je_numeric(curve: &ClosedCurve) -> Result<HalfInteger, InvariantError> {
    Ok(
        levi_civita_invariant(curve, Primary::E, None, &GeometryOptions::default())?
            .0
            .value,
    )
}

pub fn jm_numeric(curve: &ClosedCurve) -> Result<HalfInteger, InvariantError> {
    Ok(
        levi_civita_invariant(curve, Primary::M, None, &GeometryOptions::default())?
            .0
            .value,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BirkhoffDetail {
    /// Breakdown of J⁺ for each lift component.
    pub components: Vec<JPlusBreakdown>,
    pub n: u64,
    pub raw_jplus: i64,
    pub value: i64,
}

pub fn birkhoff_invariant(
    curve: &ClosedCurve,
    source: Option<&dyn CurveSource>,
    opts: &GeometryOptions,
) -> Result<(BirkhoffDetail, LiftedCurve), InvariantError> {
    let lifted = birkhoff_lift_with(curve, source)?;
    let n = n_invariant(&lifted)?;
    let mut components = Vec::new();
    for comp in &lifted.components {
        components.push(jplus_breakdown_with(comp, opts)?);
    }
    let reduced: Vec<i64> = components.iter().map(|b| reduce_jem(b.jplus, n)).collect();
    let value = single_value("Birkhoff invariant", &reduced)?;
    Ok((
        BirkhoffDetail {
            raw_jplus: components[0].jplus,
            components,
            n,
            value,
        },
        lifted,
    ))
}

/// `(JEM, n)` from the Birkhoff lift.
pub fn jem_numeric(curve: &ClosedCurve) -> Result<(i64, u64), InvariantError> {
    let (d, _) = birkhoff_invariant(curve, None, &GeometryOptions::default())?;
    Ok((d.value, d.n))
}

/// All numeric invariants of a curve with their intermediate quantities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericInvariants {
    pub set: InvariantSet,
    pub j0: J0Detail,
    #[serde(rename = "jE")]
    pub j_e: LeviCivitaDetail,
    #[serde(rename = "jM")]
    pub j_m: LeviCivitaDetail,
    #[serde(rename = "jEM")]
    pub j_em: BirkhoffDetail,
}

pub fn numeric_invariants(
    curve: &ClosedCurve,
    source: Option<&dyn CurveSource>,
    opts: &GeometryOptions,
) -> Result<NumericInvariants, InvariantError> {
    let j0 = j0_numeric_with(curve, opts)?;
    let (j_e, _) = levi_civita_invariant(curve, Primary::E, source, opts)?;
    let (j_m, _) = levi_civita_invariant(curve, Primary::M, source, opts)?;
    let (j_em, _) = birkhoff_invariant(curve, source, opts)?;
    Ok(NumericInvariants {
        set: InvariantSet {
            j0: j0.value,
            j_e: j_e.value,
            j_m: j_m.value,
            n: j_em.n,
            j_em: j_em.value,
        },
        j0,
        j_e,
        j_m,
        j_em,
    })
}

/// Interior self-intersections of a collision orbit between its two
/// collisions, ignoring crossings within `exclusion` of a primary.
pub fn collision_selfintersections(
    orbit: &Orbit,
    exclusion: f64,
    opts: &GeometryOptions,
) -> Result<usize, InvariantError> {
    let arc = orbit
        .collision_arc()
        .ok_or_else(|| InvariantError::Precondition("self-intersections are counted on collision orbits".into()))?;
    let crossings = find_self_intersections(arc, false, opts)?;
    Ok(crossings
        .iter()
        .filter(|d| {
            [PRIMARY_E, PRIMARY_M]
                .iter()
                .all(|&q| (d.location - q).norm() > exclusion)
        })
        .count())
}

/// Exact Birkhoff lift `exp(lambda + i nu)` of an orbit from its states.
pub fn exact_birkhoff_lift(orbit: &Orbit) -> Vec<Point> {
    orbit.states.iter().map(|s| Point::new(s.lambda, s.nu).exp()).collect()
}
