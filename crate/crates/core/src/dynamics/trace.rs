//! Closed orbits on a resonant torus.
//!
//! Time along each separated motion is obtained by inverting the period
//! quadrature: cumulative time tables at fixed nodes bracket the answer and
//! a safeguarded Newton iteration on the exact integral polishes it. No ODE
//! is integrated, so nothing drifts over many cycles.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{DynamicsError, EllipticState, LambdaMotion, NuMotion, TorusData, PRIMARY_E, PRIMARY_M};
use crate::curve::{ClosedCurve, CurveSource, Point};
use crate::numerics::{integrate, QuadOptions};

const LAMBDA_PANELS: usize = 64;
const NU_PANELS: usize = 128;

/// Minimum distance between a generic orbit sample and a primary.
const COLLISION_TOL: f64 = 1e-9;

/// Fraction of a sample step by which generic orbits are shifted. Symmetric
/// orbits cross their symmetry axes at rational fractions of the period, and
/// an unshifted grid would put both branches of such a crossing on samples.
const SAMPLE_OFFSET: f64 = 0.381_966_011_250_105_1;

/// Cumulative time at equally spaced nodes of the angle variable.
#[derive(Debug, Clone)]
struct TimeTable {
    x0: f64,
    dx: f64,
    cum: Vec<f64>,
}

impl TimeTable {
    fn build(
        rate: impl Fn(f64) -> f64,
        x0: f64,
        x1: f64,
        panels: usize,
        opts: &QuadOptions,
    ) -> Result<Self, DynamicsError> {
        let dx = (x1 - x0) / panels as f64;
        let mut cum = Vec::with_capacity(panels + 1);
        cum.push(0.0);
        let mut total = 0.0;
        for j in 0..panels {
            let a = x0 + dx * j as f64;
            total += integrate(&rate, a, a + dx, opts)?.value;
            cum.push(total);
        }
        Ok(TimeTable { x0, dx, cum })
    }

    fn total(&self) -> f64 {
        *self.cum.last().expect("nonempty table")
    }

    /// Angle reached after time `t` in `[0, total]`.
    fn invert(&self, rate: impl Fn(f64) -> f64, t: f64) -> Result<f64, DynamicsError> {
        let panels = self.cum.len() - 1;
        let t = t.clamp(0.0, self.total());
        let j = self.cum.partition_point(|&c| c <= t).clamp(1, panels) - 1;
        let (mut lo, mut hi) = (self.x0 + self.dx * j as f64, self.x0 + self.dx * (j + 1) as f64);
        if j + 1 == panels && t >= self.total() {
            return Ok(hi);
        }
        let (t_lo, t_hi) = (self.cum[j], self.cum[j + 1]);
        let mut x = lo + (hi - lo) * (t - t_lo) / (t_hi - t_lo);
        // Time at x, integrated from the closer bracket end.
        let opts = QuadOptions {
            rel_tol: 1e-13,
            abs_tol: f64::EPSILON * self.total(),
            ..QuadOptions::default()
        };
        let mut t_x = t_lo + integrate(&rate, lo, x, &opts)?.value;
        let tol = 4.0 * f64::EPSILON * self.total();
        for _ in 0..60 {
            let r = t_x - t;
            if r.abs() <= tol {
                break;
            }
            if r > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let mut next = x - r / rate(x);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if next == x {
                break;
            }
            t_x += integrate(&rate, x, next, &opts)?.value;
            x = next;
        }
        Ok(x)
    }
}

/// The separated flows on one torus, with time inversion.
#[derive(Debug, Clone)]
pub struct TorusFlow {
    torus: TorusData,
    lambda: LambdaMotion,
    nu: NuMotion,
    lambda_table: TimeTable,
    nu_table: TimeTable,
}

impl TorusFlow {
    pub fn new(torus: &TorusData) -> Result<Self, DynamicsError> {
        Self::with_options(torus, &QuadOptions::default())
    }

    pub fn with_options(torus: &TorusData, opts: &QuadOptions) -> Result<Self, DynamicsError> {
        let lambda = LambdaMotion::new(&torus.params, torus.f_lambda)?;
        let nu = NuMotion::new(&torus.params, torus.f_lambda)?;
        let lambda_table = TimeTable::build(|th| lambda.dt_dtheta(th), 0.0, FRAC_PI_2, LAMBDA_PANELS, opts)?;
        let nu_table = TimeTable::build(|v| nu.dt_dnu(v), -PI, 0.0, NU_PANELS, opts)?;
        Ok(TorusFlow {
            torus: *torus,
            lambda,
            nu,
            lambda_table,
            nu_table,
        })
    }

    pub fn torus(&self) -> &TorusData {
        &self.torus
    }

    pub fn t_lambda(&self) -> f64 {
        4.0 * self.lambda_table.total()
    }

    pub fn t_nu(&self) -> f64 {
        2.0 * self.nu_table.total()
    }

    /// `(lambda, p_lambda)` after time `t`, starting at `lambda = 0` with `p_lambda > 0`.
    pub fn lambda_at(&self, t: f64) -> Result<(f64, f64), DynamicsError> {
        let quarter = self.lambda_table.total();
        let t = t.rem_euclid(4.0 * quarter);
        let q = ((t / quarter).floor() as usize).min(3);
        let r = t - quarter * q as f64;
        let rate = |th: f64| self.lambda.dt_dtheta(th);
        let theta = match q {
            0 => self.lambda_table.invert(rate, r)?,
            1 => PI - self.lambda_table.invert(rate, quarter - r)?,
            2 => PI + self.lambda_table.invert(rate, r)?,
            _ => 2.0 * PI - self.lambda_table.invert(rate, quarter - r)?,
        };
        Ok(self.lambda.state(theta))
    }

    /// `(nu, p_nu)` after time `t`, starting at `nu = -pi` with `p_nu > 0`.
    pub fn nu_at(&self, t: f64) -> Result<(f64, f64), DynamicsError> {
        let half = self.nu_table.total();
        let t = t.rem_euclid(2.0 * half);
        let rate = |v: f64| self.nu.dt_dnu(v);
        let nu = if t <= half {
            self.nu_table.invert(rate, t)?
        } else {
            -self.nu_table.invert(rate, 2.0 * half - t)?
        };
        Ok((nu, (2.0 * self.nu.half_p_sq(nu)).sqrt()))
    }

    /// State after the fraction `sigma` of the closed-orbit period, for a
    /// `nu`-flow started `phase` time units before the `lambda`-cycle.
    pub fn state_at(&self, sigma: f64, phase: f64) -> Result<EllipticState, DynamicsError> {
        let k = f64::from(self.torus.k);
        let l = f64::from(self.torus.l);
        let (lambda, p_lambda) = self.lambda_at(sigma * k * self.t_lambda())?;
        let (nu, p_nu) = self.nu_at(phase + sigma * l * self.t_nu())?;
        Ok(EllipticState {
            lambda,
            nu,
            p_lambda,
            p_nu,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CollisionSelector {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OrbitKind {
    Generic,
    Collision(CollisionSelector),
}

/// A traced closed orbit together with the flow that produced it.
#[derive(Debug, Clone)]
pub struct Orbit {
    pub torus: TorusData,
    pub phase: f64,
    pub kind: OrbitKind,
    pub curve: ClosedCurve,
    pub states: Vec<EllipticState>,
    flow: Arc<TorusFlow>,
    reflect: bool,
    /// Sample `i` sits at the period fraction `(i + offset) / N`.
    offset: f64,
    arc: Vec<Point>,
}

fn reflect_state(s: EllipticState) -> EllipticState {
    EllipticState {
        nu: -s.nu,
        p_nu: -s.p_nu,
        ..s
    }
}

impl Orbit {
    fn trace(
        flow: Arc<TorusFlow>,
        phase: f64,
        kind: OrbitKind,
        reflect: bool,
        samples_per_period: usize,
    ) -> Result<Self, DynamicsError> {
        if samples_per_period < 64 {
            return Err(DynamicsError::TooFewSamples(samples_per_period));
        }
        let torus = *flow.torus();
        let mut n = samples_per_period * torus.k.max(torus.l) as usize;
        n += n % 2;
        let state = |sigma: f64| -> Result<EllipticState, DynamicsError> {
            let s = flow.state_at(sigma, phase)?;
            Ok(if reflect { reflect_state(s) } else { s })
        };
        let offset = match kind {
            OrbitKind::Generic => SAMPLE_OFFSET,
            OrbitKind::Collision(_) => 0.0,
        };
        let mut states = Vec::with_capacity(n);
        for i in 0..n {
            states.push(state((i as f64 + offset) / n as f64)?);
        }
        let points: Vec<Point> = states.iter().map(|s| s.position()).collect();
        let (markers, arc) = match kind {
            OrbitKind::Generic => (Vec::new(), Vec::new()),
            OrbitKind::Collision(_) => {
                // Shifted resampling between the two collisions.
                let mut arc = vec![points[0]];
                for i in 0..n / 2 {
                    arc.push(state((i as f64 + SAMPLE_OFFSET) / n as f64)?.position());
                }
                arc.push(points[n / 2]);
                (vec![0, n / 2], arc)
            }
        };
        let curve = ClosedCurve::with_markers(points, markers)
            .map_err(|e| DynamicsError::Boundary(format!("degenerate trace: {e}")))?;
        Ok(Orbit {
            torus,
            phase,
            kind,
            curve,
            states,
            flow,
            reflect,
            offset,
            arc,
        })
    }

    /// State at fraction `sigma` of the period.
    pub fn state_at(&self, sigma: f64) -> Result<EllipticState, DynamicsError> {
        let s = self.flow.state_at(sigma, self.phase)?;
        Ok(if self.reflect { reflect_state(s) } else { s })
    }

    pub fn flow(&self) -> &TorusFlow {
        &self.flow
    }

    /// Distance in the plane between the states at the start and after one full period.
    pub fn closure_error(&self) -> Result<f64, DynamicsError> {
        let n = self.curve.len() as f64;
        let end = self.state_at(1.0 + self.offset / n)?.position();
        Ok((end - self.curve.points()[0]).norm())
    }

    pub fn max_energy_residual(&self) -> f64 {
        self.states
            .iter()
            .map(|s| s.regularized_energy(&self.torus.params).abs())
            .fold(0.0, f64::max)
    }

    /// Open polyline from the first collision to the second. Its interior
    /// samples are shifted against the curve samples like a generic orbit.
    pub fn collision_arc(&self) -> Option<&[Point]> {
        match self.kind {
            OrbitKind::Generic => None,
            OrbitKind::Collision(_) => Some(&self.arc),
        }
    }
}

impl CurveSource for Orbit {
    fn point_at(&self, s: f64) -> Point {
        let n = self.curve.len() as f64;
        match self.state_at((s.rem_euclid(n) + self.offset) / n) {
            Ok(state) => state.position(),
            Err(_) => Point::new(f64::NAN, f64::NAN),
        }
    }
}

/// Traces the closed orbit whose `nu`-flow is offset by `phase` (in
/// regularized time) from leaving `nu = -pi` when `lambda` crosses zero
/// upwards. Phases on the lattice `(T_nu / 2k) Z` collide with a primary and
/// are rejected.
pub fn trace_orbit(torus: &TorusData, phase: f64, samples_per_period: usize) -> Result<Orbit, DynamicsError> {
    let flow = Arc::new(TorusFlow::new(torus)?);
    trace_orbit_on(flow, phase, samples_per_period)
}

/// [`trace_orbit`] reusing precomputed time tables.
pub fn trace_orbit_on(flow: Arc<TorusFlow>, phase: f64, samples_per_period: usize) -> Result<Orbit, DynamicsError> {
    let spacing = flow.t_nu() / (2.0 * f64::from(flow.torus().k));
    let offset = phase.rem_euclid(spacing);
    if offset.min(spacing - offset) < COLLISION_TOL * flow.t_nu() {
        return Err(DynamicsError::CollisionOnTrace {
            primary: collision_primary(&flow, phase)?,
            phase,
        });
    }
    let orbit = Orbit::trace(flow, phase, OrbitKind::Generic, false, samples_per_period)?;
    for p in orbit.curve.points() {
        for (name, q) in [('E', PRIMARY_E), ('M', PRIMARY_M)] {
            if (p - q).norm() < COLLISION_TOL {
                return Err(DynamicsError::CollisionOnTrace { primary: name, phase });
            }
        }
    }
    Ok(orbit)
}

fn collision_primary(flow: &TorusFlow, phase: f64) -> Result<char, DynamicsError> {
    let k = f64::from(flow.torus().k);
    let spacing = flow.t_nu() / (2.0 * k);
    let m = (phase / spacing).round();
    // lambda = 0 at sigma = j / 2k; pick the j that lands on the collision.
    let (nu, _) = flow.nu_at(m * spacing)?;
    Ok(if nu.cos() < 0.0 { 'E' } else { 'M' })
}

/// One of the two collision-collision orbits of the torus.
///
/// `First` starts with a collision at `E`. For odd `l` it runs from `E` to
/// `M` and `Second` is its mirror image in the `q1`-axis; for even `l` both
/// collisions of `First` happen at `E` and `Second` is the orbit colliding
/// twice with `M`. The collisions are marked at samples `0` and `N/2`.
pub fn collision_orbit(
    torus: &TorusData,
    which: CollisionSelector,
    samples_per_period: usize,
) -> Result<Orbit, DynamicsError> {
    let flow = Arc::new(TorusFlow::new(torus)?);
    collision_orbit_on(flow, which, samples_per_period)
}

pub fn collision_orbit_on(
    flow: Arc<TorusFlow>,
    which: CollisionSelector,
    samples_per_period: usize,
) -> Result<Orbit, DynamicsError> {
    let l_even = flow.torus().l.is_multiple_of(2);
    let (phase, reflect) = match (which, l_even) {
        (CollisionSelector::First, _) => (0.0, false),
        (CollisionSelector::Second, true) => (0.5 * flow.t_nu(), false),
        (CollisionSelector::Second, false) => (0.0, true),
    };
    Orbit::trace(flow, phase, OrbitKind::Collision(which), reflect, samples_per_period)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{elliptic_to_cartesian, find_torus, EulerParams};

    #[test]
    fn elliptic_corners() {
        assert!((elliptic_to_cartesian(0.0, PI) - PRIMARY_E).norm() < 1e-15);
        assert!((elliptic_to_cartesian(0.0, 0.0) - PRIMARY_M).norm() < 1e-15);
        let p = elliptic_to_cartesian(0.7, FRAC_PI_2);
        assert!(p.re.abs() < 1e-15 && (p.im - 0.7f64.sinh()).abs() < 1e-15);
    }

    #[test]
    fn flow_tables_reproduce_periods() {
        let p = EulerParams::new(0.5, -0.5).unwrap();
        let torus = find_torus(&p, 3, 2).unwrap();
        let flow = TorusFlow::new(&torus).unwrap();
        assert!((flow.t_lambda() / torus.t_lambda - 1.0).abs() < 1e-12);
        assert!((flow.t_nu() / torus.t_nu - 1.0).abs() < 1e-12);
        let (l, pl) = flow.lambda_at(0.25 * flow.t_lambda()).unwrap();
        assert!((l - torus.lambda_max).abs() < 1e-12 && pl.abs() < 1e-6);
        let (nu, _) = flow.nu_at(0.5 * flow.t_nu()).unwrap();
        assert!(nu.abs() < 1e-12);
    }

    #[test]
    fn time_inversion_round_trip() {
        let p = EulerParams::new(0.3, -0.6).unwrap();
        let torus = find_torus(&p, 2, 3).unwrap();
        let flow = TorusFlow::new(&torus).unwrap();
        let opts = QuadOptions::default();
        for i in 1..20 {
            let t = flow.t_nu() * 0.5 * i as f64 / 20.0;
            let (nu, _) = flow.nu_at(t).unwrap();
            let back = integrate(|v| flow.nu.dt_dnu(v), -PI, nu, &opts).unwrap().value;
            assert!((back - t).abs() < 1e-12, "{back} vs {t}");
        }
    }

    #[test]
    fn collision_phase_is_rejected() {
        let p = EulerParams::new(0.5, -0.5).unwrap();
        let torus = find_torus(&p, 2, 1).unwrap();
        let err = trace_orbit(&torus, 0.0, 64).unwrap_err();
        assert!(matches!(err, DynamicsError::CollisionOnTrace { primary: 'E', .. }));
        assert!(matches!(
            trace_orbit(&torus, torus.generic_phase(), 10),
            Err(DynamicsError::TooFewSamples(10))
        ));
    }
}
