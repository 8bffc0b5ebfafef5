//! Euler's two-center problem in elliptic coordinates.
//!
//! The primaries sit at `E = (-1, 0)` (mass `1 - mu`) and `M = (1, 0)` (mass
//! `mu`). On the regularized zero level the Hamiltonian separates into
//!
//! ```text
//! F_lambda = p_lambda^2 / 2 - cosh(lambda) - c cosh^2(lambda) =  f
//! F_nu     = p_nu^2 / 2 + (1 - 2 mu) cos(nu) + c cos^2(nu)    = -f
//! ```
//!
//! and a Liouville torus of the lemniscate family is labelled by the
//! separation constant `f`. Both motions are periodic; the torus carries
//! closed orbits when `T_nu / T_lambda = k / l` is rational.

mod trace;

pub use trace::{
    collision_orbit, collision_orbit_on, trace_orbit, trace_orbit_on, CollisionSelector, Orbit, OrbitKind, TorusFlow,
};

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{bisect, integrate, NumericsError, QuadOptions};

/// Position of the primary `E` (mass `1 - mu`).
pub const PRIMARY_E: Complex64 = Complex64::new(-1.0, 0.0);
/// Position of the primary `M` (mass `mu`).
pub const PRIMARY_M: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DynamicsError {
    #[error("mass ratio mu = {0} must lie in (0, 1)")]
    InvalidMass(f64),
    #[error("energy c = {0} must be negative")]
    NonNegativeEnergy(f64),
    #[error("c below critical value c_J = {c_j} (got c = {c}); lemniscate motions need c > c_J")]
    BelowCritical { c: f64, c_j: f64 },
    #[error("k and l must be coprime positive integers (got k = {k}, l = {l})")]
    NotCoprime { k: u32, l: u32 },
    #[error("critical torus: {0}")]
    Boundary(String),
    #[error("no turning point: {0}")]
    NoTurningPoint(String),
    #[error("not a lemniscate torus: p_nu^2 vanishes at nu = {nu}")]
    NotLemniscate { nu: f64 },
    #[error("rotation number {k}/{l} is not attained on this energy slice (scanned range [{r_min}, {r_max}])")]
    RotationNumberUnattainable { k: u32, l: u32, r_min: f64, r_max: f64 },
    #[error("rotation number {target} only reached to within {residual:e}")]
    RotationNumberInaccurate { target: f64, residual: f64 },
    #[error("trace passes through a collision with {primary} (phase {phase})")]
    CollisionOnTrace { primary: char, phase: f64 },
    #[error("samples_per_period = {0} is below the minimum of 64")]
    TooFewSamples(usize),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Critical energy `c_J = -1/2 - sqrt(mu - mu^2)`; lemniscate and planetary
/// tori exist only above it.
pub fn critical_energy(mu: f64) -> Result<f64, DynamicsError> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(DynamicsError::InvalidMass(mu));
    }
    Ok(-0.5 - (mu - mu * mu).sqrt())
}

/// Mass ratio and energy of the Euler problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerParams {
    mu: f64,
    c: f64,
}

impl EulerParams {
    pub fn new(mu: f64, c: f64) -> Result<Self, DynamicsError> {
        critical_energy(mu)?;
        if !(c < 0.0) {
            return Err(DynamicsError::NonNegativeEnergy(c));
        }
        Ok(EulerParams { mu, c })
    }

    /// Energy at the midpoint of `(c_J, 0)`.
    pub fn with_midpoint_energy(mu: f64) -> Result<Self, DynamicsError> {
        let c_j = critical_energy(mu)?;
        EulerParams::new(mu, 0.5 * c_j)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn critical_energy(&self) -> f64 {
        -0.5 - (self.mu - self.mu * self.mu).sqrt()
    }

    /// Coefficient `1 - 2 mu` of `cos(nu)` in `F_nu`.
    fn asymmetry(&self) -> f64 {
        1.0 - 2.0 * self.mu
    }

    /// Minimum over `x in [-1, 1]` of `-(1 - 2mu) x - c x^2`; `nu` circulates
    /// exactly when `f` lies below it.
    fn nu_barrier(&self) -> f64 {
        let a = self.asymmetry();
        let b = -self.c;
        if a.abs() <= 2.0 * b {
            -a * a / (4.0 * b)
        } else {
            b - a.abs()
        }
    }

    /// Open interval of separation constants `f` that give lemniscate tori,
    /// or `None` when the slice has none (`c <= c_J`).
    pub fn lemniscate_interval(&self) -> Option<(f64, f64)> {
        let lo = -1.0 - self.c;
        let hi = self.nu_barrier();
        (lo < hi).then_some((lo, hi))
    }

    /// `cos(nu)` where `p_nu^2` is smallest, so where the `nu` motion is slowest.
    pub fn slowest_cos_nu(&self) -> f64 {
        let a = self.asymmetry();
        let b = -self.c;
        (a / (2.0 * b)).clamp(-1.0, 1.0)
    }
}

/// Point in phase space in elliptic coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipticState {
    pub lambda: f64,
    pub nu: f64,
    pub p_lambda: f64,
    pub p_nu: f64,
}

impl EllipticState {
    /// `q1 + i q2 = (cosh(lambda) cos(nu), sinh(lambda) sin(nu))`.
    pub fn position(&self) -> Complex64 {
        elliptic_to_cartesian(self.lambda, self.nu)
    }

    /// `F_lambda + F_nu`, zero on the regularized energy level.
    pub fn regularized_energy(&self, params: &EulerParams) -> f64 {
        let ch = self.lambda.cosh();
        let cn = self.nu.cos();
        let f_lambda = 0.5 * self.p_lambda * self.p_lambda - ch - params.c * ch * ch;
        let f_nu = 0.5 * self.p_nu * self.p_nu + params.asymmetry() * cn + params.c * cn * cn;
        f_lambda + f_nu
    }
}

pub fn elliptic_to_cartesian(lambda: f64, nu: f64) -> Complex64 {
    Complex64::new(lambda.cosh() * nu.cos(), lambda.sinh() * nu.sin())
}

/// Orbit families of the Euler problem at negative energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionLabel {
    /// Planetary: `lambda` in an annulus, `nu` circulates.
    P,
    /// Lemniscate: `lambda` oscillates through zero, `nu` circulates.
    L,
    /// Satellite motion near either primary.
    S,
    /// Satellite motion near one primary only.
    Sprime,
    NoMotion,
}

/// Default tolerance for deciding that a defining inequality is an equality.
pub const BOUNDARY_TOL: f64 = 1e-14;

/// Classifies the torus with separation constant `f_lambda`.
pub fn classify_region(params: &EulerParams, f_lambda: f64) -> Result<RegionLabel, DynamicsError> {
    classify_region_with(params, f_lambda, BOUNDARY_TOL)
}

pub fn classify_region_with(params: &EulerParams, f_lambda: f64, tol: f64) -> Result<RegionLabel, DynamicsError> {
    #[derive(PartialEq)]
    enum LambdaRange {
        Empty,
        ThroughZero,
        Annulus,
    }
    #[derive(PartialEq)]
    enum NuRange {
        Empty,
        Circulates,
        BothLobes,
        OneLobe,
    }

    let b = -params.c;
    let a = params.asymmetry();
    let f = f_lambda;

    // f + C + c C^2 >= 0 on C = cosh(lambda) >= 1.
    let disc = 1.0 + 4.0 * b * f;
    let lambda_range = if disc.abs() <= tol {
        return Err(DynamicsError::Boundary(format!(
            "lambda-polynomial has a double root (f = {f})"
        )));
    } else if disc < 0.0 {
        LambdaRange::Empty
    } else {
        let at_zero = f + 1.0 + params.c;
        let r_hi = (1.0 + disc.sqrt()) / (2.0 * b);
        if at_zero.abs() <= tol {
            return Err(DynamicsError::Boundary(format!(
                "p_lambda vanishes at lambda = 0 (f = {f})"
            )));
        } else if at_zero > 0.0 {
            LambdaRange::ThroughZero
        } else if r_hi < 1.0 {
            LambdaRange::Empty
        } else {
            LambdaRange::Annulus
        }
    };

    // -f - a x + b x^2 >= 0 on x = cos(nu) in [-1, 1].
    let barrier = params.nu_barrier();
    let nu_range = if (f - barrier).abs() <= tol {
        return Err(DynamicsError::Boundary(format!("p_nu vanishes tangentially (f = {f})")));
    } else if f < barrier {
        NuRange::Circulates
    } else {
        let near_m = -f - a + b;
        let near_e = -f + a + b;
        if near_m.abs() <= tol || near_e.abs() <= tol {
            return Err(DynamicsError::Boundary(format!(
                "nu-motion touches a primary axis (f = {f})"
            )));
        }
        match (near_m > 0.0, near_e > 0.0) {
            (true, true) => NuRange::BothLobes,
            (false, false) => NuRange::Empty,
            _ => NuRange::OneLobe,
        }
    };

    Ok(match (lambda_range, nu_range) {
        (LambdaRange::Empty, _) | (_, NuRange::Empty) => RegionLabel::NoMotion,
        (LambdaRange::ThroughZero, NuRange::Circulates) => RegionLabel::L,
        (LambdaRange::Annulus, NuRange::Circulates) => RegionLabel::P,
        (_, NuRange::BothLobes) => RegionLabel::S,
        (_, NuRange::OneLobe) => RegionLabel::Sprime,
    })
}

/// Unique `lambda_max > 0` where `p_lambda` vanishes, for tori whose
/// `lambda`-motion passes through `lambda = 0`.
pub fn lambda_turning_point(params: &EulerParams, f_lambda: f64) -> Result<f64, DynamicsError> {
    let b = -params.c;
    let disc = 1.0 + 4.0 * b * f_lambda;
    let at_zero = f_lambda + 1.0 + params.c;
    if disc < -BOUNDARY_TOL {
        return Err(DynamicsError::NoTurningPoint(format!(
            "f + cosh(lambda) + c cosh^2(lambda) has no real root (f = {f_lambda})"
        )));
    }
    if at_zero <= BOUNDARY_TOL || disc <= 0.0 {
        return Err(DynamicsError::NoTurningPoint(format!(
            "degenerate torus: p_lambda^2 <= 0 at lambda = 0 (f = {f_lambda})"
        )));
    }
    let sq = disc.sqrt();
    // cosh(lambda_max) - 1, from the factorization q(1) = b (r_hi - 1)(1 - r_lo).
    let one_minus_lo = (2.0 * b - 1.0 + sq) / (2.0 * b);
    let eps = if one_minus_lo > 0.5 {
        at_zero / (b * one_minus_lo)
    } else {
        (1.0 + sq - 2.0 * b) / (2.0 * b)
    };
    Ok((eps + (eps * (2.0 + eps)).sqrt()).ln_1p())
}

/// `lambda`-motion between the turning points, parameterized by the angle
/// `theta` with `lambda = lambda_max sin(theta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct LambdaMotion {
    pub lambda_max: f64,
    cosh_max: f64,
    b: f64,
}

fn sinhc(u: f64) -> f64 {
    if u.abs() < 1e-6 {
        1.0 + u * u / 6.0
    } else {
        u.sinh() / u
    }
}

impl LambdaMotion {
    pub fn new(params: &EulerParams, f_lambda: f64) -> Result<Self, DynamicsError> {
        let lambda_max = lambda_turning_point(params, f_lambda)?;
        Ok(LambdaMotion {
            lambda_max,
            cosh_max: lambda_max.cosh(),
            b: -params.c,
        })
    }

    /// `dt/dtheta`, smooth, positive and `pi`-periodic and even in `theta`.
    ///
    /// With `g = (cosh l_max - cosh l)(b (cosh l + cosh l_max) - 1)` the
    /// turning-point zero of `g` cancels against `cos(theta)` analytically.
    pub fn dt_dtheta(&self, theta: f64) -> f64 {
        let mut th = theta.rem_euclid(PI);
        if th > FRAC_PI_2 {
            th = PI - th;
        }
        let s = th.sin();
        let one_minus_s = 2.0 * (FRAC_PI_4 - 0.5 * th).sin().powi(2);
        let lam = self.lambda_max * s;
        let u = 0.5 * self.lambda_max * one_minus_s;
        let sigma = 0.5 * (self.lambda_max + lam);
        let d = self.b * (lam.cosh() + self.cosh_max) - 1.0;
        (self.lambda_max * (1.0 + s) / (2.0 * sigma.sinh() * sinhc(u) * d)).sqrt()
    }

    pub fn quarter_period(&self, opts: &QuadOptions) -> Result<f64, DynamicsError> {
        Ok(integrate(|th| self.dt_dtheta(th), 0.0, FRAC_PI_2, opts)?.value)
    }

    /// `(lambda, p_lambda)` at angle `theta`.
    pub fn state(&self, theta: f64) -> (f64, f64) {
        let (s, c) = theta.sin_cos();
        (self.lambda_max * s, self.lambda_max * c / self.dt_dtheta(theta))
    }
}

/// Circulating `nu`-motion; `dt/dnu = 1 / sqrt(2 G(nu))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct NuMotion {
    f: f64,
    a: f64,
    b: f64,
}

impl NuMotion {
    pub fn new(params: &EulerParams, f_lambda: f64) -> Result<Self, DynamicsError> {
        let motion = NuMotion {
            f: f_lambda,
            a: params.asymmetry(),
            b: -params.c,
        };
        let x = params.slowest_cos_nu();
        if motion.g_of_cos(x) <= 0.0 {
            return Err(DynamicsError::NotLemniscate { nu: x.acos() });
        }
        Ok(motion)
    }

    fn g_of_cos(&self, x: f64) -> f64 {
        -self.f - self.a * x + self.b * x * x
    }

    /// `p_nu^2 / 2` at `nu`.
    pub fn half_p_sq(&self, nu: f64) -> f64 {
        let x = self.a / (2.0 * self.b);
        if x.abs() >= 1.0 {
            return self.g_of_cos(nu.cos());
        }
        // Completed square around the minimum; near the lemniscate edge the
        // expanded polynomial loses all digits to cancellation.
        let knee = x.acos();
        let dcos = -2.0 * (0.5 * (nu + knee)).sin() * (0.5 * (nu - knee)).sin();
        let floor = -self.f - self.a * self.a / (4.0 * self.b);
        floor + self.b * dcos * dcos
    }

    pub fn dt_dnu(&self, nu: f64) -> f64 {
        1.0 / (2.0 * self.half_p_sq(nu)).sqrt()
    }

    pub fn slowest_nu(&self) -> f64 {
        (self.a / (2.0 * self.b)).clamp(-1.0, 1.0).acos()
    }

    /// Time to go from `nu = 0` to `nu = pi` (half of `T_nu`).
    pub fn half_period(&self, opts: &QuadOptions) -> Result<f64, DynamicsError> {
        let knee = self.slowest_nu();
        let f = |nu: f64| self.dt_dnu(nu);
        Ok(integrate(f, 0.0, knee, opts)?.value + integrate(f, knee, PI, opts)?.value)
    }
}

/// Minimal period of the `lambda`-motion in regularized time.
pub fn period_lambda(params: &EulerParams, f_lambda: f64) -> Result<f64, DynamicsError> {
    period_lambda_with(params, f_lambda, &QuadOptions::default())
}

pub fn period_lambda_with(params: &EulerParams, f_lambda: f64, opts: &QuadOptions) -> Result<f64, DynamicsError> {
    Ok(4.0 * LambdaMotion::new(params, f_lambda)?.quarter_period(opts)?)
}

/// Minimal period of the circulating `nu`-motion in regularized time.
pub fn period_nu(params: &EulerParams, f_lambda: f64) -> Result<f64, DynamicsError> {
    period_nu_with(params, f_lambda, &QuadOptions::default())
}

pub fn period_nu_with(params: &EulerParams, f_lambda: f64, opts: &QuadOptions) -> Result<f64, DynamicsError> {
    Ok(2.0 * NuMotion::new(params, f_lambda)?.half_period(opts)?)
}

/// Value of `nu` in `[0, pi]` where the `nu`-motion is slowest.
pub fn nu_slowest_point(params: &EulerParams) -> f64 {
    params.slowest_cos_nu().acos()
}

/// Rotation number `T_nu / T_lambda`.
pub fn rotation_number(params: &EulerParams, f_lambda: f64, opts: &QuadOptions) -> Result<f64, DynamicsError> {
    Ok(period_nu_with(params, f_lambda, opts)? / period_lambda_with(params, f_lambda, opts)?)
}

pub fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Numerical tolerances of the torus search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusTolerances {
    pub quad: QuadOptions,
    /// Allowed `|R - k/l|`.
    pub rotation: f64,
    /// Number of bracketing seeds across the lemniscate interval.
    pub seeds: usize,
}

impl Default for TorusTolerances {
    fn default() -> Self {
        TorusTolerances {
            quad: QuadOptions::default(),
            rotation: 1e-10,
            seeds: 64,
        }
    }
}

/// A `T_{k,l}` Liouville torus of the lemniscate family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusData {
    pub k: u32,
    pub l: u32,
    pub f_lambda: f64,
    pub lambda_max: f64,
    pub t_lambda: f64,
    pub t_nu: f64,
    pub params: EulerParams,
}

impl TorusData {
    /// Assembles the torus for a known separation constant.
    pub fn from_separation(
        params: &EulerParams,
        k: u32,
        l: u32,
        f_lambda: f64,
        opts: &QuadOptions,
    ) -> Result<Self, DynamicsError> {
        check_coprime(k, l)?;
        Ok(TorusData {
            k,
            l,
            f_lambda,
            lambda_max: lambda_turning_point(params, f_lambda)?,
            t_lambda: period_lambda_with(params, f_lambda, opts)?,
            t_nu: period_nu_with(params, f_lambda, opts)?,
            params: *params,
        })
    }

    pub fn rotation_number(&self) -> f64 {
        self.t_nu / self.t_lambda
    }

    /// Period of the closed orbits, `k T_lambda = l T_nu`.
    pub fn period(&self) -> f64 {
        f64::from(self.k) * self.t_lambda
    }

    /// Phase offset halfway between consecutive collision phases.
    pub fn generic_phase(&self) -> f64 {
        self.t_nu / (4.0 * f64::from(self.k))
    }

    /// Spacing of the phases whose orbit runs into a primary.
    pub fn collision_phase_spacing(&self) -> f64 {
        self.t_nu / (2.0 * f64::from(self.k))
    }
}

pub fn check_coprime(k: u32, l: u32) -> Result<(), DynamicsError> {
    if k == 0 || l == 0 || gcd(k, l) != 1 {
        return Err(DynamicsError::NotCoprime { k, l });
    }
    Ok(())
}

/// Finds the lemniscate `T_{k,l}` torus on the energy slice `params`.
pub fn find_torus(params: &EulerParams, k: u32, l: u32) -> Result<TorusData, DynamicsError> {
    find_torus_with(params, k, l, &TorusTolerances::default())
}

pub fn find_torus_with(
    params: &EulerParams,
    k: u32,
    l: u32,
    tol: &TorusTolerances,
) -> Result<TorusData, DynamicsError> {
    check_coprime(k, l)?;
    let c_j = params.critical_energy();
    let (lo, hi) = match params.lemniscate_interval() {
        Some(range) => range,
        None => return Err(DynamicsError::BelowCritical { c: params.c, c_j }),
    };
    let target = f64::from(k) / f64::from(l);
    let residual = |f: f64| -> Result<f64, DynamicsError> { Ok(rotation_number(params, f, &tol.quad)? - target) };

    // R(f) is continuous on the slice but not known to be monotone: scan
    // seeds that crowd towards both ends, where R runs off to 0 and infinity.
    let n = tol.seeds.max(2);
    let spread = 28.0;
    let width = hi - lo;
    let mut seeds: Vec<(f64, f64)> = Vec::with_capacity(n);
    for i in 0..n {
        let u = -spread + 2.0 * spread * i as f64 / (n - 1) as f64;
        // Offsets from the nearer end keep full relative precision there.
        let f = if u < 0.0 {
            lo + width / (1.0 + (-u).exp())
        } else {
            hi - width / (1.0 + u.exp())
        };
        if f <= lo || f >= hi {
            continue;
        }
        match residual(f) {
            Ok(r) => seeds.push((f, r)),
            Err(DynamicsError::Numerics(_)) | Err(DynamicsError::NoTurningPoint(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    let bracket = seeds
        .windows(2)
        .find(|w| w[0].1 == 0.0 || w[0].1.signum() != w[1].1.signum());
    let Some(bracket) = bracket else {
        let r_min = seeds.iter().map(|s| s.1 + target).fold(f64::INFINITY, f64::min);
        let r_max = seeds.iter().map(|s| s.1 + target).fold(f64::NEG_INFINITY, f64::max);
        return Err(DynamicsError::RotationNumberUnattainable { k, l, r_min, r_max });
    };
    let (f_a, f_b) = (bracket[0].0, bracket[1].0);
    let f = bisect(residual, f_a, f_b, 0.0)?;
    let torus = TorusData::from_separation(params, k, l, f, &tol.quad)?;
    let miss = (torus.rotation_number() - target).abs();
    if miss > tol.rotation {
        return Err(DynamicsError::RotationNumberInaccurate { target, residual: miss });
    }
    Ok(torus)
}
