//! Quadrature and root bracketing used by the period and torus computations.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum NumericsError {
    #[error("quadrature did not reach tolerance {requested:e} (estimated error {achieved:e}) after {intervals} subintervals")]
    QuadratureFailure {
        requested: f64,
        achieved: f64,
        intervals: usize,
    },
    #[error("integrand is not finite at x = {0}")]
    NonFinite(f64),
    #[error("root is not bracketed: f({lo}) = {flo}, f({hi}) = {fhi}")]
    NotBracketed { lo: f64, hi: f64, flo: f64, fhi: f64 },
}

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            rel_tol: 1e-13,
            abs_tol: 0.0,
            max_intervals: 4000,
        }
    }
}

impl QuadOptions {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        QuadOptions {
            rel_tol,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

// Kronrod abscissae (positive half, descending) for the 7/15 point pair.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Panel, NumericsError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    if !fc.is_finite() {
        return Err(NumericsError::NonFinite(center));
    }
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let (x1, x2) = (center - dx, center + dx);
        let (f1, f2) = (f(x1), f(x2));
        if !f1.is_finite() {
            return Err(NumericsError::NonFinite(x1));
        }
        if !f2.is_finite() {
            return Err(NumericsError::NonFinite(x2));
        }
        kronrod += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kronrod * half;
    let raw = ((kronrod - gauss) * half).abs();
    // Raw Kronrod-Gauss difference, floored at rounding level.
    let error = raw.max(10.0 * f64::EPSILON * value.abs());
    Ok(Panel { a, b, value, error })
}

/// Globally adaptive Gauss-Kronrod (7/15) quadrature of `f` over `[a, b]`.
///
/// The panel with the largest error estimate is bisected until the summed
/// estimate drops below `max(abs_tol, rel_tol * |I|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<Integral, NumericsError> {
    if a == b {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
            intervals: 0,
        });
    }
    if a > b {
        let r = integrate(f, b, a, opts)?;
        return Ok(Integral { value: -r.value, ..r });
    }
    let mut panels = vec![gk15(&f, a, b)?];
    loop {
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let target = opts.abs_tol.max(opts.rel_tol * value.abs());
        if error <= target {
            return Ok(Integral {
                value,
                error,
                intervals: panels.len(),
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("at least one panel");
        let p = panels[worst];
        let mid = 0.5 * (p.a + p.b);
        if panels.len() >= opts.max_intervals || mid <= p.a || mid >= p.b {
            return Err(NumericsError::QuadratureFailure {
                requested: target,
                achieved: error,
                intervals: panels.len(),
            });
        }
        panels[worst] = gk15(&f, p.a, mid)?;
        panels.push(gk15(&f, mid, p.b)?);
    }
}

/// Bisection for a sign change of `f` on `[lo, hi]`.
///
/// Stops when the bracket is narrower than `xtol` or cannot be split further.
pub fn bisect<F: FnMut(f64) -> Result<f64, E>, E: From<NumericsError>>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    xtol: f64,
) -> Result<f64, E> {
    let mut flo = f(lo)?;
    let fhi = f(hi)?;
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(NumericsError::NotBracketed { lo, hi, flo, fhi }.into());
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= xtol || mid <= lo.min(hi) || mid >= lo.max(hi) {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| x.powi(6) - 3.0 * x, 0.0, 2.0, &QuadOptions::default()).unwrap();
        assert!((r.value - (128.0 / 7.0 - 6.0)).abs() < 1e-13);
        assert_eq!(r.intervals, 1);
    }

    #[test]
    fn adapts_to_a_sharp_peak() {
        let eps: f64 = 1e-4;
        let r = integrate(|x| 1.0 / (x * x + eps * eps), -1.0, 1.0, &QuadOptions::default()).unwrap();
        let exact = 2.0 / eps * (1.0 / eps).atan();
        assert!((r.value - exact).abs() / exact < 1e-12, "{} vs {}", r.value, exact);
    }

    #[test]
    fn smooth_periodic() {
        let r = integrate(|x| 1.0 / (2.0 + x.cos()), -PI, PI, &QuadOptions::default()).unwrap();
        let exact = 2.0 * PI / 3f64.sqrt();
        assert!((r.value - exact).abs() < 1e-13);
    }

    #[test]
    fn reports_failure_on_impossible_tolerance() {
        let opts = QuadOptions {
            rel_tol: 1e-30,
            abs_tol: 0.0,
            max_intervals: 50,
        };
        let err = integrate(|x| x.sqrt(), 0.0, 1.0, &opts).unwrap_err();
        assert!(matches!(err, NumericsError::QuadratureFailure { .. }));
    }

    #[test]
    fn bisect_finds_sqrt2() {
        let r: Result<f64, NumericsError> = bisect(|x| Ok(x * x - 2.0), 0.0, 2.0, 1e-15);
        assert!((r.unwrap() - 2f64.sqrt()).abs() < 1e-14);
        let e: Result<f64, NumericsError> = bisect(|x| Ok(x * x + 1.0), 0.0, 2.0, 1e-15);
        assert!(e.is_err());
    }
}
