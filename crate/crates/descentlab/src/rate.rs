//! Cumulant generating function, exponential tilt, and rate functions.
//!
//! Everything here revolves around `L(t) = log((e^t - 1) / t)`, the limiting
//! normalized cumulant generating function of the descent count. Its Legendre
//! transform `I(x) = sup_t { x t - L(t) }` governs the exponential decay of
//! tail probabilities; the supremum is attained at the tilt `t_x` solving
//! `L'(t_x) = x`, so that `I(x) = x t_x - L(t_x)` and the local variance is
//! `sigma_x^2 = L''(t_x)`.
//!
//! `L` and its derivatives are evaluated by closed forms away from zero, and
//! by even/odd Taylor series near zero where the closed forms cancel
//! catastrophically. The switchover points are chosen so both branches agree
//! to at least 1e-12 where they meet (see the boundary tests).

use crate::chain::JointPmf;
use crate::error::Error;
use crate::Result;

/// Series window for `L` (the closed form is safe outside it).
const CGF_SERIES_CUT: f64 = 1e-4;
/// Series window for `L'`; below this the closed form loses ~2eps/|t|.
const CGF_D1_SERIES_CUT: f64 = 0.02;
/// Series window for `L''`; the closed form subtracts two `1/t^2` terms.
const CGF_D2_SERIES_CUT: f64 = 0.25;

/// `L(t) = log((e^t - 1) / t)`, with `L(0) = 0` by continuity.
pub fn cgf(t: f64) -> f64 {
    if t.abs() < CGF_SERIES_CUT {
        // t/2 + t^2/24 - t^4/2880, truncation below 1e-16 in the window
        return t / 2.0 + t * t / 24.0 - t.powi(4) / 2880.0;
    }
    if t > 700.0 {
        // (e^t - 1)/t = e^t (1 - e^-t)/t without overflowing
        return t - t.ln() + (-(-t).exp()).ln_1p();
    }
    (t.exp_m1() / t).ln()
}

/// `L'(t) = 1 + 1/(e^t - 1) - 1/t`, with `L'(0) = 1/2`.
pub fn cgf_d1(t: f64) -> f64 {
    if t.abs() < CGF_D1_SERIES_CUT {
        let t2 = t * t;
        return 0.5
            + t * (1.0 / 12.0
                + t2 * (-1.0 / 720.0 + t2 * (1.0 / 30240.0 - t2 / 1_209_600.0)));
    }
    if t > 700.0 {
        return 1.0 - 1.0 / t;
    }
    1.0 + 1.0 / t.exp_m1() - 1.0 / t
}

/// `L''(t) = 1/t^2 - e^t/(e^t - 1)^2`, with `L''(0) = 1/12`. Even in `t`.
pub fn cgf_d2(t: f64) -> f64 {
    let a = t.abs();
    if a < CGF_D2_SERIES_CUT {
        let t2 = t * t;
        return 1.0 / 12.0
            + t2 * (-1.0 / 240.0
                + t2 * (1.0 / 6048.0 + t2 * (-1.0 / 172_800.0 + t2 / 5_322_240.0)));
    }
    // e^t/(e^t-1)^2 = u/(1-u)^2 with u = e^-|t|; stable for all magnitudes
    let u = (-a).exp();
    let ratio = 1.0 - u;
    1.0 / (a * a) - u / (ratio * ratio)
}

/// Legendre data at `x`: the tilt, the rate, and the tilted variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltSolution {
    pub x: f64,
    /// Unique solution of `L'(t) = x`; positive iff `x > 1/2`.
    pub t: f64,
    /// `I(x) = x t - L(t) >= 0`.
    pub rate: f64,
    /// `sigma_x^2 = L''(t) > 0`.
    pub sigma2: f64,
}

/// Solves `L'(t) = x` with the default tolerance `1e-12` (200 iterations).
pub fn solve_tilt(x: f64) -> Result<TiltSolution> {
    solve_tilt_with(x, 1e-12, 200)
}

/// Solves `L'(t) = x` to `|L'(t) - x| <= residual_tol`.
///
/// Newton iteration from the small-tilt guess `t0 = 12(x - 1/2)`, safeguarded
/// by a doubling bracket and bisection whenever a Newton step leaves it.
pub fn solve_tilt_with(x: f64, residual_tol: f64, max_iter: u32) -> Result<TiltSolution> {
    if !x.is_finite() || x <= 0.0 || x >= 1.0 {
        return Err(Error::Domain(format!("tilt needs x in (0,1), got {x}")));
    }
    if x == 0.5 {
        return Ok(TiltSolution {
            x,
            t: 0.0,
            rate: 0.0,
            sigma2: cgf_d2(0.0),
        });
    }
    let t0 = 12.0 * (x - 0.5);
    let mut width = 1.0;
    let (mut lo, mut hi) = (t0 - width, t0 + width);
    while cgf_d1(lo) > x {
        width *= 2.0;
        lo = t0 - width;
    }
    width = 1.0;
    while cgf_d1(hi) < x {
        width *= 2.0;
        hi = t0 + width;
    }

    let mut t = t0;
    let mut f = cgf_d1(t) - x;
    for _ in 0..max_iter {
        if f.abs() <= residual_tol {
            return Ok(TiltSolution {
                x,
                t,
                rate: x * t - cgf(t),
                sigma2: cgf_d2(t),
            });
        }
        if f > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let mut next = t - f / cgf_d2(t);
        if !next.is_finite() || next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        t = next;
        f = cgf_d1(t) - x;
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual: f.abs(),
    })
}

/// Rate function `I(x) = sup_t { x t - L(t) }`.
///
/// Finite on `(0,1)`; the endpoints 0 and 1 return `+inf` (the supremum
/// diverges there); anything else is a domain error.
pub fn rate(x: f64) -> Result<f64> {
    if x == 0.0 || x == 1.0 {
        return Ok(f64::INFINITY);
    }
    if !x.is_finite() || !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("rate needs x in [0,1], got {x}")));
    }
    Ok(solve_tilt(x)?.rate)
}

/// Joint rate `I(x, y) = I(x) + I(y)`: the two coordinates are independent
/// at the large-deviation level.
pub fn joint_rate(x: f64, y: f64) -> Result<f64> {
    for v in [x, y] {
        if !v.is_finite() || v <= 0.0 || v >= 1.0 {
            return Err(Error::Domain(format!(
                "joint rate needs coordinates in (0,1), got {v}"
            )));
        }
    }
    Ok(solve_tilt(x)?.rate + solve_tilt(y)?.rate)
}

/// Rate function of the sum: `J(y) = inf_x { I(x) + I(y - x) }`.
///
/// The infimum is over the open interval `(max(0, y-1), min(1, y))` where
/// both rates are finite; convexity makes the minimizer unique, and a
/// golden-section search narrows it to width `1e-10`.
pub fn sum_rate(y: f64) -> Result<f64> {
    sum_rate_with(y, 1e-10)
}

/// [`sum_rate`] with a configurable golden-section interval width.
pub fn sum_rate_with(y: f64, width_tol: f64) -> Result<f64> {
    if !y.is_finite() || y <= 0.0 || y >= 2.0 {
        return Err(Error::Domain(format!("sum rate needs y in (0,2), got {y}")));
    }
    let lo = (y - 1.0).max(0.0);
    let hi = y.min(1.0);
    let inset = 1e-9 * (hi - lo);
    let mut a = lo + inset;
    let mut b = hi - inset;
    let g = |x: f64| -> Result<f64> { Ok(solve_tilt(x)?.rate + solve_tilt(y - x)?.rate) };

    const INVPHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INVPHI * (b - a);
    let mut d = a + INVPHI * (b - a);
    let mut gc = g(c)?;
    let mut gd = g(d)?;
    while b - a > width_tol {
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - INVPHI * (b - a);
            gc = g(c)?;
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + INVPHI * (b - a);
            gd = g(d)?;
        }
    }
    g(0.5 * (a + b))
}

/// Residual of the finite-size cumulant generating function against its
/// limit: `| (1/n) log E[exp(t D_n + s D'_n)] - L(t) - L(s) |`.
pub fn limit_cgf_check(pmf: &JointPmf, t: f64, s: f64) -> f64 {
    let n = pmf.n() as f64;
    (pmf.log_mgf(t, s) / n - cgf(t) - cgf(s)).abs()
}
