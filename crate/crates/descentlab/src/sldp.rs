//! Sharp tail approximations for the joint descent law.
//!
//! For thresholds `x, y` in `(1/2, 1)` the joint upper-tail probability
//! `P(D_n/(n-1) >= x, D'_n/(n-1) >= y)` is approximated, up to a `1 + o(1)`
//! factor, by
//!
//! ```text
//! exp(-n (I(x) + I(y)) + phi_n(x, y)) / (2 pi n sigma_x t_x sigma_y t_y)
//! ```
//!
//! where `phi_n` carries the lattice corrections `{x_n} t_x + {y_n} t_y`
//! plus a coupling term `+ t_x t_y / 2`. The same formula with the same sign
//! covers the lower-lower quadrant; the two mixed quadrants flip the sign of
//! the coupling term. The coupling is the whole story of the dependence
//! between the two counts at this scale: marginally the tails multiply only
//! after a correction factor `exp(+-t_x t_y / 2)`.

use crate::chain::{self, JointPmf};
use crate::error::Error;
use crate::rate::{solve_tilt, TiltSolution};
use crate::Result;

/// Which corner of the joint law a tail statement refers to.
///
/// `Upper` means the coordinate exceeds its threshold (`D/(n-1) >= x`);
/// `Lower` means it falls below the complementary one (`D/(n-1) <= 1-x`).
/// The first word refers to the descent count, the second to the
/// inverse-descent count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrant {
    UpperUpper,
    LowerLower,
    LowerUpper,
    UpperLower,
}

impl Quadrant {
    /// Sign of the `t_x t_y / 2` coupling term: `+1` for the aligned
    /// quadrants, `-1` for the mixed ones.
    pub fn coupling_sign(self) -> f64 {
        match self {
            Quadrant::UpperUpper | Quadrant::LowerLower => 1.0,
            Quadrant::LowerUpper | Quadrant::UpperLower => -1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Quadrant::UpperUpper => "pp",
            Quadrant::LowerLower => "mm",
            Quadrant::LowerUpper => "mp",
            Quadrant::UpperLower => "pm",
        }
    }
}

/// One sharp tail approximation, carried in log space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SldpEstimate {
    pub n: u64,
    pub x: f64,
    /// Second threshold; absent for marginal estimates.
    pub y: Option<f64>,
    /// Quadrant; absent for marginal estimates.
    pub quadrant: Option<Quadrant>,
    pub log_estimate: f64,
    /// `exp(log_estimate)`, flushed to zero on underflow (see `underflow`).
    pub estimate: f64,
    /// The exponent correction (lattice shifts plus coupling for joint
    /// estimates, lattice shift alone for marginal ones).
    pub correction: f64,
    /// True when `exp(log_estimate)` underflowed double precision.
    pub underflow: bool,
}

fn check_threshold(v: f64) -> Result<()> {
    if !v.is_finite() || v <= 0.5 || v >= 1.0 {
        return Err(Error::Domain(format!(
            "sharp tail threshold {v} outside (1/2, 1)"
        )));
    }
    Ok(())
}

/// Fractional lattice shift `{x_n} = n x - ceil((n-1) x)`; always in `[x-1, x]`.
pub fn frac_shift(x: f64, n: u64) -> f64 {
    assert!(x > 0.0 && x < 1.0, "frac_shift needs x in (0,1)");
    assert!(n >= 1);
    n as f64 * x - ((n - 1) as f64 * x).ceil()
}

/// Exponent correction for quadrant `q`:
/// `{x_n} t_x + {y_n} t_y +- t_x t_y / 2`.
pub fn correction(x: f64, y: f64, n: u64, q: Quadrant) -> Result<f64> {
    check_threshold(x)?;
    check_threshold(y)?;
    let tx = solve_tilt(x)?.t;
    let ty = solve_tilt(y)?.t;
    Ok(frac_shift(x, n) * tx + frac_shift(y, n) * ty + q.coupling_sign() * 0.5 * tx * ty)
}

fn assemble(n: u64, log_estimate: f64, x: f64, y: Option<f64>, q: Option<Quadrant>, corr: f64) -> SldpEstimate {
    let estimate = log_estimate.exp();
    SldpEstimate {
        n,
        x,
        y,
        quadrant: q,
        log_estimate,
        estimate,
        correction: corr,
        underflow: estimate == 0.0 && log_estimate.is_finite(),
    }
}

/// Sharp approximation of the joint quadrant tail at size `n >= 2`.
pub fn sldp_joint(n: u64, x: f64, y: f64, q: Quadrant) -> Result<SldpEstimate> {
    if n < 2 {
        return Err(Error::Domain(format!("joint tail needs n >= 2, got {n}")));
    }
    check_threshold(x)?;
    check_threshold(y)?;
    let sx = solve_tilt(x)?;
    let sy = solve_tilt(y)?;
    let corr = frac_shift(x, n) * sx.t + frac_shift(y, n) * sy.t
        + q.coupling_sign() * 0.5 * sx.t * sy.t;
    let nf = n as f64;
    let prefactor =
        (2.0 * std::f64::consts::PI * nf * sx.sigma2.sqrt() * sx.t * sy.sigma2.sqrt() * sy.t).ln();
    let log_estimate = -nf * (sx.rate + sy.rate) + corr - prefactor;
    Ok(assemble(n, log_estimate, x, Some(y), Some(q), corr))
}

/// Sharp approximation of the marginal tail `P(D_n/(n-1) >= x)`.
pub fn sldp_marginal(n: u64, x: f64) -> Result<SldpEstimate> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "marginal tail needs n >= 2, got {n}"
        )));
    }
    check_threshold(x)?;
    let sx = solve_tilt(x)?;
    let corr = frac_shift(x, n) * sx.t;
    let nf = n as f64;
    let prefactor = (sx.sigma2.sqrt() * sx.t * (2.0 * std::f64::consts::PI * nf).sqrt()).ln();
    let log_estimate = -nf * sx.rate + corr - prefactor;
    Ok(assemble(n, log_estimate, x, None, None, corr))
}

/// Asymptotic ratio of the joint tail to the product of its marginals:
/// `exp(+t_x t_y / 2)` on aligned quadrants, `exp(-t_x t_y / 2)` on mixed
/// ones.
pub fn dependence_factor(x: f64, y: f64, q: Quadrant) -> Result<f64> {
    check_threshold(x)?;
    check_threshold(y)?;
    let tx = solve_tilt(x)?.t;
    let ty = solve_tilt(y)?.t;
    Ok((q.coupling_sign() * 0.5 * tx * ty).exp())
}

/// One row of an exact-versus-approximation comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub n: u64,
    pub exact: f64,
    pub sldp: f64,
    pub ratio: f64,
}

/// Tabulates exact quadrant tails against the sharp approximation.
///
/// `pmf_provider` supplies the exact law at each requested size (letting the
/// caller cache or reuse dynamic programs). `ratio` is `exact / sldp`,
/// computed in log space.
pub fn convergence_table<F>(
    ns: &[u64],
    x: f64,
    y: f64,
    q: Quadrant,
    mut pmf_provider: F,
) -> Result<Vec<ComparisonRow>>
where
    F: FnMut(u64) -> Result<JointPmf>,
{
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let pmf = pmf_provider(n)?;
        let exact = chain::quadrant_tail(&pmf, x, y, q)?;
        let est = sldp_joint(n, x, y, q)?;
        let ratio = (exact.ln() - est.log_estimate).exp();
        rows.push(ComparisonRow {
            n,
            exact,
            sldp: est.estimate,
            ratio,
        });
    }
    Ok(rows)
}

/// Re-exported tilt data for callers assembling their own formulas.
pub fn tilt(x: f64) -> Result<TiltSolution> {
    solve_tilt(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::exact_joint_pmf;
    use crate::rate::joint_rate;

    #[test]
    fn frac_shift_examples() {
        assert_eq!(frac_shift(0.75, 9), 0.75);
        assert_eq!(frac_shift(0.7, 10), 0.0);
        for (x, n) in [(0.6, 7), (0.81, 13), (0.55, 100), (0.99, 3)] {
            let s = frac_shift(x, n);
            assert!(s >= x - 1.0 - 1e-12 && s <= x + 1e-12, "x={x} n={n}");
        }
    }

    #[test]
    fn correction_identities() {
        let (x, y, n) = (0.7, 0.8, 25);
        let pp = correction(x, y, n, Quadrant::UpperUpper).unwrap();
        let mm = correction(x, y, n, Quadrant::LowerLower).unwrap();
        let mp = correction(x, y, n, Quadrant::LowerUpper).unwrap();
        let pm = correction(x, y, n, Quadrant::UpperLower).unwrap();
        assert_eq!(pp, mm);
        assert_eq!(mp, pm);
        let tx = solve_tilt(x).unwrap().t;
        let ty = solve_tilt(y).unwrap().t;
        assert!((pp - mp - tx * ty).abs() < 1e-12);
        // symmetry in the two coordinates when x = y
        let a = correction(0.7, 0.7, n, Quadrant::UpperUpper).unwrap();
        let b = correction(0.7, 0.7, n, Quadrant::UpperUpper).unwrap();
        assert_eq!(a, b);
        assert!(correction(0.4, 0.7, n, Quadrant::UpperUpper).is_err());
    }

    #[test]
    fn joint_estimate_symmetries() {
        let a = sldp_joint(64, 0.7, 0.8, Quadrant::UpperUpper).unwrap();
        let b = sldp_joint(64, 0.8, 0.7, Quadrant::UpperUpper).unwrap();
        assert!((a.log_estimate - b.log_estimate).abs() < 1e-12);
        let mm = sldp_joint(64, 0.7, 0.8, Quadrant::LowerLower).unwrap();
        assert_eq!(a.log_estimate, mm.log_estimate);
        assert_eq!(a.estimate, mm.estimate);
    }

    #[test]
    fn joint_estimate_reassembles_from_parts() {
        let (n, x, y) = (128u64, 0.7, 0.65);
        for q in [
            Quadrant::UpperUpper,
            Quadrant::LowerLower,
            Quadrant::LowerUpper,
            Quadrant::UpperLower,
        ] {
            let est = sldp_joint(n, x, y, q).unwrap();
            let sx = solve_tilt(x).unwrap();
            let sy = solve_tilt(y).unwrap();
            let expected = -(n as f64) * joint_rate(x, y).unwrap()
                + correction(x, y, n, q).unwrap()
                - (2.0 * std::f64::consts::PI
                    * n as f64
                    * sx.sigma2.sqrt()
                    * sx.t
                    * sy.sigma2.sqrt()
                    * sy.t)
                    .ln();
            assert!((est.log_estimate - expected).abs() < 1e-12, "{q:?}");
            assert_eq!(est.estimate, est.log_estimate.exp());
        }
    }

    #[test]
    fn underflow_is_flagged() {
        let est = sldp_joint(10_000, 0.95, 0.95, Quadrant::UpperUpper).unwrap();
        assert_eq!(est.estimate, 0.0);
        assert!(est.underflow);
        assert!(est.log_estimate.is_finite());
    }

    #[test]
    fn dependence_factor_identities() {
        // near the center the tilts vanish and the factor tends to one
        let f = dependence_factor(0.5001, 0.5001, Quadrant::UpperUpper).unwrap();
        assert!((f - 1.0).abs() < 1e-4);
        let pp = dependence_factor(0.7, 0.8, Quadrant::UpperUpper).unwrap();
        let mp = dependence_factor(0.7, 0.8, Quadrant::LowerUpper).unwrap();
        assert!((pp * mp - 1.0).abs() < 1e-14);
        assert!(pp > 1.0 && mp < 1.0);
    }

    #[test]
    fn marginal_estimate_relates_to_joint() {
        // the joint estimate splits into marginal pieces up to the coupling
        // term and the Gaussian prefactor rearrangement
        let (n, x, y) = (256u64, 0.7, 0.75);
        let joint = sldp_joint(n, x, y, Quadrant::UpperUpper).unwrap();
        let mx = sldp_marginal(n, x).unwrap();
        let my = sldp_marginal(n, y).unwrap();
        let sx = solve_tilt(x).unwrap();
        let sy = solve_tilt(y).unwrap();
        let expected = mx.log_estimate + my.log_estimate + 0.5 * sx.t * sy.t;
        assert!((joint.log_estimate - expected).abs() < 1e-10);
    }

    #[test]
    fn exact_tail_ratio_improves_with_n() {
        let provider = |n: u64| exact_joint_pmf(n as usize);
        let rows =
            convergence_table(&[32, 256], 0.7, 0.7, Quadrant::UpperUpper, provider).unwrap();
        assert!(rows.iter().all(|r| r.ratio.is_finite() && r.ratio > 0.0));
        let e32 = (rows[0].ratio - 1.0).abs();
        let e256 = (rows[1].ratio - 1.0).abs();
        assert!(e256 < e32, "{e256} vs {e32}");
    }

    #[test]
    fn mixed_rows_coincide_when_thresholds_match() {
        let provider = |n: u64| exact_joint_pmf(n as usize);
        let mp = convergence_table(&[32, 64], 0.7, 0.7, Quadrant::LowerUpper, provider).unwrap();
        let pm = convergence_table(&[32, 64], 0.7, 0.7, Quadrant::UpperLower, provider).unwrap();
        for (a, b) in mp.iter().zip(&pm) {
            assert_eq!(a.exact, b.exact);
            assert_eq!(a.sldp, b.sldp);
        }
    }

    #[test]
    fn marginal_tail_ratio_at_moderate_size() {
        let pmf = exact_joint_pmf(512).unwrap();
        let exact = chain::marginal_upper_tail(&pmf, 0.7).unwrap();
        let est = sldp_marginal(512, 0.7).unwrap();
        let ratio = (exact.ln() - est.log_estimate).exp();
        assert!((ratio - 1.0).abs() < 0.1, "ratio {ratio}");
    }

    #[test]
    fn exact_marginal_reflection() {
        let pmf = exact_joint_pmf(64).unwrap();
        for x in [0.6, 0.75, 0.9] {
            let up = chain::marginal_upper_tail(&pmf, x).unwrap();
            let lo = chain::marginal_lower_tail(&pmf, x).unwrap();
            assert_eq!(up, lo, "x={x}");
        }
    }

    #[test]
    fn exact_quadrant_tail_monotone_in_thresholds() {
        let pmf = exact_joint_pmf(128).unwrap();
        let mut last = f64::INFINITY;
        for x in [0.55, 0.6, 0.65, 0.7, 0.75] {
            let t = chain::quadrant_tail(&pmf, x, 0.6, Quadrant::UpperUpper).unwrap();
            assert!(t <= last);
            last = t;
        }
    }
}
