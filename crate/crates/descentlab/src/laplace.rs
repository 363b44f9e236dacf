//! Closed forms for the bivariate Laplace transform of `(D_n, D'_n)`.
//!
//! Writing `m_n(t, s) = E[exp(t D_n + s D'_n)]`, the transform factors as
//!
//! ```text
//! m_n(t,s) = ((e^t-1)/t)^n ((e^s-1)/s)^n ((1-e^{-t})/t) ((1-e^{-s})/s) S_n(t,s)
//! S_n(t,s) = sum_{k=0}^{n-1} b_{n,k} (st)^k (1 + r_{n-k}(t)) (1 + r_{n-k}(s))
//! ```
//!
//! where `b_{n,k}` is the Stirling-number ratio `c(n, n-k) ((n-k)!/n!)^2`
//! (with `c` the unsigned Stirling numbers of the first kind) and
//!
//! ```text
//! r_m(z) = sum_{l != 0} (1 + 2 pi i l / z)^{-(m+1)}.
//! ```
//!
//! The ratios satisfy `b_{n,k} <= 1/k!` and converge to `1/(2^k k!)`, so the
//! sum behaves like `exp(st/2)` for large `n`. Everything is evaluated in
//! log space where magnitudes are exponential in `n`.

use num_complex::Complex64;

use crate::chain::{self, JointPmf};
use crate::error::Error;
use crate::rate::cgf;
use crate::Result;

/// Largest transform size (matching the dynamic-program limit).
pub const MAX_TRANSFORM: usize = 2048;
/// Arguments below this magnitude are routed to the one-variable axis
/// formula; crossing the axis changes the value by a relative `O(n |t|)`.
pub const AXIS_EPS: f64 = 1e-8;

/// Truncation control for the series in this module.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    pub rel_tol: f64,
    pub max_terms: u64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            rel_tol: 1e-12,
            max_terms: 1_000_000,
        }
    }
}

/// A transform value carried in log space alongside `exp` of it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformValue {
    pub log_value: f64,
    /// `exp(log_value)`; infinite when the log exceeds the double range.
    pub value: f64,
}

impl TransformValue {
    fn from_log(log_value: f64) -> Self {
        TransformValue {
            log_value,
            value: log_value.exp(),
        }
    }
}

/// Log-space table of the Stirling ratios `b_{n,k}`, `k = 0..n-1`.
#[derive(Debug, Clone)]
pub struct StirlingRatioTable {
    n: usize,
    logb: Vec<f64>,
}

impl StirlingRatioTable {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `log b_{n,k}`.
    pub fn log_ratio(&self, k: usize) -> f64 {
        self.logb[k]
    }

    /// `b_{n,k}`.
    pub fn ratio(&self, k: usize) -> f64 {
        self.logb[k].exp()
    }

    pub fn len(&self) -> usize {
        self.logb.len()
    }

    pub fn is_empty(&self) -> bool {
        self.logb.is_empty()
    }
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Runs the log-space ratio recurrence up to `n_max`, visiting each row.
///
/// The recurrence follows from `c(n+1, j) = n c(n, j) + c(n, j-1)`:
///
/// ```text
/// b_{n+1,k} = b_{n,k-1} n/(n+1)^2 + b_{n,k} ((n+1-k)/(n+1))^2
/// ```
///
/// with all coefficients positive, so rows stay in log space throughout.
pub fn stirling_ratio_scan(
    n_max: usize,
    mut visit: impl FnMut(usize, &[f64]),
) -> Result<()> {
    if n_max < 1 || n_max > MAX_TRANSFORM {
        return Err(Error::SizeLimit {
            what: "stirling_ratio_scan",
            limit: MAX_TRANSFORM as u64,
            got: n_max as u64,
        });
    }
    let mut row = vec![0.0f64];
    visit(1, &row);
    for n in 1..n_max {
        let nf = n as f64;
        let ln_np1 = (nf + 1.0).ln();
        let shift_coeff = nf.ln() - 2.0 * ln_np1;
        let mut next = vec![f64::NEG_INFINITY; n + 1];
        for (k, slot) in next.iter_mut().enumerate() {
            let from_shift = if k >= 1 {
                row[k - 1] + shift_coeff
            } else {
                f64::NEG_INFINITY
            };
            let from_keep = if k < n {
                row[k] + 2.0 * (((n + 1 - k) as f64).ln() - ln_np1)
            } else {
                f64::NEG_INFINITY
            };
            *slot = log_add_exp(from_shift, from_keep);
        }
        row = next;
        visit(n + 1, &row);
    }
    Ok(())
}

/// Stirling ratio table at size `n`, `1 <= n <= 2048`.
pub fn stirling_ratio_table(n: usize) -> Result<StirlingRatioTable> {
    let mut last: Vec<f64> = Vec::new();
    stirling_ratio_scan(n, |size, row| {
        if size == n {
            last = row.to_vec();
        }
    })?;
    Ok(StirlingRatioTable { n, logb: last })
}

/// `base^{-order}` with overflow guards (order >= 1).
fn inv_power(base: Complex64, order: u32) -> Complex64 {
    let log_mag = order as f64 * base.norm().ln();
    if log_mag > 708.0 {
        return Complex64::new(0.0, 0.0);
    }
    if log_mag < -708.0 {
        return Complex64::new(f64::INFINITY, f64::INFINITY);
    }
    base.powi(-(order as i32))
}

/// The correction series `r_n(z) = sum_{l != 0} (1 + 2 pi i l / z)^{-(n+1)}`.
///
/// Symmetric partial sums over `l = +-1, +-2, ...` are completed with the
/// Euler-Maclaurin tail (integral plus first derivative term), which brings
/// even the slowest case `n = 1` (terms decaying like `l^{-2}`) inside the
/// tolerance within a few hundred pairs. Summation stops when the bound
/// `(1/24) |g''|` on the remaining correction drops below
/// `rel_tol * |1 + sum|`.
///
/// Requires `Re(z) != 0`. Intended for `|Im(z)| <= pi`, where every term has
/// magnitude at most one; far outside that strip the defining series comes
/// close to its poles at `2 pi i Z`.
pub fn r_series(n: usize, z: Complex64, pol: &TruncationPolicy) -> Result<Complex64> {
    if n < 1 {
        return Err(Error::Domain("correction series needs n >= 1".into()));
    }
    if z.re == 0.0 {
        return Err(Error::Domain(
            "correction series needs Re(z) != 0".into(),
        ));
    }
    let w = Complex64::new(0.0, std::f64::consts::TAU) / z; // 2 pi i / z
    let order = (n + 1) as u32;
    let nf = n as f64;
    let one = Complex64::new(1.0, 0.0);

    let mut sum = Complex64::new(0.0, 0.0);
    let mut l = 1u64;
    loop {
        let x = l as f64;
        sum += inv_power(one + w * x, order) + inv_power(one - w * x, order);

        // Euler-Maclaurin completion from a = l + 1/2:
        //   sum_{j>l} g(j) = int_a^inf g + g'(a)/24 + O(g''')
        let a = x + 0.5;
        let gp = one + w * a;
        let gm = one - w * a;
        let integral = (inv_power(gp, n as u32) - inv_power(gm, n as u32)) / (nf * w);
        let deriv = (nf + 1.0) / 24.0 * w * (inv_power(gm, order + 1) - inv_power(gp, order + 1));
        let total = sum + integral + deriv;

        let err = (nf + 1.0) * (nf + 2.0) / 24.0
            * w.norm_sqr()
            * (inv_power(gp, order + 2).norm() + inv_power(gm, order + 2).norm());
        if err <= pol.rel_tol * (one + total).norm() {
            return Ok(total);
        }
        l += 1;
        if 2 * l > pol.max_terms {
            return Err(Error::TruncationLimit(pol.max_terms));
        }
    }
}

/// Compensated accumulator: running sum plus an exact error term.
/// The `S_n` terms alternate in sign when `s t < 0`, so the low word keeps
/// cancellation from eating the tolerance.
#[derive(Default)]
struct Accumulator {
    hi: f64,
    lo: f64,
}

impl Accumulator {
    fn add(&mut self, x: f64) {
        let s = self.hi + x;
        let b = s - self.hi;
        self.lo += (self.hi - (s - b)) + (x - b);
        self.hi = s;
    }

    fn value(&self) -> f64 {
        self.hi + self.lo
    }
}

fn guard_size(n: usize, what: &'static str) -> Result<()> {
    if n < 1 || n > MAX_TRANSFORM {
        return Err(Error::SizeLimit {
            what,
            limit: MAX_TRANSFORM as u64,
            got: n as u64,
        });
    }
    Ok(())
}

/// Closed form of `m_n(t, s)`, evaluated in log space.
///
/// Arguments with `|t|` or `|s|` below [`AXIS_EPS`] are routed to the
/// one-variable axis formula [`mn_axis`].
pub fn mn_closed(n: usize, t: f64, s: f64, pol: &TruncationPolicy) -> Result<TransformValue> {
    guard_size(n, "mn_closed")?;
    if t.abs() < AXIS_EPS && s.abs() < AXIS_EPS {
        return Ok(TransformValue::from_log(0.0));
    }
    if s.abs() < AXIS_EPS {
        return mn_axis(n, t, pol);
    }
    if t.abs() < AXIS_EPS {
        return mn_axis(n, s, pol);
    }

    let table = stirling_ratio_table(n)?;
    let corr_t: Vec<f64> = (1..=n)
        .map(|j| r_series(j, Complex64::new(t, 0.0), pol).map(|c| c.re))
        .collect::<Result<_>>()?;
    let corr_s: Vec<f64> = (1..=n)
        .map(|j| r_series(j, Complex64::new(s, 0.0), pol).map(|c| c.re))
        .collect::<Result<_>>()?;

    let st = s * t;
    let ln_abs_st = st.abs().ln();
    let mut acc = Accumulator::default();
    for k in 0..n {
        // |b_{n,k} (st)^k| in log space; the explicit power would overflow
        // long before the product does
        let magnitude = (table.log_ratio(k) + k as f64 * ln_abs_st).exp();
        let signed = if st < 0.0 && k % 2 == 1 {
            -magnitude
        } else {
            magnitude
        };
        let j = n - k;
        acc.add(signed * (1.0 + corr_t[j - 1]) * (1.0 + corr_s[j - 1]));
    }
    let series = acc.value();
    if !(series > 0.0) || !series.is_finite() {
        return Err(Error::Domain(format!(
            "transform series lost positivity at n={n}, t={t}, s={s} (value {series:e})"
        )));
    }
    let log_value = n as f64 * (cgf(t) + cgf(s)) + cgf(-t) + cgf(-s) + series.ln();
    Ok(TransformValue::from_log(log_value))
}

/// One-variable formula `m_n(t, 0) = m_n(0, t)`:
/// `((e^t-1)/t)^n ((1-e^{-t})/t) (1 + r_n(t))`.
pub fn mn_axis(n: usize, t: f64, pol: &TruncationPolicy) -> Result<TransformValue> {
    guard_size(n, "mn_axis")?;
    if t == 0.0 {
        return Err(Error::Domain("axis transform needs t != 0".into()));
    }
    let r = r_series(n, Complex64::new(t, 0.0), pol)?.re;
    let log_value = n as f64 * cgf(t) + cgf(-t) + (1.0 + r).ln();
    Ok(TransformValue::from_log(log_value))
}

/// `m_n(t, s)` summed directly from the exact law, in log-sum-exp form.
pub fn mn_exact(pmf: &JointPmf, t: f64, s: f64) -> TransformValue {
    TransformValue::from_log(pmf.log_mgf(t, s))
}

/// Checks the generating-function identity for `E[p^{D_n} q^{D'_n}]`:
///
/// ```text
/// E[p^D q^D'] = (1-p)^{n+1} (1-q)^{n+1} / (p q n!)
///               * sum_{k,l >= 1} C(k l + n - 1, n) p^k q^l
/// ```
///
/// (terms with `k l = 0` vanish since `C(n-1, n) = 0`). Returns the absolute
/// difference between the two sides, the left side coming from the exact
/// law.
///
/// Truncation: for fixed `k`, the ratio of consecutive `l`-terms is at most
/// `q exp(n/l)` because the binomial ratio is a product of `n` factors each
/// at most `1 + 1/l`; once that bound drops below one, the geometric tail
/// `term * rho / (1 - rho)` is compared against the tolerance. The outer
/// `k`-sum stops by the same bound with `p exp(n/k)`.
pub fn gf_check(n: usize, p: f64, q: f64, pol: &TruncationPolicy) -> Result<f64> {
    guard_size(n, "gf_check")?;
    for v in [p, q] {
        if !v.is_finite() || v <= 0.0 || v >= 1.0 {
            return Err(Error::Domain(format!(
                "generating-function check needs p, q in (0,1), got {v}"
            )));
        }
    }
    let pmf = chain::exact_joint_pmf(n)?;
    let lhs = pmf.log_mgf(p.ln(), q.ln()).exp();

    let nf = n as f64;
    let lg_n_fact = libm::lgamma(nf + 1.0);
    let (ln_p, ln_q) = (p.ln(), q.ln());
    let mut total = 0.0f64;
    let mut terms_used = 0u64;
    let mut k = 1u64;
    loop {
        // inner sum over l at fixed k
        let mut inner = 0.0f64;
        let mut l = 1u64;
        loop {
            let kl = (k * l) as f64;
            let log_binom = libm::lgamma(kl + nf) - libm::lgamma(kl) - lg_n_fact;
            let term = (log_binom + k as f64 * ln_p + l as f64 * ln_q).exp();
            inner += term;
            terms_used += 1;
            if terms_used > pol.max_terms {
                return Err(Error::TruncationLimit(pol.max_terms));
            }
            let rho = q * (nf / l as f64).exp();
            if rho < 1.0 && term * rho / (1.0 - rho) <= pol.rel_tol * (total + inner) {
                break;
            }
            l += 1;
        }
        total += inner;
        let rho = p * (nf / k as f64).exp();
        if rho < 1.0 && inner * rho / (1.0 - rho) <= pol.rel_tol * total {
            break;
        }
        k += 1;
    }
    let log_prefactor =
        (nf + 1.0) * ((-p).ln_1p() + (-q).ln_1p()) - ln_p - ln_q - lg_n_fact;
    let rhs = log_prefactor.exp() * total;
    Ok((lhs - rhs).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{eulerian_row, exact_joint_pmf};
    use num_bigint::BigUint;
    use num_traits::ToPrimitive;

    fn default_pol() -> TruncationPolicy {
        TruncationPolicy::default()
    }

    /// Exact unsigned Stirling numbers of the first kind, row `n`.
    fn stirling_first_kind_row(n: usize) -> Vec<BigUint> {
        // c(n+1, j) = n c(n, j) + c(n, j-1), c(1, 1) = 1
        let mut row = vec![BigUint::from(0u32), BigUint::from(1u32)]; // c(1, 0..=1)
        for m in 1..n {
            let mut next = vec![BigUint::from(0u32); m + 2];
            for j in 1..=m + 1 {
                let mut v = BigUint::from(0u32);
                if j <= m {
                    v += &row[j] * (m as u64);
                }
                v += &row[j - 1];
                next[j] = v;
            }
            row = next;
        }
        row
    }

    #[test]
    fn stirling_ratios_match_exact_numbers() {
        for n in [2usize, 5, 10, 20, 30] {
            let table = stirling_ratio_table(n).unwrap();
            let exact = stirling_first_kind_row(n);
            let fact: Vec<f64> = {
                let mut f = vec![1.0f64];
                for i in 1..=n {
                    f.push(f[i - 1] * i as f64);
                }
                f
            };
            for k in 0..n {
                let c = exact[n - k].to_f64().unwrap();
                let expected = c.ln() + 2.0 * (fact[n - k].ln() - fact[n].ln());
                assert!(
                    (table.log_ratio(k) - expected).abs() < 1e-12 * expected.abs().max(1.0),
                    "n={n} k={k}: {} vs {expected}",
                    table.log_ratio(k)
                );
            }
        }
    }

    #[test]
    fn stirling_ratio_endpoints() {
        for n in [1usize, 7, 100, 500] {
            let table = stirling_ratio_table(n).unwrap();
            assert_eq!(table.log_ratio(0), 0.0, "b_{{n,0}} = 1 at n={n}");
            if n >= 2 {
                let b1 = table.ratio(1);
                let expected = (n as f64 - 1.0) / (2.0 * n as f64);
                assert!((b1 - expected).abs() < 1e-13, "n={n}: {b1} vs {expected}");
            }
        }
    }

    #[test]
    fn stirling_ratios_obey_factorial_bound() {
        let mut ok = true;
        stirling_ratio_scan(200, |n, row| {
            let mut log_fact = 0.0;
            for (k, &lb) in row.iter().enumerate() {
                if k > 0 {
                    log_fact += (k as f64).ln();
                }
                if lb > -log_fact + 1e-12 {
                    eprintln!("bound fails at n={n} k={k}");
                    ok = false;
                }
            }
        })
        .unwrap();
        assert!(ok);
    }

    /// Closed forms for the lattice sums `S_m(z) = sum_{l in Z} (z + 2 pi i l)^{-m}`,
    /// derived from `S_1 = (1/2) coth(z/2)` by repeated differentiation.
    /// Gives `r_n(t) = t^{n+1} S_{n+1}(t) - 1` independently of the series.
    fn r_closed(n: usize, t: f64) -> f64 {
        let u = t / 2.0;
        let c = 1.0 / u.tanh();
        let s2 = 1.0 / u.sinh().powi(2);
        let sm = match n + 1 {
            2 => s2 / 4.0,
            3 => s2 * c / 8.0,
            4 => s2 * (2.0 * c * c + s2) / 48.0,
            5 => s2 * c * (c * c + 2.0 * s2) / 96.0,
            6 => s2 * (2.0 * c.powi(4) + 11.0 * s2 * c * c + 2.0 * s2 * s2) / 960.0,
            _ => unreachable!(),
        };
        t.powi(n as i32 + 1) * sm - 1.0
    }

    #[test]
    fn r_series_matches_closed_forms() {
        for n in 1..=5usize {
            for t in [0.5, 2.0, -1.5, 4.0] {
                let r = r_series(n, Complex64::new(t, 0.0), &default_pol()).unwrap();
                let expected = r_closed(n, t);
                assert!(
                    (r.re - expected).abs() < 1e-12 * expected.abs().max(1.0),
                    "n={n} t={t}: {} vs {expected}",
                    r.re
                );
                assert!(r.im.abs() < 1e-15 * r.re.abs().max(1.0));
            }
        }
    }

    #[test]
    fn r_series_matches_large_cutoff_sum() {
        // plain symmetric summation with cutoff 1e6, polar arithmetic
        fn brute(n: usize, t: f64) -> f64 {
            let b = std::f64::consts::TAU / t;
            let mut sum = 0.0;
            for l in 1..=1_000_000u64 {
                let x = b * l as f64;
                let mag = (1.0 + x * x).powf(-(n as f64 + 1.0) / 2.0);
                let angle = -(n as f64 + 1.0) * x.atan2(1.0);
                sum += 2.0 * mag * angle.cos();
            }
            sum
        }
        for n in 2..=6usize {
            let r = r_series(n, Complex64::new(2.0, 0.0), &default_pol())
                .unwrap()
                .re;
            let oracle = brute(n, 2.0);
            assert!((r - oracle).abs() < 1e-10, "n={n}: {r} vs {oracle}");
        }
    }

    #[test]
    fn r_series_bounded_on_strip() {
        for n in 1..=8usize {
            for t in [0.5, 2.0] {
                let mut v = -std::f64::consts::PI;
                while v <= std::f64::consts::PI {
                    let r = r_series(n, Complex64::new(t, v), &default_pol()).unwrap();
                    assert!(r.norm().is_finite());
                    assert!(r.norm() < 10.0, "n={n} t={t} v={v}: {}", r.norm());
                    v += std::f64::consts::PI / 8.0;
                }
            }
        }
    }

    #[test]
    fn r_series_decays_geometrically_in_n() {
        // the l = 1 pair dominates: |r_n(2)| <= C ((1+pi^2)^{-1/2})^{n+1}
        let rho = 1.0 / (1.0 + std::f64::consts::PI.powi(2)).sqrt();
        let first = r_series(1, Complex64::new(2.0, 0.0), &default_pol())
            .unwrap()
            .re
            .abs();
        for n in 1..=12usize {
            let r = r_series(n, Complex64::new(2.0, 0.0), &default_pol())
                .unwrap()
                .re
                .abs();
            let envelope = 3.2 * rho.powi(n as i32 + 1);
            assert!(r <= envelope, "n={n}: {r} above envelope {envelope}");
        }
        let last = r_series(12, Complex64::new(2.0, 0.0), &default_pol())
            .unwrap()
            .re
            .abs();
        assert!(last < 1e-3 * first);
    }

    #[test]
    fn r_series_rejects_imaginary_axis() {
        assert!(r_series(3, Complex64::new(0.0, 1.0), &default_pol()).is_err());
    }

    #[test]
    fn transform_normalization_and_degenerate_size() {
        let pol = default_pol();
        let v = mn_closed(5, 0.0, 0.0, &pol).unwrap();
        assert_eq!(v.value, 1.0);
        // D_1 = D'_1 = 0, so the transform is identically one
        for (t, s) in [(0.7, 0.3), (-2.0, 1.0), (3.0, -3.0)] {
            let v = mn_closed(1, t, s, &pol).unwrap();
            assert!((v.value - 1.0).abs() < 1e-12, "m_1({t},{s}) = {}", v.value);
        }
    }

    #[test]
    fn transform_small_case_closed_form() {
        // size 3: mass 1/6, 4/6, 1/6 on D + D' = 0, 2, 4
        let pol = default_pol();
        let v = mn_closed(3, 1.0, -0.5, &pol).unwrap();
        let expected = (1.0 + 4.0 * (0.5f64).exp() + 1.0f64.exp()) / 6.0;
        assert!(
            (v.value - expected).abs() < 1e-10 * expected,
            "{} vs {expected}",
            v.value
        );
    }

    #[test]
    fn axis_formula_small_case() {
        // D_2 uniform on {0,1}: m_2(t, 0) = (1 + e^t)/2
        let pol = default_pol();
        for t in [0.4, -1.0, 2.5] {
            let v = mn_axis(2, t, &pol).unwrap();
            let expected = (1.0 + t.exp()) / 2.0;
            assert!(
                (v.value - expected).abs() < 1e-10 * expected,
                "t={t}: {} vs {expected}",
                v.value
            );
        }
        assert!(mn_axis(4, 0.0, &pol).is_err());
    }

    #[test]
    fn axis_formula_matches_eulerian_sums() {
        let pol = default_pol();
        for n in [2usize, 8, 23, 64] {
            let row = eulerian_row(n).unwrap();
            let fact: f64 = (1..=n as u64).map(|i| i as f64).product();
            for t in [0.5, -0.5, 1.5] {
                let direct: f64 = row
                    .iter()
                    .enumerate()
                    .map(|(k, a)| a.to_f64().unwrap() / fact * (t * k as f64).exp())
                    .sum();
                let v = mn_axis(n, t, &pol).unwrap();
                assert!(
                    (v.value - direct).abs() < 1e-8 * direct,
                    "n={n} t={t}: {} vs {direct}",
                    v.value
                );
            }
        }
    }

    #[test]
    fn axis_reflection_symmetry() {
        // D and n-1-D share a law: m_n(t,0) = e^{t(n-1)} m_n(-t,0)
        let pol = default_pol();
        for n in [3usize, 10, 40] {
            for t in [0.8, 2.0] {
                let a = mn_axis(n, t, &pol).unwrap().log_value;
                let b = mn_axis(n, -t, &pol).unwrap().log_value + t * (n as f64 - 1.0);
                assert!((a - b).abs() < 1e-8, "n={n} t={t}");
            }
        }
    }

    #[test]
    fn closed_matches_exact_summation() {
        let pol = default_pol();
        for n in [2usize, 5, 10, 18] {
            let pmf = exact_joint_pmf(n).unwrap();
            for t in [-1.0, 1.0, 3.0] {
                for s in [-3.0, -1.0, 1.0] {
                    let closed = mn_closed(n, t, s, &pol).unwrap();
                    let exact = mn_exact(&pmf, t, s);
                    let rel = (closed.log_value - exact.log_value).abs();
                    assert!(rel < 1e-8, "n={n} t={t} s={s}: log gap {rel}");
                }
            }
        }
    }

    #[test]
    fn closed_routes_axis_arguments() {
        let pol = default_pol();
        let via_closed = mn_closed(12, 1.5, 0.0, &pol).unwrap();
        let via_axis = mn_axis(12, 1.5, &pol).unwrap();
        assert_eq!(via_closed.log_value, via_axis.log_value);
        // crossing the axis threshold changes the value by O(n |s|)
        let near = mn_closed(12, 1.5, AXIS_EPS, &pol).unwrap();
        let gap = (near.log_value - via_axis.log_value).abs();
        assert!(gap <= 12.0 * AXIS_EPS, "gap {gap}");
    }

    #[test]
    fn ratio_sum_converges_to_gaussian_factor() {
        // sum_k b_{n,k} u^k -> e^{u/2}, monotone in n at positive u
        let u = {
            let t = crate::rate::solve_tilt(0.7).unwrap().t;
            t * t
        };
        let target = (u / 2.0).exp();
        let mut errors = Vec::new();
        for n in [32usize, 128, 512] {
            let table = stirling_ratio_table(n).unwrap();
            let sum: f64 = (0..n)
                .map(|k| (table.log_ratio(k) + k as f64 * u.ln()).exp())
                .sum();
            errors.push((sum - target).abs());
        }
        assert!(errors[1] < errors[0] && errors[2] < errors[1], "{errors:?}");
    }

    #[test]
    fn generating_function_identity() {
        let pol = default_pol();
        assert!(gf_check(2, 0.3, 0.3, &pol).unwrap() < 1e-10);
        assert!(gf_check(8, 0.3, 0.5, &pol).unwrap() < 1e-8);
        // distributional symmetry of D and D': swapping the arguments leaves
        // the identity intact, so both residuals sit at truncation level
        let a = gf_check(5, 0.25, 0.65, &pol).unwrap();
        let b = gf_check(5, 0.65, 0.25, &pol).unwrap();
        assert!(a < 1e-10 && b < 1e-10);
        assert!((a - b).abs() < 1e-10);
        assert!(gf_check(3, 0.0, 0.5, &pol).is_err());
        assert!(gf_check(3, 0.5, 1.0, &pol).is_err());
    }

    #[test]
    fn transform_size_guard() {
        let pol = default_pol();
        assert!(matches!(
            mn_closed(2049, 1.0, 1.0, &pol),
            Err(Error::SizeLimit { .. })
        ));
    }
}
