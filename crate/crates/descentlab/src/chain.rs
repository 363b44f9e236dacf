//! The Markov chain of descent and inverse-descent counts.
//!
//! Growing a uniform permutation by one element changes the pair
//! `(D_n, D'_n)` by an increment in `{0,1}^2`, and the number of insertion
//! cells realizing each increment has a closed form in `(n, D_n, D'_n)`
//! alone:
//!
//! ```text
//! both counts up:   (n - d)(n - d') + n
//! only D up:        (n - d)(d' + 1) - n
//! only D' up:       (d + 1)(n - d') - n
//! neither up:       (d + 1)(d' + 1) + n        (denominator (n+1)^2)
//! ```
//!
//! This module exposes that kernel, path sampling along it, the exact joint
//! law of `(D_n, D'_n)` by forward dynamic programming, exact Eulerian
//! marginals, quadrant tail sums, and martingale identity checks.

use num_bigint::BigUint;
use rayon::prelude::*;

use crate::error::Error;
use crate::rng::RandomStream;
use crate::sldp::Quadrant;
use crate::Result;

/// Largest size for the double-precision dynamic program (`O(n^3)` time,
/// `O(n^2)` memory; about 33 MB of doubles at the limit).
pub const MAX_PMF: usize = 2048;
/// Largest size for the exact rational dynamic program.
pub const MAX_RATIONAL_PMF: usize = 40;
/// Largest row computed by [`eulerian_row`].
pub const MAX_EULERIAN: usize = 256;

/// State of the descent chain: size `n`, descents `d`, inverse descents `dp`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainState {
    pub n: u64,
    pub d: u64,
    pub dp: u64,
}

impl ChainState {
    /// The chain starts at size 1 with no descents on either side.
    pub fn initial() -> Self {
        ChainState { n: 1, d: 0, dp: 0 }
    }

    /// Checks the structural bounds `0 <= d, dp <= n - 1`.
    pub fn is_valid(&self) -> bool {
        self.n >= 1 && self.d < self.n && self.dp < self.n
    }
}

/// The four integer transition counts out of a state, over `(n+1)^2` cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransitionWeights {
    /// Cells raising both counts.
    pub both: u64,
    /// Cells raising only the descent count.
    pub d_only: u64,
    /// Cells raising only the inverse-descent count.
    pub dp_only: u64,
    /// Cells raising neither.
    pub neither: u64,
    /// Total cell count `(n+1)^2`.
    pub denom: u64,
}

/// The martingale transform `M_n = n (V_n - (n-1)/2 (1,1))` of the state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MartingaleState {
    pub m: [f64; 2],
}

impl MartingaleState {
    /// Recomputes the martingale coordinates from the chain state.
    pub fn from_state(s: &ChainState) -> Self {
        let n = s.n as f64;
        let center = (n - 1.0) / 2.0;
        MartingaleState {
            m: [n * (s.d as f64 - center), n * (s.dp as f64 - center)],
        }
    }
}

#[inline]
fn raw_weights(n: u64, d: u64, dp: u64) -> (i128, i128, i128, i128) {
    let (n, d, dp) = (n as i128, d as i128, dp as i128);
    (
        (n - d) * (n - dp) + n,
        (n - d) * (dp + 1) - n,
        (d + 1) * (n - dp) - n,
        (d + 1) * (dp + 1) + n,
    )
}

/// Closed-form transition counts out of `s`.
///
/// Errors with [`Error::NegativeWeight`] when a count is negative, which
/// happens exactly on `(d, dp)` pairs the chain cannot reach.
pub fn transition_weights(s: ChainState) -> Result<TransitionWeights> {
    if !s.is_valid() {
        return Err(Error::Domain(format!(
            "invalid chain state (n={}, d={}, dp={})",
            s.n, s.d, s.dp
        )));
    }
    let (w11, w10, w01, w00) = raw_weights(s.n, s.d, s.dp);
    if w10 < 0 || w01 < 0 {
        return Err(Error::NegativeWeight {
            n: s.n,
            d: s.d,
            dp: s.dp,
        });
    }
    Ok(TransitionWeights {
        both: w11 as u64,
        d_only: w10 as u64,
        dp_only: w01 as u64,
        neither: w00 as u64,
        denom: (s.n + 1) * (s.n + 1),
    })
}

/// One step of the chain: draws the increment with exact integer weights.
///
/// The increment is chosen by an unbiased integer draw in `[0, (n+1)^2)`, so
/// the transition law is exact, not a floating-point approximation.
pub fn step(s: ChainState, rng: &mut RandomStream) -> Result<ChainState> {
    let w = transition_weights(s)?;
    let u = rng.next_below(w.denom);
    let (a, b) = if u < w.both {
        (1, 1)
    } else if u < w.both + w.d_only {
        (1, 0)
    } else if u < w.both + w.d_only + w.dp_only {
        (0, 1)
    } else {
        (0, 0)
    };
    Ok(ChainState {
        n: s.n + 1,
        d: s.d + a,
        dp: s.dp + b,
    })
}

/// Runs the chain from size 1 to `n_max`; `O(n_max)` time, `O(1)` memory.
pub fn sample_final(n_max: u64, rng: &mut RandomStream) -> ChainState {
    assert!(n_max >= 1);
    let mut s = ChainState::initial();
    while s.n < n_max {
        s = step(s, rng).expect("states on a sampled path are reachable");
    }
    s
}

/// Exact joint law of `(D_n, D'_n)` as a dense `n x n` matrix of doubles.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    n: usize,
    probs: Vec<f64>,
}

impl JointPmf {
    /// The law at size 1: all mass at `(0, 0)`.
    pub fn initial() -> Self {
        JointPmf {
            n: 1,
            probs: vec![1.0],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `P(D_n = d, D'_n = dp)`.
    pub fn get(&self, d: usize, dp: usize) -> f64 {
        self.probs[d * self.n + dp]
    }

    /// Total mass (compensated summation).
    pub fn mass(&self) -> f64 {
        neumaier_sum(self.probs.iter().copied())
    }

    /// Advances the law one size with the transition kernel.
    ///
    /// Zero-mass states are skipped, so the closed forms are never evaluated
    /// on unreachable `(d, dp)` pairs where they can go negative. After the
    /// step the total mass must still be within `1e-9` of one; a larger
    /// deviation is an error, never a silent renormalization.
    pub fn advance(&self) -> Result<JointPmf> {
        let n = self.n;
        let m = n + 1;
        let nn = n as u64;
        let denom = ((nn + 1) * (nn + 1)) as f64;
        let old = &self.probs;

        // Contribution of source (sd, sdp) through increment (a, b).
        // Weights are only evaluated on positive-mass sources.
        let contrib = |sd: usize, sdp: usize, which: u8| -> Result<f64> {
            if sd >= n || sdp >= n {
                return Ok(0.0);
            }
            let mass = old[sd * n + sdp];
            if mass == 0.0 {
                return Ok(0.0);
            }
            let (w11, w10, w01, w00) = raw_weights(nn, sd as u64, sdp as u64);
            if w10 < 0 || w01 < 0 {
                return Err(Error::NegativeWeight {
                    n: nn,
                    d: sd as u64,
                    dp: sdp as u64,
                });
            }
            let w = match which {
                0 => w11,
                1 => w10,
                2 => w01,
                _ => w00,
            } as f64;
            Ok(mass * w / denom)
        };

        // The four contributions are paired (both+neither) + (d_only+dp_only)
        // so that the complement and transpose symmetries of the law are
        // preserved bit-for-bit at every size.
        let fill_row = |d: usize, row: &mut [f64]| -> Result<()> {
            for (dp, slot) in row.iter_mut().enumerate() {
                let c11 = if d >= 1 && dp >= 1 {
                    contrib(d - 1, dp - 1, 0)?
                } else {
                    0.0
                };
                let c10 = if d >= 1 { contrib(d - 1, dp, 1)? } else { 0.0 };
                let c01 = if dp >= 1 { contrib(d, dp - 1, 2)? } else { 0.0 };
                let c00 = contrib(d, dp, 3)?;
                *slot = (c11 + c00) + (c10 + c01);
            }
            Ok(())
        };

        let mut probs = vec![0.0f64; m * m];
        if m >= 256 {
            probs
                .par_chunks_mut(m)
                .enumerate()
                .try_for_each(|(d, row)| fill_row(d, row))?;
        } else {
            for (d, row) in probs.chunks_mut(m).enumerate() {
                fill_row(d, row)?;
            }
        }

        let next = JointPmf { n: m, probs };
        let deviation = (next.mass() - 1.0).abs();
        if deviation > 1e-9 {
            return Err(Error::MassDeviation {
                n: m as u64,
                deviation,
            });
        }
        Ok(next)
    }

    /// Marginal law of `D_n` (row sums).
    ///
    /// Rows are summed pairwise from both ends so the marginal inherits the
    /// exact symmetry `P(D = d) = P(D = n-1-d)` of the matrix.
    pub fn marginal_d(&self) -> Vec<f64> {
        (0..self.n).map(|d| self.row_sum(d)).collect()
    }

    /// Marginal law of `D'_n` (column sums).
    pub fn marginal_dp(&self) -> Vec<f64> {
        (0..self.n)
            .map(|dp| {
                let n = self.n;
                let mut sum = 0.0;
                let mut lo = 0;
                let mut hi = n - 1;
                while lo < hi {
                    sum += self.probs[lo * n + dp] + self.probs[hi * n + dp];
                    lo += 1;
                    hi -= 1;
                }
                if lo == hi {
                    sum += self.probs[lo * n + dp];
                }
                sum
            })
            .collect()
    }

    fn row_sum(&self, d: usize) -> f64 {
        let n = self.n;
        let row = &self.probs[d * n..(d + 1) * n];
        let mut sum = 0.0;
        let mut lo = 0;
        let mut hi = n - 1;
        while lo < hi {
            sum += row[lo] + row[hi];
            lo += 1;
            hi -= 1;
        }
        if lo == hi {
            sum += row[lo];
        }
        sum
    }

    /// `log E[exp(t D + s D')]`, accumulated in log-sum-exp form so large
    /// `|t| n` cannot overflow.
    pub fn log_mgf(&self, t: f64, s: f64) -> f64 {
        let n = self.n;
        let mut max_arg = f64::NEG_INFINITY;
        for d in 0..n {
            for dp in 0..n {
                if self.probs[d * n + dp] > 0.0 {
                    let arg = t * d as f64 + s * dp as f64;
                    if arg > max_arg {
                        max_arg = arg;
                    }
                }
            }
        }
        let mut sum = 0.0;
        for d in 0..n {
            for dp in 0..n {
                let p = self.probs[d * n + dp];
                if p > 0.0 {
                    sum += p * (t * d as f64 + s * dp as f64 - max_arg).exp();
                }
            }
        }
        max_arg + sum.ln()
    }

    /// Writes the law as CSV: header `n,d,dprime,prob`, row-major,
    /// probabilities with 17 significant digits.
    pub fn to_csv<W: std::io::Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "n,d,dprime,prob")?;
        for d in 0..self.n {
            for dp in 0..self.n {
                writeln!(out, "{},{},{},{:.16e}", self.n, d, dp, self.get(d, dp))?;
            }
        }
        Ok(())
    }
}

/// Exact law of `(D_n, D'_n)` by forward dynamic programming, `1 <= n <= 2048`.
pub fn exact_joint_pmf(n: usize) -> Result<JointPmf> {
    if n < 1 || n > MAX_PMF {
        return Err(Error::SizeLimit {
            what: "exact_joint_pmf",
            limit: MAX_PMF as u64,
            got: n as u64,
        });
    }
    let mut pmf = JointPmf::initial();
    while pmf.n < n {
        pmf = pmf.advance()?;
    }
    Ok(pmf)
}

/// Exact rational joint law: integer numerators over the common denominator
/// `(n!)^2`.
#[derive(Debug, Clone)]
pub struct RationalPmf {
    pub n: usize,
    /// Row-major `n x n` numerators.
    pub numerators: Vec<BigUint>,
    /// Common denominator `(n!)^2`.
    pub denominator: BigUint,
}

impl RationalPmf {
    /// Converts to doubles; exact numerators divided by the exact
    /// denominator, both convertible for `n <= 40`.
    pub fn to_f64(&self) -> Vec<f64> {
        use num_traits::ToPrimitive;
        let denom = self.denominator.to_f64().expect("(n!)^2 fits in f64 range");
        self.numerators
            .iter()
            .map(|v| v.to_f64().unwrap() / denom)
            .collect()
    }
}

/// Exact rational DP, usable as an oracle for the floating-point law.
pub fn exact_joint_pmf_rational(n: usize) -> Result<RationalPmf> {
    if n < 1 || n > MAX_RATIONAL_PMF {
        return Err(Error::SizeLimit {
            what: "exact_joint_pmf_rational",
            limit: MAX_RATIONAL_PMF as u64,
            got: n as u64,
        });
    }
    let mut size = 1usize;
    let mut nums = vec![BigUint::from(1u32)];
    let mut denom = BigUint::from(1u32);
    while size < n {
        let k = size as u64;
        let m = size + 1;
        let mut next = vec![BigUint::from(0u32); m * m];
        for d in 0..size {
            for dp in 0..size {
                let mass = &nums[d * size + dp];
                if mass == &BigUint::from(0u32) {
                    continue;
                }
                let (w11, w10, w01, w00) = raw_weights(k, d as u64, dp as u64);
                if w10 < 0 || w01 < 0 {
                    return Err(Error::NegativeWeight {
                        n: k,
                        d: d as u64,
                        dp: dp as u64,
                    });
                }
                for (a, b, w) in [
                    (1usize, 1usize, w11 as u64),
                    (1, 0, w10 as u64),
                    (0, 1, w01 as u64),
                    (0, 0, w00 as u64),
                ] {
                    if w > 0 {
                        next[(d + a) * m + (dp + b)] += mass * w;
                    }
                }
            }
        }
        denom *= BigUint::from((k + 1) * (k + 1));
        nums = next;
        size = m;
    }
    Ok(RationalPmf {
        n,
        numerators: nums,
        denominator: denom,
    })
}

/// Eulerian numbers `A(n, 0..=n-1)` in exact integer arithmetic.
///
/// Recurrence `A(n, k) = (k+1) A(n-1, k) + (n-k) A(n-1, k-1)`; the row sums
/// to `n!`.
pub fn eulerian_row(n: usize) -> Result<Vec<BigUint>> {
    if n < 1 || n > MAX_EULERIAN {
        return Err(Error::SizeLimit {
            what: "eulerian_row",
            limit: MAX_EULERIAN as u64,
            got: n as u64,
        });
    }
    let mut row = vec![BigUint::from(1u32)];
    for m in 2..=n {
        let mut next = vec![BigUint::from(0u32); m];
        for k in 0..m {
            let mut v = BigUint::from(0u32);
            if k < m - 1 {
                v += &row[k] * (k as u64 + 1);
            }
            if k >= 1 {
                v += &row[k - 1] * ((m - k) as u64);
            }
            next[k] = v;
        }
        row = next;
    }
    Ok(row)
}

fn check_tail_coordinate(v: f64) -> Result<()> {
    if !(v > 0.5 && v < 1.0) {
        return Err(Error::Domain(format!(
            "tail threshold {v} outside (1/2, 1)"
        )));
    }
    Ok(())
}

/// Upper threshold index `ceil((n-1) x)`.
fn upper_index(n: usize, x: f64) -> usize {
    (((n - 1) as f64) * x).ceil() as usize
}

/// Joint quadrant tail probability of the law.
///
/// With `a = ceil((n-1) x)` and `b = ceil((n-1) y)`:
/// upper means the coordinate is `>= a/(n-1)` (resp. `b`), lower means it is
/// `<= (n-1-a)/(n-1)`, i.e. `<= floor((n-1)(1-x))` since
/// `floor((n-1)(1-x)) = n-1-ceil((n-1)x)`.
///
/// Summation orders mirror each other across the symmetries of the law, so
/// complementary quadrants agree exactly, not just to rounding.
pub fn quadrant_tail(pmf: &JointPmf, x: f64, y: f64, q: Quadrant) -> Result<f64> {
    check_tail_coordinate(x)?;
    check_tail_coordinate(y)?;
    let n = pmf.n;
    let a = upper_index(n, x);
    let b = upper_index(n, y);
    let ka = n - 1 - a; // floor((n-1)(1-x))
    let kb = n - 1 - b;
    let mut sum = 0.0;
    match q {
        Quadrant::UpperUpper => {
            for d in a..n {
                for dp in b..n {
                    sum += pmf.probs[d * n + dp];
                }
            }
        }
        Quadrant::LowerLower => {
            for d in (0..=ka).rev() {
                for dp in (0..=kb).rev() {
                    sum += pmf.probs[d * n + dp];
                }
            }
        }
        Quadrant::LowerUpper => {
            for dp in b..n {
                for d in (0..=ka).rev() {
                    sum += pmf.probs[d * n + dp];
                }
            }
        }
        Quadrant::UpperLower => {
            for d in a..n {
                for dp in (0..=kb).rev() {
                    sum += pmf.probs[d * n + dp];
                }
            }
        }
    }
    Ok(sum)
}

/// `P(D_n / (n-1) >= x)` summed from the exact marginal.
pub fn marginal_upper_tail(pmf: &JointPmf, x: f64) -> Result<f64> {
    check_tail_coordinate(x)?;
    let marg = pmf.marginal_d();
    let a = upper_index(pmf.n, x);
    Ok(marg[a..].iter().sum())
}

/// `P(D_n / (n-1) <= 1 - x)`, summed in the order mirroring the upper tail
/// so the reflection symmetry holds exactly.
pub fn marginal_lower_tail(pmf: &JointPmf, x: f64) -> Result<f64> {
    check_tail_coordinate(x)?;
    let marg = pmf.marginal_d();
    let ka = pmf.n - 1 - upper_index(pmf.n, x);
    Ok((0..=ka).rev().map(|d| marg[d]).sum())
}

/// Floating-point residuals of the one-step mean and second moment against
/// their closed forms.
///
/// Returns `(drift, covariance)` max-norm residuals: the conditional mean of
/// the increment against `((n-d)/(n+1), (n-dp)/(n+1))`, and the conditional
/// second-moment matrix against the one with off-diagonal entry
/// `p p' + n/(n+1)^2`. Both vanish identically; what is reported is pure
/// rounding.
pub fn drift_covariance_check(s: ChainState) -> Result<(f64, f64)> {
    let w = transition_weights(s)?;
    let denom = w.denom as f64;
    let np1 = (s.n + 1) as f64;
    let e1 = (w.both + w.d_only) as f64 / denom;
    let e2 = (w.both + w.dp_only) as f64 / denom;
    let p1 = (s.n - s.d) as f64 / np1;
    let p2 = (s.n - s.dp) as f64 / np1;
    let drift = (e1 - p1).abs().max((e2 - p2).abs());

    let m12 = w.both as f64 / denom;
    let rn = s.n as f64 / denom;
    let cov = (e1 - p1)
        .abs()
        .max((e2 - p2).abs())
        .max((m12 - (p1 * p2 + rn)).abs());
    Ok((drift, cov))
}

/// Exact-arithmetic residuals of the martingale identities at a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MartingaleCheck {
    /// `| E[M_{n+1} | state] - M_n |`, computed in integers (0 when exact).
    pub drift_residual: f64,
    /// Max-norm residual of the predictable quadratic-variation increment
    /// against `[[(n-d)(d+1), n], [n, (n-dp)(dp+1)]]`, in integers.
    pub qv_residual: f64,
}

/// Verifies, in exact integer arithmetic, that the martingale transform has
/// zero conditional drift and the stated quadratic-variation increment.
pub fn martingale_increment_check(s: ChainState) -> Result<MartingaleCheck> {
    let w = transition_weights(s)?;
    let (n, d, dp) = (s.n as i128, s.d as i128, s.dp as i128);
    let denom = w.denom as i128;
    let weights = [
        (1i128, 1i128, w.both as i128),
        (1, 0, w.d_only as i128),
        (0, 1, w.dp_only as i128),
        (0, 0, w.neither as i128),
    ];

    // denom * (E[M_{n+1} | s] - M_n), componentwise.
    let mut drift = [denom * (d - n), denom * (dp - n)];
    for &(a, b, wt) in &weights {
        drift[0] += wt * (n + 1) * a;
        drift[1] += wt * (n + 1) * b;
    }
    let drift_residual = drift.iter().map(|v| v.unsigned_abs()).max().unwrap() as f64;

    // denom * E[dM dM^T | s] against denom * [[(n-d)(d+1), n], [n, ...]].
    // dM component i for increment (a, b) is (n+1) xi_i + V_i - n, an integer.
    let mut sm = [[0i128; 2]; 2];
    for &(a, b, wt) in &weights {
        let dm1 = (n + 1) * a + d - n;
        let dm2 = (n + 1) * b + dp - n;
        sm[0][0] += wt * dm1 * dm1;
        sm[0][1] += wt * dm1 * dm2;
        sm[1][0] += wt * dm2 * dm1;
        sm[1][1] += wt * dm2 * dm2;
    }
    let target = [
        [denom * (n - d) * (d + 1), denom * n],
        [denom * n, denom * (n - dp) * (dp + 1)],
    ];
    let mut qv = 0u128;
    for i in 0..2 {
        for j in 0..2 {
            qv = qv.max((sm[i][j] - target[i][j]).unsigned_abs());
        }
    }
    Ok(MartingaleCheck {
        drift_residual,
        qv_residual: qv as f64,
    })
}

/// Compensated (Neumaier) summation.
pub(crate) fn neumaier_sum(xs: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
