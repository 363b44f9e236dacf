//! Monte Carlo verification of the limit theorems for `(D_n, D'_n)`.
//!
//! The scaled vector `sqrt(n) (D_n/n - 1/2, D'_n/n - 1/2)` converges to a
//! centered Gaussian with covariance `diag(1/12, 1/12)`; the whole path
//! converges functionally with cross-time covariance `s/(12 t^2) I`; the sum
//! `T_n = D_n + D'_n` satisfies a CLT with variance `1/6`; and along single
//! paths the log-averaged squared fluctuations obey a quadratic strong law
//! with limit `1/6` and a law of iterated logarithm at the same constant.
//!
//! Replicas are distributed over worker threads, each drawing from a stream
//! derived from `(seed, replica)`, and partial results are merged in replica
//! order, so every estimator is a pure function of `(seed, reps, n)`
//! regardless of thread count.

use rayon::prelude::*;

use crate::chain::{sample_final, step, ChainState};
use crate::rng::RandomStream;

/// Sample covariance estimate of a two-dimensional statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovEstimate {
    /// Sample covariance matrix (divisor `reps - 1`).
    pub entries: [[f64; 2]; 2],
    /// Standard errors of the entries (standard deviation of the centered
    /// products over `sqrt(reps)`).
    pub stderr: [[f64; 2]; 2],
    /// Sample means of the two coordinates.
    pub mean: [f64; 2],
    /// Standard errors of the means.
    pub mean_stderr: [f64; 2],
    pub reps: u64,
}

/// Scalar estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarEstimate {
    pub value: f64,
    pub stderr: f64,
    pub reps: u64,
}

/// Statistics accumulated along a single chain path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathStat {
    pub n_final: u64,
    /// `(1/log n) sum_{k<=n} [(D_k/k - 1/2)^2 + (D'_k/k - 1/2)^2]`,
    /// converging almost surely to `1/6` at rate `1/log n`.
    pub qsl_value: f64,
    /// Running maximum of `n/(2 log log n)` times the squared fluctuation,
    /// whose limsup is `1/6`. Report-only: the limsup is not testable at
    /// finite size.
    pub lil_value: f64,
}

/// `sqrt(scale_n) (D_k/k - 1/2, D'_k/k - 1/2)` where `k` is the state size.
fn scaled_vector(s: &ChainState, scale_n: u64) -> [f64; 2] {
    let k = s.n as f64;
    let scale = (scale_n as f64).sqrt();
    [
        scale * (s.d as f64 / k - 0.5),
        scale * (s.dp as f64 / k - 0.5),
    ]
}

fn covariance_of(pairs: &[([f64; 2], [f64; 2])]) -> CovEstimate {
    let reps = pairs.len();
    let rf = reps as f64;
    let mut mean_a = [0.0f64; 2];
    let mut mean_b = [0.0f64; 2];
    for (a, b) in pairs {
        for i in 0..2 {
            mean_a[i] += a[i];
            mean_b[i] += b[i];
        }
    }
    for i in 0..2 {
        mean_a[i] /= rf;
        mean_b[i] /= rf;
    }

    let mut entries = [[0.0f64; 2]; 2];
    let mut second = [[0.0f64; 2]; 2];
    for (a, b) in pairs {
        for i in 0..2 {
            for j in 0..2 {
                let p = (a[i] - mean_a[i]) * (b[j] - mean_b[j]);
                entries[i][j] += p;
                second[i][j] += p * p;
            }
        }
    }
    let mut stderr = [[0.0f64; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let cov = entries[i][j] / (rf - 1.0);
            let var_p = (second[i][j] / rf - (entries[i][j] / rf).powi(2)).max(0.0);
            entries[i][j] = cov;
            stderr[i][j] = (var_p / rf).sqrt();
        }
    }

    let mut mean_stderr = [0.0f64; 2];
    for i in 0..2 {
        mean_stderr[i] = (entries[i][i].max(0.0) / rf).sqrt();
    }
    CovEstimate {
        entries,
        stderr,
        mean: mean_a,
        mean_stderr,
        reps: reps as u64,
    }
}

/// Covariance of `sqrt(n) (D_n/n - 1/2, D'_n/n - 1/2)` over independent
/// replicas; the limit is `diag(1/12, 1/12)`.
pub fn clt_covariance(n: u64, reps: u64, seed: u64) -> CovEstimate {
    assert!(n >= 2, "clt_covariance needs n >= 2");
    assert!(reps >= 100, "clt_covariance needs reps >= 100");
    let samples: Vec<([f64; 2], [f64; 2])> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = RandomStream::derive(seed, r);
            let s = sample_final(n, &mut rng);
            let v = scaled_vector(&s, n);
            (v, v)
        })
        .collect();
    covariance_of(&samples)
}

/// Cross-time covariance of the scaled path at times `s` and `t` (`s <= t`),
/// over shared paths; the limit is `(s / (12 t^2)) I`.
///
/// `entries[i][j]` estimates the covariance between coordinate `i` of the
/// scaled vector at time `s` and coordinate `j` at time `t`.
pub fn fclt_cross_cov(n: u64, s: f64, t: f64, reps: u64, seed: u64) -> CovEstimate {
    assert!(s > 0.0 && s <= t, "needs 0 < s <= t");
    assert!(reps >= 100);
    let k1 = (n as f64 * s).floor() as u64;
    let k2 = (n as f64 * t).floor() as u64;
    assert!(k1 >= 2, "floor(n s) must be at least 2");
    let samples: Vec<([f64; 2], [f64; 2])> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = RandomStream::derive(seed, r);
            let mut state = ChainState::initial();
            while state.n < k1 {
                state = step(state, &mut rng).expect("path states are reachable");
            }
            let early = scaled_vector(&state, n);
            while state.n < k2 {
                state = step(state, &mut rng).expect("path states are reachable");
            }
            let late = scaled_vector(&state, n);
            (early, late)
        })
        .collect();
    covariance_of(&samples)
}

fn path_stats(n_final: u64, seed: u64) -> PathStat {
    assert!(n_final >= 1000, "path statistics need n >= 1000");
    let mut rng = RandomStream::new(seed);
    let mut state = ChainState::initial();
    let mut acc = 0.0f64;
    let mut lil_max = 0.0f64;
    loop {
        let k = state.n as f64;
        let sq = (state.d as f64 / k - 0.5).powi(2) + (state.dp as f64 / k - 0.5).powi(2);
        acc += sq;
        // Track the iterated-logarithm maximum from size 8 on: below e^e the
        // log log weight blows up and the maximum would be frozen at k = 3.
        if state.n >= 8 {
            let loglog = k.ln().ln();
            let lil = k / (2.0 * loglog) * sq;
            if lil > lil_max {
                lil_max = lil;
            }
        }
        if state.n == n_final {
            break;
        }
        state = step(state, &mut rng).expect("path states are reachable");
    }
    PathStat {
        n_final,
        qsl_value: acc / (n_final as f64).ln(),
        lil_value: lil_max,
    }
}

/// Quadratic-strong-law statistic along one path, `O(1)` memory.
///
/// Converges to `1/6` almost surely, but only at rate `1/log n`; at
/// reachable sizes the value still carries a visible positive bias from the
/// early terms of the sum.
pub fn qsl_statistic(n_final: u64, seed: u64) -> PathStat {
    path_stats(n_final, seed)
}

/// Law-of-iterated-logarithm statistic along one path (report-only).
pub fn lil_statistic(n_final: u64, seed: u64) -> PathStat {
    path_stats(n_final, seed)
}

/// Variance of `sqrt(n) (T_n/n - 1)` for the sum `T_n = D_n + D'_n`;
/// the limit is `1/6`.
pub fn sum_clt_check(n: u64, reps: u64, seed: u64) -> ScalarEstimate {
    assert!(n >= 2);
    assert!(reps >= 100);
    let samples: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = RandomStream::derive(seed, r);
            let s = sample_final(n, &mut rng);
            let v = scaled_vector(&s, n);
            v[0] + v[1]
        })
        .collect();
    let rf = reps as f64;
    let mean: f64 = samples.iter().sum::<f64>() / rf;
    let mut var = 0.0;
    let mut second = 0.0;
    for &x in &samples {
        let p = (x - mean) * (x - mean);
        var += p;
        second += p * p;
    }
    let value = var / (rf - 1.0);
    let var_p = (second / rf - (var / rf).powi(2)).max(0.0);
    ScalarEstimate {
        value,
        stderr: (var_p / rf).sqrt(),
        reps,
    }
}
