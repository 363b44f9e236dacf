//! Error type shared by all modules.

/// Errors reported by the library.
///
/// The CLI maps these onto process exit codes: size limits exit with 3,
/// numeric failures (non-convergence, negative weights, mass deviation,
/// boundary points) with 2, domain violations with 1.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A brute-force or table computation was asked to exceed its guard.
    #[error("{what}: size {got} exceeds the supported limit {limit}")]
    SizeLimit {
        what: &'static str,
        limit: u64,
        got: u64,
    },

    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A point of the unit square lies exactly on a cell boundary.
    #[error("coordinate {coord} lies on a grid line (multiple of 1/{denom})")]
    BoundaryPoint { coord: f64, denom: u64 },

    /// A transition count came out negative: the supplied state cannot be
    /// reached by the chain.
    #[error("negative transition weight at (n={n}, d={d}, dp={dp}): state is unreachable")]
    NegativeWeight { n: u64, d: u64, dp: u64 },

    /// The dynamic program lost or gained probability mass beyond tolerance.
    /// Mass is checked after every step and never silently renormalized.
    #[error("probability mass deviates from 1 by {deviation:e} at size {n}")]
    MassDeviation { n: u64, deviation: f64 },

    /// An iterative solver did not reach its residual tolerance.
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: u32, residual: f64 },

    /// A truncated series did not meet its tolerance within the term budget.
    #[error("series did not converge within {0} terms")]
    TruncationLimit(u64),
}
