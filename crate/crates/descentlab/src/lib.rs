//! Exact and asymptotic analysis of the joint distribution of descents and
//! inverse descents in uniform random permutations.
//!
//! The crate is organized around a single probabilistic object: the pair
//! `(D_n, D'_n)` where `D_n` counts descents of a uniform permutation of size
//! `n` and `D'_n` counts descents of its inverse. It provides
//!
//! * combinatorial ground truth: permutations, descent counting, the grid
//!   insertion construction and brute-force oracles ([`perm`]),
//! * the Markov chain satisfied by `(D_n, D'_n)`, its exact joint law by
//!   dynamic programming, Eulerian marginals and tail sums ([`chain`]),
//! * the cumulant generating function `L(t) = log((e^t - 1)/t)`, its Legendre
//!   transform and the exponential tilt solver ([`rate`]),
//! * closed forms for the bivariate Laplace transform of `(D_n, D'_n)` built
//!   from Stirling-number ratios ([`laplace`]),
//! * sharp tail approximations with lattice corrections and the quadrant
//!   dependence factors ([`sldp`]),
//! * reproducible Monte Carlo verification of the Gaussian limit, the
//!   functional CLT covariance, the quadratic strong law and the law of
//!   iterated logarithm ([`limits`]).
//!
//! All randomness flows through [`rng::RandomStream`], a fixed 64-bit
//! generator with documented constants, so every simulation is bit
//! reproducible across platforms and thread counts.

pub mod chain;
pub mod error;
pub mod laplace;
pub mod limits;
pub mod perm;
pub mod rate;
pub mod rng;
pub mod sldp;

pub use chain::{ChainState, JointPmf, TransitionWeights};
pub use error::Error;
pub use perm::Permutation;
pub use rate::TiltSolution;
pub use rng::RandomStream;
pub use sldp::{Quadrant, SldpEstimate};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
