//! Spectral statistics of the 1D Anderson-Bernoulli operator.
//!
//! The operator is H = -Delta + V on the lattice {0, 1, ..., L+1} with
//! Dirichlet walls at 0 and L+1, where -Delta f(x) = 2f(x) - f(x-1) - f(x+1)
//! and V(x) is 0 with probability p or b with probability q = 1 - p,
//! independently per site. H acts on the L interior sites as a symmetric
//! tridiagonal matrix with diagonal 2 + V(x) and off-diagonals -1; its
//! spectrum lies in [0, 4 + b].
//!
//! The crate has two jobs:
//!
//! * estimate the integrated density of states N_L(eps)/L at large L by
//!   Monte Carlo over disorder realizations, using an O(L) streaming
//!   eigenvalue counter, and
//! * verify, at desk scale, the explicit spectral bounds that govern the
//!   Lifshitz tail of this model: the sine-wave upper bounds E_k <= U_k,
//!   the distorted-sine structure of low eigenvectors, the geometric law of
//!   zero-potential runs, and the closed-form IDS sandwich whose exponent
//!   is pi * ln p.
//!
//! Modules mirror that split: [`model`], [`spectral`], [`intervals`],
//! [`sine`], and [`bounds`] are the numerical core; [`experiments`] runs
//! reproducible disorder averages on top of them; [`cli`] holds the
//! config/manifest plumbing shared with the `lifshitz` binary.
//!
//! Everything downstream of a seed is deterministic: the RNG is fixed by
//! contract (see [`rng`]), disorder realizations get independent streams
//! indexed by realization number, and parallel reductions are ordered, so
//! a config reproduces its outputs byte for byte at any worker count.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod intervals;
pub mod model;
pub mod rng;
pub mod sine;
pub mod spectral;

pub use error::Error;
