//! Numerical toolkit for lacunary trigonometric sums `Σ √2 cos(2π n_k x)`.
//!
//! * [`seqgen`]: lacunary frequency sequences with exact gap certificates.
//! * [`blockdio`]: long/short block decompositions of the index set and
//!   exact counters for near-solutions of small Diophantine equations.
//! * [`besselkit`]: modified Bessel functions and the series of `log I₀(√2λ)`.
//! * [`mgfeval`]: the moment generating function by quadrature and by the
//!   Bessel/Diophantine expansion.
//! * [`asymptotics`]: series fits of `Λ_N`, envelope ratios, Legendre
//!   transforms and level-set tail measurements.

pub mod asymptotics;
pub mod besselkit;
pub mod blockdio;
pub mod error;
pub mod mgfeval;
pub mod seqgen;
pub mod sum;

pub use error::{Error, Result};
pub use seqgen::LacunarySequence;
