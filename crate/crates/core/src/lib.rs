//! Numerical laboratory for stable phase retrieval on orthonormal families.
//!
//! Every measure space here is a finite atomic probability space, so every
//! integral is an exact finite sum. Grids are chosen fine enough that all
//! inner products of the trigonometric families involved are computed without
//! aliasing, which turns orthogonality relations into machine-precision checks.
//!
//! The crate is organized bottom-up:
//!
//! * [`measure`]: measure spaces, sampled functions, inner products, `L^p` norms.
//! * [`phase`]: distances modulo a global unimodular (or `±1`) factor.
//! * [`basis`]: the orthonormal families, associated functions `s_j = |r_j|² − 1`
//!   and the modulus-squared expansion.
//! * [`sidon`]: B₂/B₃ sequences and perfect difference sets.
//! * [`hypotheses`]: orthogonality and moment checks, embedding constants.
//! * [`retrieval`]: recovery of coefficients from `|f|` up to global phase.
//! * [`stability`]: empirical stability ratios, Hölder fits, identity suites.

pub mod basis;
pub mod error;
pub mod hypotheses;
pub mod io;
pub mod measure;
pub mod phase;
pub mod retrieval;
pub mod rng;
pub mod sidon;
pub mod stability;

pub use basis::{CoefVec, Field, ModulusSquaredExpansion, OrthoBasis, Provenance};
pub use error::{Result, SprError};
pub use measure::{DiscreteMeasure, MeasureKind, SampledFunction};
pub use num_complex::Complex64;
pub use phase::{min_phase_dist, PhaseAlignment};
