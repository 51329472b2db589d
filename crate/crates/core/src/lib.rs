//! Spectral solver for Sturm-Liouville problems on a two-piece interval with
//! transmission conditions at an interior point.
//!
//! The problem is
//!
//! ```text
//! -y'' + q(x) y = λ y,            x ∈ [a, c) ∪ (c, b]
//! a1 y'(c-) + a2 y(c-) + a3 y'(c+) + a4 y(c+) = 0
//! b1 y'(c-) + b2 y(c-) + b3 y'(c+) + b4 y(c+) = 0
//! cos α y(a) + sin α y'(a) = 0
//! cos β y(b) + sin β y'(b) = 0
//! ```
//!
//! Eigenvalues are the zeros of the characteristic function built from the
//! Wronskian of two shooting solutions; the same pair of solutions gives the
//! Green's function and the resolvent. The [`oracle`] module holds
//! independent ground truth (closed forms for `q ≡ 0`, a finite-difference
//! eigensolver) used to cross-check the shooting pipeline.

pub mod cli;
pub mod error;
pub mod greens;
pub mod hilbert;
pub mod ode;
pub mod oracle;
pub mod problem;
pub mod quadrature;
pub mod solutions;
pub mod spectrum;

pub use error::{Error, Result};
pub use problem::{BoundaryAngles, Minors, Polynomial, Potential, Problem, ProblemSpec, Side, TransmissionMatrix};

/// Default mixed absolute/relative tolerance of the initial-value integrator.
pub const DEFAULT_TOL: f64 = 1e-10;
