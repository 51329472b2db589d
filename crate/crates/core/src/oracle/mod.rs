//! Independent references for the shooting pipeline: `ω` in closed form when
//! `q ≡ 0`, a finite-difference eigensolver, and a dense Jacobi eigensolver.

pub mod fd;
pub mod jacobi;

pub use fd::{fd_eigenpairs_dense, fd_eigenvalues, richardson_ratio, FdEigenpair, FdSystem};
pub use jacobi::{jacobi_eigen, SymmetricEigen};

use crate::error::{Error, Result};
use crate::ode::StatePair;
use crate::problem::Problem;

/// Exact propagator of `y'' = −λ y` over a length `len`, acting on `(y, y')`.
fn propagate(state: StatePair, lambda: f64, len: f64) -> StatePair {
    let (c, s_over_k, minus_k_s) = if lambda > 0.0 {
        let k = lambda.sqrt();
        let (s, c) = (k * len).sin_cos();
        (c, s / k, -k * s)
    } else if lambda < 0.0 {
        let k = (-lambda).sqrt();
        (f64::cosh(k * len), f64::sinh(k * len) / k, k * f64::sinh(k * len))
    } else {
        (1.0, len, 0.0)
    };
    StatePair::new(c * state.y + s_over_k * state.dy, minus_k_s * state.y + c * state.dy)
}

/// `ω(λ) = ρ34 w1(λ)` for a potential-free problem, without integration.
///
/// `φ` and `χ` are propagated in closed form to the interface and `χ` is
/// pulled back across it by solving the two transmission rows for the
/// left trace.
pub fn closed_form_characteristic_q0(lambda: f64, problem: &Problem) -> Result<f64> {
    if !problem.potential().is_zero() {
        return Err(Error::BadPotential("closed form needs q ≡ 0 on both sides".into()));
    }
    let m = problem.minors();
    let (sa, ca) = problem.alpha().sin_cos();
    let (sb, cb) = problem.beta().sin_cos();
    let phi = propagate(StatePair::new(sa, -ca), lambda, problem.c() - problem.a());
    let chi_plus = propagate(StatePair::new(-sb, cb), lambda, problem.c() - problem.b());

    // Inverse of (y, y')(c+) = M (y, y')(c−), M from Cramer's rule.
    let (m11, m12, m21, m22) = (m.r23 / m.r34, m.r13 / m.r34, -m.r24 / m.r34, -m.r14 / m.r34);
    let det = m11 * m22 - m12 * m21;
    let chi_minus = StatePair::new(
        (m22 * chi_plus.y - m12 * chi_plus.dy) / det,
        (-m21 * chi_plus.y + m11 * chi_plus.dy) / det,
    );
    Ok(m.r34 * phi.wronskian(chi_minus))
}
