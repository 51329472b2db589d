//! The two fundamental solutions: `φ` launched from the left boundary
//! condition and `χ` launched from the right one, each carried across the
//! interface by the transfer formulas, and the characteristic function
//! built from their Wronskians.

use crate::error::{Error, Result};
use crate::ode::{integrate, SolutionPiece, Start, StatePair};
use crate::problem::{Minors, Problem, Side};

/// Maps the left trace `(y(c−), y'(c−))` to the right trace:
///
/// ```text
/// y(c+)  =  (ρ23 y(c−) + ρ24 y'(c−)) / ρ12
/// y'(c+) = −(ρ13 y(c−) + ρ14 y'(c−)) / ρ12
/// ```
pub fn transfer_left_to_right(trace: StatePair, m: &Minors) -> StatePair {
    StatePair::new(
        (m.r23 * trace.y + m.r24 * trace.dy) / m.r12,
        -(m.r13 * trace.y + m.r14 * trace.dy) / m.r12,
    )
}

/// Maps the right trace `(y(c+), y'(c+))` back to the left trace:
///
/// ```text
/// y(c−)  = −(ρ14 y(c+) + ρ24 y'(c+)) / ρ34
/// y'(c−) =  (ρ13 y(c+) + ρ23 y'(c+)) / ρ34
/// ```
pub fn transfer_right_to_left(trace: StatePair, m: &Minors) -> StatePair {
    StatePair::new(
        -(m.r14 * trace.y + m.r24 * trace.dy) / m.r34,
        (m.r13 * trace.y + m.r23 * trace.dy) / m.r34,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Phi,
    Chi,
}

/// A solution on both sides, glued across the interface.
#[derive(Debug, Clone)]
pub struct FundamentalSolution {
    kind: Kind,
    lambda: f64,
    left: SolutionPiece,
    right: SolutionPiece,
}

impl FundamentalSolution {
    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn piece(&self, side: Side) -> &SolutionPiece {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    /// `(y(c−), y'(c−))`.
    pub fn trace_minus(&self) -> StatePair {
        self.left.last()
    }

    /// `(y(c+), y'(c+))`.
    pub fn trace_plus(&self) -> StatePair {
        self.right.first()
    }

    /// One-sided evaluation; `x = c` gives the trace from `side`.
    pub fn eval_on(&self, side: Side, x: f64) -> StatePair {
        self.piece(side).eval(x)
    }

    pub fn eval(&self, x: f64, problem: &Problem) -> Result<StatePair> {
        Ok(self.eval_on(problem.side_of(x)?, x))
    }

    /// `Γ₁`, `Γ₂` evaluated on the interface traces.
    pub fn transmission_residuals(&self, problem: &Problem) -> [f64; 2] {
        let (m, p) = (self.trace_minus(), self.trace_plus());
        problem.transmission().residuals(m.y, m.dy, p.y, p.dy)
    }

    /// Largest trace magnitude, the scale for transmission residuals.
    pub fn trace_scale(&self) -> f64 {
        self.trace_minus().norm().max(self.trace_plus().norm())
    }
}

/// `φ(·, λ)`: starts at `a` with `(sin α, −cos α)` and crosses to the right
/// side through [`transfer_left_to_right`].
pub fn build_phi(lambda: f64, problem: &Problem, tol: f64) -> Result<FundamentalSolution> {
    let (s, c) = problem.alpha().sin_cos();
    let left = integrate(Side::Left, lambda, Start::Outer, StatePair::new(s, -c), problem, tol)?;
    let crossing = transfer_left_to_right(left.last(), problem.minors());
    let right = integrate(Side::Right, lambda, Start::Interface, crossing, problem, tol)?;
    Ok(FundamentalSolution { kind: Kind::Phi, lambda, left, right })
}

/// `χ(·, λ)`: starts at `b` with `(−sin β, cos β)` and crosses to the left
/// side through [`transfer_right_to_left`].
pub fn build_chi(lambda: f64, problem: &Problem, tol: f64) -> Result<FundamentalSolution> {
    let (s, c) = problem.beta().sin_cos();
    let right = integrate(Side::Right, lambda, Start::Outer, StatePair::new(-s, c), problem, tol)?;
    let crossing = transfer_right_to_left(right.first(), problem.minors());
    let left = integrate(Side::Left, lambda, Start::Interface, crossing, problem, tol)?;
    Ok(FundamentalSolution { kind: Kind::Chi, lambda, left, right })
}

/// `φχ' − φ'χ` at `x`, on the side holding `x`.
pub fn wronskian(phi: &FundamentalSolution, chi: &FundamentalSolution, x: f64, problem: &Problem) -> Result<f64> {
    let side = problem.side_of(x)?;
    Ok(wronskian_on(phi, chi, side, x))
}

pub fn wronskian_on(phi: &FundamentalSolution, chi: &FundamentalSolution, side: Side, x: f64) -> f64 {
    phi.eval_on(side, x).wronskian(chi.eval_on(side, x))
}

/// Characteristic function value with both one-sided Wronskians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicValue {
    pub lambda: f64,
    /// `ρ34 w1`.
    pub omega: f64,
    pub w1: f64,
    pub w2: f64,
    /// `|ρ34 w1 − ρ12 w2|`.
    pub consistency_defect: f64,
}

/// `φ`, `χ` and `ω` at one `λ`.
#[derive(Debug, Clone)]
pub struct FundamentalPair {
    pub phi: FundamentalSolution,
    pub chi: FundamentalSolution,
    pub value: CharacteristicValue,
}

impl FundamentalPair {
    pub fn new(lambda: f64, problem: &Problem, tol: f64) -> Result<Self> {
        let phi = build_phi(lambda, problem, tol)?;
        let chi = build_chi(lambda, problem, tol)?;
        let value = characteristic_of(&phi, &chi, problem);
        Ok(Self { phi, chi, value })
    }

    pub fn lambda(&self) -> f64 {
        self.value.lambda
    }
}

fn characteristic_of(phi: &FundamentalSolution, chi: &FundamentalSolution, problem: &Problem) -> CharacteristicValue {
    let m = problem.minors();
    let mid = |side| {
        let (lo, hi) = problem.side_bounds(side);
        0.5 * (lo + hi)
    };
    let w1 = wronskian_on(phi, chi, Side::Left, mid(Side::Left));
    let w2 = wronskian_on(phi, chi, Side::Right, mid(Side::Right));
    let omega = m.r34 * w1;
    CharacteristicValue {
        lambda: phi.lambda(),
        omega,
        w1,
        w2,
        consistency_defect: (omega - m.r12 * w2).abs(),
    }
}

/// `ω(λ) = ρ34 w1(λ)`, with `w1`, `w2` taken at the side midpoints.
pub fn characteristic(lambda: f64, problem: &Problem, tol: f64) -> Result<CharacteristicValue> {
    Ok(FundamentalPair::new(lambda, problem, tol)?.value)
}

/// `ω` only.
pub fn omega(lambda: f64, problem: &Problem, tol: f64) -> Result<f64> {
    characteristic(lambda, problem, tol).map(|v| v.omega)
}

/// Largest `|ω|` over a small neighbourhood of `λ` (`λ ± 0.25`, `λ ± 0.5`),
/// used to judge whether `ω(λ)` is numerically zero.
pub fn local_scale(lambda: f64, problem: &Problem, tol: f64) -> Result<f64> {
    let mut scale: f64 = 0.0;
    for d in [-0.5, -0.25, 0.25, 0.5] {
        scale = scale.max(omega(lambda + d, problem, tol)?.abs());
    }
    Ok(scale)
}

/// Rejects `x = c` for callers that need a two-sided point.
pub(crate) fn require_off_interface(x: f64, problem: &Problem) -> Result<()> {
    if x == problem.c() {
        Err(Error::InterfacePoint { x })
    } else {
        Ok(())
    }
}
