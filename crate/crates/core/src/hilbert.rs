//! The weighted space `L²(a, c) ⊕ L²(c, b)` with inner product
//! `⟨y, z⟩ = ρ12 ∫_a^c y z + ρ34 ∫_c^b y z`, sampled on per-side grids.

use crate::error::{Error, Result};
use crate::greens::Resolvent;
use crate::problem::{Polynomial, Problem, Side};
use crate::quadrature::simpson_weights;

/// Default number of samples per side.
pub const DEFAULT_POINTS_PER_SIDE: usize = 2001;

/// Uniform samples of each closed side. The last left sample and the first
/// right sample both sit at `c` and stand for the one-sided limits `c−` and
/// `c+`; the interface itself is never a point of the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    left: Vec<f64>,
    right: Vec<f64>,
}

impl Grid {
    pub fn uniform(problem: &Problem, points_per_side: usize) -> Result<Self> {
        if points_per_side < 3 {
            return Err(Error::BadGrid(format!("need at least 3 points per side, got {points_per_side}")));
        }
        let side = |(lo, hi): (f64, f64)| -> Vec<f64> {
            let n = points_per_side - 1;
            (0..=n)
                .map(|k| if k == n { hi } else { lo + (hi - lo) * k as f64 / n as f64 })
                .collect()
        };
        Ok(Self { left: side(problem.side_bounds(Side::Left)), right: side(problem.side_bounds(Side::Right)) })
    }

    pub fn side(&self, side: Side) -> &[f64] {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    pub fn spacing(&self, side: Side) -> f64 {
        let x = self.side(side);
        (x[x.len() - 1] - x[0]) / (x.len() - 1) as f64
    }

    pub fn points_per_side(&self) -> usize {
        self.left.len()
    }
}

/// A function sampled on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    left: Vec<f64>,
    right: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, left: Vec<f64>, right: Vec<f64>) -> Result<Self> {
        if left.len() != grid.left.len() || right.len() != grid.right.len() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid, left, right })
    }

    pub fn from_fn(grid: &Grid, mut f: impl FnMut(Side, f64) -> f64) -> Self {
        let left = grid.left.iter().map(|&x| f(Side::Left, x)).collect();
        let right = grid.right.iter().map(|&x| f(Side::Right, x)).collect();
        Self { grid: grid.clone(), left, right }
    }

    /// Samples one polynomial per side.
    pub fn from_polynomials(grid: &Grid, left: &Polynomial, right: &Polynomial) -> Self {
        Self::from_fn(grid, |side, x| match side {
            Side::Left => left.eval(x),
            Side::Right => right.eval(x),
        })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::from_fn(grid, |_, _| 0.0)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self, side: Side) -> &[f64] {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    /// `(side, x, value)` for every sample, left side first.
    pub fn samples(&self) -> impl Iterator<Item = (Side, f64, f64)> + '_ {
        let left = self.grid.left.iter().zip(&self.left).map(|(&x, &v)| (Side::Left, x, v));
        let right = self.grid.right.iter().zip(&self.right).map(|(&x, &v)| (Side::Right, x, v));
        left.chain(right)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            left: self.left.iter().map(|&v| f(v)).collect(),
            right: self.right.iter().map(|&v| f(v)).collect(),
        }
    }

    /// `s·self + t·other`.
    pub fn combine(&self, s: f64, other: &GridFunction, t: f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let mix = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| s * x + t * y).collect();
        Ok(Self { grid: self.grid.clone(), left: mix(&self.left, &other.left), right: mix(&self.right, &other.right) })
    }

    pub fn max_abs(&self) -> f64 {
        self.left.iter().chain(&self.right).fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `ρ12 ∫_a^c y z + ρ34 ∫_c^b y z` by composite Simpson on each side.
pub fn inner_product(y: &GridFunction, z: &GridFunction, problem: &Problem) -> Result<f64> {
    if y.grid != z.grid {
        return Err(Error::GridMismatch);
    }
    let mut total = 0.0;
    for side in [Side::Left, Side::Right] {
        let w = simpson_weights(y.grid.side(side).len(), y.grid.spacing(side));
        let s: f64 = w.iter().zip(y.values(side)).zip(z.values(side)).map(|((w, a), b)| w * a * b).sum();
        total += problem.weight(side) * s;
    }
    Ok(total)
}

pub fn norm(y: &GridFunction, problem: &Problem) -> Result<f64> {
    Ok(inner_product(y, y, problem)?.max(0.0).sqrt())
}

/// Outcome of the symmetry check `⟨Ay, z⟩ = ⟨y, Az⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryCheck {
    pub defect: f64,
    pub ay_z: f64,
    pub y_az: f64,
    /// `‖y‖ + ‖z‖ + ‖f1‖ + ‖f2‖`.
    pub input_norms: f64,
}

/// Builds `y = R(λ0) f1`, `z = R(λ0) f2` through the resolvent, so both lie in
/// the operator domain and `Ay = λ0 y − f1`, `Az = λ0 z − f2` hold without
/// differentiation, then returns `|⟨Ay, z⟩ − ⟨y, Az⟩|`.
pub fn symmetry_defect(
    f1: &GridFunction,
    f2: &GridFunction,
    lambda0: f64,
    problem: &Problem,
    tol: f64,
) -> Result<SymmetryCheck> {
    let resolvent = Resolvent::new(lambda0, problem, tol)?;
    symmetry_defect_with(&resolvent, f1, f2)
}

/// [`symmetry_defect`] with a prepared resolvent.
pub fn symmetry_defect_with(resolvent: &Resolvent, f1: &GridFunction, f2: &GridFunction) -> Result<SymmetryCheck> {
    let problem = resolvent.problem();
    let lambda0 = resolvent.lambda();
    let y = resolvent.solve(f1)?.y;
    let z = resolvent.solve(f2)?.y;
    let ay = y.combine(lambda0, f1, -1.0)?;
    let az = z.combine(lambda0, f2, -1.0)?;
    let ay_z = inner_product(&ay, &z, problem)?;
    let y_az = inner_product(&y, &az, problem)?;
    let input_norms = norm(&y, problem)? + norm(&z, problem)? + norm(f1, problem)? + norm(f2, problem)?;
    Ok(SymmetryCheck { defect: (ay_z - y_az).abs(), ay_z, y_az, input_norms })
}
