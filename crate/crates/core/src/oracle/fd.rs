//! Finite-difference discretization of the transmission problem.
//!
//! Second-order central differences on a uniform grid per side. Robin ends
//! and the interface use reflected ghost values, which keeps the stencil
//! second order and makes the stiffness matrix symmetric under the weighted
//! discrete product. The generalized problem `K u = λ D u` with positive
//! diagonal `D` is solved as the symmetric tridiagonal `D^{-1/2} K D^{-1/2}`.

use crate::error::{Error, Result};
use crate::oracle::jacobi::jacobi_eigen;
use crate::problem::{Problem, Side};

pub const MIN_NODES: usize = 50;

/// Assembled system on `n` nodes per side (endpoints and interface
/// included). Dirichlet nodes are dropped; when the interface forces
/// `y(c+) = m11 y(c−)` the right interface node is folded into the left one.
#[derive(Debug, Clone)]
pub struct FdSystem {
    nodes: [Vec<f64>; 2],
    spacing: [f64; 2],
    /// Unknown index to `(side, node)`.
    unknowns: Vec<(Side, usize)>,
    /// `Some(m11)` when the right interface node equals `m11` times the left.
    folded: Option<f64>,
    stiffness_diag: Vec<f64>,
    stiffness_off: Vec<f64>,
    mass: Vec<f64>,
}

fn side_index(side: Side) -> usize {
    match side {
        Side::Left => 0,
        Side::Right => 1,
    }
}

/// `cot θ`, or `None` for a Dirichlet condition.
fn robin_coefficient(theta: f64) -> Option<f64> {
    let (s, c) = theta.sin_cos();
    if s.abs() <= 1e-12 * c.abs() {
        None
    } else {
        Some(c / s)
    }
}

impl FdSystem {
    pub fn new(problem: &Problem, n: usize) -> Result<Self> {
        if n < MIN_NODES {
            return Err(Error::BadGrid(format!("finite differences need at least {MIN_NODES} nodes per side, got {n}")));
        }
        let mut nodes = [Vec::new(), Vec::new()];
        let mut spacing = [0.0; 2];
        for side in [Side::Left, Side::Right] {
            let (lo, hi) = problem.side_bounds(side);
            let h = (hi - lo) / (n - 1) as f64;
            let s = side_index(side);
            spacing[s] = h;
            nodes[s] = (0..n).map(|i| if i == n - 1 { hi } else { lo + h * i as f64 }).collect();
        }
        let (hl, hr) = (spacing[0], spacing[1]);
        let (wl, wr) = (problem.weight(Side::Left), problem.weight(Side::Right));
        let ql: Vec<f64> = nodes[0].iter().map(|&x| problem.potential().left.eval(x)).collect();
        let qr: Vec<f64> = nodes[1].iter().map(|&x| problem.potential().right.eval(x)).collect();

        // (y, y') at c+ equals M (y, y') at c−, from Cramer's rule on the
        // two transmission rows.
        let m = problem.minors();
        let (m11, m12, m21, m22) = (m.r23 / m.r34, m.r13 / m.r34, -m.r24 / m.r34, -m.r14 / m.r34);
        let fold = m12.abs() <= 1e-14 * (m11.abs() + m22.abs());

        let kappa_a = robin_coefficient(problem.alpha());
        let kappa_b = robin_coefficient(problem.beta());
        let last = n - 1;

        let mut unknowns = Vec::new();
        let mut diag = Vec::new();
        let mut mass = Vec::new();
        let mut off = Vec::new();

        let first_left = if kappa_a.is_some() { 0 } else { 1 };
        for i in first_left..=last {
            let (d, w) = if i == 0 {
                let k = kappa_a.expect("Robin end");
                (wl * ((1.0 - hl * k) / hl + ql[0] * hl / 2.0), wl * hl / 2.0)
            } else if i < last {
                (wl * (2.0 / hl + ql[i] * hl), wl * hl)
            } else if fold {
                let d = wr * m11 * (m22 / hl + m22 * ql[last] * hl / 2.0 + m11 / hr + m21 + m11 * qr[0] * hr / 2.0);
                (d, (wl * hl + wr * m11 * m11 * hr) / 2.0)
            } else {
                (wl * (1.0 / hl + m11 / m12 + ql[last] * hl / 2.0), wl * hl / 2.0)
            };
            if i > first_left {
                off.push(-wl / hl);
            }
            unknowns.push((Side::Left, i));
            diag.push(d);
            mass.push(w);
        }

        let first_right = if fold { 1 } else { 0 };
        let last_right = if kappa_b.is_some() { last } else { last - 1 };
        for j in first_right..=last_right {
            let (d, w) = if j == 0 {
                (wr * (1.0 / hr + m22 / m12 + qr[0] * hr / 2.0), wr * hr / 2.0)
            } else if j < last {
                (wr * (2.0 / hr + qr[j] * hr), wr * hr)
            } else {
                let k = kappa_b.expect("Robin end");
                (wr * ((1.0 + hr * k) / hr + qr[last] * hr / 2.0), wr * hr / 2.0)
            };
            let coupling = if j == 0 {
                // equals −wr·det/m12 since wl = wr·det
                -wl / m12
            } else if j == 1 && fold {
                -wr * m11 / hr
            } else {
                -wr / hr
            };
            off.push(coupling);
            unknowns.push((Side::Right, j));
            diag.push(d);
            mass.push(w);
        }

        Ok(Self {
            nodes,
            spacing,
            unknowns,
            folded: fold.then_some(m11),
            stiffness_diag: diag,
            stiffness_off: off,
            mass,
        })
    }

    /// Number of unknowns after eliminations.
    pub fn len(&self) -> usize {
        self.unknowns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unknowns.is_empty()
    }

    pub fn nodes(&self, side: Side) -> &[f64] {
        &self.nodes[side_index(side)]
    }

    pub fn spacing(&self, side: Side) -> f64 {
        self.spacing[side_index(side)]
    }

    /// Diagonal of the weighted discrete inner product on the unknowns.
    pub fn weights(&self) -> &[f64] {
        &self.mass
    }

    /// `(diagonal, off-diagonal)` of `D^{-1/2} K D^{-1/2}`.
    pub fn symmetric_tridiagonal(&self) -> (Vec<f64>, Vec<f64>) {
        let d: Vec<f64> = self.stiffness_diag.iter().zip(&self.mass).map(|(k, m)| k / m).collect();
        let e: Vec<f64> = (0..self.len() - 1)
            .map(|i| self.stiffness_off[i] / (self.mass[i] * self.mass[i + 1]).sqrt())
            .collect();
        (d, e)
    }

    /// Dense copy of the symmetric tridiagonal matrix.
    pub fn dense(&self) -> Vec<Vec<f64>> {
        let (d, e) = self.symmetric_tridiagonal();
        let n = d.len();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            a[i][i] = d[i];
            if i + 1 < n {
                a[i][i + 1] = e[i];
                a[i + 1][i] = e[i];
            }
        }
        a
    }

    /// Nodal values per side of the unknown vector `u` (in the original,
    /// unsymmetrized variables), with eliminated nodes filled in.
    pub fn expand(&self, u: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.nodes[0].len();
        let mut out = [vec![0.0; n], vec![0.0; n]];
        for (&(side, i), &v) in self.unknowns.iter().zip(u) {
            out[side_index(side)][i] = v;
        }
        if let Some(m11) = self.folded {
            out[1][0] = m11 * out[0][n - 1];
        }
        let [l, r] = out;
        (l, r)
    }

    /// `Γ₁`, `Γ₂` of nodal samples, with `y'(c∓)` from three-point one-sided
    /// differences.
    pub fn interface_residuals(&self, problem: &Problem, left: &[f64], right: &[f64]) -> [f64; 2] {
        let n = left.len() - 1;
        let (hl, hr) = (self.spacing[0], self.spacing[1]);
        let dm = (3.0 * left[n] - 4.0 * left[n - 1] + left[n - 2]) / (2.0 * hl);
        let dp = (-3.0 * right[0] + 4.0 * right[1] - right[2]) / (2.0 * hr);
        problem.transmission().residuals(left[n], dm, right[0], dp)
    }

    /// Number of eigenvalues strictly below `x`.
    fn count_below(d: &[f64], e: &[f64], x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..d.len() {
            let coupling = if i == 0 { 0.0 } else { e[i - 1] * e[i - 1] / q };
            q = d[i] - x - coupling;
            if q == 0.0 {
                q = -f64::EPSILON * (d[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `count` smallest eigenvalues by Sturm-sequence bisection.
    pub fn lowest_eigenvalues(&self, count: usize) -> Vec<f64> {
        let (d, e) = self.symmetric_tridiagonal();
        let n = d.len();
        let radius = |i: usize| {
            let l = if i > 0 { e[i - 1].abs() } else { 0.0 };
            let r = if i + 1 < n { e[i].abs() } else { 0.0 };
            l + r
        };
        let lo0 = (0..n).map(|i| d[i] - radius(i)).fold(f64::INFINITY, f64::min);
        let hi0 = (0..n).map(|i| d[i] + radius(i)).fold(f64::NEG_INFINITY, f64::max);
        let mut values = Vec::with_capacity(count.min(n));
        let mut lo_start = lo0;
        for k in 0..count.min(n) {
            let (mut lo, mut hi) = (lo_start, hi0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if Self::count_below(&d, &e, mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let v = 0.5 * (lo + hi);
            values.push(v);
            lo_start = lo;
        }
        values
    }
}

/// Lowest `n / 10` eigenvalues of the finite-difference problem on `n`
/// nodes per side, ascending.
pub fn fd_eigenvalues(problem: &Problem, n: usize) -> Result<Vec<f64>> {
    let system = FdSystem::new(problem, n)?;
    Ok(system.lowest_eigenvalues((n / 10).max(1)))
}

/// Finite-difference eigenpair with nodal values normalized in the weighted
/// discrete product.
#[derive(Debug, Clone)]
pub struct FdEigenpair {
    pub lambda: f64,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

/// All eigenpairs by dense Jacobi rotations; meant for small `n`.
pub fn fd_eigenpairs_dense(problem: &Problem, n: usize) -> Result<(FdSystem, Vec<FdEigenpair>)> {
    let system = FdSystem::new(problem, n)?;
    let eig = jacobi_eigen(system.dense())?;
    let pairs = eig
        .values
        .iter()
        .zip(&eig.vectors)
        .map(|(&lambda, s)| {
            let u: Vec<f64> = s.iter().zip(system.weights()).map(|(s, w)| s / w.sqrt()).collect();
            let (left, right) = system.expand(&u);
            FdEigenpair { lambda, left, right }
        })
        .collect();
    Ok((system, pairs))
}

/// `(e_coarse / e_fine)` for errors against a reference value; 4 for a
/// second-order method under grid halving.
pub fn richardson_ratio(coarse: f64, fine: f64, reference: f64) -> f64 {
    (coarse - reference) / (fine - reference)
}
