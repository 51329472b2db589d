//! Green's function `G(x, ξ; λ) = φ(min)χ(max)/ω(λ)` and the resolvent
//! solution of `y'' + (λ − q) y = f` under the boundary and transmission
//! conditions.

use crate::error::{Error, Result};
use crate::hilbert::GridFunction;
use crate::ode::StatePair;
use crate::oracle::jacobi::jacobi_eigen;
use crate::problem::{Problem, Side};
use crate::quadrature::{cumulative_simpson, simpson_weights};
use crate::solutions::{local_scale, require_off_interface, FundamentalPair};

/// `|ω(λ)|` below this fraction of the local `ω` scale counts as singular.
pub const SINGULAR_THRESHOLD: f64 = 1e-8;

/// `φ`, `χ` and `ω` at a non-eigenvalue `λ`.
#[derive(Debug, Clone)]
pub struct Resolvent {
    problem: Problem,
    pair: FundamentalPair,
}

impl Resolvent {
    /// Fails with `SingularResolvent` when `|ω(λ)|` is below
    /// [`SINGULAR_THRESHOLD`] times the largest `|ω|` found at `λ ± 0.25`,
    /// `λ ± 0.5`.
    pub fn new(lambda: f64, problem: &Problem, tol: f64) -> Result<Self> {
        let pair = FundamentalPair::new(lambda, problem, tol)?;
        let omega = pair.value.omega;
        let threshold = SINGULAR_THRESHOLD * local_scale(lambda, problem, tol)?;
        if !(omega.abs() >= threshold) || omega == 0.0 {
            return Err(Error::SingularResolvent { lambda, omega: omega.abs(), threshold });
        }
        Ok(Self { problem: problem.clone(), pair })
    }

    pub fn lambda(&self) -> f64 {
        self.pair.lambda()
    }

    pub fn omega(&self) -> f64 {
        self.pair.value.omega
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn pair(&self) -> &FundamentalPair {
        &self.pair
    }

    /// Side-aware kernel. Points on the left precede points on the right;
    /// `x = c` on a side means the one-sided limit from that side.
    pub fn green_on(&self, x: (Side, f64), xi: (Side, f64)) -> f64 {
        let (lo, hi) = if precedes(xi, x) { (xi, x) } else { (x, xi) };
        self.pair.phi.eval_on(lo.0, lo.1).y * self.pair.chi.eval_on(hi.0, hi.1).y / self.omega()
    }

    pub fn green(&self, x: f64, xi: f64) -> Result<f64> {
        require_off_interface(x, &self.problem)?;
        require_off_interface(xi, &self.problem)?;
        let sx = self.problem.side_of(x)?;
        let sxi = self.problem.side_of(xi)?;
        Ok(self.green_on((sx, x), (sxi, xi)))
    }

    /// Solves `y'' + (λ − q) y = f` by the three-integral-per-side
    /// representation, with running integrals split at each sample.
    pub fn solve(&self, f: &GridFunction) -> Result<InhomogeneousSolution> {
        let grid = f.grid();
        let m = self.problem.minors();
        let omega = self.omega();
        let (phi, chi) = (&self.pair.phi, &self.pair.chi);
        let sample = |side: Side| -> (Vec<StatePair>, Vec<StatePair>) {
            let xs = grid.side(side);
            (xs.iter().map(|&x| phi.eval_on(side, x)).collect(), xs.iter().map(|&x| chi.eval_on(side, x)).collect())
        };
        let (phi_l, chi_l) = sample(Side::Left);
        let (phi_r, chi_r) = sample(Side::Right);
        let (fl, fr) = (f.values(Side::Left), f.values(Side::Right));
        let (hl, hr) = (grid.spacing(Side::Left), grid.spacing(Side::Right));

        let running = |s: &[StatePair], f: &[f64], h: f64| {
            let prod: Vec<f64> = s.iter().zip(f).map(|(s, f)| s.y * f).collect();
            cumulative_simpson(&prod, h)
        };
        let phi_f_l = running(&phi_l, fl, hl);
        let chi_f_l = running(&chi_l, fl, hl);
        let phi_f_r = running(&phi_r, fr, hr);
        let chi_f_r = running(&chi_r, fr, hr);
        let total = |v: &[f64]| v[v.len() - 1];

        // y = χ(x)·P(x) + φ(x)·Q(x); y' takes the same form with derivatives.
        let mut y = (Vec::with_capacity(fl.len()), Vec::with_capacity(fr.len()));
        let mut dy = (Vec::with_capacity(fl.len()), Vec::with_capacity(fr.len()));
        let left_cross = m.r12 / omega * total(&chi_f_r);
        for k in 0..fl.len() {
            let p = m.r34 / omega * phi_f_l[k];
            let q = m.r34 / omega * (total(&chi_f_l) - chi_f_l[k]) + left_cross;
            y.0.push(chi_l[k].y * p + phi_l[k].y * q);
            dy.0.push(chi_l[k].dy * p + phi_l[k].dy * q);
        }
        let right_cross = m.r34 / omega * total(&phi_f_l);
        for k in 0..fr.len() {
            let p = m.r12 / omega * phi_f_r[k] + right_cross;
            let q = m.r12 / omega * (total(&chi_f_r) - chi_f_r[k]);
            y.1.push(chi_r[k].y * p + phi_r[k].y * q);
            dy.1.push(chi_r[k].dy * p + phi_r[k].dy * q);
        }
        Ok(InhomogeneousSolution {
            lambda: self.lambda(),
            y: GridFunction::new(grid.clone(), y.0, y.1)?,
            dy: GridFunction::new(grid.clone(), dy.0, dy.1)?,
        })
    }

    /// Same solution by direct quadrature of the kernel,
    /// `y(x) = ρ12 ∫_a^c G(x, ξ) f(ξ) dξ + ρ34 ∫_c^b G(x, ξ) f(ξ) dξ`,
    /// splitting each side's rule at the kernel's kink `ξ = x`.
    pub fn solve_by_kernel(&self, f: &GridFunction) -> Result<GridFunction> {
        let grid = f.grid();
        let values = |side: Side| -> Vec<(f64, f64)> {
            grid.side(side).iter().map(|&x| (self.pair.phi.eval_on(side, x).y, self.pair.chi.eval_on(side, x).y)).collect()
        };
        let samples = [values(Side::Left), values(Side::Right)];
        let sides = [Side::Left, Side::Right];
        let omega = self.omega();

        let mut out = [Vec::new(), Vec::new()];
        for si in 0..2 {
            for (k, &(phi_x, chi_x)) in samples[si].iter().enumerate() {
                let mut acc = 0.0;
                for (sj, &src) in sides.iter().enumerate() {
                    let h = grid.spacing(src);
                    let fv = f.values(src);
                    let s = &samples[sj];
                    let weight = self.problem.weight(src);
                    let integral = if sj < si {
                        // every ξ precedes x: φ(ξ)χ(x)
                        chi_x * dot(&simpson_weights(s.len(), h), s.iter().map(|v| v.0), fv)
                    } else if sj > si {
                        phi_x * dot(&simpson_weights(s.len(), h), s.iter().map(|v| v.1), fv)
                    } else {
                        let before = simpson_weights(k + 1, h);
                        let after = simpson_weights(s.len() - k, h);
                        chi_x * dot(&before, s[..=k].iter().map(|v| v.0), &fv[..=k])
                            + phi_x * dot(&after, s[k..].iter().map(|v| v.1), &fv[k..])
                    };
                    acc += weight * integral;
                }
                out[si].push(acc / omega);
            }
        }
        let [left, right] = out;
        GridFunction::new(grid.clone(), left, right)
    }
}

fn dot(w: &[f64], a: impl Iterator<Item = f64>, b: &[f64]) -> f64 {
    w.iter().zip(a).zip(b).map(|((w, a), b)| w * a * b).sum()
}

fn precedes(a: (Side, f64), b: (Side, f64)) -> bool {
    match (a.0, b.0) {
        (Side::Left, Side::Right) => true,
        (Side::Right, Side::Left) => false,
        _ => a.1 <= b.1,
    }
}

/// `G(x, ξ; λ)`.
pub fn green_eval(x: f64, xi: f64, lambda: f64, problem: &Problem, tol: f64) -> Result<f64> {
    require_off_interface(x, problem)?;
    require_off_interface(xi, problem)?;
    Resolvent::new(lambda, problem, tol)?.green(x, xi)
}

/// Resolvent solution sampled on `f`'s grid, with its derivative.
#[derive(Debug, Clone)]
pub struct InhomogeneousSolution {
    pub lambda: f64,
    pub y: GridFunction,
    pub dy: GridFunction,
}

impl InhomogeneousSolution {
    /// `[Γ₁, Γ₂, Γ₃, Γ₄]` on the sampled traces.
    pub fn condition_residuals(&self, problem: &Problem) -> [f64; 4] {
        let (yl, dyl) = (self.y.values(Side::Left), self.dy.values(Side::Left));
        let (yr, dyr) = (self.y.values(Side::Right), self.dy.values(Side::Right));
        let n = yl.len() - 1;
        let [g1, g2] = problem.transmission().residuals(yl[n], dyl[n], yr[0], dyr[0]);
        let (sa, ca) = problem.alpha().sin_cos();
        let (sb, cb) = problem.beta().sin_cos();
        let m = yr.len() - 1;
        [g1, g2, ca * yl[0] + sa * dyl[0], cb * yr[m] + sb * dyr[m]]
    }

    /// Weighted norm of `y'' + (λ − q) y − f`, with `y''` from fourth-order
    /// differences of the sampled `y'`.
    pub fn ode_residual_norm(&self, f: &GridFunction, problem: &Problem) -> Result<f64> {
        if f.grid() != self.y.grid() {
            return Err(Error::GridMismatch);
        }
        let grid = self.y.grid();
        let mut sides = Vec::new();
        for side in [Side::Left, Side::Right] {
            let d2 = derivative4(self.dy.values(side), grid.spacing(side));
            let q = problem.potential().side(side);
            let r: Vec<f64> = grid
                .side(side)
                .iter()
                .zip(&d2)
                .zip(self.y.values(side))
                .zip(f.values(side))
                .map(|(((&x, d2), y), f)| d2 + (self.lambda - q.eval(x)) * y - f)
                .collect();
            sides.push(r);
        }
        let r = GridFunction::new(grid.clone(), sides.remove(0), sides.remove(0))?;
        crate::hilbert::norm(&r, problem)
    }
}

/// Fourth-order first derivative of uniform samples (one-sided at the ends).
fn derivative4(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    assert!(n >= 5, "need at least 5 samples");
    let mut d = vec![0.0; n];
    d[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * h);
    d[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / (12.0 * h);
    for i in 2..n - 2 {
        d[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * h);
    }
    let m = n - 1;
    d[m - 1] = (3.0 * f[m] + 10.0 * f[m - 1] - 18.0 * f[m - 2] + 6.0 * f[m - 3] - f[m - 4]) / (12.0 * h);
    d[m] = (25.0 * f[m] - 48.0 * f[m - 1] + 36.0 * f[m - 2] - 16.0 * f[m - 3] + 3.0 * f[m - 4]) / (12.0 * h);
    d
}

/// Solves `y'' + (λ − q) y = f` with all four conditions.
pub fn solve_inhomogeneous(f: &GridFunction, lambda: f64, problem: &Problem, tol: f64) -> Result<InhomogeneousSolution> {
    Resolvent::new(lambda, problem, tol)?.solve(f)
}

/// Tabulated kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenGrid {
    pub lambda: f64,
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
    /// `values[i][j] = G(x[i], xi[j])`.
    pub values: Vec<Vec<f64>>,
}

impl GreenGrid {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |G(x_i, x_j) − G(x_j, x_i)| / max |G|`; `None` unless the two
    /// abscissa lists coincide.
    pub fn symmetry_defect(&self) -> Option<f64> {
        if self.x != self.xi {
            return None;
        }
        let n = self.x.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..i {
                worst = worst.max((self.values[i][j] - self.values[j][i]).abs());
            }
        }
        let scale = self.max_abs();
        Some(if scale > 0.0 { worst / scale } else { worst })
    }
}

/// Midpoints of `n` equal cells on each side; never touches `a`, `b` or `c`.
pub fn midpoint_abscissae(problem: &Problem, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::BadGrid("grid needs at least one point per side".into()));
    }
    let mut xs = Vec::with_capacity(2 * n);
    for side in [Side::Left, Side::Right] {
        let (lo, hi) = problem.side_bounds(side);
        xs.extend((0..n).map(|k| lo + (hi - lo) * (k as f64 + 0.5) / n as f64));
    }
    Ok(xs)
}

/// Kernel on `nx` × `nxi` midpoints per side (so `2nx` × `2nxi` entries).
pub fn green_grid(lambda: f64, problem: &Problem, nx: usize, nxi: usize, tol: f64) -> Result<GreenGrid> {
    let x = midpoint_abscissae(problem, nx)?;
    let xi = midpoint_abscissae(problem, nxi)?;
    green_grid_on(lambda, problem, &x, &xi, tol)
}

/// Kernel on explicit abscissae, none of which may be `c`.
pub fn green_grid_on(lambda: f64, problem: &Problem, x: &[f64], xi: &[f64], tol: f64) -> Result<GreenGrid> {
    if x.is_empty() || xi.is_empty() {
        return Err(Error::BadGrid("empty abscissa list".into()));
    }
    let tag = |v: &[f64]| -> Result<Vec<(Side, f64)>> { v.iter().map(|&p| Ok((problem.side_of(p)?, p))).collect() };
    let (tx, txi) = (tag(x)?, tag(xi)?);
    let resolvent = Resolvent::new(lambda, problem, tol)?;
    let values = tx.iter().map(|&px| txi.iter().map(|&pxi| resolvent.green_on(px, pxi)).collect()).collect();
    Ok(GreenGrid { lambda, x: x.to_vec(), xi: xi.to_vec(), values })
}

/// Singular values of the weighted kernel `√w_i G(x_i, x_j) √w_j` on
/// `n_per_side` midpoints per side, largest first. The kernel is symmetric,
/// so these are the absolute eigenvalues.
pub fn kernel_singular_values(lambda: f64, problem: &Problem, n_per_side: usize, tol: f64) -> Result<Vec<f64>> {
    let x = midpoint_abscissae(problem, n_per_side)?;
    let g = green_grid_on(lambda, problem, &x, &x, tol)?;
    let w: Vec<f64> = x
        .iter()
        .map(|&p| {
            let side = problem.side_of(p).expect("midpoints avoid the interface");
            let (lo, hi) = problem.side_bounds(side);
            (problem.weight(side) * (hi - lo) / n_per_side as f64).sqrt()
        })
        .collect();
    let n = x.len();
    let mut s = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            // symmetrize away the dense-output noise in G
            s[i][j] = w[i] * 0.5 * (g.values[i][j] + g.values[j][i]) * w[j];
        }
    }
    let eig = jacobi_eigen(s)?;
    let mut sv: Vec<f64> = eig.values.iter().map(|v| v.abs()).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}
