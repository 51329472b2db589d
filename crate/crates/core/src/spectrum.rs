//! Eigenvalues as zeros of `ω(λ)`, and normalized eigenfunctions.

use std::thread;

use crate::error::{Error, Result};
use crate::hilbert::{inner_product, Grid, GridFunction};
use crate::problem::{Problem, Side};
use crate::solutions::{build_phi, FundamentalPair};

/// Scan density in points per unit of `√λ`.
pub const POINTS_PER_SQRT_UNIT: f64 = 40.0;

pub const MAX_REFINE_ITERATIONS: usize = 200;

/// `|ω|` below this fraction of its neighbours without a sign change marks a
/// suspected tangential zero.
pub const SUSPECT_THRESHOLD: f64 = 1e-12;

/// `|ω(λ)|` at an accepted eigenvalue stays below this fraction of the
/// local `ω` scale.
pub const RESIDUAL_THRESHOLD: f64 = 1e-9;

/// A sign change of `ω` between two scan points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub omega_lo: f64,
    pub omega_hi: f64,
}

impl Bracket {
    pub fn width(&self) -> f64 {
        self.lambda_hi - self.lambda_lo
    }
}

/// Brackets plus grid points where `|ω|` nearly vanished without a sign
/// change.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanReport {
    pub brackets: Vec<Bracket>,
    pub suspected: Vec<f64>,
}

fn signed_sqrt(l: f64) -> f64 {
    l.signum() * l.abs().sqrt()
}

fn signed_square(s: f64) -> f64 {
    s * s.abs()
}

/// Scan size for `[λmin, λmax]` at [`POINTS_PER_SQRT_UNIT`].
pub fn default_grid_size(lambda_min: f64, lambda_max: f64) -> usize {
    let span = signed_sqrt(lambda_max) - signed_sqrt(lambda_min);
    ((POINTS_PER_SQRT_UNIT * span).ceil() as usize + 1).max(2)
}

fn check_range(lambda_min: f64, lambda_max: f64) -> Result<()> {
    if !(lambda_min.is_finite() && lambda_max.is_finite()) {
        return Err(Error::BadRange(format!("non-finite range [{lambda_min}, {lambda_max})")));
    }
    if lambda_min >= lambda_max {
        return Err(Error::BadRange(format!("empty range [{lambda_min}, {lambda_max})")));
    }
    Ok(())
}

/// `ω` at every point, evaluated on a few threads. Results do not depend
/// on the schedule.
fn omega_values(lambdas: &[f64], problem: &Problem, tol: f64) -> Result<Vec<f64>> {
    let workers = thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(8);
    let chunk = lambdas.len().div_ceil(workers).max(1);
    let parts: Vec<Result<Vec<f64>>> = thread::scope(|s| {
        let handles: Vec<_> = lambdas
            .chunks(chunk)
            .map(|part| s.spawn(move || part.iter().map(|&l| crate::solutions::omega(l, problem, tol)).collect()))
            .collect();
        handles.into_iter().map(|h| h.join().expect("scan worker panicked")).collect()
    });
    let mut out = Vec::with_capacity(lambdas.len());
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

/// One bracket per sign change of `ω` on `grid_size` points uniform in
/// signed `√λ` over `[λmin, λmax]`.
pub fn scan(problem: &Problem, lambda_min: f64, lambda_max: f64, grid_size: usize, tol: f64) -> Result<ScanReport> {
    check_range(lambda_min, lambda_max)?;
    if grid_size < 2 {
        return Err(Error::BadRange(format!("scan needs at least 2 points, got {grid_size}")));
    }
    let (s0, s1) = (signed_sqrt(lambda_min), signed_sqrt(lambda_max));
    let lambdas: Vec<f64> = (0..grid_size)
        .map(|k| match k {
            0 => lambda_min,
            _ if k == grid_size - 1 => lambda_max,
            _ => signed_square(s0 + (s1 - s0) * k as f64 / (grid_size - 1) as f64),
        })
        .collect();
    let omegas = omega_values(&lambdas, problem, tol)?;
    Ok(report(&lambdas, &omegas))
}

fn report(lambdas: &[f64], omegas: &[f64]) -> ScanReport {
    let mut brackets = Vec::new();
    for k in 0..lambdas.len() - 1 {
        let (w0, w1) = (omegas[k], omegas[k + 1]);
        // an exact zero on the grid closes the bracket on its left
        if w0 * w1 < 0.0 || (w1 == 0.0 && w0 != 0.0) {
            brackets.push(Bracket { lambda_lo: lambdas[k], lambda_hi: lambdas[k + 1], omega_lo: w0, omega_hi: w1 });
        }
    }
    let mut suspected = Vec::new();
    for k in 1..lambdas.len().saturating_sub(1) {
        let (wl, w, wr) = (omegas[k - 1], omegas[k], omegas[k + 1]);
        let local = wl.abs().max(wr.abs());
        if w.abs() < SUSPECT_THRESHOLD * local && wl * w > 0.0 && w * wr > 0.0 {
            suspected.push(lambdas[k]);
        }
    }
    ScanReport { brackets, suspected }
}

/// Brent's method on `ω` inside `bracket`, to a width of `tol (1 + |λ|)`.
/// The iterate never leaves the current bracket.
pub fn refine(bracket: &Bracket, problem: &Problem, tol: f64) -> Result<f64> {
    let f = |l: f64| crate::solutions::omega(l, problem, tol);
    let (mut a, mut b) = (bracket.lambda_lo, bracket.lambda_hi);
    let (mut fa, mut fb) = (bracket.omega_lo, bracket.omega_hi);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa * fb > 0.0 {
        return Err(Error::BadRange(format!("[{a}, {b}] does not bracket a sign change")));
    }
    let (mut c, mut fc) = (b, fb);
    let (mut d, mut e) = (b - a, b - a);
    for _ in 0..MAX_REFINE_ITERATIONS {
        if fb * fc > 0.0 {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = f64::EPSILON * b.abs() + 0.5 * tol * (1.0 + b.abs());
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b)?;
    }
    Err(Error::NoConvergence { iterations: MAX_REFINE_ITERATIONS })
}

/// A refined eigenvalue with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenvalue {
    /// 1-based, ascending within the scanned range.
    pub index: usize,
    pub lambda: f64,
    /// `|ω(λ)|`.
    pub residual: f64,
    pub bracket: Bracket,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<Eigenvalue>,
    pub suspected: Vec<f64>,
}

/// All eigenvalues in the half-open range `[λmin, λmax)`.
///
/// The scan starts one grid step below `λmin` so a zero sitting exactly at
/// `λmin` is still bracketed; zeros within rounding of `λmax` are dropped.
pub fn eigenvalues(problem: &Problem, lambda_min: f64, lambda_max: f64, grid_size: Option<usize>, tol: f64) -> Result<Spectrum> {
    check_range(lambda_min, lambda_max)?;
    let n = grid_size.unwrap_or_else(|| default_grid_size(lambda_min, lambda_max));
    let (s0, s1) = (signed_sqrt(lambda_min), signed_sqrt(lambda_max));
    let step = (s1 - s0) / (n.max(2) - 1) as f64;
    let start = signed_square(s0 - step);
    let report = scan(problem, start, lambda_max, n.max(2) + 1, tol)?;

    let lo_cut = lambda_min - 1e-9 * (1.0 + lambda_min.abs());
    let hi_cut = lambda_max - 1e-9 * (1.0 + lambda_max.abs());
    let mut found = Vec::new();
    for bracket in &report.brackets {
        let lambda = refine(bracket, problem, tol)?;
        if lambda < lo_cut || lambda >= hi_cut {
            continue;
        }
        let residual = crate::solutions::omega(lambda, problem, tol)?.abs();
        found.push(Eigenvalue { index: found.len() + 1, lambda, residual, bracket: *bracket });
    }
    let suspected = report.suspected.into_iter().filter(|&l| l >= lambda_min && l < lambda_max).collect();
    Ok(Spectrum { eigenvalues: found, suspected })
}

/// A `λmin` below the ground state: the lowest eigenvalue of a coarse
/// finite-difference model minus a margin, capped at 0.
pub fn lower_scan_bound(problem: &Problem) -> Result<f64> {
    let lowest = crate::oracle::FdSystem::new(problem, 200)?.lowest_eigenvalues(1)[0];
    Ok((lowest - 1.0 - 0.1 * lowest.abs()).floor().min(0.0))
}

/// Normalized eigenfunction on a reporting grid.
#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub index: Option<usize>,
    pub lambda: f64,
    pub y: GridFunction,
    pub dy: GridFunction,
    /// Weighted norm² of `φ(·, λ)` before normalization.
    pub norm_squared: f64,
    /// `|ω(λ)|`.
    pub residual: f64,
    /// `|φ χ' − φ' χ|(c−)` relative to the trace norms.
    pub proportionality_defect: f64,
}

impl Eigenpair {
    /// `Γ₁`, `Γ₂` on the interface samples.
    pub fn transmission_residuals(&self, problem: &Problem) -> [f64; 2] {
        let (yl, dyl) = (self.y.values(Side::Left), self.dy.values(Side::Left));
        let (yr, dyr) = (self.y.values(Side::Right), self.dy.values(Side::Right));
        let n = yl.len() - 1;
        problem.transmission().residuals(yl[n], dyl[n], yr[0], dyr[0])
    }
}

/// `φ(·, λ)` divided by its weighted norm, sign fixed so the first
/// non-negligible left sample is positive.
///
/// Fails with `NotAnEigenvalue` unless `|ω(λ)|` is below
/// [`RESIDUAL_THRESHOLD`] times the local `ω` scale.
pub fn eigenfunction(lambda: f64, problem: &Problem, grid: &Grid, tol: f64) -> Result<Eigenpair> {
    let pair = FundamentalPair::new(lambda, problem, tol)?;
    let residual = pair.value.omega.abs();
    let threshold = RESIDUAL_THRESHOLD * crate::solutions::local_scale(lambda, problem, tol)?;
    if residual > threshold {
        return Err(Error::NotAnEigenvalue { lambda, residual, threshold });
    }
    let (pm, cm) = (pair.phi.trace_minus(), pair.chi.trace_minus());
    let proportionality_defect = pm.wronskian(cm).abs() / (pm.norm() * cm.norm());

    let phi = build_phi(lambda, problem, tol)?;
    let y = GridFunction::from_fn(grid, |side, x| phi.eval_on(side, x).y);
    let dy = GridFunction::from_fn(grid, |side, x| phi.eval_on(side, x).dy);
    let norm_squared = inner_product(&y, &y, problem)?;
    let peak = y.max_abs();
    let first = y.values(Side::Left).iter().chain(y.values(Side::Right)).find(|v| v.abs() > 1e-8 * peak).copied().unwrap_or(1.0);
    let s = first.signum() / norm_squared.sqrt();
    Ok(Eigenpair {
        index: None,
        lambda,
        y: y.map(|v| v * s),
        dy: dy.map(|v| v * s),
        norm_squared,
        residual,
        proportionality_defect,
    })
}

/// Eigenpairs for every eigenvalue in `[λmin, λmax)`.
pub fn eigenpairs(problem: &Problem, lambda_min: f64, lambda_max: f64, grid: &Grid, tol: f64) -> Result<Vec<Eigenpair>> {
    eigenvalues(problem, lambda_min, lambda_max, None, tol)?
        .eigenvalues
        .iter()
        .map(|ev| {
            let mut e = eigenfunction(ev.lambda, problem, grid, tol)?;
            e.index = Some(ev.index);
            Ok(e)
        })
        .collect()
}

/// `|⟨e1, e2⟩|` in the weighted product.
pub fn orthogonality_defect(e1: &Eigenpair, e2: &Eigenpair, problem: &Problem) -> Result<f64> {
    Ok(inner_product(&e1.y, &e2.y, problem)?.abs())
}
