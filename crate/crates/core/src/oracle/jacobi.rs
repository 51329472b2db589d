//! Cyclic Jacobi rotations for dense symmetric matrices.

use crate::error::{Error, Result};

pub const MAX_SWEEPS: usize = 100;

/// Eigenvalues in ascending order; `vectors[k]` is the unit eigenvector of
/// `values[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub sweeps: usize,
}

/// Diagonalizes a symmetric matrix given by rows. Only the upper triangle is
/// read. Fails after [`MAX_SWEEPS`] sweeps.
pub fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> Result<SymmetricEigen> {
    let n = a.len();
    assert!(a.iter().all(|r| r.len() == n), "matrix must be square");
    for i in 0..n {
        for j in 0..i {
            a[i][j] = a[j][i];
        }
    }
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let total: f64 = a.iter().flatten().map(|x| x * x).sum();
    let target = (f64::EPSILON * f64::EPSILON) * total;

    let mut sweeps = 0;
    loop {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off <= target || off == 0.0 {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::JacobiNoConvergence { sweeps });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                // tan of the rotation angle, smaller root
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    Ok(SymmetricEigen {
        values: order.iter().map(|&k| a[k][k]).collect(),
        vectors: order.iter().map(|&k| (0..n).map(|i| v[i][k]).collect()).collect(),
        sweeps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rotated_diagonal(d: &[f64]) -> Vec<Vec<f64>> {
        // Q = product of plane rotations with fixed angles
        let n = d.len();
        let mut q: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        for p in 0..n {
            for r in p + 1..n {
                let angle = 0.3 + 0.17 * (p * n + r) as f64;
                let (s, c) = f64::sin_cos(angle);
                for row in q.iter_mut() {
                    let (a, b) = (row[p], row[r]);
                    row[p] = c * a - s * b;
                    row[r] = s * a + c * b;
                }
            }
        }
        (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| q[i][k] * d[k] * q[j][k]).sum()).collect()).collect()
    }

    #[test]
    fn recovers_known_spectrum() {
        let d = [-3.0, -1.5, 0.0, 0.25, 1.0, 2.0, 2.5, 4.0, 7.0, 11.0];
        let eig = jacobi_eigen(rotated_diagonal(&d)).unwrap();
        for (got, want) in eig.values.iter().zip(d) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn vectors_are_orthonormal_eigenvectors() {
        let d = [1.0, 2.0, 3.0, 5.0, 8.0];
        let a = rotated_diagonal(&d);
        let eig = jacobi_eigen(a.clone()).unwrap();
        for (k, v) in eig.vectors.iter().enumerate() {
            for i in 0..5 {
                let av: f64 = (0..5).map(|j| a[i][j] * v[j]).sum();
                assert!((av - eig.values[k] * v[i]).abs() < 1e-12);
            }
            for (l, w) in eig.vectors.iter().enumerate() {
                let dot: f64 = v.iter().zip(w).map(|(x, y)| x * y).sum();
                assert!((dot - if k == l { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn diagonal_input_needs_no_sweep() {
        let eig = jacobi_eigen(vec![vec![2.0, 0.0], vec![0.0, -1.0]]).unwrap();
        assert_eq!(eig.values, vec![-1.0, 2.0]);
        assert_eq!(eig.sweeps, 0);
    }
}
