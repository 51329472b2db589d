//! Composite Simpson rules on uniform grids.

/// Weights of the composite Simpson rule for `n` uniformly spaced samples
/// with spacing `h`. An even sample count closes the last three panels with
/// Simpson's 3/8 rule; `n = 2` degenerates to the trapezoid rule.
pub fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; n];
    match n {
        0 | 1 => {}
        2 => {
            w[0] = h / 2.0;
            w[1] = h / 2.0;
        }
        3 => add_simpson(&mut w, 0, 2, h),
        _ if n % 2 == 1 => add_simpson(&mut w, 0, n - 1, h),
        _ => {
            add_simpson(&mut w, 0, n - 4, h);
            let e = n - 4;
            for (k, c) in [3.0, 9.0, 9.0, 3.0].iter().enumerate() {
                w[e + k] += c * h / 8.0;
            }
        }
    }
    w
}

/// Adds Simpson weights for samples `from..=to` (even number of panels).
fn add_simpson(w: &mut [f64], from: usize, to: usize, h: f64) {
    if to <= from {
        return;
    }
    for k in (from..to).step_by(2) {
        w[k] += h / 3.0;
        w[k + 1] += 4.0 * h / 3.0;
        w[k + 2] += h / 3.0;
    }
}

/// Integral of uniformly sampled `f`.
pub fn simpson(f: &[f64], h: f64) -> f64 {
    simpson_weights(f.len(), h).iter().zip(f).map(|(w, v)| w * v).sum()
}

/// Running integrals `∫_{x₀}^{x_k} f` at every sample.
///
/// Even samples take whole Simpson panels; an odd sample adds the integral of
/// the quadratic through the surrounding panel over its first half. A
/// trailing half panel, when the sample count is even, uses the quadratic
/// through the last three samples.
pub fn cumulative_simpson(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    if n == 2 {
        out[1] = h * (f[0] + f[1]) / 2.0;
        return out;
    }
    let mut k = 0;
    while k + 2 < n {
        let (f0, f1, f2) = (f[k], f[k + 1], f[k + 2]);
        out[k + 1] = out[k] + h * (5.0 * f0 + 8.0 * f1 - f2) / 12.0;
        out[k + 2] = out[k] + h * (f0 + 4.0 * f1 + f2) / 3.0;
        k += 2;
    }
    if k + 1 < n {
        let (f0, f1, f2) = (f[k - 1], f[k], f[k + 1]);
        out[k + 1] = out[k] + h * (-f0 + 8.0 * f1 + 5.0 * f2) / 12.0;
    }
    out
}
