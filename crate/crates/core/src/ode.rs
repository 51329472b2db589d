//! Initial-value integration of `y'' = (q(x) − λ) y` on one closed side of
//! the interface, with dense output.
//!
//! Steps are taken by the Dormand–Prince 5(4) pair with local error control.
//! Between accepted nodes the solution is reconstructed by quintic Hermite
//! interpolation; the ODE supplies the second and third derivatives at every
//! node exactly, so the interpolant reproduces stored states bit for bit and
//! its error is far below the step error.

use crate::error::{Error, Result};
use crate::problem::{Polynomial, Problem, Side};

/// Solution value and derivative at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StatePair {
    pub y: f64,
    pub dy: f64,
}

impl StatePair {
    pub fn new(y: f64, dy: f64) -> Self {
        Self { y, dy }
    }

    pub fn norm(&self) -> f64 {
        self.y.hypot(self.dy)
    }

    pub fn is_finite(&self) -> bool {
        self.y.is_finite() && self.dy.is_finite()
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(self.y * s, self.dy * s)
    }

    /// `y₁ y₂' − y₁' y₂`.
    pub fn wronskian(self, other: StatePair) -> f64 {
        self.y * other.dy - self.dy * other.y
    }
}

/// Which endpoint of a side the integration starts from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Start {
    /// `a` on the left side, `b` on the right side.
    Outer,
    /// The interface point, approached from within the side.
    Interface,
}

// Dormand–Prince 5(4) coefficients.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
const MAX_STEPS: usize = 2_000_000;

/// Node data: state plus the exact second and third derivatives from the ODE.
#[derive(Debug, Clone, Copy)]
struct Node {
    x: f64,
    state: StatePair,
    d2: f64,
    d3: f64,
}

/// Solution of the initial-value problem on one closed side.
#[derive(Debug, Clone)]
pub struct SolutionPiece {
    side: Side,
    lambda: f64,
    /// Ascending in `x` regardless of the integration direction.
    nodes: Vec<Node>,
}

impl SolutionPiece {
    pub fn side(&self) -> Side {
        self.side
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.iter().map(|n| n.x)
    }

    pub fn states(&self) -> impl Iterator<Item = StatePair> + '_ {
        self.nodes.iter().map(|n| n.state)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.nodes[0].x
    }

    pub fn end(&self) -> f64 {
        self.nodes[self.nodes.len() - 1].x
    }

    /// State at the left end of the side.
    pub fn first(&self) -> StatePair {
        self.nodes[0].state
    }

    /// State at the right end of the side.
    pub fn last(&self) -> StatePair {
        self.nodes[self.nodes.len() - 1].state
    }

    /// Dense evaluation. `x` is clamped to the side.
    pub fn eval(&self, x: f64) -> StatePair {
        let x = x.clamp(self.start(), self.end());
        let k = self.nodes.partition_point(|n| n.x <= x);
        if k == 0 {
            return self.nodes[0].state;
        }
        if k == self.nodes.len() {
            return self.nodes[k - 1].state;
        }
        let (n0, n1) = (&self.nodes[k - 1], &self.nodes[k]);
        if x == n0.x {
            return n0.state;
        }
        let h = n1.x - n0.x;
        let t = (x - n0.x) / h;
        let y = hermite5(t, h, [n0.state.y, n0.state.dy, n0.d2], [n1.state.y, n1.state.dy, n1.d2]);
        let dy = hermite5(t, h, [n0.state.dy, n0.d2, n0.d3], [n1.state.dy, n1.d2, n1.d3]);
        StatePair::new(y, dy)
    }
}

/// Quintic Hermite interpolant on `[0, h]` from value, first and second
/// derivative at both ends; `t ∈ [0, 1]` is the scaled abscissa.
fn hermite5(t: f64, h: f64, f0: [f64; 3], f1: [f64; 3]) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let t5 = t4 * t;
    let h00 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    let h01 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    let h02 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
    let h10 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
    let h11 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    let h12 = 0.5 * (t3 - 2.0 * t4 + t5);
    f0[0] * h00 + h * f0[1] * h01 + h * h * f0[2] * h02 + f1[0] * h10 + h * f1[1] * h11 + h * h * f1[2] * h12
}

struct Rhs<'a> {
    q: &'a Polynomial,
    lambda: f64,
}

impl Rhs<'_> {
    #[inline]
    fn eval(&self, x: f64, s: [f64; 2]) -> [f64; 2] {
        [s[1], (self.q.eval(x) - self.lambda) * s[0]]
    }

    fn node(&self, x: f64, state: StatePair) -> Node {
        let (q, dq) = self.q.eval_with_derivative(x);
        let d2 = (q - self.lambda) * state.y;
        let d3 = dq * state.y + (q - self.lambda) * state.dy;
        Node { x, state, d2, d3 }
    }
}

/// Integrates `y'' = (q − λ) y` across `side`, starting at the endpoint named
/// by `from` with `initial`, under mixed absolute/relative tolerance `tol`.
pub fn integrate(
    side: Side,
    lambda: f64,
    from: Start,
    initial: StatePair,
    problem: &Problem,
    tol: f64,
) -> Result<SolutionPiece> {
    if !(tol > 0.0) {
        return Err(Error::Input(format!("integration tolerance must be positive, got {tol}")));
    }
    if !initial.is_finite() || !lambda.is_finite() {
        return Err(Error::NonFiniteState { x: f64::NAN });
    }
    let (lo, hi) = problem.side_bounds(side);
    let (x0, x_end) = match (side, from) {
        (Side::Left, Start::Outer) | (Side::Right, Start::Interface) => (lo, hi),
        (Side::Left, Start::Interface) | (Side::Right, Start::Outer) => (hi, lo),
    };
    let rhs = Rhs { q: problem.potential().side(side), lambda };
    let mut nodes = vec![rhs.node(x0, initial)];

    if initial.y == 0.0 && initial.dy == 0.0 {
        nodes.push(rhs.node(x_end, initial));
        return Ok(finish(side, lambda, nodes));
    }

    let length = (x_end - x0).abs();
    let dir = (x_end - x0).signum();
    let freq = (lambda.abs() + rhs.q.eval(x0).abs()).sqrt().max(1.0);
    let mut h = dir * (0.05 / freq).min(length);
    let mut x = x0;
    let mut s = [initial.y, initial.dy];
    let mut k1 = rhs.eval(x, s);
    let mut rejected = false;

    for _ in 0..MAX_STEPS {
        let remaining = x_end - x;
        if remaining.abs() <= 4.0 * f64::EPSILON * x_end.abs().max(1.0) {
            break;
        }
        let last = h.abs() >= remaining.abs();
        if last {
            h = remaining;
        }
        if h.abs() < 1e-13 * x.abs().max(1.0) {
            return Err(Error::StepSizeUnderflow { x, h });
        }

        let k2 = rhs.eval(x + C2 * h, comb(s, h, &[(A21, k1)]));
        let k3 = rhs.eval(x + C3 * h, comb(s, h, &[(A31, k1), (A32, k2)]));
        let k4 = rhs.eval(x + C4 * h, comb(s, h, &[(A41, k1), (A42, k2), (A43, k3)]));
        let k5 = rhs.eval(x + C5 * h, comb(s, h, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]));
        let k6 = rhs.eval(x + h, comb(s, h, &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)]));
        let s_new = comb(s, h, &[(A71, k1), (A73, k3), (A74, k4), (A75, k5), (A76, k6)]);
        let x_new = if last { x_end } else { x + h };
        let k7 = rhs.eval(x_new, s_new);

        let mut err = 0.0;
        for i in 0..2 {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = tol + tol * s[i].abs().max(s_new[i].abs());
            err += (e / sc) * (e / sc);
        }
        let err = (0.5 * err).sqrt();
        if !err.is_finite() || !s_new.iter().all(|v| v.is_finite()) {
            if h.abs() < 1e-13 * x.abs().max(1.0) {
                return Err(Error::NonFiniteState { x });
            }
            h *= MIN_FACTOR;
            rejected = true;
            continue;
        }

        if err <= 1.0 {
            x = x_new;
            s = s_new;
            k1 = k7;
            nodes.push(rhs.node(x, StatePair::new(s[0], s[1])));
            if last {
                break;
            }
            let mut factor = if err == 0.0 { MAX_FACTOR } else { (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR) };
            if rejected {
                factor = factor.min(1.0);
            }
            rejected = false;
            h *= factor;
        } else {
            h *= (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, 1.0);
            rejected = true;
        }
    }
    let end = nodes[nodes.len() - 1].x;
    if end != x_end {
        if (end - x_end).abs() <= 4.0 * f64::EPSILON * x_end.abs().max(1.0) {
            let last = nodes.len() - 1;
            let state = nodes[last].state;
            nodes[last] = rhs.node(x_end, state);
        } else {
            return Err(Error::StepSizeUnderflow { x: end, h });
        }
    }
    Ok(finish(side, lambda, nodes))
}

#[inline]
fn comb(s: [f64; 2], h: f64, terms: &[(f64, [f64; 2])]) -> [f64; 2] {
    let mut out = s;
    for (a, k) in terms {
        out[0] += h * a * k[0];
        out[1] += h * a * k[1];
    }
    out
}

fn finish(side: Side, lambda: f64, mut nodes: Vec<Node>) -> SolutionPiece {
    if nodes.len() > 1 && nodes[0].x > nodes[1].x {
        nodes.reverse();
    }
    SolutionPiece { side, lambda, nodes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{Potential, ProblemSpec};
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    fn spec_a() -> Problem {
        ProblemSpec::default().validate().unwrap()
    }

    fn constant_q(left: f64, right: f64) -> Problem {
        ProblemSpec {
            potential: Potential { left: Polynomial::constant(left), right: Polynomial::constant(right) },
            ..ProblemSpec::default()
        }
        .validate()
        .unwrap()
    }

    /// Closed-form propagation of `y'' = (q − λ) y` with constant `q` over `t`.
    fn propagate(q: f64, lambda: f64, t: f64, s: StatePair) -> StatePair {
        let m = lambda - q;
        if m > 0.0 {
            let k = m.sqrt();
            let (sn, cs) = (k * t).sin_cos();
            StatePair::new(s.y * cs + s.dy * sn / k, -s.y * k * sn + s.dy * cs)
        } else if m < 0.0 {
            let k = (-m).sqrt();
            let (sh, ch) = ((k * t).sinh(), (k * t).cosh());
            StatePair::new(s.y * ch + s.dy * sh / k, s.y * k * sh + s.dy * ch)
        } else {
            StatePair::new(s.y + s.dy * t, s.dy)
        }
    }

    #[test]
    fn hermite_reproduces_quintics() {
        let p = |x: f64| 1.0 - 2.0 * x + 0.5 * x.powi(3) + 3.0 * x.powi(5);
        let dp = |x: f64| -2.0 + 1.5 * x * x + 15.0 * x.powi(4);
        let d2p = |x: f64| 3.0 * x + 60.0 * x.powi(3);
        let (x0, h) = (0.3, 0.7);
        for k in 0..=10 {
            let t = k as f64 / 10.0;
            let got = hermite5(t, h, [p(x0), dp(x0), d2p(x0)], [p(x0 + h), dp(x0 + h), d2p(x0 + h)]);
            assert!((got - p(x0 + t * h)).abs() < 1e-13, "t = {t}");
        }
    }

    #[test]
    fn linear_solution_at_zero_lambda() {
        let piece = integrate(Side::Left, 0.0, Start::Outer, StatePair::new(0.0, -1.0), &spec_a(), 1e-10).unwrap();
        let s = piece.eval(-PI / 2.0);
        assert!((s.y + PI / 2.0).abs() < 1e-12);
        assert!((s.dy + 1.0).abs() < 1e-12);
    }

    #[test]
    fn sine_solution_at_unit_lambda() {
        let piece = integrate(Side::Left, 1.0, Start::Outer, StatePair::new(0.0, -1.0), &spec_a(), 1e-10).unwrap();
        let s = piece.last();
        assert_eq!(piece.end(), 0.0);
        assert!(s.y.abs() < 1e-9, "{s:?}");
        assert!((s.dy - 1.0).abs() < 1e-9, "{s:?}");
    }

    #[test]
    fn zero_initial_data_gives_zero_piece() {
        let p = constant_q(2.0, -1.0);
        for side in [Side::Left, Side::Right] {
            let piece = integrate(side, 3.0, Start::Interface, StatePair::default(), &p, 1e-10).unwrap();
            assert!(piece.states().all(|s| s == StatePair::default()));
            assert_eq!(piece.eval(piece.start() * 0.5 + piece.end() * 0.5), StatePair::default());
        }
    }

    #[test]
    fn nodes_are_ascending_and_dense_output_hits_them() {
        let piece = integrate(Side::Right, 7.0, Start::Outer, StatePair::new(0.3, 1.0), &spec_a(), 1e-10).unwrap();
        let xs: Vec<f64> = piece.nodes().collect();
        assert!(xs.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(xs[0], 0.0);
        assert_eq!(*xs.last().unwrap(), PI);
        for (x, s) in piece.nodes().zip(piece.states()) {
            assert_eq!(piece.eval(x), s);
        }
        assert_eq!(piece.first(), piece.eval(0.0));
    }

    #[test]
    fn rejects_bad_tolerance() {
        let r = integrate(Side::Left, 1.0, Start::Outer, StatePair::new(0.0, 1.0), &spec_a(), 0.0);
        assert!(matches!(r, Err(Error::Input(_))));
    }

    #[test]
    fn matches_closed_form_for_constant_potential() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let tol = 1e-10;
        for (ql, qr) in [(0.0, 0.0), (1.5, -2.0), (-3.0, 4.0)] {
            let p = constant_q(ql, qr);
            for lambda in [-2.0, 0.0, 0.7, 12.0] {
                let init = StatePair::new(0.4, -1.1);
                let left = integrate(Side::Left, lambda, Start::Outer, init, &p, tol).unwrap();
                let right = integrate(Side::Right, lambda, Start::Outer, init, &p, tol).unwrap();
                for _ in 0..100 {
                    let x = rng.gen_range(-PI..0.0);
                    let want = propagate(ql, lambda, x + PI, init);
                    let got = left.eval(x);
                    let scale = 1.0 + want.norm();
                    assert!((got.y - want.y).abs() <= 10.0 * tol * scale, "{got:?} {want:?}");
                    assert!((got.dy - want.dy).abs() <= 10.0 * tol * scale);
                    let x = rng.gen_range(0.0..PI);
                    let want = propagate(qr, lambda, x - PI, init);
                    let got = right.eval(x);
                    let scale = 1.0 + want.norm();
                    assert!((got.y - want.y).abs() <= 10.0 * tol * scale, "{got:?} {want:?}");
                    assert!((got.dy - want.dy).abs() <= 10.0 * tol * scale);
                }
            }
        }
    }

    #[test]
    fn halving_tolerance_reduces_error() {
        let p = spec_a();
        let init = StatePair::new(0.0, -1.0);
        let lambda = 9.3;
        let err = |tol: f64| {
            let piece = integrate(Side::Left, lambda, Start::Outer, init, &p, tol).unwrap();
            (0..=50)
                .map(|k| {
                    let x = -PI + PI * k as f64 / 50.0;
                    let want = propagate(0.0, lambda, x + PI, init);
                    let got = piece.eval(x);
                    (got.y - want.y).abs().max((got.dy - want.dy).abs())
                })
                .fold(0.0, f64::max)
        };
        let mut prev = err(1e-5);
        for tol in [5e-6, 2.5e-6, 1.25e-6, 6.25e-7] {
            let e = err(tol);
            assert!(e < prev, "tol {tol}: {e} !< {prev}");
            prev = e;
        }
    }

    #[test]
    fn linearity() {
        let p = ProblemSpec {
            potential: Potential { left: Polynomial::new(vec![0.5, -1.0, 0.3]), right: Polynomial::new(vec![2.0, 0.1]) },
            ..ProblemSpec::default()
        }
        .validate()
        .unwrap();
        let tol = 1e-10;
        let (s1, s2) = (StatePair::new(1.0, 0.0), StatePair::new(0.0, 1.0));
        let (c1, c2) = (0.7, -1.3);
        let comb = StatePair::new(c1 * s1.y + c2 * s2.y, c1 * s1.dy + c2 * s2.dy);
        for side in [Side::Left, Side::Right] {
            let lambda = 4.2;
            let r1 = integrate(side, lambda, Start::Outer, s1, &p, tol).unwrap();
            let r2 = integrate(side, lambda, Start::Outer, s2, &p, tol).unwrap();
            let rc = integrate(side, lambda, Start::Outer, comb, &p, tol).unwrap();
            let (lo, hi) = p.side_bounds(side);
            for k in 0..=40 {
                let x = lo + (hi - lo) * k as f64 / 40.0;
                let (a, b, c) = (r1.eval(x), r2.eval(x), rc.eval(x));
                let scale = 1.0 + c.norm();
                assert!((c.y - (c1 * a.y + c2 * b.y)).abs() <= 10.0 * tol * scale);
                assert!((c.dy - (c1 * a.dy + c2 * b.dy)).abs() <= 10.0 * tol * scale);
            }
        }
    }

    #[test]
    fn wronskian_is_constant_along_a_side() {
        let p = ProblemSpec {
            potential: Potential { left: Polynomial::new(vec![1.0, 0.0, -0.5]), right: Polynomial::zero() },
            ..ProblemSpec::default()
        }
        .validate()
        .unwrap();
        let tol = 1e-10;
        let f = integrate(Side::Left, 3.0, Start::Outer, StatePair::new(0.0, 1.0), &p, tol).unwrap();
        let g = integrate(Side::Left, 3.0, Start::Interface, StatePair::new(1.0, 0.5), &p, tol).unwrap();
        let w0 = f.eval(-PI).wronskian(g.eval(-PI));
        for k in 1..=30 {
            let x = -PI + PI * k as f64 / 30.0;
            let w = f.eval(x).wronskian(g.eval(x));
            assert!((w - w0).abs() <= 10.0 * tol * (1.0 + w0.abs()), "{w} vs {w0}");
        }
    }
}
