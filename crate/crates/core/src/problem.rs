//! Problem instance: interval, boundary angles, piecewise potential and the
//! transmission coefficient matrix with its 2×2 minors.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One side of the interface point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

/// The six 2×2 minors of a 2×4 matrix, `rij` being the determinant of
/// columns `i` and `j` (1-based).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minors {
    pub r12: f64,
    pub r13: f64,
    pub r14: f64,
    pub r23: f64,
    pub r24: f64,
    pub r34: f64,
}

impl Minors {
    pub fn as_array(&self) -> [f64; 6] {
        [self.r12, self.r13, self.r14, self.r23, self.r24, self.r34]
    }

    /// `ρ12ρ34 − ρ13ρ24 + ρ14ρ23`, zero for exact minors of any 2×4 matrix.
    pub fn plucker_defect(&self) -> f64 {
        self.r12 * self.r34 - self.r13 * self.r24 + self.r14 * self.r23
    }
}

/// Coefficients of the two transmission conditions. Column order is
/// `y'(c−), y(c−), y'(c+), y(c+)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmissionMatrix {
    pub rows: [[f64; 4]; 2],
}

impl TransmissionMatrix {
    pub fn new(row1: [f64; 4], row2: [f64; 4]) -> Self {
        Self { rows: [row1, row2] }
    }

    /// `y(c+) = y(c−)`, `y'(c+) = y'(c−)`.
    pub fn continuity() -> Self {
        Self::new([0.0, -1.0, 0.0, 1.0], [1.0, 0.0, -1.0, 0.0])
    }

    /// `y(c+) = γ y(c−)`, `y'(c+) = y'(c−)/γ`.
    pub fn jump(gamma: f64) -> Self {
        Self::new([0.0, -gamma, 0.0, 1.0], [1.0 / gamma, 0.0, -1.0, 0.0])
    }

    /// Determinant of columns `i` and `j`, 1-based.
    pub fn minor(&self, i: usize, j: usize) -> f64 {
        let [r1, r2] = &self.rows;
        r1[i - 1] * r2[j - 1] - r1[j - 1] * r2[i - 1]
    }

    pub fn minors(&self) -> Minors {
        Minors {
            r12: self.minor(1, 2),
            r13: self.minor(1, 3),
            r14: self.minor(1, 4),
            r23: self.minor(2, 3),
            r24: self.minor(2, 4),
            r34: self.minor(3, 4),
        }
    }

    /// Rounding scale of the Plücker relation: the largest of the three
    /// products formed from `|a_i b_j| + |a_j b_i|` in place of each minor.
    /// Minors computed with cancellation carry absolute error proportional
    /// to these sums, not to their own size.
    pub fn plucker_scale(&self) -> f64 {
        let [r1, r2] = &self.rows;
        let abs = |i: usize, j: usize| (r1[i - 1] * r2[j - 1]).abs() + (r1[j - 1] * r2[i - 1]).abs();
        (abs(1, 2) * abs(3, 4)).max(abs(1, 3) * abs(2, 4)).max(abs(1, 4) * abs(2, 3))
    }

    /// Values of the two transmission functionals on one-sided traces
    /// `(y(c−), y'(c−))` and `(y(c+), y'(c+))`.
    pub fn residuals(&self, y_minus: f64, dy_minus: f64, y_plus: f64, dy_plus: f64) -> [f64; 2] {
        let v = [dy_minus, y_minus, dy_plus, y_plus];
        let dot = |r: &[f64; 4]| r.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>();
        [dot(&self.rows[0]), dot(&self.rows[1])]
    }

    fn is_finite(&self) -> bool {
        self.rows.iter().flatten().all(|v| v.is_finite())
    }
}

/// Boundary angles in radians, stored as given.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryAngles {
    pub alpha: f64,
    pub beta: f64,
}

/// Polynomial with coefficients in ascending powers of `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial {
    pub coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Self { coeffs: vec![c] }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Value and first derivative.
    pub fn eval_with_derivative(&self, x: f64) -> (f64, f64) {
        let mut p = 0.0;
        let mut dp = 0.0;
        for &c in self.coeffs.iter().rev() {
            dp = dp * x + p;
            p = p * x + c;
        }
        (p, dp)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }
}

/// Potential given by one polynomial per side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    pub left: Polynomial,
    pub right: Polynomial,
}

impl Potential {
    pub fn zero() -> Self {
        Self { left: Polynomial::zero(), right: Polynomial::zero() }
    }

    pub fn side(&self, side: Side) -> &Polynomial {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.left.is_zero() && self.right.is_zero()
    }
}

/// Raw problem description, before validation.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub angles: BoundaryAngles,
    pub potential: Potential,
    pub transmission: TransmissionMatrix,
}

impl Default for ProblemSpec {
    /// `(−π, 0, π)`, Dirichlet ends, `q ≡ 0`, continuous transmission.
    fn default() -> Self {
        Self {
            a: -PI,
            b: PI,
            c: 0.0,
            angles: BoundaryAngles { alpha: 0.0, beta: 0.0 },
            potential: Potential::zero(),
            transmission: TransmissionMatrix::continuity(),
        }
    }
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<Problem> {
        let Self { a, b, c, .. } = *self;
        if !(a.is_finite() && b.is_finite() && c.is_finite()) || !(a < c && c < b) {
            return Err(Error::BadInterval { a, b, c });
        }
        for (name, value) in [("alpha", self.angles.alpha), ("beta", self.angles.beta)] {
            if !value.is_finite() || !value.sin().is_finite() || !value.cos().is_finite() {
                return Err(Error::BadAngle { name, value });
            }
        }
        self.check_potential()?;
        if !self.transmission.is_finite() {
            return Err(Error::Input("transmission matrix has non-finite entries".into()));
        }
        let minors = self.transmission.minors();
        if !(minors.r12 > 0.0) {
            return Err(Error::NonPositiveMinor { name: "rho12", value: minors.r12 });
        }
        if !(minors.r34 > 0.0) {
            return Err(Error::NonPositiveMinor { name: "rho34", value: minors.r34 });
        }
        Ok(Problem { spec: self.clone(), minors })
    }

    fn check_potential(&self) -> Result<()> {
        for (side, lo, hi) in [(Side::Left, self.a, self.c), (Side::Right, self.c, self.b)] {
            let poly = self.potential.side(side);
            if poly.coeffs.is_empty() {
                return Err(Error::BadPotential(format!("{} polynomial has no coefficients", side.name())));
            }
            if poly.coeffs.iter().any(|c| !c.is_finite()) {
                return Err(Error::BadPotential(format!("{} polynomial has non-finite coefficients", side.name())));
            }
            // Polynomials are bounded on a closed side; checking a fine sample
            // catches overflow of large coefficients.
            for k in 0..=64 {
                let x = lo + (hi - lo) * k as f64 / 64.0;
                let (v, dv) = poly.eval_with_derivative(x);
                if !v.is_finite() || !dv.is_finite() {
                    return Err(Error::BadPotential(format!("{} polynomial overflows at x = {x}", side.name())));
                }
            }
        }
        Ok(())
    }
}

/// A validated problem together with its transmission minors.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    spec: ProblemSpec,
    minors: Minors,
}

impl Problem {
    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn minors(&self) -> &Minors {
        &self.minors
    }

    pub fn a(&self) -> f64 {
        self.spec.a
    }

    pub fn b(&self) -> f64 {
        self.spec.b
    }

    pub fn c(&self) -> f64 {
        self.spec.c
    }

    pub fn alpha(&self) -> f64 {
        self.spec.angles.alpha
    }

    pub fn beta(&self) -> f64 {
        self.spec.angles.beta
    }

    pub fn transmission(&self) -> &TransmissionMatrix {
        &self.spec.transmission
    }

    pub fn potential(&self) -> &Potential {
        &self.spec.potential
    }

    /// Closed side as `(start, end)` in increasing order.
    pub fn side_bounds(&self, side: Side) -> (f64, f64) {
        match side {
            Side::Left => (self.spec.a, self.spec.c),
            Side::Right => (self.spec.c, self.spec.b),
        }
    }

    /// Side holding `x`, or `InterfacePoint` for `x = c`. Points outside
    /// `[a, b]` are rejected.
    pub fn side_of(&self, x: f64) -> Result<Side> {
        if x == self.spec.c {
            Err(Error::InterfacePoint { x })
        } else if !(x >= self.spec.a && x <= self.spec.b) {
            Err(Error::BadGrid(format!("x = {x} lies outside [{}, {}]", self.spec.a, self.spec.b)))
        } else if x < self.spec.c {
            Ok(Side::Left)
        } else {
            Ok(Side::Right)
        }
    }

    /// Weight of the side in the inner product: `ρ12` on the left, `ρ34` on
    /// the right.
    pub fn weight(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.minors.r12,
            Side::Right => self.minors.r34,
        }
    }
}

/// Six minors of `t`; free-function form of [`TransmissionMatrix::minors`].
pub fn minors(t: &TransmissionMatrix) -> Minors {
    t.minors()
}

/// Validates `spec`; free-function form of [`ProblemSpec::validate`].
pub fn validate(spec: &ProblemSpec) -> Result<Problem> {
    spec.validate()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntervalFile {
    a: f64,
    b: f64,
    c: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PotentialFile {
    left: Vec<f64>,
    right: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    interval: Option<IntervalFile>,
    alpha: f64,
    beta: f64,
    transmission: [[f64; 4]; 2],
    potential: PotentialFile,
}

impl ProblemSpec {
    /// Parses the JSON problem file. A missing `interval` defaults to
    /// `(−π, π)` with the interface at 0.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ProblemFile = serde_json::from_str(text).map_err(|e| {
            Error::Input(format!("malformed problem file at line {}, column {}: {e}", e.line(), e.column()))
        })?;
        let interval = file.interval.unwrap_or(IntervalFile { a: -PI, b: PI, c: 0.0 });
        Ok(Self {
            a: interval.a,
            b: interval.b,
            c: interval.c,
            angles: BoundaryAngles { alpha: file.alpha, beta: file.beta },
            potential: Potential {
                left: Polynomial::new(file.potential.left),
                right: Polynomial::new(file.potential.right),
            },
            transmission: TransmissionMatrix { rows: file.transmission },
        })
    }

    pub fn to_json(&self) -> String {
        let file = ProblemFile {
            interval: Some(IntervalFile { a: self.a, b: self.b, c: self.c }),
            alpha: self.angles.alpha,
            beta: self.angles.beta,
            transmission: self.transmission.rows,
            potential: PotentialFile {
                left: self.potential.left.coeffs.clone(),
                right: self.potential.right.coeffs.clone(),
            },
        };
        serde_json::to_string_pretty(&file).expect("problem file serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-15
    }

    #[test]
    fn continuity_minors() {
        let m = TransmissionMatrix::continuity().minors();
        assert_eq!(m.as_array(), [1.0, 0.0, -1.0, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn jump_minors() {
        let m = TransmissionMatrix::new([0.0, -2.0, 0.0, 1.0], [0.5, 0.0, -1.0, 0.0]).minors();
        let expected = [1.0, 0.0, -0.5, 2.0, 0.0, 1.0];
        for (got, want) in m.as_array().iter().zip(expected) {
            assert!(close(*got, want), "{got} vs {want}");
        }
        assert_eq!(TransmissionMatrix::jump(2.0), TransmissionMatrix::new([0.0, -2.0, 0.0, 1.0], [0.5, 0.0, -1.0, 0.0]));
    }

    #[test]
    fn proportional_rows_have_zero_minors() {
        let t = TransmissionMatrix::new([1.0, -2.0, 3.0, 0.5], [2.0, -4.0, 6.0, 1.0]);
        assert!(t.minors().as_array().iter().all(|&r| r == 0.0));
        let spec = ProblemSpec { transmission: t, ..ProblemSpec::default() };
        assert!(matches!(spec.validate(), Err(Error::NonPositiveMinor { name: "rho12", .. })));
    }

    #[test]
    fn default_spec_is_accepted() {
        let p = ProblemSpec::default().validate().unwrap();
        assert_eq!(p.minors().r12, 1.0);
        assert_eq!(p.minors().r34, 1.0);
    }

    #[test]
    fn sign_flipped_row_is_rejected() {
        let spec = ProblemSpec {
            transmission: TransmissionMatrix::new([0.0, 1.0, 0.0, -1.0], [1.0, 0.0, -1.0, 0.0]),
            ..ProblemSpec::default()
        };
        assert_eq!(spec.validate(), Err(Error::NonPositiveMinor { name: "rho12", value: -1.0 }));
    }

    #[test]
    fn negative_rho34_is_rejected() {
        let spec = ProblemSpec {
            transmission: TransmissionMatrix::new([0.0, -1.0, 1.0, 0.0], [1.0, 0.0, 0.0, -1.0]),
            ..ProblemSpec::default()
        };
        assert!(matches!(spec.validate(), Err(Error::NonPositiveMinor { name: "rho34", .. })));
    }

    #[test]
    fn degenerate_interval_is_rejected() {
        let spec = ProblemSpec { c: -PI, ..ProblemSpec::default() };
        assert!(matches!(spec.validate(), Err(Error::BadInterval { .. })));
        let spec = ProblemSpec { b: -4.0, ..ProblemSpec::default() };
        assert!(matches!(spec.validate(), Err(Error::BadInterval { .. })));
    }

    #[test]
    fn bad_potentials_are_rejected() {
        let mut spec = ProblemSpec::default();
        spec.potential.left = Polynomial::new(vec![]);
        assert!(matches!(spec.validate(), Err(Error::BadPotential(_))));
        spec.potential.left = Polynomial::new(vec![0.0, f64::NAN]);
        assert!(matches!(spec.validate(), Err(Error::BadPotential(_))));
        spec.potential.left = Polynomial::new(vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1e306]);
        assert!(matches!(spec.validate(), Err(Error::BadPotential(_))));
    }

    #[test]
    fn infinite_angle_is_rejected() {
        let mut spec = ProblemSpec::default();
        spec.angles.beta = f64::INFINITY;
        assert!(matches!(spec.validate(), Err(Error::BadAngle { name: "beta", .. })));
    }

    #[test]
    fn polynomial_evaluation() {
        let p = Polynomial::new(vec![1.0, -2.0, 3.0]);
        assert_eq!(p.eval(2.0), 1.0 - 4.0 + 12.0);
        assert_eq!(p.eval_with_derivative(2.0), (9.0, -2.0 + 12.0));
    }

    #[test]
    fn side_lookup() {
        let p = ProblemSpec::default().validate().unwrap();
        assert_eq!(p.side_of(-1.0), Ok(Side::Left));
        assert_eq!(p.side_of(PI), Ok(Side::Right));
        assert_eq!(p.side_of(0.0), Err(Error::InterfacePoint { x: 0.0 }));
        assert!(p.side_of(4.0).is_err());
    }

    #[test]
    fn json_with_default_interval() {
        let text = r#"{"alpha": 0.5, "beta": 0, "transmission": [[0,-1,0,1],[1,0,-1,0]],
                       "potential": {"left": [0], "right": [1, 2]}}"#;
        let spec = ProblemSpec::from_json(text).unwrap();
        assert_eq!((spec.a, spec.c, spec.b), (-PI, 0.0, PI));
        assert_eq!(spec.angles.alpha, 0.5);
        assert_eq!(spec.potential.right.coeffs, vec![1.0, 2.0]);
        assert_eq!(ProblemSpec::from_json(&spec.to_json()).unwrap(), spec);
    }

    #[test]
    fn malformed_json_reports_location() {
        let err = ProblemSpec::from_json("{\n  \"alpha\": 0,\n  \"beta\": ,\n}").unwrap_err();
        match err {
            Error::Input(msg) => assert!(msg.contains("line 3"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    fn matrix() -> impl Strategy<Value = TransmissionMatrix> {
        (prop::array::uniform4(-10.0..10.0f64), prop::array::uniform4(-10.0..10.0f64))
            .prop_map(|(r1, r2)| TransmissionMatrix::new(r1, r2))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn plucker_relation_holds(t in matrix()) {
            let m = t.minors();
            prop_assert!(m.plucker_defect().abs() <= 8.0 * f64::EPSILON * t.plucker_scale());
        }

        #[test]
        fn minors_are_antisymmetric(t in matrix(), i in 1usize..=4, j in 1usize..=4) {
            prop_assert_eq!(t.minor(i, j), -t.minor(j, i));
        }

        #[test]
        fn validate_is_idempotent(t in matrix(), alpha in -4.0..4.0f64) {
            let spec = ProblemSpec { transmission: t, angles: BoundaryAngles { alpha, beta: 0.3 }, ..ProblemSpec::default() };
            match spec.validate() {
                Ok(p) => prop_assert_eq!(p.spec().validate(), Ok(p.clone())),
                Err(e) => prop_assert_eq!(spec.validate(), Err(e)),
            }
        }
    }
}
