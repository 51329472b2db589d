use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("minor {name} = {value} must be positive")]
    NonPositiveMinor { name: &'static str, value: f64 },

    #[error("interval requires a < c < b, got a = {a}, c = {c}, b = {b}")]
    BadInterval { a: f64, b: f64, c: f64 },

    #[error("bad potential: {0}")]
    BadPotential(String),

    #[error("boundary angle {name} = {value} is not finite")]
    BadAngle { name: &'static str, value: f64 },

    #[error("step size underflow at x = {x} (h = {h:e})")]
    StepSizeUnderflow { x: f64, h: f64 },

    #[error("non-finite state at x = {x}")]
    NonFiniteState { x: f64 },

    #[error("x = {x} is the interface point; use a one-sided evaluation")]
    InterfacePoint { x: f64 },

    #[error("bad range: {0}")]
    BadRange(String),

    #[error("bad grid: {0}")]
    BadGrid(String),

    #[error("grid functions live on different grids")]
    GridMismatch,

    #[error("root refinement did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("λ = {lambda} is not an eigenvalue: |ω| = {residual:e} exceeds {threshold:e}")]
    NotAnEigenvalue { lambda: f64, residual: f64, threshold: f64 },

    #[error("singular resolvent at λ = {lambda}: |ω| = {omega:e} below {threshold:e}")]
    SingularResolvent { lambda: f64, omega: f64, threshold: f64 },

    #[error("Jacobi eigensolver did not converge in {sweeps} sweeps")]
    JacobiNoConvergence { sweeps: usize },

    #[error("eigenvalue index {index} out of range ({available} computed)")]
    IndexOutOfRange { index: usize, available: usize },

    #[error("{0}")]
    Input(String),
}
