//! Command-line front end: reads a JSON problem file, runs one pipeline
//! command and writes CSV or JSON.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::greens::{green_grid, solve_inhomogeneous, Resolvent};
use crate::hilbert::{inner_product, symmetry_defect_with, Grid, GridFunction, DEFAULT_POINTS_PER_SIDE};
use crate::oracle::{closed_form_characteristic_q0, FdSystem};
use crate::problem::{Polynomial, Problem, ProblemSpec, Side};
use crate::solutions::FundamentalPair;
use crate::spectrum::{eigenfunction, eigenvalues, lower_scan_bound, orthogonality_defect, Eigenpair};
use crate::DEFAULT_TOL;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_EMPTY: i32 = 2;
pub const EXIT_SINGULAR: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

/// Exit code for a failed run.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::IndexOutOfRange { .. } => EXIT_EMPTY,
        Error::SingularResolvent { .. } => EXIT_SINGULAR,
        Error::StepSizeUnderflow { .. }
        | Error::NonFiniteState { .. }
        | Error::NoConvergence { .. }
        | Error::JacobiNoConvergence { .. } => EXIT_NUMERICAL,
        Error::NonPositiveMinor { .. }
        | Error::BadInterval { .. }
        | Error::BadPotential(_)
        | Error::BadAngle { .. }
        | Error::InterfacePoint { .. }
        | Error::BadRange(_)
        | Error::BadGrid(_)
        | Error::GridMismatch
        | Error::NotAnEigenvalue { .. }
        | Error::Input(_) => EXIT_INPUT,
    }
}

#[derive(Debug, Parser)]
#[command(name = "sl-transmission", version, about = "Sturm-Liouville problems with transmission conditions at an interior point")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues in [lmin, lmax).
    Eigenvalues {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        range: Range,
        /// Scan points (default: 40 per unit of √λ).
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Normalized eigenfunction, by 1-based index in [lmin, lmax) or by λ.
    Eigenfunction {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        range: Range,
        #[arg(long, conflicts_with = "lambda", required_unless_present = "lambda")]
        index: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<f64>,
        /// Reporting points per side.
        #[arg(long, default_value_t = DEFAULT_POINTS_PER_SIDE)]
        grid: usize,
    },
    /// Green's function on nx × nxi cell midpoints per side.
    Green {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long, default_value_t = 11)]
        nx: usize,
        #[arg(long, default_value_t = 11)]
        nxi: usize,
    },
    /// Solution of y'' + (λ − q) y = f with polynomial f per side.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        /// Coefficients in ascending powers, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0")]
        f_left: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0")]
        f_right: Vec<f64>,
        /// Reporting points per side.
        #[arg(long, default_value_t = DEFAULT_POINTS_PER_SIDE)]
        grid: usize,
    },
    /// JSON report of the invariant checks.
    Verify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        range: Range,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON problem file.
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Write here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct Range {
    /// Default: below the ground state of a coarse finite-difference model,
    /// and never above 0.
    #[arg(long, allow_hyphen_values = true)]
    pub lmin: Option<f64>,
    #[arg(long, default_value_t = 25.0, allow_hyphen_values = true)]
    pub lmax: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Results go to `stdout` or `--out`, diagnostics to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(stderr, "{e}") } else { write!(stdout, "{e}") };
            return code;
        }
    };
    let common = match &cli.command {
        Command::Eigenvalues { common, .. }
        | Command::Eigenfunction { common, .. }
        | Command::Green { common, .. }
        | Command::Solve { common, .. }
        | Command::Verify { common, .. } => common,
    };
    let outcome = load(common).and_then(|problem| execute(&cli.command, &problem, common));
    let (text, code, message) = match outcome {
        Ok(Output { text, code, message }) => (text, code, message),
        Err(e) => (None, exit_code(&e), Some(format!("error: {e}"))),
    };
    if let Some(text) = text {
        let written = match &common.out {
            Some(path) => std::fs::write(path, &text).map_err(|e| format!("cannot write {}: {e}", path.display())),
            None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
        };
        if let Err(e) = written {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_INPUT;
        }
    }
    if let Some(m) = message {
        let _ = writeln!(stderr, "{m}");
    }
    code
}

struct Output {
    text: Option<String>,
    code: i32,
    message: Option<String>,
}

impl Range {
    fn resolve(&self, problem: &Problem) -> Result<(f64, f64)> {
        let lmin = match self.lmin {
            Some(l) => l,
            None => lower_scan_bound(problem)?,
        };
        Ok((lmin, self.lmax))
    }
}

impl Output {
    fn ok(text: String) -> Self {
        Self { text: Some(text), code: EXIT_OK, message: None }
    }
}

fn load(common: &Common) -> Result<Problem> {
    if !(common.tol > 0.0 && common.tol.is_finite()) {
        return Err(Error::Input(format!("tolerance must be positive, got {}", common.tol)));
    }
    let text = std::fs::read_to_string(&common.spec)
        .map_err(|e| Error::Input(format!("cannot read {}: {e}", common.spec.display())))?;
    ProblemSpec::from_json(&text)?.validate()
}

fn execute(command: &Command, problem: &Problem, common: &Common) -> Result<Output> {
    let tol = common.tol;
    let format = common.format;
    match command {
        Command::Eigenvalues { range, grid, .. } => {
            let (lmin, lmax) = range.resolve(problem)?;
            let spectrum = eigenvalues(problem, lmin, lmax, *grid, tol)?;
            let text = match format {
                Format::Csv => {
                    let mut s = String::from("index,lambda,abs_omega,bracket_lo,bracket_hi\n");
                    for e in &spectrum.eigenvalues {
                        let b = &e.bracket;
                        let _ = writeln!(s, "{},{},{},{},{}", e.index, num(e.lambda), num(e.residual), num(b.lambda_lo), num(b.lambda_hi));
                    }
                    s
                }
                Format::Json => {
                    let rows: Vec<_> = spectrum
                        .eigenvalues
                        .iter()
                        .map(|e| EigenvalueRow {
                            index: e.index,
                            lambda: round(e.lambda),
                            abs_omega: round(e.residual),
                            bracket: [round(e.bracket.lambda_lo), round(e.bracket.lambda_hi)],
                        })
                        .collect();
                    json(&rows)
                }
            };
            if spectrum.eigenvalues.is_empty() {
                return Ok(Output { text: Some(text), code: EXIT_EMPTY, message: Some("no eigenvalues found".into()) });
            }
            Ok(Output::ok(text))
        }
        Command::Eigenfunction { range, index, lambda, grid, .. } => {
            let g = Grid::uniform(problem, *grid)?;
            let (lambda, index) = match (index, lambda) {
                (Some(0), _) => return Err(Error::Input("eigenvalue index is 1-based".into())),
                (Some(k), _) => {
                    let (lmin, lmax) = range.resolve(problem)?;
                    let spectrum = eigenvalues(problem, lmin, lmax, None, tol)?;
                    let ev = spectrum
                        .eigenvalues
                        .get(k - 1)
                        .ok_or(Error::IndexOutOfRange { index: *k, available: spectrum.eigenvalues.len() })?;
                    (ev.lambda, Some(*k))
                }
                (None, Some(l)) => (*l, None),
                (None, None) => return Err(Error::Input("either --index or --lambda is required".into())),
            };
            let mut e = eigenfunction(lambda, problem, &g, tol)?;
            e.index = index;
            Ok(Output::ok(match format {
                Format::Csv => sides_csv("x,y,dy", &[&e.y, &e.dy]),
                Format::Json => json(&EigenfunctionDoc::new(&e)),
            }))
        }
        Command::Green { lambda, nx, nxi, .. } => {
            let g = green_grid(*lambda, problem, *nx, *nxi, tol)?;
            Ok(Output::ok(match format {
                Format::Csv => {
                    let mut s = String::from("x\\xi");
                    for &xi in &g.xi {
                        let _ = write!(s, ",{}", num(xi));
                    }
                    s.push('\n');
                    for (x, row) in g.x.iter().zip(&g.values) {
                        s.push_str(&num(*x));
                        for v in row {
                            let _ = write!(s, ",{}", num(*v));
                        }
                        s.push('\n');
                    }
                    s
                }
                Format::Json => json(&GreenDoc {
                    lambda: round(g.lambda),
                    x: g.x.iter().copied().map(round).collect(),
                    xi: g.xi.iter().copied().map(round).collect(),
                    values: g.values.iter().map(|r| r.iter().copied().map(round).collect()).collect(),
                }),
            }))
        }
        Command::Solve { lambda, f_left, f_right, grid, .. } => {
            let g = Grid::uniform(problem, *grid)?;
            let (fl, fr) = (Polynomial::new(f_left.clone()), Polynomial::new(f_right.clone()));
            if fl.coeffs.iter().chain(&fr.coeffs).any(|c| !c.is_finite()) {
                return Err(Error::Input("load coefficients must be finite".into()));
            }
            let f = GridFunction::from_polynomials(&g, &fl, &fr);
            let sol = solve_inhomogeneous(&f, *lambda, problem, tol)?;
            Ok(Output::ok(match format {
                Format::Csv => sides_csv("x,y", &[&sol.y]),
                Format::Json => json(&SolveDoc {
                    lambda: round(*lambda),
                    left: Samples::of(Side::Left, &sol.y, None),
                    right: Samples::of(Side::Right, &sol.y, None),
                }),
            }))
        }
        Command::Verify { range, .. } => {
            let (lmin, lmax) = range.resolve(problem)?;
            let report = verify(problem, lmin, lmax, tol)?;
            let all = report.all_pass;
            let text = json(&report);
            if all {
                Ok(Output::ok(text))
            } else {
                Ok(Output { text: Some(text), code: EXIT_NUMERICAL, message: Some("some checks failed".into()) })
            }
        }
    }
}

/// 15 significant digits, `-0` printed as `0`.
pub fn num(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.14e}")
}

fn round(v: f64) -> f64 {
    num(v).parse().unwrap_or(v)
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// Rows of `x` and the given columns per side, sides separated by a blank
/// line.
fn sides_csv(header: &str, columns: &[&GridFunction]) -> String {
    let mut s = format!("{header}\n");
    for (k, side) in [Side::Left, Side::Right].into_iter().enumerate() {
        if k == 1 {
            s.push('\n');
        }
        let xs = columns[0].grid().side(side);
        for (i, x) in xs.iter().enumerate() {
            s.push_str(&num(*x));
            for c in columns {
                let _ = write!(s, ",{}", num(c.values(side)[i]));
            }
            s.push('\n');
        }
    }
    s
}

#[derive(Serialize)]
struct EigenvalueRow {
    index: usize,
    lambda: f64,
    abs_omega: f64,
    bracket: [f64; 2],
}

#[derive(Serialize)]
struct Samples {
    x: Vec<f64>,
    y: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dy: Option<Vec<f64>>,
}

impl Samples {
    fn of(side: Side, y: &GridFunction, dy: Option<&GridFunction>) -> Self {
        Self {
            x: y.grid().side(side).iter().copied().map(round).collect(),
            y: y.values(side).iter().copied().map(round).collect(),
            dy: dy.map(|d| d.values(side).iter().copied().map(round).collect()),
        }
    }
}

#[derive(Serialize)]
struct EigenfunctionDoc {
    index: Option<usize>,
    lambda: f64,
    norm_squared: f64,
    abs_omega: f64,
    left: Samples,
    right: Samples,
}

impl EigenfunctionDoc {
    fn new(e: &Eigenpair) -> Self {
        Self {
            index: e.index,
            lambda: round(e.lambda),
            norm_squared: round(e.norm_squared),
            abs_omega: round(e.residual),
            left: Samples::of(Side::Left, &e.y, Some(&e.dy)),
            right: Samples::of(Side::Right, &e.y, Some(&e.dy)),
        }
    }
}

#[derive(Serialize)]
struct GreenDoc {
    lambda: f64,
    x: Vec<f64>,
    xi: Vec<f64>,
    values: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct SolveDoc {
    lambda: f64,
    left: Samples,
    right: Samples,
}

/// One invariant check of the verify report.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub measured: f64,
    pub threshold: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    fn new(name: &'static str, measured: f64, threshold: f64) -> Self {
        Self { name, measured: round(measured), threshold, pass: measured <= threshold, note: None }
    }

    fn skipped(name: &'static str, note: &str) -> Self {
        Self { name, measured: 0.0, threshold: 0.0, pass: true, note: Some(note.into()) }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub minors: [f64; 6],
    pub eigenvalues: Vec<f64>,
    pub checks: Vec<Check>,
    pub all_pass: bool,
}

/// λ values for the shooting checks.
fn check_lambdas() -> Vec<f64> {
    (0..20).map(|k| 0.01 + (25.0 - 0.01) * k as f64 / 19.0).collect()
}

/// First candidate where the resolvent exists.
fn admissible(problem: &Problem, tol: f64, candidates: &[f64]) -> Result<Resolvent> {
    let mut last = None;
    for &l in candidates {
        match Resolvent::new(l, problem, tol) {
            Ok(r) => return Ok(r),
            Err(e @ Error::SingularResolvent { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("candidates are non-empty"))
}

/// Runs every invariant suite on `problem`. Eigenpair checks use the
/// eigenvalues in `[λmin, λmax)`.
pub fn verify(problem: &Problem, lambda_min: f64, lambda_max: f64, tol: f64) -> Result<VerifyReport> {
    let mut checks = Vec::new();
    let m = problem.minors();
    let t = problem.transmission();
    checks.push(Check::new("plucker", m.plucker_defect(), 8.0 * f64::EPSILON * t.plucker_scale()));

    let mut consistency: f64 = 0.0;
    let mut transmission: f64 = 0.0;
    let mut closed_form: f64 = 0.0;
    for l in check_lambdas() {
        let pair = FundamentalPair::new(l, problem, tol)?;
        let w = pair.value.omega;
        consistency = consistency.max(pair.value.consistency_defect / (1.0 + w.abs()));
        for s in [&pair.phi, &pair.chi] {
            let [g1, g2] = s.transmission_residuals(problem);
            transmission = transmission.max(g1.abs().max(g2.abs()) / s.trace_scale().max(1.0));
        }
        if problem.potential().is_zero() {
            closed_form = closed_form.max((closed_form_characteristic_q0(l, problem)? - w).abs() / (1.0 + w.abs()));
        }
    }
    checks.push(Check::new("wronskian_consistency", consistency, 1e-8));
    checks.push(Check::new("transmission_residuals", transmission, 1e-8));
    if problem.potential().is_zero() {
        checks.push(Check::new("closed_form_omega", closed_form, 1e-8));
    } else {
        checks.push(Check::skipped("closed_form_omega", "potential is not identically zero"));
    }

    let grid = Grid::uniform(problem, DEFAULT_POINTS_PER_SIDE)?;
    let loads = [
        (Polynomial::new(vec![1.0, -0.5, 0.25]), Polynomial::new(vec![0.5, 1.0])),
        (Polynomial::new(vec![-1.0, 0.0, 0.3]), Polynomial::new(vec![2.0, -0.2, 0.0, 0.05])),
        (Polynomial::constant(1.0), Polynomial::new(vec![0.0, 0.0, 1.0])),
    ];
    let mut symmetry: f64 = 0.0;
    for candidates in [[-2.0, -2.3], [0.6, 0.7], [3.3, 3.5]] {
        let r = admissible(problem, tol, &candidates)?;
        for i in 0..loads.len() {
            let f1 = GridFunction::from_polynomials(&grid, &loads[i].0, &loads[i].1);
            let j = (i + 1) % loads.len();
            let f2 = GridFunction::from_polynomials(&grid, &loads[j].0, &loads[j].1);
            let c = symmetry_defect_with(&r, &f1, &f2)?;
            symmetry = symmetry.max(c.defect / (1.0 + c.input_norms));
        }
    }
    checks.push(Check::new("symmetry_defect", symmetry, 1e-7));

    let spectrum = eigenvalues(problem, lambda_min, lambda_max, None, tol)?;
    let found: Vec<f64> = spectrum.eigenvalues.iter().map(|e| e.lambda).collect();
    let pairs: Vec<Eigenpair> =
        found.iter().take(5).map(|&l| eigenfunction(l, problem, &grid, tol)).collect::<Result<_>>()?;
    if pairs.len() >= 2 {
        let mut orth: f64 = 0.0;
        let mut normalization: f64 = 0.0;
        let mut proportionality: f64 = 0.0;
        for i in 0..pairs.len() {
            normalization = normalization.max((inner_product(&pairs[i].y, &pairs[i].y, problem)? - 1.0).abs());
            proportionality = proportionality.max(pairs[i].proportionality_defect);
            for j in 0..i {
                orth = orth.max(orthogonality_defect(&pairs[i], &pairs[j], problem)?);
            }
        }
        checks.push(Check::new("orthogonality", orth, 1e-8));
        checks.push(Check::new("normalization", normalization, 1e-8));
        checks.push(Check::new("proportionality", proportionality, 1e-8));
    } else {
        for name in ["orthogonality", "normalization", "proportionality"] {
            checks.push(Check::skipped(name, "fewer than two eigenvalues in range"));
        }
    }

    let g0 = admissible(problem, tol, &[0.0, -1.0, 0.6, -2.5])?.lambda();
    let g = green_grid(g0, problem, 11, 11, tol)?;
    checks.push(Check::new("green_symmetry", g.symmetry_defect().unwrap_or(f64::INFINITY), 1e-8));

    let want = found.len().min(4);
    if want > 0 {
        // finite-difference eigenvalues below the scanned range are skipped
        let fd = FdSystem::new(problem, 2000)?.lowest_eigenvalues(want + 8);
        let fd: Vec<f64> = fd.into_iter().filter(|&l| l >= lambda_min - 1e-3).take(want).collect();
        let agreement = fd.iter().zip(&found).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let mut check = Check::new("fd_oracle_agreement", agreement, 1e-3);
        if fd.len() < want {
            check.pass = false;
            check.note = Some("finite differences found fewer eigenvalues than shooting".into());
        }
        checks.push(check);
    } else {
        checks.push(Check::skipped("fd_oracle_agreement", "no eigenvalues in range"));
    }

    let all_pass = checks.iter().all(|c| c.pass);
    Ok(VerifyReport {
        minors: m.as_array().map(round),
        eigenvalues: found.into_iter().map(round).collect(),
        checks,
        all_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(num(0.25), "2.50000000000000e-1");
        assert_eq!(num(-0.0), "0.00000000000000e0");
        assert_eq!(num(-1234.5), "-1.23450000000000e3");
        assert_eq!(round(2.0 / 3.0), 0.666666666666667);
    }

    #[test]
    fn exit_code_table() {
        assert_eq!(exit_code(&Error::Input("x".into())), EXIT_INPUT);
        assert_eq!(exit_code(&Error::BadGrid("x".into())), EXIT_INPUT);
        assert_eq!(exit_code(&Error::IndexOutOfRange { index: 9, available: 2 }), EXIT_EMPTY);
        assert_eq!(exit_code(&Error::SingularResolvent { lambda: 0.25, omega: 0.0, threshold: 1e-8 }), EXIT_SINGULAR);
        assert_eq!(exit_code(&Error::NoConvergence { iterations: 200 }), EXIT_NUMERICAL);
    }

    #[test]
    fn parses_negative_coefficients() {
        let cli = Cli::try_parse_from(["x", "solve", "--spec", "s.json", "--lambda", "-1", "--f-left", "-1,2.5", "--f-right", "3"]).unwrap();
        match cli.command {
            Command::Solve { lambda, f_left, f_right, .. } => {
                assert_eq!(lambda, -1.0);
                assert_eq!(f_left, vec![-1.0, 2.5]);
                assert_eq!(f_right, vec![3.0]);
            }
            _ => panic!("wrong command"),
        }
    }
}
