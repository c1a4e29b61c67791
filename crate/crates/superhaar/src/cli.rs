//! Command-line front end: spec parsing, integrals, tables, verification
//! suites and sampling, all reported as JSON.

use std::ffi::OsString;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};
use thiserror::Error;

use crate::charts::{check_antipode, check_defining_relations, embed, sampled_closure_residual, SuperPoint};
use crate::groups::{sample, sample_rng, GroupError, GroupKind, GroupSpec, HaarStrategy};
use crate::integration::{
    all_passed, integrate, random_polynomial, u11_table, u11_table_json, verify_density_pde, verify_invariance, Check,
    DensityVariant, Parallelism,
};
use crate::matrix::Matrix;
use crate::superalgebra::{
    coordinate_realization_osp, coordinate_realization_u, verify_antisymmetry, verify_bracket, verify_jacobi,
    verify_matrix_consistency, AlgebraError, AlgebraReport, Reading,
};
use crate::symbols::{parse_polynomial, Alphabet};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecError {
    #[error("expected osp:m=M,n=N, u:p=P,q=Q or uosp:m=M,n=N, got {0:?}")]
    Malformed(String),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// Parses `osp:m=M,n=N`, `u:p=P,q=Q` or `uosp:m=M,n=N`.
pub fn parse_spec(text: &str) -> Result<GroupSpec, SpecError> {
    let malformed = || SpecError::Malformed(text.to_string());
    let (kind, rest) = text.trim().split_once(':').ok_or_else(malformed)?;
    let keys: &[&str] = match kind {
        "osp" | "uosp" => &["m", "n"],
        "u" => &["p", "q"],
        _ => return Err(malformed()),
    };
    let fields: Vec<(&str, &str)> =
        rest.split(',').map(|field| field.split_once('=').ok_or_else(malformed)).collect::<Result<_, _>>()?;
    if fields.len() != 2 || fields.iter().zip(keys).any(|((key, _), expected)| key.trim() != *expected) {
        return Err(malformed());
    }
    let value = |k: usize| fields[k].1.trim().parse::<usize>().map_err(|_| malformed());
    let (a, b) = (value(0)?, value(1)?);
    Ok(match kind {
        "osp" => GroupSpec::osp(a, b)?,
        "uosp" => GroupSpec::uosp(a, b)?,
        _ => GroupSpec::unitary(a, b)?,
    })
}

#[derive(Debug, Parser)]
#[command(name = "superhaar", version, about = "Invariant integration on OSp(m|2n), U(p|q) and UOSp(m|2n)")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a polynomial in the entries of X and X*.
    Integrate(IntegrateArgs),
    /// Tabulate monomial integrals against their closed formula.
    Table(TableArgs),
    /// Run verification suites; exits 1 if any check fails.
    Verify(VerifyArgs),
    /// Embed the universal odd coordinates over a Haar-random classical point.
    Sample(SampleArgs),
}

#[derive(Debug, Args)]
pub struct Output {
    /// Seed for every random choice.
    #[arg(long, env = "SUPERHAAR_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Mc,
}

#[derive(Debug, Args)]
pub struct IntegrateArgs {
    #[arg(long)]
    pub spec: String,
    /// Polynomial such as "X[1,1]*Xs[1,1] - 1/2*X[1,2]*X[2,1]".
    #[arg(long)]
    pub monomial: String,
    /// `exact` needs U(1|1) or a classical-independent integrand; default is
    /// exact on U(1|1) and Monte-Carlo elsewhere.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TableKind {
    U11,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    pub kind: TableKind,
    /// Largest exponent of the even entries (odd entries take 0 and 1).
    #[arg(long, default_value_t = 2)]
    pub max_exp: u32,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    All,
    Charts,
    Algebra,
    Density,
    Invariance,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub suite: Suite,
    #[arg(long)]
    pub spec: String,
    /// Random points for the chart and realization checks.
    #[arg(long, default_value_t = 10)]
    pub points: u64,
    /// Monte-Carlo samples for the invariance suite.
    #[arg(long, default_value_t = 20_000)]
    pub samples: usize,
    /// Random polynomials for the invariance suite.
    #[arg(long, default_value_t = 4)]
    pub polynomials: usize,
    /// Also run the Jacobi identity over all basis triples.
    #[arg(long)]
    pub exhaustive: bool,
    /// Feed det^{+1/2} to the density equation (negative control).
    #[arg(long, hide = true)]
    pub corrupt_density: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub spec: String,
    #[command(flatten)]
    pub output: Output,
}

/// Exit code and the text to print: the JSON report, or a usage message for stderr.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub text: String,
}

impl Outcome {
    fn usage(message: impl std::fmt::Display) -> Self {
        Self { code: EXIT_USAGE, text: format!("error: {message}\n") }
    }
}

pub const RELATIONS: &str = "X satisfies the defining block relations";
pub const ANTIPODE: &str = "ν(X)·X = X·ν(X) = I and ν∘ν = id";
pub const CLOSURE: &str = "embed(decompose(X₁·X₂)) = X₁·X₂";
pub const BRACKET: &str = "supercommutators of the derivations reproduce the structure constants";
pub const MATRIX_CONSISTENCY: &str = "derivation action agrees with the defining matrix";
pub const ANTISYMMETRY: &str = "[D₁, D₂] = −(−1)^{|D₁||D₂|}[D₂, D₁]";
pub const JACOBI: &str = "graded Jacobi identity";
pub const REALIZATION: &str = "coordinate realization reproduces the action on X";
pub const INVARIANCE: &str = "∫ is invariant (group and algebra parts)";

const TOLERANCE: f64 = 1e-10;

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(config) => config,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            return Outcome { code, text: e.to_string() };
        }
    };
    let (result, output) = match &config.command {
        Command::Integrate(a) => (run_integrate(a), &a.output),
        Command::Table(a) => (run_table(a), &a.output),
        Command::Verify(a) => (run_verify(a), &a.output),
        Command::Sample(a) => (run_sample(a), &a.output),
    };
    match result {
        Err(outcome) => outcome,
        Ok((code, report)) => {
            let text = serde_json::to_string_pretty(&report).expect("JSON values serialize") + "\n";
            match &output.out {
                Some(path) => match std::fs::write(path, &text) {
                    Ok(()) => Outcome { code, text: String::new() },
                    Err(e) => Outcome::usage(format!("cannot write {}: {e}", path.display())),
                },
                None => Outcome { code, text },
            }
        }
    }
}

type Report = Result<(i32, Value), Outcome>;

fn spec_of(text: &str) -> Result<GroupSpec, Outcome> {
    parse_spec(text).map_err(Outcome::usage)
}

fn run_integrate(args: &IntegrateArgs) -> Report {
    let spec = spec_of(&args.spec)?;
    let f = parse_polynomial(Alphabet::for_spec(&spec), &args.monomial).map_err(Outcome::usage)?;
    let mode = args.mode.unwrap_or(if spec.is_torus() { ModeArg::Exact } else { ModeArg::Mc });
    let strategy = match mode {
        ModeArg::Exact if spec.is_torus() => HaarStrategy::ExactPhase,
        ModeArg::Exact => HaarStrategy::MonteCarlo { samples: 0, seed: args.output.seed },
        ModeArg::Mc => HaarStrategy::MonteCarlo { samples: args.samples, seed: args.output.seed },
    };
    let result = integrate(&spec, &f, strategy).map_err(Outcome::usage)?;
    let mut report = result.to_json();
    report["spec"] = json!(spec.label());
    report["polynomial"] = json!(args.monomial);
    Ok((EXIT_OK, report))
}

fn run_table(args: &TableArgs) -> Report {
    let TableKind::U11 = args.kind;
    let cells = u11_table(args.max_exp).map_err(Outcome::usage)?;
    let mut report = u11_table_json(&cells);
    report["identity"] = json!("∫_{U(1|1)} X^α X*^β against its closed formula");
    report["max_exp"] = json!(args.max_exp);
    let code = if cells.iter().all(|c| c.matches) { EXIT_OK } else { EXIT_FAILED };
    Ok((code, report))
}

fn run_sample(args: &SampleArgs) -> Report {
    let spec = spec_of(&args.spec)?;
    let classical = sample(&spec, &mut sample_rng(args.output.seed, 0));
    let matrix = embed(&spec, &SuperPoint::universal(&spec, &classical)).map_err(Outcome::usage)?;
    let numbers = |m: &Matrix<Complex64>| -> Value {
        json!((0..m.rows())
            .map(|i| (0..m.cols()).map(|j| [m.get(i, j).re, m.get(i, j).im]).collect::<Vec<_>>())
            .collect::<Vec<_>>())
    };
    Ok((
        EXIT_OK,
        json!({
            "spec": spec.label(),
            "seed": args.output.seed,
            "x": numbers(&classical.x),
            "y": numbers(&classical.y),
            "matrix": matrix.to_json(),
        }),
    ))
}

fn run_verify(args: &VerifyArgs) -> Report {
    let spec = spec_of(&args.spec)?;
    let seed = args.output.seed;
    let wanted = |suite: Suite| args.suite == Suite::All || args.suite == suite;
    let mut checks = Vec::new();
    if wanted(Suite::Charts) {
        checks.extend(chart_checks(&spec, seed, args.points));
    }
    if wanted(Suite::Algebra) {
        checks.extend(algebra_checks(&spec, seed, args.points, args.exhaustive));
    }
    if wanted(Suite::Density) {
        let variant = if args.corrupt_density { DensityVariant::Corrupted } else { DensityVariant::Correct };
        match verify_density_pde(&spec, variant) {
            Ok(found) => checks.extend(found),
            Err(e) if args.suite == Suite::All => checks.push(skipped("density", &spec, e)),
            Err(e) => checks.push(Check::new("density", spec.label(), false, e.to_string())),
        }
    }
    if wanted(Suite::Invariance) {
        checks.push(invariance_check(&spec, seed, args));
    }
    let passed = all_passed(&checks);
    let report = json!({
        "spec": spec.label(),
        "suite": format!("{:?}", args.suite).to_lowercase(),
        "seed": seed,
        "passed": passed,
        "checks": checks.iter().map(Check::to_json).collect::<Vec<_>>(),
    });
    Ok((if passed { EXIT_OK } else { EXIT_FAILED }, report))
}

fn skipped(what: &'static str, spec: &GroupSpec, reason: impl std::fmt::Display) -> Check {
    Check::new(what, spec.label(), true, format!("skipped: {reason}"))
}

fn worst(values: impl Iterator<Item = Result<f64, String>>) -> (f64, Option<String>) {
    let mut max: f64 = 0.0;
    for value in values {
        match value {
            Ok(v) => max = max.max(v),
            Err(e) => return (f64::INFINITY, Some(e)),
        }
    }
    (max, None)
}

fn residual_check(identity: &'static str, spec: &GroupSpec, points: u64, (max, error): (f64, Option<String>)) -> Check {
    let detail = match error {
        Some(e) => e,
        None => format!("{points} points, max residual {max:.1e}"),
    };
    Check::new(identity, spec.label(), max <= TOLERANCE, detail)
}

fn chart_checks(spec: &GroupSpec, seed: u64, points: u64) -> Vec<Check> {
    let universal = |k: u64| {
        let g = sample(spec, &mut sample_rng(seed, k));
        embed(spec, &SuperPoint::universal(spec, &g))
    };
    let relations = worst((0..points).map(|k| {
        universal(k).and_then(|x| check_defining_relations(spec, &x)).map(|r| r.max()).map_err(|e| e.to_string())
    }));
    let antipode = worst(
        (0..points)
            .map(|k| universal(k).and_then(|x| check_antipode(spec, &x)).map(|r| r.max()).map_err(|e| e.to_string())),
    );
    let closure =
        worst((0..points).map(|k| sampled_closure_residual(spec, seed, k, TOLERANCE).map_err(|e| e.to_string())));
    vec![
        residual_check(RELATIONS, spec, points, relations),
        residual_check(ANTIPODE, spec, points, antipode),
        residual_check(CLOSURE, spec, points, closure),
    ]
}

fn algebra_report(identity: &'static str, spec: &GroupSpec, report: Result<AlgebraReport, AlgebraError>) -> Check {
    match report {
        Ok(r) => {
            let detail = if r.passed() {
                format!("{} relations, exact", r.checked)
            } else {
                format!("{} of {} fail: {}", r.mismatches.len(), r.checked, r.mismatches.join("; "))
            };
            Check::new(identity, spec.label(), r.passed(), detail)
        }
        Err(e @ AlgebraError::Unsupported(_)) => skipped(identity, spec, e),
        Err(e) => Check::new(identity, spec.label(), false, e.to_string()),
    }
}

fn algebra_checks(spec: &GroupSpec, seed: u64, points: u64, exhaustive: bool) -> Vec<Check> {
    if let GroupKind::UnitaryOrthosymplectic { .. } = spec.kind {
        return vec![skipped("superalgebra", spec, "no derivation action is implemented for UOSp")];
    }
    let mut checks = vec![
        algebra_report(BRACKET, spec, verify_bracket(spec)),
        algebra_report(MATRIX_CONSISTENCY, spec, verify_matrix_consistency(spec)),
        algebra_report(ANTISYMMETRY, spec, verify_antisymmetry(spec)),
    ];
    if exhaustive {
        checks.push(algebra_report(JACOBI, spec, verify_jacobi(spec)));
    }
    let realization = worst((0..points).map(|k| {
        let g = sample(spec, &mut sample_rng(seed, k));
        let point = SuperPoint::universal(spec, &g);
        let reports = match spec.kind {
            GroupKind::Unitary { .. } => coordinate_realization_u(spec, &point, Reading::Consistent),
            _ => coordinate_realization_osp(spec, &point, Reading::Consistent),
        };
        reports.map(|rs| rs.iter().map(|r| r.max()).fold(0.0, f64::max)).map_err(|e| e.to_string())
    }));
    checks.push(residual_check(REALIZATION, spec, points, realization));
    checks
}

fn invariance_check(spec: &GroupSpec, seed: u64, args: &VerifyArgs) -> Check {
    let mut rng = sample_rng(seed, u64::MAX);
    let polys: Vec<_> = (0..args.polynomials).map(|_| random_polynomial(spec, 2, 3, &mut rng)).collect();
    let strategy = if spec.is_torus() {
        HaarStrategy::ExactPhase
    } else {
        HaarStrategy::MonteCarlo { samples: args.samples, seed }
    };
    match verify_invariance(spec, &polys, strategy, 2, Parallelism::default()) {
        Ok(deviations) => {
            let failed: Vec<String> = deviations
                .iter()
                .filter(|d| !d.passed)
                .map(|d| format!("f#{} {} {:?}", d.polynomial, d.label, d.result.estimate.to_complex()))
                .collect();
            let exact = deviations.iter().filter(|d| d.result.mode.is_exact()).count();
            let detail = if failed.is_empty() {
                format!("{} deviations ({exact} exact), all within bounds", deviations.len())
            } else {
                format!("{} of {} deviations out of bounds: {}", failed.len(), deviations.len(), failed.join("; "))
            };
            Check::new(INVARIANCE, spec.label(), failed.is_empty(), detail)
        }
        Err(e) => Check::new(INVARIANCE, spec.label(), false, e.to_string()),
    }
}
