//! Execution of each command: read inputs, call the library, write outputs.

use std::fs;
use std::path::Path;

use momentfit::assess::{error_metrics, superlevel_set, symmetric_difference, write_csv, ErrorReport, EvaluationGrid};
use momentfit::catalog::{domain_moments, MomentRepr};
use momentfit::confit::{fit_localizing, fit_putinar, ConstrainedOptions, PutinarCertificate};
use momentfit::l2fit::{fit_with, FitOptions, FitReport, ReferenceMeasure};
use momentfit::maxent::{maxent_fit, ExpPolyDensity, MaxentDiagnostics, MaxentOptions};
use momentfit::moments::{perturb_relative, MomentFile};
use momentfit::tables::{golden, GoldenRow};
use momentfit::{BoxDomain, Error, MomentBasis, MomentVector, Polynomial, SemialgebraicDomain};
use serde::{Deserialize, Serialize};

use crate::config::{AssessArgs, FitArgs, Method, MomentsArgs, Output, PerturbArgs, RunConfig};

/// Failure of a command, mapped onto the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Malformed or inconsistent input (exit 2).
    Input(String),
    /// A solver did not reach an optimal point (exit 3).
    Solver(String),
    /// A golden check found rows out of tolerance (exit 4).
    Mismatch(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Mismatch(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Solver(m) => write!(f, "solver failure: {m}"),
            CliError::Mismatch(n) => write!(f, "{n} golden row(s) out of tolerance"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::SolverFailed { .. }
            | Error::LineSearchFailure
            | Error::Diverged
            | Error::SingularMomentMatrix { .. }
            | Error::NotPositiveDefinite { .. } => CliError::Solver(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

type Density = Box<dyn Fn(&[f64]) -> f64 + Sync>;

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Pretty JSON with a trailing newline, to `out` or stdout.
fn emit<T: Serialize>(value: &T, output: &Output) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Input(e.to_string()))?;
    text.push('\n');
    match &output.out {
        Some(path) => write_bytes(path, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_moments(path: &Path) -> Result<MomentVector> {
    let file: MomentFile = read_json(path)?;
    Ok(MomentVector::try_from(file)?)
}

/// Every output starts with these two fields.
#[derive(Debug, Serialize, Deserialize)]
pub struct Header {
    pub version: String,
    pub config: RunConfig,
}

impl Header {
    fn new(config: &RunConfig) -> Self {
        Self {
            version: momentfit::VERSION.into(),
            config: config.clone(),
        }
    }
}

pub fn run(config: &RunConfig) -> Result<()> {
    match config {
        RunConfig::Moments(a) => moments(a, config),
        RunConfig::Fit(a) => fit(a, config),
        RunConfig::Assess(a) => assess(a, config),
        RunConfig::Perturb(a) => perturb(a, config),
    }
}

/// Re-executes the configuration recorded in an output file.
pub fn rerun(file: &Path, output: Output) -> Result<()> {
    let mut header: Header = read_json(file)?;
    header.config.set_output(output);
    run(&header.config)
}

#[derive(Serialize)]
struct MomentsOutput<'a> {
    #[serde(flatten)]
    header: Header,
    #[serde(flatten)]
    moments: &'a MomentFile,
}

fn moments(a: &MomentsArgs, config: &RunConfig) -> Result<()> {
    let y = match (&a.builtin, &a.domain) {
        (Some(b), None) => b.moments(a.degree, a.basis, a.frame.as_ref(), a.nodes)?,
        (None, Some(path)) => {
            let domain: SemialgebraicDomain = read_json(path)?;
            let y = domain_moments(&domain, a.degree, MomentRepr::Monomial, a.nodes);
            match (a.basis, &a.frame) {
                (MomentRepr::Monomial, _) => y,
                (MomentRepr::Legendre, frame) => y.to_legendre(frame.as_ref().unwrap_or(domain.bounding_box()))?,
            }
        }
        _ => return Err(CliError::Input("give exactly one of --builtin and --domain".into())),
    };
    let file = MomentFile::from(y);
    emit(
        &MomentsOutput {
            header: Header::new(config),
            moments: &file,
        },
        &a.output,
    )
}

fn perturb(a: &PerturbArgs, config: &RunConfig) -> Result<()> {
    let y = read_moments(&a.moments)?;
    let file = MomentFile::from(perturb_relative(&y, a.amplitude, a.seed)?);
    emit(
        &MomentsOutput {
            header: Header::new(config),
            moments: &file,
        },
        &a.output,
    )
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MaxentOutput {
    pub density: ExpPolyDensity,
    pub diagnostics: MaxentDiagnostics,
}

/// Result of `fit`: a polynomial report (with a certificate for Putinar
/// fits) or a maximum-entropy density.
#[derive(Debug, Serialize, Deserialize)]
pub struct FitOutput {
    #[serde(flatten)]
    pub header: Header,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<FitReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<PutinarCertificate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maxent: Option<MaxentOutput>,
}

fn reference_measure(a: &FitArgs, y: &MomentVector) -> Result<ReferenceMeasure> {
    if let Some(path) = &a.reference {
        let z = read_moments(path)?;
        let frame = match (&a.frame, z.basis()) {
            (Some(frame), _) => frame.clone(),
            (None, MomentBasis::Legendre(frame)) => frame.clone(),
            (None, MomentBasis::Monomial) => {
                return Err(CliError::Input("monomial reference moments need a --frame".into()))
            }
        };
        return Ok(ReferenceMeasure::moments(z, frame)?);
    }
    match (&a.bbox, y.basis()) {
        (Some(bbox), _) => Ok(ReferenceMeasure::lebesgue(bbox.clone())),
        (None, MomentBasis::Legendre(frame)) => Ok(ReferenceMeasure::lebesgue(frame.clone())),
        (None, MomentBasis::Monomial) => Err(CliError::Input(
            "monomial moments need a reference measure: pass --box or --reference".into(),
        )),
    }
}

fn constrained_options(a: &FitArgs) -> ConstrainedOptions {
    let mut options = ConstrainedOptions::default();
    if let Some(tol) = a.tol {
        options.sdp.tol = tol;
    }
    if let Some(max_iter) = a.max_iter {
        options.sdp.max_iter = max_iter;
    }
    options.localizing_order = a.localizing_order;
    options
}

fn fit(a: &FitArgs, config: &RunConfig) -> Result<()> {
    let y = read_moments(&a.moments)?;
    let reference = reference_measure(a, &y)?;
    let d = a.degree.unwrap_or(y.degree());
    let mut out = FitOutput {
        header: Header::new(config),
        report: None,
        certificate: None,
        maxent: None,
    };
    match a.method {
        Method::L2 | Method::L2reg => {
            if a.method == Method::L2reg && (a.eps.is_nan() || a.eps <= 0.0) {
                return Err(CliError::Input("l2reg needs a positive --eps".into()));
            }
            let eps = if a.method == Method::L2 { 0.0 } else { a.eps };
            out.report = Some(fit_with(
                &y,
                &reference,
                d,
                &FitOptions {
                    basis: a.basis,
                    eps,
                    fast_path: true,
                },
            )?);
        }
        Method::Localizing => out.report = Some(fit_localizing(&y, &reference, d, &constrained_options(a))?),
        Method::Putinar => {
            let domain = match (&a.domain, &a.support_of) {
                (Some(path), _) => read_json::<SemialgebraicDomain>(path)?,
                (None, Some(b)) => b
                    .support_domain()
                    .ok_or_else(|| CliError::Input(format!("builtin '{b}' is not the indicator of a set")))?,
                (None, None) => SemialgebraicDomain::from_box(reference.frame().clone()),
            };
            let (report, certificate) = fit_putinar(&y, &reference, d, &domain, &constrained_options(a))?;
            if let Some(path) = &a.certificate {
                let mut text =
                    serde_json::to_string_pretty(&certificate).map_err(|e| CliError::Input(e.to_string()))?;
                text.push('\n');
                write_bytes(path, text.as_bytes())?;
            }
            out.report = Some(report);
            out.certificate = Some(certificate);
        }
        Method::Maxent => {
            let ReferenceMeasure::Lebesgue { bbox } = &reference else {
                return Err(CliError::Input(
                    "maximum-entropy fits are defined against Lebesgue measure on a box".into(),
                ));
            };
            let mut options = MaxentOptions {
                quad_nodes: a.quad_nodes,
                ..MaxentOptions::default()
            };
            if let Some(tol) = a.tol {
                options.tol = tol;
            }
            if let Some(max_iter) = a.max_iter {
                options.max_iter = max_iter;
            }
            let (density, diagnostics) = maxent_fit(&y, d, bbox, &options)?;
            out.maxent = Some(MaxentOutput { density, diagnostics });
        }
    }
    emit(&out, &a.output)
}

/// Pointwise evaluator of a fit output.
pub enum Estimate {
    Polynomial(Polynomial),
    Exponential(ExpPolyDensity),
}

impl Estimate {
    fn read(path: &Path) -> Result<Self> {
        let out: FitOutput = read_json(path)?;
        match (out.report, out.maxent) {
            (Some(r), _) => Ok(Estimate::Polynomial(r.estimate)),
            (None, Some(m)) => Ok(Estimate::Exponential(m.density)),
            (None, None) => Err(CliError::Input(format!("{}: not a fit output", path.display()))),
        }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Estimate::Polynomial(p) => p.eval(x),
            Estimate::Exponential(e) => e.eval(x),
        }
    }

    fn frame(&self) -> &BoxDomain {
        match self {
            Estimate::Polynomial(p) => p.domain(),
            Estimate::Exponential(e) => &e.domain,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ShapeReport {
    pub threshold: f64,
    pub estimate_area: f64,
    pub truth_area: f64,
    pub symmetric_difference: f64,
}

#[derive(Serialize)]
struct AssessOutput {
    #[serde(flatten)]
    header: Header,
    errors: ErrorReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    shape: Option<ShapeReport>,
}

#[derive(Serialize)]
struct CheckOutput {
    #[serde(flatten)]
    header: Header,
    table: String,
    rows: Vec<GoldenRow>,
    pass: bool,
}

fn check(table: &str, a: &AssessArgs, config: &RunConfig) -> Result<()> {
    let rows = golden(table)?;
    for row in &rows {
        eprintln!("{row}");
    }
    let failed = rows.iter().filter(|r| !r.pass).count();
    emit(
        &CheckOutput {
            header: Header::new(config),
            table: table.into(),
            pass: failed == 0,
            rows,
        },
        &a.output,
    )?;
    if failed > 0 {
        Err(CliError::Mismatch(failed))
    } else {
        Ok(())
    }
}

fn assess(a: &AssessArgs, config: &RunConfig) -> Result<()> {
    if let Some(table) = &a.check {
        return check(table, a, config);
    }
    let fit_path = a
        .fit
        .as_ref()
        .ok_or_else(|| CliError::Input("--fit is required".into()))?;
    let estimate = Estimate::read(fit_path)?;
    let truth: Density = match (&a.truth, &a.truth_fit) {
        (Some(b), None) => {
            let b = *b;
            Box::new(move |x: &[f64]| b.truth(x))
        }
        (None, Some(path)) => {
            let t = Estimate::read(path)?;
            Box::new(move |x: &[f64]| t.eval(x))
        }
        _ => return Err(CliError::Input("give exactly one of --truth and --truth-fit".into())),
    };
    let bbox = a.bbox.clone().unwrap_or_else(|| estimate.frame().clone());
    if bbox.dim() != estimate.frame().dim() {
        return Err(Error::DimensionMismatch {
            expected: estimate.frame().dim(),
            found: bbox.dim(),
        }
        .into());
    }
    let grid = match a.nodes {
        Some(n) => EvaluationGrid::new(bbox, n)?,
        None => EvaluationGrid::default_for(&bbox),
    };
    if !(0.0..0.5).contains(&a.margin) {
        return Err(CliError::Input(format!(
            "--margin must lie in [0, 0.5), got {}",
            a.margin
        )));
    }
    let est = |x: &[f64]| estimate.eval(x);
    let errors = error_metrics(&truth, est, &grid, a.margin);
    let shape = match a.threshold {
        Some(threshold) => {
            let fitted = superlevel_set(est, &grid, threshold);
            let reference = superlevel_set(&truth, &grid, threshold);
            if let Some(path) = &a.pgm {
                write_bytes(path, &fitted.to_pgm()?)?;
            }
            Some(ShapeReport {
                threshold,
                estimate_area: fitted.area(),
                truth_area: reference.area(),
                symmetric_difference: symmetric_difference(&fitted, &reference)?,
            })
        }
        None => None,
    };
    if let Some(path) = &a.csv {
        let file = fs::File::create(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        write_csv(std::io::BufWriter::new(file), &grid, &truth, est)?;
    }
    emit(
        &AssessOutput {
            header: Header::new(config),
            errors,
            shape,
        },
        &a.output,
    )
}
