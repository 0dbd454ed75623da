//! Published error tables re-run as golden checks.
//!
//! Each row recomputes one tabulated number from the builtin moments and
//! compares it with the published value under a per-row tolerance. Average
//! errors are compared as means over the box ([`ErrorReport::mean_error`]),
//! the quantity the tables report.

use serde::{Deserialize, Serialize};

use crate::assess::{error_metrics, ErrorReport, EvaluationGrid, DEFAULT_INTERIOR_MARGIN};
use crate::catalog::{Builtin, MomentRepr};
use crate::confit::{fit_putinar, ConstrainedOptions};
use crate::domain::SemialgebraicDomain;
use crate::error::{Error, Result};
use crate::l2fit::{fit_unconstrained, ReferenceMeasure};
use crate::poly::{Basis, Polynomial};

/// Acceptance rule of one golden row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Criterion {
    /// `|measured/expected − 1| ≤ tol`.
    Relative { expected: f64, tol: f64 },
    /// `|measured − expected| ≤ tol`.
    Absolute { expected: f64, tol: f64 },
    /// `measured ≤ bound`.
    AtMost { bound: f64 },
    /// `measured ≥ bound`.
    AtLeast { bound: f64 },
}

impl Criterion {
    pub fn holds(&self, measured: f64) -> bool {
        match *self {
            Criterion::Relative { expected, tol } => (measured / expected - 1.0).abs() <= tol,
            Criterion::Absolute { expected, tol } => (measured - expected).abs() <= tol,
            Criterion::AtMost { bound } => measured <= bound,
            Criterion::AtLeast { bound } => measured >= bound,
        }
    }
}

impl std::fmt::Display for Criterion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            Criterion::Relative { expected, tol } => write!(f, "{expected} ±{}%", tol * 100.0),
            Criterion::Absolute { expected, tol } => write!(f, "{expected} ±{tol}"),
            Criterion::AtMost { bound } => write!(f, "≤ {bound:e}"),
            Criterion::AtLeast { bound } => write!(f, "≥ {bound:e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenRow {
    pub table: String,
    pub label: String,
    pub measured: f64,
    pub criterion: Criterion,
    pub pass: bool,
}

impl GoldenRow {
    fn new(table: &str, label: String, measured: f64, criterion: Criterion) -> Self {
        Self {
            table: table.into(),
            label,
            measured,
            pass: criterion.holds(measured),
            criterion,
        }
    }
}

impl std::fmt::Display for GoldenRow {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        match self.criterion {
            Criterion::AtMost { .. } | Criterion::AtLeast { .. } => write!(
                f,
                "{} {}: {:.3e} (expected {}) {verdict}",
                self.table, self.label, self.measured, self.criterion
            ),
            _ => write!(
                f,
                "{} {}: {:.6} (expected {}) {verdict}",
                self.table, self.label, self.measured, self.criterion
            ),
        }
    }
}

pub const GOLDEN_TABLES: [&str; 2] = ["table1", "table7"];

/// Rows of the named table (`table1` or `table7`).
pub fn golden(name: &str) -> Result<Vec<GoldenRow>> {
    match name {
        "table1" => table1(),
        "table7" => table7(),
        other => Err(Error::InvalidInput(format!(
            "unknown golden table '{other}' (known: {})",
            GOLDEN_TABLES.join(", ")
        ))),
    }
}

fn unconstrained_errors(builtin: Builtin, d: usize) -> Result<ErrorReport> {
    let frame = builtin.frame();
    let y = builtin.moments(d, MomentRepr::Legendre, None, 0)?;
    let fit = fit_unconstrained(&y, &ReferenceMeasure::lebesgue(frame.clone()), d, Basis::Legendre)?;
    Ok(metrics(builtin, &fit.estimate))
}

fn metrics(builtin: Builtin, estimate: &Polynomial) -> ErrorReport {
    let grid = EvaluationGrid::default_for(&builtin.frame());
    error_metrics(
        |x| builtin.truth(x),
        |x| estimate.eval(x),
        &grid,
        DEFAULT_INTERIOR_MARGIN,
    )
}

/// `u = |x|` on `[−1, 1]` from exact moments, unconstrained fits.
pub fn table1() -> Result<Vec<GoldenRow>> {
    let mut rows = Vec::new();
    for (d, avg, max) in [(20, 0.0031, 0.0296), (30, 0.0022, 0.0265), (50, 0.0021, 0.0251)] {
        let r = unconstrained_errors(Builtin::Absx, d)?;
        rows.push(GoldenRow::new(
            "table1",
            format!("d={d} unconstrained mean error"),
            r.mean_error,
            Criterion::Relative {
                expected: avg,
                tol: 0.15,
            },
        ));
        rows.push(GoldenRow::new(
            "table1",
            format!("d={d} unconstrained max error"),
            r.max_error,
            Criterion::Relative {
                expected: max,
                tol: 0.15,
            },
        ));
    }
    Ok(rows)
}

/// `u = 1_[0.5, 1]` on `[0, 1]`: unconstrained fits, and the Putinar fit at
/// d = 10 with its certificate invariants.
pub fn table7() -> Result<Vec<GoldenRow>> {
    let mut rows = Vec::new();
    for (d, avg) in [(10, 0.08), (50, 0.05), (100, 0.05)] {
        let r = unconstrained_errors(Builtin::IndicatorHalf, d)?;
        rows.push(GoldenRow::new(
            "table7",
            format!("d={d} unconstrained mean error"),
            r.mean_error,
            Criterion::Relative {
                expected: avg,
                tol: 0.20,
            },
        ));
        rows.push(GoldenRow::new(
            "table7",
            format!("d={d} unconstrained max error"),
            r.max_error,
            Criterion::Absolute {
                expected: 0.50,
                tol: 0.02,
            },
        ));
    }
    let (fit, certificate) = putinar_indicator(10)?;
    let r = metrics(Builtin::IndicatorHalf, &fit);
    rows.push(GoldenRow::new(
        "table7",
        "d=10 putinar mean error".into(),
        r.mean_error,
        Criterion::Relative {
            expected: 0.11,
            tol: 0.25,
        },
    ));
    rows.push(GoldenRow::new(
        "table7",
        "d=10 putinar certificate identity residual".into(),
        certificate.identity_residual(&fit)?,
        Criterion::AtMost { bound: 1e-8 },
    ));
    rows.push(GoldenRow::new(
        "table7",
        "d=10 putinar certificate min Gram eigenvalue".into(),
        certificate.min_eigenvalue(),
        Criterion::AtLeast { bound: -1e-9 },
    ));
    Ok(rows)
}

/// Putinar fit of the indicator on its frame `[0, 1]`.
pub fn putinar_indicator(d: usize) -> Result<(Polynomial, crate::confit::PutinarCertificate)> {
    let frame = Builtin::IndicatorHalf.frame();
    let y = Builtin::IndicatorHalf.moments(d, MomentRepr::Legendre, None, 0)?;
    let (report, certificate) = fit_putinar(
        &y,
        &ReferenceMeasure::lebesgue(frame.clone()),
        d,
        &SemialgebraicDomain::from_box(frame),
        &ConstrainedOptions::default(),
    )?;
    Ok((report.estimate, certificate))
}
