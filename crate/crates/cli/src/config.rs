//! Command-line arguments, doubling as the serializable run configuration.
//!
//! Every output file embeds the [`RunConfig`] that produced it; `momentfit
//! rerun FILE` replays it. Output destinations are not part of the
//! configuration, so a replay writes byte-identical content wherever it goes.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use momentfit::catalog::{Builtin, MomentRepr};
use momentfit::{Basis, BoxDomain};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "momentfit",
    version,
    about = "Reconstruct a density from its moments by L2 polynomial fitting"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate the moment file of a builtin density or of a domain indicator.
    Moments(MomentsArgs),
    /// Fit a density to a moment file.
    Fit(FitArgs),
    /// Compare a fit against a truth on an evaluation grid, or run a golden table.
    Assess(AssessArgs),
    /// Apply seeded uniform relative noise to a moment file.
    Perturb(PerturbArgs),
    /// Re-execute the run recorded in an output file.
    Rerun(RerunArgs),
}

/// Where the main JSON result (and side artifacts) go.
#[derive(Debug, Clone, Default, Args)]
pub struct Output {
    /// Output JSON file (stdout when omitted).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["builtin", "domain"]))]
pub struct MomentsArgs {
    /// Builtin density (ex1-sum, absx, indicator-half, disc, trefoil, e-shape,
    /// reaction-diffusion, reaction-diffusion-v).
    #[arg(long)]
    pub builtin: Option<Builtin>,
    /// Domain file whose indicator (Lebesgue measure) is integrated.
    #[arg(long)]
    pub domain: Option<PathBuf>,
    #[arg(long)]
    pub degree: usize,
    /// Representation of the moments: monomial or legendre.
    #[arg(long, default_value = "monomial")]
    pub basis: MomentRepr,
    /// Frame of the Legendre representation (defaults to the builtin's frame
    /// or the domain's box), as `a,b;c,d` or `[[a,b],[c,d]]`.
    #[arg(long, value_parser = parse_box, allow_hyphen_values = true)]
    pub frame: Option<BoxDomain>,
    /// Gauss nodes per axis for sets with curved boundaries.
    #[arg(long, default_value_t = 200)]
    pub nodes: usize,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Unconstrained L2 projection.
    L2,
    /// Tikhonov-regularized L2 projection (needs `--eps`).
    L2reg,
    /// Localizing-matrix nonnegativity constraint.
    Localizing,
    /// Putinar certificate of nonnegativity on a domain.
    Putinar,
    /// Maximum-entropy baseline `exp(p)`.
    Maxent,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct FitArgs {
    /// Moment file of the unknown density.
    #[arg(long)]
    pub moments: PathBuf,
    #[arg(long, value_enum)]
    pub method: Method,
    /// Degree of the fit (defaults to the degree of the moment file).
    #[arg(long)]
    pub degree: Option<usize>,
    /// Basis of the fitted polynomial: legendre, monomial or chebyshev.
    #[arg(long, default_value = "legendre")]
    pub basis: Basis,
    /// Box of the Lebesgue reference measure, as `a,b;c,d` or `[[a,b],[c,d]]`.
    /// Defaults to the frame of a Legendre moment file.
    #[arg(long = "box", value_parser = parse_box, allow_hyphen_values = true, conflicts_with = "reference")]
    pub bbox: Option<BoxDomain>,
    /// Moment file of the reference measure, in place of `--box`.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Fitting frame of a `--reference` measure (defaults to its Legendre frame).
    #[arg(long, value_parser = parse_box, allow_hyphen_values = true, requires = "reference")]
    pub frame: Option<BoxDomain>,
    /// Tikhonov weight for `l2reg`.
    #[arg(long, default_value_t = 0.0)]
    pub eps: f64,
    /// Solver tolerance (interior-point gap, or maximum-entropy moment mismatch).
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Order of the localizing matrix (defaults to the degree).
    #[arg(long)]
    pub localizing_order: Option<usize>,
    /// Domain file of the Putinar constraint (defaults to the frame box).
    #[arg(long, conflicts_with = "support_of")]
    pub domain: Option<PathBuf>,
    /// Use a builtin's support set (disc, trefoil) as the Putinar domain.
    #[arg(long)]
    pub support_of: Option<Builtin>,
    /// Gauss nodes per axis of the maximum-entropy cubature.
    #[arg(long)]
    pub quad_nodes: Option<usize>,
    /// Also write the Putinar certificate to this file.
    #[arg(long)]
    #[serde(skip)]
    pub certificate: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct AssessArgs {
    /// Fit output to assess.
    #[arg(long, required_unless_present = "check")]
    pub fit: Option<PathBuf>,
    /// Builtin density serving as the truth.
    #[arg(long, conflicts_with = "truth_fit")]
    pub truth: Option<Builtin>,
    /// Another fit output serving as the truth.
    #[arg(long)]
    pub truth_fit: Option<PathBuf>,
    /// Grid points per axis (defaults: 10⁴ in 1D, 400 in 2D, 50 beyond).
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Grid box (defaults to the frame of the fit).
    #[arg(long = "box", value_parser = parse_box, allow_hyphen_values = true)]
    pub bbox: Option<BoxDomain>,
    /// Fraction of each axis excluded on both sides for the interior errors.
    #[arg(long, default_value_t = momentfit::assess::DEFAULT_INTERIOR_MARGIN)]
    pub margin: f64,
    /// Compare superlevel sets `{u ≥ threshold}` of the fit and the truth.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Golden-table mode: recompute a published table and compare row by row.
    #[arg(long, conflicts_with_all = ["fit", "truth", "truth_fit"])]
    pub check: Option<String>,
    /// Write `x1..xn,u_true,u_est` for every grid point.
    #[arg(long)]
    #[serde(skip)]
    pub csv: Option<PathBuf>,
    /// Write the fit's superlevel set as a PGM raster (needs `--threshold`).
    #[arg(long, requires = "threshold")]
    #[serde(skip)]
    pub pgm: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct PerturbArgs {
    #[arg(long)]
    pub moments: PathBuf,
    /// Maximal relative perturbation of every moment.
    #[arg(long)]
    pub amplitude: f64,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

#[derive(Debug, Clone, Args)]
pub struct RerunArgs {
    /// Output file of an earlier run.
    pub file: PathBuf,
    #[command(flatten)]
    pub output: Output,
}

/// The parameters of one run, as embedded in its outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum RunConfig {
    Moments(MomentsArgs),
    Fit(FitArgs),
    Assess(AssessArgs),
    Perturb(PerturbArgs),
}

impl RunConfig {
    pub fn set_output(&mut self, output: Output) {
        match self {
            RunConfig::Moments(a) => a.output = output,
            RunConfig::Fit(a) => a.output = output,
            RunConfig::Assess(a) => a.output = output,
            RunConfig::Perturb(a) => a.output = output,
        }
    }
}

/// Parses a box given as `a,b;c,d` or as JSON `[[a,b],[c,d]]`.
pub fn parse_box(s: &str) -> Result<BoxDomain, String> {
    let bounds: Vec<(f64, f64)> = if s.trim_start().starts_with('[') {
        serde_json::from_str(s).map_err(|e| format!("malformed box '{s}': {e}"))?
    } else {
        s.split(';')
            .map(|interval| {
                let ends: Vec<&str> = interval.split(',').map(str::trim).collect();
                match ends.as_slice() {
                    [a, b] => Ok((
                        a.parse::<f64>().map_err(|e| format!("malformed bound '{a}': {e}"))?,
                        b.parse::<f64>().map_err(|e| format!("malformed bound '{b}': {e}"))?,
                    )),
                    _ => Err(format!("malformed interval '{interval}', expected 'a,b'")),
                }
            })
            .collect::<Result<_, String>>()?
    };
    BoxDomain::new(bounds).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boxes_parse_in_both_syntaxes() {
        let expected = BoxDomain::new(vec![(-1.0, 1.0), (0.0, 2.5)]).unwrap();
        assert_eq!(parse_box("-1,1;0,2.5").unwrap(), expected);
        assert_eq!(parse_box("[[-1, 1], [0, 2.5]]").unwrap(), expected);
        assert!(parse_box("1,0").is_err());
        assert!(parse_box("0,1,2").is_err());
        assert!(parse_box("a,b").is_err());
    }

    #[test]
    fn configs_round_trip_through_json() {
        let cli = Cli::try_parse_from([
            "momentfit",
            "fit",
            "--moments",
            "y.json",
            "--method",
            "putinar",
            "--degree",
            "10",
            "--box",
            "0,1",
            "--out",
            "fit.json",
        ])
        .unwrap();
        let Command::Fit(args) = cli.command else { panic!() };
        let json = serde_json::to_string(&RunConfig::Fit(args)).unwrap();
        assert!(!json.contains("fit.json"));
        let back: RunConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), json);
    }
}
