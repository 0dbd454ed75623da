//! Unconstrained and Tikhonov-regularized mean-squared-error fits.
//!
//! With respect to a reference measure `λ`, write `G_αβ = ∫ b_α b_β dλ` for
//! the Gram matrix of a degree-`d` basis and `ŷ_α = ∫ b_α dμ` for the given
//! moments of `μ = u·λ` in that basis. The polynomial `u_d = Σ c_α b_α`
//! minimizing `‖u − u_d‖²` solves `G c = ŷ`, and the computable part of the
//! distance is `cᵀGc − 2cᵀŷ` (the constant `∫ u² dλ` is unknown). For the
//! orthonormal Legendre basis of a box with Lebesgue reference, `G = I`
//! and the coefficients are the moments themselves.

use serde::{Deserialize, Serialize};

use crate::domain::BoxDomain;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, cholesky_solve, condition_number, SymmetricMatrix};
use crate::moments::{gram_matrix, lebesgue_legendre_moments, orthonormal_gram, MomentVector};
use crate::poly::{Basis, Polynomial};
use crate::sdp::SdpStatus;

/// The known measure `λ` the density is defined against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReferenceMeasure {
    /// Lebesgue measure on a box, which is also the fitting frame.
    Lebesgue {
        #[serde(rename = "box")]
        bbox: BoxDomain,
    },
    /// A measure given by its moments `z`, fitted on the box `frame`.
    Moments { z: MomentVector, frame: BoxDomain },
}

impl ReferenceMeasure {
    pub fn lebesgue(bbox: BoxDomain) -> Self {
        ReferenceMeasure::Lebesgue { bbox }
    }

    pub fn moments(z: MomentVector, frame: BoxDomain) -> Result<Self> {
        if z.dim() != frame.dim() {
            return Err(Error::DimensionMismatch {
                expected: frame.dim(),
                found: z.dim(),
            });
        }
        Ok(ReferenceMeasure::Moments { z, frame })
    }

    /// Box on which fitted polynomials are expressed.
    pub fn frame(&self) -> &BoxDomain {
        match self {
            ReferenceMeasure::Lebesgue { bbox } => bbox,
            ReferenceMeasure::Moments { frame, .. } => frame,
        }
    }

    pub fn dim(&self) -> usize {
        self.frame().dim()
    }

    /// Moments of `λ` up to `degree`; Lebesgue moments come in the
    /// (exact, well-conditioned) Legendre representation of the box.
    pub fn reference_moments(&self, degree: usize) -> Result<MomentVector> {
        match self {
            ReferenceMeasure::Lebesgue { bbox } => Ok(lebesgue_legendre_moments(bbox, degree)),
            ReferenceMeasure::Moments { z, .. } => z.truncate(degree),
        }
    }

    /// Whether the Legendre basis of `frame` is orthonormal for `λ`.
    pub fn is_orthonormal_frame(&self, frame: &BoxDomain) -> bool {
        matches!(self, ReferenceMeasure::Lebesgue { bbox } if bbox == frame)
    }

    /// `G_αβ = ∫ b_α b_β dλ` for the degree-`d` basis on `frame`.
    pub fn gram(&self, basis: Basis, frame: &BoxDomain, d: usize) -> Result<SymmetricMatrix> {
        if frame.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: frame.dim(),
            });
        }
        match self {
            ReferenceMeasure::Lebesgue { bbox } if bbox == frame => Ok(orthonormal_gram(bbox, basis, d)),
            ReferenceMeasure::Lebesgue { bbox } => {
                gram_matrix(&lebesgue_legendre_moments(bbox, 2 * d), basis, frame, d)
            }
            ReferenceMeasure::Moments { z, .. } => gram_matrix(z, basis, frame, d),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitMethod {
    L2,
    L2Reg,
    Localizing,
    Putinar,
}

/// Interior-point outcome attached to the constrained fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverDiagnostics {
    pub status: SdpStatus,
    pub iterations: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    /// Smallest eigenvalue of the nonnegativity block at the solution
    /// (the localizing matrix, or the smallest over the certificate blocks).
    pub min_constraint_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub method: FitMethod,
    pub degree: usize,
    pub estimate: Polynomial,
    /// `cᵀGc − 2cᵀŷ`: `‖u − u_d‖²` minus the unknown `∫ u² dλ`.
    pub objective_shifted: f64,
    /// `G c − ŷ`, entry per basis function of `basis_used`.
    pub moment_residual: Vec<f64>,
    pub residual_norm: f64,
    /// Eigenvalue condition number of the (regularized) Gram matrix.
    pub condition_estimate: f64,
    pub basis_used: Basis,
    pub regularization: f64,
    /// Coefficients were read off the moments (orthonormal basis, no solve).
    pub fast_path: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverDiagnostics>,
}

/// Knobs for [`fit_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub basis: Basis,
    /// Tikhonov weight `ε` in `(G + εI) c = ŷ`.
    pub eps: f64,
    /// Skip the linear solve when the basis is orthonormal for `λ`.
    pub fast_path: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            basis: Basis::Legendre,
            eps: 0.0,
            fast_path: true,
        }
    }
}

/// Normal equations `G c = ŷ` of the degree-`d` fit in `basis` on `frame`.
pub(crate) struct NormalEquations {
    pub gram: SymmetricMatrix,
    pub rhs: Vec<f64>,
}

pub(crate) fn check_inputs(y: &MomentVector, reference: &ReferenceMeasure, d: usize) -> Result<()> {
    if y.dim() != reference.dim() {
        return Err(Error::DimensionMismatch {
            expected: reference.dim(),
            found: y.dim(),
        });
    }
    if y.degree() < d {
        return Err(Error::DegreeTooLow {
            required: d,
            available: y.degree(),
        });
    }
    Ok(())
}

pub(crate) fn normal_equations(
    y: &MomentVector,
    reference: &ReferenceMeasure,
    frame: &BoxDomain,
    d: usize,
    basis: Basis,
) -> Result<NormalEquations> {
    check_inputs(y, reference, d)?;
    let gram = reference.gram(basis, frame, d)?;
    let rhs = y.truncate(d)?.integrals(basis, frame);
    Ok(NormalEquations { gram, rhs })
}

pub(crate) fn quadratic_value(gram: &SymmetricMatrix, rhs: &[f64], c: &[f64]) -> f64 {
    let gc = gram.to_dense().matvec(c);
    let q: f64 = c.iter().zip(&gc).map(|(a, b)| a * b).sum();
    let l: f64 = c.iter().zip(rhs).map(|(a, b)| a * b).sum();
    q - 2.0 * l
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn build_report(
    method: FitMethod,
    d: usize,
    basis: Basis,
    frame: &BoxDomain,
    eq: &NormalEquations,
    coeffs: Vec<f64>,
    eps: f64,
    condition: f64,
    fast_path: bool,
) -> Result<FitReport> {
    let gc = eq.gram.to_dense().matvec(&coeffs);
    let moment_residual: Vec<f64> = gc.iter().zip(&eq.rhs).map(|(a, b)| a - b).collect();
    let residual_norm = moment_residual.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let objective_shifted = quadratic_value(&eq.gram, &eq.rhs, &coeffs);
    Ok(FitReport {
        method,
        degree: d,
        estimate: Polynomial::new(d, basis, frame.clone(), coeffs)?,
        objective_shifted,
        moment_residual,
        residual_norm,
        condition_estimate: condition,
        basis_used: basis,
        regularization: eps,
        fast_path,
        solver: None,
    })
}

/// General entry point: unregularized when `options.eps == 0`.
pub fn fit_with(y: &MomentVector, reference: &ReferenceMeasure, d: usize, options: &FitOptions) -> Result<FitReport> {
    if !(options.eps >= 0.0) || !options.eps.is_finite() {
        return Err(Error::InvalidInput(format!(
            "regularization weight must be finite and nonnegative, got {}",
            options.eps
        )));
    }
    let method = if options.eps > 0.0 {
        FitMethod::L2Reg
    } else {
        FitMethod::L2
    };
    let frame = reference.frame().clone();
    let basis = options.basis;
    if options.fast_path && basis == Basis::Legendre && reference.is_orthonormal_frame(&frame) {
        check_inputs(y, reference, d)?;
        let rhs = y.truncate(d)?.integrals(basis, &frame);
        let n = rhs.len();
        let eq = NormalEquations {
            gram: SymmetricMatrix::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 }),
            rhs,
        };
        let coeffs = eq.rhs.iter().map(|v| v / (1.0 + options.eps)).collect();
        return build_report(method, d, basis, &frame, &eq, coeffs, options.eps, 1.0, true);
    }
    let eq = normal_equations(y, reference, &frame, d, basis)?;
    let mut a = eq.gram.to_dense();
    for i in 0..a.rows() {
        a[(i, i)] += options.eps;
    }
    match cholesky(&a) {
        Ok(l) => {
            let coeffs = cholesky_solve(&l, &eq.rhs);
            build_report(
                method,
                d,
                basis,
                &frame,
                &eq,
                coeffs,
                options.eps,
                condition_number(&a),
                false,
            )
        }
        Err(_) if basis != Basis::Legendre => fit_with(
            y,
            reference,
            d,
            &FitOptions {
                basis: Basis::Legendre,
                ..*options
            },
        ),
        Err(_) => Err(Error::SingularMomentMatrix {
            condition: condition_number(&a),
        }),
    }
}

/// `u*_d = G⁻¹ŷ`: the degree-`d` polynomial closest to the density in `L2(λ)`.
///
/// A Cholesky failure in a non-orthonormal basis retries in Legendre; the
/// report's `basis_used` records which basis was solved in.
pub fn fit_unconstrained(y: &MomentVector, reference: &ReferenceMeasure, d: usize, basis: Basis) -> Result<FitReport> {
    fit_with(
        y,
        reference,
        d,
        &FitOptions {
            basis,
            ..FitOptions::default()
        },
    )
}

/// `(G + εI)⁻¹ŷ`, the Tikhonov-damped fit for noisy moments; `ε = 0` is
/// [`fit_unconstrained`].
pub fn fit_regularized(
    y: &MomentVector,
    reference: &ReferenceMeasure,
    d: usize,
    eps: f64,
    basis: Basis,
) -> Result<FitReport> {
    fit_with(
        y,
        reference,
        d,
        &FitOptions {
            basis,
            eps,
            ..FitOptions::default()
        },
    )
}

/// `cᵀGc − 2cᵀŷ` for `u_d = Σ c_α b_α`, in the basis and box of `u_d`.
pub fn l2_distance_shifted(u_d: &Polynomial, y: &MomentVector, reference: &ReferenceMeasure) -> Result<f64> {
    let d = u_d.degree();
    let eq = normal_equations(y, reference, u_d.domain(), d, u_d.basis())?;
    Ok(quadratic_value(&eq.gram, &eq.rhs, u_d.coeffs()))
}
