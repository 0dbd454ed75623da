//! Nonnegativity-constrained fits, compiled to semidefinite programs.
//!
//! Both fits minimize the same quadratic `cᵀGc − 2cᵀŷ` as the unconstrained
//! fit, over coefficients `c` of `u_d` in the orthonormal Legendre basis of
//! the reference frame:
//!
//! - [`fit_localizing`] adds the LMI `M_d(u_d·z) ⪰ 0`, the localizing matrix
//!   of `λ` twisted by `u_d`. It is linear in `c`:
//!   `M_d(u_d z)[α, β] = Σ_γ c_γ ∫ φ_α φ_β φ_γ dλ`. This relaxes
//!   nonnegativity: the estimate may still dip below zero.
//! - [`fit_putinar`] requires `u_d = σ_0 + Σ_j σ_j g_j` with sums of squares
//!   `σ_0 = bᵀA_0b` (degree `2d`) and `σ_j = bᵀA_jb` (degree `2(d − d_j)`),
//!   the coefficients above degree `d` cancelling. Every feasible `u_d` is
//!   nonnegative on `Ω = {g_j ≥ 0}`, and the Gram matrices `A_j` are
//!   returned as a [`PutinarCertificate`].
//!
//! The Putinar problem is solved through its pseudo-moment form: the SDP
//! variables are pseudo-moments `w_γ` of degree `2d`, each SOS block becomes
//! the localizing matrix of `w` by `g_j`, and the Gram matrices are the dual
//! blocks of the solution. Coefficients are matched through the Legendre
//! basis of the frame, which is orthonormal for Lebesgue measure there, so
//! the coefficient of `φ_γ` in `φ_α φ_β g_j` is `∫ φ_α φ_β g_j φ_γ dx`,
//! evaluated exactly by a Gauss rule.

use serde::{Deserialize, Serialize};

use crate::domain::{BoxDomain, SemialgebraicDomain};
use crate::error::{Error, Result};
use crate::l2fit::{
    build_report, check_inputs, normal_equations, FitMethod, FitReport, ReferenceMeasure, SolverDiagnostics,
};
use crate::linalg::{
    cholesky, cholesky_solve, condition_number, lower_inverse, symmetric_eigen, symmetric_eigenvalues, Matrix,
    SymmetricMatrix,
};
use crate::moments::MomentVector;
use crate::multi_index::{enumerate_indices, num_monomials};
use crate::poly::{basis_values_1d, product_terms, Basis, Polynomial, ProductScratch};
use crate::quadrature::TensorRule;
use crate::sdp::{
    quadratic_to_sdp, solve_with, Entry, FactoredBlock, LmiBlock, LmiTerms, SdpProblem, SdpSettings, SdpSolution,
};

/// Solver settings shared by the constrained fits.
#[derive(Debug, Clone)]
pub struct ConstrainedOptions {
    pub sdp: SdpSettings,
    /// Order `ℓ` of the localizing matrix `M_ℓ(u_d z)`; `None` ties it to `d`.
    pub localizing_order: Option<usize>,
}

impl Default for ConstrainedOptions {
    fn default() -> Self {
        Self {
            sdp: SdpSettings {
                tol: 1e-9,
                max_iter: 200,
                ..SdpSettings::default()
            },
            localizing_order: None,
        }
    }
}

/// Gram matrices of `u_d = bᵀA_0b + Σ_j (bᵀA_jb) g_j`, in the Legendre
/// basis of `frame`. Block `j ≥ 1` multiplies `generators[j − 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PutinarCertificate {
    pub degree: usize,
    pub basis: Basis,
    #[serde(rename = "box")]
    pub frame: BoxDomain,
    pub generators: Vec<Polynomial>,
    pub gram_matrices: Vec<SymmetricMatrix>,
}

impl PutinarCertificate {
    /// Smallest eigenvalue over all Gram matrices.
    pub fn min_eigenvalue(&self) -> f64 {
        self.gram_matrices
            .iter()
            .map(|a| a.min_eigenvalue())
            .fold(f64::INFINITY, f64::min)
    }

    /// `σ_0 + Σ_j σ_j g_j` expanded symbolically in the certificate basis,
    /// as a polynomial of degree `2d`.
    pub fn expand(&self) -> Result<Polynomial> {
        let n = self.frame.dim();
        let top = 2 * self.degree;
        let mut total = Polynomial::zero(n, top, self.basis, self.frame.clone());
        for (j, a) in self.gram_matrices.iter().enumerate() {
            let sigma = gram_to_polynomial(a, self.basis, &self.frame)?;
            let term = if j == 0 {
                sigma
            } else {
                let g = generator_on_frame(&self.generators[j - 1], self.basis, &self.frame)?;
                sigma.multiply(&g)?
            };
            if term.degree() > top {
                let excess = term.coeffs()[num_monomials(n, top)..]
                    .iter()
                    .fold(0.0f64, |m, c| m.max(c.abs()));
                if excess > 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "certificate term {j} exceeds degree {top}"
                    )));
                }
            }
            total = total.add(&truncated(&term, top)?)?;
        }
        Ok(total)
    }

    /// Largest coefficient-wise gap between the expansion and `u`
    /// (re-expressed in the certificate basis and frame).
    pub fn identity_residual(&self, u: &Polynomial) -> Result<f64> {
        let expanded = self.expand()?;
        let u = rebase(u, self.basis, &self.frame)?.extended(expanded.degree());
        Ok(expanded
            .coeffs()
            .iter()
            .zip(u.coeffs())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
    }
}

/// `bᵀAb` as a polynomial, `b` the basis up to the order of `A`.
fn gram_to_polynomial(a: &SymmetricMatrix, basis: Basis, frame: &BoxDomain) -> Result<Polynomial> {
    let n = frame.dim();
    let k = degree_of_order(n, a.order())?;
    let idx = enumerate_indices(n, k);
    let mut p = Polynomial::zero(n, 2 * k, basis, frame.clone());
    let mut scratch = ProductScratch::default();
    let coeffs = p.coeffs_mut();
    for i in 0..idx.len() {
        for j in 0..=i {
            let v = a.get(i, j);
            if v == 0.0 {
                continue;
            }
            let w = if i == j { v } else { 2.0 * v };
            product_terms(basis, frame, &idx[i], &idx[j], &mut scratch, |pos, c| {
                coeffs[pos] += w * c;
            });
        }
    }
    Ok(p)
}

fn degree_of_order(n: usize, order: usize) -> Result<usize> {
    (0..)
        .take_while(|&k| num_monomials(n, k) <= order)
        .find(|&k| num_monomials(n, k) == order)
        .ok_or_else(|| Error::InvalidInput(format!("order {order} is not a basis size in dimension {n}")))
}

/// Same polynomial in `basis` on `frame` (monomials are box-independent).
fn rebase(p: &Polynomial, basis: Basis, frame: &BoxDomain) -> Result<Polynomial> {
    if p.basis() == basis && p.domain() == frame {
        return Ok(p.clone());
    }
    let mono = p.to_monomial();
    let moved = Polynomial::new(mono.degree(), Basis::Monomial, frame.clone(), mono.coeffs().to_vec())?;
    Ok(moved.to_basis(basis).polynomial)
}

fn generator_on_frame(g: &Polynomial, basis: Basis, frame: &BoxDomain) -> Result<Polynomial> {
    let g = rebase(g, basis, frame)?;
    let deg = g.effective_degree();
    truncated(&g, deg)
}

/// Drops coefficients above `degree` (or pads up to it).
fn truncated(p: &Polynomial, degree: usize) -> Result<Polynomial> {
    if p.degree() <= degree {
        return Ok(p.extended(degree));
    }
    let keep = num_monomials(p.dim(), degree);
    Polynomial::new(degree, p.basis(), p.domain().clone(), p.coeffs()[..keep].to_vec())
}

/// Values of all Legendre basis functions of degree ≤ `degree` at the rule's
/// nodes, one row per node.
fn basis_table(rule: &TensorRule, frame: &BoxDomain, degree: usize) -> Matrix {
    let n = frame.dim();
    let idx = enumerate_indices(n, degree);
    let mut table = Matrix::zeros(rule.len(), idx.len());
    let mut vals: Vec<Vec<f64>> = vec![Vec::new(); n];
    for (q, p) in rule.points().enumerate() {
        for (i, x) in p.iter().enumerate() {
            basis_values_1d(Basis::Legendre, frame.bounds()[i], *x, degree, &mut vals[i]);
        }
        let row = table.row_mut(q);
        for (k, alpha) in idx.iter().enumerate() {
            row[k] = alpha
                .exponents()
                .iter()
                .enumerate()
                .map(|(i, &a)| vals[i][a as usize])
                .product();
        }
    }
    table
}

/// First `cols` columns of `m`.
fn leading_columns(m: &Matrix, cols: usize) -> Matrix {
    Matrix::from_fn(m.rows(), cols, |r, c| m[(r, c)])
}

/// `∫ φ_κ φ_γ dλ` for `|κ| ≤ k_deg`, `|γ| ≤ g_deg`, from the Legendre
/// integrals `ẑ` of `λ` up to `k_deg + g_deg`.
fn mixed_gram(zhat: &[f64], frame: &BoxDomain, k_deg: usize, g_deg: usize) -> Matrix {
    let n = frame.dim();
    let ik = enumerate_indices(n, k_deg);
    let ig = enumerate_indices(n, g_deg);
    let mut scratch = ProductScratch::default();
    let mut h = Matrix::zeros(ik.len(), ig.len());
    for (a, ka) in ik.iter().enumerate() {
        for (b, gb) in ig.iter().enumerate() {
            let mut acc = 0.0;
            product_terms(Basis::Legendre, frame, ka, gb, &mut scratch, |pos, c| {
                acc += c * zhat[pos]
            });
            h[(a, b)] = acc;
        }
    }
    h
}

/// The localizing block `M_ℓ(u z) = Σ_γ c_γ F_γ`, `F_γ[α, β] = ∫ φ_α φ_β φ_γ dλ`.
fn localizing_block(reference: &ReferenceMeasure, frame: &BoxDomain, d: usize, l: usize) -> Result<LmiBlock> {
    let n = frame.dim();
    let sl = num_monomials(n, l);
    let sd = num_monomials(n, d);
    if reference.is_orthonormal_frame(frame) {
        // Gauss rule exact through degree 2ℓ + d.
        let rule = TensorRule::on_box(frame, (2 * l + d) / 2 + 1);
        let table = basis_table(&rule, frame, l.max(d));
        let weights = (0..sd)
            .map(|g| {
                let w = rule
                    .weights()
                    .iter()
                    .enumerate()
                    .map(|(q, wq)| wq * table[(q, g)])
                    .collect();
                (g, w)
            })
            .collect();
        return Ok(LmiBlock {
            order: sl,
            constant: Vec::new(),
            terms: LmiTerms::Factored {
                factor: leading_columns(&table, sl),
                weights,
            },
        });
    }
    let zhat = reference
        .reference_moments(2 * l + d)?
        .integrals(Basis::Legendre, frame);
    let h = mixed_gram(&zhat, frame, 2 * l, d);
    let il = enumerate_indices(n, l);
    let mut scratch = ProductScratch::default();
    let mut expansion: Vec<(usize, f64)> = Vec::new();
    let mut terms = Vec::new();
    for a in 0..sl {
        for b in 0..=a {
            expansion.clear();
            product_terms(Basis::Legendre, frame, &il[a], &il[b], &mut scratch, |pos, c| {
                expansion.push((pos, c))
            });
            for g in 0..sd {
                let v: f64 = expansion.iter().map(|&(k, c)| c * h[(k, g)]).sum();
                if v != 0.0 {
                    terms.push((
                        g,
                        Entry {
                            row: a,
                            col: b,
                            value: v,
                        },
                    ));
                }
            }
        }
    }
    Ok(LmiBlock {
        order: sl,
        constant: Vec::new(),
        terms: LmiTerms::Sparse(terms),
    })
}

fn diagnostics(sol: &SdpSolution, min_constraint_eigenvalue: f64) -> SolverDiagnostics {
    SolverDiagnostics {
        status: sol.status,
        iterations: sol.iterations,
        primal_objective: sol.primal_objective,
        dual_objective: sol.dual_objective,
        primal_infeasibility: sol.primal_infeasibility,
        dual_infeasibility: sol.dual_infeasibility,
        min_constraint_eigenvalue,
    }
}

fn min_eigenvalue(m: &Matrix) -> f64 {
    symmetric_eigenvalues(m).into_iter().fold(f64::INFINITY, f64::min)
}

fn singular(gram: &SymmetricMatrix) -> Error {
    Error::SingularMomentMatrix {
        condition: condition_number(&gram.to_dense()),
    }
}

/// `min ‖u − u_d‖²` subject to `M_ℓ(u_d z) ⪰ 0` (`ℓ = d` by default).
///
/// The reference moments must reach degree `2ℓ + d`. Any solver status other
/// than optimal is reported as [`Error::SolverFailed`].
pub fn fit_localizing(
    y: &MomentVector,
    reference: &ReferenceMeasure,
    d: usize,
    options: &ConstrainedOptions,
) -> Result<FitReport> {
    check_inputs(y, reference, d)?;
    let frame = reference.frame().clone();
    let l = options.localizing_order.unwrap_or(d);
    let eq = normal_equations(y, reference, &frame, d, Basis::Legendre)?;
    let block = localizing_block(reference, &frame, d, l)?;
    let compiled = quadratic_to_sdp(&eq.gram, &eq.rhs, vec![block]).map_err(|e| match e {
        Error::NotPositiveDefinite { .. } => singular(&eq.gram),
        other => other,
    })?;
    let sol = solve_with(&compiled.problem, &options.sdp);
    if !sol.is_optimal() {
        return Err(Error::SolverFailed {
            status: sol.status,
            iterations: sol.iterations,
        });
    }
    let coeffs = compiled.coefficients(&sol).to_vec();
    let loc = min_eigenvalue(&compiled.problem.linear_map(&sol.x)[1]);
    let condition = if reference.is_orthonormal_frame(&frame) {
        1.0
    } else {
        condition_number(&eq.gram.to_dense())
    };
    let mut report = build_report(
        FitMethod::Localizing,
        d,
        Basis::Legendre,
        &frame,
        &eq,
        coeffs,
        0.0,
        condition,
        false,
    )?;
    report.solver = Some(diagnostics(&sol, loc));
    Ok(report)
}

/// The coefficient map of the certificate: `𝒜_γ(A) = Σ_j ∫ (bᵀA_jb) g_j φ_γ dx`,
/// evaluated node-wise as `Σ_j Σ_q W_j[γ][q] (b_qᵀ A_j b_q)`.
struct CertificateMap {
    factors: Vec<Matrix>,
    /// `weights[j][γ]`: one weight per quadrature node.
    weights: Vec<Vec<Vec<f64>>>,
}

impl CertificateMap {
    fn apply(&self, a: &[Matrix]) -> Vec<f64> {
        let ng = self.weights[0].len();
        let mut out = vec![0.0; ng];
        for (j, b) in self.factors.iter().enumerate() {
            let ba = b.matmul(&a[j]);
            let diag: Vec<f64> = (0..b.rows())
                .map(|q| ba.row(q).iter().zip(b.row(q)).map(|(x, y)| x * y).sum())
                .collect();
            for (g, w) in self.weights[j].iter().enumerate() {
                out[g] += w.iter().zip(&diag).map(|(x, y)| x * y).sum::<f64>();
            }
        }
        out
    }

    /// Minimum-norm change `A_j + U_j δS_j U_jᵀ` of the Gram blocks, within
    /// the column spaces `U_j` given in `faces`, that makes `𝒜(A) = target`.
    fn correct(&self, a: &[Matrix], target: &[f64], faces: &[Matrix]) -> Option<Vec<Matrix>> {
        let r: Vec<f64> = target.iter().zip(self.apply(a)).map(|(t, v)| t - v).collect();
        let m = r.len();
        let reduced: Vec<Matrix> = self.factors.iter().zip(faces).map(|(b, u)| b.matmul(u)).collect();
        let mut k = Matrix::zeros(m, m);
        for (j, c) in reduced.iter().enumerate() {
            if c.cols() == 0 {
                continue;
            }
            let cct = c.matmul(&c.transpose());
            let q = cct.rows();
            let w = &self.weights[j];
            // W H Wᵀ with H = (CCᵀ)∘(CCᵀ)
            let wh: Vec<Vec<f64>> = w
                .iter()
                .map(|wg| {
                    (0..q)
                        .map(|col| (0..q).map(|p| wg[p] * cct[(p, col)] * cct[(p, col)]).sum())
                        .collect()
                })
                .collect();
            for g in 0..m {
                for h in 0..=g {
                    let v: f64 = wh[g].iter().zip(&w[h]).map(|(x, y)| x * y).sum();
                    k[(g, h)] += v;
                    if h != g {
                        k[(h, g)] += v;
                    }
                }
            }
        }
        let scale = (0..m).map(|i| k[(i, i)]).fold(0.0f64, f64::max);
        if scale == 0.0 {
            return None;
        }
        for i in 0..m {
            k[(i, i)] += 1e-14 * scale;
        }
        let l = cholesky(&k).ok()?;
        let lambda = cholesky_solve(&l, &r);
        let mut out = Vec::with_capacity(a.len());
        for (j, c) in reduced.iter().enumerate() {
            let mut next = a[j].clone();
            if c.cols() > 0 {
                let q = c.rows();
                let mut scaled = c.clone();
                for p in 0..q {
                    let dp: f64 = lambda.iter().zip(&self.weights[j]).map(|(lg, wg)| lg * wg[p]).sum();
                    scaled.row_mut(p).iter_mut().for_each(|v| *v *= dp);
                }
                let ds = c.transpose().matmul(&scaled);
                let u = &faces[j];
                next.axpy(1.0, &u.matmul(&ds).matmul(&u.transpose()));
                next.symmetrize();
            }
            out.push(next);
        }
        Some(out)
    }
}

/// Orthonormal basis of the eigenvectors of `a` with eigenvalue above `floor`.
fn dominant_subspace(a: &Matrix, floor: f64) -> Matrix {
    let (lam, vecs) = symmetric_eigen(a);
    let keep: Vec<usize> = (0..lam.len()).filter(|&i| lam[i] > floor).collect();
    Matrix::from_fn(a.rows(), keep.len(), |r, c| vecs[(r, keep[c])])
}

/// `min ‖u − u_d‖²` over `u_d` with a Putinar certificate of nonnegativity
/// on `domain` (a bare box contributes `(b_i − x_i)(x_i − a_i) ≥ 0`).
///
/// Requires `d ≥ max_j d_j` ([`Error::DegreeMismatch`]). The estimate is the
/// degree-`≤ d` part of the certificate's expansion; the part above `d`
/// vanishes up to the tolerance recorded by
/// [`PutinarCertificate::identity_residual`].
pub fn fit_putinar(
    y: &MomentVector,
    reference: &ReferenceMeasure,
    d: usize,
    domain: &SemialgebraicDomain,
    options: &ConstrainedOptions,
) -> Result<(FitReport, PutinarCertificate)> {
    check_inputs(y, reference, d)?;
    if domain.dim() != reference.dim() {
        return Err(Error::DimensionMismatch {
            expected: reference.dim(),
            found: domain.dim(),
        });
    }
    let generators = domain.certificate_generators();
    let half: Vec<usize> = generators.iter().map(|g| g.effective_degree().div_ceil(2)).collect();
    let required = half.iter().copied().max().unwrap_or(0);
    if d < required {
        return Err(Error::DegreeMismatch { degree: d, required });
    }
    let frame = reference.frame().clone();
    let n = frame.dim();
    let eq = normal_equations(y, reference, &frame, d, Basis::Legendre)?;
    let chol = cholesky(&eq.gram.to_dense()).map_err(|_| singular(&eq.gram))?;
    // The SDP is solved for u / κ; the certificate scales linearly.
    let unscaled = cholesky_solve(&chol, &eq.rhs);
    let kappa = unscaled.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let target: Vec<f64> = unscaled.iter().map(|v| v / kappa).collect();
    // R⁻¹ with M = RᵀR, R = Lᵀ: R⁻¹[γ, k] = L⁻¹[k, γ]
    let linv = lower_inverse(&chol);
    let sd = num_monomials(n, d);
    let s2d = num_monomials(n, 2 * d);

    // Gauss rule exact through degree 4d.
    let rule = TensorRule::on_box(&frame, 2 * d + 1);
    let table = basis_table(&rule, &frame, 2 * d);
    let nodes: Vec<Vec<f64>> = rule.points().map(|p| p.to_vec()).collect();
    let mut map = CertificateMap {
        factors: Vec::new(),
        weights: Vec::new(),
    };
    let mut block_degrees = vec![d];
    block_degrees.extend(half.iter().map(|h| d - h));
    for (j, &k) in block_degrees.iter().enumerate() {
        let gw: Vec<f64> = nodes
            .iter()
            .zip(rule.weights())
            .map(|(x, w)| if j == 0 { *w } else { w * generators[j - 1].eval(x) })
            .collect();
        map.factors.push(leading_columns(&table, num_monomials(n, k)));
        map.weights.push(
            (0..s2d)
                .map(|g| gw.iter().enumerate().map(|(q, w)| w * table[(q, g)]).collect())
                .collect(),
        );
    }

    // Variables: w_γ (|γ| ≤ 2d), then t. Block 0 is the epigraph block
    // [[t, −(R⁻ᵀw)ᵀ/2], [−R⁻ᵀw/2, I]]; blocks 1.. are the localizing
    // matrices of w by 1, g_1, …, g_m.
    let mut orders = vec![sd + 1];
    orders.extend(map.factors.iter().map(|b| b.cols()));
    let mut objective = vec![0.0; s2d + 1];
    objective[..sd].copy_from_slice(&target);
    objective[s2d] = 1.0;
    let mut problem = SdpProblem::new(orders, objective)?;
    problem.add_coefficient(s2d, 0, 0, 0, 1.0)?;
    for g in 0..sd {
        for k in g..sd {
            let v = linv[(k, g)];
            if v != 0.0 {
                problem.add_coefficient(g, 0, 1 + k, 0, -0.5 * v)?;
            }
        }
    }
    for k in 0..sd {
        problem.add_constant(0, 1 + k, 1 + k, -1.0)?;
    }
    for (j, b) in map.factors.iter().enumerate() {
        problem.set_factored(
            1 + j,
            FactoredBlock {
                factor: b.clone(),
                weights: map.weights[j].iter().cloned().enumerate().collect(),
            },
        )?;
    }
    let sol = solve_with(&problem, &options.sdp);
    if !sol.is_optimal() {
        return Err(Error::SolverFailed {
            status: sol.status,
            iterations: sol.iterations,
        });
    }

    // The quadratic objective makes the dual blocks accurate only to about
    // sqrt(gap), while the (polished) pseudo-moments pin the estimate down:
    // stationarity gives u = u* + M⁻¹ w_low / 2. The Gram blocks are then
    // moved, within their dominant eigenspaces where possible, so that they
    // reproduce that estimate and cancel above degree d exactly.
    let w_low = &sol.x[..sd];
    let mut primal_u = cholesky_solve(&chol, w_low);
    primal_u.iter_mut().zip(&target).for_each(|(u, t)| *u = t + 0.5 * *u);
    let mut wanted = vec![0.0; s2d];
    wanted[..sd].copy_from_slice(&primal_u);
    let raw: Vec<Matrix> = sol.dual[1..].iter().map(|a| a.to_dense()).collect();
    let top = raw.iter().map(|a| a.max_abs()).fold(f64::MIN_POSITIVE, f64::max);
    let identity_gap = |blocks: &[Matrix]| {
        map.apply(blocks)
            .iter()
            .zip(&wanted)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    };
    let psd_floor = |blocks: &[Matrix]| blocks.iter().map(min_eigenvalue).fold(f64::INFINITY, f64::min);
    let exact = 1e-10 * (1.0 + wanted.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    let faces: Vec<Matrix> = raw.iter().map(|a| dominant_subspace(a, 1e-8 * top)).collect();
    let full: Vec<Matrix> = raw.iter().map(|a| Matrix::identity(a.rows())).collect();
    let mut grams = raw.clone();
    for candidate in [faces, full] {
        if let Some(next) = map.correct(&raw, &wanted, &candidate) {
            if identity_gap(&next) <= exact && psd_floor(&next) >= -1e-12 * top {
                grams = next;
                break;
            }
        }
    }
    let coeffs: Vec<f64> = map.apply(&grams)[..sd].iter().map(|v| v * kappa).collect();
    grams.iter_mut().for_each(|a| a.scale(kappa));
    let certificate = PutinarCertificate {
        degree: d,
        basis: Basis::Legendre,
        frame: frame.clone(),
        generators,
        gram_matrices: grams.iter().map(SymmetricMatrix::from_lower).collect(),
    };
    let condition = if reference.is_orthonormal_frame(&frame) {
        1.0
    } else {
        condition_number(&eq.gram.to_dense())
    };
    let mut report = build_report(
        FitMethod::Putinar,
        d,
        Basis::Legendre,
        &frame,
        &eq,
        coeffs,
        0.0,
        condition,
        false,
    )?;
    report.solver = Some(diagnostics(&sol, certificate.min_eigenvalue()));
    Ok((report, certificate))
}
