//! Truncated moment sequences, moment and localizing matrices, and the Riesz
//! functional.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::domain::BoxDomain;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, SymmetricMatrix};
use crate::multi_index::{enumerate_indices, grlex_position, num_monomials, MultiIndex};
use crate::poly::{
    apply_triangular_tensor, from_monomial_matrix_1d, product_terms, to_monomial_matrix_1d, Basis, Polynomial,
    ProductScratch,
};
use crate::quadrature::TensorRule;

/// What the entries of a [`MomentVector`] integrate.
///
/// `Monomial` entries are `∫ x^α dμ`. `Legendre(frame)` entries are
/// `∫ φ_α dμ` for the orthonormal Legendre basis of `frame`; this is the
/// well-conditioned representation at high degree, where monomial moments
/// lose all significant digits on conversion.
#[derive(Debug, Clone, PartialEq)]
pub enum MomentBasis {
    Monomial,
    Legendre(BoxDomain),
}

impl MomentBasis {
    pub fn basis(&self) -> Basis {
        match self {
            MomentBasis::Monomial => Basis::Monomial,
            MomentBasis::Legendre(_) => Basis::Legendre,
        }
    }
}

/// Truncated moment sequence `y = (y_α)_{|α| ≤ d}` in graded-lex order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MomentFile", into = "MomentFile")]
pub struct MomentVector {
    dim: usize,
    degree: usize,
    basis: MomentBasis,
    values: Vec<f64>,
}

impl MomentVector {
    pub fn from_values(dim: usize, degree: usize, basis: MomentBasis, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("moment dimension must be at least 1".into()));
        }
        let expected = num_monomials(dim, degree);
        if values.len() != expected {
            return Err(Error::InvalidInput(format!(
                "degree-{degree} moments in {dim} variables need {expected} entries, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("moment entry {i} is not finite")));
        }
        if let MomentBasis::Legendre(frame) = &basis {
            if frame.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: frame.dim(),
                });
            }
        }
        Ok(Self {
            dim,
            degree,
            basis,
            values,
        })
    }

    /// Monomial moments `∫ x^α dμ`.
    pub fn monomial(dim: usize, degree: usize, values: Vec<f64>) -> Result<Self> {
        Self::from_values(dim, degree, MomentBasis::Monomial, values)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn basis(&self) -> &MomentBasis {
        &self.basis
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Entry for the exponent `α`.
    pub fn get(&self, alpha: &[u32]) -> Option<f64> {
        self.values.get(grlex_position(alpha)).copied()
    }

    /// Moments up to a lower degree (a prefix in graded-lex order).
    pub fn truncate(&self, degree: usize) -> Result<MomentVector> {
        if degree > self.degree {
            return Err(Error::DegreeTooLow {
                required: degree,
                available: self.degree,
            });
        }
        Ok(Self {
            values: self.values[..num_monomials(self.dim, degree)].to_vec(),
            degree,
            ..self.clone()
        })
    }

    /// Same measure, entries re-expressed as monomial moments.
    pub fn to_monomial(&self) -> MomentVector {
        match &self.basis {
            MomentBasis::Monomial => self.clone(),
            MomentBasis::Legendre(frame) => Self {
                values: self.integrals(Basis::Monomial, frame),
                basis: MomentBasis::Monomial,
                ..self.clone()
            },
        }
    }

    /// Same measure, entries re-expressed as `∫ φ_α dμ` for the Legendre basis of `frame`.
    pub fn to_legendre(&self, frame: &BoxDomain) -> Result<MomentVector> {
        if frame.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: frame.dim(),
            });
        }
        Ok(Self {
            values: self.integrals(Basis::Legendre, frame),
            basis: MomentBasis::Legendre(frame.clone()),
            ..self.clone()
        })
    }

    /// `∫ b_α dμ` for every `|α| ≤ degree` of the tensor basis `basis` on `frame`.
    ///
    /// Exact copy when the stored representation already matches; otherwise
    /// the triangular change of basis is applied (through monomials).
    pub fn integrals(&self, basis: Basis, frame: &BoxDomain) -> Vec<f64> {
        match (&self.basis, basis) {
            (MomentBasis::Monomial, Basis::Monomial) => return self.values.clone(),
            (MomentBasis::Legendre(own), Basis::Legendre) if own == frame => return self.values.clone(),
            _ => {}
        }
        let mono = match &self.basis {
            MomentBasis::Monomial => self.values.clone(),
            MomentBasis::Legendre(own) => {
                // x^β = Σ_α D[α,β] φ_α  ⇒  y_β = Σ_α D[α,β] ŷ_α
                let mats: Vec<Matrix> = (0..self.dim)
                    .map(|i| from_monomial_matrix_1d(Basis::Legendre, own.bounds()[i], self.degree))
                    .collect();
                apply_triangular_tensor(&mats, self.dim, self.degree, &self.values, true)
            }
        };
        if basis == Basis::Monomial {
            return mono;
        }
        // b_α = Σ_β C[β,α] x^β  ⇒  ∫ b_α dμ = Σ_β C[β,α] y_β
        let mats: Vec<Matrix> = (0..self.dim)
            .map(|i| to_monomial_matrix_1d(basis, frame.bounds()[i], self.degree))
            .collect();
        apply_triangular_tensor(&mats, self.dim, self.degree, &mono, true)
    }

    /// Entry-wise scaling (`c · μ`).
    pub fn scaled(&self, c: f64) -> MomentVector {
        Self {
            values: self.values.iter().map(|v| v * c).collect(),
            ..self.clone()
        }
    }
}

/// On-disk moment file: `{"dim", "degree", "ordering": "grlex", "moments"}`,
/// plus optional `"basis": "legendre"` with its `"box"` frame.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentFile {
    pub dim: usize,
    pub degree: usize,
    pub ordering: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Basis>,
    #[serde(default, rename = "box", skip_serializing_if = "Option::is_none")]
    pub frame: Option<BoxDomain>,
    pub moments: Vec<f64>,
}

impl TryFrom<MomentFile> for MomentVector {
    type Error = Error;
    fn try_from(f: MomentFile) -> Result<Self> {
        if f.ordering != "grlex" {
            return Err(Error::InvalidInput(format!(
                "unsupported moment ordering '{}', expected 'grlex'",
                f.ordering
            )));
        }
        let basis = match (f.basis.unwrap_or(Basis::Monomial), f.frame) {
            (Basis::Monomial, _) => MomentBasis::Monomial,
            (Basis::Legendre, Some(frame)) => MomentBasis::Legendre(frame),
            (Basis::Legendre, None) => return Err(Error::InvalidInput("legendre moments need a 'box' frame".into())),
            (Basis::Chebyshev, _) => return Err(Error::Unsupported("chebyshev moment files".into())),
        };
        MomentVector::from_values(f.dim, f.degree, basis, f.moments)
    }
}

impl From<MomentVector> for MomentFile {
    fn from(y: MomentVector) -> Self {
        let (basis, frame) = match y.basis {
            MomentBasis::Monomial => (None, None),
            MomentBasis::Legendre(frame) => (Some(Basis::Legendre), Some(frame)),
        };
        MomentFile {
            dim: y.dim,
            degree: y.degree,
            ordering: "grlex".into(),
            basis,
            frame,
            moments: y.values,
        }
    }
}

/// Uniform relative componentwise noise: each entry becomes `y_α(1 + a·ξ_α)`
/// with `ξ_α ~ U[−1, 1]` drawn from a xoshiro256++ stream seeded by `seed`.
pub fn perturb_relative(y: &MomentVector, amplitude: f64, seed: u64) -> Result<MomentVector> {
    if !(amplitude >= 0.0) || !amplitude.is_finite() {
        return Err(Error::InvalidInput(format!(
            "perturbation amplitude must be finite and nonnegative, got {amplitude}"
        )));
    }
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    Ok(MomentVector {
        values: y
            .values
            .iter()
            .map(|v| v * (1.0 + amplitude * rng.gen_range(-1.0..=1.0)))
            .collect(),
        ..y.clone()
    })
}

/// `∫_box x^α dx = Π_i (b_i^{α_i+1} − a_i^{α_i+1}) / (α_i + 1)`.
pub fn box_moment(alpha: &MultiIndex, bbox: &BoxDomain) -> f64 {
    assert_eq!(alpha.dim(), bbox.dim(), "multi-index and box dimensions differ");
    alpha
        .exponents()
        .iter()
        .zip(bbox.bounds())
        .map(|(&k, &(a, b))| {
            let k1 = k as i32 + 1;
            (b.powi(k1) - a.powi(k1)) / k1 as f64
        })
        .product()
}

/// Monomial moments of Lebesgue measure on a box.
pub fn lebesgue_moments(bbox: &BoxDomain, degree: usize) -> MomentVector {
    let values = enumerate_indices(bbox.dim(), degree)
        .iter()
        .map(|a| box_moment(a, bbox))
        .collect();
    MomentVector::monomial(bbox.dim(), degree, values).expect("box moments are finite")
}

/// Legendre moments of Lebesgue measure on its own box: `sqrt(volume)·e_0`.
pub fn lebesgue_legendre_moments(bbox: &BoxDomain, degree: usize) -> MomentVector {
    let mut values = vec![0.0; num_monomials(bbox.dim(), degree)];
    values[0] = bbox.volume().sqrt();
    MomentVector::from_values(bbox.dim(), degree, MomentBasis::Legendre(bbox.clone()), values)
        .expect("box moments are finite")
}

fn require_degree(y: &MomentVector, required: usize) -> Result<()> {
    if y.degree < required {
        return Err(Error::DegreeTooLow {
            required,
            available: y.degree,
        });
    }
    Ok(())
}

/// `M_d(y)`: entry `(α, β)` is `y_{α+β}`, in the monomial basis.
pub fn moment_matrix(y: &MomentVector, d: usize) -> Result<SymmetricMatrix> {
    require_degree(y, 2 * d)?;
    let mono = y.to_monomial();
    let idx = enumerate_indices(y.dim, d);
    Ok(SymmetricMatrix::from_fn(idx.len(), |i, j| {
        mono.values[grlex_position(idx[i].add(&idx[j]).exponents())]
    }))
}

/// `M_d(g y)`: entry `(α, β)` is `Σ_γ g_γ y_{α+β+γ}` (g expanded in monomials).
pub fn localizing_matrix(y: &MomentVector, g: &Polynomial, d: usize) -> Result<SymmetricMatrix> {
    if g.dim() != y.dim {
        return Err(Error::DimensionMismatch {
            expected: y.dim,
            found: g.dim(),
        });
    }
    let gm = g.to_monomial();
    let gdeg = gm.effective_degree();
    require_degree(y, 2 * d + gdeg)?;
    let mono = y.to_monomial();
    let idx = enumerate_indices(y.dim, d);
    let gterms: Vec<(MultiIndex, f64)> = enumerate_indices(y.dim, gdeg)
        .into_iter()
        .zip(gm.coeffs().iter().copied())
        .filter(|(_, c)| *c != 0.0)
        .collect();
    Ok(SymmetricMatrix::from_fn(idx.len(), |i, j| {
        let ab = idx[i].add(&idx[j]);
        gterms.iter().fold(0.0, |acc, (gamma, c)| {
            acc + c * mono.values[grlex_position(ab.add(gamma).exponents())]
        })
    }))
}

/// Riesz functional `L_y(p) = ∫ p dμ`, i.e. `Σ_α p_α y_α` once `p` and `y`
/// share a basis. `p` may be given in any basis; it is matched to `y`.
pub fn riesz(y: &MomentVector, p: &Polynomial) -> Result<f64> {
    if p.dim() != y.dim {
        return Err(Error::DimensionMismatch {
            expected: y.dim,
            found: p.dim(),
        });
    }
    let deg = p.effective_degree();
    require_degree(y, deg)?;
    let coeffs = &p.coeffs()[..num_monomials(p.dim(), deg.min(p.degree()))];
    let integrals = y.truncate(deg)?.integrals(p.basis(), p.domain());
    Ok(crate::linalg::compensated_sum(
        coeffs.iter().zip(&integrals).map(|(c, m)| c * m),
    ))
}

/// Gram matrix `G_ij = ∫ b_i b_j dμ` of the degree-`d` tensor basis on `frame`
/// with respect to the measure whose moments are `z` (needs `z.degree ≥ 2d`).
///
/// Products `b_i b_j` are linearized exactly in the same family, so no
/// quadrature is involved.
pub fn gram_matrix(z: &MomentVector, basis: Basis, frame: &BoxDomain, d: usize) -> Result<SymmetricMatrix> {
    if frame.dim() != z.dim {
        return Err(Error::DimensionMismatch {
            expected: z.dim,
            found: frame.dim(),
        });
    }
    require_degree(z, 2 * d)?;
    let zz = z.truncate(2 * d)?.integrals(basis, frame);
    let idx = enumerate_indices(z.dim, d);
    let mut scratch = ProductScratch::default();
    let mut g = SymmetricMatrix::zeros(idx.len());
    for i in 0..idx.len() {
        for j in 0..=i {
            let mut s = 0.0;
            product_terms(basis, frame, &idx[i], &idx[j], &mut scratch, |k, c| s += c * zz[k]);
            g.set(i, j, s);
        }
    }
    Ok(g)
}

/// Inner products `∫_box b_i b_j dx` of the degree-`d` tensor basis,
/// evaluated by a Gauss rule exact for the products.
///
/// For Legendre this is the identity (orthonormality); Chebyshev functions
/// are orthogonal only for their own weight, so their Lebesgue Gram is dense.
pub fn orthonormal_gram(bbox: &BoxDomain, basis: Basis, d: usize) -> SymmetricMatrix {
    if basis == Basis::Monomial {
        return moment_matrix(&lebesgue_moments(bbox, 2 * d), d).expect("degree is consistent");
    }
    let rule = TensorRule::on_box(bbox, d + 1);
    let idx = enumerate_indices(bbox.dim(), d);
    let mut vals: Vec<Vec<f64>> = vec![Vec::new(); bbox.dim()];
    let mut acc = vec![vec![0.0; idx.len()]; idx.len()];
    let mut row = vec![0.0; idx.len()];
    for (p, w) in rule.points().zip(rule.weights()) {
        for (i, x) in p.iter().enumerate() {
            crate::poly::basis_values_1d(basis, bbox.bounds()[i], *x, d, &mut vals[i]);
        }
        for (k, alpha) in idx.iter().enumerate() {
            row[k] = alpha
                .exponents()
                .iter()
                .enumerate()
                .map(|(i, &a)| vals[i][a as usize])
                .product();
        }
        for i in 0..idx.len() {
            for j in 0..=i {
                acc[i][j] += w * row[i] * row[j];
            }
        }
    }
    SymmetricMatrix::from_fn(idx.len(), |i, j| acc[i.max(j)][i.min(j)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::SemialgebraicDomain;
    use crate::quadrature::quadrature_moments;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn interval(a: f64, b: f64) -> BoxDomain {
        BoxDomain::interval(a, b).unwrap()
    }

    fn poly1(bx: &BoxDomain, coeffs: &[f64]) -> Polynomial {
        Polynomial::new(coeffs.len() - 1, Basis::Monomial, bx.clone(), coeffs.to_vec()).unwrap()
    }

    #[test]
    fn box_moment_examples() {
        assert_relative_eq!(box_moment(&MultiIndex::new(vec![2]), &interval(0.0, 1.0)), 1.0 / 3.0);
        assert_eq!(box_moment(&MultiIndex::new(vec![3]), &interval(-1.0, 1.0)), 0.0);
        assert_relative_eq!(box_moment(&MultiIndex::new(vec![1, 0]), &BoxDomain::unit(2)), 0.5);
    }

    #[test]
    fn rejects_bad_lengths_and_non_finite() {
        assert!(MomentVector::monomial(1, 2, vec![1.0, 0.5]).is_err());
        assert!(MomentVector::monomial(1, 1, vec![1.0, f64::NAN]).is_err());
        assert!(MomentVector::monomial(2, 1, vec![1.0, f64::INFINITY, 0.0]).is_err());
    }

    #[test]
    fn hilbert_moment_matrix() {
        let y = lebesgue_moments(&interval(0.0, 1.0), 2);
        let m = moment_matrix(&y, 1).unwrap();
        assert_eq!(m.get(0, 0), 1.0);
        assert_eq!(m.get(0, 1), 0.5);
        assert_relative_eq!(m.get(1, 1), 1.0 / 3.0);
    }

    #[test]
    fn dirac_moment_matrix_has_rank_one() {
        let y = MomentVector::monomial(1, 2, vec![1.0, 0.0, 0.0]).unwrap();
        let m = moment_matrix(&y, 1).unwrap();
        assert_eq!(m.to_dense().as_slice(), &[1.0, 0.0, 0.0, 0.0]);
        let ev = m.eigenvalues();
        assert!(ev[0].abs() < 1e-15 && (ev[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bivariate_cross_entry() {
        let y = lebesgue_moments(&BoxDomain::unit(2), 2);
        let m = moment_matrix(&y, 1).unwrap();
        assert_eq!(m.get(1, 2), 0.25);
        assert_eq!(m.get(2, 1), 0.25);
    }

    #[test]
    fn moment_matrix_needs_degree() {
        let y = lebesgue_moments(&interval(0.0, 1.0), 3);
        assert!(matches!(
            moment_matrix(&y, 2),
            Err(Error::DegreeTooLow {
                required: 4,
                available: 3
            })
        ));
    }

    #[test]
    fn localizing_with_one_is_moment_matrix_bitwise() {
        let bx = BoxDomain::new(vec![(-0.5, 1.0), (0.0, 2.0)]).unwrap();
        let y = lebesgue_moments(&bx, 6);
        let one = Polynomial::constant(1.0, Basis::Monomial, bx.clone());
        let a = localizing_matrix(&y, &one, 3).unwrap();
        let b = moment_matrix(&y, 3).unwrap();
        assert_eq!(a.packed_lower(), b.packed_lower());
    }

    #[test]
    fn localizing_by_x_shifts_hilbert() {
        let bx = interval(0.0, 1.0);
        let y = lebesgue_moments(&bx, 3);
        let m = localizing_matrix(&y, &poly1(&bx, &[0.0, 1.0]), 1).unwrap();
        assert_relative_eq!(m.get(0, 0), 0.5);
        assert_relative_eq!(m.get(0, 1), 1.0 / 3.0);
        assert_relative_eq!(m.get(1, 1), 0.25);
        assert!(localizing_matrix(&y.truncate(2).unwrap(), &poly1(&bx, &[0.0, 1.0]), 1).is_err());
    }

    #[test]
    fn localizing_by_support_quadratic_is_psd() {
        let bx = interval(-1.0, 1.0);
        let y = lebesgue_moments(&bx, 4);
        let m = localizing_matrix(&y, &poly1(&bx, &[1.0, 0.0, -1.0]), 1).unwrap();
        // y_{i+j} - y_{i+j+2} on [-1,1]: [[2-2/3, 0],[0, 2/3-2/5]]
        assert_relative_eq!(m.get(0, 0), 4.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(m.get(1, 1), 4.0 / 15.0, epsilon = 1e-15);
        assert_eq!(m.get(0, 1), 0.0);
        assert!(m.min_eigenvalue() > 0.0);
    }

    #[test]
    fn riesz_examples() {
        let bx = interval(0.0, 1.0);
        let y = lebesgue_moments(&bx, 3);
        assert_eq!(
            riesz(&y, &Polynomial::constant(1.0, Basis::Monomial, bx.clone())).unwrap(),
            1.0
        );
        assert_relative_eq!(riesz(&y, &poly1(&bx, &[0.0, 0.0, 1.0])).unwrap(), 1.0 / 3.0);
        assert_relative_eq!(
            riesz(&y, &poly1(&bx, &[0.0, 1.0, -1.0])).unwrap(),
            1.0 / 6.0,
            epsilon = 1e-15
        );
        assert!(riesz(&y.truncate(1).unwrap(), &poly1(&bx, &[0.0, 0.0, 1.0])).is_err());
    }

    #[test]
    fn riesz_is_basis_independent() {
        let bx = BoxDomain::new(vec![(-1.0, 2.0), (0.0, 1.5)]).unwrap();
        let y = lebesgue_moments(&bx, 6);
        let mut p = Polynomial::zero(2, 6, Basis::Monomial, bx.clone());
        for (k, c) in p.coeffs_mut().iter_mut().enumerate() {
            *c = ((k * 7 % 11) as f64 - 5.0) / 3.0;
        }
        let direct = riesz(&y, &p).unwrap();
        for basis in [Basis::Legendre, Basis::Chebyshev] {
            let q = p.to_basis(basis).polynomial;
            assert_relative_eq!(riesz(&y, &q).unwrap(), direct, max_relative = 1e-11);
        }
        let yl = y.to_legendre(&bx).unwrap();
        assert_relative_eq!(riesz(&yl, &p).unwrap(), direct, max_relative = 1e-11);
    }

    #[test]
    fn legendre_moment_round_trip() {
        let bx = interval(-1.0, 3.0);
        let y = lebesgue_moments(&bx, 12);
        let yl = y.to_legendre(&bx).unwrap();
        assert_relative_eq!(yl.values()[0], 2.0, epsilon = 1e-13);
        for v in &yl.values()[1..] {
            assert!(v.abs() < 1e-9, "{v}");
        }
        let back = yl.to_monomial();
        for (a, b) in back.values().iter().zip(y.values()) {
            assert_relative_eq!(a, b, max_relative = 1e-9);
        }
        assert_eq!(lebesgue_legendre_moments(&bx, 3).values(), &[2.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn legendre_gram_is_identity() {
        for (bx, d) in [
            (interval(-1.0, 1.0), 8),
            (interval(0.0, 2.0), 4),
            (BoxDomain::new(vec![(-3.0, 0.5), (1.0, 4.0)]).unwrap(), 10),
        ] {
            let g = orthonormal_gram(&bx, Basis::Legendre, d);
            let n = g.order();
            for i in 0..n {
                for j in 0..n {
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((g.get(i, j) - e).abs() < 1e-10, "({i},{j}) = {}", g.get(i, j));
                }
            }
        }
    }

    #[test]
    fn monomial_gram_is_hilbert() {
        let g = orthonormal_gram(&interval(0.0, 1.0), Basis::Monomial, 2);
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(g.get(i, j), 1.0 / (i + j + 1) as f64);
            }
        }
    }

    #[test]
    fn linearized_gram_matches_quadrature_gram() {
        let bx = BoxDomain::new(vec![(0.0, 2.0), (-1.0, 1.0)]).unwrap();
        let z = lebesgue_moments(&bx, 10);
        for basis in [Basis::Monomial, Basis::Legendre, Basis::Chebyshev] {
            let a = gram_matrix(&z, basis, &bx, 5).unwrap();
            let b = orthonormal_gram(&bx, basis, 5);
            for (u, v) in a.packed_lower().iter().zip(b.packed_lower()) {
                assert!((u - v).abs() < 1e-10 * (1.0 + v.abs()), "{basis}: {u} vs {v}");
            }
        }
    }

    #[test]
    fn moment_file_round_trip() {
        let y = lebesgue_moments(&BoxDomain::unit(2), 2);
        let s = serde_json::to_string(&y).unwrap();
        assert!(s.contains("\"ordering\":\"grlex\""));
        assert!(!s.contains("basis"));
        let back: MomentVector = serde_json::from_str(&s).unwrap();
        assert_eq!(back, y);
        let yl = lebesgue_legendre_moments(&BoxDomain::unit(1), 2);
        let back: MomentVector = serde_json::from_str(&serde_json::to_string(&yl).unwrap()).unwrap();
        assert_eq!(back, yl);
        assert!(
            serde_json::from_str::<MomentVector>(r#"{"dim":1,"degree":1,"ordering":"lex","moments":[1,0.5]}"#).is_err()
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn quadrature_moment_matrices_are_psd(
            r in 0.3f64..0.95, cx in -0.2f64..0.2, d in 1usize..5,
        ) {
            // disc of radius r centred at (cx, 0) inside [-1,1]²
            let bx = BoxDomain::cube(2, -1.0, 1.0);
            let mut g = Polynomial::zero(2, 2, Basis::Monomial, bx.clone());
            g.set_coeff(&[0, 0], r * r - cx * cx);
            g.set_coeff(&[1, 0], 2.0 * cx);
            g.set_coeff(&[2, 0], -1.0);
            g.set_coeff(&[0, 2], -1.0);
            let dom = SemialgebraicDomain::new(bx, vec![g]).unwrap();
            let y = quadrature_moments(&dom, 2 * d, 40).moments;
            let ev = moment_matrix(&y, d).unwrap().eigenvalues();
            let top = ev.last().copied().unwrap();
            prop_assert!(ev[0] >= -1e-8 * top, "min {} max {}", ev[0], top);
        }

        #[test]
        fn riesz_of_product_is_bilinear_form(a in 0usize..4, b in 0usize..4, c in 0usize..4, e in 0usize..4) {
            let bx = BoxDomain::new(vec![(0.0, 1.0), (-1.0, 2.0)]).unwrap();
            let y = lebesgue_moments(&bx, 8);
            let half = 4;
            let m = moment_matrix(&y, half).unwrap();
            let mut p = Polynomial::zero(2, half, Basis::Monomial, bx.clone());
            p.set_coeff(&[a as u32, b as u32 % (half as u32 - a as u32 + 1)], 1.0);
            let mut q = Polynomial::zero(2, half, Basis::Monomial, bx.clone());
            q.set_coeff(&[c as u32, e as u32 % (half as u32 - c as u32 + 1)], 1.0);
            let lhs = riesz(&y, &p.multiply(&q).unwrap()).unwrap();
            let rhs = m.to_dense().matvec(q.coeffs());
            let rhs: f64 = p.coeffs().iter().zip(&rhs).map(|(u, v)| u * v).sum();
            prop_assert!((lhs - rhs).abs() <= 1e-13 * (1.0 + lhs.abs()));
        }
    }
}
