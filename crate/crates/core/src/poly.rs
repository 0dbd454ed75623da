//! Multivariate polynomials in tensor-product bases (monomial, orthonormal
//! Legendre, Chebyshev) on a box.
//!
//! A basis element is indexed by a multi-index `α` and equals
//! `Π_i b_{α_i}(x_i)`, where `b_k` is the chosen univariate family. Legendre
//! and Chebyshev families live on the box through the affine map of each
//! coordinate onto `[-1, 1]`; Legendre functions carry the normalization
//! `sqrt((2k+1)/(b-a))` so they are orthonormal for Lebesgue measure on the
//! box. Monomials are always in the original coordinates.

use serde::{Deserialize, Serialize};

use crate::domain::BoxDomain;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::multi_index::{enumerate_indices, grlex_position, num_monomials, MultiIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Monomial,
    Legendre,
    Chebyshev,
}

impl std::fmt::Display for Basis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Basis::Monomial => "monomial",
            Basis::Legendre => "legendre",
            Basis::Chebyshev => "chebyshev",
        })
    }
}

impl std::str::FromStr for Basis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "monomial" => Ok(Basis::Monomial),
            "legendre" => Ok(Basis::Legendre),
            "chebyshev" => Ok(Basis::Chebyshev),
            other => Err(Error::InvalidInput(format!("unknown basis '{other}'"))),
        }
    }
}

/// Degree above which conversions out of the monomial basis are flagged.
pub const CONDITIONING_WARNING_DEGREE: usize = 30;

#[inline]
fn legendre_scale(k: usize, width: f64) -> f64 {
    ((2 * k + 1) as f64 / width).sqrt()
}

/// Values `b_0(x), …, b_deg(x)` of a univariate family on `[a, b]`, written into `out`.
pub fn basis_values_1d(basis: Basis, (a, b): (f64, f64), x: f64, deg: usize, out: &mut Vec<f64>) {
    out.clear();
    out.reserve(deg + 1);
    match basis {
        Basis::Monomial => {
            let mut p = 1.0;
            for _ in 0..=deg {
                out.push(p);
                p *= x;
            }
        }
        Basis::Legendre => {
            let t = (2.0 * x - a - b) / (b - a);
            let width = b - a;
            let (mut p0, mut p1) = (1.0, t);
            out.push(legendre_scale(0, width));
            if deg >= 1 {
                out.push(p1 * legendre_scale(1, width));
            }
            for k in 1..deg {
                let kf = k as f64;
                let p2 = ((2.0 * kf + 1.0) * t * p1 - kf * p0) / (kf + 1.0);
                out.push(p2 * legendre_scale(k + 1, width));
                p0 = p1;
                p1 = p2;
            }
        }
        Basis::Chebyshev => {
            let t = (2.0 * x - a - b) / (b - a);
            let (mut p0, mut p1) = (1.0, t);
            out.push(1.0);
            if deg >= 1 {
                out.push(t);
            }
            for _ in 1..deg {
                let p2 = 2.0 * t * p1 - p0;
                out.push(p2);
                p0 = p1;
                p1 = p2;
            }
        }
    }
}

/// Column `k` holds the monomial coefficients (in `x`) of `b_k` on `[a, b]`.
pub fn to_monomial_matrix_1d(basis: Basis, (a, b): (f64, f64), deg: usize) -> Matrix {
    let n = deg + 1;
    let mut c = Matrix::zeros(n, n);
    if basis == Basis::Monomial {
        return Matrix::identity(n);
    }
    // t = s x + o
    let s = 2.0 / (b - a);
    let o = -(a + b) / (b - a);
    let mul_t = |p: &[f64]| -> Vec<f64> {
        let mut r = vec![0.0; p.len() + 1];
        for (j, v) in p.iter().enumerate() {
            r[j] += o * v;
            r[j + 1] += s * v;
        }
        r
    };
    let mut prev: Vec<f64> = vec![1.0];
    let mut cur: Vec<f64> = vec![o, s];
    let mut raw: Vec<Vec<f64>> = vec![prev.clone()];
    if deg >= 1 {
        raw.push(cur.clone());
    }
    for k in 1..deg {
        let tp = mul_t(&cur);
        let next: Vec<f64> = match basis {
            Basis::Legendre => {
                let kf = k as f64;
                (0..k + 2)
                    .map(|j| {
                        let a1 = tp[j] * (2.0 * kf + 1.0);
                        let a0 = prev.get(j).copied().unwrap_or(0.0) * kf;
                        (a1 - a0) / (kf + 1.0)
                    })
                    .collect()
            }
            Basis::Chebyshev => (0..k + 2)
                .map(|j| 2.0 * tp[j] - prev.get(j).copied().unwrap_or(0.0))
                .collect(),
            Basis::Monomial => unreachable!(),
        };
        raw.push(next.clone());
        prev = cur;
        cur = next;
    }
    for (k, col) in raw.iter().enumerate() {
        let scale = if basis == Basis::Legendre {
            legendre_scale(k, b - a)
        } else {
            1.0
        };
        for (j, v) in col.iter().enumerate() {
            c[(j, k)] = v * scale;
        }
    }
    c
}

fn upper_triangular_inverse(u: &Matrix) -> Matrix {
    let n = u.rows();
    let mut inv = Matrix::zeros(n, n);
    for j in 0..n {
        inv[(j, j)] = 1.0 / u[(j, j)];
        for i in (0..j).rev() {
            let mut s = 0.0;
            for k in (i + 1)..=j {
                s += u[(i, k)] * inv[(k, j)];
            }
            inv[(i, j)] = -s / u[(i, i)];
        }
    }
    inv
}

/// Column `j` holds the coefficients of `x^j` in the family `basis` on `[a, b]`.
pub fn from_monomial_matrix_1d(basis: Basis, interval: (f64, f64), deg: usize) -> Matrix {
    if basis == Basis::Monomial {
        return Matrix::identity(deg + 1);
    }
    upper_triangular_inverse(&to_monomial_matrix_1d(basis, interval, deg))
}

/// `a_k = (2k-1)!!/k!`, the coefficients in Adams' Legendre product formula.
fn adams_a(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, j| acc * (2 * j - 1) as f64 / j as f64)
}

/// Expansion of `b_i(x) b_j(x)` in the same univariate family: `(k, coefficient)` pairs.
pub fn linearize_1d(basis: Basis, (a, b): (f64, f64), i: usize, j: usize) -> Vec<(usize, f64)> {
    match basis {
        Basis::Monomial => vec![(i + j, 1.0)],
        Basis::Chebyshev => {
            if i == 0 || j == 0 {
                vec![(i + j, 1.0)]
            } else if i == j {
                vec![(0, 0.5), (2 * i, 0.5)]
            } else {
                vec![(i.abs_diff(j), 0.5), (i + j, 0.5)]
            }
        }
        Basis::Legendre => {
            // P_m P_n = Σ_r A(m,n,r) P_{m+n-2r}, then rescale to the orthonormal family.
            let width = b - a;
            let (m, n) = if i <= j { (i, j) } else { (j, i) };
            let si = legendre_scale(i, width);
            let sj = legendre_scale(j, width);
            (0..=m)
                .map(|r| {
                    let k = m + n - 2 * r;
                    let coef = adams_a(m - r) * adams_a(r) * adams_a(n - r) / adams_a(m + n - r) * (2 * k + 1) as f64
                        / (2 * (m + n - r) + 1) as f64;
                    (k, coef * si * sj / legendre_scale(k, width))
                })
                .collect()
        }
    }
}

/// Polynomial in a tensor-product basis, coefficients in graded-lex order of `α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolynomialFile", into = "PolynomialFile")]
pub struct Polynomial {
    dim: usize,
    degree: usize,
    basis: Basis,
    domain: BoxDomain,
    coeffs: Vec<f64>,
}

/// Serialized polynomial: `{"dim", "degree", "basis", "box", "coeffs"}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolynomialFile {
    pub dim: usize,
    pub degree: usize,
    pub basis: Basis,
    #[serde(rename = "box")]
    pub domain: BoxDomain,
    pub coeffs: Vec<f64>,
}

impl TryFrom<PolynomialFile> for Polynomial {
    type Error = Error;
    fn try_from(f: PolynomialFile) -> Result<Self> {
        if f.dim != f.domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: f.dim,
                found: f.domain.dim(),
            });
        }
        Polynomial::new(f.degree, f.basis, f.domain, f.coeffs)
    }
}

impl From<Polynomial> for PolynomialFile {
    fn from(p: Polynomial) -> Self {
        Self {
            dim: p.dim,
            degree: p.degree,
            basis: p.basis,
            domain: p.domain,
            coeffs: p.coeffs,
        }
    }
}

/// Result of [`Polynomial::to_basis`].
#[derive(Debug, Clone)]
pub struct BasisChange {
    pub polynomial: Polynomial,
    /// Set when a conversion out of the monomial basis exceeds the degree where
    /// the triangular change of basis is known to lose accuracy.
    pub conditioning_warning: bool,
}

impl Polynomial {
    pub fn new(degree: usize, basis: Basis, domain: BoxDomain, coeffs: Vec<f64>) -> Result<Self> {
        let dim = domain.dim();
        let expected = num_monomials(dim, degree);
        if coeffs.len() != expected {
            return Err(Error::InvalidInput(format!(
                "polynomial of degree {degree} in {dim} variables needs {expected} coefficients, got {}",
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("polynomial coefficients must be finite".into()));
        }
        Ok(Self {
            dim,
            degree,
            basis,
            domain,
            coeffs,
        })
    }

    pub fn zero(dim: usize, degree: usize, basis: Basis, domain: BoxDomain) -> Self {
        assert_eq!(dim, domain.dim());
        Self {
            dim,
            degree,
            basis,
            domain,
            coeffs: vec![0.0; num_monomials(dim, degree)],
        }
    }

    /// The constant `c`, expressed in `basis`.
    pub fn constant(c: f64, basis: Basis, domain: BoxDomain) -> Self {
        let scale = match basis {
            Basis::Legendre => 1.0 / domain.volume().sqrt(),
            _ => 1.0,
        };
        let mut p = Self::zero(domain.dim(), 0, basis, domain);
        p.coeffs[0] = c / scale;
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn coeff(&self, exponents: &[u32]) -> f64 {
        let p = grlex_position(exponents);
        self.coeffs.get(p).copied().unwrap_or(0.0)
    }

    pub fn set_coeff(&mut self, exponents: &[u32], value: f64) {
        let p = grlex_position(exponents);
        assert!(p < self.coeffs.len(), "exponent beyond polynomial degree");
        self.coeffs[p] = value;
    }

    /// Largest `|α|` carrying a nonzero coefficient.
    pub fn effective_degree(&self) -> usize {
        let idx = enumerate_indices(self.dim, self.degree);
        idx.iter()
            .zip(&self.coeffs)
            .filter(|(_, c)| **c != 0.0)
            .map(|(a, _)| a.degree())
            .max()
            .unwrap_or(0)
    }

    /// Same function with a larger declared degree (zero padding).
    pub fn extended(&self, degree: usize) -> Polynomial {
        assert!(degree >= self.degree, "extension cannot lower the degree");
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(num_monomials(self.dim, degree), 0.0);
        Self {
            coeffs,
            degree,
            ..self.clone()
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut scratch = EvalScratch::default();
        self.eval_with(x, &mut scratch)
    }

    /// Evaluation reusing buffers; the hot path for grid assessment.
    pub fn eval_with(&self, x: &[f64], scratch: &mut EvalScratch) -> f64 {
        assert_eq!(x.len(), self.dim, "point dimension mismatch");
        scratch.values.resize(self.dim, Vec::new());
        for (i, xi) in x.iter().enumerate() {
            basis_values_1d(
                self.basis,
                self.domain.bounds()[i],
                *xi,
                self.degree,
                &mut scratch.values[i],
            );
        }
        if self.dim == 1 {
            return self.coeffs.iter().zip(&scratch.values[0]).map(|(c, v)| c * v).sum();
        }
        if scratch.indices.len() != self.coeffs.len() || scratch.indices_dim != self.dim {
            scratch.indices = enumerate_indices(self.dim, self.degree);
            scratch.indices_dim = self.dim;
        }
        let mut sum = 0.0;
        for (alpha, c) in scratch.indices.iter().zip(&self.coeffs) {
            if *c == 0.0 {
                continue;
            }
            let mut term = *c;
            for (i, &a) in alpha.exponents().iter().enumerate() {
                term *= scratch.values[i][a as usize];
            }
            sum += term;
        }
        sum
    }

    /// Re-expresses the polynomial in `target` (same box).
    pub fn to_basis(&self, target: Basis) -> BasisChange {
        if target == self.basis {
            return BasisChange {
                polynomial: self.clone(),
                conditioning_warning: false,
            };
        }
        let warn =
            self.degree > CONDITIONING_WARNING_DEGREE && (self.basis == Basis::Monomial || target == Basis::Monomial);
        let mono = if self.basis == Basis::Monomial {
            self.coeffs.clone()
        } else {
            let mats: Vec<Matrix> = (0..self.dim)
                .map(|i| to_monomial_matrix_1d(self.basis, self.domain.bounds()[i], self.degree))
                .collect();
            apply_triangular_tensor(&mats, self.dim, self.degree, &self.coeffs, false)
        };
        let out = if target == Basis::Monomial {
            mono
        } else {
            let mats: Vec<Matrix> = (0..self.dim)
                .map(|i| from_monomial_matrix_1d(target, self.domain.bounds()[i], self.degree))
                .collect();
            apply_triangular_tensor(&mats, self.dim, self.degree, &mono, false)
        };
        BasisChange {
            polynomial: Polynomial {
                coeffs: out,
                basis: target,
                ..self.clone()
            },
            conditioning_warning: warn,
        }
    }

    /// Monomial-basis copy, ignoring the conditioning flag.
    pub fn to_monomial(&self) -> Polynomial {
        self.to_basis(Basis::Monomial).polynomial
    }

    /// Exact product in the shared basis (degree adds up).
    pub fn multiply(&self, other: &Polynomial) -> Result<Polynomial> {
        if self.basis != other.basis || self.domain != other.domain {
            return Err(Error::InvalidInput(
                "polynomial product needs a shared basis and box".into(),
            ));
        }
        let degree = self.degree + other.degree;
        let mut out = Polynomial::zero(self.dim, degree, self.basis, self.domain.clone());
        let ia = enumerate_indices(self.dim, self.degree);
        let ib = enumerate_indices(other.dim, other.degree);
        let mut scratch = ProductScratch::default();
        for (a, ca) in ia.iter().zip(&self.coeffs) {
            if *ca == 0.0 {
                continue;
            }
            for (b, cb) in ib.iter().zip(&other.coeffs) {
                if *cb == 0.0 {
                    continue;
                }
                product_terms(self.basis, &self.domain, a, b, &mut scratch, |pos, c| {
                    out.coeffs[pos] += ca * cb * c;
                });
            }
        }
        Ok(out)
    }

    pub fn scaled(&self, s: f64) -> Polynomial {
        let mut p = self.clone();
        p.coeffs.iter_mut().for_each(|c| *c *= s);
        p
    }

    /// Sum of two polynomials in the same basis and box.
    pub fn add(&self, other: &Polynomial) -> Result<Polynomial> {
        if self.basis != other.basis || self.domain != other.domain {
            return Err(Error::InvalidInput(
                "polynomial sum needs a shared basis and box".into(),
            ));
        }
        let degree = self.degree.max(other.degree);
        let mut out = self.extended(degree);
        for (o, c) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *o += c;
        }
        Ok(out)
    }
}

/// Reusable buffers for [`Polynomial::eval_with`].
#[derive(Debug, Default, Clone)]
pub struct EvalScratch {
    values: Vec<Vec<f64>>,
    indices: Vec<MultiIndex>,
    indices_dim: usize,
}

/// Reusable buffers for [`product_terms`].
#[derive(Debug, Default)]
pub struct ProductScratch {
    factors: Vec<Vec<(usize, f64)>>,
    exps: Vec<u32>,
}

/// Calls `emit(position, coefficient)` for each term of the expansion of
/// the product of basis elements `α` and `β` in the same family.
pub fn product_terms(
    basis: Basis,
    domain: &BoxDomain,
    alpha: &MultiIndex,
    beta: &MultiIndex,
    scratch: &mut ProductScratch,
    mut emit: impl FnMut(usize, f64),
) {
    let n = alpha.dim();
    scratch.factors.clear();
    for i in 0..n {
        scratch.factors.push(linearize_1d(
            basis,
            domain.bounds()[i],
            alpha.exponents()[i] as usize,
            beta.exponents()[i] as usize,
        ));
    }
    scratch.exps.clear();
    scratch.exps.resize(n, 0);
    fn rec(factors: &[Vec<(usize, f64)>], exps: &mut [u32], i: usize, acc: f64, emit: &mut dyn FnMut(usize, f64)) {
        if i == factors.len() {
            emit(grlex_position(exps), acc);
            return;
        }
        for &(k, c) in &factors[i] {
            exps[i] = k as u32;
            rec(factors, exps, i + 1, acc * c, emit);
        }
    }
    let ProductScratch { factors, exps } = scratch;
    rec(factors, exps, 0, 1.0, &mut emit);
}

/// Applies per-coordinate upper-triangular change-of-basis matrices to a
/// tensor-indexed vector.
///
/// With `transpose == false`: `out_β = Σ_α c_α Π_i T_i[β_i, α_i]` (coefficient
/// conversion). With `transpose == true`: `out_α = Σ_β c_β Π_i T_i[β_i, α_i]`
/// (moment conversion). Either way only `β ≤ α` componentwise contributes.
pub(crate) fn apply_triangular_tensor(
    mats: &[Matrix],
    dim: usize,
    degree: usize,
    input: &[f64],
    transpose: bool,
) -> Vec<f64> {
    let idx = enumerate_indices(dim, degree);
    let mut out = vec![0.0; input.len()];
    let mut beta = vec![0u32; dim];
    for (ia, alpha) in idx.iter().enumerate() {
        if !transpose && input[ia] == 0.0 {
            continue;
        }
        beta.iter_mut().for_each(|b| *b = 0);
        let mut acc = 0.0;
        loop {
            let mut w = 1.0;
            for i in 0..dim {
                w *= mats[i][(beta[i] as usize, alpha.exponents()[i] as usize)];
                if w == 0.0 {
                    break;
                }
            }
            if w != 0.0 {
                let pb = grlex_position(&beta);
                if transpose {
                    acc += w * input[pb];
                } else {
                    out[pb] += w * input[ia];
                }
            }
            let mut i = 0;
            while i < dim {
                if beta[i] < alpha.exponents()[i] {
                    beta[i] += 1;
                    break;
                }
                beta[i] = 0;
                i += 1;
            }
            if i == dim {
                break;
            }
        }
        if transpose {
            out[ia] = acc;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn sym() -> BoxDomain {
        BoxDomain::cube(1, -1.0, 1.0)
    }

    #[test]
    fn constant_is_constant_in_every_basis() {
        let b = BoxDomain::new(vec![(0.0, 2.0), (-1.0, 3.0)]).unwrap();
        for basis in [Basis::Monomial, Basis::Legendre, Basis::Chebyshev] {
            let p = Polynomial::constant(2.5, basis, b.clone()).extended(3);
            for target in [Basis::Monomial, Basis::Legendre, Basis::Chebyshev] {
                let q = p.to_basis(target).polynomial;
                assert_relative_eq!(q.eval(&[0.3, 1.7]), 2.5, epsilon = 1e-12);
                for (k, c) in q.coeffs().iter().enumerate().skip(1) {
                    assert!(c.abs() < 1e-12, "coefficient {k} = {c}");
                }
            }
        }
    }

    #[test]
    fn legendre_p2_expands_to_monomials() {
        // normalized φ_2 = sqrt(5/2) P_2 with P_2 = (3x² - 1)/2 on [-1, 1]
        let mut p = Polynomial::zero(1, 2, Basis::Legendre, sym());
        p.set_coeff(&[2], (2.0_f64 / 5.0).sqrt());
        let m = p.to_monomial();
        assert_relative_eq!(m.coeffs()[0], -0.5, epsilon = 1e-14);
        assert_relative_eq!(m.coeffs()[1], 0.0, epsilon = 1e-14);
        assert_relative_eq!(m.coeffs()[2], 1.5, epsilon = 1e-14);
    }

    #[test]
    fn legendre_p3_expands_to_monomials() {
        // oracle: P_3 = (5x³ - 3x)/2, expanded by hand
        let mut p = Polynomial::zero(1, 3, Basis::Legendre, sym());
        p.set_coeff(&[3], (2.0_f64 / 7.0).sqrt());
        let m = p.to_monomial();
        let expect = [0.0, -1.5, 0.0, 2.5];
        for (c, e) in m.coeffs().iter().zip(expect) {
            assert_relative_eq!(*c, e, epsilon = 1e-14);
        }
    }

    #[test]
    fn tensor_legendre_l1_l1_is_xy() {
        let b = BoxDomain::cube(2, -1.0, 1.0);
        let mut p = Polynomial::zero(2, 2, Basis::Legendre, b);
        p.set_coeff(&[1, 1], 1.0);
        let m = p.to_monomial();
        for (a, c) in enumerate_indices(2, 2).iter().zip(m.coeffs()) {
            if a.exponents() == [1, 1] {
                // φ_1(x)φ_1(y) = (3/2) x y
                assert_relative_eq!(*c, 1.5, epsilon = 1e-14);
            } else {
                assert!(c.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn legendre_values_are_orthonormal_under_gauss_rule() {
        let rule = crate::quadrature::gauss_legendre(40);
        let (a, b) = (0.0, 2.0);
        let mut vals = Vec::new();
        let deg = 12;
        let mut gram = vec![vec![0.0; deg + 1]; deg + 1];
        for (t, w) in rule.nodes.iter().zip(&rule.weights) {
            let x = 1.0 + t;
            basis_values_1d(Basis::Legendre, (a, b), x, deg, &mut vals);
            for i in 0..=deg {
                for j in 0..=deg {
                    gram[i][j] += w * vals[i] * vals[j];
                }
            }
        }
        for i in 0..=deg {
            for j in 0..=deg {
                let e = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(gram[i][j], e, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn linearization_matches_quadrature() {
        // oracle: ∫ φ_i φ_j φ_k by Gauss-Legendre (exact for these degrees)
        let rule = crate::quadrature::gauss_legendre(60);
        let (a, b) = (0.0, 1.0);
        let mut vals = Vec::new();
        let deg = 24;
        let tables: Vec<Vec<f64>> = rule
            .nodes
            .iter()
            .map(|t| {
                basis_values_1d(Basis::Legendre, (a, b), 0.5 * (t + 1.0), deg, &mut vals);
                vals.clone()
            })
            .collect();
        for &(i, j) in &[(0, 0), (1, 1), (3, 5), (12, 12), (7, 11)] {
            let lin = linearize_1d(Basis::Legendre, (a, b), i, j);
            for k in 0..=deg {
                let q: f64 = rule
                    .weights
                    .iter()
                    .zip(&tables)
                    .map(|(w, v)| 0.5 * w * v[i] * v[j] * v[k])
                    .sum();
                let got = lin.iter().find(|(kk, _)| *kk == k).map_or(0.0, |(_, c)| *c);
                assert_relative_eq!(got, q, epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn chebyshev_product_identity() {
        let b = sym();
        let mut p = Polynomial::zero(1, 3, Basis::Chebyshev, b.clone());
        p.set_coeff(&[3], 1.0);
        let mut q = Polynomial::zero(1, 2, Basis::Chebyshev, b);
        q.set_coeff(&[2], 1.0);
        let r = p.multiply(&q).unwrap();
        for x in [-0.9, -0.2, 0.4, 0.77] {
            assert_relative_eq!(r.eval(&[x]), p.eval(&[x]) * q.eval(&[x]), epsilon = 1e-13);
        }
    }

    proptest! {
        #[test]
        fn round_trip_preserves_coefficients(
            dim in 1usize..4,
            degree in 0usize..8,
            seed in proptest::collection::vec(-1.0f64..1.0, 165),
            lo in -2.0f64..0.0,
            width in 0.5f64..3.0,
        ) {
            let b = BoxDomain::cube(dim, lo, lo + width);
            let n = num_monomials(dim, degree);
            let p = Polynomial::new(degree, Basis::Monomial, b, seed[..n].to_vec()).unwrap();
            for target in [Basis::Legendre, Basis::Chebyshev] {
                let back = p.to_basis(target).polynomial.to_basis(Basis::Monomial).polynomial;
                let scale = p.coeffs().iter().fold(1e-300f64, |m, c| m.max(c.abs()));
                for (x, y) in p.coeffs().iter().zip(back.coeffs()) {
                    prop_assert!((x - y).abs() <= 1e-9 * scale, "{} vs {}", x, y);
                }
            }
        }

        #[test]
        fn evaluation_is_basis_independent(
            degree in 0usize..10,
            seed in proptest::collection::vec(-1.0f64..1.0, 66),
            pt in proptest::collection::vec(0.0f64..1.0, 2),
        ) {
            let b = BoxDomain::new(vec![(0.0, 1.0), (-0.5, 2.0)]).unwrap();
            let n = num_monomials(2, degree);
            let p = Polynomial::new(degree, Basis::Legendre, b, seed[..n].to_vec()).unwrap();
            let x = [pt[0], -0.5 + 2.5 * pt[1]];
            let v = p.eval(&x);
            for target in [Basis::Monomial, Basis::Chebyshev] {
                let q = p.to_basis(target).polynomial;
                let w = q.eval(&x);
                // relative to the size of the terms being summed (no cancellation credit)
                let mut abs = q.clone();
                abs.coeffs_mut().iter_mut().for_each(|c| *c = c.abs());
                let terms = match target {
                    Basis::Monomial => abs.eval(&[x[0].abs(), x[1].abs()]),
                    _ => abs.coeffs().iter().sum(),
                };
                prop_assert!((v - w).abs() <= 1e-10 * terms.max(1.0), "{} vs {}", v, w);
            }
        }

        #[test]
        fn product_evaluates_to_product(
            seed in proptest::collection::vec(-1.0f64..1.0, 20),
            x in 0.0f64..1.0, y in 0.0f64..1.0,
        ) {
            let b = BoxDomain::unit(2);
            for basis in [Basis::Monomial, Basis::Legendre, Basis::Chebyshev] {
                let p = Polynomial::new(2, basis, b.clone(), seed[..6].to_vec()).unwrap();
                let q = Polynomial::new(3, basis, b.clone(), seed[6..16].to_vec()).unwrap();
                let r = p.multiply(&q).unwrap();
                let lhs = r.eval(&[x, y]);
                let rhs = p.eval(&[x, y]) * q.eval(&[x, y]);
                prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0));
            }
        }
    }

    #[test]
    fn high_degree_monomial_conversion_is_flagged() {
        let b = sym();
        let p = Polynomial::zero(1, 31, Basis::Monomial, b);
        assert!(p.to_basis(Basis::Legendre).conditioning_warning);
        assert!(!p.to_basis(Basis::Monomial).conditioning_warning);
    }
}
