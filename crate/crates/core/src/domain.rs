//! Boxes and basic semialgebraic sets `{x : g_j(x) ≥ 0}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{Basis, Polynomial};

/// Axis-aligned box `Π [a_i, b_i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct BoxDomain {
    bounds: Vec<(f64, f64)>,
}

impl BoxDomain {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::InvalidInput("box needs at least one coordinate".into()));
        }
        for (i, &(a, b)) in bounds.iter().enumerate() {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::InvalidInput(format!(
                    "box interval {i} is empty or not finite: [{a}, {b}]"
                )));
            }
        }
        Ok(Self { bounds })
    }

    /// `[0, 1]ⁿ`.
    pub fn unit(dim: usize) -> Self {
        Self::cube(dim, 0.0, 1.0)
    }

    /// `[a, b]ⁿ`.
    pub fn cube(dim: usize, a: f64, b: f64) -> Self {
        Self::new(vec![(a, b); dim]).expect("cube bounds must be ordered")
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![(a, b)])
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn lower(&self, i: usize) -> f64 {
        self.bounds[i].0
    }

    pub fn upper(&self, i: usize) -> f64 {
        self.bounds[i].1
    }

    pub fn width(&self, i: usize) -> f64 {
        self.bounds[i].1 - self.bounds[i].0
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|i| self.width(i)).product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(&self.bounds).all(|(v, (a, b))| *v >= *a && *v <= *b)
    }

    /// Affine map of coordinate `i` onto `[-1, 1]`.
    #[inline]
    pub fn to_reference(&self, i: usize, x: f64) -> f64 {
        let (a, b) = self.bounds[i];
        (2.0 * x - a - b) / (b - a)
    }

    /// Box shrunk by `margin` (a fraction of each axis length) on every side.
    pub fn shrink(&self, margin: f64) -> Result<BoxDomain> {
        BoxDomain::new(
            self.bounds
                .iter()
                .map(|&(a, b)| (a + margin * (b - a), b - margin * (b - a)))
                .collect(),
        )
    }
}

impl TryFrom<Vec<[f64; 2]>> for BoxDomain {
    type Error = Error;
    fn try_from(v: Vec<[f64; 2]>) -> Result<Self> {
        Self::new(v.into_iter().map(|[a, b]| (a, b)).collect())
    }
}

impl From<BoxDomain> for Vec<[f64; 2]> {
    fn from(b: BoxDomain) -> Self {
        b.bounds.into_iter().map(|(a, b)| [a, b]).collect()
    }
}

/// `Ω = {x ∈ box : g_j(x) ≥ 0 for all j}`; an empty inequality list means `Ω` is the box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DomainFile", into = "DomainFile")]
pub struct SemialgebraicDomain {
    bbox: BoxDomain,
    inequalities: Vec<Polynomial>,
}

/// One inequality `g(x) ≥ 0` of a domain file; the basis lives on the domain box.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InequalityFile {
    pub basis: Basis,
    pub degree: usize,
    pub coeffs: Vec<f64>,
}

/// On-disk domain: `{"box": [[a, b], …], "inequalities": [{"basis", "degree", "coeffs"}, …]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainFile {
    #[serde(rename = "box")]
    pub bbox: BoxDomain,
    #[serde(default)]
    pub inequalities: Vec<InequalityFile>,
}

impl TryFrom<DomainFile> for SemialgebraicDomain {
    type Error = Error;
    fn try_from(f: DomainFile) -> Result<Self> {
        let gs = f
            .inequalities
            .into_iter()
            .map(|g| Polynomial::new(g.degree, g.basis, f.bbox.clone(), g.coeffs))
            .collect::<Result<Vec<_>>>()?;
        SemialgebraicDomain::new(f.bbox, gs)
    }
}

impl From<SemialgebraicDomain> for DomainFile {
    fn from(d: SemialgebraicDomain) -> Self {
        Self {
            inequalities: d
                .inequalities
                .into_iter()
                .map(|g| InequalityFile {
                    basis: g.basis(),
                    degree: g.degree(),
                    coeffs: g.into_coeffs(),
                })
                .collect(),
            bbox: d.bbox,
        }
    }
}

impl SemialgebraicDomain {
    pub fn new(bbox: BoxDomain, inequalities: Vec<Polynomial>) -> Result<Self> {
        for g in &inequalities {
            if g.dim() != bbox.dim() {
                return Err(Error::DimensionMismatch {
                    expected: bbox.dim(),
                    found: g.dim(),
                });
            }
        }
        Ok(Self { bbox, inequalities })
    }

    pub fn from_box(bbox: BoxDomain) -> Self {
        Self {
            bbox,
            inequalities: Vec::new(),
        }
    }

    pub fn bounding_box(&self) -> &BoxDomain {
        &self.bbox
    }

    pub fn dim(&self) -> usize {
        self.bbox.dim()
    }

    pub fn inequalities(&self) -> &[Polynomial] {
        &self.inequalities
    }

    pub fn is_box(&self) -> bool {
        self.inequalities.is_empty()
    }

    /// `d_j = ceil(deg(g_j) / 2)` for each generator.
    pub fn half_degrees(&self) -> Vec<usize> {
        self.inequalities
            .iter()
            .map(|g| g.effective_degree().div_ceil(2))
            .collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.bbox.contains(x) && self.inequalities.iter().all(|g| g.eval(x) >= 0.0)
    }

    /// Generators used by positivity certificates: the explicit inequalities,
    /// or the per-coordinate quadratics `(b_i - x_i)(x_i - a_i)` when the
    /// domain is a bare box.
    pub fn certificate_generators(&self) -> Vec<Polynomial> {
        if !self.inequalities.is_empty() {
            return self.inequalities.clone();
        }
        let n = self.dim();
        (0..n)
            .map(|i| {
                let (a, b) = self.bbox.bounds()[i];
                // -x_i² + (a+b) x_i - ab
                let mut p = Polynomial::zero(n, 2, Basis::Monomial, self.bbox.clone());
                let mut e = vec![0u32; n];
                p.set_coeff(&e, -a * b);
                e[i] = 1;
                p.set_coeff(&e, a + b);
                e[i] = 2;
                p.set_coeff(&e, -1.0);
                p
            })
            .collect()
    }
}
