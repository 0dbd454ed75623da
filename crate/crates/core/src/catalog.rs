//! Built-in test densities: their exact truth functions and moment vectors.
//!
//! Densities that are polynomial on a union of boxes get exact moments from
//! Gauss rules on each piece; sets with curved boundaries go through
//! indicator quadrature on their bounding box.

use serde::{Deserialize, Serialize};

use crate::domain::{BoxDomain, SemialgebraicDomain};
use crate::error::{Error, Result};
use crate::moments::{lebesgue_legendre_moments, lebesgue_moments, MomentBasis, MomentVector};
use crate::multi_index::enumerate_indices;
use crate::poly::{Basis, Polynomial};
use crate::quadrature::TensorRule;
use crate::reaction;

/// Representation requested for generated moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MomentRepr {
    #[default]
    Monomial,
    /// `∫ φ_α dμ` for the orthonormal Legendre basis of the frame.
    Legendre,
}

impl std::str::FromStr for MomentRepr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "monomial" => Ok(MomentRepr::Monomial),
            "legendre" => Ok(MomentRepr::Legendre),
            other => Err(Error::InvalidInput(format!("unknown moment basis '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Builtin {
    /// `u(x) = x₁ + x₂` on `[0, 1]²`.
    Ex1Sum,
    /// `u(x) = |x|` on `[−1, 1]`.
    Absx,
    /// `u = 1_{[0.5, 1]}` on `[0, 1]`.
    IndicatorHalf,
    /// Indicator of the unit disc, framed by `[−1, 1]²`.
    Disc,
    /// Indicator of `{x ∈ B(0,1) : x₁(x₁² − 3x₂²) + (x₁² + x₂²)² ≥ 0}`.
    Trefoil,
    /// Indicator of a block letter E in `[0, 1]²`.
    EShape,
    /// First species `u` of the reaction-diffusion steady state on `[0, 5]`
    /// (see [`crate::reaction`]).
    ReactionDiffusion,
    /// Second species `v` of the same steady state.
    ReactionDiffusionV,
}

pub const ALL_BUILTINS: [Builtin; 8] = [
    Builtin::Ex1Sum,
    Builtin::Absx,
    Builtin::IndicatorHalf,
    Builtin::Disc,
    Builtin::Trefoil,
    Builtin::EShape,
    Builtin::ReactionDiffusion,
    Builtin::ReactionDiffusionV,
];

impl std::fmt::Display for Builtin {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Builtin::Ex1Sum => "ex1-sum",
            Builtin::Absx => "absx",
            Builtin::IndicatorHalf => "indicator-half",
            Builtin::Disc => "disc",
            Builtin::Trefoil => "trefoil",
            Builtin::EShape => "e-shape",
            Builtin::ReactionDiffusion => "reaction-diffusion",
            Builtin::ReactionDiffusionV => "reaction-diffusion-v",
        })
    }
}

impl std::str::FromStr for Builtin {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ALL_BUILTINS
            .iter()
            .copied()
            .find(|b| b.to_string() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown builtin '{s}'")))
    }
}

/// The rectangles whose union is the letter E.
pub const E_RECTANGLES: [[(f64, f64); 2]; 4] = [
    [(0.1, 0.3), (0.1, 0.9)],
    [(0.3, 0.9), (0.1, 0.26)],
    [(0.3, 0.75), (0.42, 0.58)],
    [(0.3, 0.9), (0.74, 0.9)],
];

/// Bounding box of the letter E.
pub fn e_shape_tight_frame() -> BoxDomain {
    BoxDomain::new(vec![(0.1, 0.9), (0.1, 0.9)]).expect("valid box")
}

/// A frame three times wider than the letter.
pub fn e_shape_loose_frame() -> BoxDomain {
    BoxDomain::new(vec![(-0.7, 1.7), (-0.7, 1.7)]).expect("valid box")
}

fn trefoil_polynomial(bbox: &BoxDomain) -> Polynomial {
    // x³ − 3xy² + x⁴ + 2x²y² + y⁴
    let mut p = Polynomial::zero(2, 4, Basis::Monomial, bbox.clone());
    p.set_coeff(&[3, 0], 1.0);
    p.set_coeff(&[1, 2], -3.0);
    p.set_coeff(&[4, 0], 1.0);
    p.set_coeff(&[2, 2], 2.0);
    p.set_coeff(&[0, 4], 1.0);
    p
}

fn disc_polynomial(bbox: &BoxDomain) -> Polynomial {
    let mut g = Polynomial::zero(2, 2, Basis::Monomial, bbox.clone());
    g.set_coeff(&[0, 0], 1.0);
    g.set_coeff(&[2, 0], -1.0);
    g.set_coeff(&[0, 2], -1.0);
    g
}

impl Builtin {
    pub fn dim(&self) -> usize {
        match self {
            Builtin::Absx | Builtin::IndicatorHalf | Builtin::ReactionDiffusion | Builtin::ReactionDiffusionV => 1,
            _ => 2,
        }
    }

    /// Frame on which the builtin is posed (fits default to Lebesgue on it).
    pub fn frame(&self) -> BoxDomain {
        match self {
            Builtin::Ex1Sum => BoxDomain::unit(2),
            Builtin::Absx => BoxDomain::cube(1, -1.0, 1.0),
            Builtin::IndicatorHalf => BoxDomain::unit(1),
            Builtin::Disc | Builtin::Trefoil => BoxDomain::cube(2, -1.0, 1.0),
            Builtin::EShape => e_shape_tight_frame(),
            Builtin::ReactionDiffusion | Builtin::ReactionDiffusionV => BoxDomain::cube(1, 0.0, reaction::LENGTH),
        }
    }

    /// Support set as a semialgebraic domain when the density is an
    /// indicator of one (disc, trefoil).
    pub fn support_domain(&self) -> Option<SemialgebraicDomain> {
        let bbox = self.frame();
        match self {
            Builtin::Disc => {
                Some(SemialgebraicDomain::new(bbox.clone(), vec![disc_polynomial(&bbox)]).expect("dimensions agree"))
            }
            Builtin::Trefoil => Some(
                SemialgebraicDomain::new(bbox.clone(), vec![disc_polynomial(&bbox), trefoil_polynomial(&bbox)])
                    .expect("dimensions agree"),
            ),
            _ => None,
        }
    }

    /// The density itself.
    pub fn truth(&self, x: &[f64]) -> f64 {
        match self {
            Builtin::Ex1Sum => x[0] + x[1],
            Builtin::Absx => x[0].abs(),
            Builtin::IndicatorHalf => indicator(x[0] >= 0.5),
            Builtin::Disc | Builtin::Trefoil => indicator(self.support_domain().expect("set builtin").contains(x)),
            Builtin::EShape => indicator(
                E_RECTANGLES
                    .iter()
                    .any(|r| r.iter().zip(x).all(|(&(a, b), &xi)| a <= xi && xi <= b)),
            ),
            Builtin::ReactionDiffusion => reaction::steady_state().u(x[0]),
            Builtin::ReactionDiffusionV => reaction::steady_state().v(x[0]),
        }
    }

    /// Moments up to `degree`. `frame` overrides [`Builtin::frame`] for the
    /// Legendre representation (the measure itself never depends on it);
    /// `nodes_per_axis` drives the quadrature for sets with curved boundaries;
    /// the reaction-diffusion profiles use a composite rule on their own grid.
    pub fn moments(
        &self,
        degree: usize,
        repr: MomentRepr,
        frame: Option<&BoxDomain>,
        nodes_per_axis: usize,
    ) -> Result<MomentVector> {
        let frame = frame.cloned().unwrap_or_else(|| self.frame());
        if frame.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: frame.dim(),
            });
        }
        let basis = match repr {
            MomentRepr::Monomial => Basis::Monomial,
            MomentRepr::Legendre => Basis::Legendre,
        };
        let moment_basis = match repr {
            MomentRepr::Monomial => MomentBasis::Monomial,
            MomentRepr::Legendre => MomentBasis::Legendre(frame.clone()),
        };
        let values = match (self, repr) {
            (Builtin::Ex1Sum, MomentRepr::Monomial) => enumerate_indices(2, degree)
                .iter()
                .map(|a| {
                    let (a1, a2) = (a.exponents()[0] as f64, a.exponents()[1] as f64);
                    1.0 / ((a1 + 1.0) * (a2 + 2.0)) + 1.0 / ((a1 + 2.0) * (a2 + 1.0))
                })
                .collect(),
            (Builtin::Absx, MomentRepr::Monomial) => (0..=degree)
                .map(|k| if k % 2 == 0 { 2.0 / (k as f64 + 2.0) } else { 0.0 })
                .collect(),
            (Builtin::IndicatorHalf, MomentRepr::Monomial) => (0..=degree as i32)
                .map(|k| (1.0 - 0.5f64.powi(k + 1)) / (k as f64 + 1.0))
                .collect(),
            (Builtin::Ex1Sum, _) => piecewise_moments(&[self.frame()], 1, |x| self.truth(x), basis, &frame, degree),
            (Builtin::Absx, _) => piecewise_moments(
                &[BoxDomain::interval(-1.0, 0.0)?, BoxDomain::interval(0.0, 1.0)?],
                1,
                |x| x[0].abs(),
                basis,
                &frame,
                degree,
            ),
            (Builtin::IndicatorHalf, _) => {
                piecewise_moments(&[BoxDomain::interval(0.5, 1.0)?], 0, |_| 1.0, basis, &frame, degree)
            }
            (Builtin::EShape, _) => {
                let pieces: Vec<BoxDomain> = E_RECTANGLES
                    .iter()
                    .map(|r| BoxDomain::new(r.to_vec()))
                    .collect::<Result<_>>()?;
                piecewise_moments(&pieces, 0, |_| 1.0, basis, &frame, degree)
            }
            (Builtin::Disc | Builtin::Trefoil, _) => {
                let dom = self.support_domain().expect("set builtin");
                TensorRule::on_box(&self.frame(), nodes_per_axis)
                    .restricted(|x| dom.contains(x))
                    .basis_moments(basis, &frame, degree, |_| 1.0)
            }
            (Builtin::ReactionDiffusion | Builtin::ReactionDiffusionV, _) => {
                // spline pieces: 8 nodes per grid cell are exact up to degree 12
                // per cell, far beyond what the smooth basis needs on a cell
                reaction::steady_state()
                    .rule(8)
                    .basis_moments(basis, &frame, degree, |x| self.truth(x))
            }
        };
        MomentVector::from_values(self.dim(), degree, moment_basis, values)
    }
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// `∫ b_α f dx` over a union of disjoint boxes on which `f` is a polynomial
/// of degree at most `density_degree`; Gauss rules make this exact.
pub fn piecewise_moments(
    pieces: &[BoxDomain],
    density_degree: usize,
    density: impl Fn(&[f64]) -> f64,
    basis: Basis,
    frame: &BoxDomain,
    degree: usize,
) -> Vec<f64> {
    let nodes = (degree + density_degree) / 2 + 1;
    let mut total = vec![0.0; crate::multi_index::num_monomials(frame.dim(), degree)];
    for piece in pieces {
        let part = TensorRule::on_box(piece, nodes).basis_moments(basis, frame, degree, &density);
        total.iter_mut().zip(part).for_each(|(t, p)| *t += p);
    }
    total
}

/// Lebesgue moments of a domain: closed form for a bare box, indicator
/// quadrature on the bounding box otherwise.
pub fn domain_moments(
    domain: &SemialgebraicDomain,
    degree: usize,
    repr: MomentRepr,
    nodes_per_axis: usize,
) -> MomentVector {
    let bbox = domain.bounding_box();
    match (domain.is_box(), repr) {
        (true, MomentRepr::Monomial) => lebesgue_moments(bbox, degree),
        (true, MomentRepr::Legendre) => lebesgue_legendre_moments(bbox, degree),
        (false, _) => {
            let basis = match repr {
                MomentRepr::Monomial => Basis::Monomial,
                MomentRepr::Legendre => Basis::Legendre,
            };
            let values = TensorRule::on_box(bbox, nodes_per_axis)
                .restricted(|x| domain.contains(x))
                .basis_moments(basis, bbox, degree, |_| 1.0);
            let mb = match repr {
                MomentRepr::Monomial => MomentBasis::Monomial,
                MomentRepr::Legendre => MomentBasis::Legendre(bbox.clone()),
            };
            MomentVector::from_values(domain.dim(), degree, mb, values).expect("quadrature moments are finite")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn names_round_trip() {
        for b in ALL_BUILTINS {
            assert_eq!(b.to_string().parse::<Builtin>().unwrap(), b);
            assert_eq!(serde_json::to_string(&b).unwrap(), format!("\"{b}\""));
        }
        assert!("nope".parse::<Builtin>().is_err());
    }

    #[test]
    fn closed_forms_match_the_stated_formulas() {
        let y = Builtin::Absx.moments(4, MomentRepr::Monomial, None, 0).unwrap();
        assert_eq!(y.values(), &[1.0, 0.0, 0.5, 0.0, 1.0 / 3.0]);
        let y = Builtin::Ex1Sum.moments(1, MomentRepr::Monomial, None, 0).unwrap();
        assert_relative_eq!(y.values()[0], 1.0);
        assert_relative_eq!(y.values()[1], 7.0 / 12.0, epsilon = 1e-15);
        assert_relative_eq!(y.values()[2], 7.0 / 12.0, epsilon = 1e-15);
        let y = Builtin::IndicatorHalf
            .moments(2, MomentRepr::Monomial, None, 0)
            .unwrap();
        assert_relative_eq!(y.values()[2], (1.0 - 0.125) / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn legendre_and_monomial_agree_at_low_degree() {
        for b in [Builtin::Ex1Sum, Builtin::Absx, Builtin::IndicatorHalf, Builtin::EShape] {
            let mono = b.moments(6, MomentRepr::Monomial, None, 400).unwrap();
            let leg = b.moments(6, MomentRepr::Legendre, None, 400).unwrap();
            let back = leg.to_monomial();
            for (m, r) in mono.values().iter().zip(back.values()) {
                assert!((m - r).abs() < 1e-11, "{b}: {m} vs {r}");
            }
        }
    }

    #[test]
    fn e_shape_area_and_frame_independence() {
        let area: f64 = E_RECTANGLES.iter().map(|r| (r[0].1 - r[0].0) * (r[1].1 - r[1].0)).sum();
        let y = Builtin::EShape.moments(0, MomentRepr::Monomial, None, 0).unwrap();
        assert_relative_eq!(y.values()[0], area, epsilon = 1e-14);
        let tight = Builtin::EShape.moments(5, MomentRepr::Legendre, None, 0).unwrap();
        let loose = Builtin::EShape
            .moments(5, MomentRepr::Legendre, Some(&e_shape_loose_frame()), 0)
            .unwrap();
        for (a, b) in tight.to_monomial().values().iter().zip(loose.to_monomial().values()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(Builtin::EShape.truth(&[0.2, 0.5]), 1.0);
        assert_eq!(Builtin::EShape.truth(&[0.6, 0.35]), 0.0);
    }

    #[test]
    fn disc_area_and_trefoil_truth() {
        let y = Builtin::Disc.moments(2, MomentRepr::Monomial, None, 400).unwrap();
        assert!((y.values()[0] - std::f64::consts::PI).abs() < 2e-2);
        // ∫ x² over the disc is π/4
        assert!((y.values()[3] - std::f64::consts::FRAC_PI_4).abs() < 2e-2);
        // petal direction θ = π/3 + π/3·... : r < −cos 3θ excluded, e.g. (−0.3, 0)
        assert_eq!(Builtin::Trefoil.truth(&[-0.3, 0.0]), 0.0);
        assert_eq!(Builtin::Trefoil.truth(&[0.3, 0.0]), 1.0);
        assert_eq!(Builtin::Trefoil.truth(&[0.99, 0.5]), 0.0);
    }

    #[test]
    fn box_domain_moments_are_closed_form() {
        let d = SemialgebraicDomain::from_box(BoxDomain::unit(2));
        let y = domain_moments(&d, 2, MomentRepr::Monomial, 10);
        assert_eq!(y.values()[3], 1.0 / 3.0);
        assert_eq!(y.values()[4], 0.25);
    }

    #[test]
    fn steady_state_is_nonconstant_and_within_bounds() {
        for b in [Builtin::ReactionDiffusion, Builtin::ReactionDiffusionV] {
            let vals: Vec<f64> = (0..=500).map(|i| b.truth(&[i as f64 * 0.01])).collect();
            let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            assert!(lo > 0.0 && hi <= 14.0 && hi - lo > 1.0, "{b}: [{lo}, {hi}]");
        }
    }
}
