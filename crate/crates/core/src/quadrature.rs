//! Gauss–Legendre rules and their tensor products on boxes.

use crate::domain::{BoxDomain, SemialgebraicDomain};
use crate::linalg::compensated_sum;
use crate::moments::{MomentBasis, MomentVector};
use crate::multi_index::enumerate_indices;
use crate::poly::{basis_values_1d, Basis};

/// Nodes and weights on `[-1, 1]`, nodes ascending.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// `n`-point Gauss–Legendre rule (exact for degree `2n - 1`), roots by Newton
/// iteration on the three-term recurrence.
pub fn gauss_legendre(n: usize) -> GaussRule {
    assert!(n >= 1, "rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 1..n {
                let kf = k as f64;
                let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            let dp = nf * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        // recompute derivative at the converged root
        let (mut p0, mut p1) = (1.0, x);
        for k in 1..n {
            let kf = k as f64;
            let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
            p0 = p1;
            p1 = p2;
        }
        let dp = if n > 1 { nf * (x * p1 - p0) / (x * x - 1.0) } else { 1.0 };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    GaussRule { nodes, weights }
}

/// Tensor-product Gauss rule on a box, points stored row-major (`dim` coordinates each).
#[derive(Debug, Clone)]
pub struct TensorRule {
    dim: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl TensorRule {
    pub fn on_box(bbox: &BoxDomain, nodes_per_axis: usize) -> Self {
        let rule = gauss_legendre(nodes_per_axis);
        let dim = bbox.dim();
        let total = nodes_per_axis.pow(dim as u32);
        let mut points = Vec::with_capacity(total * dim);
        let mut weights = Vec::with_capacity(total);
        let mut counter = vec![0usize; dim];
        for _ in 0..total {
            let mut w = 1.0;
            for (i, &c) in counter.iter().enumerate() {
                let (a, b) = bbox.bounds()[i];
                let half = 0.5 * (b - a);
                points.push(a + half * (rule.nodes[c] + 1.0));
                w *= half * rule.weights[c];
            }
            weights.push(w);
            for c in counter.iter_mut() {
                *c += 1;
                if *c < nodes_per_axis {
                    break;
                }
                *c = 0;
            }
        }
        Self { dim, points, weights }
    }

    /// Composite Gauss rule on `[breaks[0], breaks.last()]`: `nodes_per_cell`
    /// nodes on every cell between consecutive break points.
    pub fn composite_1d(breaks: &[f64], nodes_per_cell: usize) -> Self {
        let rule = gauss_legendre(nodes_per_cell);
        let cells = breaks.len().saturating_sub(1);
        let mut points = Vec::with_capacity(cells * nodes_per_cell);
        let mut weights = Vec::with_capacity(cells * nodes_per_cell);
        for cell in breaks.windows(2) {
            let half = 0.5 * (cell[1] - cell[0]);
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                points.push(cell[0] + half * (x + 1.0));
                weights.push(half * w);
            }
        }
        Self {
            dim: 1,
            points,
            weights,
        }
    }

    /// Keeps only the nodes for which `keep` holds (indicator weighting).
    pub fn restricted(mut self, keep: impl Fn(&[f64]) -> bool) -> Self {
        let dim = self.dim;
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (p, w) in self.points.chunks(dim).zip(&self.weights) {
            if keep(p) {
                points.extend_from_slice(p);
                weights.push(*w);
            }
        }
        self.points = points;
        self.weights = weights;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks(self.dim)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        compensated_sum(self.points().zip(&self.weights).map(|(p, w)| w * f(p)))
    }

    /// `∫ b_α(x) f(x) dx` for all `|α| ≤ degree` in the given tensor basis.
    pub fn basis_moments(&self, basis: Basis, frame: &BoxDomain, degree: usize, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        let idx = enumerate_indices(self.dim, degree);
        let mut acc = vec![0.0; idx.len()];
        let mut comp = vec![0.0; idx.len()];
        let mut vals: Vec<Vec<f64>> = vec![Vec::new(); self.dim];
        for (p, w) in self.points().zip(&self.weights) {
            let fw = w * f(p);
            if fw == 0.0 {
                continue;
            }
            for (i, x) in p.iter().enumerate() {
                basis_values_1d(basis, frame.bounds()[i], *x, degree, &mut vals[i]);
            }
            for (k, alpha) in idx.iter().enumerate() {
                let mut term = fw;
                for (i, &a) in alpha.exponents().iter().enumerate() {
                    term *= vals[i][a as usize];
                }
                // Neumaier step
                let t = acc[k] + term;
                if acc[k].abs() >= term.abs() {
                    comp[k] += (acc[k] - t) + term;
                } else {
                    comp[k] += (term - t) + acc[k];
                }
                acc[k] = t;
            }
        }
        acc.iter().zip(&comp).map(|(a, c)| a + c).collect()
    }
}

/// Moments produced by [`quadrature_moments`].
#[derive(Debug, Clone)]
pub struct QuadratureMoments {
    pub moments: MomentVector,
    /// Set when the indicator of `Ω` excluded every quadrature node.
    pub all_nodes_excluded: bool,
    pub nodes_per_axis: usize,
}

/// Lebesgue moments of `Ω` up to `degree`: tensor Gauss–Legendre on the
/// bounding box with hard indicator weighting `1{g_j(x) ≥ 0 ∀j}`.
pub fn quadrature_moments(domain: &SemialgebraicDomain, degree: usize, nodes_per_axis: usize) -> QuadratureMoments {
    let rule = TensorRule::on_box(domain.bounding_box(), nodes_per_axis)
        .restricted(|x| domain.inequalities().iter().all(|g| g.eval(x) >= 0.0));
    let values = rule.basis_moments(Basis::Monomial, domain.bounding_box(), degree, |_| 1.0);
    QuadratureMoments {
        all_nodes_excluded: rule.is_empty(),
        moments: MomentVector::from_values(domain.dim(), degree, MomentBasis::Monomial, values)
            .expect("quadrature moments are finite"),
        nodes_per_axis,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::box_moment;
    use crate::poly::Polynomial;
    use approx::assert_relative_eq;

    #[test]
    fn small_rules_match_tables() {
        let r = gauss_legendre(2);
        assert_relative_eq!(r.nodes[1], 1.0 / 3f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(r.weights[0], 1.0, epsilon = 1e-15);
        let r = gauss_legendre(3);
        assert_relative_eq!(r.nodes[2], (0.6f64).sqrt(), epsilon = 1e-15);
        assert_relative_eq!(r.weights[1], 8.0 / 9.0, epsilon = 1e-15);
        let r = gauss_legendre(1);
        assert_eq!(r.nodes, vec![0.0]);
        assert_relative_eq!(r.weights[0], 2.0);
    }

    #[test]
    fn large_rule_integrates_polynomials_exactly() {
        let r = gauss_legendre(200);
        let s: f64 = r.weights.iter().sum();
        assert_relative_eq!(s, 2.0, epsilon = 1e-13);
        let m: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(398)).sum();
        assert_relative_eq!(m, 2.0 / 399.0, epsilon = 1e-13);
    }

    #[test]
    fn box_domain_matches_closed_form() {
        let b = BoxDomain::unit(2);
        let q = quadrature_moments(&SemialgebraicDomain::from_box(b.clone()), 4, 10);
        assert!(!q.all_nodes_excluded);
        for (a, v) in enumerate_indices(2, 4).iter().zip(q.moments.values()) {
            assert_relative_eq!(*v, box_moment(a, &b), epsilon = 1e-12);
        }
    }

    #[test]
    fn disc_area_by_indicator_quadrature() {
        let b = BoxDomain::cube(2, -1.0, 1.0);
        let mut g = Polynomial::zero(2, 2, Basis::Monomial, b.clone());
        g.set_coeff(&[0, 0], 1.0);
        g.set_coeff(&[2, 0], -1.0);
        g.set_coeff(&[0, 2], -1.0);
        let dom = SemialgebraicDomain::new(b, vec![g]).unwrap();
        let q = quadrature_moments(&dom, 0, 200);
        assert!((q.moments.values()[0] - std::f64::consts::PI).abs() < 5e-2);
    }

    #[test]
    fn half_interval_first_moment() {
        let b = BoxDomain::cube(1, -1.0, 1.0);
        let mut g = Polynomial::zero(1, 1, Basis::Monomial, b.clone());
        g.set_coeff(&[1], 1.0);
        let dom = SemialgebraicDomain::new(b, vec![g]).unwrap();
        let q = quadrature_moments(&dom, 1, 500);
        assert!((q.moments.values()[1] - 0.5).abs() < 2e-3);
    }

    #[test]
    fn empty_indicator_is_flagged() {
        let b = BoxDomain::cube(1, -1.0, 1.0);
        // -1 - x² ≥ 0 is never satisfied
        let mut g = Polynomial::zero(1, 2, Basis::Monomial, b.clone());
        g.set_coeff(&[0], -1.0);
        g.set_coeff(&[2], -1.0);
        let dom = SemialgebraicDomain::new(b, vec![g]).unwrap();
        let q = quadrature_moments(&dom, 2, 20);
        assert!(q.all_nodes_excluded);
        assert!(q.moments.values().iter().all(|v| *v == 0.0));
    }
}
