//! Maximum-entropy estimate `exp(p)`, the baseline the L2 fits are compared
//! against.
//!
//! The exponent `p = Σ u_α φ_α` maximizes the concave dual
//! `⟨ŷ, u⟩ − ∫ exp(p) dλ` (Lebesgue measure on a box), whose stationarity
//! conditions are exactly the moment equations `∫ φ_α exp(p) dx = ŷ_α`.
//! Integrals use a tensor Gauss–Legendre rule; the exponent is kept in the
//! orthonormal Legendre basis of the box, where the Hessian at the uniform
//! start point is a multiple of the identity.

use serde::{Deserialize, Serialize};

use crate::domain::BoxDomain;
use crate::error::{Error, Result};
use crate::linalg::{compensated_sum, Matrix};
use crate::moments::MomentVector;
use crate::multi_index::{enumerate_indices, num_monomials};
use crate::poly::{basis_values_1d, Basis, Polynomial};
use crate::quadrature::TensorRule;

/// `x ↦ exp(p(x))` on a box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpPolyDensity {
    /// `p`, in the Legendre basis of `domain`.
    pub exponent: Polynomial,
    #[serde(rename = "box")]
    pub domain: BoxDomain,
}

impl ExpPolyDensity {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.exponent.eval(x).exp()
    }

    /// The exponent with monomial coefficients (ill-conditioned at high degree).
    pub fn exponent_monomial(&self) -> Polynomial {
        self.exponent.to_monomial()
    }

    /// `∫ b_α exp(p) dx` for `|α| ≤ degree`, by a Gauss rule with `nodes` per axis.
    pub fn moments(&self, basis: Basis, degree: usize, nodes: usize) -> Vec<f64> {
        TensorRule::on_box(&self.domain, nodes).basis_moments(basis, &self.domain, degree, |x| self.eval(x))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxentOptions {
    /// Gauss nodes per axis; `None` picks 200 for n = 1 and 80 for n = 2.
    pub quad_nodes: Option<usize>,
    /// Stop once every moment equation holds to `tol` (Legendre representation).
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for MaxentOptions {
    fn default() -> Self {
        Self {
            quad_nodes: None,
            tol: 1e-8,
            max_iter: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxentDiagnostics {
    pub iterations: usize,
    pub quad_nodes: usize,
    /// `⟨ŷ, u⟩ − ∫ exp(p)` at the returned iterate.
    pub objective: f64,
    /// Dual objective at every accepted iterate, starting point included.
    pub objective_trace: Vec<f64>,
    /// `max_α |∫ φ_α exp(p) − ŷ_α|` (Legendre representation).
    pub gradient_norm: f64,
    /// `max_α |∫ b_α exp(p) − y_α|` in the representation `y` was given in.
    pub moment_mismatch: f64,
}

/// Exponent coefficients beyond this size mean the dual is running off to
/// infinity: no nonnegative measure has the given moments.
const DIVERGENCE_BOUND: f64 = 1e8;

/// Consecutive quasi-Newton steps without progress (a new smallest gradient,
/// or a decrease of f visible at its own scale) before giving up.
const STALL_LIMIT: usize = 50;

/// The negated dual `f(u) = ∫ exp(p) − ⟨ŷ, u⟩` on the quadrature nodes.
struct Dual {
    table: Matrix,
    weights: Vec<f64>,
    rhs: Vec<f64>,
}

/// The weighted values `w_q exp(p(x_q))` at one iterate.
struct Point {
    e: Vec<f64>,
}

impl Dual {
    fn point(&self, p: Vec<f64>) -> Point {
        let e = p.iter().zip(&self.weights).map(|(v, w)| w * v.exp()).collect();
        Point { e }
    }

    fn value(&self, u: &[f64], at: &Point) -> f64 {
        compensated_sum(at.e.iter().copied()) - compensated_sum(u.iter().zip(&self.rhs).map(|(a, b)| a * b))
    }

    fn gradient(&self, at: &Point) -> Vec<f64> {
        let mut grad = self.table.tr_matvec(&at.e);
        grad.iter_mut().zip(&self.rhs).for_each(|(g, y)| *g -= y);
        grad
    }

    /// `f(u + t·dir) − f(u)` from its own terms, `Σ w e^p expm1(t q) − t⟨ŷ, dir⟩`
    /// with `q = table·dir`: accurate even when the change is far below the
    /// rounding of `f` itself, which is what lets the line search work all
    /// the way down to small tolerances.
    fn change(&self, at: &Point, q: &[f64], dir: &[f64], t: f64) -> f64 {
        let mass = compensated_sum(at.e.iter().zip(q).map(|(e, qi)| e * (t * qi).exp_m1()));
        let lin = compensated_sum(dir.iter().zip(&self.rhs).map(|(a, b)| a * b));
        mass - t * lin
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Fits `exp(p)`, `deg p ≤ d`, to the moments `y` of a density on `bbox`.
///
/// Quasi-Newton (BFGS) on the concave dual with a backtracking Armijo line
/// search, started from the uniform density of mass `y_0`.
pub fn maxent_fit(
    y: &MomentVector,
    d: usize,
    bbox: &BoxDomain,
    options: &MaxentOptions,
) -> Result<(ExpPolyDensity, MaxentDiagnostics)> {
    let n = bbox.dim();
    if n > 2 {
        return Err(Error::Unsupported(format!(
            "maximum-entropy fits need cubature in dimension {n}; only n ≤ 2 is supported"
        )));
    }
    if y.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: y.dim(),
        });
    }
    if y.degree() < d {
        return Err(Error::DegreeTooLow {
            required: d,
            available: y.degree(),
        });
    }
    if !(options.tol > 0.0) {
        return Err(Error::InvalidInput("maximum-entropy tolerance must be positive".into()));
    }
    let nodes = options.quad_nodes.unwrap_or(if n == 1 { 200 } else { 80 });
    let truncated = y.truncate(d)?;
    let rhs = truncated.integrals(Basis::Legendre, bbox);
    let s = num_monomials(n, d);
    let volume = bbox.volume();
    let phi0 = 1.0 / volume.sqrt();
    let mass = rhs[0] / phi0;
    if !(mass > 0.0) || rhs.iter().any(|v| !v.is_finite()) {
        return Err(Error::Diverged);
    }

    let rule = TensorRule::on_box(bbox, nodes);
    let idx = enumerate_indices(n, d);
    let mut table = Matrix::zeros(rule.len(), s);
    let mut vals: Vec<Vec<f64>> = vec![Vec::new(); n];
    for (q, x) in rule.points().enumerate() {
        for (i, xi) in x.iter().enumerate() {
            basis_values_1d(Basis::Legendre, bbox.bounds()[i], *xi, d, &mut vals[i]);
        }
        for (k, alpha) in idx.iter().enumerate() {
            table[(q, k)] = alpha
                .exponents()
                .iter()
                .enumerate()
                .map(|(i, &a)| vals[i][a as usize])
                .product();
        }
    }
    let dual = Dual {
        table,
        weights: rule.weights().to_vec(),
        rhs,
    };

    // uniform start: p ≡ log(y_0 / volume); the Hessian there is (y_0/vol)·I
    let mut u = vec![0.0; s];
    u[0] = (mass / volume).ln() / phi0;
    let mut h = Matrix::identity(s);
    h.scale(volume / mass);
    let mut at = dual.point(dual.table.matvec(&u));
    // f is tracked through the accurately computed changes, so the trace is
    // exactly monotone even once they drop below the rounding of f
    let mut f = dual.value(&u, &at);
    let mut g = dual.gradient(&at);
    let mut trace = vec![-f];
    let mut iterations = 0;
    let mut stalled = 0;
    let mut best_gradient = max_abs(&g);
    while max_abs(&g) > options.tol {
        if iterations >= options.max_iter {
            return Err(Error::LineSearchFailure);
        }
        iterations += 1;
        let mut dir = h.matvec(&g);
        dir.iter_mut().for_each(|v| *v = -*v);
        let slope = dot(&g, &dir);
        if slope >= 0.0 {
            // lost descent (roundoff in H): restart from the scaled identity
            h = Matrix::identity(s);
            h.scale(volume / mass);
            continue;
        }
        let q = dual.table.matvec(&dir);
        let mut t = 1.0;
        let accepted = loop {
            let delta = dual.change(&at, &q, &dir, t);
            if delta.is_finite() && delta <= 1e-4 * t * slope {
                let trial: Vec<f64> = u.iter().zip(&dir).map(|(a, b)| a + t * b).collect();
                break Some((trial, delta));
            }
            t *= 0.5;
            if t < 1e-20 {
                break None;
            }
        };
        let Some((next, delta)) = accepted else {
            return Err(Error::LineSearchFailure);
        };
        let next_at = dual.point(dual.table.matvec(&next));
        let gn = dual.gradient(&next_at);
        let step: Vec<f64> = next.iter().zip(&u).map(|(a, b)| a - b).collect();
        let dg: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&step, &dg);
        let norms = dot(&step, &step).sqrt() * dot(&dg, &dg).sqrt();
        if sy > 1e-14 * norms {
            // H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ
            let rho = 1.0 / sy;
            let hy = h.matvec(&dg);
            let yhy = dot(&dg, &hy);
            for i in 0..s {
                for j in 0..s {
                    h[(i, j)] +=
                        -rho * (step[i] * hy[j] + hy[i] * step[j]) + (rho * rho * yhy + rho) * step[i] * step[j];
                }
            }
        }
        let gn_max = max_abs(&gn);
        let resolvable = -delta > 64.0 * f64::EPSILON * f.abs().max(1.0);
        if gn_max < best_gradient || resolvable {
            best_gradient = best_gradient.min(gn_max);
            stalled = 0;
        } else {
            stalled += 1;
            if stalled >= STALL_LIMIT {
                return Err(Error::LineSearchFailure);
            }
        }
        u = next;
        at = next_at;
        f += delta;
        g = gn;
        trace.push(-f);
        let mass_now = compensated_sum(at.e.iter().copied());
        if max_abs(&u) > DIVERGENCE_BOUND || f < -DIVERGENCE_BOUND * (1.0 + mass) || !(mass_now > 0.0) {
            return Err(Error::Diverged);
        }
    }

    let exponent = Polynomial::new(d, Basis::Legendre, bbox.clone(), u)?;
    let density = ExpPolyDensity {
        exponent,
        domain: bbox.clone(),
    };
    let given = truncated.basis().basis();
    let frame = match truncated.basis() {
        crate::moments::MomentBasis::Legendre(frame) => frame.clone(),
        crate::moments::MomentBasis::Monomial => bbox.clone(),
    };
    let fitted = rule.basis_moments(given, &frame, d, |x| density.eval(x));
    let moment_mismatch = fitted
        .iter()
        .zip(truncated.values())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let diagnostics = MaxentDiagnostics {
        iterations,
        quad_nodes: nodes,
        objective: -f,
        objective_trace: trace,
        gradient_norm: max_abs(&g),
        moment_mismatch,
    };
    Ok((density, diagnostics))
}
