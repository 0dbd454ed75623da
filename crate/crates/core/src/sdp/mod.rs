//! Dense primal-dual interior-point solver for block-diagonal linear SDPs, and
//! the epigraph compilation of convex quadratic objectives used by the
//! constrained fits.

mod problem;
mod sdpa;
mod solver;

pub use problem::{Entry, FactoredBlock, SdpProblem};
pub use sdpa::to_sdpa_string;
pub use solver::{solve, solve_with, SdpSettings, SdpSolution, SdpStatus};

use crate::error::Result;
use crate::linalg::{cholesky, cholesky_solve, Matrix, SymmetricMatrix};

/// Coefficients of an extra LMI block `Σ_k u_k F_k − F_0 ⪰ 0` in the
/// quadratic's variables `u`.
#[derive(Debug, Clone)]
pub enum LmiTerms {
    /// `(k, entry)` pairs.
    Sparse(Vec<(usize, Entry)>),
    /// `F_k = Bᵀ diag(w_k) B`; see [`FactoredBlock`].
    Factored {
        factor: Matrix,
        weights: Vec<(usize, Vec<f64>)>,
    },
}

#[derive(Debug, Clone)]
pub struct LmiBlock {
    pub order: usize,
    /// Entries of `F_0` (the block reads `Σ u_k F_k − F_0`).
    pub constant: Vec<Entry>,
    pub terms: LmiTerms,
}

/// Output of [`quadratic_to_sdp`]: variables are `(u_0, …, u_{s−1}, t)`.
#[derive(Debug, Clone)]
pub struct QuadraticSdp {
    pub problem: SdpProblem,
    /// Number of `u` variables; `t` has index `num_coeffs`.
    pub num_coeffs: usize,
    /// `s = yᵀ M⁻¹ y`: the epigraph block bounds `uᵀMu − 2uᵀy + s ≤ t`, so
    /// `t ≥ 0` with equality at the unconstrained minimizer.
    pub shift: f64,
}

impl QuadraticSdp {
    pub fn coefficients<'a>(&self, solution: &'a SdpSolution) -> &'a [f64] {
        &solution.x[..self.num_coeffs]
    }
}

/// Compiles `min uᵀMu − 2uᵀy` subject to the given LMI blocks into an SDP.
///
/// With `M = RᵀR`, block 0 is the Schur complement
/// `[[t + 2yᵀu − s, (Ru)ᵀ], [Ru, I]] ⪰ 0`, equivalent to
/// `uᵀMu − 2yᵀu + s ≤ t`. Fails with `NotPositiveDefinite` if `M` has no
/// Cholesky factor; callers regularize first.
pub fn quadratic_to_sdp(m: &SymmetricMatrix, y: &[f64], extra: Vec<LmiBlock>) -> Result<QuadraticSdp> {
    let s = m.order();
    if y.len() != s {
        return Err(crate::Error::DimensionMismatch {
            expected: s,
            found: y.len(),
        });
    }
    let l = cholesky(&m.to_dense())?;
    let shift: f64 = y.iter().zip(cholesky_solve(&l, y)).map(|(a, b)| a * b).sum();
    let mut orders = vec![s + 1];
    orders.extend(extra.iter().map(|b| b.order));
    let mut objective = vec![0.0; s + 1];
    objective[s] = 1.0;
    let mut p = SdpProblem::new(orders, objective)?;
    // t
    p.add_coefficient(s, 0, 0, 0, 1.0)?;
    for k in 0..s {
        if y[k] != 0.0 {
            p.add_coefficient(k, 0, 0, 0, 2.0 * y[k])?;
        }
        // (Ru)_i = Σ_k L[k, i] u_k
        for i in 0..=k {
            let r = l[(k, i)];
            if r != 0.0 {
                p.add_coefficient(k, 0, 1 + i, 0, r)?;
            }
        }
    }
    p.add_constant(0, 0, 0, shift)?;
    for i in 0..s {
        p.add_constant(0, 1 + i, 1 + i, -1.0)?;
    }
    for (bi, blk) in extra.into_iter().enumerate() {
        let b = bi + 1;
        for e in &blk.constant {
            p.add_constant(b, e.row, e.col, e.value)?;
        }
        match blk.terms {
            LmiTerms::Sparse(terms) => {
                for (k, e) in terms {
                    if k >= s {
                        return Err(crate::Error::InvalidInput(format!(
                            "LMI term refers to coefficient {k} of {s}"
                        )));
                    }
                    p.add_coefficient(k, b, e.row, e.col, e.value)?;
                }
            }
            LmiTerms::Factored { factor, weights } => {
                if weights.iter().any(|(k, _)| *k >= s) {
                    return Err(crate::Error::InvalidInput(
                        "LMI term refers to a coefficient out of range".into(),
                    ));
                }
                p.set_factored(b, FactoredBlock { factor, weights })?;
            }
        }
    }
    Ok(QuadraticSdp {
        problem: p,
        num_coeffs: s,
        shift,
    })
}
