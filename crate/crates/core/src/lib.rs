//! Reconstruction of a density from finitely many of its moments.
//!
//! Given moments `y_α = ∫ x^α u dλ` of an unknown nonnegative density `u`
//! with respect to a known reference measure `λ`, the crate computes the
//! degree-`d` polynomial `u_d` closest to `u` in `L2(λ)`:
//!
//! - [`l2fit`]: the unconstrained fit (a linear solve, or no solve at all in
//!   an orthonormal basis) and its Tikhonov-regularized variant;
//! - [`confit`]: two nonnegativity-constrained fits compiled to semidefinite
//!   programs and solved by the interior-point method in [`sdp`];
//! - [`maxent`]: the maximum-entropy estimate, as a baseline;
//! - [`assess`]: error metrics and superlevel-set shape recovery.

// Dense numerical kernels index several arrays with one loop variable, and
// `!(x > 0.0)` is the idiom that also rejects NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod assess;
pub mod catalog;
pub mod confit;
pub mod domain;
pub mod error;
pub mod l2fit;
pub mod linalg;
pub mod maxent;
pub mod moments;
pub mod multi_index;
pub mod poly;
pub mod quadrature;
pub mod reaction;
pub mod sdp;
pub mod tables;

pub use domain::{BoxDomain, SemialgebraicDomain};
pub use error::{Error, Result};
pub use linalg::{Matrix, SymmetricMatrix};
pub use moments::{MomentBasis, MomentVector};
pub use multi_index::MultiIndex;
pub use poly::{Basis, Polynomial};

/// Library version embedded in every serialized report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
