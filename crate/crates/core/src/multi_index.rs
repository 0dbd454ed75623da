//! Exponent multi-indices and their graded-lexicographic enumeration.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Exponent vector `α ∈ Nⁿ` of the monomial `x^α`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        assert!(!exponents.is_empty(), "multi-index needs at least one coordinate");
        Self(exponents)
    }

    pub fn zero(dim: usize) -> Self {
        Self(vec![0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&a| a as usize).sum()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        assert_eq!(self.dim(), other.dim());
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        Self::new(v)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// `C(n, k)` in floating point-free integer arithmetic.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r as usize
}

/// `s(d) = C(n+d, d)`, the number of monomials of degree at most `d` in `n` variables.
pub fn num_monomials(dim: usize, degree: usize) -> usize {
    binomial(dim + degree, degree)
}

/// All `α` with `|α| ≤ degree`, in graded lexicographic order: by total
/// degree first, then by decreasing leading exponents.
pub fn enumerate_indices(dim: usize, degree: usize) -> Vec<MultiIndex> {
    assert!(dim >= 1, "dimension must be at least 1");
    let mut out = Vec::with_capacity(num_monomials(dim, degree));
    let mut buf = vec![0u32; dim];
    for k in 0..=degree {
        fill_exact(&mut buf, 0, k as u32, &mut out);
    }
    out
}

fn fill_exact(buf: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    if pos + 1 == buf.len() {
        buf[pos] = remaining;
        out.push(MultiIndex(buf.to_vec()));
        return;
    }
    for a in (0..=remaining).rev() {
        buf[pos] = a;
        fill_exact(buf, pos + 1, remaining - a, out);
    }
}

/// Position of `α` in [`enumerate_indices`] (independent of the truncation degree).
pub fn grlex_position(alpha: &[u32]) -> usize {
    let n = alpha.len();
    let total: usize = alpha.iter().map(|&a| a as usize).sum();
    // everything of strictly lower degree precedes α
    let mut pos = if total == 0 { 0 } else { num_monomials(n, total - 1) };
    let mut remaining = total;
    for (i, &a) in alpha.iter().enumerate().take(n.saturating_sub(1)) {
        let rest = n - i - 1;
        // indices sharing the prefix but with a larger exponent at slot i
        for b in (a as usize + 1)..=remaining {
            pos += binomial(remaining - b + rest - 1, rest - 1);
        }
        remaining -= a as usize;
    }
    pos
}

/// Truncated monomial index set `Nⁿ_d` with reverse lookup.
#[derive(Debug, Clone)]
pub struct IndexSet {
    dim: usize,
    degree: usize,
    indices: Vec<MultiIndex>,
    lookup: HashMap<MultiIndex, usize>,
}

impl IndexSet {
    pub fn new(dim: usize, degree: usize) -> Self {
        let indices = enumerate_indices(dim, degree);
        let lookup = indices.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect();
        Self {
            dim,
            degree,
            indices,
            lookup,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn get(&self, i: usize) -> &MultiIndex {
        &self.indices[i]
    }

    pub fn position(&self, alpha: &MultiIndex) -> Option<usize> {
        self.lookup.get(alpha).copied()
    }

    /// Position of `α + β`, if it lies within the truncation.
    pub fn sum_position(&self, a: usize, b: usize) -> Option<usize> {
        let s = self.indices[a].add(&self.indices[b]);
        self.position(&s)
    }
}
