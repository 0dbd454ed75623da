//! Block-diagonal linear SDPs in the linear-matrix-inequality form
//!
//! ```text
//! (P)  minimize  cᵀx        subject to  X = Σ_k x_k F_k − F_0 ⪰ 0
//! (D)  maximize  F_0 • Y    subject to  F_k • Y = c_k,  Y ⪰ 0
//! ```
//!
//! Every `F` is block diagonal with the same block orders; order-1 blocks
//! are plain nonnegativity constraints. Coefficient matrices are stored per
//! block either as sparse symmetric entries or, for blocks with many dense
//! but structured coefficients, in factored form `F_k = Bᵀ diag(w_k) B` with
//! a factor `B` shared by all variables of that block.

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// One symmetric entry: `F[row, col] = F[col, row] = value`. Duplicates add up.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

/// Coefficients of a block in factored form: `F_k = Bᵀ diag(w_k) B`.
#[derive(Debug, Clone)]
pub struct FactoredBlock {
    /// `B`, one row per factor vector (`q × order`).
    pub factor: Matrix,
    /// `(variable, w_k)` pairs; `w_k` has one weight per row of `B`.
    pub weights: Vec<(usize, Vec<f64>)>,
}

#[derive(Debug, Clone)]
pub struct SdpProblem {
    blocks: Vec<usize>,
    objective: Vec<f64>,
    pub(crate) constant: Vec<Vec<Entry>>,
    /// `sparse[block]` lists `(variable, entries)`, one item per variable touching the block.
    pub(crate) sparse: Vec<Vec<(usize, Vec<Entry>)>>,
    pub(crate) factored: Vec<Option<FactoredBlock>>,
}

impl SdpProblem {
    pub fn new(block_orders: Vec<usize>, objective: Vec<f64>) -> Result<Self> {
        if block_orders.is_empty() || block_orders.contains(&0) {
            return Err(Error::InvalidInput("SDP blocks must have positive orders".into()));
        }
        if objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("SDP objective must be finite".into()));
        }
        let nb = block_orders.len();
        Ok(Self {
            blocks: block_orders,
            objective,
            constant: vec![Vec::new(); nb],
            sparse: vec![Vec::new(); nb],
            factored: vec![None; nb],
        })
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn block_orders(&self) -> &[usize] {
        &self.blocks
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    fn check_entry(&self, block: usize, row: usize, col: usize, value: f64) -> Result<Entry> {
        let order = *self
            .blocks
            .get(block)
            .ok_or_else(|| Error::InvalidInput(format!("block {block} does not exist")))?;
        if row >= order || col >= order {
            return Err(Error::InvalidInput(format!(
                "entry ({row},{col}) outside block {block} of order {order}"
            )));
        }
        if !value.is_finite() {
            return Err(Error::InvalidInput("SDP coefficients must be finite".into()));
        }
        Ok(Entry {
            row: row.max(col),
            col: row.min(col),
            value,
        })
    }

    /// Adds `value` at `(row, col)` and `(col, row)` of `F_0`.
    pub fn add_constant(&mut self, block: usize, row: usize, col: usize, value: f64) -> Result<()> {
        let e = self.check_entry(block, row, col, value)?;
        self.constant[block].push(e);
        Ok(())
    }

    /// Adds `value` at `(row, col)` and `(col, row)` of `F_var`.
    pub fn add_coefficient(&mut self, var: usize, block: usize, row: usize, col: usize, value: f64) -> Result<()> {
        if var >= self.num_vars() {
            return Err(Error::InvalidInput(format!("variable {var} does not exist")));
        }
        if self.factored[block].is_some() {
            return Err(Error::InvalidInput(format!(
                "block {block} is factored; sparse coefficients are not allowed"
            )));
        }
        let e = self.check_entry(block, row, col, value)?;
        let list = &mut self.sparse[block];
        match list.binary_search_by_key(&var, |(v, _)| *v) {
            Ok(p) => list[p].1.push(e),
            Err(p) => list.insert(p, (var, vec![e])),
        }
        Ok(())
    }

    /// Declares the coefficients of `block` in factored form.
    pub fn set_factored(&mut self, block: usize, factored: FactoredBlock) -> Result<()> {
        let order = *self
            .blocks
            .get(block)
            .ok_or_else(|| Error::InvalidInput(format!("block {block} does not exist")))?;
        if !self.sparse[block].is_empty() {
            return Err(Error::InvalidInput(format!(
                "block {block} already has sparse coefficients"
            )));
        }
        if factored.factor.cols() != order {
            return Err(Error::DimensionMismatch {
                expected: order,
                found: factored.factor.cols(),
            });
        }
        let mut weights = factored.weights;
        weights.sort_by_key(|(v, _)| *v);
        for w in weights.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidInput(format!("variable {} listed twice", w[0].0)));
            }
        }
        for (v, w) in &weights {
            if *v >= self.num_vars() || w.len() != factored.factor.rows() {
                return Err(Error::InvalidInput(format!(
                    "factored weights for variable {v} are malformed"
                )));
            }
            if w.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput("SDP coefficients must be finite".into()));
            }
        }
        self.factored[block] = Some(FactoredBlock {
            factor: factored.factor,
            weights,
        });
        Ok(())
    }

    /// `F_0` as dense blocks.
    pub fn constant_blocks(&self) -> Vec<Matrix> {
        self.blocks
            .iter()
            .zip(&self.constant)
            .map(|(&n, entries)| {
                let mut m = Matrix::zeros(n, n);
                scatter(&mut m, entries, 1.0);
                m
            })
            .collect()
    }

    /// `Σ_k x_k F_k` as dense blocks.
    pub fn linear_map(&self, x: &[f64]) -> Vec<Matrix> {
        assert_eq!(x.len(), self.num_vars());
        (0..self.blocks.len())
            .map(|b| {
                let n = self.blocks[b];
                let mut m = Matrix::zeros(n, n);
                for (v, entries) in &self.sparse[b] {
                    if x[*v] != 0.0 {
                        scatter(&mut m, entries, x[*v]);
                    }
                }
                if let Some(f) = &self.factored[b] {
                    let mut diag = vec![0.0; f.factor.rows()];
                    for (v, w) in &f.weights {
                        for (d, wq) in diag.iter_mut().zip(w) {
                            *d += x[*v] * wq;
                        }
                    }
                    m.axpy(1.0, &weighted_gram(&f.factor, &diag));
                }
                m
            })
            .collect()
    }

    /// `(F_k • Y)_k`, the adjoint of [`SdpProblem::linear_map`].
    pub fn adjoint(&self, y: &[Matrix]) -> Vec<f64> {
        let mut out = vec![0.0; self.num_vars()];
        for b in 0..self.blocks.len() {
            for (v, entries) in &self.sparse[b] {
                out[*v] += inner_sparse(entries, &y[b]);
            }
            if let Some(f) = &self.factored[b] {
                let diag = quadratic_forms(&f.factor, &y[b]);
                for (v, w) in &f.weights {
                    out[*v] += w.iter().zip(&diag).map(|(a, b)| a * b).sum::<f64>();
                }
            }
        }
        out
    }

    /// Dense copy of `F_var` restricted to `block` (mostly for export and tests).
    pub fn coefficient_block(&self, var: usize, block: usize) -> Matrix {
        let n = self.blocks[block];
        let mut m = Matrix::zeros(n, n);
        if let Ok(p) = self.sparse[block].binary_search_by_key(&var, |(v, _)| *v) {
            scatter(&mut m, &self.sparse[block][p].1, 1.0);
        }
        if let Some(f) = &self.factored[block] {
            if let Ok(p) = f.weights.binary_search_by_key(&var, |(v, _)| *v) {
                m.axpy(1.0, &weighted_gram(&f.factor, &f.weights[p].1));
            }
        }
        m
    }

    /// Whether `var` has a nonzero coefficient somewhere in `block`.
    pub fn touches(&self, var: usize, block: usize) -> bool {
        self.sparse[block].binary_search_by_key(&var, |(v, _)| *v).is_ok()
            || self.factored[block]
                .as_ref()
                .is_some_and(|f| f.weights.binary_search_by_key(&var, |(v, _)| *v).is_ok())
    }
}

pub(crate) fn scatter(m: &mut Matrix, entries: &[Entry], scale: f64) {
    for e in entries {
        m[(e.row, e.col)] += scale * e.value;
        if e.row != e.col {
            m[(e.col, e.row)] += scale * e.value;
        }
    }
}

pub(crate) fn inner_sparse(entries: &[Entry], y: &Matrix) -> f64 {
    entries
        .iter()
        .map(|e| {
            if e.row == e.col {
                e.value * y[(e.row, e.row)]
            } else {
                e.value * (y[(e.row, e.col)] + y[(e.col, e.row)])
            }
        })
        .sum()
}

/// `Bᵀ diag(w) B`.
pub(crate) fn weighted_gram(b: &Matrix, w: &[f64]) -> Matrix {
    let n = b.cols();
    let mut m = Matrix::zeros(n, n);
    for (q, &wq) in w.iter().enumerate() {
        if wq == 0.0 {
            continue;
        }
        let row = b.row(q);
        for i in 0..n {
            let s = wq * row[i];
            if s == 0.0 {
                continue;
            }
            let mi = m.row_mut(i);
            for (mij, bj) in mi.iter_mut().zip(row) {
                *mij += s * bj;
            }
        }
    }
    m
}

/// `(b_qᵀ Y b_q)_q` for the rows `b_q` of `B`.
pub(crate) fn quadratic_forms(b: &Matrix, y: &Matrix) -> Vec<f64> {
    let by = b.matmul(y);
    (0..b.rows())
        .map(|q| by.row(q).iter().zip(b.row(q)).map(|(u, v)| u * v).sum())
        .collect()
}
