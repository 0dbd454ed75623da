//! Export to the SDPA sparse format (`.dat-s`), for cross-checking compiled
//! problems against external solvers.
//!
//! SDPA uses the same primal/dual pair as [`SdpProblem`], so the export is a
//! direct transcription: one line per upper-triangular nonzero,
//! `matrix block row col value`, all indices one-based, matrix 0 being `F_0`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::problem::SdpProblem;

pub fn to_sdpa_string(problem: &SdpProblem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\"momentfit export");
    let _ = writeln!(out, "{}", problem.num_vars());
    let _ = writeln!(out, "{}", problem.block_orders().len());
    let orders: Vec<String> = problem.block_orders().iter().map(|n| n.to_string()).collect();
    let _ = writeln!(out, "{{{}}}", orders.join(", "));
    let costs: Vec<String> = problem.objective().iter().map(|c| format!("{c:e}")).collect();
    let _ = writeln!(out, "{}", costs.join(" "));

    let mut emit = |mat: usize, blk: usize, m: &crate::linalg::Matrix| {
        // merged entries, upper triangle, row-major
        let mut acc = BTreeMap::new();
        for i in 0..m.rows() {
            for j in i..m.cols() {
                let v = m[(i, j)];
                if v != 0.0 {
                    acc.insert((i, j), v);
                }
            }
        }
        for ((i, j), v) in acc {
            let _ = writeln!(out, "{} {} {} {} {:e}", mat, blk + 1, i + 1, j + 1, v);
        }
    };
    for (blk, f0) in problem.constant_blocks().iter().enumerate() {
        emit(0, blk, f0);
    }
    for k in 0..problem.num_vars() {
        for blk in 0..problem.block_orders().len() {
            if problem.touches(k, blk) {
                emit(k + 1, blk, &problem.coefficient_block(k, blk));
            }
        }
    }
    out
}
