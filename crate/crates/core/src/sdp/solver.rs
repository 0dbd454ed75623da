//! Infeasible-start primal-dual path-following method with Nesterov–Todd
//! scaling and Mehrotra predictor-corrector steps.
//!
//! Each iteration scales a block pair `(X, Y)` by `G` so that both become the
//! same diagonal `D = Λ^{1/2}` (`Λ` the eigenvalues of `XY`), linearizes
//! `X̃Ỹ = σμI` in the scaled space, and eliminates the matrix directions
//! through the Schur complement `B_ij = tr(F_i V F_j V)`, `V = (G Gᵀ)^{-1}`.

use serde::{Deserialize, Serialize};

use super::problem::{Entry, SdpProblem};
use crate::error::Result;
use crate::linalg::{
    cholesky, cholesky_solve, lower_inverse, symmetric_eigen, symmetric_eigenvalues, Matrix, SymmetricMatrix,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    MaxIterations,
    NumericalTrouble,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SdpSettings {
    pub tol: f64,
    pub max_iter: usize,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
    /// Iterates whose norm exceeds this bound certify (near-)infeasibility.
    pub big_m: f64,
    /// Refine `x` at termination by enforcing exact complementarity on the
    /// directions where the dual iterate dominates (kept only if it helps).
    pub polish: bool,
}

impl Default for SdpSettings {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 100,
            step_fraction: 0.98,
            big_m: 1e12,
            polish: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SdpSolution {
    pub x: Vec<f64>,
    /// Slack blocks `Σ x_k F_k − F_0`.
    pub slack: Vec<SymmetricMatrix>,
    /// Dual blocks `Y`.
    pub dual: Vec<SymmetricMatrix>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub status: SdpStatus,
    pub iterations: usize,
}

impl SdpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SdpStatus::Optimal
    }

    pub fn gap(&self) -> f64 {
        (self.primal_objective - self.dual_objective).abs()
    }
}

/// Solves with the given tolerance and iteration cap, default otherwise.
pub fn solve(problem: &SdpProblem, tol: f64, max_iter: usize) -> SdpSolution {
    solve_with(
        problem,
        &SdpSettings {
            tol,
            max_iter,
            ..SdpSettings::default()
        },
    )
}

/// Per-block scaling data for one iteration.
struct Scaling {
    /// `G⁻¹`, so that `X̃ = G⁻¹ X G⁻ᵀ`, `Ỹ = Gᵀ Y G`.
    g_inv: Matrix,
    g: Matrix,
    /// `V = G⁻ᵀ G⁻¹`.
    v: Matrix,
    /// Diagonal of the scaled point `D`.
    d: Vec<f64>,
    /// Cholesky factors of `X` and `Y`, for step lengths.
    lx: Matrix,
    ly: Matrix,
}

fn scaling(x: &Matrix, y: &Matrix) -> Result<Scaling> {
    let lx = cholesky(x)?;
    let ly = cholesky(y)?;
    let lx_inv = lower_inverse(&lx);
    let t = lx.transpose().matmul(y).matmul(&lx);
    let (lam, q) = symmetric_eigen(&sym(t));
    if lam[0] <= 0.0 {
        return Err(crate::Error::NotPositiveDefinite {
            pivot: 0,
            value: lam[0],
        });
    }
    let n = lam.len();
    let qt = q.transpose();
    // G⁻¹ = Λ^{1/4} Qᵀ L⁻¹, G = L Q Λ^{-1/4}
    let mut g_inv = qt.matmul(&lx_inv);
    let mut g = lx.matmul(&q);
    for i in 0..n {
        let s = lam[i].powf(0.25);
        g_inv.row_mut(i).iter_mut().for_each(|v| *v *= s);
        for r in 0..n {
            g[(r, i)] /= s;
        }
    }
    let v = sym(g_inv.transpose().matmul(&g_inv));
    Ok(Scaling {
        g_inv,
        g,
        v,
        d: lam.iter().map(|l| l.sqrt()).collect(),
        lx,
        ly,
    })
}

fn sym(mut m: Matrix) -> Matrix {
    m.symmetrize();
    m
}

/// `Aᵀ M A` for square `A`.
fn congruence_t(a: &Matrix, m: &Matrix) -> Matrix {
    sym(a.transpose().matmul(m).matmul(a))
}

/// Largest `α ≤ cap` with `L Lᵀ + α Δ ⪰ 0`.
fn max_step(l: &Matrix, delta: &Matrix, cap: f64) -> f64 {
    let li = lower_inverse(l);
    let t = sym(li.matmul(delta).matmul(&li.transpose()));
    let lmin = symmetric_eigenvalues(&t)[0];
    if lmin >= 0.0 {
        cap
    } else {
        cap.min(-1.0 / lmin)
    }
}

/// Minimum-norm correction `δ` with `(S(x + δ)) v = 0` for every eigenvector
/// `v` of `Y` whose eigenvalue exceeds `vᵀXv`, i.e. exact complementarity on
/// the face identified by the final iterate.
///
/// Interior-point iterates only approach that face at rate `O(√μ)` in the
/// off-diagonal couplings, which dominates the error in `x` when the slack
/// has a small null space. The correction is kept only when the linearized
/// system is consistent and the slack stays PSD within `tol`.
fn polish(problem: &SdpProblem, f0: &[Matrix], x: &[f64], xb: &[Matrix], yb: &[Matrix], tol: f64) -> Option<Vec<f64>> {
    let m = problem.num_vars();
    let slack: Vec<Matrix> = problem
        .linear_map(x)
        .into_iter()
        .zip(f0)
        .map(|(mut s, f)| {
            s.axpy(-1.0, f);
            s
        })
        .collect();
    let mut jtj = Matrix::zeros(m, m);
    let mut jtr = vec![0.0; m];
    let mut rr = 0.0;
    let mut rows = 0usize;
    for blk in 0..yb.len() {
        let (lam, vecs) = symmetric_eigen(&yb[blk]);
        let n = lam.len();
        let active: Vec<usize> = (0..n)
            .filter(|&i| {
                let v: Vec<f64> = (0..n).map(|r| vecs[(r, i)]).collect();
                let xv: f64 = xb[blk].matvec(&v).iter().zip(&v).map(|(a, b)| a * b).sum();
                lam[i] > xv
            })
            .collect();
        if active.is_empty() {
            continue;
        }
        let va = Matrix::from_fn(n, active.len(), |r, c| vecs[(r, active[c])]);
        let vars: Vec<usize> = (0..m).filter(|&k| problem.touches(k, blk)).collect();
        let cols: Vec<Matrix> = vars
            .iter()
            .map(|&k| problem.coefficient_block(k, blk).matmul(&va))
            .collect();
        let mut r = slack[blk].matmul(&va);
        r.scale(-1.0);
        rows += r.as_slice().len();
        rr += r.dot(&r);
        for (a, &ka) in vars.iter().enumerate() {
            jtr[ka] += cols[a].dot(&r);
            for (b, &kb) in vars.iter().enumerate().take(a + 1) {
                let v = cols[a].dot(&cols[b]);
                jtj[(ka, kb)] += v;
                if a != b {
                    jtj[(kb, ka)] += v;
                }
            }
        }
    }
    if rows == 0 || rr == 0.0 {
        return None;
    }
    let scale = (0..m).fold(0.0f64, |a, i| a.max(jtj[(i, i)]));
    for i in 0..m {
        jtj[(i, i)] += 1e-13 * scale.max(1e-300);
    }
    let l = cholesky(&jtj).ok()?;
    let delta = cholesky_solve(&l, &jtr);
    // ‖Jδ − r‖² = δᵀJᵀJδ − 2δᵀJᵀr + ‖r‖²
    let quad: f64 = jtj.matvec(&delta).iter().zip(&delta).map(|(a, b)| a * b).sum();
    let lin: f64 = jtr.iter().zip(&delta).map(|(a, b)| a * b).sum();
    let resid = (quad - 2.0 * lin + rr).max(0.0);
    if resid > 1e-4 * rr {
        return None;
    }
    let xp: Vec<f64> = x.iter().zip(&delta).map(|(a, b)| a + b).collect();
    let step: f64 = delta.iter().fold(0.0f64, |a, d| a.max(d.abs()));
    let size: f64 = x.iter().fold(1.0f64, |a, d| a.max(d.abs()));
    if step > 1e-2 * size {
        return None;
    }
    let ok = problem.linear_map(&xp).into_iter().zip(f0).all(|(mut s, f)| {
        s.axpy(-1.0, f);
        symmetric_eigenvalues(&sym(s))[0] >= -tol
    });
    ok.then_some(xp)
}

/// `M + α Δ` for the largest `α` among `alpha, 0.9 alpha, …` that keeps
/// every block Cholesky-factorizable.
fn positive_step(m: &[Matrix], delta: &[Matrix], alpha: f64) -> Option<(f64, Vec<Matrix>)> {
    let mut a = alpha;
    for _ in 0..30 {
        let next: Vec<Matrix> = m
            .iter()
            .zip(delta)
            .map(|(mb, db)| {
                let mut t = mb.clone();
                t.axpy(a, db);
                sym(t)
            })
            .collect();
        if next.iter().all(|b| cholesky(b).is_ok()) {
            return Some((a, next));
        }
        a *= 0.9;
    }
    None
}

/// Schur complement `B_ij = Σ_blocks tr(F_i V F_j V)`.
fn schur_complement(problem: &SdpProblem, scal: &[Scaling]) -> Matrix {
    let m = problem.num_vars();
    let mut b = Matrix::zeros(m, m);
    for (blk, s) in scal.iter().enumerate() {
        let v = &s.v;
        let n = v.rows();
        let sparse = &problem.sparse[blk];
        if !sparse.is_empty() {
            // P_k = F_k V restricted to the rows where F_k is nonzero.
            struct Rows {
                var: usize,
                index: Vec<usize>,
                data: Matrix,
            }
            let rows: Vec<Rows> = sparse
                .iter()
                .map(|(var, entries)| {
                    let mut index: Vec<usize> = entries.iter().flat_map(|e: &Entry| [e.row, e.col]).collect();
                    index.sort_unstable();
                    index.dedup();
                    let mut lookup = vec![usize::MAX; n];
                    for (p, &r) in index.iter().enumerate() {
                        lookup[r] = p;
                    }
                    let mut data = Matrix::zeros(index.len(), n);
                    for e in entries {
                        let (pr, pc) = (lookup[e.row], lookup[e.col]);
                        for c in 0..n {
                            data[(pr, c)] += e.value * v[(e.col, c)];
                        }
                        if e.row != e.col {
                            for c in 0..n {
                                data[(pc, c)] += e.value * v[(e.row, c)];
                            }
                        }
                    }
                    Rows { var: *var, index, data }
                })
                .collect();
            for i in 0..rows.len() {
                for j in 0..=i {
                    let (ri, rj) = (&rows[i], &rows[j]);
                    // tr(P_i P_j) = Σ_{a ∈ rows_i, c ∈ rows_j} P_i[a, c] P_j[c, a]
                    let mut s = 0.0;
                    for (pa, &a) in ri.index.iter().enumerate() {
                        let pi = ri.data.row(pa);
                        for (pc, &c) in rj.index.iter().enumerate() {
                            s += pi[c] * rj.data[(pc, a)];
                        }
                    }
                    b[(ri.var, rj.var)] += s;
                    if i != j {
                        b[(rj.var, ri.var)] += s;
                    }
                }
            }
        }
        if let Some(f) = &problem.factored[blk] {
            // tr(F_i V F_j V) = w_iᵀ K w_j with K = (B V Bᵀ)∘(B V Bᵀ)
            let bv = f.factor.matmul(v);
            let c = bv.matmul(&f.factor.transpose());
            let q = c.rows();
            let k = Matrix::from_fn(q, q, |r, s| c[(r, s)] * c[(r, s)]);
            let kw: Vec<Vec<f64>> = f.weights.iter().map(|(_, w)| k.matvec(w)).collect();
            for (i, (vi, wi)) in f.weights.iter().enumerate() {
                for (j, (vj, _)) in f.weights.iter().enumerate().take(i + 1) {
                    let s: f64 = wi.iter().zip(&kw[j]).map(|(a, b)| a * b).sum();
                    b[(*vi, *vj)] += s;
                    if i != j {
                        b[(*vj, *vi)] += s;
                    }
                }
            }
        }
    }
    b
}

fn block_dot(a: &[Matrix], b: &[Matrix]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn block_norm(a: &[Matrix]) -> f64 {
    a.iter().map(|m| m.dot(m)).sum::<f64>().sqrt()
}

fn vec_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Newton direction for the scaled complementarity right-hand side `r`.
#[allow(clippy::too_many_arguments)]
fn direction(
    problem: &SdpProblem,
    scal: &[Scaling],
    schur_l: &Matrix,
    rp: &[Matrix],
    rd: &[f64],
    r: &[Matrix],
) -> (Vec<f64>, Vec<Matrix>, Vec<Matrix>) {
    // S_ij = 2 R_ij / (d_i + d_j), Ŝ = G⁻ᵀ S G⁻¹
    let s_hat: Vec<Matrix> = scal
        .iter()
        .zip(r)
        .map(|(s, rb)| {
            let n = s.d.len();
            let sm = Matrix::from_fn(n, n, |i, j| 2.0 * rb[(i, j)] / (s.d[i] + s.d[j]));
            congruence_t(&s.g_inv, &sm)
        })
        .collect();
    let h: Vec<Matrix> = s_hat
        .iter()
        .zip(scal)
        .zip(rp)
        .map(|((sh, s), p)| {
            let mut t = s.v.matmul(p).matmul(&s.v);
            t.scale(-1.0);
            t.axpy(1.0, sh);
            t
        })
        .collect();
    let mut rhs = problem.adjoint(&h);
    for (a, b) in rhs.iter_mut().zip(rd) {
        *a -= b;
    }
    let dx = cholesky_solve(schur_l, &rhs);
    let mut d_x = problem.linear_map(&dx);
    for (a, b) in d_x.iter_mut().zip(rp) {
        a.axpy(1.0, b);
    }
    let d_y: Vec<Matrix> = s_hat
        .iter()
        .zip(scal)
        .zip(&d_x)
        .map(|((sh, s), dxb)| {
            let mut t = s.v.matmul(dxb).matmul(&s.v);
            t.scale(-1.0);
            t.axpy(1.0, sh);
            sym(t)
        })
        .collect();
    (dx, d_x, d_y)
}

/// Starting multiples of the identity, scaled to the data.
fn initial_point(problem: &SdpProblem) -> (Vec<Matrix>, Vec<Matrix>) {
    let f0 = problem.constant_blocks();
    let m = problem.num_vars();
    let nb = problem.block_orders().len();
    let mut xs = Vec::with_capacity(nb);
    let mut ys = Vec::with_capacity(nb);
    let c = problem.objective();
    for (blk, &n) in problem.block_orders().iter().enumerate() {
        let sqn = (n as f64).sqrt();
        let mut fnorm_max: f64 = 0.0;
        let mut ratio: f64 = 0.0;
        for k in 0..m {
            if !problem.touches(k, blk) {
                continue;
            }
            let fk = problem.coefficient_block(k, blk);
            let nrm = fk.frobenius_norm();
            fnorm_max = fnorm_max.max(nrm);
            ratio = ratio.max((1.0 + c[k].abs()) / (1.0 + nrm));
        }
        let rho_y = 10f64.max(sqn).max(sqn * ratio);
        let rho_x = 10f64.max(sqn).max(fnorm_max).max(f0[blk].frobenius_norm());
        xs.push(Matrix::identity(n).scaled(rho_x));
        ys.push(Matrix::identity(n).scaled(rho_y));
    }
    (xs, ys)
}

pub fn solve_with(problem: &SdpProblem, settings: &SdpSettings) -> SdpSolution {
    let m = problem.num_vars();
    let c = problem.objective().to_vec();
    let f0 = problem.constant_blocks();
    let total_order: usize = problem.block_orders().iter().sum();
    let nf = total_order as f64;
    let f0_norm = block_norm(&f0);
    let c_norm = vec_norm(&c);

    let (mut xb, mut yb) = initial_point(problem);
    let mut x = vec![0.0; m];
    let status;
    let mut iterations = 0;

    let residuals = |x: &[f64], xb: &[Matrix], yb: &[Matrix]| {
        let mut rp = problem.linear_map(x);
        for ((r, f), xk) in rp.iter_mut().zip(&f0).zip(xb) {
            r.axpy(-1.0, f);
            r.axpy(-1.0, xk);
        }
        let ay = problem.adjoint(yb);
        let rd: Vec<f64> = c.iter().zip(&ay).map(|(a, b)| a - b).collect();
        (rp, rd)
    };

    loop {
        let (rp, rd) = residuals(&x, &xb, &yb);
        let pobj: f64 = c.iter().zip(&x).map(|(a, b)| a * b).sum();
        let dobj = block_dot(&f0, &yb);
        let mu = block_dot(&xb, &yb) / nf;
        let p_inf = block_norm(&rp) / (1.0 + f0_norm);
        let d_inf = vec_norm(&rd) / (1.0 + c_norm);
        let gap = (pobj - dobj).abs();
        if p_inf <= settings.tol && d_inf <= settings.tol && gap <= settings.tol * (1.0 + pobj.abs()) {
            status = SdpStatus::Optimal;
            break;
        }
        let y_size: f64 = yb.iter().map(|m| m.trace()).sum();
        let x_size: f64 = xb.iter().map(|m| m.trace()).sum();
        let xv = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if y_size > settings.big_m || x_size > settings.big_m || xv > settings.big_m {
            status = SdpStatus::Infeasible;
            break;
        }
        if iterations >= settings.max_iter {
            status = SdpStatus::MaxIterations;
            break;
        }
        iterations += 1;

        let scal: Vec<Scaling> = match xb
            .iter()
            .zip(&yb)
            .map(|(a, b)| scaling(a, b))
            .collect::<Result<Vec<_>>>()
        {
            Ok(s) => s,
            Err(_) => {
                status = SdpStatus::NumericalTrouble;
                break;
            }
        };
        let mut schur = schur_complement(problem, &scal);
        let schur_l = match cholesky(&schur) {
            Ok(l) => l,
            Err(_) => {
                // tiny diagonal lift before giving up
                let scale = (0..m).fold(0.0f64, |a, i| a.max(schur[(i, i)].abs()));
                for i in 0..m {
                    schur[(i, i)] += 1e-14 * scale.max(1e-300);
                }
                match cholesky(&schur) {
                    Ok(l) => l,
                    Err(_) => {
                        status = SdpStatus::NumericalTrouble;
                        break;
                    }
                }
            }
        };

        // predictor: σ = 0, R = −D²
        let r_aff: Vec<Matrix> = scal
            .iter()
            .map(|s| Matrix::diagonal(&s.d.iter().map(|d| -d * d).collect::<Vec<_>>()))
            .collect();
        let (_, dxa, dya) = direction(problem, &scal, &schur_l, &rp, &rd, &r_aff);
        let ap = scal.iter().zip(&dxa).fold(1.0f64, |a, (s, d)| max_step(&s.lx, d, a));
        let ad = scal.iter().zip(&dya).fold(1.0f64, |a, (s, d)| max_step(&s.ly, d, a));
        let mut mu_aff = 0.0;
        for b in 0..xb.len() {
            let mut xa = xb[b].clone();
            xa.axpy(ap, &dxa[b]);
            let mut ya = yb[b].clone();
            ya.axpy(ad, &dya[b]);
            mu_aff += xa.dot(&ya);
        }
        mu_aff /= nf;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // corrector: R = σμI − D² − sym(ΔX̃ₐ ΔỸₐ)
        let r_cor: Vec<Matrix> = scal
            .iter()
            .zip(dxa.iter().zip(&dya))
            .map(|(s, (dx, dy))| {
                let n = s.d.len();
                let dxs = sym(s.g_inv.matmul(dx).matmul(&s.g_inv.transpose()));
                let dys = congruence_t(&s.g, dy);
                let mut prod = sym(dxs.matmul(&dys));
                prod.scale(-1.0);
                for i in 0..n {
                    prod[(i, i)] += sigma * mu - s.d[i] * s.d[i];
                }
                prod
            })
            .collect();
        let (dx, d_x, d_y) = direction(problem, &scal, &schur_l, &rp, &rd, &r_cor);
        let ap = scal
            .iter()
            .zip(&d_x)
            .fold(f64::INFINITY, |a, (s, d)| max_step(&s.lx, d, a));
        let ad = scal
            .iter()
            .zip(&d_y)
            .fold(f64::INFINITY, |a, (s, d)| max_step(&s.ly, d, a));
        let ap = (settings.step_fraction * ap).min(1.0);
        let ad = (settings.step_fraction * ad).min(1.0);
        // The eigenvalue bound is computed in floating point; back off until
        // the new iterates factor, so the next scaling exists.
        let (Some((ap, xn)), Some((_, yn))) = (positive_step(&xb, &d_x, ap), positive_step(&yb, &d_y, ad)) else {
            status = SdpStatus::NumericalTrouble;
            break;
        };
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi += ap * di;
        }
        xb = xn;
        yb = yn;
    }

    if status == SdpStatus::Optimal && settings.polish {
        if let Some(xp) = polish(problem, &f0, &x, &xb, &yb, settings.tol) {
            x = xp;
        }
    }
    let (rp, rd) = residuals(&x, &xb, &yb);
    let slack = problem
        .linear_map(&x)
        .into_iter()
        .zip(&f0)
        .map(|(mut s, f)| {
            s.axpy(-1.0, f);
            SymmetricMatrix::from_lower(&s)
        })
        .collect();
    SdpSolution {
        primal_objective: c.iter().zip(&x).map(|(a, b)| a * b).sum(),
        dual_objective: block_dot(&f0, &yb),
        primal_infeasibility: block_norm(&rp) / (1.0 + f0_norm),
        dual_infeasibility: vec_norm(&rd) / (1.0 + c_norm),
        x,
        slack,
        dual: yb.iter().map(SymmetricMatrix::from_lower).collect(),
        status,
        iterations,
    }
}
