//! Oracles shared by the integration tests and the acceptance run.

#![allow(dead_code)]

use momentfit::linalg::{symmetric_eigen, Matrix};
use momentfit::sdp::SdpProblem;
use momentfit::MomentVector;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

pub struct Constructed {
    pub problem: SdpProblem,
    pub x: Vec<f64>,
    pub objective: f64,
}

/// Order-3 single-block SDP with a unique optimum `x*`: rank(X*) = r, rank(Y*) = 3 − r,
/// three variables (enough for dual uniqueness at r = 1, few enough for
/// primal uniqueness at r = 2).
pub fn construct(seed: u64) -> Constructed {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let n = 3;
    let m = 3;
    let r = if seed.is_multiple_of(2) { 1 } else { 2 };
    let a = Matrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let mut s = a.transpose().matmul(&a);
    s.symmetrize();
    let (_, q) = symmetric_eigen(&s);
    let mut xd = vec![0.0; n];
    let mut yd = vec![0.0; n];
    for i in 0..n {
        if i < r {
            xd[i] = rng.gen_range(0.5..2.0);
        } else {
            yd[i] = rng.gen_range(0.5..2.0);
        }
    }
    let qt = q.transpose();
    let xs = q.matmul(&Matrix::diagonal(&xd)).matmul(&qt);
    let ys = q.matmul(&Matrix::diagonal(&yd)).matmul(&qt);
    let x: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
    // Redraw the coefficient matrices until the optimum is well posed: the
    // optimal face is {x : X(x) U = 0}, U spanning range(Y*), so x* is unique
    // (and stable) iff δ ↦ Σ δ_k F_k U is injective with a healthy margin.
    let u: Vec<usize> = (r..n).collect();
    let f: Vec<Matrix> = loop {
        let f: Vec<Matrix> = (0..m)
            .map(|_| {
                let mut g = Matrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
                g.symmetrize();
                g
            })
            .collect();
        let cols: Vec<Vec<f64>> = f
            .iter()
            .map(|fk| {
                let fq = fk.matmul(&q);
                u.iter()
                    .flat_map(|&j| (0..n).map(move |i| (i, j)))
                    .map(|(i, j)| fq[(i, j)])
                    .collect()
            })
            .collect();
        let jtj = Matrix::from_fn(m, m, |a, b| cols[a].iter().zip(&cols[b]).map(|(x, y)| x * y).sum());
        let (lam, _) = symmetric_eigen(&jtj);
        if lam.iter().cloned().fold(f64::INFINITY, f64::min) >= 0.01 {
            break f;
        }
    };
    let c: Vec<f64> = f.iter().map(|fk| fk.dot(&ys)).collect();
    let mut problem = SdpProblem::new(vec![n], c.clone()).unwrap();
    // F_0 = Σ x*_k F_k − X*
    let mut f0 = xs.scaled(-1.0);
    for (k, fk) in f.iter().enumerate() {
        f0.axpy(x[k], fk);
        for i in 0..n {
            for j in 0..=i {
                problem.add_coefficient(k, 0, i, j, fk[(i, j)]).unwrap();
            }
        }
    }
    for i in 0..n {
        for j in 0..=i {
            problem.add_constant(0, i, j, f0[(i, j)]).unwrap();
        }
    }
    let objective = c.iter().zip(&x).map(|(a, b)| a * b).sum();
    Constructed { problem, x, objective }
}

/// Monomial moments of `I_[0.5,1]` on [0, 1]: `(1 − 0.5^{k+1}) / (k + 1)`.
pub fn indicator_monomial(degree: usize) -> MomentVector {
    let v = (0..=degree)
        .map(|k| (1.0 - 0.5f64.powi(k as i32 + 1)) / (k + 1) as f64)
        .collect();
    MomentVector::monomial(1, degree, v).unwrap()
}

/// Smallest eigenvalue of a symmetric 3×3 matrix via the trigonometric
/// closed form of the characteristic cubic.
pub fn min_eig3(m: [[f64; 3]; 3]) -> f64 {
    let p1 = m[0][1].powi(2) + m[0][2].powi(2) + m[1][2].powi(2);
    let q = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
    let p2 = (m[0][0] - q).powi(2) + (m[1][1] - q).powi(2) + (m[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    if p == 0.0 {
        return q;
    }
    let mut b = m;
    for (i, row) in b.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (m[i][j] - if i == j { q } else { 0.0 }) / p;
        }
    }
    let det = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]) - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
        + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    let phi = (det / 2.0).clamp(-1.0, 1.0).acos() / 3.0;
    q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos()
}

/// Optimal shifted objective of the degree-2 localizing fit of the step
/// `I_[0.5,1]` on [0, 1], by a zooming grid search over the coefficients.
pub fn localizing_d2_grid_optimum() -> f64 {
    // Monomial coordinates on [0, 1]: objective cᵀHc − 2cᵀy with the Hilbert
    // matrix H, and M_2(u z)[i, j] = Σ_k c_k / (i + j + k + 1).
    let y = indicator_monomial(6);
    let h = |i: usize, j: usize| 1.0 / (i + j + 1) as f64;
    let objective = |c: &[f64; 3]| {
        let mut v = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                v += c[i] * h(i, j) * c[j];
            }
            v -= 2.0 * c[i] * y.values()[i];
        }
        v
    };
    let feasible = |c: &[f64; 3]| {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|k| c[k] / (i + j + k + 1) as f64).sum();
            }
        }
        min_eig3(m) >= 0.0
    };
    let mut center = [0.0, 0.0, 1.0];
    let mut half = [2.0, 6.0, 6.0];
    let mut best = f64::INFINITY;
    let steps = 40;
    for _ in 0..25 {
        let mut arg = center;
        for a in 0..=steps {
            for b in 0..=steps {
                for c in 0..=steps {
                    let pt = [
                        center[0] + half[0] * (2.0 * a as f64 / steps as f64 - 1.0),
                        center[1] + half[1] * (2.0 * b as f64 / steps as f64 - 1.0),
                        center[2] + half[2] * (2.0 * c as f64 / steps as f64 - 1.0),
                    ];
                    if feasible(&pt) {
                        let v = objective(&pt);
                        if v < best {
                            best = v;
                            arg = pt;
                        }
                    }
                }
            }
        }
        center = arg;
        half.iter_mut().for_each(|h| *h *= 0.6);
    }
    best
}
