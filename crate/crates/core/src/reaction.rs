//! Nonconstant steady state of a two-species reaction-diffusion system,
//! the truth behind the `reaction-diffusion` builtins:
//!
//! ```text
//! u''/20 + (35 + 16u − u²) u / 9 − u v = 0,
//! 4 v'' − (1 + 2v/5) v + u v = 0,        on [0, 5],
//! u' = v' = 0 at both ends.
//! ```
//!
//! The only homogeneous state with `0 ≤ u, v ≤ 14` and both species present
//! is `(5, 10)`, which is diffusion-driven unstable. The steady state used
//! here is the one the evolution `u_t = …, v_t = …` settles on when started
//! from `(5 + cos(πx/5), 10)`. The system is multistable: perturbations much
//! smaller than this can land on different patterns depending on grid and
//! time step, while this start reaches the same one on every grid from 500
//! to 8000 cells. The evolution is implicit Euler with Newton's method on
//! central differences (ghost points for the zero-flux ends), followed by a
//! Newton solve of the steady equations. Between grid nodes the profiles are
//! clamped cubic splines with zero end slopes.

use std::sync::OnceLock;

use crate::quadrature::TensorRule;

/// Length of the interval `[0, LENGTH]`.
pub const LENGTH: f64 = 5.0;
/// Grid cells of the default solve.
pub const DEFAULT_CELLS: usize = 2000;

/// Grid values of a steady state and their spline interpolants.
#[derive(Debug, Clone)]
pub struct SteadyState {
    step: f64,
    u: Spline,
    v: Spline,
    /// Simulated time until the evolution stopped changing.
    pub settle_time: f64,
    /// `max |F(u, v)|` of the discrete steady equations at the returned grid values.
    pub residual: f64,
}

/// The steady state on the default grid, computed once per process.
pub fn steady_state() -> &'static SteadyState {
    static CELL: OnceLock<SteadyState> = OnceLock::new();
    CELL.get_or_init(|| SteadyState::solve(DEFAULT_CELLS))
}

impl SteadyState {
    /// Runs the evolution and the final Newton solve on `cells` uniform cells.
    ///
    /// # Panics
    /// If the evolution does not settle; the procedure is deterministic, so
    /// this only happens for grids far too coarse to resolve the pattern.
    pub fn solve(cells: usize) -> Self {
        assert!(cells >= 16, "grid too coarse");
        let n = cells + 1;
        let h = LENGTH / cells as f64;
        let system = System { n, h };
        let mut z = vec![0.0; 2 * n];
        for i in 0..n {
            let x = i as f64 * h;
            z[2 * i] = 5.0 + (std::f64::consts::PI * x / LENGTH).cos();
            z[2 * i + 1] = 10.0;
        }

        let mut dt = 0.05;
        let mut time = 0.0;
        let mut settled = false;
        for _ in 0..20_000 {
            match system.implicit_euler_step(&z, dt) {
                Some(next) => {
                    let rate = next.iter().zip(&z).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / dt;
                    z = next;
                    time += dt;
                    if rate < 1e-10 {
                        settled = true;
                        break;
                    }
                    dt = (dt * 1.05).min(5.0);
                }
                None => dt *= 0.5,
            }
        }
        assert!(settled, "reaction-diffusion evolution did not settle");
        for _ in 0..20 {
            let f = system.residual(&z);
            let jac = system.jacobian(&z, 0.0, 1.0);
            let Some(s) = jac.solve(f.iter().map(|v| -v).collect()) else {
                break;
            };
            z.iter_mut().zip(&s).for_each(|(a, b)| *a += b);
            if max_abs(&s) < 1e-12 {
                break;
            }
        }
        let residual = max_abs(&system.residual(&z));

        let u: Vec<f64> = z.iter().step_by(2).copied().collect();
        let v: Vec<f64> = z.iter().skip(1).step_by(2).copied().collect();
        Self {
            step: h,
            u: Spline::clamped_flat(h, u),
            v: Spline::clamped_flat(h, v),
            settle_time: time,
            residual,
        }
    }

    /// `u(x)`; zero outside `[0, LENGTH]`.
    pub fn u(&self, x: f64) -> f64 {
        self.u.eval(x)
    }

    /// `v(x)`; zero outside `[0, LENGTH]`.
    pub fn v(&self, x: f64) -> f64 {
        self.v.eval(x)
    }

    /// Spline second derivatives `(u'', v'')`, for checking the equations off the grid.
    pub fn second_derivatives(&self, x: f64) -> (f64, f64) {
        (self.u.second_derivative(x), self.v.second_derivative(x))
    }

    pub fn grid_u(&self) -> &[f64] {
        &self.u.values
    }

    pub fn grid_v(&self) -> &[f64] {
        &self.v.values
    }

    /// Composite Gauss rule exact for every spline piece times a polynomial of
    /// degree `< 2·nodes_per_cell − 3`.
    pub fn rule(&self, nodes_per_cell: usize) -> TensorRule {
        let breaks: Vec<f64> = (0..self.u.values.len()).map(|i| i as f64 * self.step).collect();
        TensorRule::composite_1d(&breaks, nodes_per_cell)
    }
}

/// The steady equations on a uniform grid, unknowns interleaved `(u_i, v_i)`.
struct System {
    n: usize,
    h: f64,
}

impl System {
    fn laplacian(&self, z: &[f64], i: usize, c: usize) -> f64 {
        let at = |k: usize| z[2 * k + c];
        let (left, right) = match i {
            0 => (at(1), at(1)),
            i if i == self.n - 1 => (at(i - 1), at(i - 1)),
            i => (at(i - 1), at(i + 1)),
        };
        (left - 2.0 * at(i) + right) / (self.h * self.h)
    }

    fn residual(&self, z: &[f64]) -> Vec<f64> {
        let mut f = vec![0.0; 2 * self.n];
        for i in 0..self.n {
            let (u, v) = (z[2 * i], z[2 * i + 1]);
            f[2 * i] = self.laplacian(z, i, 0) / 20.0 + (35.0 + 16.0 * u - u * u) * u / 9.0 - u * v;
            f[2 * i + 1] = 4.0 * self.laplacian(z, i, 1) - (1.0 + 0.4 * v) * v + u * v;
        }
        f
    }

    /// `alpha·I + beta·F'(z)`.
    fn jacobian(&self, z: &[f64], alpha: f64, beta: f64) -> Banded {
        let mut m = Banded::new(2 * self.n, 2, 2);
        let h2 = self.h * self.h;
        for i in 0..self.n {
            let (u, v) = (z[2 * i], z[2 * i + 1]);
            let (ru, rv) = (2 * i, 2 * i + 1);
            let neighbours: &[(usize, f64)] = match i {
                0 => &[(1, 2.0)],
                i if i == self.n - 1 => &[(i - 1, 2.0)],
                i => &[(i - 1, 1.0), (i + 1, 1.0)],
            };
            let fu = (35.0 + 32.0 * u - 3.0 * u * u) / 9.0 - v;
            m.add(ru, ru, alpha + beta * (-2.0 / (20.0 * h2) + fu));
            m.add(ru, rv, beta * (-u));
            m.add(rv, ru, beta * v);
            m.add(rv, rv, alpha + beta * (-8.0 / h2 - 1.0 - 0.8 * v + u));
            for &(k, w) in neighbours {
                m.add(ru, 2 * k, beta * w / (20.0 * h2));
                m.add(rv, 2 * k + 1, beta * 4.0 * w / h2);
            }
        }
        m
    }

    /// Solves `w − z − dt·F(w) = 0` by Newton's method from `w = z`. Steps
    /// that move any value by more than `MAX_CHANGE` are rejected, so the
    /// iteration cannot jump to a far-away root of the implicit equation.
    fn implicit_euler_step(&self, z: &[f64], dt: f64) -> Option<Vec<f64>> {
        let mut w = z.to_vec();
        for _ in 0..30 {
            let f = self.residual(&w);
            let rhs: Vec<f64> = (0..w.len()).map(|k| -(w[k] - z[k] - dt * f[k])).collect();
            let s = self.jacobian(&w, 1.0, -dt).solve(rhs)?;
            w.iter_mut().zip(&s).for_each(|(a, b)| *a += b);
            if !w.iter().all(|v| v.is_finite()) {
                return None;
            }
            if max_abs(&s) < 1e-12 * max_abs(&w).max(1.0) {
                let change = w.iter().zip(z).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                return (change <= MAX_CHANGE).then_some(w);
            }
        }
        None
    }
}

const MAX_CHANGE: f64 = 0.5;

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Square band matrix with `kl` sub- and `ku` super-diagonals, with room for
/// the fill of partial pivoting (`kl` more super-diagonals).
struct Banded {
    n: usize,
    kl: usize,
    width: usize,
    data: Vec<f64>,
}

impl Banded {
    fn new(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            width,
            data: vec![0.0; n * width],
        }
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j + self.kl - i < self.width);
        i * self.width + (j + self.kl - i)
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        self.data[self.slot(i, j)]
    }

    fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    /// Gaussian elimination with partial pivoting; `None` if singular.
    fn solve(mut self, mut b: Vec<f64>) -> Option<Vec<f64>> {
        let n = self.n;
        let reach = self.width - self.kl - 1;
        for k in 0..n {
            let last = (k + self.kl).min(n - 1);
            let right = (k + reach).min(n - 1);
            let p = (k..=last)
                .max_by(|&a, &c| self.get(a, k).abs().total_cmp(&self.get(c, k).abs()))
                .expect("nonempty range");
            if self.get(p, k) == 0.0 {
                return None;
            }
            if p != k {
                for j in k..=right {
                    let (sk, sp) = (self.slot(k, j), self.slot(p, j));
                    self.data.swap(sk, sp);
                }
                b.swap(k, p);
            }
            let pivot = self.get(k, k);
            for i in k + 1..=last {
                let l = self.get(i, k) / pivot;
                if l == 0.0 {
                    continue;
                }
                for j in k + 1..=right {
                    let akj = self.get(k, j);
                    self.add(i, j, -l * akj);
                }
                b[i] -= l * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let right = (i + reach).min(n - 1);
            let s: f64 = (i + 1..=right).map(|j| self.get(i, j) * x[j]).sum();
            x[i] = (b[i] - s) / self.get(i, i);
        }
        Some(x)
    }
}

/// Cubic spline through uniformly spaced values with zero end slopes.
#[derive(Debug, Clone)]
struct Spline {
    h: f64,
    values: Vec<f64>,
    second: Vec<f64>,
}

impl Spline {
    fn clamped_flat(h: f64, values: Vec<f64>) -> Self {
        let n = values.len();
        // M_{i−1} + 4M_i + M_{i+1} = 6(y_{i+1} − 2y_i + y_{i−1})/h², with
        // 2M_0 + M_1 and M_{n−2} + 2M_{n−1} rows from the zero end slopes
        let mut diag = vec![4.0; n];
        diag[0] = 2.0;
        diag[n - 1] = 2.0;
        let mut rhs = vec![0.0; n];
        let c = 6.0 / (h * h);
        rhs[0] = c * (values[1] - values[0]);
        rhs[n - 1] = -c * (values[n - 1] - values[n - 2]);
        for i in 1..n - 1 {
            rhs[i] = c * (values[i + 1] - 2.0 * values[i] + values[i - 1]);
        }
        // Thomas algorithm, unit off-diagonals
        for i in 1..n {
            let l = 1.0 / diag[i - 1];
            diag[i] -= l;
            rhs[i] -= l * rhs[i - 1];
        }
        let mut second = vec![0.0; n];
        second[n - 1] = rhs[n - 1] / diag[n - 1];
        for i in (0..n - 1).rev() {
            second[i] = (rhs[i] - second[i + 1]) / diag[i];
        }
        Self { h, values, second }
    }

    fn locate(&self, x: f64) -> Option<(usize, f64, f64)> {
        let last = self.values.len() - 1;
        if !(0.0..=LENGTH).contains(&x) {
            return None;
        }
        let i = ((x / self.h) as usize).min(last - 1);
        let b = (x - i as f64 * self.h) / self.h;
        Some((i, 1.0 - b, b))
    }

    fn eval(&self, x: f64) -> f64 {
        let Some((i, a, b)) = self.locate(x) else {
            return 0.0;
        };
        a * self.values[i]
            + b * self.values[i + 1]
            + ((a * a * a - a) * self.second[i] + (b * b * b - b) * self.second[i + 1]) * self.h * self.h / 6.0
    }

    fn second_derivative(&self, x: f64) -> f64 {
        let Some((i, a, b)) = self.locate(x) else {
            return 0.0;
        };
        a * self.second[i] + b * self.second[i + 1]
    }
}
