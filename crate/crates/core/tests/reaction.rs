//! The reaction-diffusion steady state behind the `reaction-diffusion` builtins.

use momentfit::catalog::{Builtin, MomentRepr};
use momentfit::quadrature::TensorRule;
use momentfit::reaction::{steady_state, SteadyState, DEFAULT_CELLS, LENGTH};
use momentfit::{Basis, BoxDomain};

#[test]
fn grid_values_solve_the_discrete_equations() {
    let s = steady_state();
    assert!(s.residual < 1e-7, "{}", s.residual);
    assert!(s.settle_time > 0.0);
    assert_eq!(s.grid_u().len(), DEFAULT_CELLS + 1);
}

#[test]
fn spline_profiles_satisfy_the_equations_between_nodes() {
    // u''/20 is of order 5 along the profile; the spline second derivative
    // carries an O(h²) error
    let s = steady_state();
    for i in 0..10_000 {
        let x = LENGTH * (i as f64 + 0.37) / 10_000.0;
        let (u, v) = (s.u(x), s.v(x));
        let (upp, vpp) = s.second_derivatives(x);
        let ru = upp / 20.0 + (35.0 + 16.0 * u - u * u) * u / 9.0 - u * v;
        let rv = 4.0 * vpp - (1.0 + 0.4 * v) * v + u * v;
        assert!(ru.abs() < 2e-3 && rv.abs() < 2e-3, "x = {x}: {ru}, {rv}");
    }
}

#[test]
fn agrees_with_an_independent_sparse_direct_run() {
    // The same evolution on the same 2000-cell grid, run with a separate
    // implementation (compressed sparse Jacobian, general sparse LU)
    let s = steady_state();
    let reference = [
        (0.0, 8.85494987596889, 10.922876246071755),
        (0.625, 2.1732813183726796, 9.378779479627987),
        (1.25, 0.7525868995347851, 9.025059663387273),
        (2.5, 4.853448142779186, 9.822427042291771),
        (3.75, 8.59018165410073, 10.626343283017148),
        (5.0, 0.1400023261057553, 8.730713066070749),
    ];
    for (x, u, v) in reference {
        assert!((s.u(x) - u).abs() < 1e-6, "u({x}) = {} vs {u}", s.u(x));
        assert!((s.v(x) - v).abs() < 1e-6, "v({x}) = {} vs {v}", s.v(x));
    }
}

#[test]
fn profile_is_second_order_convergent_in_the_grid() {
    let fine = steady_state();
    let coarse = SteadyState::solve(DEFAULT_CELLS / 2);
    let gap = (0..=1000)
        .map(|i| LENGTH * i as f64 / 1000.0)
        .map(|x| (coarse.u(x) - fine.u(x)).abs().max((coarse.v(x) - fine.v(x)).abs()))
        .fold(0.0f64, f64::max);
    // halving h changes an O(h²) solution by about 3/4 of its error
    assert!(gap < 5e-4, "{gap}");
}

#[test]
fn is_a_nonconstant_pattern_within_the_stated_bounds() {
    let s = steady_state();
    for values in [s.grid_u(), s.grid_v()] {
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!(lo >= 0.0 && hi <= 14.0, "[{lo}, {hi}]");
        assert!(hi - lo > 1.0);
    }
    assert_eq!(s.u(-0.1), 0.0);
    assert_eq!(s.u(5.1), 0.0);
}

#[test]
fn builtin_moments_match_a_global_gauss_rule() {
    // the composite rule is exact on the spline pieces; a 600-node global
    // rule integrates the C² spline to about 1e-9
    for b in [Builtin::ReactionDiffusion, Builtin::ReactionDiffusionV] {
        let y = b.moments(10, MomentRepr::Monomial, None, 0).unwrap();
        let global = TensorRule::on_box(&BoxDomain::interval(0.0, LENGTH).unwrap(), 600).basis_moments(
            Basis::Monomial,
            &b.frame(),
            10,
            |x| b.truth(x),
        );
        for (a, g) in y.values().iter().zip(&global) {
            assert!((a - g).abs() <= 1e-8 * g.abs().max(1.0), "{b}: {a} vs {g}");
        }
    }
}
