use approx::assert_relative_eq;
use fracal::grid::{sample, sample_real};
use fracal::ops::{
    combined_adjoint_side, combined_derivative, left_rl_derivative, left_rl_integral, right_rl_derivative,
    right_rl_integral,
};
use fracal::special::gamma;
use fracal::{Grid, OrderSpec, SampledFunction, C64};
use proptest::prelude::*;

/// Left RL integral at `t` by brute force: substituting `s = (t - tau)^alpha`
/// removes the singularity, then a 10^5-point midpoint rule.
fn brute_left_integral(f: impl Fn(f64) -> f64, alpha: f64, t: f64) -> f64 {
    let m = 100_000;
    let upper = t.powf(alpha);
    let ds = upper / m as f64;
    let sum: f64 = (0..m)
        .map(|k| {
            let s = (k as f64 + 0.5) * ds;
            f(t - s.powf(1.0 / alpha))
        })
        .sum();
    sum * ds / gamma(alpha + 1.0).unwrap()
}

/// Left RL derivative as the central difference of the brute-force integral
/// of order `1 - alpha`.
fn brute_left_derivative(f: impl Fn(f64) -> f64 + Copy, alpha: f64, t: f64) -> f64 {
    let d = 1e-4;
    (brute_left_integral(f, 1.0 - alpha, t + d) - brute_left_integral(f, 1.0 - alpha, t - d)) / (2.0 * d)
}

fn power_rule(nu: f64, alpha: f64, t: f64) -> f64 {
    gamma(nu + 1.0).unwrap() / gamma(nu + 1.0 - alpha).unwrap() * t.powf(nu - alpha)
}

fn interior_error(approx: &SampledFunction, exact: impl Fn(f64) -> f64) -> f64 {
    let g = approx.grid();
    g.interior()
        .map(|j| (approx.scalar(j) - C64::new(exact(g.node(j)), 0.0)).norm())
        .fold(0.0, f64::max)
}

#[test]
fn power_rule_closed_form_matches_brute_force() {
    for (nu, alpha) in [(1.0, 0.5), (2.0, 0.3), (3.0, 0.8), (1.5, 0.6)] {
        for t in [0.2, 0.55, 0.9] {
            let brute = brute_left_derivative(|s| s.powf(nu), alpha, t);
            assert_relative_eq!(brute, power_rule(nu, alpha, t), max_relative = 1e-5);
        }
    }
}

#[test]
fn left_derivative_of_identity_converges_to_power_rule() {
    let mut previous = f64::INFINITY;
    for n in [129, 257, 513, 1025] {
        let g = Grid::new(0.0, 1.0, n, 1.0).unwrap();
        let d = left_rl_derivative(&sample_real(&g, |t| t), 0.5).unwrap();
        let err = interior_error(&d, |t| 2.0 / std::f64::consts::PI.sqrt() * t.sqrt());
        assert!(err < previous, "n={n}: {err} vs {previous}");
        previous = err;
    }
    assert!(previous <= 5e-2);
}

#[test]
fn left_integral_matches_brute_force() {
    let g = Grid::new(0.0, 1.0, 513, 1.0).unwrap();
    let f = |t: f64| (2.0 * t).cos() + t;
    let i = left_rl_integral(&sample_real(&g, f), 0.4).unwrap();
    for j in [64, 256, 500] {
        let brute = brute_left_integral(f, 0.4, g.node(j));
        assert!((i.scalar(j).re - brute).abs() < 1e-5, "node {j}");
    }
}

#[test]
fn right_operators_follow_reflection() {
    let g = Grid::new(0.0, 1.0, 513, 1.0).unwrap();
    for alpha in [0.3, 0.7, 1.0] {
        let d = right_rl_derivative(&sample_real(&g, |t| (1.0 - t).powi(2)), alpha).unwrap();
        let err = interior_error(&d, |t| power_rule(2.0, alpha, 1.0 - t));
        assert!(err < 2e-2, "alpha={alpha}: {err}");
    }
    let i = right_rl_integral(&sample_real(&g, |t| 1.0 - t), 0.5).unwrap();
    let err = interior_error(&i, |t| (1.0 - t).powf(1.5) / gamma(2.5).unwrap());
    assert!(err < 1e-6, "{err}");
}

#[test]
fn classical_right_derivative_is_negated_slope() {
    let g = Grid::new(0.0, 1.0, 101, 1.0).unwrap();
    let d = right_rl_derivative(&sample_real(&g, |t| t), 1.0).unwrap();
    for j in g.interior() {
        assert!((d.scalar(j).re + 1.0).abs() < 1e-12);
    }
}

#[test]
fn integral_semigroup_refines() {
    let mut previous = f64::INFINITY;
    for n in [65, 129, 257, 513] {
        let g = Grid::new(0.0, 1.0, n, 1.0).unwrap();
        let f = sample_real(&g, |t| (3.0 * t).cos());
        let twice = left_rl_integral(&left_rl_integral(&f, 0.3).unwrap(), 0.4).unwrap();
        let once = left_rl_integral(&f, 0.7).unwrap();
        let err = twice.sub(&once).unwrap().interior_max();
        assert!(err < previous);
        previous = err;
    }
    assert!(previous < 1e-3);
}

#[test]
fn combined_of_constant_mixes_both_sides() {
    let order = OrderSpec::new(0.5, 0.5, C64::new(0.0, 0.0)).unwrap();
    let k = 1.0 / gamma(0.5).unwrap();
    let mut previous = f64::INFINITY;
    for n in [129, 257, 513, 1025] {
        let g = Grid::new(0.0, 1.0, n, 1.0).unwrap();
        let d = combined_derivative(&sample_real(&g, |_| 1.0), &order).unwrap();
        let err = interior_error(&d, |t| 0.5 * k * (t.powf(-0.5) - (1.0 - t).powf(-0.5)));
        assert!(err < previous);
        previous = err;
    }
    assert!(previous < 1e-2);
}

fn smooth(g: &Grid, a: f64, b: f64, w: f64) -> SampledFunction {
    sample(g, |t| C64::new(a * t * t + (w * t).sin(), b * t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn combined_operator_is_linear(
        a in -2.0..2.0f64, b in -2.0..2.0f64, w in 0.5..5.0f64,
        c1 in -3.0..3.0f64, c2 in -3.0..3.0f64,
        alpha in 0.1..1.0f64, beta in 0.1..1.0f64, gre in -1.0..1.0f64, gim in -1.0..1.0f64,
    ) {
        let g = Grid::new(0.0, 1.0, 129, 1.0).unwrap();
        let order = OrderSpec::new(alpha, beta, C64::new(gre, gim)).unwrap();
        let f = smooth(&g, a, b, w);
        let h = smooth(&g, b, a, w + 1.0);
        let mix = f.scale(C64::new(c1, 0.0)).add(&h.scale(C64::new(c2, 0.0))).unwrap();
        for op in [combined_derivative, combined_adjoint_side] {
            let lhs = op(&mix, &order).unwrap();
            let rhs = op(&f, &order).unwrap().scale(C64::new(c1, 0.0))
                .add(&op(&h, &order).unwrap().scale(C64::new(c2, 0.0))).unwrap();
            let scale = lhs.values().iter().map(|z| z.norm()).fold(1.0, f64::max);
            for (x, y) in lhs.values().iter().zip(rhs.values()) {
                prop_assert!((x - y).norm() <= 1e-11 * scale);
            }
        }
    }

    #[test]
    fn reduction_identities_hold_for_any_orders(
        a in -2.0..2.0f64, w in 0.5..5.0f64, alpha in 0.05..=1.0f64, beta in 0.05..=1.0f64,
    ) {
        let g = Grid::new(-1.0, 2.0, 97, 2.0).unwrap();
        let f = smooth(&g, a, 0.3, w);
        let left = combined_derivative(&f, &OrderSpec::new(alpha, beta, C64::new(0.0, -1.0)).unwrap()).unwrap();
        let right = combined_derivative(&f, &OrderSpec::new(alpha, beta, C64::new(0.0, 1.0)).unwrap()).unwrap();
        let l = left_rl_derivative(&f, alpha).unwrap();
        let r = right_rl_derivative(&f, beta).unwrap();
        for j in 0..g.n_points() {
            prop_assert!((left.scalar(j) - l.scalar(j)).norm() <= 1e-13);
            prop_assert!((right.scalar(j) + r.scalar(j)).norm() <= 1e-13);
        }
    }
}
