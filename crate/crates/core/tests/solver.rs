use fracal::action::{action_value, FnLagrangian, Lagrangian};
use fracal::builtin::{Free, Oscillator};
use fracal::grid::sample_real;
use fracal::optimality::el_residual;
use fracal::solver::{discrete_action_gradient, minimize_action, SolveOptions};
use fracal::{Grid, OrderSpec, SampledFunction, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn max_dev(q: &SampledFunction, exact: impl Fn(f64) -> f64) -> f64 {
    let g = q.grid();
    g.interior()
        .map(|j| (q.scalar(j).re - exact(g.node(j))).abs())
        .fold(0.0, f64::max)
}

#[test]
fn free_particle_follows_straight_line() {
    let order = OrderSpec::new(1.0, 1.0, c(0.0, -1.0)).unwrap();
    let g = Grid::new(0.0, 1.0, 257, 1.0).unwrap();
    let r = minimize_action(&Free::default(), &order, &g, &[0.0], &[1.0], &SolveOptions::default()).unwrap();
    assert!(r.converged);
    assert!(max_dev(&r.final_path, |t| t) <= 1e-4);
    assert!((r.final_action.re - 0.5).abs() <= 1e-3);
    assert!(r.el_residual_norm <= 1e-6);
    assert!(r.gradient_norm <= 1e-8);
}

#[test]
fn oscillator_matches_closed_form() {
    // q'' + q = 0, q(0) = 0, q(1) = 1.
    let order = OrderSpec::new(1.0, 1.0, c(0.0, -1.0)).unwrap();
    let g = Grid::new(0.0, 1.0, 257, 1.0).unwrap();
    let r = minimize_action(
        &Oscillator::new(1.0, 1.0),
        &order,
        &g,
        &[0.0],
        &[1.0],
        &SolveOptions::default(),
    )
    .unwrap();
    assert!(r.converged);
    assert!(max_dev(&r.final_path, |t| t.sin() / 1f64.sin()) <= 1e-3);

    // Negative stiffness: q'' = q, solution sinh(t)/sinh(1).
    let r = minimize_action(
        &Oscillator::new(1.0, -1.0),
        &order,
        &g,
        &[0.0],
        &[1.0],
        &SolveOptions::default(),
    )
    .unwrap();
    assert!(r.converged);
    assert!(max_dev(&r.final_path, |t| t.sinh() / 1f64.sinh()) <= 1e-3);
}

fn quartic() -> FnLagrangian {
    FnLagrangian::new(
        1,
        |v, q, tau| 0.5 * v[0] * v[0] + 0.1 * v[0].powi(4) + (q[0] * (1.0 + tau)).cos(),
        |v, _, _, out| out[0] = v[0] + 0.4 * v[0].powi(3),
        |_, q, tau, out| out[0] = -(1.0 + tau) * (q[0] * (1.0 + tau)).sin(),
    )
}

#[test]
fn gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let lagrangians: [Box<dyn Lagrangian>; 3] = [
        Box::new(Oscillator::new(rng.random_range(0.5..2.0), rng.random_range(-2.0..2.0))),
        Box::new(quartic()),
        Box::new(Free::new(1.7)),
    ];
    for (k, l) in lagrangians.iter().enumerate() {
        let alpha = rng.random_range(0.3..1.0);
        let beta = rng.random_range(0.3..1.0);
        let gamma = if k % 2 == 0 { c(0.0, -1.0) } else { c(0.0, 1.0) };
        let order = OrderSpec::new(alpha, beta, gamma).unwrap();
        let g = Grid::new(0.0, 1.0, 65, 1.0 + k as f64 * 0.5).unwrap();
        let coeffs: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let q = sample_real(&g, |t| coeffs[0] * t + coeffs[1] * (3.0 * t).sin() + coeffs[2] * t * t);
        let grad = discrete_action_gradient(&q, l.as_ref(), &order).unwrap();
        for _ in 0..20 {
            let j = rng.random_range(1..g.n_points() - 1);
            let eps = 1e-5;
            let shifted = |s: f64| {
                let mut p = q.clone();
                p.at_mut(j)[0] += s;
                action_value(&p, l.as_ref(), &order).unwrap().re
            };
            let fd = (shifted(eps) - shifted(-eps)) / (2.0 * eps);
            let an = grad.scalar(j).re;
            let rel = (fd - an).abs() / an.abs().max(fd.abs()).max(1e-12);
            assert!(rel <= 1e-6, "problem {k} node {j}: analytic {an}, fd {fd}");
        }
    }
}

#[test]
fn accepted_iterates_descend() {
    let order = OrderSpec::new(0.7, 1.0, c(0.0, -1.0)).unwrap();
    let g = Grid::new(0.0, 1.0, 129, 1.0).unwrap();
    let r = minimize_action(&quartic(), &order, &g, &[0.0], &[2.0], &SolveOptions::default()).unwrap();
    assert!(r.action_history.len() >= 2);
    for w in r.action_history.windows(2) {
        assert!(w[1] <= w[0]);
    }
    assert_eq!(r.action_history.len(), r.iterations + 1);
}

#[test]
fn refinement_does_not_worsen_optimality() {
    let order = OrderSpec::new(0.9, 1.0, c(0.0, 1.0)).unwrap();
    let mut previous = f64::INFINITY;
    for n in [65, 129, 257] {
        let g = Grid::new(0.0, 1.0, n, 1.0).unwrap();
        let r = minimize_action(&Free::default(), &order, &g, &[0.0], &[1.0], &SolveOptions::default()).unwrap();
        assert!(r.converged, "n={n}");
        assert!(
            r.el_residual_norm <= previous,
            "n={n}: {} vs {previous}",
            r.el_residual_norm
        );
        previous = r.el_residual_norm;
    }
}

#[test]
fn minimizer_beats_perturbations() {
    let order = OrderSpec::new(0.9, 1.0, c(0.0, 1.0)).unwrap();
    let g = Grid::new(0.0, 1.0, 257, 1.0).unwrap();
    let r = minimize_action(&Free::default(), &order, &g, &[0.0], &[1.0], &SolveOptions::default()).unwrap();
    assert!(r.converged);
    let best = r.el_residual_norm;
    let scale = 0.01 * (0..g.n_points()).map(|j| r.final_path.magnitude(j)).fold(0.0, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..100 {
        let mut p = r.final_path.clone();
        for j in 1..g.n_points() - 1 {
            p.at_mut(j)[0] += rng.random_range(-scale..scale);
        }
        let other = el_residual(&p, &Free::default(), &order).unwrap().interior_max;
        assert!(best < other);
    }
}

#[test]
fn fractional_action_of_line_matches_closed_form() {
    // (1/Gamma(1/2)) int_0^1 (2 tau / pi) (1 - tau)^(-1/2) d tau = 8 / (3 pi^(3/2)).
    let exact = 8.0 / (3.0 * std::f64::consts::PI.powf(1.5));
    let order = OrderSpec::new(0.5, 1.0, c(0.0, -1.0)).unwrap();
    let g = Grid::new(0.0, 1.0, 1025, 1.0).unwrap();
    let s = action_value(&sample_real(&g, |t| t), &Free::default(), &order).unwrap();
    assert!((s.re - exact).abs() <= 0.01 * exact, "{} vs {exact}", s.re);
    assert_eq!(s.im, 0.0);
}

#[test]
fn seed_path_is_used() {
    let order = OrderSpec::new(1.0, 1.0, c(0.0, -1.0)).unwrap();
    let g = Grid::new(0.0, 1.0, 65, 1.0).unwrap();
    let opts = SolveOptions {
        seed_path: Some(sample_real(&g, |t| t)),
        ..SolveOptions::default()
    };
    let r = minimize_action(&Free::default(), &order, &g, &[0.0], &[1.0], &opts).unwrap();
    assert!(r.converged);
    assert_eq!(r.iterations, 0);
}

#[test]
fn fractional_minimizer_approaches_closed_form_extremal() {
    // With beta = 1, gamma = +i, t_obs = 1 the free extremal solves
    // q' (1 - tau)^(alpha - 1) = const: q = 1 - (1 - tau)^(2 - alpha), with
    // action (2 - alpha) / (2 Gamma(alpha)) = 0.55 / Gamma(0.9).
    let order = OrderSpec::new(0.9, 1.0, c(0.0, 1.0)).unwrap();
    let exact_action = 0.55 / fracal::special::gamma(0.9).unwrap();
    let mut previous = f64::INFINITY;
    for n in [65, 129, 257] {
        let g = Grid::new(0.0, 1.0, n, 1.0).unwrap();
        let r = minimize_action(&Free::default(), &order, &g, &[0.0], &[1.0], &SolveOptions::default()).unwrap();
        let dev = (0..n)
            .map(|j| (r.final_path.scalar(j).re - (1.0 - (1.0 - g.node(j)).powf(1.1))).abs())
            .fold(0.0, f64::max);
        assert!(dev < previous);
        previous = dev;
        assert!((r.final_action.re - exact_action).abs() < 1e-3);
    }
    assert!(previous < 5e-5);
}
