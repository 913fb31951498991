use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fracal::builtin::Oscillator;
use fracal::exec::Strategy;
use fracal::grid::sample_real;
use fracal::ops::OperatorKind;
use fracal::solver::discrete_action_gradient;
use fracal::{Grid, OrderSpec, C64};

const SIZES: [usize; 3] = [257, 1025, 4097];

fn strategies() -> [(&'static str, Strategy); 2] {
    [("sequential", Strategy::Sequential), ("parallel", Strategy::Parallel)]
}

fn operators(c: &mut Criterion) {
    let order = OrderSpec::new(0.6, 0.4, C64::new(0.3, 0.0)).unwrap();
    let kinds = [
        ("left_derivative", OperatorKind::LeftDerivative(0.6)),
        ("right_integral", OperatorKind::RightIntegral(0.6)),
        ("combined", OperatorKind::Combined(order)),
    ];
    for (name, kind) in kinds {
        let mut group = c.benchmark_group(name);
        for n in SIZES {
            let grid = Grid::new(0.0, 1.0, n, 1.0).unwrap();
            let f = sample_real(&grid, |t| (3.0 * t).sin() + t * t);
            for (label, strategy) in strategies() {
                group.bench_with_input(BenchmarkId::new(label, n), &f, |b, f| {
                    b.iter(|| black_box(kind.apply_with(f, strategy).unwrap()))
                });
            }
        }
        group.finish();
    }
}

fn gradient(c: &mut Criterion) {
    let order = OrderSpec::new(0.7, 0.7, C64::new(0.0, -1.0)).unwrap();
    let osc = Oscillator::new(1.0, 1.0);
    let mut group = c.benchmark_group("action_gradient");
    group.sample_size(20);
    for n in [257, 1025] {
        let grid = Grid::new(0.0, 1.0, n, 1.0).unwrap();
        let q = sample_real(&grid, |t| t.sin());
        group.bench_with_input(BenchmarkId::from_parameter(n), &q, |b, q| {
            b.iter(|| black_box(discrete_action_gradient(q, &osc, &order).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, operators, gradient);
criterion_main!(benches);
