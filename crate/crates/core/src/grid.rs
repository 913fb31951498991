//! Uniform grids, sampled functions and order triples.

use std::ops::Range;

use crate::special;
use crate::{Error, Result, C64};

/// Uniform discretisation of the intrinsic-time interval `[a, b]` together
/// with the observer time `t_obs`.
///
/// `t_obs >= b` keeps the action kernel `(t_obs - tau)^(alpha - 1)` real on
/// the whole interval; its singularity, if any, sits at `tau = b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    a: f64,
    b: f64,
    n_points: usize,
    t_obs: f64,
}

impl Grid {
    pub fn new(a: f64, b: f64, n_points: usize, t_obs: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && t_obs.is_finite()) {
            return Err(Error::domain("interval", "a, b and t_obs must be finite"));
        }
        if a >= b {
            return Err(Error::domain("interval", format!("need a < b, got a = {a}, b = {b}")));
        }
        if n_points < 3 {
            return Err(Error::domain("n_points", format!("need n_points >= 3, got {n_points}")));
        }
        if t_obs < b {
            return Err(Error::domain("t_obs", format!("need t_obs >= b = {b}, got {t_obs}")));
        }
        Ok(Grid { a, b, n_points, t_obs })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn t_obs(&self) -> f64 {
        self.t_obs
    }

    /// Node spacing `h = (b - a) / (n_points - 1)`.
    pub fn step(&self) -> f64 {
        (self.b - self.a) / (self.n_points - 1) as f64
    }

    /// The last node is pinned to `b` exactly.
    pub fn node(&self, j: usize) -> f64 {
        if j + 1 == self.n_points {
            self.b
        } else {
            self.a + j as f64 * self.step()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.node(j)).collect()
    }

    /// Same grid with a different observer time.
    pub fn with_t_obs(&self, t_obs: f64) -> Result<Self> {
        Grid::new(self.a, self.b, self.n_points, t_obs)
    }

    /// Nodes used by every error and residual norm: a margin of
    /// `ceil(0.05 n)` nodes is dropped at each end, where endpoint
    /// singularities of the one-sided operators live.
    pub fn interior(&self) -> Range<usize> {
        let margin = ((0.05 * self.n_points as f64).ceil() as usize).max(1);
        margin..self.n_points - margin
    }

    /// `(t_obs - tau)^(alpha - 1)`; infinite at `tau = t_obs` for `alpha < 1`.
    pub fn kernel(&self, alpha: f64, tau: f64) -> f64 {
        if alpha == 1.0 {
            return 1.0;
        }
        (self.t_obs - tau).powf(alpha - 1.0)
    }

    /// Exact integral of the kernel over cell `[tau_j, tau_{j+1}]`.
    pub fn kernel_cell_integral(&self, alpha: f64, j: usize) -> f64 {
        if alpha == 1.0 {
            return self.node(j + 1) - self.node(j);
        }
        let lo = self.t_obs - self.node(j);
        let hi = self.t_obs - self.node(j + 1);
        (lo.powf(alpha) - hi.powf(alpha)) / alpha
    }

    /// Trapezoidal rule for scalar samples.
    pub fn trapezoid(&self, values: &[C64]) -> C64 {
        debug_assert_eq!(values.len(), self.n_points);
        let n = values.len();
        let inner: C64 = values[1..n - 1].iter().sum();
        (inner + 0.5 * (values[0] + values[n - 1])) * self.step()
    }
}

/// Complex samples of a (possibly vector-valued) function on a grid,
/// stored node-major: component `k` of node `j` is `values[j * dim + k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction {
    grid: Grid,
    dim: usize,
    values: Vec<C64>,
}

impl SampledFunction {
    pub fn new(grid: Grid, dim: usize, values: Vec<C64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("dim", "vector dimension must be at least 1"));
        }
        if values.len() != grid.n_points() * dim {
            return Err(Error::domain(
                "values",
                format!(
                    "expected {} values ({} nodes x dim {}), got {}",
                    grid.n_points() * dim,
                    grid.n_points(),
                    dim,
                    values.len()
                ),
            ));
        }
        Ok(SampledFunction { grid, dim, values })
    }

    pub fn from_scalars(grid: Grid, values: Vec<C64>) -> Result<Self> {
        Self::new(grid, 1, values)
    }

    pub fn from_real(grid: Grid, values: &[f64]) -> Result<Self> {
        Self::new(grid, 1, values.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zeros(grid: Grid, dim: usize) -> Self {
        SampledFunction {
            grid,
            dim: dim.max(1),
            values: vec![C64::new(0.0, 0.0); grid.n_points() * dim.max(1)],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.grid.n_points()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn at(&self, j: usize) -> &[C64] {
        &self.values[j * self.dim..(j + 1) * self.dim]
    }

    pub fn at_mut(&mut self, j: usize) -> &mut [C64] {
        &mut self.values[j * self.dim..(j + 1) * self.dim]
    }

    /// First component at node `j`.
    pub fn scalar(&self, j: usize) -> C64 {
        self.values[j * self.dim]
    }

    pub fn component(&self, k: usize) -> Vec<C64> {
        self.values.iter().skip(k).step_by(self.dim).copied().collect()
    }

    /// Builds a function from per-component columns.
    pub fn from_components(grid: Grid, columns: &[Vec<C64>]) -> Result<Self> {
        let dim = columns.len();
        let n = grid.n_points();
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::domain("values", "component length differs from grid size"));
        }
        let mut values = Vec::with_capacity(n * dim);
        for j in 0..n {
            values.extend(columns.iter().map(|c| c[j]));
        }
        Self::new(grid, dim, values)
    }

    /// Applies `op` to every component column independently.
    pub fn map_components<F>(&self, mut op: F) -> Result<Self>
    where
        F: FnMut(&[C64]) -> Result<Vec<C64>>,
    {
        let columns = (0..self.dim)
            .map(|k| op(&self.component(k)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_components(self.grid, &columns)
    }

    /// Pointwise `f(value, tau)`.
    pub fn map_values(&self, f: impl Fn(C64, f64) -> C64) -> Self {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &z)| f(z, self.grid.node(i / self.dim)))
            .collect();
        SampledFunction { values, ..*self }
    }

    pub fn scale(&self, c: C64) -> Self {
        self.map_values(|z, _| c * z)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let values = self.values.iter().zip(&other.values).map(|(x, y)| x + y).collect();
        Ok(SampledFunction { values, ..*self })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid, other.grid)));
        }
        if self.dim != other.dim {
            return Err(Error::GridMismatch(format!("dimension {} vs {}", self.dim, other.dim)));
        }
        Ok(())
    }

    /// Euclidean magnitude of the value at node `j`.
    pub fn magnitude(&self, j: usize) -> f64 {
        self.at(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum node magnitude over [`Grid::interior`]. NaN propagates.
    pub fn interior_max(&self) -> f64 {
        self.max_over(self.grid.interior())
    }

    pub fn max_over(&self, nodes: Range<usize>) -> f64 {
        let mut worst = 0.0_f64;
        for j in nodes {
            let m = self.magnitude(j);
            if m.is_nan() {
                return f64::NAN;
            }
            worst = worst.max(m);
        }
        worst
    }

    /// Reverses node order (the map `tau -> a + b - tau`).
    pub fn reflected(&self) -> Self {
        let n = self.len();
        let mut values = Vec::with_capacity(self.values.len());
        for j in (0..n).rev() {
            values.extend_from_slice(self.at(j));
        }
        SampledFunction { values, ..*self }
    }
}

/// Samples a scalar function at every node.
pub fn sample(grid: &Grid, f: impl Fn(f64) -> C64) -> SampledFunction {
    SampledFunction {
        grid: *grid,
        dim: 1,
        values: grid.nodes().into_iter().map(f).collect(),
    }
}

/// Samples a real scalar function at every node.
pub fn sample_real(grid: &Grid, f: impl Fn(f64) -> f64) -> SampledFunction {
    sample(grid, |t| C64::new(f(t), 0.0))
}

/// Samples a fallible vector-valued function. Failures and non-finite
/// outputs are reported with the node index.
pub fn try_sample<F, E>(grid: &Grid, dim: usize, f: F) -> Result<SampledFunction>
where
    F: Fn(f64) -> std::result::Result<Vec<C64>, E>,
    E: std::fmt::Display,
{
    let mut values = Vec::with_capacity(grid.n_points() * dim);
    for (j, tau) in grid.nodes().into_iter().enumerate() {
        let v = f(tau).map_err(|e| Error::Evaluation {
            node: j,
            reason: e.to_string(),
        })?;
        if v.len() != dim {
            return Err(Error::Evaluation {
                node: j,
                reason: format!("expected {dim} components, got {}", v.len()),
            });
        }
        if v.iter().any(|z| !z.is_finite()) {
            return Err(Error::Evaluation {
                node: j,
                reason: format!("non-finite value at tau = {tau}"),
            });
        }
        values.extend(v);
    }
    SampledFunction::new(*grid, dim, values)
}

/// The triple `(alpha, beta, gamma)` that parameterises the combined
/// operator `D_gamma^{alpha,beta}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrderSpec {
    alpha: f64,
    beta: f64,
    gamma: C64,
}

/// Coefficients below this magnitude are treated as exactly zero when
/// deciding whether the combined operator is one-sided.
const ONE_SIDED_TOL: f64 = 1e-14;

impl OrderSpec {
    pub fn new(alpha: f64, beta: f64, gamma: C64) -> Result<Self> {
        check_order("alpha", alpha)?;
        check_order("beta", beta)?;
        if !gamma.is_finite() {
            return Err(Error::domain("gamma", "must be finite"));
        }
        Ok(OrderSpec { alpha, beta, gamma })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> C64 {
        self.gamma
    }

    /// Weight `(1 + i gamma) / 2` of the left derivative.
    pub fn left_coeff(&self) -> C64 {
        (C64::new(1.0, 0.0) + C64::i() * self.gamma) * 0.5
    }

    /// Weight `(1 - i gamma) / 2` with which the right derivative is
    /// subtracted.
    pub fn right_coeff(&self) -> C64 {
        (C64::new(1.0, 0.0) - C64::i() * self.gamma) * 0.5
    }

    /// `(beta, alpha, -gamma)`: the order of the adjoint-side operator.
    pub fn adjoint(&self) -> Self {
        OrderSpec {
            alpha: self.beta,
            beta: self.alpha,
            gamma: -self.gamma,
        }
    }

    /// `gamma = -i`: the combined operator is the left derivative.
    pub fn is_left_only(&self) -> bool {
        self.right_coeff().norm() <= ONE_SIDED_TOL
    }

    /// `gamma = +i`: the combined operator is minus the right derivative.
    pub fn is_right_only(&self) -> bool {
        self.left_coeff().norm() <= ONE_SIDED_TOL
    }
}

fn check_order(field: &'static str, x: f64) -> Result<()> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(Error::domain(field, format!("must lie in (0, 1], got {x}")));
    }
    Ok(())
}

/// Euler gamma function; see [`special::gamma`].
pub fn gamma_function(x: f64) -> Result<f64> {
    special::gamma(x)
}
