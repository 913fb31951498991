//! Direct minimisation of the discretised action over paths with pinned
//! endpoints.
//!
//! The discrete action is `S(q) = sum_j W_j L((D q)_j, q_j, tau_j)` with the
//! weights of [`ActionQuadrature`] and `D` the discrete combined operator.
//! Since the discrete right operator is the transpose of the left one,
//! `D^T = -D_adj` where `D_adj` is the discrete adjoint-side operator, and
//! the exact gradient is
//! `dS/dq_i = -(D_adj (W . dL/dv))_i + W_i dL/dq_i`.
//!
//! The search is L-BFGS with Armijo backtracking. The initial inverse
//! Hessian is the inverse of the kinetic operator `D_I^T diag(W) D_I`
//! restricted to interior nodes, which removes the `1/h^2` conditioning
//! of the velocity term.

use nalgebra::{DMatrix, DVector};

use crate::action::{check_dim, lagrangian_samples, ActionQuadrature, Lagrangian};
use crate::grid::{Grid, OrderSpec, SampledFunction};
use crate::ops::{combined_adjoint_side, combined_derivative, GlWeights};
use crate::optimality::{el_residual, partials_at};
use crate::{Error, Result, C64};

pub const METHOD: &str = "preconditioned L-BFGS with Armijo backtracking";

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub max_iterations: usize,
    /// Bound on the max-norm of the interior gradient.
    pub gradient_tolerance: f64,
    /// Step shrink factor of the backtracking search, in `(0, 1)`.
    pub shrink: f64,
    /// Armijo constant.
    pub sufficient_decrease: f64,
    /// Number of stored L-BFGS correction pairs.
    pub memory: usize,
    /// Starting path; linear interpolation of the boundary values otherwise.
    pub seed_path: Option<SampledFunction>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_iterations: 500,
            gradient_tolerance: 1e-8,
            shrink: 0.5,
            sufficient_decrease: 1e-4,
            memory: 12,
            seed_path: None,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if self.gradient_tolerance.is_nan() || self.gradient_tolerance <= 0.0 {
            return Err(Error::domain("gradient_tolerance", "must be positive"));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::domain("shrink", "must lie in (0, 1)"));
        }
        if !(self.sufficient_decrease > 0.0 && self.sufficient_decrease < 1.0) {
            return Err(Error::domain("sufficient_decrease", "must lie in (0, 1)"));
        }
        if self.memory == 0 {
            return Err(Error::domain("memory", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub final_path: SampledFunction,
    pub final_action: C64,
    /// Max-norm of the interior gradient at the final path.
    pub gradient_norm: f64,
    /// Accepted steps.
    pub iterations: usize,
    pub converged: bool,
    /// Interior max of the Euler-Lagrange residual at the final path.
    pub el_residual_norm: f64,
    pub method: &'static str,
    /// Real action after each accepted step, starting with the initial path.
    pub action_history: Vec<f64>,
}

fn check_real_regime(order: &OrderSpec) -> Result<()> {
    if order.is_left_only() || order.is_right_only() {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "minimisation needs gamma = -i or +i (real action), got {}",
            order.gamma()
        )))
    }
}

/// Gradient of the real discrete action with respect to every node value.
/// The two endpoint slots are zero.
pub fn discrete_action_gradient(
    q: &SampledFunction,
    lagrangian: &dyn Lagrangian,
    order: &OrderSpec,
) -> Result<SampledFunction> {
    check_real_regime(order)?;
    check_dim(q, lagrangian.dim())?;
    let quad = ActionQuadrature::new(q.grid(), order)?;
    let mut grad = full_gradient(q, lagrangian, order, &quad)?;
    let n = q.len();
    grad.at_mut(0).fill(C64::new(0.0, 0.0));
    grad.at_mut(n - 1).fill(C64::new(0.0, 0.0));
    Ok(grad)
}

fn full_gradient(
    q: &SampledFunction,
    lagrangian: &dyn Lagrangian,
    order: &OrderSpec,
    quad: &ActionQuadrature,
) -> Result<SampledFunction> {
    let v = combined_derivative(q, order)?;
    let (d_v, d_q) = partials_at(&v, q, lagrangian)?;
    let w = &quad.kernel_weights;
    let weighted_dv = weight_nodes(&d_v, w);
    let transported = combined_adjoint_side(&weighted_dv, order)?;
    let weighted_dq = weight_nodes(&d_q, w);
    let grad = weighted_dq.sub(&transported)?;
    Ok(grad.map_values(|z, _| C64::new(z.re, 0.0)))
}

fn weight_nodes(f: &SampledFunction, w: &[f64]) -> SampledFunction {
    let mut out = f.clone();
    for (j, wj) in w.iter().enumerate() {
        for x in out.at_mut(j) {
            // zero-weight nodes are dropped outright, whatever their value
            *x = if *wj == 0.0 { C64::new(0.0, 0.0) } else { *x * *wj };
        }
    }
    out
}

/// Evaluation context: maps interior unknowns to paths and back.
struct Problem<'a> {
    grid: Grid,
    dim: usize,
    lagrangian: &'a dyn Lagrangian,
    order: OrderSpec,
    quad: ActionQuadrature,
    q_a: Vec<f64>,
    q_b: Vec<f64>,
}

impl Problem<'_> {
    fn path(&self, x: &[f64]) -> SampledFunction {
        let n = self.grid.n_points();
        let d = self.dim;
        let mut values = Vec::with_capacity(n * d);
        values.extend(self.q_a.iter().map(|&v| C64::new(v, 0.0)));
        values.extend(x.iter().map(|&v| C64::new(v, 0.0)));
        values.extend(self.q_b.iter().map(|&v| C64::new(v, 0.0)));
        SampledFunction::new(self.grid, d, values).expect("consistent sizes")
    }

    fn action(&self, q: &SampledFunction) -> Result<C64> {
        let v = combined_derivative(q, &self.order)?;
        Ok(self.quad.integrate_kernel(&lagrangian_samples(&v, q, self.lagrangian)))
    }

    fn eval(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let q = self.path(x);
        let s = self.action(&q)?;
        let g = full_gradient(&q, self.lagrangian, &self.order, &self.quad)?;
        let d = self.dim;
        let n = self.grid.n_points();
        let grad = g.values()[d..(n - 1) * d].iter().map(|z| z.re).collect();
        Ok((s.re, grad))
    }

    /// Cholesky factor of the interior kinetic operator, one block per
    /// component.
    fn preconditioner(&self) -> Option<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
        let n = self.grid.n_points();
        let m = n - 2;
        let h = self.grid.step();
        let (order_used, left) = if self.order.is_left_only() {
            (self.order.alpha(), true)
        } else {
            (self.order.beta(), false)
        };
        let gl = GlWeights::new(order_used, n);
        let scale = h.powf(-order_used);
        // rows: all nodes, columns: interior nodes
        let dmat = DMatrix::from_fn(n, m, |j, col| {
            let i = col + 1;
            let c = if left {
                if i <= j {
                    gl.coeffs()[j - i]
                } else {
                    0.0
                }
            } else if i >= j {
                -gl.coeffs()[i - j]
            } else {
                0.0
            };
            c * scale * self.quad.kernel_weights[j].sqrt()
        });
        let mut mmat = dmat.transpose() * &dmat;
        let ridge = 1e-12 * mmat.trace() / m as f64;
        for k in 0..m {
            mmat[(k, k)] += ridge;
        }
        mmat.cholesky()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Minimises the real part of the discrete action over interior node values
/// with `q(a) = q_a`, `q(b) = q_b`. Requires `gamma = +-i`.
///
/// Non-convergence is reported through `converged = false`; the returned
/// path is the last accepted (lowest-action) iterate.
pub fn minimize_action(
    lagrangian: &dyn Lagrangian,
    order: &OrderSpec,
    grid: &Grid,
    q_a: &[f64],
    q_b: &[f64],
    opts: &SolveOptions,
) -> Result<SolveReport> {
    check_real_regime(order)?;
    opts.validate()?;
    let d = lagrangian.dim();
    if q_a.len() != d || q_b.len() != d {
        return Err(Error::domain(
            "boundary",
            format!("expected {d} components per boundary value"),
        ));
    }
    if q_a.iter().chain(q_b).any(|v| !v.is_finite()) {
        return Err(Error::domain("boundary", "boundary values must be finite"));
    }
    let problem = Problem {
        grid: *grid,
        dim: d,
        lagrangian,
        order: *order,
        quad: ActionQuadrature::new(grid, order)?,
        q_a: q_a.to_vec(),
        q_b: q_b.to_vec(),
    };
    let n = grid.n_points();
    let mut x: Vec<f64> = match &opts.seed_path {
        Some(seed) => {
            check_dim(seed, d)?;
            if seed.grid() != grid {
                return Err(Error::GridMismatch("seed path lives on a different grid".into()));
            }
            seed.values()[d..(n - 1) * d].iter().map(|z| z.re).collect()
        }
        None => (1..n - 1)
            .flat_map(|j| {
                let s = (grid.node(j) - grid.a()) / (grid.b() - grid.a());
                (0..d).map(move |k| q_a[k] + s * (q_b[k] - q_a[k]))
            })
            .collect(),
    };

    let (mut f, mut g) = problem.eval(&x)?;
    if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "initial action or gradient",
            iteration: 0,
            iterate: x,
        });
    }
    let chol = problem.preconditioner();
    let m = n - 2;
    let precondition = |r: &[f64]| -> Vec<f64> {
        match &chol {
            Some(c) => {
                let mut out = vec![0.0; r.len()];
                for k in 0..d {
                    let col = DVector::from_iterator(m, (0..m).map(|i| r[i * d + k]));
                    let z = c.solve(&col);
                    for i in 0..m {
                        out[i * d + k] = z[i];
                    }
                }
                out
            }
            None => r.to_vec(),
        }
    };

    let mut history = vec![f];
    let mut memory: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::new();
    let mut iterations = 0;
    while iterations < opts.max_iterations && max_abs(&g) > opts.gradient_tolerance {
        let mut dir = lbfgs_direction(&g, &memory, &precondition);
        let mut slope = dot(&g, &dir);
        if slope.is_nan() || slope >= 0.0 {
            memory.clear();
            dir = precondition(&g).iter().map(|v| -v).collect();
            slope = dot(&g, &dir);
            if slope.is_nan() || slope >= 0.0 {
                dir = g.iter().map(|v| -v).collect();
                slope = dot(&g, &dir);
            }
        }
        let mut step = 1.0;
        let mut accepted = None;
        while step > 1e-20 {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + step * b).collect();
            let (ft, gt) = problem.eval(&trial)?;
            if ft.is_finite() && ft <= f + opts.sufficient_decrease * step * slope {
                accepted = Some((trial, ft, gt));
                break;
            }
            step *= opts.shrink;
        }
        let Some((x_new, f_new, g_new)) = accepted else {
            if memory.is_empty() {
                break;
            }
            memory.clear();
            continue;
        };
        if g_new.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "gradient",
                iteration: iterations + 1,
                iterate: x_new,
            });
        }
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-14 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if memory.len() == opts.memory {
                memory.remove(0);
            }
            memory.push((s, y, 1.0 / sy));
        }
        x = x_new;
        f = f_new;
        g = g_new;
        history.push(f);
        iterations += 1;
    }

    let final_path = problem.path(&x);
    let final_action = problem.action(&final_path)?;
    let gradient_norm = max_abs(&g);
    let el = el_residual(&final_path, lagrangian, order)?;
    Ok(SolveReport {
        final_path,
        final_action,
        gradient_norm,
        iterations,
        converged: gradient_norm <= opts.gradient_tolerance,
        el_residual_norm: el.interior_max,
        method: METHOD,
        action_history: history,
    })
}

/// Two-loop recursion with `H0 = scale * M^-1`.
fn lbfgs_direction(
    g: &[f64],
    memory: &[(Vec<f64>, Vec<f64>, f64)],
    precondition: &dyn Fn(&[f64]) -> Vec<f64>,
) -> Vec<f64> {
    let mut r = g.to_vec();
    let mut alphas = Vec::with_capacity(memory.len());
    for (s, y, rho) in memory.iter().rev() {
        let a = rho * dot(s, &r);
        for (ri, yi) in r.iter_mut().zip(y) {
            *ri -= a * yi;
        }
        alphas.push(a);
    }
    let mut z = precondition(&r);
    if let Some((s, y, _)) = memory.last() {
        let my = precondition(y);
        let denom = dot(y, &my);
        if denom > 0.0 {
            let scale = dot(s, y) / denom;
            z.iter_mut().for_each(|v| *v *= scale);
        }
    }
    for ((s, y, rho), a) in memory.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &z);
        for (zi, si) in z.iter_mut().zip(s) {
            *zi += (a - b) * si;
        }
    }
    z.iter().map(|v| -v).collect()
}
