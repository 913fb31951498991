//! Lagrangians, control problems and the weighted action integrals.
//!
//! All integrals carry the factor `1/Γ(alpha)` and are discretised with
//! cell-wise product integration: each cell `[tau_j, tau_{j+1}]` contributes
//! the exact integral of the kernel `(t_obs - tau)^(alpha - 1)` times one
//! integrand sample. Which sample depends on the side of the combined
//! operator (see [`ActionQuadrature`]), so that the discrete action and the
//! discrete derivative use the same stencil orientation.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{Grid, OrderSpec, SampledFunction};
use crate::ops::{combined_derivative, dot};
use crate::special::gamma;
use crate::{Error, Result, C64};

/// A Lagrangian `L(v, q, tau)` with its first partials.
///
/// `v` is the slot fed with `D_gamma^{alpha,beta} q` (or the control `u`).
/// Implementations must be holomorphic in `v` and `q` (write `v * v`, not
/// `|v|^2`), which is what makes the real-part gradient used by the solver
/// equal the real part of the complex partials.
pub trait Lagrangian: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, v: &[C64], q: &[C64], tau: f64) -> C64;
    /// `dL/dv`, written into `out` (length `dim`).
    fn d_v(&self, v: &[C64], q: &[C64], tau: f64, out: &mut [C64]);
    /// `dL/dq`, written into `out` (length `dim`).
    fn d_q(&self, v: &[C64], q: &[C64], tau: f64, out: &mut [C64]);
}

type ScalarFn = dyn Fn(&[C64], &[C64], f64) -> C64 + Send + Sync;
type VectorFn = dyn Fn(&[C64], &[C64], f64, &mut [C64]) + Send + Sync;

/// A Lagrangian assembled from closures.
pub struct FnLagrangian {
    dim: usize,
    value: Box<ScalarFn>,
    d_v: Box<VectorFn>,
    d_q: Box<VectorFn>,
}

impl FnLagrangian {
    pub fn new<V, Dv, Dq>(dim: usize, value: V, d_v: Dv, d_q: Dq) -> Self
    where
        V: Fn(&[C64], &[C64], f64) -> C64 + Send + Sync + 'static,
        Dv: Fn(&[C64], &[C64], f64, &mut [C64]) + Send + Sync + 'static,
        Dq: Fn(&[C64], &[C64], f64, &mut [C64]) + Send + Sync + 'static,
    {
        FnLagrangian {
            dim,
            value: Box::new(value),
            d_v: Box::new(d_v),
            d_q: Box::new(d_q),
        }
    }
}

impl Lagrangian for FnLagrangian {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, v: &[C64], q: &[C64], tau: f64) -> C64 {
        (self.value)(v, q, tau)
    }
    fn d_v(&self, v: &[C64], q: &[C64], tau: f64, out: &mut [C64]) {
        (self.d_v)(v, q, tau, out)
    }
    fn d_q(&self, v: &[C64], q: &[C64], tau: f64, out: &mut [C64]) {
        (self.d_q)(v, q, tau, out)
    }
}

/// Dynamics map `phi(u, q, tau)` of the control problem with its Jacobians.
pub trait Dynamics: Send + Sync {
    fn dim(&self) -> usize;
    fn phi(&self, u: &[C64], q: &[C64], tau: f64, out: &mut [C64]);
    /// Row-major `dim x dim` Jacobian `d phi_i / d u_k` at index `i * dim + k`.
    fn d_u(&self, u: &[C64], q: &[C64], tau: f64, out: &mut [C64]);
    /// Row-major Jacobian `d phi_i / d q_k`.
    fn d_q(&self, u: &[C64], q: &[C64], tau: f64, out: &mut [C64]);
    /// True when `phi(u, q, tau) = u`, the calculus-of-variations case.
    fn is_identity(&self) -> bool {
        false
    }
}

/// `phi(u, q, tau) = u`.
#[derive(Clone, Copy, Debug)]
pub struct IdentityDynamics {
    pub dim: usize,
}

impl Dynamics for IdentityDynamics {
    fn dim(&self) -> usize {
        self.dim
    }
    fn phi(&self, u: &[C64], _q: &[C64], _tau: f64, out: &mut [C64]) {
        out.copy_from_slice(u);
    }
    fn d_u(&self, _u: &[C64], _q: &[C64], _tau: f64, out: &mut [C64]) {
        for (idx, o) in out.iter_mut().enumerate() {
            let (i, k) = (idx / self.dim, idx % self.dim);
            *o = C64::new(if i == k { 1.0 } else { 0.0 }, 0.0);
        }
    }
    fn d_q(&self, _u: &[C64], _q: &[C64], _tau: f64, out: &mut [C64]) {
        out.fill(C64::new(0.0, 0.0));
    }
    fn is_identity(&self) -> bool {
        true
    }
}

/// Minimise the weighted action of `L(u, q, tau)` subject to
/// `D_gamma^{alpha,beta} q = phi(u, q, tau)` and fixed endpoints.
#[derive(Clone)]
pub struct ControlProblem {
    pub lagrangian: Arc<dyn Lagrangian>,
    pub dynamics: Arc<dyn Dynamics>,
    pub order: OrderSpec,
    pub q_a: Vec<C64>,
    pub q_b: Vec<C64>,
}

impl ControlProblem {
    pub fn new(
        lagrangian: Arc<dyn Lagrangian>,
        dynamics: Arc<dyn Dynamics>,
        order: OrderSpec,
        q_a: Vec<C64>,
        q_b: Vec<C64>,
    ) -> Result<Self> {
        let d = lagrangian.dim();
        if dynamics.dim() != d || q_a.len() != d || q_b.len() != d {
            return Err(Error::domain(
                "dim",
                "lagrangian, dynamics and boundary values must share one dimension",
            ));
        }
        Ok(ControlProblem {
            lagrangian,
            dynamics,
            order,
            q_a,
            q_b,
        })
    }

    /// The calculus-of-variations problem: `phi = u`.
    pub fn calculus_of_variations(
        lagrangian: Arc<dyn Lagrangian>,
        order: OrderSpec,
        q_a: Vec<C64>,
        q_b: Vec<C64>,
    ) -> Result<Self> {
        let dim = lagrangian.dim();
        Self::new(lagrangian, Arc::new(IdentityDynamics { dim }), order, q_a, q_b)
    }

    pub fn dim(&self) -> usize {
        self.lagrangian.dim()
    }

    pub(crate) fn phi_at(&self, u: &[C64], q: &[C64], tau: f64) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.dim()];
        self.dynamics.phi(u, q, tau, &mut out);
        out
    }
}

/// Path, control and multiplier on one grid.
#[derive(Clone, Debug)]
pub struct AugmentedState {
    pub q: SampledFunction,
    pub u: SampledFunction,
    pub p: SampledFunction,
}

impl AugmentedState {
    pub fn new(q: SampledFunction, u: SampledFunction, p: SampledFunction) -> Result<Self> {
        q.check_compatible(&u)?;
        q.check_compatible(&p)?;
        Ok(AugmentedState { q, u, p })
    }

    /// State with a zero multiplier.
    pub fn without_multiplier(q: SampledFunction, u: SampledFunction) -> Result<Self> {
        let p = SampledFunction::zeros(*q.grid(), q.dim());
        Self::new(q, u, p)
    }

    pub fn grid(&self) -> &Grid {
        self.q.grid()
    }
}

/// Which node sample stands for each grid cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellRule {
    /// Cell `[tau_{j-1}, tau_j]` uses node `j` (left-sided operator).
    RightEndpoint,
    /// Cell `[tau_j, tau_{j+1}]` uses node `j` (right-sided operator).
    LeftEndpoint,
    /// Average of both: the trapezoidal rule.
    Trapezoid,
}

impl CellRule {
    pub fn for_order(order: &OrderSpec) -> Self {
        if order.is_left_only() {
            CellRule::RightEndpoint
        } else if order.is_right_only() {
            CellRule::LeftEndpoint
        } else {
            CellRule::Trapezoid
        }
    }
}

/// Node weights of the discrete action integral.
///
/// The one-sided Grünwald-Letnikov sums carry scheme-dependent values at
/// their starting endpoint; the endpoint rules never sample that node. With
/// `gamma = -i` and `alpha = 1` this is the rectangle rule that makes the
/// straight line the exact discrete minimiser of the free action.
#[derive(Clone, Debug)]
pub struct ActionQuadrature {
    pub rule: CellRule,
    /// Weights including the kernel and `1/Γ(alpha)`.
    pub kernel_weights: Vec<f64>,
    /// Same rule without the kernel, still scaled by `1/Γ(alpha)`.
    pub plain_weights: Vec<f64>,
}

impl ActionQuadrature {
    pub fn new(grid: &Grid, order: &OrderSpec) -> Result<Self> {
        let rule = CellRule::for_order(order);
        let alpha = order.alpha();
        let norm = 1.0 / gamma(alpha)?;
        let n = grid.n_points();
        let kernel_cells: Vec<f64> = (0..n - 1).map(|j| grid.kernel_cell_integral(alpha, j)).collect();
        let plain_cells: Vec<f64> = (0..n - 1).map(|j| grid.node(j + 1) - grid.node(j)).collect();
        let spread = |cells: &[f64]| -> Vec<f64> {
            let mut w = vec![0.0; n];
            for (j, c) in cells.iter().enumerate() {
                match rule {
                    CellRule::RightEndpoint => w[j + 1] += c,
                    CellRule::LeftEndpoint => w[j] += c,
                    CellRule::Trapezoid => {
                        w[j] += 0.5 * c;
                        w[j + 1] += 0.5 * c;
                    }
                }
            }
            w.iter().map(|x| x * norm).collect()
        };
        Ok(ActionQuadrature {
            rule,
            kernel_weights: spread(&kernel_cells),
            plain_weights: spread(&plain_cells),
        })
    }

    pub fn integrate_kernel(&self, samples: &[C64]) -> C64 {
        weighted_sum(&self.kernel_weights, samples)
    }

    pub fn integrate_plain(&self, samples: &[C64]) -> C64 {
        weighted_sum(&self.plain_weights, samples)
    }
}

fn weighted_sum(w: &[f64], samples: &[C64]) -> C64 {
    // zero-weight nodes are skipped so that a singular sample there is harmless
    w.iter()
        .zip(samples)
        .filter(|(w, _)| **w != 0.0)
        .map(|(w, s)| s * *w)
        .sum()
}

/// The fractional action of the path `q`:
/// `1/Γ(alpha) int_a^b L(D_gamma^{alpha,beta} q, q, tau) (t - tau)^(alpha-1) dtau`.
///
/// The imaginary part is returned as is; it vanishes for real paths with
/// `gamma = +-i`.
pub fn action_value(q: &SampledFunction, lagrangian: &dyn Lagrangian, order: &OrderSpec) -> Result<C64> {
    check_dim(q, lagrangian.dim())?;
    let v = combined_derivative(q, order)?;
    let quad = ActionQuadrature::new(q.grid(), order)?;
    let samples = lagrangian_samples(&v, q, lagrangian);
    Ok(quad.integrate_kernel(&samples))
}

pub(crate) fn lagrangian_samples(v: &SampledFunction, q: &SampledFunction, l: &dyn Lagrangian) -> Vec<C64> {
    let g = q.grid();
    (0..q.len()).map(|j| l.value(v.at(j), q.at(j), g.node(j))).collect()
}

pub(crate) fn check_dim(f: &SampledFunction, dim: usize) -> Result<()> {
    if f.dim() != dim {
        return Err(Error::GridMismatch(format!(
            "sampled dimension {} does not match problem dimension {dim}",
            f.dim()
        )));
    }
    Ok(())
}

/// `1/Γ(alpha) int_a^b L(u, q, tau) (t - tau)^(alpha-1) dtau`. The dynamics
/// constraint is not checked here; see [`dynamics_defect`].
pub fn control_action_value(q: &SampledFunction, u: &SampledFunction, problem: &ControlProblem) -> Result<C64> {
    q.check_compatible(u)?;
    check_dim(q, problem.dim())?;
    let quad = ActionQuadrature::new(q.grid(), &problem.order)?;
    let samples = lagrangian_samples(u, q, problem.lagrangian.as_ref());
    Ok(quad.integrate_kernel(&samples))
}

/// Pointwise `D_gamma^{alpha,beta} q - phi(u, q, tau)`.
pub fn dynamics_residual(
    q: &SampledFunction,
    u: &SampledFunction,
    problem: &ControlProblem,
) -> Result<SampledFunction> {
    q.check_compatible(u)?;
    check_dim(q, problem.dim())?;
    let dq = combined_derivative(q, &problem.order)?;
    let g = q.grid();
    let mut out = dq;
    for j in 0..q.len() {
        let phi = problem.phi_at(u.at(j), q.at(j), g.node(j));
        for (o, p) in out.at_mut(j).iter_mut().zip(phi) {
            *o -= p;
        }
    }
    Ok(out)
}

/// Interior max-norm of the dynamics constraint violation.
pub fn dynamics_defect(state: &AugmentedState, problem: &ControlProblem) -> Result<f64> {
    Ok(dynamics_residual(&state.q, &state.u, problem)?.interior_max())
}

/// The augmented action
/// `1/Γ(alpha) int_a^b [H(u, q, p, tau) - p . D_gamma^{alpha,beta} q] dtau`
/// with `H = L (t - tau)^(alpha-1) + p . phi`.
///
/// The kernel only multiplies `L`; the multiplier terms are integrated with
/// the same cell rule but without kernel.
pub fn augmented_action_value(state: &AugmentedState, problem: &ControlProblem) -> Result<C64> {
    let quad = ActionQuadrature::new(state.grid(), &problem.order)?;
    let lag = control_action_value(&state.q, &state.u, problem)?;
    let defect = dynamics_residual(&state.q, &state.u, problem)?;
    // p . (phi - Dq) = -p . defect
    let pairing: Vec<C64> = (0..state.q.len()).map(|j| -dot(state.p.at(j), defect.at(j))).collect();
    Ok(lag + quad.integrate_plain(&pairing))
}

/// Compares the supplied partials of `lagrangian` with central finite
/// differences at `probes` random points in `[-2, 2]^d x [-2, 2]^d x [0, 1]`.
///
/// Relative error is `|fd - analytic| / max(|fd|, |analytic|)`, skipped when
/// both magnitudes fall below `1e-10`.
pub fn validate_partials(lagrangian: &dyn Lagrangian, probes: usize, tol: f64, seed: u64) -> Result<()> {
    let d = lagrangian.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = vec![C64::new(0.0, 0.0); d];
    let mut q = vec![C64::new(0.0, 0.0); d];
    let mut dv = vec![C64::new(0.0, 0.0); d];
    let mut dq = vec![C64::new(0.0, 0.0); d];
    for probe in 0..probes {
        for k in 0..d {
            v[k] = C64::new(rng.random_range(-2.0..2.0), 0.0);
            q[k] = C64::new(rng.random_range(-2.0..2.0), 0.0);
        }
        let tau = rng.random_range(0.0..1.0);
        lagrangian.d_v(&v, &q, tau, &mut dv);
        lagrangian.d_q(&v, &q, tau, &mut dq);
        for k in 0..d {
            let fd_v = central_difference(|x| {
                let mut vv = v.clone();
                vv[k] += x;
                lagrangian.value(&vv, &q, tau)
            });
            let fd_q = central_difference(|x| {
                let mut qq = q.clone();
                qq[k] += x;
                lagrangian.value(&v, &qq, tau)
            });
            for (slot, fd, an) in [("v", fd_v, dv[k]), ("q", fd_q, dq[k])] {
                let scale = fd.norm().max(an.norm());
                if scale < 1e-10 {
                    continue;
                }
                let rel = (fd - an).norm() / scale;
                if rel > tol {
                    return Err(Error::PartialMismatch(format!(
                        "dL/d{slot}[{k}] at probe {probe}: analytic {an}, finite difference {fd} (relative error {rel:e})"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Fourth-order central difference with step 1e-3.
pub(crate) fn central_difference(f: impl Fn(f64) -> C64) -> C64 {
    let h = 1e-3;
    (f(-2.0 * h) - 8.0 * f(-h) + 8.0 * f(h) - f(2.0 * h)) / (12.0 * h)
}
