//! The fractional Hamiltonian `H = L (t - tau)^(alpha-1) + p . phi`, residuals
//! of the Hamiltonian system and stationary condition, and the Poisson
//! bracket.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::action::{central_difference, dynamics_residual, AugmentedState, ControlProblem};
use crate::grid::{Grid, SampledFunction};
use crate::ops::{combined_adjoint_side, dot};
use crate::optimality::constant_of_motion_defect;
use crate::{Error, Result, C64};

/// Interior max-norms of the three optimality conditions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HamiltonianResiduals {
    /// `D_gamma^{alpha,beta} q - dH/dp`.
    pub dyn_defect: f64,
    /// `D_{-gamma}^{beta,alpha} p + dH/dq`.
    pub costate_defect: f64,
    /// `dH/du`.
    pub stationarity_defect: f64,
}

fn zeros(d: usize) -> Vec<C64> {
    vec![C64::new(0.0, 0.0); d]
}

fn kernel_at(grid: &Grid, alpha: f64, node: usize, tau: f64) -> Result<f64> {
    let k = grid.kernel(alpha, tau);
    if !k.is_finite() {
        return Err(Error::KernelPole {
            node,
            tau,
            t_obs: grid.t_obs(),
        });
    }
    Ok(k)
}

/// `H(u, q, p, tau)` with the kernel taken from `grid.t_obs()`.
pub fn hamiltonian_value(
    u: &[C64],
    q: &[C64],
    p: &[C64],
    tau: f64,
    problem: &ControlProblem,
    grid: &Grid,
) -> Result<C64> {
    let k = kernel_at(grid, problem.order.alpha(), usize::MAX, tau)?;
    let l = problem.lagrangian.value(u, q, tau);
    Ok(l * k + dot(p, &problem.phi_at(u, q, tau)))
}

/// `p^T J` for a row-major `d x d` Jacobian `J`.
fn left_multiply(p: &[C64], jac: &[C64]) -> Vec<C64> {
    let d = p.len();
    (0..d).map(|k| (0..d).map(|i| p[i] * jac[i * d + k]).sum()).collect()
}

/// Pointwise residuals of the Hamiltonian system and stationary condition.
/// Kernel-pole nodes carry non-finite values and lie outside the interior.
#[derive(Clone, Debug)]
pub struct HamiltonianResidualFields {
    pub dynamics: SampledFunction,
    pub costate: SampledFunction,
    pub stationarity: SampledFunction,
}

pub fn hamiltonian_residual_fields(
    state: &AugmentedState,
    problem: &ControlProblem,
) -> Result<HamiltonianResidualFields> {
    let g = *state.grid();
    let d = problem.dim();
    let alpha = problem.order.alpha();
    let dynamics = dynamics_residual(&state.q, &state.u, problem)?;
    let mut costate = combined_adjoint_side(&state.p, &problem.order)?;
    let mut stationarity = SampledFunction::zeros(g, d);

    let mut lq = zeros(d);
    let mut lu = zeros(d);
    let mut ju = zeros(d * d);
    let mut jq = zeros(d * d);
    for j in 0..g.n_points() {
        let tau = g.node(j);
        let (u, q, p) = (state.u.at(j), state.q.at(j), state.p.at(j));
        let k = g.kernel(alpha, tau);
        problem.lagrangian.d_q(u, q, tau, &mut lq);
        problem.lagrangian.d_v(u, q, tau, &mut lu);
        problem.dynamics.d_u(u, q, tau, &mut ju);
        problem.dynamics.d_q(u, q, tau, &mut jq);
        let p_jq = left_multiply(p, &jq);
        let p_ju = left_multiply(p, &ju);
        for (i, c) in costate.at_mut(j).iter_mut().enumerate() {
            *c += lq[i] * k + p_jq[i];
        }
        for (i, s) in stationarity.at_mut(j).iter_mut().enumerate() {
            *s = lu[i] * k + p_ju[i];
        }
    }
    Ok(HamiltonianResidualFields {
        dynamics,
        costate,
        stationarity,
    })
}

pub fn hamiltonian_system_residuals(state: &AugmentedState, problem: &ControlProblem) -> Result<HamiltonianResiduals> {
    let f = hamiltonian_residual_fields(state, problem)?;
    Ok(HamiltonianResiduals {
        dyn_defect: f.dynamics.interior_max(),
        costate_defect: f.costate.interior_max(),
        stationarity_defect: f.stationarity.interior_max(),
    })
}

/// A point function of `(q, p, tau)` with its partials.
pub trait Observable {
    fn dim(&self) -> usize;
    fn value(&self, q: &[C64], p: &[C64], tau: f64) -> C64;
    fn d_q(&self, q: &[C64], p: &[C64], tau: f64, out: &mut [C64]);
    fn d_p(&self, q: &[C64], p: &[C64], tau: f64, out: &mut [C64]);
}

/// Phase-space point at which a bracket is evaluated.
#[derive(Clone, Debug)]
pub struct PhasePoint {
    pub q: Vec<C64>,
    pub p: Vec<C64>,
    pub tau: f64,
}

const OBSERVABLE_TOL: f64 = 1e-5;

fn check_observable(f: &dyn Observable, at: &PhasePoint) -> Result<()> {
    let d = f.dim();
    let mut dq = zeros(d);
    let mut dp = zeros(d);
    f.d_q(&at.q, &at.p, at.tau, &mut dq);
    f.d_p(&at.q, &at.p, at.tau, &mut dp);
    for k in 0..d {
        let fd_q = central_difference(|x| {
            let mut q = at.q.clone();
            q[k] += x;
            f.value(&q, &at.p, at.tau)
        });
        let fd_p = central_difference(|x| {
            let mut p = at.p.clone();
            p[k] += x;
            f.value(&at.q, &p, at.tau)
        });
        for (slot, fd, an) in [("q", fd_q, dq[k]), ("p", fd_p, dp[k])] {
            let scale = fd.norm().max(an.norm());
            if scale >= 1e-10 && (fd - an).norm() / scale > OBSERVABLE_TOL {
                return Err(Error::PartialMismatch(format!(
                    "observable d/d{slot}[{k}]: analytic {an}, finite difference {fd}"
                )));
            }
        }
    }
    Ok(())
}

/// `{f, g} = df/dp . dg/dq - df/dq . dg/dp`, after checking both observables'
/// partials against finite differences at `at`.
pub fn poisson_bracket(f: &dyn Observable, g: &dyn Observable, at: &PhasePoint) -> Result<C64> {
    if f.dim() != g.dim() || at.q.len() != f.dim() || at.p.len() != f.dim() {
        return Err(Error::domain(
            "dim",
            "observables and phase point disagree on dimension",
        ));
    }
    check_observable(f, at)?;
    check_observable(g, at)?;
    let d = f.dim();
    let (mut fq, mut fp, mut gq, mut gp) = (zeros(d), zeros(d), zeros(d), zeros(d));
    f.d_q(&at.q, &at.p, at.tau, &mut fq);
    f.d_p(&at.q, &at.p, at.tau, &mut fp);
    g.d_q(&at.q, &at.p, at.tau, &mut gq);
    g.d_p(&at.q, &at.p, at.tau, &mut gp);
    Ok(dot(&fp, &gq) - dot(&fq, &gp))
}

/// Coordinate `q_k` as an observable.
#[derive(Clone, Copy, Debug)]
pub struct Coordinate {
    pub dim: usize,
    pub index: usize,
}

impl Observable for Coordinate {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, q: &[C64], _p: &[C64], _tau: f64) -> C64 {
        q[self.index]
    }
    fn d_q(&self, _q: &[C64], _p: &[C64], _tau: f64, out: &mut [C64]) {
        out.fill(C64::new(0.0, 0.0));
        out[self.index] = C64::new(1.0, 0.0);
    }
    fn d_p(&self, _q: &[C64], _p: &[C64], _tau: f64, out: &mut [C64]) {
        out.fill(C64::new(0.0, 0.0));
    }
}

/// Multiplier component `p_k` as an observable.
#[derive(Clone, Copy, Debug)]
pub struct Momentum {
    pub dim: usize,
    pub index: usize,
}

impl Observable for Momentum {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, _q: &[C64], p: &[C64], _tau: f64) -> C64 {
        p[self.index]
    }
    fn d_q(&self, _q: &[C64], _p: &[C64], _tau: f64, out: &mut [C64]) {
        out.fill(C64::new(0.0, 0.0));
    }
    fn d_p(&self, _q: &[C64], _p: &[C64], _tau: f64, out: &mut [C64]) {
        out.fill(C64::new(0.0, 0.0));
        out[self.index] = C64::new(1.0, 0.0);
    }
}

/// The fractional Hamiltonian at a frozen control `u`, seen as a function of
/// `(q, p, tau)`.
pub struct HamiltonianObservable<'a> {
    pub problem: &'a ControlProblem,
    pub grid: &'a Grid,
    pub u: Vec<C64>,
}

impl Observable for HamiltonianObservable<'_> {
    fn dim(&self) -> usize {
        self.problem.dim()
    }
    fn value(&self, q: &[C64], p: &[C64], tau: f64) -> C64 {
        hamiltonian_value(&self.u, q, p, tau, self.problem, self.grid).unwrap_or(C64::new(f64::NAN, f64::NAN))
    }
    fn d_q(&self, q: &[C64], p: &[C64], tau: f64, out: &mut [C64]) {
        let d = self.dim();
        let k = self.grid.kernel(self.problem.order.alpha(), tau);
        let mut lq = zeros(d);
        let mut jq = zeros(d * d);
        self.problem.lagrangian.d_q(&self.u, q, tau, &mut lq);
        self.problem.dynamics.d_q(&self.u, q, tau, &mut jq);
        let p_jq = left_multiply(p, &jq);
        for i in 0..d {
            out[i] = lq[i] * k + p_jq[i];
        }
    }
    fn d_p(&self, q: &[C64], _p: &[C64], tau: f64, out: &mut [C64]) {
        self.problem.dynamics.phi(&self.u, q, tau, out);
    }
}

const Q_INDEPENDENCE_TOL: f64 = 1e-12;

/// Checks that `p` solving the stationary condition along the state is a
/// fractional constant of motion. Requires `L` and `phi` to be independent
/// of `q`; returns the interior max of `D_{-gamma}^{beta,alpha} p`.
pub fn costate_conservation_defect(problem: &ControlProblem, state: &AugmentedState) -> Result<f64> {
    let d = problem.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut lq = zeros(d);
    let mut jq = zeros(d * d);
    for _ in 0..64 {
        let u: Vec<C64> = (0..d).map(|_| C64::new(rng.random_range(-2.0..2.0), 0.0)).collect();
        let q: Vec<C64> = (0..d).map(|_| C64::new(rng.random_range(-2.0..2.0), 0.0)).collect();
        let tau = rng.random_range(state.grid().a()..state.grid().b());
        problem.lagrangian.d_q(&u, &q, tau, &mut lq);
        problem.dynamics.d_q(&u, &q, tau, &mut jq);
        let worst = lq.iter().chain(&jq).map(|z| z.norm()).fold(0.0, f64::max);
        if worst > Q_INDEPENDENCE_TOL {
            return Err(Error::Precondition(format!(
                "L or phi depends on q (|d/dq| = {worst:e} at tau = {tau})"
            )));
        }
    }
    let p = stationary_costate(state, problem)?;
    constant_of_motion_defect(&p, &problem.order)
}

/// Costate solving `dL/du K + J_u^T p = 0` node by node. Kernel-pole nodes
/// get zero.
pub fn stationary_costate(state: &AugmentedState, problem: &ControlProblem) -> Result<SampledFunction> {
    let g = *state.grid();
    let d = problem.dim();
    let alpha = problem.order.alpha();
    let mut p = SampledFunction::zeros(g, d);
    let mut lu = zeros(d);
    let mut ju = zeros(d * d);
    for j in 0..g.n_points() {
        let tau = g.node(j);
        let k = g.kernel(alpha, tau);
        if !k.is_finite() {
            continue;
        }
        let (u, q) = (state.u.at(j), state.q.at(j));
        problem.lagrangian.d_v(u, q, tau, &mut lu);
        if problem.dynamics.is_identity() {
            for (pi, l) in p.at_mut(j).iter_mut().zip(&lu) {
                *pi = -(*l * k);
            }
            continue;
        }
        problem.dynamics.d_u(u, q, tau, &mut ju);
        // J_u^T p = -L_u K
        let mut a = zeros(d * d);
        for r in 0..d {
            for c in 0..d {
                a[r * d + c] = ju[c * d + r];
            }
        }
        let rhs: Vec<C64> = lu.iter().map(|l| -(*l * k)).collect();
        let sol =
            solve_dense(a, rhs, d).ok_or_else(|| Error::Precondition(format!("d phi/du is singular at node {j}")))?;
        p.at_mut(j).copy_from_slice(&sol);
    }
    Ok(p)
}

/// Gaussian elimination with partial pivoting on a small complex system.
fn solve_dense(mut a: Vec<C64>, mut b: Vec<C64>, d: usize) -> Option<Vec<C64>> {
    for col in 0..d {
        let pivot = (col..d).max_by(|&x, &y| a[x * d + col].norm().total_cmp(&a[y * d + col].norm()))?;
        if a[pivot * d + col].norm() < 1e-300 {
            return None;
        }
        if pivot != col {
            for k in 0..d {
                a.swap(pivot * d + k, col * d + k);
            }
            b.swap(pivot, col);
        }
        for row in col + 1..d {
            let factor = a[row * d + col] / a[col * d + col];
            for k in col..d {
                let v = a[col * d + k];
                a[row * d + k] -= factor * v;
            }
            let v = b[col];
            b[row] -= factor * v;
        }
    }
    let mut x = zeros(d);
    for row in (0..d).rev() {
        let s: C64 = (row + 1..d).map(|k| a[row * d + k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row * d + row];
    }
    Some(x)
}
