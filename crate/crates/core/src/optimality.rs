//! Residuals of the fractional Euler-Lagrange equation, the decaying friction
//! force, fractional momentum and fractional constants of motion.

use crate::action::{check_dim, Lagrangian};
use crate::exec::{self, Strategy};
use crate::grid::{OrderSpec, SampledFunction};
use crate::ops::{combined_adjoint_side, combined_derivative};
use crate::{Result, C64};

/// Node-wise residual of
/// `dL/dq - D_{-gamma}^{beta,alpha} dL/dv = (1 - alpha)/(t - tau) dL/dv`
/// (left side minus right side), evaluated at `v = D_gamma^{alpha,beta} q`.
#[derive(Clone, Debug)]
pub struct ElResidual {
    pub residual: SampledFunction,
    /// Max node magnitude over the interior nodes.
    pub interior_max: f64,
}

/// The path derivative `v` and the partials `dL/dv`, `dL/dq` along it.
#[derive(Clone, Debug)]
pub struct PartialsAlongPath {
    pub v: SampledFunction,
    pub d_v: SampledFunction,
    pub d_q: SampledFunction,
}

pub fn partials_along_path(
    q: &SampledFunction,
    lagrangian: &dyn Lagrangian,
    order: &OrderSpec,
) -> Result<PartialsAlongPath> {
    check_dim(q, lagrangian.dim())?;
    let v = combined_derivative(q, order)?;
    let (d_v, d_q) = partials_at(&v, q, lagrangian)?;
    Ok(PartialsAlongPath { v, d_v, d_q })
}

/// `dL/dv` and `dL/dq` at `(v_j, q_j, tau_j)`.
pub(crate) fn partials_at(
    v: &SampledFunction,
    q: &SampledFunction,
    lagrangian: &dyn Lagrangian,
) -> Result<(SampledFunction, SampledFunction)> {
    let d = q.dim();
    let g = q.grid();
    let pairs = exec::map_indices(q.len(), Strategy::Auto, |j| {
        let mut dv = vec![C64::new(0.0, 0.0); d];
        let mut dq = vec![C64::new(0.0, 0.0); d];
        lagrangian.d_v(v.at(j), q.at(j), g.node(j), &mut dv);
        lagrangian.d_q(v.at(j), q.at(j), g.node(j), &mut dq);
        (dv, dq)
    });
    let (dv, dq): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    Ok((
        SampledFunction::new(*g, d, dv.concat())?,
        SampledFunction::new(*g, d, dq.concat())?,
    ))
}

pub fn el_residual(q: &SampledFunction, lagrangian: &dyn Lagrangian, order: &OrderSpec) -> Result<ElResidual> {
    let parts = partials_along_path(q, lagrangian, order)?;
    let transported = combined_adjoint_side(&parts.d_v, order)?;
    let g = *q.grid();
    let alpha = order.alpha();
    let mut residual = parts.d_q.sub(&transported)?;
    for j in 0..q.len() {
        let factor = friction_factor(alpha, g.t_obs() - g.node(j));
        for (r, w) in residual.at_mut(j).iter_mut().zip(parts.d_v.at(j)) {
            *r -= factor * w;
        }
    }
    let interior_max = residual.interior_max();
    Ok(ElResidual { residual, interior_max })
}

/// `(1 - alpha) / (t - tau)`, taken as exactly zero when `alpha = 1` so the
/// pole at `tau = t` does not produce `0 * inf`.
fn friction_factor(alpha: f64, t_minus_tau: f64) -> f64 {
    if alpha == 1.0 {
        0.0
    } else {
        (1.0 - alpha) / t_minus_tau
    }
}

/// `F = (alpha - 1)/T dL/dv` with `T = tau - t`.
#[derive(Clone, Debug)]
pub struct FrictionForce {
    pub force: SampledFunction,
    /// `T_j = tau_j - t_obs`.
    pub elapsed: Vec<f64>,
    /// Nodes with `tau = t_obs`; their force is left at zero.
    pub excluded: Vec<usize>,
}

impl FrictionForce {
    /// Interior max-norm, skipping excluded nodes.
    pub fn interior_max(&self) -> f64 {
        self.force
            .grid()
            .interior()
            .filter(|j| !self.excluded.contains(j))
            .map(|j| self.force.magnitude(j))
            .fold(0.0, f64::max)
    }
}

pub fn friction_force(q: &SampledFunction, lagrangian: &dyn Lagrangian, order: &OrderSpec) -> Result<FrictionForce> {
    let parts = partials_along_path(q, lagrangian, order)?;
    let g = *q.grid();
    let alpha = order.alpha();
    let elapsed: Vec<f64> = g.nodes().iter().map(|tau| tau - g.t_obs()).collect();
    let mut force = parts.d_v;
    let mut excluded = Vec::new();
    for (j, &t) in elapsed.iter().enumerate() {
        if t == 0.0 {
            excluded.push(j);
            force.at_mut(j).fill(C64::new(0.0, 0.0));
            continue;
        }
        let factor = if alpha == 1.0 { 0.0 } else { (alpha - 1.0) / t };
        for x in force.at_mut(j) {
            *x *= factor;
        }
    }
    Ok(FrictionForce {
        force,
        elapsed,
        excluded,
    })
}

/// `p_j = -dL/dv(v_j, q_j, tau_j) (t - tau_j)^(alpha - 1)` with
/// `v = D_gamma^{alpha,beta} q`.
#[derive(Clone, Debug)]
pub struct FractionalMomentum {
    pub momentum: SampledFunction,
    /// Kernel-pole nodes (`tau = t_obs`, `alpha < 1`); momentum set to zero.
    pub excluded: Vec<usize>,
}

pub fn fractional_momentum(
    q: &SampledFunction,
    lagrangian: &dyn Lagrangian,
    order: &OrderSpec,
) -> Result<FractionalMomentum> {
    let parts = partials_along_path(q, lagrangian, order)?;
    Ok(momentum_from_partial(&parts.d_v, order.alpha()))
}

pub(crate) fn momentum_from_partial(d_v: &SampledFunction, alpha: f64) -> FractionalMomentum {
    let g = *d_v.grid();
    let mut momentum = d_v.clone();
    let mut excluded = Vec::new();
    for j in 0..g.n_points() {
        let k = g.kernel(alpha, g.node(j));
        if !k.is_finite() {
            excluded.push(j);
            momentum.at_mut(j).fill(C64::new(0.0, 0.0));
            continue;
        }
        for x in momentum.at_mut(j) {
            *x = -(*x * k);
        }
    }
    FractionalMomentum { momentum, excluded }
}

/// Interior max-norm of `D_{-gamma}^{beta,alpha} C`; zero for a fractional
/// constant of motion.
pub fn constant_of_motion_defect(c: &SampledFunction, order: &OrderSpec) -> Result<f64> {
    Ok(combined_adjoint_side(c, order)?.interior_max())
}

/// Kernel-weighted form of the optimality condition,
/// `dL/dq K - D_{-gamma}^{beta,alpha} [dL/dv K]` with `K = (t - tau)^(alpha-1)`.
///
/// For `alpha = 1` this coincides with [`el_residual`]. For `alpha < 1` the
/// two differ by the commutator of the kernel with the fractional operator.
/// Kernel-pole nodes carry zero in the transported term and non-finite values
/// in the output.
pub fn kernel_weighted_el_residual(
    q: &SampledFunction,
    lagrangian: &dyn Lagrangian,
    order: &OrderSpec,
) -> Result<SampledFunction> {
    let parts = partials_along_path(q, lagrangian, order)?;
    let g = *q.grid();
    let alpha = order.alpha();
    let weighted = momentum_from_partial(&parts.d_v, alpha)
        .momentum
        .scale(C64::new(-1.0, 0.0));
    let transported = combined_adjoint_side(&weighted, order)?;
    let lq_k = parts.d_q.map_values(|z, tau| z * g.kernel(alpha, tau));
    lq_k.sub(&transported)
}
