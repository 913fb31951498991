//! Discrete Riemann-Liouville operators on uniform grids.
//!
//! * Integrals use product integration: the smooth factor is replaced by its
//!   piecewise-linear interpolant and integrated exactly against the kernel,
//!   which absorbs the integrable singularity of `(t - s)^(alpha - 1)`.
//! * Derivatives of order `alpha` in `(0, 1]` use the Grünwald-Letnikov sum
//!   `h^-alpha * sum_k g_k f_{j-k}`, first-order accurate away from the
//!   left endpoint. At `alpha = 1` it is the backward difference.
//!
//! Right-sided operators are the reflections of the left-sided ones
//! (`tau -> a + b - tau`). For the derivative matrices this makes the right
//! operator exactly the transpose of the left one, so the discrete
//! integration-by-parts identity holds up to the quadrature end weights.

use crate::exec::{self, Strategy};
use crate::grid::{OrderSpec, SampledFunction};
use crate::special::gamma;
use crate::{Error, Result, C64};

/// One of the six operators, with its order(s).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OperatorKind {
    LeftIntegral(f64),
    RightIntegral(f64),
    LeftDerivative(f64),
    RightDerivative(f64),
    /// `D_gamma^{alpha,beta}`.
    Combined(OrderSpec),
    /// `D_{-gamma}^{beta,alpha}` for the given `(alpha, beta, gamma)`.
    CombinedAdjointSide(OrderSpec),
}

impl OperatorKind {
    pub fn apply(&self, f: &SampledFunction) -> Result<SampledFunction> {
        self.apply_with(f, Strategy::Auto)
    }

    pub fn apply_with(&self, f: &SampledFunction, strategy: Strategy) -> Result<SampledFunction> {
        let h = f.grid().step();
        match *self {
            OperatorKind::LeftIntegral(alpha) => {
                check_integral_order(alpha)?;
                let w = ProductWeights::new(alpha, f.len())?;
                f.map_components(|col| Ok(w.apply(col, h, strategy)))
            }
            OperatorKind::RightIntegral(alpha) => {
                check_integral_order(alpha)?;
                let w = ProductWeights::new(alpha, f.len())?;
                f.map_components(|col| Ok(reflect_apply(col, |c| w.apply(c, h, strategy))))
            }
            OperatorKind::LeftDerivative(alpha) => {
                check_derivative_order(alpha)?;
                let w = GlWeights::new(alpha, f.len());
                f.map_components(|col| Ok(w.apply(col, h, strategy)))
            }
            OperatorKind::RightDerivative(alpha) => {
                check_derivative_order(alpha)?;
                let w = GlWeights::new(alpha, f.len());
                f.map_components(|col| Ok(reflect_apply(col, |c| w.apply(c, h, strategy))))
            }
            OperatorKind::Combined(order) => combined(f, &order, strategy),
            OperatorKind::CombinedAdjointSide(order) => combined(f, &order.adjoint(), strategy),
        }
    }
}

fn check_integral_order(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::domain(
            "alpha",
            format!("integral order must be positive, got {alpha}"),
        ));
    }
    Ok(())
}

fn check_derivative_order(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::domain(
            "alpha",
            format!("derivative order must lie in (0, 1], got {alpha}"),
        ));
    }
    Ok(())
}

fn reflect_apply(col: &[C64], op: impl FnOnce(&[C64]) -> Vec<C64>) -> Vec<C64> {
    let rev: Vec<C64> = col.iter().rev().copied().collect();
    let mut out = op(&rev);
    out.reverse();
    out
}

/// Grünwald-Letnikov weights `g_k = (-1)^k binom(alpha, k)`.
#[derive(Clone, Debug)]
pub struct GlWeights {
    alpha: f64,
    coeffs: Vec<f64>,
}

impl GlWeights {
    pub fn new(alpha: f64, len: usize) -> Self {
        let mut coeffs = Vec::with_capacity(len);
        let mut g = 1.0;
        for k in 0..len {
            if k > 0 {
                g *= 1.0 - (alpha + 1.0) / k as f64;
            }
            coeffs.push(g);
        }
        GlWeights { alpha, coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `out_j = h^-alpha * sum_{k=0}^{j} g_k f_{j-k}`.
    pub fn apply(&self, f: &[C64], h: f64, strategy: Strategy) -> Vec<C64> {
        let scale = h.powf(-self.alpha);
        let g = &self.coeffs;
        exec::map_indices(f.len(), strategy, |j| {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..=j {
                acc += f[j - k] * g[k];
            }
            acc * scale
        })
    }
}

/// Product-integration (fractional trapezoid) weights for the left integral.
#[derive(Clone, Debug)]
pub struct ProductWeights {
    alpha: f64,
    /// `c_m` for the interior weights, indexed by distance `m = j - k`.
    interior: Vec<f64>,
    /// First-node weight `a_{0,j}`, indexed by `j`.
    first: Vec<f64>,
    norm: f64,
}

impl ProductWeights {
    pub fn new(alpha: f64, len: usize) -> Result<Self> {
        let p = alpha + 1.0;
        let pw = |x: f64| if x <= 0.0 { 0.0 } else { x.powf(p) };
        let interior = (0..len)
            .map(|m| {
                if m == 0 {
                    1.0
                } else {
                    let m = m as f64;
                    pw(m + 1.0) - 2.0 * pw(m) + pw(m - 1.0)
                }
            })
            .collect();
        let first = (0..len)
            .map(|j| {
                if j == 0 {
                    0.0
                } else {
                    let jf = j as f64;
                    pw(jf - 1.0) - (jf - 1.0 - alpha) * jf.powf(alpha)
                }
            })
            .collect();
        Ok(ProductWeights {
            alpha,
            interior,
            first,
            norm: 1.0 / gamma(alpha + 2.0)?,
        })
    }

    pub fn apply(&self, f: &[C64], h: f64, strategy: Strategy) -> Vec<C64> {
        let scale = h.powf(self.alpha) * self.norm;
        exec::map_indices(f.len(), strategy, |j| {
            if j == 0 {
                return C64::new(0.0, 0.0);
            }
            let mut acc = f[0] * self.first[j];
            for (fk, w) in f[1..=j].iter().zip(self.interior[..j].iter().rev()) {
                acc += fk * w;
            }
            acc * scale
        })
    }
}

fn combined(f: &SampledFunction, order: &OrderSpec, strategy: Strategy) -> Result<SampledFunction> {
    let cl = order.left_coeff();
    let cr = order.right_coeff();
    let h = f.grid().step();
    let left = GlWeights::new(order.alpha(), f.len());
    let right = GlWeights::new(order.beta(), f.len());
    f.map_components(|col| {
        let l = left.apply(col, h, strategy);
        let r = reflect_apply(col, |c| right.apply(c, h, strategy));
        Ok(l.iter().zip(&r).map(|(l, r)| cl * l - cr * r).collect())
    })
}

/// `I_{a+}^alpha f`; zero at the first node.
pub fn left_rl_integral(f: &SampledFunction, alpha: f64) -> Result<SampledFunction> {
    OperatorKind::LeftIntegral(alpha).apply(f)
}

/// `I_{b-}^alpha f`; zero at the last node.
pub fn right_rl_integral(f: &SampledFunction, alpha: f64) -> Result<SampledFunction> {
    OperatorKind::RightIntegral(alpha).apply(f)
}

/// `D_{a+}^alpha f`, `alpha` in `(0, 1]`.
pub fn left_rl_derivative(f: &SampledFunction, alpha: f64) -> Result<SampledFunction> {
    OperatorKind::LeftDerivative(alpha).apply(f)
}

/// `D_{b-}^alpha f` with the `(-d/dt)` sign convention, so that
/// `D_{b-}^1 f = -f'`.
pub fn right_rl_derivative(f: &SampledFunction, alpha: f64) -> Result<SampledFunction> {
    OperatorKind::RightDerivative(alpha).apply(f)
}

/// `D_gamma^{alpha,beta} f = (1 + i gamma)/2 D_{a+}^alpha f - (1 - i gamma)/2 D_{b-}^beta f`.
pub fn combined_derivative(f: &SampledFunction, order: &OrderSpec) -> Result<SampledFunction> {
    OperatorKind::Combined(*order).apply(f)
}

/// `D_{-gamma}^{beta,alpha} g`, the operator that appears on the other side
/// of the integration-by-parts identity.
pub fn combined_adjoint_side(g: &SampledFunction, order: &OrderSpec) -> Result<SampledFunction> {
    OperatorKind::CombinedAdjointSide(*order).apply(g)
}

/// Bilinear (unconjugated) pairing of two d-vectors.
pub(crate) fn dot(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

const BOUNDARY_TOL: f64 = 1e-12;

/// `int (D_gamma^{alpha,beta} f) g + int f (D_{-gamma}^{beta,alpha} g)` by the
/// trapezoidal rule. Requires `f` or `g` to vanish at both endpoints.
pub fn ibp_defect(f: &SampledFunction, g: &SampledFunction, order: &OrderSpec) -> Result<C64> {
    f.check_compatible(g)?;
    let n = f.len();
    let vanishes = |s: &SampledFunction| s.magnitude(0) <= BOUNDARY_TOL && s.magnitude(n - 1) <= BOUNDARY_TOL;
    if !vanishes(f) && !vanishes(g) {
        return Err(Error::Precondition(format!(
            "neither function vanishes at both endpoints (|f(a)| = {:e}, |f(b)| = {:e}, |g(a)| = {:e}, |g(b)| = {:e})",
            f.magnitude(0),
            f.magnitude(n - 1),
            g.magnitude(0),
            g.magnitude(n - 1)
        )));
    }
    let df = combined_derivative(f, order)?;
    let dg = combined_adjoint_side(g, order)?;
    let integrand: Vec<C64> = (0..n)
        .map(|j| dot(df.at(j), g.at(j)) + dot(f.at(j), dg.at(j)))
        .collect();
    Ok(f.grid().trapezoid(&integrand))
}
