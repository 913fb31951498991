//! Fractional action-like variational calculus with Riemann-Liouville
//! derivatives of order `(alpha, beta)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`grid`]: uniform time grids carrying the observer time, sampled
//!   (complex, vector-valued) functions, order triples and the gamma function.
//! * [`ops`]: discrete left/right Riemann-Liouville integrals and derivatives,
//!   the combined operator `D_gamma^{alpha,beta}` and its adjoint-side
//!   counterpart `D_{-gamma}^{beta,alpha}`.
//! * [`action`]: Lagrangians, control problems and the weighted action
//!   integrals (plain, control and augmented form).
//! * [`optimality`]: Euler-Lagrange residuals, the decaying friction force,
//!   fractional momentum and constants of motion.
//! * [`hamiltonian`]: the fractional Hamiltonian, residuals of the
//!   Hamiltonian system and the Poisson bracket.
//! * [`solver`]: direct minimisation of the discretised action.
//! * [`suites`]: canned verification sweeps used by the command-line tool.
//!
//! Node-wise work (convolution sums, residual assembly, sweeps) runs on rayon
//! when the `parallel` feature is enabled, see [`exec`].

pub mod action;
pub mod builtin;
pub mod error;
pub mod exec;
pub mod grid;
pub mod hamiltonian;
pub mod ops;
pub mod optimality;
pub mod solver;
pub mod special;
pub mod suites;

pub use error::{Error, Result};
pub use grid::{Grid, OrderSpec, SampledFunction};

/// Complex scalar used for every sampled value.
pub type C64 = num_complex::Complex64;
