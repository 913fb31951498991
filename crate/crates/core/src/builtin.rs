//! Built-in Lagrangians. All are written with the bilinear square `v . v`
//! so they stay holomorphic in the velocity slot.

use crate::action::Lagrangian;
use crate::ops::dot;
use crate::C64;

/// `L = m/2 v.v`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Free {
    pub mass: f64,
    pub dim: usize,
}

impl Free {
    pub fn new(mass: f64) -> Self {
        Free { mass, dim: 1 }
    }
}

impl Default for Free {
    fn default() -> Self {
        Free::new(1.0)
    }
}

impl Lagrangian for Free {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, v: &[C64], _q: &[C64], _tau: f64) -> C64 {
        0.5 * self.mass * dot(v, v)
    }
    fn d_v(&self, v: &[C64], _q: &[C64], _tau: f64, out: &mut [C64]) {
        for (o, x) in out.iter_mut().zip(v) {
            *o = self.mass * x;
        }
    }
    fn d_q(&self, _v: &[C64], _q: &[C64], _tau: f64, out: &mut [C64]) {
        out.fill(C64::new(0.0, 0.0));
    }
}

/// `L = m/2 v.v - k/2 q.q`. Negative stiffness gives the hyperbolic case.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Oscillator {
    pub mass: f64,
    pub stiffness: f64,
    pub dim: usize,
}

impl Oscillator {
    pub fn new(mass: f64, stiffness: f64) -> Self {
        Oscillator {
            mass,
            stiffness,
            dim: 1,
        }
    }
}

impl Lagrangian for Oscillator {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, v: &[C64], q: &[C64], _tau: f64) -> C64 {
        0.5 * self.mass * dot(v, v) - 0.5 * self.stiffness * dot(q, q)
    }
    fn d_v(&self, v: &[C64], _q: &[C64], _tau: f64, out: &mut [C64]) {
        for (o, x) in out.iter_mut().zip(v) {
            *o = self.mass * x;
        }
    }
    fn d_q(&self, _v: &[C64], q: &[C64], _tau: f64, out: &mut [C64]) {
        for (o, x) in out.iter_mut().zip(q) {
            *o = -self.stiffness * x;
        }
    }
}

/// A Lagrangian linear in the velocity: `L = c q.v - k/2 q.q`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearVelocity {
    pub coupling: f64,
    pub stiffness: f64,
    pub dim: usize,
}

impl LinearVelocity {
    pub fn new(coupling: f64, stiffness: f64) -> Self {
        LinearVelocity {
            coupling,
            stiffness,
            dim: 1,
        }
    }
}

impl Lagrangian for LinearVelocity {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, v: &[C64], q: &[C64], _tau: f64) -> C64 {
        self.coupling * dot(q, v) - 0.5 * self.stiffness * dot(q, q)
    }
    fn d_v(&self, _v: &[C64], q: &[C64], _tau: f64, out: &mut [C64]) {
        for (o, x) in out.iter_mut().zip(q) {
            *o = self.coupling * x;
        }
    }
    fn d_q(&self, v: &[C64], q: &[C64], _tau: f64, out: &mut [C64]) {
        for ((o, x), y) in out.iter_mut().zip(v).zip(q) {
            *o = self.coupling * x - self.stiffness * y;
        }
    }
}
