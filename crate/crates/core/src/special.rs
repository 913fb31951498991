//! Euler gamma function.

use crate::{Error, Result};

/// Γ(x) for real `x`. Non-positive integers are poles.
pub fn gamma(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::domain("x", "NaN argument"));
    }
    if x <= 0.0 && x == x.floor() {
        return Err(Error::GammaPole(x));
    }
    Ok(libm::tgamma(x))
}
