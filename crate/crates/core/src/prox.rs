//! Pointwise proximal maps for `R(z) = gamma_s ||z||_1 + I_[a,b](z)`.

use crate::error::{Error, Result};
use crate::field::ControlField;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxBounds {
    pub lower: f64,
    pub upper: f64,
}

impl BoxBounds {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower <= upper) {
            return Err(Error::Parameter(format!("box bounds require a <= b, got [{lower}, {upper}]")));
        }
        Ok(BoxBounds { lower, upper })
    }

    #[inline]
    pub fn clamp(&self, v: f64) -> f64 {
        v.max(self.lower).min(self.upper)
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lower && v <= self.upper
    }
}

#[inline]
pub fn shrink(v: f64, kappa: f64) -> f64 {
    v.signum() * (v.abs() - kappa).max(0.0)
}

pub fn project_box(v: &ControlField, bounds: BoxBounds) -> ControlField {
    v.map(|x| bounds.clamp(x))
}

pub fn soft_threshold(v: &ControlField, kappa: f64) -> Result<ControlField> {
    if !(kappa >= 0.0) {
        return Err(Error::Parameter(format!("threshold must be nonnegative, got {kappa}")));
    }
    Ok(v.map(|x| shrink(x, kappa)))
}

/// Closed-form minimizer of
/// `gamma_s |z| + I_[a,b](z) + beta/2 (z - (u - lambda/beta))^2` at every node:
/// soft-threshold by `gamma_s / beta`, then clamp.
pub fn z_update(
    u: &ControlField,
    lambda: &ControlField,
    beta: f64,
    gamma_s: f64,
    bounds: BoxBounds,
) -> Result<ControlField> {
    if !(beta > 0.0) {
        return Err(Error::Parameter(format!("penalty must be positive, got {beta}")));
    }
    if !(gamma_s >= 0.0) {
        return Err(Error::Parameter(format!("sparsity weight must be nonnegative, got {gamma_s}")));
    }
    u.check_shape(lambda)?;
    let kappa = gamma_s / beta;
    let inv_beta = 1.0 / beta;
    Ok(u.zip_map(lambda, |uv, lv| bounds.clamp(shrink(uv - inv_beta * lv, kappa))))
}
