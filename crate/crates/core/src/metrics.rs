//! Quality metrics of an iterate: state relative distance, objective value
//! and (for manufactured problems) the control error.

use crate::error::Result;
use crate::field::{ControlField, StateTrajectory};
use crate::problems::Problem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    /// `||S(z) - y_d|| / ||y_d||`; `None` when `y_d = 0`.
    pub srd: Option<f64>,
    /// `J(z) + gamma_s ||z||_1`.
    pub obj: f64,
    /// `||u - u*||_U` when the exact control is known.
    pub err_u: Option<f64>,
}

pub fn compute_metrics(problem: &Problem, z: &ControlField, u: &ControlField) -> Result<Metrics> {
    let state = problem.state(z)?;
    compute_metrics_with_state(problem, z, &state, u)
}

/// As [`compute_metrics`] with `state = S(z)` already available.
pub fn compute_metrics_with_state(
    problem: &Problem,
    z: &ControlField,
    state: &StateTrajectory,
    u: &ControlField,
) -> Result<Metrics> {
    let disc = problem.disc();
    let residual = problem.tracking_residual(state);
    let dist = disc.norm_y(&residual)?;
    let srd = (problem.target_norm() > 0.0).then(|| dist / problem.target_norm());
    let mut obj = 0.5 * problem.gamma_d() * dist * dist + 0.5 * disc.dot_u(z, z)?;
    if problem.gamma_s() > 0.0 {
        obj += problem.gamma_s() * disc.l1_u(z)?;
    }
    let err_u = match problem.exact_control() {
        Some(exact) => Some(disc.norm_u(&ControlField::lin_comb(1.0, u, -1.0, exact))?),
        None => None,
    };
    Ok(Metrics { srd, obj, err_u })
}
