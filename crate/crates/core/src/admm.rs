//! Outer iterations: inexact ADMM, the exact-ADMM baseline and projected
//! gradient descent.
//!
//! One outer step of inexact ADMM from `(u^k, z^k, lambda^k)` with penalty
//! `beta_k` and tolerance `theta_k`:
//!
//! 1. `u^{k+1}`: CG on `H u = d`, warm-started at `u^k`, until
//!    `||sigma_k(u^{k+1})||_U <= theta_k`;
//! 2. `z^{k+1} = P_C(shrink(u^{k+1} - lambda^k / beta_k, gamma_s / beta_k))`;
//! 3. `lambda^{k+1} = lambda^k - beta_k (u^{k+1} - z^{k+1})`.
//!
//! The penalty follows a residual-balancing rule whose factors `1 + eta_k`
//! have a convergent product, so `beta_k` stays inside fixed bounds.

use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cg::{cg_solve, CgOutcome, CgStatus};
use crate::error::{Error, Result};
use crate::field::ControlField;
use crate::metrics::compute_metrics_with_state;
use crate::problems::Problem;
use crate::prox::{project_box, z_update};
use crate::reduced::ReducedOperator;

/// Inner tolerance below which the u-subproblem counts as solved exactly.
pub const EXACT_THRESHOLD: f64 = 1e-6;

const DIVERGENCE_NORM: f64 = 1e12;
const PR_FLOOR: f64 = 1e-12;
const ARMIJO_C: f64 = 1e-4;
const MAX_HALVINGS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThetaSchedule {
    /// `theta0 * q^k`.
    Geometric { q: f64 },
    /// `theta0 / k^alpha` (`theta0` at `k = 0`).
    Algebraic { alpha: f64 },
    Fixed { value: f64 },
}

impl ThetaSchedule {
    pub fn label(&self) -> String {
        match *self {
            ThetaSchedule::Geometric { q } => format!("theta0*{q}^k"),
            ThetaSchedule::Algebraic { alpha } => format!("theta0/k^{alpha}"),
            ThetaSchedule::Fixed { value } => format!("fixed {value:e}"),
        }
    }
}

impl fmt::Display for ThetaSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// `theta_k`, clamped below at `floor`.
pub fn theta_next(schedule: ThetaSchedule, k: usize, theta0: f64, floor: f64) -> f64 {
    let raw = match schedule {
        ThetaSchedule::Geometric { q } => theta0 * q.powi(k as i32),
        ThetaSchedule::Algebraic { alpha } => {
            if k == 0 {
                theta0
            } else {
                theta0 / (k as f64).powf(alpha)
            }
        }
        ThetaSchedule::Fixed { value } => value,
    };
    raw.max(floor)
}

/// Residual-balancing penalty update. Grows `beta` when
/// `beta_{k-1} ||z^{k-1} - z^k|| < ||u^k - z^k|| / 4`, shrinks it when the
/// inequality is reversed, keeps it on a tie.
pub fn beta_update(beta_k: f64, beta_km1: f64, eta_k: f64, dz_norm: f64, gap_norm: f64) -> f64 {
    let lhs = beta_km1 * dz_norm;
    let rhs = 0.25 * gap_norm;
    if lhs < rhs {
        (1.0 + eta_k) * beta_k
    } else if lhs > rhs {
        beta_k / (1.0 + eta_k)
    } else {
        beta_k
    }
}

/// `PR = beta ||z^k - z^{k-1}|| / ||z^{k-1}||` and
/// `DR = ||u^k - z^k|| / max(||u^k||, ||z^k||)`, norms in `U`.
///
/// `PR` is `+inf` when `z^{k-1} = 0` but `z^k` is not.
pub fn compute_residuals(
    problem: &Problem,
    current: &IterateTriple,
    previous: &IterateTriple,
    beta: f64,
) -> (f64, f64) {
    let disc = problem.disc();
    let dz = disc.unorm(&ControlField::lin_comb(1.0, &current.z, -1.0, &previous.z));
    let z_prev = disc.unorm(&previous.z);
    let pr = if z_prev == 0.0 && dz > 0.0 {
        f64::INFINITY
    } else {
        beta * dz / z_prev.max(PR_FLOOR)
    };
    let gap = disc.unorm(&ControlField::lin_comb(1.0, &current.u, -1.0, &current.z));
    let denom = disc.unorm(&current.u).max(disc.unorm(&current.z));
    let dr = if denom > 0.0 { gap / denom } else { 0.0 };
    (pr, dr)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmmParams {
    pub beta0: f64,
    pub beta1: f64,
    /// `eta_k = eta_base^{-k}`.
    pub eta_base: f64,
    pub theta: ThetaSchedule,
    /// Defaults to `||sigma_0(u^0)||_U / 2`.
    pub theta0: Option<f64>,
    pub tol: f64,
    pub max_outer: usize,
    pub exact_threshold: f64,
}

impl Default for AdmmParams {
    fn default() -> Self {
        AdmmParams {
            beta0: 2.0,
            beta1: 3.0,
            eta_base: 2.0,
            theta: ThetaSchedule::Geometric { q: 0.5 },
            theta0: None,
            tol: 1e-4,
            max_outer: 1000,
            exact_threshold: EXACT_THRESHOLD,
        }
    }
}

impl AdmmParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Parameter(msg));
        if !(self.beta0 > 0.0 && self.beta1 > 0.0) {
            return bad(format!("penalties must be positive, got ({}, {})", self.beta0, self.beta1));
        }
        if !(self.eta_base > 1.0) {
            return bad(format!("eta base must exceed 1 for a summable schedule, got {}", self.eta_base));
        }
        match self.theta {
            ThetaSchedule::Geometric { q } if !(q > 0.0 && q < 1.0) => {
                return bad(format!("geometric ratio must lie in (0, 1), got {q}"));
            }
            ThetaSchedule::Algebraic { alpha } if !(alpha > 1.0) => {
                return bad(format!("algebraic exponent must exceed 1, got {alpha}"));
            }
            ThetaSchedule::Fixed { value } if !(value > 0.0) => {
                return bad(format!("fixed tolerance must be positive, got {value}"));
            }
            _ => {}
        }
        if let Some(t0) = self.theta0 {
            if !(t0 > 0.0) {
                return bad(format!("theta0 must be positive, got {t0}"));
            }
        }
        if !(self.tol > 0.0) {
            return bad(format!("stopping tolerance must be positive, got {}", self.tol));
        }
        if self.max_outer == 0 {
            return bad("max_outer must be at least 1".into());
        }
        if !(self.exact_threshold > 0.0) {
            return bad(format!("exact threshold must be positive, got {}", self.exact_threshold));
        }
        Ok(())
    }

    pub fn eta(&self, k: usize) -> f64 {
        self.eta_base.powi(-(k as i32))
    }

    /// Bounds `beta1 / P <= beta_k <= beta1 * P` for `k >= 1`, with
    /// `P = prod_{k >= 1} (1 + eta_k)`.
    pub fn penalty_bounds(&self) -> (f64, f64) {
        let mut product = 1.0;
        let mut k = 1;
        loop {
            let eta = self.eta(k);
            if eta < 1e-18 || k > 10_000 {
                break;
            }
            product *= 1.0 + eta;
            k += 1;
        }
        (self.beta1 / product, self.beta1 * product)
    }

    /// Same settings with the inner tolerance pinned at the exact threshold.
    pub fn exact(&self) -> Self {
        AdmmParams {
            theta: ThetaSchedule::Fixed {
                value: self.exact_threshold,
            },
            ..*self
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterateTriple {
    pub u: ControlField,
    pub z: ControlField,
    pub lambda: ControlField,
}

impl IterateTriple {
    pub fn zeros(problem: &Problem) -> Self {
        let zero = problem.disc().zero_control();
        IterateTriple {
            u: zero.clone(),
            z: zero.clone(),
            lambda: zero,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    InAdmm,
    AdmmCg,
    Pgd,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::InAdmm => "inadmm",
            Method::AdmmCg => "admmcg",
            Method::Pgd => "pgd",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIter,
    LineSearchFailed,
}

/// One outer iteration. For PGD `beta` and `theta` are NaN, `pr` is the
/// relative iterate change and `dr` the relative projected-gradient norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub beta: f64,
    pub theta: f64,
    pub cg_iterations: usize,
    pub pr: f64,
    pub dr: f64,
    pub srd: f64,
    pub obj: f64,
    pub err_u: Option<f64>,
    /// Elapsed wall time since the start of the run.
    pub wall_ms: f64,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub method: Method,
    pub records: Vec<IterationRecord>,
    pub final_iterate: IterateTriple,
    pub status: SolveStatus,
    pub theta0: Option<f64>,
    pub wall_seconds: f64,
}

impl SolveReport {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    pub fn cg_ave(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        self.records.iter().map(|r| r.cg_iterations as f64).sum::<f64>() / self.records.len() as f64
    }

    pub fn cg_max(&self) -> usize {
        self.records.iter().map(|r| r.cg_iterations).max().unwrap_or(0)
    }

    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

/// What an observer sees after each ADMM step.
pub struct StepView<'a> {
    /// Outer index of the step, producing iterate `k + 1`.
    pub k: usize,
    pub beta: f64,
    pub theta: f64,
    pub previous: &'a IterateTriple,
    pub current: &'a IterateTriple,
    pub cg: &'a CgOutcome,
    pub record: &'a IterationRecord,
}

pub fn run_inadmm(problem: &Problem, params: &AdmmParams) -> Result<SolveReport> {
    run_admm_observed(problem, params, Method::InAdmm, &mut |_| {})
}

/// ADMM with every u-subproblem solved to the exact threshold.
pub fn run_admm_exact(problem: &Problem, params: &AdmmParams) -> Result<SolveReport> {
    run_admm_observed(problem, &params.exact(), Method::AdmmCg, &mut |_| {})
}

pub fn run_admm_observed(
    problem: &Problem,
    params: &AdmmParams,
    method: Method,
    observer: &mut dyn FnMut(&StepView<'_>),
) -> Result<SolveReport> {
    params.validate()?;
    let start = Instant::now();
    let disc = problem.disc();
    let bounds = problem.bounds();
    let gamma_s = problem.gamma_s();

    let mut current = IterateTriple::zeros(problem);
    let theta0 = match (params.theta, params.theta0) {
        (_, Some(t)) => Some(t),
        (ThetaSchedule::Fixed { .. }, None) => None,
        (_, None) => {
            // sigma_0 at the zero triple is the gradient offset.
            Some(0.5 * disc.unorm(problem.gradient_offset()))
        }
    };
    let mut betas = vec![params.beta0, params.beta1];
    let mut records = Vec::new();
    let mut status = SolveStatus::MaxIter;

    for k in 0..params.max_outer {
        let beta = betas[k];
        let theta = theta_next(params.theta, k, theta0.unwrap_or(0.0), params.exact_threshold);
        let op = ReducedOperator::new(problem, beta)?;
        let d = op.assemble_d(&current.z, &current.lambda)?;
        let cg = cg_solve(&op, &d, &current.u, theta)?;
        if cg.status == CgStatus::IterationCap {
            return Err(Error::InnerNotConverged {
                outer: k + 1,
                iterations: cg.iterations,
                residual: cg.final_residual,
                tol: theta,
            });
        }
        let u = cg.u.clone();
        let u_norm = disc.unorm(&u);
        if !(u_norm <= DIVERGENCE_NORM) {
            return Err(Error::Diverged { outer: k + 1, norm: u_norm });
        }
        let z = z_update(&u, &current.lambda, beta, gamma_s, bounds)?;
        let mut lambda = current.lambda.clone();
        lambda.axpy(-beta, &u);
        lambda.axpy(beta, &z);
        let next = IterateTriple { u, z, lambda };

        let (pr, dr) = compute_residuals(problem, &next, &current, beta);
        let pr = if k == 0 { f64::INFINITY } else { pr };
        let state = problem.state(&next.z)?;
        let metrics = compute_metrics_with_state(problem, &next.z, &state, &next.u)?;
        let record = IterationRecord {
            k: k + 1,
            beta,
            theta,
            cg_iterations: cg.iterations,
            pr,
            dr,
            srd: metrics.srd.unwrap_or(f64::NAN),
            obj: metrics.obj,
            err_u: metrics.err_u,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        };
        observer(&StepView {
            k,
            beta,
            theta,
            previous: &current,
            current: &next,
            cg: &cg,
            record: &record,
        });
        records.push(record);

        // beta_{k+2} from iterates k and k+1.
        let dz = disc.unorm(&ControlField::lin_comb(1.0, &current.z, -1.0, &next.z));
        let gap = disc.unorm(&ControlField::lin_comb(1.0, &next.u, -1.0, &next.z));
        betas.push(beta_update(betas[k + 1], betas[k], params.eta(k + 1), dz, gap));

        current = next;
        if k >= 1 && pr.max(dr) <= params.tol {
            status = SolveStatus::Converged;
            break;
        }
    }

    Ok(SolveReport {
        method,
        records,
        final_iterate: current,
        status,
        theta0,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Projected gradient descent with Armijo backtracking; smooth problems only.
///
/// Stops when `||u^{k+1} - u^k|| / max(1, ||u^k||) <= tol`.
pub fn run_pgd(problem: &Problem, params: &AdmmParams) -> Result<SolveReport> {
    if problem.gamma_s() != 0.0 {
        return Err(Error::Parameter(format!(
            "projected gradient needs a smooth objective, got gamma_s = {}",
            problem.gamma_s()
        )));
    }
    if !(params.tol > 0.0) || params.max_outer == 0 {
        return Err(Error::Parameter("PGD needs tol > 0 and max_outer >= 1".into()));
    }
    let start = Instant::now();
    let disc = problem.disc();
    let bounds = problem.bounds();

    // P_C(0); equals the zero guess whenever 0 is feasible.
    let mut u = project_box(&disc.zero_control(), bounds);
    let mut state = problem.state(&u)?;
    let mut j = problem.objective_j_with_state(&u, &state)?;
    let mut records = Vec::new();
    let mut status = SolveStatus::MaxIter;

    for k in 0..params.max_outer {
        let grad = problem.gradient_with_state(&u, &state)?;
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let mut trial = u.clone();
            trial.axpy(-step, &grad);
            let trial = project_box(&trial, bounds);
            let gmap = ControlField::lin_comb(1.0 / step, &u, -1.0 / step, &trial);
            let gmap_sq = disc.inner_u(&gmap, &gmap);
            let trial_state = problem.state(&trial)?;
            let trial_j = problem.objective_j_with_state(&trial, &trial_state)?;
            if trial_j <= j - ARMIJO_C * step * gmap_sq {
                accepted = Some((trial, trial_state, trial_j, gmap_sq.sqrt()));
                break;
            }
            step *= 0.5;
        }
        let Some((next, next_state, next_j, gmap_norm)) = accepted else {
            status = SolveStatus::LineSearchFailed;
            break;
        };
        let scale = disc.unorm(&u).max(1.0);
        let change = disc.unorm(&ControlField::lin_comb(1.0, &next, -1.0, &u)) / scale;
        let metrics = compute_metrics_with_state(problem, &next, &next_state, &next)?;
        records.push(IterationRecord {
            k: k + 1,
            beta: f64::NAN,
            theta: f64::NAN,
            cg_iterations: 0,
            pr: change,
            dr: gmap_norm / scale,
            srd: metrics.srd.unwrap_or(f64::NAN),
            obj: metrics.obj,
            err_u: metrics.err_u,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        });
        u = next;
        state = next_state;
        j = next_j;
        if change <= params.tol {
            status = SolveStatus::Converged;
            break;
        }
    }

    Ok(SolveReport {
        method: Method::Pgd,
        records,
        final_iterate: IterateTriple {
            z: u.clone(),
            lambda: disc.zero_control(),
            u,
        },
        status,
        theta0: None,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Dispatches on `method`.
pub fn solve(problem: &Problem, params: &AdmmParams, method: Method) -> Result<SolveReport> {
    match method {
        Method::InAdmm => run_inadmm(problem, params),
        Method::AdmmCg => run_admm_exact(problem, params),
        Method::Pgd => run_pgd(problem, params),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_schedules() {
        let g = ThetaSchedule::Geometric { q: 0.5 };
        let a = ThetaSchedule::Algebraic { alpha: 3.0 };
        assert_eq!(theta_next(g, 3, 8.0, 1e-6), 1.0);
        assert_eq!(theta_next(a, 2, 8.0, 1e-6), 1.0);
        assert_eq!(theta_next(a, 0, 8.0, 1e-6), 8.0);
        assert_eq!(theta_next(g, 200, 8.0, 1e-6), 1e-6);
        assert_eq!(theta_next(a, 100_000, 8.0, 1e-6), 1e-6);
        assert_eq!(theta_next(ThetaSchedule::Fixed { value: 1e-6 }, 7, 8.0, 1e-6), 1e-6);
    }

    #[test]
    fn beta_rule_branches() {
        assert_eq!(beta_update(2.0, 1.0, 0.0, 1.0, 100.0), 2.0);
        assert_eq!(beta_update(2.0, 1.0, 0.5, 1.0, 100.0), 3.0);
        assert_eq!(beta_update(3.0, 1.0, 0.5, 10.0, 1.0), 2.0);
        // Tie: 1 * 1 == 4 / 4.
        assert_eq!(beta_update(2.0, 1.0, 0.5, 1.0, 4.0), 2.0);
    }

    #[test]
    fn penalty_bounds_use_eta_product() {
        let p = AdmmParams::default();
        let (lo, hi) = p.penalty_bounds();
        let product: f64 = (1..60).map(|k| 1.0 + 0.5f64.powi(k)).product();
        assert!((hi / p.beta1 - product).abs() < 1e-12);
        assert!((p.beta1 / lo - product).abs() < 1e-12);
    }

    #[test]
    fn params_validation() {
        let base = AdmmParams::default();
        assert!(base.validate().is_ok());
        let bad = [
            AdmmParams { beta0: 0.0, ..base },
            AdmmParams { eta_base: 1.0, ..base },
            AdmmParams { theta: ThetaSchedule::Geometric { q: 1.0 }, ..base },
            AdmmParams { theta: ThetaSchedule::Algebraic { alpha: 1.0 }, ..base },
            AdmmParams { tol: 0.0, ..base },
            AdmmParams { max_outer: 0, ..base },
        ];
        for p in bad {
            assert!(p.validate().is_err(), "{p:?}");
        }
    }
}
