//! Matrix-free conjugate gradients for `H u = d` in the `U` inner product.

use crate::error::{Error, Result};
use crate::field::ControlField;
use crate::reduced::ReducedOperator;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOptions {
    /// Stop once `||H u - d||_U <= tol`.
    pub tol: f64,
    /// Defaults to the space-time control dimension.
    pub max_iter: Option<usize>,
    /// Recompute the true residual every this many steps and record it
    /// next to the recursive one.
    pub drift_check_every: Option<usize>,
}

impl CgOptions {
    pub fn with_tol(tol: f64) -> Self {
        CgOptions {
            tol,
            max_iter: None,
            drift_check_every: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CgStatus {
    Converged,
    IterationCap,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftCheck {
    pub step: usize,
    pub recursive: f64,
    pub true_residual: f64,
}

#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub u: ControlField,
    pub iterations: usize,
    /// True residual `||H u - d||_U` of the returned iterate.
    pub final_residual: f64,
    /// Recursive residual norm after each step, starting with the initial one.
    pub residual_history: Vec<f64>,
    pub status: CgStatus,
    pub drift_checks: Vec<DriftCheck>,
    /// Applications of `H`, including residual recomputations.
    pub operator_applications: usize,
}

pub fn cg_solve(op: &ReducedOperator<'_>, d: &ControlField, u0: &ControlField, tol: f64) -> Result<CgOutcome> {
    cg_solve_with(op, d, u0, CgOptions::with_tol(tol))
}

pub fn cg_solve_with(
    op: &ReducedOperator<'_>,
    d: &ControlField,
    u0: &ControlField,
    options: CgOptions,
) -> Result<CgOutcome> {
    if !(options.tol > 0.0) {
        return Err(Error::Parameter(format!("CG tolerance must be positive, got {}", options.tol)));
    }
    d.check_shape(u0)?;
    let disc = op.problem().disc();
    let cap = options.max_iter.unwrap_or(d.n_nodes() * d.n_t());
    let mut applications = 0usize;
    let residual_of = |u: &ControlField, applications: &mut usize| -> Result<ControlField> {
        *applications += 1;
        let mut r = op.apply_h(u)?;
        r.scale(-1.0);
        r.axpy(1.0, d);
        Ok(r)
    };

    let mut u = u0.clone();
    let mut r = if u0.values().iter().all(|&v| v == 0.0) {
        d.clone()
    } else {
        residual_of(&u, &mut applications)?
    };
    let mut rr = disc.inner_u(&r, &r);
    let mut history = vec![rr.sqrt()];
    let mut drift_checks = Vec::new();
    if rr.sqrt() <= options.tol {
        return Ok(CgOutcome {
            u,
            iterations: 0,
            final_residual: rr.sqrt(),
            residual_history: history,
            status: CgStatus::Converged,
            drift_checks,
            operator_applications: applications,
        });
    }

    let mut q = r.clone();
    let mut iterations = 0;
    loop {
        if iterations >= cap {
            let true_res = disc.unorm(&residual_of(&u, &mut applications)?);
            return Ok(CgOutcome {
                u,
                iterations,
                final_residual: true_res,
                residual_history: history,
                status: CgStatus::IterationCap,
                drift_checks,
                operator_applications: applications,
            });
        }
        applications += 1;
        let hq = op.apply_h(&q)?;
        let curvature = disc.inner_u(&hq, &q);
        if !(curvature > 0.0) {
            return Err(Error::NotPositiveDefinite {
                step: iterations,
                curvature,
            });
        }
        let alpha = disc.inner_u(&r, &q) / curvature;
        u.axpy(alpha, &q);
        r.axpy(-alpha, &hq);
        iterations += 1;
        let rr_new = disc.inner_u(&r, &r);
        history.push(rr_new.sqrt());

        if let Some(every) = options.drift_check_every {
            if every > 0 && iterations % every == 0 {
                let true_r = residual_of(&u, &mut applications)?;
                drift_checks.push(DriftCheck {
                    step: iterations,
                    recursive: rr_new.sqrt(),
                    true_residual: disc.unorm(&true_r),
                });
            }
        }

        if rr_new.sqrt() <= options.tol {
            // Certify on the true residual; restart from it if the recursion drifted.
            let true_r = residual_of(&u, &mut applications)?;
            let true_res = disc.unorm(&true_r);
            if true_res <= options.tol {
                return Ok(CgOutcome {
                    u,
                    iterations,
                    final_residual: true_res,
                    residual_history: history,
                    status: CgStatus::Converged,
                    drift_checks,
                    operator_applications: applications,
                });
            }
            r = true_r;
            rr = true_res * true_res;
            q = r.clone();
            continue;
        }

        let rho = rr_new / rr;
        q.scale(rho);
        q.axpy(1.0, &r);
        rr = rr_new;
    }
}
