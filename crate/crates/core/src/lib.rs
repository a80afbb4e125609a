//! Inexact ADMM for box-constrained, sparsity-promoting optimal control of
//! the heat equation on the unit square.
//!
//! The control-to-state map is discretized with P1 finite elements in space
//! and backward Euler in time. The nonsmooth problem
//! `min J(u) + gamma_s ||z||_1 + I_[a,b](z)` subject to `u = z` is solved by
//! [`admm::run_inadmm`], whose u-subproblems are solved by conjugate
//! gradients only to a summable sequence of tolerances.

// `!(x > 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod admm;
pub mod cg;
pub mod error;
pub mod field;
pub mod grid;
pub mod harness;
pub mod linalg;
pub mod metrics;
pub mod pde;
pub mod problems;
pub mod prox;
pub mod reduced;

pub use admm::{
    run_admm_exact, run_admm_observed, run_inadmm, run_pgd, AdmmParams, IterateTriple, IterationRecord, Method,
    SolveReport, SolveStatus, ThetaSchedule,
};
pub use error::{Error, Result};
pub use field::{ControlField, StateTrajectory};
pub use pde::Discretization;
pub use problems::{example1, example2, example3, example4, Problem, ProblemSpec};
