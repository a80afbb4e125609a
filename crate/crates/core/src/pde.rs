//! Backward-Euler state solver and its exact discrete adjoint.
//!
//! With `A = M + tau (nu K + a0 M)` the forward map is
//! `A y^n = M y^{n-1} + tau (B u^n + M f^n)`. The adjoint is the transpose of
//! that recursion with respect to the discrete `U` and `Y` inner products, so
//! `<S u, w>_Y = <u, S* w>_U` holds to rounding error.

use crate::error::{Error, Result};
use crate::field::{ControlField, StateTrajectory};
use crate::grid::{assemble_with, AssembledOperators, Grid};
use crate::linalg::{dot, BandedCholesky, CsrMatrix};

#[derive(Debug, Clone)]
pub struct Discretization {
    grid: Grid,
    ops: AssembledOperators,
    system: CsrMatrix,
    system_factor: BandedCholesky,
    control_mass_factor: BandedCholesky,
    control_lump: Vec<f64>,
    tau: f64,
}

impl Discretization {
    pub fn new(grid: Grid, nu: f64, a0: f64) -> Result<Self> {
        Self::with_mass_lumping(grid, nu, a0, false)
    }

    pub fn with_mass_lumping(grid: Grid, nu: f64, a0: f64, lumped: bool) -> Result<Self> {
        let ops = assemble_with(&grid, nu, a0, lumped)?;
        let tau = grid.tau();
        let diffusion = ops.stiffness.linear_combination(nu, &ops.reaction, 1.0);
        let system = ops.mass.linear_combination(1.0, &diffusion, tau);
        let system_factor = BandedCholesky::factor(&system)?;
        let control_mass_factor = BandedCholesky::factor(&ops.control_mass)?;
        let control_lump = ops.control_mass.row_sums();
        Ok(Discretization {
            grid,
            ops,
            system,
            system_factor,
            control_mass_factor,
            control_lump,
            tau,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn ops(&self) -> &AssembledOperators {
        &self.ops
    }

    /// The time-step matrix `A`.
    pub fn system(&self) -> &CsrMatrix {
        &self.system
    }

    pub fn system_factor(&self) -> &BandedCholesky {
        &self.system_factor
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn nu(&self) -> f64 {
        self.ops.nu
    }

    pub fn a0(&self) -> f64 {
        self.ops.a0
    }

    pub fn n_t(&self) -> usize {
        self.grid.n_t()
    }

    pub fn n_state(&self) -> usize {
        self.grid.n_state()
    }

    pub fn n_control(&self) -> usize {
        self.grid.n_control()
    }

    pub fn zero_control(&self) -> ControlField {
        ControlField::zeros(self.n_control(), self.n_t())
    }

    pub fn zero_state(&self) -> StateTrajectory {
        StateTrajectory::zeros(self.n_state(), self.n_t())
    }

    /// Nodal weights `M_G 1` used for the discrete L1 norm.
    pub fn control_lump(&self) -> &[f64] {
        &self.control_lump
    }

    fn check_control(&self, u: &ControlField) -> Result<()> {
        if u.n_nodes() != self.n_control() || u.n_t() != self.n_t() {
            return Err(Error::Dimension(format!(
                "control field is {}x{}, grid expects {}x{}",
                u.n_nodes(),
                u.n_t(),
                self.n_control(),
                self.n_t()
            )));
        }
        Ok(())
    }

    fn check_state(&self, y: &StateTrajectory) -> Result<()> {
        if y.n_nodes() != self.n_state() || y.n_t() != self.n_t() {
            return Err(Error::Dimension(format!(
                "state trajectory is {}x{}, grid expects {}x{}",
                y.n_nodes(),
                y.n_t(),
                self.n_state(),
                self.n_t()
            )));
        }
        Ok(())
    }

    /// `tau * sum_n (u1^n)^T M_G u2^n`.
    pub fn dot_u(&self, u1: &ControlField, u2: &ControlField) -> Result<f64> {
        self.check_control(u1)?;
        self.check_control(u2)?;
        Ok(self.inner_u(u1, u2))
    }

    pub fn norm_u(&self, u: &ControlField) -> Result<f64> {
        Ok(self.dot_u(u, u)?.max(0.0).sqrt())
    }

    /// `tau * sum_{n >= 1} (y1^n)^T M y2^n`; level 0 is excluded.
    pub fn dot_y(&self, y1: &StateTrajectory, y2: &StateTrajectory) -> Result<f64> {
        self.check_state(y1)?;
        self.check_state(y2)?;
        Ok(self.inner_y(y1, y2))
    }

    pub fn norm_y(&self, y: &StateTrajectory) -> Result<f64> {
        Ok(self.dot_y(y, y)?.max(0.0).sqrt())
    }

    pub(crate) fn inner_u(&self, u1: &ControlField, u2: &ControlField) -> f64 {
        debug_assert!(u1.same_shape(u2));
        (1..=self.n_t())
            .map(|n| self.ops.control_mass.bilinear(u1.level(n), u2.level(n)))
            .sum::<f64>()
            * self.tau
    }

    pub(crate) fn unorm(&self, u: &ControlField) -> f64 {
        self.inner_u(u, u).max(0.0).sqrt()
    }

    pub(crate) fn inner_y(&self, y1: &StateTrajectory, y2: &StateTrajectory) -> f64 {
        (1..=self.n_t())
            .map(|n| self.ops.mass.bilinear(y1.level(n), y2.level(n)))
            .sum::<f64>()
            * self.tau
    }

    /// `tau * sum_n lump^T |u^n|`.
    pub fn l1_u(&self, u: &ControlField) -> Result<f64> {
        self.check_control(u)?;
        Ok((1..=self.n_t())
            .map(|n| u.level(n).iter().zip(&self.control_lump).map(|(v, w)| v.abs() * w).sum::<f64>())
            .sum::<f64>()
            * self.tau)
    }

    /// Marches the state equation forward from `phi` (zero when absent).
    pub fn solve_forward(
        &self,
        u: Option<&ControlField>,
        f: Option<&StateTrajectory>,
        phi: Option<&[f64]>,
    ) -> Result<StateTrajectory> {
        if let Some(u) = u {
            self.check_control(u)?;
            if !u.is_finite() {
                return Err(Error::Data("control has non-finite entries".into()));
            }
        }
        if let Some(f) = f {
            self.check_state(f)?;
            if !f.is_finite() {
                return Err(Error::Data("source has non-finite entries".into()));
            }
        }
        if let Some(phi) = phi {
            if phi.len() != self.n_state() {
                return Err(Error::Dimension(format!(
                    "initial datum has {} values, grid has {} interior nodes",
                    phi.len(),
                    self.n_state()
                )));
            }
            if phi.iter().any(|v| !v.is_finite()) {
                return Err(Error::Data("initial datum has non-finite entries".into()));
            }
        }

        let ns = self.n_state();
        let tau = self.tau;
        let control = self.grid.control_nodes();
        let mut y = self.zero_state();
        if let Some(phi) = phi {
            y.level_mut(0).copy_from_slice(phi);
        }
        let mut work = vec![0.0; ns];
        let mut next = vec![0.0; ns];
        for n in 1..=self.n_t() {
            work.copy_from_slice(y.level(n - 1));
            if let Some(f) = f {
                for (w, &fv) in work.iter_mut().zip(f.level(n)) {
                    *w += tau * fv;
                }
            }
            if let Some(u) = u {
                if self.grid.is_entire() {
                    for (w, &uv) in work.iter_mut().zip(u.level(n)) {
                        *w += tau * uv;
                    }
                } else {
                    for (&d, &uv) in control.iter().zip(u.level(n)) {
                        work[d] += tau * uv;
                    }
                }
            }
            self.ops.mass.mul_vec_into(&work, &mut next);
            self.system_factor.solve_in_place(&mut next);
            y.level_mut(n).copy_from_slice(&next);
        }
        Ok(y)
    }

    /// Linear part of the control-to-state map (zero source and initial data).
    pub fn apply_sbar(&self, u: &ControlField) -> Result<StateTrajectory> {
        self.solve_forward(Some(u), None, None)
    }

    /// Adjoint of [`Self::apply_sbar`] applied to levels `1..=n_t` of `w`.
    pub fn apply_sbar_star(&self, w: &StateTrajectory) -> Result<ControlField> {
        self.check_state(w)?;
        if !w.is_finite() {
            return Err(Error::Data("adjoint source has non-finite entries".into()));
        }
        let ns = self.n_state();
        let tau = self.tau;
        let mut v = self.zero_control();
        let mut p = vec![0.0; ns];
        let mut work = vec![0.0; ns];
        for n in (1..=self.n_t()).rev() {
            for ((wk, &pk), &wv) in work.iter_mut().zip(&p).zip(w.level(n)) {
                *wk = pk + tau * wv;
            }
            self.ops.mass.mul_vec_into(&work, &mut p);
            self.system_factor.solve_in_place(&mut p);
            let out = v.level_mut(n);
            if self.grid.is_entire() {
                out.copy_from_slice(&p);
            } else {
                // B^T p, then the Riesz map onto the control space.
                for (o, &d) in out.iter_mut().zip(self.grid.control_nodes()) {
                    *o = self.ops.mass.row(d).map(|(j, m)| m * p[j]).sum();
                }
                self.control_mass_factor.solve_in_place(out);
            }
        }
        Ok(v)
    }

    /// Relative residual `||A x - b|| / ||b||` of one factor solve, for audits.
    pub fn factor_residual(&self, b: &[f64]) -> f64 {
        let x = self.system_factor.solve(b);
        let ax = self.system.mul_vec(&x);
        let r: f64 = ax.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
        r / dot(b, b).sqrt()
    }
}
