//! Space-time nodal arrays.

use crate::error::{Error, Result};

/// A function in `U = L^2(G)`: nodal values on the control nodes at time
/// levels `1..=n_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlField {
    n_nodes: usize,
    n_t: usize,
    values: Vec<f64>,
}

impl ControlField {
    pub fn zeros(n_nodes: usize, n_t: usize) -> Self {
        ControlField {
            n_nodes,
            n_t,
            values: vec![0.0; n_nodes * n_t],
        }
    }

    pub fn from_values(n_nodes: usize, n_t: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n_nodes * n_t {
            return Err(Error::Dimension(format!(
                "control field needs {} values ({n_nodes} nodes x {n_t} levels), got {}",
                n_nodes * n_t,
                values.len()
            )));
        }
        Ok(ControlField {
            n_nodes,
            n_t,
            values,
        })
    }

    pub fn from_fn(n_nodes: usize, n_t: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut out = ControlField::zeros(n_nodes, n_t);
        for n in 1..=n_t {
            for (i, v) in out.level_mut(n).iter_mut().enumerate() {
                *v = f(n, i);
            }
        }
        out
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Level `n` in `1..=n_t`.
    pub fn level(&self, n: usize) -> &[f64] {
        debug_assert!(n >= 1 && n <= self.n_t);
        &self.values[(n - 1) * self.n_nodes..n * self.n_nodes]
    }

    pub fn level_mut(&mut self, n: usize) -> &mut [f64] {
        debug_assert!(n >= 1 && n <= self.n_t);
        &mut self.values[(n - 1) * self.n_nodes..n * self.n_nodes]
    }

    pub fn same_shape(&self, other: &ControlField) -> bool {
        self.n_nodes == other.n_nodes && self.n_t == other.n_t
    }

    pub fn check_shape(&self, other: &ControlField) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "control fields of shape {}x{} and {}x{}",
                self.n_nodes, self.n_t, other.n_nodes, other.n_t
            )))
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// `self += a * x`.
    pub fn axpy(&mut self, a: f64, x: &ControlField) {
        debug_assert!(self.same_shape(x));
        for (s, &xv) in self.values.iter_mut().zip(&x.values) {
            *s += a * xv;
        }
    }

    pub fn scale(&mut self, a: f64) {
        self.values.iter_mut().for_each(|v| *v *= a);
    }

    /// `a * x + b * y`.
    pub fn lin_comb(a: f64, x: &ControlField, b: f64, y: &ControlField) -> ControlField {
        debug_assert!(x.same_shape(y));
        ControlField {
            n_nodes: x.n_nodes,
            n_t: x.n_t,
            values: x.values.iter().zip(&y.values).map(|(&p, &q)| a * p + b * q).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ControlField {
        ControlField {
            n_nodes: self.n_nodes,
            n_t: self.n_t,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &ControlField, f: impl Fn(f64, f64) -> f64) -> ControlField {
        debug_assert!(self.same_shape(other));
        ControlField {
            n_nodes: self.n_nodes,
            n_t: self.n_t,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Nodal state values on the interior nodes at time levels `0..=n_t`.
///
/// Adjoint-type data (residuals `y - y_d`) reuse this type and ignore level 0.
#[derive(Debug, Clone, PartialEq)]
pub struct StateTrajectory {
    n_nodes: usize,
    n_t: usize,
    values: Vec<f64>,
}

impl StateTrajectory {
    pub fn zeros(n_nodes: usize, n_t: usize) -> Self {
        StateTrajectory {
            n_nodes,
            n_t,
            values: vec![0.0; n_nodes * (n_t + 1)],
        }
    }

    pub fn from_fn(n_nodes: usize, n_t: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut out = StateTrajectory::zeros(n_nodes, n_t);
        for n in 0..=n_t {
            for (i, v) in out.level_mut(n).iter_mut().enumerate() {
                *v = f(n, i);
            }
        }
        out
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn level(&self, n: usize) -> &[f64] {
        &self.values[n * self.n_nodes..(n + 1) * self.n_nodes]
    }

    pub fn level_mut(&mut self, n: usize) -> &mut [f64] {
        &mut self.values[n * self.n_nodes..(n + 1) * self.n_nodes]
    }

    pub fn same_shape(&self, other: &StateTrajectory) -> bool {
        self.n_nodes == other.n_nodes && self.n_t == other.n_t
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn axpy(&mut self, a: f64, x: &StateTrajectory) {
        debug_assert!(self.same_shape(x));
        for (s, &xv) in self.values.iter_mut().zip(&x.values) {
            *s += a * xv;
        }
    }

    pub fn lin_comb(a: f64, x: &StateTrajectory, b: f64, y: &StateTrajectory) -> StateTrajectory {
        debug_assert!(x.same_shape(y));
        StateTrajectory {
            n_nodes: x.n_nodes,
            n_t: x.n_t,
            values: x.values.iter().zip(&y.values).map(|(&p, &q)| a * p + b * q).collect(),
        }
    }
}
