//! Uniform triangulation of the unit square and P1 finite-element operators.
//!
//! Each of the `m x m` cells is split along its lower-left to upper-right
//! diagonal. Interior nodes carry the degrees of freedom (homogeneous
//! Dirichlet data on the boundary) and are numbered row-major by `(j, i)`.

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;

const ALIGN_TOL: f64 = 1e-9;

/// Axis-aligned control region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Subdomain {
    Entire,
    Rect {
        x_lo: f64,
        x_hi: f64,
        y_lo: f64,
        y_hi: f64,
    },
}

impl Subdomain {
    pub fn rect(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> Self {
        Subdomain::Rect {
            x_lo,
            x_hi,
            y_lo,
            y_hi,
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        match *self {
            Subdomain::Entire => true,
            Subdomain::Rect {
                x_lo,
                x_hi,
                y_lo,
                y_hi,
            } => {
                x >= x_lo - ALIGN_TOL
                    && x <= x_hi + ALIGN_TOL
                    && y >= y_lo - ALIGN_TOL
                    && y <= y_hi + ALIGN_TOL
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Cells per spatial direction, `h = 1/m`.
    pub m: usize,
    /// Time steps, `tau = t_final / n_t`.
    pub n_t: usize,
    pub t_final: f64,
    pub subdomain: Subdomain,
}

impl GridSpec {
    pub fn new(m: usize, n_t: usize, t_final: f64, subdomain: Subdomain) -> Self {
        GridSpec {
            m,
            n_t,
            t_final,
            subdomain,
        }
    }

    pub fn h(&self) -> f64 {
        1.0 / self.m as f64
    }

    pub fn tau(&self) -> f64 {
        self.t_final / self.n_t as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::Config(format!("m must be at least 2, got {}", self.m)));
        }
        if self.n_t < 1 {
            return Err(Error::Config("n_t must be at least 1".into()));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::Config(format!("final time must be positive, got {}", self.t_final)));
        }
        if let Subdomain::Rect {
            x_lo,
            x_hi,
            y_lo,
            y_hi,
        } = self.subdomain
        {
            for (name, v) in [("x_lo", x_lo), ("x_hi", x_hi), ("y_lo", y_lo), ("y_hi", y_hi)] {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::Config(format!("subdomain {name} = {v} lies outside [0, 1]")));
                }
                let scaled = v * self.m as f64;
                if (scaled - scaled.round()).abs() > ALIGN_TOL * self.m as f64 {
                    return Err(Error::Config(format!(
                        "subdomain {name} = {v} is not a multiple of h = 1/{}",
                        self.m
                    )));
                }
            }
            if x_lo >= x_hi || y_lo >= y_hi {
                return Err(Error::Config(format!(
                    "subdomain [{x_lo}, {x_hi}] x [{y_lo}, {y_hi}] is empty"
                )));
            }
        }
        Ok(())
    }
}

/// Mesh topology and the interior/control degree-of-freedom maps.
#[derive(Debug, Clone)]
pub struct Grid {
    spec: GridSpec,
    /// `(x, y)` of every interior node, in dof order.
    coords: Vec<(f64, f64)>,
    /// Triangles as global node slots `j * (m + 1) + i`.
    elements: Vec<[usize; 3]>,
    /// Global node slot to interior dof.
    slot_dof: Vec<Option<usize>>,
    /// Interior dofs that carry a control value, increasing.
    control: Vec<usize>,
}

pub fn build_grid(spec: GridSpec) -> Result<Grid> {
    spec.validate()?;
    let m = spec.m;
    let h = spec.h();
    let slot = |i: usize, j: usize| j * (m + 1) + i;

    let mut slot_dof = vec![None; (m + 1) * (m + 1)];
    let mut coords = Vec::with_capacity((m - 1) * (m - 1));
    for j in 1..m {
        for i in 1..m {
            slot_dof[slot(i, j)] = Some(coords.len());
            coords.push((i as f64 * h, j as f64 * h));
        }
    }

    let mut elements = Vec::with_capacity(2 * m * m);
    for j in 0..m {
        for i in 0..m {
            elements.push([slot(i, j), slot(i + 1, j), slot(i + 1, j + 1)]);
            elements.push([slot(i, j), slot(i + 1, j + 1), slot(i, j + 1)]);
        }
    }

    let control: Vec<usize> = coords
        .iter()
        .enumerate()
        .filter(|(_, &(x, y))| spec.subdomain.contains(x, y))
        .map(|(d, _)| d)
        .collect();
    if control.is_empty() {
        return Err(Error::Config(format!(
            "subdomain {:?} contains no interior node at m = {m}",
            spec.subdomain
        )));
    }

    Ok(Grid {
        spec,
        coords,
        elements,
        slot_dof,
        control,
    })
}

impl Grid {
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn m(&self) -> usize {
        self.spec.m
    }

    pub fn n_t(&self) -> usize {
        self.spec.n_t
    }

    pub fn h(&self) -> f64 {
        self.spec.h()
    }

    pub fn tau(&self) -> f64 {
        self.spec.tau()
    }

    /// Interior node count `(m - 1)^2`.
    pub fn n_state(&self) -> usize {
        self.coords.len()
    }

    /// Control node count.
    pub fn n_control(&self) -> usize {
        self.control.len()
    }

    pub fn is_entire(&self) -> bool {
        self.control.len() == self.coords.len()
    }

    pub fn coords(&self) -> &[(f64, f64)] {
        &self.coords
    }

    pub fn elements(&self) -> &[[usize; 3]] {
        &self.elements
    }

    pub fn control_nodes(&self) -> &[usize] {
        &self.control
    }

    pub fn control_coords(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.control.iter().map(|&d| self.coords[d])
    }

    /// Dof carried by a global node slot, `None` on the boundary.
    pub fn dof_of_slot(&self, slot: usize) -> Option<usize> {
        self.slot_dof[slot]
    }

    pub fn slot_coords(&self, slot: usize) -> (f64, f64) {
        let m = self.spec.m;
        let h = self.spec.h();
        ((slot % (m + 1)) as f64 * h, (slot / (m + 1)) as f64 * h)
    }

    /// Zero-extends control-node values to all interior nodes.
    pub fn extend_control(&self, control: &[f64], state: &mut [f64]) {
        debug_assert_eq!(control.len(), self.control.len());
        if self.is_entire() {
            state.copy_from_slice(control);
            return;
        }
        state.iter_mut().for_each(|v| *v = 0.0);
        for (&d, &v) in self.control.iter().zip(control) {
            state[d] = v;
        }
    }

    pub fn restrict_to_control(&self, state: &[f64], control: &mut [f64]) {
        for (c, &d) in control.iter_mut().zip(&self.control) {
            *c = state[d];
        }
    }

    /// Nodal interpolant of `g` on the interior nodes.
    pub fn interpolate(&self, g: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        self.coords.iter().map(|&(x, y)| g(x, y)).collect()
    }
}

/// Assembled P1 operators on the interior dofs.
#[derive(Debug, Clone)]
pub struct AssembledOperators {
    /// Mass matrix.
    pub mass: CsrMatrix,
    /// Stiffness matrix (without the diffusion coefficient).
    pub stiffness: CsrMatrix,
    /// Reaction mass `a0 * M`.
    pub reaction: CsrMatrix,
    /// Principal block of `M` on the control nodes.
    pub control_mass: CsrMatrix,
    /// Columns of `M` belonging to control nodes.
    pub coupling: CsrMatrix,
    pub nu: f64,
    pub a0: f64,
    pub lumped: bool,
}

pub fn assemble(grid: &Grid, nu: f64, a0: f64) -> Result<AssembledOperators> {
    assemble_with(grid, nu, a0, false)
}

/// Like [`assemble`]; `lumped` replaces every mass matrix by its row-sum
/// diagonal.
pub fn assemble_with(grid: &Grid, nu: f64, a0: f64, lumped: bool) -> Result<AssembledOperators> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::Parameter(format!("diffusion coefficient must be positive, got {nu}")));
    }
    if !(a0 >= 0.0 && a0.is_finite()) {
        return Err(Error::Parameter(format!("reaction coefficient must be nonnegative, got {a0}")));
    }
    let n = grid.n_state();
    let mut mass_t = Vec::with_capacity(grid.elements().len() * 9);
    let mut stiff_t = Vec::with_capacity(grid.elements().len() * 9);
    for element in grid.elements() {
        let p = element.map(|s| grid.slot_coords(s));
        let (me, ke) = element_matrices(p);
        for a in 0..3 {
            let Some(da) = grid.dof_of_slot(element[a]) else { continue };
            for b in 0..3 {
                let Some(db) = grid.dof_of_slot(element[b]) else { continue };
                mass_t.push((da, db, me[a][b]));
                if ke[a][b] != 0.0 {
                    stiff_t.push((da, db, ke[a][b]));
                }
            }
        }
    }
    let mut mass = CsrMatrix::from_triplets(n, n, &mass_t);
    if lumped {
        mass = CsrMatrix::diagonal_from(&mass.row_sums());
    }
    let stiffness = drop_zeros(&CsrMatrix::from_triplets(n, n, &stiff_t));
    let reaction = mass.scaled(a0);
    let all: Vec<usize> = (0..n).collect();
    let (control_mass, coupling) = if grid.is_entire() {
        (mass.clone(), mass.clone())
    } else {
        (
            mass.submatrix(grid.control_nodes(), grid.control_nodes()),
            mass.submatrix(&all, grid.control_nodes()),
        )
    };
    Ok(AssembledOperators {
        mass,
        stiffness,
        reaction,
        control_mass,
        coupling,
        nu,
        a0,
        lumped,
    })
}

/// Exact P1 mass and stiffness matrices of one triangle.
fn element_matrices(p: [(f64, f64); 3]) -> ([[f64; 3]; 3], [[f64; 3]; 3]) {
    let (x, y) = (p.map(|q| q.0), p.map(|q| q.1));
    let det = (x[1] - x[0]) * (y[2] - y[0]) - (x[2] - x[0]) * (y[1] - y[0]);
    let area = 0.5 * det.abs();
    // Gradients of the barycentric coordinates times 2*area (signed).
    let grads: [(f64, f64); 3] = std::array::from_fn(|a| {
        let (b, c) = ((a + 1) % 3, (a + 2) % 3);
        ((y[b] - y[c]) / det, (x[c] - x[b]) / det)
    });
    let mut me = [[0.0; 3]; 3];
    let mut ke = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            me[a][b] = area / 12.0 * if a == b { 2.0 } else { 1.0 };
            ke[a][b] = area * (grads[a].0 * grads[b].0 + grads[a].1 * grads[b].1);
        }
    }
    (me, ke)
}

fn drop_zeros(a: &CsrMatrix) -> CsrMatrix {
    let mut t = Vec::with_capacity(a.nnz());
    for i in 0..a.nrows() {
        t.extend(a.row(i).filter(|&(_, v)| v.abs() > 1e-14).map(|(j, v)| (i, j, v)));
    }
    CsrMatrix::from_triplets(a.nrows(), a.ncols(), &t)
}
