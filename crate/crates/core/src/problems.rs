//! Problem data: analytic generators for the shipped experiments and their
//! nodal interpolation on a discretization.

use std::f64::consts::PI;
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::field::{ControlField, StateTrajectory};
use crate::grid::{build_grid, GridSpec, Subdomain};
use crate::pde::Discretization;
use crate::prox::BoxBounds;

pub type SpaceTimeFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;
pub type SpaceFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Continuous problem description.
#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub gamma_d: f64,
    pub gamma_s: f64,
    pub bounds: BoxBounds,
    pub nu: f64,
    pub a0: f64,
    pub t_final: f64,
    pub subdomain: Subdomain,
    /// `f(x, y, t)`; absent means zero.
    pub source: Option<SpaceTimeFn>,
    /// `phi(x, y)`; absent means zero.
    pub initial: Option<SpaceFn>,
    /// `y_d(x, y, t)`.
    pub target: SpaceTimeFn,
    pub exact_control: Option<SpaceTimeFn>,
    pub exact_state: Option<SpaceTimeFn>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("gamma_d", &self.gamma_d)
            .field("gamma_s", &self.gamma_s)
            .field("bounds", &self.bounds)
            .field("nu", &self.nu)
            .field("a0", &self.a0)
            .field("t_final", &self.t_final)
            .field("subdomain", &self.subdomain)
            .field("has_source", &self.source.is_some())
            .field("has_initial", &self.initial.is_some())
            .field("has_exact", &self.exact_control.is_some())
            .finish()
    }
}

/// Entire-domain control with a manufactured optimum (unconstrained sparsity).
pub fn example1() -> ProblemSpec {
    let gamma_d = 1e5;
    let bounds = BoxBounds { lower: -0.5, upper: 0.5 };
    let s1 = |x: f64, y: f64| (PI * x).sin() * (PI * y).sin();
    let s2 = |x: f64, y: f64| (2.0 * PI * x).sin() * (2.0 * PI * y).sin();
    let control = move |x: f64, y: f64, t: f64| bounds.clamp(-(1.0 - t) * s2(x, y));
    let state = move |x: f64, y: f64, t: f64| (1.0 - t) * s1(x, y);
    ProblemSpec {
        name: "example1".into(),
        gamma_d,
        gamma_s: 0.0,
        bounds,
        nu: 1.0,
        a0: 0.0,
        t_final: 1.0,
        subdomain: Subdomain::Entire,
        // f = -u + dy/dt - lap y
        source: Some(Arc::new(move |x, y, t| {
            -control(x, y, t) - s1(x, y) + 2.0 * PI * PI * (1.0 - t) * s1(x, y)
        })),
        initial: Some(Arc::new(s1)),
        // y_d = y + dp/dt + lap p
        target: Arc::new(move |x, y, t| {
            state(x, y, t) - (1.0 + 8.0 * PI * PI * (1.0 - t)) / gamma_d * s2(x, y)
        }),
        exact_control: Some(Arc::new(control)),
        exact_state: Some(Arc::new(state)),
    }
}

/// Subdomain control with a reaction term; no closed-form optimum.
///
/// The initial state is the target at `t = 0`, `x(1-x) y(1-y)`.
pub fn example2() -> ProblemSpec {
    ProblemSpec {
        name: "example2".into(),
        gamma_d: 1e6,
        gamma_s: 0.0,
        bounds: BoxBounds { lower: -30.0, upper: 30.0 },
        nu: 1.0,
        a0: 1.0,
        t_final: 1.0,
        subdomain: Subdomain::rect(0.0, 0.25, 0.0, 0.25),
        source: None,
        initial: Some(Arc::new(|x, y| x * (1.0 - x) * y * (1.0 - y))),
        target: Arc::new(|x, y, t| t.exp() * x * (1.0 - x) * y * (1.0 - y)),
        exact_control: None,
        exact_state: None,
    }
}

/// [`example1`] with an L1 penalty.
pub fn example3(gamma_s: f64) -> Result<ProblemSpec> {
    sparse_variant(example1(), "example3", gamma_s)
}

/// [`example2`] with an L1 penalty.
pub fn example4(gamma_s: f64) -> Result<ProblemSpec> {
    sparse_variant(example2(), "example4", gamma_s)
}

fn sparse_variant(base: ProblemSpec, name: &str, gamma_s: f64) -> Result<ProblemSpec> {
    if !(gamma_s > 0.0 && gamma_s.is_finite()) {
        return Err(Error::Parameter(format!("{name} needs a positive sparsity weight, got {gamma_s}")));
    }
    Ok(ProblemSpec {
        name: name.into(),
        gamma_s,
        // The manufactured optimum no longer applies once gamma_s > 0.
        exact_control: None,
        exact_state: None,
        ..base
    })
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<()> {
        // gamma_d = 0 is allowed for degenerate test problems.
        if !(self.gamma_d >= 0.0 && self.gamma_d.is_finite()) {
            return Err(Error::Parameter(format!("gamma_d must be nonnegative, got {}", self.gamma_d)));
        }
        if !(self.gamma_s >= 0.0 && self.gamma_s.is_finite()) {
            return Err(Error::Parameter(format!("gamma_s must be nonnegative, got {}", self.gamma_s)));
        }
        BoxBounds::new(self.bounds.lower, self.bounds.upper)?;
        Ok(())
    }

    pub fn grid_spec(&self, m: usize, n_t: usize) -> GridSpec {
        GridSpec::new(m, n_t, self.t_final, self.subdomain)
    }

    pub fn assemble(&self, m: usize, n_t: usize) -> Result<Problem> {
        self.assemble_with(m, n_t, false)
    }

    pub fn assemble_with(&self, m: usize, n_t: usize, lumped_mass: bool) -> Result<Problem> {
        self.validate()?;
        let grid = build_grid(self.grid_spec(m, n_t))?;
        let disc = Discretization::with_mass_lumping(grid, self.nu, self.a0, lumped_mass)?;
        Problem::new(self.clone(), disc)
    }
}

/// A problem interpolated onto one discretization. Data are sampled at the
/// nodes and at the right endpoints `t_n = n * tau`.
#[derive(Debug)]
pub struct Problem {
    spec: ProblemSpec,
    disc: Discretization,
    target: StateTrajectory,
    target_norm: f64,
    source: Option<StateTrajectory>,
    initial: Option<Vec<f64>>,
    exact_control: Option<ControlField>,
    free_state: OnceLock<StateTrajectory>,
    gradient_offset: OnceLock<ControlField>,
    offset_evaluations: AtomicUsize,
}

impl Problem {
    pub fn new(spec: ProblemSpec, disc: Discretization) -> Result<Self> {
        spec.validate()?;
        let tau = disc.tau();
        let grid = disc.grid();
        let sample = |g: &SpaceTimeFn| {
            StateTrajectory::from_fn(grid.n_state(), grid.n_t(), |n, i| {
                let (x, y) = grid.coords()[i];
                g(x, y, n as f64 * tau)
            })
        };
        let target = sample(&spec.target);
        let source = spec.source.as_ref().map(sample);
        let initial = spec.initial.as_ref().map(|g| grid.interpolate(|x, y| g(x, y)));
        let control_coords: Vec<(f64, f64)> = grid.control_coords().collect();
        let exact_control = spec.exact_control.as_ref().map(|g| {
            ControlField::from_fn(grid.n_control(), grid.n_t(), |n, i| {
                let (x, y) = control_coords[i];
                g(x, y, n as f64 * tau)
            })
        });
        for (what, ok) in [
            ("target", target.is_finite()),
            ("source", source.as_ref().is_none_or(|s| s.is_finite())),
            ("initial datum", initial.as_ref().is_none_or(|v| v.iter().all(|x| x.is_finite()))),
        ] {
            if !ok {
                return Err(Error::Data(format!("{} {what} is not finite on the grid", spec.name)));
            }
        }
        let target_norm = disc.norm_y(&target)?;
        Ok(Problem {
            spec,
            disc,
            target,
            target_norm,
            source,
            initial,
            exact_control,
            free_state: OnceLock::new(),
            gradient_offset: OnceLock::new(),
            offset_evaluations: AtomicUsize::new(0),
        })
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn disc(&self) -> &Discretization {
        &self.disc
    }

    pub fn gamma_d(&self) -> f64 {
        self.spec.gamma_d
    }

    pub fn gamma_s(&self) -> f64 {
        self.spec.gamma_s
    }

    pub fn bounds(&self) -> BoxBounds {
        self.spec.bounds
    }

    pub fn target(&self) -> &StateTrajectory {
        &self.target
    }

    pub fn target_norm(&self) -> f64 {
        self.target_norm
    }

    pub fn source(&self) -> Option<&StateTrajectory> {
        self.source.as_ref()
    }

    pub fn initial(&self) -> Option<&[f64]> {
        self.initial.as_deref()
    }

    pub fn exact_control(&self) -> Option<&ControlField> {
        self.exact_control.as_ref()
    }

    /// `S(u)`.
    pub fn state(&self, u: &ControlField) -> Result<StateTrajectory> {
        self.disc.solve_forward(Some(u), self.source(), self.initial())
    }

    /// `S(0)`, computed once.
    pub fn free_state(&self) -> &StateTrajectory {
        self.free_state.get_or_init(|| {
            self.disc
                .solve_forward(None, self.source(), self.initial())
                .expect("problem data were validated at construction")
        })
    }

    /// `gamma_d * S*(S(0) - y_d)`, computed once per problem.
    pub fn gradient_offset(&self) -> &ControlField {
        self.gradient_offset.get_or_init(|| {
            self.offset_evaluations.fetch_add(1, Ordering::Relaxed);
            let residual = StateTrajectory::lin_comb(1.0, self.free_state(), -1.0, &self.target);
            let mut g = self
                .disc
                .apply_sbar_star(&residual)
                .expect("problem data were validated at construction");
            g.scale(self.spec.gamma_d);
            g
        })
    }

    /// How many times [`Self::gradient_offset`] was actually evaluated.
    pub fn offset_evaluations(&self) -> usize {
        self.offset_evaluations.load(Ordering::Relaxed)
    }

    /// `S(u) - y_d`.
    pub fn tracking_residual(&self, state: &StateTrajectory) -> StateTrajectory {
        StateTrajectory::lin_comb(1.0, state, -1.0, &self.target)
    }

    /// `gamma_d/2 ||S(u) - y_d||^2 + 1/2 ||u||^2`.
    pub fn objective_j(&self, u: &ControlField) -> Result<f64> {
        let state = self.state(u)?;
        self.objective_j_with_state(u, &state)
    }

    pub fn objective_j_with_state(&self, u: &ControlField, state: &StateTrajectory) -> Result<f64> {
        let r = self.tracking_residual(state);
        Ok(0.5 * self.spec.gamma_d * self.disc.dot_y(&r, &r)? + 0.5 * self.disc.dot_u(u, u)?)
    }

    /// `J(z) + gamma_s ||z||_1`.
    pub fn objective_full(&self, z: &ControlField) -> Result<f64> {
        let state = self.state(z)?;
        self.objective_full_with_state(z, &state)
    }

    pub fn objective_full_with_state(&self, z: &ControlField, state: &StateTrajectory) -> Result<f64> {
        let mut obj = self.objective_j_with_state(z, state)?;
        if self.spec.gamma_s > 0.0 {
            obj += self.spec.gamma_s * self.disc.l1_u(z)?;
        }
        Ok(obj)
    }

    /// `DJ(u) = u + gamma_d S*(S(u) - y_d)` given `state = S(u)`.
    pub fn gradient_with_state(&self, u: &ControlField, state: &StateTrajectory) -> Result<ControlField> {
        let mut g = self.disc.apply_sbar_star(&self.tracking_residual(state))?;
        g.scale(self.spec.gamma_d);
        g.axpy(1.0, u);
        Ok(g)
    }

    pub fn gradient(&self, u: &ControlField) -> Result<ControlField> {
        let state = self.state(u)?;
        self.gradient_with_state(u, &state)
    }
}
