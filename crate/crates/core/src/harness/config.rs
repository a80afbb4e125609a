//! Flat `key = value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Keys may appear at
//! most once. Recognized keys:
//!
//! | key | value |
//! |-----|-------|
//! | `problem` | `example1` .. `example4` or `custom` |
//! | `gamma_s` | sparsity weight (required for example3/4) |
//! | `m`, `nt` | spatial cells per side, time steps |
//! | `solver` | `inadmm`, `admmcg` or `pgd` |
//! | `beta0`, `beta1`, `eta_base` | penalty schedule |
//! | `theta.kind` | `geometric`, `algebraic` or `fixed` |
//! | `theta.q`, `theta.alpha`, `theta.value`, `theta.theta0` | schedule parameters |
//! | `tol`, `max_outer`, `exact_threshold` | stopping |
//! | `out_dir` | output directory |
//! | `snapshots` | comma-separated times |
//! | `seed` | reserved |
//! | `lumped_mass` | `true` / `false` |
//!
//! `custom` problems start from `base` (`example1` or `example2`) and accept
//! `gamma_d`, `lower`, `upper`, `nu`, `a0`, `t_final` and
//! `subdomain` (`entire` or `x_lo,x_hi,y_lo,y_hi`). Changing any coefficient
//! drops the manufactured exact solution.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::admm::{AdmmParams, Method, ThetaSchedule};
use crate::error::{Error, Result};
use crate::grid::Subdomain;
use crate::problems::{example1, example2, example3, example4, ProblemSpec};
use crate::prox::BoxBounds;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Example1,
    Example2,
    Example3,
    Example4,
    Custom,
}

impl ProblemKind {
    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "example1" => ProblemKind::Example1,
            "example2" => ProblemKind::Example2,
            "example3" => ProblemKind::Example3,
            "example4" => ProblemKind::Example4,
            "custom" => ProblemKind::Custom,
            other => return Err(Error::Config(format!("unknown problem '{other}'"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ProblemKind::Example1 => "example1",
            ProblemKind::Example2 => "example2",
            ProblemKind::Example3 => "example3",
            ProblemKind::Example4 => "example4",
            ProblemKind::Custom => "custom",
        }
    }
}

/// Coefficient overrides for `problem = custom`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CustomOverrides {
    pub base: Option<ProblemKind>,
    pub gamma_d: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub nu: Option<f64>,
    pub a0: Option<f64>,
    pub t_final: Option<f64>,
    pub subdomain: Option<Subdomain>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemKind,
    pub gamma_s: Option<f64>,
    pub custom: CustomOverrides,
    pub m: usize,
    pub n_t: usize,
    pub solver: Method,
    pub params: AdmmParams,
    pub out_dir: PathBuf,
    pub snapshots: Vec<f64>,
    pub seed: u64,
    pub lumped_mass: bool,
}

/// Penalties and inner schedule used for each shipped experiment.
pub fn default_params(problem: ProblemKind) -> AdmmParams {
    let base = AdmmParams::default();
    match problem {
        ProblemKind::Example1 | ProblemKind::Example3 | ProblemKind::Custom => AdmmParams {
            beta0: 2.0,
            beta1: 3.0,
            theta: ThetaSchedule::Algebraic { alpha: 3.0 },
            ..base
        },
        ProblemKind::Example2 | ProblemKind::Example4 => AdmmParams {
            beta0: 8.0,
            beta1: 8.0,
            theta: ThetaSchedule::Algebraic { alpha: 3.0 },
            ..base
        },
    }
}

impl RunConfig {
    pub fn new(problem: ProblemKind) -> Self {
        RunConfig {
            problem,
            gamma_s: None,
            custom: CustomOverrides::default(),
            m: 64,
            n_t: 64,
            solver: Method::InAdmm,
            params: default_params(problem),
            out_dir: PathBuf::from("out"),
            snapshots: Vec::new(),
            seed: 0,
            lumped_mass: false,
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value, got '{line}'", lineno + 1)))?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() {
                return Err(Error::Config(format!("line {}: empty key", lineno + 1)));
            }
            if entries.insert(key.clone(), (lineno + 1, value)).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key '{key}'", lineno + 1)));
            }
        }

        let problem = match entries.remove("problem") {
            Some((_, v)) => ProblemKind::parse(&v)?,
            None => return Err(Error::Config("missing required key 'problem'".into())),
        };
        let mut cfg = RunConfig::new(problem);
        if let Some((_, base)) = entries.get("base") {
            if problem == ProblemKind::Custom {
                let kind = ProblemKind::parse(base)?;
                cfg.params = default_params(kind);
            }
        }

        let mut theta_kind: Option<String> = None;
        let mut theta_q = None;
        let mut theta_alpha = None;
        let mut theta_value = None;
        for (key, (line, value)) in entries {
            let ctx = |what: &str| Error::Config(format!("line {line}: {key} = '{value}': {what}"));
            let num = || value.parse::<f64>().map_err(|_| ctx("expected a number"));
            let int = || value.parse::<usize>().map_err(|_| ctx("expected a nonnegative integer"));
            match key.as_str() {
                "gamma_s" => cfg.gamma_s = Some(num()?),
                "m" => cfg.m = int()?,
                "nt" => cfg.n_t = int()?,
                "solver" => {
                    cfg.solver = match value.as_str() {
                        "inadmm" => Method::InAdmm,
                        "admmcg" => Method::AdmmCg,
                        "pgd" => Method::Pgd,
                        _ => return Err(ctx("expected inadmm, admmcg or pgd")),
                    }
                }
                "beta0" => cfg.params.beta0 = num()?,
                "beta1" => cfg.params.beta1 = num()?,
                "eta_base" => cfg.params.eta_base = num()?,
                "theta.kind" => theta_kind = Some(value.clone()),
                "theta.q" => theta_q = Some(num()?),
                "theta.alpha" => theta_alpha = Some(num()?),
                "theta.value" => theta_value = Some(num()?),
                "theta.theta0" => cfg.params.theta0 = Some(num()?),
                "tol" => cfg.params.tol = num()?,
                "max_outer" => cfg.params.max_outer = int()?,
                "exact_threshold" => cfg.params.exact_threshold = num()?,
                "out_dir" => cfg.out_dir = PathBuf::from(&value),
                "snapshots" => {
                    cfg.snapshots = value
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(|s| s.parse::<f64>().map_err(|_| ctx("expected comma-separated times")))
                        .collect::<Result<_>>()?;
                }
                "seed" => cfg.seed = value.parse().map_err(|_| ctx("expected an integer"))?,
                "lumped_mass" => {
                    cfg.lumped_mass = value.parse().map_err(|_| ctx("expected true or false"))?;
                }
                "base" => cfg.custom.base = Some(ProblemKind::parse(&value)?),
                "gamma_d" => cfg.custom.gamma_d = Some(num()?),
                "lower" => cfg.custom.lower = Some(num()?),
                "upper" => cfg.custom.upper = Some(num()?),
                "nu" => cfg.custom.nu = Some(num()?),
                "a0" => cfg.custom.a0 = Some(num()?),
                "t_final" => cfg.custom.t_final = Some(num()?),
                "subdomain" => cfg.custom.subdomain = Some(parse_subdomain(&value).map_err(|e| ctx(&e))?),
                _ => return Err(Error::Config(format!("line {line}: unknown key '{key}'"))),
            }
        }

        let current = cfg.params.theta;
        cfg.params.theta = match theta_kind.as_deref() {
            None => match current {
                ThetaSchedule::Geometric { q } => ThetaSchedule::Geometric { q: theta_q.unwrap_or(q) },
                ThetaSchedule::Algebraic { alpha } => ThetaSchedule::Algebraic {
                    alpha: theta_alpha.unwrap_or(alpha),
                },
                ThetaSchedule::Fixed { value } => ThetaSchedule::Fixed {
                    value: theta_value.unwrap_or(value),
                },
            },
            Some("geometric") => ThetaSchedule::Geometric {
                q: theta_q.unwrap_or(0.5),
            },
            Some("algebraic") => ThetaSchedule::Algebraic {
                alpha: theta_alpha.unwrap_or(3.0),
            },
            Some("fixed") => ThetaSchedule::Fixed {
                value: theta_value.unwrap_or(cfg.params.exact_threshold),
            },
            Some(other) => {
                return Err(Error::Config(format!(
                    "theta.kind = '{other}': expected geometric, algebraic or fixed"
                )))
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks everything that can be checked without solving.
    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::Config(format!("m must be at least 2, got {}", self.m)));
        }
        if self.n_t < 1 {
            return Err(Error::Config("nt must be at least 1".into()));
        }
        if self.problem != ProblemKind::Custom && self.custom != CustomOverrides::default() {
            return Err(Error::Config("coefficient overrides require problem = custom".into()));
        }
        self.params.validate().map_err(Error::into_config)?;
        let spec = self.problem_spec()?;
        if self.solver == Method::Pgd && spec.gamma_s != 0.0 {
            return Err(Error::Config("solver = pgd requires gamma_s = 0".into()));
        }
        spec.grid_spec(self.m, self.n_t)
            .validate()
            .map_err(Error::into_config)?;
        for &t in &self.snapshots {
            if !(t >= 0.0 && t <= spec.t_final) {
                return Err(Error::Config(format!(
                    "snapshot time {t} outside [0, {}]",
                    spec.t_final
                )));
            }
        }
        Ok(())
    }

    pub fn problem_spec(&self) -> Result<ProblemSpec> {
        let needs_gamma = |name: &str| {
            self.gamma_s
                .ok_or_else(|| Error::Config(format!("{name} requires gamma_s")))
        };
        let no_gamma = |name: &str| match self.gamma_s {
            Some(g) if g != 0.0 => Err(Error::Config(format!(
                "{name} has gamma_s = 0; use example3/example4 for sparsity"
            ))),
            _ => Ok(()),
        };
        let spec = match self.problem {
            ProblemKind::Example1 => {
                no_gamma("example1")?;
                example1()
            }
            ProblemKind::Example2 => {
                no_gamma("example2")?;
                example2()
            }
            ProblemKind::Example3 => example3(needs_gamma("example3")?).map_err(Error::into_config)?,
            ProblemKind::Example4 => example4(needs_gamma("example4")?).map_err(Error::into_config)?,
            ProblemKind::Custom => self.custom_spec()?,
        };
        spec.validate().map_err(Error::into_config)?;
        Ok(spec)
    }

    fn custom_spec(&self) -> Result<ProblemSpec> {
        let o = &self.custom;
        let mut spec = match o.base {
            Some(ProblemKind::Example1) => example1(),
            Some(ProblemKind::Example2) => example2(),
            Some(other) => {
                return Err(Error::Config(format!(
                    "custom base must be example1 or example2, got {}",
                    other.name()
                )))
            }
            None => return Err(Error::Config("problem = custom requires base".into())),
        };
        spec.name = format!("custom({})", spec.name);
        let changed = o.gamma_d.is_some()
            || o.lower.is_some()
            || o.upper.is_some()
            || o.nu.is_some()
            || o.a0.is_some()
            || o.t_final.is_some()
            || o.subdomain.is_some();
        spec.gamma_d = o.gamma_d.unwrap_or(spec.gamma_d);
        spec.gamma_s = self.gamma_s.unwrap_or(0.0);
        let lower = o.lower.unwrap_or(spec.bounds.lower);
        let upper = o.upper.unwrap_or(spec.bounds.upper);
        spec.bounds = BoxBounds::new(lower, upper).map_err(Error::into_config)?;
        spec.nu = o.nu.unwrap_or(spec.nu);
        spec.a0 = o.a0.unwrap_or(spec.a0);
        spec.t_final = o.t_final.unwrap_or(spec.t_final);
        spec.subdomain = o.subdomain.unwrap_or(spec.subdomain);
        if changed || spec.gamma_s != 0.0 {
            spec.exact_control = None;
            spec.exact_state = None;
        }
        if !(spec.nu > 0.0 && spec.a0 >= 0.0 && spec.t_final > 0.0) {
            return Err(Error::Config(format!(
                "custom coefficients need nu > 0, a0 >= 0, t_final > 0 (got {}, {}, {})",
                spec.nu, spec.a0, spec.t_final
            )));
        }
        Ok(spec)
    }
}

fn parse_subdomain(value: &str) -> std::result::Result<Subdomain, String> {
    if value == "entire" {
        return Ok(Subdomain::Entire);
    }
    let parts: Vec<f64> = value
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| "expected 'entire' or x_lo,x_hi,y_lo,y_hi".to_string())?;
    match parts[..] {
        [x_lo, x_hi, y_lo, y_hi] => Ok(Subdomain::rect(x_lo, x_hi, y_lo, y_hi)),
        _ => Err("expected four comma-separated bounds".into()),
    }
}
