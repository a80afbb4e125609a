//! Run artifacts: iteration log, summary and nodal field snapshots.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::admm::{solve, IterationRecord, SolveReport};
use crate::error::{Error, Result};
use crate::field::ControlField;
use crate::harness::config::RunConfig;
use crate::problems::Problem;

pub const CSV_HEADER: &str = "k,beta,theta,cg_iters,PR,DR,SRD,Obj,err_u,wall_ms";

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn iterations_csv(records: &[IterationRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        let err = r.err_u.map(fmt_f64).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.k,
            fmt_f64(r.beta),
            fmt_f64(r.theta),
            r.cg_iterations,
            fmt_f64(r.pr),
            fmt_f64(r.dr),
            fmt_f64(r.srd),
            fmt_f64(r.obj),
            err,
            fmt_f64(r.wall_ms)
        );
    }
    out
}

pub fn parse_iterations_csv(text: &str) -> Result<Vec<IterationRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        other => return Err(Error::Data(format!("unexpected CSV header {other:?}"))),
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, line)| {
            let bad = |what: &str| Error::Data(format!("CSV row {}: {what}", i + 1));
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 10 {
                return Err(bad("expected 10 columns"));
            }
            let f = |j: usize| cols[j].parse::<f64>().map_err(|_| bad(&format!("column {j} is not a number")));
            let u = |j: usize| cols[j].parse::<usize>().map_err(|_| bad(&format!("column {j} is not an integer")));
            Ok(IterationRecord {
                k: u(0)?,
                beta: f(1)?,
                theta: f(2)?,
                cg_iterations: u(3)?,
                pr: f(4)?,
                dr: f(5)?,
                srd: f(6)?,
                obj: f(7)?,
                err_u: if cols[8].is_empty() { None } else { Some(f(8)?) },
                wall_ms: f(9)?,
            })
        })
        .collect()
}

/// Fraction of control nodes (over all time levels) where `z` is exactly zero.
pub fn zero_fraction(z: &ControlField) -> f64 {
    let values = z.values();
    if values.is_empty() {
        return 0.0;
    }
    values.iter().filter(|&&v| v == 0.0).count() as f64 / values.len() as f64
}

fn finite_or_null(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

pub fn summary_json(config: &RunConfig, problem: &Problem, report: &SolveReport) -> Value {
    let last = report.last();
    let disc = problem.disc();
    json!({
        "problem": problem.spec().name,
        "gamma_s": problem.gamma_s(),
        "solver": report.method.name(),
        "m": config.m,
        "nt": config.n_t,
        "h": disc.grid().h(),
        "tau": disc.tau(),
        "beta0": config.params.beta0,
        "beta1": config.params.beta1,
        "theta_schedule": config.params.theta.label(),
        "theta0": report.theta0,
        "tol": config.params.tol,
        "status": report.status,
        "iterations": report.iterations(),
        "cg_ave": report.cg_ave(),
        "cg_max": report.cg_max(),
        "obj": last.map(|r| finite_or_null(r.obj)),
        "srd": last.map(|r| finite_or_null(r.srd)),
        "err_u": last.and_then(|r| r.err_u),
        "pr": last.map(|r| finite_or_null(r.pr)),
        "dr": last.map(|r| finite_or_null(r.dr)),
        "zero_fraction": zero_fraction(&report.final_iterate.z),
        "wall_seconds": report.wall_seconds,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    U,
    Z,
    Y,
}

impl FieldKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "u" => Ok(FieldKind::U),
            "z" => Ok(FieldKind::Z),
            "y" => Ok(FieldKind::Y),
            _ => Err(Error::Config(format!("unknown field '{s}', expected u, z or y"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FieldKind::U => "u",
            FieldKind::Z => "z",
            FieldKind::Y => "y",
        }
    }
}

/// Nodal values of one time level on the full `(m+1) x (m+1)` grid,
/// row-major with `x` varying fastest; nodes outside the field's support
/// hold zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub field: FieldKind,
    pub m: usize,
    pub n_t: usize,
    pub level: usize,
    pub values: Vec<f64>,
}

impl Snapshot {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# field={}", self.field.name());
        let _ = writeln!(out, "# m={}", self.m);
        let _ = writeln!(out, "# n_t={}", self.n_t);
        let _ = writeln!(out, "# level={}", self.level);
        for row in self.values.chunks(self.m + 1) {
            let line: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut field = None;
        let mut m = None;
        let mut n_t = None;
        let mut level = None;
        let mut values = Vec::new();
        for line in text.lines() {
            if let Some(header) = line.strip_prefix('#') {
                let (k, v) = header
                    .trim()
                    .split_once('=')
                    .ok_or_else(|| Error::Data(format!("bad snapshot header '{line}'")))?;
                let int = || v.parse::<usize>().map_err(|_| Error::Data(format!("bad header value '{line}'")));
                match k {
                    "field" => field = Some(FieldKind::parse(v)?),
                    "m" => m = Some(int()?),
                    "n_t" => n_t = Some(int()?),
                    "level" => level = Some(int()?),
                    _ => {}
                }
                continue;
            }
            for tok in line.split_whitespace() {
                values.push(tok.parse::<f64>().map_err(|_| Error::Data(format!("bad snapshot value '{tok}'")))?);
            }
        }
        let missing = |k: &str| Error::Data(format!("snapshot header lacks {k}"));
        let snap = Snapshot {
            field: field.ok_or_else(|| missing("field"))?,
            m: m.ok_or_else(|| missing("m"))?,
            n_t: n_t.ok_or_else(|| missing("n_t"))?,
            level: level.ok_or_else(|| missing("level"))?,
            values,
        };
        if snap.values.len() != (snap.m + 1) * (snap.m + 1) {
            return Err(Error::Data(format!(
                "snapshot has {} values, expected {}",
                snap.values.len(),
                (snap.m + 1) * (snap.m + 1)
            )));
        }
        Ok(snap)
    }

    pub fn zero_fraction(&self) -> f64 {
        self.values.iter().filter(|&&v| v == 0.0).count() as f64 / self.values.len() as f64
    }
}

/// Time level nearest to `t`.
pub fn level_of_time(problem: &Problem, t: f64) -> Result<usize> {
    let disc = problem.disc();
    let n = (t / disc.tau()).round();
    if !(n >= 0.0 && n <= disc.n_t() as f64) {
        return Err(Error::Config(format!("time {t} outside the simulated horizon")));
    }
    Ok(n as usize)
}

pub fn snapshot(problem: &Problem, report: &SolveReport, field: FieldKind, t: f64) -> Result<Snapshot> {
    let disc = problem.disc();
    let grid = disc.grid();
    let level = level_of_time(problem, t)?;
    let mut interior = vec![0.0; disc.n_state()];
    match field {
        FieldKind::U | FieldKind::Z => {
            if level == 0 {
                return Err(Error::Config(format!(
                    "controls live on levels 1..={}; t = {t} maps to level 0",
                    disc.n_t()
                )));
            }
            let src = if field == FieldKind::U {
                &report.final_iterate.u
            } else {
                &report.final_iterate.z
            };
            grid.extend_control(src.level(level), &mut interior);
        }
        FieldKind::Y => {
            let state = problem.state(&report.final_iterate.z)?;
            interior.copy_from_slice(state.level(level));
        }
    }
    let m = grid.m();
    let values = (0..(m + 1) * (m + 1))
        .map(|slot| grid.dof_of_slot(slot).map_or(0.0, |d| interior[d]))
        .collect();
    Ok(Snapshot {
        field,
        m,
        n_t: disc.n_t(),
        level,
        values,
    })
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

#[derive(Debug)]
pub struct RunOutput {
    pub report: SolveReport,
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
}

/// Assembles, solves and writes `iterations.csv`, `summary.json` and one
/// snapshot file per requested time and field.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    config.validate()?;
    let spec = config.problem_spec()?;
    let problem = spec.assemble_with(config.m, config.n_t, config.lumped_mass)?;
    let report = solve(&problem, &config.params, config.solver)?;
    let dir = config.out_dir.clone();
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut files = Vec::new();

    let csv = dir.join("iterations.csv");
    write(&csv, &iterations_csv(&report.records))?;
    files.push(csv);

    let summary = dir.join("summary.json");
    let text = serde_json::to_string_pretty(&summary_json(config, &problem, &report))
        .map_err(|e| Error::Data(e.to_string()))?;
    write(&summary, &(text + "\n"))?;
    files.push(summary);

    for &t in &config.snapshots {
        for field in [FieldKind::U, FieldKind::Z, FieldKind::Y] {
            if field != FieldKind::Y && level_of_time(&problem, t)? == 0 {
                continue;
            }
            let snap = snapshot(&problem, &report, field, t)?;
            let path = dir.join(format!("{}_level{:04}.txt", field.name(), snap.level));
            write(&path, &snap.to_text())?;
            files.push(path);
        }
    }
    Ok(RunOutput {
        report,
        out_dir: dir,
        files,
    })
}
