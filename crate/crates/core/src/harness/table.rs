//! Reproduction of the four benchmark tables.
//!
//! Each table is a list of [`RowSpec`]s carrying the configuration and the
//! published values. Rows finer than the mesh cap are skipped, not failed.
//! Rows at `h = tau = 2^-6` carry acceptance bands.

use std::fmt::Write as _;
use std::time::Instant;

use crate::admm::{solve, AdmmParams, Method, SolveStatus, ThetaSchedule};
use crate::error::{Error, Result};
use crate::problems::{example1, example2, example3, example4, ProblemSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Experiment {
    Example1,
    Example2,
    Example3 { gamma_s: f64 },
    Example4 { gamma_s: f64 },
}

impl Experiment {
    pub fn spec(&self) -> Result<ProblemSpec> {
        match *self {
            Experiment::Example1 => Ok(example1()),
            Experiment::Example2 => Ok(example2()),
            Experiment::Example3 { gamma_s } => example3(gamma_s),
            Experiment::Example4 { gamma_s } => example4(gamma_s),
        }
    }

    pub fn gamma_s(&self) -> f64 {
        match *self {
            Experiment::Example1 | Experiment::Example2 => 0.0,
            Experiment::Example3 { gamma_s } | Experiment::Example4 { gamma_s } => gamma_s,
        }
    }
}

/// Published values; `None` where the table has no entry.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReferenceValues {
    pub iterations: Option<usize>,
    pub err_u: Option<f64>,
    pub cg_ave: Option<f64>,
    pub cg_max: Option<usize>,
    pub obj: Option<f64>,
    pub srd: Option<f64>,
    /// The published run did not converge within the iteration limit.
    pub no_convergence: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Band {
    /// `lo <= value <= hi`.
    Range(f64, f64),
    /// `|value / target - 1| <= rel`.
    Relative { target: f64, rel: f64 },
    AtMost(f64),
}

impl Band {
    pub fn contains(&self, v: f64) -> bool {
        match *self {
            Band::Range(lo, hi) => v >= lo && v <= hi,
            Band::Relative { target, rel } => (v / target - 1.0).abs() <= rel,
            Band::AtMost(hi) => v <= hi,
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            Band::Range(lo, hi) => format!("[{lo}, {hi}]"),
            Band::Relative { target, rel } => format!("{target:e} +/- {}%", rel * 100.0),
            Band::AtMost(hi) => format!("<= {hi}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Iterations,
    ErrU,
    CgAve,
    Obj,
    Srd,
}

impl Metric {
    pub fn name(&self) -> &'static str {
        match self {
            Metric::Iterations => "iterations",
            Metric::ErrU => "err_u",
            Metric::CgAve => "cg_ave",
            Metric::Obj => "Obj",
            Metric::Srd => "SRD",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RowSpec {
    pub label: String,
    pub experiment: Experiment,
    pub method: Method,
    pub params: AdmmParams,
    /// `h = tau = 2^-level`.
    pub level: u32,
    pub reference: Option<ReferenceValues>,
    pub bands: Vec<(Metric, Band)>,
}

impl RowSpec {
    pub fn mesh(&self) -> usize {
        1usize << self.level
    }

    pub fn schedule_label(&self) -> String {
        match self.method {
            Method::InAdmm => self.params.theta.label(),
            Method::AdmmCg => "exact".into(),
            Method::Pgd => "-".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowResult {
    pub iterations: usize,
    pub err_u: Option<f64>,
    pub wall_seconds: f64,
    pub cg_ave: f64,
    pub cg_max: usize,
    pub obj: f64,
    pub srd: f64,
    pub status: SolveStatus,
    pub zero_fraction: f64,
}

impl RowResult {
    pub fn metric(&self, m: Metric) -> Option<f64> {
        match m {
            Metric::Iterations => Some(self.iterations as f64),
            Metric::ErrU => self.err_u,
            Metric::CgAve => Some(self.cg_ave),
            Metric::Obj => Some(self.obj),
            Metric::Srd => Some(self.srd),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RowOutcome {
    Computed(RowResult),
    Skipped,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: Option<f64>,
    pub expected: String,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct TableRow {
    pub spec: RowSpec,
    pub outcome: RowOutcome,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone)]
pub struct TableReport {
    pub id: u32,
    pub cap: u32,
    pub rows: Vec<TableRow>,
    /// Comparisons across rows of the same table.
    pub checks: Vec<Check>,
}

impl TableReport {
    pub fn all_pass(&self) -> bool {
        self.rows
            .iter()
            .all(|r| !matches!(r.outcome, RowOutcome::Failed(_)) && r.checks.iter().all(|c| c.pass))
            && self.checks.iter().all(|c| c.pass)
    }
}

fn params(beta: (f64, f64), theta: ThetaSchedule) -> AdmmParams {
    AdmmParams {
        beta0: beta.0,
        beta1: beta.1,
        theta,
        ..AdmmParams::default()
    }
}

const K3: ThetaSchedule = ThetaSchedule::Algebraic { alpha: 3.0 };
const TWO_K: ThetaSchedule = ThetaSchedule::Geometric { q: 0.5 };

fn pv(iterations: usize, err_u: Option<f64>, cg: Option<(f64, usize)>, obj: f64, srd: f64) -> Option<ReferenceValues> {
    Some(ReferenceValues {
        iterations: Some(iterations),
        err_u,
        cg_ave: cg.map(|c| c.0),
        cg_max: cg.map(|c| c.1),
        obj: Some(obj),
        srd: Some(srd),
        no_convergence: false,
    })
}

fn rel(target: f64, r: f64) -> Band {
    Band::Relative { target, rel: r }
}

fn table1() -> Vec<RowSpec> {
    let e = Experiment::Example1;
    let beta = (2.0, 3.0);
    let err_band = (Metric::ErrU, Band::Range(4.2e-3, 5.3e-3));
    let obj_band = (Metric::Obj, rel(3.36e-2, 0.02));
    let srd_band = (Metric::Srd, rel(7.94e-4, 0.10));
    let row = |label: &str, method, theta, level, reference, bands| RowSpec {
        label: label.into(),
        experiment: e,
        method,
        params: params(beta, theta),
        level,
        reference,
        bands,
    };
    let nc = Some(ReferenceValues {
        no_convergence: true,
        ..ReferenceValues::default()
    });
    vec![
        row("InADMM theta0/k^3", Method::InAdmm, K3, 6, pv(19, Some(4.71e-3), Some((5.68, 8)), 3.36e-2, 7.94e-4),
            vec![(Metric::Iterations, Band::Range(16.0, 22.0)), (Metric::CgAve, Band::AtMost(8.0)), err_band, obj_band, srd_band]),
        row("InADMM theta0/k^3", Method::InAdmm, K3, 7, pv(19, Some(1.19e-3), Some((5.79, 8)), 3.40e-2, 8.01e-4), vec![]),
        row("InADMM theta0/k^3", Method::InAdmm, K3, 8, pv(20, Some(2.99e-4), Some((5.10, 8)), 3.41e-2, 8.04e-4), vec![]),
        row("InADMM theta0/2^k", Method::InAdmm, TWO_K, 5, None, vec![]),
        row("InADMM theta0/2^k", Method::InAdmm, TWO_K, 6, pv(20, Some(4.71e-3), Some((8.55, 15)), 3.36e-2, 7.94e-4),
            vec![(Metric::Iterations, Band::Range(17.0, 23.0)), err_band, obj_band, srd_band, (Metric::CgAve, Band::AtMost(12.0))]),
        row("InADMM theta0/2^k", Method::InAdmm, TWO_K, 7, pv(20, Some(1.20e-3), Some((8.65, 15)), 3.40e-2, 8.02e-4), vec![]),
        row("InADMM theta0/2^k", Method::InAdmm, TWO_K, 8, pv(21, Some(2.96e-4), Some((9.14, 16)), 3.41e-2, 8.04e-4), vec![]),
        row("ADMMCG", Method::AdmmCg, TWO_K, 6, pv(15, Some(4.69e-3), Some((31.13, 52)), 3.36e-2, 7.94e-4),
            vec![(Metric::Iterations, Band::Range(12.0, 18.0)), err_band, (Metric::CgAve, Band::Range(20.0, 45.0))]),
        row("ADMMCG", Method::AdmmCg, TWO_K, 7, pv(15, Some(1.18e-3), Some((29.13, 51)), 3.40e-2, 8.02e-4), vec![]),
        row("ADMMCG", Method::AdmmCg, TWO_K, 8, pv(15, Some(2.88e-4), Some((27.87, 48)), 3.41e-2, 8.03e-4), vec![]),
        row("PGD", Method::Pgd, TWO_K, 6, pv(288, Some(5.77e-3), None, 3.36e-2, 7.95e-4),
            vec![(Metric::Iterations, Band::Range(200.0, 400.0)), (Metric::ErrU, Band::Range(5.0e-3, 7.0e-3))]),
        row("PGD", Method::Pgd, TWO_K, 7, pv(700, Some(1.24e-3), None, 3.40e-2, 8.02e-4), vec![]),
        row("PGD", Method::Pgd, TWO_K, 8, nc, vec![]),
    ]
}

fn table2() -> Vec<RowSpec> {
    let e = Experiment::Example2;
    let beta = (8.0, 8.0);
    let q14 = ThetaSchedule::Geometric { q: 1.0 / 1.4 };
    let obj_band = (Metric::Obj, rel(1.19e3, 0.02));
    let srd_band = (Metric::Srd, rel(0.816, 0.02));
    let row = |label: &str, method, theta, level, reference, bands| RowSpec {
        label: label.into(),
        experiment: e,
        method,
        params: params(beta, theta),
        level,
        reference,
        bands,
    };
    let nc = Some(ReferenceValues {
        no_convergence: true,
        ..ReferenceValues::default()
    });
    vec![
        row("InADMM theta0/k^3", Method::InAdmm, K3, 6, pv(34, None, Some((4.56, 8)), 1.19e3, 0.816), vec![obj_band, srd_band]),
        row("InADMM theta0/k^3", Method::InAdmm, K3, 7, pv(34, None, Some((3.94, 6)), 1.21e3, 0.822), vec![]),
        row("InADMM theta0/k^3", Method::InAdmm, K3, 8, pv(35, None, Some((3.66, 5)), 1.22e3, 0.825), vec![]),
        row("InADMM theta0/1.4^k", Method::InAdmm, q14, 6, pv(38, None, Some((2.68, 4)), 1.19e3, 0.816),
            vec![(Metric::Iterations, Band::Range(33.0, 44.0)), (Metric::CgAve, Band::AtMost(4.0)), obj_band, srd_band]),
        row("InADMM theta0/1.4^k", Method::InAdmm, q14, 7, pv(39, None, Some((2.69, 5)), 1.21e3, 0.822), vec![]),
        row("InADMM theta0/1.4^k", Method::InAdmm, q14, 8, pv(39, None, Some((2.64, 5)), 1.22e3, 0.825), vec![]),
        row("ADMMCG", Method::AdmmCg, q14, 6, pv(35, None, Some((31.46, 79)), 1.19e3, 0.816), vec![obj_band, srd_band]),
        row("ADMMCG", Method::AdmmCg, q14, 7, pv(35, None, Some((22.63, 38)), 1.21e3, 0.822), vec![]),
        row("ADMMCG", Method::AdmmCg, q14, 8, pv(35, None, Some((21.03, 30)), 1.22e3, 0.825), vec![]),
        row("PGD", Method::Pgd, q14, 6, pv(405, None, None, 1.19e3, 0.818), vec![obj_band, srd_band]),
        row("PGD", Method::Pgd, q14, 7, pv(488, None, None, 1.21e3, 0.824), vec![]),
        row("PGD", Method::Pgd, q14, 8, nc, vec![]),
    ]
}

/// Rows shared by tables 3 and 4: three methods times four weights.
#[allow(clippy::type_complexity)]
fn sparse_table(
    make: fn(f64) -> Experiment,
    alt: (ThetaSchedule, &str),
    cases: [(f64, (f64, f64)); 4],
    reference: [[(usize, (f64, usize)); 4]; 3],
    obj_srd: [(f64, f64); 4],
    bands: impl Fn(usize, usize) -> Vec<(Metric, Band)>,
) -> Vec<RowSpec> {
    let methods = [
        (Method::InAdmm, K3, "InADMM theta0/k^3".to_string()),
        (Method::InAdmm, alt.0, format!("InADMM {}", alt.1)),
        (Method::AdmmCg, K3, "ADMMCG".to_string()),
    ];
    let mut rows = Vec::new();
    for (mi, (method, theta, label)) in methods.iter().enumerate() {
        for (ci, &(gamma_s, beta)) in cases.iter().enumerate() {
            let (its, cg) = reference[mi][ci];
            let (obj, srd) = obj_srd[ci];
            rows.push(RowSpec {
                label: format!("{label} gamma_s={gamma_s} beta=({},{})", beta.0, beta.1),
                experiment: make(gamma_s),
                method: *method,
                params: params(beta, *theta),
                level: 6,
                reference: pv(its, None, Some(cg), obj, srd),
                bands: bands(mi, ci),
            });
        }
    }
    rows
}

fn table3() -> Vec<RowSpec> {
    sparse_table(
        |g| Experiment::Example3 { gamma_s: g },
        (TWO_K, "theta0/2^k"),
        [(0.1, (2.0, 3.0)), (0.5, (2.0, 3.0)), (5.0, (10.0, 10.0)), (10.0, (10.0, 10.0))],
        [
            [(18, (5.50, 9)), (25, (5.72, 8)), (65, (5.89, 7)), (111, (5.53, 7))],
            [(21, (9.29, 19)), (23, (10.83, 21)), (66, (11.02, 17)), (111, (8.45, 16))],
            [(20, (26.00, 46)), (22, (28.23, 46)), (61, (16.36, 19)), (108, (14.84, 29))],
        ],
        [(3.43e-2, 1.02e-3), (4.22e-2, 1.88e-3), (2.59e-1, 7.74e-3), (5.06e-1, 1.10e-2)],
        |mi, ci| match (mi, ci) {
            (0, 0) => vec![(Metric::Obj, rel(3.43e-2, 0.02)), (Metric::Srd, rel(1.02e-3, 0.10))],
            (0, 3) => vec![(Metric::Obj, rel(5.06e-1, 0.02)), (Metric::Iterations, Band::Range(100.0, 122.0))],
            _ => vec![],
        },
    )
}

fn table4() -> Vec<RowSpec> {
    sparse_table(
        |g| Experiment::Example4 { gamma_s: g },
        (ThetaSchedule::Geometric { q: 1.0 / 1.3 }, "theta0/1.3^k"),
        [(1.0, (8.0, 8.0)), (10.0, (8.0, 8.0)), (50.0, (10.0, 10.0)), (500.0, (10.0, 10.0))],
        [
            [(34, (4.62, 8)), (33, (4.70, 8)), (37, (3.84, 6)), (46, (3.28, 4))],
            [(44, (2.16, 4)), (46, (2.17, 4)), (49, (2.18, 4)), (57, (2.44, 5))],
            [(33, (20.00, 46)), (32, (20.13, 46)), (30, (19.13, 41)), (35, (17.97, 31))],
        ],
        [(1.19e3, 0.816), (1.19e3, 0.816), (1.20e3, 0.819), (1.25e3, 0.836)],
        |mi, ci| match (mi, ci) {
            (0, 0) => vec![(Metric::Obj, rel(1.19e3, 0.02)), (Metric::Srd, rel(0.816, 0.02))],
            (0, 3) => vec![(Metric::Obj, rel(1.25e3, 0.02)), (Metric::Srd, rel(0.836, 0.02))],
            _ => vec![],
        },
    )
}

pub fn row_specs(id: u32) -> Result<Vec<RowSpec>> {
    match id {
        1 => Ok(table1()),
        2 => Ok(table2()),
        3 => Ok(table3()),
        4 => Ok(table4()),
        _ => Err(Error::Config(format!("table id must be 1..4, got {id}"))),
    }
}

/// Parses a mesh cap written as `2^-L` or `L`.
pub fn parse_cap(s: &str) -> Result<u32> {
    let digits = s.trim().strip_prefix("2^-").unwrap_or(s.trim());
    match digits.parse::<u32>() {
        Ok(l @ 5..=8) => Ok(l),
        _ => Err(Error::Config(format!("mesh cap must be one of 2^-6, 2^-7, 2^-8, got '{s}'"))),
    }
}

pub fn run_row(spec: &RowSpec) -> Result<RowResult> {
    let n = spec.mesh();
    let problem = spec.experiment.spec()?.assemble(n, n)?;
    let start = Instant::now();
    let report = solve(&problem, &spec.params, spec.method)?;
    let wall_seconds = start.elapsed().as_secs_f64();
    let last = report
        .last()
        .ok_or_else(|| Error::Numeric("solver produced no iterations".into()))?;
    Ok(RowResult {
        iterations: report.iterations(),
        err_u: last.err_u,
        wall_seconds,
        cg_ave: report.cg_ave(),
        cg_max: report.cg_max(),
        obj: last.obj,
        srd: last.srd,
        status: report.status,
        zero_fraction: crate::harness::output::zero_fraction(&report.final_iterate.z),
    })
}

pub fn row_checks(spec: &RowSpec, result: &RowResult) -> Vec<Check> {
    let mut checks = Vec::new();
    if let Some(reference) = spec.reference {
        let expect_converged = !reference.no_convergence;
        checks.push(Check {
            name: "status".into(),
            value: None,
            expected: if expect_converged { "converged" } else { "not converged" }.into(),
            pass: (result.status == SolveStatus::Converged) == expect_converged,
        });
    }
    for &(metric, band) in &spec.bands {
        let value = result.metric(metric);
        checks.push(Check {
            name: metric.name().into(),
            value,
            expected: band.describe(),
            pass: value.is_some_and(|v| band.contains(v)),
        });
    }
    checks
}

fn find<'a>(rows: &'a [TableRow], label: &str, level: u32) -> Option<&'a RowResult> {
    rows.iter()
        .find(|r| r.spec.label == label && r.spec.level == level)
        .and_then(|r| match &r.outcome {
            RowOutcome::Computed(res) => Some(res),
            _ => None,
        })
}

/// Cross-row checks: mesh order and the inexact-versus-exact CG effort.
pub fn table_checks(id: u32, rows: &[TableRow]) -> Vec<Check> {
    let mut checks = Vec::new();
    if id == 1 {
        let admm = find(rows, "ADMMCG", 6).map(|r| r.cg_ave);
        for label in ["InADMM theta0/k^3", "InADMM theta0/2^k"] {
            if let (Some(inexact), Some(exact)) = (find(rows, label, 6).map(|r| r.cg_ave), admm) {
                checks.push(Check {
                    name: format!("{label} cg_ave < ADMMCG cg_ave"),
                    value: Some(inexact),
                    expected: format!("< {exact}"),
                    pass: inexact < exact,
                });
            }
        }
        let err = |level| find(rows, "InADMM theta0/2^k", level).and_then(|r| r.err_u);
        for (coarse, fine) in [(5, 6), (6, 7)] {
            if let (Some(a), Some(b)) = (err(coarse), err(fine)) {
                let ratio = a / b;
                checks.push(Check {
                    name: format!("err_u(2^-{coarse}) / err_u(2^-{fine})"),
                    value: Some(ratio),
                    expected: Band::Range(3.0, 5.0).describe(),
                    pass: Band::Range(3.0, 5.0).contains(ratio),
                });
            }
        }
    }
    checks
}

/// Runs every row at or below the mesh cap; per-row errors are recorded and
/// do not stop the table.
pub fn reproduce_table(id: u32, cap: u32) -> Result<TableReport> {
    let specs = row_specs(id)?;
    let mut rows = Vec::with_capacity(specs.len());
    for spec in specs {
        let (outcome, checks) = if spec.level > cap {
            (RowOutcome::Skipped, Vec::new())
        } else {
            match run_row(&spec) {
                Ok(result) => {
                    let checks = row_checks(&spec, &result);
                    (RowOutcome::Computed(result), checks)
                }
                Err(e) => (RowOutcome::Failed(e.to_string()), Vec::new()),
            }
        };
        rows.push(TableRow { spec, outcome, checks });
    }
    let checks = table_checks(id, &rows);
    Ok(TableReport { id, cap, rows, checks })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6e}")).unwrap_or_default()
}

/// Deterministic CSV of the table (wall-clock time is left out).
pub fn table_csv(report: &TableReport) -> String {
    let mut out = String::from(
        "label,method,theta,gamma_s,beta0,beta1,h,tau,status,iterations,err_u,cg_ave,cg_max,Obj,SRD,\
         ref_iterations,ref_err_u,ref_cg_ave,ref_cg_max,ref_Obj,ref_SRD,checks\n",
    );
    for row in &report.rows {
        let s = &row.spec;
        let h = format!("2^-{}", s.level);
        let (status, cols) = match &row.outcome {
            RowOutcome::Computed(r) => (
                format!("{:?}", r.status).to_lowercase(),
                format!(
                    "{},{},{:.6e},{},{:.6e},{:.6e}",
                    r.iterations,
                    opt(r.err_u),
                    r.cg_ave,
                    r.cg_max,
                    r.obj,
                    r.srd
                ),
            ),
            RowOutcome::Skipped => ("skipped".into(), ",,,,,".into()),
            RowOutcome::Failed(e) => (format!("failed: {}", e.replace(',', ";")), ",,,,,".into()),
        };
        let p = s.reference.unwrap_or_default();
        let verdict = if row.checks.is_empty() {
            String::new()
        } else if row.checks.iter().all(|c| c.pass) {
            "pass".into()
        } else {
            "fail".into()
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{h},{h},{status},{cols},{},{},{},{},{},{},{verdict}",
            s.label.replace(',', ";"),
            s.method.name(),
            s.schedule_label(),
            s.experiment.gamma_s(),
            s.params.beta0,
            s.params.beta1,
            p.iterations.map(|v| v.to_string()).unwrap_or_default(),
            opt(p.err_u),
            opt(p.cg_ave),
            p.cg_max.map(|v| v.to_string()).unwrap_or_default(),
            opt(p.obj),
            opt(p.srd),
        );
    }
    out
}

/// Side-by-side text rendering, including wall times.
pub fn render(report: &TableReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Table {} (mesh cap 2^-{})", report.id, report.cap);
    let _ = writeln!(
        out,
        "{:<44} {:>6} {:>10} {:>18} {:>12} {:>14} {:>12} {:>9}",
        "row", "h", "iter", "err_u", "cg ave/max", "Obj", "SRD", "time(s)"
    );
    for row in &report.rows {
        let s = &row.spec;
        let p = s.reference.unwrap_or_default();
        let ref_it = p.iterations.map(|v| v.to_string()).unwrap_or_else(|| "-".into());
        let line = match &row.outcome {
            RowOutcome::Computed(r) => format!(
                "{:>10} {:>18} {:>12} {:>14} {:>12} {:>9.2}",
                format!("{}({})", r.iterations, ref_it),
                r.err_u.map(|e| format!("{e:.3e}")).unwrap_or_else(|| "-".into()),
                format!("{:.2}/{}", r.cg_ave, r.cg_max),
                format!("{:.4e}", r.obj),
                format!("{:.4e}", r.srd),
                r.wall_seconds
            ),
            RowOutcome::Skipped => "skipped (above mesh cap)".into(),
            RowOutcome::Failed(e) => format!("failed: {e}"),
        };
        let _ = writeln!(out, "{:<44} {:>6} {}", s.label, format!("2^-{}", s.level), line);
        for c in &row.checks {
            let _ = writeln!(
                out,
                "    [{}] {} = {} expected {}",
                if c.pass { "pass" } else { "FAIL" },
                c.name,
                c.value.map(|v| format!("{v:.6e}")).unwrap_or_else(|| "-".into()),
                c.expected
            );
        }
    }
    for c in &report.checks {
        let _ = writeln!(
            out,
            "[{}] {} = {} expected {}",
            if c.pass { "pass" } else { "FAIL" },
            c.name,
            c.value.map(|v| format!("{v:.6e}")).unwrap_or_else(|| "-".into()),
            c.expected
        );
    }
    out
}
