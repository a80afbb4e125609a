use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use inadmm::admm::{solve, SolveStatus};
use inadmm::harness::output::{run, snapshot, FieldKind};
use inadmm::harness::table::{parse_cap, render, reproduce_table, table_csv};
use inadmm::harness::RunConfig;
use inadmm::Error;

#[derive(Parser)]
#[command(name = "inadmm", version, about = "Inexact ADMM for sparse parabolic optimal control")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one configuration and write iterations.csv, summary.json and snapshots.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Reproduce a benchmark table up to a mesh cap.
    Table {
        #[arg(long)]
        id: u32,
        /// Finest mesh to run: 2^-6, 2^-7 or 2^-8.
        #[arg(long, default_value = "2^-6")]
        cap: String,
        /// Also write the table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Solve and print one time level of u, z or y as a grid dump.
    Snapshot {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        field: String,
    },
}

enum Failure {
    Usage(String),
    NotConverged(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InnerNotConverged { .. } | Error::Diverged { .. } => Failure::NotConverged(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

fn status_failure(status: SolveStatus, what: &str) -> Result<(), Failure> {
    match status {
        SolveStatus::Converged => Ok(()),
        other => Err(Failure::NotConverged(format!("{what}: solver stopped with status {other:?}"))),
    }
}

fn load(path: &Path) -> Result<RunConfig, Failure> {
    RunConfig::from_file(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { config } => {
            let cfg = load(&config)?;
            let out = run(&cfg).map_err(|e| match Failure::from(e) {
                Failure::Usage(m) => Failure::Usage(format!("{m} (config {})", config.display())),
                Failure::NotConverged(m) => Failure::NotConverged(format!("{m} (config {})", config.display())),
            })?;
            let r = &out.report;
            println!(
                "{} {}: {:?} after {} iterations, cg {:.2}/{}, output in {}",
                cfg.problem.name(),
                r.method.name(),
                r.status,
                r.iterations(),
                r.cg_ave(),
                r.cg_max(),
                out.out_dir.display()
            );
            status_failure(r.status, &config.display().to_string())
        }
        Command::Table { id, cap, csv } => {
            let cap = parse_cap(&cap)?;
            let report = reproduce_table(id, cap)?;
            print!("{}", render(&report));
            if let Some(path) = csv {
                std::fs::write(&path, table_csv(&report))
                    .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            }
            Ok(())
        }
        Command::Snapshot { config, t, field } => {
            let field = FieldKind::parse(&field)?;
            let cfg = load(&config)?;
            let problem = cfg.problem_spec()?.assemble_with(cfg.m, cfg.n_t, cfg.lumped_mass)?;
            let report = solve(&problem, &cfg.params, cfg.solver)?;
            let snap = snapshot(&problem, &report, field, t)?;
            print!("{}", snap.to_text());
            status_failure(report.status, &config.display().to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::NotConverged(m)) => {
            eprintln!("not converged: {m}");
            ExitCode::from(2)
        }
    }
}
