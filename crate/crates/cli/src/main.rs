mod commands;
mod error;
mod scenario;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use commands::{Mode, Outcome};

#[derive(Parser)]
#[command(name = "geodyn", version, about = "Geometric dynamics of first-order flows")]
struct Cli {
    /// Worker threads for batches of scenario files.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Directory for trajectories and reports (default: next to each scenario).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate scenarios, write trajectory CSV and diagnostics JSON.
    Simulate {
        #[arg(required = true)]
        scenarios: Vec<PathBuf>,
    },
    /// Integrate scenarios and run their checks; writes only the report.
    Verify {
        #[arg(required = true)]
        scenarios: Vec<PathBuf>,
    },
    /// List the built-in flows with their stored data.
    Flows,
    /// Newton search for equilibria on a seed grid.
    Equilibria {
        #[arg(required = true)]
        scenarios: Vec<PathBuf>,
    },
}

fn batch<F>(files: &[PathBuf], jobs: usize, run: F) -> Vec<Outcome>
where
    F: Fn(&std::path::Path) -> Outcome + Sync,
{
    if jobs <= 1 || files.len() <= 1 {
        return files.iter().map(|f| run(f)).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(|| files.par_iter().map(|f| run(f)).collect()),
        Err(_) => files.iter().map(|f| run(f)).collect(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.jobs == 0 {
        eprintln!("error: --jobs must be at least 1");
        return ExitCode::from(2);
    }
    let out_dir = cli.out_dir.as_deref();
    let outcomes = match &cli.command {
        Command::Simulate { scenarios } => batch(scenarios, cli.jobs, |p| commands::simulate(p, Mode::Simulate, out_dir)),
        Command::Verify { scenarios } => batch(scenarios, cli.jobs, |p| commands::simulate(p, Mode::Verify, out_dir)),
        Command::Equilibria { scenarios } => batch(scenarios, cli.jobs, commands::equilibria),
        Command::Flows => vec![commands::list_flows()],
    };
    let mut code = 0;
    let (mut stdout, mut stderr) = (std::io::stdout().lock(), std::io::stderr().lock());
    for o in outcomes {
        let _ = stdout.write_all(o.stdout.as_bytes());
        let _ = stderr.write_all(o.stderr.as_bytes());
        code = code.max(o.code);
    }
    ExitCode::from(code)
}
