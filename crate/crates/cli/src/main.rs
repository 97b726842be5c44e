use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};
use ribc_cli::commands::{self, IbcSet, SteerOptions, EXIT_ERROR};
use ribc_cli::problem::{self, Tolerances};
use ribc_cli::report::Report;

#[derive(Parser)]
#[command(name = "ribc", version, about = "Relaxed in-block controllability of affine systems on polytopes")]
struct Cli {
    /// Print the report as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Geometric / LP feasibility tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Strict invariance margin for the sufficiency gate.
    #[arg(long, global = true)]
    margin: Option<f64>,
    /// Initial extension factor along the equilibrium set.
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Bound on each input component in the vertex LPs.
    #[arg(long = "u-box", global = true)]
    u_box: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SetArg {
    X,
    Xprime,
}

#[derive(Subcommand)]
enum Command {
    /// In-block controllability of the system on X.
    CheckIbc {
        file: PathBuf,
        /// Polytope to check.
        #[arg(long, value_enum, default_value = "x")]
        set: SetArg,
    },
    /// Relaxed in-block controllability w.r.t. X through Xprime.
    CheckRibc { file: PathBuf },
    /// Build and simulate a steering plan; writes trajectory.csv and plot.svg.
    Steer {
        file: PathBuf,
        /// Plot coordinates (1-based).
        #[arg(long, num_args = 2, value_names = ["I", "J"], default_values_t = [1usize, 2])]
        proj: Vec<usize>,
        /// Use the single open-loop Gramian transfer instead of the composite plan.
        #[arg(long)]
        raw_gramian: bool,
        /// Directory for the artifacts.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// List the built-in examples.
    Fixtures {
        /// Also write each example as <name>.json into this directory.
        #[arg(long)]
        write: Option<PathBuf>,
    },
}

fn emit(report: &Report, json: bool) -> Result<()> {
    if json {
        println!("{}", serde_json::to_string_pretty(report)?);
    } else {
        print!("{}", report.render_text());
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<i32> {
    let overrides = Tolerances { tol: cli.tol, margin: cli.margin, u_box: cli.u_box, alpha: cli.alpha };
    let load = |file: &PathBuf| -> Result<problem::Problem> {
        let mut p = problem::load_problem(file)?;
        problem::apply(&mut p.opts, &overrides);
        Ok(p)
    };
    let report = match &cli.command {
        Command::CheckIbc { file, set } => {
            let set = match set {
                SetArg::X => IbcSet::X,
                SetArg::Xprime => IbcSet::Xprime,
            };
            commands::check_ibc(&load(file)?, set)?
        }
        Command::CheckRibc { file } => commands::check_ribc(&load(file)?)?,
        Command::Steer { file, proj, raw_gramian, out } => {
            if proj.iter().any(|&i| i == 0) {
                anyhow::bail!("--proj: coordinates are 1-based");
            }
            let opts = SteerOptions { proj: (proj[0] - 1, proj[1] - 1), raw_gramian: *raw_gramian, out_dir: out.clone() };
            commands::steer(&load(file)?, &opts)?
        }
        Command::Fixtures { write } => {
            let list = commands::fixtures_list();
            let written = match write {
                Some(dir) => commands::write_fixtures(dir)?,
                None => Vec::new(),
            };
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&list)?);
            } else {
                for f in &list {
                    println!("{:<10} {}\n           expected: {}", f.name, f.summary, f.expected);
                }
                for p in written {
                    println!("wrote {}", p.display());
                }
            }
            return Ok(0);
        }
    };
    emit(&report, cli.json)?;
    Ok(report.exit_code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            if cli.json {
                println!("{}", serde_json::json!({ "error": format!("{e:#}"), "exit_code": EXIT_ERROR }));
            }
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
