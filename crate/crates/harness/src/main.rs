use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ddlab_harness::{direct_oracle, output, run_experiment, variants, ExperimentConfig, Result};

/// Domain decomposition experiments from key-value config files.
#[derive(Parser)]
#[command(name = "ddlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one configuration and validate it against the direct solution.
    Run {
        config: PathBuf,
        /// Replace a config key, `key=value`; repeatable.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Residual history output.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Convergence plot output.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Run every combination of the varied keys and print a comparison table.
    Compare {
        config: PathBuf,
        /// `key=a,b,...`; repeatable, combinations are the cartesian product.
        #[arg(long, value_name = "KEY=A,B,..")]
        vary: Vec<String>,
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Report as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// All convergence curves in one plot.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Solve the assembled system directly.
    Oracle {
        config: PathBuf,
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Write `dof,value` rows of the solution.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(path: &Path, overrides: &[String]) -> Result<ExperimentConfig> {
    ExperimentConfig::from_file(path)?.with_overrides(overrides)
}

fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { config, mut overrides, csv, svg } => {
            if let Some(p) = csv {
                overrides.push(format!("csv={}", p.display()));
            }
            if let Some(p) = svg {
                overrides.push(format!("svg={}", p.display()));
            }
            let cfg = load(&config, &overrides)?;
            let outcome = run_experiment(&cfg)?;
            print!("{}", output::report_table(std::slice::from_ref(&outcome.row)));
            println!("termination: {:?}, {:.3} s", outcome.solution.krylov.termination, outcome.seconds);
            Ok(outcome.row.succeeded())
        }
        Command::Compare { config, vary, overrides, csv, svg } => {
            let base = load(&config, &overrides)?;
            let configs = variants(&base, &vary)?;
            let outcomes = configs.iter().map(run_experiment).collect::<Result<Vec<_>>>()?;
            let rows: Vec<_> = outcomes.iter().map(|o| o.row.clone()).collect();
            print!("{}", output::report_table(&rows));
            if let Some(p) = csv {
                output::write_file(&p, &output::report_csv(&rows))?;
            }
            if let Some(p) = svg {
                let curves: Vec<_> = outcomes
                    .iter()
                    .map(|o| (format!("{} {}", o.row.hash, o.row.label), &o.solution.history))
                    .collect();
                output::write_file(&p, &output::convergence_svg(&curves))?;
            }
            Ok(rows.iter().all(|r| r.succeeded()))
        }
        Command::Oracle { config, overrides, out } => {
            let cfg = load(&config, &overrides)?;
            let dec = cfg.problem.build()?;
            let u = direct_oracle(&cfg)?;
            println!(
                "{}: {} dofs, |u| = {:e}, residual {:e}",
                cfg.name,
                u.len(),
                u.norm(),
                dec.global_residual(&u)
            );
            if let Some(p) = out {
                let mut text = String::from("dof,value\n");
                for (i, v) in u.iter().enumerate() {
                    text.push_str(&format!("{i},{v:e}\n"));
                }
                output::write_file(&p, &text)?;
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
