//! Building, solving, and validating one configured experiment.

use std::time::Instant;

use log::{info, warn};
use nalgebra::DVector;

use ddlab::{relative_error, solve, Decomposition, Solution};

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::output;

/// One line of the comparison report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub label: String,
    pub hash: String,
    pub iterations: usize,
    pub converged: bool,
    /// Global residual of the starting iterate.
    pub initial_residual: f64,
    pub final_residual: f64,
    pub oracle_error: Option<f64>,
    pub validated: bool,
}

impl ReportRow {
    pub fn log10_initial(&self) -> f64 {
        self.initial_residual.log10()
    }

    pub fn succeeded(&self) -> bool {
        self.converged && self.validated
    }
}

pub struct Outcome {
    pub config: ExperimentConfig,
    pub solution: Solution,
    pub oracle: Option<DVector<f64>>,
    pub row: ReportRow,
    pub seconds: f64,
}

/// Assembled-system solution `u_g` of the configured problem.
pub fn direct_oracle(config: &ExperimentConfig) -> Result<DVector<f64>> {
    let dec = config.problem.build()?;
    Ok(dec.direct_solve()?)
}

/// Builds the problem, runs the configured solver, compares with the oracle
/// when validation is on, and writes the CSV and SVG outputs named in the config.
///
/// A solver that does not converge is not an error: the outcome carries the
/// history and `row.converged == false`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Outcome> {
    let start = Instant::now();
    let dec = config.problem.build()?;
    info!(
        "{}: {} subdomains, {} global dofs, {} multipliers",
        config.name,
        dec.len(),
        dec.trace.global_count,
        dec.multiplier_count()
    );
    let solution = solve(&dec, &config.options)?;
    let seconds = start.elapsed().as_secs_f64();
    let oracle = if config.validate { Some(dec.direct_solve()?) } else { None };
    let row = report_row(config, &dec, &solution, oracle.as_ref());
    if !row.converged {
        warn!("{}: stopped after {} iterations ({:?})", config.name, row.iterations, solution.krylov.termination);
    }
    if let (Some(err), false) = (row.oracle_error, row.validated) {
        warn!("{}: oracle error {err:.3e} above {:.1e}", config.name, config.oracle_tolerance);
    }

    if let Some(path) = &config.csv {
        output::write_file(path, &output::history_csv(&solution.history))?;
    }
    if let Some(path) = &config.svg {
        let label = format!("{} ({})", config.name, row.hash);
        output::write_file(path, &output::convergence_svg(&[(label, &solution.history)]))?;
    }
    Ok(Outcome {
        config: config.clone(),
        solution,
        oracle,
        row,
        seconds,
    })
}

fn report_row(config: &ExperimentConfig, dec: &Decomposition, sol: &Solution, oracle: Option<&DVector<f64>>) -> ReportRow {
    let oracle_error = oracle.map(|u| relative_error(&sol.u, u));
    let validated = oracle_error.is_none_or(|e| e <= config.oracle_tolerance);
    ReportRow {
        label: config.name.clone(),
        hash: config.hash(),
        iterations: sol.iterations(),
        converged: sol.converged(),
        initial_residual: sol.history.initial_global().unwrap_or(f64::NAN),
        final_residual: sol.history.final_global().unwrap_or_else(|| dec.global_residual(&sol.u)),
        oracle_error,
        validated,
    }
}

/// Cartesian product of `key=a,b,...` variations applied to `base`.
///
/// Each variant is renamed after its assignments so report rows and plot
/// curves can be told apart.
pub fn variants(base: &ExperimentConfig, vary: &[String]) -> Result<Vec<ExperimentConfig>> {
    let mut axes: Vec<(String, Vec<String>)> = Vec::new();
    for v in vary {
        let (key, values) = v
            .split_once('=')
            .ok_or_else(|| crate::HarnessError::Config(format!("--vary expects key=a,b,..., got `{v}`")))?;
        let values: Vec<String> = values.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
        if values.is_empty() {
            return Err(crate::HarnessError::Config(format!("--vary `{key}` has no values")));
        }
        axes.push((key.trim().to_string(), values));
    }
    let mut combos: Vec<Vec<String>> = vec![Vec::new()];
    for (key, values) in &axes {
        combos = combos
            .into_iter()
            .flat_map(|c| {
                values.iter().map(move |v| {
                    let mut c = c.clone();
                    c.push(format!("{key}={v}"));
                    c
                })
            })
            .collect();
    }
    combos
        .into_iter()
        .map(|assignments| {
            let mut all = assignments.clone();
            if !assignments.is_empty() {
                all.push(format!("name={} [{}]", base.name, assignments.join(" ")));
            }
            // per-run outputs would overwrite each other
            all.push("csv=".into());
            all.push("svg=".into());
            base.with_overrides(&all)
        })
        .collect()
}
