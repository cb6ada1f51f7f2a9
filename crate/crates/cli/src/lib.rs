//! Command-line front end: scenario parsing, pipelines and output files.

pub mod demos;
pub mod error;
pub mod output;
pub mod run;
pub mod scenario;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::CliError;
use crate::run::{run, Mode};
use crate::scenario::{parse_scenario, validate_integrator, Scenario};

#[derive(Debug, Parser)]
#[command(name = "splane", version, about = "Exact and numerical trajectories of a solvable planar many-body model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the closed-form solution.
    Solve(ScenarioArgs),
    /// Integrate the equations of motion numerically.
    Integrate(ScenarioArgs),
    /// Run both and report their deviation.
    Compare(ScenarioArgs),
    /// Classify the spectrum of the coupling matrix.
    Classify(ScenarioArgs),
    /// Run a built-in scenario in compare mode.
    Demo(DemoArgs),
}

#[derive(Debug, Args)]
pub struct Overrides {
    /// Directory for output files.
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    /// Number of equally spaced output samples.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub rtol: Option<f64>,
    #[arg(long)]
    pub atol: Option<f64>,
    /// Also write two-column plot data files.
    #[arg(long)]
    pub plot_data: bool,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    pub scenario: PathBuf,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    /// One of: circle, damped, periodic-2-3, similarity, pair.
    pub name: String,
    #[command(flatten)]
    pub overrides: Overrides,
}

fn apply(mut s: Scenario, o: &Overrides) -> Result<Scenario, CliError> {
    if let Some(n) = o.samples {
        s.integrator.sample_count = n;
    }
    if let Some(r) = o.rtol {
        s.integrator.rtol = r;
    }
    if let Some(a) = o.atol {
        s.integrator.atol = a;
    }
    s.outputs.plot_data |= o.plot_data;
    validate_integrator(&s.integrator)?;
    Ok(s)
}

/// Runs one command and returns the lines to print on success.
pub fn execute(cli: Cli) -> Result<Vec<String>, CliError> {
    let (mode, scenario, out_dir) = match cli.command {
        Command::Solve(a) => (Mode::Solve, apply(parse_scenario(&a.scenario)?, &a.overrides)?, a.overrides.out_dir),
        Command::Integrate(a) => (Mode::Integrate, apply(parse_scenario(&a.scenario)?, &a.overrides)?, a.overrides.out_dir),
        Command::Compare(a) => (Mode::Compare, apply(parse_scenario(&a.scenario)?, &a.overrides)?, a.overrides.out_dir),
        Command::Classify(a) => (Mode::Classify, apply(parse_scenario(&a.scenario)?, &a.overrides)?, a.overrides.out_dir),
        Command::Demo(a) => (Mode::Compare, apply(demos::demo(&a.name)?, &a.overrides)?, a.overrides.out_dir),
    };
    let outcome = run(mode, &scenario, &out_dir)?;
    let mut lines = Vec::new();
    if let Some(c) = &outcome.comparison {
        lines.push(format!("max_position_abs: {}", output::fmt_f64(c.max_position_abs)));
        lines.push(format!("max_position_rel: {}", output::fmt_f64(c.max_position_rel)));
    }
    if let Some(c) = &outcome.classification {
        lines.push(format!("summary: {}", c.summary()));
    }
    lines.extend(outcome.files.iter().map(|f| format!("wrote {}", f.display())));
    Ok(lines)
}
