//! Scenario-driven command-line front end for the curve shortening flow
//! laboratory: build glued initial curves, run ladders of flows, verify the
//! quantitative estimates, and render SVG figures.

mod artifacts;
mod commands;
mod driver;
mod scenario;
mod svg;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::artifacts::Layout;
use crate::scenario::{check_invariants, load_scenario, Scenario};

#[derive(Parser)]
#[command(
    name = "labcli",
    about = "Laboratory for curve shortening flow on glued soliton chains",
    after_help = "Environment:\n  LABCLI_OUT  default output root \
                  (overridden by the scenario's output_dir, then by --out)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct initial curves for every start time and report corners,
    /// barriers and axis crossings
    Build(CommonArgs),
    /// Run the ladder of flows to the end time, writing diagnostics CSVs,
    /// snapshot CSVs and SVG frames
    Flow(CommonArgs),
    /// Run verification suites; exits nonzero unless every check passes
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Run a single suite instead of the scenario's enabled list
        #[arg(long)]
        suite: Option<String>,
    },
    /// Re-render layered SVG frames from existing build/flow artifacts
    Render(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario file (TOML)
    scenario: PathBuf,
    /// Output root (default: scenario output_dir, then $LABCLI_OUT,
    /// then ./artifacts)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the spatial resolution h
    #[arg(long)]
    resolution: Option<f64>,
    /// Override the time step
    #[arg(long)]
    dt: Option<f64>,
}

impl CommonArgs {
    fn scenario(&self) -> anyhow::Result<(Scenario, Layout)> {
        let mut sc = load_scenario(&self.scenario)?;
        if let Some(h) = self.resolution {
            sc.flow.resolution = h;
        }
        if let Some(dt) = self.dt {
            sc.flow.dt = Some(dt);
        }
        if self.resolution.is_some() || self.dt.is_some() {
            check_invariants(&sc)?;
        }
        let layout = Layout::new(&sc, self.out.as_deref());
        Ok((sc, layout))
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Build(args) => {
            let (sc, layout) = args.scenario()?;
            commands::cmd_build(&sc, &layout)?;
            Ok(true)
        }
        Command::Flow(args) => {
            let (sc, layout) = args.scenario()?;
            commands::cmd_flow(&sc, &layout)
        }
        Command::Verify { common, suite } => {
            let (sc, layout) = common.scenario()?;
            if let Some(name) = suite.as_deref() {
                if !verify::SUITE_NAMES.contains(&name) {
                    anyhow::bail!(
                        "unknown suite {name:?}; known suites: {}",
                        verify::SUITE_NAMES.join(", ")
                    );
                }
            }
            commands::cmd_verify(&sc, &layout, suite.as_deref())
        }
        Command::Render(args) => {
            let (sc, layout) = args.scenario()?;
            commands::cmd_render(&sc, &layout)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
