//! `occlp`: solve average-cost control problems from a config file.
//!
//! Exit codes: 0 success, 1 configuration or IO error, 2 infeasible, 3 no
//! convergence. Failures print one line `error[<kind>]: <reason>` on stderr.
//! The thread count follows `RAYON_NUM_THREADS`.

mod artifacts;
mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use occlp::geometry::Domain;
use occlp::oracle::{cheeger_constant, cheeger_set_perimeter, double_well_oracle};

use config::{Mode, RunConfig};
use run::{RunError, RunSummary};

#[derive(Parser)]
#[command(name = "occlp", version, about = "Average-cost planar control by occupational-measure LPs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// Write the SVG overlay here.
    #[arg(long, value_name = "PATH")]
    emit_svg: Option<PathBuf>,
    /// Write CSV tables into this directory.
    #[arg(long, value_name = "DIR")]
    emit_csv: Option<PathBuf>,
    /// Do not print the summary.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the mode named in the config.
    Solve {
        config: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Solve, split the measure into pieces and verify the alternating
    /// schedule.
    Schedule {
        config: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Run a pinned sweep.
    Sweep {
        config: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Reference values without the LP.
    Oracle {
        #[command(subcommand)]
        which: OracleCommand,
    },
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Cheeger constant of a `width × height` rectangle.
    Rectangle { width: f64, height: f64 },
    /// Cheeger constant of a disk.
    Disk { radius: f64 },
    /// Cheeger constant of a convex polygon given as `x,y` vertices.
    Polygon {
        #[arg(required = true, num_args = 3.., allow_hyphen_values = true)]
        vertices: Vec<String>,
    },
    /// Double-well minimizer with the given mean.
    DoubleWell {
        #[arg(allow_hyphen_values = true)]
        mean: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {}", e.kind(), e.to_string().replace('\n', " "));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), RunError> {
    let (path, out, mode) = match cmd {
        Command::Solve { config, out } => (config, out, None),
        Command::Schedule { config, out } => (config, out, Some(Mode::Schedule)),
        Command::Sweep { config, out } => (config, out, Some(Mode::PinnedSweep)),
        Command::Oracle { which } => {
            print!("{}", oracle(which)?.render());
            return Ok(());
        }
    };
    let cfg = RunConfig::load(&path)?;
    if mode == Some(Mode::PinnedSweep) && cfg.sweep.is_none() {
        return Err(RunError::Config("sweep needs `sweep.pins`".into()));
    }
    let outcome = run::run(&cfg, mode)?;
    let text = outcome.summary.render();
    if let Some(p) = &cfg.output.summary {
        std::fs::write(p, &text).map_err(|e| RunError::Io(format!("{}: {e}", p.display())))?;
    }
    if let Some(dir) = out.emit_csv.as_ref().or(cfg.output.csv_dir.as_ref()) {
        artifacts::write_csv(&outcome, dir)?;
    }
    if let Some(p) = out.emit_svg.as_ref().or(cfg.output.svg.as_ref()) {
        artifacts::write_svg(&outcome, p)?;
    }
    if !out.quiet {
        print!("{text}");
    }
    Ok(())
}

fn oracle(which: OracleCommand) -> Result<RunSummary, RunError> {
    let mut s = RunSummary::default();
    let domain = match which {
        OracleCommand::DoubleWell { mean } => {
            let o = double_well_oracle(mean)?;
            s.num("value", o.v_star);
            s.num("lambda", o.lambda);
            s.num("support.1", o.support[0]);
            s.num("support.2", o.support[1]);
            return Ok(s);
        }
        OracleCommand::Rectangle { width, height } => Domain::rectangle(width, height)?,
        OracleCommand::Disk { radius } => Domain::disk(radius)?,
        OracleCommand::Polygon { vertices } => {
            let pts = vertices
                .iter()
                .map(|v| {
                    let xy: Vec<f64> = v.split(',').map(|t| t.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| {
                        RunError::Config(format!("vertex `{v}` is not `x,y`"))
                    })?;
                    match xy[..] {
                        [x, y] => Ok([x, y]),
                        _ => Err(RunError::Config(format!("vertex `{v}` is not `x,y`"))),
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            Domain::convex_polygon(pts)?
        }
    };
    let o = cheeger_constant(&domain)?;
    s.num("r_star", o.r_star);
    s.num("value", o.v_star);
    s.num("cheeger_constant", o.h_star);
    s.num("perimeter", cheeger_set_perimeter(&domain)?);
    Ok(s)
}
