use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use webgeom_cli::commands::parse_point;
use webgeom_cli::{cmd_check, cmd_invariants, cmd_solve1, cmd_symdim, Outcome, Solve1Options};

/// Invariants and web equivalence of autonomous ODE systems.
#[derive(Parser)]
#[command(name = "webgeom", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Torsion, normalizer, invariant coframe and structure functions.
    Invariants {
        file: PathBuf,
        #[arg(long)]
        json: bool,
        /// Evaluation point `t,x1,...,xn` (default: box center).
        #[arg(long, value_parser = point_arg, allow_hyphen_values = true)]
        point: Option<PointArg>,
    },
    /// Verify a web map between two systems, or compare invariant signatures.
    Check {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        map: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long)]
        json: bool,
    },
    /// Construct the web map between two scalar equations.
    Solve1 {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, num_args = 2, value_names = ["X0", "Y0"], allow_hyphen_values = true)]
        anchor: Option<Vec<f64>>,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_hyphen_values = true)]
        range: Option<Vec<f64>>,
        /// CSV table `x,phi1,residual`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Estimate the dimension of the symmetry group.
    Symdim {
        file: PathBuf,
        #[arg(long, default_value_t = 12)]
        probes: usize,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone)]
struct PointArg(Vec<f64>);

fn point_arg(text: &str) -> Result<PointArg, String> {
    parse_point(text).map(PointArg)
}

fn pair(v: Option<Vec<f64>>) -> Option<(f64, f64)> {
    v.map(|v| (v[0], v[1]))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (outcome, json): (Outcome, bool) = match cli.command {
        Command::Invariants { file, json, point } => (
            cmd_invariants(&file, point.as_ref().map(|p| &p.0[..])),
            json,
        ),
        Command::Check {
            a,
            b,
            map,
            samples,
            json,
        } => (cmd_check(&a, &b, map.as_deref(), samples), json),
        Command::Solve1 {
            a,
            b,
            anchor,
            range,
            out,
            json,
        } => {
            let opts = Solve1Options {
                anchor: pair(anchor),
                range: pair(range),
                out: out.as_deref(),
            };
            (cmd_solve1(&a, &b, &opts), json)
        }
        Command::Symdim { file, probes, json } => (cmd_symdim(&file, probes), json),
    };
    if json {
        println!("{}", outcome.report.to_json());
    } else {
        print!("{}", outcome.report.to_text());
    }
    if let Some(e) = &outcome.report.error {
        eprintln!("webgeom: {} failed: {}", e.stage, e.message);
    }
    ExitCode::from(outcome.code as u8)
}
