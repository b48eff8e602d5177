//! `ctoda`: command-line front end for the Toda, connection, Goldman and oper
//! computations.
//!
//! Exit codes: 0 success, 1 numerical failure (a diagnostic report is written
//! and its path printed), 2 invalid configuration or arguments.

mod commands;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;
use toda_core::Error;

#[derive(Parser, Debug)]
#[command(name = "ctoda", version, about = "Complex affine Toda solver and flat-connection checks")]
struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Print nothing on success.
    #[arg(long, global = true, conflicts_with = "json")]
    quiet: bool,
    /// Print the full report as JSON.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lie-theoretic tables.
    Lie {
        #[command(subcommand)]
        action: LieAction,
    },
    /// Solve the Toda system.
    Toda {
        #[command(subcommand)]
        action: TodaAction,
    },
    /// Assemble the flat connection and measure its curvature.
    Connection {
        #[command(subcommand)]
        action: ConnectionAction,
    },
    /// Holonomy of the assembled connection along grid loops.
    Holonomy(HolonomyArgs),
    /// Goldman pairing of tangent vectors.
    Goldman {
        #[command(subcommand)]
        action: GoldmanAction,
    },
    /// Oper connections on the marginal locus.
    Oper {
        #[command(subcommand)]
        action: OperAction,
    },
    /// Run the acceptance battery and write a CSV report.
    Suite(SuiteArgs),
}

#[derive(Subcommand, Debug)]
enum LieAction {
    Dump {
        #[arg(long = "type")]
        kind: String,
        #[arg(long)]
        rank: usize,
        #[arg(long, value_enum, default_value = "standard")]
        convention: Convention,
        /// Include structure constants and basis tables.
        #[arg(long)]
        full: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Convention {
    Standard,
    Unsigned,
}

#[derive(Args, Debug)]
struct ConfigArgs {
    /// Run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
}

#[derive(Subcommand, Debug)]
enum TodaAction {
    Solve {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Field file receiving `u_0 … u_{l−1}`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum ConnectionAction {
    Verify {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Field file from `toda solve`; solved afresh when absent.
        #[arg(long)]
        solution: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct HolonomyArgs {
    #[command(flatten)]
    cfg: ConfigArgs,
    #[arg(long)]
    solution: Option<PathBuf>,
    /// `loop:x[@row]`, `loop:y[@col]` or a JSON list of `[ix, iy]` nodes.
    /// Repeatable; defaults to both generators.
    #[arg(long = "path")]
    paths: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum GoldmanAction {
    /// Pair the `q₁` variation along `--q1-dot` with the `q̄₂` variation along
    /// `--q2bar-dot` at the Fuchsian point of the configured chart.
    Pair {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Scalar spec (JSON) for `q̇₁`.
        #[arg(long)]
        q1_dot: String,
        /// Scalar spec (JSON) for `q̇̄₂`.
        #[arg(long)]
        q2bar_dot: String,
    },
    /// `−2i ω(q̇, conj q̇)` at the Fuchsian point.
    Fiber {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        q_dot: String,
    },
    /// Pointwise density of two same-side variations at the configured point.
    Lagrangian {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, value_enum, default_value = "left")]
        side: Side,
        #[arg(long)]
        dir_a: String,
        #[arg(long)]
        dir_b: String,
        #[arg(long, default_value_t = 1e-4)]
        step: f64,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Side {
    Left,
    Right,
}

#[derive(Subcommand, Debug)]
enum OperAction {
    /// Build the oper connection from the configured differentials.
    Build {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Relative-position check of the oper connection.
    Check {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Compare the connection of a perturbed metric with the shifted oper.
    Relation {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
}

#[derive(Args, Debug)]
struct SuiteArgs {
    #[arg(long, value_enum, default_value = "desk")]
    level: Level,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated criterion ids.
    #[arg(long, value_delimiter = ',')]
    only: Vec<u32>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Level {
    Desk,
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
pub(crate) enum Failure {
    Usage(String),
    Numerical { message: String, report: Option<PathBuf> },
}

impl Failure {
    fn from_core(e: Error, context: &Value, report_dir: Option<&Path>) -> Self {
        match e {
            Error::Schema { .. }
            | Error::Config(_)
            | Error::Shape(_)
            | Error::UnsupportedType { .. }
            | Error::Unsupported(_)
            | Error::Json(_)
            | Error::Io(_) => Failure::Usage(e.to_string()),
            other => {
                let message = other.to_string();
                let mut report = serde_json::json!({ "error": message, "context": context });
                if let Error::NonConvergence(r) = &other {
                    report["newton"] = serde_json::to_value(r).unwrap_or(Value::Null);
                }
                let dir = report_dir.filter(|d| d.is_dir()).unwrap_or(Path::new("."));
                let path = dir.join("ctoda-failure.json");
                let written = std::fs::write(&path, format!("{report:#}\n")).ok().map(|_| path);
                Failure::Numerical { message, report: written }
            }
        }
    }
}

pub(crate) struct Output {
    quiet: bool,
    json: bool,
}

impl Output {
    fn emit(&self, report: &Value) {
        if self.quiet {
            return;
        }
        if self.json {
            println!("{report:#}");
            return;
        }
        if let Value::Object(map) = report {
            for (k, v) in map {
                match v {
                    Value::Array(a) if a.iter().all(|x| !x.is_object() && !x.is_array()) => println!("{k}: {v}"),
                    Value::Object(_) | Value::Array(_) => {}
                    Value::String(s) => println!("{k}: {s}"),
                    other => println!("{k}: {other}"),
                }
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global()
            .map_err(|e| Failure::Usage(format!("cannot configure threads: {e}")))?;
    }
    let out = Output { quiet: cli.quiet, json: cli.json };
    let (report, context_dir) = match cli.command {
        Command::Suite(args) => {
            let only = if args.only.is_empty() { None } else { Some(args.only) };
            let _ = args.level;
            return commands::suite(args.seed, only, args.out.as_deref(), &out);
        }
        Command::Lie { action: LieAction::Dump { kind, rank, convention, full, out: path } } => {
            let sign = match convention {
                Convention::Standard => toda_core::lie::CartanSign::Standard,
                Convention::Unsigned => toda_core::lie::CartanSign::Unsigned,
            };
            (commands::lie_dump(&kind, rank, sign, full, path.as_deref()), None)
        }
        Command::Toda { action: TodaAction::Solve { cfg, out: path } } => {
            let dir = path.as_deref().and_then(Path::parent).map(Path::to_path_buf);
            (commands::toda_solve(&cfg.config, path.as_deref()), dir)
        }
        Command::Connection { action: ConnectionAction::Verify { cfg, solution } } => {
            (commands::connection_verify(&cfg.config, solution.as_deref()), None)
        }
        Command::Holonomy(args) => {
            (commands::holonomy(&args.cfg.config, args.solution.as_deref(), &args.paths, args.out.as_deref()), None)
        }
        Command::Goldman { action } => {
            let r = match action {
                GoldmanAction::Pair { cfg, q1_dot, q2bar_dot } => commands::goldman_pair(&cfg.config, &q1_dot, &q2bar_dot),
                GoldmanAction::Fiber { cfg, q_dot } => commands::goldman_fiber(&cfg.config, &q_dot),
                GoldmanAction::Lagrangian { cfg, side, dir_a, dir_b, step } => {
                    let side = match side {
                        Side::Left => toda_core::goldman::LagrangianSide::FixLeft,
                        Side::Right => toda_core::goldman::LagrangianSide::FixRight,
                    };
                    commands::goldman_lagrangian(&cfg.config, side, &dir_a, &dir_b, step)
                }
            };
            (r, None)
        }
        Command::Oper { action } => {
            let r = match action {
                OperAction::Build { cfg, out: path } => commands::oper_build(&cfg.config, path.as_deref()),
                OperAction::Check { cfg } => commands::oper_check(&cfg.config),
                OperAction::Relation { cfg } => commands::oper_relation(&cfg.config),
            };
            (r, None)
        }
    };
    match report {
        Ok(r) => {
            out.emit(&r);
            Ok(())
        }
        Err((e, context)) => Err(Failure::from_core(e, &context, context_dir.as_deref())),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical { message, report }) => {
            eprintln!("error: {message}");
            if let Some(p) = report {
                eprintln!("diagnostic report: {}", p.display());
            }
            ExitCode::from(1)
        }
    }
}
