//! Command line front end: runs verification suites on structure definition
//! files or on the built-in example fixtures and emits JSON reports.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use warped_poisson::{
    builtin_fixture, builtin_names, load_definition, render_report, run_fixture, CheckReport,
    Fixture, RunConfig, Status, SuiteId,
};

#[derive(Parser)]
#[command(
    name = "wpcheck",
    version,
    about = "Numerical verification of Poisson structures, metric contravariant connections, and warped pairs"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run suites on a JSON definition file (single chart or base/fiber pair)
    Check {
        definition: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Built-in example fixtures
    #[command(subcommand)]
    Examples(ExamplesCmd),
}

#[derive(Subcommand)]
enum ExamplesCmd {
    /// List the built-in fixtures with a one-line summary each
    List,
    /// Run suites on a built-in fixture and compare against its pinned outcomes
    Run {
        name: String,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Suite to run, repeatable; defaults to all sixteen
    #[arg(long = "suite", value_name = "ID", value_parser = parse_suite)]
    suites: Vec<SuiteId>,
    /// Sample points per run
    #[arg(long, default_value_t = 64)]
    samples: usize,
    /// Residual tolerance
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Seed for the sample point generator
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Also write the full JSON report to this path
    #[arg(long, value_name = "PATH")]
    report: Option<PathBuf>,
}

fn parse_suite(s: &str) -> Result<SuiteId, String> {
    SuiteId::parse(s).map_err(|e| {
        let known: Vec<&str> = SuiteId::ALL.iter().map(|id| id.id()).collect();
        format!("{e}; known suites: {}", known.join(", "))
    })
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Check { definition, run } => {
            let src = fs::read_to_string(&definition)
                .with_context(|| format!("reading {}", definition.display()))?;
            let name = definition
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("definition")
                .to_string();
            let fx = load_definition(&name, &src)?;
            execute(&fx, &run)
        }
        Cmd::Examples(ExamplesCmd::List) => {
            for (name, summary) in builtin_names() {
                println!("{name:<18} {summary}");
            }
            Ok(true)
        }
        Cmd::Examples(ExamplesCmd::Run { name, run }) => {
            let fx = builtin_fixture(&name)?;
            execute(&fx, &run)
        }
    }
}

/// Run, print one line per suite, optionally write the report; returns
/// whether the run counts as a success (pinned outcomes matched for a
/// builtin, nothing failed for a user definition).
fn execute(fx: &Fixture, args: &RunArgs) -> Result<bool> {
    let cfg = RunConfig {
        samples: args.samples,
        tol: args.tol,
        seed: args.seed,
    };
    let requested = if args.suites.is_empty() {
        None
    } else {
        Some(args.suites.as_slice())
    };
    let report = run_fixture(fx, requested, &cfg)?;
    print_summary(fx, &report);
    if let Some(path) = &args.report {
        fs::write(path, render_report(&report))
            .with_context(|| format!("writing report to {}", path.display()))?;
    }
    let ok = fx.matches(&report);
    let verdict = match (fx.expected.is_empty(), ok) {
        (true, true) => "ok: no suite failed",
        (true, false) => "FAILED: at least one suite failed",
        (false, true) => "ok: all suites landed on their pinned outcomes",
        (false, false) => "FAILED: some suite deviated from its pinned outcome",
    };
    println!("{verdict}");
    Ok(ok)
}

fn print_summary(fx: &Fixture, report: &CheckReport) {
    if fx.summary.is_empty() {
        println!(
            "{}  (seed {}, {} samples)",
            report.fixture, report.seed, report.samples
        );
    } else {
        println!(
            "{}: {}  (seed {}, {} samples)",
            report.fixture, fx.summary, report.seed, report.samples
        );
    }
    for s in &report.suites {
        let worst = s
            .identities
            .iter()
            .map(|i| i.max_residual)
            .fold(0.0, f64::max);
        let line = match s.status {
            Status::Skip => format!("  {:<22} skip", s.id.id()),
            st => format!(
                "  {:<22} {:<4}  max residual {:9.2e}",
                s.id.id(),
                label(st),
                worst
            ),
        };
        match fx.expected.get(&s.id) {
            Some(exp) if *exp != s.status => {
                println!("{line}   << pinned outcome is {}", label(*exp))
            }
            Some(Status::Fail) => println!("{line}   (expected failure)"),
            _ => println!("{line}"),
        }
    }
}

fn label(s: Status) -> &'static str {
    match s {
        Status::Pass => "pass",
        Status::Fail => "FAIL",
        Status::Skip => "skip",
    }
}
