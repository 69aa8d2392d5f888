use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use overconv::report::{
    factorial_report, radius_report, resolve_out_path, run_checks, write_atomic, CheckName, Format,
    RunConfig, SeriesKind,
};
use overconv::Exponent;

/// Exact checks of Carlitz-type special functions over F_q((x)).
#[derive(Debug, Parser)]
#[command(name = "overconv", version)]
struct Cli {
    /// Characteristic.
    #[arg(long, global = true, default_value_t = 3)]
    p: u32,
    /// q = p^m.
    #[arg(long, global = true, default_value_t = 1)]
    m: u32,
    /// Truncation order N of the t-expansions.
    #[arg(long, global = true, default_value_t = 8)]
    order: usize,
    /// Target absolute x-adic precision; an integer or a fraction a/b.
    #[arg(long, global = true, default_value = "200")]
    prec: Exponent,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// json, csv or md.
    #[arg(long, global = true, default_value = "json")]
    format: Format,
    /// Output file (stdout if absent). Relative paths are resolved against
    /// $OVERCONV_OUT_DIR when it is set.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for `report` (defaults to available parallelism).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the Carlitz factorial D_n and its valuation.
    Factorial {
        #[arg(short = 'n')]
        n: usize,
    },
    /// Run one check: prop1, prop2, prop3, prop4, exp-ode, polylog-ode or pochhammer.
    Verify { check: CheckName },
    /// Valuation profile and radius estimate of a series.
    Radius {
        /// ec, dwork, polylog=<n> (the overconvergent L_n), hypergeom or rhs24.
        #[arg(long)]
        series: SeriesKind,
    },
    /// Run every check.
    Report {
        #[arg(long, required = true)]
        all: bool,
    },
}

fn emit(cfg: &RunConfig, content: &str) -> overconv::Result<()> {
    match &cfg.out {
        Some(path) => write_atomic(&resolve_out_path(path), content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> overconv::Result<bool> {
    let cfg = RunConfig {
        p: cli.p,
        m: cli.m,
        order: cli.order,
        precision: cli.prec,
        seed: cli.seed,
        format: cli.format,
        out: cli.out,
    };
    cfg.validate()?;
    let jobs = cli
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    match cli.command {
        Command::Factorial { n } => {
            emit(&cfg, &factorial_report(&cfg, n)?.render(cfg.format)?)?;
            Ok(true)
        }
        Command::Radius { series } => {
            emit(&cfg, &radius_report(&cfg, series)?.render(cfg.format)?)?;
            Ok(true)
        }
        Command::Verify { check } => {
            let report = run_checks(&cfg, &[check], 1)?;
            emit(&cfg, &report.render(cfg.format)?)?;
            Ok(report.pass())
        }
        Command::Report { .. } => {
            let report = run_checks(&cfg, &CheckName::ALL, jobs)?;
            emit(&cfg, &report.render(cfg.format)?)?;
            Ok(report.pass())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
