//! Command-line entry point: reproducible batch runs with machine-readable
//! output and stable exit codes.
//!
//! Exit codes: 0 success, 1 domain/parse errors, 2 capacity errors, 3 audit
//! violation (distinct so CI can alarm on the self-oracle).

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;

use crate::audit::{audit_distribution, audit_injected, AuditVerdict};
use crate::construction::{
    certificate, exact_joint, sample_tuple, ConstructionParams, Mode, SampledTuple,
    DEFAULT_ENUM_CAP,
};
use crate::error::{Error, Result};
use crate::exactdist::tvd;
use crate::games::optimal_guesser;
use crate::io::{
    audit_report_json, certificate_json, read_dist, sample_json, symbolic_sample_json,
    value_report_json, write_dist,
};
use crate::rational::{format_rational, parse_rational};
use crate::solver::{solve_game1, solve_game2, DEFAULT_MAX_ITERS, DEFAULT_TOLERANCE};
use crate::subsets::project;

/// Environment variable overriding the default exact-enumeration cap.
pub const ENUM_CAP_ENV: &str = "INDIST_ENUM_CAP";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Plain,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CliMode {
    Exact,
    Sample,
}

#[derive(Parser, Debug)]
#[command(name = "indist", version, about = "exact tuple-distribution toolkit")]
struct Cli {
    /// Concurrency cap for the computational modules (results never depend
    /// on it).
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,

    /// Output format for scalar reports.
    #[arg(long, global = true, value_enum, default_value_t = Format::Plain)]
    format: Format,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Build a construction: exact joint law or sampled tuples.
    Construct {
        #[arg(long)]
        n: u32,
        /// Exact rational: "P/Q", integer, or terminating decimal.
        #[arg(long)]
        eps: String,
        #[arg(long, value_enum)]
        mode: CliMode,
        #[arg(long, default_value_t = 1)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Exact-enumeration atom cap (default from INDIST_ENUM_CAP or 10^7).
        #[arg(long)]
        cap: Option<u64>,
    },
    /// Exact total variation distance between two serialized distributions.
    Tvd {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Project a tuple distribution onto a coordinate subset.
    Project {
        #[arg(long)]
        dist: PathBuf,
        /// Comma-separated 1-based coordinate indices, strictly increasing.
        #[arg(long)]
        indices: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve Game 1 or Game 2 at a small horizon.
    Solve {
        #[arg(long)]
        game: u8,
        #[arg(long)]
        n: usize,
        #[arg(long = "n-horizon")]
        n_horizon: u64,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
        #[arg(long = "max-iters", default_value_t = DEFAULT_MAX_ITERS)]
        max_iters: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo betting-game calibration of the MAP rule.
    Bet {
        #[arg(long = "dist-a")]
        dist_a: PathBuf,
        #[arg(long = "dist-b")]
        dist_b: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Audit a distribution against the tower bound (exit 3 on violation).
    Audit {
        #[arg(long, conflicts_with = "inject")]
        dist: Option<PathBuf>,
        /// Injected measurements "eps_star=P/Q,n=K,max=M" for red-path tests.
        #[arg(long)]
        inject: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the requirement constants for (n, eps).
    Certificate {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        eps: String,
    },
}

fn enumeration_cap(flag: Option<u64>) -> u64 {
    flag.or_else(|| {
        std::env::var(ENUM_CAP_ENV)
            .ok()
            .and_then(|v| v.parse().ok())
    })
    .unwrap_or(DEFAULT_ENUM_CAP)
}

fn write_output(out: Option<&PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => {
            let mut f = File::create(path)?;
            f.write_all(content.as_bytes())?;
            Ok(())
        }
        None => {
            print!("{content}");
            std::io::stdout().flush()?;
            Ok(())
        }
    }
}

fn scalar_report(format: Format, name: &str, value: &str) -> String {
    match format {
        Format::Plain => format!("{value}\n"),
        Format::Json => format!("{}\n", serde_json::json!({ name: value })),
        Format::Csv => format!("{name}\n{value}\n"),
    }
}

fn parse_inject(text: &str) -> Result<(crate::rational::Rat, u32, BigInt)> {
    let mut eps_star = None;
    let mut n = None;
    let mut max = None;
    for part in text.split(',') {
        let (key, val) = part
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("bad inject fragment {part:?}")))?;
        match key.trim() {
            "eps_star" => eps_star = Some(parse_rational(val)?),
            "n" => {
                n = Some(
                    val.trim()
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad n {val:?}")))?,
                )
            }
            "max" => {
                max = Some(
                    val.trim()
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad max {val:?}")))?,
                )
            }
            other => return Err(Error::Parse(format!("unknown inject key {other:?}"))),
        }
    }
    match (eps_star, n, max) {
        (Some(e), Some(n), Some(m)) => Ok((e, n, m)),
        _ => Err(Error::Parse(
            "inject needs eps_star=, n=, and max=".into(),
        )),
    }
}

fn open_dist(path: &PathBuf) -> Result<crate::ExactDist> {
    read_dist(BufReader::new(File::open(path)?))
}

/// Dispatch one parsed command; Ok(exit_code) for verdict-carrying paths.
fn execute(cli: Cli) -> Result<i32> {
    match cli.cmd {
        Cmd::Construct {
            n,
            eps,
            mode,
            samples,
            seed,
            out,
            cap,
        } => {
            let eps = parse_rational(&eps)?;
            let mut params = ConstructionParams::new(
                n,
                eps,
                match mode {
                    CliMode::Exact => Mode::Exact,
                    CliMode::Sample => Mode::Sample,
                },
                seed,
            );
            params.enumeration_cap = enumeration_cap(cap);
            match params.mode {
                Mode::Exact => {
                    let d = exact_joint(&params)?;
                    let mut buf = Vec::new();
                    write_dist(&mut buf, &d)?;
                    write_output(out.as_ref(), &String::from_utf8(buf).expect("utf8 json"))?;
                }
                Mode::Sample => {
                    let mut lines = String::new();
                    for i in 0..samples {
                        let record = match sample_tuple(&params, i)? {
                            SampledTuple::Exact(t) => sample_json(&t, seed, i),
                            SampledTuple::Huge(h) => symbolic_sample_json(&h, seed, i),
                        };
                        lines.push_str(&record.to_string());
                        lines.push('\n');
                    }
                    write_output(out.as_ref(), &lines)?;
                }
            }
            Ok(0)
        }
        Cmd::Tvd { a, b } => {
            let da = open_dist(&a)?;
            let db = open_dist(&b)?;
            let v = tvd(&da, &db)?;
            print!(
                "{}",
                scalar_report(cli.format, "tvd", &format_rational(&v))
            );
            Ok(0)
        }
        Cmd::Project { dist, indices, out } => {
            let d = open_dist(&dist)?;
            let idx: Vec<usize> = indices
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad index {s:?}")))
                })
                .collect::<Result<_>>()?;
            let p = project(&d, &idx)?;
            let mut buf = Vec::new();
            write_dist(&mut buf, &p)?;
            write_output(out.as_ref(), &String::from_utf8(buf).expect("utf8 json"))?;
            Ok(0)
        }
        Cmd::Solve {
            game,
            n,
            n_horizon,
            tol,
            max_iters,
            out,
        } => {
            let report = match game {
                1 => solve_game1(n, n_horizon, tol, max_iters)?,
                2 => solve_game2(n, n_horizon, tol, max_iters)?,
                other => {
                    return Err(Error::Domain(format!(
                        "game must be 1 or 2, got {other}"
                    )))
                }
            };
            let json = value_report_json(&report);
            write_output(out.as_ref(), &format!("{json}\n"))?;
            Ok(0)
        }
        Cmd::Bet {
            dist_a,
            dist_b,
            trials,
            seed,
        } => {
            let da = open_dist(&dist_a)?;
            let db = open_dist(&dist_b)?;
            let strat = optimal_guesser(&da, &db);
            let est = crate::games::play_betting_game(&da, &db, &strat, trials, seed)?;
            let exact = tvd(&da, &db)?;
            let json = serde_json::json!({
                "estimate": est.mean,
                "stderr": est.stderr,
                "trials": est.trials,
                "exact_tvd": format_rational(&exact),
            });
            println!("{json}");
            Ok(0)
        }
        Cmd::Audit { dist, inject, out } => {
            let report = if let Some(text) = inject {
                let (eps_star, n, max) = parse_inject(&text)?;
                audit_injected(&eps_star, n, &max)?
            } else {
                let path = dist.ok_or_else(|| {
                    Error::Domain("audit needs --dist or --inject".into())
                })?;
                audit_distribution(&open_dist(&path)?)?
            };
            let json = audit_report_json(&report);
            write_output(out.as_ref(), &format!("{json}\n"))?;
            if report.verdict == AuditVerdict::Violation {
                Ok(3)
            } else {
                Ok(0)
            }
        }
        Cmd::Certificate { n, eps } => {
            let eps = parse_rational(&eps)?;
            let cert = certificate(n, &eps)?;
            println!("{}", certificate_json(&cert));
            Ok(0)
        }
    }
}

/// Run the CLI on an argv list; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Capacity { .. } => 2,
                _ => 1,
            }
        }
    }
}
