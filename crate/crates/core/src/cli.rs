//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::analysis::{psum_compare, AnalysisPoint};
use crate::config::ExperimentConfig;
use crate::graph::{row_overlap, GldpcCode};
use crate::schedule::{baseline_schedule, format_order, hds_rows, row_profiles, Baseline, ChannelKind};
use crate::sim::{emit_csv, run_simulation, write_csv, SimError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "gldpc", version, about = "GLDPC construction, scheduling analysis and BLER simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// CSV output path (overrides the configuration).
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Master seed (overrides the configuration).
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Per-row subcode profiles and row overlaps.
    Analyze {
        #[arg(value_name = "CONFIG")]
        path: Option<PathBuf>,
    },
    /// Hierarchical distance schedule (first line) and baselines.
    Schedule {
        #[arg(value_name = "CONFIG")]
        path: Option<PathBuf>,
    },
    /// Monte Carlo BLER sweep written as CSV.
    Simulate {
        #[arg(value_name = "CONFIG")]
        path: Option<PathBuf>,
    },
    /// Leading-order predictions for every pair of overlapping rows.
    Predict {
        #[arg(value_name = "CONFIG")]
        path: Option<PathBuf>,
    },
    /// Runs the oracle cross-checks.
    Verify,
}

struct Failure {
    code: i32,
    message: String,
}

fn config_failure(message: impl ToString) -> Failure {
    Failure {
        code: EXIT_CONFIG,
        message: message.to_string(),
    }
}

fn load(positional: Option<PathBuf>, flag: &Option<PathBuf>) -> Result<ExperimentConfig, Failure> {
    let path = positional
        .or_else(|| flag.clone())
        .ok_or_else(|| config_failure("missing configuration file (positional or --config)"))?;
    ExperimentConfig::from_path(&path).map_err(config_failure)
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_CONFIG,
            };
        }
    };
    match dispatch(cli, out) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn io_failure(e: std::io::Error) -> Failure {
    config_failure(format!("write failed: {e}"))
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<(), Failure> {
    match cli.command {
        Command::Analyze { path } => {
            let cfg = load(path, &cli.config)?;
            analyze(&cfg, &build(&cfg)?, out).map_err(io_failure)
        }
        Command::Schedule { path } => {
            let cfg = load(path, &cli.config)?;
            schedule(&cfg, &build(&cfg)?, out).map_err(io_failure)
        }
        Command::Predict { path } => predict(&load(path, &cli.config)?, out),
        Command::Simulate { path } => {
            let mut cfg = load(path, &cli.config)?;
            if let Some(seed) = cli.seed {
                cfg.run.seed = seed;
            }
            if let Some(path) = cli.output {
                cfg.run.output = Some(path);
            }
            if cli.workers == Some(0) {
                return Err(config_failure("--workers must be at least 1"));
            }
            let records = run_simulation(&cfg, cli.workers).map_err(|e| match e {
                SimError::Decode(_) => Failure {
                    code: EXIT_VERIFY,
                    message: e.to_string(),
                },
                other => config_failure(other),
            })?;
            match &cfg.run.output {
                Some(path) => emit_csv(&records, path).map_err(config_failure),
                None => write_csv(&records, out).map_err(config_failure),
            }
        }
        Command::Verify => {
            let results = crate::verify::run_all();
            for r in &results {
                writeln!(out, "{r}").map_err(io_failure)?;
            }
            if results.iter().all(|r| r.passed) {
                Ok(())
            } else {
                Err(Failure {
                    code: EXIT_VERIFY,
                    message: "verification failed".into(),
                })
            }
        }
    }
}

fn build(cfg: &ExperimentConfig) -> Result<GldpcCode, Failure> {
    cfg.build_code().map_err(config_failure)
}

fn analyze(cfg: &ExperimentConfig, code: &GldpcCode, out: &mut dyn Write) -> std::io::Result<()> {
    let exp = &cfg.code.exponent;
    writeln!(
        out,
        "N={} K={} rank={} rate={:.6} lifting_size={}",
        code.n_vars(),
        code.k(),
        code.rank(),
        code.rate(),
        code.lifting_size()
    )?;
    writeln!(out, "row,subcode,n,k,d_min,A_min,degree")?;
    for p in row_profiles(code) {
        let sub = code.row_subcode(p.id);
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            p.id + 1,
            sub.name(),
            p.n,
            sub.k(),
            p.d_min,
            p.a_min,
            p.degree
        )?;
    }
    writeln!(out, "overlaps")?;
    for a in 0..exp.rows() {
        let row: Vec<String> = (0..exp.rows())
            .map(|b| if a == b { "-".into() } else { row_overlap(exp, a, b).to_string() })
            .collect();
        writeln!(out, "{}: {}", a + 1, row.join(" "))?;
    }
    Ok(())
}

fn schedule(cfg: &ExperimentConfig, code: &GldpcCode, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "{}", format_order(&hds_rows(code)))?;
    writeln!(out, "natural: {}", format_order(&baseline_schedule(Baseline::Natural, code)))?;
    writeln!(out, "low_degree: {}", format_order(&baseline_schedule(Baseline::LowDegree, code)))?;
    writeln!(
        out,
        "random({}): {}",
        cfg.run.seed,
        format_order(&baseline_schedule(Baseline::Random(cfg.run.seed), code))
    )
}

fn predict(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<(), Failure> {
    let code = build(cfg)?;
    let exp = &cfg.code.exponent;
    let mut first = true;
    for &param in &cfg.channel.parameters {
        let point = match cfg.channel.kind {
            ChannelKind::Bec => AnalysisPoint::Bec { epsilon: param },
            ChannelKind::Awgn => {
                let crate::ChannelModel::BiAwgn { sigma } = cfg.channel_model(param, code.rate()) else {
                    unreachable!("awgn configuration")
                };
                AnalysisPoint::Awgn { u: 2.0 / (sigma * sigma) }
            }
        };
        for a in 0..exp.rows() {
            for b in a + 1..exp.rows() {
                let n_ab = row_overlap(exp, a, b);
                let rep = psum_compare(code.row_subcode(a), code.row_subcode(b), n_ab, point)
                    .map_err(config_failure)?;
                let mut block = || -> std::io::Result<()> {
                    if !first {
                        writeln!(out)?;
                    }
                    writeln!(out, "row_a={}", a + 1)?;
                    writeln!(out, "row_b={}", b + 1)?;
                    writeln!(out, "{rep}")
                };
                block().map_err(io_failure)?;
                first = false;
            }
        }
    }
    Ok(())
}
