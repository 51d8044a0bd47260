use clap::Parser;
use serde::Deserialize;
use std::path::PathBuf;
use std::process::ExitCode;

use lindsim::cli::{run, RunConfig, SegmentRule};
use lindsim::simulator::Mode;
use lindsim::Error;

/// Randomized-circuit Lindblad simulator with an exact oracle column.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Args {
    /// Model document (TOML)
    #[arg(long)]
    model: Option<PathBuf>,

    /// Evolution time; repeat for a grid
    #[arg(long = "time")]
    times: Vec<f64>,

    /// Segment count: an integer or "auto"
    #[arg(long)]
    segments: Option<String>,

    /// Truncation accuracy parameter, in (0, 1/e)
    #[arg(long)]
    delta: Option<f64>,

    /// Number of sampled circuits per time point
    #[arg(long)]
    shots: Option<u64>,

    /// Estimator mode
    #[arg(long, value_parser = ["exact", "shots"])]
    mode: Option<String>,

    /// RNG seed
    #[arg(long)]
    seed: Option<u64>,

    /// Observable: "proj0…0" shorthand or a Pauli-sum document path
    #[arg(long)]
    observable: Option<String>,

    /// Output CSV path (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,

    /// Keep consecutive type-I pairs unmerged
    #[arg(long)]
    no_collapse: bool,

    /// Config file supplying any of the flags above; flags win on conflict
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    model: Option<PathBuf>,
    times: Option<Vec<f64>>,
    segments: Option<String>,
    delta: Option<f64>,
    shots: Option<u64>,
    mode: Option<String>,
    seed: Option<u64>,
    observable: Option<String>,
    out: Option<PathBuf>,
    collapse: Option<bool>,
}

fn resolve(args: Args) -> Result<RunConfig, Error> {
    let file: FileConfig = match &args.config {
        Some(path) => toml::from_str(&std::fs::read_to_string(path)?)
            .map_err(|e| Error::Parse(e.to_string()))?,
        None => FileConfig::default(),
    };
    let model = args
        .model
        .or(file.model)
        .ok_or_else(|| Error::Config("--model is required".into()))?;
    let times = if args.times.is_empty() {
        file.times.unwrap_or_default()
    } else {
        args.times
    };
    let segments = SegmentRule::parse(
        &args
            .segments
            .or(file.segments)
            .unwrap_or_else(|| "auto".into()),
    )?;
    let mode = match args.mode.or(file.mode).as_deref() {
        None | Some("shots") => Mode::Shots,
        Some("exact") => Mode::Exact,
        Some(other) => return Err(Error::Config(format!("unknown mode '{other}'"))),
    };
    Ok(RunConfig {
        model,
        times,
        segments,
        delta: args.delta.or(file.delta).unwrap_or(1e-2),
        shots: args.shots.or(file.shots).unwrap_or(20_000),
        mode,
        seed: args.seed.or(file.seed).unwrap_or(0),
        observable: args
            .observable
            .or(file.observable)
            .unwrap_or_else(|| "proj".into()),
        out: args.out.or(file.out),
        collapse: if args.no_collapse {
            false
        } else {
            file.collapse.unwrap_or(true)
        },
    })
}

fn main() -> ExitCode {
    let args = Args::parse();
    match resolve(args).and_then(|config| {
        let csv = run(&config)?;
        if config.out.is_none() {
            print!("{csv}");
        }
        Ok(())
    }) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
