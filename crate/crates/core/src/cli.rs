//! Command-line front end: `construct`, `verify`, `simulate`, `bounds`.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::dof_bounds::{optimal_r, outer_bound_curve, write_curve_csv};
use crate::error::{BiaError, Result};
use crate::scheme::{BiaScheme, SchemeParams};
use crate::sim::{estimate_rates, write_rates_csv, RateSummary};
use crate::verifier::{evaluation_seeds, verify, VerifiedScheme};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

const DEFAULT_SEED: u64 = 1;
const DEFAULT_SNR_DB: &str = "30,35,40,45,50,55,60";
const DEFAULT_TRIALS: usize = 500;
const DEFAULT_SEEDS: usize = 3;

#[derive(Debug, Parser)]
#[command(
    name = "bia",
    version,
    about = "Blind interference alignment with reconfigurable antennas"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a scheme and write it as JSON.
    Construct(SchemeArgs),
    /// Verify a scheme; exits 1 if any check fails.
    Verify(VerifyArgs),
    /// Monte-Carlo rate sweep and DoF slope.
    Simulate(SimulateArgs),
    /// Optimal sum DoF for a range of K.
    Bounds(BoundsArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SchemeArgs {
    #[arg(long = "K")]
    pub k: Option<usize>,
    #[arg(long = "r")]
    pub r: Option<usize>,
    #[arg(long = "pad-b")]
    pub pad_b: bool,
    /// Load the scheme from a file instead of constructing it.
    #[arg(long)]
    pub scheme: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub scheme: SchemeArgs,
    /// Number of independent field-evaluation seeds.
    #[arg(long)]
    pub seeds: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub scheme: SchemeArgs,
    #[arg(long)]
    pub seeds: Option<usize>,
    /// Comma-separated SNR points in dB.
    #[arg(long = "snr-db")]
    pub snr_db: Option<String>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
pub struct BoundsArgs {
    #[arg(long = "K-min")]
    pub k_min: usize,
    #[arg(long = "K-max")]
    pub k_max: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Construct,
    Verify,
    Simulate,
    Bounds,
}

/// Where the scheme comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SchemeSource {
    Build { k: usize, r: usize, pad_b: bool },
    File(PathBuf),
}

/// Validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: CommandKind,
    pub source: Option<SchemeSource>,
    pub seed: u64,
    pub seeds: usize,
    pub snr_db: Vec<f64>,
    pub trials: usize,
    pub k_range: Option<(usize, usize)>,
    pub out: Option<PathBuf>,
    pub format: Format,
    /// Fields filled from defaults rather than flags.
    pub defaulted: Vec<&'static str>,
}

fn usage(msg: impl Into<String>) -> BiaError {
    BiaError::Parameter(msg.into())
}

fn scheme_source(a: &SchemeArgs, defaulted: &mut Vec<&'static str>) -> Result<SchemeSource> {
    match (&a.scheme, a.k) {
        (Some(_), Some(_)) => Err(usage("--scheme and --K are mutually exclusive")),
        (Some(path), None) => {
            if a.r.is_some() || a.pad_b {
                return Err(usage("--r/--pad-b cannot be combined with --scheme"));
            }
            Ok(SchemeSource::File(path.clone()))
        }
        (None, None) => Err(usage("one of --K or --scheme is required")),
        (None, Some(0)) => Err(usage("--K must be at least 1")),
        (None, Some(k)) => {
            let r = match a.r {
                Some(r) => {
                    if r == 0 || r > k {
                        return Err(usage(format!(
                            "--r must satisfy 1 <= r <= K (K={k}, r={r})"
                        )));
                    }
                    r
                }
                None => {
                    defaulted.push("r");
                    optimal_r(k)
                }
            };
            Ok(SchemeSource::Build {
                k,
                r,
                pad_b: a.pad_b,
            })
        }
    }
}

fn parse_snr_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("bad SNR value {t:?}")))
        })
        .collect()
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self> {
        let mut defaulted = Vec::new();
        let seed_of = |s: Option<u64>, d: &mut Vec<&'static str>| {
            s.unwrap_or_else(|| {
                d.push("seed");
                DEFAULT_SEED
            })
        };
        let mut cfg = RunConfig {
            command: CommandKind::Construct,
            source: None,
            seed: DEFAULT_SEED,
            seeds: DEFAULT_SEEDS,
            snr_db: Vec::new(),
            trials: DEFAULT_TRIALS,
            k_range: None,
            out: None,
            format: Format::Json,
            defaulted: Vec::new(),
        };
        match cli.command {
            Command::Construct(a) => {
                if a.scheme.is_some() {
                    return Err(usage("construct builds from --K; --scheme is not accepted"));
                }
                cfg.source = Some(scheme_source(&a, &mut defaulted)?);
                cfg.seed = seed_of(a.seed, &mut defaulted);
                cfg.out = a.out;
            }
            Command::Verify(a) => {
                cfg.command = CommandKind::Verify;
                cfg.source = Some(scheme_source(&a.scheme, &mut defaulted)?);
                cfg.seed = seed_of(a.scheme.seed, &mut defaulted);
                cfg.seeds = a.seeds.unwrap_or_else(|| {
                    defaulted.push("seeds");
                    DEFAULT_SEEDS
                });
                cfg.out = a.scheme.out;
            }
            Command::Simulate(a) => {
                cfg.command = CommandKind::Simulate;
                cfg.source = Some(scheme_source(&a.scheme, &mut defaulted)?);
                cfg.seed = seed_of(a.scheme.seed, &mut defaulted);
                cfg.seeds = a.seeds.unwrap_or_else(|| {
                    defaulted.push("seeds");
                    DEFAULT_SEEDS
                });
                cfg.snr_db = parse_snr_list(a.snr_db.as_deref().unwrap_or_else(|| {
                    defaulted.push("snr_db");
                    DEFAULT_SNR_DB
                }))?;
                cfg.trials = a.trials.unwrap_or_else(|| {
                    defaulted.push("trials");
                    DEFAULT_TRIALS
                });
                cfg.format = a.format.unwrap_or_else(|| {
                    defaulted.push("format");
                    Format::Csv
                });
                cfg.out = a.scheme.out;
            }
            Command::Bounds(a) => {
                cfg.command = CommandKind::Bounds;
                if a.k_min == 0 || a.k_min > a.k_max {
                    return Err(usage(format!(
                        "need 1 <= --K-min <= --K-max (got {}, {})",
                        a.k_min, a.k_max
                    )));
                }
                cfg.k_range = Some((a.k_min, a.k_max));
                cfg.format = a.format.unwrap_or_else(|| {
                    defaulted.push("format");
                    Format::Csv
                });
                cfg.out = a.out;
            }
        }
        if cfg.command != CommandKind::Bounds && cfg.seeds < 3 {
            return Err(usage("--seeds must be at least 3"));
        }
        cfg.defaulted = defaulted;
        Ok(cfg)
    }
}

/// Provenance block embedded in every output.
#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: CommandKind,
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pad_b: Option<bool>,
    #[serde(rename = "K_min", skip_serializing_if = "Option::is_none")]
    pub k_min: Option<usize>,
    #[serde(rename = "K_max", skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    pub seed: u64,
    pub defaulted: Vec<&'static str>,
}

impl Meta {
    fn new(cfg: &RunConfig, params: Option<&SchemeParams>) -> Self {
        Meta {
            tool: "bia",
            version: env!("CARGO_PKG_VERSION"),
            command: cfg.command,
            k: params.map(|p| p.k()),
            r: params.map(|p| p.r()),
            n: params.map(|p| p.n()),
            m: params.map(|p| p.modes()),
            pad_b: params.map(|p| p.pad_b()),
            k_min: cfg.k_range.map(|r| r.0),
            k_max: cfg.k_range.map(|r| r.1),
            seed: cfg.seed,
            defaulted: cfg.defaulted.clone(),
        }
    }

    /// `# key=value` lines prefixed to CSV output.
    fn csv_header(&self) -> String {
        let value = serde_json::to_value(self).expect("meta serializes");
        let mut out = String::new();
        if let serde_json::Value::Object(map) = value {
            for (k, v) in map {
                let v = match v {
                    serde_json::Value::String(s) => s,
                    other => other.to_string(),
                };
                out.push_str(&format!("# {k}={v}\n"));
            }
        }
        out
    }
}

fn load_scheme(source: &SchemeSource) -> Result<BiaScheme> {
    match source {
        SchemeSource::Build { k, r, pad_b } => {
            if *r != optimal_r(*k) {
                eprintln!(
                    "warning: r={r} is not optimal for K={k} (optimal r={})",
                    optimal_r(*k)
                );
            }
            BiaScheme::build(*k, Some(*r), *pad_b)
        }
        SchemeSource::File(path) => BiaScheme::from_json(&fs::read_to_string(path)?),
    }
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => fs::write(path, bytes)?,
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn summary_path(out: &Path) -> PathBuf {
    let mut name = out.file_stem().unwrap_or_default().to_os_string();
    name.push(".summary.json");
    out.with_file_name(name)
}

#[derive(Serialize)]
struct JsonEnvelope<'a, T: Serialize> {
    meta: &'a Meta,
    #[serde(flatten)]
    body: &'a T,
}

fn to_json_bytes<T: Serialize>(meta: &Meta, body: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(&JsonEnvelope { meta, body })?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Executes one command and returns the process exit status.
pub fn run(cfg: &RunConfig) -> Result<i32> {
    match cfg.command {
        CommandKind::Construct => {
            let scheme = load_scheme(cfg.source.as_ref().expect("validated"))?;
            let meta = Meta::new(cfg, Some(&scheme.params));
            let mut text = scheme.to_json(Some(serde_json::to_value(&meta)?))?;
            text.push('\n');
            emit(cfg.out.as_deref(), text.as_bytes())?;
            Ok(EXIT_OK)
        }
        CommandKind::Verify => {
            let scheme = load_scheme(cfg.source.as_ref().expect("validated"))?;
            let report = verify(&scheme, &evaluation_seeds(cfg.seed, cfg.seeds))?;
            let meta = Meta::new(cfg, Some(&scheme.params));
            emit(cfg.out.as_deref(), &to_json_bytes(&meta, &report)?)?;
            Ok(if report.all_pass {
                EXIT_OK
            } else {
                EXIT_VERIFICATION_FAILED
            })
        }
        CommandKind::Simulate => {
            let scheme = load_scheme(cfg.source.as_ref().expect("validated"))?;
            let report = verify(&scheme, &evaluation_seeds(cfg.seed, cfg.seeds))?;
            let meta = Meta::new(cfg, Some(&scheme.params));
            let verified = match VerifiedScheme::from_report(scheme, &report) {
                Ok(v) => v,
                Err(e) => {
                    eprintln!("refusing to simulate: {e}");
                    return Ok(EXIT_VERIFICATION_FAILED);
                }
            };
            let curve = estimate_rates(&verified, &cfg.snr_db, cfg.trials, cfg.seed)?;
            let summary = RateSummary::from_curve(&curve);
            match cfg.format {
                Format::Csv => {
                    let mut csv = meta.csv_header().into_bytes();
                    write_rates_csv(&curve, &mut csv)?;
                    emit(cfg.out.as_deref(), &csv)?;
                    let summary_bytes = to_json_bytes(&meta, &summary)?;
                    match &cfg.out {
                        Some(out) => fs::write(summary_path(out), summary_bytes)?,
                        None => std::io::stderr().write_all(&summary_bytes)?,
                    }
                }
                Format::Json => {
                    #[derive(Serialize)]
                    struct Body<'a> {
                        summary: &'a RateSummary,
                        curve: &'a crate::sim::RateCurve,
                    }
                    let body = Body {
                        summary: &summary,
                        curve: &curve,
                    };
                    emit(cfg.out.as_deref(), &to_json_bytes(&meta, &body)?)?;
                }
            }
            Ok(EXIT_OK)
        }
        CommandKind::Bounds => {
            let (lo, hi) = cfg.k_range.expect("validated");
            let points = outer_bound_curve(lo, hi)?;
            let meta = Meta::new(cfg, None);
            let bytes = match cfg.format {
                Format::Csv => {
                    let mut buf = meta.csv_header().into_bytes();
                    write_curve_csv(&points, &mut buf)?;
                    buf
                }
                Format::Json => {
                    #[derive(Serialize)]
                    struct Body<'a> {
                        points: &'a [crate::dof_bounds::DofCurvePoint],
                    }
                    to_json_bytes(&meta, &Body { points: &points })?
                }
            };
            emit(cfg.out.as_deref(), &bytes)?;
            Ok(EXIT_OK)
        }
    }
}

/// Maps an error to the documented exit status.
pub fn exit_code(err: &BiaError) -> i32 {
    match err {
        BiaError::Infeasible { .. } => EXIT_INFEASIBLE,
        BiaError::Unverified(_) => EXIT_VERIFICATION_FAILED,
        _ => EXIT_USAGE,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = RunConfig::from_cli(cli).and_then(|cfg| run(&cfg));
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
