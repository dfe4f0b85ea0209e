//! The `pacebench` command line: `pace`, `bench`, `bd` and `report`.
//!
//! Exit status: 0 success, 1 computation error (no overlap, degenerate
//! curve), 2 usage or configuration error, 3 child process failure. Errors
//! also produce one JSON line on standard error.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bd_metrics::{bd_quality, bd_rate, BdMethod, BdResult, RateDomain};
use crate::dataset::{load_manifest, FrameRate, FrameReader, VideoSequence, Y4mHeader};
use crate::error::{Error, Result};
use crate::fsutil::write_atomic;
use crate::harness::{run_benchmark, BenchmarkConfig, RunFilter, RunMode, MANIFEST_COPY};
use crate::pacer::{run_paced, Framing};
use crate::quality::{read_curve_csv, write_curve_csv};
use crate::report::{self, build_matrix, BdSpec, Format, RunSet};

pub const LOG_ENV: &str = "PACEBENCH_LOG";

#[derive(Debug, Parser)]
#[command(name = "pacebench", version, about = "Paced and unpaced video encoder benchmarking with BD metrics")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOptions,
    #[command(subcommand)]
    pub command: Commands,
}

#[derive(Debug, Args)]
pub struct GlobalOptions {
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    /// Only log errors.
    #[arg(short, long, global = true)]
    pub quiet: bool,
    /// Sequence manifest (JSON).
    #[arg(long, global = true, value_name = "FILE")]
    pub manifest: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = ColorChoice::Auto)]
    pub color: ColorChoice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ColorChoice {
    Auto,
    Always,
    Never,
}

#[derive(Debug, Subcommand)]
pub enum Commands {
    /// Deliver a sequence's frames at its capture rate to a file, pipe or stdout.
    Pace(PaceArgs),
    /// Run encoder profiles over sequences and bitrates.
    Bench(BenchArgs),
    /// BD-rate or BD-quality between two curve CSVs.
    Bd(BdArgs),
    /// Build a comparison matrix from a run directory.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct PaceArgs {
    /// Source file; defaults to the manifest entry's path.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Short name of the manifest entry.
    #[arg(long)]
    pub seq: String,
    /// Deliver at this rate (N or N/D) instead of the sequence rate.
    #[arg(long, value_name = "N/D")]
    pub fps_override: Option<String>,
    /// Output path, or '-' for standard output.
    #[arg(long)]
    pub out: String,
    #[arg(long, value_enum, default_value_t = WireFormat::Raw)]
    pub format: WireFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WireFormat {
    Raw,
    Y4m,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Restrict runs, e.g. `profile=x264,seq=BS25`.
    #[arg(long)]
    pub only: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Paced,
    Unpaced,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Rate,
    Quality,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    PaperArea,
    LogDomain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RateDomainArg {
    Linear,
    Log,
}

#[derive(Debug, Args)]
pub struct BdOptions {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long, value_enum, default_value_t = MethodArg::PaperArea)]
    pub method: MethodArg,
    #[arg(long, value_enum, default_value_t = RateDomainArg::Linear)]
    pub rate_domain: RateDomainArg,
}

impl BdOptions {
    fn spec(&self) -> BdSpec {
        match self.kind {
            KindArg::Rate => BdSpec::Rate(match self.method {
                MethodArg::PaperArea => BdMethod::PaperArea,
                MethodArg::LogDomain => BdMethod::LogDomain,
            }),
            KindArg::Quality => BdSpec::Quality(match self.rate_domain {
                RateDomainArg::Linear => RateDomain::Linear,
                RateDomainArg::Log => RateDomain::Log,
            }),
        }
    }
}

#[derive(Debug, Args)]
pub struct BdArgs {
    #[arg(long = "ref", value_name = "CSV")]
    pub reference: PathBuf,
    #[arg(long, value_name = "CSV")]
    pub test: PathBuf,
    #[command(flatten)]
    pub bd: BdOptions,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Benchmark output directory.
    #[arg(long)]
    pub runs: PathBuf,
    #[arg(long)]
    pub anchor: String,
    #[command(flatten)]
    pub bd: BdOptions,
    #[arg(long, value_enum, default_value_t = FormatArg::Md)]
    pub format: FormatArg,
    /// Matrix output path, or '-' for standard output.
    #[arg(long)]
    pub out: String,
    /// Competitor column order (comma separated); defaults to name order.
    #[arg(long, value_delimiter = ',')]
    pub columns: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Md,
    Csv,
}

/// Parses `args` (including the program name), runs the subcommand, and
/// returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => 0,
                _ => 2,
            };
            let _ = e.print();
            if code != 0 {
                error_line("usage", 2, &e.kind().to_string());
            }
            return code;
        }
    };
    init_logging(&cli.global);
    let mut stdout = io::stdout().lock();
    match dispatch(&cli, &mut stdout) {
        Ok(code) => code,
        Err(e) => {
            let code = e.exit_code();
            error_line(e.kind(), code, &e.to_string());
            code
        }
    }
}

fn error_line(kind: &str, code: i32, message: &str) {
    let line = serde_json::json!({ "error": kind, "exit": code, "message": message });
    eprintln!("{line}");
}

fn init_logging(opts: &GlobalOptions) {
    let level = if opts.quiet {
        log::LevelFilter::Error
    } else {
        match opts.verbose {
            0 => log::LevelFilter::Warn,
            1 => log::LevelFilter::Info,
            2 => log::LevelFilter::Debug,
            _ => log::LevelFilter::Trace,
        }
    };
    let style = match opts.color {
        ColorChoice::Auto => env_logger::WriteStyle::Auto,
        ColorChoice::Always => env_logger::WriteStyle::Always,
        ColorChoice::Never => env_logger::WriteStyle::Never,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_env(env_logger::Env::new().filter(LOG_ENV))
        .write_style(style)
        .try_init();
}

/// Runs a parsed command, writing human output to `out`. Returns the exit status.
pub fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Commands::Pace(a) => pace(&cli.global, a, out),
        Commands::Bench(a) => bench(&cli.global, a, out),
        Commands::Bd(a) => bd(a, out),
        Commands::Report(a) => report(&cli.global, a, out),
    }
}

fn find_seq(seqs: Vec<VideoSequence>, name: &str) -> Result<VideoSequence> {
    seqs.into_iter()
        .find(|s| s.short_name == name)
        .ok_or_else(|| Error::Config(format!("sequence {name} not in manifest")))
}

fn pace(global: &GlobalOptions, a: &PaceArgs, out: &mut dyn Write) -> Result<i32> {
    let manifest = global
        .manifest
        .as_ref()
        .ok_or_else(|| Error::Config("pace needs --manifest".into()))?;
    let mut seq = find_seq(load_manifest(manifest)?, &a.seq)?;
    if let Some(p) = &a.input {
        seq.path = p.clone();
    }
    let rate = match &a.fps_override {
        Some(s) => s.parse::<FrameRate>()?,
        None => seq.frame_rate(),
    };
    let framing = match a.format {
        WireFormat::Raw => Framing::Raw,
        WireFormat::Y4m => Framing::Y4m(Y4mHeader {
            rate,
            ..Y4mHeader::for_sequence(&seq)
        }),
    };
    let mut reader = FrameReader::open(&seq)?;
    let report = if a.out == "-" {
        run_paced(&mut reader, io::stdout().lock(), rate, &framing)?
    } else {
        let path = Path::new(&a.out);
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        run_paced(&mut reader, file, rate, &framing)?
    };
    // Timing fields vary run to run.
    let summary = serde_json::json!({
        "sequence": seq.short_name,
        "fps": rate.to_string(),
        "frames_sent": report.frames_sent,
        "total_duration_s": report.total_duration_s,
        "blocked_time_s": report.blocked_time_s,
        "max_lateness_s": report.max_lateness(),
        "p99_lateness_s": report.lateness_percentile(99.0),
    });
    if a.out == "-" {
        eprintln!("{summary}");
    } else {
        writeln!(out, "{summary}")?;
    }
    Ok(0)
}

fn bench(global: &GlobalOptions, a: &BenchArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = BenchmarkConfig::load(&a.config)?;
    let manifest = global
        .manifest
        .clone()
        .or_else(|| cfg.manifest.clone())
        .ok_or_else(|| Error::Config("no manifest: pass --manifest or set \"manifest\" in the config".into()))?;
    let seqs = load_manifest(&manifest)?;
    let modes = match a.mode {
        Some(ModeArg::Paced) => vec![RunMode::Paced],
        Some(ModeArg::Unpaced) => vec![RunMode::Unpaced],
        Some(ModeArg::Both) => vec![RunMode::Unpaced, RunMode::Paced],
        None => cfg.modes.clone(),
    };
    let filter = match &a.only {
        Some(s) => RunFilter::parse(s)?,
        None => RunFilter::default(),
    };
    let outcome = run_benchmark(&cfg, &seqs, &modes, &filter)?;
    // Timing fields vary run to run.
    for r in &outcome.records {
        writeln!(
            out,
            "{}\t{:.3} fps\t{:.1} kbps",
            r.run_id, r.throughput_fps, r.achieved_bitrate_kbps
        )?;
    }
    writeln!(
        out,
        "{} run(s) ok, {} failed; records in {}",
        outcome.records.len(),
        outcome.failures.len(),
        cfg.output_dir.display()
    )?;
    if let Some((id, e)) = outcome.failures.first() {
        error_line(e.kind(), e.exit_code(), &format!("{id}: {e}"));
        return Ok(outcome.failures.iter().map(|(_, e)| e.exit_code()).max().unwrap_or(3));
    }
    Ok(0)
}

fn print_bd(out: &mut dyn Write, r: &BdResult) -> Result<()> {
    let kind = serde_json::to_value(r.kind)?;
    let method = serde_json::to_value(r.method)?;
    writeln!(out, "kind: {}", kind.as_str().unwrap_or_default())?;
    writeln!(out, "value: {:.2}", if r.value.abs() < 0.005 { 0.0 } else { r.value })?;
    writeln!(out, "value_full: {}", r.value)?;
    writeln!(out, "method: {}", method.as_str().unwrap_or_default())?;
    writeln!(
        out,
        "common_range: {} [{}, {}]",
        r.common_range.axis, r.common_range.lo, r.common_range.hi
    )?;
    writeln!(out, "points_used: {} {}", r.points_used.0, r.points_used.1)?;
    Ok(())
}

fn bd(a: &BdArgs, out: &mut dyn Write) -> Result<i32> {
    let reference = read_curve_csv(&a.reference)?;
    let test = read_curve_csv(&a.test)?;
    let result = match a.bd.spec() {
        BdSpec::Rate(m) => bd_rate(&test, &reference, m)?,
        BdSpec::Quality(d) => bd_quality(&test, &reference, d)?,
    };
    print_bd(out, &result)?;
    Ok(0)
}

fn report(global: &GlobalOptions, a: &ReportArgs, out: &mut dyn Write) -> Result<i32> {
    let manifest = global.manifest.clone().unwrap_or_else(|| a.runs.join(MANIFEST_COPY));
    let seqs = load_manifest(&manifest)?;
    let set = RunSet::load(&a.runs)?;
    let curves = set.curves();

    let mut profiles: Vec<String> = set.records.iter().map(|r| r.profile.clone()).collect();
    profiles.sort();
    profiles.dedup();
    if !a.columns.is_empty() {
        if let Some(c) = a.columns.iter().find(|c| !profiles.contains(c)) {
            return Err(Error::Config(format!("column {c} has no runs")));
        }
        let mut ordered = vec![a.anchor.clone()];
        ordered.extend(a.columns.iter().filter(|c| **c != a.anchor).cloned());
        profiles = ordered;
    }
    let used: Vec<VideoSequence> = seqs
        .iter()
        .filter(|s| set.records.iter().any(|r| r.sequence == s.short_name))
        .cloned()
        .collect();
    let matrix = build_matrix(&curves, &used, &profiles, &a.anchor, a.bd.spec())?;
    let format = match a.format {
        FormatArg::Md => Format::Markdown,
        FormatArg::Csv => Format::Csv,
    };
    let doc = report::render(&matrix, format)?;

    let extras_dir = if a.out == "-" {
        out.write_all(doc.as_bytes())?;
        a.runs.clone()
    } else {
        let path = Path::new(&a.out);
        write_atomic(path, doc.as_bytes())?;
        match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        }
    };

    let curve_dir = extras_dir.join("curves");
    fs::create_dir_all(&curve_dir).map_err(|e| Error::io(&curve_dir, e))?;
    for ((p, s), c) in &curves {
        write_curve_csv(&curve_dir.join(format!("{p}__{s}.csv")), c)?;
    }
    let rows = report::throughput_rows(&set.records, &seqs);
    write_atomic(&extras_dir.join("throughput.csv"), &report::throughput_csv(&rows)?)?;
    Ok(0)
}
