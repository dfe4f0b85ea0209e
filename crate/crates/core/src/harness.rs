//! Running external encoders, paced or unpaced, and measuring them.
//!
//! Each run owns its child process. Standard output and standard error are
//! drained on their own threads while the calling thread feeds standard
//! input, so a chatty encoder can never wedge the harness on a full pipe.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::thread;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dataset::{FrameReader, FrameSource, VideoSequence, Y4mHeader};
use crate::error::{Error, Result};
use crate::fsutil::write_atomic;
use crate::pacer::{self, Framing, PacingReport, PacingSchedule};
use crate::quality::MetricTool;
use crate::template::CommandTemplate;

pub const ENCODER_PLACEHOLDERS: &[&str] = &[
    "bitrate_kbps",
    "fps_num",
    "fps_den",
    "fps",
    "width",
    "height",
    "input",
    "output",
];

const STDERR_TAIL: usize = 16 * 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputMode {
    StdinRaw,
    StdinY4m,
    /// The encoder opens `{input}` itself. Unpaced only.
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputMode {
    #[default]
    File,
    Stdout,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    Unpaced,
    Paced,
}

impl std::fmt::Display for RunMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RunMode::Paced => "paced",
            RunMode::Unpaced => "unpaced",
        })
    }
}

impl std::str::FromStr for RunMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paced" => Ok(RunMode::Paced),
            "unpaced" => Ok(RunMode::Unpaced),
            _ => Err(Error::InvalidInput(format!("run mode {s:?}"))),
        }
    }
}

fn default_extension() -> String {
    "bin".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderProfile {
    pub name: String,
    pub command_template: CommandTemplate,
    pub input_mode: InputMode,
    #[serde(default)]
    pub output_mode: OutputMode,
    /// Extension for bitstream files written under the output directory.
    #[serde(default = "default_extension")]
    pub output_extension: String,
}

impl EncoderProfile {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Error::Config(format!("profile {}: {m}", self.name));
        if self.name.is_empty() {
            return Err(Error::Config("profile with empty name".into()));
        }
        if self.command_template.tokens().is_empty() {
            return Err(fail("empty command_template".into()));
        }
        self.command_template
            .check_known(ENCODER_PLACEHOLDERS)
            .map_err(|e| fail(e.to_string()))?;
        let bitrate = self.command_template.count("bitrate_kbps");
        if bitrate != 1 {
            return Err(fail(format!("{{bitrate_kbps}} must appear exactly once, found {bitrate}")));
        }
        let output = self.command_template.count("output");
        let want = match self.output_mode {
            OutputMode::File => 1,
            OutputMode::Stdout => 0,
        };
        if output != want {
            return Err(fail(format!(
                "{{output}} must appear {want} time(s) with output_mode {:?}, found {output}",
                self.output_mode
            )));
        }
        if self.input_mode == InputMode::File && self.command_template.count("input") == 0 {
            return Err(fail("input_mode file needs an {input} placeholder".into()));
        }
        Ok(())
    }
}

/// Substitutes every placeholder for one run.
pub fn render_command(
    profile: &EncoderProfile,
    seq: &VideoSequence,
    bitrate_kbps: u32,
    output: &Path,
) -> Result<Vec<String>> {
    let rate = seq.frame_rate();
    let values: BTreeMap<&str, String> = [
        ("bitrate_kbps", bitrate_kbps.to_string()),
        ("fps_num", rate.num().to_string()),
        ("fps_den", rate.den().to_string()),
        ("fps", rate.to_string()),
        ("width", seq.width.to_string()),
        ("height", seq.height.to_string()),
        ("input", seq.path.display().to_string()),
        ("output", output.display().to_string()),
    ]
    .into_iter()
    .collect();
    profile.command_template.render(&values)
}

/// Kilobits per second (1 kbit = 1000 bits) of `bytes` spread over `duration_s`.
pub fn achieved_bitrate(output_size_bytes: u64, duration_s: f64) -> Result<f64> {
    if duration_s.is_nan() || duration_s <= 0.0 {
        return Err(Error::InvalidInput(format!("duration {duration_s} s must be positive")));
    }
    Ok(8.0 * output_size_bytes as f64 / duration_s / 1000.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: String,
    pub profile: String,
    pub sequence: String,
    pub target_bitrate_kbps: u32,
    pub mode: RunMode,
    #[serde(default)]
    pub repetition: u32,
    pub wall_time_s: f64,
    pub frames_in: u64,
    pub throughput_fps: f64,
    pub output_size_bytes: u64,
    pub achieved_bitrate_kbps: f64,
    #[serde(default)]
    pub pacing: Option<PacingReport>,
    pub exit_status: i32,
    #[serde(default)]
    pub output_path: PathBuf,
    /// File name (relative to the run directory) of the ingested metric report.
    #[serde(default)]
    pub quality_report: Option<String>,
}

pub fn run_id(profile: &str, seq: &str, bitrate_kbps: u32, mode: RunMode, repetition: u32) -> String {
    let clean = |s: &str| -> String {
        s.chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
            .collect()
    };
    format!("{}__{}__{}__{}__r{}", clean(profile), clean(seq), bitrate_kbps, mode, repetition)
}

/// Runs the encoder with frames fed as fast as it consumes them (or reading
/// its input file directly). Wall time runs from spawn to exit.
pub fn run_unpaced(profile: &EncoderProfile, seq: &VideoSequence, bitrate_kbps: u32, output: &Path) -> Result<RunRecord> {
    execute(profile, seq, bitrate_kbps, output, RunMode::Unpaced)
}

/// Runs the encoder with frames delivered at the sequence frame rate. Wall
/// time runs from the first frame's deadline to exit.
pub fn run_paced(profile: &EncoderProfile, seq: &VideoSequence, bitrate_kbps: u32, output: &Path) -> Result<RunRecord> {
    execute(profile, seq, bitrate_kbps, output, RunMode::Paced)
}

fn framing(profile: &EncoderProfile, seq: &VideoSequence) -> Framing {
    match profile.input_mode {
        InputMode::StdinY4m => Framing::Y4m(Y4mHeader::for_sequence(seq)),
        _ => Framing::Raw,
    }
}

fn broken(e: &io::Error) -> bool {
    matches!(e.kind(), io::ErrorKind::BrokenPipe | io::ErrorKind::ConnectionReset)
}

fn feed_unpaced<S: FrameSource + ?Sized, W: Write>(source: &mut S, sink: W, framing: &Framing) -> Result<u64> {
    let mut sink = BufWriter::with_capacity(1 << 20, sink);
    let mut sent = 0u64;
    let aborted = |sent| Error::DeliveryAborted {
        report: Box::new(PacingReport {
            frames_sent: sent,
            ..Default::default()
        }),
        diagnostic: String::new(),
    };
    let wrap = |e: io::Error, sent| if broken(&e) { aborted(sent) } else { Error::Stream(e) };
    if let Framing::Y4m(h) = framing {
        sink.write_all(h.to_line().as_bytes()).map_err(|e| wrap(e, 0))?;
    }
    while let Some(frame) = source.next_frame()? {
        if matches!(framing, Framing::Y4m(_)) {
            sink.write_all(b"FRAME\n").map_err(|e| wrap(e, sent))?;
        }
        sink.write_all(frame.payload()).map_err(|e| wrap(e, sent))?;
        sent += 1;
    }
    sink.flush().map_err(|e| wrap(e, sent))?;
    Ok(sent)
}

fn tail_utf8(mut bytes: Vec<u8>) -> String {
    if bytes.len() > STDERR_TAIL {
        bytes.drain(..bytes.len() - STDERR_TAIL);
    }
    String::from_utf8_lossy(&bytes).into_owned()
}

fn execute(
    profile: &EncoderProfile,
    seq: &VideoSequence,
    bitrate_kbps: u32,
    output: &Path,
    mode: RunMode,
) -> Result<RunRecord> {
    profile.validate()?;
    if mode == RunMode::Paced && profile.input_mode == InputMode::File {
        return Err(Error::Config(format!(
            "profile {}: paced runs need stdin_raw or stdin_y4m input",
            profile.name
        )));
    }
    let argv = render_command(profile, seq, bitrate_kbps, output)?;
    let program = argv[0].clone();
    log::debug!("{mode} run: {}", argv.join(" "));

    let mut source = match profile.input_mode {
        InputMode::File => None,
        _ => Some(FrameReader::open(seq)?),
    };
    let mut sink = match profile.output_mode {
        OutputMode::Stdout => Some(File::create(output).map_err(|e| Error::io(output, e))?),
        OutputMode::File => None,
    };
    let framing = framing(profile, seq);

    let mut cmd = Command::new(&program);
    cmd.args(&argv[1..])
        .stdin(if source.is_some() { Stdio::piped() } else { Stdio::null() })
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());

    let spawned = Instant::now();
    let mut child = cmd.spawn().map_err(|source| Error::Spawn {
        program: program.clone(),
        source,
    })?;
    let stdin = child.stdin.take();
    let mut stdout = child.stdout.take().expect("stdout piped");
    let mut stderr = child.stderr.take().expect("stderr piped");

    let (feed, status, exited, out_bytes, err_text) = thread::scope(|s| {
        let out = s.spawn(move || -> io::Result<u64> {
            match sink.as_mut() {
                Some(f) => {
                    let mut w = BufWriter::new(f);
                    let n = io::copy(&mut stdout, &mut w)?;
                    w.flush()?;
                    Ok(n)
                }
                None => io::copy(&mut stdout, &mut io::sink()),
            }
        });
        let err = s.spawn(move || {
            let mut buf = Vec::new();
            let _ = stderr.read_to_end(&mut buf);
            tail_utf8(buf)
        });

        let feed: Result<(u64, Option<PacingReport>, Instant)> = match (source.as_mut(), stdin) {
            (Some(src), Some(stdin)) => match mode {
                RunMode::Paced => {
                    let schedule = PacingSchedule::start_now(seq.frame_rate());
                    pacer::run_paced_with(src, stdin, schedule, &framing)
                        .map(|rep| (rep.frames_sent, Some(rep), schedule.start()))
                }
                RunMode::Unpaced => feed_unpaced(src, stdin, &framing).map(|n| (n, None, spawned)),
            },
            _ => Ok((seq.frame_count, None, spawned)),
        };
        let status = child.wait();
        let exited = Instant::now();
        let out_bytes = out.join().expect("stdout drain panicked");
        let err_text = err.join().expect("stderr drain panicked");
        (feed, status, exited, out_bytes, err_text)
    });

    let status = status?;
    if !status.success() {
        return Err(Error::ChildFailed {
            program,
            status: status.code(),
            stderr: err_text,
        });
    }
    let (frames_in, pacing, started) = match feed {
        Err(Error::DeliveryAborted { report, .. }) => {
            return Err(Error::DeliveryAborted {
                report,
                diagnostic: err_text,
            })
        }
        other => other?,
    };
    let out_bytes = out_bytes.map_err(|e| Error::io(output, e))?;
    let output_size_bytes = match profile.output_mode {
        OutputMode::Stdout => out_bytes,
        OutputMode::File => fs::metadata(output).map_err(|e| Error::io(output, e))?.len(),
    };
    let wall_time_s = exited.duration_since(started).as_secs_f64();
    Ok(RunRecord {
        run_id: run_id(&profile.name, &seq.short_name, bitrate_kbps, mode, 0),
        profile: profile.name.clone(),
        sequence: seq.short_name.clone(),
        target_bitrate_kbps: bitrate_kbps,
        mode,
        repetition: 0,
        wall_time_s,
        frames_in,
        throughput_fps: frames_in as f64 / wall_time_s,
        output_size_bytes,
        achieved_bitrate_kbps: achieved_bitrate(output_size_bytes, seq.duration_s)?,
        pacing,
        exit_status: status.code().unwrap_or(0),
        output_path: output.to_path_buf(),
        quality_report: None,
    })
}

/// Arithmetic mean and sample standard deviation (n - 1; 0 for one value).
pub fn mean_std(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::EmptyGroup);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return Ok((mean, 0.0));
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    Ok((mean, (ss / (n - 1.0)).sqrt()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThroughputStat {
    pub bitrate_kbps: u32,
    pub mean_fps: f64,
    pub std_fps: f64,
    pub samples: usize,
}

/// Per target bitrate: mean and sample std of throughput across `records`.
pub fn throughput_stats<'a, I>(records: I) -> Result<Vec<ThroughputStat>>
where
    I: IntoIterator<Item = &'a RunRecord>,
{
    let mut groups: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    for r in records {
        groups.entry(r.target_bitrate_kbps).or_default().push(r.throughput_fps);
    }
    if groups.is_empty() {
        return Err(Error::EmptyGroup);
    }
    groups
        .into_iter()
        .map(|(bitrate_kbps, v)| {
            let (mean_fps, std_fps) = mean_std(&v)?;
            Ok(ThroughputStat {
                bitrate_kbps,
                mean_fps,
                std_fps,
                samples: v.len(),
            })
        })
        .collect()
}

fn default_repetitions() -> u32 {
    1
}

fn default_jobs() -> usize {
    1
}

fn default_modes() -> Vec<RunMode> {
    vec![RunMode::Unpaced, RunMode::Paced]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricConfig {
    pub command_template: CommandTemplate,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    /// Sequence manifest; relative to the config file.
    #[serde(default)]
    pub manifest: Option<PathBuf>,
    pub profiles: Vec<EncoderProfile>,
    pub sequences: Vec<String>,
    pub bitrates_kbps: Vec<u32>,
    #[serde(default = "default_modes")]
    pub modes: Vec<RunMode>,
    #[serde(default = "default_repetitions")]
    pub repetitions: u32,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub metric: Option<MetricConfig>,
    /// Concurrent unpaced runs. Paced runs are always sequential.
    #[serde(default = "default_jobs")]
    pub unpaced_jobs: usize,
}

impl BenchmarkConfig {
    /// Reads a JSON config; relative paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: BenchmarkConfig =
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        if let Some(m) = cfg.manifest.as_mut() {
            if m.is_relative() {
                *m = base.join(&*m);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.bitrates_kbps.is_empty() {
            return Err(Error::Config("bitrates_kbps is empty".into()));
        }
        if self.bitrates_kbps[0] == 0 || self.bitrates_kbps.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("bitrates_kbps must be positive and strictly increasing".into()));
        }
        let mut names = BTreeSet::new();
        for p in &self.profiles {
            p.validate()?;
            if !names.insert(p.name.as_str()) {
                return Err(Error::Config(format!("duplicate profile name {}", p.name)));
            }
        }
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if let Some(m) = &self.metric {
            m.command_template
                .check_known(crate::quality::METRIC_PLACEHOLDERS)
                .map_err(|e| Error::Config(format!("metric: {e}")))?;
        }
        Ok(())
    }
}

/// Restricts a benchmark to a subset; empty lists match everything.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunFilter {
    pub profiles: Vec<String>,
    pub sequences: Vec<String>,
    pub bitrates_kbps: Vec<u32>,
}

impl RunFilter {
    /// Parses `profile=a,seq=B,bitrate=800`; keys may repeat.
    pub fn parse(spec: &str) -> Result<Self> {
        let mut f = RunFilter::default();
        for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("filter term {part:?} is not key=value")))?;
            match k.trim() {
                "profile" => f.profiles.push(v.trim().to_string()),
                "seq" | "sequence" => f.sequences.push(v.trim().to_string()),
                "bitrate" | "bitrate_kbps" => f.bitrates_kbps.push(
                    v.trim()
                        .parse()
                        .map_err(|_| Error::InvalidInput(format!("bitrate {v:?}")))?,
                ),
                other => return Err(Error::InvalidInput(format!("unknown filter key {other:?}"))),
            }
        }
        Ok(f)
    }

    fn admits(&self, profile: &str, seq: &str, bitrate: u32) -> bool {
        (self.profiles.is_empty() || self.profiles.iter().any(|p| p == profile))
            && (self.sequences.is_empty() || self.sequences.iter().any(|s| s == seq))
            && (self.bitrates_kbps.is_empty() || self.bitrates_kbps.contains(&bitrate))
    }
}

#[derive(Debug, Default)]
pub struct BenchOutcome {
    pub records: Vec<RunRecord>,
    pub failures: Vec<(String, Error)>,
}

struct Job<'a> {
    profile: &'a EncoderProfile,
    seq: &'a VideoSequence,
    bitrate: u32,
    mode: RunMode,
    repetition: u32,
}

pub const RUNS_CSV: &str = "runs.csv";
pub const MANIFEST_COPY: &str = "manifest.json";
const RECORD_SUFFIX: &str = ".run.json";

/// Runs every (profile, sequence, bitrate, mode, repetition) admitted by
/// `filter`, persisting one JSON record per successful run plus `runs.csv`.
/// Failed runs are collected, not fatal.
pub fn run_benchmark(
    config: &BenchmarkConfig,
    sequences: &[VideoSequence],
    modes: &[RunMode],
    filter: &RunFilter,
) -> Result<BenchOutcome> {
    config.validate()?;
    let dir = &config.output_dir;
    let streams = dir.join("bitstreams");
    fs::create_dir_all(&streams).map_err(|e| Error::io(&streams, e))?;

    let mut used = Vec::new();
    for name in &config.sequences {
        let seq = sequences
            .iter()
            .find(|s| &s.short_name == name)
            .ok_or_else(|| Error::Config(format!("sequence {name} not in manifest")))?;
        used.push(seq);
    }
    write_atomic(&dir.join(MANIFEST_COPY), &serde_json::to_vec_pretty(&used)?)?;

    let quality_mode = if modes.contains(&RunMode::Unpaced) {
        RunMode::Unpaced
    } else {
        RunMode::Paced
    };
    let metric = config.metric.as_ref().map(|m| MetricTool::new(m.command_template.clone()));

    let mut jobs: Vec<Job> = Vec::new();
    for &mode in [RunMode::Unpaced, RunMode::Paced].iter().filter(|m| modes.contains(m)) {
        for profile in &config.profiles {
            for &seq in &used {
                for &bitrate in &config.bitrates_kbps {
                    if !filter.admits(&profile.name, &seq.short_name, bitrate) {
                        continue;
                    }
                    for repetition in 0..config.repetitions {
                        jobs.push(Job {
                            profile,
                            seq,
                            bitrate,
                            mode,
                            repetition,
                        });
                    }
                }
            }
        }
    }

    let run_job = |job: &Job| -> (String, Result<RunRecord>) {
        let id = run_id(&job.profile.name, &job.seq.short_name, job.bitrate, job.mode, job.repetition);
        let output = streams.join(format!("{id}.{}", job.profile.output_extension));
        let result = (|| {
            let mut rec = match job.mode {
                RunMode::Paced => run_paced(job.profile, job.seq, job.bitrate, &output)?,
                RunMode::Unpaced => run_unpaced(job.profile, job.seq, job.bitrate, &output)?,
            };
            rec.repetition = job.repetition;
            rec.run_id = id.clone();
            if let Some(tool) = &metric {
                if job.mode == quality_mode && job.repetition == 0 {
                    let name = format!("{id}.metric.json");
                    tool.run(job.seq, &output, &dir.join(&name))?;
                    rec.quality_report = Some(name);
                }
            }
            write_atomic(&dir.join(format!("{id}{RECORD_SUFFIX}")), &serde_json::to_vec_pretty(&rec)?)?;
            log::info!(
                "{id}: {:.2} fps, {:.1} kbps achieved",
                rec.throughput_fps,
                rec.achieved_bitrate_kbps
            );
            Ok(rec)
        })();
        (id, result)
    };

    let mut results = Vec::with_capacity(jobs.len());
    let (unpaced, paced): (Vec<&Job>, Vec<&Job>) = jobs.iter().partition(|j| j.mode == RunMode::Unpaced);
    let workers = config.unpaced_jobs.max(1);
    if workers == 1 {
        results.extend(unpaced.iter().map(|j| run_job(j)));
    } else {
        for chunk in unpaced.chunks(workers) {
            thread::scope(|s| {
                let handles: Vec<_> = chunk.iter().map(|j| s.spawn(|| run_job(j))).collect();
                results.extend(handles.into_iter().map(|h| h.join().expect("run thread panicked")));
            });
        }
    }
    results.extend(paced.iter().map(|j| run_job(j)));

    let mut outcome = BenchOutcome::default();
    for (id, r) in results {
        match r {
            Ok(rec) => outcome.records.push(rec),
            Err(e) => {
                log::error!("{id}: {e}");
                outcome.failures.push((id, e));
            }
        }
    }
    let all = load_records(dir)?;
    write_runs_csv(&dir.join(RUNS_CSV), &all)?;
    Ok(outcome)
}

/// All `*.run.json` records in `dir`, sorted by profile, sequence, bitrate, mode, repetition.
pub fn load_records(dir: &Path) -> Result<Vec<RunRecord>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with(RECORD_SUFFIX)) {
            let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
            out.push(serde_json::from_slice::<RunRecord>(&bytes)?);
        }
    }
    out.sort_by(|a, b| {
        (&a.profile, &a.sequence, a.target_bitrate_kbps, a.mode, a.repetition).cmp(&(
            &b.profile,
            &b.sequence,
            b.target_bitrate_kbps,
            b.mode,
            b.repetition,
        ))
    });
    Ok(out)
}

/// One row of the `runs.csv` index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunsCsvRow {
    pub profile: String,
    pub seq: String,
    pub bitrate_kbps: u32,
    pub mode: RunMode,
    pub wall_time_s: f64,
    pub frames: u64,
    pub throughput_fps: f64,
    pub output_bytes: u64,
    pub achieved_kbps: f64,
}

impl From<&RunRecord> for RunsCsvRow {
    fn from(r: &RunRecord) -> Self {
        RunsCsvRow {
            profile: r.profile.clone(),
            seq: r.sequence.clone(),
            bitrate_kbps: r.target_bitrate_kbps,
            mode: r.mode,
            wall_time_s: r.wall_time_s,
            frames: r.frames_in,
            throughput_fps: r.throughput_fps,
            output_bytes: r.output_size_bytes,
            achieved_kbps: r.achieved_bitrate_kbps,
        }
    }
}

pub fn runs_csv_bytes(records: &[RunRecord]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(RunsCsvRow::from(r))?;
    }
    if records.is_empty() {
        w.write_record([
            "profile",
            "seq",
            "bitrate_kbps",
            "mode",
            "wall_time_s",
            "frames",
            "throughput_fps",
            "output_bytes",
            "achieved_kbps",
        ])?;
    }
    w.into_inner().map_err(|e| Error::Stream(e.into_error()))
}

pub fn write_runs_csv(path: &Path, records: &[RunRecord]) -> Result<()> {
    write_atomic(path, &runs_csv_bytes(records)?)
}

pub fn read_runs_csv(path: &Path) -> Result<Vec<RunsCsvRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}
