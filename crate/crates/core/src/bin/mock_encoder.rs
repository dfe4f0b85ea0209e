//! Stand-in encoder and metric tool for tests and dry runs.
//!
//! `fast` reads frames as quickly as they arrive, `sleep` holds each frame for
//! a fixed delay, and `metric` writes a quality report whose score depends only
//! on the distorted file's bitrate. Encoders emit `bitrate * 125 / fps` bytes
//! per frame (times `--size-factor`), so achieved bitrate tracks the target.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::thread;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use pacebench::dataset::FrameRate;

#[derive(Parser)]
#[command(name = "mock-encoder")]
struct Cli {
    #[command(subcommand)]
    mode: Mode,
}

#[derive(Subcommand)]
enum Mode {
    /// Consume frames as fast as possible.
    Fast(EncodeArgs),
    /// Sleep after every frame.
    Sleep {
        #[arg(long)]
        delay_ms: u64,
        #[command(flatten)]
        enc: EncodeArgs,
    },
    /// Score a distorted file by its bitrate.
    Metric(MetricArgs),
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long)]
    width: u32,
    #[arg(long)]
    height: u32,
    #[arg(long)]
    bitrate: u32,
    #[arg(long, default_value = "25")]
    fps: FrameRate,
    /// Output file, or '-' for stdout.
    #[arg(long)]
    output: String,
    /// Read frames from this file instead of stdin.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Input is a Y4M stream.
    #[arg(long)]
    y4m: bool,
    /// Stop reading (and exit 0) after this many frames.
    #[arg(long)]
    exit_after: Option<u64>,
    /// Print a diagnostic and exit 1 without reading.
    #[arg(long)]
    fail: bool,
    #[arg(long, default_value_t = 1.0)]
    size_factor: f64,
}

#[derive(Args)]
struct MetricArgs {
    #[arg(long)]
    reference: PathBuf,
    #[arg(long)]
    distorted: PathBuf,
    #[arg(long)]
    width: u32,
    #[arg(long)]
    height: u32,
    #[arg(long)]
    fps: FrameRate,
    #[arg(long)]
    report_out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.mode {
        Mode::Fast(a) => encode(&a, None),
        Mode::Sleep { delay_ms, enc } => encode(&enc, Some(Duration::from_millis(delay_ms))),
        Mode::Metric(a) => metric(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mock-encoder: {e}");
            ExitCode::FAILURE
        }
    }
}

fn encode(a: &EncodeArgs, delay: Option<Duration>) -> io::Result<()> {
    if a.fail {
        eprintln!("mock-encoder: simulated failure at {} kbps", a.bitrate);
        std::process::exit(1);
    }
    let input: Box<dyn Read> = match &a.input {
        Some(p) => Box::new(File::open(p)?),
        None => Box::new(io::stdin().lock()),
    };
    // A slow encoder must not read ahead much, or a whole frame can slip
    // into its buffer and hide the backpressure.
    let capacity = if delay.is_some() { 8 * 1024 } else { 1 << 20 };
    let mut input = BufReader::with_capacity(capacity, input);
    let mut out: Box<dyn Write> = if a.output == "-" {
        Box::new(io::stdout().lock())
    } else {
        Box::new(File::create(&a.output)?)
    };
    let frame_size = a.width as usize * a.height as usize * 3 / 2;
    if a.y4m {
        let mut line = Vec::new();
        input.read_until(b'\n', &mut line)?;
        if !line.starts_with(b"YUV4MPEG2 ") {
            return Err(io::Error::new(io::ErrorKind::InvalidData, "not a Y4M stream"));
        }
    }

    // Emitted bytes accumulate fractionally so the total is exact.
    let per_frame = a.bitrate as f64 * 125.0 * a.fps.interval_s() * a.size_factor;
    let mut emitted = 0u64;
    let mut frames = 0u64;
    let mut buf = vec![0u8; frame_size];
    let mut line = Vec::new();
    loop {
        if a.exit_after.is_some_and(|n| frames >= n) {
            break;
        }
        if a.y4m {
            line.clear();
            if input.read_until(b'\n', &mut line)? == 0 {
                break;
            }
            if !line.starts_with(b"FRAME") {
                return Err(io::Error::new(io::ErrorKind::InvalidData, "missing FRAME marker"));
            }
        }
        match input.read_exact(&mut buf) {
            Ok(()) => {}
            Err(e) if e.kind() == io::ErrorKind::UnexpectedEof && !a.y4m => break,
            Err(e) => return Err(e),
        }
        frames += 1;
        let target = (per_frame * frames as f64).round() as u64;
        let chunk = vec![0x55u8; (target - emitted) as usize];
        out.write_all(&chunk)?;
        emitted = target;
        if let Some(d) = delay {
            thread::sleep(d);
        }
    }
    out.flush()?;
    eprintln!("mock-encoder: {frames} frames, {emitted} bytes");
    Ok(())
}

fn metric(a: &MetricArgs) -> io::Result<()> {
    let frame_size = a.width as u64 * a.height as u64 * 3 / 2;
    let mut reference = BufReader::new(File::open(&a.reference)?);
    let total = reference.get_ref().metadata()?.len();
    let mut head = Vec::new();
    reference.read_until(b'\n', &mut head)?;
    let frames = if head.starts_with(b"YUV4MPEG2 ") {
        // Plain "FRAME\n" markers, as written by the synthetic clip generator.
        (total - head.len() as u64) / (frame_size + 6)
    } else {
        total / frame_size
    };
    if frames == 0 {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "empty reference"));
    }
    let bytes = std::fs::metadata(&a.distorted)?.len();
    let kbps = bytes as f64 * 8.0 / 1000.0 / (frames as f64 * a.fps.interval_s());
    let pooled = 100.0 * (1.0 - (-kbps / 1500.0).exp());
    let report = serde_json::json!({ "metric": "vmaf", "pooled": pooled });
    std::fs::write(&a.report_out, report.to_string())
}
