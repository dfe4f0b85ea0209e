//! Raw video sources: sequence descriptions, the JSON manifest, and
//! frame readers for Y4M and headerless planar I420.

use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const Y4M_MAGIC: &[u8] = b"YUV4MPEG2";
const Y4M_FRAME: &[u8] = b"FRAME";
const MAX_HEADER_LINE: usize = 4096;

/// A frame rate as an exact ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FrameRate {
    num: u32,
    den: u32,
}

impl FrameRate {
    pub fn new(num: u32, den: u32) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::InvalidRate {
                num: num.into(),
                den: den.into(),
            });
        }
        Ok(FrameRate { num, den })
    }

    pub fn num(self) -> u32 {
        self.num
    }

    pub fn den(self) -> u32 {
        self.den
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.num) / f64::from(self.den)
    }

    /// Seconds between consecutive frames.
    pub fn interval_s(self) -> f64 {
        f64::from(self.den) / f64::from(self.num)
    }

    pub fn interval(self) -> Duration {
        // Exact in nanoseconds up to rounding of the last digit.
        let nanos = (u128::from(self.den) * 1_000_000_000) / u128::from(self.num);
        Duration::from_nanos(nanos as u64)
    }

    /// Same rate with the ratio reduced, so that 50/2 and 25/1 compare equal.
    pub fn reduced(self) -> Self {
        fn gcd(a: u32, b: u32) -> u32 {
            if b == 0 {
                a
            } else {
                gcd(b, a % b)
            }
        }
        let g = gcd(self.num, self.den);
        FrameRate {
            num: self.num / g,
            den: self.den / g,
        }
    }
}

/// Integer rates print as `25`, others as `30000/1001`.
impl fmt::Display for FrameRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for FrameRate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("frame rate {s:?}, expected N or N/D"));
        let (n, d) = match s.split_once(['/', ':']) {
            Some((n, d)) => (n, d),
            None => (s, "1"),
        };
        let num = n.trim().parse().map_err(|_| bad())?;
        let den = d.trim().parse().map_err(|_| bad())?;
        FrameRate::new(num, den)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PixelFormat {
    #[serde(rename = "I420_8bit", alias = "i420", alias = "yuv420p")]
    I420,
}

impl fmt::Display for PixelFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("I420_8bit")
    }
}

pub fn frame_byte_size(width: u32, height: u32, format: PixelFormat) -> Result<usize> {
    if width == 0 || height == 0 || !width.is_multiple_of(2) || !height.is_multiple_of(2) {
        return Err(Error::InvalidGeometry { width, height });
    }
    match format {
        PixelFormat::I420 => Ok(width as usize * height as usize * 3 / 2),
    }
}

/// One manifest row as it appears on disk.
#[derive(Debug, Clone, Deserialize)]
struct ManifestEntry {
    name: String,
    short_name: String,
    #[serde(default)]
    path: PathBuf,
    fps_num: u32,
    fps_den: u32,
    width: u32,
    height: u32,
    pixel_format: PixelFormat,
    frame_count: u64,
    #[serde(default)]
    duration_s: Option<f64>,
}

/// A raw source clip. Immutable once validated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ManifestEntry")]
pub struct VideoSequence {
    pub name: String,
    pub short_name: String,
    pub path: PathBuf,
    pub fps_num: u32,
    pub fps_den: u32,
    pub width: u32,
    pub height: u32,
    pub pixel_format: PixelFormat,
    pub frame_count: u64,
    pub duration_s: f64,
}

impl TryFrom<ManifestEntry> for VideoSequence {
    type Error = Error;

    fn try_from(e: ManifestEntry) -> Result<Self> {
        // Deserialization already rejected unknown formats.
        let PixelFormat::I420 = e.pixel_format;
        VideoSequence::new(
            e.name,
            e.short_name,
            e.path,
            FrameRate::new(e.fps_num, e.fps_den).map_err(|err| Error::Manifest {
                entry: "?".into(),
                message: err.to_string(),
            })?,
            (e.width, e.height),
            e.frame_count,
            e.duration_s,
        )
    }
}

impl VideoSequence {
    /// Validates a sequence description. `duration_s` is derived when absent,
    /// and must agree with `frame_count` to the nearest frame when present.
    pub fn new(
        name: impl Into<String>,
        short_name: impl Into<String>,
        path: impl Into<PathBuf>,
        rate: FrameRate,
        (width, height): (u32, u32),
        frame_count: u64,
        duration_s: Option<f64>,
    ) -> Result<Self> {
        let short_name = short_name.into();
        let fail = |message: String| Error::Manifest {
            entry: short_name.clone(),
            message,
        };
        frame_byte_size(width, height, PixelFormat::I420).map_err(|e| fail(e.to_string()))?;
        if frame_count == 0 {
            return Err(fail("frame_count must be at least 1".into()));
        }
        let derived = frame_count as f64 * rate.interval_s();
        let duration_s = match duration_s {
            None => derived,
            Some(d) => {
                if !d.is_finite() || d <= 0.0 {
                    return Err(fail(format!("duration_s {d} must be positive")));
                }
                let expected = d * rate.as_f64();
                if expected.round() != frame_count as f64 || (expected - frame_count as f64).abs() > 0.5 {
                    return Err(fail(format!(
                        "frame_count {frame_count} inconsistent with {d} s at {rate} fps ({expected:.3} frames)"
                    )));
                }
                d
            }
        };
        Ok(VideoSequence {
            name: name.into(),
            short_name,
            path: path.into(),
            fps_num: rate.num(),
            fps_den: rate.den(),
            width,
            height,
            pixel_format: PixelFormat::I420,
            frame_count,
            duration_s,
        })
    }

    pub fn frame_rate(&self) -> FrameRate {
        FrameRate {
            num: self.fps_num,
            den: self.fps_den,
        }
    }

    pub fn frame_size(&self) -> usize {
        self.width as usize * self.height as usize * 3 / 2
    }

    pub fn is_y4m(&self) -> bool {
        self.path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("y4m"))
    }
}

/// Loads and validates a JSON manifest. Relative `path` entries resolve
/// against the manifest's directory.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<Vec<VideoSequence>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut seqs = parse_manifest(&text)?;
    let base = path.parent().unwrap_or(Path::new(""));
    for s in &mut seqs {
        if !s.path.as_os_str().is_empty() && s.path.is_relative() {
            s.path = base.join(&s.path);
        }
    }
    Ok(seqs)
}

pub fn parse_manifest(text: &str) -> Result<Vec<VideoSequence>> {
    let raw: Vec<serde_json::Value> = serde_json::from_str(text)?;
    let mut out: Vec<VideoSequence> = Vec::with_capacity(raw.len());
    for (i, value) in raw.into_iter().enumerate() {
        let label = value
            .get("short_name")
            .and_then(|v| v.as_str())
            .map(str::to_owned)
            .unwrap_or_else(|| format!("#{i}"));
        let entry: ManifestEntry = serde_json::from_value(value).map_err(|e| Error::Manifest {
            entry: label.clone(),
            message: e.to_string(),
        })?;
        let seq = VideoSequence::try_from(entry).map_err(|e| match e {
            Error::Manifest { message, .. } => Error::Manifest {
                entry: label.clone(),
                message,
            },
            other => other,
        })?;
        if out.iter().any(|s| s.short_name == seq.short_name) {
            return Err(Error::Manifest {
                entry: label,
                message: "duplicate short_name".into(),
            });
        }
        out.push(seq);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameBuffer {
    payload: Vec<u8>,
    pub width: u32,
    pub height: u32,
    pub pixel_format: PixelFormat,
}

impl FrameBuffer {
    pub fn new(payload: Vec<u8>, width: u32, height: u32) -> Result<Self> {
        let size = frame_byte_size(width, height, PixelFormat::I420)?;
        if payload.len() != size {
            return Err(Error::InvalidInput(format!(
                "frame payload is {} bytes, expected {size}",
                payload.len()
            )));
        }
        Ok(FrameBuffer {
            payload,
            width,
            height,
            pixel_format: PixelFormat::I420,
        })
    }

    pub fn payload(&self) -> &[u8] {
        &self.payload
    }
}

/// Anything that yields frames one at a time.
pub trait FrameSource {
    fn next_frame(&mut self) -> Result<Option<FrameBuffer>>;
}

impl FrameSource for std::vec::IntoIter<FrameBuffer> {
    fn next_frame(&mut self) -> Result<Option<FrameBuffer>> {
        Ok(self.next())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Y4mHeader {
    pub width: u32,
    pub height: u32,
    pub rate: FrameRate,
    /// Remaining parameters (I, A, C, X...) preserved verbatim.
    pub extra: Vec<String>,
}

impl Y4mHeader {
    pub fn for_sequence(seq: &VideoSequence) -> Self {
        Y4mHeader {
            width: seq.width,
            height: seq.height,
            rate: seq.frame_rate(),
            extra: vec!["Ip".into(), "A1:1".into(), "C420jpeg".into()],
        }
    }

    pub fn to_line(&self) -> String {
        let mut s = format!(
            "YUV4MPEG2 W{} H{} F{}:{}",
            self.width,
            self.height,
            self.rate.num(),
            self.rate.den()
        );
        for p in &self.extra {
            s.push(' ');
            s.push_str(p);
        }
        s.push('\n');
        s
    }
}

fn y4m_err(field: &'static str, message: impl Into<String>) -> Error {
    Error::Y4mParse {
        field,
        message: message.into(),
    }
}

/// Parses a Y4M stream header. Returns the header and the offset of the
/// first byte after the header line, i.e. the first `FRAME` marker.
pub fn parse_y4m_header(bytes: &[u8]) -> Result<(Y4mHeader, usize)> {
    if !bytes.starts_with(Y4M_MAGIC) {
        return Err(y4m_err("magic", "missing YUV4MPEG2 magic"));
    }
    let end = bytes
        .iter()
        .take(MAX_HEADER_LINE)
        .position(|&b| b == b'\n')
        .ok_or_else(|| y4m_err("magic", "header line not terminated"))?;
    let line = std::str::from_utf8(&bytes[..end]).map_err(|_| y4m_err("magic", "header is not ASCII"))?;

    let (mut width, mut height, mut rate) = (None, None, None);
    let mut extra = Vec::new();
    for param in line.split(' ').skip(1).filter(|p| !p.is_empty()) {
        let (tag, value) = param.split_at(1);
        match tag {
            "W" => width = Some(value.parse::<u32>().map_err(|_| y4m_err("W", format!("bad width {value:?}")))?),
            "H" => height = Some(value.parse::<u32>().map_err(|_| y4m_err("H", format!("bad height {value:?}")))?),
            "F" => {
                let (n, d) = value
                    .split_once(':')
                    .ok_or_else(|| y4m_err("F", format!("bad frame rate {value:?}")))?;
                let parsed = n
                    .parse()
                    .ok()
                    .zip(d.parse().ok())
                    .and_then(|(n, d)| FrameRate::new(n, d).ok())
                    .ok_or_else(|| y4m_err("F", format!("bad frame rate {value:?}")))?;
                rate = Some(parsed);
            }
            "C" => {
                if !matches!(value, "420" | "420jpeg" | "420paldv" | "420mpeg2") {
                    return Err(y4m_err("C", format!("unsupported colorspace {value:?}, only 8-bit 4:2:0")));
                }
                extra.push(param.to_string());
            }
            _ => extra.push(param.to_string()),
        }
    }
    let header = Y4mHeader {
        width: width.ok_or_else(|| y4m_err("W", "missing width"))?,
        height: height.ok_or_else(|| y4m_err("H", "missing height"))?,
        rate: rate.ok_or_else(|| y4m_err("F", "missing frame rate"))?,
        extra,
    };
    Ok((header, end + 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Container {
    Raw,
    Y4m,
}

/// Sequential reader yielding exactly `frame_count` frames.
pub struct FrameReader<R> {
    inner: R,
    container: Container,
    width: u32,
    height: u32,
    frame_size: usize,
    frame_count: u64,
    frames_read: u64,
}

impl FrameReader<BufReader<File>> {
    /// Opens `seq.path`, sniffing for a Y4M header.
    pub fn open(seq: &VideoSequence) -> Result<Self> {
        Self::open_path(&seq.path, seq)
    }

    pub fn open_path(path: &Path, seq: &VideoSequence) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = BufReader::with_capacity(1 << 20, file);
        let is_y4m = reader
            .fill_buf()
            .map_err(|e| Error::io(path, e))?
            .starts_with(Y4M_MAGIC);
        if is_y4m {
            FrameReader::y4m(reader, seq)
        } else {
            Ok(FrameReader::raw(reader, seq))
        }
    }
}

impl<R: BufRead> FrameReader<R> {
    /// Headerless planar input: geometry comes from the sequence.
    pub fn raw(inner: R, seq: &VideoSequence) -> Self {
        FrameReader {
            inner,
            container: Container::Raw,
            width: seq.width,
            height: seq.height,
            frame_size: seq.frame_size(),
            frame_count: seq.frame_count,
            frames_read: 0,
        }
    }

    /// Y4M input. The stream header must agree with the sequence.
    pub fn y4m(mut inner: R, seq: &VideoSequence) -> Result<Self> {
        let mut line = Vec::new();
        read_line(&mut inner, &mut line)?;
        let (header, _) = parse_y4m_header(&line)?;
        if header.width != seq.width || header.height != seq.height {
            return Err(Error::Manifest {
                entry: seq.short_name.clone(),
                message: format!(
                    "y4m geometry {}x{} disagrees with manifest {}x{}",
                    header.width, header.height, seq.width, seq.height
                ),
            });
        }
        if header.rate.reduced() != seq.frame_rate().reduced() {
            return Err(Error::Manifest {
                entry: seq.short_name.clone(),
                message: format!("y4m frame rate {} disagrees with manifest {}", header.rate, seq.frame_rate()),
            });
        }
        Ok(FrameReader {
            container: Container::Y4m,
            ..FrameReader::raw(inner, seq)
        })
    }

    pub fn frames_read(&self) -> u64 {
        self.frames_read
    }

    pub fn read_frame(&mut self) -> Result<Option<FrameBuffer>> {
        if self.frames_read >= self.frame_count {
            return Ok(None);
        }
        let truncated = |read| Error::Truncated {
            frames_read: read,
            expected: self.frame_count,
        };
        if self.container == Container::Y4m {
            let mut line = Vec::new();
            let n = read_line(&mut self.inner, &mut line)?;
            if n == 0 {
                return Err(truncated(self.frames_read));
            }
            if !line.starts_with(Y4M_FRAME) {
                return Err(y4m_err("FRAME", format!("expected FRAME marker at frame {}", self.frames_read)));
            }
        }
        let mut payload = vec![0u8; self.frame_size];
        let got = read_full(&mut self.inner, &mut payload)?;
        if got < self.frame_size {
            return Err(truncated(self.frames_read));
        }
        self.frames_read += 1;
        Ok(Some(FrameBuffer {
            payload,
            width: self.width,
            height: self.height,
            pixel_format: PixelFormat::I420,
        }))
    }
}

impl<R: BufRead> FrameSource for FrameReader<R> {
    fn next_frame(&mut self) -> Result<Option<FrameBuffer>> {
        self.read_frame()
    }
}

fn read_line<R: BufRead>(r: &mut R, buf: &mut Vec<u8>) -> Result<usize> {
    let n = r
        .by_ref()
        .take(MAX_HEADER_LINE as u64)
        .read_until(b'\n', buf)?;
    if n > 0 && buf.last() != Some(&b'\n') {
        return Err(y4m_err("FRAME", "unterminated line"));
    }
    Ok(n)
}

fn read_full<R: Read>(r: &mut R, buf: &mut [u8]) -> io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(filled)
}

/// Writes a deterministic synthetic clip (moving gradient) for `seq`,
/// as Y4M when the path ends in `.y4m`, headerless otherwise.
pub fn write_synthetic_clip(seq: &VideoSequence) -> Result<()> {
    let path = &seq.path;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = io::BufWriter::new(file);
    if seq.is_y4m() {
        w.write_all(Y4mHeader::for_sequence(seq).to_line().as_bytes())?;
    }
    let luma = seq.width as usize * seq.height as usize;
    let mut frame = vec![0u8; seq.frame_size()];
    for k in 0..seq.frame_count {
        for (i, px) in frame.iter_mut().enumerate() {
            *px = if i < luma {
                let (x, y) = (i % seq.width as usize, i / seq.width as usize);
                (x + y + k as usize * 3) as u8
            } else {
                128u8.wrapping_add((k % 16) as u8)
            };
        }
        if seq.is_y4m() {
            w.write_all(b"FRAME\n")?;
        }
        w.write_all(&frame)?;
    }
    w.flush()?;
    Ok(())
}
