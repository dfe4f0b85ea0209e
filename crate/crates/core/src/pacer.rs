//! Real-time frame delivery.
//!
//! Frames are written to a byte sink on an absolute schedule anchored at a
//! monotonic start instant: frame `k` is released at `start + k * interval`.
//! Writes block when the consumer is slow; the delay shows up as lateness
//! rather than as dropped frames.

use std::io::{self, Write};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::dataset::{FrameRate, FrameSource, Y4mHeader};
use crate::error::{Error, Result};

/// Sleep until this far ahead of a deadline, then spin.
const SPIN_MARGIN: Duration = Duration::from_millis(2);

pub fn frame_interval(fps_num: u32, fps_den: u32) -> Result<f64> {
    Ok(FrameRate::new(fps_num, fps_den)?.interval_s())
}

/// Time before a `depth`-frame capture buffer is full at `rate`.
pub fn buffer_latency(depth_frames: u64, rate: FrameRate) -> f64 {
    depth_frames as f64 * rate.interval_s()
}

#[derive(Debug, Clone, Copy)]
pub struct PacingSchedule {
    rate: FrameRate,
    start: Instant,
}

impl PacingSchedule {
    pub fn starting_at(rate: FrameRate, start: Instant) -> Self {
        PacingSchedule { rate, start }
    }

    pub fn start_now(rate: FrameRate) -> Self {
        Self::starting_at(rate, Instant::now())
    }

    pub fn start(&self) -> Instant {
        self.start
    }

    pub fn rate(&self) -> FrameRate {
        self.rate
    }

    pub fn deadline(&self, k: u64) -> Instant {
        // Computed from k directly so rounding never accumulates.
        let nanos = u128::from(k) * u128::from(self.rate.den()) * 1_000_000_000 / u128::from(self.rate.num());
        self.start + Duration::from_nanos(nanos as u64)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PacingReport {
    pub frames_sent: u64,
    /// Schedule start to completion of the last write.
    pub total_duration_s: f64,
    /// Write completion minus deadline, clamped at zero, one entry per frame.
    pub lateness_per_frame: Vec<f64>,
    /// Time spent inside blocking writes.
    pub blocked_time_s: f64,
}

impl PacingReport {
    pub fn max_lateness(&self) -> f64 {
        self.lateness_per_frame.iter().copied().fold(0.0, f64::max)
    }

    /// Nearest-rank percentile of lateness, `p` in [0, 100].
    pub fn lateness_percentile(&self, p: f64) -> f64 {
        if self.lateness_per_frame.is_empty() {
            return 0.0;
        }
        let mut sorted = self.lateness_per_frame.clone();
        sorted.sort_by(f64::total_cmp);
        let rank = ((p / 100.0) * sorted.len() as f64).ceil().max(1.0) as usize;
        sorted[rank.min(sorted.len()) - 1]
    }

    /// Frame intervals delivered per second: `(frames_sent - 1) / total_duration_s`.
    /// `None` for fewer than two frames.
    pub fn delivery_rate(&self) -> Option<f64> {
        if self.frames_sent < 2 || self.total_duration_s <= 0.0 {
            return None;
        }
        Some((self.frames_sent - 1) as f64 / self.total_duration_s)
    }
}

/// How frames are framed on the wire.
#[derive(Debug, Clone)]
pub enum Framing {
    Raw,
    /// Stream header once, then a `FRAME` line before every payload.
    Y4m(Y4mHeader),
}

fn wait_until(deadline: Instant) {
    let now = Instant::now();
    if deadline > now + SPIN_MARGIN {
        thread::sleep(deadline - now - SPIN_MARGIN);
    }
    while Instant::now() < deadline {
        std::hint::spin_loop();
    }
}

fn is_closed(e: &io::Error) -> bool {
    matches!(
        e.kind(),
        io::ErrorKind::BrokenPipe | io::ErrorKind::ConnectionReset | io::ErrorKind::WriteZero
    )
}

/// Paces `source` into `sink` at `rate`, starting now.
pub fn run_paced<S, W>(source: &mut S, sink: W, rate: FrameRate, framing: &Framing) -> Result<PacingReport>
where
    S: FrameSource + ?Sized,
    W: Write,
{
    run_paced_with(source, sink, PacingSchedule::start_now(rate), framing)
}

/// Paces `source` into `sink` on a caller-supplied schedule. The sink is
/// flushed after every frame and dropped (closed) after the last one.
pub fn run_paced_with<S, W>(source: &mut S, mut sink: W, schedule: PacingSchedule, framing: &Framing) -> Result<PacingReport>
where
    S: FrameSource + ?Sized,
    W: Write,
{
    let mut report = PacingReport::default();
    let mut blocked = Duration::ZERO;
    let mut last_done = schedule.start();

    let abort = |report: &mut PacingReport, blocked: Duration, last_done: Instant, e: io::Error| {
        report.blocked_time_s = blocked.as_secs_f64();
        report.total_duration_s = last_done.saturating_duration_since(schedule.start()).as_secs_f64();
        if is_closed(&e) {
            Error::DeliveryAborted {
                report: Box::new(std::mem::take(report)),
                diagnostic: String::new(),
            }
        } else {
            Error::Stream(e)
        }
    };

    if let Framing::Y4m(header) = framing {
        let t = Instant::now();
        if let Err(e) = sink.write_all(header.to_line().as_bytes()) {
            return Err(abort(&mut report, blocked, last_done, e));
        }
        blocked += t.elapsed();
    }

    let mut k = 0u64;
    // Read ahead of the deadline so source I/O is not charged to delivery.
    while let Some(frame) = source.next_frame()? {
        let deadline = schedule.deadline(k);
        wait_until(deadline);
        let began = Instant::now();
        let written = (|| {
            if matches!(framing, Framing::Y4m(_)) {
                sink.write_all(b"FRAME\n")?;
            }
            sink.write_all(frame.payload())?;
            sink.flush()
        })();
        let done = Instant::now();
        blocked += done - began;
        if let Err(e) = written {
            return Err(abort(&mut report, blocked, last_done, e));
        }
        last_done = done;
        report.frames_sent += 1;
        report
            .lateness_per_frame
            .push(done.saturating_duration_since(deadline).as_secs_f64());
        k += 1;
    }
    drop(sink);

    report.blocked_time_s = blocked.as_secs_f64();
    report.total_duration_s = last_done.saturating_duration_since(schedule.start()).as_secs_f64();
    Ok(report)
}
