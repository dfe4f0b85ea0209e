use std::io;
use std::path::PathBuf;

use crate::bd_metrics::Axis;
use crate::pacer::PacingReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid geometry {width}x{height}: 4:2:0 frames need even, non-zero dimensions")]
    InvalidGeometry { width: u32, height: u32 },

    #[error("unsupported pixel format: {0}")]
    UnsupportedFormat(String),

    #[error("y4m header: {field}: {message}")]
    Y4mParse { field: &'static str, message: String },

    #[error("truncated input: {frames_read} complete frame(s) read, expected {expected}")]
    Truncated { frames_read: u64, expected: u64 },

    #[error("manifest entry {entry}: {message}")]
    Manifest { entry: String, message: String },

    #[error("invalid frame rate {num}/{den}")]
    InvalidRate { num: u64, den: u64 },

    #[error("delivery aborted after {} frame(s): consumer closed the sink{}", report.frames_sent, diag_suffix(.diagnostic))]
    DeliveryAborted {
        report: Box<PacingReport>,
        diagnostic: String,
    },

    #[error("command template: {0}")]
    Template(String),

    #[error("config: {0}")]
    Config(String),

    #[error("failed to spawn {program}: {source}")]
    Spawn {
        program: String,
        #[source]
        source: io::Error,
    },

    #[error("{program} exited with {}{}", status.map_or_else(|| "a signal".to_string(), |c| format!("status {c}")), diag_suffix(.stderr))]
    ChildFailed {
        program: String,
        status: Option<i32>,
        stderr: String,
    },

    #[error("metric report: {0}")]
    ReportSchema(String),

    #[error("score {0} outside [0, 100]")]
    ScoreRange(f64),

    #[error("duplicate curve point near {rate_kbps} kbps")]
    DuplicatePoint { rate_kbps: f64 },

    #[error("insufficient data: {points} point(s), need at least 2")]
    InsufficientData { points: usize },

    #[error("degenerate curve {label}: fewer than 2 points remain after monotone pruning")]
    DegenerateCurve { label: String },

    #[error("no common {axis} range: [{lo}, {hi}] is empty")]
    NoOverlap { axis: Axis, lo: f64, hi: f64 },

    #[error("refusing to extrapolate: {x} outside [{lo}, {hi}]")]
    Extrapolation { x: f64, lo: f64, hi: f64 },

    #[error("empty group")]
    EmptyGroup,

    #[error("ranking unavailable: average for {profile} is undefined")]
    RankingUnavailable { profile: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    Stream(#[from] io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

fn diag_suffix(text: &str) -> String {
    let t = text.trim();
    if t.is_empty() {
        String::new()
    } else {
        format!(": {t}")
    }
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for this error class.
    ///
    /// 1 = computation error, 2 = usage/config/input error, 3 = child process failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NoOverlap { .. }
            | Error::DegenerateCurve { .. }
            | Error::InsufficientData { .. }
            | Error::DuplicatePoint { .. }
            | Error::Extrapolation { .. }
            | Error::EmptyGroup
            | Error::RankingUnavailable { .. } => 1,
            Error::Spawn { .. } | Error::ChildFailed { .. } | Error::DeliveryAborted { .. } => 3,
            _ => 2,
        }
    }

    /// Stable snake_case identifier used in machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidGeometry { .. } => "invalid_geometry",
            Error::UnsupportedFormat(_) => "unsupported_format",
            Error::Y4mParse { .. } => "y4m_parse",
            Error::Truncated { .. } => "truncated",
            Error::Manifest { .. } => "manifest",
            Error::InvalidRate { .. } => "invalid_rate",
            Error::DeliveryAborted { .. } => "delivery_aborted",
            Error::Template(_) => "template",
            Error::Config(_) => "config",
            Error::Spawn { .. } => "spawn",
            Error::ChildFailed { .. } => "child_failed",
            Error::ReportSchema(_) => "report_schema",
            Error::ScoreRange(_) => "score_range",
            Error::DuplicatePoint { .. } => "duplicate_point",
            Error::InsufficientData { .. } => "insufficient_data",
            Error::DegenerateCurve { .. } => "degenerate_curve",
            Error::NoOverlap { .. } => "no_overlap",
            Error::Extrapolation { .. } => "extrapolation",
            Error::EmptyGroup => "empty_group",
            Error::RankingUnavailable { .. } => "ranking_unavailable",
            Error::InvalidInput(_) => "invalid_input",
            Error::Io { .. } | Error::Stream(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}
