//! Quality reports from an external metric tool, VMAF→MOS mapping, and
//! rate-quality curve assembly.

use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::Path;
use std::process::{Command, Stdio};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bd_metrics::{RateQualityCurve, RdPoint};
use crate::dataset::VideoSequence;
use crate::error::{Error, Result};
use crate::fsutil::write_atomic;
use crate::harness::RunRecord;
use crate::template::CommandTemplate;

pub const METRIC_PLACEHOLDERS: &[&str] = &["reference", "distorted", "width", "height", "fps", "report_out"];

/// Two achieved bitrates closer than this are the same curve point.
const DUPLICATE_RATE_KBPS: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct QualityReport {
    pub metric_name: String,
    pub per_frame_scores: Vec<f64>,
    pub pooled_score: f64,
}

#[derive(Serialize)]
struct ReportOut<'a> {
    metric: &'a str,
    pooled: f64,
    #[serde(skip_serializing_if = "<[f64]>::is_empty")]
    frames: &'a [f64],
}

fn check_score(v: f64) -> Result<f64> {
    if (0.0..=100.0).contains(&v) {
        Ok(v)
    } else {
        Err(Error::ScoreRange(v))
    }
}

fn number(v: &Value, what: &str) -> Result<f64> {
    v.as_f64()
        .ok_or_else(|| Error::ReportSchema(format!("{what} is not a number")))
}

impl QualityReport {
    pub fn pooled(metric: impl Into<String>, pooled: f64) -> Result<Self> {
        Ok(QualityReport {
            metric_name: metric.into(),
            per_frame_scores: Vec::new(),
            pooled_score: check_score(pooled)?,
        })
    }

    /// Parses the native schema `{"metric", "pooled"?, "frames"?}` or a
    /// libvmaf-style log with `pooled_metrics.<metric>.mean`.
    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text)?;
        let obj = v
            .as_object()
            .ok_or_else(|| Error::ReportSchema("top level is not an object".into()))?;

        let pooled_metrics = obj.get("pooled_metrics").and_then(Value::as_object);
        let metric = obj
            .get("metric")
            .and_then(Value::as_str)
            .map(str::to_owned)
            .or_else(|| pooled_metrics.and_then(|m| m.keys().find(|k| k.contains("vmaf")).cloned()))
            .or_else(|| pooled_metrics.and_then(|m| m.keys().next().cloned()))
            .unwrap_or_else(|| "vmaf".into());

        let pooled = match obj.get("pooled") {
            Some(p) => Some(number(p, "pooled")?),
            None => match pooled_metrics.and_then(|m| m.get(&metric)) {
                Some(m) => Some(number(
                    m.get("mean")
                        .ok_or_else(|| Error::ReportSchema(format!("pooled_metrics.{metric}.mean missing")))?,
                    "pooled mean",
                )?),
                None => None,
            },
        };

        let frames = match obj.get("frames") {
            None => Vec::new(),
            Some(Value::Array(items)) => items
                .iter()
                .map(|item| match item {
                    Value::Object(o) => o
                        .get("metrics")
                        .and_then(|m| m.get(&metric))
                        .ok_or_else(|| Error::ReportSchema(format!("frame without metrics.{metric}")))
                        .and_then(|s| number(s, "frame score")),
                    other => number(other, "frame score"),
                })
                .collect::<Result<Vec<f64>>>()?,
            Some(_) => return Err(Error::ReportSchema("frames is not an array".into())),
        };
        for &s in &frames {
            check_score(s)?;
        }

        let pooled_score = match (pooled, frames.is_empty()) {
            (Some(p), _) => {
                if !frames.is_empty() {
                    let mean = frames.iter().sum::<f64>() / frames.len() as f64;
                    if (mean - p).abs() > 1e-6 {
                        log::warn!("{metric}: pooled {p} differs from per-frame mean {mean}; keeping the tool's value");
                    }
                }
                check_score(p)?
            }
            (None, false) => frames.iter().sum::<f64>() / frames.len() as f64,
            (None, true) => return Err(Error::ReportSchema("neither pooled nor per-frame scores present".into())),
        };
        Ok(QualityReport {
            metric_name: metric,
            per_frame_scores: frames,
            pooled_score,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ReportOut {
            metric: &self.metric_name,
            pooled: self.pooled_score,
            frames: &self.per_frame_scores,
        })?)
    }
}

pub fn parse_metric_report(path: &Path) -> Result<QualityReport> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    QualityReport::from_json(&text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MosLabel {
    Bad,
    Poor,
    Fair,
    Good,
    Excellent,
}

impl std::fmt::Display for MosLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MosLabel::Bad => "bad",
            MosLabel::Poor => "poor",
            MosLabel::Fair => "fair",
            MosLabel::Good => "good",
            MosLabel::Excellent => "excellent",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MosCategory {
    pub mos_value: f64,
    pub label: MosLabel,
}

/// Linear map through the anchors 20→1, 40→2, 60→3, 80→4, 100→5, clamped to
/// [1, 5]. The label is the anchor nearest the MOS value, halves rounding up.
pub fn vmaf_to_mos(vmaf: f64) -> Result<MosCategory> {
    let vmaf = check_score(vmaf)?;
    let mos_value = (vmaf / 20.0).clamp(1.0, 5.0);
    let label = match (mos_value + 0.5).floor() as u32 {
        0 | 1 => MosLabel::Bad,
        2 => MosLabel::Poor,
        3 => MosLabel::Fair,
        4 => MosLabel::Good,
        _ => MosLabel::Excellent,
    };
    Ok(MosCategory { mos_value, label })
}

/// Builds a curve from (achieved bitrate, pooled score) of each run.
pub fn collect_curve<'a, I>(label: &str, runs: I) -> Result<RateQualityCurve>
where
    I: IntoIterator<Item = (&'a RunRecord, &'a QualityReport)>,
{
    let mut points: Vec<RdPoint> = runs
        .into_iter()
        .map(|(r, q)| RdPoint::new(r.achieved_bitrate_kbps, q.pooled_score))
        .collect();
    if points.len() < 2 {
        return Err(Error::InsufficientData { points: points.len() });
    }
    points.sort_by(|a, b| a.rate_kbps.total_cmp(&b.rate_kbps));
    if let Some(w) = points
        .windows(2)
        .find(|w| w[1].rate_kbps - w[0].rate_kbps < DUPLICATE_RATE_KBPS)
    {
        return Err(Error::DuplicatePoint { rate_kbps: w[0].rate_kbps });
    }
    RateQualityCurve::new(label, points)
}

#[derive(Debug, Serialize, Deserialize)]
struct CurveRow {
    bitrate_kbps: f64,
    quality: f64,
}

pub fn curve_csv_bytes(curve: &RateQualityCurve) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for p in curve.points() {
        w.serialize(CurveRow {
            bitrate_kbps: p.rate_kbps,
            quality: p.quality,
        })?;
    }
    w.into_inner().map_err(|e| Error::Stream(e.into_error()))
}

pub fn write_curve_csv(path: &Path, curve: &RateQualityCurve) -> Result<()> {
    write_atomic(path, &curve_csv_bytes(curve)?)
}

/// Reads a `bitrate_kbps,quality` CSV; the label is the file stem.
pub fn read_curve_csv(path: &Path) -> Result<RateQualityCurve> {
    let mut r = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::InvalidInput(format!("{}: {other:?}", path.display())),
    })?;
    let points = r
        .deserialize::<CurveRow>()
        .map(|row| row.map(|c| RdPoint::new(c.bitrate_kbps, c.quality)))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    RateQualityCurve::new(label, points)
}

/// An external metric tool invoked through a command template.
#[derive(Debug, Clone)]
pub struct MetricTool {
    template: CommandTemplate,
}

impl MetricTool {
    pub fn new(template: CommandTemplate) -> Self {
        MetricTool { template }
    }

    /// Runs the tool on one encoded output and parses the report it writes.
    pub fn run(&self, seq: &VideoSequence, distorted: &Path, report_out: &Path) -> Result<QualityReport> {
        let values: BTreeMap<&str, String> = [
            ("reference", seq.path.display().to_string()),
            ("distorted", distorted.display().to_string()),
            ("width", seq.width.to_string()),
            ("height", seq.height.to_string()),
            ("fps", seq.frame_rate().to_string()),
            ("report_out", report_out.display().to_string()),
        ]
        .into_iter()
        .collect();
        let argv = self.template.render(&values)?;
        let mut child = Command::new(&argv[0])
            .args(&argv[1..])
            .stdin(Stdio::null())
            .stdout(Stdio::null())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|source| Error::Spawn {
                program: argv[0].clone(),
                source,
            })?;
        let mut stderr = String::new();
        if let Some(mut e) = child.stderr.take() {
            let _ = e.read_to_string(&mut stderr);
        }
        let status = child.wait()?;
        if !status.success() {
            return Err(Error::ChildFailed {
                program: argv[0].clone(),
                status: status.code(),
                stderr,
            });
        }
        parse_metric_report(report_out)
    }
}
