//! Comparison matrices of BD values with per-frame-rate group averages,
//! encoder rankings, and the CSV exports behind the plots.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bd_metrics::{bd_quality, bd_rate, BdKind, BdMethod, RateDomain, RateQualityCurve};
use crate::dataset::{FrameRate, VideoSequence};
use crate::error::{Error, Result};
use crate::harness::{mean_std, RunMode, RunRecord};
use crate::quality::{collect_curve, parse_metric_report, QualityReport};

pub fn group_average(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyGroup);
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Which BD quantity fills the matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BdSpec {
    Rate(BdMethod),
    Quality(RateDomain),
}

impl BdSpec {
    pub fn kind(self) -> BdKind {
        match self {
            BdSpec::Rate(_) => BdKind::BdRatePercent,
            BdSpec::Quality(_) => BdKind::BdQualityPoints,
        }
    }

    fn compute(self, test: &RateQualityCurve, reference: &RateQualityCurve) -> Result<f64> {
        Ok(match self {
            BdSpec::Rate(m) => bd_rate(test, reference, m)?.value,
            BdSpec::Quality(d) => bd_quality(test, reference, d)?.value,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixRow {
    pub sequence: String,
    pub cells: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixGroup {
    /// Frame rate of the group, e.g. `25`.
    pub label: String,
    pub rows: Vec<MatrixRow>,
    /// One per competitor; `None` unless every cell in the column is defined.
    pub averages: Vec<Option<f64>>,
}

/// BD values of an anchor encoder (as test) against each competitor (as
/// reference), one row per sequence, grouped by frame rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonMatrix {
    pub anchor: String,
    pub kind: BdKind,
    pub competitors: Vec<String>,
    pub groups: Vec<MatrixGroup>,
}

impl ComparisonMatrix {
    /// Assembles a matrix from cell values and fills in the group averages.
    pub fn from_cells(
        anchor: impl Into<String>,
        kind: BdKind,
        competitors: Vec<String>,
        groups: Vec<(String, Vec<MatrixRow>)>,
    ) -> Result<Self> {
        let width = competitors.len();
        let mut out = Vec::with_capacity(groups.len());
        for (label, rows) in groups {
            if let Some(r) = rows.iter().find(|r| r.cells.len() != width) {
                return Err(Error::InvalidInput(format!(
                    "row {} has {} cells, expected {width}",
                    r.sequence,
                    r.cells.len()
                )));
            }
            let averages = (0..width)
                .map(|c| {
                    let col: Option<Vec<f64>> = rows.iter().map(|r| r.cells[c]).collect();
                    col.and_then(|v| group_average(&v).ok())
                })
                .collect();
            out.push(MatrixGroup { label, rows, averages });
        }
        Ok(ComparisonMatrix {
            anchor: anchor.into(),
            kind,
            competitors,
            groups: out,
        })
    }

    /// Averages of one group, paired with competitor names.
    pub fn group_averages(&self, label: &str) -> Option<Vec<(String, Option<f64>)>> {
        let g = self.groups.iter().find(|g| g.label == label)?;
        Some(self.competitors.iter().cloned().zip(g.averages.iter().copied()).collect())
    }

    /// Flat table form: per-sequence rows with an `Avg <label>` row after each group.
    pub fn to_table(&self) -> MatrixTable {
        let mut rows = Vec::new();
        for g in &self.groups {
            for r in &g.rows {
                rows.push((r.sequence.clone(), r.cells.clone()));
            }
            rows.push((format!("Avg {}", g.label), g.averages.clone()));
        }
        MatrixTable {
            columns: self.competitors.clone(),
            rows,
        }
    }
}

pub fn fps_group_label(rate: FrameRate) -> String {
    let r = rate.reduced();
    if r.den() == 1 {
        r.num().to_string()
    } else {
        format!("{:.2}", r.as_f64())
    }
}

/// Curves keyed by (profile, sequence short name).
pub type CurveSet = BTreeMap<(String, String), RateQualityCurve>;

/// Computes every (sequence, competitor) cell as BD(anchor vs competitor).
/// Cells whose curves are missing, degenerate, or disjoint are undefined.
pub fn build_matrix(
    curves: &CurveSet,
    sequences: &[VideoSequence],
    profiles: &[String],
    anchor: &str,
    spec: BdSpec,
) -> Result<ComparisonMatrix> {
    if !profiles.iter().any(|p| p == anchor) {
        return Err(Error::Config(format!("anchor profile {anchor} not among profiles")));
    }
    let competitors: Vec<String> = profiles.iter().filter(|p| *p != anchor).cloned().collect();

    let mut by_rate: BTreeMap<FrameRate, (String, Vec<MatrixRow>)> = BTreeMap::new();
    for seq in sequences {
        let anchor_curve = curves.get(&(anchor.to_string(), seq.short_name.clone()));
        let cells = competitors
            .iter()
            .map(|c| {
                let competitor = curves.get(&(c.clone(), seq.short_name.clone()))?;
                match spec.compute(anchor_curve?, competitor) {
                    Ok(v) => Some(v),
                    Err(e) => {
                        log::warn!("{}: {anchor} vs {c}: {e}; cell left undefined", seq.short_name);
                        None
                    }
                }
            })
            .collect();
        let rate = seq.frame_rate().reduced();
        by_rate
            .entry(rate)
            .or_insert_with(|| (fps_group_label(rate), Vec::new()))
            .1
            .push(MatrixRow {
                sequence: seq.short_name.clone(),
                cells,
            });
    }
    let mut groups: Vec<(FrameRate, (String, Vec<MatrixRow>))> = by_rate.into_iter().collect();
    groups.sort_by(|a, b| a.0.as_f64().total_cmp(&b.0.as_f64()));
    ComparisonMatrix::from_cells(anchor, spec.kind(), competitors, groups.into_iter().map(|(_, g)| g).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    /// Descending by value.
    pub order: Vec<(String, f64)>,
    /// Adjacent pairs whose values tied and were ordered by name.
    pub ties: Vec<(String, String)>,
}

impl Ranking {
    pub fn names(&self) -> Vec<&str> {
        self.order.iter().map(|(n, _)| n.as_str()).collect()
    }
}

/// Sorts entries by value, descending; ties break by name.
pub fn rank_by_value(entries: Vec<(String, f64)>) -> Ranking {
    let mut order = entries;
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let ties: Vec<(String, String)> = order
        .windows(2)
        .filter(|w| w[0].1 == w[1].1)
        .map(|w| (w[0].0.clone(), w[1].0.clone()))
        .collect();
    for (a, b) in &ties {
        log::warn!("ranking tie between {a} and {b}; ordered by name");
    }
    Ranking { order, ties }
}

/// Ranks competitors by their group average, with the anchor placed at 0.
///
/// Cells are anchor-minus-competitor, so for BD-quality the reverse of this
/// order ranks encoders by quality at equal bitrate, best first.
pub fn rank_profiles(anchor: &str, averages: &[(String, Option<f64>)]) -> Result<Ranking> {
    let mut entries = vec![(anchor.to_string(), 0.0)];
    for (name, avg) in averages {
        let v = avg.ok_or_else(|| Error::RankingUnavailable { profile: name.clone() })?;
        entries.push((name.clone(), v));
    }
    Ok(rank_by_value(entries))
}

fn md_cell(v: Option<f64>) -> String {
    match v {
        None => "—".to_string(),
        Some(x) => {
            let s = format!("{x:.2}");
            if s == "-0.00" {
                "0.00".to_string()
            } else {
                s
            }
        }
    }
}

fn kind_title(kind: BdKind) -> &'static str {
    match kind {
        BdKind::BdRatePercent => "BD-rate (%)",
        BdKind::BdQualityPoints => "BD-quality (points)",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Markdown,
    Csv,
}

pub fn render(matrix: &ComparisonMatrix, format: Format) -> Result<String> {
    match format {
        Format::Markdown => Ok(render_markdown(matrix)),
        Format::Csv => render_csv(matrix),
    }
}

/// Two-decimal Markdown table; undefined cells show as an em dash.
pub fn render_markdown(matrix: &ComparisonMatrix) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} for {}\n", kind_title(matrix.kind), matrix.anchor);
    let _ = write!(s, "| Video |");
    for c in &matrix.competitors {
        let _ = write!(s, " {c} |");
    }
    s.push_str("\n|---|");
    for _ in &matrix.competitors {
        s.push_str("---:|");
    }
    s.push('\n');
    for (label, cells) in matrix.to_table().rows {
        let _ = write!(s, "| {label} |");
        for v in cells {
            let _ = write!(s, " {} |", md_cell(v));
        }
        s.push('\n');
    }
    s
}

/// Full-precision CSV; undefined cells are empty.
pub fn render_csv(matrix: &ComparisonMatrix) -> Result<String> {
    let table = matrix.to_table();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["video".to_string()];
    header.extend(table.columns.iter().cloned());
    w.write_record(&header)?;
    for (label, cells) in &table.rows {
        let mut rec = vec![label.clone()];
        rec.extend(cells.iter().map(|c| c.map(|v| v.to_string()).unwrap_or_default()));
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Stream(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// The matrix as rendered rows, for reading CSV output back.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixTable {
    pub columns: Vec<String>,
    pub rows: Vec<(String, Vec<Option<f64>>)>,
}

pub fn parse_csv(text: &str) -> Result<MatrixTable> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let columns: Vec<String> = r.headers()?.iter().skip(1).map(str::to_owned).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let label = rec.get(0).unwrap_or_default().to_string();
        let cells = rec
            .iter()
            .skip(1)
            .map(|c| {
                if c.is_empty() {
                    Ok(None)
                } else {
                    c.parse::<f64>()
                        .map(Some)
                        .map_err(|_| Error::InvalidInput(format!("cell {c:?} in row {label}")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push((label, cells));
    }
    Ok(MatrixTable { columns, rows })
}

/// Quality samples pulled from a run directory, ready for curve assembly.
#[derive(Debug, Default)]
pub struct RunSet {
    pub records: Vec<RunRecord>,
    /// Indexed like `records`.
    pub reports: Vec<Option<QualityReport>>,
}

impl RunSet {
    /// Pairs each record with its metric report: the one the record names,
    /// else `<run_id>.metric.json` if present.
    pub fn load(dir: &Path) -> Result<Self> {
        let records = crate::harness::load_records(dir)?;
        let mut reports = Vec::with_capacity(records.len());
        for r in &records {
            let name = r
                .quality_report
                .clone()
                .unwrap_or_else(|| format!("{}.metric.json", r.run_id));
            let path = dir.join(name);
            reports.push(if path.exists() {
                Some(parse_metric_report(&path)?)
            } else {
                None
            });
        }
        Ok(RunSet { records, reports })
    }

    /// One curve per (profile, sequence). Each target bitrate contributes a
    /// single point, taken from the first repetition that has a report,
    /// unpaced runs preferred over paced ones.
    pub fn curves(&self) -> CurveSet {
        let mut chosen: BTreeMap<(String, String, u32), (RunMode, u32, usize)> = BTreeMap::new();
        for (i, (r, q)) in self.records.iter().zip(&self.reports).enumerate() {
            if q.is_none() {
                continue;
            }
            let key = (r.profile.clone(), r.sequence.clone(), r.target_bitrate_kbps);
            let rank = (r.mode, r.repetition, i);
            chosen
                .entry(key)
                .and_modify(|cur| {
                    if rank < *cur {
                        *cur = rank;
                    }
                })
                .or_insert(rank);
        }
        let mut grouped: BTreeMap<(String, String), Vec<usize>> = BTreeMap::new();
        for ((p, s, _), (_, _, i)) in chosen {
            grouped.entry((p, s)).or_default().push(i);
        }
        let mut out = CurveSet::new();
        for ((p, s), idx) in grouped {
            let label = format!("{p}__{s}");
            let pairs = idx
                .iter()
                .map(|&i| (&self.records[i], self.reports[i].as_ref().expect("filtered above")));
            match collect_curve(&label, pairs) {
                Ok(c) => {
                    out.insert((p, s), c);
                }
                Err(e) => log::warn!("curve {label}: {e}"),
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThroughputRow {
    pub group: String,
    pub profile: String,
    pub mode: RunMode,
    pub bitrate_kbps: u32,
    pub mean_fps: f64,
    pub std_fps: f64,
    pub samples: usize,
}

/// Mean and sample std of throughput per (frame-rate group, profile, mode, bitrate).
pub fn throughput_rows(records: &[RunRecord], sequences: &[VideoSequence]) -> Vec<ThroughputRow> {
    let mut buckets: BTreeMap<(FrameRate, String, RunMode, u32), Vec<f64>> = BTreeMap::new();
    for r in records {
        let Some(seq) = sequences.iter().find(|s| s.short_name == r.sequence) else {
            log::warn!("run {} names unknown sequence {}", r.run_id, r.sequence);
            continue;
        };
        buckets
            .entry((seq.frame_rate().reduced(), r.profile.clone(), r.mode, r.target_bitrate_kbps))
            .or_default()
            .push(r.throughput_fps);
    }
    let mut rows: Vec<(f64, ThroughputRow)> = buckets
        .into_iter()
        .filter_map(|((rate, profile, mode, bitrate_kbps), v)| {
            let (mean_fps, std_fps) = mean_std(&v).ok()?;
            Some((
                rate.as_f64(),
                ThroughputRow {
                    group: fps_group_label(rate),
                    profile,
                    mode,
                    bitrate_kbps,
                    mean_fps,
                    std_fps,
                    samples: v.len(),
                },
            ))
        })
        .collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    rows.into_iter().map(|(_, r)| r).collect()
}

pub fn throughput_csv(rows: &[ThroughputRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| Error::Stream(e.into_error()))
}
