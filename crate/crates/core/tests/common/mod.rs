//! Fixtures shared by the integration and acceptance tests.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use pacebench::bd_metrics::RateQualityCurve;
use pacebench::dataset::{write_synthetic_clip, FrameRate, VideoSequence};
use pacebench::harness::{EncoderProfile, InputMode, OutputMode};
use pacebench::template::CommandTemplate;

pub const MOCK: &str = env!("CARGO_BIN_EXE_mock-encoder");
pub const PACEBENCH: &str = env!("CARGO_BIN_EXE_pacebench");

pub const COMPETITORS: [&str; 6] = ["openh264", "x264", "VP8", "VP9", "x265", "SVT"];
pub const SEQS_25: [&str; 7] = ["BS25", "PA25", "RB25", "RH25", "ST25", "SF25", "TR25"];
pub const SEQS_50: [&str; 5] = ["CR50", "DT50", "IT50", "OT50", "PJ50"];

/// Reference BD-rate (%) cells for the aomenc-rt8 anchor, rows in table order, columns as `COMPETITORS`.
pub const BD_RATE_ROWS: [[f64; 6]; 12] = [
    [-61.43, -12.70, -39.29, -9.49, 7.63, 3.61],
    [-56.12, -22.39, -40.35, -10.91, 16.10, 28.94],
    [-52.39, -42.83, -32.72, -4.03, -0.97, 17.38],
    [-50.78, -26.08, -31.52, -6.93, 16.22, 18.74],
    [-47.44, -6.58, -33.41, -16.50, 40.99, 33.33],
    [-65.01, -2.26, -26.04, -15.69, 34.49, 34.65],
    [-68.18, -15.59, -25.96, -1.16, 20.84, 31.39],
    [-61.73, -24.24, -41.74, -13.63, -1.65, 8.90],
    [-66.20, -21.68, -34.05, -15.33, 22.54, 39.03],
    [-68.62, -20.14, -40.96, -8.31, 7.52, 19.98],
    [-62.80, -18.55, -56.18, -14.95, 12.56, 22.24],
    [-62.98, -6.03, -34.54, -13.78, 14.10, 39.18],
];
pub const BD_RATE_AVG25: [f64; 6] = [-57.34, -18.35, -32.76, -9.24, 19.33, 24.01];
pub const BD_RATE_AVG50: [f64; 6] = [-64.47, -18.13, -41.49, -13.20, 11.01, 25.87];

/// Reference BD-quality (VMAF points) cells, same layout.
pub const BD_VMAF_ROWS: [[f64; 6]; 12] = [
    [12.61, 1.36, 3.90, 0.96, -0.55, -0.31],
    [14.70, 4.41, 6.62, 1.76, -2.09, -3.39],
    [24.88, 14.91, 13.17, 1.21, 0.35, -4.36],
    [10.59, 4.51, 4.30, 0.82, -1.64, -1.84],
    [8.63, 0.61, 3.98, 1.14, -1.79, -1.76],
    [12.11, 0.34, 2.88, 1.10, -1.54, -1.52],
    [23.35, 3.75, 4.14, 0.14, -3.20, -4.62],
    [24.60, 8.06, 12.78, 3.94, 0.44, -2.06],
    [25.06, 5.81, 9.99, 3.72, -4.27, -6.82],
    [21.77, 5.02, 4.85, 1.44, -1.21, -2.90],
    [14.64, 3.03, 7.11, 1.47, -1.03, -1.67],
    [21.70, 1.75, 8.33, 3.51, -2.81, -7.17],
];
pub const BD_VMAF_AVG25: [f64; 6] = [15.27, 4.27, 5.57, 1.02, -1.49, -2.54];
pub const BD_VMAF_AVG50: [f64; 6] = [21.55, 4.73, 8.61, 2.82, -1.78, -4.12];

/// The twelve-sequence dataset as a manifest; `path` is filled per test.
pub fn dataset_manifest_json(dir: &Path) -> String {
    let rows: [(&str, &str, u32, f64, u64); 12] = [
        ("Blue sky", "BS25", 25, 8.68, 217),
        ("Pedestrian area", "PA25", 25, 15.0, 375),
        ("Riverbed", "RB25", 25, 10.0, 250),
        ("Rush hour", "RH25", 25, 20.0, 500),
        ("Station2", "ST25", 25, 12.52, 313),
        ("Sunflower", "SF25", 25, 20.0, 500),
        ("Tractor", "TR25", 25, 27.6, 690),
        ("Crowd run", "CR50", 50, 10.0, 500),
        ("Ducks take off", "DT50", 50, 10.0, 500),
        ("In to tree", "IT50", 50, 10.0, 500),
        ("Old town cross", "OT50", 50, 10.0, 500),
        ("Park joy", "PJ50", 50, 10.0, 500),
    ];
    let entries: Vec<serde_json::Value> = rows
        .iter()
        .map(|(name, short, fps, dur, frames)| {
            serde_json::json!({
                "name": name,
                "short_name": short,
                "path": dir.join(format!("{short}.yuv")),
                "fps_num": fps,
                "fps_den": 1,
                "width": 1920,
                "height": 1080,
                "pixel_format": "I420_8bit",
                "frame_count": frames,
                "duration_s": dur,
            })
        })
        .collect();
    serde_json::to_string_pretty(&entries).unwrap()
}

/// Writes a small synthetic clip and returns its validated description.
pub fn synthetic_seq(dir: &Path, short: &str, (w, h): (u32, u32), fps: u32, frames: u64, y4m: bool) -> VideoSequence {
    let ext = if y4m { "y4m" } else { "yuv" };
    let seq = VideoSequence::new(
        short,
        short,
        dir.join(format!("{short}.{ext}")),
        FrameRate::new(fps, 1).unwrap(),
        (w, h),
        frames,
        None,
    )
    .unwrap();
    write_synthetic_clip(&seq).unwrap();
    seq
}

fn mock_tokens(mode: &[&str], extra: &[&str]) -> Vec<String> {
    let mut t: Vec<String> = vec![MOCK.to_string()];
    t.extend(mode.iter().map(|s| s.to_string()));
    t.extend(
        [
            "--width", "{width}", "--height", "{height}", "--bitrate", "{bitrate_kbps}", "--fps", "{fps}",
        ]
        .iter()
        .map(|s| s.to_string()),
    );
    t.extend(extra.iter().map(|s| s.to_string()));
    t
}

/// Mock profile reading raw frames on stdin and writing `{output}`.
pub fn mock_profile(name: &str, mode: &[&str], extra: &[&str]) -> EncoderProfile {
    let mut tokens = mock_tokens(mode, extra);
    tokens.extend(["--output".to_string(), "{output}".to_string()]);
    EncoderProfile {
        name: name.into(),
        command_template: CommandTemplate::new(tokens),
        input_mode: InputMode::StdinRaw,
        output_mode: OutputMode::File,
        output_extension: "bin".into(),
    }
}

pub fn fast_profile(name: &str) -> EncoderProfile {
    mock_profile(name, &["fast"], &[])
}

pub fn sleep_profile(name: &str, delay_ms: u64) -> EncoderProfile {
    let d = delay_ms.to_string();
    mock_profile(name, &["sleep", "--delay-ms", &d], &[])
}

pub fn metric_template() -> serde_json::Value {
    serde_json::json!([
        MOCK, "metric", "--reference", "{reference}", "--distorted", "{distorted}",
        "--width", "{width}", "--height", "{height}", "--fps", "{fps}", "--report-out", "{report_out}"
    ])
}

/// Deterministic linear congruential generator so properties are reproducible.
pub struct Lcg(u64);

impl Lcg {
    pub fn new(seed: u64) -> Self {
        Lcg(seed)
    }

    pub fn next_f64(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}

/// A random strictly increasing rate-quality curve with `n` points.
pub fn random_curve(rng: &mut Lcg, label: &str, n: usize) -> RateQualityCurve {
    let mut rate = rng.range(200.0, 1000.0);
    let mut q = rng.range(10.0, 40.0);
    let mut pts = Vec::with_capacity(n);
    for _ in 0..n {
        pts.push((rate, q));
        rate *= rng.range(1.15, 2.0);
        q += rng.range(1.0, 10.0);
    }
    RateQualityCurve::from_pairs(label, &pts).unwrap()
}

/// Composite trapezoid rule over `panels` equal panels.
pub fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut s = 0.5 * (f(a) + f(b));
    for i in 1..panels {
        s += f(a + i as f64 * h);
    }
    s * h
}

pub fn out_dir(tmp: &Path, name: &str) -> PathBuf {
    let d = tmp.join(name);
    std::fs::create_dir_all(&d).unwrap();
    d
}
