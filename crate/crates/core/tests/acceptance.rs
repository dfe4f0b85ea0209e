//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

mod common;

use std::io;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::thread;
use std::time::{Duration, Instant};

use common::*;
use pacebench::bd_metrics::{
    bd_quality, bd_quality_with, bd_rate, bd_rate_with, common_range, prune_monotone, span_overlap, Axis,
    BdMethod, CurveInterpolant, Quadrature, RateDomain, RateQualityCurve,
};
use pacebench::dataset::{parse_manifest, FrameBuffer, FrameRate};
use pacebench::harness::{load_records, read_runs_csv, run_paced, run_unpaced, RunsCsvRow, RUNS_CSV};
use pacebench::pacer::{buffer_latency, run_paced as pace, Framing, PacingReport};
use pacebench::quality::{vmaf_to_mos, MosLabel};
use pacebench::report::{group_average, parse_csv, ComparisonMatrix, MatrixRow};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("avg-row reproduction", avg_rows),
        ("common-range worked example", common_ranges),
        ("BD analytic oracles", analytic_oracles),
        ("BD property suite", property_suite),
        ("pacer timing", pacer_timing),
        ("harness with shipped mocks", harness_mocks),
        ("buffer-latency anchor", buffer_latency_anchor),
        ("MOS anchors", mos_anchors),
        ("end-to-end bench to report", end_to_end),
        ("dataset validation", dataset_validation),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = t.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {:>2} {name} ({secs:.2}s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.2}s): {why}", i + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn avg_rows() -> Outcome {
    let tables = [
        ("BD-rate", &BD_RATE_ROWS, &BD_RATE_AVG25, &BD_RATE_AVG50),
        ("BD-VMAF", &BD_VMAF_ROWS, &BD_VMAF_AVG25, &BD_VMAF_AVG50),
    ];
    let mut checked = 0;
    for (name, rows, avg25, avg50) in tables {
        for c in 0..COMPETITORS.len() {
            let col25: Vec<f64> = rows[..7].iter().map(|r| r[c]).collect();
            let col50: Vec<f64> = rows[7..].iter().map(|r| r[c]).collect();
            for (label, col, want) in [("Avg 25", col25, avg25[c]), ("Avg 50", col50, avg50[c])] {
                let got = group_average(&col).map_err(|e| e.to_string())?;
                ensure!(
                    (got - want).abs() <= 0.005,
                    "{name} {} {label}: {got:.4} vs {want}",
                    COMPETITORS[c]
                );
                checked += 1;
            }
        }

        // Same cells through the matrix type, checking layout.
        let to_rows = |names: &[&str], cells: &[[f64; 6]]| -> Vec<MatrixRow> {
            names
                .iter()
                .zip(cells)
                .map(|(n, r)| MatrixRow {
                    sequence: n.to_string(),
                    cells: r.iter().map(|&v| Some(v)).collect(),
                })
                .collect()
        };
        let m = ComparisonMatrix::from_cells(
            "aomenc-rt8",
            pacebench::bd_metrics::BdKind::BdRatePercent,
            COMPETITORS.iter().map(|s| s.to_string()).collect(),
            vec![
                ("25".into(), to_rows(&SEQS_25, &rows[..7])),
                ("50".into(), to_rows(&SEQS_50, &rows[7..])),
            ],
        )
        .map_err(|e| e.to_string())?;
        let order: Vec<String> = m.to_table().rows.into_iter().map(|r| r.0).collect();
        let mut want: Vec<String> = SEQS_25.iter().map(|s| s.to_string()).collect();
        want.push("Avg 25".into());
        want.extend(SEQS_50.iter().map(|s| s.to_string()));
        want.push("Avg 50".into());
        ensure!(order == want, "{name} row order {order:?}");
        for (g, avg) in [(0, avg25), (1, avg50)] {
            for (c, v) in m.groups[g].averages.iter().enumerate() {
                ensure!(v.is_some_and(|v| (v - avg[c]).abs() <= 0.005), "{name} matrix avg {g}/{c}");
            }
        }
    }
    Ok(format!("{checked} reference averages within 0.005"))
}

fn common_ranges() -> Outcome {
    let q = span_overlap((27.0, 61.0), (6.0, 55.0), Axis::Quality).map_err(|e| e.to_string())?;
    ensure!((q.lo, q.hi) == (27.0, 55.0), "quality range [{}, {}]", q.lo, q.hi);
    let r = span_overlap((2160.0, 9925.0), (810.0, 10000.0), Axis::Rate).map_err(|e| e.to_string())?;
    ensure!((r.lo, r.hi) == (2160.0, 9925.0), "rate range [{}, {}]", r.lo, r.hi);

    // The same spans carried by actual curves.
    let a = RateQualityCurve::from_pairs("a", &[(2160.0, 27.0), (5000.0, 45.0), (9925.0, 61.0)]).unwrap();
    let b = RateQualityCurve::from_pairs("b", &[(810.0, 6.0), (3000.0, 30.0), (10000.0, 55.0)]).unwrap();
    let cq = common_range(&a, &b, Axis::Quality).map_err(|e| e.to_string())?;
    let cr = common_range(&a, &b, Axis::Rate).map_err(|e| e.to_string())?;
    ensure!((cq.lo, cq.hi) == (27.0, 55.0), "curve quality range [{}, {}]", cq.lo, cq.hi);
    ensure!((cr.lo, cr.hi) == (2160.0, 9925.0), "curve rate range [{}, {}]", cr.lo, cr.hi);
    Ok("quality [27, 55], rate [2160, 9925]".into())
}

const LADDER: [f64; 8] = [800.0, 900.0, 1000.0, 1250.0, 1500.0, 1750.0, 2000.0, 2500.0];

fn ladder_curve(label: &str, f: impl Fn(f64) -> f64) -> RateQualityCurve {
    let pts: Vec<(f64, f64)> = LADDER.iter().map(|&r| (r, f(r))).collect();
    RateQualityCurve::from_pairs(label, &pts).unwrap()
}

/// Independent dense-trapezoid evaluation of all four BD variants.
fn trapezoid_oracle(test: &RateQualityCurve, reference: &RateQualityCurve) -> [f64; 4] {
    const N: usize = 1_000_000;
    let test = prune_monotone(test).unwrap().curve;
    let reference = prune_monotone(reference).unwrap().curve;
    let (tq, rq) = (
        CurveInterpolant::quality_to_rate(&test).unwrap(),
        CurveInterpolant::quality_to_rate(&reference).unwrap(),
    );
    let q = common_range(&test, &reference, Axis::Quality).unwrap();
    let at = trapezoid(|x| tq.eval(x).unwrap(), q.lo, q.hi, N);
    let ar = trapezoid(|x| rq.eval(x).unwrap(), q.lo, q.hi, N);
    let area = 100.0 * (at - ar) / ar;
    let dlog = trapezoid(
        |x| tq.eval(x).unwrap().log10() - rq.eval(x).unwrap().log10(),
        q.lo,
        q.hi,
        N,
    ) / (q.hi - q.lo);
    let logdom = 100.0 * (10f64.powf(dlog) - 1.0);

    let r = common_range(&test, &reference, Axis::Rate).unwrap();
    let (tl, rl) = (
        CurveInterpolant::rate_to_quality(&test, RateDomain::Linear).unwrap(),
        CurveInterpolant::rate_to_quality(&reference, RateDomain::Linear).unwrap(),
    );
    let lin = trapezoid(|x| tl.eval(x).unwrap() - rl.eval(x).unwrap(), r.lo, r.hi, N) / (r.hi - r.lo);
    let (tg, rg) = (
        CurveInterpolant::rate_to_quality(&test, RateDomain::Log).unwrap(),
        CurveInterpolant::rate_to_quality(&reference, RateDomain::Log).unwrap(),
    );
    let (ulo, uhi) = (r.lo.log10(), r.hi.log10());
    let clamp = |u: f64| 10f64.powf(u).clamp(r.lo, r.hi);
    let log = trapezoid(
        |u| tg.eval(clamp(u)).unwrap() - rg.eval(clamp(u)).unwrap(),
        ulo,
        uhi,
        N,
    ) / (uhi - ulo);
    [area, logdom, lin, log]
}

fn all_four(test: &RateQualityCurve, reference: &RateQualityCurve) -> Result<[f64; 4], String> {
    let e = |e: pacebench::Error| e.to_string();
    Ok([
        bd_rate(test, reference, BdMethod::PaperArea).map_err(e)?.value,
        bd_rate(test, reference, BdMethod::LogDomain).map_err(e)?.value,
        bd_quality(test, reference, RateDomain::Linear).map_err(e)?.value,
        bd_quality(test, reference, RateDomain::Log).map_err(e)?.value,
    ])
}

fn analytic_oracles() -> Outcome {
    let base = ladder_curve("base", |r| 20.0 + 15.0 * (r / 700.0).ln());
    let other = ladder_curve("other", |r| 18.0 + 17.0 * (r / 650.0).ln() + 0.002 * (r - 800.0).min(600.0));

    let v = all_four(&base, &base)?;
    ensure!(v.iter().all(|x| x.abs() < 1e-9), "self delta {v:?}");

    let cheaper = base.scale_rates(0.8).map_err(|e| e.to_string())?;
    let v = all_four(&cheaper, &base)?;
    ensure!((v[0] + 20.0).abs() < 1e-6, "paper_area ratio {}", v[0]);
    ensure!((v[1] + 20.0).abs() < 1e-6, "log_domain ratio {}", v[1]);

    let pts: Vec<(f64, f64)> = base.points().iter().map(|p| (p.rate_kbps, p.quality + 5.0)).collect();
    let shifted = RateQualityCurve::from_pairs("shifted", &pts).unwrap();
    let v = all_four(&shifted, &base)?;
    ensure!((v[2] - 5.0).abs() < 1e-6, "linear offset {}", v[2]);
    ensure!((v[3] - 5.0).abs() < 1e-6, "log offset {}", v[3]);

    let mut worst = 0f64;
    for (t, r) in [(&cheaper, &base), (&shifted, &base), (&other, &base), (&base, &other)] {
        let ours = all_four(t, r)?;
        let oracle = trapezoid_oracle(t, r);
        for k in 0..4 {
            let d = (ours[k] - oracle[k]).abs();
            worst = worst.max(d);
            ensure!(d < 1e-6, "{} vs {}: variant {k} {} vs oracle {}", t.label(), r.label(), ours[k], oracle[k]);
        }
    }
    Ok(format!("self 0, ratio -20, offset 5; max oracle gap {worst:.1e}"))
}

fn dominated(rng: &mut Lcg, base: &RateQualityCurve) -> RateQualityCurve {
    let ratio = rng.range(0.6, 0.95);
    let dq = rng.range(0.2, 3.0);
    let pts: Vec<(f64, f64)> = base
        .points()
        .iter()
        .map(|p| (p.rate_kbps * ratio, p.quality + dq))
        .collect();
    RateQualityCurve::from_pairs("better", &pts).unwrap()
}

fn property_suite() -> Outcome {
    let mut rng = Lcg::new(0x5eed);
    let (mut pairs, mut compared) = (0, 0);
    let fixed = |q| match q {
        0 => Quadrature::Fixed(2048),
        _ => Quadrature::Fixed(4096),
    };
    while pairs < 200 {
        let n = 4 + (rng.next_f64() * 6.0) as usize;
        let a = random_curve(&mut rng, "a", n);
        let b = random_curve(&mut rng, "b", n);
        pairs += 1;

        // Rate-unit invariance: kbps against bps.
        let (a2, b2) = (a.scale_rates(1000.0).unwrap(), b.scale_rates(1000.0).unwrap());
        if let (Ok(x), Ok(y)) = (all_four(&a, &b), all_four(&a2, &b2)) {
            compared += 1;
            for k in 0..4 {
                ensure!((x[k] - y[k]).abs() <= 1e-9, "pair {pairs}: unit variant {k} {} vs {}", x[k], y[k]);
            }
        }

        // Quadrature halving-step stability.
        for m in [BdMethod::PaperArea, BdMethod::LogDomain] {
            if let (Ok(x), Ok(y)) = (bd_rate_with(&a, &b, m, fixed(0)), bd_rate_with(&a, &b, m, fixed(1))) {
                ensure!((x.value - y.value).abs() < 1e-7, "pair {pairs}: {m:?} step {}", x.value - y.value);
            }
        }
        for d in [RateDomain::Linear, RateDomain::Log] {
            if let (Ok(x), Ok(y)) = (bd_quality_with(&a, &b, d, fixed(0)), bd_quality_with(&a, &b, d, fixed(1))) {
                ensure!((x.value - y.value).abs() < 1e-7, "pair {pairs}: {d:?} step {}", x.value - y.value);
            }
        }

        // Sign antisymmetry when one curve strictly dominates.
        let better = dominated(&mut rng, &a);
        let fwd = all_four(&better, &a)?;
        let back = all_four(&a, &better)?;
        ensure!(
            fwd[0] < 0.0 && fwd[1] < 0.0 && back[0] > 0.0 && back[1] > 0.0,
            "pair {pairs}: rate signs {fwd:?} / {back:?}"
        );
        ensure!(
            fwd[2] > 0.0 && fwd[3] > 0.0 && back[2] < 0.0 && back[3] < 0.0,
            "pair {pairs}: quality signs {fwd:?} / {back:?}"
        );

        // Pruning idempotence on unordered noisy points.
        let noisy: Vec<(f64, f64)> = (0..n + 3)
            .map(|i| (200.0 * (i + 1) as f64 + rng.range(0.0, 150.0), rng.range(0.0, 100.0)))
            .collect();
        let c = RateQualityCurve::from_pairs("noisy", &noisy).unwrap();
        if let Ok(once) = prune_monotone(&c) {
            let twice = prune_monotone(&once.curve).map_err(|e| e.to_string())?;
            ensure!(once.curve.is_monotone(), "pair {pairs}: pruned curve not monotone");
            ensure!(twice.dropped.is_empty() && twice.curve.points() == once.curve.points(), "pair {pairs}: prune not idempotent");
        }
    }
    Ok(format!("{pairs} pairs ({compared} with overlap on all axes)"))
}

/// Sink that takes a fixed time per write, standing in for a slow consumer.
struct SlowSink(Duration);

impl io::Write for SlowSink {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        thread::sleep(self.0);
        Ok(buf.len())
    }
    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}

/// CPU time taken by the hypervisor from this VM, when the kernel reports it.
fn steal_ms() -> Option<u64> {
    let stat = std::fs::read_to_string("/proc/stat").ok()?;
    let ticks: u64 = stat.lines().next()?.split_whitespace().nth(8)?.parse().ok()?;
    // USER_HZ is 100 on every mainstream Linux build.
    Some(ticks * 10)
}

fn tiny_frames(n: usize) -> std::vec::IntoIter<FrameBuffer> {
    (0..n)
        .map(|i| FrameBuffer::new(vec![i as u8; 6], 2, 2).unwrap())
        .collect::<Vec<_>>()
        .into_iter()
}

fn pacer_timing() -> Outcome {
    let rate = |n| FrameRate::new(n, 1).unwrap();
    let check_rate = |rep: &PacingReport, fps: f64, what: &str| -> Result<(), String> {
        let d = rep.delivery_rate().ok_or("no delivery rate")?;
        ensure!(d <= 1.02 * fps, "{what}: delivery {d:.3} fps exceeds 1.02 x {fps}");
        Ok(())
    };

    let t = Instant::now();
    let rep = pace(&mut tiny_frames(100), io::sink(), rate(50), &Framing::Raw).map_err(|e| e.to_string())?;
    let wall = t.elapsed().as_secs_f64();
    ensure!(
        (1.98..=2.08).contains(&rep.total_duration_s) && (1.98..=2.08).contains(&wall),
        "100 frames at 50 fps took {:.4} s (wall {wall:.4} s)",
        rep.total_duration_s
    );
    check_rate(&rep, 50.0, "null sink 50 fps")?;

    let steal_before = steal_ms();
    let rep25 = pace(&mut tiny_frames(500), io::sink(), rate(25), &Framing::Raw).map_err(|e| e.to_string())?;
    let p99 = rep25.lateness_percentile(99.0);
    let over = rep25.lateness_per_frame.iter().filter(|&&l| l >= 0.005).count();
    let steal = match (steal_before, steal_ms()) {
        (Some(a), Some(b)) => format!("{} ms", b - a),
        _ => "unknown".into(),
    };
    ensure!(
        p99 < 0.005,
        "p99 lateness {:.3} ms ({over} of 500 frames >= 5 ms; hypervisor steal during run: {steal})",
        p99 * 1e3
    );
    check_rate(&rep25, 25.0, "null sink 25 fps")?;

    let slow = pace(&mut tiny_frames(50), SlowSink(Duration::from_millis(5)), rate(50), &Framing::Raw)
        .map_err(|e| e.to_string())?;
    check_rate(&slow, 50.0, "5 ms sink")?;
    let stalled = pace(&mut tiny_frames(20), SlowSink(Duration::from_millis(30)), rate(50), &Framing::Raw)
        .map_err(|e| e.to_string())?;
    check_rate(&stalled, 50.0, "30 ms sink")?;

    Ok(format!(
        "2.00 s target took {:.4} s; p99 lateness {:.3} ms; max delivery {:.2}/{:.2} fps",
        rep.total_duration_s,
        p99 * 1e3,
        rep.delivery_rate().unwrap_or(0.0),
        rep25.delivery_rate().unwrap_or(0.0)
    ))
}

fn harness_mocks() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let dir = tmp.path();
    let small = synthetic_seq(dir, "F25", (64, 64), 25, 250, false);
    let fast = fast_profile("fast");
    let paced = run_paced(&fast, &small, 1000, &dir.join("p.bin")).map_err(|e| e.to_string())?;
    ensure!(
        (24.5..=25.5).contains(&paced.throughput_fps),
        "paced fast mock {:.3} fps",
        paced.throughput_fps
    );
    let unpaced = run_unpaced(&fast, &small, 1000, &dir.join("u.bin")).map_err(|e| e.to_string())?;
    ensure!(
        unpaced.throughput_fps >= 5.0 * paced.throughput_fps,
        "unpaced {:.1} fps is not 5x paced {:.2}",
        unpaced.throughput_fps,
        paced.throughput_fps
    );

    // Frames larger than a pipe buffer, so delivery blocks on the consumer.
    let big = synthetic_seq(dir, "S25", (320, 240), 25, 250, false);
    let slow = run_paced(&sleep_profile("slow", 60), &big, 1000, &dir.join("s.bin")).map_err(|e| e.to_string())?;
    ensure!(
        (15.5..=17.5).contains(&slow.throughput_fps),
        "sleeping mock {:.3} fps",
        slow.throughput_fps
    );
    let late = slow.pacing.ok_or("no pacing report")?.lateness_per_frame;
    let onset = late.len() / 10;
    ensure!(
        late[onset..].windows(2).all(|w| w[1] >= w[0]),
        "lateness not monotone after frame {onset}"
    );
    ensure!(late[late.len() - 1] > late[onset], "lateness did not grow");
    Ok(format!(
        "paced {:.2} fps, unpaced {:.0} fps, sleeping {:.2} fps, final lateness {:.2} s",
        paced.throughput_fps,
        unpaced.throughput_fps,
        slow.throughput_fps,
        late[late.len() - 1]
    ))
}

fn buffer_latency_anchor() -> Outcome {
    let v = buffer_latency(60, FrameRate::new(30, 1).unwrap());
    ensure!(v == 2.0, "buffer_latency(60, 30) = {v}");
    Ok("60 frames at 30 fps = 2 s".into())
}

fn mos_anchors() -> Outcome {
    let anchors = [
        (100.0, 5.0, MosLabel::Excellent),
        (80.0, 4.0, MosLabel::Good),
        (60.0, 3.0, MosLabel::Fair),
        (40.0, 2.0, MosLabel::Poor),
        (20.0, 1.0, MosLabel::Bad),
    ];
    for (v, mos, label) in anchors {
        let m = vmaf_to_mos(v).map_err(|e| e.to_string())?;
        ensure!(m.mos_value == mos && m.label == label, "vmaf {v} -> {m:?}");
    }
    let mut prev = vmaf_to_mos(0.0).map_err(|e| e.to_string())?;
    for i in 1..=1000 {
        let m = vmaf_to_mos(i as f64 / 10.0).map_err(|e| e.to_string())?;
        ensure!(m.mos_value >= prev.mos_value && m.label >= prev.label, "not monotone at {}", i as f64 / 10.0);
        prev = m;
    }
    Ok("five anchors exact, monotone over 0..100".into())
}

fn run_cli(args: &[&str]) -> Result<String, String> {
    let o = Command::new(PACEBENCH).args(args).output().map_err(|e| e.to_string())?;
    if !o.status.success() {
        return Err(format!(
            "pacebench {} exited {:?}: {}",
            args.first().unwrap_or(&""),
            o.status.code(),
            String::from_utf8_lossy(&o.stderr)
        ));
    }
    Ok(String::from_utf8_lossy(&o.stdout).into_owned())
}

fn end_to_end() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let dir = tmp.path();
    let a = synthetic_seq(dir, "A25", (64, 48), 25, 10, false);
    let b = synthetic_seq(dir, "B50", (64, 48), 50, 20, true);
    let manifest = dir.join("manifest.json");
    std::fs::write(&manifest, serde_json::to_string_pretty(&[&a, &b]).unwrap()).unwrap();
    let runs = dir.join("runs");
    let config = serde_json::json!({
        "manifest": "manifest.json",
        "profiles": [fast_profile("anchor"), fast_profile("twin")],
        "sequences": ["A25", "B50"],
        "bitrates_kbps": [800, 1500, 3000, 6000],
        "modes": ["unpaced", "paced"],
        "output_dir": "runs",
        "metric": { "command_template": metric_template() },
    });
    let cfg = dir.join("bench.json");
    std::fs::write(&cfg, serde_json::to_string_pretty(&config).unwrap()).unwrap();

    run_cli(&["bench", "--config", cfg.to_str().unwrap(), "--mode", "both"])?;
    let out = dir.join("report").join("bd_rate.md");
    std::fs::create_dir_all(out.parent().unwrap()).unwrap();
    run_cli(&[
        "report", "--runs", runs.to_str().unwrap(), "--anchor", "anchor", "--kind", "rate",
        "--format", "md", "--out", out.to_str().unwrap(),
    ])?;
    let md = std::fs::read_to_string(&out).map_err(|e| e.to_string())?;
    let body: Vec<&str> = md.lines().filter(|l| l.starts_with('|')).skip(2).collect();
    let want_rows = ["A25", "Avg 25", "B50", "Avg 50"];
    ensure!(body.len() == want_rows.len(), "matrix rows: {md}");
    for (line, want) in body.iter().zip(want_rows) {
        let cells: Vec<&str> = line.trim_matches('|').split('|').map(str::trim).collect();
        ensure!(cells == [want, "0.00"], "row {line:?}");
    }

    let csv_out = dir.join("report").join("bd_vmaf.csv");
    run_cli(&[
        "report", "--runs", runs.to_str().unwrap(), "--anchor", "anchor", "--kind", "quality",
        "--format", "csv", "--out", csv_out.to_str().unwrap(),
    ])?;
    let table = parse_csv(&std::fs::read_to_string(&csv_out).unwrap()).map_err(|e| e.to_string())?;
    ensure!(
        table.rows.iter().all(|(_, c)| c.iter().all(|v| *v == Some(0.0))),
        "quality matrix not all zero: {:?}",
        table.rows
    );

    let curves = dir.join("report").join("curves");
    let bd = run_cli(&[
        "bd",
        "--ref", curves.join("twin__A25.csv").to_str().unwrap(),
        "--test", curves.join("anchor__A25.csv").to_str().unwrap(),
        "--kind", "rate",
    ])?;
    ensure!(bd.contains("value: 0.00\n"), "bd output {bd}");
    ensure!(dir.join("report").join("throughput.csv").exists(), "throughput.csv missing");

    let records = load_records(&runs).map_err(|e| e.to_string())?;
    ensure!(records.len() == 32, "{} run records", records.len());
    let rows = read_runs_csv(&runs.join(RUNS_CSV)).map_err(|e| e.to_string())?;
    let expect: Vec<RunsCsvRow> = records.iter().map(RunsCsvRow::from).collect();
    ensure!(rows == expect, "runs.csv differs from the run records");
    let again = pacebench::harness::runs_csv_bytes(&records).map_err(|e| e.to_string())?;
    ensure!(again == std::fs::read(runs.join(RUNS_CSV)).unwrap(), "runs.csv not byte-stable");
    Ok(format!("{} runs, all cells 0.00, runs.csv lossless", records.len()))
}

fn dataset_validation() -> Outcome {
    let seqs = parse_manifest(&dataset_manifest_json(Path::new("/data"))).map_err(|e| e.to_string())?;
    ensure!(seqs.len() == 12, "{} sequences", seqs.len());
    for s in &seqs {
        let frames = (s.duration_s * s.frame_rate().as_f64()).round() as u64;
        ensure!(frames == s.frame_count, "{}: {frames} != {}", s.short_name, s.frame_count);
    }
    Ok("12 rows consistent (BS25: 25 x 8.68 = 217)".into())
}
