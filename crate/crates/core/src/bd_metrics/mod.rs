//! Bjøntegaard-delta metrics between two rate-quality curves.
//!
//! BD-rate integrates the interpolated bitrate over the quality range the
//! two curves share; BD-quality integrates quality over the shared bitrate
//! range. Curves are pruned to their Pareto front first so they can be
//! inverted, then interpolated with a monotone piecewise cubic. Bitrate is
//! always interpolated as `log10(rate)` when it is the dependent variable.

mod pchip;
mod quadrature;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use pchip::Pchip;
pub use quadrature::{simpson, Quadrature};

/// Which axis of a rate-quality plane a range or lookup refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Quality,
    Rate,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::Quality => f.write_str("quality"),
            Axis::Rate => f.write_str("bitrate"),
        }
    }
}

/// One (bitrate, quality) sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RdPoint {
    pub rate_kbps: f64,
    pub quality: f64,
}

impl RdPoint {
    pub fn new(rate_kbps: f64, quality: f64) -> Self {
        RdPoint { rate_kbps, quality }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateQualityCurve {
    label: String,
    points: Vec<RdPoint>,
}

impl RateQualityCurve {
    /// Sorts by rate and checks: at least 2 points, rates finite, positive and distinct.
    pub fn new(label: impl Into<String>, mut points: Vec<RdPoint>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InsufficientData { points: points.len() });
        }
        if let Some(p) = points
            .iter()
            .find(|p| !(p.rate_kbps.is_finite() && p.rate_kbps > 0.0 && p.quality.is_finite()))
        {
            return Err(Error::InvalidInput(format!(
                "curve point ({}, {}) needs a positive finite rate and finite quality",
                p.rate_kbps, p.quality
            )));
        }
        points.sort_by(|a, b| a.rate_kbps.total_cmp(&b.rate_kbps));
        if let Some(w) = points.windows(2).find(|w| w[1].rate_kbps <= w[0].rate_kbps) {
            return Err(Error::DuplicatePoint { rate_kbps: w[0].rate_kbps });
        }
        Ok(RateQualityCurve {
            label: label.into(),
            points,
        })
    }

    pub fn from_pairs(label: impl Into<String>, pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(label, pairs.iter().map(|&(r, q)| RdPoint::new(r, q)).collect())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn points(&self) -> &[RdPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Closed span of the curve on `axis`.
    pub fn span(&self, axis: Axis) -> (f64, f64) {
        let vals = self.points.iter().map(|p| match axis {
            Axis::Quality => p.quality,
            Axis::Rate => p.rate_kbps,
        });
        vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }

    pub fn is_monotone(&self) -> bool {
        self.points.windows(2).all(|w| w[1].quality > w[0].quality)
    }

    /// Multiplies every rate by `factor`.
    pub fn scale_rates(&self, factor: f64) -> Result<Self> {
        let pts = self
            .points
            .iter()
            .map(|p| RdPoint::new(p.rate_kbps * factor, p.quality))
            .collect();
        Self::new(self.label.clone(), pts)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pruned {
    pub curve: RateQualityCurve,
    pub dropped: Vec<RdPoint>,
}

/// Keeps the Pareto front: walking up in rate, a point survives only if its
/// quality beats every cheaper point.
pub fn prune_monotone(curve: &RateQualityCurve) -> Result<Pruned> {
    let mut kept = Vec::with_capacity(curve.len());
    let mut dropped = Vec::new();
    let mut best = f64::NEG_INFINITY;
    for &p in curve.points() {
        if p.quality > best {
            best = p.quality;
            kept.push(p);
        } else {
            dropped.push(p);
        }
    }
    if kept.len() < 2 {
        return Err(Error::DegenerateCurve {
            label: curve.label().to_string(),
        });
    }
    if !dropped.is_empty() {
        let list: Vec<String> = dropped
            .iter()
            .map(|p| format!("({}, {})", p.rate_kbps, p.quality))
            .collect();
        log::warn!("curve {}: dropped dominated point(s) {}", curve.label(), list.join(", "));
    }
    Ok(Pruned {
        curve: RateQualityCurve {
            label: curve.label.clone(),
            points: kept,
        },
        dropped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommonRange {
    pub lo: f64,
    pub hi: f64,
    pub axis: Axis,
}

pub fn common_range(a: &RateQualityCurve, b: &RateQualityCurve, axis: Axis) -> Result<CommonRange> {
    let (a_lo, a_hi) = a.span(axis);
    let (b_lo, b_hi) = b.span(axis);
    span_overlap((a_lo, a_hi), (b_lo, b_hi), axis)
}

pub fn span_overlap(a: (f64, f64), b: (f64, f64), axis: Axis) -> Result<CommonRange> {
    let lo = a.0.max(b.0);
    let hi = a.1.min(b.1);
    if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
        return Err(Error::NoOverlap { axis, lo, hi });
    }
    Ok(CommonRange { lo, hi, axis })
}

/// Integration abscissa for BD-quality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateDomain {
    #[default]
    Linear,
    Log,
}

/// How BD-rate turns the two integrals into a percentage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BdMethod {
    /// Area between the rate curves relative to the reference curve's area.
    #[default]
    PaperArea,
    /// Mean log10 rate difference, exponentiated.
    LogDomain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BdKind {
    BdRatePercent,
    BdQualityPoints,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BdResult {
    pub kind: BdKind,
    pub value: f64,
    pub common_range: CommonRange,
    /// For BD-quality, `PaperArea` means a linear rate axis and `LogDomain` a log10 one.
    pub method: BdMethod,
    /// Points (test, reference) surviving pruning.
    pub points_used: (usize, usize),
}

/// A curve prepared for lookups in one direction.
#[derive(Debug, Clone)]
pub struct CurveInterpolant {
    pchip: Pchip,
    input: Axis,
    log_rate: bool,
}

impl CurveInterpolant {
    /// Quality in, rate out; interpolates `log10(rate)`. Quality must be strictly increasing.
    pub fn quality_to_rate(curve: &RateQualityCurve) -> Result<Self> {
        if !curve.is_monotone() {
            return Err(Error::InvalidInput(format!(
                "curve {} is not monotone; prune it first",
                curve.label()
            )));
        }
        let (x, y) = curve
            .points()
            .iter()
            .map(|p| (p.quality, p.rate_kbps.log10()))
            .unzip();
        Ok(CurveInterpolant {
            pchip: Pchip::new(x, y)?,
            input: Axis::Quality,
            log_rate: true,
        })
    }

    /// Rate in, quality out, over a linear or log10 rate abscissa.
    pub fn rate_to_quality(curve: &RateQualityCurve, domain: RateDomain) -> Result<Self> {
        let log_rate = domain == RateDomain::Log;
        let (x, y) = curve
            .points()
            .iter()
            .map(|p| (if log_rate { p.rate_kbps.log10() } else { p.rate_kbps }, p.quality))
            .unzip();
        Ok(CurveInterpolant {
            pchip: Pchip::new(x, y)?,
            input: Axis::Rate,
            log_rate,
        })
    }

    pub fn input_axis(&self) -> Axis {
        self.input
    }

    /// Looks up `x` in natural units (quality points or kbps).
    pub fn eval(&self, x: f64) -> Result<f64> {
        match (self.input, self.log_rate) {
            (Axis::Quality, _) => Ok(10f64.powf(self.pchip.eval(x)?)),
            (Axis::Rate, true) => self.pchip.eval(x.log10()).map_err(|e| match e {
                Error::Extrapolation { .. } => {
                    let (lo, hi) = self.pchip.domain();
                    Error::Extrapolation {
                        x,
                        lo: 10f64.powf(lo),
                        hi: 10f64.powf(hi),
                    }
                }
                other => other,
            }),
            (Axis::Rate, false) => self.pchip.eval(x),
        }
    }

    /// The dependent variable in the interpolated (possibly log) domain,
    /// as a function of the abscissa in its own domain.
    fn raw(&self, u: f64) -> f64 {
        self.pchip.eval_unchecked(u)
    }

    /// Knot abscissae in the interpolation domain.
    fn knots(&self) -> &[f64] {
        self.pchip.knots()
    }
}

/// Knots of both interpolants, where the integrands lose smoothness.
fn breaks(a: &CurveInterpolant, b: &CurveInterpolant) -> Vec<f64> {
    a.knots().iter().chain(b.knots()).copied().collect()
}

/// Interpolates `curve` at `x` on `axis_in`, returning the other coordinate.
pub fn interpolate(curve: &RateQualityCurve, axis_in: Axis, x: f64) -> Result<f64> {
    match axis_in {
        Axis::Quality => CurveInterpolant::quality_to_rate(curve)?.eval(x),
        Axis::Rate => CurveInterpolant::rate_to_quality(curve, RateDomain::Linear)?.eval(x),
    }
}

pub fn bd_rate(test: &RateQualityCurve, reference: &RateQualityCurve, method: BdMethod) -> Result<BdResult> {
    bd_rate_with(test, reference, method, Quadrature::default())
}

/// Average bitrate difference of `test` against `reference` at equal
/// quality, in percent. Negative means `test` needs less bitrate.
pub fn bd_rate_with(
    test: &RateQualityCurve,
    reference: &RateQualityCurve,
    method: BdMethod,
    quad: Quadrature,
) -> Result<BdResult> {
    let test = prune_monotone(test)?.curve;
    let reference = prune_monotone(reference)?.curve;
    let range = common_range(&test, &reference, Axis::Quality)?;
    let t = CurveInterpolant::quality_to_rate(&test)?;
    let r = CurveInterpolant::quality_to_rate(&reference)?;
    let (lo, hi) = (range.lo, range.hi);
    let knots = breaks(&t, &r);

    let value = match method {
        BdMethod::PaperArea => {
            let area_t = quad.integrate_split(|q| 10f64.powf(t.raw(q)), lo, hi, t.knots());
            let area_r = quad.integrate_split(|q| 10f64.powf(r.raw(q)), lo, hi, r.knots());
            100.0 * (area_t - area_r) / area_r
        }
        BdMethod::LogDomain => {
            let diff = quad.integrate_split(|q| t.raw(q) - r.raw(q), lo, hi, &knots);
            let mean = diff / (hi - lo);
            100.0 * (10f64.powf(mean) - 1.0)
        }
    };
    Ok(BdResult {
        kind: BdKind::BdRatePercent,
        value,
        common_range: range,
        method,
        points_used: (test.len(), reference.len()),
    })
}

pub fn bd_quality(test: &RateQualityCurve, reference: &RateQualityCurve, domain: RateDomain) -> Result<BdResult> {
    bd_quality_with(test, reference, domain, Quadrature::default())
}

/// Average quality difference of `test` over `reference` at equal bitrate,
/// in score points. Positive means `test` scores higher.
pub fn bd_quality_with(
    test: &RateQualityCurve,
    reference: &RateQualityCurve,
    domain: RateDomain,
    quad: Quadrature,
) -> Result<BdResult> {
    let test = prune_monotone(test)?.curve;
    let reference = prune_monotone(reference)?.curve;
    let range = common_range(&test, &reference, Axis::Rate)?;
    let t = CurveInterpolant::rate_to_quality(&test, domain)?;
    let r = CurveInterpolant::rate_to_quality(&reference, domain)?;
    let (lo, hi) = match domain {
        RateDomain::Linear => (range.lo, range.hi),
        RateDomain::Log => (range.lo.log10(), range.hi.log10()),
    };
    let diff = quad.integrate_split(|u| t.raw(u) - r.raw(u), lo, hi, &breaks(&t, &r));
    Ok(BdResult {
        kind: BdKind::BdQualityPoints,
        value: diff / (hi - lo),
        common_range: range,
        method: match domain {
            RateDomain::Linear => BdMethod::PaperArea,
            RateDomain::Log => BdMethod::LogDomain,
        },
        points_used: (test.len(), reference.len()),
    })
}
