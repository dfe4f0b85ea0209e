//! Real-time video encoder benchmarking.
//!
//! Paces raw frames into external encoders at capture rate (or feeds them
//! unpaced), measures throughput and output size, ingests quality reports,
//! and compares encoders with BD-rate / BD-quality.

pub mod bd_metrics;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod fsutil;
pub mod harness;
pub mod pacer;
pub mod quality;
pub mod report;
pub mod template;

pub use error::{Error, Result};
