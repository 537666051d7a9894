//! Data pathway for a seated VR orientation-and-mobility functional-vision
//! test: raw run ingestion, motion/eye preprocessing, per-run metric
//! synthesis, missed-object behavioral analysis, group statistics,
//! photometric calibration, and a deterministic synthetic-run generator
//! used as an end-to-end verification oracle.

pub mod behavior;
pub mod dataset;
pub mod error;
pub mod metrics;
pub mod model;
pub mod photometry;
pub mod pipeline;
pub mod preprocess;
pub mod report;
pub mod simgen;
pub mod stats;

pub use error::{Error, Result};
