//! On-disk dataset layout: readers and writers for the raw and processed
//! run files, course metadata, run summaries, and the data-issue catalog.
//!
//! Layout under one root directory:
//!
//! ```text
//! meta_data/            Course {A..F}.csv, middle_points_{A..F}.txt,
//!                       endpoints_{A..F}.txt, Result_H.txt
//! test_data/            <subject>/<run>/{Run_Information,Events,
//!                       Position_Data,Hand_Data,RawEye_Data}.txt
//! test_data_processed/  <subject>/<run>/{CorrectedEvents,
//!                       CorrectedEye_Data,InterpolatedPosition_Data}.txt
//! ```

pub mod issues;
pub mod object_table;
pub mod read;
pub mod schema;
pub mod write;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::model::{Event, GazeSample, PoseSample, RunContext, RunOrder};

pub use issues::{ExcludeReason, IssueEntry, IssueKind, IssueTable};
pub use read::{
    load_course_meta, load_missed_obj_info, load_results_summary, load_run, read_processed_run,
};
pub use schema::ColumnSchema;
pub use write::{
    write_course_meta, write_missed_obj_info, write_processed, write_raw_run, write_summary,
    ProcessedStreamsRef,
};

/// Root of one dataset tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetRoot {
    pub root: PathBuf,
}

impl DatasetRoot {
    pub fn new(root: impl Into<PathBuf>) -> DatasetRoot {
        DatasetRoot { root: root.into() }
    }

    pub fn meta_dir(&self) -> PathBuf {
        self.root.join("meta_data")
    }

    pub fn raw_dir(&self) -> PathBuf {
        self.root.join("test_data")
    }

    pub fn processed_dir(&self) -> PathBuf {
        self.root.join("test_data_processed")
    }

    pub fn run_dir(&self, subject_id: u32, run_order: RunOrder) -> PathBuf {
        self.raw_dir()
            .join(subject_id.to_string())
            .join(run_order.to_string())
    }
}

/// Counters and warnings accumulated while parsing one run. Nothing is
/// dropped silently: every anomaly shows up here.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParseReport {
    /// Event rows whose action verb was preserved verbatim as `Other`.
    pub unknown_actions: usize,
    pub warnings: Vec<String>,
}

/// One course traversal as recorded: context, interaction log and the four
/// raw streams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub ctx: RunContext,
    pub events: Vec<Event>,
    pub head: Vec<PoseSample>,
    pub body: Vec<PoseSample>,
    pub hand: Vec<PoseSample>,
    pub eye: Vec<GazeSample>,
    pub report: ParseReport,
}

/// Existence check used by integration gates: a directory qualifies as a
/// dataset root when the metadata and raw folders are both present.
pub fn looks_like_dataset(root: &Path) -> bool {
    root.join("meta_data").is_dir() && root.join("test_data").is_dir()
}
