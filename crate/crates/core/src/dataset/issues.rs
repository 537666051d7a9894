//! Catalog of known data-collection issues and how each run is affected.
//!
//! The built-in table lists every affected (subject, run) pair along with
//! the repair or exclusion that applies. Entries marked `cascade` cover the
//! named run and every subsequent run of the same subject.

use serde::{Deserialize, Serialize};

use crate::model::{RunContext, RunOrder};

/// Kind of recording issue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueKind {
    /// Interaction file lacks a "system end" record; one is appended.
    MissingSystemEnd,
    /// Destroy records after "system end"; they are removed.
    DestroyAfterEnd,
    /// Run(s) missing because the subject stopped; excluded from analysis.
    SubjectTolerance,
    /// Run missing due to a technical fault; excluded from analysis.
    Technical,
    /// Eye-tracking stream unusable; motion data remains usable.
    EyeInvalid,
}

impl IssueKind {
    pub fn as_str(self) -> &'static str {
        match self {
            IssueKind::MissingSystemEnd => "missing_system_end",
            IssueKind::DestroyAfterEnd => "destroy_after_end",
            IssueKind::SubjectTolerance => "subject_tolerance",
            IssueKind::Technical => "technical",
            IssueKind::EyeInvalid => "eye_invalid",
        }
    }
}

/// Why a run is dropped from analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExcludeReason {
    SubjectTolerance,
    Technical,
}

impl ExcludeReason {
    pub fn as_str(self) -> &'static str {
        match self {
            ExcludeReason::SubjectTolerance => "subject_tolerance",
            ExcludeReason::Technical => "technical",
        }
    }
}

/// One issue record: the evaluation run it starts at and whether it
/// extends to all subsequent runs of the subject.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IssueEntry {
    pub subject_id: u32,
    /// Evaluation run order 1..=12 the issue starts at.
    pub run_order: u8,
    pub kind: IssueKind,
    pub cascade: bool,
}

impl IssueEntry {
    const fn one(subject_id: u32, run_order: u8, kind: IssueKind) -> IssueEntry {
        IssueEntry {
            subject_id,
            run_order,
            kind,
            cascade: false,
        }
    }

    const fn cascading(subject_id: u32, run_order: u8, kind: IssueKind) -> IssueEntry {
        IssueEntry {
            subject_id,
            run_order,
            kind,
            cascade: true,
        }
    }

    /// Whether this entry applies to the given evaluation run.
    pub fn applies_to(&self, subject_id: u32, run_order: RunOrder) -> bool {
        let RunOrder::Evaluation(n) = run_order else {
            return false;
        };
        self.subject_id == subject_id
            && if self.cascade {
                n >= self.run_order
            } else {
                n == self.run_order
            }
    }
}

/// The full issue catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IssueTable {
    entries: Vec<IssueEntry>,
}

impl IssueTable {
    pub fn new(entries: Vec<IssueEntry>) -> IssueTable {
        IssueTable { entries }
    }

    /// Empty table: no repairs, no exclusions. Used for synthetic suites.
    pub fn empty() -> IssueTable {
        IssueTable {
            entries: Vec::new(),
        }
    }

    /// The issue catalog of the published dataset.
    pub fn builtin() -> IssueTable {
        use IssueKind::*;
        IssueTable {
            entries: vec![
                IssueEntry::one(13, 4, MissingSystemEnd),
                IssueEntry::one(13, 6, MissingSystemEnd),
                IssueEntry::one(13, 7, MissingSystemEnd),
                IssueEntry::one(13, 8, MissingSystemEnd),
                IssueEntry::one(13, 9, MissingSystemEnd),
                IssueEntry::one(13, 10, MissingSystemEnd),
                IssueEntry::one(13, 11, MissingSystemEnd),
                IssueEntry::one(18, 10, MissingSystemEnd),
                IssueEntry::one(27, 7, MissingSystemEnd),
                IssueEntry::one(28, 2, MissingSystemEnd),
                IssueEntry::one(30, 1, MissingSystemEnd),
                IssueEntry::one(11, 10, DestroyAfterEnd),
                IssueEntry::one(26, 2, DestroyAfterEnd),
                IssueEntry::cascading(6, 9, SubjectTolerance),
                IssueEntry::cascading(8, 9, SubjectTolerance),
                IssueEntry::cascading(23, 3, SubjectTolerance),
                IssueEntry::cascading(24, 8, SubjectTolerance),
                IssueEntry::one(17, 4, Technical),
                IssueEntry::one(34, 5, Technical),
                IssueEntry::cascading(36, 1, EyeInvalid),
            ],
        }
    }

    pub fn entries(&self) -> &[IssueEntry] {
        &self.entries
    }

    /// Entries applying to one run (cascades included).
    pub fn entries_for(&self, subject_id: u32, run_order: RunOrder) -> Vec<&IssueEntry> {
        self.entries
            .iter()
            .filter(|e| e.applies_to(subject_id, run_order))
            .collect()
    }

    /// Exclusion verdict for a run, if any.
    pub fn exclusion(&self, subject_id: u32, run_order: RunOrder) -> Option<ExcludeReason> {
        self.entries_for(subject_id, run_order)
            .into_iter()
            .find_map(|e| match e.kind {
                IssueKind::SubjectTolerance => Some(ExcludeReason::SubjectTolerance),
                IssueKind::Technical => Some(ExcludeReason::Technical),
                _ => None,
            })
    }

    /// Whether the eye stream of a run is flagged unusable.
    pub fn eye_invalid(&self, subject_id: u32, run_order: RunOrder) -> bool {
        self.entries_for(subject_id, run_order)
            .iter()
            .any(|e| e.kind == IssueKind::EyeInvalid)
    }

    /// Entries whose starting run matches none of the given contexts.
    /// Such entries deserve a warning: the catalog references a run the
    /// dataset does not contain.
    pub fn unmatched<'a>(&'a self, runs: &[RunContext]) -> Vec<&'a IssueEntry> {
        self.entries
            .iter()
            .filter(|e| {
                !runs.iter().any(|r| {
                    r.subject_id == e.subject_id && r.run_order == RunOrder::Evaluation(e.run_order)
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_has_all_five_kinds() {
        let t = IssueTable::builtin();
        for kind in [
            IssueKind::MissingSystemEnd,
            IssueKind::DestroyAfterEnd,
            IssueKind::SubjectTolerance,
            IssueKind::Technical,
            IssueKind::EyeInvalid,
        ] {
            assert!(t.entries().iter().any(|e| e.kind == kind), "{kind:?}");
        }
        assert_eq!(t.entries().len(), 20);
    }

    #[test]
    fn cascade_covers_subsequent_runs_only() {
        let t = IssueTable::builtin();
        // Subject 23 stopped at run 3: runs 3..=12 excluded, 1..2 kept.
        assert!(t.exclusion(23, RunOrder::Evaluation(2)).is_none());
        for n in 3..=12 {
            assert_eq!(
                t.exclusion(23, RunOrder::Evaluation(n)),
                Some(ExcludeReason::SubjectTolerance)
            );
        }
        // Non-cascading technical issue hits exactly one run.
        assert_eq!(
            t.exclusion(17, RunOrder::Evaluation(4)),
            Some(ExcludeReason::Technical)
        );
        assert!(t.exclusion(17, RunOrder::Evaluation(5)).is_none());
    }

    #[test]
    fn exclusion_count_matches_completed_run_total() {
        // 42 subjects x 12 evaluation runs, minus tolerance cascades
        // (4 + 4 + 10 + 5 = 23) and technical losses (2) leaves 479.
        let t = IssueTable::builtin();
        let mut excluded = 0;
        for subject in 1..=42 {
            for run in 1..=12 {
                if t.exclusion(subject, RunOrder::Evaluation(run)).is_some() {
                    excluded += 1;
                }
            }
        }
        assert_eq!(excluded, 25);
        assert_eq!(42 * 12 - excluded, 479);
    }

    #[test]
    fn eye_invalid_cascades_for_subject_36() {
        let t = IssueTable::builtin();
        assert!(t.eye_invalid(36, RunOrder::Evaluation(1)));
        assert!(t.eye_invalid(36, RunOrder::Evaluation(12)));
        assert!(!t.eye_invalid(35, RunOrder::Evaluation(1)));
        // Motion data stays usable: the flag is not an exclusion.
        assert!(t.exclusion(36, RunOrder::Evaluation(5)).is_none());
    }

    #[test]
    fn training_runs_never_match() {
        let t = IssueTable::builtin();
        assert!(t.entries_for(13, RunOrder::Training(1)).is_empty());
    }
}
