//! Per-run performance metrics synthesized from the corrected event log,
//! plus the classical time/accuracy scores kept as a comparator only (the
//! obstacle-destruction protocol defines errors differently, so these
//! scores are reported but not used as the primary outcome).

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Action, Event, Initiator};

/// Number of destructible objects on an evaluation course.
pub const OBJECTS_PER_COURSE: u32 = 9;

/// The six per-run metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    /// Seconds from the first "user start" to "system end".
    pub time_duration_s: f64,
    /// Seconds from "system launch" to the first "user start".
    pub time_before_first_step_s: f64,
    /// Count of "user exit" records.
    pub n_off_path: u32,
    /// Objects never destroyed: object count minus distinct destroys.
    pub n_missed_objects: u32,
    /// Count of "user collide" records.
    pub n_collisions: u32,
    /// Count of "user stop" records.
    pub n_stops: u32,
}

/// Derives the six metrics from a corrected event log.
///
/// Destroy records are de-duplicated by recipient label: the environment
/// removes a destroyed object, so a repeated label is log noise.
pub fn synthesize_run_metrics(events: &[Event], n_objects: u32) -> Result<RunMetrics> {
    let t_launch = events
        .iter()
        .find(|e| e.matches(Initiator::System, &Action::Launch))
        .map(|e| e.t.0)
        .ok_or_else(|| Error::Domain("event log has no system launch".into()))?;

    let t_first_start = events
        .iter()
        .filter(|e| e.matches(Initiator::User, &Action::Start))
        .map(|e| e.t.0)
        .fold(None::<f64>, |acc, t| {
            Some(acc.map_or(t, |best| best.min(t)))
        })
        .ok_or_else(|| Error::Domain("event log has no user start".into()))?;

    let t_end = events
        .iter()
        .find(|e| e.matches(Initiator::System, &Action::End))
        .map(|e| e.t.0)
        .ok_or_else(|| Error::Domain("event log has no system end (after corrections)".into()))?;

    let mut destroyed: BTreeSet<&str> = BTreeSet::new();
    let mut n_off_path = 0;
    let mut n_collisions = 0;
    let mut n_stops = 0;
    for e in events.iter().filter(|e| e.initiator == Initiator::User) {
        match e.action {
            Action::Destroy => {
                destroyed.insert(e.recipient.as_str());
            }
            Action::Exit => n_off_path += 1,
            Action::Collide => n_collisions += 1,
            Action::Stop => n_stops += 1,
            _ => {}
        }
    }

    let n_destroyed = destroyed.len() as u32;
    if n_destroyed > n_objects {
        return Err(Error::Domain(format!(
            "{n_destroyed} distinct objects destroyed but the course has {n_objects}"
        )));
    }

    Ok(RunMetrics {
        time_duration_s: t_end - t_first_start,
        time_before_first_step_s: t_first_start - t_launch,
        n_off_path,
        n_missed_objects: n_objects - n_destroyed,
        n_collisions,
        n_stops,
    })
}

/// Penalty classes of the classical scoring scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyKind {
    MissedObject,
    Collision,
    OffPath,
    Redirection,
}

/// Seconds added per error under the classical time score: 15 s for most
/// error types, 30 s for redirections.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyPolicy {
    pub standard_s: f64,
    pub redirection_s: f64,
}

impl Default for PenaltyPolicy {
    fn default() -> Self {
        PenaltyPolicy {
            standard_s: 15.0,
            redirection_s: 30.0,
        }
    }
}

impl PenaltyPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.standard_s < 0.0 || self.redirection_s < 0.0 {
            return Err(Error::Domain("penalty seconds must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn seconds_for(&self, kind: PenaltyKind) -> f64 {
        match kind {
            PenaltyKind::Redirection => self.redirection_s,
            _ => self.standard_s,
        }
    }
}

/// Time score = duration + penalty seconds over explicit error counts.
/// Comparator only.
pub fn time_score_from_counts(
    duration_s: f64,
    penalties: &[(PenaltyKind, u32)],
    policy: &PenaltyPolicy,
) -> Result<f64> {
    policy.validate()?;
    let extra: f64 = penalties
        .iter()
        .map(|&(kind, n)| policy.seconds_for(kind) * f64::from(n))
        .sum();
    Ok(duration_s + extra)
}

/// Time score of a run's metrics: missed objects, collisions and path
/// exits each draw the standard penalty. Comparator only.
pub fn time_score(m: &RunMetrics, policy: &PenaltyPolicy) -> Result<f64> {
    time_score_from_counts(
        m.time_duration_s,
        &[
            (PenaltyKind::MissedObject, m.n_missed_objects),
            (PenaltyKind::Collision, m.n_collisions),
            (PenaltyKind::OffPath, m.n_off_path),
        ],
        policy,
    )
}

/// Accuracy score = penalties / obstacles, in [0, 1]. Comparator only.
pub fn accuracy_score(n_penalties: u32, n_obstacles: u32) -> Result<f64> {
    if n_obstacles == 0 {
        return Err(Error::Domain(
            "accuracy score needs at least 1 obstacle".into(),
        ));
    }
    if n_penalties > n_obstacles {
        return Err(Error::Domain(format!(
            "{n_penalties} penalties exceed {n_obstacles} obstacles"
        )));
    }
    Ok(f64::from(n_penalties) / f64::from(n_obstacles))
}

/// Score summary attached to a run when the comparator is requested.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub time_score_s: f64,
    pub accuracy_score: f64,
    pub policy: PenaltyPolicy,
}

impl ScoreReport {
    pub fn from_metrics(m: &RunMetrics, policy: PenaltyPolicy) -> Result<ScoreReport> {
        Ok(ScoreReport {
            time_score_s: time_score(m, &policy)?,
            accuracy_score: accuracy_score(m.n_missed_objects, OBJECTS_PER_COURSE)?,
            policy,
        })
    }
}
