//! Per-run preprocessing: fixed-frequency resampling of the pose streams
//! (linear position, spherical-linear rotation), eye-tracker clock
//! correction, eye/head synchronization validation, and application of the
//! known data-issue repairs.

use serde::{Deserialize, Serialize};

use crate::dataset::issues::{ExcludeReason, IssueKind, IssueTable};
use crate::error::{Error, Result};
use crate::model::{
    Action, Event, GazeSample, Initiator, PoseSample, QuatRot, RunContext, Timestamp, Vec3,
};
use crate::stats::pearson;

/// Nominal motion capture rate of the headset, Hz.
pub const NOMINAL_POSE_HZ: f64 = 90.0;

/// Nominal eye tracker rate, Hz.
pub const NOMINAL_EYE_HZ: f64 = 120.0;

/// Correlation threshold an axis must exceed for the sync check to pass.
pub const SYNC_R_THRESHOLD: f64 = 0.8;

/// Significance threshold for the sync check.
pub const SYNC_P_THRESHOLD: f64 = 0.05;

/// Target rate for pose-stream resampling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResampleSpec {
    pub nominal_hz: f64,
}

impl Default for ResampleSpec {
    fn default() -> Self {
        ResampleSpec {
            nominal_hz: NOMINAL_POSE_HZ,
        }
    }
}

impl ResampleSpec {
    pub fn new(nominal_hz: f64) -> Result<ResampleSpec> {
        if !(nominal_hz.is_finite() && nominal_hz > 0.0) {
            return Err(Error::Domain(format!("nominal rate {nominal_hz} not > 0")));
        }
        Ok(ResampleSpec { nominal_hz })
    }
}

/// Timestamps t_first + k / nominal_hz for k = 0 ..= floor((t_last -
/// t_first) * nominal_hz), all within [t_first, t_last].
pub fn make_target_timeline(t_first: f64, t_last: f64, spec: ResampleSpec) -> Result<Vec<f64>> {
    if !(t_first.is_finite() && t_last.is_finite()) || t_last < t_first {
        return Err(Error::Domain(format!(
            "invalid timeline span [{t_first}, {t_last}]"
        )));
    }
    // The slack keeps an exactly-representable integral span (e.g. 1.0 s at
    // 90 Hz) from losing its final sample to rounding.
    let k_max = ((t_last - t_first) * spec.nominal_hz + 1e-9).floor() as usize;
    let mut out = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let t = t_first + k as f64 / spec.nominal_hz;
        out.push(if t > t_last { t_last } else { t });
    }
    Ok(out)
}

/// Affine interpolation between two positions at `ratio` in [0, 1].
pub fn interp_position(p0: Vec3, p1: Vec3, ratio: f64) -> Result<Vec3> {
    if !(0.0..=1.0).contains(&ratio) {
        return Err(Error::Domain(format!(
            "interpolation ratio {ratio} outside [0, 1]; extrapolation is not supported"
        )));
    }
    Ok(p0 + (p1 - p0) * ratio)
}

/// Spherical linear interpolation between two unit quaternions.
///
/// Interpolates along the shorter arc (the second quaternion is negated
/// when the pair straddles hemispheres). Falls back to normalized linear
/// interpolation when the angle between the inputs is numerically zero.
pub fn slerp(q0: QuatRot, q1: QuatRot, ratio: f64) -> Result<QuatRot> {
    if !(0.0..=1.0).contains(&ratio) {
        return Err(Error::Domain(format!("slerp ratio {ratio} outside [0, 1]")));
    }
    let mut dot = q0.dot(q1);
    let (w1, x1, y1, z1) = if dot < 0.0 {
        dot = -dot;
        (-q1.w, -q1.x, -q1.y, -q1.z)
    } else {
        (q1.w, q1.x, q1.y, q1.z)
    };

    let omega = dot.clamp(-1.0, 1.0).acos();
    let sin_omega = omega.sin();

    let (a, b) = if sin_omega < 1e-8 {
        (1.0 - ratio, ratio)
    } else {
        (
            ((1.0 - ratio) * omega).sin() / sin_omega,
            (ratio * omega).sin() / sin_omega,
        )
    };

    let w = a * q0.w + b * w1;
    let x = a * q0.x + b * x1;
    let y = a * q0.y + b * y1;
    let z = a * q0.z + b * z1;
    let n = (w * w + x * x + y * y + z * z).sqrt();
    Ok(QuatRot::from_unit_unchecked(w / n, x / n, y / n, z / n))
}

/// Resamples one body part's pose stream onto the nominal-rate timeline
/// spanned by its first and last timestamps.
///
/// For each target timestamp the bracketing original samples are combined
/// with the affine/spherical interpolators; a zero-length bracket (repeated
/// timestamp) carries the earlier sample forward.
pub fn resample_pose_stream(stream: &[PoseSample], spec: ResampleSpec) -> Result<Vec<PoseSample>> {
    if stream.len() < 2 {
        return Err(Error::Domain(format!(
            "resampling needs at least 2 samples, found {}",
            stream.len()
        )));
    }
    if stream.windows(2).any(|w| w[1].t.0 < w[0].t.0) {
        return Err(Error::Domain("pose stream not sorted by timestamp".into()));
    }

    let targets = make_target_timeline(stream[0].t.0, stream[stream.len() - 1].t.0, spec)?;
    let mut out = Vec::with_capacity(targets.len());
    let mut idx = 0usize;
    for &t in &targets {
        while idx + 2 < stream.len() && stream[idx + 1].t.0 < t {
            idx += 1;
        }
        let s0 = &stream[idx];
        let s1 = &stream[idx + 1];
        let dt = s1.t.0 - s0.t.0;
        let (pos, rot) = if dt <= 0.0 {
            (s0.pos, s0.rot)
        } else {
            let ratio = ((t - s0.t.0) / dt).clamp(0.0, 1.0);
            (
                interp_position(s0.pos, s1.pos, ratio)?,
                slerp(s0.rot, s1.rot, ratio)?,
            )
        };
        out.push(PoseSample {
            t: Timestamp(t),
            pos,
            rot,
            body_part: s0.body_part,
        });
    }
    Ok(out)
}

/// Shifts every eye timestamp by the offset between the first eye stamp
/// and the first motion stamp, so both streams share the motion clock.
/// No resampling is performed; sample spacing is untouched.
pub fn sync_eye_timestamps(eye: &[GazeSample], motion_first_t: f64) -> Result<Vec<GazeSample>> {
    let first = eye
        .first()
        .ok_or_else(|| Error::Domain("cannot synchronize an empty eye stream".into()))?;
    let eye0 = first.t.0;
    // Written as motion_first + (t - eye0) so the first stamp lands on
    // motion_first exactly.
    Ok(eye
        .iter()
        .map(|s| GazeSample {
            t: Timestamp(motion_first_t + (s.t.0 - eye0)),
            ..*s
        })
        .collect())
}

/// Per-axis outcome of the eye/head consistency check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisSync {
    pub r: f64,
    pub p: f64,
    pub pass: bool,
}

/// Result of correlating eye against head positions on the x and z axes.
/// The vertical axis is deliberately not part of the check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyncReport {
    /// False when fewer than 3 overlapping pairs were available.
    pub defined: bool,
    pub n_pairs: usize,
    pub x: Option<AxisSync>,
    pub z: Option<AxisSync>,
}

impl SyncReport {
    pub fn passed(&self) -> bool {
        self.defined
            && self.x.map(|a| a.pass).unwrap_or(false)
            && self.z.map(|a| a.pass).unwrap_or(false)
    }

    fn undefined(n_pairs: usize) -> SyncReport {
        SyncReport {
            defined: false,
            n_pairs,
            x: None,
            z: None,
        }
    }
}

/// Validates eye/head synchronization by pairing each valid eye sample
/// with the nearest head sample in time and correlating the x and z
/// coordinates. Passing requires r > 0.8 with p < 0.05 on each axis.
pub fn validate_sync(eye: &[GazeSample], head: &[PoseSample]) -> SyncReport {
    if head.is_empty() {
        return SyncReport::undefined(0);
    }
    let head_first = head[0].t.0;
    let head_last = head[head.len() - 1].t.0;

    let mut eye_x = Vec::new();
    let mut eye_z = Vec::new();
    let mut head_x = Vec::new();
    let mut head_z = Vec::new();
    for s in eye.iter().filter(|s| s.valid) {
        let t = s.t.0;
        if t < head_first || t > head_last {
            continue;
        }
        let idx = nearest_index(head, t);
        eye_x.push(s.origin.x);
        eye_z.push(s.origin.z);
        head_x.push(head[idx].pos.x);
        head_z.push(head[idx].pos.z);
    }

    let n_pairs = eye_x.len();
    if n_pairs < 3 {
        return SyncReport::undefined(n_pairs);
    }

    let axis = |a: &[f64], b: &[f64]| -> Option<AxisSync> {
        pearson(a, b).ok().map(|(r, p)| AxisSync {
            r,
            p,
            pass: r > SYNC_R_THRESHOLD && p < SYNC_P_THRESHOLD,
        })
    };

    SyncReport {
        defined: true,
        n_pairs,
        x: axis(&eye_x, &head_x),
        z: axis(&eye_z, &head_z),
    }
}

fn nearest_index(head: &[PoseSample], t: f64) -> usize {
    let idx = head.partition_point(|s| s.t.0 < t);
    if idx == 0 {
        return 0;
    }
    if idx >= head.len() {
        return head.len() - 1;
    }
    if (head[idx].t.0 - t).abs() < (t - head[idx - 1].t.0).abs() {
        idx
    } else {
        idx - 1
    }
}

/// Samples a pose stream at arbitrary target times by bracketing
/// interpolation. Targets outside the stream's span hold the boundary
/// sample; this only happens when aligning streams whose recordings start
/// or end a frame apart.
pub fn sample_pose_at(stream: &[PoseSample], targets: &[f64]) -> Result<Vec<PoseSample>> {
    if stream.is_empty() {
        return Err(Error::Domain("cannot sample an empty pose stream".into()));
    }
    let mut out = Vec::with_capacity(targets.len());
    let mut idx = 0usize;
    for &t in targets {
        while idx + 2 < stream.len() && stream[idx + 1].t.0 < t {
            idx += 1;
        }
        let s0 = &stream[idx];
        let s1 = stream.get(idx + 1).unwrap_or(s0);
        let dt = s1.t.0 - s0.t.0;
        let (pos, rot) = if dt <= 0.0 {
            (s0.pos, s0.rot)
        } else {
            let ratio = ((t - s0.t.0) / dt).clamp(0.0, 1.0);
            (
                interp_position(s0.pos, s1.pos, ratio)?,
                slerp(s0.rot, s1.rot, ratio)?,
            )
        };
        out.push(PoseSample {
            t: Timestamp(t),
            pos,
            rot,
            body_part: s0.body_part,
        });
    }
    Ok(out)
}

/// One run after preprocessing: corrected events, pose streams resampled
/// onto a shared nominal-rate timeline, and the eye stream on the motion
/// clock.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessedRun {
    pub ctx: RunContext,
    pub events: Vec<Event>,
    pub correction: CorrectionLog,
    pub head: Vec<PoseSample>,
    pub body: Vec<PoseSample>,
    pub hand: Vec<PoseSample>,
    pub eye: Vec<GazeSample>,
    pub sync: SyncReport,
}

/// Runs the full preprocessing stage on one loaded run:
///
/// 1. issue-table repairs on the event log;
/// 2. head and body resampled to the nominal rate over the position
///    stream's span, hand aligned onto the same timeline;
/// 3. eye timestamps shifted onto the motion clock, then validated
///    against the resampled head stream.
///
/// Excluded or eye-flagged runs are still processed; the flags travel in
/// the correction log so later stages can honor them.
pub fn preprocess_run(
    record: &crate::dataset::RunRecord,
    spec: ResampleSpec,
    issues: &IssueTable,
) -> Result<ProcessedRun> {
    let (events, correction) = apply_issue_corrections(&record.events, &record.ctx, issues);

    let head = resample_pose_stream(&record.head, spec)?;
    let targets: Vec<f64> = head.iter().map(|s| s.t.0).collect();
    let body = sample_pose_at(&record.body, &targets)?;
    let hand = sample_pose_at(&record.hand, &targets)?;

    let (eye, sync) = if record.eye.is_empty() {
        (Vec::new(), SyncReport::undefined(0))
    } else {
        let synced = sync_eye_timestamps(&record.eye, record.head[0].t.0)?;
        let sync = validate_sync(&synced, &head);
        (synced, sync)
    };

    Ok(ProcessedRun {
        ctx: record.ctx.clone(),
        events,
        correction,
        head,
        body,
        hand,
        eye,
        sync,
    })
}

impl ProcessedRun {
    /// Borrowed view for the dataset writer.
    pub fn as_streams(&self) -> crate::dataset::ProcessedStreamsRef<'_> {
        crate::dataset::ProcessedStreamsRef {
            ctx: &self.ctx,
            events: &self.events,
            eye: &self.eye,
            head: &self.head,
            body: &self.body,
            hand: &self.hand,
        }
    }
}

/// Record of what `apply_issue_corrections` changed for one run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CorrectionLog {
    /// Timestamp at which a missing "system end" was appended.
    pub appended_system_end: Option<f64>,
    pub removed_destroys_after_end: usize,
    pub excluded: Option<ExcludeReason>,
    pub eye_data_unusable: bool,
    pub notes: Vec<String>,
}

impl CorrectionLog {
    pub fn is_clean(&self) -> bool {
        self.appended_system_end.is_none()
            && self.removed_destroys_after_end == 0
            && self.excluded.is_none()
            && !self.eye_data_unusable
            && self.notes.is_empty()
    }
}

/// Applies the issue-table repairs that concern one run's event log.
///
/// The operation is idempotent: a repair that already holds (end present,
/// no trailing destroys) leaves the log unchanged.
pub fn apply_issue_corrections(
    events: &[Event],
    ctx: &RunContext,
    issues: &IssueTable,
) -> (Vec<Event>, CorrectionLog) {
    let mut out: Vec<Event> = events.to_vec();
    let mut log = CorrectionLog::default();

    for entry in issues.entries_for(ctx.subject_id, ctx.run_order) {
        match entry.kind {
            IssueKind::MissingSystemEnd => {
                let has_end = out
                    .iter()
                    .any(|e| e.matches(Initiator::System, &Action::End));
                if has_end {
                    log.notes
                        .push("system end already present; no repair needed".into());
                } else if let Some(last_t) = out.last().map(|e| e.t.0) {
                    out.push(Event::new(last_t, Initiator::System, Action::End, "System"));
                    log.appended_system_end = Some(last_t);
                } else {
                    log.notes
                        .push("event log empty; cannot append system end".into());
                }
            }
            IssueKind::DestroyAfterEnd => {
                if let Some(t_end) = out
                    .iter()
                    .find(|e| e.matches(Initiator::System, &Action::End))
                    .map(|e| e.t.0)
                {
                    let before = out.len();
                    out.retain(|e| {
                        !(e.matches(Initiator::User, &Action::Destroy) && e.t.0 > t_end)
                    });
                    log.removed_destroys_after_end = before - out.len();
                } else {
                    log.notes
                        .push("destroy-after-end flagged but no system end found".into());
                }
            }
            IssueKind::SubjectTolerance => {
                log.excluded = Some(ExcludeReason::SubjectTolerance);
            }
            IssueKind::Technical => {
                log.excluded = Some(ExcludeReason::Technical);
            }
            IssueKind::EyeInvalid => {
                log.eye_data_unusable = true;
            }
        }
    }

    (out, log)
}
