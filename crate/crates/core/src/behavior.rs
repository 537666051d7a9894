//! Behavioral indicators around missed objects: gaze-in/gaze-out episodes
//! from the event log, time an object spent inside the head's field of
//! view, and the per-missed-object feature table with its cross-tabulation
//! views.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::OBJECTS_PER_COURSE;
use crate::model::{
    Action, CourseGeometry, Event, HorizontalPos, Initiator, LightLevel, ObjectSpec, PoseSample,
    RunContext, VerticalPos,
};

/// One interval during which the gaze vector stayed inside an object.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GazeEpisode {
    pub t_in: f64,
    pub t_out: f64,
}

impl GazeEpisode {
    pub fn duration_s(&self) -> f64 {
        self.t_out - self.t_in
    }
}

/// What `gaze_episodes` could not pair up.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GazeLog {
    /// "gaze out" records with no open episode; dropped.
    pub orphan_gaze_out: usize,
    /// A trailing "gaze in" was closed at the run end timestamp.
    pub closed_at_end: bool,
}

/// Matched gaze-in/gaze-out episodes for one object label.
///
/// A trailing unmatched "gaze in" is closed at the "system end" timestamp;
/// a "gaze out" without an open episode is dropped and logged.
pub fn gaze_episodes(events: &[Event], object_label: &str) -> (Vec<GazeEpisode>, GazeLog) {
    let mut episodes = Vec::new();
    let mut log = GazeLog::default();
    let mut open: Option<f64> = None;

    for e in events {
        if e.recipient != object_label {
            continue;
        }
        match e.action {
            Action::GazeIn => {
                // A second gaze-in while open is log noise; keep the first.
                if open.is_none() {
                    open = Some(e.t.0);
                }
            }
            Action::GazeOut => match open.take() {
                Some(t_in) => episodes.push(GazeEpisode { t_in, t_out: e.t.0 }),
                None => log.orphan_gaze_out += 1,
            },
            _ => {}
        }
    }

    if let Some(t_in) = open {
        let t_end = events
            .iter()
            .find(|e| e.matches(Initiator::System, &Action::End))
            .map(|e| e.t.0)
            .unwrap_or(t_in);
        episodes.push(GazeEpisode {
            t_in,
            t_out: t_end.max(t_in),
        });
        log.closed_at_end = true;
    }

    (episodes, log)
}

/// Field-of-view cone of the headset, half-angles in degrees.
///
/// The default horizontal half-angle is 47° (94° effective horizontal
/// field of view). Only the horizontal extent was measured for the
/// device; the vertical half-angle defaults to the same value and is
/// configurable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FovModel {
    pub horizontal_half_angle_deg: f64,
    pub vertical_half_angle_deg: f64,
}

impl Default for FovModel {
    fn default() -> Self {
        FovModel {
            horizontal_half_angle_deg: 47.0,
            vertical_half_angle_deg: 47.0,
        }
    }
}

impl FovModel {
    pub fn new(horizontal_half_angle_deg: f64, vertical_half_angle_deg: f64) -> Result<FovModel> {
        for v in [horizontal_half_angle_deg, vertical_half_angle_deg] {
            if !(0.0..90.0).contains(&v) || v == 0.0 {
                return Err(Error::Domain(format!("half-angle {v}° outside (0, 90)")));
            }
        }
        Ok(FovModel {
            horizontal_half_angle_deg,
            vertical_half_angle_deg,
        })
    }

    /// Whether a head-local direction lies inside the cone. The boundary
    /// is inclusive, with a 1e-9° slack so analytically-exact boundary
    /// bearings are not lost to rounding.
    pub fn contains_local(&self, local: crate::model::Vec3) -> bool {
        let horizontal = local.x.atan2(local.z).to_degrees().abs();
        let elevation = local
            .y
            .atan2((local.x * local.x + local.z * local.z).sqrt())
            .to_degrees()
            .abs();
        horizontal <= self.horizontal_half_angle_deg + 1e-9
            && elevation <= self.vertical_half_angle_deg + 1e-9
    }
}

/// Whether an object's centroid is inside the field of view at one pose.
pub fn in_fov(head: &PoseSample, obj_centroid: crate::model::Vec3, fov: &FovModel) -> bool {
    let world = obj_centroid - head.pos;
    if world.norm() == 0.0 {
        return true;
    }
    // Head-local direction via the inverse head rotation.
    let local = head.rot.conjugate().rotate_vector(world);
    fov.contains_local(local)
}

/// Total time an object's centroid direction stayed within the cone over
/// a resampled head stream.
///
/// Each sample covers the interval to the next one, so a full-run dwell
/// equals the stream's time span exactly.
pub fn in_fov_duration(head_stream: &[PoseSample], obj: &ObjectSpec, fov: &FovModel) -> f64 {
    let mut total = 0.0;
    for pair in head_stream.windows(2) {
        if in_fov(&pair[0], obj.centroid, fov) {
            total += pair[1].t.0 - pair[0].t.0;
        }
    }
    total
}

/// One missed object with its features and behavioral indicators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissedObjectRow {
    pub subject_id: u32,
    pub run_order: String,
    pub course: char,
    pub light_level: LightLevel,
    pub object_label: String,
    pub grey: u8,
    pub vertical: VerticalPos,
    pub horizontal: HorizontalPos,
    pub n_gazes: u32,
    pub gaze_duration_s: f64,
    pub in_fov_duration_s: f64,
}

/// Inputs for one run's contribution to the missed-object table.
pub struct RunBehaviorInput<'a> {
    pub ctx: &'a RunContext,
    pub events: &'a [Event],
    /// Resampled head stream; pass an empty slice when motion data is
    /// unusable (in-FOV duration then reports 0).
    pub head_stream: &'a [PoseSample],
}

/// Builds the missed-object rows for a set of runs.
///
/// One row per (run, undestroyed object); rows are sorted by subject, run
/// order and object label so parallel callers get a deterministic table.
pub fn missed_object_table(
    runs: &[RunBehaviorInput<'_>],
    course_meta: &BTreeMap<char, CourseGeometry>,
    fov: &FovModel,
) -> Result<Vec<MissedObjectRow>> {
    let mut rows = Vec::new();
    for run in runs {
        let course_letter = run.ctx.course_id.letter();
        let geometry = course_meta.get(&course_letter).ok_or_else(|| {
            Error::Domain(format!("no course metadata for course {course_letter}"))
        })?;

        // Destroyed labels must exist in the metadata; anything else means
        // events and metadata disagree.
        let mut destroyed = Vec::new();
        for e in run
            .events
            .iter()
            .filter(|e| e.matches(Initiator::User, &Action::Destroy))
        {
            if geometry.object(&e.recipient).is_none() {
                return Err(Error::Domain(format!(
                    "destroy event references unknown object '{}' on course {course_letter}",
                    e.recipient
                )));
            }
            destroyed.push(e.recipient.as_str());
        }

        for obj in &geometry.objects {
            if destroyed.contains(&obj.label.as_str()) {
                continue;
            }
            let (episodes, _) = gaze_episodes(run.events, &obj.label);
            let gaze_duration_s = episodes.iter().map(GazeEpisode::duration_s).sum();
            rows.push(MissedObjectRow {
                subject_id: run.ctx.subject_id,
                run_order: run.ctx.run_order.to_string(),
                course: course_letter,
                light_level: run.ctx.light_level,
                object_label: obj.label.clone(),
                grey: obj.grey,
                vertical: obj.vertical,
                horizontal: obj.horizontal,
                n_gazes: episodes.len() as u32,
                gaze_duration_s,
                in_fov_duration_s: in_fov_duration(run.head_stream, obj, fov),
            });
        }
    }
    rows.sort_by(|a, b| {
        (a.subject_id, &a.run_order, &a.object_label).cmp(&(
            b.subject_id,
            &b.run_order,
            &b.object_label,
        ))
    });
    Ok(rows)
}

/// The six published cross-tabulation views of the missed-object table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossTabView {
    GreyByLight,
    GazesByLight,
    GazesByGrey,
    VerticalByHorizontal,
    GreyByVertical,
    GreyByHorizontal,
}

impl CrossTabView {
    pub const ALL: [CrossTabView; 6] = [
        CrossTabView::GreyByLight,
        CrossTabView::GazesByLight,
        CrossTabView::GazesByGrey,
        CrossTabView::VerticalByHorizontal,
        CrossTabView::GreyByVertical,
        CrossTabView::GreyByHorizontal,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CrossTabView::GreyByLight => "grey_by_light",
            CrossTabView::GazesByLight => "gazes_by_light",
            CrossTabView::GazesByGrey => "gazes_by_grey",
            CrossTabView::VerticalByHorizontal => "vertical_by_horizontal",
            CrossTabView::GreyByVertical => "grey_by_vertical",
            CrossTabView::GreyByHorizontal => "grey_by_horizontal",
        }
    }

    fn keys(self, row: &MissedObjectRow) -> (String, String) {
        let grey = || row.grey.to_string();
        let light = || row.light_level.to_string();
        let gazes = || row.n_gazes.to_string();
        match self {
            CrossTabView::GreyByLight => (grey(), light()),
            CrossTabView::GazesByLight => (gazes(), light()),
            CrossTabView::GazesByGrey => (gazes(), grey()),
            CrossTabView::VerticalByHorizontal => (
                row.vertical.as_str().to_string(),
                row.horizontal.as_str().to_string(),
            ),
            CrossTabView::GreyByVertical => (grey(), row.vertical.as_str().to_string()),
            CrossTabView::GreyByHorizontal => (grey(), row.horizontal.as_str().to_string()),
        }
    }
}

/// Missed-object counts keyed by (row value, column value).
pub fn cross_tab(rows: &[MissedObjectRow], view: CrossTabView) -> BTreeMap<(String, String), u32> {
    let mut counts = BTreeMap::new();
    for row in rows {
        *counts.entry(view.keys(row)).or_insert(0) += 1;
    }
    counts
}

/// Sanity bound: a run can contribute at most the course's object count.
pub fn max_rows_per_run() -> u32 {
    OBJECTS_PER_COURSE
}
