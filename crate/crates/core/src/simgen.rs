//! Deterministic synthetic-run generator: a waypoint-following agent with
//! a hard luminance-threshold perception model traverses course geometry
//! and emits dataset-format raw files together with the exact metrics its
//! event log encodes. Generated suites are the end-to-end oracle for the
//! ingest/preprocess/metrics pathway.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::behavior::{in_fov, FovModel};
use crate::dataset::{self, object_table, DatasetRoot, ParseReport, RunRecord};
use crate::error::{Error, Result};
use crate::metrics::RunMetrics;
use crate::model::{
    euler_yxz_to_quaternion, Action, BodyPart, CourseGeometry, CourseId, EulerYxz, Event,
    GazeSample, Initiator, LightLevel, ObjectSpec, PoseSample, QuatRot, RunContext, RunOrder,
    Timestamp, Vec3, Zone,
};
use crate::photometry::{estimated_luminance, ElementKind};
use crate::preprocess::{NOMINAL_EYE_HZ, NOMINAL_POSE_HZ};

/// Seated eye height of the avatar, meters.
const HEAD_HEIGHT_M: f64 = 1.2;
const BODY_HEIGHT_M: f64 = 0.6;
const HAND_HEIGHT_M: f64 = 0.9;

/// Half-angle of the synthetic gaze cone used to emit gaze in/out events.
/// Narrower than any field of view, so gazed objects are always in view.
const GAZE_HALF_ANGLE_DEG: f64 = 10.0;

/// Parameters of the simulated agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentParams {
    /// Constant traversal speed, m/s.
    pub speed_mps: f64,
    pub fov: FovModel,
    /// Objects whose displayed luminance falls below this are never
    /// detected (cd/m²). Zero makes everything detectable.
    pub detect_luminance_threshold: f64,
    /// Touch time required to destroy an object, seconds.
    pub dwell_to_destroy_s: f64,
    /// Delay between first sight and reaching for the object, seconds.
    pub reaction_delay_s: f64,
    /// Time between launch and the first step, seconds.
    pub start_delay_s: f64,
    /// Standard deviation of pose timestamp jitter, seconds. Events are
    /// never jittered, so ground truth stays exact.
    pub timestamp_jitter_sd: f64,
    /// Clock offset of the eye tracker relative to motion data, seconds.
    pub eye_clock_offset_s: f64,
    /// Injected log-noise events, exercising the remaining counters.
    pub n_stops: u32,
    pub n_off_path: u32,
    pub n_collisions: u32,
    pub rng_seed: u64,
}

impl Default for AgentParams {
    fn default() -> Self {
        AgentParams {
            speed_mps: 1.0,
            fov: FovModel::default(),
            detect_luminance_threshold: 0.0,
            dwell_to_destroy_s: 2.0,
            reaction_delay_s: 0.5,
            start_delay_s: 5.0,
            timestamp_jitter_sd: 0.0,
            eye_clock_offset_s: 10.0,
            n_stops: 0,
            n_off_path: 0,
            n_collisions: 0,
            rng_seed: 0,
        }
    }
}

impl AgentParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.speed_mps.is_finite() && self.speed_mps > 0.0) {
            return Err(Error::Domain(format!("speed {} not > 0", self.speed_mps)));
        }
        if self.dwell_to_destroy_s < 0.0
            || self.reaction_delay_s < 0.0
            || self.start_delay_s < 0.0
            || self.timestamp_jitter_sd < 0.0
        {
            return Err(Error::Domain("negative agent timing parameter".into()));
        }
        Ok(())
    }
}

/// The metrics a generated run's event log encodes, by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub metrics: RunMetrics,
    /// (label, destroyed) per course object.
    pub object_flags: Vec<(String, bool)>,
}

// ---------------------------------------------------------------------------
// Path walking
// ---------------------------------------------------------------------------

struct PathWalker {
    points: Vec<(f64, f64)>,
    cumulative: Vec<f64>,
    total: f64,
}

impl PathWalker {
    fn new(points: &[(f64, f64)]) -> Result<PathWalker> {
        if points.len() < 2 {
            return Err(Error::Domain(
                "course path needs at least 2 middle points".into(),
            ));
        }
        let mut cumulative = vec![0.0];
        for w in points.windows(2) {
            let d = ((w[1].0 - w[0].0).powi(2) + (w[1].1 - w[0].1).powi(2)).sqrt();
            cumulative.push(cumulative.last().unwrap() + d);
        }
        let total = *cumulative.last().unwrap();
        if total <= 0.0 {
            return Err(Error::Domain("course path has zero length".into()));
        }
        Ok(PathWalker {
            points: points.to_vec(),
            cumulative,
            total,
        })
    }

    /// Position and tangent yaw (degrees) at an arc length along the path.
    fn at(&self, arc: f64) -> ((f64, f64), f64) {
        let arc = arc.clamp(0.0, self.total);
        let seg = self
            .cumulative
            .partition_point(|&c| c <= arc)
            .clamp(1, self.points.len() - 1);
        let (x0, z0) = self.points[seg - 1];
        let (x1, z1) = self.points[seg];
        let seg_len = self.cumulative[seg] - self.cumulative[seg - 1];
        let f = if seg_len > 0.0 {
            (arc - self.cumulative[seg - 1]) / seg_len
        } else {
            0.0
        };
        let pos = (x0 + f * (x1 - x0), z0 + f * (z1 - z0));
        // Forward is +z at yaw 0; yaw grows toward +x.
        let yaw = (x1 - x0).atan2(z1 - z0).to_degrees();
        (pos, yaw)
    }
}

fn yaw_quat(yaw_deg: f64) -> QuatRot {
    euler_yxz_to_quaternion(EulerYxz::new(yaw_deg, 0.0, 0.0)).expect("finite yaw")
}

fn forward(yaw_deg: f64) -> Vec3 {
    let r = yaw_deg.to_radians();
    Vec3::new(r.sin(), 0.0, r.cos())
}

// ---------------------------------------------------------------------------
// Single-run simulation
// ---------------------------------------------------------------------------

/// Simulates one traversal and returns the raw run streams plus the
/// ground-truth metrics implied by the generator's own decisions.
pub fn simulate_run(
    course: &CourseGeometry,
    level: LightLevel,
    params: &AgentParams,
    ctx: RunContext,
) -> Result<(RunRecord, GroundTruth)> {
    params.validate()?;
    course.validate()?;
    let walker = PathWalker::new(&course.middle_points)?;

    let walk_duration = walker.total / params.speed_mps;
    let t_end = params.start_delay_s + walk_duration;

    // Nominal (un-jittered) head poses drive every perception decision.
    let n_frames = (t_end * NOMINAL_POSE_HZ + 1e-9).floor() as usize + 2;
    let frame_t: Vec<f64> = (0..n_frames).map(|k| k as f64 / NOMINAL_POSE_HZ).collect();
    let head_nominal: Vec<PoseSample> = frame_t
        .iter()
        .map(|&t| {
            let arc = (t - params.start_delay_s).max(0.0) * params.speed_mps;
            let ((x, z), yaw) = walker.at(arc);
            PoseSample {
                t: Timestamp(t),
                pos: Vec3::new(x, HEAD_HEIGHT_M, z),
                rot: yaw_quat(yaw),
                body_part: BodyPart::Head,
            }
        })
        .collect();

    // Perception: luminance gate, then first frame the centroid enters the
    // field of view.
    let mut destroyed: Vec<(f64, String)> = Vec::new();
    let mut object_flags = Vec::with_capacity(course.objects.len());
    for obj in &course.objects {
        let lum = estimated_luminance(ElementKind::for_object_grey(obj.grey)?, level);
        let detectable = lum >= params.detect_luminance_threshold;
        let seen_at = if detectable {
            first_frame_in_fov(&head_nominal, obj, &params.fov)
        } else {
            None
        };
        match seen_at {
            Some(t_seen) => {
                let t_destroy = (t_seen + params.reaction_delay_s + params.dwell_to_destroy_s)
                    .min(t_end - 1e-3);
                destroyed.push((t_destroy, obj.label.clone()));
                object_flags.push((obj.label.clone(), true));
            }
            None => object_flags.push((obj.label.clone(), false)),
        }
    }

    // Event log. Sort rank keeps launch first and end last at equal stamps.
    let mut events: Vec<(f64, u8, Event)> = Vec::new();
    events.push((
        0.0,
        0,
        Event::new(0.0, Initiator::System, Action::Launch, "System"),
    ));
    events.push((
        params.start_delay_s,
        1,
        Event::new(params.start_delay_s, Initiator::User, Action::Start, "Path"),
    ));

    for (slot, obj) in course.objects.iter().enumerate() {
        for (t_in, t_out) in gaze_intervals(&head_nominal, obj, t_end) {
            events.push((
                t_in,
                2,
                Event::new(t_in, Initiator::User, Action::GazeIn, obj.label.clone()),
            ));
            events.push((
                t_out,
                2,
                Event::new(t_out, Initiator::User, Action::GazeOut, obj.label.clone()),
            ));
        }
        let _ = slot;
    }

    let noise_stamp = |i: u32, n: u32, phase: f64| {
        params.start_delay_s + walk_duration * (f64::from(i) + phase) / (f64::from(n) + 1.0)
    };
    for i in 0..params.n_stops {
        let t = noise_stamp(i + 1, params.n_stops, 0.0);
        events.push((t, 3, Event::new(t, Initiator::User, Action::Stop, "Path")));
        let t2 = (t + 0.1).min(t_end - 1e-3);
        events.push((
            t2,
            3,
            Event::new(t2, Initiator::User, Action::Start, "Path"),
        ));
    }
    for i in 0..params.n_off_path {
        let t = noise_stamp(i + 1, params.n_off_path, 0.25);
        events.push((t, 3, Event::new(t, Initiator::User, Action::Exit, "Path")));
    }
    for i in 0..params.n_collisions {
        let t = noise_stamp(i + 1, params.n_collisions, 0.5);
        events.push((
            t,
            3,
            Event::new(t, Initiator::User, Action::Collide, "Wall"),
        ));
    }
    for (t, label) in &destroyed {
        events.push((
            *t,
            4,
            Event::new(*t, Initiator::User, Action::Destroy, label.clone()),
        ));
    }
    events.push((
        t_end,
        5,
        Event::new(t_end, Initiator::System, Action::End, "System"),
    ));
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let events: Vec<Event> = events.into_iter().map(|(_, _, e)| e).collect();

    // Written pose streams: optional stamp jitter, never on events. The
    // position file and the hand file are jittered independently.
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    let position_stamps = jittered(&frame_t, params.timestamp_jitter_sd, &mut rng);
    let hand_stamps = jittered(&frame_t, params.timestamp_jitter_sd, &mut rng);

    let mut head = Vec::with_capacity(n_frames);
    let mut body = Vec::with_capacity(n_frames);
    let mut hand = Vec::with_capacity(n_frames);
    for k in 0..n_frames {
        let arc = (frame_t[k] - params.start_delay_s).max(0.0) * params.speed_mps;
        let ((x, z), yaw) = walker.at(arc);
        let rot = yaw_quat(yaw);
        head.push(PoseSample {
            t: Timestamp(position_stamps[k]),
            pos: Vec3::new(x, HEAD_HEIGHT_M, z),
            rot,
            body_part: BodyPart::Head,
        });
        body.push(PoseSample {
            t: Timestamp(position_stamps[k]),
            pos: Vec3::new(x, BODY_HEIGHT_M, z),
            rot,
            body_part: BodyPart::Body,
        });
        let fwd = forward(yaw);
        hand.push(PoseSample {
            t: Timestamp(hand_stamps[k]),
            pos: Vec3::new(x, HAND_HEIGHT_M, z) + fwd * 0.3,
            rot,
            body_part: BodyPart::Hand,
        });
    }

    // Eye stream on its own clock and rate.
    let n_eye = (t_end * NOMINAL_EYE_HZ + 1e-9).floor() as usize + 1;
    let eye: Vec<GazeSample> = (0..n_eye)
        .map(|j| {
            let t = j as f64 / NOMINAL_EYE_HZ;
            let arc = (t - params.start_delay_s).max(0.0) * params.speed_mps;
            let ((x, z), yaw) = walker.at(arc);
            GazeSample {
                t: Timestamp(t + params.eye_clock_offset_s),
                origin: Vec3::new(x, HEAD_HEIGHT_M + 0.05, z),
                direction: forward(yaw),
                valid: true,
            }
        })
        .collect();

    let truth = GroundTruth {
        metrics: RunMetrics {
            time_duration_s: walk_duration,
            time_before_first_step_s: params.start_delay_s,
            n_off_path: params.n_off_path,
            n_missed_objects: course.objects.len() as u32
                - object_flags.iter().filter(|(_, d)| *d).count() as u32,
            n_collisions: params.n_collisions,
            n_stops: params.n_stops,
        },
        object_flags,
    };

    let record = RunRecord {
        ctx,
        events,
        head,
        body,
        hand,
        eye,
        report: ParseReport::default(),
    };
    Ok((record, truth))
}

fn first_frame_in_fov(head: &[PoseSample], obj: &ObjectSpec, fov: &FovModel) -> Option<f64> {
    head.iter()
        .find(|s| in_fov(s, obj.centroid, fov))
        .map(|s| s.t.0)
}

/// Contiguous frame intervals where the object sits inside the narrow
/// gaze cone, clamped to the run span.
fn gaze_intervals(head: &[PoseSample], obj: &ObjectSpec, t_end: f64) -> Vec<(f64, f64)> {
    let cone = FovModel {
        horizontal_half_angle_deg: GAZE_HALF_ANGLE_DEG,
        vertical_half_angle_deg: GAZE_HALF_ANGLE_DEG,
    };
    let mut intervals = Vec::new();
    let mut open: Option<f64> = None;
    for s in head {
        let inside = s.t.0 < t_end && in_fov(s, obj.centroid, &cone);
        match (inside, open) {
            (true, None) => open = Some(s.t.0),
            (false, Some(t_in)) => {
                intervals.push((t_in, s.t.0.min(t_end)));
                open = None;
            }
            _ => {}
        }
    }
    if let Some(t_in) = open {
        intervals.push((t_in, t_end));
    }
    intervals
}

fn jittered(nominal: &[f64], sd: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    if sd <= 0.0 {
        return nominal.to_vec();
    }
    // Clamped to ±0.4 frames so sample order is always preserved.
    let limit = 0.4 / NOMINAL_POSE_HZ;
    let normal = Normal::new(0.0, sd).expect("finite sd");
    nominal
        .iter()
        .map(|&t| t + normal.sample(rng).clamp(-limit, limit))
        .collect()
}

// ---------------------------------------------------------------------------
// Synthetic course geometry
// ---------------------------------------------------------------------------

/// Width of the synthetic path, meters.
pub const SYNTH_PATH_WIDTH_M: f64 = 2.0;

/// Deterministic course geometry for simulation: a 60 m serpentine with 11
/// turns whose turn pattern varies by course letter, carrying the course's
/// nine reference objects placed along the path.
pub fn synthetic_course(course_id: CourseId) -> CourseGeometry {
    let idx = (course_id.letter() as u8 - b'A') as u32;

    // 12 segments, 11 turns, identical total length for every course.
    let seg_lengths = [6.0, 4.0, 6.0, 4.0, 6.0, 4.0, 6.0, 4.0, 6.0, 4.0, 6.0, 4.0];
    let mut heading: f64 = 0.0; // degrees, 0 = +z
    let mut pos = (0.0, 0.0);
    let mut middle_points = vec![pos];
    for (j, len) in seg_lengths.iter().enumerate() {
        let r = heading.to_radians();
        pos = (pos.0 + len * r.sin(), pos.1 + len * r.cos());
        middle_points.push(pos);
        if j + 1 < seg_lengths.len() {
            // Course-dependent turn pattern.
            let left = !(idx * 7 + j as u32 * 3).is_multiple_of(3);
            heading += if left { 90.0 } else { -90.0 };
        }
    }

    let walker = PathWalker::new(&middle_points).expect("serpentine is a valid path");
    let boundary_endpoints = middle_points
        .iter()
        .map(|&(x, z)| {
            (
                (x - SYNTH_PATH_WIDTH_M / 2.0, z),
                (x + SYNTH_PATH_WIDTH_M / 2.0, z),
            )
        })
        .collect();

    let objects = object_table::course_features(course_id)
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let arc = walker.total * (i as f64 + 1.0) / 10.0;
            let ((x, z), yaw) = walker.at(arc);
            // Lateral offset to the left of the walking direction.
            let r = yaw.to_radians();
            let (lx, lz) = (-r.cos(), r.sin());
            let lateral = match f.horizontal {
                crate::model::HorizontalPos::OnPath => 0.0,
                crate::model::HorizontalPos::Partial => SYNTH_PATH_WIDTH_M / 2.0,
                crate::model::HorizontalPos::OffPath => SYNTH_PATH_WIDTH_M,
            };
            let (height, scale, clearance) = match f.vertical {
                crate::model::VerticalPos::Low => (0.3, 0.3, 0.0),
                crate::model::VerticalPos::Medium => (1.0, 0.8, 0.0),
                crate::model::VerticalPos::High => (2.2, 0.5, 1.8),
            };
            ObjectSpec {
                label: f.label(),
                shape: f.shape,
                grey: f.grey,
                vertical: f.vertical,
                horizontal: f.horizontal,
                centroid: Vec3::new(x + lateral * lx, height, z + lateral * lz),
                scale: Vec3::new(scale, scale, scale),
                ground_clearance: clearance,
            }
        })
        .collect();

    let first = middle_points[0];
    let last = *middle_points.last().unwrap();
    CourseGeometry {
        course_id,
        middle_points,
        boundary_endpoints,
        objects,
        start_zone: Zone {
            center_x: first.0,
            center_z: first.1,
            radius: 0.75,
        },
        end_zone: Zone {
            center_x: last.0,
            center_z: last.1,
            radius: 0.75,
        },
    }
}

// ---------------------------------------------------------------------------
// Suite generation
// ---------------------------------------------------------------------------

/// Configuration of a generated dataset tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub n_runs: usize,
    pub courses: Vec<CourseId>,
    pub levels: Vec<LightLevel>,
    pub base_params: AgentParams,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            n_runs: 50,
            courses: CourseId::evaluation_courses().to_vec(),
            levels: LightLevel::all().to_vec(),
            base_params: AgentParams::default(),
            seed: 0,
        }
    }
}

/// What `generate_suite` produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteManifest {
    pub root: PathBuf,
    pub runs: Vec<(RunContext, GroundTruth)>,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Synthetic subject ids start here, well clear of real participant ids.
pub const SUITE_SUBJECT_BASE: u32 = 900;

/// Generates a dataset tree of `n_runs` simulated runs cycling over the
/// configured courses and levels, plus the ground-truth sidecar
/// (`ground_truth.csv` at the root). Identical configuration and seed
/// produce byte-identical trees.
pub fn generate_suite(root: &Path, config: &SuiteConfig) -> Result<SuiteManifest> {
    if config.n_runs == 0 || config.courses.is_empty() || config.levels.is_empty() {
        return Err(Error::Domain("suite needs runs, courses and levels".into()));
    }
    let dataset = DatasetRoot::new(root);

    let courses: Vec<CourseGeometry> = config
        .courses
        .iter()
        .map(|&id| synthetic_course(id))
        .collect();
    for course in &courses {
        dataset::write_course_meta(&dataset.meta_dir(), course)?;
    }

    let results: Vec<(RunRecord, GroundTruth)> = (0..config.n_runs)
        .into_par_iter()
        .map(|i| {
            let course = &courses[i % courses.len()];
            let level = config.levels[(i / courses.len()) % config.levels.len()];
            let ctx = RunContext {
                subject_id: SUITE_SUBJECT_BASE + (i / 12) as u32 + 1,
                run_order: RunOrder::Evaluation((i % 12) as u8 + 1),
                course_id: course.course_id,
                light_level: level,
                experimenter_notes: String::new(),
            };
            let params = AgentParams {
                rng_seed: splitmix64(config.seed ^ (i as u64)),
                ..config.base_params.clone()
            };
            simulate_run(course, level, &params, ctx)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut sidecar = String::from(
        "subject_id;run_order;course;light_level;time_duration_s;time_before_first_step_s;n_off_path;n_missed_objects;n_collisions;n_stops;destroyed\n",
    );
    let mut contexts = Vec::with_capacity(results.len());
    let mut runs = Vec::with_capacity(results.len());
    for (record, truth) in &results {
        dataset::write_raw_run(&dataset.raw_dir(), record)?;
        let destroyed: Vec<&str> = truth
            .object_flags
            .iter()
            .filter(|(_, d)| *d)
            .map(|(l, _)| l.as_str())
            .collect();
        let m = &truth.metrics;
        sidecar.push_str(&format!(
            "{};{};{};{};{};{};{};{};{};{};{}\n",
            record.ctx.subject_id,
            record.ctx.run_order,
            record.ctx.course_id,
            record.ctx.light_level,
            m.time_duration_s,
            m.time_before_first_step_s,
            m.n_off_path,
            m.n_missed_objects,
            m.n_collisions,
            m.n_stops,
            destroyed.join("|"),
        ));
        contexts.push(record.ctx.clone());
        runs.push((record.ctx.clone(), truth.clone()));
    }
    dataset::write_summary(&dataset.meta_dir(), &contexts)?;
    std::fs::write(root.join("ground_truth.csv"), sidecar)
        .map_err(|e| Error::io(root.join("ground_truth.csv"), e))?;

    Ok(SuiteManifest {
        root: root.to_path_buf(),
        runs,
    })
}

/// Reads a suite's ground-truth sidecar back.
/// One sidecar row: subject, run, metrics and destroyed labels.
pub type GroundTruthRow = (u32, RunOrder, RunMetrics, BTreeSet<String>);

pub fn load_ground_truth(root: &Path) -> Result<Vec<GroundTruthRow>> {
    let path = root.join("ground_truth.csv");
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(';').collect();
        if parts.len() < 11 {
            return Err(Error::parse("ground_truth.csv", i + 1, "short row"));
        }
        let bad = |what: &str| Error::parse("ground_truth.csv", i + 1, format!("bad {what}"));
        out.push((
            parts[0].parse().map_err(|_| bad("subject"))?,
            RunOrder::parse(parts[1]).ok_or_else(|| bad("run order"))?,
            RunMetrics {
                time_duration_s: parts[4].parse().map_err(|_| bad("duration"))?,
                time_before_first_step_s: parts[5].parse().map_err(|_| bad("first step"))?,
                n_off_path: parts[6].parse().map_err(|_| bad("off path"))?,
                n_missed_objects: parts[7].parse().map_err(|_| bad("missed"))?,
                n_collisions: parts[8].parse().map_err(|_| bad("collisions"))?,
                n_stops: parts[9].parse().map_err(|_| bad("stops"))?,
            },
            parts[10]
                .split('|')
                .filter(|s| !s.is_empty())
                .map(str::to_string)
                .collect(),
        ));
    }
    Ok(out)
}

/// Largest luminance any object material reaches at the brightest level.
pub fn max_object_luminance() -> f64 {
    let l6 = LightLevel::new(6).unwrap();
    [ElementKind::Clear, ElementKind::Medium, ElementKind::Dark]
        .into_iter()
        .map(|e| estimated_luminance(e, l6))
        .fold(0.0, f64::max)
}
