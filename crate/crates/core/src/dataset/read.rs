//! Readers for the on-disk layout: course metadata, run summaries, raw
//! stream files and the processed files written back by the pipeline.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{
    euler_yxz_to_quaternion, BodyPart, CourseGeometry, CourseId, EulerYxz, Event, GazeSample,
    HorizontalPos, Initiator, LightLevel, ObjectSpec, PoseSample, QuatRot, RunContext, RunOrder,
    Shape, Timestamp, Vec3, VerticalPos, Zone,
};

use super::object_table;
use super::schema::{detect_delimiter, ColumnSchema};
use super::{ParseReport, RunRecord};

/// Default radius of the derived start/end zones, meters.
pub const ZONE_RADIUS_M: f64 = 0.75;

fn read_to_string(path: &Path) -> Result<String> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Data lines of a file with their 1-based line numbers, header rows and
/// blank lines skipped.
fn data_lines(text: &str, header_rows: usize) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .skip(header_rows)
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty())
}

fn parse_f64(name: &str, line_no: usize, field: &str) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::parse(name, line_no, format!("bad number '{}'", field.trim())))
}

fn field<'a>(name: &str, line_no: usize, parts: &'a [&'a str], idx: usize) -> Result<&'a str> {
    parts.get(idx).copied().ok_or_else(|| {
        Error::parse(
            name,
            line_no,
            format!("column {idx} missing ({} columns present)", parts.len()),
        )
    })
}

fn vec3_at(name: &str, line_no: usize, parts: &[&str], idx: [usize; 3]) -> Result<Vec3> {
    Ok(Vec3::new(
        parse_f64(name, line_no, field(name, line_no, parts, idx[0])?)?,
        parse_f64(name, line_no, field(name, line_no, parts, idx[1])?)?,
        parse_f64(name, line_no, field(name, line_no, parts, idx[2])?)?,
    ))
}

fn euler_at(name: &str, line_no: usize, parts: &[&str], idx: [usize; 3]) -> Result<QuatRot> {
    // Column order is the engine's x,y,z angle components:
    // x = pitch, y = yaw, z = roll.
    let pitch = parse_f64(name, line_no, field(name, line_no, parts, idx[0])?)?;
    let yaw = parse_f64(name, line_no, field(name, line_no, parts, idx[1])?)?;
    let roll = parse_f64(name, line_no, field(name, line_no, parts, idx[2])?)?;
    euler_yxz_to_quaternion(EulerYxz::new(yaw, pitch, roll))
        .map_err(|e| Error::parse(name, line_no, e.to_string()))
}

// ---------------------------------------------------------------------------
// Course metadata
// ---------------------------------------------------------------------------

/// Loads one course's geometry from the metadata directory and
/// cross-checks the object features against the embedded reference table.
pub fn load_course_meta(meta_dir: &Path, course_id: CourseId) -> Result<CourseGeometry> {
    let letter = course_id.letter();
    let course_path = meta_dir.join(format!("Course {letter}.csv"));
    let text = read_to_string(&course_path)?;
    let name = file_name(&course_path);

    let mut objects = Vec::new();
    let mut saw_data = false;
    for (line_no, line) in data_lines(&text, 1) {
        saw_data = true;
        let delim = detect_delimiter(line, None);
        let parts: Vec<&str> = line.split(delim).map(str::trim).collect();
        let label = field(&name, line_no, &parts, 0)?.to_string();
        let shape = Shape::parse(field(&name, line_no, &parts, 1)?)
            .ok_or_else(|| Error::parse(&name, line_no, "bad shape"))?;
        let grey: u8 = field(&name, line_no, &parts, 2)?
            .parse()
            .map_err(|_| Error::parse(&name, line_no, "bad grey value"))?;
        let vertical = VerticalPos::parse(field(&name, line_no, &parts, 3)?)
            .ok_or_else(|| Error::parse(&name, line_no, "bad vertical position"))?;
        let horizontal = HorizontalPos::parse(field(&name, line_no, &parts, 4)?)
            .ok_or_else(|| Error::parse(&name, line_no, "bad horizontal position"))?;
        let centroid = vec3_at(&name, line_no, &parts, [5, 6, 7])?;
        let scale = vec3_at(&name, line_no, &parts, [8, 9, 10])?;
        let ground_clearance = parse_f64(&name, line_no, field(&name, line_no, &parts, 11)?)?;

        if course_id.is_evaluation() {
            object_table::cross_check(&label, grey, vertical, horizontal)
                .map_err(|e| Error::parse(&name, line_no, e.to_string()))?;
        }
        objects.push(ObjectSpec {
            label,
            shape,
            grey,
            vertical,
            horizontal,
            centroid,
            scale,
            ground_clearance,
        });
    }
    if !saw_data {
        return Err(Error::parse(&name, 1, "file contains no object rows"));
    }

    let middle_points = load_point_pairs(&meta_dir.join(format!("middle_points_{letter}.txt")))?;
    let boundary_endpoints =
        load_endpoint_pairs(&meta_dir.join(format!("endpoints_{letter}.txt")))?;

    let first = middle_points.first().copied().unwrap_or((0.0, 0.0));
    let last = middle_points.last().copied().unwrap_or(first);
    let geometry = CourseGeometry {
        course_id,
        middle_points,
        boundary_endpoints,
        objects,
        start_zone: Zone {
            center_x: first.0,
            center_z: first.1,
            radius: ZONE_RADIUS_M,
        },
        end_zone: Zone {
            center_x: last.0,
            center_z: last.1,
            radius: ZONE_RADIUS_M,
        },
    };
    geometry.validate()?;
    Ok(geometry)
}

fn split_numbers(line: &str) -> Vec<&str> {
    line.split([';', '\t', ',', ' '])
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect()
}

/// (x, z) rows of a point file.
fn load_point_pairs(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = read_to_string(path)?;
    let name = file_name(path);
    let mut out = Vec::new();
    for (line_no, line) in data_lines(&text, 0) {
        let parts = split_numbers(line);
        if parts.len() < 2 {
            return Err(Error::parse(&name, line_no, "expected x and z"));
        }
        out.push((
            parse_f64(&name, line_no, parts[0])?,
            parse_f64(&name, line_no, parts[1])?,
        ));
    }
    Ok(out)
}

/// One boundary segment: ((x1, z1), (x2, z2)).
type EndpointPair = ((f64, f64), (f64, f64));

/// Rows of the boundary endpoints file.
fn load_endpoint_pairs(path: &Path) -> Result<Vec<EndpointPair>> {
    let text = read_to_string(path)?;
    let name = file_name(path);
    let mut out = Vec::new();
    for (line_no, line) in data_lines(&text, 0) {
        let parts = split_numbers(line);
        if parts.len() < 4 {
            return Err(Error::parse(&name, line_no, "expected x1 z1 x2 z2"));
        }
        out.push((
            (
                parse_f64(&name, line_no, parts[0])?,
                parse_f64(&name, line_no, parts[1])?,
            ),
            (
                parse_f64(&name, line_no, parts[2])?,
                parse_f64(&name, line_no, parts[3])?,
            ),
        ));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Run summary
// ---------------------------------------------------------------------------

/// Loads the run summary (delimited-text export), one context per run.
/// Duplicate (subject, run order) pairs are a hard error.
pub fn load_results_summary(meta_dir: &Path) -> Result<Vec<RunContext>> {
    let path = meta_dir.join("Result_H.txt");
    let text = read_to_string(&path)?;
    let name = file_name(&path);

    let mut seen: BTreeMap<(u32, String), usize> = BTreeMap::new();
    let mut out = Vec::new();
    for (line_no, line) in data_lines(&text, 1) {
        let delim = detect_delimiter(line, None);
        let parts: Vec<&str> = line.splitn(5, delim).map(str::trim).collect();
        let subject_id: u32 = field(&name, line_no, &parts, 0)?
            .parse()
            .map_err(|_| Error::parse(&name, line_no, "bad subject id"))?;
        let run_order = RunOrder::parse(field(&name, line_no, &parts, 1)?)
            .ok_or_else(|| Error::parse(&name, line_no, "bad run order"))?;
        let course_id = CourseId::parse(field(&name, line_no, &parts, 2)?)
            .ok_or_else(|| Error::parse(&name, line_no, "bad course id"))?;
        let level: u8 = field(&name, line_no, &parts, 3)?
            .trim_start_matches(['L', 'l'])
            .parse()
            .map_err(|_| Error::parse(&name, line_no, "bad light level"))?;
        let light_level =
            LightLevel::new(level).map_err(|e| Error::parse(&name, line_no, e.to_string()))?;
        let experimenter_notes = parts.get(4).unwrap_or(&"").to_string();

        let key = (subject_id, run_order.to_string());
        if let Some(prev) = seen.insert(key, line_no) {
            return Err(Error::parse(
                &name,
                line_no,
                format!("duplicate run {subject_id}-{run_order} (first seen line {prev})"),
            ));
        }
        out.push(RunContext {
            subject_id,
            run_order,
            course_id,
            light_level,
            experimenter_notes,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Raw run streams
// ---------------------------------------------------------------------------

fn parse_run_information(path: &Path) -> Result<RunContext> {
    let text = read_to_string(path)?;
    let name = file_name(path);
    let mut kv: BTreeMap<String, String> = BTreeMap::new();
    for (_, line) in data_lines(&text, 0) {
        if let Some((k, v)) = line.split_once(':') {
            kv.insert(k.trim().to_ascii_lowercase(), v.trim().to_string());
        }
    }
    let get = |key: &str| -> Result<&String> {
        kv.get(key)
            .ok_or_else(|| Error::parse(&name, 1, format!("missing '{key}' entry")))
    };
    let subject_id: u32 = get("subject_id")?
        .parse()
        .map_err(|_| Error::parse(&name, 1, "bad subject_id"))?;
    let run_order = RunOrder::parse(get("run_order")?)
        .ok_or_else(|| Error::parse(&name, 1, "bad run_order"))?;
    let course_id =
        CourseId::parse(get("course")?).ok_or_else(|| Error::parse(&name, 1, "bad course"))?;
    let level: u8 = get("light_level")?
        .trim_start_matches(['L', 'l'])
        .parse()
        .map_err(|_| Error::parse(&name, 1, "bad light_level"))?;
    Ok(RunContext {
        subject_id,
        run_order,
        course_id,
        light_level: LightLevel::new(level).map_err(|e| Error::parse(&name, 1, e.to_string()))?,
        experimenter_notes: kv.get("notes").cloned().unwrap_or_default(),
    })
}

/// Parses an interaction log.
pub fn parse_events(
    path: &Path,
    schema: &ColumnSchema,
    report: &mut ParseReport,
) -> Result<Vec<Event>> {
    let text = read_to_string(path)?;
    let name = file_name(path);
    let cols = &schema.events;
    let mut out = Vec::new();
    for (line_no, line) in data_lines(&text, schema.header_rows) {
        let delim = detect_delimiter(line, schema.delimiter);
        // The trailing info field may contain the delimiter; keep it whole.
        let max_idx = [
            cols.t,
            cols.initiator,
            cols.action,
            cols.recipient,
            cols.info,
        ]
        .into_iter()
        .max()
        .unwrap();
        let parts: Vec<&str> = line.splitn(max_idx + 1, delim).map(str::trim).collect();
        let t = parse_f64(&name, line_no, field(&name, line_no, &parts, cols.t)?)?;
        let initiator = Initiator::parse(field(&name, line_no, &parts, cols.initiator)?)
            .ok_or_else(|| Error::parse(&name, line_no, "bad initiator"))?;
        let action = crate::model::Action::parse(field(&name, line_no, &parts, cols.action)?);
        if !action.is_known() {
            report.unknown_actions += 1;
        }
        let recipient = field(&name, line_no, &parts, cols.recipient)?.to_string();
        let info = parts.get(cols.info).unwrap_or(&"").to_string();
        out.push(Event {
            t: Timestamp(t),
            initiator,
            action,
            recipient,
            info,
        });
    }
    sort_checked(&mut out, |e| e.t.0, &name, report);
    Ok(out)
}

/// Stable-sorts a stream if needed, recording a warning.
fn sort_checked<T>(items: &mut [T], key: impl Fn(&T) -> f64, name: &str, report: &mut ParseReport) {
    if items.windows(2).any(|w| key(&w[1]) < key(&w[0])) {
        report.warnings.push(format!(
            "{name}: non-monotonic timestamps; applied stable sort"
        ));
        items.sort_by(|a, b| key(a).total_cmp(&key(b)));
    }
}

fn parse_position_file(
    path: &Path,
    schema: &ColumnSchema,
    report: &mut ParseReport,
) -> Result<(Vec<PoseSample>, Vec<PoseSample>)> {
    let text = read_to_string(path)?;
    let name = file_name(path);
    let cols = &schema.position;
    let mut head = Vec::new();
    let mut body = Vec::new();
    for (line_no, line) in data_lines(&text, schema.header_rows) {
        let delim = detect_delimiter(line, schema.delimiter);
        let parts: Vec<&str> = line.split(delim).map(str::trim).collect();
        let t = Timestamp(parse_f64(
            &name,
            line_no,
            field(&name, line_no, &parts, cols.t)?,
        )?);
        head.push(PoseSample {
            t,
            pos: vec3_at(&name, line_no, &parts, cols.head_pos)?,
            rot: euler_at(&name, line_no, &parts, cols.head_rot)?,
            body_part: BodyPart::Head,
        });
        body.push(PoseSample {
            t,
            pos: vec3_at(&name, line_no, &parts, cols.body_pos)?,
            rot: euler_at(&name, line_no, &parts, cols.body_rot)?,
            body_part: BodyPart::Body,
        });
    }
    sort_checked(&mut head, |s| s.t.0, &name, report);
    sort_checked(&mut body, |s| s.t.0, &name, report);
    Ok((head, body))
}

fn parse_hand_file(
    path: &Path,
    schema: &ColumnSchema,
    report: &mut ParseReport,
) -> Result<Vec<PoseSample>> {
    let text = read_to_string(path)?;
    let name = file_name(path);
    let cols = &schema.hand;
    let mut out = Vec::new();
    for (line_no, line) in data_lines(&text, schema.header_rows) {
        let delim = detect_delimiter(line, schema.delimiter);
        let parts: Vec<&str> = line.split(delim).map(str::trim).collect();
        out.push(PoseSample {
            t: Timestamp(parse_f64(
                &name,
                line_no,
                field(&name, line_no, &parts, cols.t)?,
            )?),
            pos: vec3_at(&name, line_no, &parts, cols.pos)?,
            rot: euler_at(&name, line_no, &parts, cols.rot)?,
            body_part: BodyPart::Hand,
        });
    }
    sort_checked(&mut out, |s| s.t.0, &name, report);
    Ok(out)
}

fn parse_bool(name: &str, line_no: usize, s: &str) -> Result<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" => Ok(true),
        "0" | "false" | "no" => Ok(false),
        other => Err(Error::parse(
            name,
            line_no,
            format!("bad boolean '{other}'"),
        )),
    }
}

fn parse_eye_file(
    path: &Path,
    schema: &ColumnSchema,
    report: &mut ParseReport,
) -> Result<Vec<GazeSample>> {
    let text = read_to_string(path)?;
    let name = file_name(path);
    let cols = &schema.eye;
    let mut out = Vec::new();
    for (line_no, line) in data_lines(&text, schema.header_rows) {
        let delim = detect_delimiter(line, schema.delimiter);
        let parts: Vec<&str> = line.split(delim).map(str::trim).collect();
        let t = Timestamp(parse_f64(
            &name,
            line_no,
            field(&name, line_no, &parts, cols.t)?,
        )?);
        let origin = vec3_at(&name, line_no, &parts, cols.origin)?;
        let raw_dir = vec3_at(&name, line_no, &parts, cols.direction)?;
        let mut valid = parse_bool(&name, line_no, field(&name, line_no, &parts, cols.valid)?)?;
        let direction = match raw_dir.normalized() {
            Ok(unit) => unit,
            Err(_) => {
                if valid {
                    report.warnings.push(format!(
                        "{name}:{line_no}: zero gaze direction; marked invalid"
                    ));
                    valid = false;
                }
                Vec3::new(0.0, 0.0, 1.0)
            }
        };
        out.push(GazeSample {
            t,
            origin,
            direction,
            valid,
        });
    }
    sort_checked(&mut out, |s| s.t.0, &name, report);
    Ok(out)
}

/// Loads the four raw stream files plus the run-information sidecar of one
/// run directory.
pub fn load_run(
    raw_dir: &Path,
    subject_id: u32,
    run_order: RunOrder,
    schema: &ColumnSchema,
) -> Result<RunRecord> {
    schema.validate()?;
    let dir = raw_dir
        .join(subject_id.to_string())
        .join(run_order.to_string());
    if !dir.is_dir() {
        return Err(Error::MissingFile(dir));
    }
    let mut report = ParseReport::default();
    let ctx = parse_run_information(&dir.join("Run_Information.txt"))?;
    if ctx.subject_id != subject_id || ctx.run_order != run_order {
        return Err(Error::Run {
            subject: subject_id,
            run: run_order.to_string(),
            msg: format!(
                "run information disagrees with directory: {}-{}",
                ctx.subject_id, ctx.run_order
            ),
        });
    }
    let events = parse_events(&dir.join("Events.txt"), schema, &mut report)?;
    let (head, body) = parse_position_file(&dir.join("Position_Data.txt"), schema, &mut report)?;
    let hand = parse_hand_file(&dir.join("Hand_Data.txt"), schema, &mut report)?;
    let eye = parse_eye_file(&dir.join("RawEye_Data.txt"), schema, &mut report)?;
    Ok(RunRecord {
        ctx,
        events,
        head,
        body,
        hand,
        eye,
        report,
    })
}

/// Loads a missed-object summary written in this crate's canonical
/// `missed_obj_info.txt` layout.
pub fn load_missed_obj_info(path: &Path) -> Result<Vec<crate::behavior::MissedObjectRow>> {
    let text = read_to_string(path)?;
    let name = file_name(path);
    let mut out = Vec::new();
    for (line_no, line) in data_lines(&text, 1) {
        let delim = detect_delimiter(line, None);
        let parts: Vec<&str> = line.split(delim).map(str::trim).collect();
        if parts.len() < 11 {
            return Err(Error::parse(&name, line_no, "expected 11 columns"));
        }
        let level: u8 = parts[3]
            .trim_start_matches(['L', 'l'])
            .parse()
            .map_err(|_| Error::parse(&name, line_no, "bad light level"))?;
        out.push(crate::behavior::MissedObjectRow {
            subject_id: parts[0]
                .parse()
                .map_err(|_| Error::parse(&name, line_no, "bad subject id"))?,
            run_order: parts[1].to_string(),
            course: parts[2]
                .chars()
                .next()
                .ok_or_else(|| Error::parse(&name, line_no, "bad course"))?,
            light_level: LightLevel::new(level)
                .map_err(|e| Error::parse(&name, line_no, e.to_string()))?,
            object_label: parts[4].to_string(),
            grey: parts[5]
                .parse()
                .map_err(|_| Error::parse(&name, line_no, "bad grey"))?,
            vertical: VerticalPos::parse(parts[6])
                .ok_or_else(|| Error::parse(&name, line_no, "bad vertical"))?,
            horizontal: HorizontalPos::parse(parts[7])
                .ok_or_else(|| Error::parse(&name, line_no, "bad horizontal"))?,
            n_gazes: parts[8]
                .parse()
                .map_err(|_| Error::parse(&name, line_no, "bad gaze count"))?,
            gaze_duration_s: parse_f64(&name, line_no, parts[9])?,
            in_fov_duration_s: parse_f64(&name, line_no, parts[10])?,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Questionnaire responses
// ---------------------------------------------------------------------------

/// One questionnaire administration: subject, phase ("mid" or "end") and
/// the 16 ratings.
pub type SsqRow = (u32, String, crate::stats::SsqResponse);

/// Loads questionnaire responses from a delimited file with header
/// `subject_id;phase;i1;...;i16`.
pub fn load_ssq_responses(path: &Path) -> Result<Vec<SsqRow>> {
    let text = read_to_string(path)?;
    let name = file_name(path);
    let mut out = Vec::new();
    for (line_no, line) in data_lines(&text, 1) {
        let delim = detect_delimiter(line, None);
        let parts: Vec<&str> = line.split(delim).map(str::trim).collect();
        if parts.len() < 18 {
            return Err(Error::parse(
                &name,
                line_no,
                format!("expected 18 columns, found {}", parts.len()),
            ));
        }
        let subject: u32 = parts[0]
            .parse()
            .map_err(|_| Error::parse(&name, line_no, "bad subject id"))?;
        let phase = parts[1].to_ascii_lowercase();
        let mut ratings = [0u8; crate::stats::SSQ_ITEMS];
        for (i, slot) in ratings.iter_mut().enumerate() {
            *slot = parts[2 + i]
                .parse()
                .map_err(|_| Error::parse(&name, line_no, format!("bad rating {}", i + 1)))?;
        }
        let resp = crate::stats::SsqResponse::new(ratings, crate::stats::SsqMapping::disjoint())
            .map_err(|e| Error::parse(&name, line_no, e.to_string()))?;
        out.push((subject, phase, resp));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Processed files (round-trip)
// ---------------------------------------------------------------------------

/// Streams read back from a processed run directory. Pose rotations are
/// stored as quaternion components, so the round trip is value-exact.
pub struct ProcessedStreams {
    pub events: Vec<Event>,
    pub eye: Vec<GazeSample>,
    pub head: Vec<PoseSample>,
    pub body: Vec<PoseSample>,
    pub hand: Vec<PoseSample>,
}

pub fn read_processed_run(
    processed_dir: &Path,
    subject_id: u32,
    run_order: RunOrder,
) -> Result<ProcessedStreams> {
    let dir = processed_dir
        .join(subject_id.to_string())
        .join(run_order.to_string());
    let schema = ColumnSchema::default();
    let mut report = ParseReport::default();
    let events = parse_events(&dir.join("CorrectedEvents.txt"), &schema, &mut report)?;
    let eye = parse_eye_file(&dir.join("CorrectedEye_Data.txt"), &schema, &mut report)?;

    let path = dir.join("InterpolatedPosition_Data.txt");
    let text = read_to_string(&path)?;
    let name = file_name(&path);
    let mut head = Vec::new();
    let mut body = Vec::new();
    let mut hand = Vec::new();
    for (line_no, line) in data_lines(&text, 1) {
        let delim = detect_delimiter(line, None);
        let parts: Vec<&str> = line.split(delim).map(str::trim).collect();
        if parts.len() < 22 {
            return Err(Error::parse(&name, line_no, "expected 22 columns"));
        }
        let t = Timestamp(parse_f64(&name, line_no, parts[0])?);
        let read_part = |base: usize, body_part: BodyPart| -> Result<PoseSample> {
            let pos = vec3_at(&name, line_no, &parts, [base, base + 1, base + 2])?;
            let q = QuatRot::new(
                parse_f64(&name, line_no, parts[base + 3])?,
                parse_f64(&name, line_no, parts[base + 4])?,
                parse_f64(&name, line_no, parts[base + 5])?,
                parse_f64(&name, line_no, parts[base + 6])?,
            )
            .map_err(|e| Error::parse(&name, line_no, e.to_string()))?;
            Ok(PoseSample {
                t,
                pos,
                rot: q,
                body_part,
            })
        };
        head.push(read_part(1, BodyPart::Head)?);
        body.push(read_part(8, BodyPart::Body)?);
        hand.push(read_part(15, BodyPart::Hand)?);
    }
    Ok(ProcessedStreams {
        events,
        eye,
        head,
        body,
        hand,
    })
}
