//! Writers for the on-disk layout. Floats are printed with Rust's shortest
//! round-trip formatting, so re-reading a written file reproduces the
//! in-memory values exactly.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::model::{
    quaternion_to_euler_yxz, CourseGeometry, Event, GazeSample, PoseSample, RunContext,
};

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(content.as_bytes())
        .map_err(|e| Error::io(path, e))
}

fn euler_cols(s: &PoseSample) -> (f64, f64, f64) {
    let e = quaternion_to_euler_yxz(s.rot);
    // Raw files store the engine's x,y,z angle components.
    (e.pitch_x, e.yaw_y, e.roll_z)
}

// ---------------------------------------------------------------------------
// Metadata
// ---------------------------------------------------------------------------

/// Writes `Course {X}.csv`, `middle_points_{X}.txt` and `endpoints_{X}.txt`
/// for one course.
pub fn write_course_meta(meta_dir: &Path, course: &CourseGeometry) -> Result<()> {
    create_dir(meta_dir)?;
    let letter = course.course_id.letter();

    let mut csv = String::from(
        "label;shape;grey;vertical;horizontal;centroid_x;centroid_y;centroid_z;scale_x;scale_y;scale_z;ground_clearance\n",
    );
    for o in &course.objects {
        csv.push_str(&format!(
            "{};{};{};{};{};{};{};{};{};{};{};{}\n",
            o.label,
            o.shape.as_str(),
            o.grey,
            o.vertical.as_str(),
            o.horizontal.as_str(),
            o.centroid.x,
            o.centroid.y,
            o.centroid.z,
            o.scale.x,
            o.scale.y,
            o.scale.z,
            o.ground_clearance,
        ));
    }
    write_file(&meta_dir.join(format!("Course {letter}.csv")), &csv)?;

    let mut mp = String::new();
    for (x, z) in &course.middle_points {
        mp.push_str(&format!("{x};{z}\n"));
    }
    write_file(&meta_dir.join(format!("middle_points_{letter}.txt")), &mp)?;

    let mut ep = String::new();
    for ((x1, z1), (x2, z2)) in &course.boundary_endpoints {
        ep.push_str(&format!("{x1};{z1};{x2};{z2}\n"));
    }
    write_file(&meta_dir.join(format!("endpoints_{letter}.txt")), &ep)?;
    Ok(())
}

/// Writes the run summary file.
pub fn write_summary(meta_dir: &Path, runs: &[RunContext]) -> Result<()> {
    create_dir(meta_dir)?;
    let mut text = String::from("subject_id;run_order;course;light_level;notes\n");
    for r in runs {
        text.push_str(&format!(
            "{};{};{};{};{}\n",
            r.subject_id, r.run_order, r.course_id, r.light_level, r.experimenter_notes
        ));
    }
    write_file(&meta_dir.join("Result_H.txt"), &text)
}

/// Writes the missed-object summary in the dataset's `missed_obj_info.txt`
/// role: one row per (run, missed object) with features and gaze
/// indicators.
pub fn write_missed_obj_info(
    dir: &Path,
    rows: &[crate::behavior::MissedObjectRow],
) -> Result<PathBuf> {
    create_dir(dir)?;
    let mut text = String::from(
        "subject_id;run_order;course;light_level;object_label;grey;vertical;horizontal;n_gazes;gaze_duration_s;in_fov_duration_s\n",
    );
    for r in rows {
        text.push_str(&format!(
            "{};{};{};{};{};{};{};{};{};{};{}\n",
            r.subject_id,
            r.run_order,
            r.course,
            r.light_level,
            r.object_label,
            r.grey,
            r.vertical.as_str(),
            r.horizontal.as_str(),
            r.n_gazes,
            r.gaze_duration_s,
            r.in_fov_duration_s,
        ));
    }
    let path = dir.join("missed_obj_info.txt");
    write_file(&path, &text)?;
    Ok(path)
}

// ---------------------------------------------------------------------------
// Raw run files
// ---------------------------------------------------------------------------

/// Writes one run's four raw stream files plus `Run_Information.txt`.
/// The head and body streams must share their timestamps row by row.
pub fn write_raw_run(raw_dir: &Path, run: &super::RunRecord) -> Result<PathBuf> {
    if run.head.len() != run.body.len() {
        return Err(Error::Domain(format!(
            "head and body streams differ in length: {} vs {}",
            run.head.len(),
            run.body.len()
        )));
    }
    let dir = raw_dir
        .join(run.ctx.subject_id.to_string())
        .join(run.ctx.run_order.to_string());
    create_dir(&dir)?;

    let info = format!(
        "subject_id: {}\nrun_order: {}\ncourse: {}\nlight_level: {}\nnotes: {}\n",
        run.ctx.subject_id,
        run.ctx.run_order,
        run.ctx.course_id,
        run.ctx.light_level,
        run.ctx.experimenter_notes
    );
    write_file(&dir.join("Run_Information.txt"), &info)?;

    let mut events = String::new();
    for e in &run.events {
        events.push_str(&format!(
            "{};{};{};{};{}\n",
            e.t.0,
            e.initiator.as_str(),
            e.action.as_str(),
            e.recipient,
            e.info
        ));
    }
    write_file(&dir.join("Events.txt"), &events)?;

    let mut position = String::new();
    for (h, b) in run.head.iter().zip(&run.body) {
        let (hx, hy, hz) = euler_cols(h);
        let (bx, by, bz) = euler_cols(b);
        position.push_str(&format!(
            "{};{};{};{};{};{};{};{};{};{};{};{};{}\n",
            h.t.0, h.pos.x, h.pos.y, h.pos.z, hx, hy, hz, b.pos.x, b.pos.y, b.pos.z, bx, by, bz
        ));
    }
    write_file(&dir.join("Position_Data.txt"), &position)?;

    let mut hand = String::new();
    for s in &run.hand {
        let (rx, ry, rz) = euler_cols(s);
        hand.push_str(&format!(
            "{};{};{};{};{};{};{}\n",
            s.t.0, s.pos.x, s.pos.y, s.pos.z, rx, ry, rz
        ));
    }
    write_file(&dir.join("Hand_Data.txt"), &hand)?;

    write_file(&dir.join("RawEye_Data.txt"), &eye_lines(&run.eye))?;
    Ok(dir)
}

fn eye_lines(eye: &[GazeSample]) -> String {
    let mut text = String::new();
    for s in eye {
        text.push_str(&format!(
            "{};{};{};{};{};{};{};{}\n",
            s.t.0,
            s.origin.x,
            s.origin.y,
            s.origin.z,
            s.direction.x,
            s.direction.y,
            s.direction.z,
            u8::from(s.valid)
        ));
    }
    text
}

// ---------------------------------------------------------------------------
// Processed run files
// ---------------------------------------------------------------------------

/// Borrowed view of a preprocessed run, ready to persist.
pub struct ProcessedStreamsRef<'a> {
    pub ctx: &'a RunContext,
    pub events: &'a [Event],
    pub eye: &'a [GazeSample],
    pub head: &'a [PoseSample],
    pub body: &'a [PoseSample],
    pub hand: &'a [PoseSample],
}

/// Writes `CorrectedEvents.txt`, `CorrectedEye_Data.txt` and
/// `InterpolatedPosition_Data.txt` for one preprocessed run.
///
/// The position file stores rotations as quaternion components (w, x, y,
/// z); converting back to Euler angles would lose the exactness of the
/// round trip. The three pose streams must be aligned on one timeline.
pub fn write_processed(run: ProcessedStreamsRef<'_>, processed_dir: &Path) -> Result<Vec<PathBuf>> {
    if run.head.len() != run.body.len() || run.head.len() != run.hand.len() {
        return Err(Error::Domain(format!(
            "processed streams not aligned: head {}, body {}, hand {}",
            run.head.len(),
            run.body.len(),
            run.hand.len()
        )));
    }
    let dir = processed_dir
        .join(run.ctx.subject_id.to_string())
        .join(run.ctx.run_order.to_string());
    create_dir(&dir)?;

    let mut events = String::new();
    for e in run.events {
        events.push_str(&format!(
            "{};{};{};{};{}\n",
            e.t.0,
            e.initiator.as_str(),
            e.action.as_str(),
            e.recipient,
            e.info
        ));
    }
    let events_path = dir.join("CorrectedEvents.txt");
    write_file(&events_path, &events)?;

    let eye_path = dir.join("CorrectedEye_Data.txt");
    write_file(&eye_path, &eye_lines(run.eye))?;

    let mut position = String::from(
        "t;head_px;head_py;head_pz;head_qw;head_qx;head_qy;head_qz;body_px;body_py;body_pz;body_qw;body_qx;body_qy;body_qz;hand_px;hand_py;hand_pz;hand_qw;hand_qx;hand_qy;hand_qz\n",
    );
    for i in 0..run.head.len() {
        let part = |s: &PoseSample| {
            format!(
                "{};{};{};{};{};{};{}",
                s.pos.x, s.pos.y, s.pos.z, s.rot.w, s.rot.x, s.rot.y, s.rot.z
            )
        };
        position.push_str(&format!(
            "{};{};{};{}\n",
            run.head[i].t.0,
            part(&run.head[i]),
            part(&run.body[i]),
            part(&run.hand[i])
        ));
    }
    let position_path = dir.join("InterpolatedPosition_Data.txt");
    write_file(&position_path, &position)?;

    Ok(vec![events_path, eye_path, position_path])
}
