//! Domain types shared by every stage of the pipeline: world-frame vectors,
//! the YXZ Euler / quaternion rotation pair, timestamped samples, interaction
//! events, and the static course description.
//!
//! All positions live in the recording engine's left-handed world frame
//! (Y up, Z forward). Angles cross the data boundary in degrees and are
//! converted to radians internally.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Unit-norm tolerance enforced after quaternion construction.
pub const QUAT_NORM_TOL: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Vectors
// ---------------------------------------------------------------------------

/// Position or direction in the left-handed world frame, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3 {
            x: self.y * o.z - self.z * o.y,
            y: self.z * o.x - self.x * o.z,
            z: self.x * o.y - self.y * o.x,
        }
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(self) -> Result<Vec3> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::Domain(format!("cannot normalize vector {self:?}")));
        }
        Ok(self * (1.0 / n))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

// ---------------------------------------------------------------------------
// Rotations
// ---------------------------------------------------------------------------

/// Euler angles in degrees, interpreted as intrinsic rotations applied in
/// the order Y (yaw), then X (pitch), then Z (roll).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerYxz {
    pub yaw_y: f64,
    pub pitch_x: f64,
    pub roll_z: f64,
}

impl EulerYxz {
    pub fn new(yaw_y: f64, pitch_x: f64, roll_z: f64) -> Self {
        EulerYxz {
            yaw_y,
            pitch_x,
            roll_z,
        }
    }

    pub fn is_finite(self) -> bool {
        self.yaw_y.is_finite() && self.pitch_x.is_finite() && self.roll_z.is_finite()
    }
}

/// Unit quaternion (w, x, y, z).
///
/// Construction normalizes and canonicalizes the sign so that w >= 0
/// (and, at w == 0, the first nonzero vector component is positive),
/// which keeps serialized values stable across the double cover.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuatRot {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl QuatRot {
    pub const IDENTITY: QuatRot = QuatRot {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    /// Normalizing, sign-canonicalizing constructor.
    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Result<QuatRot> {
        if !(w.is_finite() && x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(Error::Domain("non-finite quaternion component".into()));
        }
        let n = (w * w + x * x + y * y + z * z).sqrt();
        if n < 1e-12 {
            return Err(Error::Domain("zero-norm quaternion".into()));
        }
        let q = QuatRot {
            w: w / n,
            x: x / n,
            y: y / n,
            z: z / n,
        };
        Ok(q.canonical_sign())
    }

    /// Raw constructor for values already known to be unit norm
    /// (e.g. outputs of slerp); still canonicalizes the sign.
    pub(crate) fn from_unit_unchecked(w: f64, x: f64, y: f64, z: f64) -> QuatRot {
        QuatRot { w, x, y, z }.canonical_sign()
    }

    fn canonical_sign(self) -> QuatRot {
        let flip = if self.w != 0.0 {
            self.w < 0.0
        } else if self.x != 0.0 {
            self.x < 0.0
        } else if self.y != 0.0 {
            self.y < 0.0
        } else {
            self.z < 0.0
        };
        if flip {
            QuatRot {
                w: -self.w,
                x: -self.x,
                y: -self.y,
                z: -self.z,
            }
        } else {
            self
        }
    }

    pub fn norm(self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn dot(self, o: QuatRot) -> f64 {
        self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z
    }

    /// Conjugate; equal to the inverse for unit quaternions.
    pub fn conjugate(self) -> QuatRot {
        QuatRot {
            w: self.w,
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    /// Rotates a world-frame vector by this quaternion.
    pub fn rotate_vector(self, v: Vec3) -> Vec3 {
        // v' = v + 2 w (u x v) + 2 u x (u x v), u = vector part
        let u = Vec3::new(self.x, self.y, self.z);
        let t = u.cross(v) * 2.0;
        v + t * self.w + u.cross(t)
    }

    /// Angle of the relative rotation between two unit quaternions, radians.
    pub fn angle_to(self, o: QuatRot) -> f64 {
        let d = self.dot(o).abs().min(1.0);
        2.0 * d.acos()
    }
}

/// Hamilton product; applies `rhs` first, then `self`, when rotating
/// column vectors.
impl Mul for QuatRot {
    type Output = QuatRot;
    fn mul(self, o: QuatRot) -> QuatRot {
        QuatRot {
            w: self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            x: self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            y: self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            z: self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        }
    }
}

/// Converts YXZ intrinsic Euler angles (degrees) to a unit quaternion.
///
/// The composition is q_y(yaw) * q_x(pitch) * q_z(roll), matching the
/// rotation matrix product R_y·R_x·R_z.
pub fn euler_yxz_to_quaternion(e: EulerYxz) -> Result<QuatRot> {
    if !e.is_finite() {
        return Err(Error::Domain(format!("non-finite Euler angles {e:?}")));
    }
    let hy = e.yaw_y.to_radians() * 0.5;
    let hx = e.pitch_x.to_radians() * 0.5;
    let hz = e.roll_z.to_radians() * 0.5;
    let (sy, cy) = hy.sin_cos();
    let (sx, cx) = hx.sin_cos();
    let (sz, cz) = hz.sin_cos();

    let qy = QuatRot {
        w: cy,
        x: 0.0,
        y: sy,
        z: 0.0,
    };
    let qx = QuatRot {
        w: cx,
        x: sx,
        y: 0.0,
        z: 0.0,
    };
    let qz = QuatRot {
        w: cz,
        x: 0.0,
        y: 0.0,
        z: sz,
    };
    Ok((qy * qx * qz).canonical_sign())
}

/// Extracts YXZ intrinsic Euler angles (degrees) from a unit quaternion.
///
/// At gimbal lock (pitch = ±90°) the split between yaw and roll is
/// underdetermined; the convention here is roll_z = 0 with all rotation
/// about the vertical axis assigned to yaw.
pub fn quaternion_to_euler_yxz(q: QuatRot) -> EulerYxz {
    let (w, x, y, z) = (q.w, q.x, q.y, q.z);
    // Elements of R = R_y(yaw)·R_x(pitch)·R_z(roll).
    let m12 = 2.0 * (y * z - w * x);
    let sin_pitch = (-m12).clamp(-1.0, 1.0);

    if sin_pitch.abs() > 1.0 - 1e-9 {
        let s = sin_pitch.signum();
        let m00 = 1.0 - 2.0 * (y * y + z * z);
        let m01 = 2.0 * (x * y - w * z);
        return EulerYxz {
            yaw_y: (s * m01).atan2(m00).to_degrees(),
            pitch_x: (s * std::f64::consts::FRAC_PI_2).to_degrees(),
            roll_z: 0.0,
        };
    }

    let m02 = 2.0 * (x * z + w * y);
    let m22 = 1.0 - 2.0 * (x * x + y * y);
    let m10 = 2.0 * (x * y + w * z);
    let m11 = 1.0 - 2.0 * (x * x + z * z);
    EulerYxz {
        yaw_y: m02.atan2(m22).to_degrees(),
        pitch_x: sin_pitch.asin().to_degrees(),
        roll_z: m10.atan2(m11).to_degrees(),
    }
}

// ---------------------------------------------------------------------------
// Samples and events
// ---------------------------------------------------------------------------

/// Seconds since the recording epoch of a run.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Timestamp(pub f64);

impl Timestamp {
    pub fn seconds(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BodyPart {
    Head,
    Body,
    Hand,
}

/// One timestamped pose of a tracked body part. Rotation is converted from
/// the raw Euler angles to a quaternion at ingest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseSample {
    pub t: Timestamp,
    pub pos: Vec3,
    pub rot: QuatRot,
    pub body_part: BodyPart,
}

/// One eye-tracker sample, on the eye-tracker clock until synchronized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GazeSample {
    pub t: Timestamp,
    pub origin: Vec3,
    pub direction: Vec3,
    pub valid: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Initiator {
    System,
    User,
}

impl Initiator {
    pub fn parse(s: &str) -> Option<Initiator> {
        match s.trim().to_ascii_lowercase().as_str() {
            "system" => Some(Initiator::System),
            "user" => Some(Initiator::User),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Initiator::System => "System",
            Initiator::User => "User",
        }
    }
}

/// Interaction verb of an event record. Unknown verbs are preserved
/// verbatim as `Other` so no log row is ever dropped.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Launch,
    Start,
    Stop,
    Destroy,
    Exit,
    Collide,
    End,
    GazeIn,
    GazeOut,
    Other(String),
}

impl Action {
    pub fn parse(s: &str) -> Action {
        let norm = s.trim().to_ascii_lowercase().replace('_', " ");
        match norm.as_str() {
            "launch" => Action::Launch,
            "start" => Action::Start,
            "stop" => Action::Stop,
            "destroy" => Action::Destroy,
            "exit" => Action::Exit,
            "collide" => Action::Collide,
            "end" => Action::End,
            "gaze in" | "gazein" => Action::GazeIn,
            "gaze out" | "gazeout" => Action::GazeOut,
            _ => Action::Other(s.trim().to_string()),
        }
    }

    pub fn as_str(&self) -> &str {
        match self {
            Action::Launch => "launch",
            Action::Start => "start",
            Action::Stop => "stop",
            Action::Destroy => "destroy",
            Action::Exit => "exit",
            Action::Collide => "collide",
            Action::End => "end",
            Action::GazeIn => "gaze in",
            Action::GazeOut => "gaze out",
            Action::Other(s) => s,
        }
    }

    pub fn is_known(&self) -> bool {
        !matches!(self, Action::Other(_))
    }
}

/// One interaction-log record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: Timestamp,
    pub initiator: Initiator,
    pub action: Action,
    pub recipient: String,
    pub info: String,
}

impl Event {
    pub fn new(
        t: f64,
        initiator: Initiator,
        action: Action,
        recipient: impl Into<String>,
    ) -> Event {
        Event {
            t: Timestamp(t),
            initiator,
            action,
            recipient: recipient.into(),
            info: String::new(),
        }
    }

    pub fn matches(&self, initiator: Initiator, action: &Action) -> bool {
        self.initiator == initiator && &self.action == action
    }
}

// ---------------------------------------------------------------------------
// Environment configuration
// ---------------------------------------------------------------------------

/// Ambient lighting level of a run, 1 (darkest) to 6.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LightLevel(u8);

impl LightLevel {
    pub fn new(level: u8) -> Result<LightLevel> {
        if (1..=6).contains(&level) {
            Ok(LightLevel(level))
        } else {
            Err(Error::Domain(format!("light level {level} outside 1..=6")))
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn all() -> [LightLevel; 6] {
        [
            LightLevel(1),
            LightLevel(2),
            LightLevel(3),
            LightLevel(4),
            LightLevel(5),
            LightLevel(6),
        ]
    }
}

impl fmt::Display for LightLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Cube,
    Cylinder,
    Pyramid,
}

impl Shape {
    pub fn parse(s: &str) -> Option<Shape> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cube" => Some(Shape::Cube),
            "cylinder" => Some(Shape::Cylinder),
            "pyramid" => Some(Shape::Pyramid),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Shape::Cube => "cube",
            Shape::Cylinder => "cylinder",
            Shape::Pyramid => "pyramid",
        }
    }
}

/// Vertical placement of an object relative to the avatar's gaze height.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerticalPos {
    Low,
    Medium,
    High,
}

impl VerticalPos {
    pub fn parse(s: &str) -> Option<VerticalPos> {
        match s.trim().to_ascii_lowercase().as_str() {
            "low" => Some(VerticalPos::Low),
            "medium" => Some(VerticalPos::Medium),
            "high" => Some(VerticalPos::High),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            VerticalPos::Low => "low",
            VerticalPos::Medium => "medium",
            VerticalPos::High => "high",
        }
    }
}

/// Horizontal placement of an object relative to the path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HorizontalPos {
    OnPath,
    Partial,
    OffPath,
}

impl HorizontalPos {
    pub fn parse(s: &str) -> Option<HorizontalPos> {
        let norm = s.trim().to_ascii_lowercase();
        match norm.as_str() {
            "on the path" | "on_path" | "on path" | "on" => Some(HorizontalPos::OnPath),
            "partially on the path" | "partial" | "partially" => Some(HorizontalPos::Partial),
            "off the path" | "off_path" | "off path" | "off" => Some(HorizontalPos::OffPath),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            HorizontalPos::OnPath => "on the path",
            HorizontalPos::Partial => "partially on the path",
            HorizontalPos::OffPath => "off the path",
        }
    }
}

/// Diffuse material grey values used by the destructible objects.
pub const OBJECT_GREY_VALUES: [u8; 3] = [83, 111, 134];

/// Static description of one destructible object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectSpec {
    /// Full label as logged, e.g. "A_cube 0".
    pub label: String,
    pub shape: Shape,
    /// Diffuse material grey value: one of 83, 111, 134.
    pub grey: u8,
    pub vertical: VerticalPos,
    pub horizontal: HorizontalPos,
    pub centroid: Vec3,
    pub scale: Vec3,
    /// Distance between the bottom of the object and the ground, meters.
    pub ground_clearance: f64,
}

impl ObjectSpec {
    pub fn validate(&self) -> Result<()> {
        if !OBJECT_GREY_VALUES.contains(&self.grey) {
            return Err(Error::Domain(format!(
                "object {}: grey {} not one of {:?}",
                self.label, self.grey, OBJECT_GREY_VALUES
            )));
        }
        if !self.centroid.is_finite() || !self.scale.is_finite() {
            return Err(Error::Domain(format!(
                "object {}: non-finite geometry",
                self.label
            )));
        }
        Ok(())
    }
}

/// Course identifier. A–F are evaluation courses, G and H training only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CourseId {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    H,
}

impl CourseId {
    pub fn parse(s: &str) -> Option<CourseId> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Some(CourseId::A),
            "B" => Some(CourseId::B),
            "C" => Some(CourseId::C),
            "D" => Some(CourseId::D),
            "E" => Some(CourseId::E),
            "F" => Some(CourseId::F),
            "G" => Some(CourseId::G),
            "H" => Some(CourseId::H),
            _ => None,
        }
    }

    pub fn letter(self) -> char {
        match self {
            CourseId::A => 'A',
            CourseId::B => 'B',
            CourseId::C => 'C',
            CourseId::D => 'D',
            CourseId::E => 'E',
            CourseId::F => 'F',
            CourseId::G => 'G',
            CourseId::H => 'H',
        }
    }

    pub fn is_evaluation(self) -> bool {
        !matches!(self, CourseId::G | CourseId::H)
    }

    pub fn evaluation_courses() -> [CourseId; 6] {
        [
            CourseId::A,
            CourseId::B,
            CourseId::C,
            CourseId::D,
            CourseId::E,
            CourseId::F,
        ]
    }
}

impl fmt::Display for CourseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Circular zone on the floor plane, used for start/end areas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Zone {
    pub center_x: f64,
    pub center_z: f64,
    pub radius: f64,
}

impl Zone {
    pub fn contains(&self, x: f64, z: f64) -> bool {
        let dx = x - self.center_x;
        let dz = z - self.center_z;
        dx * dx + dz * dz <= self.radius * self.radius
    }
}

/// Static geometry of one course: the guidance path, its boundary and the
/// nine destructible objects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CourseGeometry {
    pub course_id: CourseId,
    /// (x, z) middle points of the path, in traversal order.
    pub middle_points: Vec<(f64, f64)>,
    /// Pairs of (x, z) endpoints delimiting the path width.
    pub boundary_endpoints: Vec<((f64, f64), (f64, f64))>,
    pub objects: Vec<ObjectSpec>,
    pub start_zone: Zone,
    pub end_zone: Zone,
}

impl CourseGeometry {
    pub fn validate(&self) -> Result<()> {
        if self.course_id.is_evaluation() && self.objects.len() != 9 {
            return Err(Error::Domain(format!(
                "course {}: expected 9 objects, found {}",
                self.course_id,
                self.objects.len()
            )));
        }
        if self.middle_points.is_empty() {
            return Err(Error::Domain(format!(
                "course {}: empty middle point list",
                self.course_id
            )));
        }
        for w in self.middle_points.windows(2) {
            if w[0] == w[1] {
                return Err(Error::Domain(format!(
                    "course {}: consecutive duplicate middle point {:?}",
                    self.course_id, w[0]
                )));
            }
        }
        for obj in &self.objects {
            obj.validate()?;
        }
        Ok(())
    }

    /// Total arc length of the middle-point polyline, meters.
    pub fn path_length(&self) -> f64 {
        self.middle_points
            .windows(2)
            .map(|w| {
                let dx = w[1].0 - w[0].0;
                let dz = w[1].1 - w[0].1;
                (dx * dx + dz * dz).sqrt()
            })
            .sum()
    }

    pub fn object(&self, label: &str) -> Option<&ObjectSpec> {
        self.objects.iter().find(|o| o.label == label)
    }
}

/// Position of a run within a participant's session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RunOrder {
    /// Training run T1 or T2, always on courses G/H.
    Training(u8),
    /// Evaluation run 1..=12.
    Evaluation(u8),
}

impl RunOrder {
    pub fn parse(s: &str) -> Option<RunOrder> {
        let t = s.trim();
        if let Some(rest) = t.strip_prefix('T').or_else(|| t.strip_prefix('t')) {
            let n: u8 = rest.parse().ok()?;
            if (1..=2).contains(&n) {
                return Some(RunOrder::Training(n));
            }
            return None;
        }
        let n: u8 = t.parse().ok()?;
        if (1..=12).contains(&n) {
            Some(RunOrder::Evaluation(n))
        } else {
            None
        }
    }

    pub fn is_evaluation(self) -> bool {
        matches!(self, RunOrder::Evaluation(_))
    }

    /// Evaluation index 1..=12, if this is an evaluation run.
    pub fn index(self) -> Option<u8> {
        match self {
            RunOrder::Evaluation(n) => Some(n),
            RunOrder::Training(_) => None,
        }
    }
}

impl fmt::Display for RunOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunOrder::Training(n) => write!(f, "T{n}"),
            RunOrder::Evaluation(n) => write!(f, "{n}"),
        }
    }
}

/// Identity and configuration of one course traversal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunContext {
    pub subject_id: u32,
    pub run_order: RunOrder,
    pub course_id: CourseId,
    pub light_level: LightLevel,
    pub experimenter_notes: String,
}

impl RunContext {
    pub fn validate(&self) -> Result<()> {
        match self.run_order {
            RunOrder::Evaluation(_) if !self.course_id.is_evaluation() => {
                Err(Error::Domain(format!(
                    "subject {} run {}: evaluation run on training course {}",
                    self.subject_id, self.run_order, self.course_id
                )))
            }
            RunOrder::Training(_) if self.course_id.is_evaluation() => Err(Error::Domain(format!(
                "subject {} run {}: training run on evaluation course {}",
                self.subject_id, self.run_order, self.course_id
            ))),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEG: f64 = std::f64::consts::PI / 180.0;

    /// 3x3 rotation matrix, used only as a test oracle.
    type Mat3 = [[f64; 3]; 3];

    fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for (k, bk) in b.iter().enumerate() {
                    m[i][j] += a[i][k] * bk[j];
                }
            }
        }
        m
    }

    fn rot_x(deg: f64) -> Mat3 {
        let (s, c) = (deg * DEG).sin_cos();
        [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]]
    }

    fn rot_y(deg: f64) -> Mat3 {
        let (s, c) = (deg * DEG).sin_cos();
        [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]
    }

    fn rot_z(deg: f64) -> Mat3 {
        let (s, c) = (deg * DEG).sin_cos();
        [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
    }

    fn yxz_matrix(e: EulerYxz) -> Mat3 {
        mat_mul(
            &mat_mul(&rot_y(e.yaw_y), &rot_x(e.pitch_x)),
            &rot_z(e.roll_z),
        )
    }

    fn quat_matrix(q: QuatRot) -> Mat3 {
        let (w, x, y, z) = (q.w, q.x, q.y, q.z);
        [
            [
                1.0 - 2.0 * (y * y + z * z),
                2.0 * (x * y - w * z),
                2.0 * (x * z + w * y),
            ],
            [
                2.0 * (x * y + w * z),
                1.0 - 2.0 * (x * x + z * z),
                2.0 * (y * z - w * x),
            ],
            [
                2.0 * (x * z - w * y),
                2.0 * (y * z + w * x),
                1.0 - 2.0 * (x * x + y * y),
            ],
        ]
    }

    fn mat_close(a: &Mat3, b: &Mat3, tol: f64) -> bool {
        a.iter()
            .flatten()
            .zip(b.iter().flatten())
            .all(|(p, q)| (p - q).abs() <= tol)
    }

    #[test]
    fn identity_euler_maps_to_identity_quaternion() {
        let q = euler_yxz_to_quaternion(EulerYxz::new(0.0, 0.0, 0.0)).unwrap();
        assert_eq!(q, QuatRot::IDENTITY);
    }

    #[test]
    fn half_turn_about_y() {
        let q = euler_yxz_to_quaternion(EulerYxz::new(180.0, 0.0, 0.0)).unwrap();
        assert!(q.w.abs() < 1e-12);
        assert!(q.x.abs() < 1e-12);
        assert!((q.y.abs() - 1.0).abs() < 1e-12);
        assert!(q.z.abs() < 1e-12);
        // Sign canonicalization keeps the first nonzero component positive.
        assert!(q.y > 0.0);
    }

    #[test]
    fn composed_rotation_matches_matrix_oracle() {
        let e = EulerYxz::new(30.0, 45.0, 60.0);
        let q = euler_yxz_to_quaternion(e).unwrap();
        assert!(mat_close(&quat_matrix(q), &yxz_matrix(e), 1e-9));
    }

    #[test]
    fn random_angles_match_matrix_oracle() {
        // Cheap LCG so the sweep is reproducible without pulling in an RNG.
        let mut state: u64 = 0x9e3779b97f4a7c15;
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 720.0 - 360.0
        };
        for _ in 0..200 {
            let e = EulerYxz::new(next(), next(), next());
            let q = euler_yxz_to_quaternion(e).unwrap();
            assert!(mat_close(&quat_matrix(q), &yxz_matrix(e), 1e-9), "{e:?}");

            let back = quaternion_to_euler_yxz(q);
            let q2 = euler_yxz_to_quaternion(back).unwrap();
            // Round trip must reproduce an equivalent rotation.
            assert!(
                q.dot(q2).abs() > 1.0 - 1e-9,
                "roundtrip mismatch for {e:?}: {back:?}"
            );
        }
    }

    #[test]
    fn euler_roundtrip_single_axis() {
        let e = EulerYxz::new(90.0, 0.0, 0.0);
        let q = euler_yxz_to_quaternion(e).unwrap();
        let back = quaternion_to_euler_yxz(q);
        assert!((back.yaw_y - 90.0).abs() < 1e-9);
        assert!(back.pitch_x.abs() < 1e-9);
        assert!(back.roll_z.abs() < 1e-9);
    }

    #[test]
    fn identity_quaternion_extracts_zero_angles() {
        let e = quaternion_to_euler_yxz(QuatRot::IDENTITY);
        assert_eq!(e, EulerYxz::new(0.0, 0.0, 0.0));
    }

    #[test]
    fn gimbal_lock_assigns_roll_zero() {
        let e = EulerYxz::new(30.0, 90.0, 25.0);
        let q = euler_yxz_to_quaternion(e).unwrap();
        let back = quaternion_to_euler_yxz(q);
        assert_eq!(back.roll_z, 0.0);
        assert!((back.pitch_x - 90.0).abs() < 1e-6);
        // Yaw absorbs the roll: the recomposed rotation must still match.
        let q2 = euler_yxz_to_quaternion(back).unwrap();
        assert!(mat_close(&quat_matrix(q), &quat_matrix(q2), 1e-6));
    }

    #[test]
    fn double_cover_maps_to_same_euler() {
        let q = euler_yxz_to_quaternion(EulerYxz::new(40.0, -20.0, 70.0)).unwrap();
        let neg = QuatRot {
            w: -q.w,
            x: -q.x,
            y: -q.y,
            z: -q.z,
        };
        let a = quaternion_to_euler_yxz(q);
        let b = quaternion_to_euler_yxz(neg);
        assert!((a.yaw_y - b.yaw_y).abs() < 1e-12);
        assert!((a.pitch_x - b.pitch_x).abs() < 1e-12);
        assert!((a.roll_z - b.roll_z).abs() < 1e-12);
    }

    #[test]
    fn non_finite_euler_rejected() {
        assert!(euler_yxz_to_quaternion(EulerYxz::new(f64::NAN, 0.0, 0.0)).is_err());
        assert!(euler_yxz_to_quaternion(EulerYxz::new(0.0, f64::INFINITY, 0.0)).is_err());
    }

    #[test]
    fn yaw_rotation_preserves_handedness() {
        // In the recording frame (Y up, Z forward), yaw +90° turns the
        // forward axis toward +X. A silent handedness flip would send it
        // to -X instead.
        let q = euler_yxz_to_quaternion(EulerYxz::new(90.0, 0.0, 0.0)).unwrap();
        let fwd = q.rotate_vector(Vec3::new(0.0, 0.0, 1.0));
        assert!((fwd.x - 1.0).abs() < 1e-12);
        assert!(fwd.y.abs() < 1e-12);
        assert!(fwd.z.abs() < 1e-12);
    }

    #[test]
    fn quaternion_constructor_normalizes_and_canonicalizes() {
        let q = QuatRot::new(-2.0, 0.0, 2.0, 0.0).unwrap();
        assert!((q.norm() - 1.0).abs() < QUAT_NORM_TOL);
        assert!(q.w >= 0.0);
        assert!(QuatRot::new(0.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn action_parse_preserves_unknown_tokens() {
        assert_eq!(Action::parse("Gaze In"), Action::GazeIn);
        assert_eq!(Action::parse("gaze_out"), Action::GazeOut);
        assert_eq!(
            Action::parse("teleport"),
            Action::Other("teleport".to_string())
        );
    }

    #[test]
    fn run_order_parse_both_forms() {
        assert_eq!(RunOrder::parse("T1"), Some(RunOrder::Training(1)));
        assert_eq!(RunOrder::parse("12"), Some(RunOrder::Evaluation(12)));
        assert_eq!(RunOrder::parse("13"), None);
        assert_eq!(RunOrder::parse("T3"), None);
    }

    #[test]
    fn light_level_range_enforced() {
        assert!(LightLevel::new(0).is_err());
        assert!(LightLevel::new(7).is_err());
        assert_eq!(LightLevel::new(3).unwrap().value(), 3);
    }
}
