//! Column layout of the raw stream files.
//!
//! The recordings name their files but no authoritative column order ships
//! with them, so the mapping from logical field to column index is
//! configuration. The default below is the canonical layout this crate
//! writes and reads: timestamp first, then position x,y,z and rotation
//! x,y,z per body part. A different layout can be supplied as a JSON
//! schema file.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column indices of the interaction log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventColumns {
    pub t: usize,
    pub initiator: usize,
    pub action: usize,
    pub recipient: usize,
    pub info: usize,
}

impl Default for EventColumns {
    fn default() -> Self {
        EventColumns {
            t: 0,
            initiator: 1,
            action: 2,
            recipient: 3,
            info: 4,
        }
    }
}

/// Column indices of the head+body position file. Rotation columns hold
/// engine Euler angles in degrees (x = pitch, y = yaw, z = roll).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositionColumns {
    pub t: usize,
    pub head_pos: [usize; 3],
    pub head_rot: [usize; 3],
    pub body_pos: [usize; 3],
    pub body_rot: [usize; 3],
}

impl Default for PositionColumns {
    fn default() -> Self {
        PositionColumns {
            t: 0,
            head_pos: [1, 2, 3],
            head_rot: [4, 5, 6],
            body_pos: [7, 8, 9],
            body_rot: [10, 11, 12],
        }
    }
}

/// Column indices of the hand stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HandColumns {
    pub t: usize,
    pub pos: [usize; 3],
    pub rot: [usize; 3],
}

impl Default for HandColumns {
    fn default() -> Self {
        HandColumns {
            t: 0,
            pos: [1, 2, 3],
            rot: [4, 5, 6],
        }
    }
}

/// Column indices of the raw eye stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EyeColumns {
    pub t: usize,
    pub origin: [usize; 3],
    pub direction: [usize; 3],
    pub valid: usize,
}

impl Default for EyeColumns {
    fn default() -> Self {
        EyeColumns {
            t: 0,
            origin: [1, 2, 3],
            direction: [4, 5, 6],
            valid: 7,
        }
    }
}

/// Full column schema for one dataset, plus delimiter handling.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnSchema {
    /// Field delimiter; `None` autodetects among ';', tab and ','.
    pub delimiter: Option<char>,
    /// Header rows to skip in every stream file.
    pub header_rows: usize,
    pub events: EventColumns,
    pub position: PositionColumns,
    pub hand: HandColumns,
    pub eye: EyeColumns,
}

impl ColumnSchema {
    /// Rejects schemas that map two logical fields of one file to the
    /// same column.
    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, cols: &[usize]| -> Result<()> {
            let mut sorted = cols.to_vec();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != cols.len() {
                return Err(Error::Schema(format!(
                    "{name}: a column index is mapped twice: {cols:?}"
                )));
            }
            Ok(())
        };
        let e = &self.events;
        check("events", &[e.t, e.initiator, e.action, e.recipient, e.info])?;
        let p = &self.position;
        let mut pos_cols = vec![p.t];
        pos_cols.extend(p.head_pos);
        pos_cols.extend(p.head_rot);
        pos_cols.extend(p.body_pos);
        pos_cols.extend(p.body_rot);
        check("position", &pos_cols)?;
        let h = &self.hand;
        let mut hand_cols = vec![h.t];
        hand_cols.extend(h.pos);
        hand_cols.extend(h.rot);
        check("hand", &hand_cols)?;
        let ey = &self.eye;
        let mut eye_cols = vec![ey.t, ey.valid];
        eye_cols.extend(ey.origin);
        eye_cols.extend(ey.direction);
        check("eye", &eye_cols)?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<ColumnSchema> {
        let schema: ColumnSchema =
            serde_json::from_str(text).map_err(|e| Error::Schema(format!("schema JSON: {e}")))?;
        schema.validate()?;
        Ok(schema)
    }
}

/// Picks the delimiter for a line: the configured one, or the first of
/// ';', tab, ',' that occurs.
pub fn detect_delimiter(line: &str, configured: Option<char>) -> char {
    if let Some(d) = configured {
        return d;
    }
    for d in [';', '\t', ','] {
        if line.contains(d) {
            return d;
        }
    }
    ';'
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_schema_is_valid() {
        ColumnSchema::default().validate().unwrap();
    }

    #[test]
    fn duplicate_mapping_rejected() {
        let mut schema = ColumnSchema::default();
        schema.events.recipient = schema.events.action;
        assert!(schema.validate().is_err());
    }

    #[test]
    fn schema_json_roundtrip() {
        let schema = ColumnSchema::default();
        let json = serde_json::to_string(&schema).unwrap();
        assert_eq!(ColumnSchema::from_json(&json).unwrap(), schema);
        assert!(ColumnSchema::from_json("{\"events\": {\"t\": 0, \"initiator\": 0, \"action\": 1, \"recipient\": 2, \"info\": 3}}").is_err());
    }

    #[test]
    fn delimiter_detection() {
        assert_eq!(detect_delimiter("a;b;c", None), ';');
        assert_eq!(detect_delimiter("a\tb", None), '\t');
        assert_eq!(detect_delimiter("a,b", None), ',');
        assert_eq!(detect_delimiter("abc", None), ';');
        assert_eq!(detect_delimiter("a;b", Some(',')), ',');
    }
}
