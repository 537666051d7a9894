//! Photometric description of the virtual environment: engine ambient-light
//! settings, rendered grey values and estimated luminances of every scene
//! element per lighting level, and a piecewise-linear grey-to-luminance
//! calibration curve.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::LightLevel;

/// Rendered element category measured during display calibration.
///
/// Clear, Medium and Dark are the three destructible-object materials
/// (grey 134, 111, 83); the rest are fixed parts of the environment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    Clear,
    Medium,
    Dark,
    Path,
    Floor,
    Arrows,
    Walls,
    Ceiling,
}

impl ElementKind {
    pub const ALL: [ElementKind; 8] = [
        ElementKind::Clear,
        ElementKind::Medium,
        ElementKind::Dark,
        ElementKind::Path,
        ElementKind::Floor,
        ElementKind::Arrows,
        ElementKind::Walls,
        ElementKind::Ceiling,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ElementKind::Clear => "clear",
            ElementKind::Medium => "medium",
            ElementKind::Dark => "dark",
            ElementKind::Path => "path",
            ElementKind::Floor => "floor",
            ElementKind::Arrows => "arrows",
            ElementKind::Walls => "walls",
            ElementKind::Ceiling => "ceiling",
        }
    }

    fn index(self) -> usize {
        match self {
            ElementKind::Clear => 0,
            ElementKind::Medium => 1,
            ElementKind::Dark => 2,
            ElementKind::Path => 3,
            ElementKind::Floor => 4,
            ElementKind::Arrows => 5,
            ElementKind::Walls => 6,
            ElementKind::Ceiling => 7,
        }
    }

    /// Element category of a destructible object, from its material grey.
    pub fn for_object_grey(grey: u8) -> Result<ElementKind> {
        match grey {
            134 => Ok(ElementKind::Clear),
            111 => Ok(ElementKind::Medium),
            83 => Ok(ElementKind::Dark),
            other => Err(Error::Domain(format!(
                "no element category for object grey {other}"
            ))),
        }
    }
}

/// Engine ambient-light intensity per lighting level.
const AMBIENT_INTENSITY: [u32; 6] = [23, 33, 55, 85, 128, 175];

/// Diffuse material grey per element (the unlit texture value).
const MATERIAL_GREY: [u8; 8] = [134, 111, 83, 101, 79, 83, 155, 176];

/// Rendered grey per element, rows L1..L6.
const RENDERED_GREY: [[u8; 8]; 6] = [
    [6, 2, 0, 2, 0, 1, 5, 1],
    [10, 7, 2, 6, 1, 3, 10, 5],
    [21, 16, 9, 15, 8, 11, 20, 13],
    [36, 28, 19, 26, 17, 21, 34, 24],
    [58, 47, 33, 44, 31, 35, 56, 39],
    [83, 67, 49, 63, 45, 52, 81, 58],
];

/// Estimated displayed luminance per element in cd/m², rows L1..L6.
const ESTIMATED_LUMINANCE: [[f64; 8]; 6] = [
    [0.438, 0.216, 0.105, 0.216, 0.105, 0.160, 0.382, 0.160],
    [0.660, 0.493, 0.216, 0.438, 0.160, 0.271, 0.660, 0.382],
    [1.27, 0.998, 0.604, 0.937, 0.549, 0.715, 1.21, 0.826],
    [3.17, 1.66, 1.16, 1.55, 1.05, 1.27, 2.63, 1.44],
    [9.11, 6.14, 2.36, 5.33, 1.82, 2.90, 8.57, 3.98],
    [13.7, 11.1, 6.68, 10.5, 5.60, 7.49, 13.3, 9.67],
];

/// Engine ambient-light intensity setting for a lighting level.
pub fn ambient_intensity(level: LightLevel) -> u32 {
    AMBIENT_INTENSITY[(level.value() - 1) as usize]
}

/// Diffuse material grey of an element (independent of lighting).
pub fn material_grey(e: ElementKind) -> u8 {
    MATERIAL_GREY[e.index()]
}

/// Grey value an element renders at under a lighting level.
pub fn rendered_grey(e: ElementKind, level: LightLevel) -> u8 {
    RENDERED_GREY[(level.value() - 1) as usize][e.index()]
}

/// Estimated displayed luminance of an element under a lighting level,
/// cd/m².
pub fn estimated_luminance(e: ElementKind, level: LightLevel) -> f64 {
    ESTIMATED_LUMINANCE[(level.value() - 1) as usize][e.index()]
}

/// Piecewise-linear display calibration: sorted (grey, luminance) anchors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationCurve {
    anchors: Vec<(u8, f64)>,
}

impl CalibrationCurve {
    /// Builds a curve from anchors, which must be strictly increasing in
    /// both grey and luminance.
    pub fn new(anchors: Vec<(u8, f64)>) -> Result<CalibrationCurve> {
        if anchors.len() < 2 {
            return Err(Error::Domain(
                "calibration curve needs at least 2 anchors".into(),
            ));
        }
        for w in anchors.windows(2) {
            if w[1].0 <= w[0].0 || w[1].1 <= w[0].1 {
                return Err(Error::Domain(format!(
                    "calibration anchors not strictly increasing: {:?} then {:?}",
                    w[0], w[1]
                )));
            }
        }
        if anchors.iter().any(|(_, l)| !l.is_finite() || *l < 0.0) {
            return Err(Error::Domain(
                "non-finite or negative luminance anchor".into(),
            ));
        }
        Ok(CalibrationCurve { anchors })
    }

    /// Curve built from the measured rendered-grey / estimated-luminance
    /// pairs of the embedded tables, pooled over both eyes.
    ///
    /// Where the same rendered grey was measured for two elements with
    /// slightly different luminance readings, the readings are averaged.
    pub fn builtin() -> CalibrationCurve {
        let mut pairs: Vec<(u8, f64)> = Vec::new();
        for level in 0..6 {
            for elem in 0..8 {
                pairs.push((RENDERED_GREY[level][elem], ESTIMATED_LUMINANCE[level][elem]));
            }
        }
        pairs.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));

        let mut anchors: Vec<(u8, f64)> = Vec::new();
        let mut i = 0;
        while i < pairs.len() {
            let grey = pairs[i].0;
            let mut sum = 0.0;
            let mut n = 0usize;
            while i < pairs.len() && pairs[i].0 == grey {
                sum += pairs[i].1;
                n += 1;
                i += 1;
            }
            anchors.push((grey, sum / n as f64));
        }
        CalibrationCurve::new(anchors).expect("embedded tables produce a valid curve")
    }

    pub fn anchors(&self) -> &[(u8, f64)] {
        &self.anchors
    }

    /// Interpolated luminance at a grey value within the anchor span.
    pub fn luminance_from_grey(&self, grey: u8) -> Result<f64> {
        let first = self.anchors[0];
        let last = self.anchors[self.anchors.len() - 1];
        if grey < first.0 || grey > last.0 {
            return Err(Error::Domain(format!(
                "grey {grey} outside calibration span {}..={}; refusing to extrapolate",
                first.0, last.0
            )));
        }
        let idx = self.anchors.partition_point(|(g, _)| *g <= grey);
        let (g0, l0) = self.anchors[idx - 1];
        if g0 == grey {
            return Ok(l0);
        }
        let (g1, l1) = self.anchors[idx];
        let ratio = f64::from(grey - g0) / f64::from(g1 - g0);
        Ok(l0 + ratio * (l1 - l0))
    }

    /// Parses an anchor file: one `grey,luminance` (or `grey;luminance`)
    /// row per line, `#` comments allowed.
    pub fn from_text(name: &str, text: &str) -> Result<CalibrationCurve> {
        let mut anchors = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split([',', ';', '\t']).map(str::trim);
            let grey: u8 = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::parse(name, i + 1, "bad grey value"))?;
            let lum: f64 = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::parse(name, i + 1, "bad luminance value"))?;
            anchors.push((grey, lum));
        }
        CalibrationCurve::new(anchors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn level(n: u8) -> LightLevel {
        LightLevel::new(n).unwrap()
    }

    #[test]
    fn ambient_values() {
        assert_eq!(ambient_intensity(level(1)), 23);
        assert_eq!(ambient_intensity(level(3)), 55);
        assert_eq!(ambient_intensity(level(6)), 175);
    }

    #[test]
    fn rendered_grey_values() {
        assert_eq!(rendered_grey(ElementKind::Clear, level(1)), 6);
        assert_eq!(rendered_grey(ElementKind::Dark, level(1)), 0);
        assert_eq!(rendered_grey(ElementKind::Walls, level(6)), 81);
        assert_eq!(material_grey(ElementKind::Clear), 134);
        assert_eq!(material_grey(ElementKind::Ceiling), 176);
    }

    #[test]
    fn estimated_luminance_values() {
        assert_eq!(estimated_luminance(ElementKind::Clear, level(1)), 0.438);
        assert_eq!(estimated_luminance(ElementKind::Dark, level(3)), 0.604);
        assert_eq!(estimated_luminance(ElementKind::Clear, level(6)), 13.7);
    }

    #[test]
    fn luminance_monotone_in_level_for_every_element() {
        for e in ElementKind::ALL {
            for lv in 1..6u8 {
                let lo = estimated_luminance(e, level(lv));
                let hi = estimated_luminance(e, level(lv + 1));
                assert!(hi >= lo, "{e:?} L{lv}: {lo} -> {hi}");
            }
        }
    }

    #[test]
    fn rendered_grey_monotone_in_level_for_every_element() {
        for e in ElementKind::ALL {
            for lv in 1..6u8 {
                assert!(rendered_grey(e, level(lv + 1)) >= rendered_grey(e, level(lv)));
            }
        }
    }

    #[test]
    fn builtin_curve_exact_at_anchors_and_monotone() {
        let curve = CalibrationCurve::builtin();
        for &(g, l) in curve.anchors() {
            assert_eq!(curve.luminance_from_grey(g).unwrap(), l);
        }
        let mut prev = -1.0;
        for g in curve.anchors()[0].0..=curve.anchors().last().unwrap().0 {
            let l = curve.luminance_from_grey(g).unwrap();
            assert!(l >= prev, "non-monotone at grey {g}");
            prev = l;
        }
    }

    #[test]
    fn builtin_curve_matches_table_pairs() {
        let curve = CalibrationCurve::builtin();
        // (6, 0.438) is a clear-L1 measurement and survives pooling.
        assert_eq!(curve.luminance_from_grey(6).unwrap(), 0.438);
        assert_eq!(curve.luminance_from_grey(0).unwrap(), 0.105);
        assert_eq!(curve.luminance_from_grey(83).unwrap(), 13.7);
    }

    #[test]
    fn midpoint_interpolates_linearly() {
        let curve = CalibrationCurve::new(vec![(10, 1.0), (20, 3.0)]).unwrap();
        assert_eq!(curve.luminance_from_grey(15).unwrap(), 2.0);
    }

    #[test]
    fn out_of_span_grey_is_an_error() {
        let curve = CalibrationCurve::new(vec![(10, 1.0), (20, 3.0)]).unwrap();
        assert!(curve.luminance_from_grey(9).is_err());
        assert!(curve.luminance_from_grey(21).is_err());
    }

    #[test]
    fn non_monotone_anchors_rejected() {
        assert!(CalibrationCurve::new(vec![(10, 1.0), (10, 2.0)]).is_err());
        assert!(CalibrationCurve::new(vec![(10, 2.0), (20, 1.0)]).is_err());
        assert!(CalibrationCurve::new(vec![(10, 2.0)]).is_err());
    }

    #[test]
    fn anchor_file_parsing() {
        let curve = CalibrationCurve::from_text(
            "anchors.txt",
            "# grey,luminance\n0,0.1\n31,1.5\n63, 4.2\n",
        )
        .unwrap();
        assert_eq!(curve.anchors().len(), 3);
        assert_eq!(curve.luminance_from_grey(31).unwrap(), 1.5);
        assert!(CalibrationCurve::from_text("x", "bad line\n").is_err());
    }

    #[test]
    fn object_grey_maps_to_element() {
        assert_eq!(
            ElementKind::for_object_grey(134).unwrap(),
            ElementKind::Clear
        );
        assert_eq!(
            ElementKind::for_object_grey(111).unwrap(),
            ElementKind::Medium
        );
        assert_eq!(ElementKind::for_object_grey(83).unwrap(), ElementKind::Dark);
        assert!(ElementKind::for_object_grey(100).is_err());
    }
}
