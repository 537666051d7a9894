//! Embedded object-characteristics table for the six evaluation courses:
//! grey level, vertical position and horizontal position of each of the
//! nine destructible objects, in course-path order. Loaded course metadata
//! is cross-checked against this table.

use crate::error::{Error, Result};
use crate::model::{CourseId, HorizontalPos, Shape, VerticalPos};

/// Static features of one object, without run-time geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ObjectFeatures {
    pub course: CourseId,
    pub shape: Shape,
    pub index: u8,
    pub grey: u8,
    pub vertical: VerticalPos,
    pub horizontal: HorizontalPos,
}

impl ObjectFeatures {
    /// Label as logged by the environment, e.g. "A_cube 0".
    pub fn label(&self) -> String {
        format!(
            "{}_{} {}",
            self.course.letter(),
            self.shape.as_str(),
            self.index
        )
    }
}

macro_rules! obj {
    ($course:ident, $shape:ident, $index:literal, $grey:literal, $vert:ident, $horiz:ident) => {
        ObjectFeatures {
            course: CourseId::$course,
            shape: Shape::$shape,
            index: $index,
            grey: $grey,
            vertical: VerticalPos::$vert,
            horizontal: HorizontalPos::$horiz,
        }
    };
}

/// All 54 objects (6 courses x 9 objects), in the order they appear along
/// each course path.
pub const OBJECT_FEATURES: [ObjectFeatures; 54] = [
    obj!(A, Cylinder, 1, 134, Low, OnPath),
    obj!(A, Pyramid, 2, 83, Low, Partial),
    obj!(A, Cube, 1, 83, Medium, OnPath),
    obj!(A, Cube, 2, 83, High, Partial),
    obj!(A, Cylinder, 2, 134, Medium, Partial),
    obj!(A, Pyramid, 0, 111, Medium, OffPath),
    obj!(A, Cylinder, 0, 83, High, OffPath),
    obj!(A, Pyramid, 1, 111, High, OnPath),
    obj!(A, Cube, 0, 83, Low, OffPath),
    obj!(B, Cylinder, 2, 134, Medium, Partial),
    obj!(B, Pyramid, 1, 83, High, OnPath),
    obj!(B, Cube, 0, 134, Low, OffPath),
    obj!(B, Cube, 2, 83, High, Partial),
    obj!(B, Pyramid, 2, 134, Low, Partial),
    obj!(B, Cylinder, 0, 83, High, OffPath),
    obj!(B, Cylinder, 1, 111, Low, OnPath),
    obj!(B, Cube, 1, 111, Medium, OnPath),
    obj!(B, Pyramid, 0, 134, Medium, OffPath),
    obj!(C, Cylinder, 0, 83, High, OffPath),
    obj!(C, Pyramid, 0, 134, Medium, OffPath),
    obj!(C, Pyramid, 2, 134, Low, Partial),
    obj!(C, Cylinder, 2, 134, Medium, Partial),
    obj!(C, Pyramid, 1, 134, High, OnPath),
    obj!(C, Cube, 2, 111, High, Partial),
    obj!(C, Cube, 1, 111, Medium, OnPath),
    obj!(C, Cube, 0, 83, Low, OffPath),
    obj!(C, Cylinder, 1, 111, Low, OnPath),
    obj!(D, Pyramid, 1, 134, High, OnPath),
    obj!(D, Pyramid, 2, 83, Low, Partial),
    obj!(D, Cube, 0, 134, Low, OffPath),
    obj!(D, Pyramid, 0, 134, Medium, OffPath),
    obj!(D, Cylinder, 1, 134, Low, OnPath),
    obj!(D, Cube, 2, 83, High, Partial),
    obj!(D, Cylinder, 2, 111, Medium, Partial),
    obj!(D, Cube, 1, 111, Medium, OnPath),
    obj!(D, Cylinder, 0, 83, High, OffPath),
    obj!(E, Cube, 1, 134, Medium, OnPath),
    obj!(E, Cylinder, 2, 134, Medium, Partial),
    obj!(E, Pyramid, 0, 134, Medium, OffPath),
    obj!(E, Cube, 2, 111, High, Partial),
    obj!(E, Pyramid, 2, 83, Low, Partial),
    obj!(E, Cube, 0, 83, Low, OffPath),
    obj!(E, Cylinder, 0, 83, High, OffPath),
    obj!(E, Cylinder, 1, 111, Low, OnPath),
    obj!(E, Pyramid, 1, 111, High, OnPath),
    obj!(F, Cube, 0, 83, Low, OffPath),
    obj!(F, Cylinder, 1, 111, Low, OnPath),
    obj!(F, Cylinder, 0, 83, High, OffPath),
    obj!(F, Cube, 1, 134, Medium, OnPath),
    obj!(F, Pyramid, 1, 134, High, OnPath),
    obj!(F, Pyramid, 2, 83, Low, Partial),
    obj!(F, Cube, 2, 111, High, Partial),
    obj!(F, Cylinder, 2, 134, Medium, Partial),
    obj!(F, Pyramid, 0, 134, Medium, OffPath),
];

/// Features of a course's nine objects in path order.
pub fn course_features(course: CourseId) -> Vec<&'static ObjectFeatures> {
    OBJECT_FEATURES
        .iter()
        .filter(|o| o.course == course)
        .collect()
}

/// Features of one object looked up by its logged label.
pub fn features_by_label(label: &str) -> Option<&'static ObjectFeatures> {
    OBJECT_FEATURES.iter().find(|o| o.label() == label)
}

/// Checks a loaded object against the embedded table.
pub fn cross_check(
    label: &str,
    grey: u8,
    vertical: VerticalPos,
    horizontal: HorizontalPos,
) -> Result<()> {
    let expected = features_by_label(label)
        .ok_or_else(|| Error::Domain(format!("object '{label}' not in the feature table")))?;
    if expected.grey != grey || expected.vertical != vertical || expected.horizontal != horizontal {
        return Err(Error::Domain(format!(
            "object '{label}': loaded features (grey {grey}, {}, {}) disagree with \
             the reference table (grey {}, {}, {})",
            vertical.as_str(),
            horizontal.as_str(),
            expected.grey,
            expected.vertical.as_str(),
            expected.horizontal.as_str(),
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn every_course_has_nine_objects_three_of_each_shape() {
        for course in CourseId::evaluation_courses() {
            let objs = course_features(course);
            assert_eq!(objs.len(), 9, "course {course}");
            let mut seen = BTreeSet::new();
            for o in &objs {
                assert!((0..=2).contains(&o.index));
                assert!(seen.insert((o.shape, o.index)), "duplicate in {course}");
                assert!(crate::model::OBJECT_GREY_VALUES.contains(&o.grey));
            }
            assert_eq!(seen.len(), 9);
        }
    }

    #[test]
    fn vertical_positions_balanced_per_course() {
        for course in CourseId::evaluation_courses() {
            let objs = course_features(course);
            for v in [VerticalPos::Low, VerticalPos::Medium, VerticalPos::High] {
                assert_eq!(
                    objs.iter().filter(|o| o.vertical == v).count(),
                    3,
                    "course {course} vertical {v:?}"
                );
            }
        }
    }

    #[test]
    fn reference_rows_spot_checked() {
        let o = features_by_label("A_cylinder 1").unwrap();
        assert_eq!(o.grey, 134);
        assert_eq!(o.vertical, VerticalPos::Low);
        assert_eq!(o.horizontal, HorizontalPos::OnPath);

        let o = features_by_label("C_cube 0").unwrap();
        assert_eq!(o.grey, 83);
        assert_eq!(o.vertical, VerticalPos::Low);
        assert_eq!(o.horizontal, HorizontalPos::OffPath);
    }

    #[test]
    fn cross_check_rejects_disagreement() {
        assert!(cross_check("A_cylinder 1", 134, VerticalPos::Low, HorizontalPos::OnPath).is_ok());
        assert!(cross_check("A_cylinder 1", 111, VerticalPos::Low, HorizontalPos::OnPath).is_err());
        assert!(cross_check("Z_cube 9", 83, VerticalPos::Low, HorizontalPos::OnPath).is_err());
    }
}
