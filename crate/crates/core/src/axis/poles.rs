use serde::{Deserialize, Serialize};

use super::AxisError;
use crate::annotate::{to_label_vector_with, AnnotationRecord, LabelSelection, LabelVector, Partisanship};
use crate::embed::manhattan_distance;

/// Which annotations define the left pole.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoleStrategy {
    /// Records rated `left` only.
    #[default]
    LeftOnly,
    /// Records rated `left` or `left_center`.
    LeftAndCenter,
}

impl PoleStrategy {
    fn admits(self, p: Partisanship) -> bool {
        match self {
            PoleStrategy::LeftOnly => p == Partisanship::Left,
            PoleStrategy::LeftAndCenter => matches!(p, Partisanship::Left | Partisanship::LeftCenter),
        }
    }
}

/// Left pole = mean label vector of left-rated records; right pole = the
/// observed vector farthest from it in Manhattan distance.
pub fn select_poles(records: &[AnnotationRecord]) -> Result<(LabelVector, LabelVector), AxisError> {
    select_poles_with(records, PoleStrategy::default(), &LabelSelection::default())
}

pub fn select_poles_with(
    records: &[AnnotationRecord],
    strategy: PoleStrategy,
    selection: &LabelSelection,
) -> Result<(LabelVector, LabelVector), AxisError> {
    let vectors: Vec<(Partisanship, LabelVector)> = records
        .iter()
        .map(|r| (r.partisanship, to_label_vector_with(r, selection)))
        .collect();
    let left: Vec<&LabelVector> = vectors
        .iter()
        .filter(|(p, _)| strategy.admits(*p))
        .map(|(_, v)| v)
        .collect();
    if left.is_empty() {
        return Err(AxisError::NoLeftAnnotations);
    }
    let first = &vectors[0].1;
    if vectors.iter().all(|(_, v)| v == first) {
        return Err(AxisError::IdenticalLabelVectors);
    }
    let left_pole = LabelVector::mean(&left);
    let mut best: Option<(f64, &LabelVector)> = None;
    for (_, v) in &vectors {
        let d = manhattan_distance(v.values(), left_pole.values())?;
        best = match best {
            None => Some((d, v)),
            Some((bd, bv)) if d > bd || (d == bd && lexicographically_less(v, bv)) => Some((d, v)),
            keep => keep,
        };
    }
    let (_, right_pole) = best.expect("records are non-empty");
    Ok((left_pole, right_pole.clone()))
}

fn lexicographically_less(a: &LabelVector, b: &LabelVector) -> bool {
    for (x, y) in a.values().iter().zip(b.values()) {
        if x != y {
            return x < y;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotate::{HeadlineRef, QUESTION_COUNT};

    fn record(answers: [bool; QUESTION_COUNT], p: Partisanship) -> AnnotationRecord {
        AnnotationRecord {
            headline_ref: HeadlineRef::original("a"),
            annotator_id: "x".into(),
            binary_answers: answers,
            partisanship: p,
            free_text: None,
        }
    }

    fn answers(on: &[usize]) -> [bool; QUESTION_COUNT] {
        let mut a = [false; QUESTION_COUNT];
        for &i in on {
            a[i] = true;
        }
        a
    }

    #[test]
    fn identical_left_records_give_that_vector() {
        let recs = [
            record(answers(&[2, 5]), Partisanship::Left),
            record(answers(&[2, 5]), Partisanship::Left),
            record(answers(&[3]), Partisanship::Right),
        ];
        let (l, r) = select_poles(&recs).unwrap();
        assert_eq!(l, to_label_vector_with(&recs[0], &LabelSelection::default()));
        assert_eq!(r.values()[1], 1.0);
    }

    #[test]
    fn zero_left_pole_picks_all_ones() {
        let all: Vec<usize> = (0..QUESTION_COUNT).collect();
        let recs = [
            record(answers(&[]), Partisanship::Left),
            record(answers(&all), Partisanship::Neutral),
        ];
        let (l, r) = select_poles(&recs).unwrap();
        assert_eq!(l, LabelVector::zeros());
        assert!(r.values().iter().all(|v| *v == 1.0));
    }

    #[test]
    fn ties_break_lexicographically() {
        // Both candidates are one component away from the zero left pole.
        let recs = [
            record(answers(&[]), Partisanship::Left),
            record(answers(&[2]), Partisanship::Right),
            record(answers(&[3]), Partisanship::Right),
        ];
        let (_, r) = select_poles(&recs).unwrap();
        assert_eq!(&r.values()[..2], &[0.0, 1.0]);
    }

    #[test]
    fn strategy_controls_left_set() {
        let recs = [
            record(answers(&[2]), Partisanship::LeftCenter),
            record(answers(&[3]), Partisanship::Right),
        ];
        assert_eq!(select_poles(&recs), Err(AxisError::NoLeftAnnotations));
        let (l, _) = select_poles_with(&recs, PoleStrategy::LeftAndCenter, &LabelSelection::default()).unwrap();
        assert_eq!(l.values()[0], 1.0);
    }

    #[test]
    fn identical_vectors_rejected() {
        let recs = [
            record(answers(&[4]), Partisanship::Left),
            record(answers(&[4]), Partisanship::Right),
        ];
        assert_eq!(select_poles(&recs), Err(AxisError::IdenticalLabelVectors));
    }
}
