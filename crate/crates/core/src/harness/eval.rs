use super::HarnessError;
use crate::inference::{extract_answer, AnswerFormat, AnswerKind};

/// The comparable form of an answer: what [`extract_answer`] pulls out of
/// it, or the trimmed text when extraction finds nothing.
pub fn normalize_answer(text: &str, fmt: &AnswerFormat) -> String {
    let extracted = extract_answer(text, fmt);
    if extracted.is_empty() {
        text.trim().to_owned()
    } else {
        extracted
    }
}

/// Both sides normalized; numbers compare by value, everything else
/// case-insensitively. An empty prediction is never correct.
pub fn answers_match(predicted: &str, gold: &str, fmt: &AnswerFormat) -> bool {
    let p = normalize_answer(predicted, fmt);
    let g = normalize_answer(gold, fmt);
    if p.is_empty() {
        return false;
    }
    if fmt.kind == AnswerKind::Numeric {
        if let (Ok(a), Ok(b)) = (p.parse::<f64>(), g.parse::<f64>()) {
            return a == b;
        }
    }
    p.to_lowercase() == g.to_lowercase()
}

/// Percentage of predictions matching their gold answers.
pub fn evaluate_accuracy<P: AsRef<str>, G: AsRef<str>>(
    predictions: &[P],
    golds: &[G],
    fmt: &AnswerFormat,
) -> Result<f64, HarnessError> {
    if predictions.len() != golds.len() {
        return Err(HarnessError::LengthMismatch {
            predictions: predictions.len(),
            golds: golds.len(),
        });
    }
    if predictions.is_empty() {
        return Ok(0.0);
    }
    let correct = predictions
        .iter()
        .zip(golds)
        .filter(|(p, g)| answers_match(p.as_ref(), g.as_ref(), fmt))
        .count();
    Ok(100.0 * correct as f64 / predictions.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numeric_values_compare_as_numbers() {
        assert!(answers_match("6", "6.0", &AnswerFormat::numeric()));
        assert!(answers_match("1,200", "1200", &AnswerFormat::numeric()));
        assert!(!answers_match("6", "7", &AnswerFormat::numeric()));
    }

    #[test]
    fn choices_fold_case() {
        let fmt = AnswerFormat::multiple_choice(["A", "B", "C"]).unwrap();
        assert!(answers_match("B", "b", &fmt));
    }

    #[test]
    fn empty_prediction_is_wrong() {
        assert!(!answers_match("", "", &AnswerFormat::free_text()));
    }

    #[test]
    fn accuracy_ratios() {
        let fmt = AnswerFormat::numeric();
        let golds: Vec<String> = (0..100).map(|i| i.to_string()).collect();
        let preds: Vec<String> = (0..100).map(|i| if i < 78 { i } else { i + 1 }.to_string()).collect();
        assert_eq!(evaluate_accuracy(&preds, &golds, &fmt).unwrap(), 78.0);
        assert_eq!(evaluate_accuracy(&["1"; 5], &["2"; 5], &fmt).unwrap(), 0.0);
        assert!(matches!(
            evaluate_accuracy(&["1"], &["1", "2"], &fmt),
            Err(HarnessError::LengthMismatch { .. })
        ));
    }
}
