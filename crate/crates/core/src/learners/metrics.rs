use serde::{Deserialize, Serialize};

use super::LearnError;
use crate::forecast_eval::Metric;
use crate::text_pipeline::Label;

/// Binary classification counts with "pos" as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl MetricReport {
    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Accuracy => self.accuracy,
            Metric::FMeasure => self.f_measure,
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Precision and recall are 0 when their denominators are 0; F-measure is 0
/// when precision + recall is 0.
pub fn evaluate(predictions: &[Label], gold: &[Label]) -> Result<MetricReport, LearnError> {
    if predictions.len() != gold.len() {
        return Err(LearnError::LengthMismatch(predictions.len(), gold.len()));
    }
    if gold.is_empty() {
        return Err(LearnError::EmptyInput);
    }
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for (p, g) in predictions.iter().zip(gold) {
        match (p.is_positive(), g.is_positive()) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f_measure = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(MetricReport {
        accuracy: ratio(tp + tn, gold.len()),
        precision,
        recall,
        f_measure,
        tp,
        fp,
        tn,
        fn_,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{Negative as N, Positive as P};

    #[test]
    fn accuracy_three_of_four() {
        let r = evaluate(&[P, N, N, P], &[P, N, P, P]).unwrap();
        assert_eq!(r.accuracy, 0.75);
    }

    #[test]
    fn precision_recall_f() {
        // TP=2, FP=1, FN=1
        let r = evaluate(&[P, P, P, N, N], &[P, P, N, P, N]).unwrap();
        assert_eq!((r.tp, r.fp, r.fn_, r.tn), (2, 1, 1, 1));
        assert!((r.precision - 2.0 / 3.0).abs() < 1e-15);
        assert!((r.recall - 2.0 / 3.0).abs() < 1e-15);
        assert!((r.f_measure - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_f_is_zero() {
        let r = evaluate(&[N, P, N], &[P, N, N]).unwrap();
        assert_eq!(r.tp, 0);
        assert_eq!(r.f_measure, 0.0);
        let r = evaluate(&[N, N], &[N, N]).unwrap();
        assert_eq!((r.precision, r.recall, r.f_measure, r.accuracy), (0.0, 0.0, 0.0, 1.0));
    }

    #[test]
    fn errors() {
        assert!(matches!(evaluate(&[P], &[P, N]), Err(LearnError::LengthMismatch(1, 2))));
        assert!(matches!(evaluate(&[], &[]), Err(LearnError::EmptyInput)));
    }
}
