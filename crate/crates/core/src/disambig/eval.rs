//! Pairwise precision, recall and F-measure of a clustering against labels.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairwiseMetrics {
    pub true_positive_pairs: u64,
    pub false_positive_pairs: u64,
    pub false_negative_pairs: u64,
    /// Share of predicted same-cluster pairs that are truly the same entity.
    pub precision: f64,
    /// Share of true same-entity pairs that were predicted together.
    pub recall: f64,
    pub f_measure: f64,
}

/// Enumerates every unordered pair of items. `predicted[i]` and `truth[i]`
/// label item `i`. With no predicted (or no true) pairs the corresponding
/// ratio is 1.
pub fn pairwise_metrics<P: Eq, T: Eq>(predicted: &[P], truth: &[T]) -> PairwiseMetrics {
    assert_eq!(predicted.len(), truth.len(), "label vectors differ in length");
    let n = predicted.len();
    let (mut tp, mut fp, mut fneg) = (0u64, 0u64, 0u64);
    for i in 0..n {
        for j in (i + 1)..n {
            let same_pred = predicted[i] == predicted[j];
            let same_true = truth[i] == truth[j];
            match (same_pred, same_true) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fneg += 1,
                (false, false) => {}
            }
        }
    }
    let ratio = |num: u64, den: u64| if den == 0 { 1.0 } else { num as f64 / den as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fneg);
    let f_measure = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    PairwiseMetrics {
        true_positive_pairs: tp,
        false_positive_pairs: fp,
        false_negative_pairs: fneg,
        precision,
        recall,
        f_measure,
    }
}
