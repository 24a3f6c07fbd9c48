//! Trusted evaluation: the confidence-aware confusion matrix, trusted
//! precision/recall/F1/accuracy, the trusted P-R curve, and threshold
//! selection.
//!
//! A prediction is high-confidence when its uncertainty is at or below the
//! cutoff. Crossing that with classification correctness yields four cells:
//! HT, LT, HF, LF. Trusted precision is `HT/(HT+HF)`, trusted recall is
//! `HT/(HT+LT)`, and the operating cutoff is chosen where the (TR, TP) curve
//! meets the diagonal.

use serde::Serialize;

use crate::error::{Error, Result};

/// One evaluated sample: argmax class, ground truth, and the prediction's
/// uncertainty mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrustedPrediction {
    pub predicted_class: usize,
    pub true_class: usize,
    pub uncertainty: f64,
}

impl TrustedPrediction {
    pub fn new(predicted_class: usize, true_class: usize, uncertainty: f64) -> Self {
        Self {
            predicted_class,
            true_class,
            uncertainty,
        }
    }

    fn is_correct(&self) -> bool {
        self.predicted_class == self.true_class
    }
}

/// Cell of the trusted confusion matrix: confidence (High/Low) crossed with
/// correctness (True/False).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrustCell {
    HighTrue,
    LowTrue,
    HighFalse,
    LowFalse,
}

/// Assigns a prediction to its confusion cell. High-confidence means
/// `uncertainty <= cutoff` (boundary inclusive).
pub fn classify_trust(prediction: &TrustedPrediction, uncertainty_cutoff: f64) -> TrustCell {
    let high = prediction.uncertainty <= uncertainty_cutoff;
    match (high, prediction.is_correct()) {
        (true, true) => TrustCell::HighTrue,
        (false, true) => TrustCell::LowTrue,
        (true, false) => TrustCell::HighFalse,
        (false, false) => TrustCell::LowFalse,
    }
}

/// Counts of the four trusted cells; `ht + lt + hf + lf = n` always.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TrustedConfusion {
    pub ht: usize,
    pub lt: usize,
    pub hf: usize,
    pub lf: usize,
    pub n: usize,
}

/// Builds the trusted confusion matrix at one uncertainty cutoff.
pub fn confusion(
    predictions: &[TrustedPrediction],
    uncertainty_cutoff: f64,
) -> Result<TrustedConfusion> {
    if predictions.is_empty() {
        return Err(Error::InvalidInput(
            "cannot build a confusion matrix from zero predictions".into(),
        ));
    }
    let mut counts = TrustedConfusion {
        ht: 0,
        lt: 0,
        hf: 0,
        lf: 0,
        n: predictions.len(),
    };
    for p in predictions {
        match classify_trust(p, uncertainty_cutoff) {
            TrustCell::HighTrue => counts.ht += 1,
            TrustCell::LowTrue => counts.lt += 1,
            TrustCell::HighFalse => counts.hf += 1,
            TrustCell::LowFalse => counts.lf += 1,
        }
    }
    Ok(counts)
}

/// Trusted precision `HT/(HT+HF)`; `None` when nothing is high-confidence.
pub fn trusted_precision(c: &TrustedConfusion) -> Option<f64> {
    let denom = c.ht + c.hf;
    (denom > 0).then(|| c.ht as f64 / denom as f64)
}

/// Trusted recall `HT/(HT+LT)`; `None` when nothing is correct.
pub fn trusted_recall(c: &TrustedConfusion) -> Option<f64> {
    let denom = c.ht + c.lt;
    (denom > 0).then(|| c.ht as f64 / denom as f64)
}

/// Harmonic mean of trusted precision and recall; zero when both are zero.
pub fn trusted_f1(tp: f64, tr: f64) -> f64 {
    if tp + tr == 0.0 {
        0.0
    } else {
        2.0 * tp * tr / (tp + tr)
    }
}

/// Trusted accuracy: the ratio of correct high-confidence predictions among
/// all high-confidence predictions. Shares its formula with
/// [`trusted_precision`]; both names are kept because both metrics are
/// reported.
pub fn trusted_accuracy(c: &TrustedConfusion) -> Option<f64> {
    trusted_precision(c)
}

/// Confidence-blind metrics: plain accuracy plus macro and support-weighted
/// F1 over the observed classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlainMetrics {
    pub accuracy: f64,
    pub macro_f1: f64,
    pub weighted_f1: f64,
}

/// Standard multi-class accuracy and F1 scores, ignoring uncertainty.
pub fn plain_metrics(predictions: &[TrustedPrediction]) -> Result<PlainMetrics> {
    if predictions.is_empty() {
        return Err(Error::InvalidInput(
            "cannot evaluate zero predictions".into(),
        ));
    }
    let classes = predictions
        .iter()
        .map(|p| p.predicted_class.max(p.true_class))
        .max()
        .unwrap()
        + 1;
    let mut tp = vec![0usize; classes];
    let mut fp = vec![0usize; classes];
    let mut fn_ = vec![0usize; classes];
    let mut correct = 0usize;
    for p in predictions {
        if p.is_correct() {
            correct += 1;
            tp[p.true_class] += 1;
        } else {
            fp[p.predicted_class] += 1;
            fn_[p.true_class] += 1;
        }
    }
    // Macro-average over classes observed in either truth or predictions.
    let mut f1 = vec![0.0; classes];
    let mut observed = vec![false; classes];
    for p in predictions {
        observed[p.true_class] = true;
        observed[p.predicted_class] = true;
    }
    for c in 0..classes {
        let precision_denom = tp[c] + fp[c];
        let recall_denom = tp[c] + fn_[c];
        let precision = if precision_denom > 0 {
            tp[c] as f64 / precision_denom as f64
        } else {
            0.0
        };
        let recall = if recall_denom > 0 {
            tp[c] as f64 / recall_denom as f64
        } else {
            0.0
        };
        f1[c] = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
    }
    let observed_count = observed.iter().filter(|&&o| o).count();
    let macro_f1 = f1
        .iter()
        .zip(&observed)
        .filter(|(_, &o)| o)
        .map(|(f, _)| f)
        .sum::<f64>()
        / observed_count as f64;
    let weighted_f1 = (0..classes)
        .map(|c| (tp[c] + fn_[c]) as f64 * f1[c])
        .sum::<f64>()
        / predictions.len() as f64;
    Ok(PlainMetrics {
        accuracy: correct as f64 / predictions.len() as f64,
        macro_f1,
        weighted_f1,
    })
}

/// One point of the trusted P-R curve. Curves carry an explicit flag instead
/// of a silent zero when the precision denominator is empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrPoint {
    pub threshold: f64,
    pub trusted_recall: f64,
    pub trusted_precision: f64,
    pub precision_defined: bool,
}

/// Trusted P-R curve: (threshold, TR, TP) at strictly increasing thresholds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrCurve {
    points: Vec<PrPoint>,
}

impl PrCurve {
    /// Validates externally assembled points: thresholds strictly increasing.
    pub fn from_points(points: Vec<PrPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("curve needs at least one point".into()));
        }
        for pair in points.windows(2) {
            if pair[1].threshold <= pair[0].threshold {
                return Err(Error::InvalidInput(format!(
                    "thresholds must be strictly increasing, got {} then {}",
                    pair[0].threshold, pair[1].threshold
                )));
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[PrPoint] {
        &self.points
    }
}

/// Candidate cutoffs: midpoints between consecutive distinct uncertainty
/// values, plus the endpoints 0 and 1. Trusted metrics are step functions of
/// the cutoff, so these candidates realize every attainable value.
fn candidate_cutoffs(predictions: &[TrustedPrediction]) -> Vec<f64> {
    let mut values: Vec<f64> = predictions.iter().map(|p| p.uncertainty).collect();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values.dedup();
    let mut cutoffs = vec![0.0];
    for pair in values.windows(2) {
        cutoffs.push((pair[0] + pair[1]) / 2.0);
    }
    cutoffs.push(1.0);
    cutoffs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cutoffs.dedup();
    cutoffs
}

/// Sweeps the candidate cutoffs and records (TR, TP) at each.
///
/// Requires at least one correct prediction; otherwise trusted recall is
/// undefined everywhere and the curve is meaningless.
pub fn pr_curve(predictions: &[TrustedPrediction]) -> Result<PrCurve> {
    if predictions.is_empty() {
        return Err(Error::InvalidInput(
            "cannot build a curve from zero predictions".into(),
        ));
    }
    if !predictions.iter().any(TrustedPrediction::is_correct) {
        return Err(Error::NoCorrectPredictions);
    }
    let points = candidate_cutoffs(predictions)
        .into_iter()
        .map(|threshold| {
            let counts = confusion(predictions, threshold).expect("nonempty input");
            let tp = trusted_precision(&counts);
            let tr = trusted_recall(&counts).expect("at least one correct prediction");
            PrPoint {
                threshold,
                trusted_recall: tr,
                trusted_precision: tp.unwrap_or(0.0),
                precision_defined: tp.is_some(),
            }
        })
        .collect();
    Ok(PrCurve { points })
}

/// Picks the cutoff whose point lies closest to the TP = TR diagonal,
/// breaking ties toward the smaller cutoff. Points with undefined precision
/// are skipped.
pub fn select_threshold(curve: &PrCurve) -> Result<f64> {
    let mut best: Option<(f64, f64)> = None;
    for point in &curve.points {
        if !point.precision_defined {
            continue;
        }
        let gap = (point.trusted_precision - point.trusted_recall).abs();
        if best.is_none_or(|(_, best_gap)| gap < best_gap) {
            best = Some((point.threshold, gap));
        }
    }
    best.map(|(threshold, _)| threshold)
        .ok_or(Error::NoValidThreshold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn assert_close(actual: f64, expected: f64, tol: f64) {
        assert!(
            (actual - expected).abs() <= tol,
            "expected {expected}, got {actual} (tol {tol})"
        );
    }

    /// The hand-built evaluation set used across the trusted-metric tests:
    /// at cutoff 0.5 it produces HT=3, LT=2, HF=1, LF=1.
    fn seven_predictions() -> Vec<TrustedPrediction> {
        vec![
            TrustedPrediction::new(0, 0, 0.1), // HT
            TrustedPrediction::new(1, 1, 0.3), // HT
            TrustedPrediction::new(2, 2, 0.5), // HT (boundary inclusive)
            TrustedPrediction::new(0, 0, 0.7), // LT
            TrustedPrediction::new(1, 1, 0.9), // LT
            TrustedPrediction::new(2, 0, 0.2), // HF
            TrustedPrediction::new(1, 2, 0.8), // LF
        ]
    }

    #[test]
    fn classify_trust_covers_all_cells() {
        let cutoff = 0.5;
        assert_eq!(
            classify_trust(&TrustedPrediction::new(0, 0, 0.1), cutoff),
            TrustCell::HighTrue
        );
        assert_eq!(
            classify_trust(&TrustedPrediction::new(0, 1, 0.9), cutoff),
            TrustCell::LowFalse
        );
        // Boundary included in the high-confidence set.
        assert_eq!(
            classify_trust(&TrustedPrediction::new(2, 2, 0.5), cutoff),
            TrustCell::HighTrue
        );
        assert_eq!(
            classify_trust(&TrustedPrediction::new(0, 1, 0.2), cutoff),
            TrustCell::HighFalse
        );
        assert_eq!(
            classify_trust(&TrustedPrediction::new(0, 0, 0.6), cutoff),
            TrustCell::LowTrue
        );
    }

    #[test]
    fn confusion_counts_the_hand_built_set() {
        let counts = confusion(&seven_predictions(), 0.5).unwrap();
        assert_eq!(counts.ht, 3);
        assert_eq!(counts.lt, 2);
        assert_eq!(counts.hf, 1);
        assert_eq!(counts.lf, 1);
        assert_eq!(counts.n, 7);
        assert_eq!(counts.ht + counts.lt + counts.hf + counts.lf, counts.n);
    }

    #[test]
    fn confusion_degenerate_inputs() {
        let all_good: Vec<TrustedPrediction> =
            (0..5).map(|c| TrustedPrediction::new(c, c, 0.0)).collect();
        let counts = confusion(&all_good, 0.3).unwrap();
        assert_eq!(counts.ht, 5);
        assert_eq!(counts.lt + counts.hf + counts.lf, 0);

        let all_bad: Vec<TrustedPrediction> = (0..4)
            .map(|c| TrustedPrediction::new(c, c + 1, 1.0))
            .collect();
        let counts = confusion(&all_bad, 0.5).unwrap();
        assert_eq!(counts.lf, 4);
        assert_eq!(counts.ht + counts.lt + counts.hf, 0);

        assert!(matches!(confusion(&[], 0.5), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn trusted_ratio_metrics() {
        let counts = confusion(&seven_predictions(), 0.5).unwrap();
        assert_close(trusted_precision(&counts).unwrap(), 0.75, 1e-15);
        assert_close(trusted_recall(&counts).unwrap(), 0.6, 1e-15);
        assert_eq!(trusted_accuracy(&counts), trusted_precision(&counts));

        let empty_high = TrustedConfusion {
            ht: 0,
            lt: 3,
            hf: 0,
            lf: 2,
            n: 5,
        };
        assert_eq!(trusted_precision(&empty_high), None);
        assert_close(trusted_recall(&empty_high).unwrap(), 0.0, 1e-15);

        let no_correct = TrustedConfusion {
            ht: 0,
            lt: 0,
            hf: 3,
            lf: 2,
            n: 5,
        };
        assert_eq!(trusted_recall(&no_correct), None);
        assert_close(trusted_precision(&no_correct).unwrap(), 0.0, 1e-15);

        let perfect = TrustedConfusion {
            ht: 4,
            lt: 0,
            hf: 0,
            lf: 0,
            n: 4,
        };
        assert_close(trusted_precision(&perfect).unwrap(), 1.0, 1e-15);
        assert_close(trusted_recall(&perfect).unwrap(), 1.0, 1e-15);
    }

    #[test]
    fn trusted_f1_values() {
        assert_close(trusted_f1(0.75, 0.6), 2.0 / 3.0, 1e-12);
        assert_close(trusted_f1(0.75, 0.6), 0.666667, 1e-6);
        assert_close(trusted_f1(0.4, 0.4), 0.4, 1e-15);
        assert_eq!(trusted_f1(1.0, 0.0), 0.0);
        assert_eq!(trusted_f1(0.0, 0.0), 0.0);
    }

    #[test]
    fn plain_metrics_all_correct() {
        let preds: Vec<TrustedPrediction> = (0..6)
            .map(|i| TrustedPrediction::new(i % 3, i % 3, 0.4))
            .collect();
        let m = plain_metrics(&preds).unwrap();
        assert_eq!(m.accuracy, 1.0);
        assert_eq!(m.macro_f1, 1.0);
        assert_eq!(m.weighted_f1, 1.0);
    }

    #[test]
    fn plain_metrics_binary_half_right() {
        let preds = vec![
            TrustedPrediction::new(0, 0, 0.0),
            TrustedPrediction::new(0, 1, 0.0),
            TrustedPrediction::new(1, 1, 0.0),
            TrustedPrediction::new(1, 0, 0.0),
        ];
        let m = plain_metrics(&preds).unwrap();
        assert_close(m.accuracy, 0.5, 1e-15);
        // Each class: precision 0.5, recall 0.5, F1 0.5.
        assert_close(m.macro_f1, 0.5, 1e-15);
        assert_close(m.weighted_f1, 0.5, 1e-15);
    }

    #[test]
    fn plain_metrics_single_class_truth() {
        let preds = vec![
            TrustedPrediction::new(1, 1, 0.0),
            TrustedPrediction::new(1, 1, 0.0),
            TrustedPrediction::new(1, 1, 0.0),
        ];
        let m = plain_metrics(&preds).unwrap();
        assert_eq!(m.weighted_f1, 1.0);
        assert!(matches!(plain_metrics(&[]), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn curve_endpoints_behave() {
        let preds = seven_predictions();
        let curve = pr_curve(&preds).unwrap();
        let last = curve.points().last().unwrap();
        assert_eq!(last.threshold, 1.0);
        assert_close(last.trusted_recall, 1.0, 1e-15);

        let first = curve.points().first().unwrap();
        assert_eq!(first.threshold, 0.0);
        // All uncertainties exceed zero, so the high set is empty there.
        assert_eq!(first.trusted_recall, 0.0);
        assert!(!first.precision_defined);
        assert_eq!(first.trusted_precision, 0.0);
    }

    #[test]
    fn curve_matches_exhaustive_cutoff_sweep() {
        let preds = seven_predictions();
        let curve = pr_curve(&preds).unwrap();
        for point in curve.points() {
            let counts = confusion(&preds, point.threshold).unwrap();
            assert_close(
                point.trusted_recall,
                trusted_recall(&counts).unwrap(),
                1e-15,
            );
            match trusted_precision(&counts) {
                Some(tp) => {
                    assert!(point.precision_defined);
                    assert_close(point.trusted_precision, tp, 1e-15);
                }
                None => assert!(!point.precision_defined),
            }
        }
        // Thresholds strictly increasing.
        for pair in curve.points().windows(2) {
            assert!(pair[0].threshold < pair[1].threshold);
        }
    }

    #[test]
    fn curve_requires_a_correct_prediction() {
        let all_wrong = vec![
            TrustedPrediction::new(0, 1, 0.2),
            TrustedPrediction::new(1, 0, 0.6),
        ];
        assert!(matches!(
            pr_curve(&all_wrong),
            Err(Error::NoCorrectPredictions)
        ));
    }

    #[test]
    fn select_threshold_prefers_exact_intersection() {
        let points = vec![
            PrPoint {
                threshold: 0.2,
                trusted_recall: 0.3,
                trusted_precision: 0.9,
                precision_defined: true,
            },
            PrPoint {
                threshold: 0.5,
                trusted_recall: 0.7,
                trusted_precision: 0.7,
                precision_defined: true,
            },
            PrPoint {
                threshold: 0.8,
                trusted_recall: 1.0,
                trusted_precision: 0.5,
                precision_defined: true,
            },
        ];
        let curve = PrCurve::from_points(points).unwrap();
        assert_eq!(select_threshold(&curve).unwrap(), 0.5);
    }

    #[test]
    fn select_threshold_ties_break_low() {
        let points = vec![
            PrPoint {
                threshold: 0.25,
                trusted_recall: 0.4,
                trusted_precision: 0.6,
                precision_defined: true,
            },
            PrPoint {
                threshold: 0.75,
                trusted_recall: 0.6,
                trusted_precision: 0.4,
                precision_defined: true,
            },
        ];
        let curve = PrCurve::from_points(points).unwrap();
        assert_eq!(select_threshold(&curve).unwrap(), 0.25);
    }

    #[test]
    fn select_threshold_needs_a_defined_point() {
        let curve = PrCurve::from_points(vec![PrPoint {
            threshold: 0.0,
            trusted_recall: 0.0,
            trusted_precision: 0.0,
            precision_defined: false,
        }])
        .unwrap();
        assert!(matches!(
            select_threshold(&curve),
            Err(Error::NoValidThreshold)
        ));
    }

    #[test]
    fn select_threshold_matches_brute_force_on_hand_built_set() {
        let preds = seven_predictions();
        let curve = pr_curve(&preds).unwrap();
        let chosen = select_threshold(&curve).unwrap();

        // Exhaustive sweep over a dense grid.
        let mut best_gap = f64::INFINITY;
        for i in 0..=10_000 {
            let cutoff = i as f64 / 10_000.0;
            let counts = confusion(&preds, cutoff).unwrap();
            if let (Some(tp), Some(tr)) = (trusted_precision(&counts), trusted_recall(&counts)) {
                best_gap = best_gap.min((tp - tr).abs());
            }
        }
        let counts = confusion(&preds, chosen).unwrap();
        let gap = (trusted_precision(&counts).unwrap() - trusted_recall(&counts).unwrap()).abs();
        assert_close(gap, best_gap, 1e-12);
    }

    proptest! {
        #[test]
        fn recall_is_monotone_in_the_cutoff(
            raw in proptest::collection::vec((0usize..4, 0usize..4, 0.0f64..=1.0), 1..40),
            cut_a in 0.0f64..=1.0,
            cut_b in 0.0f64..=1.0,
        ) {
            let preds: Vec<TrustedPrediction> = raw
                .iter()
                .map(|&(p, t, u)| TrustedPrediction::new(p, t, u))
                .collect();
            let (lo, hi) = if cut_a <= cut_b { (cut_a, cut_b) } else { (cut_b, cut_a) };
            let at_lo = confusion(&preds, lo).unwrap();
            let at_hi = confusion(&preds, hi).unwrap();
            prop_assert!(at_lo.ht <= at_hi.ht);
            prop_assert_eq!(at_lo.ht + at_lo.lt, at_hi.ht + at_hi.lt);
            if let (Some(tr_lo), Some(tr_hi)) = (trusted_recall(&at_lo), trusted_recall(&at_hi)) {
                prop_assert!(tr_lo <= tr_hi);
            }
        }

        #[test]
        fn cells_always_sum_to_n(
            raw in proptest::collection::vec((0usize..5, 0usize..5, 0.0f64..=1.0), 1..60),
            cutoff in 0.0f64..=1.0,
        ) {
            let preds: Vec<TrustedPrediction> = raw
                .iter()
                .map(|&(p, t, u)| TrustedPrediction::new(p, t, u))
                .collect();
            let counts = confusion(&preds, cutoff).unwrap();
            prop_assert_eq!(counts.ht + counts.lt + counts.hf + counts.lf, counts.n);
            prop_assert_eq!(counts.n, preds.len());
            for metric in [
                trusted_precision(&counts),
                trusted_recall(&counts),
                trusted_accuracy(&counts),
            ]
            .into_iter()
            .flatten()
            {
                prop_assert!((0.0..=1.0).contains(&metric));
            }
        }

        #[test]
        fn f1_lies_between_its_arguments(tp in 0.0f64..=1.0, tr in 0.0f64..=1.0) {
            let f1 = trusted_f1(tp, tr);
            prop_assert!((0.0..=1.0).contains(&f1));
            if tp > 0.0 && tr > 0.0 {
                prop_assert!(f1 >= tp.min(tr) - 1e-15);
                prop_assert!(f1 <= tp.max(tr) + 1e-15);
            }
        }
    }
}
