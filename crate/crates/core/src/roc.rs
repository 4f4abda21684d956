//! Scored examples, ROC points and curves.
//!
//! A curve is produced from a ranked list of examples in a single pass:
//! examples are sorted by descending score and a point is emitted every
//! time the score changes, so a run of tied scores produces one diagonal
//! segment instead of an arbitrary staircase.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Actual class of an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassLabel {
    #[serde(rename = "p")]
    Positive,
    #[serde(rename = "n")]
    Negative,
}

impl ClassLabel {
    pub fn is_positive(self) -> bool {
        self == ClassLabel::Positive
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::Positive => "p",
            ClassLabel::Negative => "n",
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "p" => Ok(ClassLabel::Positive),
            "n" => Ok(ClassLabel::Negative),
            other => Err(Error::InvalidInput(format!(
                "label must be `p` or `n`, got `{other}`"
            ))),
        }
    }
}

/// One labeled instance together with the score a classifier assigned to it.
///
/// Higher scores mean "more positive". The weight stands in for duplicating
/// the instance: an example of weight 3 tallies exactly like three copies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredExample {
    pub example_id: String,
    pub label: ClassLabel,
    pub score: f64,
    pub weight: f64,
}

impl ScoredExample {
    pub fn new(example_id: impl Into<String>, label: ClassLabel, score: f64) -> Result<Self> {
        Self::weighted(example_id, label, score, 1.0)
    }

    pub fn weighted(
        example_id: impl Into<String>,
        label: ClassLabel,
        score: f64,
        weight: f64,
    ) -> Result<Self> {
        let ex = ScoredExample {
            example_id: example_id.into(),
            label,
            score,
            weight,
        };
        ex.validate()?;
        Ok(ex)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.score.is_finite() {
            return Err(Error::NonFiniteScore(self.example_id.clone()));
        }
        if !(self.weight.is_finite() && self.weight > 0.0) {
            return Err(Error::InvalidWeight {
                example_id: self.example_id.clone(),
                weight: self.weight,
            });
        }
        Ok(())
    }
}

/// A point in ROC space: false positive rate on x, true positive rate on y.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fp: f64,
    pub tp: f64,
}

impl RocPoint {
    /// The never-alarm corner.
    pub const ORIGIN: RocPoint = RocPoint { fp: 0.0, tp: 0.0 };
    /// The always-alarm corner.
    pub const ALL: RocPoint = RocPoint { fp: 1.0, tp: 1.0 };

    pub fn new(fp: f64, tp: f64) -> Result<Self> {
        let p = RocPoint { fp, tp };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.fp) {
            return Err(Error::out_of_range("false positive rate", self.fp));
        }
        if !(0.0..=1.0).contains(&self.tp) {
            return Err(Error::out_of_range("true positive rate", self.tp));
        }
        Ok(())
    }
}

/// Score cutoff attached to a curve point.
///
/// `Score(t)` means "predict positive iff score >= t". The two sentinels mark
/// the curve endpoints, where no finite cutoff is needed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    PosInf,
    Score(f64),
    NegInf,
}

impl Threshold {
    pub fn value(self) -> f64 {
        match self {
            Threshold::PosInf => f64::INFINITY,
            Threshold::Score(s) => s,
            Threshold::NegInf => f64::NEG_INFINITY,
        }
    }

    pub fn is_sentinel(self) -> bool {
        !matches!(self, Threshold::Score(_))
    }

    /// Decision rule of a scored classifier cut at this threshold.
    pub fn accepts(self, score: f64) -> bool {
        match self {
            Threshold::PosInf => false,
            Threshold::Score(t) => score >= t,
            Threshold::NegInf => true,
        }
    }

    pub fn total_cmp(&self, other: &Self) -> Ordering {
        self.value().total_cmp(&other.value())
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::PosInf => f.write_str("+inf"),
            Threshold::Score(s) => write!(f, "{s}"),
            Threshold::NegInf => f.write_str("-inf"),
        }
    }
}

impl Serialize for Threshold {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Threshold::PosInf => s.serialize_str("+inf"),
            Threshold::Score(v) => s.serialize_f64(*v),
            Threshold::NegInf => s.serialize_str("-inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Threshold {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct ThresholdVisitor;

        impl Visitor<'_> for ThresholdVisitor {
            type Value = Threshold;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a finite number, \"+inf\" or \"-inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Threshold, E> {
                if v.is_finite() {
                    Ok(Threshold::Score(v))
                } else {
                    Err(E::custom("threshold must be finite"))
                }
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Threshold, E> {
                Ok(Threshold::Score(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Threshold, E> {
                Ok(Threshold::Score(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Threshold, E> {
                match v {
                    "+inf" => Ok(Threshold::PosInf),
                    "-inf" => Ok(Threshold::NegInf),
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }
        }

        d.deserialize_any(ThresholdVisitor)
    }
}

/// One vertex of a ROC curve.
///
/// Curves built from scores always carry a threshold. Curves assembled from
/// rates alone (for example fold averages) have `None` on interior points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub threshold: Option<Threshold>,
    #[serde(flatten)]
    pub point: RocPoint,
}

/// ROC curve of one classifier, ordered from (0,0) to (1,1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub classifier_id: String,
    pub points: Vec<CurvePoint>,
}

impl RocCurve {
    /// Builds a curve and checks its invariants.
    pub fn new(classifier_id: impl Into<String>, points: Vec<CurvePoint>) -> Result<Self> {
        let curve = RocCurve {
            classifier_id: classifier_id.into(),
            points,
        };
        curve.validate()?;
        Ok(curve)
    }

    /// Builds a threshold-free curve from rates, adding the corners if absent.
    pub fn from_rates(classifier_id: impl Into<String>, rates: &[RocPoint]) -> Result<Self> {
        let mut points: Vec<CurvePoint> = rates
            .iter()
            .map(|&point| CurvePoint {
                threshold: None,
                point,
            })
            .collect();
        if points.first().map(|p| p.point) != Some(RocPoint::ORIGIN) {
            points.insert(
                0,
                CurvePoint {
                    threshold: None,
                    point: RocPoint::ORIGIN,
                },
            );
        }
        if points.last().map(|p| p.point) != Some(RocPoint::ALL) {
            points.push(CurvePoint {
                threshold: None,
                point: RocPoint::ALL,
            });
        }
        let n = points.len();
        points[0].threshold = Some(Threshold::PosInf);
        points[n - 1].threshold = Some(Threshold::NegInf);
        Self::new(classifier_id, points)
    }

    pub fn validate(&self) -> Result<()> {
        let pts = &self.points;
        if pts.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "curve `{}` needs at least two points",
                self.classifier_id
            )));
        }
        for p in pts {
            p.point.validate()?;
        }
        if pts[0].point != RocPoint::ORIGIN || pts[pts.len() - 1].point != RocPoint::ALL {
            return Err(Error::InvalidInput(format!(
                "curve `{}` must start at (0,0) and end at (1,1)",
                self.classifier_id
            )));
        }
        for w in pts.windows(2) {
            if w[1].point.fp < w[0].point.fp || w[1].point.tp < w[0].point.tp {
                return Err(Error::InvalidInput(format!(
                    "curve `{}` is not monotone",
                    self.classifier_id
                )));
            }
        }
        let mut last: Option<Threshold> = None;
        for t in pts.iter().filter_map(|p| p.threshold) {
            if let Some(prev) = last {
                if t.total_cmp(&prev) != Ordering::Less {
                    return Err(Error::InvalidInput(format!(
                        "curve `{}` thresholds must strictly decrease",
                        self.classifier_id
                    )));
                }
            }
            last = Some(t);
        }
        Ok(())
    }

    pub fn rates(&self) -> impl Iterator<Item = RocPoint> + '_ {
        self.points.iter().map(|p| p.point)
    }

    pub fn auc(&self) -> f64 {
        let pts: Vec<RocPoint> = self.rates().collect();
        auc(&pts)
    }

    /// True positive rate at `fp`, interpolated linearly between vertices.
    /// Where the curve is vertical the highest tp at that fp is returned.
    pub fn tp_at(&self, fp: f64) -> f64 {
        let pts: Vec<RocPoint> = self.rates().collect();
        upper_tp_at(&pts, fp)
    }
}

/// Linear interpolation on a monotone polyline, taking the top of any
/// vertical run.
pub(crate) fn upper_tp_at(pts: &[RocPoint], fp: f64) -> f64 {
    // index of the first vertex with vertex.fp > fp
    let idx = pts.partition_point(|p| p.fp <= fp);
    if idx == 0 {
        return pts[0].tp;
    }
    let left = pts[idx - 1];
    if left.fp == fp || idx == pts.len() {
        return left.tp;
    }
    let right = pts[idx];
    let t = (fp - left.fp) / (right.fp - left.fp);
    left.tp + t * (right.tp - left.tp)
}

/// Trapezoidal area under a piecewise-linear curve given by its vertices.
pub fn auc(points: &[RocPoint]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].fp - w[0].fp) * (w[0].tp + w[1].tp) / 2.0)
        .sum()
}

/// Builds the ROC curve of one classifier from its scored examples.
///
/// Examples are sorted by descending score; a point is emitted whenever the
/// score changes, and a final (1,1) point is appended. Each emitted point
/// records the score of the last example tallied before it as its
/// threshold. Weighted examples add their weight to the tallies.
pub fn generate_roc_curve(examples: &[ScoredExample], classifier_id: &str) -> Result<RocCurve> {
    for ex in examples {
        ex.validate()?;
    }
    let mut sorted: Vec<&ScoredExample> = examples.iter().collect();
    sorted.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then(a.label.cmp(&b.label))
            .then(a.weight.total_cmp(&b.weight))
            .then_with(|| a.example_id.cmp(&b.example_id))
    });

    // Totals are summed in the same order as the running tallies so the
    // final point lands exactly on (1,1).
    let (mut total_pos, mut total_neg) = (0.0, 0.0);
    for ex in &sorted {
        match ex.label {
            ClassLabel::Positive => total_pos += ex.weight,
            ClassLabel::Negative => total_neg += ex.weight,
        }
    }
    if total_pos <= 0.0 || total_neg <= 0.0 {
        return Err(Error::DegenerateClasses);
    }

    let mut points = Vec::new();
    let (mut tcount, mut fcount) = (0.0, 0.0);
    let mut last_score: Option<f64> = None;
    for ex in sorted {
        if last_score != Some(ex.score) {
            let threshold = match last_score {
                None => Threshold::PosInf,
                Some(s) => Threshold::Score(s),
            };
            points.push(CurvePoint {
                threshold: Some(threshold),
                point: RocPoint {
                    fp: fcount / total_neg,
                    tp: tcount / total_pos,
                },
            });
            last_score = Some(ex.score);
        }
        match ex.label {
            ClassLabel::Positive => tcount += ex.weight,
            ClassLabel::Negative => fcount += ex.weight,
        }
    }
    points.push(CurvePoint {
        threshold: Some(Threshold::NegInf),
        point: RocPoint {
            fp: fcount / total_neg,
            tp: tcount / total_pos,
        },
    });

    RocCurve::new(classifier_id, points)
}

/// Weighted confusion-matrix tallies.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp_count: f64,
    pub fp_count: f64,
    pub tn_count: f64,
    pub fn_count: f64,
}

impl ConfusionCounts {
    pub fn positives(&self) -> f64 {
        self.tp_count + self.fn_count
    }

    pub fn negatives(&self) -> f64 {
        self.fp_count + self.tn_count
    }

    /// Tallies the confusion matrix of `score >= threshold` over `examples`.
    pub fn at_threshold(examples: &[ScoredExample], threshold: Threshold) -> Self {
        let mut c = ConfusionCounts::default();
        for ex in examples {
            match (ex.label, threshold.accepts(ex.score)) {
                (ClassLabel::Positive, true) => c.tp_count += ex.weight,
                (ClassLabel::Positive, false) => c.fn_count += ex.weight,
                (ClassLabel::Negative, true) => c.fp_count += ex.weight,
                (ClassLabel::Negative, false) => c.tn_count += ex.weight,
            }
        }
        c
    }

    pub fn rates(&self) -> Result<RocPoint> {
        let counts = [self.tp_count, self.fp_count, self.tn_count, self.fn_count];
        if counts.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::InvalidInput(
                "confusion counts must be finite and non-negative".into(),
            ));
        }
        let (p, n) = (self.positives(), self.negatives());
        if p <= 0.0 || n <= 0.0 {
            return Err(Error::DegenerateClasses);
        }
        RocPoint::new(self.fp_count / n, self.tp_count / p)
    }
}

/// Accuracy of the classifier at `point` when positives have prior `p_pos`.
pub fn accuracy(point: RocPoint, p_pos: f64) -> Result<f64> {
    if !(p_pos > 0.0 && p_pos < 1.0) {
        return Err(Error::out_of_range("positive class prior", p_pos));
    }
    Ok(p_pos * point.tp + (1.0 - p_pos) * (1.0 - point.fp))
}

/// Screening metrics of one operating point over a population of
/// `positives` positives and `negatives` negatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointMetrics {
    /// `None` when nothing is selected.
    pub precision: Option<f64>,
    pub recall: f64,
    /// `None` when nothing is selected.
    pub lift: Option<f64>,
}

pub fn point_metrics(point: RocPoint, positives: f64, negatives: f64) -> Result<PointMetrics> {
    if !(positives > 0.0 && negatives > 0.0) {
        return Err(Error::DegenerateClasses);
    }
    let hits = point.tp * positives;
    let selected = hits + point.fp * negatives;
    let (precision, lift) = if selected > 0.0 {
        let rate = selected / (positives + negatives);
        (Some(hits / selected), Some(point.tp / rate))
    } else {
        (None, None)
    };
    Ok(PointMetrics {
        precision,
        recall: point.tp,
        lift,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdMetrics {
    pub threshold: Option<Threshold>,
    pub point: RocPoint,
    pub metrics: PointMetrics,
}

/// Precision, recall and lift at every interior point of `curve`.
pub fn threshold_curve_metrics(
    curve: &RocCurve,
    positives: f64,
    negatives: f64,
) -> Result<Vec<ThresholdMetrics>> {
    let n = curve.points.len();
    curve
        .points
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != 0 && *i != n - 1)
        .map(|(_, cp)| {
            Ok(ThresholdMetrics {
                threshold: cp.threshold,
                point: cp.point,
                metrics: point_metrics(cp.point, positives, negatives)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex(id: &str, label: ClassLabel, score: f64) -> ScoredExample {
        ScoredExample::new(id, label, score).unwrap()
    }

    fn pts(curve: &RocCurve) -> Vec<(f64, f64)> {
        curve.rates().map(|p| (p.fp, p.tp)).collect()
    }

    use ClassLabel::{Negative as N, Positive as P};

    #[test]
    fn label_round_trip() {
        for l in [P, N] {
            assert_eq!(l.to_string().parse::<ClassLabel>().unwrap(), l);
        }
        assert!("x".parse::<ClassLabel>().is_err());
    }

    #[test]
    fn tie_group_emits_no_intermediate_point() {
        let examples = vec![
            ex("a", P, 0.9),
            ex("b", N, 0.8),
            ex("c", P, 0.7),
            ex("d", N, 0.7),
            ex("e", N, 0.5),
        ];
        let curve = generate_roc_curve(&examples, "c1").unwrap();
        assert_eq!(
            pts(&curve),
            vec![
                (0.0, 0.0),
                (0.0, 0.5),
                (1.0 / 3.0, 0.5),
                (2.0 / 3.0, 1.0),
                (1.0, 1.0)
            ]
        );
        let th: Vec<_> = curve.points.iter().map(|p| p.threshold.unwrap()).collect();
        assert_eq!(
            th,
            vec![
                Threshold::PosInf,
                Threshold::Score(0.9),
                Threshold::Score(0.8),
                Threshold::Score(0.7),
                Threshold::NegInf
            ]
        );
    }

    #[test]
    fn perfect_ranking_reaches_top_left() {
        let examples = vec![
            ex("a", P, 4.0),
            ex("b", P, 3.0),
            ex("c", N, 2.0),
            ex("d", N, 1.0),
        ];
        let curve = generate_roc_curve(&examples, "c").unwrap();
        assert_eq!(
            pts(&curve),
            vec![(0.0, 0.0), (0.0, 0.5), (0.0, 1.0), (0.5, 1.0), (1.0, 1.0)]
        );
        assert_eq!(curve.auc(), 1.0);
    }

    #[test]
    fn single_tie_group_is_diagonal() {
        let examples = vec![ex("a", P, 1.0), ex("b", N, 1.0), ex("c", N, 1.0)];
        let curve = generate_roc_curve(&examples, "c").unwrap();
        assert_eq!(pts(&curve), vec![(0.0, 0.0), (1.0, 1.0)]);
        assert_eq!(curve.auc(), 0.5);
    }

    #[test]
    fn thresholds_reproduce_emitted_points() {
        let examples = vec![
            ex("a", P, 0.9),
            ex("b", N, 0.8),
            ex("c", P, 0.7),
            ex("d", N, 0.7),
            ex("e", N, 0.5),
        ];
        let curve = generate_roc_curve(&examples, "c").unwrap();
        for cp in &curve.points {
            let counts = ConfusionCounts::at_threshold(&examples, cp.threshold.unwrap());
            assert_eq!(counts.rates().unwrap(), cp.point);
        }
    }

    #[test]
    fn degenerate_and_invalid_inputs() {
        let only_pos = vec![ex("a", P, 1.0), ex("b", P, 0.0)];
        assert!(matches!(
            generate_roc_curve(&only_pos, "c"),
            Err(Error::DegenerateClasses)
        ));
        assert!(matches!(
            generate_roc_curve(&[], "c"),
            Err(Error::DegenerateClasses)
        ));
        assert!(ScoredExample::new("a", P, f64::NAN).is_err());
        assert!(ScoredExample::new("a", P, f64::INFINITY).is_err());
        assert!(ScoredExample::weighted("a", P, 1.0, 0.0).is_err());
        let raw = vec![
            ScoredExample {
                example_id: "x".into(),
                label: P,
                score: f64::NAN,
                weight: 1.0,
            },
            ex("y", N, 0.0),
        ];
        assert!(matches!(
            generate_roc_curve(&raw, "c"),
            Err(Error::NonFiniteScore(_))
        ));
    }

    #[test]
    fn weights_add_to_tallies() {
        let weighted = vec![
            ScoredExample::weighted("a", P, 0.9, 3.0).unwrap(),
            ex("b", N, 0.5),
            ex("c", P, 0.1),
        ];
        let curve = generate_roc_curve(&weighted, "w").unwrap();
        assert_eq!(
            pts(&curve),
            vec![(0.0, 0.0), (0.0, 0.75), (1.0, 0.75), (1.0, 1.0)]
        );
    }

    #[test]
    fn rates_from_counts() {
        let c = ConfusionCounts {
            tp_count: 50.0,
            fn_count: 50.0,
            fp_count: 20.0,
            tn_count: 80.0,
        };
        assert_eq!(c.rates().unwrap(), RocPoint { fp: 0.2, tp: 0.5 });
        let never = ConfusionCounts {
            tp_count: 0.0,
            fn_count: 7.0,
            fp_count: 0.0,
            tn_count: 9.0,
        };
        assert_eq!(never.rates().unwrap(), RocPoint::ORIGIN);
        let always = ConfusionCounts {
            tp_count: 7.0,
            fn_count: 0.0,
            fp_count: 9.0,
            tn_count: 0.0,
        };
        assert_eq!(always.rates().unwrap(), RocPoint::ALL);
        let no_neg = ConfusionCounts {
            tp_count: 1.0,
            ..Default::default()
        };
        assert!(no_neg.rates().is_err());
    }

    #[test]
    fn accuracy_values() {
        let acc = accuracy(RocPoint::ORIGIN, 1.0 / 1000.0).unwrap();
        assert!((acc - 0.999).abs() < 1e-15);
        assert!((accuracy(RocPoint::ALL, 0.3).unwrap() - 0.3).abs() < 1e-15);
        assert!(accuracy(RocPoint::ALL, 0.0).is_err());
        assert!(accuracy(RocPoint::ALL, 1.0).is_err());
    }

    #[test]
    fn accuracy_matches_counting() {
        // 10 positives (5 flagged) and 10 negatives (2 flagged)
        let mut c = ConfusionCounts::default();
        for i in 0..10 {
            if i < 5 {
                c.tp_count += 1.0;
            } else {
                c.fn_count += 1.0;
            }
            if i < 2 {
                c.fp_count += 1.0;
            } else {
                c.tn_count += 1.0;
            }
        }
        let point = c.rates().unwrap();
        assert_eq!(point, RocPoint { fp: 0.2, tp: 0.5 });
        let counted = (c.tp_count + c.tn_count) / (c.positives() + c.negatives());
        assert!((accuracy(point, 0.5).unwrap() - counted).abs() < 1e-15);
        assert!((counted - 0.65).abs() < 1e-15);
    }

    #[test]
    fn screening_metrics() {
        let m = point_metrics(RocPoint { fp: 0.0, tp: 0.5 }, 50.0, 50.0).unwrap();
        assert_eq!(m.precision, Some(1.0));
        assert_eq!(m.recall, 0.5);
        assert_eq!(m.lift, Some(2.0));

        let m = point_metrics(RocPoint::ALL, 20.0, 100.0).unwrap();
        assert!((m.precision.unwrap() - 20.0 / 120.0).abs() < 1e-15);
        assert_eq!(m.recall, 1.0);
        assert!((m.lift.unwrap() - 1.0).abs() < 1e-15);

        let m = point_metrics(RocPoint { fp: 0.2, tp: 0.2 }, 30.0, 30.0).unwrap();
        assert!((m.precision.unwrap() - 0.5).abs() < 1e-15);
        assert!((m.lift.unwrap() - 1.0).abs() < 1e-15);

        let m = point_metrics(RocPoint::ORIGIN, 30.0, 30.0).unwrap();
        assert_eq!(m.precision, None);
        assert_eq!(m.lift, None);
    }

    #[test]
    fn curve_metrics_skip_endpoints() {
        let examples = vec![
            ex("a", P, 4.0),
            ex("b", P, 3.0),
            ex("c", N, 2.0),
            ex("d", N, 1.0),
        ];
        let curve = generate_roc_curve(&examples, "c").unwrap();
        let rows = threshold_curve_metrics(&curve, 2.0, 2.0).unwrap();
        assert_eq!(rows.len(), curve.points.len() - 2);
        assert_eq!(rows[0].metrics.precision, Some(1.0));
    }

    #[test]
    fn threshold_serde() {
        let json =
            serde_json::to_string(&[Threshold::PosInf, Threshold::Score(0.25), Threshold::NegInf])
                .unwrap();
        assert_eq!(json, r#"["+inf",0.25,"-inf"]"#);
        let back: Vec<Threshold> = serde_json::from_str(&json).unwrap();
        assert_eq!(back[1], Threshold::Score(0.25));
        assert!(serde_json::from_str::<Threshold>("\"nan\"").is_err());
    }

    #[test]
    fn tp_at_interpolates() {
        let curve = RocCurve::from_rates(
            "r",
            &[RocPoint { fp: 0.0, tp: 0.4 }, RocPoint { fp: 0.5, tp: 0.9 }],
        )
        .unwrap();
        assert_eq!(curve.tp_at(0.0), 0.4);
        assert!((curve.tp_at(0.25) - 0.65).abs() < 1e-15);
        assert_eq!(curve.tp_at(1.0), 1.0);
    }
}
