//! The hull as a run-time classifier.
//!
//! A [`HybridPolicy`] fixes a target false positive rate `x`. If `x` is a
//! hull vertex the instance is classified by that vertex's component; if it
//! falls between two vertices, each instance flips an independent weighted
//! coin to pick one of them, which realizes the interpolated (FP, TP) in
//! expectation. The single knob `x` can be set from operating conditions or
//! constraints, or walked by feedback from the field.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::decision::{self, LinearConstraint, OperatingConditions};
use crate::error::{Error, Result};
use crate::hull::{HullVertex, Provenance, Resolution, RocchHull};
use crate::roc::{RocPoint, Threshold};

/// Cutoff applied to the feed of a binary component (one added as a bare
/// point, with no threshold): the feed carries 1 for Y and 0 for N.
pub const BINARY_CUTOFF: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Prediction {
    Y,
    N,
}

impl fmt::Display for Prediction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Prediction::Y => "Y",
            Prediction::N => "N",
        })
    }
}

impl From<bool> for Prediction {
    fn from(positive: bool) -> Self {
        if positive {
            Prediction::Y
        } else {
            Prediction::N
        }
    }
}

/// Lookup of a classifier's score for the current instance.
pub trait ScoreSource {
    fn score(&self, classifier_id: &str) -> Option<f64>;
}

impl ScoreSource for HashMap<String, f64> {
    fn score(&self, classifier_id: &str) -> Option<f64> {
        self.get(classifier_id).copied()
    }
}

impl ScoreSource for BTreeMap<String, f64> {
    fn score(&self, classifier_id: &str) -> Option<f64> {
        self.get(classifier_id).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ComponentKind {
    /// Y iff the classifier's score is at least `threshold`.
    Scored {
        threshold: f64,
    },
    /// Hard Y/N classifier reporting 1 or 0.
    Binary,
    ConstantNegative,
    ConstantPositive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentClassifier {
    /// `None` for the trivial constant classifiers.
    pub classifier_id: Option<String>,
    pub kind: ComponentKind,
}

impl ComponentClassifier {
    pub fn from_vertex(v: &HullVertex) -> Self {
        match &v.provenance {
            Provenance::NeverAlarm => ComponentClassifier {
                classifier_id: None,
                kind: ComponentKind::ConstantNegative,
            },
            Provenance::AlwaysAlarm => ComponentClassifier {
                classifier_id: None,
                kind: ComponentKind::ConstantPositive,
            },
            Provenance::Classifier {
                classifier_id,
                threshold,
            } => {
                let kind = match threshold {
                    Some(Threshold::Score(t)) => ComponentKind::Scored { threshold: *t },
                    Some(Threshold::PosInf) => ComponentKind::ConstantNegative,
                    Some(Threshold::NegInf) => ComponentKind::ConstantPositive,
                    None => ComponentKind::Binary,
                };
                ComponentClassifier {
                    classifier_id: Some(classifier_id.clone()),
                    kind,
                }
            }
        }
    }

    /// Id of the score feed this component needs, if any.
    pub fn required_feed(&self) -> Option<&str> {
        match self.kind {
            ComponentKind::Scored { .. } | ComponentKind::Binary => self.classifier_id.as_deref(),
            ComponentKind::ConstantNegative | ComponentKind::ConstantPositive => None,
        }
    }

    pub fn decide<S: ScoreSource + ?Sized>(&self, scores: &S) -> Result<Prediction> {
        match self.kind {
            ComponentKind::ConstantNegative => Ok(Prediction::N),
            ComponentKind::ConstantPositive => Ok(Prediction::Y),
            ComponentKind::Scored { threshold } => {
                Ok(Prediction::from(self.feed(scores)? >= threshold))
            }
            ComponentKind::Binary => Ok(Prediction::from(self.feed(scores)? >= BINARY_CUTOFF)),
        }
    }

    fn feed<S: ScoreSource + ?Sized>(&self, scores: &S) -> Result<f64> {
        let id = self.classifier_id.as_deref().unwrap_or_default();
        scores
            .score(id)
            .ok_or_else(|| Error::MissingScore(id.to_string()))
    }

    pub fn label(&self) -> String {
        match (&self.kind, &self.classifier_id) {
            (ComponentKind::ConstantNegative, None) => "never-alarm".into(),
            (ComponentKind::ConstantPositive, None) => "always-alarm".into(),
            (ComponentKind::Scored { threshold }, Some(id)) => format!("{id}@{threshold}"),
            (ComponentKind::Scored { threshold }, None) => format!("@{threshold}"),
            (_, Some(id)) => id.clone(),
            (_, None) => "unnamed".into(),
        }
    }
}

/// Which side of a mixture the coin picked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coin {
    None,
    Left,
    Right,
}

impl fmt::Display for Coin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Coin::None => "none",
            Coin::Left => "left",
            Coin::Right => "right",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub prediction: Prediction,
    pub component: String,
    pub coin: Coin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Dispatch {
    Single {
        component: ComponentClassifier,
    },
    Mixture {
        left: ComponentClassifier,
        right: ComponentClassifier,
        weight: f64,
    },
}

/// The hybrid classifier set to one operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridPolicy {
    /// Target false positive rate.
    pub x: f64,
    pub resolution: Resolution,
    dispatch: Dispatch,
}

impl HybridPolicy {
    pub fn from_resolution(x: f64, resolution: Resolution) -> Self {
        let dispatch = match &resolution {
            Resolution::Vertex { vertex } => Dispatch::Single {
                component: ComponentClassifier::from_vertex(vertex),
            },
            Resolution::Mixture {
                left,
                right,
                weight,
            } => Dispatch::Mixture {
                left: ComponentClassifier::from_vertex(left),
                right: ComponentClassifier::from_vertex(right),
                weight: *weight,
            },
        };
        HybridPolicy {
            x,
            resolution,
            dispatch,
        }
    }

    /// Expected (FP, TP) assuming the components run at their hull rates.
    pub fn expected_point(&self) -> RocPoint {
        self.resolution.expected_point()
    }

    pub fn is_mixture(&self) -> bool {
        matches!(self.dispatch, Dispatch::Mixture { .. })
    }

    /// Score feeds the policy reads.
    pub fn required_feeds(&self) -> Vec<&str> {
        let mut out: Vec<&str> = match &self.dispatch {
            Dispatch::Single { component } => component.required_feed().into_iter().collect(),
            Dispatch::Mixture { left, right, .. } => left
                .required_feed()
                .into_iter()
                .chain(right.required_feed())
                .collect(),
        };
        out.dedup();
        out
    }

    /// Classifies one instance. Mixtures draw one uniform variate from
    /// `rng` per instance; pure vertices draw nothing.
    pub fn classify<S, R>(&self, scores: &S, rng: &mut R) -> Result<Classification>
    where
        S: ScoreSource + ?Sized,
        R: Rng + ?Sized,
    {
        for feed in self.required_feeds() {
            if scores.score(feed).is_none() {
                return Err(Error::MissingScore(feed.to_string()));
            }
        }
        match &self.dispatch {
            Dispatch::Single { component } => Ok(Classification {
                prediction: component.decide(scores)?,
                component: component.label(),
                coin: Coin::None,
            }),
            Dispatch::Mixture {
                left,
                right,
                weight,
            } => {
                let u: f64 = rng.random();
                let (component, coin) = if u < *weight {
                    (right, Coin::Right)
                } else {
                    (left, Coin::Left)
                };
                Ok(Classification {
                    prediction: component.decide(scores)?,
                    component: component.label(),
                    coin,
                })
            }
        }
    }
}

/// Policy realizing false positive rate `x` on the hull.
pub fn policy_for(hull: &RocchHull, x: f64) -> Result<HybridPolicy> {
    Ok(HybridPolicy::from_resolution(x, hull.resolve_fp(x)?))
}

/// How the deployment target is stated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetSpec {
    Conditions(OperatingConditions),
    FpMax {
        fp_max: f64,
    },
    Caseload {
        positives: f64,
        negatives: f64,
        budget: f64,
    },
    Constraint(LinearConstraint),
}

/// Translates a target into the knob setting `x`.
pub fn x_from_conditions(hull: &RocchHull, spec: &TargetSpec) -> Result<f64> {
    match spec {
        TargetSpec::Conditions(c) => {
            c.validate()?;
            Ok(decision::select_min_cost(hull, c).point.fp)
        }
        TargetSpec::FpMax { fp_max } => {
            if !(0.0..=1.0).contains(fp_max) {
                return Err(Error::out_of_range("fp_max", *fp_max));
            }
            Ok(*fp_max)
        }
        TargetSpec::Caseload {
            positives,
            negatives,
            budget,
        } => {
            let k = LinearConstraint::caseload(*positives, *negatives, *budget)?;
            Ok(decision::select_constrained(hull, &k)?.point.fp)
        }
        TargetSpec::Constraint(k) => Ok(decision::select_constrained(hull, k)?.point.fp),
    }
}

/// Policy for a target. Constraint targets keep the exact constrained
/// resolution, which differs from `policy_for(x)` only when the answer lies
/// on a vertical first segment.
pub fn policy_for_target(hull: &RocchHull, spec: &TargetSpec) -> Result<HybridPolicy> {
    let k = match spec {
        TargetSpec::Caseload {
            positives,
            negatives,
            budget,
        } => LinearConstraint::caseload(*positives, *negatives, *budget)?,
        TargetSpec::Constraint(k) => *k,
        _ => return policy_for(hull, x_from_conditions(hull, spec)?),
    };
    let sel = decision::select_constrained(hull, &k)?;
    Ok(HybridPolicy::from_resolution(sel.point.fp, sel.resolution))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    TooManyFalseAlarms,
    TooFewCases,
    Acceptable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeedbackSignal {
    pub direction: Direction,
    /// Optional scale on the step, clamped to (0, 1].
    pub magnitude: Option<f64>,
}

impl FeedbackSignal {
    pub fn new(direction: Direction) -> Self {
        FeedbackSignal {
            direction,
            magnitude: None,
        }
    }
}

impl From<Direction> for FeedbackSignal {
    fn from(direction: Direction) -> Self {
        FeedbackSignal::new(direction)
    }
}

/// One knob turn. Too many false alarms moves `x` left by `step`, too few
/// cases moves it right, both clamped to [0, 1]. "Acceptable" keeps `x`.
/// Returns the new policy and the step to use next (halved after an
/// acceptable signal).
pub fn tune(
    hull: &RocchHull,
    policy: &HybridPolicy,
    feedback: FeedbackSignal,
    step: f64,
) -> Result<(HybridPolicy, f64)> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::out_of_range("step", step));
    }
    let scale = feedback
        .magnitude
        .map_or(1.0, |m| m.clamp(f64::MIN_POSITIVE, 1.0));
    let (x, next_step) = match feedback.direction {
        Direction::TooManyFalseAlarms => ((policy.x - step * scale).max(0.0), step),
        Direction::TooFewCases => ((policy.x + step * scale).min(1.0), step),
        Direction::Acceptable => (policy.x, step / 2.0),
    };
    Ok((policy_for(hull, x)?, next_step))
}

/// Hill-climbs the knob from a stream of feedback signals, halving the
/// step whenever the direction reverses or the result is acceptable.
#[derive(Debug, Clone)]
pub struct KnobTuner {
    hull: RocchHull,
    policy: HybridPolicy,
    step: f64,
    last: Option<Direction>,
}

impl KnobTuner {
    pub fn new(hull: RocchHull, x0: f64, step: f64) -> Result<Self> {
        if !(step > 0.0 && step <= 1.0) {
            return Err(Error::out_of_range("step", step));
        }
        let policy = policy_for(&hull, x0)?;
        Ok(KnobTuner {
            hull,
            policy,
            step,
            last: None,
        })
    }

    pub fn policy(&self) -> &HybridPolicy {
        &self.policy
    }

    pub fn x(&self) -> f64 {
        self.policy.x
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn feedback(&mut self, signal: impl Into<FeedbackSignal>) -> Result<&HybridPolicy> {
        let signal = signal.into();
        let moving = signal.direction != Direction::Acceptable;
        if moving && self.last.is_some_and(|d| d != signal.direction) {
            self.step /= 2.0;
        }
        let (policy, step) = tune(&self.hull, &self.policy, signal, self.step)?;
        self.policy = policy;
        self.step = step;
        if moving {
            self.last = Some(signal.direction);
        }
        Ok(&self.policy)
    }
}
