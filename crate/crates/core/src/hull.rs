//! The ROC convex hull.
//!
//! The hull is the upper-left convex frontier of every classifier point in
//! ROC space, always anchored by the two trivial classifiers at (0,0) and
//! (1,1). Vertices are the only classifiers that can ever be optimal for a
//! linear cost model, so a hull stores just those plus the points that sit
//! exactly on a hull edge (kept in an auxiliary list, since they tie with the
//! edge's endpoints and are not dominated).

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roc::{self, RocCurve, RocPoint, Threshold};
use crate::EPS;

/// Which runnable decision rule a hull point came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    /// Constant "N"; sits at (0,0).
    NeverAlarm,
    /// Constant "Y"; sits at (1,1).
    AlwaysAlarm,
    /// A classifier, cut at `threshold` if it is a scored one. Points added
    /// without a threshold are binary classifiers.
    Classifier {
        classifier_id: String,
        threshold: Option<Threshold>,
    },
}

impl Provenance {
    pub fn is_degenerate(&self) -> bool {
        !matches!(self, Provenance::Classifier { .. })
    }

    pub fn classifier_id(&self) -> Option<&str> {
        match self {
            Provenance::Classifier { classifier_id, .. } => Some(classifier_id),
            _ => None,
        }
    }

    /// Deterministic preference when several classifiers share a point:
    /// trivial classifiers first, then lexicographic id, then higher cutoff.
    fn preference(&self, other: &Self) -> Ordering {
        fn rank(p: &Provenance) -> u8 {
            match p {
                Provenance::NeverAlarm => 0,
                Provenance::AlwaysAlarm => 1,
                Provenance::Classifier { .. } => 2,
            }
        }
        rank(self)
            .cmp(&rank(other))
            .then_with(|| match (self, other) {
                (
                    Provenance::Classifier {
                        classifier_id: a,
                        threshold: ta,
                    },
                    Provenance::Classifier {
                        classifier_id: b,
                        threshold: tb,
                    },
                ) => a.cmp(b).then_with(|| {
                    let va = ta.map_or(f64::NAN, Threshold::value);
                    let vb = tb.map_or(f64::NAN, Threshold::value);
                    vb.total_cmp(&va)
                }),
                _ => Ordering::Equal,
            })
    }

    pub fn label(&self) -> String {
        match self {
            Provenance::NeverAlarm => "never-alarm".into(),
            Provenance::AlwaysAlarm => "always-alarm".into(),
            Provenance::Classifier {
                classifier_id,
                threshold: Some(t),
            } => format!("{classifier_id}@{t}"),
            Provenance::Classifier {
                classifier_id,
                threshold: None,
            } => classifier_id.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullVertex {
    pub point: RocPoint,
    pub provenance: Provenance,
}

impl HullVertex {
    pub fn never_alarm() -> Self {
        HullVertex {
            point: RocPoint::ORIGIN,
            provenance: Provenance::NeverAlarm,
        }
    }

    pub fn always_alarm() -> Self {
        HullVertex {
            point: RocPoint::ALL,
            provenance: Provenance::AlwaysAlarm,
        }
    }

    /// A classifier point; `threshold` is `None` for binary classifiers.
    pub fn classifier(
        classifier_id: impl Into<String>,
        point: RocPoint,
        threshold: Option<Threshold>,
    ) -> Self {
        HullVertex {
            point,
            provenance: Provenance::Classifier {
                classifier_id: classifier_id.into(),
                threshold,
            },
        }
    }

    fn order(&self, other: &Self) -> Ordering {
        self.point
            .fp
            .total_cmp(&other.point.fp)
            .then(self.point.tp.total_cmp(&other.point.tp))
            .then_with(|| self.provenance.preference(&other.provenance))
    }
}

/// Something that can be folded into a hull.
#[derive(Debug, Clone)]
pub enum HullInput {
    Curve(RocCurve),
    Point(HullVertex),
}

impl From<RocCurve> for HullInput {
    fn from(c: RocCurve) -> Self {
        HullInput::Curve(c)
    }
}

impl From<HullVertex> for HullInput {
    fn from(v: HullVertex) -> Self {
        HullInput::Point(v)
    }
}

impl HullInput {
    /// Candidate points; curve endpoints with sentinel thresholds are the
    /// trivial classifiers and are left to the hull's own corners.
    fn candidates(self) -> Result<Vec<HullVertex>> {
        let out = match self {
            HullInput::Point(v) => vec![v],
            HullInput::Curve(curve) => curve
                .points
                .into_iter()
                .filter(|cp| !cp.threshold.is_some_and(Threshold::is_sentinel))
                .map(|cp| HullVertex::classifier(&curve.classifier_id, cp.point, cp.threshold))
                .collect(),
        };
        for v in &out {
            if !(v.point.fp.is_finite() && v.point.tp.is_finite()) {
                return Err(Error::InvalidInput("non-finite ROC point".into()));
            }
            v.point.validate()?;
        }
        Ok(out)
    }
}

/// How a target false positive rate is realized on the hull.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Resolution {
    Vertex {
        vertex: HullVertex,
    },
    /// Use `right` with probability `weight`, otherwise `left`.
    Mixture {
        left: HullVertex,
        right: HullVertex,
        weight: f64,
    },
}

impl Resolution {
    /// Expected (fp, tp) of the decision rule.
    pub fn expected_point(&self) -> RocPoint {
        match self {
            Resolution::Vertex { vertex } => vertex.point,
            Resolution::Mixture {
                left,
                right,
                weight,
            } => RocPoint {
                fp: left.point.fp + weight * (right.point.fp - left.point.fp),
                tp: left.point.tp + weight * (right.point.tp - left.point.tp),
            },
        }
    }

    pub fn vertices(&self) -> Vec<&HullVertex> {
        match self {
            Resolution::Vertex { vertex } => vec![vertex],
            Resolution::Mixture { left, right, .. } => vec![left, right],
        }
    }
}

fn cross(o: RocPoint, a: RocPoint, b: RocPoint) -> f64 {
    (a.fp - o.fp) * (b.tp - o.tp) - (a.tp - o.tp) * (b.fp - o.fp)
}

/// Non-right turn (within tolerance) means the middle point is not a vertex.
fn not_right_turn(o: RocPoint, a: RocPoint, b: RocPoint) -> bool {
    cross(o, a, b) >= -EPS
}

fn segment_slope(a: RocPoint, b: RocPoint) -> f64 {
    let dx = b.fp - a.fp;
    if dx == 0.0 {
        f64::INFINITY
    } else {
        (b.tp - a.tp) / dx
    }
}

/// The ROC convex hull: vertices from (0,0) to (1,1) with strictly
/// decreasing segment slopes.
///
/// Only the first segment can be vertical (a classifier at fp = 0 with
/// tp > 0); its slope is reported as `f64::INFINITY`.
#[derive(Debug, Clone, PartialEq)]
pub struct RocchHull {
    vertices: Vec<HullVertex>,
    auxiliary: Vec<HullVertex>,
    slopes: Vec<f64>,
}

impl Default for RocchHull {
    fn default() -> Self {
        Self::empty()
    }
}

impl RocchHull {
    /// The random-guess diagonal.
    pub fn empty() -> Self {
        Self::from_sorted(
            vec![HullVertex::never_alarm(), HullVertex::always_alarm()],
            vec![],
        )
    }

    pub fn build<I, T>(inputs: I) -> Result<Self>
    where
        I: IntoIterator<Item = T>,
        T: Into<HullInput>,
    {
        let mut all = vec![HullVertex::never_alarm(), HullVertex::always_alarm()];
        for input in inputs {
            all.extend(input.into().candidates()?);
        }
        Ok(Self::build_from_candidates(all))
    }

    pub fn from_points<I: IntoIterator<Item = HullVertex>>(points: I) -> Result<Self> {
        Self::build(points.into_iter().map(HullInput::Point))
    }

    /// Andrew's monotone chain, upper half only.
    fn build_from_candidates(mut all: Vec<HullVertex>) -> Self {
        all.sort_by(HullVertex::order);

        let mut chain: Vec<HullVertex> = Vec::new();
        let mut rest: Vec<HullVertex> = Vec::new();
        for v in all {
            if chain.last().is_some_and(|last| last.point == v.point) {
                // same coordinates: the earlier one is preferred
                rest.push(v);
                continue;
            }
            while chain.len() >= 2
                && not_right_turn(
                    chain[chain.len() - 2].point,
                    chain[chain.len() - 1].point,
                    v.point,
                )
            {
                rest.push(chain.pop().expect("len >= 2"));
            }
            chain.push(v);
        }

        let mut hull = Self::from_sorted(chain, vec![]);
        hull.auxiliary = hull.filter_on_hull(rest);
        hull
    }

    fn from_sorted(vertices: Vec<HullVertex>, auxiliary: Vec<HullVertex>) -> Self {
        let slopes = vertices
            .windows(2)
            .map(|w| segment_slope(w[0].point, w[1].point))
            .collect();
        RocchHull {
            vertices,
            auxiliary,
            slopes,
        }
    }

    fn filter_on_hull(&self, candidates: Vec<HullVertex>) -> Vec<HullVertex> {
        let mut aux: Vec<HullVertex> = candidates
            .into_iter()
            .filter(|v| !v.provenance.is_degenerate() && self.is_on_hull(v.point))
            .collect();
        aux.sort_by(HullVertex::order);
        aux.dedup();
        aux
    }

    /// Rebuilds a hull from stored parts, checking every invariant.
    pub fn from_parts(vertices: Vec<HullVertex>, auxiliary: Vec<HullVertex>) -> Result<Self> {
        let bad = |m: &str| Err(Error::InvalidHull(m.to_string()));
        if vertices.len() < 2 {
            return bad("a hull needs at least the two corner vertices");
        }
        for v in vertices.iter().chain(&auxiliary) {
            v.point.validate()?;
        }
        let first = &vertices[0];
        let last = &vertices[vertices.len() - 1];
        if first.point != RocPoint::ORIGIN || first.provenance != Provenance::NeverAlarm {
            return bad("first vertex must be the never-alarm classifier at (0,0)");
        }
        if last.point != RocPoint::ALL || last.provenance != Provenance::AlwaysAlarm {
            return bad("last vertex must be the always-alarm classifier at (1,1)");
        }
        for (i, w) in vertices.windows(2).enumerate() {
            let (a, b) = (w[0].point, w[1].point);
            if b.fp < a.fp || b.tp < a.tp || a == b {
                return bad("vertices must be ordered and distinct");
            }
            if b.fp == a.fp && i != 0 {
                return bad("only the first segment may be vertical");
            }
        }
        for w in vertices.windows(3) {
            if not_right_turn(w[0].point, w[1].point, w[2].point) {
                return bad("vertices are not strictly convex");
            }
        }
        let hull = Self::from_sorted(vertices, vec![]);
        for v in &auxiliary {
            if v.provenance.is_degenerate() || !hull.is_on_hull(v.point) {
                return bad("auxiliary point is not on the hull");
            }
        }
        let aux_len = auxiliary.len();
        let mut hull = hull;
        hull.auxiliary = hull.filter_on_hull(auxiliary);
        if hull.auxiliary.len() != aux_len {
            return bad("duplicate auxiliary points");
        }
        Ok(hull)
    }

    pub fn vertices(&self) -> &[HullVertex] {
        &self.vertices
    }

    /// Points on a hull edge (or sharing a vertex position) that are not
    /// themselves vertices.
    pub fn auxiliary(&self) -> &[HullVertex] {
        &self.auxiliary
    }

    /// Slope of each segment, left to right.
    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn vertex_points(&self) -> Vec<RocPoint> {
        self.vertices.iter().map(|v| v.point).collect()
    }

    /// Folds one more curve or point into the hull.
    ///
    /// Returns the new hull and whether any new point became a vertex.
    /// The result is the same hull a batch build over everything inserted
    /// so far would produce.
    pub fn insert(&self, input: impl Into<HullInput>) -> Result<(RocchHull, bool)> {
        let mut hull = self.clone();
        let mut extended = false;
        for v in input.into().candidates()? {
            extended |= hull.insert_one(v);
        }
        Ok((hull, extended))
    }

    fn insert_one(&mut self, q: HullVertex) -> bool {
        let pos = self
            .vertices
            .partition_point(|v| v.order(&q) == Ordering::Less);

        // exact duplicate of a vertex position
        let dup = [pos.checked_sub(1), Some(pos)]
            .into_iter()
            .flatten()
            .find(|&i| i < self.vertices.len() && self.vertices[i].point == q.point);
        if let Some(i) = dup {
            let mut q = q;
            if q.provenance.preference(&self.vertices[i].provenance) == Ordering::Less {
                std::mem::swap(&mut self.vertices[i], &mut q);
            }
            let mut aux = std::mem::take(&mut self.auxiliary);
            aux.push(q);
            self.auxiliary = self.filter_on_hull(aux);
            return false;
        }

        // (0,0) sorts first and (1,1) last, so pos is strictly inside
        let (a, b) = (self.vertices[pos - 1].point, self.vertices[pos].point);
        if not_right_turn(a, q.point, b) {
            let mut aux = std::mem::take(&mut self.auxiliary);
            aux.push(q);
            self.auxiliary = self.filter_on_hull(aux);
            return false;
        }

        let mut right = self.vertices.split_off(pos);
        let mut left = std::mem::take(&mut self.vertices);
        let mut removed = Vec::new();
        while left.len() >= 2
            && not_right_turn(
                left[left.len() - 2].point,
                left[left.len() - 1].point,
                q.point,
            )
        {
            removed.push(left.pop().expect("len >= 2"));
        }
        let mut drop_front = 0;
        while right.len() - drop_front >= 2
            && not_right_turn(
                q.point,
                right[drop_front].point,
                right[drop_front + 1].point,
            )
        {
            drop_front += 1;
        }
        removed.extend(right.drain(..drop_front));

        left.push(q);
        left.extend(right);
        let aux = std::mem::take(&mut self.auxiliary);
        *self = Self::from_sorted(left, vec![]);
        let mut candidates = aux;
        candidates.extend(removed);
        self.auxiliary = self.filter_on_hull(candidates);
        true
    }

    /// True positive rate of the hull at `fp`. At fp = 0 this is the
    /// highest vertex on the fp = 0 axis.
    pub fn tp_at(&self, fp: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&fp) {
            return Err(Error::out_of_range("false positive rate", fp));
        }
        Ok(self.tp_at_unchecked(fp))
    }

    fn tp_at_unchecked(&self, fp: f64) -> f64 {
        roc::upper_tp_at(&self.vertex_points(), fp)
    }

    /// Whether `p` lies on the hull boundary (within tolerance).
    pub fn is_on_hull(&self, p: RocPoint) -> bool {
        (self.tp_at_unchecked(p.fp) - p.tp).abs() <= EPS
    }

    /// Whether `p` lies on or below the hull.
    pub fn dominates(&self, p: RocPoint) -> bool {
        p.tp <= self.tp_at_unchecked(p.fp) + EPS
    }

    pub fn auc(&self) -> f64 {
        roc::auc(&self.vertex_points())
    }

    /// Slope of the segment left of vertex `i`; the first vertex is treated
    /// as attached to a segment of infinite slope.
    pub fn left_slope(&self, i: usize) -> f64 {
        if i == 0 {
            f64::INFINITY
        } else {
            self.slopes[i - 1]
        }
    }

    /// Slope of the segment right of vertex `i`; the last vertex is treated
    /// as attached to a segment of zero slope.
    pub fn right_slope(&self, i: usize) -> f64 {
        self.slopes.get(i).copied().unwrap_or(0.0)
    }

    /// Index of the vertex where the hull has slope `m`.
    ///
    /// If some segment has slope `m` (up to a relative 1e-12) its left,
    /// smaller-fp endpoint is chosen. `m` must be non-negative; `+inf`
    /// selects the first vertex.
    pub fn slope_vertex_index(&self, m: f64) -> usize {
        debug_assert!(m >= 0.0, "slope must be non-negative, got {m}");
        let cutoff = m + EPS * m.max(1.0);
        let last = self.vertices.len() - 1;
        // slopes strictly decrease, so a binary search over them suffices
        self.slopes.partition_point(|&s| s > cutoff).min(last)
    }

    pub fn slope_vertex(&self, m: f64) -> &HullVertex {
        &self.vertices[self.slope_vertex_index(m)]
    }

    /// Realizes false positive rate `x` with one vertex or a coin flip
    /// between the two vertices bracketing it.
    pub fn resolve_fp(&self, x: f64) -> Result<Resolution> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::out_of_range("false positive rate", x));
        }
        // last vertex within tolerance of x (the top of a vertical run)
        let upto = self.vertices.partition_point(|v| v.point.fp <= x + EPS);
        let hit = upto
            .checked_sub(1)
            .filter(|&i| (self.vertices[i].point.fp - x).abs() <= EPS);
        if let Some(i) = hit {
            return Ok(Resolution::Vertex {
                vertex: self.vertices[i].clone(),
            });
        }
        let (l, r) = (&self.vertices[upto - 1], &self.vertices[upto]);
        let weight = (x - l.point.fp) / (r.point.fp - l.point.fp);
        Ok(Resolution::Mixture {
            left: l.clone(),
            right: r.clone(),
            weight,
        })
    }

    /// Resolution for the point a fraction `t` of the way along segment
    /// `seg` (from vertex `seg` to vertex `seg + 1`).
    pub fn resolve_on_segment(&self, seg: usize, t: f64) -> Resolution {
        let t = t.clamp(0.0, 1.0);
        if t <= EPS {
            Resolution::Vertex {
                vertex: self.vertices[seg].clone(),
            }
        } else if t >= 1.0 - EPS {
            Resolution::Vertex {
                vertex: self.vertices[seg + 1].clone(),
            }
        } else {
            Resolution::Mixture {
                left: self.vertices[seg].clone(),
                right: self.vertices[seg + 1].clone(),
                weight: t,
            }
        }
    }
}

/// Trapezoidal AUC of either a curve or a hull.
pub trait Area {
    fn area(&self) -> f64;
}

impl Area for RocCurve {
    fn area(&self) -> f64 {
        self.auc()
    }
}

impl Area for RocchHull {
    fn area(&self) -> f64 {
        self.auc()
    }
}
