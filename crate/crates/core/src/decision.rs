//! Choosing classifiers from the hull.
//!
//! Operating conditions (class prior plus the two error costs) collapse to
//! a single iso-performance slope; the minimum expected-cost classifier is
//! the hull vertex where the hull has that slope. Constrained criteria
//! (Neyman-Pearson, fixed caseload, any single `a*TP + b*FP <= c`) are
//! answered with a point on the hull, which may fall between vertices.

use std::fmt;

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::hull::{HullVertex, Resolution, RocchHull};
use crate::roc::RocPoint;
use crate::EPS;

/// Class prior and misclassification costs in force at deployment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingConditions {
    /// Prior probability of the positive class.
    pub p_pos: f64,
    /// Cost of a false positive.
    pub cost_fp: f64,
    /// Cost of a false negative.
    pub cost_fn: f64,
}

impl OperatingConditions {
    pub fn new(p_pos: f64, cost_fp: f64, cost_fn: f64) -> Result<Self> {
        let c = OperatingConditions {
            p_pos,
            cost_fp,
            cost_fn,
        };
        c.validate()?;
        Ok(c)
    }

    /// Equal error costs, i.e. plain error rate.
    pub fn uniform_costs(p_pos: f64) -> Result<Self> {
        Self::new(p_pos, 1.0, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p_pos > 0.0 && self.p_pos < 1.0) {
            return Err(Error::InvalidConditions(format!(
                "prior must be in (0,1), got {}",
                self.p_pos
            )));
        }
        for (name, c) in [
            ("false positive", self.cost_fp),
            ("false negative", self.cost_fn),
        ] {
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::InvalidConditions(format!(
                    "{name} cost must be finite and > 0, got {c}"
                )));
            }
        }
        Ok(())
    }

    /// Slope of the iso-performance lines, `c(Y,n) p(n) / (c(N,p) p(p))`.
    pub fn iso_slope(&self) -> f64 {
        self.cost_fp * self.negative_odds() / self.cost_fn
    }

    /// p(n) / p(p). Computed as 1/p - 1 below one half so that priors
    /// given as 1/(k+1) yield exactly k.
    pub fn negative_odds(&self) -> f64 {
        let p = self.p_pos;
        if p <= 0.5 {
            1.0 / p - 1.0
        } else {
            (1.0 - p) / p
        }
    }

    /// Expected cost per instance of operating at `point`.
    pub fn expected_cost(&self, point: RocPoint) -> f64 {
        self.p_pos * (1.0 - point.tp) * self.cost_fn + (1.0 - self.p_pos) * point.fp * self.cost_fp
    }

    /// Posterior cutoff for calibrated scores: emit Y iff `p(p|I) > t`.
    pub fn posterior_threshold(&self) -> f64 {
        self.cost_fp / (self.cost_fp + self.cost_fn)
    }
}

pub fn iso_slope(cond: &OperatingConditions) -> f64 {
    cond.iso_slope()
}

pub fn expected_cost(point: RocPoint, cond: &OperatingConditions) -> f64 {
    cond.expected_cost(point)
}

pub fn posterior_threshold(cond: &OperatingConditions) -> f64 {
    cond.posterior_threshold()
}

/// Minimum expected-cost vertex; ties go to the smaller false positive rate.
pub fn select_min_cost<'h>(hull: &'h RocchHull, cond: &OperatingConditions) -> &'h HullVertex {
    hull.slope_vertex(cond.iso_slope())
}

/// A closed interval of iso-performance slopes; `hi` may be `+inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeRange {
    pub lo: f64,
    pub hi: f64,
}

impl SlopeRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo >= 0.0 && lo.is_finite() && hi >= lo) {
            return Err(Error::InvalidInput(format!("bad slope range [{lo}, {hi}]")));
        }
        Ok(SlopeRange { lo, hi })
    }

    pub fn contains(&self, m: f64) -> bool {
        self.lo <= m && m <= self.hi
    }

    pub fn intersects(&self, other: &SlopeRange) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// A slope strictly inside the range, used to probe the owner of a row.
    pub fn midpoint(&self) -> f64 {
        if self.hi.is_infinite() {
            self.lo.max(1.0) * 2.0
        } else {
            (self.lo + self.hi) / 2.0
        }
    }
}

impl fmt::Display for SlopeRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.hi.is_infinite() {
            write!(f, "[{}, inf)", self.lo)
        } else {
            write!(f, "[{}, {}]", self.lo, self.hi)
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum SlopeRepr {
    Num(f64),
    Text(String),
}

/// Serializes a slope that may be `+inf` as a number or the string `"inf"`.
pub(crate) mod slope_serde {
    use super::*;

    pub fn to_repr(v: f64) -> serde_json::Value {
        if v.is_infinite() && v > 0.0 {
            serde_json::Value::String("inf".into())
        } else {
            serde_json::json!(v)
        }
    }

    pub fn from_text<E: de::Error>(s: &str) -> std::result::Result<f64, E> {
        match s {
            "inf" | "+inf" => Ok(f64::INFINITY),
            other => Err(E::custom(format!("bad slope `{other}`"))),
        }
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        to_repr(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        match SlopeRepr::deserialize(d)? {
            SlopeRepr::Num(v) => Ok(v),
            SlopeRepr::Text(t) => from_text(&t),
        }
    }
}

impl Serialize for SlopeRange {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        serde_json::json!({
            "lo": slope_serde::to_repr(self.lo),
            "hi": slope_serde::to_repr(self.hi),
        })
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SlopeRange {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            #[serde(with = "slope_serde")]
            lo: f64,
            #[serde(with = "slope_serde")]
            hi: f64,
        }
        let raw = Raw::deserialize(d)?;
        SlopeRange::new(raw.lo, raw.hi).map_err(de::Error::custom)
    }
}

/// Interval of each parameter, for sensitivity analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionBox {
    pub p_pos: (f64, f64),
    pub cost_fp: (f64, f64),
    pub cost_fn: (f64, f64),
}

impl ConditionBox {
    pub fn corners(&self) -> Result<Vec<OperatingConditions>> {
        for (lo, hi) in [self.p_pos, self.cost_fp, self.cost_fn] {
            if lo.is_nan() || hi.is_nan() || lo > hi {
                return Err(Error::InvalidConditions(format!(
                    "empty range [{lo}, {hi}]"
                )));
            }
        }
        let mut out = Vec::with_capacity(8);
        for p in [self.p_pos.0, self.p_pos.1] {
            for cfp in [self.cost_fp.0, self.cost_fp.1] {
                for cfn in [self.cost_fn.0, self.cost_fn.1] {
                    out.push(OperatingConditions::new(p, cfp, cfn)?);
                }
            }
        }
        Ok(out)
    }

    /// Range of iso-performance slopes over the box. The slope is monotone
    /// in each parameter separately, so the extremes sit at corners.
    pub fn slope_range(&self) -> Result<SlopeRange> {
        let slopes: Vec<f64> = self.corners()?.iter().map(|c| c.iso_slope()).collect();
        let lo = slopes.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        SlopeRange::new(lo, hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub slope_range: SlopeRange,
    /// Every vertex that is optimal for some slope in the range, by fp.
    pub vertices: Vec<HullVertex>,
}

impl SensitivityReport {
    /// A single candidate means the choice does not depend on where in the
    /// range the true conditions fall.
    pub fn is_insensitive(&self) -> bool {
        self.vertices.len() == 1
    }
}

/// Vertex `i` of the hull is optimal exactly for slopes in
/// `[right_slope(i), left_slope(i)]`.
pub fn vertex_slope_range(hull: &RocchHull, i: usize) -> SlopeRange {
    SlopeRange {
        lo: hull.right_slope(i),
        hi: hull.left_slope(i),
    }
}

pub fn sensitivity_for_range(hull: &RocchHull, range: SlopeRange) -> SensitivityReport {
    let vertices = (0..hull.vertices().len())
        .filter(|&i| {
            let own = vertex_slope_range(hull, i);
            own.lo < own.hi && own.intersects(&range)
        })
        .map(|i| hull.vertices()[i].clone())
        .collect();
    SensitivityReport {
        slope_range: range,
        vertices,
    }
}

pub fn sensitivity(hull: &RocchHull, conditions: &ConditionBox) -> Result<SensitivityReport> {
    Ok(sensitivity_for_range(hull, conditions.slope_range()?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominatorRow {
    pub range: SlopeRange,
    pub vertex: HullVertex,
}

/// Which hull vertex is optimal over each range of iso-performance slopes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominatorTable {
    /// Ordered by increasing slope, hence decreasing fp.
    pub rows: Vec<DominatorRow>,
}

/// One row per hull vertex that is optimal over a non-degenerate slope
/// interval. Rows partition `[0, inf)` and share endpoints; at a shared
/// endpoint the smaller-fp vertex wins, as in [`select_min_cost`].
pub fn dominator_table(hull: &RocchHull) -> DominatorTable {
    let rows = (0..hull.vertices().len())
        .rev()
        .map(|i| (i, vertex_slope_range(hull, i)))
        .filter(|(_, r)| r.lo < r.hi)
        .map(|(i, range)| DominatorRow {
            range,
            vertex: hull.vertices()[i].clone(),
        })
        .collect();
    DominatorTable { rows }
}

/// A row of the per-classifier summary table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominatorGroup {
    pub range: SlopeRange,
    /// Classifier id, or `None` when only trivial classifiers are involved.
    pub classifier_id: Option<String>,
    pub vertices: Vec<HullVertex>,
}

impl DominatorTable {
    /// Vertex optimal at slope `m`.
    pub fn lookup(&self, m: f64) -> Option<&HullVertex> {
        // rows ascend in slope; prefer the later (smaller-fp) row on a boundary
        self.rows
            .iter()
            .rev()
            .find(|r| r.range.contains(m))
            .map(|r| &r.vertex)
    }

    /// Merges consecutive rows owned by the same classifier, giving one row
    /// per (slope range, classifier) the way results are usually reported.
    /// The trivial corner classifiers are folded into their neighbouring
    /// classifier's row; a hull with no real classifier yields one row.
    pub fn by_classifier(&self) -> Vec<DominatorGroup> {
        let mut groups: Vec<DominatorGroup> = Vec::new();
        for row in &self.rows {
            let id = row.vertex.provenance.classifier_id().map(str::to_string);
            match groups.last_mut() {
                Some(g) if g.classifier_id == id || id.is_none() || g.classifier_id.is_none() => {
                    g.range.hi = row.range.hi;
                    if g.classifier_id.is_none() {
                        g.classifier_id = id;
                    }
                    g.vertices.push(row.vertex.clone());
                }
                _ => groups.push(DominatorGroup {
                    range: row.range,
                    classifier_id: id,
                    vertices: vec![row.vertex.clone()],
                }),
            }
        }
        groups
    }
}

/// `a * TP + b * FP <= c` with `a, b >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl LinearConstraint {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        let k = LinearConstraint { a, b, c };
        k.validate()?;
        Ok(k)
    }

    /// At most `fp_max` false positive rate.
    pub fn fp_max(fp_max: f64) -> Result<Self> {
        Self::new(0.0, 1.0, fp_max)
    }

    /// Expected caseload `TP * positives + FP * negatives` at most `budget`.
    pub fn caseload(positives: f64, negatives: f64, budget: f64) -> Result<Self> {
        Self::new(positives, negatives, budget)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.b.is_finite() && self.a >= 0.0 && self.b >= 0.0) {
            return Err(Error::InvalidConstraint(
                "coefficients must be finite and non-negative".into(),
            ));
        }
        if self.a == 0.0 && self.b == 0.0 {
            return Err(Error::InvalidConstraint(
                "coefficients are both zero".into(),
            ));
        }
        if self.c.is_nan() || self.c < 0.0 {
            return Err(Error::InvalidConstraint(format!(
                "infeasible: bound {} excludes even (0,0)",
                self.c
            )));
        }
        Ok(())
    }

    pub fn lhs(&self, p: RocPoint) -> f64 {
        self.a * p.tp + self.b * p.fp
    }

    /// Inclusive: points exactly on the line are feasible.
    pub fn is_satisfied(&self, p: RocPoint) -> bool {
        self.lhs(p) <= self.c + EPS * self.c.abs().max(1.0)
    }
}

/// A selected operating point together with how to realize it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub point: RocPoint,
    pub resolution: Resolution,
}

/// Highest-TP hull point with `FP <= fp_max`.
pub fn select_neyman_pearson(hull: &RocchHull, fp_max: f64) -> Result<Selection> {
    let resolution = hull.resolve_fp(fp_max)?;
    let tp = hull.tp_at(fp_max)?;
    Ok(Selection {
        point: RocPoint { fp: fp_max, tp },
        resolution,
    })
}

/// Highest-TP hull point satisfying a single linear constraint.
///
/// Along the hull both TP and FP are non-decreasing, so the constraint's
/// left-hand side is too; the best point is the last vertex satisfying it
/// or the crossing of the constraint line with the following segment.
pub fn select_constrained(hull: &RocchHull, k: &LinearConstraint) -> Result<Selection> {
    k.validate()?;
    let vs = hull.vertices();
    let first_bad = vs.iter().position(|v| !k.is_satisfied(v.point));
    let resolution = match first_bad {
        None => Resolution::Vertex {
            vertex: vs[vs.len() - 1].clone(),
        },
        // c >= 0 always admits (0,0)
        Some(0) => unreachable!("(0,0) satisfies any validated constraint"),
        Some(j) => {
            let (lo, hi) = (k.lhs(vs[j - 1].point), k.lhs(vs[j].point));
            let t = (k.c - lo) / (hi - lo);
            hull.resolve_on_segment(j - 1, t)
        }
    };
    Ok(Selection {
        point: resolution.expected_point(),
        resolution,
    })
}

/// Maximizes a caller-supplied metric `f(fp, tp)` over the hull.
///
/// Only valid for metrics non-decreasing in TP and non-increasing in FP;
/// under that condition the optimum lies at a vertex or, with a
/// constraint, at the constraint's crossing with the hull. Ties go to the
/// smaller FP.
pub fn select_by_metric<F>(
    hull: &RocchHull,
    metric: F,
    constraint: Option<&LinearConstraint>,
) -> Result<Selection>
where
    F: Fn(f64, f64) -> f64,
{
    let mut candidates: Vec<Resolution> = hull
        .vertices()
        .iter()
        .filter(|v| constraint.is_none_or(|k| k.is_satisfied(v.point)))
        .map(|v| Resolution::Vertex { vertex: v.clone() })
        .collect();
    if let Some(k) = constraint {
        candidates.push(select_constrained(hull, k)?.resolution);
    }
    let mut best: Option<(f64, Resolution)> = None;
    for r in candidates {
        let p = r.expected_point();
        let score = metric(p.fp, p.tp);
        let better = match &best {
            None => true,
            Some((s, b)) => score > *s || (score == *s && p.fp < b.expected_point().fp),
        };
        if better {
            best = Some((score, r));
        }
    }
    let (_, resolution) = best.ok_or_else(|| Error::InvalidInput("no feasible point".into()))?;
    Ok(Selection {
        point: resolution.expected_point(),
        resolution,
    })
}
