//! Experiment helpers: fold averaging, synthetic score generators,
//! brute-force oracles and a drift harness comparing fixed classifiers with
//! the re-targeted hybrid.

use std::collections::HashSet;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal as StdNormal};

use crate::decision::{LinearConstraint, OperatingConditions};
use crate::error::{Error, Result};
use crate::hull::{HullVertex, RocchHull};
use crate::hybrid::{self, TargetSpec};
use crate::roc::{self, ClassLabel, RocCurve, RocPoint, ScoredExample};
use crate::EPS;

/// Cross-validation folds of one classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldedScores {
    pub classifier_id: String,
    pub folds: Vec<(String, Vec<ScoredExample>)>,
}

impl FoldedScores {
    pub fn new(
        classifier_id: impl Into<String>,
        folds: Vec<(String, Vec<ScoredExample>)>,
    ) -> Result<Self> {
        let f = FoldedScores {
            classifier_id: classifier_id.into(),
            folds,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if self.folds.len() < 2 {
            return Err(Error::InvalidInput(
                "averaging needs at least two folds".into(),
            ));
        }
        let mut seen = HashSet::new();
        for (fold_id, examples) in &self.folds {
            let has_pos = examples.iter().any(|e| e.label.is_positive());
            let has_neg = examples.iter().any(|e| !e.label.is_positive());
            if !(has_pos && has_neg) {
                return Err(Error::InvalidInput(format!(
                    "fold `{fold_id}` lacks one of the classes"
                )));
            }
            for e in examples {
                if !seen.insert(e.example_id.as_str()) {
                    return Err(Error::InvalidInput(format!(
                        "example `{}` appears in more than one fold",
                        e.example_id
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Vertically averaged curve plus the per-fold spread at each grid fp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragedCurve {
    pub curve: RocCurve,
    pub rows: Vec<GridRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub fp: f64,
    pub mean_tp: f64,
    pub min_tp: f64,
    pub max_tp: f64,
}

/// Vertical averaging: every fold's curve is read off at each grid fp by
/// linear interpolation (top of any vertical run) and the tps are averaged.
pub fn average_roc(folds: &FoldedScores, grid: &[f64]) -> Result<AveragedCurve> {
    folds.validate()?;
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty fp grid".into()));
    }
    for &g in grid {
        if !(0.0..=1.0).contains(&g) {
            return Err(Error::out_of_range("grid fp", g));
        }
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(
            "fp grid must be strictly increasing".into(),
        ));
    }
    let curves = folds
        .folds
        .iter()
        .map(|(_, ex)| roc::generate_roc_curve(ex, &folds.classifier_id))
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<GridRow> = grid
        .iter()
        .map(|&fp| {
            let tps: Vec<f64> = curves.iter().map(|c| c.tp_at(fp)).collect();
            GridRow {
                fp,
                mean_tp: tps.iter().sum::<f64>() / tps.len() as f64,
                min_tp: tps.iter().copied().fold(f64::INFINITY, f64::min),
                max_tp: tps.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            }
        })
        .collect();
    let rates: Vec<RocPoint> = rows
        .iter()
        .map(|r| RocPoint {
            fp: r.fp,
            tp: r.mean_tp.clamp(0.0, 1.0),
        })
        .collect();
    let curve = RocCurve::from_rates(folds.classifier_id.clone(), &rates)?;
    Ok(AveragedCurve { curve, rows })
}

/// `n + 1` evenly spaced fp values from 0 to 1.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    let n = n.max(1);
    (0..=n).map(|i| i as f64 / n as f64).collect()
}

/// Binormal score model: negatives ~ N(0, 1), positives ~ N(mu, sigma).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Binormal {
    pub mu: f64,
    pub sigma: f64,
}

impl Binormal {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::InvalidInput(format!(
                "binormal mean must be finite, got {mu}"
            )));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::out_of_range("binormal sigma", sigma));
        }
        Ok(Binormal { mu, sigma })
    }

    /// The model's true ROC curve: tp = Φ((mu + Φ⁻¹(fp)) / sigma).
    pub fn tp_at(&self, fp: f64) -> f64 {
        if fp <= 0.0 {
            return 0.0;
        }
        if fp >= 1.0 {
            return 1.0;
        }
        let z = StdNormal::standard();
        z.cdf((self.mu + z.inverse_cdf(fp)) / self.sigma)
    }

    /// True curve sampled on `grid`.
    pub fn curve(&self, classifier_id: &str, grid: &[f64]) -> Result<RocCurve> {
        let rates: Vec<RocPoint> = grid
            .iter()
            .map(|&fp| RocPoint {
                fp,
                tp: self.tp_at(fp),
            })
            .collect();
        RocCurve::from_rates(classifier_id, &rates)
    }

    /// Draws `positives` + `negatives` scored examples with ids `{prefix}{i}`.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        prefix: &str,
        positives: usize,
        negatives: usize,
        rng: &mut R,
    ) -> Vec<ScoredExample> {
        let pos = Normal::new(self.mu, self.sigma).expect("validated parameters");
        let neg = Normal::new(0.0, 1.0).expect("unit normal");
        let mut out = Vec::with_capacity(positives + negatives);
        for i in 0..positives + negatives {
            let (label, score) = if i < positives {
                (ClassLabel::Positive, pos.sample(rng))
            } else {
                (ClassLabel::Negative, neg.sample(rng))
            };
            out.push(ScoredExample {
                example_id: format!("{prefix}{i}"),
                label,
                score,
                weight: 1.0,
            });
        }
        out
    }
}

/// Two idealized rankers over the same `n` balanced cases.
///
/// `R_a` puts a fifth of the cases, all positive, strictly on top and ties
/// everything else. `R_b` puts a fifth of the cases, all negative, strictly
/// at the bottom and ties everything else. Their curves cross where `n/2`
/// cases are selected.
pub fn make_ranking_pair(n: usize) -> Result<(Vec<ScoredExample>, Vec<ScoredExample>)> {
    if n == 0 || !n.is_multiple_of(10) {
        return Err(Error::InvalidInput(format!(
            "ranking pair needs n divisible by 10, got {n}"
        )));
    }
    let half = n / 2;
    let fifth = n / 5;
    let mut ra = Vec::with_capacity(n);
    let mut rb = Vec::with_capacity(n);
    for i in 0..half {
        let id = format!("p{i}");
        ra.push(ScoredExample::new(
            &id,
            ClassLabel::Positive,
            if i < fifth { 1.0 } else { 0.5 },
        )?);
        rb.push(ScoredExample::new(&id, ClassLabel::Positive, 0.5)?);
    }
    for i in 0..half {
        let id = format!("n{i}");
        ra.push(ScoredExample::new(&id, ClassLabel::Negative, 0.5)?);
        rb.push(ScoredExample::new(
            &id,
            ClassLabel::Negative,
            if i < fifth { 0.0 } else { 0.5 },
        )?);
    }
    Ok((ra, rb))
}

/// Expected (weighted) number of positives among the top `cutoff` cases
/// when ties straddling the cutoff are broken uniformly at random.
pub fn expected_positives_at_cutoff(examples: &[ScoredExample], cutoff: f64) -> f64 {
    let mut sorted: Vec<&ScoredExample> = examples.iter().collect();
    sorted.sort_by(|a, b| b.score.total_cmp(&a.score));
    let mut taken = 0.0;
    let mut positives = 0.0;
    let mut i = 0;
    while i < sorted.len() && taken < cutoff {
        let mut j = i;
        let (mut group, mut group_pos) = (0.0, 0.0);
        while j < sorted.len() && sorted[j].score == sorted[i].score {
            group += sorted[j].weight;
            if sorted[j].label.is_positive() {
                group_pos += sorted[j].weight;
            }
            j += 1;
        }
        let share = ((cutoff - taken) / group).min(1.0);
        positives += share * group_pos;
        taken += share * group;
        i = j;
    }
    positives
}

/// Exhaustive minimum-cost point; cost ties (within 1e-12) go to the
/// smaller fp.
pub fn brute_force_best(points: &[RocPoint], cond: &OperatingConditions) -> Result<RocPoint> {
    cond.validate()?;
    let mut best: Option<(f64, RocPoint)> = None;
    for &p in points {
        let c = cond.expected_cost(p);
        best = match best {
            None => Some((c, p)),
            Some((bc, bp)) => {
                let tol = EPS * bc.abs().max(1.0);
                if c < bc - tol || ((c - bc).abs() <= tol && p.fp < bp.fp) {
                    Some((c, p))
                } else {
                    Some((bc, bp))
                }
            }
        };
    }
    best.map(|(_, p)| p)
        .ok_or_else(|| Error::InvalidInput("no points to choose from".into()))
}

/// Exhaustive constrained optimum over every mixture of two points (the
/// trivial corners included): the feasible piece of each segment is found
/// exactly and its best end kept. Returns the maximal tp, then minimal fp.
pub fn brute_force_constrained(points: &[RocPoint], k: &LinearConstraint) -> Result<RocPoint> {
    k.validate()?;
    let mut all = vec![RocPoint::ORIGIN, RocPoint::ALL];
    all.extend_from_slice(points);
    let mut best: Option<RocPoint> = None;
    let mut offer = |p: RocPoint| {
        let better = match best {
            None => true,
            Some(b) => p.tp > b.tp + EPS || ((p.tp - b.tp).abs() <= EPS && p.fp < b.fp),
        };
        if better {
            best = Some(p);
        }
    };
    for (i, &a) in all.iter().enumerate() {
        for &b in &all[i..] {
            // lhs(a + t (b - a)) = la + t (lb - la) <= c
            let (la, lb) = (k.lhs(a), k.lhs(b));
            let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
            let d = lb - la;
            if d.abs() <= EPS {
                if la > k.c + EPS {
                    continue;
                }
            } else {
                let t = (k.c - la) / d;
                if d > 0.0 {
                    hi = hi.min(t);
                } else {
                    lo = lo.max(t);
                }
                if lo > hi {
                    continue;
                }
            }
            for t in [lo, hi] {
                offer(RocPoint {
                    fp: a.fp + t * (b.fp - a.fp),
                    tp: a.tp + t * (b.tp - a.tp),
                });
            }
        }
    }
    best.ok_or_else(|| Error::InvalidConstraint("no feasible point".into()))
}

/// Operating conditions over time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftScenario {
    pub timeline: Vec<(u32, OperatingConditions)>,
}

impl DriftScenario {
    pub fn new(timeline: Vec<(u32, OperatingConditions)>) -> Result<Self> {
        for (epoch, c) in &timeline {
            c.validate()
                .map_err(|e| Error::InvalidConditions(format!("epoch {epoch}: {e}")))?;
        }
        Ok(DriftScenario { timeline })
    }

    /// `epochs` epochs cycling through `conditions`.
    pub fn cycling(conditions: &[OperatingConditions], epochs: u32) -> Result<Self> {
        if conditions.is_empty() {
            return Err(Error::InvalidInput("no conditions to cycle".into()));
        }
        Self::new(
            (0..epochs)
                .map(|e| (e, conditions[e as usize % conditions.len()]))
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRow {
    pub epoch: u32,
    pub iso_slope: f64,
    pub fixed_cost: f64,
    pub hybrid_x: f64,
    pub hybrid_point: RocPoint,
    pub hybrid_cost: f64,
    /// fixed_cost − hybrid_cost.
    pub regret: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub fixed: RocPoint,
    pub epochs: Vec<EpochRow>,
    pub cumulative_regret: f64,
}

/// Expected cost per epoch of a fixed classifier against the hybrid
/// re-targeted to each epoch's conditions.
pub fn run_drift(
    scenario: &DriftScenario,
    hull: &RocchHull,
    fixed: &HullVertex,
) -> Result<DriftReport> {
    fixed.point.validate()?;
    let mut epochs = Vec::with_capacity(scenario.timeline.len());
    let mut cumulative = 0.0;
    for &(epoch, cond) in &scenario.timeline {
        let x = hybrid::x_from_conditions(hull, &TargetSpec::Conditions(cond))?;
        let point = hybrid::policy_for(hull, x)?.expected_point();
        let fixed_cost = cond.expected_cost(fixed.point);
        let hybrid_cost = cond.expected_cost(point);
        let regret = fixed_cost - hybrid_cost;
        cumulative += regret;
        epochs.push(EpochRow {
            epoch,
            iso_slope: cond.iso_slope(),
            fixed_cost,
            hybrid_x: x,
            hybrid_point: point,
            hybrid_cost,
            regret,
        });
    }
    Ok(DriftReport {
        fixed: fixed.point,
        epochs,
        cumulative_regret: cumulative,
    })
}

/// Four crossing binormal curves ("A".."D") sampled on a 0.01 grid; each
/// contributes hull vertices in a different slope band.
pub fn synthetic_curves() -> Vec<RocCurve> {
    let grid = uniform_grid(100);
    [
        ("A", 1.2, 0.45),
        ("B", 1.6, 0.9),
        ("C", 1.9, 1.6),
        ("D", 1.0, 0.7),
    ]
    .into_iter()
    .map(|(id, mu, sigma)| {
        Binormal { mu, sigma }
            .curve(id, &grid)
            .expect("binormal rates are monotone")
    })
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pt(fp: f64, tp: f64) -> RocPoint {
        RocPoint { fp, tp }
    }

    fn fold(prefix: &str, pos: &[f64], neg: &[f64]) -> Vec<ScoredExample> {
        let mut v = Vec::new();
        for (i, &s) in pos.iter().enumerate() {
            v.push(ScoredExample::new(format!("{prefix}p{i}"), ClassLabel::Positive, s).unwrap());
        }
        for (i, &s) in neg.iter().enumerate() {
            v.push(ScoredExample::new(format!("{prefix}n{i}"), ClassLabel::Negative, s).unwrap());
        }
        v
    }

    #[test]
    fn identical_folds_average_to_themselves() {
        let a = fold("a", &[0.9, 0.6, 0.3], &[0.7, 0.2]);
        let b = fold("b", &[0.9, 0.6, 0.3], &[0.7, 0.2]);
        let one = roc::generate_roc_curve(&a, "m").unwrap();
        let f = FoldedScores::new("m", vec![("1".into(), a), ("2".into(), b)]).unwrap();
        let grid = uniform_grid(20);
        let avg = average_roc(&f, &grid).unwrap();
        for r in &avg.rows {
            assert!((r.mean_tp - one.tp_at(r.fp)).abs() < 1e-12);
        }
    }

    #[test]
    fn averaging_two_shapes() {
        // fold 1: diagonal; fold 2: tp = min(2 fp, 1)
        let diag = fold("a", &[0.5, 0.5], &[0.5, 0.5]);
        let steep = fold("b", &[0.9, 0.6], &[0.8, 0.1]);
        let c = roc::generate_roc_curve(&steep, "m").unwrap();
        assert!((c.tp_at(0.25) - 0.5).abs() < 1e-12);
        let f = FoldedScores::new("m", vec![("1".into(), diag), ("2".into(), steep)]).unwrap();
        let avg = average_roc(&f, &[0.0, 0.25, 0.5, 1.0]).unwrap();
        assert!((avg.rows[1].mean_tp - 0.375).abs() < 1e-12);
        assert!(avg.curve.validate().is_ok());
    }

    #[test]
    fn fold_validation() {
        let a = fold("a", &[0.9], &[0.1]);
        assert!(FoldedScores::new("m", vec![("1".into(), a.clone())]).is_err());
        assert!(
            FoldedScores::new("m", vec![("1".into(), a.clone()), ("2".into(), a.clone())]).is_err()
        );
        let only_pos = fold("b", &[0.9], &[]);
        assert!(FoldedScores::new("m", vec![("1".into(), a), ("2".into(), only_pos)]).is_err());
    }

    #[test]
    fn binormal_curve_shape() {
        let b = Binormal::new(0.0, 1.0).unwrap();
        assert!((b.tp_at(0.3) - 0.3).abs() < 1e-9);
        let b = Binormal::new(1.0, 1.0).unwrap();
        assert!(b.tp_at(0.1) > 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = b.sample("x", 5, 7, &mut rng);
        assert_eq!(s.iter().filter(|e| e.label.is_positive()).count(), 5);
        assert!(Binormal::new(1.0, 0.0).is_err());
    }

    #[test]
    fn ranking_pair_examples() {
        let (ra, rb) = make_ranking_pair(100).unwrap();
        let ca = roc::generate_roc_curve(&ra, "ra").unwrap();
        let cb = roc::generate_roc_curve(&rb, "rb").unwrap();
        assert!(ca.rates().any(|p| p == pt(0.0, 0.4)));
        assert!(cb.rates().any(|p| p == pt(0.6, 1.0)));
        assert!((expected_positives_at_cutoff(&ra, 30.0) - 23.75).abs() < 1e-12);
        assert!((expected_positives_at_cutoff(&rb, 30.0) - 18.75).abs() < 1e-12);
        assert!((expected_positives_at_cutoff(&ra, 70.0) - 38.75).abs() < 1e-12);
        assert!((expected_positives_at_cutoff(&rb, 70.0) - 43.75).abs() < 1e-12);
        assert!((ca.auc() - cb.auc()).abs() < 1e-12);
        assert!(make_ranking_pair(95).is_err());
    }

    #[test]
    fn brute_force_examples() {
        let c = OperatingConditions::new(1.0 / 6.0, 1.0, 2.5).unwrap();
        let pts = [pt(0.0, 0.0), pt(0.1, 0.5), pt(1.0, 1.0)];
        assert_eq!(brute_force_best(&pts, &c).unwrap(), pt(0.1, 0.5));
        assert_eq!(brute_force_best(&[pt(0.4, 0.4)], &c).unwrap(), pt(0.4, 0.4));
        // all on one slope-2 line
        let line = [pt(0.3, 0.6), pt(0.1, 0.2), pt(0.2, 0.4)];
        assert_eq!(brute_force_best(&line, &c).unwrap(), pt(0.1, 0.2));
        assert!(brute_force_best(&[], &c).is_err());
    }

    #[test]
    fn constrained_oracle_workforce() {
        let k = LinearConstraint::caseload(20.0, 100.0, 30.0).unwrap();
        let best = brute_force_constrained(&[pt(0.1, 0.5), pt(0.5, 0.9)], &k).unwrap();
        assert!((best.fp - 11.0 / 60.0).abs() < 1e-12);
        assert!((best.tp - 35.0 / 60.0).abs() < 1e-12);
    }

    fn two_vertex_hull() -> RocchHull {
        RocchHull::from_points([
            HullVertex::classifier("lo", pt(0.1, 0.6), None),
            HullVertex::classifier("hi", pt(0.6, 0.97), None),
        ])
        .unwrap()
    }

    #[test]
    fn alternating_drift_regret() {
        let hull = two_vertex_hull();
        let a = OperatingConditions::new(1.0 / 6.0, 1.0, 1.0).unwrap();
        let b = OperatingConditions::new(5.0 / 6.0, 1.0, 1.0).unwrap();
        let s = DriftScenario::cycling(&[a, b], 6).unwrap();
        for v in hull.vertices() {
            let r = run_drift(&s, &hull, v).unwrap();
            assert!(r.cumulative_regret > 0.0, "{:?}", v.point);
            assert!(r.epochs.iter().all(|e| e.regret >= -1e-9));
        }
    }

    #[test]
    fn matched_constant_conditions_have_no_regret() {
        let hull = two_vertex_hull();
        let a = OperatingConditions::new(1.0 / 6.0, 1.0, 1.0).unwrap();
        let s = DriftScenario::cycling(&[a], 4).unwrap();
        let fixed = crate::decision::select_min_cost(&hull, &a).clone();
        let r = run_drift(&s, &hull, &fixed).unwrap();
        assert_eq!(r.cumulative_regret, 0.0);
    }

    #[test]
    fn synthetic_hull_switches_vertices() {
        let hull = RocchHull::build(synthetic_curves()).unwrap();
        let a = OperatingConditions::new(1.0 / 6.0, 1.0, 1.0).unwrap();
        let b = OperatingConditions::new(5.0 / 6.0, 1.0, 1.0).unwrap();
        let va = crate::decision::select_min_cost(&hull, &a);
        let vb = crate::decision::select_min_cost(&hull, &b);
        assert_ne!(va.point, vb.point);
        assert_ne!(va.provenance.classifier_id(), vb.provenance.classifier_id());
    }
}
