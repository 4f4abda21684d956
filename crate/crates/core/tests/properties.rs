use std::collections::HashMap;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rocch::decision::{self, OperatingConditions};
use rocch::eval::{self, DriftScenario, FoldedScores};
use rocch::hull::{HullVertex, RocchHull};
use rocch::hybrid::{self, TargetSpec};
use rocch::io::{self, HullFile, ScoreFile};
use rocch::roc::{self, ClassLabel, RocPoint, ScoredExample};

fn arb_point() -> impl Strategy<Value = RocPoint> {
    (0.0..=1.0f64, 0.0..=1.0f64).prop_map(|(fp, tp)| RocPoint { fp, tp })
}

fn arb_points(max: usize) -> impl Strategy<Value = Vec<RocPoint>> {
    prop::collection::vec(arb_point(), 1..max)
}

/// Grid-valued points so that exact collinearity and duplicates show up.
fn arb_grid_points(max: usize) -> impl Strategy<Value = Vec<RocPoint>> {
    prop::collection::vec(
        (0u8..=10, 0u8..=10).prop_map(|(a, b)| RocPoint {
            fp: a as f64 / 10.0,
            tp: b as f64 / 10.0,
        }),
        1..max,
    )
}

fn arb_examples() -> impl Strategy<Value = Vec<ScoredExample>> {
    prop::collection::vec((any::<bool>(), 0u8..6, 1u8..4), 2..30).prop_map(|rows| {
        let mut ex: Vec<ScoredExample> = rows
            .into_iter()
            .enumerate()
            .map(|(i, (pos, s, w))| ScoredExample {
                example_id: format!("e{i}"),
                label: if pos {
                    ClassLabel::Positive
                } else {
                    ClassLabel::Negative
                },
                score: s as f64 / 5.0,
                weight: w as f64,
            })
            .collect();
        ex[0].label = ClassLabel::Positive;
        ex[1].label = ClassLabel::Negative;
        ex
    })
}

fn arb_conditions() -> impl Strategy<Value = OperatingConditions> {
    (0.01..0.99f64, -2.0..2.0f64, -2.0..2.0f64)
        .prop_map(|(p, a, b)| OperatingConditions::new(p, 10f64.powf(a), 10f64.powf(b)).unwrap())
}

fn hull_of(points: &[RocPoint]) -> RocchHull {
    RocchHull::from_points(
        points
            .iter()
            .enumerate()
            .map(|(i, &p)| HullVertex::classifier(format!("c{i}"), p, None)),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn curve_ignores_input_order(ex in arb_examples(), seed in any::<u64>()) {
        let a = roc::generate_roc_curve(&ex, "c").unwrap();
        let mut shuffled = ex.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let b = roc::generate_roc_curve(&shuffled, "c").unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn weights_equal_duplicates(ex in arb_examples()) {
        let weighted = roc::generate_roc_curve(&ex, "c").unwrap();
        let dup: Vec<ScoredExample> = ex
            .iter()
            .flat_map(|e| {
                (0..e.weight as usize).map(move |k| ScoredExample {
                    example_id: format!("{}#{k}", e.example_id),
                    weight: 1.0,
                    ..e.clone()
                })
            })
            .collect();
        let plain = roc::generate_roc_curve(&dup, "c").unwrap();
        prop_assert_eq!(weighted.points.len(), plain.points.len());
        for (a, b) in weighted.points.iter().zip(&plain.points) {
            prop_assert_eq!(a.point, b.point);
        }
    }

    #[test]
    fn curves_are_monotone_and_anchored(ex in arb_examples()) {
        let c = roc::generate_roc_curve(&ex, "c").unwrap();
        prop_assert!(c.validate().is_ok());
        prop_assert_eq!(c.points[0].point, RocPoint::ORIGIN);
        prop_assert_eq!(c.points.last().unwrap().point, RocPoint::ALL);
    }

    #[test]
    fn trivial_accuracies_sum_to_one(p in 0.001..0.999f64) {
        let s = roc::accuracy(RocPoint::ORIGIN, p).unwrap() + roc::accuracy(RocPoint::ALL, p).unwrap();
        prop_assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hull_dominates_every_input(pts in arb_points(25)) {
        let h = hull_of(&pts);
        for p in &pts {
            prop_assert!(h.tp_at(p.fp).unwrap() >= p.tp - 1e-12);
        }
        for v in h.vertices() {
            prop_assert!(v.provenance.is_degenerate() || pts.contains(&v.point));
        }
    }

    #[test]
    fn hull_is_concave(pts in arb_grid_points(30)) {
        let h = hull_of(&pts);
        let s = h.slopes();
        for w in s.windows(2) {
            prop_assert!(w[1] < w[0], "slopes {:?}", s);
        }
        for w in h.vertices().windows(2) {
            prop_assert!(w[1].point.fp >= w[0].point.fp && w[1].point.tp >= w[0].point.tp);
        }
    }

    #[test]
    fn incremental_matches_batch(pts in arb_grid_points(30), seed in any::<u64>()) {
        let batch = hull_of(&pts);
        let mut vs: Vec<HullVertex> = pts
            .iter()
            .enumerate()
            .map(|(i, &p)| HullVertex::classifier(format!("c{i}"), p, None))
            .collect();
        vs.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut inc = RocchHull::empty();
        for v in vs {
            inc = inc.insert(v).unwrap().0;
        }
        prop_assert_eq!(inc.vertices(), batch.vertices());
        prop_assert_eq!(inc.auxiliary(), batch.auxiliary());
    }

    #[test]
    fn inserting_a_dominated_point_changes_nothing(pts in arb_points(15), q in arb_point()) {
        let h = hull_of(&pts);
        if h.tp_at(q.fp).unwrap() > q.tp + 1e-9 {
            let (h2, extended) = h.insert(HullVertex::classifier("q", q, None)).unwrap();
            prop_assert!(!extended);
            prop_assert_eq!(h2.vertices(), h.vertices());
        }
    }

    #[test]
    fn hull_auc_is_at_least_every_curve(a in arb_examples(), b in arb_examples()) {
        let ca = roc::generate_roc_curve(&a, "a").unwrap();
        let cb = roc::generate_roc_curve(&b, "b").unwrap();
        let h = RocchHull::build([ca.clone(), cb.clone()]).unwrap();
        prop_assert!(h.auc() >= ca.auc().max(cb.auc()) - 1e-12);
    }

    #[test]
    fn steeper_slopes_pick_smaller_fp(pts in arb_points(20), m1 in 0.0..20.0f64, m2 in 0.0..20.0f64) {
        let h = hull_of(&pts);
        let (lo, hi) = if m1 <= m2 { (m1, m2) } else { (m2, m1) };
        prop_assert!(h.slope_vertex(hi).point.fp <= h.slope_vertex(lo).point.fp);
    }

    #[test]
    fn min_cost_matches_brute_force(pts in arb_points(20), c in arb_conditions()) {
        let h = hull_of(&pts);
        let mut all = pts.clone();
        all.extend([RocPoint::ORIGIN, RocPoint::ALL]);
        let best = eval::brute_force_best(&all, &c).unwrap();
        let got = decision::select_min_cost(&h, &c).point;
        prop_assert!(c.expected_cost(got) <= c.expected_cost(best) + 1e-9);
    }

    #[test]
    fn cost_scale_does_not_matter(pts in arb_points(20), c in arb_conditions(), k in 0.01..100.0f64) {
        let h = hull_of(&pts);
        let scaled = OperatingConditions::new(c.p_pos, c.cost_fp * k, c.cost_fn * k).unwrap();
        let a = decision::select_min_cost(&h, &c).point;
        let b = decision::select_min_cost(&h, &scaled).point;
        // exact ties between two vertices may flip under rounding
        prop_assert!((c.expected_cost(a) - c.expected_cost(b)).abs() <= 1e-9);
    }

    #[test]
    fn neyman_pearson_is_monotone(pts in arb_points(20), f1 in 0.0..=1.0f64, f2 in 0.0..=1.0f64) {
        let h = hull_of(&pts);
        let (lo, hi) = if f1 <= f2 { (f1, f2) } else { (f2, f1) };
        let a = decision::select_neyman_pearson(&h, lo).unwrap().point;
        let b = decision::select_neyman_pearson(&h, hi).unwrap().point;
        prop_assert!(a.tp <= b.tp + 1e-12);
        prop_assert!(a.fp <= lo + 1e-12 && b.fp <= hi + 1e-12);
    }

    #[test]
    fn constrained_selection_matches_segment_sampling(
        pts in arb_points(10),
        a in 0.0..3.0f64,
        b in 0.01..3.0f64,
        c in 0.0..3.0f64,
    ) {
        let k = decision::LinearConstraint::new(a, b, c).unwrap();
        let h = hull_of(&pts);
        let got = decision::select_constrained(&h, &k).unwrap().point;
        prop_assert!(k.lhs(got) <= c + 1e-9);
        // sample every hull segment at 1e-4 steps
        let mut best: f64 = 0.0;
        for w in h.vertices().windows(2) {
            let (p, q) = (w[0].point, w[1].point);
            for i in 0..=10_000 {
                let t = i as f64 / 10_000.0;
                let s = RocPoint { fp: p.fp + t * (q.fp - p.fp), tp: p.tp + t * (q.tp - p.tp) };
                if k.lhs(s) <= c {
                    best = best.max(s.tp);
                }
            }
        }
        prop_assert!(got.tp >= best - 1e-9);
        prop_assert!(got.tp <= best + 1e-3);
    }

    #[test]
    fn dominator_midpoints_pick_their_row(pts in arb_points(20)) {
        let h = hull_of(&pts);
        let t = decision::dominator_table(&h);
        for w in t.rows.windows(2) {
            prop_assert!(w[0].range.hi <= w[1].range.lo + 1e-12);
        }
        for row in &t.rows {
            let m = row.range.midpoint();
            prop_assert_eq!(h.slope_vertex(m), &row.vertex);
            prop_assert_eq!(t.lookup(m), Some(&row.vertex));
        }
    }

    #[test]
    fn hybrid_expected_rates_trace_the_hull(pts in arb_points(20), x in 0.0..=1.0f64) {
        let h = hull_of(&pts);
        let p = hybrid::policy_for(&h, x).unwrap().expected_point();
        prop_assert!((p.fp - x).abs() <= 1e-12);
        prop_assert!((p.tp - h.tp_at(x).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn knob_is_monotone(pts in arb_points(20), x1 in 0.0..=1.0f64, x2 in 0.0..=1.0f64) {
        let h = hull_of(&pts);
        let (lo, hi) = if x1 <= x2 { (x1, x2) } else { (x2, x1) };
        let a = hybrid::policy_for(&h, lo).unwrap().expected_point();
        let b = hybrid::policy_for(&h, hi).unwrap().expected_point();
        prop_assert!(a.fp <= b.fp && a.tp <= b.tp + 1e-12);
    }

    #[test]
    fn hybrid_accuracy_beats_every_input(pts in arb_points(20), p_pos in 0.01..0.99f64) {
        let h = hull_of(&pts);
        let c = OperatingConditions::uniform_costs(p_pos).unwrap();
        let x = hybrid::x_from_conditions(&h, &TargetSpec::Conditions(c)).unwrap();
        let got = roc::accuracy(hybrid::policy_for(&h, x).unwrap().expected_point(), p_pos).unwrap();
        for q in &pts {
            prop_assert!(got >= roc::accuracy(*q, p_pos).unwrap() - 1e-12);
        }
    }

    #[test]
    fn hybrid_never_loses_to_a_fixed_point(
        pts in arb_points(15),
        conds in prop::collection::vec(arb_conditions(), 1..6),
    ) {
        let h = hull_of(&pts);
        let s = DriftScenario::cycling(&conds, 12).unwrap();
        for (i, q) in pts.iter().enumerate() {
            let fixed = HullVertex::classifier(format!("c{i}"), *q, None);
            let r = eval::run_drift(&s, &h, &fixed).unwrap();
            for e in &r.epochs {
                prop_assert!(e.regret >= -1e-9);
            }
        }
    }

    #[test]
    fn same_seed_same_predictions(pts in arb_points(10), x in 0.0..=1.0f64, seed in any::<u64>()) {
        let h = hull_of(&pts);
        let policy = hybrid::policy_for(&h, x).unwrap();
        let scores: HashMap<String, f64> =
            (0..pts.len()).map(|i| (format!("c{i}"), (i % 2) as f64)).collect();
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..50).map(|_| policy.classify(&scores, &mut rng).unwrap()).collect::<Vec<_>>()
        };
        prop_assert_eq!(run(), run());
    }

    #[test]
    fn averaged_curve_is_monotone_and_bracketed(
        folds in prop::collection::vec(arb_examples(), 2..5),
    ) {
        let folds: Vec<(String, Vec<ScoredExample>)> = folds
            .into_iter()
            .enumerate()
            .map(|(f, ex)| {
                let ex = ex
                    .into_iter()
                    .map(|e| ScoredExample { example_id: format!("{f}/{}", e.example_id), ..e })
                    .collect();
                (f.to_string(), ex)
            })
            .collect();
        let fs = FoldedScores::new("m", folds).unwrap();
        let avg = eval::average_roc(&fs, &eval::uniform_grid(50)).unwrap();
        prop_assert!(avg.curve.validate().is_ok());
        for r in &avg.rows {
            prop_assert!(r.min_tp - 1e-12 <= r.mean_tp && r.mean_tp <= r.max_tp + 1e-12);
        }
    }

    #[test]
    fn hull_file_round_trips(pts in arb_grid_points(20)) {
        let h = hull_of(&pts);
        let text = io::save_hull(&h);
        let back = io::load_hull(&text).unwrap();
        prop_assert_eq!(&back, &h);
        prop_assert_eq!(HullFile::from_hull(&back).to_json(), text);
    }

    #[test]
    fn score_file_round_trips(ex in arb_examples(), weighted in any::<bool>()) {
        let mut text = String::from("classifier,example,label,score");
        if weighted {
            text.push_str(",weight");
        }
        text.push('\n');
        for e in &ex {
            text.push_str(&format!("m,{},{},{}", e.example_id, e.label.as_str(), e.score));
            if weighted {
                text.push_str(&format!(",{}", e.weight));
            }
            text.push('\n');
        }
        let f = ScoreFile::parse(&text).unwrap();
        let again = ScoreFile::parse(&f.to_csv()).unwrap();
        prop_assert_eq!(&again.rows.iter().map(|r| r.to_example()).collect::<Vec<_>>(),
                        &f.rows.iter().map(|r| r.to_example()).collect::<Vec<_>>());
        prop_assert_eq!(again.to_csv(), f.to_csv());
    }
}
