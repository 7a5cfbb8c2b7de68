use std::collections::BTreeMap;
use std::num::NonZeroUsize;

use isochrono::corpus::{apply_filter, read_corpus_jsonl, token_histogram, write_corpus_jsonl, LengthSide};
use isochrono::duration::{rate_predict, RateProfile};
use isochrono::evaluation::{evaluate_system, EvalOptions};
use isochrono::metrics::{aggregate, AggregateMetrics, SegmentMetrics};
use isochrono::qe::{FileQe, QeRecord};
use isochrono::validation::{build_error_curve, find_reliability_threshold, BinStatistic, DurationPair};
use isochrono::{
    compute_icm, DurationEstimate, FilterPolicy, LanguagePair, RatePredictor, Segment, Submission, UnitKind,
};
use proptest::prelude::*;

fn est(seconds: f64) -> DurationEstimate {
    DurationEstimate::new(seconds, "p", 1).unwrap()
}

const WORDS: &[&str] = &[
    "a", "the", "river", "café", "naïve", "x", "中文", "字幕", "on", "über", "eleven", "?",
];

fn text() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(WORDS), 1..30).prop_map(|w| w.join(" "))
}

fn segment() -> impl Strategy<Value = Segment> {
    ("[a-z0-9]{1,6}", text(), prop::option::of(text()), 0u32..8, 0u32..3)
        .prop_map(|(id, t, r, up, down)| Segment::new(id, t, "en", r, up, down))
}

fn corpus() -> impl Strategy<Value = Vec<Segment>> {
    prop::collection::vec(segment(), 0..40).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, s)| {
                Segment::new(
                    format!("{i}-{}", s.id()),
                    s.source_text(),
                    s.source_language(),
                    s.reference_translation().map(String::from),
                    s.up_votes(),
                    s.down_votes(),
                )
            })
            .collect()
    })
}

fn policy() -> impl Strategy<Value = FilterPolicy> {
    (0usize..40, 0u32..8, 0u32..3, any::<bool>()).prop_map(|(t, up, down, reference)| FilterPolicy {
        min_tokens: t,
        min_upvotes: up,
        max_downvotes: down,
        length_side: if reference {
            LengthSide::Reference
        } else {
            LengthSide::Source
        },
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn icm_is_symmetric_in_relative_terms(a in 1e-3f64..1e3, r in 0.0f64..4.0) {
        let longer = compute_icm(&est(a), &est(a * (1.0 + r))).unwrap();
        prop_assert!((longer - r).abs() <= 1e-9 * r.max(1.0));
        if r <= 1.0 {
            let shorter = compute_icm(&est(a), &est(a * (1.0 - r))).unwrap();
            prop_assert!((shorter - r).abs() <= 1e-9);
        }
    }

    #[test]
    fn aggregate_of_copies_is_the_segment(icm in 0.0f64..3.0, qe in 0.0f64..5.0, n in 1usize..200) {
        let seg = SegmentMetrics::new(icm, qe).unwrap();
        let agg: AggregateMetrics<f64> = aggregate(&vec![seg; n]).unwrap();
        prop_assert!((agg.mean_icm - icm).abs() <= 1e-12 * icm.max(1.0));
        prop_assert!((agg.mean_qe - qe).abs() <= 1e-12 * qe.max(1.0));
        prop_assert!((agg.mean_segment_aicm - seg.aicm()).abs() <= 1e-9);
        prop_assert!((agg.aicm_from_means - seg.aicm()).abs() <= 1e-9);
        prop_assert_eq!(agg.n_segments, n);
    }

    #[test]
    fn aggregate_matches_f32_within_precision(values in prop::collection::vec((0.0f64..2.0, 0.0f64..5.0), 1..50)) {
        let wide: Vec<SegmentMetrics<f64>> = values.iter().map(|&(i, q)| SegmentMetrics::new(i, q).unwrap()).collect();
        let narrow: Vec<SegmentMetrics<f32>> =
            values.iter().map(|&(i, q)| SegmentMetrics::new(i as f32, q as f32).unwrap()).collect();
        let (a, b) = (aggregate(&wide).unwrap(), aggregate(&narrow).unwrap());
        prop_assert!((a.aicm_from_means - b.aicm_from_means as f64).abs() < 1e-4);
    }

    #[test]
    fn rate_prediction_grows_with_text(a in text(), b in text(), ups in 1.0f64..30.0, floor in 0.0f64..2.0, tokens in any::<bool>()) {
        let kind = if tokens { UnitKind::Tokens } else { UnitKind::Characters };
        let profile = RateProfile::new("en", ups, kind, floor).unwrap();
        let short = rate_predict(&profile, &a).unwrap().seconds();
        let long = rate_predict(&profile, &format!("{a} {b}")).unwrap().seconds();
        prop_assert!(long > short);
        prop_assert!(short > floor);
    }

    #[test]
    fn filter_is_idempotent(c in corpus(), p in policy()) {
        let once = apply_filter(&c, &p);
        prop_assert_eq!(apply_filter(&once, &p), once);
    }

    #[test]
    fn stricter_filter_keeps_a_subset(c in corpus(), p in policy(), dt in 0usize..10, du in 0u32..3, dd in 0u32..2) {
        let strict = FilterPolicy {
            min_tokens: p.min_tokens + dt,
            min_upvotes: p.min_upvotes + du,
            max_downvotes: p.max_downvotes.saturating_sub(dd),
            ..p
        };
        let loose: Vec<String> = apply_filter(&c, &p).iter().map(|s| s.id().to_string()).collect();
        for s in apply_filter(&c, &strict) {
            prop_assert!(loose.iter().any(|id| id == s.id()));
        }
    }

    #[test]
    fn histogram_counts_every_segment(c in corpus(), width in 1usize..12) {
        let bins = token_histogram(&c, NonZeroUsize::new(width).unwrap());
        prop_assert_eq!(bins.iter().map(|b| b.1).sum::<usize>(), c.len());
        prop_assert!(bins.iter().all(|b| b.0 % width == 0));
        prop_assert!(bins.windows(2).all(|w| w[0].0 < w[1].0));
    }

    #[test]
    fn corpus_jsonl_round_trips(c in corpus()) {
        let mut buf = Vec::new();
        write_corpus_jsonl(&c, &mut buf).unwrap();
        prop_assert_eq!(read_corpus_jsonl(&buf[..]).unwrap(), c);
    }

    #[test]
    fn error_curve_is_scale_invariant(
        points in prop::collection::vec((1usize..60, 0.1f64..30.0, 0.1f64..30.0), 1..80),
        k in 0.01f64..100.0,
    ) {
        let pairs: Vec<DurationPair<f64>> = points.iter().map(|&(w, r, p)| DurationPair::new(w, r, p)).collect();
        let scaled: Vec<DurationPair<f64>> = points.iter().map(|&(w, r, p)| DurationPair::new(w, k * r, k * p)).collect();
        for stat in [BinStatistic::Mean, BinStatistic::Median] {
            let a = build_error_curve(&pairs, 5, stat).unwrap();
            let b = build_error_curve(&scaled, 5, stat).unwrap();
            prop_assert_eq!(a.bins.len(), b.bins.len());
            for (x, y) in a.bins.iter().zip(&b.bins) {
                prop_assert_eq!(x.bin_start, y.bin_start);
                prop_assert!((x.error - y.error).abs() <= 1e-9 * x.error.max(1.0));
            }
        }
    }

    #[test]
    fn looser_tolerance_never_raises_the_threshold(
        points in prop::collection::vec((1usize..60, 0.1f64..30.0, 0.1f64..30.0), 1..80),
        t1 in 0.0f64..1.0,
        t2 in 0.0f64..1.0,
    ) {
        let pairs: Vec<DurationPair<f64>> = points.iter().map(|&(w, r, p)| DurationPair::new(w, r, p)).collect();
        let curve = build_error_curve(&pairs, 5, BinStatistic::Mean).unwrap();
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        match (find_reliability_threshold(&curve, lo), find_reliability_threshold(&curve, hi)) {
            (Some(strict), Some(loose)) => prop_assert!(loose <= strict),
            (Some(_), None) => prop_assert!(false, "looser tolerance lost the threshold"),
            _ => {}
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn evaluation_ignores_corpus_order(
        rows in prop::collection::vec((text(), text(), 0.0f64..5.0), 1..12)
            .prop_flat_map(|v| (Just(v.clone()), Just((0..v.len()).collect::<Vec<_>>()).prop_shuffle())),
    ) {
        let (rows, order) = rows;
        let pair = LanguagePair::new("en", "de");
        let corpus: Vec<Segment> = rows
            .iter()
            .enumerate()
            .map(|(i, (src, _, _))| Segment::new(format!("s{i}"), src.as_str(), "en", None, 3, 0))
            .collect();
        let mut submission = Submission::new("sys", pair.clone());
        let mut records = Vec::new();
        for (i, (_, tr, q)) in rows.iter().enumerate() {
            submission = submission.with_translation(format!("s{i}"), tr.as_str());
            records.push(QeRecord { segment_id: format!("s{i}"), system: "sys".into(), score: *q });
        }
        let qe = FileQe::from_records("file", records);
        let predictor = RatePredictor::from_toml_str(
            "[[profile]]\nlanguage = \"en\"\nunits_per_second = 14.0\npause_floor = 0.2\n\
             [[profile]]\nlanguage = \"de\"\nunits_per_second = 16.0\npause_floor = 0.25\n",
        )
        .unwrap();
        let options = EvalOptions::default();
        let shuffled: Vec<Segment> = order.iter().map(|&i| corpus[i].clone()).collect();

        let a = evaluate_system(&corpus, &submission, &predictor, &qe, &options).unwrap();
        let b = evaluate_system(&shuffled, &submission, &predictor, &qe, &options).unwrap();
        prop_assert_eq!(a.report.aggregate(), b.report.aggregate());
        let by_id = |recs: &[isochrono::evaluation::SegmentRecord]| -> BTreeMap<String, (f64, f64)> {
            recs.iter().map(|r| (r.segment_id.clone(), (r.icm, r.qe))).collect()
        };
        prop_assert_eq!(by_id(&a.segments), by_id(&b.segments));
    }
}
