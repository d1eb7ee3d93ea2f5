use proptest::prelude::*;

use mlaudit::audit::filter_single_face;
use mlaudit::audit::ScoreRow;
use mlaudit::detect::{scan_keywords, scan_probability_vectors, KeywordSet, MatchMode, ProbabilityScan};
use mlaudit::stats::{bonferroni, kruskal_wallis, roc_auc, SampleGroups};
use mlaudit::synth::{generate_scores, generate_trace, DisparityPlan, SyntheticAppPlan};
use mlaudit::trace::{
    decode_args, decode_return, encode_args, encode_return, signature_of, RecordKind, TraceLog, TraceRecord,
    TypedValue, MAX_BLOB_LEN,
};

fn scalar() -> impl Strategy<Value = TypedValue> {
    prop_oneof![
        any::<bool>().prop_map(TypedValue::Bool),
        any::<i8>().prop_map(TypedValue::Byte),
        any::<i16>().prop_map(TypedValue::Short),
        any::<u16>().prop_map(TypedValue::Char),
        any::<i32>().prop_map(TypedValue::Int),
        any::<i64>().prop_map(TypedValue::Long),
        any::<u32>().prop_map(|b| TypedValue::Float(f32::from_bits(b))),
        any::<u64>().prop_map(|b| TypedValue::Double(f64::from_bits(b))),
        prop::collection::vec(any::<u8>(), 4).prop_map(TypedValue::Pointer),
    ]
}

fn blob() -> impl Strategy<Value = TypedValue> {
    prop::collection::vec(any::<u8>(), 0..=MAX_BLOB_LEN).prop_map(TypedValue::Pointer)
}

/// Up to seven arguments, the last of which may be a variable-length blob.
fn arguments() -> impl Strategy<Value = Vec<TypedValue>> {
    (prop::collection::vec(scalar(), 0..7), prop::option::of(blob())).prop_map(|(mut args, tail)| {
        args.extend(tail);
        args
    })
}

fn groups_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec((0u8..20).prop_map(|v| f64::from(v) / 4.0), 1..15), 2..5)
        .prop_filter("need three observations", |g| g.iter().map(Vec::len).sum::<usize>() >= 3)
}

fn as_groups(groups: &[Vec<f64>]) -> SampleGroups {
    groups.iter().enumerate().map(|(i, g)| (format!("g{i}"), g.clone())).collect()
}

fn callback_log(payloads: &[String]) -> TraceLog {
    TraceLog::from_records(
        payloads
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let mut r = TraceRecord::new(RecordKind::Callback, format!("cb{i}"), i as u64);
                r.payload = Some(p.clone());
                r
            })
            .collect(),
    )
}

proptest! {
    #[test]
    fn codec_round_trips(args in arguments(), ret in prop_oneof![scalar(), blob()], is_static: bool) {
        let sig = signature_of(&ret, &args);
        let raw = encode_args(&args, is_static).unwrap();
        prop_assert_eq!(decode_args(&sig, &raw, is_static).unwrap(), args);
        let raw_ret = encode_return(&ret).unwrap();
        prop_assert_eq!(decode_return(&sig, &raw_ret).unwrap(), ret);
    }

    #[test]
    fn oversized_blob_is_rejected(extra in 1usize..64) {
        let args = [TypedValue::Pointer(vec![0; MAX_BLOB_LEN + extra])];
        prop_assert!(encode_args(&args, true).is_err());
    }

    #[test]
    fn record_lines_round_trip(
        args in arguments(),
        ret in scalar(),
        is_static: bool,
        ts: u64,
        tid: u32,
        name in "[a-zA-Z_.$]{1,30}",
        lib in prop::option::of("lib[a-z]{1,8}\\.so"),
        off in prop::option::of(any::<u32>()),
        stack in prop::option::of(prop::collection::vec("[a-zA-Z.]{1,20}", 0..4)),
    ) {
        let sig = signature_of(&ret, &args);
        let mut r = TraceRecord::new(RecordKind::JniTrampoline, name, ts);
        r.tid = tid;
        r.is_static = is_static;
        r.library = lib;
        r.offset = off.map(u64::from);
        r.shorty = Some(sig.to_string());
        r.raw_args = encode_args(&args, is_static).unwrap();
        r.raw_return = encode_return(&ret).unwrap();
        r.stack = stack;
        prop_assert!(r.validate().is_ok());
        let line = r.to_json_line();
        let back = TraceRecord::from_json_line(&line).unwrap();
        prop_assert_eq!(back.to_json_line(), line);
        prop_assert_eq!(back, r);
    }

    #[test]
    fn kruskal_invariances(groups in groups_strategy(), rot in 0usize..4) {
        let base = kruskal_wallis(&as_groups(&groups)).unwrap();
        prop_assert!((0.0..=1.0).contains(&base.p_value));
        prop_assert!(base.h_statistic >= -1e-12);

        let mut rotated = groups.clone();
        let k = rotated.len();
        rotated.rotate_left(rot % k);
        let r = kruskal_wallis(&as_groups(&rotated)).unwrap();
        prop_assert!((r.h_statistic - base.h_statistic).abs() < 1e-9);

        // only ranks matter
        let transformed: Vec<Vec<f64>> = groups.iter().map(|g| g.iter().map(|v| (3.0 * v).exp() - 7.0).collect()).collect();
        let t = kruskal_wallis(&as_groups(&transformed)).unwrap();
        prop_assert!((t.h_statistic - base.h_statistic).abs() < 1e-9);
    }

    #[test]
    fn identical_groups_never_reject(values in prop::collection::vec(0u8..10, 2..20), k in 2usize..6) {
        let g: Vec<f64> = values.iter().map(|&v| f64::from(v)).collect();
        let groups: Vec<Vec<f64>> = vec![g; k];
        let kw = kruskal_wallis(&as_groups(&groups)).unwrap();
        prop_assert_eq!(kw.p_value, 1.0);
        prop_assert!(!kw.test(0.05).reject);
    }

    #[test]
    fn auc_symmetry_and_monotonicity(
        pos in prop::collection::vec((0u8..30).prop_map(f64::from), 1..40),
        neg in prop::collection::vec((0u8..30).prop_map(f64::from), 1..40),
        bump in 0.0f64..5.0,
    ) {
        let a = roc_auc(&pos, &neg);
        prop_assert!((0.0..=1.0).contains(&a.auc));
        prop_assert!((a.auc + roc_auc(&neg, &pos).auc - 1.0).abs() < 1e-12);

        let raised: Vec<f64> = pos.iter().map(|v| v + bump).collect();
        prop_assert!(roc_auc(&raised, &neg).auc >= a.auc - 1e-12);

        let mut shuffled_pos = pos.clone();
        shuffled_pos.reverse();
        let mut shuffled_neg = neg.clone();
        shuffled_neg.rotate_left(neg.len() / 2);
        prop_assert_eq!(roc_auc(&shuffled_pos, &shuffled_neg).auc, a.auc);
    }

    #[test]
    fn bonferroni_splits_alpha(alpha in 0.001f64..0.5, m in 1usize..100) {
        let a = bonferroni(alpha, m);
        prop_assert!((a * m as f64 - alpha).abs() < 1e-12);
    }

    #[test]
    fn more_keywords_never_lose_evidence(
        payloads in prop::collection::vec("[a-z ]{0,40}", 1..20),
        words in prop::collection::vec("[a-z]{2,5}", 1..5),
        more in prop::collection::vec("[a-z]{2,5}", 1..5),
    ) {
        let log = callback_log(&payloads);
        let small = KeywordSet::new(&words, MatchMode::Substring).unwrap();
        let large = KeywordSet::new(words.iter().chain(&more), MatchMode::Substring).unwrap();
        prop_assert!(scan_keywords(&log, &large).len() >= scan_keywords(&log, &small).len());
        // whole-token matches are a subset of substring matches
        let token = KeywordSet::new(&words, MatchMode::Token).unwrap();
        prop_assert!(scan_keywords(&log, &token).len() <= scan_keywords(&log, &small).len());
    }

    #[test]
    fn shorter_minimum_never_loses_vectors(
        vectors in prop::collection::vec(prop::collection::vec(0u16..=1000, 0..8), 1..10),
        min_len in 2usize..6,
    ) {
        let payloads: Vec<String> = vectors
            .iter()
            .map(|v| {
                let items: Vec<String> = v.iter().map(|x| format!("{}", f64::from(*x) / 1000.0)).collect();
                format!("{{\"probs\":[{}]}}", items.join(","))
            })
            .collect();
        let log = callback_log(&payloads);
        let strict = ProbabilityScan { min_len: min_len + 1, require_interior: true };
        let loose = ProbabilityScan { min_len, require_interior: true };
        let lax = ProbabilityScan { min_len, require_interior: false };
        let n = |s: &ProbabilityScan| scan_probability_vectors(&log, s).len();
        prop_assert!(n(&loose) >= n(&strict));
        prop_assert!(n(&lax) >= n(&loose));
    }

    #[test]
    fn face_filter_partitions_rows(faces in prop::collection::vec(0u32..5, 0..60)) {
        let rows: Vec<ScoreRow> = faces
            .iter()
            .enumerate()
            .map(|(i, &f)| ScoreRow { face_count: Some(f), ..ScoreRow::new(format!("s{i}"), "c", 0.5) })
            .collect();
        let (kept, report) = filter_single_face(&rows).unwrap();
        prop_assert_eq!(report.kept + report.discarded_zero + report.discarded_multi, rows.len());
        prop_assert_eq!(kept.len(), report.kept);
        prop_assert!(kept.iter().all(|r| r.face_count == Some(1)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn synthesis_is_deterministic(seed: u64) {
        let plan = SyntheticAppPlan { seed, n_background_calls: 300, n_background_functions: 40, ..SyntheticAppPlan::default() };
        let a = generate_trace(&plan).unwrap();
        let b = generate_trace(&plan).unwrap();
        prop_assert_eq!(a.log.to_jsonl(), b.log.to_jsonl());
        prop_assert_eq!(&a.ground_truth.pipeline_nodes, &b.ground_truth.pipeline_nodes);

        let plan = DisparityPlan::new(vec!["sky".into(), "beard".into()], 12, seed);
        let a = generate_scores(&plan).unwrap();
        let b = generate_scores(&plan).unwrap();
        prop_assert_eq!(a.scores, b.scores);
        prop_assert_eq!(a.samples, b.samples);
    }
}
