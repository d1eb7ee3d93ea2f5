//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any fails.

use std::collections::BTreeSet;
use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::panic;
use std::path::Path;
use std::time::{Duration, Instant};

use base64::Engine;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use mlaudit::audit::{run_suite, write_report, ConceptCatalog, LoadOptions, ScoreDataset, Suite};
use mlaudit::detect::{detect, KeywordSet, ProbabilityScan};
use mlaudit::pipeline::{build_call_graph, completeness_check, slice_pipeline, NodeId, Role};
use mlaudit::stats::{estimate_power, kruskal_wallis, power_curve, roc_auc, SampleGroups};
use mlaudit::synth::{generate_scores, generate_trace, DisparityPlan, Shift, SyntheticAppPlan};
use mlaudit::trace::{
    decode_args, decode_return, encode_args, encode_return, parse_shorty, ParseOptions, TraceReader, TypeKind,
    TypedValue, MAX_BLOB_LEN,
};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:.2?}, limit {limit:?}"))
}

fn fixtures() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures"))
}

// 1 ----------------------------------------------------------------------

const ARG_KINDS: [TypeKind; 9] = [
    TypeKind::Bool,
    TypeKind::Byte,
    TypeKind::Short,
    TypeKind::Char,
    TypeKind::Int,
    TypeKind::Long,
    TypeKind::Float,
    TypeKind::Double,
    TypeKind::Pointer,
];

fn random_value(kind: TypeKind, blob: bool, rng: &mut ChaCha8Rng) -> TypedValue {
    match kind {
        TypeKind::Void => TypedValue::Void,
        TypeKind::Bool => TypedValue::Bool(rng.random()),
        TypeKind::Byte => TypedValue::Byte(rng.random()),
        TypeKind::Short => TypedValue::Short(rng.random()),
        TypeKind::Char => TypedValue::Char(rng.random()),
        TypeKind::Int => TypedValue::Int(rng.random()),
        TypeKind::Long => TypedValue::Long(rng.random()),
        TypeKind::Float => TypedValue::Float(f32::from_bits(rng.random())),
        TypeKind::Double => TypedValue::Double(f64::from_bits(rng.random())),
        TypeKind::Pointer => {
            let len = if blob { rng.random_range(0..=MAX_BLOB_LEN) } else { 4 };
            TypedValue::Pointer((0..len).map(|_| rng.random()).collect())
        }
    }
}

fn codec_round_trip() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0DEC);
    let mut with_blob = 0;
    for case in 0..1000 {
        let len = rng.random_range(1..=8);
        let ret_kind = if rng.random_bool(0.2) { TypeKind::Void } else { ARG_KINDS[rng.random_range(0..9)] };
        let arg_kinds: Vec<TypeKind> = (1..len).map(|_| ARG_KINDS[rng.random_range(0..9)]).collect();
        let shorty: String = std::iter::once(ret_kind).chain(arg_kinds.iter().copied()).map(TypeKind::as_char).collect();
        let sig = parse_shorty(&shorty).map_err(|e| format!("{shorty}: {e}"))?;
        let last = arg_kinds.len().saturating_sub(1);
        let args: Vec<TypedValue> =
            arg_kinds.iter().enumerate().map(|(i, &k)| random_value(k, i == last, &mut rng)).collect();
        with_blob += usize::from(arg_kinds.last() == Some(&TypeKind::Pointer));
        let ret = random_value(ret_kind, true, &mut rng);
        let is_static = rng.random_bool(0.5);

        let raw = encode_args(&args, is_static).map_err(|e| format!("case {case} {shorty}: {e}"))?;
        let back = decode_args(&sig, &raw, is_static).map_err(|e| format!("case {case} {shorty}: {e}"))?;
        ensure(back == args, || format!("case {case} {shorty}: args differ"))?;
        let raw_ret = encode_return(&ret).map_err(|e| format!("case {case}: {e}"))?;
        let back_ret = decode_return(&sig, &raw_ret).map_err(|e| format!("case {case}: {e}"))?;
        ensure(back_ret == ret, || format!("case {case} {shorty}: return differs"))?;
    }

    // "IIJ": returns an int, takes an int then a long.
    let sig = parse_shorty("IIJ").map_err(|e| e.to_string())?;
    ensure(sig.return_kind == TypeKind::Int && sig.arg_kinds == [TypeKind::Int, TypeKind::Long], || {
        format!("IIJ parsed as {sig:?}")
    })?;
    let mut raw = vec![0xAA; 4];
    raw.extend_from_slice(&(-5i32).to_le_bytes());
    raw.extend_from_slice(&(1i64 << 40).to_le_bytes());
    let instance = decode_args(&sig, &raw, false).map_err(|e| e.to_string())?;
    let static_call = decode_args(&sig, &raw[4..], true).map_err(|e| e.to_string())?;
    let want = [TypedValue::Int(-5), TypedValue::Long(1 << 40)];
    ensure(instance == want && static_call == want, || format!("IIJ decoded as {instance:?} / {static_call:?}"))?;
    ensure(decode_args(&sig, &raw[..15], false).is_err(), || "short IIJ buffer accepted".into())?;

    within(start.elapsed(), Duration::from_secs(5))?;
    Ok(format!("1000 signatures ({with_blob} with trailing blob), IIJ = I(I, J)"))
}

// 2 ----------------------------------------------------------------------

/// H from the textbook definition: mid-ranks by counting, then the tie
/// correction from the tie-group sizes.
fn kw_oracle(groups: &[Vec<f64>]) -> (f64, f64) {
    let all: Vec<f64> = groups.iter().flatten().copied().collect();
    let n = all.len() as f64;
    let rank = |x: f64| {
        let below = all.iter().filter(|&&y| y < x).count() as f64;
        let equal = all.iter().filter(|&&y| y == x).count() as f64;
        below + (equal + 1.0) / 2.0
    };
    let mut h = 0.0;
    for g in groups {
        let r: f64 = g.iter().map(|&x| rank(x)).sum();
        h += r * r / g.len() as f64;
    }
    h = 12.0 / (n * (n + 1.0)) * h - 3.0 * (n + 1.0);
    let mut distinct = all.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let ties: f64 = distinct
        .iter()
        .map(|&v| {
            let t = all.iter().filter(|&&y| y == v).count() as f64;
            t * t * t - t
        })
        .sum();
    let c = 1.0 - ties / (n * n * n - n);
    let h = if c > 0.0 { h / c } else { 0.0 };
    let df = (groups.len() - 1) as f64;
    let p = ChiSquared::new(df).unwrap().sf(h.max(0.0));
    (h, p)
}

fn kw_oracle_equivalence() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x4B57);
    let mut worst: f64 = 0.0;
    let mut tested = 0;
    while tested < 500 {
        let k = rng.random_range(2..=5);
        // coarse grid values produce ties in most instances
        let grid = rng.random_range(3..=40) as f64;
        let groups: Vec<Vec<f64>> = (0..k)
            .map(|_| {
                let n = rng.random_range(1..=30);
                (0..n).map(|_| (rng.random::<f64>() * grid).floor() / grid).collect()
            })
            .collect();
        if groups.iter().map(Vec::len).sum::<usize>() < 3 {
            continue;
        }
        let sg: SampleGroups = groups.iter().enumerate().map(|(i, g)| (format!("g{i}"), g.clone())).collect();
        let kw = kruskal_wallis(&sg).map_err(|e| e.to_string())?;
        let (h, p) = kw_oracle(&groups);
        let err = (kw.h_statistic - h).abs().max((kw.p_value - p).abs());
        ensure(err <= 1e-10, || format!("instance {tested}: H {} vs {h}, p {} vs {p}", kw.h_statistic, kw.p_value))?;
        worst = worst.max(err);
        tested += 1;
    }
    let same = vec![0.3, 0.1, 0.7, 0.7, 0.2];
    let identical: SampleGroups = (0..4).map(|i| (format!("g{i}"), same.clone())).collect();
    let kw = kruskal_wallis(&identical).map_err(|e| e.to_string())?;
    ensure(kw.p_value == 1.0 && kw.h_statistic == 0.0, || format!("identical groups: H {} p {}", kw.h_statistic, kw.p_value))?;
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!("500 instances, max |diff| {worst:.1e}; identical groups p = 1"))
}

// 3 ----------------------------------------------------------------------

fn auc_exactness() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xA0C);
    let mut worst: f64 = 0.0;
    for case in 0..500 {
        let grid = rng.random_range(2..=50) as f64;
        let draw = |rng: &mut ChaCha8Rng, n: usize, shift: f64| -> Vec<f64> {
            (0..n).map(|_| ((rng.random::<f64>() + shift) * grid).floor() / grid).collect()
        };
        let n_pos = rng.random_range(1..=60);
        let n_neg = rng.random_range(1..=60);
        let pos = draw(&mut rng, n_pos, 0.2);
        let neg = draw(&mut rng, n_neg, 0.0);
        let mut wins = 0.0;
        for p in &pos {
            for q in &neg {
                wins += if p > q { 1.0 } else if p == q { 0.5 } else { 0.0 };
            }
        }
        let oracle = wins / (n_pos * n_neg) as f64;
        let got = roc_auc(&pos, &neg);
        let err = (got.auc - oracle).abs();
        ensure(err <= 1e-12, || format!("case {case}: {} vs {oracle}", got.auc))?;
        worst = worst.max(err);
    }
    let empty_pos = roc_auc(&[], &[0.1, 0.2]);
    let empty_neg = roc_auc(&[0.4], &[]);
    ensure(empty_pos.auc.is_nan() && empty_neg.auc.is_nan(), || "empty class did not give NaN".into())?;
    let json = serde_json::to_string(&empty_pos).map_err(|e| e.to_string())?;
    ensure(json.contains(r#""auc":"NaN""#), || format!("NaN serialized as {json}"))?;
    within(start.elapsed(), Duration::from_secs(5))?;
    Ok(format!("500 sets, max |diff| {worst:.1e}; empty class -> \"NaN\""))
}

// 4 ----------------------------------------------------------------------

fn power_calibration() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x90E);
    let normal = |rng: &mut ChaCha8Rng| -> f64 {
        // Box-Muller keeps this oracle independent of the library's sampler
        let (u, v): (f64, f64) = (rng.random::<f64>().max(f64::MIN_POSITIVE), rng.random());
        (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
    };
    let pooled: Vec<f64> = (0..600).map(|_| normal(&mut rng)).collect();
    let null: SampleGroups = pooled.chunks(200).enumerate().map(|(i, c)| (format!("g{i}"), c.to_vec())).collect();
    // Pool every group so the null holds exactly.
    let null = SampleGroups { groups: null.groups.iter().map(|(l, _)| (l.clone(), pooled.clone())).collect() };
    let mut null_rates = Vec::new();
    for seed in [17, 29] {
        let p = estimate_power(&null, 100, 1000, 0.05, seed).map_err(|e| e.to_string())?;
        ensure((0.02..=0.08).contains(&p), || format!("null power {p} at seed {seed}"))?;
        null_rates.push(p);
    }

    let low: Vec<f64> = (0..100).map(|_| rng.random::<f64>()).collect();
    let high: Vec<f64> = (0..100).map(|_| 2.0 + rng.random::<f64>()).collect();
    let disjoint = SampleGroups { groups: vec![("low".into(), low), ("high".into(), high)] };
    let p_disjoint = estimate_power(&disjoint, 100, 1000, 0.05, 5).map_err(|e| e.to_string())?;
    ensure(p_disjoint >= 0.99, || format!("disjoint power {p_disjoint}"))?;

    let base: Vec<f64> = (0..1000).map(|_| normal(&mut rng)).collect();
    let shifted: Vec<f64> = (0..1000).map(|_| normal(&mut rng) + 0.15).collect();
    let fixed = SampleGroups { groups: vec![("a".into(), base), ("b".into(), shifted)] };
    let curve = power_curve(&fixed, &[100, 500, 1000], 1000, 0.05, 9).map_err(|e| e.to_string())?;
    let powers: Vec<f64> = curve.iter().map(|p| p.1).collect();
    ensure(powers.windows(2).all(|w| w[0] <= w[1]), || format!("power not monotone: {powers:?}"))?;
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!(
        "null {:.3}/{:.3}, disjoint {p_disjoint:.3}, shift curve {:.3} {:.3} {:.3}",
        null_rates[0], null_rates[1], powers[0], powers[1], powers[2]
    ))
}

// 5 ----------------------------------------------------------------------

fn detection_and_reconstruction() -> Check {
    let start = Instant::now();
    let base: SyntheticAppPlan =
        serde_json::from_str(&fs::read_to_string(fixtures().join("plans/app_trace.json")).unwrap()).unwrap();
    let keywords = KeywordSet::default();
    let scan = ProbabilityScan::default();
    let (mut flagged, mut exact, mut second_feed, mut planted_feeds) = (0, 0, 0, 0);
    let mut misses = Vec::new();
    for seed in 1..=20u64 {
        let plan = SyntheticAppPlan { seed, ..base.clone() };
        ensure(plan.n_background_calls == 10_000 && plan.obfuscate_names, || "fixture plan changed".into())?;
        let t = generate_trace(&plan).map_err(|e| e.to_string())?;
        let gt = &t.ground_truth;
        ensure(gt.model_nodes.len() >= 2, || format!("seed {seed}: no multi-destination jump planted"))?;

        let d = detect(&t.log, &keywords, &scan);
        let planted: BTreeSet<usize> = gt.evidence_records.iter().copied().collect();
        let anchor = gt.anchor.clone().ok_or("plan has no callback")?;
        let hit = d.evidence.iter().any(|e| planted.contains(&e.record_index))
            && d.candidates.iter().any(|c| NodeId::new(&c.function_name, c.library.as_deref()) == anchor);
        flagged += usize::from(hit);

        let mut graph = build_call_graph(&t.log, &t.static_edges, &t.jumps);
        graph.apply_roles(&t.roles);
        let top = d.candidates.first().ok_or_else(|| format!("seed {seed}: no candidates"))?;
        let top_id = NodeId::new(&top.function_name, top.library.as_deref());
        let slice = match slice_pipeline(&graph, &top_id) {
            Ok(s) => s,
            Err(e) => {
                misses.push(format!("seed {seed}: {e}"));
                continue;
            }
        };
        if slice.node_set() == gt.node_set() {
            exact += 1;
        } else {
            misses.push(format!("seed {seed}: slice of {} nodes vs {}", slice.nodes.len(), gt.pipeline_nodes.len()));
        }
        if let Some(feed) = &gt.second_feed {
            planted_feeds += 1;
            let inputs: BTreeSet<NodeId> = slice
                .nodes
                .iter()
                .filter(|id| slice.roles.get(*id).is_some_and(|r| r.contains(&Role::InputSource)))
                .cloned()
                .collect();
            let report = completeness_check(&slice, &graph, &inputs);
            second_feed += usize::from(report.extra_inflows.iter().any(|e| &e.from == feed));
        }
    }
    ensure(flagged == 20, || format!("planted callback flagged in {flagged}/20"))?;
    ensure(exact >= 19, || format!("exact slices {exact}/20: {misses:?}"))?;
    ensure(planted_feeds == 20 && second_feed == 20, || format!("second feed reported {second_feed}/{planted_feeds}"))?;
    within(start.elapsed(), Duration::from_secs(120))?;
    Ok(format!("flagged 20/20, exact slice {exact}/20, second feed {second_feed}/20"))
}

// 6 ----------------------------------------------------------------------

fn miner_plan(seed: u64) -> DisparityPlan {
    let concepts: Vec<String> = ConceptCatalog::bundled().concepts()[..50].to_vec();
    DisparityPlan::new(concepts, 300, seed)
}

fn mine_plan(plan: &DisparityPlan) -> Result<Vec<mlaudit::stats::SpuriousFinding>, String> {
    let s = generate_scores(plan).map_err(|e| e.to_string())?;
    let ds = ScoreDataset::from_rows(s.samples, s.scores, None, LoadOptions::default()).map_err(|e| e.to_string())?;
    Ok(mlaudit::audit::mine(&ds, 0.15, 0.05, mlaudit::audit::Field::Demographic))
}

fn spurious_miner() -> Check {
    let start = Instant::now();
    let mut planted = miner_plan(0x5EED);
    let target = planted.concepts[17].clone();
    planted.shifts.push(Shift { concept: target.clone(), group: "BF".into(), shift: 0.3 });
    let findings = mine_plan(&planted)?;
    let rejected: Vec<_> = findings.iter().filter(|f| f.reject).collect();
    ensure(rejected.len() == 1 && rejected[0].concept == target && rejected[0].top_group == "BF", || {
        format!("planted run rejected {:?}", rejected.iter().map(|f| (&f.concept, &f.top_group)).collect::<Vec<_>>())
    })?;

    let mut any = 0;
    let mut screened = 0;
    for seed in 1..=100 {
        let findings = mine_plan(&miner_plan(seed))?;
        screened += findings.len();
        any += usize::from(findings.iter().any(|f| f.reject));
    }
    let rate = any as f64 / 100.0;
    within(start.elapsed(), Duration::from_secs(180))?;
    ensure(rate <= 0.05, || format!("null any-finding rate {rate:.2} over 100 seeds (mean {} screened)", screened / 100))?;
    Ok(format!("planted ({target}, BF) found alone; null any-finding rate {rate:.2}"))
}

// 7 ----------------------------------------------------------------------

fn report_shape() -> Check {
    let plan: DisparityPlan =
        serde_json::from_str(&fs::read_to_string(fixtures().join("plans/facial_concepts.json")).unwrap()).unwrap();
    let suite = Suite::from_json(&fs::read_to_string(fixtures().join("suites/facial_concepts.json")).unwrap())
        .map_err(|e| e.to_string())?;
    let s = generate_scores(&plan).map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    s.write_to(dir.path()).map_err(|e| e.to_string())?;

    let catalog = ConceptCatalog::bundled();
    let run = |out: &Path| -> Result<(), String> {
        let ds = mlaudit::audit::load_dataset(
            fs::File::open(dir.path().join("samples.csv")).unwrap(),
            fs::File::open(dir.path().join("scores.csv")).unwrap(),
            Some(&catalog),
            LoadOptions::default(),
        )
        .map_err(|e| e.to_string())?;
        let report = run_suite(&ds, &suite, 42).map_err(|e| e.to_string())?;
        write_report(&report, out).map_err(|e| e.to_string())
    };
    let (a, b) = (dir.path().join("run_a"), dir.path().join("run_b"));
    run(&a)?;
    run(&b)?;

    let auc = fs::read_to_string(a.join("tables/auc.csv")).unwrap();
    let mut lines = auc.lines();
    let header = lines.next().unwrap_or_default();
    ensure(header == "concept,AM,AF,BM,BF,IM,IF,WM,WF,NH5,NH6,NH7", || format!("header {header}"))?;
    let groups: Vec<&str> = header.split(',').skip(1).take(8).collect();
    let mut nan_cells = 0;
    let mut rows = 0;
    for line in lines {
        rows += 1;
        let cols: Vec<&str> = line.split(',').collect();
        ensure(cols.len() == 12, || format!("row {line}"))?;
        for (g, cell) in groups.iter().zip(&cols[1..9]) {
            let planted = s.ground_truth.cells.iter().find(|c| c.concept == cols[0] && c.group == *g).unwrap();
            let empty = planted.pos == 0 || planted.neg == 0;
            if *cell == "NaN" {
                nan_cells += 1;
                ensure(empty, || format!("{} {g}: NaN but both classes present", cols[0]))?;
            } else {
                ensure(!empty, || format!("{} {g}: {cell} but a class is empty", cols[0]))?;
                let v: f64 = cell.parse().map_err(|_| format!("cell {cell}"))?;
                let two_decimals = cell.split_once('.').is_some_and(|(_, d)| d.len() == 2);
                ensure((0.0..=100.0).contains(&v) && two_decimals, || format!("cell {cell}"))?;
            }
        }
        ensure(cols[9..].iter().all(|m| ["✓", "✗"].contains(m)), || format!("marks {:?}", &cols[9..]))?;
    }
    ensure(rows == 10, || format!("{rows} concept rows"))?;
    let planted_empty = s.ground_truth.cells.iter().filter(|c| c.pos == 0 || c.neg == 0).count();
    ensure(nan_cells == planted_empty, || format!("{nan_cells} NaN cells, {planted_empty} planted"))?;

    let results: serde_json::Value = serde_json::from_str(&fs::read_to_string(a.join("results.json")).unwrap()).unwrap();
    let nh7 = results["hypotheses"].as_array().unwrap().iter().find(|h| h["id"] == "NH7").unwrap();
    ensure(nh7["alpha_corrected"].as_f64() == Some(0.00625), || format!("NH7 alpha {}", nh7["alpha_corrected"]))?;
    ensure(nh7["results"].as_array().unwrap().iter().all(|r| r["alpha_corrected"].as_f64() == Some(0.00625)), || {
        "stratum alpha differs".into()
    })?;
    let hyp = fs::read_to_string(a.join("tables/hypotheses.csv")).unwrap();
    ensure(hyp.lines().filter(|l| l.starts_with("NH7,")).all(|l| l.contains(",0.00625,")), || {
        "0.00625 missing from hypotheses.csv".into()
    })?;

    let mut files = Vec::new();
    for entry in walk(&a) {
        let rel = entry.strip_prefix(&a).unwrap().to_path_buf();
        ensure(fs::read(&entry).unwrap() == fs::read(b.join(&rel)).unwrap(), || format!("{} differs", rel.display()))?;
        files.push(rel);
    }
    Ok(format!("10 x 8 AUC table, {nan_cells} NaN cells as planted, alpha 0.00625, {} files byte-identical", files.len()))
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out.sort();
    out
}

// 8 ----------------------------------------------------------------------

fn peak_rss_kib() -> Option<u64> {
    let status = fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    line.split_whitespace().nth(1)?.parse().ok()
}

fn ingest_throughput() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("big.jsonl");
    {
        let b64 = base64::engine::general_purpose::STANDARD;
        let mut w = BufWriter::new(fs::File::create(&path).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for i in 0..1_000_000u64 {
            let tid = 1 + i % 4;
            let line = match i % 4 {
                0 | 1 => {
                    let mut args = vec![0u8; 4];
                    args.extend_from_slice(&rng.random::<i32>().to_le_bytes());
                    args.extend_from_slice(&rng.random::<i64>().to_le_bytes());
                    format!(
                        r#"{{"v":1,"ts":{i},"pid":7,"tid":{tid},"kind":"quick","fn":"com.app.Feed.load{}","static":false,"shorty":"IIJ","args":"{}","ret":"{}","stack":["com.app.Feed.load","com.app.Main.run"]}}"#,
                        i % 500,
                        b64.encode(&args),
                        b64.encode(rng.random::<i32>().to_le_bytes())
                    )
                }
                2 => {
                    let blob: Vec<u8> = (0..rng.random_range(16..200)).map(|_| rng.random()).collect();
                    format!(
                        r#"{{"v":1,"ts":{i},"pid":7,"tid":{tid},"kind":"jni","fn":"decode_{}","lib":"libutil.so","off":"0x{:x}","shorty":"VDL","args":"{}"}}"#,
                        i % 300,
                        0x1000 + (i % 300) * 0x40,
                        b64.encode([&rng.random::<f64>().to_le_bytes()[..], &blob].concat())
                    )
                }
                _ => format!(
                    r#"{{"v":1,"ts":{i},"pid":7,"tid":{tid},"kind":"cb","fn":"onResult","payload":"{{\"id\":{i},\"state\":\"ok\"}}"}}"#
                ),
            };
            w.write_all(line.as_bytes()).unwrap();
            w.write_all(b"\n").unwrap();
        }
        w.flush().unwrap();
    }
    let size_mb = fs::metadata(&path).unwrap().len() as f64 / 1e6;

    let start = Instant::now();
    let reader = BufReader::with_capacity(1 << 20, fs::File::open(&path).unwrap());
    let mut it = TraceReader::new(reader, ParseOptions::default());
    let (mut records, mut decoded) = (0u64, 0u64);
    for r in it.by_ref() {
        records += 1;
        if r.signature().is_some() {
            r.decode_args().map_err(|e| format!("record {records}: {e}"))?;
            r.decode_return().map_err(|e| format!("record {records}: {e}"))?;
            decoded += 1;
        }
    }
    let counters = it.finish().map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let peak_mb = peak_rss_kib().map(|k| k as f64 / 1024.0);
    ensure(records == 1_000_000 && counters.rejected == 0, || {
        format!("{records} records, {} rejected", counters.rejected)
    })?;
    within(elapsed, Duration::from_secs(30))?;
    if let Some(mb) = peak_mb {
        ensure(mb < 2048.0, || format!("peak RSS {mb:.0} MB"))?;
    }
    Ok(format!(
        "{records} records ({size_mb:.0} MB, {decoded} decoded) in {:.2} s, peak RSS {}",
        elapsed.as_secs_f64(),
        peak_mb.map_or("n/a".into(), |m| format!("{m:.0} MB"))
    ))
}

// ------------------------------------------------------------------------

fn main() {
    let criteria: [(u8, &str, fn() -> Check); 8] = [
        (8, "ingest throughput", ingest_throughput),
        (1, "codec round trip", codec_round_trip),
        (2, "Kruskal-Wallis oracle equivalence", kw_oracle_equivalence),
        (3, "AUC exactness", auc_exactness),
        (4, "power calibration", power_calibration),
        (5, "end-to-end detection and reconstruction", detection_and_reconstruction),
        (6, "spurious miner", spurious_miner),
        (7, "report shape fidelity", report_shape),
    ];
    // Ingest runs first so its peak-memory reading is not inflated by the others.
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut results = Vec::new();
    for (n, name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|p| name.contains(p.as_str()) || *p == n.to_string()) {
            continue;
        }
        let start = Instant::now();
        let outcome = panic::catch_unwind(f).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or(e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        results.push((n, name, outcome, start.elapsed()));
    }
    results.sort_by_key(|r| r.0);
    let mut failed = 0;
    for (n, name, outcome, elapsed) in &results {
        match outcome {
            Ok(detail) => println!("PASS  [{n}] {name} ({:.1} s): {detail}", elapsed.as_secs_f64()),
            Err(why) => {
                failed += 1;
                println!("FAIL  [{n}] {name} ({:.1} s): {why}", elapsed.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
