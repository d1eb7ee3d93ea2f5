use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::data::{FaceFilterReport, Label, ScoreDataset};
use super::hypothesis::{run_hypothesis, Field, FieldValue, HypothesisOutcome, HypothesisSpec, ValueField};
use super::AuditError;
use crate::stats::{concept_validation, mine_spurious, roc_auc, AucCell, ConceptValidation, ScoreTable, SpuriousFinding};

fn demographic() -> Field {
    Field::Demographic
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AucSpec {
    /// Defaults to every concept with at least one annotation.
    #[serde(default)]
    pub concepts: Option<Vec<String>>,
    #[serde(default = "demographic")]
    pub group_field: Field,
    /// Hypotheses shown as mark columns; defaults to every concept-score
    /// hypothesis in the suite.
    #[serde(default)]
    pub marks: Option<Vec<String>>,
}

/// A hypothesis suite as shipped in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Suite {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    /// Keep only samples reporting exactly one face.
    #[serde(default)]
    pub single_face: bool,
    /// Keep only samples of this variant.
    #[serde(default)]
    pub variant: Option<String>,
    pub hypotheses: Vec<HypothesisSpec>,
    #[serde(default)]
    pub auc: Option<AucSpec>,
    #[serde(default)]
    pub top_k: Option<usize>,
}

impl Suite {
    pub fn from_json(text: &str) -> Result<Suite, AuditError> {
        let suite: Suite = serde_json::from_str(text).map_err(|e| AuditError::Spec(e.to_string()))?;
        let mut ids = std::collections::BTreeSet::new();
        for h in &suite.hypotheses {
            if !ids.insert(h.id.as_str()) {
                return Err(AuditError::Spec(format!("hypothesis id {:?} appears twice", h.id)));
            }
        }
        Ok(suite)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mark {
    Significant,
    NotSignificant,
    NotTested,
}

impl Mark {
    pub fn symbol(self) -> &'static str {
        match self {
            Mark::Significant => "✓",
            Mark::NotSignificant => "✗",
            Mark::NotTested => "-",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AucRow {
    pub concept: String,
    pub cells: Vec<AucCell>,
    pub marks: Vec<Mark>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AucTable {
    pub group_field: Field,
    pub groups: Vec<String>,
    pub mark_ids: Vec<String>,
    pub rows: Vec<AucRow>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationCount {
    pub concept: String,
    pub group: String,
    pub pos: usize,
    pub neg: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationRow {
    pub concept: String,
    #[serde(flatten)]
    pub validation: ConceptValidation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopK {
    pub sample_id: String,
    pub concepts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub n_samples: usize,
    pub n_concepts: usize,
    pub n_score_cells: usize,
    pub orphan_rows: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub face_filter: Option<FaceFilterReport>,
    pub hypotheses: Vec<HypothesisOutcome>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auc: Option<AucTable>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub annotation_counts: Vec<AnnotationCount>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub concept_validation: Vec<ValidationRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub top_k: Vec<TopK>,
}

/// Distinct values of `field` in the dataset, in display order.
fn group_values(ds: &ScoreDataset, field: Field) -> Vec<FieldValue> {
    let set: std::collections::BTreeSet<FieldValue> = ds.samples.iter().map(|s| field.value(s)).collect();
    set.into_iter().collect()
}

fn annotated_concepts(ds: &ScoreDataset) -> Vec<String> {
    ds.concepts
        .iter()
        .filter(|c| ds.samples.iter().any(|s| s.annotations.contains_key(*c)))
        .cloned()
        .collect()
}

/// Scores of `concept` split by annotation label, keyed by group index.
fn split_by_label(ds: &ScoreDataset, concept: usize, field: Field, groups: &[FieldValue]) -> Vec<(Vec<f64>, Vec<f64>)> {
    let name = &ds.concepts[concept];
    let mut out = vec![(Vec::new(), Vec::new()); groups.len()];
    for (i, s) in ds.samples.iter().enumerate() {
        let (Some(label), Some(score)) = (s.annotations.get(name), ds.score(i, concept)) else { continue };
        let g = groups.binary_search(&field.value(s)).expect("group listed");
        match label {
            Label::Pos => out[g].0.push(score),
            Label::Neg => out[g].1.push(score),
        }
    }
    out
}

fn resolve(ds: &ScoreDataset, concepts: &[String]) -> Result<Vec<usize>, AuditError> {
    concepts
        .iter()
        .map(|c| ds.concept_index(c).ok_or_else(|| AuditError::Spec(format!("concept {c:?} not in dataset"))))
        .collect()
}

/// Per (concept, group) ROC-AUC over annotated scores, with one
/// significance mark per outcome in `marks`.
pub fn auc_table(
    ds: &ScoreDataset,
    concepts: &[String],
    field: Field,
    marks: &[&HypothesisOutcome],
) -> Result<AucTable, AuditError> {
    let groups = group_values(ds, field);
    let rows = resolve(ds, concepts)?
        .into_iter()
        .map(|c| {
            let concept = &ds.concepts[c];
            let cells = split_by_label(ds, c, field, &groups)
                .iter()
                .zip(&groups)
                .map(|((pos, neg), g)| AucCell::new(concept, &g.label, roc_auc(pos, neg)))
                .collect();
            let marks = marks
                .iter()
                .map(|o| match o.rejects_for(concept) {
                    Some(true) => Mark::Significant,
                    Some(false) => Mark::NotSignificant,
                    None => Mark::NotTested,
                })
                .collect();
            AucRow { concept: concept.clone(), cells, marks }
        })
        .collect();
    Ok(AucTable {
        group_field: field,
        groups: groups.into_iter().map(|g| g.label).collect(),
        mark_ids: marks.iter().map(|o| o.id.clone()).collect(),
        rows,
    })
}

/// Positive and negative annotation counts per (concept, group).
pub fn annotation_counts(ds: &ScoreDataset, concepts: &[String], field: Field) -> Result<Vec<AnnotationCount>, AuditError> {
    let groups = group_values(ds, field);
    let mut out = Vec::new();
    for c in resolve(ds, concepts)? {
        let mut counts = vec![(0, 0); groups.len()];
        for s in &ds.samples {
            let g = groups.binary_search(&field.value(s)).expect("group listed");
            match s.annotations.get(&ds.concepts[c]) {
                Some(Label::Pos) => counts[g].0 += 1,
                Some(Label::Neg) => counts[g].1 += 1,
                None => {}
            }
        }
        out.extend(counts.into_iter().zip(&groups).map(|((pos, neg), g)| AnnotationCount {
            concept: ds.concepts[c].clone(),
            group: g.label.clone(),
            pos,
            neg,
        }));
    }
    Ok(out)
}

/// Indices of the `k` highest scores, ties broken by lower index.
pub fn top_k(scores: &[f64], k: usize) -> Vec<usize> {
    assert!(k >= 1, "k must be at least 1");
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

/// Top-k concept names of one sample, ties broken by catalog order.
pub fn sample_top_k(ds: &ScoreDataset, sample: usize, k: usize) -> Vec<String> {
    let cells = &ds.scores[sample];
    let values: Vec<f64> = cells.iter().map(|&(_, v)| v).collect();
    top_k(&values, k).into_iter().map(|i| ds.concepts[cells[i].0 as usize].clone()).collect()
}

/// Screens every concept for a group whose mean score exceeds `threshold`
/// and tests it across the groups of `field`.
pub fn mine(ds: &ScoreDataset, threshold: f64, alpha: f64, field: Field) -> Vec<SpuriousFinding> {
    let groups = group_values(ds, field);
    let mut table = ScoreTable::new(ds.concepts.clone(), groups.iter().map(|g| g.label.clone()).collect());
    for (i, s) in ds.samples.iter().enumerate() {
        let g = groups.binary_search(&field.value(s)).expect("group listed");
        for &(c, v) in &ds.scores[i] {
            table.push(c as usize, g, v);
        }
    }
    mine_spurious(&table, threshold, alpha)
}

/// Runs every part of a suite. The seed only drives power simulations.
pub fn run_suite(ds: &ScoreDataset, suite: &Suite, seed: u64) -> Result<SuiteReport, AuditError> {
    let variant_ds;
    let mut ds = ds;
    if suite.variant.is_some() {
        variant_ds = ds.with_variant(suite.variant.as_deref());
        ds = &variant_ds;
    }
    let single;
    let mut face_filter = None;
    if suite.single_face {
        let (filtered, report) = ds.single_face()?;
        single = filtered;
        ds = &single;
        face_filter = Some(report);
    }

    let hypotheses =
        suite.hypotheses.iter().map(|h| run_hypothesis(ds, h, seed)).collect::<Result<Vec<_>, _>>()?;

    let mut auc = None;
    let mut counts = Vec::new();
    let mut validation = Vec::new();
    if let Some(spec) = &suite.auc {
        let concepts = spec.concepts.clone().unwrap_or_else(|| annotated_concepts(ds));
        let mark_outcomes: Vec<&HypothesisOutcome> = match &spec.marks {
            Some(ids) => ids
                .iter()
                .map(|id| {
                    hypotheses
                        .iter()
                        .find(|o| o.id == *id)
                        .ok_or_else(|| AuditError::Spec(format!("mark {id:?} names no hypothesis")))
                })
                .collect::<Result<_, _>>()?,
            None => suite
                .hypotheses
                .iter()
                .zip(&hypotheses)
                .filter(|(h, _)| matches!(h.value_field, Some(ValueField::ConceptScore(_))))
                .map(|(_, o)| o)
                .collect(),
        };
        auc = Some(auc_table(ds, &concepts, spec.group_field, &mark_outcomes)?);
        counts = annotation_counts(ds, &concepts, spec.group_field)?;
        for c in resolve(ds, &concepts)? {
            let all = Field::Sex;
            let (pos, neg): (Vec<f64>, Vec<f64>) = split_by_label(ds, c, all, &group_values(ds, all))
                .into_iter()
                .fold((Vec::new(), Vec::new()), |(mut p, mut n), (gp, gn)| {
                    p.extend(gp);
                    n.extend(gn);
                    (p, n)
                });
            if let Ok(v) = concept_validation(&pos, &neg) {
                validation.push(ValidationRow { concept: ds.concepts[c].clone(), validation: v });
            }
        }
    }

    let top = match suite.top_k {
        Some(0) => return Err(AuditError::Spec("top_k must be at least 1".into())),
        Some(k) => (0..ds.samples.len())
            .map(|i| TopK { sample_id: ds.samples[i].sample_id.clone(), concepts: sample_top_k(ds, i, k) })
            .collect(),
        None => Vec::new(),
    };

    Ok(SuiteReport {
        suite: suite.name.clone(),
        seed,
        n_samples: ds.samples.len(),
        n_concepts: ds.concepts.len(),
        n_score_cells: ds.n_cells(),
        orphan_rows: ds.orphan_rows,
        face_filter,
        hypotheses,
        auc,
        annotation_counts: counts,
        concept_validation: validation,
        top_k: top,
    })
}

/// `num / den` rounded half-to-even to `decimals` places, computed exactly.
pub fn fixed_half_even(num: u128, den: u128, decimals: u32) -> String {
    assert!(den > 0);
    let scale = 10u128.pow(decimals);
    let scaled = num * scale;
    let (mut q, r) = (scaled / den, scaled % den);
    if 2 * r > den || (2 * r == den && q % 2 == 1) {
        q += 1;
    }
    if decimals == 0 {
        return q.to_string();
    }
    format!("{}.{:0width$}", q / scale, q % scale, width = decimals as usize)
}

/// AUC on the 0 to 100 scale with two decimals, or `NaN`.
///
/// The AUC is a multiple of 1 / (2 · n_pos · n_neg), so the rounding is done
/// on that exact fraction rather than on the float.
pub fn auc_percent(cell: &AucCell) -> String {
    if cell.auc.is_nan() {
        return "NaN".to_owned();
    }
    let den = 2 * cell.n_pos as u128 * cell.n_neg as u128;
    let twice_u = (cell.auc * den as f64).round() as u128;
    fixed_half_even(twice_u * 100, den, 2)
}

fn pct(part: usize, total: usize) -> String {
    if total == 0 {
        "NaN".to_owned()
    } else {
        fixed_half_even(part as u128 * 100, total as u128, 1)
    }
}

/// Shortest round-trip form; scientific notation for tiny magnitudes.
fn real(x: f64) -> String {
    if x != 0.0 && x.abs() < 1e-4 {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

fn write_json_file<T: Serialize>(path: &Path, value: &T) -> Result<(), AuditError> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>, AuditError> {
    Ok(csv::Writer::from_writer(File::create(path)?))
}

/// Writes `results.json` at full precision and the rounded `tables/*.csv`.
pub fn write_report(report: &SuiteReport, out_dir: &Path) -> Result<(), AuditError> {
    let tables = out_dir.join("tables");
    fs::create_dir_all(&tables)?;
    write_json_file(&out_dir.join("results.json"), report)?;

    let mut w = csv_writer(&tables.join("hypotheses.csv"))?;
    w.write_record([
        "id", "stratum", "groups", "h_statistic", "degrees_freedom", "p_value", "alpha_corrected", "reject", "power",
    ])?;
    for o in &report.hypotheses {
        for r in &o.results {
            let t = &r.test;
            w.write_record([
                o.id.clone(),
                r.stratum.clone(),
                r.groups.iter().map(|g| format!("{}={}", g.group, g.n)).collect::<Vec<_>>().join(";"),
                real(t.h_statistic),
                t.degrees_freedom.to_string(),
                real(t.p_value),
                real(t.alpha_corrected),
                t.reject.to_string(),
                t.power.map(real).unwrap_or_default(),
            ])?;
        }
        for s in &o.skipped {
            w.write_record([&o.id, &s.stratum, "", "", "", "", "", "skipped", &s.reason])?;
        }
    }
    w.flush()?;

    let curves: Vec<_> = report
        .hypotheses
        .iter()
        .flat_map(|o| o.results.iter().map(move |r| (o, r)))
        .flat_map(|(o, r)| r.power_curve.iter().map(move |p| (o, r, p)))
        .collect();
    if !curves.is_empty() {
        let mut w = csv_writer(&tables.join("power.csv"))?;
        w.write_record(["id", "stratum", "n_per_group", "power"])?;
        for (o, r, p) in curves {
            w.write_record([&o.id, &r.stratum, &p.n_per_group.to_string(), &real(p.power)])?;
        }
        w.flush()?;
    }

    let bins: Vec<_> = report.hypotheses.iter().flat_map(|o| o.bins.iter().map(move |b| (o, b))).collect();
    if !bins.is_empty() {
        let mut w = csv_writer(&tables.join("median_in_bin.csv"))?;
        w.write_record(["id", "age_bin", "n", "median", "q1", "q3", "iqr", "fraction_inside", "median_inside"])?;
        for (o, b) in bins {
            w.write_record([
                o.id.clone(),
                b.age_bin.to_string(),
                b.n.to_string(),
                format!("{:.2}", b.median),
                format!("{:.2}", b.q1),
                format!("{:.2}", b.q3),
                format!("{:.2}", b.iqr),
                format!("{:.4}", b.fraction_inside),
                b.median_inside.to_string(),
            ])?;
        }
        w.flush()?;
    }

    if let Some(t) = &report.auc {
        let mut w = csv_writer(&tables.join("auc.csv"))?;
        let header: Vec<&str> =
            std::iter::once("concept").chain(t.groups.iter().map(String::as_str)).chain(t.mark_ids.iter().map(String::as_str)).collect();
        w.write_record(&header)?;
        for row in &t.rows {
            let record: Vec<String> = std::iter::once(row.concept.clone())
                .chain(row.cells.iter().map(auc_percent))
                .chain(row.marks.iter().map(|m| m.symbol().to_owned()))
                .collect();
            w.write_record(&record)?;
        }
        w.flush()?;
    }

    if !report.annotation_counts.is_empty() {
        // Wide layout: one row per concept, "total (percent positive)" per group.
        let mut by_concept: BTreeMap<&str, Vec<&AnnotationCount>> = BTreeMap::new();
        let mut order = Vec::new();
        let mut groups = Vec::new();
        for c in &report.annotation_counts {
            if !by_concept.contains_key(c.concept.as_str()) {
                order.push(c.concept.as_str());
            }
            if !groups.contains(&c.group.as_str()) {
                groups.push(c.group.as_str());
            }
            by_concept.entry(&c.concept).or_default().push(c);
        }
        let mut w = csv_writer(&tables.join("annotation_counts.csv"))?;
        w.write_record(std::iter::once("concept").chain(groups.iter().copied()))?;
        for concept in order {
            let cells = by_concept[concept].iter().map(|c| format!("{} ({})", c.pos + c.neg, pct(c.pos, c.pos + c.neg)));
            w.write_record(std::iter::once(concept.to_owned()).chain(cells))?;
        }
        w.flush()?;
    }

    if !report.concept_validation.is_empty() {
        let mut w = csv_writer(&tables.join("concept_validation.csv"))?;
        w.write_record(["concept", "mean_in", "mean_out", "gap"])?;
        for v in &report.concept_validation {
            let c = &v.validation;
            w.write_record([
                v.concept.clone(),
                format!("{:.4}", c.mean_in),
                format!("{:.4}", c.mean_out),
                format!("{:.4}", c.gap),
            ])?;
        }
        w.flush()?;
    }

    if !report.top_k.is_empty() {
        let mut w = csv_writer(&tables.join("top_k.csv"))?;
        w.write_record(["sample_id", "rank", "concept"])?;
        for t in &report.top_k {
            for (rank, c) in t.concepts.iter().enumerate() {
                w.write_record([&t.sample_id, &(rank + 1).to_string(), c])?;
            }
        }
        w.flush()?;
    }
    Ok(())
}

/// Writes miner output: `findings.json` and `tables/spurious.csv`.
pub fn write_findings(findings: &[SpuriousFinding], out_dir: &Path) -> Result<(), AuditError> {
    let tables = out_dir.join("tables");
    fs::create_dir_all(&tables)?;
    write_json_file(&out_dir.join("findings.json"), &findings)?;
    let mut w = csv_writer(&tables.join("spurious.csv"))?;
    w.write_record(["concept", "top_group", "top_mean", "h_statistic", "p_value", "alpha_corrected", "reject"])?;
    for f in findings {
        w.write_record([
            f.concept.clone(),
            f.top_group.clone(),
            format!("{:.4}", f.top_mean),
            real(f.h_statistic),
            real(f.p_value),
            real(f.alpha_corrected),
            f.reject.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audit::data::{LoadOptions, SampleRow, ScoreRow, Sex};

    #[test]
    fn half_even_rounding() {
        assert_eq!(fixed_half_even(1, 8, 2), "0.12");
        assert_eq!(fixed_half_even(3, 8, 2), "0.38");
        assert_eq!(fixed_half_even(2, 3, 2), "0.67");
        assert_eq!(fixed_half_even(100, 1, 2), "100.00");
        assert_eq!(fixed_half_even(5, 2, 0), "2");
        assert_eq!(fixed_half_even(7, 2, 0), "4");
    }

    #[test]
    fn auc_percent_exact() {
        // one winning pair out of eight
        let cell = AucCell { concept: "c".into(), group: "g".into(), auc: 0.125, n_pos: 2, n_neg: 4 };
        assert_eq!(auc_percent(&cell), "12.50");
        let cell = AucCell { auc: 2.0 / 3.0, n_pos: 3, n_neg: 1, ..cell };
        assert_eq!(auc_percent(&cell), "66.67");
        let cell = AucCell { auc: f64::NAN, n_pos: 0, ..cell };
        assert_eq!(auc_percent(&cell), "NaN");
    }

    #[test]
    fn top_k_ties_and_overflow() {
        assert_eq!(top_k(&[0.1, 0.9, 0.5, 0.9], 2), [1, 3]);
        assert_eq!(top_k(&[0.3, 0.1], 10), [0, 1]);
        let scores: Vec<f64> = (0..512).map(|i| i as f64 / 512.0).collect();
        assert_eq!(top_k(&scores, 10), (502..512).rev().collect::<Vec<_>>());
    }

    fn tiny() -> ScoreDataset {
        let mut samples = Vec::new();
        let mut rows = Vec::new();
        for (i, (sex, label, score)) in [
            (Sex::Male, Label::Pos, 0.9),
            (Sex::Male, Label::Neg, 0.2),
            (Sex::Male, Label::Pos, 0.7),
            (Sex::Female, Label::Pos, 0.6),
            (Sex::Female, Label::Pos, 0.8),
        ]
        .into_iter()
        .enumerate()
        {
            let id = format!("s{i}");
            samples.push(SampleRow {
                sample_id: id.clone(),
                sex,
                ethnicity: "Asian".into(),
                age_bin: "20-29".parse().unwrap(),
                variant: None,
                annotations: [("beard".to_owned(), label)].into(),
            });
            rows.push(ScoreRow::new(id.clone(), "beard", score));
            rows.push(ScoreRow::new(id, "sky", 0.5));
        }
        ScoreDataset::from_rows(samples, rows, None, LoadOptions::default()).unwrap()
    }

    #[test]
    fn auc_table_with_empty_class() {
        let ds = tiny();
        let t = auc_table(&ds, &["beard".into()], Field::Demographic, &[]).unwrap();
        assert_eq!(t.groups, ["AM", "AF"]);
        assert_eq!(t.rows[0].cells[0].auc, 1.0);
        assert!(t.rows[0].cells[1].auc.is_nan());
        let counts = annotation_counts(&ds, &["beard".into()], Field::Demographic).unwrap();
        assert_eq!((counts[0].pos, counts[0].neg, counts[1].pos, counts[1].neg), (2, 1, 2, 0));
        assert!(auc_table(&ds, &["nope".into()], Field::Sex, &[]).is_err());
    }

    #[test]
    fn sample_top_k_uses_catalog_order_for_ties() {
        let ds = tiny();
        // s1 scores beard 0.2, sky 0.5
        assert_eq!(sample_top_k(&ds, 1, 1), ["sky"]);
        // s0: beard 0.9 first
        assert_eq!(sample_top_k(&ds, 0, 5), ["beard", "sky"]);
    }

    #[test]
    fn suite_json_rejects_duplicates() {
        let text = r#"{"name":"x","hypotheses":[{"id":"a","value_field":"predicted_age","group_field":"sex"},
                                          {"id":"a","value_field":"predicted_age","group_field":"sex"}]}"#;
        assert!(matches!(Suite::from_json(text), Err(AuditError::Spec(_))));
        assert!(Suite::from_json(r#"{"name":"x","hypotheses":[],"bogus":1}"#).is_err());
    }
}
