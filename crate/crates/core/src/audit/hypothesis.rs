use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::data::{AgeBin, Label, SampleRow, ScoreDataset, Sex};
use super::AuditError;
use crate::stats::{bonferroni, kruskal_wallis, power_curve, SampleGroups, TestResult};

/// Per-sample quantity a hypothesis compares across groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValueField {
    PredictedSexScore,
    PredictedAge,
    /// 1 when the sex score (≥ 0.5 reads as Male) agrees with the label, else 0.
    SexCorrect,
    /// Score of one concept, or of every concept (one stratum each).
    ConceptScore(Option<String>),
}

impl fmt::Display for ValueField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueField::PredictedSexScore => f.write_str("predicted_sex_score"),
            ValueField::PredictedAge => f.write_str("predicted_age"),
            ValueField::SexCorrect => f.write_str("sex_correct"),
            ValueField::ConceptScore(None) => f.write_str("concept_score"),
            ValueField::ConceptScore(Some(c)) => write!(f, "concept_score:{c}"),
        }
    }
}

impl FromStr for ValueField {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "predicted_sex_score" => ValueField::PredictedSexScore,
            "predicted_age" => ValueField::PredictedAge,
            "sex_correct" => ValueField::SexCorrect,
            "concept_score" => ValueField::ConceptScore(None),
            _ => match s.strip_prefix("concept_score:") {
                Some(c) if !c.is_empty() => ValueField::ConceptScore(Some(c.to_owned())),
                _ => return Err(format!("unknown value_field {s:?}")),
            },
        })
    }
}

impl Serialize for ValueField {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ValueField {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// A sample attribute used to group or stratify.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Sex,
    Ethnicity,
    AgeBin,
    /// Ethnicity × sex, labelled like `AM`.
    Demographic,
}

/// Sorts sexes Male first, age bins in range order, ethnicities by name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct FieldValue {
    key: (String, usize),
    pub label: String,
}

impl Field {
    pub fn value(self, s: &SampleRow) -> FieldValue {
        let sex_idx = |x: Sex| Sex::ALL.iter().position(|y| *y == x).unwrap();
        let (key, label) = match self {
            Field::Sex => ((String::new(), sex_idx(s.sex)), s.sex.to_string()),
            Field::Ethnicity => ((s.ethnicity.clone(), 0), s.ethnicity.clone()),
            Field::AgeBin => ((String::new(), s.age_bin.index()), s.age_bin.label().to_owned()),
            Field::Demographic => ((s.ethnicity.clone(), sex_idx(s.sex)), s.demographic()),
        };
        FieldValue { key, label }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum FamilySize {
    /// Number of distinct groups of `group_field` in the dataset.
    #[default]
    Auto,
    Fixed(usize),
}

impl Serialize for FamilySize {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            FamilySize::Auto => s.serialize_str("auto"),
            FamilySize::Fixed(n) => s.serialize_u64(*n as u64),
        }
    }
}

impl<'de> Deserialize<'de> for FamilySize {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(usize),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(0) => Err(serde::de::Error::custom("family_size must be at least 1")),
            Raw::N(n) => Ok(FamilySize::Fixed(n)),
            Raw::S(s) if s == "auto" => Ok(FamilySize::Auto),
            Raw::S(s) => Err(serde::de::Error::custom(format!("family_size {s:?} is neither a count nor \"auto\""))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HypothesisKind {
    #[default]
    KruskalWallis,
    /// Descriptive check that predicted ages fall inside each labelled bin.
    MedianInBin,
}

/// Which annotated samples enter a concept-score test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnnotationFilter {
    Any,
    Pos,
    Neg,
}

impl AnnotationFilter {
    fn admits(self, label: Option<&Label>) -> bool {
        match (self, label) {
            (AnnotationFilter::Any, Some(_)) => true,
            (AnnotationFilter::Pos, Some(Label::Pos)) => true,
            (AnnotationFilter::Neg, Some(Label::Neg)) => true,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerSpec {
    pub n_per_group: Vec<usize>,
    pub n_sims: usize,
}

fn default_alpha() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypothesisSpec {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default)]
    pub kind: HypothesisKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value_field: Option<ValueField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_field: Option<Field>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stratify_by: Option<Field>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub family_size: FamilySize,
    /// Restricts concept-score tests to samples annotated for the concept.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotation: Option<AnnotationFilter>,
    /// Concepts to test when `value_field` is `concept_score`; defaults to
    /// every concept with at least one score.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub concepts: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power: Option<PowerSpec>,
}

impl HypothesisSpec {
    pub fn kruskal(id: &str, value: ValueField, group: Field) -> Self {
        HypothesisSpec {
            id: id.to_owned(),
            description: None,
            kind: HypothesisKind::KruskalWallis,
            value_field: Some(value),
            group_field: Some(group),
            stratify_by: None,
            alpha: 0.05,
            family_size: FamilySize::Auto,
            annotation: None,
            concepts: None,
            power: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSize {
    pub group: String,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerPoint {
    pub n_per_group: usize,
    pub power: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumResult {
    pub stratum: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub concept: Option<String>,
    pub groups: Vec<GroupSize>,
    #[serde(flatten)]
    pub test: TestResult,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub power_curve: Vec<PowerPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedStratum {
    pub stratum: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinReport {
    pub age_bin: AgeBin,
    pub n: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub iqr: f64,
    pub fraction_inside: f64,
    pub median_inside: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisOutcome {
    pub id: String,
    pub kind: HypothesisKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_corrected: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub results: Vec<StratumResult>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<SkippedStratum>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bins: Vec<BinReport>,
}

impl HypothesisOutcome {
    /// Whether any stratum for `concept` rejected; `None` if none was tested.
    pub fn rejects_for(&self, concept: &str) -> Option<bool> {
        let mut tested = self.results.iter().filter(|r| r.concept.as_deref() == Some(concept)).peekable();
        tested.peek()?;
        Some(tested.any(|r| r.test.reject))
    }
}

/// FNV-1a, used to give every stratum its own power-simulation seed.
fn mix_seed(seed: u64, parts: &[&str]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ seed;
    for p in parts {
        for b in p.bytes().chain([0xff]) {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

fn sample_value(ds: &ScoreDataset, i: usize, field: &ValueField, concept: Option<usize>) -> Option<f64> {
    let o = &ds.outputs[i];
    match field {
        ValueField::PredictedSexScore => o.predicted_sex_score,
        ValueField::PredictedAge => o.predicted_age,
        ValueField::SexCorrect => o
            .predicted_sex_score
            .map(|p| if (p >= 0.5) == (ds.samples[i].sex == Sex::Male) { 1.0 } else { 0.0 }),
        ValueField::ConceptScore(_) => ds.score(i, concept?),
    }
}

/// Runs one hypothesis over every stratum of the dataset.
pub fn run_hypothesis(ds: &ScoreDataset, spec: &HypothesisSpec, seed: u64) -> Result<HypothesisOutcome, AuditError> {
    if spec.kind == HypothesisKind::MedianInBin {
        return Ok(HypothesisOutcome {
            id: spec.id.clone(),
            kind: spec.kind,
            family_size: None,
            alpha_corrected: None,
            results: Vec::new(),
            skipped: Vec::new(),
            bins: median_in_bin(ds)?,
        });
    }
    let spec_err = |m: String| AuditError::Spec(format!("{}: {m}", spec.id));
    let value = spec.value_field.as_ref().ok_or_else(|| spec_err("value_field is required".into()))?;
    let group = spec.group_field.ok_or_else(|| spec_err("group_field is required".into()))?;
    if !(spec.alpha > 0.0 && spec.alpha < 1.0) {
        return Err(spec_err(format!("alpha {} is outside (0, 1)", spec.alpha)));
    }

    let concepts: Vec<Option<usize>> = match value {
        ValueField::ConceptScore(Some(c)) => {
            vec![Some(ds.concept_index(c).ok_or_else(|| spec_err(format!("concept {c:?} not in dataset")))?)]
        }
        ValueField::ConceptScore(None) => match &spec.concepts {
            Some(list) => list
                .iter()
                .map(|c| ds.concept_index(c).map(Some).ok_or_else(|| spec_err(format!("concept {c:?} not in dataset"))))
                .collect::<Result<_, _>>()?,
            None => {
                let scored: std::collections::BTreeSet<u32> =
                    ds.scores.iter().flat_map(|cells| cells.iter().map(|&(c, _)| c)).collect();
                scored.into_iter().map(|c| Some(c as usize)).collect()
            }
        },
        _ => vec![None],
    };
    let needs = |ok: bool, what: &str| if ok { Ok(()) } else { Err(spec_err(format!("dataset has no {what}"))) };
    match value {
        ValueField::PredictedSexScore | ValueField::SexCorrect => {
            needs(ds.outputs.iter().any(|o| o.predicted_sex_score.is_some()), "predicted_sex_score")?
        }
        ValueField::PredictedAge => needs(ds.outputs.iter().any(|o| o.predicted_age.is_some()), "predicted_age")?,
        ValueField::ConceptScore(_) => needs(ds.n_cells() > 0, "concept scores")?,
    }

    let family_size = match spec.family_size {
        FamilySize::Fixed(n) => n,
        FamilySize::Auto => {
            let distinct: std::collections::BTreeSet<FieldValue> = ds.samples.iter().map(|s| group.value(s)).collect();
            distinct.len().max(1)
        }
    };
    let alpha_corrected = bonferroni(spec.alpha, family_size);

    let mut results = Vec::new();
    let mut skipped = Vec::new();
    for concept in concepts {
        let concept_name = concept.map(|c| ds.concepts[c].clone());
        let mut strata: BTreeMap<Option<FieldValue>, BTreeMap<FieldValue, Vec<f64>>> = BTreeMap::new();
        for (i, s) in ds.samples.iter().enumerate() {
            if let (Some(filter), Some(name)) = (spec.annotation, &concept_name) {
                if !filter.admits(s.annotations.get(name)) {
                    continue;
                }
            }
            let Some(v) = sample_value(ds, i, value, concept) else { continue };
            strata
                .entry(spec.stratify_by.map(|f| f.value(s)))
                .or_default()
                .entry(group.value(s))
                .or_default()
                .push(v);
        }
        if strata.is_empty() {
            let label = concept_name.clone().unwrap_or_else(|| "all".into());
            skipped.push(SkippedStratum { stratum: label, reason: "no observations".into() });
        }
        for (stratum_key, groups) in strata {
            let label = match (&concept_name, &stratum_key) {
                (Some(c), Some(k)) => format!("{c}/{}", k.label),
                (Some(c), None) => c.clone(),
                (None, Some(k)) => k.label.clone(),
                (None, None) => "all".to_owned(),
            };
            let sample_groups: SampleGroups = groups.iter().map(|(g, v)| (g.label.clone(), v.clone())).collect();
            if sample_groups.groups.len() < 2 {
                skipped.push(SkippedStratum { stratum: label, reason: "fewer than 2 non-empty groups".into() });
                continue;
            }
            let kw = match kruskal_wallis(&sample_groups) {
                Ok(kw) => kw,
                Err(e) => {
                    skipped.push(SkippedStratum { stratum: label, reason: e.to_string() });
                    continue;
                }
            };
            let mut test = kw.test(alpha_corrected);
            let mut curve = Vec::new();
            if let Some(p) = &spec.power {
                let mut sizes = p.n_per_group.clone();
                sizes.sort_unstable();
                let s = mix_seed(seed, &[&spec.id, &label]);
                if let Ok(powers) = power_curve(&sample_groups, &sizes, p.n_sims, alpha_corrected, s) {
                    curve = powers.iter().map(|&(n, power)| PowerPoint { n_per_group: n, power }).collect();
                    test.power = powers.last().map(|p| p.1);
                }
            }
            results.push(StratumResult {
                stratum: label,
                concept: concept_name.clone(),
                groups: sample_groups.groups.iter().map(|(g, v)| GroupSize { group: g.clone(), n: v.len() }).collect(),
                test,
                power_curve: curve,
            });
        }
    }
    Ok(HypothesisOutcome {
        id: spec.id.clone(),
        kind: spec.kind,
        family_size: Some(family_size),
        alpha_corrected: Some(alpha_corrected),
        results,
        skipped,
        bins: Vec::new(),
    })
}

/// Linear-interpolation quantile of sorted data (the common "type 7" rule).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Per labelled age bin: spread of predicted ages and whether the median
/// lands inside the bin.
pub fn median_in_bin(ds: &ScoreDataset) -> Result<Vec<BinReport>, AuditError> {
    let mut by_bin: BTreeMap<AgeBin, Vec<f64>> = BTreeMap::new();
    for (s, o) in ds.samples.iter().zip(&ds.outputs) {
        if let Some(age) = o.predicted_age {
            by_bin.entry(s.age_bin).or_default().push(age);
        }
    }
    if by_bin.is_empty() {
        return Err(AuditError::MissingField("predicted_age".into()));
    }
    Ok(by_bin
        .into_iter()
        .map(|(bin, mut v)| {
            v.sort_by(f64::total_cmp);
            let median = quantile_sorted(&v, 0.5);
            let (q1, q3) = (quantile_sorted(&v, 0.25), quantile_sorted(&v, 0.75));
            let inside = v.iter().filter(|a| bin.contains(**a)).count();
            BinReport {
                age_bin: bin,
                n: v.len(),
                median,
                q1,
                q3,
                iqr: q3 - q1,
                fraction_inside: inside as f64 / v.len() as f64,
                median_inside: bin.contains(median),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audit::data::{LoadOptions, ScoreRow};

    fn sample(id: usize, sex: Sex, eth: &str, bin: &str) -> SampleRow {
        SampleRow {
            sample_id: format!("s{id:04}"),
            sex,
            ethnicity: eth.into(),
            age_bin: bin.parse().unwrap(),
            variant: None,
            annotations: BTreeMap::new(),
        }
    }

    /// Eight demographic groups, `per` samples each, with sex and age
    /// outputs produced by `f(group index, replicate)`.
    fn fixture(per: usize, f: impl Fn(usize, usize) -> (f64, f64)) -> ScoreDataset {
        let mut samples = Vec::new();
        let mut rows = Vec::new();
        let eths = ["Asian", "Black", "Indian", "White"];
        for (g, (eth, sex)) in eths.iter().flat_map(|e| Sex::ALL.map(|s| (*e, s))).enumerate() {
            for k in 0..per {
                let id = samples.len();
                let s = sample(id, sex, eth, AGE_BINS_CYCLE[k % 3]);
                let (sex_score, age) = f(g, k);
                let mut row = ScoreRow::new(s.sample_id.clone(), "beard", (k % 10) as f64 / 10.0);
                row.predicted_sex_score = Some(sex_score);
                row.predicted_age = Some(age);
                row.face_count = Some(1);
                rows.push(row);
                samples.push(s);
            }
        }
        ScoreDataset::from_rows(samples, rows, None, LoadOptions::default()).unwrap()
    }

    const AGE_BINS_CYCLE: [&str; 3] = ["0-2", "30-39", "60-69"];

    #[test]
    fn identical_groups_never_reject() {
        let ds = fixture(30, |_, k| ((k % 7) as f64 / 7.0, 20.0 + k as f64));
        let spec = HypothesisSpec {
            stratify_by: Some(Field::Sex),
            ..HypothesisSpec::kruskal("NH1", ValueField::PredictedSexScore, Field::AgeBin)
        };
        let out = run_hypothesis(&ds, &spec, 1).unwrap();
        assert_eq!(out.results.len(), 2);
        assert!(out.results.iter().all(|r| !r.test.reject));
    }

    #[test]
    fn demographic_family_is_eight() {
        let ds = fixture(10, |g, k| (g as f64 / 10.0, k as f64));
        let spec = HypothesisSpec::kruskal("NH7", ValueField::ConceptScore(None), Field::Demographic);
        let out = run_hypothesis(&ds, &spec, 1).unwrap();
        assert_eq!(out.family_size, Some(8));
        assert_eq!(out.alpha_corrected, Some(0.00625));
        assert!(out.results.iter().all(|r| r.test.alpha_corrected == 0.00625));
        let groups: Vec<_> = out.results[0].groups.iter().map(|g| g.group.as_str()).collect();
        assert_eq!(groups, ["AM", "AF", "BM", "BF", "IM", "IF", "WM", "WF"]);
    }

    #[test]
    fn shifted_group_rejects_with_power() {
        let ds = fixture(40, |g, k| (if g == 3 { 0.9 } else { 0.1 } + (k % 5) as f64 * 0.01, 30.0));
        let spec = HypothesisSpec {
            power: Some(PowerSpec { n_per_group: vec![50, 10], n_sims: 50 }),
            ..HypothesisSpec::kruskal("NH", ValueField::PredictedSexScore, Field::Demographic)
        };
        let out = run_hypothesis(&ds, &spec, 7).unwrap();
        let r = &out.results[0];
        assert!(r.test.reject);
        assert_eq!(r.power_curve.iter().map(|p| p.n_per_group).collect::<Vec<_>>(), [10, 50]);
        assert_eq!(r.test.power, Some(r.power_curve[1].power));
        assert_eq!(run_hypothesis(&ds, &spec, 7).unwrap(), out);
    }

    #[test]
    fn sex_correct_values() {
        let ds = fixture(2, |g, _| (if g % 2 == 0 { 0.8 } else { 0.6 }, 1.0));
        // Male rows score 0.8 (correct), Female rows 0.6 (wrong)
        let i_male = ds.samples.iter().position(|s| s.sex == Sex::Male).unwrap();
        let i_female = ds.samples.iter().position(|s| s.sex == Sex::Female).unwrap();
        assert_eq!(sample_value(&ds, i_male, &ValueField::SexCorrect, None), Some(1.0));
        assert_eq!(sample_value(&ds, i_female, &ValueField::SexCorrect, None), Some(0.0));
    }

    #[test]
    fn spec_errors_and_skips() {
        let ds = fixture(3, |_, _| (0.5, 1.0));
        let bad = HypothesisSpec::kruskal("X", ValueField::ConceptScore(Some("nope".into())), Field::Sex);
        assert!(matches!(run_hypothesis(&ds, &bad, 0), Err(AuditError::Spec(_))));
        let one_group = HypothesisSpec {
            stratify_by: Some(Field::Demographic),
            ..HypothesisSpec::kruskal("Y", ValueField::PredictedAge, Field::Sex)
        };
        let out = run_hypothesis(&ds, &one_group, 0).unwrap();
        assert!(out.results.is_empty());
        assert_eq!(out.skipped.len(), 8);
    }

    #[test]
    fn spec_json() {
        let s: HypothesisSpec = serde_json::from_str(
            r#"{"id":"NH5","value_field":"concept_score","group_field":"sex","family_size":"auto","annotation":"any"}"#,
        )
        .unwrap();
        assert_eq!(s.value_field, Some(ValueField::ConceptScore(None)));
        assert_eq!(s.alpha, 0.05);
        let s: HypothesisSpec =
            serde_json::from_str(r#"{"id":"x","value_field":"concept_score:beard","family_size":8}"#).unwrap();
        assert_eq!(s.family_size, FamilySize::Fixed(8));
        assert_eq!(s.value_field, Some(ValueField::ConceptScore(Some("beard".into()))));
        assert!(serde_json::from_str::<HypothesisSpec>(r#"{"id":"x","family_size":0}"#).is_err());
    }

    #[test]
    fn median_in_bin_examples() {
        let mut samples = Vec::new();
        let mut rows = Vec::new();
        for (i, (bin, age)) in [("0-2", 12.0), ("0-2", 13.0), ("0-2", 14.0), ("30-39", 35.0), ("30-39", 35.0)]
            .into_iter()
            .enumerate()
        {
            let s = sample(i, Sex::Male, "Asian", bin);
            let mut r = ScoreRow::new(s.sample_id.clone(), "c", 0.5);
            r.predicted_age = Some(age);
            rows.push(r);
            samples.push(s);
        }
        let ds = ScoreDataset::from_rows(samples, rows, None, LoadOptions::default()).unwrap();
        let bins = median_in_bin(&ds).unwrap();
        assert_eq!(bins[0].median, 13.0);
        assert!(!bins[0].median_inside);
        assert_eq!(bins[0].fraction_inside, 0.0);
        assert_eq!(bins[1].median, 35.0);
        assert_eq!(bins[1].fraction_inside, 1.0);
        assert!(bins[1].median_inside);
    }

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&v, 0.5), 2.5);
        assert_eq!(quantile_sorted(&v, 0.25), 1.75);
        assert_eq!(quantile_sorted(&[7.0], 0.9), 7.0);
    }
}
