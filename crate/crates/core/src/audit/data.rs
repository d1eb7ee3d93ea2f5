use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::AuditError;

pub const SAMPLES_HEADER: [&str; 6] = ["sample_id", "sex", "ethnicity", "age_bin", "variant", "annotations"];
pub const SCORES_HEADER: [&str; 6] =
    ["sample_id", "concept", "score", "face_count", "predicted_age", "predicted_sex_score"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sex {
    Male,
    Female,
}

impl Sex {
    pub const ALL: [Sex; 2] = [Sex::Male, Sex::Female];

    pub fn initial(self) -> char {
        match self {
            Sex::Male => 'M',
            Sex::Female => 'F',
        }
    }
}

impl fmt::Display for Sex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sex::Male => "Male",
            Sex::Female => "Female",
        })
    }
}

impl FromStr for Sex {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "male" | "m" => Ok(Sex::Male),
            "female" | "f" => Ok(Sex::Female),
            other => Err(format!("unknown sex {other:?}")),
        }
    }
}

/// The nine age ranges, in order. Bounds are inclusive.
pub const AGE_BINS: [&str; 9] = ["0-2", "3-9", "10-19", "20-29", "30-39", "40-49", "50-59", "60-69", "70-100"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AgeBin(u8);

impl AgeBin {
    pub fn all() -> impl Iterator<Item = AgeBin> {
        (0..AGE_BINS.len() as u8).map(AgeBin)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn label(self) -> &'static str {
        AGE_BINS[self.0 as usize]
    }

    /// Closed numeric range named by the label.
    pub fn range(self) -> (f64, f64) {
        let (lo, hi) = self.label().split_once('-').expect("bin labels are lo-hi");
        (lo.parse().unwrap(), hi.parse().unwrap())
    }

    pub fn contains(self, age: f64) -> bool {
        let (lo, hi) = self.range();
        (lo..=hi).contains(&age)
    }
}

impl fmt::Display for AgeBin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for AgeBin {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        AGE_BINS
            .iter()
            .position(|b| *b == s.trim())
            .map(|i| AgeBin(i as u8))
            .ok_or_else(|| format!("age bin {s:?} is not one of {}", AGE_BINS.join(", ")))
    }
}

impl Serialize for AgeBin {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

impl<'de> Deserialize<'de> for AgeBin {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Pos,
    Neg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub sample_id: String,
    pub sex: Sex,
    pub ethnicity: String,
    pub age_bin: AgeBin,
    pub variant: Option<String>,
    pub annotations: BTreeMap<String, Label>,
}

impl SampleRow {
    /// Ethnicity word initials plus sex initial, e.g. `AM`, `EAF`.
    pub fn demographic(&self) -> String {
        demographic_label(&self.ethnicity, self.sex)
    }
}

pub fn demographic_label(ethnicity: &str, sex: Sex) -> String {
    let mut s: String = ethnicity
        .split(|c: char| c == ' ' || c == '_' || c == '-')
        .filter_map(|w| w.chars().next())
        .flat_map(char::to_uppercase)
        .collect();
    s.push(sex.initial());
    s
}

pub fn parse_annotations(s: &str) -> Result<BTreeMap<String, Label>, String> {
    let mut out = BTreeMap::new();
    for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (concept, label) = part.rsplit_once(':').ok_or_else(|| format!("annotation {part:?} lacks ':'"))?;
        let label = match label.trim() {
            "pos" => Label::Pos,
            "neg" => Label::Neg,
            other => return Err(format!("annotation label {other:?} is not pos or neg")),
        };
        if out.insert(concept.trim().to_owned(), label).is_some() {
            return Err(format!("concept {concept:?} annotated twice"));
        }
    }
    Ok(out)
}

pub fn format_annotations(a: &BTreeMap<String, Label>) -> String {
    a.iter()
        .map(|(c, l)| format!("{c}:{}", if *l == Label::Pos { "pos" } else { "neg" }))
        .collect::<Vec<_>>()
        .join(";")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub sample_id: String,
    pub concept: String,
    pub score: f64,
    pub face_count: Option<u32>,
    pub predicted_age: Option<f64>,
    pub predicted_sex_score: Option<f64>,
}

impl ScoreRow {
    pub fn new(sample_id: impl Into<String>, concept: impl Into<String>, score: f64) -> Self {
        ScoreRow {
            sample_id: sample_id.into(),
            concept: concept.into(),
            score,
            face_count: None,
            predicted_age: None,
            predicted_sex_score: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConceptCatalog {
    concepts: Vec<String>,
    index: HashMap<String, usize>,
}

impl ConceptCatalog {
    pub fn new(concepts: Vec<String>) -> Result<Self, AuditError> {
        let mut index = HashMap::with_capacity(concepts.len());
        for (i, c) in concepts.iter().enumerate() {
            if index.insert(c.clone(), i).is_some() {
                return Err(AuditError::Schema(format!("catalog lists {c:?} twice")));
            }
        }
        Ok(ConceptCatalog { concepts, index })
    }

    /// One concept per line; blank lines are skipped.
    pub fn from_text(text: &str) -> Result<Self, AuditError> {
        ConceptCatalog::new(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(str::to_owned).collect())
    }

    /// The shipped 512-concept catalog.
    pub fn bundled() -> Self {
        ConceptCatalog::from_text(include_str!("../../fixtures/catalog.txt")).expect("bundled catalog is valid")
    }

    pub fn concepts(&self) -> &[String] {
        &self.concepts
    }

    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    pub fn position(&self, concept: &str) -> Option<usize> {
        self.index.get(concept).copied()
    }
}

/// Per-sample model outputs that are not concept scores.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SampleOutputs {
    pub face_count: Option<u32>,
    pub predicted_age: Option<f64>,
    pub predicted_sex_score: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadOptions {
    /// Loading fails when more than this share of score rows name no sample.
    pub max_orphan_ratio: f64,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions { max_orphan_ratio: 0.1 }
    }
}

/// Samples joined with their scores. Samples are sorted by id; each
/// sample's scores are sorted by concept index.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreDataset {
    pub samples: Vec<SampleRow>,
    pub concepts: Vec<String>,
    pub scores: Vec<Vec<(u32, f64)>>,
    pub outputs: Vec<SampleOutputs>,
    pub orphan_rows: usize,
}

impl ScoreDataset {
    /// Joins rows on `sample_id`. With a catalog, concepts follow catalog
    /// order and unknown concepts are a schema error; without one they are
    /// sorted.
    pub fn from_rows(
        mut samples: Vec<SampleRow>,
        rows: Vec<ScoreRow>,
        catalog: Option<&ConceptCatalog>,
        opts: LoadOptions,
    ) -> Result<Self, AuditError> {
        samples.sort_by(|a, b| a.sample_id.cmp(&b.sample_id));
        for w in samples.windows(2) {
            if w[0].sample_id == w[1].sample_id {
                return Err(AuditError::Schema(format!("sample_id {:?} appears twice", w[0].sample_id)));
            }
        }
        let concepts: Vec<String> = match catalog {
            Some(c) => c.concepts().to_vec(),
            None => rows.iter().map(|r| r.concept.clone()).collect::<BTreeSet<_>>().into_iter().collect(),
        };
        let concept_index: HashMap<&str, u32> =
            concepts.iter().enumerate().map(|(i, c)| (c.as_str(), i as u32)).collect();
        let sample_index: HashMap<&str, usize> =
            samples.iter().enumerate().map(|(i, s)| (s.sample_id.as_str(), i)).collect();

        let mut scores: Vec<Vec<(u32, f64)>> = vec![Vec::new(); samples.len()];
        let mut outputs = vec![SampleOutputs::default(); samples.len()];
        let mut orphan_rows = 0;
        let total = rows.len();
        for r in &rows {
            let Some(&s) = sample_index.get(r.sample_id.as_str()) else {
                orphan_rows += 1;
                continue;
            };
            let c = *concept_index
                .get(r.concept.as_str())
                .ok_or_else(|| AuditError::Schema(format!("concept {:?} is not in the catalog", r.concept)))?;
            if !(0.0..=1.0).contains(&r.score) {
                return Err(AuditError::Schema(format!(
                    "score {} for {}/{} is outside [0, 1]",
                    r.score, r.sample_id, r.concept
                )));
            }
            scores[s].push((c, r.score));
            let o = &mut outputs[s];
            o.face_count = o.face_count.or(r.face_count);
            o.predicted_age = o.predicted_age.or(r.predicted_age);
            o.predicted_sex_score = o.predicted_sex_score.or(r.predicted_sex_score);
        }
        if total > 0 && orphan_rows as f64 / total as f64 > opts.max_orphan_ratio {
            return Err(AuditError::Join { orphans: orphan_rows, total, max_ratio: opts.max_orphan_ratio });
        }
        for (i, list) in scores.iter_mut().enumerate() {
            list.sort_by_key(|(c, _)| *c);
            if let Some(w) = list.windows(2).find(|w| w[0].0 == w[1].0) {
                return Err(AuditError::Schema(format!(
                    "sample {:?} has two scores for {:?}",
                    samples[i].sample_id, concepts[w[0].0 as usize]
                )));
            }
        }
        Ok(ScoreDataset { samples, concepts, scores, outputs, orphan_rows })
    }

    pub fn concept_index(&self, concept: &str) -> Option<usize> {
        self.concepts.iter().position(|c| c == concept)
    }

    pub fn score(&self, sample: usize, concept: usize) -> Option<f64> {
        let list = &self.scores[sample];
        list.binary_search_by_key(&(concept as u32), |(c, _)| *c).ok().map(|i| list[i].1)
    }

    pub fn n_cells(&self) -> usize {
        self.scores.iter().map(Vec::len).sum()
    }

    fn retain_samples(&self, keep: impl Fn(usize) -> bool) -> ScoreDataset {
        let idx: Vec<usize> = (0..self.samples.len()).filter(|&i| keep(i)).collect();
        ScoreDataset {
            samples: idx.iter().map(|&i| self.samples[i].clone()).collect(),
            concepts: self.concepts.clone(),
            scores: idx.iter().map(|&i| self.scores[i].clone()).collect(),
            outputs: idx.iter().map(|&i| self.outputs[i]).collect(),
            orphan_rows: self.orphan_rows,
        }
    }

    /// Samples whose `variant` equals `variant` (`None` keeps unlabelled ones).
    pub fn with_variant(&self, variant: Option<&str>) -> ScoreDataset {
        self.retain_samples(|i| self.samples[i].variant.as_deref() == variant)
    }

    /// Keeps samples on which exactly one face was detected.
    pub fn single_face(&self) -> Result<(ScoreDataset, FaceFilterReport), AuditError> {
        let mut report = FaceFilterReport::default();
        for (s, o) in self.samples.iter().zip(&self.outputs) {
            match o.face_count {
                None => return Err(AuditError::MissingField(format!("face_count for sample {:?}", s.sample_id))),
                Some(n) => report.count(n),
            }
        }
        Ok((self.retain_samples(|i| self.outputs[i].face_count == Some(1)), report))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceFilterReport {
    pub kept: usize,
    pub discarded_zero: usize,
    pub discarded_multi: usize,
}

impl FaceFilterReport {
    fn count(&mut self, faces: u32) {
        match faces {
            0 => self.discarded_zero += 1,
            1 => self.kept += 1,
            _ => self.discarded_multi += 1,
        }
    }
}

/// Keeps rows reporting exactly one face.
pub fn filter_single_face(rows: &[ScoreRow]) -> Result<(Vec<ScoreRow>, FaceFilterReport), AuditError> {
    let mut report = FaceFilterReport::default();
    let mut kept = Vec::new();
    for r in rows {
        let n = r.face_count.ok_or_else(|| {
            AuditError::MissingField(format!("face_count for {}/{}", r.sample_id, r.concept))
        })?;
        report.count(n);
        if n == 1 {
            kept.push(r.clone());
        }
    }
    Ok((kept, report))
}

struct Columns {
    index: HashMap<String, usize>,
}

impl Columns {
    fn new(headers: &csv::StringRecord, required: &[&str], file: &str) -> Result<Self, AuditError> {
        let index: HashMap<String, usize> =
            headers.iter().enumerate().map(|(i, h)| (h.trim().to_owned(), i)).collect();
        for r in required {
            if !index.contains_key(*r) {
                return Err(AuditError::Schema(format!("{file} is missing column {r:?}")));
            }
        }
        Ok(Columns { index })
    }

    fn get<'a>(&self, rec: &'a csv::StringRecord, name: &str) -> Option<&'a str> {
        self.index.get(name).and_then(|&i| rec.get(i)).map(str::trim)
    }

    fn optional<'a>(&self, rec: &'a csv::StringRecord, name: &str) -> Option<&'a str> {
        self.get(rec, name).filter(|s| !s.is_empty())
    }
}

fn csv_reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().flexible(true).from_reader(input)
}

fn schema_at(file: &str, line: u64, msg: impl fmt::Display) -> AuditError {
    AuditError::Schema(format!("{file} line {line}: {msg}"))
}

pub fn read_samples<R: Read>(input: R) -> Result<Vec<SampleRow>, AuditError> {
    let mut rdr = csv_reader(input);
    let cols = Columns::new(rdr.headers()?, &SAMPLES_HEADER[..4], "samples.csv")?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |n: &str| cols.get(&rec, n).unwrap_or("");
        let sample_id = field("sample_id");
        if sample_id.is_empty() {
            return Err(schema_at("samples.csv", line, "empty sample_id"));
        }
        out.push(SampleRow {
            sample_id: sample_id.to_owned(),
            sex: field("sex").parse().map_err(|e| schema_at("samples.csv", line, e))?,
            ethnicity: field("ethnicity").to_owned(),
            age_bin: field("age_bin").parse().map_err(|e| schema_at("samples.csv", line, e))?,
            variant: cols.optional(&rec, "variant").map(str::to_owned),
            annotations: parse_annotations(cols.get(&rec, "annotations").unwrap_or(""))
                .map_err(|e| schema_at("samples.csv", line, e))?,
        });
    }
    Ok(out)
}

pub fn read_scores<R: Read>(input: R) -> Result<Vec<ScoreRow>, AuditError> {
    let mut rdr = csv_reader(input);
    let cols = Columns::new(rdr.headers()?, &SCORES_HEADER[..3], "scores.csv")?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let num = |n: &str| -> Result<Option<f64>, AuditError> {
            cols.optional(&rec, n)
                .map(|s| s.parse::<f64>().map_err(|_| schema_at("scores.csv", line, format!("{n} {s:?} is not a number"))))
                .transpose()
        };
        let score = num("score")?.ok_or_else(|| schema_at("scores.csv", line, "empty score"))?;
        let face_count = cols
            .optional(&rec, "face_count")
            .map(|s| s.parse::<u32>().map_err(|_| schema_at("scores.csv", line, format!("face_count {s:?}"))))
            .transpose()?;
        out.push(ScoreRow {
            sample_id: cols.get(&rec, "sample_id").unwrap_or("").to_owned(),
            concept: cols.get(&rec, "concept").unwrap_or("").to_owned(),
            score,
            face_count,
            predicted_age: num("predicted_age")?,
            predicted_sex_score: num("predicted_sex_score")?,
        });
    }
    Ok(out)
}

pub fn write_samples<W: Write>(out: W, rows: &[SampleRow]) -> Result<(), AuditError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SAMPLES_HEADER)?;
    for r in rows {
        w.write_record([
            r.sample_id.as_str(),
            &r.sex.to_string(),
            &r.ethnicity,
            r.age_bin.label(),
            r.variant.as_deref().unwrap_or(""),
            &format_annotations(&r.annotations),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_scores<W: Write>(out: W, rows: &[ScoreRow]) -> Result<(), AuditError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SCORES_HEADER)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.sample_id.clone(),
            r.concept.clone(),
            r.score.to_string(),
            r.face_count.map(|n| n.to_string()).unwrap_or_default(),
            opt(r.predicted_age),
            opt(r.predicted_sex_score),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads both CSV files and joins them.
pub fn load_dataset<R1: Read, R2: Read>(
    samples_csv: R1,
    scores_csv: R2,
    catalog: Option<&ConceptCatalog>,
    opts: LoadOptions,
) -> Result<ScoreDataset, AuditError> {
    ScoreDataset::from_rows(read_samples(samples_csv)?, read_scores(scores_csv)?, catalog, opts)
}
