use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::SynthError;
use crate::audit::{demographic_label, write_samples, write_scores, AgeBin, AuditError, Label, SampleRow, ScoreRow, Sex};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalParams {
    pub mean: f64,
    pub sd: f64,
}

impl Default for NormalParams {
    fn default() -> Self {
        NormalParams { mean: 0.2, sd: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub ethnicity: String,
    pub sex: Sex,
}

impl GroupSpec {
    pub fn label(&self) -> String {
        demographic_label(&self.ethnicity, self.sex)
    }
}

/// Mean shift added to one concept's scores in one demographic group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Shift {
    pub concept: String,
    /// Demographic label such as `AM`.
    pub group: String,
    pub shift: f64,
}

/// Forces a (concept, group) cell to have no samples of `label`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmptyClass {
    pub concept: String,
    pub group: String,
    pub label: Label,
}

fn default_pos_fraction() -> f64 {
    0.5
}

fn default_pos_shift() -> f64 {
    0.3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotationPlan {
    pub concepts: Vec<String>,
    /// Share of each group labelled positive, rounded to a whole count.
    #[serde(default = "default_pos_fraction")]
    pub pos_fraction: f64,
    /// Added to the score of positively labelled samples.
    #[serde(default = "default_pos_shift")]
    pub pos_shift: f64,
    #[serde(default)]
    pub empty: Vec<EmptyClass>,
}

/// A shift on a face-attribute output, restricted by any given selectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputShift {
    pub output: FaceOutput,
    #[serde(default)]
    pub ethnicity: Option<String>,
    #[serde(default)]
    pub sex: Option<Sex>,
    #[serde(default)]
    pub age_bin: Option<AgeBin>,
    pub shift: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaceOutput {
    PredictedAge,
    PredictedSexScore,
}

fn default_sex_sd() -> f64 {
    0.15
}

fn default_age_sd() -> f64 {
    6.0
}

/// Face-attribute outputs: a sex score near 0.75 (Male) or 0.25 (Female),
/// an age near the bin midpoint, and a face count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FacePlan {
    #[serde(default = "default_sex_sd")]
    pub sex_sd: f64,
    #[serde(default = "default_age_sd")]
    pub age_sd: f64,
    #[serde(default)]
    pub zero_face_rate: f64,
    #[serde(default)]
    pub multi_face_rate: f64,
    #[serde(default)]
    pub shifts: Vec<OutputShift>,
}

fn default_groups() -> Vec<GroupSpec> {
    ["Asian", "Black", "Indian", "White"]
        .iter()
        .flat_map(|e| Sex::ALL.map(|sex| GroupSpec { ethnicity: (*e).to_owned(), sex }))
        .collect()
}

fn default_age_bins() -> Vec<AgeBin> {
    AgeBin::all().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisparityPlan {
    #[serde(default = "default_groups")]
    pub groups: Vec<GroupSpec>,
    pub concepts: Vec<String>,
    #[serde(default)]
    pub base: NormalParams,
    #[serde(default)]
    pub shifts: Vec<Shift>,
    pub n_per_group: usize,
    /// Samples in a group cycle through these bins.
    #[serde(default = "default_age_bins")]
    pub age_bins: Vec<AgeBin>,
    #[serde(default)]
    pub annotations: Option<AnnotationPlan>,
    #[serde(default)]
    pub face: Option<FacePlan>,
    #[serde(default)]
    pub variant: Option<String>,
    #[serde(default)]
    pub seed: u64,
}

impl DisparityPlan {
    /// `n_per_group` samples in each of the eight default groups.
    pub fn new(concepts: Vec<String>, n_per_group: usize, seed: u64) -> Self {
        DisparityPlan {
            groups: default_groups(),
            concepts,
            base: NormalParams::default(),
            shifts: Vec::new(),
            n_per_group,
            age_bins: default_age_bins(),
            annotations: None,
            face: None,
            variant: None,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let invalid = |m: String| Err(SynthError::InvalidPlan(m));
        if self.groups.is_empty() || self.concepts.is_empty() || self.n_per_group == 0 {
            return invalid("groups, concepts and n_per_group must be non-empty".into());
        }
        if self.age_bins.is_empty() {
            return invalid("age_bins must be non-empty".into());
        }
        if !(self.base.sd >= 0.0 && self.base.sd.is_finite() && self.base.mean.is_finite()) {
            return invalid("base distribution needs finite mean and sd ≥ 0".into());
        }
        let concepts: BTreeSet<&str> = self.concepts.iter().map(String::as_str).collect();
        if concepts.len() != self.concepts.len() {
            return invalid("concepts must be unique".into());
        }
        let labels: Vec<String> = self.groups.iter().map(GroupSpec::label).collect();
        if labels.iter().collect::<BTreeSet<_>>().len() != labels.len() {
            return invalid("group labels must be unique".into());
        }
        let known = |concept: &str, group: &str| concepts.contains(concept) && labels.iter().any(|l| l == group);
        for s in &self.shifts {
            if !known(&s.concept, &s.group) {
                return invalid(format!("shift on unknown pair ({}, {})", s.concept, s.group));
            }
        }
        if let Some(a) = &self.annotations {
            if !(0.0..=1.0).contains(&a.pos_fraction) {
                return invalid("pos_fraction must lie in [0, 1]".into());
            }
            for c in &a.concepts {
                if !concepts.contains(c.as_str()) {
                    return invalid(format!("annotated concept {c:?} is not generated"));
                }
            }
            for e in &a.empty {
                if !known(&e.concept, &e.group) || !a.concepts.contains(&e.concept) {
                    return invalid(format!("empty class on unknown pair ({}, {})", e.concept, e.group));
                }
            }
        }
        if let Some(f) = &self.face {
            let rates_ok = f.zero_face_rate >= 0.0 && f.multi_face_rate >= 0.0 && f.zero_face_rate + f.multi_face_rate <= 1.0;
            if !rates_ok || f.sex_sd < 0.0 || f.age_sd < 0.0 {
                return invalid("face rates must be non-negative and sum to at most 1; sds non-negative".into());
            }
        }
        Ok(())
    }
}

/// Annotation counts planted in one (concept, group) cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellCounts {
    pub concept: String,
    pub group: String,
    pub pos: usize,
    pub neg: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreGroundTruth {
    pub n_samples: usize,
    pub n_single_face: usize,
    pub n_zero_face: usize,
    pub n_multi_face: usize,
    pub shifts: Vec<Shift>,
    pub cells: Vec<CellCounts>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScores {
    pub samples: Vec<SampleRow>,
    pub scores: Vec<ScoreRow>,
    pub ground_truth: ScoreGroundTruth,
}

impl SyntheticScores {
    /// Writes `samples.csv`, `scores.csv` and `ground_truth.json`.
    pub fn write_to(&self, dir: &Path) -> Result<(), AuditError> {
        std::fs::create_dir_all(dir)?;
        write_samples(File::create(dir.join("samples.csv"))?, &self.samples)?;
        write_scores(File::create(dir.join("scores.csv"))?, &self.scores)?;
        super::write_json(&dir.join("ground_truth.json"), &self.ground_truth)?;
        Ok(())
    }
}

fn clip01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

fn bin_mid(bin: AgeBin) -> f64 {
    let (lo, hi) = bin.range();
    (lo + hi) / 2.0
}

/// Draws a score dataset: clipped-normal concept scores with planted shifts,
/// exact annotation counts, and optional face-attribute outputs.
pub fn generate_scores(plan: &DisparityPlan) -> Result<SyntheticScores, SynthError> {
    plan.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let base = Normal::new(plan.base.mean, plan.base.sd).map_err(|e| SynthError::InvalidPlan(e.to_string()))?;
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");

    let shift_of: BTreeMap<(&str, &str), f64> = plan
        .shifts
        .iter()
        .fold(BTreeMap::new(), |mut m, s| {
            *m.entry((s.concept.as_str(), s.group.as_str())).or_insert(0.0) += s.shift;
            m
        });
    let empty: BTreeSet<(&str, &str, Label)> = plan
        .annotations
        .iter()
        .flat_map(|a| a.empty.iter().map(|e| (e.concept.as_str(), e.group.as_str(), e.label)))
        .collect();

    let width = (plan.groups.len() * plan.n_per_group).to_string().len().max(4);
    let mut samples = Vec::with_capacity(plan.groups.len() * plan.n_per_group);
    let mut scores = Vec::with_capacity(samples.capacity() * plan.concepts.len());
    let mut cells = Vec::new();
    let (mut single, mut zero, mut multi) = (0, 0, 0);

    for group in &plan.groups {
        let label = group.label();
        // Positive labels: a fixed count per cell, assigned to a random subset.
        let mut positive: BTreeMap<&str, Vec<bool>> = BTreeMap::new();
        if let Some(a) = &plan.annotations {
            for c in &a.concepts {
                let n_pos = if empty.contains(&(c.as_str(), label.as_str(), Label::Pos)) {
                    0
                } else if empty.contains(&(c.as_str(), label.as_str(), Label::Neg)) {
                    plan.n_per_group
                } else {
                    (a.pos_fraction * plan.n_per_group as f64).round() as usize
                };
                let mut flags: Vec<bool> = (0..plan.n_per_group).map(|k| k < n_pos).collect();
                rand::seq::SliceRandom::shuffle(flags.as_mut_slice(), &mut rng);
                cells.push(CellCounts {
                    concept: c.clone(),
                    group: label.clone(),
                    pos: n_pos,
                    neg: plan.n_per_group - n_pos,
                });
                positive.insert(c.as_str(), flags);
            }
        }

        for k in 0..plan.n_per_group {
            let sample_id = format!("s{:0width$}", samples.len());
            let age_bin = plan.age_bins[k % plan.age_bins.len()];
            let annotations: BTreeMap<String, Label> = positive
                .iter()
                .map(|(c, flags)| ((*c).to_owned(), if flags[k] { Label::Pos } else { Label::Neg }))
                .collect();

            let (face_count, predicted_age, predicted_sex_score) = match &plan.face {
                None => (None, None, None),
                Some(f) => {
                    let u: f64 = rng.random();
                    let faces = if u < f.zero_face_rate {
                        zero += 1;
                        0
                    } else if u < f.zero_face_rate + f.multi_face_rate {
                        multi += 1;
                        rng.random_range(2..=4)
                    } else {
                        single += 1;
                        1
                    };
                    let selected = |s: &&OutputShift| {
                        s.ethnicity.as_ref().is_none_or(|e| *e == group.ethnicity)
                            && s.sex.is_none_or(|x| x == group.sex)
                            && s.age_bin.is_none_or(|b| b == age_bin)
                    };
                    let shift = |out: FaceOutput| -> f64 {
                        f.shifts.iter().filter(|s| s.output == out).filter(selected).map(|s| s.shift).sum()
                    };
                    let centre = if group.sex == Sex::Male { 0.75 } else { 0.25 };
                    let sex_score = clip01(
                        centre + shift(FaceOutput::PredictedSexScore) + f.sex_sd * std_normal.sample(&mut rng),
                    );
                    let age = (bin_mid(age_bin) + shift(FaceOutput::PredictedAge)
                        + f.age_sd * std_normal.sample(&mut rng))
                    .clamp(0.0, 100.0);
                    (Some(faces), Some(age), Some(sex_score))
                }
            };

            for c in &plan.concepts {
                let mut score = base.sample(&mut rng) + shift_of.get(&(c.as_str(), label.as_str())).unwrap_or(&0.0);
                if annotations.get(c) == Some(&Label::Pos) {
                    score += plan.annotations.as_ref().map_or(0.0, |a| a.pos_shift);
                }
                scores.push(ScoreRow {
                    sample_id: sample_id.clone(),
                    concept: c.clone(),
                    score: clip01(score),
                    face_count,
                    predicted_age,
                    predicted_sex_score,
                });
            }
            samples.push(SampleRow {
                sample_id,
                sex: group.sex,
                ethnicity: group.ethnicity.clone(),
                age_bin,
                variant: plan.variant.clone(),
                annotations,
            });
        }
    }

    Ok(SyntheticScores {
        ground_truth: ScoreGroundTruth {
            n_samples: samples.len(),
            n_single_face: single,
            n_zero_face: zero,
            n_multi_face: multi,
            shifts: plan.shifts.clone(),
            cells,
        },
        samples,
        scores,
    })
}
