//! Statistical kernel: Kruskal-Wallis with tie correction, chi-square tail,
//! Bonferroni correction, Monte-Carlo power, ROC-AUC, spurious-correlation
//! mining and concept validation.

mod auc;
mod chisq;
mod kruskal;
mod power;
mod spurious;

pub use auc::{roc_auc, roc_curve, AucCell, AucValue};
pub use chisq::{chi_square_sf, gamma_q, ln_gamma};
pub use kruskal::{kruskal_wallis, mid_ranks, KruskalWallis, SampleGroups, TestResult};
pub use power::{estimate_power, power_curve};
pub use spurious::{mine_spurious, ScoreTable, SpuriousFinding};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
}

/// Per-test significance level for a family of `m` hypotheses.
pub fn bonferroni(alpha: f64, m: usize) -> f64 {
    assert!(m >= 1, "a Bonferroni family has at least one hypothesis");
    alpha / m as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConceptValidation {
    pub mean_in: f64,
    pub mean_out: f64,
    pub gap: f64,
}

/// Mean score when the concept is present versus absent. A positive gap
/// means the score tracks its label.
pub fn concept_validation(matched: &[f64], unmatched: &[f64]) -> Result<ConceptValidation, StatsError> {
    if matched.is_empty() || unmatched.is_empty() {
        return Err(StatsError::DegenerateInput("both score lists must be non-empty".into()));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (mean_in, mean_out) = (mean(matched), mean(unmatched));
    Ok(ConceptValidation { mean_in, mean_out, gap: mean_in - mean_out })
}

/// Serde adapter writing NaN as the string `"NaN"` and reading it back.
pub mod nan_as_string {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_nan() {
            s.serialize_str("NaN")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum NumOrStr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match NumOrStr::deserialize(d)? {
            NumOrStr::Num(v) => Ok(v),
            NumOrStr::Str(s) if s == "NaN" => Ok(f64::NAN),
            NumOrStr::Str(s) => Err(serde::de::Error::custom(format!("expected number or \"NaN\", got {s:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bonferroni_examples() {
        assert_eq!(bonferroni(0.05, 8), 0.00625);
        assert_eq!(bonferroni(0.05, 1), 0.05);
        assert_eq!(bonferroni(0.01, 4), 0.0025);
    }

    #[test]
    fn validation_examples() {
        let v = concept_validation(&[0.8, 0.6], &[0.1, 0.1]).unwrap();
        assert!((v.mean_in - 0.7).abs() < 1e-12);
        assert!((v.mean_out - 0.1).abs() < 1e-12);
        assert!((v.gap - 0.6).abs() < 1e-12);
        let same = concept_validation(&[0.3, 0.4], &[0.3, 0.4]).unwrap();
        assert_eq!(same.gap, 0.0);
        assert!(concept_validation(&[], &[0.1]).is_err());
    }
}
