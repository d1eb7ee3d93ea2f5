//! Assessment layer: datasets, scorer adapters, hypothesis suites, reports.

pub mod data;
pub mod hypothesis;
pub mod report;
pub mod scorer;

pub use data::{
    demographic_label, filter_single_face, load_dataset, read_samples, read_scores, write_samples, write_scores,
    AgeBin, ConceptCatalog, FaceFilterReport, Label, LoadOptions, SampleOutputs, SampleRow, ScoreDataset, ScoreRow,
    Sex, AGE_BINS,
};
pub use hypothesis::{
    median_in_bin, run_hypothesis, AnnotationFilter, BinReport, FamilySize, Field, HypothesisKind, HypothesisOutcome,
    HypothesisSpec, PowerSpec, StratumResult, ValueField,
};
pub use report::{
    annotation_counts, auc_percent, auc_table, fixed_half_even, mine, run_suite, sample_top_k, top_k, write_findings,
    write_report, AnnotationCount, AucRow, AucSpec, AucTable, Mark, Suite, SuiteReport,
};
pub use scorer::{
    parse_scorer_output, run_scorer, shell_quote, FailureKind, ScorerAdapter, ScorerFailure, ScorerOptions, ScorerOutput,
};

#[derive(Debug, thiserror::Error)]
pub enum AuditError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("{orphans} of {total} score rows name unknown samples (limit {max_ratio})")]
    Join { orphans: usize, total: usize, max_ratio: f64 },
    #[error("missing field: {0}")]
    MissingField(String),
    #[error("spec error: {0}")]
    Spec(String),
    #[error("{failed} of {total} samples failed to score")]
    ScorerFailures { failed: usize, total: usize },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl AuditError {
    /// Process exit status for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            AuditError::Schema(_) | AuditError::Join { .. } | AuditError::MissingField(_) | AuditError::Csv(_) => 2,
            AuditError::ScorerFailures { .. } => 3,
            _ => 1,
        }
    }
}
