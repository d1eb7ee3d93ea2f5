//! Synthetic traces and score datasets with recorded ground truth.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

mod names;
mod scores;
mod trace;

pub use names::{keyword_free, NameGen};
pub use scores::{
    generate_scores, AnnotationPlan, CellCounts, DisparityPlan, EmptyClass, FaceOutput, FacePlan, GroupSpec, NormalParams,
    OutputShift, ScoreGroundTruth,
    Shift, SyntheticScores,
};
pub use trace::{generate_trace, GroundTruth, Stage, StageNodes, SyntheticAppPlan, SyntheticTrace};

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
}

/// Pretty JSON with a trailing newline.
pub(crate) fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()
}
