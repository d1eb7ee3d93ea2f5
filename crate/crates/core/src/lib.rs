//! Toolkit for finding on-device ML execution in runtime invocation traces,
//! reconstructing the surrounding pipeline, and auditing model scores for
//! demographic disparities.
//!
//! The crate is organised in layers:
//!
//! - [`trace`]: trace records, the line-delimited log format and the
//!   shorty-typed argument codec.
//! - [`detect`]: keyword and probability-vector evidence, candidate ranking.
//! - [`pipeline`]: hybrid call graph and input-to-sink slicing.
//! - [`stats`]: Kruskal-Wallis, chi-square tail, Bonferroni, power, ROC-AUC.
//! - [`audit`]: datasets, scorer adapters, hypothesis suites and reports.
//! - [`synth`]: synthetic traces and score datasets with known ground truth.

pub mod audit;
pub mod detect;
pub mod pipeline;
pub mod stats;
pub mod synth;
pub mod trace;
