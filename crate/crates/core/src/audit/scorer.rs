use std::collections::BTreeSet;
use std::fs::File;
use std::io::Read;
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::data::{read_scores, ConceptCatalog, SampleRow, ScoreRow};
use super::AuditError;

/// How scores are obtained for a list of samples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScorerAdapter {
    /// Runs `sh -c` on the template once per sample, with `{sample_id}`
    /// replaced by the shell-quoted id.
    Internal { command: String },
    /// Loads a precomputed scores CSV.
    External { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScorerOptions {
    pub timeout: Duration,
    /// Extra attempts after the first failure.
    pub retries: u32,
    pub concurrency: usize,
    /// Fail the whole run when more than this share of samples fail.
    pub max_failure_ratio: f64,
}

impl Default for ScorerOptions {
    fn default() -> Self {
        ScorerOptions { timeout: Duration::from_secs(30), retries: 1, concurrency: 4, max_failure_ratio: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum FailureKind {
    Timeout,
    Spawn(String),
    Exit(Option<i32>),
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScorerFailure {
    pub sample_id: String,
    pub attempts: u32,
    #[serde(flatten)]
    pub kind: FailureKind,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScorerOutput {
    pub rows: Vec<ScoreRow>,
    pub failures: Vec<ScorerFailure>,
}

/// POSIX single-quote escaping.
pub fn shell_quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', r"'\''"))
}

/// Parses scorer stdout. Score lines are `concept<TAB>score`; the optional
/// lines `@face_count`, `@predicted_age` and `@predicted_sex_score` set the
/// per-sample outputs. Blank lines and `#` comments are ignored.
pub fn parse_scorer_output(
    sample_id: &str,
    text: &str,
    catalog: Option<&ConceptCatalog>,
) -> Result<Vec<ScoreRow>, String> {
    let mut rows: Vec<ScoreRow> = Vec::new();
    let mut seen = BTreeSet::new();
    let (mut faces, mut age, mut sex) = (None, None, None);
    for (n, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('\t').ok_or_else(|| format!("line {}: expected concept<TAB>score", n + 1))?;
        let real = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("line {}: bad number {v:?}", n + 1));
        match key {
            "@face_count" => {
                faces = Some(value.trim().parse::<u32>().map_err(|_| format!("line {}: bad face count", n + 1))?)
            }
            "@predicted_age" => age = Some(real(value)?),
            "@predicted_sex_score" => sex = Some(real(value)?),
            _ => {
                let score = real(value)?;
                if !(0.0..=1.0).contains(&score) {
                    return Err(format!("line {}: score {score} outside [0, 1]", n + 1));
                }
                if catalog.is_some_and(|c| c.position(key).is_none()) {
                    return Err(format!("line {}: concept {key:?} not in catalog", n + 1));
                }
                if !seen.insert(key.to_owned()) {
                    return Err(format!("line {}: concept {key:?} repeated", n + 1));
                }
                rows.push(ScoreRow::new(sample_id, key, score));
            }
        }
    }
    if rows.is_empty() {
        return Err("no score lines".into());
    }
    if let Some(c) = catalog {
        if seen.len() != c.len() {
            return Err(format!("{} of {} catalog concepts scored", seen.len(), c.len()));
        }
        rows.sort_by_key(|r| c.position(&r.concept));
    }
    for r in &mut rows {
        r.face_count = faces;
        r.predicted_age = age;
        r.predicted_sex_score = sex;
    }
    Ok(rows)
}

fn run_once(command: &str, timeout: Duration) -> Result<String, FailureKind> {
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(command)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| FailureKind::Spawn(e.to_string()))?;
    let mut stdout = child.stdout.take().expect("piped stdout");
    // Drain stdout on its own thread so a chatty scorer cannot block on a
    // full pipe while we poll for exit.
    let reader = thread::spawn(move || {
        let mut buf = Vec::new();
        stdout.read_to_end(&mut buf).map(|_| buf)
    });
    let start = Instant::now();
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break status,
            Ok(None) if start.elapsed() >= timeout => {
                let _ = child.kill();
                let _ = child.wait();
                return Err(FailureKind::Timeout);
            }
            Ok(None) => thread::sleep(Duration::from_millis(5)),
            Err(e) => return Err(FailureKind::Spawn(e.to_string())),
        }
    };
    let out = reader.join().expect("reader thread").map_err(|e| FailureKind::Spawn(e.to_string()))?;
    if !status.success() {
        return Err(FailureKind::Exit(status.code()));
    }
    String::from_utf8(out).map_err(|_| FailureKind::Parse("stdout is not UTF-8".into()))
}

fn score_sample(
    template: &str,
    sample: &SampleRow,
    catalog: Option<&ConceptCatalog>,
    opts: &ScorerOptions,
) -> Result<Vec<ScoreRow>, ScorerFailure> {
    let command = template.replace("{sample_id}", &shell_quote(&sample.sample_id));
    let mut attempts = 0;
    loop {
        attempts += 1;
        let result = run_once(&command, opts.timeout)
            .and_then(|text| parse_scorer_output(&sample.sample_id, &text, catalog).map_err(FailureKind::Parse));
        match result {
            Ok(rows) => return Ok(rows),
            Err(kind) if attempts > opts.retries => {
                return Err(ScorerFailure { sample_id: sample.sample_id.clone(), attempts, kind })
            }
            Err(_) => {}
        }
    }
}

/// Scores every sample. Per-sample failures are collected; the run only
/// fails when they exceed `max_failure_ratio`. Rows come back ordered by
/// sample id.
pub fn run_scorer(
    adapter: &ScorerAdapter,
    samples: &[SampleRow],
    catalog: Option<&ConceptCatalog>,
    opts: &ScorerOptions,
) -> Result<ScorerOutput, AuditError> {
    let template = match adapter {
        ScorerAdapter::External { path } => {
            let mut rows = read_scores(File::open(path)?)?;
            rows.sort_by(|a, b| a.sample_id.cmp(&b.sample_id));
            return Ok(ScorerOutput { rows, failures: Vec::new() });
        }
        ScorerAdapter::Internal { command } => command,
    };
    let mut order: Vec<&SampleRow> = samples.iter().collect();
    order.sort_by(|a, b| a.sample_id.cmp(&b.sample_id));

    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<Vec<ScoreRow>, ScorerFailure>>>> = Mutex::new(vec![None; order.len()]);
    thread::scope(|scope| {
        for _ in 0..opts.concurrency.clamp(1, order.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(sample) = order.get(i) else { break };
                let r = score_sample(template, sample, catalog, opts);
                results.lock().expect("results lock")[i] = Some(r);
            });
        }
    });

    let mut out = ScorerOutput::default();
    for r in results.into_inner().expect("results lock") {
        match r.expect("every sample scored") {
            Ok(rows) => out.rows.extend(rows),
            Err(f) => out.failures.push(f),
        }
    }
    if !order.is_empty() && out.failures.len() as f64 / order.len() as f64 > opts.max_failure_ratio {
        return Err(AuditError::ScorerFailures { failed: out.failures.len(), total: order.len() });
    }
    Ok(out)
}
