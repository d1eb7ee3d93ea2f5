use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{text_fields, Evidence, EvidenceField, EvidenceRule};
use crate::trace::TraceLog;

/// Nested JSON strings are re-parsed up to this depth.
const MAX_DEPTH: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbabilityScan {
    pub min_len: usize,
    /// Require one value strictly inside (0, 1), which rules out bitmasks.
    pub require_interior: bool,
}

impl Default for ProbabilityScan {
    fn default() -> Self {
        ProbabilityScan { min_len: 2, require_interior: true }
    }
}

impl ProbabilityScan {
    /// Summary `(length, min, max)` of `values` if it qualifies.
    pub fn qualifies(&self, values: &[f64]) -> Option<(usize, f64, f64)> {
        if values.len() < self.min_len || !values.iter().all(|v| (0.0..=1.0).contains(v)) {
            return None;
        }
        if self.require_interior && !values.iter().any(|&v| v > 0.0 && v < 1.0) {
            return None;
        }
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Some((values.len(), min, max))
    }

    /// Every qualifying array in `text`, in order of appearance.
    pub fn scan_text(&self, text: &str) -> Vec<(usize, f64, f64)> {
        let mut out = Vec::new();
        self.scan_into(text, 0, &mut out);
        out
    }

    fn scan_into(&self, text: &str, depth: usize, out: &mut Vec<(usize, f64, f64)>) {
        if depth > MAX_DEPTH || !text.contains('[') {
            return;
        }
        if let Ok(v) = serde_json::from_str::<Value>(text) {
            self.walk(&v, depth, out);
            return;
        }
        // Not a JSON document: try each bracketed fragment.
        let bytes = text.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            if bytes[i] == b'[' {
                if let Some(end) = matching_bracket(bytes, i) {
                    if let Ok(v) = serde_json::from_str::<Value>(&text[i..=end]) {
                        self.walk(&v, depth, out);
                        i = end + 1;
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    fn walk(&self, v: &Value, depth: usize, out: &mut Vec<(usize, f64, f64)>) {
        match v {
            Value::Array(items) => {
                let numbers: Option<Vec<f64>> = items.iter().map(Value::as_f64).collect();
                match numbers {
                    Some(values) if !values.is_empty() => out.extend(self.qualifies(&values)),
                    _ => items.iter().for_each(|x| self.walk(x, depth, out)),
                }
            }
            Value::Object(map) => map.values().for_each(|x| self.walk(x, depth, out)),
            Value::String(s) => self.scan_into(s, depth + 1, out),
            _ => {}
        }
    }
}

fn matching_bracket(bytes: &[u8], open: usize) -> Option<usize> {
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (i, &b) in bytes.iter().enumerate().skip(open) {
        if in_string {
            match (escaped, b) {
                (true, _) => escaped = false,
                (false, b'\\') => escaped = true,
                (false, b'"') => in_string = false,
                _ => {}
            }
            continue;
        }
        match b {
            b'"' => in_string = true,
            b'[' => depth += 1,
            b']' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

/// Flags numeric arrays of model-output shape in payloads and text blobs.
pub fn scan_probability_vectors(log: &TraceLog, scan: &ProbabilityScan) -> Vec<Evidence> {
    assert!(scan.min_len >= 2, "min_len must be at least 2");
    log.records
        .par_iter()
        .enumerate()
        .flat_map_iter(|(index, record)| {
            let mut hits = Vec::new();
            for (field, text) in text_fields(record) {
                if field == EvidenceField::FunctionName {
                    continue;
                }
                for (length, min, max) in scan.scan_text(&text) {
                    hits.push(Evidence::at(
                        index,
                        record,
                        field,
                        EvidenceRule::ProbabilityVector { length, min, max },
                    ));
                }
            }
            hits
        })
        .collect()
}
