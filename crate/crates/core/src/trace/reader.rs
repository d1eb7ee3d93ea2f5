use std::collections::{BTreeMap, HashMap, VecDeque};
use std::io::BufRead;

use rayon::prelude::*;
use serde::Serialize;

use super::record::TraceRecord;
use super::{RejectReason, TraceError};

#[derive(Debug, Clone)]
pub struct ParseOptions {
    /// Lines buffered and parsed together. Bounds reader memory.
    pub window: usize,
    /// Fraction of rejected lines above which the whole parse fails.
    pub max_reject_ratio: f64,
    /// Number of individual rejections kept for reporting.
    pub keep_rejections: usize,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions { window: 4096, max_reject_ratio: 0.5, keep_rejections: 100 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TraceCounters {
    pub read: u64,
    pub accepted: u64,
    pub rejected: u64,
    pub by_reason: BTreeMap<&'static str, u64>,
    /// First rejections as `(line number, reason)`.
    pub samples: Vec<(u64, String)>,
}

#[derive(Debug, Clone, Default)]
pub struct TraceLog {
    pub records: Vec<TraceRecord>,
    pub counters: TraceCounters,
}

impl TraceLog {
    pub fn from_records(records: Vec<TraceRecord>) -> Self {
        let n = records.len() as u64;
        TraceLog {
            records,
            counters: TraceCounters { read: n, accepted: n, ..Default::default() },
        }
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&r.to_json_line());
            out.push('\n');
        }
        out
    }
}

/// Streaming reader over a line-delimited trace. Yields accepted records in
/// input order; memory is bounded by the configured window.
pub struct TraceReader<R> {
    input: R,
    opts: ParseOptions,
    ready: VecDeque<TraceRecord>,
    last_ts: HashMap<(u32, u32), u64>,
    counters: TraceCounters,
    line_no: u64,
    error: Option<std::io::Error>,
    eof: bool,
}

impl<R: BufRead> TraceReader<R> {
    pub fn new(input: R, opts: ParseOptions) -> Self {
        TraceReader {
            input,
            opts,
            ready: VecDeque::new(),
            last_ts: HashMap::new(),
            counters: TraceCounters::default(),
            line_no: 0,
            error: None,
            eof: false,
        }
    }

    pub fn counters(&self) -> &TraceCounters {
        &self.counters
    }

    /// Final counters, or an error if the input failed or was too corrupt.
    pub fn finish(self) -> Result<TraceCounters, TraceError> {
        if let Some(e) = self.error {
            return Err(e.into());
        }
        let c = self.counters;
        if c.read > 0 && (c.rejected as f64) / (c.read as f64) > self.opts.max_reject_ratio {
            return Err(TraceError::ExcessiveCorruption {
                read: c.read,
                rejected: c.rejected,
                max_ratio: self.opts.max_reject_ratio,
            });
        }
        Ok(c)
    }

    fn reject(&mut self, line: u64, reason: RejectReason) {
        self.counters.rejected += 1;
        *self.counters.by_reason.entry(reason.label()).or_default() += 1;
        if self.counters.samples.len() < self.opts.keep_rejections {
            self.counters.samples.push((line, reason.to_string()));
        }
    }

    fn fill(&mut self) {
        let mut batch: Vec<(u64, Vec<u8>)> = Vec::with_capacity(self.opts.window);
        while batch.len() < self.opts.window.max(1) {
            let mut buf = Vec::new();
            match self.input.read_until(b'\n', &mut buf) {
                Ok(0) => {
                    self.eof = true;
                    break;
                }
                Ok(_) => {
                    self.line_no += 1;
                    if buf.iter().all(u8::is_ascii_whitespace) {
                        continue;
                    }
                    batch.push((self.line_no, buf));
                }
                Err(e) => {
                    self.error = Some(e);
                    self.eof = true;
                    break;
                }
            }
        }
        let parsed: Vec<(u64, Result<TraceRecord, RejectReason>)> = batch
            .into_par_iter()
            .map(|(line, bytes)| {
                let rec = std::str::from_utf8(&bytes)
                    .map_err(|_| RejectReason::InvalidUtf8)
                    .and_then(|s| TraceRecord::from_json_line(s.trim_end()));
                (line, rec)
            })
            .collect();
        for (line, rec) in parsed {
            self.counters.read += 1;
            let rec = rec.and_then(|r| {
                let key = (r.pid, r.tid);
                match self.last_ts.get(&key) {
                    Some(&previous) if r.timestamp_ns < previous => {
                        Err(RejectReason::NonMonotonicTimestamp { previous, current: r.timestamp_ns })
                    }
                    _ => {
                        self.last_ts.insert(key, r.timestamp_ns);
                        Ok(r)
                    }
                }
            });
            match rec {
                Ok(r) => {
                    self.counters.accepted += 1;
                    self.ready.push_back(r);
                }
                Err(reason) => self.reject(line, reason),
            }
        }
    }
}

impl<R: BufRead> Iterator for TraceReader<R> {
    type Item = TraceRecord;

    fn next(&mut self) -> Option<TraceRecord> {
        while self.ready.is_empty() && !self.eof {
            self.fill();
        }
        self.ready.pop_front()
    }
}

/// Reads a whole trace into memory. Malformed lines are skipped and counted.
pub fn parse_trace<R: BufRead>(input: R, opts: ParseOptions) -> Result<TraceLog, TraceError> {
    let mut reader = TraceReader::new(input, opts);
    let records: Vec<_> = reader.by_ref().collect();
    let counters = reader.finish()?;
    Ok(TraceLog { records, counters })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(ts: u64, f: &str) -> String {
        format!(r#"{{"v":1,"ts":{ts},"pid":1,"tid":2,"kind":"cb","fn":"{f}","payload":"x"}}"#)
    }

    #[test]
    fn three_good_lines() {
        let text = [line(1, "a"), line(2, "b"), line(3, "c")].join("\n");
        let log = parse_trace(text.as_bytes(), ParseOptions::default()).unwrap();
        assert_eq!(log.records.len(), 3);
        assert_eq!(log.counters.read, 3);
        assert_eq!(log.counters.rejected, 0);
        let names: Vec<_> = log.records.iter().map(|r| r.function_name.as_str()).collect();
        assert_eq!(names, ["a", "b", "c"]);
    }

    #[test]
    fn malformed_line_is_counted() {
        let text = format!("{}\n{{\"v\":1,\"ts\n{}\n", line(1, "a"), line(2, "c"));
        let log = parse_trace(text.as_bytes(), ParseOptions::default()).unwrap();
        assert_eq!(log.records.len(), 2);
        assert_eq!(log.counters.read, 3);
        assert_eq!(log.counters.rejected, 1);
        assert_eq!(log.counters.by_reason["invalid_json"], 1);
        assert_eq!(log.counters.samples[0].0, 2);
    }

    #[test]
    fn blank_lines_are_not_records() {
        let text = format!("\n{}\n\n   \n{}\n", line(1, "a"), line(2, "b"));
        let log = parse_trace(text.as_bytes(), ParseOptions::default()).unwrap();
        assert_eq!(log.counters.read, 2);
    }

    #[test]
    fn timestamps_must_not_go_backwards_per_thread() {
        let other_thread = r#"{"v":1,"ts":1,"pid":1,"tid":3,"kind":"cb","fn":"t3","payload":"x"}"#;
        let text = [line(5, "a"), line(4, "b"), other_thread.to_string(), line(5, "c")].join("\n");
        let log = parse_trace(text.as_bytes(), ParseOptions::default()).unwrap();
        let names: Vec<_> = log.records.iter().map(|r| r.function_name.as_str()).collect();
        assert_eq!(names, ["a", "t3", "c"]);
        assert_eq!(log.counters.by_reason["non_monotonic_timestamp"], 1);
    }

    #[test]
    fn excessive_corruption() {
        let text = format!("{}\nnope\nnope\n", line(1, "a"));
        let err = parse_trace(text.as_bytes(), ParseOptions::default()).unwrap_err();
        assert!(matches!(err, TraceError::ExcessiveCorruption { read: 3, rejected: 2, .. }));
    }

    #[test]
    fn small_window_preserves_order() {
        let text: Vec<String> = (0..100).map(|i| line(i, &format!("f{i}"))).collect();
        let opts = ParseOptions { window: 7, ..Default::default() };
        let log = parse_trace(text.join("\n").as_bytes(), opts).unwrap();
        for (i, r) in log.records.iter().enumerate() {
            assert_eq!(r.function_name, format!("f{i}"));
        }
    }

    #[test]
    fn invalid_utf8_line() {
        let mut bytes = line(1, "a").into_bytes();
        bytes.extend_from_slice(b"\n\xff\xfe\n");
        bytes.extend_from_slice(line(2, "b").as_bytes());
        let log = parse_trace(&bytes[..], ParseOptions::default()).unwrap();
        assert_eq!(log.counters.by_reason["invalid_utf8"], 1);
        assert_eq!(log.records.len(), 2);
    }
}
