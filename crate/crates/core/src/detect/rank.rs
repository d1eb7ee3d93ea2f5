use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{Evidence, RuleKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateFunction {
    pub function_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub library: Option<String>,
    pub evidence_count: usize,
    pub rule_kinds: BTreeSet<RuleKind>,
    pub first_seen_ts: u64,
    /// `kinds + count / (count + 1)`: orders like the sort key, for display.
    pub score: f64,
}

/// Groups evidence by function and orders it by rule variety, then volume,
/// then name.
pub fn rank_candidates(evidence: &[Evidence]) -> Vec<CandidateFunction> {
    let mut by_fn: BTreeMap<(&str, Option<&str>), CandidateFunction> = BTreeMap::new();
    for e in evidence {
        let key = (e.function_name.as_str(), e.library.as_deref());
        let c = by_fn.entry(key).or_insert_with(|| CandidateFunction {
            function_name: e.function_name.clone(),
            library: e.library.clone(),
            evidence_count: 0,
            rule_kinds: BTreeSet::new(),
            first_seen_ts: e.timestamp_ns,
            score: 0.0,
        });
        c.evidence_count += 1;
        c.rule_kinds.insert(e.rule.kind());
        c.first_seen_ts = c.first_seen_ts.min(e.timestamp_ns);
    }
    let mut out: Vec<CandidateFunction> = by_fn
        .into_values()
        .map(|mut c| {
            let n = c.evidence_count as f64;
            c.score = c.rule_kinds.len() as f64 + n / (n + 1.0);
            c
        })
        .collect();
    // BTreeMap order already breaks remaining ties by (name, library).
    out.sort_by(|a, b| {
        b.rule_kinds
            .len()
            .cmp(&a.rule_kinds.len())
            .then(b.evidence_count.cmp(&a.evidence_count))
            .then(a.function_name.cmp(&b.function_name))
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detect::{EvidenceField, EvidenceRule};

    fn ev(name: &str, rule: EvidenceRule, ts: u64) -> Evidence {
        Evidence {
            record_index: 0,
            function_name: name.into(),
            library: None,
            timestamp_ns: ts,
            field: EvidenceField::Payload,
            rule,
        }
    }

    fn kw() -> EvidenceRule {
        EvidenceRule::KeywordHit { keyword: "model".into() }
    }

    #[test]
    fn variety_beats_volume() {
        let mut evidence: Vec<_> = (0..5).map(|i| ev("busy", kw(), i)).collect();
        evidence.push(ev("cb", kw(), 9));
        evidence.push(ev("cb", EvidenceRule::ProbabilityVector { length: 2, min: 0.2, max: 0.8 }, 7));
        let ranked = rank_candidates(&evidence);
        assert_eq!(ranked[0].function_name, "cb");
        assert_eq!(ranked[0].first_seen_ts, 7);
        assert_eq!(ranked[0].evidence_count, 2);
        assert_eq!(ranked[1].evidence_count, 5);
        assert!(ranked[0].score > ranked[1].score);
    }

    #[test]
    fn empty() {
        assert!(rank_candidates(&[]).is_empty());
    }

    #[test]
    fn name_breaks_ties() {
        let ranked = rank_candidates(&[ev("b", kw(), 0), ev("a", kw(), 1)]);
        assert_eq!(ranked[0].function_name, "a");
    }
}
