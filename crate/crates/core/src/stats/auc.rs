use serde::{Deserialize, Serialize};

use super::kruskal::mid_ranks;
use super::nan_as_string;

/// ROC-AUC of one positive/negative split. `auc` is NaN when either class is
/// empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AucValue {
    #[serde(with = "nan_as_string")]
    pub auc: f64,
    pub n_pos: usize,
    pub n_neg: usize,
}

/// AUC for one (concept, demographic group) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AucCell {
    pub concept: String,
    pub group: String,
    #[serde(with = "nan_as_string")]
    pub auc: f64,
    pub n_pos: usize,
    pub n_neg: usize,
}

impl AucCell {
    pub fn new(concept: impl Into<String>, group: impl Into<String>, v: AucValue) -> Self {
        AucCell {
            concept: concept.into(),
            group: group.into(),
            auc: v.auc,
            n_pos: v.n_pos,
            n_neg: v.n_neg,
        }
    }
}

/// Probability that a random positive outscores a random negative, ties
/// counting one half. Computed from the Mann-Whitney rank sum.
pub fn roc_auc(pos: &[f64], neg: &[f64]) -> AucValue {
    let (n_pos, n_neg) = (pos.len(), neg.len());
    if n_pos == 0 || n_neg == 0 {
        return AucValue { auc: f64::NAN, n_pos, n_neg };
    }
    let pooled: Vec<f64> = pos.iter().chain(neg).copied().collect();
    let (ranks, _) = mid_ranks(&pooled);
    let rank_sum: f64 = ranks[..n_pos].iter().sum();
    let np = n_pos as f64;
    let u = rank_sum - np * (np + 1.0) / 2.0;
    AucValue { auc: u / (np * n_neg as f64), n_pos, n_neg }
}

/// ROC curve points `(false positive rate, true positive rate)` from the
/// strictest threshold to the loosest, starting at (0, 0) and ending at (1, 1).
pub fn roc_curve(pos: &[f64], neg: &[f64]) -> Vec<(f64, f64)> {
    if pos.is_empty() || neg.is_empty() {
        return Vec::new();
    }
    let mut scored: Vec<(f64, bool)> = pos
        .iter()
        .map(|&s| (s, true))
        .chain(neg.iter().map(|&s| (s, false)))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (np, nn) = (pos.len() as f64, neg.len() as f64);
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < scored.len() {
        let threshold = scored[i].0;
        while i < scored.len() && scored[i].0 == threshold {
            if scored[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push((fp as f64 / nn, tp as f64 / np));
    }
    points
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent pair-count definition.
    fn brute(pos: &[f64], neg: &[f64]) -> f64 {
        let mut s = 0.0;
        for p in pos {
            for n in neg {
                s += if p > n { 1.0 } else if p == n { 0.5 } else { 0.0 };
            }
        }
        s / (pos.len() * neg.len()) as f64
    }

    #[test]
    fn perfect_separation() {
        assert_eq!(roc_auc(&[0.9, 0.8], &[0.1, 0.2]).auc, 1.0);
    }

    #[test]
    fn three_of_four_pairs() {
        let pos = [0.8, 0.4];
        let neg = [0.6, 0.2];
        assert_eq!(brute(&pos, &neg), 0.75);
        assert!((roc_auc(&pos, &neg).auc - 0.75).abs() < 1e-12);
    }

    #[test]
    fn empty_class_is_nan() {
        let v = roc_auc(&[0.7], &[]);
        assert!(v.auc.is_nan());
        assert_eq!((v.n_pos, v.n_neg), (1, 0));
        assert!(roc_auc(&[], &[0.1]).auc.is_nan());
    }

    #[test]
    fn ties_count_half() {
        assert_eq!(roc_auc(&[0.5], &[0.5]).auc, 0.5);
        assert_eq!(roc_auc(&[0.5, 0.5], &[0.5, 0.1]).auc, brute(&[0.5, 0.5], &[0.5, 0.1]));
    }

    #[test]
    fn nan_serializes_as_string() {
        let cell = AucCell::new("blond", "AF", roc_auc(&[0.3], &[]));
        let json = serde_json::to_string(&cell).unwrap();
        assert!(json.contains(r#""auc":"NaN""#), "{json}");
        let back: AucCell = serde_json::from_str(&json).unwrap();
        assert!(back.auc.is_nan());
        let cell = AucCell::new("beard", "AM", roc_auc(&[0.9], &[0.1]));
        let json = serde_json::to_string(&cell).unwrap();
        assert!(json.contains(r#""auc":1.0"#), "{json}");
    }

    #[test]
    fn curve_area_matches_auc() {
        let pos = [0.9, 0.7, 0.7, 0.3, 0.6];
        let neg = [0.1, 0.7, 0.4, 0.2];
        let pts = roc_curve(&pos, &neg);
        let area: f64 = pts
            .windows(2)
            .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0)
            .sum();
        assert!((area - roc_auc(&pos, &neg).auc).abs() < 1e-12);
        assert_eq!(*pts.last().unwrap(), (1.0, 1.0));
    }
}
