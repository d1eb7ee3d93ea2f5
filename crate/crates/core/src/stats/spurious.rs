use serde::{Deserialize, Serialize};

use super::bonferroni;
use super::kruskal::{kruskal_wallis, SampleGroups};

/// Concept scores bucketed by demographic group: `values[c][g]` holds every
/// score of concept `c` observed in group `g`.
#[derive(Debug, Clone, Default)]
pub struct ScoreTable {
    pub concepts: Vec<String>,
    pub groups: Vec<String>,
    pub values: Vec<Vec<Vec<f64>>>,
}

impl ScoreTable {
    pub fn new(concepts: Vec<String>, groups: Vec<String>) -> Self {
        let values = vec![vec![Vec::new(); groups.len()]; concepts.len()];
        ScoreTable { concepts, groups, values }
    }

    pub fn push(&mut self, concept: usize, group: usize, score: f64) {
        self.values[concept][group].push(score);
    }

    /// Per-group means of one concept; NaN for groups without scores.
    pub fn means(&self, concept: usize) -> Vec<f64> {
        self.values[concept]
            .iter()
            .map(|v| if v.is_empty() { f64::NAN } else { v.iter().sum::<f64>() / v.len() as f64 })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpuriousFinding {
    pub concept: String,
    pub top_group: String,
    pub top_mean: f64,
    pub h_statistic: f64,
    pub p_value: f64,
    pub alpha_corrected: f64,
    pub reject: bool,
}

/// Screens concepts whose mean score exceeds `threshold` in at least one
/// group, then tests each screened concept across all groups with a
/// Kruskal-Wallis test at `alpha` divided by the number of screened concepts.
pub fn mine_spurious(table: &ScoreTable, threshold: f64, alpha: f64) -> Vec<SpuriousFinding> {
    struct Screened {
        concept: usize,
        top_group: usize,
        top_mean: f64,
    }
    let screened: Vec<Screened> = (0..table.concepts.len())
        .filter_map(|c| {
            let means = table.means(c);
            let non_empty = means.iter().filter(|m| !m.is_nan()).count();
            let (top_group, top_mean) = means
                .iter()
                .copied()
                .enumerate()
                .filter(|(_, m)| !m.is_nan())
                .fold(None, |best: Option<(usize, f64)>, (g, m)| match best {
                    Some((_, bm)) if bm >= m => best,
                    _ => Some((g, m)),
                })?;
            (non_empty >= 2 && top_mean > threshold).then_some(Screened { concept: c, top_group, top_mean })
        })
        .collect();
    if screened.is_empty() {
        return Vec::new();
    }
    let alpha_corrected = bonferroni(alpha, screened.len());
    let mut findings: Vec<SpuriousFinding> = screened
        .into_iter()
        .filter_map(|s| {
            let groups: SampleGroups = table
                .groups
                .iter()
                .zip(&table.values[s.concept])
                .filter(|(_, v)| !v.is_empty())
                .map(|(g, v)| (g.clone(), v.clone()))
                .collect();
            let kw = kruskal_wallis(&groups).ok()?;
            Some(SpuriousFinding {
                concept: table.concepts[s.concept].clone(),
                top_group: table.groups[s.top_group].clone(),
                top_mean: s.top_mean,
                h_statistic: kw.h_statistic,
                p_value: kw.p_value,
                alpha_corrected,
                reject: kw.p_value < alpha_corrected,
            })
        })
        .collect();
    findings.sort_by(|a, b| (&a.top_group, &a.concept).cmp(&(&b.top_group, &b.concept)));
    findings
}
