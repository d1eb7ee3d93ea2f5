use serde::{Deserialize, Serialize};

use super::chisq::chi_square_sf;
use super::StatsError;

/// Labelled samples compared by an omnibus test.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SampleGroups {
    pub groups: Vec<(String, Vec<f64>)>,
}

impl SampleGroups {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, label: impl Into<String>, values: Vec<f64>) {
        self.groups.push((label.into(), values));
    }

    pub fn total(&self) -> usize {
        self.groups.iter().map(|(_, v)| v.len()).sum()
    }

    pub fn validate(&self) -> Result<(), StatsError> {
        if self.groups.len() < 2 {
            return Err(StatsError::DegenerateInput(format!(
                "need at least 2 groups, got {}",
                self.groups.len()
            )));
        }
        if let Some((label, _)) = self.groups.iter().find(|(_, v)| v.is_empty()) {
            return Err(StatsError::DegenerateInput(format!("group {label:?} is empty")));
        }
        if self.total() < 3 {
            return Err(StatsError::DegenerateInput(format!(
                "need at least 3 observations, got {}",
                self.total()
            )));
        }
        if self.groups.iter().flat_map(|(_, v)| v).any(|x| !x.is_finite()) {
            return Err(StatsError::DegenerateInput("non-finite value".into()));
        }
        Ok(())
    }
}

impl<S: Into<String>> FromIterator<(S, Vec<f64>)> for SampleGroups {
    fn from_iter<I: IntoIterator<Item = (S, Vec<f64>)>>(iter: I) -> Self {
        SampleGroups { groups: iter.into_iter().map(|(l, v)| (l.into(), v)).collect() }
    }
}

/// Outcome of one hypothesis test at a corrected significance level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub h_statistic: f64,
    pub degrees_freedom: u32,
    pub p_value: f64,
    pub alpha_corrected: f64,
    pub reject: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power: Option<f64>,
}

/// Kruskal-Wallis statistic before a significance level is applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KruskalWallis {
    /// H without tie correction.
    pub h_uncorrected: f64,
    /// Tie-corrected H'.
    pub h_statistic: f64,
    pub degrees_freedom: u32,
    pub p_value: f64,
}

impl KruskalWallis {
    pub fn test(&self, alpha_corrected: f64) -> TestResult {
        TestResult {
            h_statistic: self.h_statistic,
            degrees_freedom: self.degrees_freedom,
            p_value: self.p_value,
            alpha_corrected,
            reject: self.p_value < alpha_corrected,
            power: None,
        }
    }
}

/// Mid-ranks (1-based) of `values` plus the size of every tie block.
pub fn mid_ranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i..j share ranks i+1..=j
        let rank = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            ranks[idx] = rank;
        }
        if j - i > 1 {
            ties.push(j - i);
        }
        i = j;
    }
    (ranks, ties)
}

pub fn kruskal_wallis(g: &SampleGroups) -> Result<KruskalWallis, StatsError> {
    g.validate()?;
    let pooled: Vec<f64> = g.groups.iter().flat_map(|(_, v)| v.iter().copied()).collect();
    let n = pooled.len() as f64;
    let df = (g.groups.len() - 1) as u32;
    let (ranks, ties) = mid_ranks(&pooled);

    let centre = (n + 1.0) / 2.0;
    let mut start = 0;
    let mut spread = 0.0;
    for (_, values) in &g.groups {
        let ni = values.len();
        let mean_rank = ranks[start..start + ni].iter().sum::<f64>() / ni as f64;
        spread += ni as f64 * (mean_rank - centre).powi(2);
        start += ni;
    }
    let h = 12.0 / (n * (n + 1.0)) * spread;

    let tie_sum: f64 = ties.iter().map(|&t| (t as f64).powi(3) - t as f64).sum();
    let correction = 1.0 - tie_sum / (n.powi(3) - n);
    if correction <= 0.0 {
        // every value identical
        return Ok(KruskalWallis { h_uncorrected: 0.0, h_statistic: 0.0, degrees_freedom: df, p_value: 1.0 });
    }
    let h_corrected = h / correction;
    Ok(KruskalWallis {
        h_uncorrected: h,
        h_statistic: h_corrected,
        degrees_freedom: df,
        p_value: chi_square_sf(h_corrected, df),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn groups(data: &[&[f64]]) -> SampleGroups {
        data.iter().enumerate().map(|(i, v)| (format!("g{i}"), v.to_vec())).collect()
    }

    #[test]
    fn identical_groups() {
        let kw = kruskal_wallis(&groups(&[&[1., 2., 3.], &[1., 2., 3.]])).unwrap();
        assert_eq!(kw.h_statistic, 0.0);
        assert!((kw.p_value - 1.0).abs() < 1e-15);
        assert!(!kw.test(0.05).reject);
    }

    #[test]
    fn separated_groups() {
        // ranks 1..3 vs 4..6: H = 12/42 * (3*(2-3.5)^2 + 3*(5-3.5)^2) = 27/7
        let kw = kruskal_wallis(&groups(&[&[1., 2., 3.], &[4., 5., 6.]])).unwrap();
        assert!((kw.h_statistic - 27.0 / 7.0).abs() < 1e-12);
        assert!((kw.p_value - 0.0495).abs() < 1e-4);
        assert!(kw.test(0.05).reject);
    }

    #[test]
    fn all_tied_is_zero() {
        let kw = kruskal_wallis(&groups(&[&[0.5, 0.5], &[0.5, 0.5, 0.5]])).unwrap();
        assert_eq!(kw.h_statistic, 0.0);
        assert_eq!(kw.p_value, 1.0);
    }

    #[test]
    fn mid_ranks_with_ties() {
        let (r, t) = mid_ranks(&[1., 2., 2., 4., 5., 6., 7., 7., 9.]);
        assert_eq!(r, vec![1., 2.5, 2.5, 4., 5., 6., 7.5, 7.5, 9.]);
        assert_eq!(t, vec![2, 2]);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(kruskal_wallis(&groups(&[&[1., 2., 3.]])).is_err());
        assert!(kruskal_wallis(&groups(&[&[1., 2.], &[]])).is_err());
        assert!(kruskal_wallis(&groups(&[&[1.], &[2.]])).is_err());
        assert!(kruskal_wallis(&groups(&[&[1., f64::NAN], &[2.]])).is_err());
    }

    #[test]
    fn tie_correction_matches_scipy_reference() {
        // scipy.stats.kruskal([1, 1, 2], [2, 3, 3, 4])
        let kw = kruskal_wallis(&groups(&[&[1., 1., 2.], &[2., 3., 3., 4.]])).unwrap();
        assert!((kw.h_statistic - 3.9952830188679247).abs() < 1e-12);
        assert!((kw.p_value - 0.04562778898313967).abs() < 1e-12);
        assert!((kw.h_uncorrected - 3.78125).abs() < 1e-12);
    }
}
