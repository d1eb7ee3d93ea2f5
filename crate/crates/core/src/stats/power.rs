use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::kruskal::{kruskal_wallis, SampleGroups};
use super::StatsError;

/// Monte-Carlo power of the Kruskal-Wallis test at `n_per_group` observations
/// per group: each simulation resamples every observed group with replacement
/// and records whether the test rejects at `alpha`.
///
/// Simulation `i` draws from ChaCha stream `i` of `seed`, so the estimate is
/// reproducible regardless of thread scheduling.
pub fn estimate_power(
    g: &SampleGroups,
    n_per_group: usize,
    n_sims: usize,
    alpha: f64,
    seed: u64,
) -> Result<f64, StatsError> {
    if g.groups.len() < 2 || g.groups.iter().any(|(_, v)| v.is_empty()) {
        return Err(StatsError::DegenerateInput(
            "power needs at least 2 non-empty groups".into(),
        ));
    }
    if n_per_group < 2 {
        return Err(StatsError::DegenerateInput("n_per_group must be at least 2".into()));
    }
    if n_sims == 0 {
        return Err(StatsError::DegenerateInput("n_sims must be at least 1".into()));
    }
    g.validate()?;

    let rejections: usize = (0..n_sims)
        .into_par_iter()
        .map(|sim| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(sim as u64);
            let resampled: SampleGroups = g
                .groups
                .iter()
                .map(|(label, values)| {
                    let draw = (0..n_per_group)
                        .map(|_| values[rng.random_range(0..values.len())])
                        .collect();
                    (label.clone(), draw)
                })
                .collect();
            match kruskal_wallis(&resampled) {
                Ok(kw) if kw.p_value < alpha => 1,
                _ => 0,
            }
        })
        .sum();
    Ok(rejections as f64 / n_sims as f64)
}

/// Power at each per-group size, in the order given.
pub fn power_curve(
    g: &SampleGroups,
    sizes: &[usize],
    n_sims: usize,
    alpha: f64,
    seed: u64,
) -> Result<Vec<(usize, f64)>, StatsError> {
    sizes
        .iter()
        .map(|&n| estimate_power(g, n, n_sims, alpha, seed).map(|p| (n, p)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two(a: Vec<f64>, b: Vec<f64>) -> SampleGroups {
        [("a", a), ("b", b)].into_iter().collect()
    }

    #[test]
    fn disjoint_supports_always_reject() {
        let low: Vec<f64> = (0..50).map(|i| i as f64 * 0.002).collect();
        let high: Vec<f64> = (0..50).map(|i| 0.9 + i as f64 * 0.002).collect();
        let p = estimate_power(&two(low, high), 100, 200, 0.05, 1).unwrap();
        assert!(p >= 0.99, "{p}");
    }

    #[test]
    fn reproducible_for_a_seed() {
        let a: Vec<f64> = (0..40).map(|i| (i as f64 * 0.37).sin().abs()).collect();
        let b: Vec<f64> = (0..40).map(|i| (i as f64 * 0.53).cos().abs()).collect();
        let g = two(a, b);
        let p1 = estimate_power(&g, 30, 300, 0.05, 9).unwrap();
        let p2 = estimate_power(&g, 30, 300, 0.05, 9).unwrap();
        assert_eq!(p1.to_bits(), p2.to_bits());
    }

    #[test]
    fn rejects_bad_arguments() {
        let g = two(vec![1.0, 2.0], vec![3.0]);
        assert!(estimate_power(&g, 1, 10, 0.05, 0).is_err());
        assert!(estimate_power(&g, 10, 0, 0.05, 0).is_err());
        assert!(estimate_power(&two(vec![], vec![1.0]), 10, 10, 0.05, 0).is_err());
    }
}
