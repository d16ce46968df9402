use std::collections::BTreeMap;

use super::{LatticeState, Trajectory};
use crate::error::{OqwError, Result};

/// Normal quantile for a two-sided 95% interval.
const Z95: f64 = 1.959963984540054;

/// Summary of an equal-horizon ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalStats {
    pub trajectories: usize,
    pub horizon: f64,
    /// Mean terminal displacement divided by the horizon, per coordinate.
    pub drift: [f64; 2],
    /// 95% normal-approximation interval `(lo, hi)` for each drift coordinate.
    pub drift_ci: [(f64, f64); 2],
    /// Visits to the origin after time 0, summed over trajectories.
    pub return_count: usize,
    /// Mean time (or number of steps) spent at the origin.
    pub mean_time_at_origin: f64,
    /// Terminal positions and their counts.
    pub terminal_histogram: BTreeMap<[i64; 2], usize>,
}

pub fn empirical_stats(trajectories: &[Trajectory]) -> Result<EmpiricalStats> {
    let first = trajectories
        .first()
        .ok_or_else(|| OqwError::InvalidArgument("empirical statistics need at least one trajectory".into()))?;
    let horizon = first.horizon;
    if trajectories.iter().any(|t| t.horizon != horizon) {
        return Err(OqwError::InvalidArgument("trajectories have different horizons".into()));
    }
    if !(horizon > 0.0) {
        return Err(OqwError::InvalidArgument("horizon must be positive".into()));
    }
    let n = trajectories.len() as f64;
    let mut drift = [0.0; 2];
    let mut drift_ci = [(0.0, 0.0); 2];
    for (axis, (m, ci)) in drift.iter_mut().zip(drift_ci.iter_mut()).enumerate() {
        let samples: Vec<f64> = trajectories
            .iter()
            .map(|t| (t.final_position()[axis] - t.positions[0][axis]) as f64 / horizon)
            .collect();
        let mean = samples.iter().sum::<f64>() / n;
        let var = if samples.len() > 1 {
            samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        let half = Z95 * (var / n).sqrt();
        *m = mean;
        *ci = (mean - half, mean + half);
    }
    let mut terminal_histogram = BTreeMap::new();
    for t in trajectories {
        *terminal_histogram.entry(t.final_position()).or_insert(0) += 1;
    }
    Ok(EmpiricalStats {
        trajectories: trajectories.len(),
        horizon,
        drift,
        drift_ci,
        return_count: trajectories.iter().map(Trajectory::returns_to_origin).sum(),
        mean_time_at_origin: trajectories.iter().map(Trajectory::time_at_origin).sum::<f64>() / n,
        terminal_histogram,
    })
}

/// Total-variation distance between an empirical terminal histogram and an exact site distribution.
pub fn total_variation(histogram: &BTreeMap<[i64; 2], usize>, exact: &LatticeState) -> f64 {
    let total: usize = histogram.values().sum();
    let mut sites: BTreeMap<[i64; 2], (f64, f64)> = BTreeMap::new();
    for (site, p) in exact.distribution() {
        sites.entry(site).or_default().1 = p;
    }
    for (site, &count) in histogram {
        sites.entry(*site).or_default().0 = count as f64 / total as f64;
    }
    0.5 * sites.values().map(|(a, b)| (a - b).abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coin::Coin;
    use crate::density::DensityOperator;
    use crate::registry;
    use crate::simulate::{exact_distribution, simulate_discrete_ensemble, Execution, LatticeBudget};

    fn still(horizon: usize) -> Trajectory {
        Trajectory {
            seed: 0,
            stream: 0,
            lattice_dim: 1,
            positions: vec![[0, 0]; horizon + 1],
            jump_times: None,
            states: None,
            horizon: horizon as f64,
        }
    }

    #[test]
    fn all_zero_trajectories() {
        let s = empirical_stats(&[still(10), still(10), still(10)]).unwrap();
        assert_eq!(s.drift, [0.0, 0.0]);
        assert_eq!(s.drift_ci, [(0.0, 0.0), (0.0, 0.0)]);
        assert_eq!(s.return_count, 30);
        assert_eq!(s.mean_time_at_origin, 11.0);
    }

    #[test]
    fn rejects_empty_and_mixed_horizons() {
        assert!(empirical_stats(&[]).is_err());
        assert!(empirical_stats(&[still(3), still(4)]).is_err());
    }

    #[test]
    fn continuous_time_at_origin() {
        let t = Trajectory {
            seed: 0,
            stream: 0,
            lattice_dim: 2,
            positions: vec![[0, 0], [1, 0], [0, 0]],
            jump_times: Some(vec![0.0, 1.5, 2.0]),
            states: None,
            horizon: 5.0,
        };
        assert_eq!(t.time_at_origin(), 4.5);
        assert_eq!(t.returns_to_origin(), 1);
        assert_eq!(t.position_at(1.7), [1, 0]);
        assert_eq!(t.position_at(2.0), [0, 0]);
    }

    #[test]
    fn ensemble_matches_exact_distribution() {
        let coin: Coin = registry::ex5_2_coin().into();
        let rho = DensityOperator::maximally_mixed(3);
        let ens = simulate_discrete_ensemble(&coin, &rho, 20, 4000, 3, Execution::default()).unwrap();
        let exact = exact_distribution(&coin, &rho, 20, &LatticeBudget::default(), Execution::default()).unwrap();
        let stats = empirical_stats(&ens).unwrap();
        assert!(total_variation(&stats.terminal_histogram, &exact) < 0.05);
    }
}
