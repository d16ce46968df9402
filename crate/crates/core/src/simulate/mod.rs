//! Verification engines: exact evolution of the site distribution on a
//! truncated lattice, Monte Carlo quantum trajectories in discrete and
//! continuous time, and ensemble statistics.
//!
//! Ensembles are reproducible: trajectory `k` of a run seeded with `s` draws
//! from `ChaCha8Rng::seed_from_u64(s)` switched to stream `k`, so results do
//! not depend on how trajectories are scheduled across threads.

mod continuous;
mod discrete;
mod lattice;
mod stats;

pub use continuous::{
    simulate_ct, simulate_ct_ensemble, simulate_ct_jumps, simulate_ct_jumps_ensemble, WaitingTimeSampler,
};
pub use discrete::{simulate_discrete, simulate_discrete_ensemble};
pub use lattice::{
    exact_distribution, exact_jump_distribution, return_mass_partial_sum, LatticeBudget, LatticeEvolution, LatticeState,
};
pub use stats::{empirical_stats, total_variation, EmpiricalStats};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::density::DensityOperator;

/// How independent work items are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Data-parallel over the rayon pool; sequential when built without the `parallel` feature.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// Sizes the global rayon pool; a no-op without the `parallel` feature.
/// Fails if the pool was already built.
pub fn configure_threads(threads: usize) -> crate::error::Result<()> {
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| crate::error::OqwError::InvalidArgument(format!("thread pool: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    Ok(())
}

/// RNG for trajectory `stream` of a run seeded with `seed`.
pub fn trajectory_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Maps `f` over `0..count` keeping index order.
pub(crate) fn map_indexed<T, F>(count: usize, execution: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..count).into_par_iter().map(f).collect()
        }
        _ => (0..count).map(f).collect(),
    }
}

/// One sampled path of the walk.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub seed: u64,
    pub stream: u64,
    /// 1 for walks on ℤ (second coordinate always 0), 2 for ℤ².
    pub lattice_dim: usize,
    /// `X₀, X₁, …` in discrete time; `X₀, X_{T₁}, …` in continuous time.
    pub positions: Vec<[i64; 2]>,
    /// `0, T₁, T₂, …` in continuous time.
    pub jump_times: Option<Vec<f64>>,
    /// Internal states aligned with `positions`, when requested.
    pub states: Option<Vec<DensityOperator>>,
    /// Number of steps, or the final time.
    pub horizon: f64,
}

impl Trajectory {
    pub fn final_position(&self) -> [i64; 2] {
        *self.positions.last().expect("trajectories start with X0")
    }

    /// Visits to the starting site after time 0 (at jump times in continuous time).
    pub fn returns_to_origin(&self) -> usize {
        let start = self.positions[0];
        self.positions[1..].iter().filter(|&&x| x == start).count()
    }

    /// Time spent at the starting site: steps `n ≤ horizon` with `Xₙ = X₀`,
    /// or Lebesgue time in continuous time.
    pub fn time_at_origin(&self) -> f64 {
        let start = self.positions[0];
        match &self.jump_times {
            None => self.positions.iter().filter(|&&x| x == start).count() as f64,
            Some(times) => {
                let mut total = 0.0;
                for (k, x) in self.positions.iter().enumerate() {
                    if *x == start {
                        let end = times.get(k + 1).copied().unwrap_or(self.horizon);
                        total += end - times[k];
                    }
                }
                total
            }
        }
    }

    /// Position at time `t` (continuous time) or step `⌊t⌋` (discrete time).
    pub fn position_at(&self, t: f64) -> [i64; 2] {
        match &self.jump_times {
            None => self.positions[(t.max(0.0) as usize).min(self.positions.len() - 1)],
            Some(times) => {
                let k = times.partition_point(|&s| s <= t);
                self.positions[k.saturating_sub(1)]
            }
        }
    }
}
